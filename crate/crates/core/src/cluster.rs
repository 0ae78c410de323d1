//! K-means on the cumulative-distance feature with automatic k selection.
//!
//! Clustering is strictly one-dimensional: cumulative route distance is the
//! monotone continuous feature that makes clusters contiguous road
//! segments. Fits work on a sorted copy with prefix sums, so Lloyd
//! iterations cost O(k log n) after an O(n log n) sort.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONVERGENCE_SHIFT_M: f64 = 1e-6;
const MAX_LLOYD_ITERS: usize = 200;
const RESTARTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSelector {
    Bic,
    Silhouette,
}

impl std::str::FromStr for KSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bic" => Ok(KSelector::Bic),
            "silhouette" => Ok(KSelector::Silhouette),
            other => Err(Error::Input(format!("unknown k selector {other:?}"))),
        }
    }
}

/// A fitted 1-D k-means model. Cluster ids are ordered by ascending
/// centroid, so contiguous intervals get contiguous ids.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub k: usize,
    /// Ascending centroid positions, meters.
    pub centroids: Vec<f64>,
    /// Cluster id per input point, aligned with the input order.
    pub assignments: Vec<usize>,
    /// Sum of squared within-cluster distances.
    pub inertia: f64,
}

impl ClusterModel {
    /// Per-cluster point counts.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.k];
        for &a in &self.assignments {
            out[a] += 1;
        }
        out
    }

    /// Min and max value per cluster, from the original values.
    pub fn intervals(&self, values: &[f64]) -> Vec<(f64, f64)> {
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); self.k];
        for (&v, &a) in values.iter().zip(&self.assignments) {
            out[a].0 = out[a].0.min(v);
            out[a].1 = out[a].1.max(v);
        }
        out
    }
}

/// Sorted view with prefix sums used by all fits over one value set.
struct SortedValues {
    /// (value, original index), ascending by value then index.
    order: Vec<(f64, usize)>,
    /// prefix[i] = sum of first i values.
    prefix: Vec<f64>,
    prefix_sq: Vec<f64>,
    distinct: usize,
}

impl SortedValues {
    fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("cannot cluster an empty value set".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite value in clustering input".into()));
        }
        let mut order: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
        order.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prefix = Vec::with_capacity(order.len() + 1);
        let mut prefix_sq = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        prefix_sq.push(0.0);
        for &(v, _) in &order {
            prefix.push(prefix.last().unwrap() + v);
            prefix_sq.push(prefix_sq.last().unwrap() + v * v);
        }
        let mut distinct = 1;
        for w in order.windows(2) {
            if w[1].0 > w[0].0 {
                distinct += 1;
            }
        }
        Ok(SortedValues {
            order,
            prefix,
            prefix_sq,
            distinct,
        })
    }

    fn n(&self) -> usize {
        self.order.len()
    }

    fn value(&self, i: usize) -> f64 {
        self.order[i].0
    }

    fn range_sum(&self, lo: usize, hi: usize) -> f64 {
        self.prefix[hi] - self.prefix[lo]
    }

    fn range_sq_sum(&self, lo: usize, hi: usize) -> f64 {
        self.prefix_sq[hi] - self.prefix_sq[lo]
    }

    /// Inertia of interval [lo, hi) around center c.
    fn interval_cost(&self, lo: usize, hi: usize, c: f64) -> f64 {
        let n = (hi - lo) as f64;
        self.range_sq_sum(lo, hi) - 2.0 * c * self.range_sum(lo, hi) + n * c * c
    }
}

/// Fitted state in sorted space: cluster j covers sorted indices
/// [bounds[j], bounds[j+1]).
struct SortedFit {
    centroids: Vec<f64>,
    bounds: Vec<usize>,
    inertia: f64,
}

fn lloyd(sv: &SortedValues, mut centroids: Vec<f64>) -> SortedFit {
    let n = sv.n();
    let k = centroids.len();
    centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut bounds = vec![0usize; k + 1];
    for _ in 0..MAX_LLOYD_ITERS {
        // Assignment: boundary between centroids j and j+1 is their midpoint.
        bounds[0] = 0;
        bounds[k] = n;
        for j in 1..k {
            let mid = (centroids[j - 1] + centroids[j]) / 2.0;
            // first index with value > mid, but never before the previous bound
            let p = sv.order.partition_point(|&(v, _)| v <= mid);
            bounds[j] = p.max(bounds[j - 1]);
        }
        // Reseed any empty cluster at the most expensive point so every
        // cluster is non-empty at convergence.
        if let Some(j) = (0..k).find(|&j| bounds[j] == bounds[j + 1]) {
            let (mut worst_i, mut worst_cost) = (0usize, f64::NEG_INFINITY);
            for i in 0..n {
                let v = sv.value(i);
                let d = centroids
                    .iter()
                    .map(|c| (v - c).abs())
                    .fold(f64::INFINITY, f64::min);
                if d > worst_cost {
                    worst_cost = d;
                    worst_i = i;
                }
            }
            centroids[j] = sv.value(worst_i);
            centroids.sort_by(|a, b| a.partial_cmp(b).unwrap());
            continue;
        }
        // Update.
        let mut shift: f64 = 0.0;
        for j in 0..k {
            let (lo, hi) = (bounds[j], bounds[j + 1]);
            let c = sv.range_sum(lo, hi) / (hi - lo) as f64;
            shift = shift.max((c - centroids[j]).abs());
            centroids[j] = c;
        }
        if shift < CONVERGENCE_SHIFT_M {
            break;
        }
    }
    // Final assignment and inertia under the converged centroids.
    bounds[0] = 0;
    bounds[k] = n;
    for j in 1..k {
        let mid = (centroids[j - 1] + centroids[j]) / 2.0;
        bounds[j] = sv.order.partition_point(|&(v, _)| v <= mid).max(bounds[j - 1]);
    }
    let inertia = (0..k)
        .map(|j| sv.interval_cost(bounds[j], bounds[j + 1], centroids[j]))
        .sum();
    SortedFit {
        centroids,
        bounds,
        inertia,
    }
}

/// k-means++ seeding on the sorted values.
fn kmeanspp_init(sv: &SortedValues, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = sv.n();
    let mut centroids = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centroids.push(sv.value(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| (sv.value(i) - centroids[0]).powi(2))
        .collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // all remaining mass at distance zero; precondition guarantees
            // enough distinct values, so pick the first uncovered distinct
            (0..n)
                .find(|&i| !centroids.iter().any(|c| (sv.value(i) - c).abs() == 0.0))
                .unwrap_or(0)
        } else {
            let target = rng.gen_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    pick = i;
                    break;
                }
            }
            pick
        };
        let c = sv.value(next);
        centroids.push(c);
        for i in 0..n {
            d2[i] = d2[i].min((sv.value(i) - c).powi(2));
        }
    }
    centroids
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn fit_sorted(sv: &SortedValues, k: usize, seed: u64) -> Result<SortedFit> {
    if k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    if k > sv.distinct {
        return Err(Error::Input(format!(
            "k = {k} exceeds the {} distinct values",
            sv.distinct
        )));
    }
    let mut best: Option<SortedFit> = None;
    for restart in 0..RESTARTS {
        let mut rng =
            ChaCha8Rng::seed_from_u64(splitmix64(seed ^ ((k as u64) << 32) ^ restart as u64));
        let init = kmeanspp_init(sv, k, &mut rng);
        let fit = lloyd(sv, init);
        // Strict less keeps the earliest restart on ties.
        if best.as_ref().map_or(true, |b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.unwrap())
}

fn to_model(sv: &SortedValues, fit: SortedFit) -> ClusterModel {
    let k = fit.centroids.len();
    let mut assignments = vec![0usize; sv.n()];
    for j in 0..k {
        for i in fit.bounds[j]..fit.bounds[j + 1] {
            assignments[sv.order[i].1] = j;
        }
    }
    ClusterModel {
        k,
        centroids: fit.centroids,
        assignments,
        inertia: fit.inertia,
    }
}

/// Lloyd k-means with k-means++ seeding, best of 10 restarts by inertia.
pub fn kmeans_1d(values: &[f64], k: usize, seed: u64) -> Result<ClusterModel> {
    let sv = SortedValues::new(values)?;
    let fit = fit_sorted(&sv, k, seed)?;
    Ok(to_model(&sv, fit))
}

/// Spherical-Gaussian BIC of a fit: log-likelihood minus (p/2)·ln n with
/// p = 2k free parameters (k means, k−1 mixing weights, one pooled
/// variance). Larger is better.
fn bic_score(sv: &SortedValues, fit: &SortedFit) -> f64 {
    let n = sv.n() as f64;
    let k = fit.centroids.len();
    let dof = (sv.n().saturating_sub(k)).max(1) as f64;
    let variance = (fit.inertia / dof).max(1e-12);
    let mut ll = -0.5 * (sv.n() - k.min(sv.n())) as f64;
    for j in 0..k {
        let nj = (fit.bounds[j + 1] - fit.bounds[j]) as f64;
        ll += nj * (nj.ln() - n.ln() - 0.5 * (2.0 * std::f64::consts::PI * variance).ln());
    }
    let p = 2.0 * k as f64;
    ll - (p / 2.0) * n.ln()
}

/// Mean silhouette coefficient, exact, via per-cluster prefix sums.
/// Not defined for k = 1.
fn silhouette_score(sv: &SortedValues, fit: &SortedFit) -> f64 {
    let k = fit.centroids.len();
    if k < 2 {
        return f64::NEG_INFINITY;
    }
    let n = sv.n();
    // mean |x - y| over y in sorted interval [lo, hi)
    let mean_dist = |x: f64, lo: usize, hi: usize, exclude_self: bool| -> f64 {
        let cnt = (hi - lo) as f64;
        let split = lo + sv.order[lo..hi].partition_point(|&(v, _)| v <= x);
        let left = x * (split - lo) as f64 - sv.range_sum(lo, split);
        let right = sv.range_sum(split, hi) - x * (hi - split) as f64;
        let denom = if exclude_self { cnt - 1.0 } else { cnt };
        if denom <= 0.0 {
            0.0
        } else {
            (left + right) / denom
        }
    };
    let mut total = 0.0;
    for j in 0..k {
        for i in fit.bounds[j]..fit.bounds[j + 1] {
            let x = sv.value(i);
            let own = fit.bounds[j + 1] - fit.bounds[j];
            if own == 1 {
                continue; // s(i) = 0 for singleton clusters
            }
            let a = mean_dist(x, fit.bounds[j], fit.bounds[j + 1], true);
            let mut b = f64::INFINITY;
            for m in 0..k {
                if m != j {
                    b = b.min(mean_dist(x, fit.bounds[m], fit.bounds[m + 1], false));
                }
            }
            let s = if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 };
            total += s;
        }
    }
    total / n as f64
}

/// Fits every k in `k_range` (inclusive) and returns the fit with the best
/// selector score; ties go to the smallest k.
pub fn select_k(
    values: &[f64],
    k_range: (usize, usize),
    selector: KSelector,
    seed: u64,
) -> Result<ClusterModel> {
    let (k_min, k_max) = k_range;
    if k_min == 0 || k_min > k_max {
        return Err(Error::Input(format!("empty k range {k_min}..{k_max}")));
    }
    let sv = SortedValues::new(values)?;
    if k_max > sv.distinct {
        return Err(Error::Input(format!(
            "k range {k_min}..{k_max} exceeds the {} distinct values",
            sv.distinct
        )));
    }
    let mut best: Option<(f64, usize, SortedFit)> = None;
    for k in k_min..=k_max {
        let fit = fit_sorted(&sv, k, seed)?;
        let score = match selector {
            KSelector::Bic => bic_score(&sv, &fit),
            KSelector::Silhouette => silhouette_score(&sv, &fit),
        };
        // Strictly greater keeps the smallest k on ties.
        if best.as_ref().map_or(true, |(s, _, _)| score > *s) {
            best = Some((score, k, fit));
        }
    }
    let (_, _, fit) = best.expect("k range verified non-empty");
    Ok(to_model(&sv, fit))
}

/// Contiguity audit: sorting points by value must yield assignments that
/// form contiguous runs, one run per cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContiguityReport {
    pub pass: bool,
    /// Original indices of points whose cluster was already closed when
    /// they appeared in sorted order.
    pub offending: Vec<usize>,
}

pub fn verify_cluster_contiguity(model: &ClusterModel, values: &[f64]) -> ContiguityReport {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut seen = vec![false; model.k];
    let mut current: Option<usize> = None;
    let mut offending = Vec::new();
    for &i in &order {
        let a = model.assignments[i];
        if current == Some(a) {
            continue;
        }
        if seen[a] {
            offending.push(i);
        } else {
            seen[a] = true;
            current = Some(a);
        }
    }
    ContiguityReport {
        pass: offending.is_empty(),
        offending,
    }
}
