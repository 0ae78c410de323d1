//! Wilcoxon signed-rank test on paired differences: exact conditional
//! distribution for small samples, normal approximation with tie correction
//! and continuity correction above.

use super::dist::norm_cdf;
use crate::error::{Error, Result};

/// Largest number of nonzero differences handled by the exact path.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wilcoxon {
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    pub p: f64,
    /// Nonzero differences after zero removal.
    pub n_used: usize,
    pub exact: bool,
}

/// Two-sided signed-rank test of H0 "real - theo is symmetric around 0".
/// Zero differences are removed; all-zero input gives p = 1 by convention.
pub fn wilcoxon_signed_rank(theo: &[f64], real: &[f64]) -> Result<Wilcoxon> {
    if theo.len() != real.len() {
        return Err(Error::Input(format!(
            "paired samples differ in length: {} vs {}",
            theo.len(),
            real.len()
        )));
    }
    let diffs: Vec<f64> = real
        .iter()
        .zip(theo)
        .map(|(r, t)| r - t)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::Input("non-finite difference".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(Wilcoxon {
            w_plus: 0.0,
            p: 1.0,
            n_used: 0,
            exact: true,
        });
    }

    let ranks = average_ranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();

    if n <= EXACT_LIMIT {
        let p = exact_two_sided(&ranks, w_plus);
        Ok(Wilcoxon {
            w_plus,
            p,
            n_used: n,
            exact: true,
        })
    } else {
        let p = approx_two_sided(&diffs, w_plus);
        Ok(Wilcoxon {
            w_plus,
            p,
            n_used: n,
            exact: false,
        })
    }
}

/// Ranks of |d| with average ranks for ties.
fn average_ranks(diffs: &[f64]) -> Vec<f64> {
    let n = diffs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| diffs[a].abs().partial_cmp(&diffs[b].abs()).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[idx[j + 1]].abs() == diffs[idx[i]].abs() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &of in &idx[i..=j] {
            ranks[of] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p conditional on the observed |d| ranks, through the
/// subset-sum distribution over all 2^n sign assignments. Ranks are doubled
/// so tied (half-integral) ranks stay integral.
fn exact_two_sided(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let w2 = (w_plus * 2.0).round() as usize;
    let denom = (1u64 << n) as f64;
    let p_le: u64 = counts[..=w2].iter().sum();
    let p_ge: u64 = counts[w2..].iter().sum();
    let p = 2.0 * (p_le as f64).min(p_ge as f64) / denom;
    p.min(1.0)
}

fn approx_two_sided(diffs: &[f64], w_plus: f64) -> f64 {
    let n = diffs.len() as f64;
    let mu = n * (n + 1.0) / 4.0;
    // tie correction over groups of equal |d|
    let mut sorted: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let d = w_plus - mu;
    // continuity correction toward the mean
    let z = (d - 0.5 * d.signum()) / var.sqrt();
    (2.0 * (1.0 - norm_cdf(z.abs()))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_positive_differences_exact_quarter() {
        // All three diffs positive: W+ = 6, most extreme of 2^3 = 8
        // assignments, two-sided p = 2/8 = 0.25.
        let theo = [0.0, 0.0, 0.0];
        let real = [1.0, 2.0, 3.0];
        let r = wilcoxon_signed_rank(&theo, &real).unwrap();
        assert!(r.exact);
        assert_eq!(r.w_plus, 6.0);
        assert!((r.p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn perfectly_balanced_pair_gives_one() {
        let theo = [0.0, 0.0];
        let real = [-1.0, 1.0];
        let r = wilcoxon_signed_rank(&theo, &real).unwrap();
        assert!((r.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_differences_convention() {
        let v = [3.0, 4.0, 5.0];
        let r = wilcoxon_signed_rank(&v, &v).unwrap();
        assert_eq!(r.p, 1.0);
        assert_eq!(r.n_used, 0);
    }

    /// Brute-force oracle: enumerate every sign vector explicitly.
    fn enumerated_two_sided(diffs: &[f64]) -> f64 {
        let n = diffs.len();
        let ranks = average_ranks(diffs);
        let w_obs: f64 = diffs
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| **d > 0.0)
            .map(|(_, r)| *r)
            .sum();
        let mut le = 0u64;
        let mut ge = 0u64;
        for mask in 0u64..(1 << n) {
            let w: f64 = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum();
            if w <= w_obs + 1e-9 {
                le += 1;
            }
            if w >= w_obs - 1e-9 {
                ge += 1;
            }
        }
        let denom = (1u64 << n) as f64;
        (2.0 * (le as f64).min(ge as f64) / denom).min(1.0)
    }

    #[test]
    fn exact_path_matches_full_enumeration() {
        // Mixed signs and a tie in |d|.
        let theo = [0.0; 7];
        let real = [2.0, -1.5, 1.5, 3.0, -0.5, 4.0, 0.25];
        let r = wilcoxon_signed_rank(&theo, &real).unwrap();
        let oracle = enumerated_two_sided(&real.iter().map(|v| *v).collect::<Vec<_>>());
        assert!((r.p - oracle).abs() < 1e-12, "{} vs {}", r.p, oracle);
    }

    #[test]
    fn approx_path_reasonable_under_shift() {
        // Clear location shift at n = 30 must be highly significant.
        let theo: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let real: Vec<f64> = theo.iter().map(|v| v + 3.0 + (v % 3.0)).collect();
        let r = wilcoxon_signed_rank(&theo, &real).unwrap();
        assert!(!r.exact);
        assert!(r.p < 1e-4, "p = {}", r.p);
    }
}
