//! Statistical engine: normality gate, paired tests, multiple-testing
//! corrections and the four-level significance classification.

mod adjust;
mod classify;
mod dist;
mod shapiro;
mod ttest;
mod wilcoxon;

pub use adjust::{benjamini_hochberg, bonferroni_adjust};
pub use classify::{classify_adaptive, classify_fixed_bins, BinsMode, SignificanceClass};
pub use shapiro::{shapiro_wilk, ShapiroWilk};
pub use ttest::{paired_t_test, PairedT};
pub use wilcoxon::{wilcoxon_signed_rank, Wilcoxon, EXACT_LIMIT};

use crate::error::{Error, Result};
use serde::Serialize;

/// Significance level of the Shapiro-Wilk normality gate that routes a
/// cluster to the t-test (normal differences) or Wilcoxon (otherwise).
pub const NORMALITY_GATE_ALPHA: f64 = 0.05;

/// Minimum paired traversals for a cluster to be tested; below this the
/// exact Wilcoxon p-value granularity is too coarse to be meaningful.
pub const DEFAULT_N_MIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Bonferroni,
    BenjaminiHochberg,
}

impl std::str::FromStr for Correction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bonferroni" => Ok(Correction::Bonferroni),
            "bh" => Ok(Correction::BenjaminiHochberg),
            other => Err(Error::Input(format!("unknown correction {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    T,
    Wilcoxon,
}

impl TestKind {
    pub fn label(&self) -> &'static str {
        match self {
            TestKind::T => "t",
            TestKind::Wilcoxon => "wilcoxon",
        }
    }
}

/// Paired theoretical/real traversal seconds for one cluster, one entry per
/// trajectory that crossed it.
#[derive(Debug, Clone)]
pub struct ClusterSample {
    pub cluster_id: u64,
    pub theo_s: Vec<f64>,
    pub real_s: Vec<f64>,
}

impl ClusterSample {
    pub fn n(&self) -> usize {
        self.theo_s.len()
    }

    pub fn mean_theo(&self) -> f64 {
        mean(&self.theo_s)
    }

    pub fn mean_real(&self) -> f64 {
        mean(&self.real_s)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Outcome of testing one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub cluster_id: u64,
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub test_used: TestKind,
}

/// Test result with its family-corrected p-value and class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedResult {
    pub test: TestResult,
    pub p_adjusted: f64,
    pub rejected: bool,
    pub class: SignificanceClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTestReport {
    pub results: Vec<ClassifiedResult>,
    /// (cluster_id, n) of clusters below the n_min gate.
    pub skipped: Vec<(u64, usize)>,
}

/// Tests one cluster's paired vectors: Shapiro-Wilk gate on the differences
/// picks the paired t-test or the Wilcoxon signed-rank test.
pub fn test_cluster(sample: &ClusterSample) -> Result<TestResult> {
    if sample.theo_s.len() != sample.real_s.len() {
        return Err(Error::Input(format!(
            "cluster {}: paired vectors differ in length",
            sample.cluster_id
        )));
    }
    let diffs: Vec<f64> = sample
        .real_s
        .iter()
        .zip(&sample.theo_s)
        .map(|(r, t)| r - t)
        .collect();

    // The gate needs 3 <= n <= 5000 and a non-constant sample; when it
    // cannot run, the t-test conventions already cover the degenerate
    // cases, so default to the t-test.
    let normal = match shapiro_wilk(&diffs) {
        Ok(sw) => sw.p > NORMALITY_GATE_ALPHA,
        Err(_) => true,
    };
    if normal {
        let t = paired_t_test(&sample.theo_s, &sample.real_s)?;
        Ok(TestResult {
            cluster_id: sample.cluster_id,
            n: t.n,
            statistic: t.t,
            p_value: t.p,
            test_used: TestKind::T,
        })
    } else {
        let w = wilcoxon_signed_rank(&sample.theo_s, &sample.real_s)?;
        Ok(TestResult {
            cluster_id: sample.cluster_id,
            n: sample.n(),
            statistic: w.w_plus,
            p_value: w.p,
            test_used: TestKind::Wilcoxon,
        })
    }
}

/// Runs the full per-family procedure over the clusters of one route:
/// normality-gated paired tests, the chosen correction across the family,
/// rejection at `alpha` (Bonferroni) or `q` (Benjamini-Hochberg), and the
/// chosen classification mode on the corrected p-values.
pub fn run_cluster_tests(
    samples: &[ClusterSample],
    alpha: f64,
    q: f64,
    correction: Correction,
    bins: BinsMode,
    n_min: usize,
) -> Result<ClusterTestReport> {
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&q) || q <= 0.0 {
        return Err(Error::Input(format!("q {q} outside (0, 1)")));
    }

    let mut skipped = Vec::new();
    let mut tested = Vec::new();
    for s in samples {
        if s.n() < n_min {
            skipped.push((s.cluster_id, s.n()));
        } else {
            tested.push(test_cluster(s)?);
        }
    }

    let raw: Vec<f64> = tested.iter().map(|t| t.p_value).collect();
    let (adjusted, level) = match correction {
        Correction::Bonferroni => (bonferroni_adjust(&raw), alpha),
        Correction::BenjaminiHochberg => (benjamini_hochberg(&raw), q),
    };
    let rejected: Vec<bool> = adjusted.iter().map(|p| *p <= level).collect();

    let classes: Vec<SignificanceClass> = match bins {
        BinsMode::Fixed => adjusted.iter().map(|p| classify_fixed_bins(*p)).collect(),
        BinsMode::Adaptive => classify_adaptive(&rejected, &adjusted),
    };

    let results = tested
        .into_iter()
        .zip(adjusted)
        .zip(rejected)
        .zip(classes)
        .map(|(((test, p_adjusted), rejected), class)| ClassifiedResult {
            test,
            p_adjusted,
            rejected,
            class,
        })
        .collect();

    Ok(ClusterTestReport { results, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_draws(rng: &mut ChaCha8Rng, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                mean + sd * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }

    fn sample(id: u64, theo: Vec<f64>, real: Vec<f64>) -> ClusterSample {
        ClusterSample {
            cluster_id: id,
            theo_s: theo,
            real_s: real,
        }
    }

    #[test]
    fn normal_differences_choose_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theo = normal_draws(&mut rng, 40, 60.0, 5.0);
        let noise = normal_draws(&mut rng, 40, 0.0, 2.0);
        let real: Vec<f64> = theo.iter().zip(&noise).map(|(t, e)| t + e).collect();
        let r = test_cluster(&sample(1, theo, real)).unwrap();
        assert_eq!(r.test_used, TestKind::T);
    }

    #[test]
    fn heavy_tailed_differences_choose_wilcoxon() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theo = normal_draws(&mut rng, 60, 60.0, 5.0);
        // Cauchy-tailed noise through tan of a uniform
        let real: Vec<f64> = theo
            .iter()
            .map(|t| {
                let u: f64 = rng.gen_range(0.02..0.98);
                t + (std::f64::consts::PI * (u - 0.5)).tan() * 3.0
            })
            .collect();
        let r = test_cluster(&sample(2, theo, real)).unwrap();
        assert_eq!(r.test_used, TestKind::Wilcoxon);
    }

    #[test]
    fn small_clusters_are_skipped() {
        let report = run_cluster_tests(
            &[
                sample(1, vec![1.0; 3], vec![1.5; 3]),
                sample(
                    2,
                    (0..10).map(|i| i as f64).collect(),
                    (0..10).map(|i| i as f64 + 0.1 * (i % 3) as f64).collect(),
                ),
            ],
            0.05,
            0.05,
            Correction::BenjaminiHochberg,
            BinsMode::Fixed,
            DEFAULT_N_MIN,
        )
        .unwrap();
        assert_eq!(report.skipped, vec![(1, 3)]);
        assert_eq!(report.results.len(), 1);
        assert_eq!(report.results[0].test.cluster_id, 2);
    }

    #[test]
    fn adjusted_p_at_least_raw() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<ClusterSample> = (0..12)
            .map(|i| {
                let theo = normal_draws(&mut rng, 20, 50.0, 4.0);
                let shift = if i % 4 == 0 { 5.0 } else { 0.0 };
                let real: Vec<f64> = theo
                    .iter()
                    .zip(normal_draws(&mut rng, 20, shift, 2.0))
                    .map(|(t, e)| t + e)
                    .collect();
                sample(i, theo, real)
            })
            .collect();
        for corr in [Correction::Bonferroni, Correction::BenjaminiHochberg] {
            let report =
                run_cluster_tests(&samples, 0.05, 0.05, corr, BinsMode::Fixed, 8).unwrap();
            for r in &report.results {
                assert!(r.p_adjusted >= r.test.p_value - 1e-15);
            }
        }
    }

    #[test]
    fn invalid_levels_rejected() {
        assert!(run_cluster_tests(&[], 0.0, 0.05, Correction::Bonferroni, BinsMode::Fixed, 8)
            .is_err());
        assert!(run_cluster_tests(&[], 0.05, 1.0, Correction::Bonferroni, BinsMode::Fixed, 8)
            .is_err());
    }
}
