//! Paired two-sided Student t-test on real-minus-theoretical differences.

use super::dist::student_t_sf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub t: f64,
    pub p: f64,
    pub n: usize,
}

/// Two-sided paired t-test of H0 "mean(real - theo) = 0".
///
/// Zero-variance differences use fixed conventions: all-zero differences
/// give p = 1 (no effect), constant nonzero differences give p = 0 (the
/// t statistic diverges).
pub fn paired_t_test(theo: &[f64], real: &[f64]) -> Result<PairedT> {
    if theo.len() != real.len() {
        return Err(Error::Input(format!(
            "paired samples differ in length: {} vs {}",
            theo.len(),
            real.len()
        )));
    }
    let n = theo.len();
    if n < 2 {
        return Err(Error::Input(format!("need n >= 2 pairs, got {n}")));
    }
    let diffs: Vec<f64> = real.iter().zip(theo).map(|(r, t)| r - t).collect();
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (nf - 1.0);

    if var <= 0.0 {
        return Ok(if mean == 0.0 {
            PairedT { t: 0.0, p: 1.0, n }
        } else {
            PairedT {
                t: mean.signum() * f64::INFINITY,
                p: 0.0,
                n,
            }
        });
    }

    let t = mean / (var / nf).sqrt();
    let p = (2.0 * student_t_sf(t.abs(), nf - 1.0)).min(1.0);
    Ok(PairedT { t, p, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_p_one() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let r = paired_t_test(&v, &v).unwrap();
        assert_eq!(r.p, 1.0);
        assert_eq!(r.t, 0.0);
    }

    #[test]
    fn constant_nonzero_difference_gives_p_zero() {
        let theo = [1.0, 2.0, 3.0, 4.0];
        let real = [2.0, 3.0, 4.0, 5.0];
        let r = paired_t_test(&theo, &real).unwrap();
        assert_eq!(r.p, 0.0);
        assert!(r.t.is_infinite() && r.t > 0.0);
    }

    #[test]
    fn known_fixture_matches_reference() {
        // differences {2, -1, 3, 0, 1}: mean 1, sd sqrt(2.5),
        // t = 1 / sqrt(2.5/5) = sqrt(2); p two-sided with 4 df.
        let theo = [0.0, 0.0, 0.0, 0.0, 0.0];
        let real = [2.0, -1.0, 3.0, 0.0, 1.0];
        let r = paired_t_test(&theo, &real).unwrap();
        assert!((r.t - 2f64.sqrt()).abs() < 1e-12);
        // reference value computed with scipy.stats.ttest_rel
        assert!((r.p - 0.18541951311162578).abs() < 1e-9, "p = {}", r.p);
    }

    #[test]
    fn length_mismatch_and_tiny_n_rejected() {
        assert!(paired_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(paired_t_test(&[1.0], &[1.0]).is_err());
    }
}
