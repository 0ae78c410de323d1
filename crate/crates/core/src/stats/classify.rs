//! Four-level significance classification: fixed p-value bins, or the
//! adaptive midpoint split of the rejected/accepted p ranges.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignificanceClass {
    StrongSignificant,
    Significant,
    WeakEvidence,
    LittleNoEvidence,
}

impl SignificanceClass {
    pub fn label(&self) -> &'static str {
        match self {
            SignificanceClass::StrongSignificant => "strong_significant",
            SignificanceClass::Significant => "significant",
            SignificanceClass::WeakEvidence => "weak_evidence",
            SignificanceClass::LittleNoEvidence => "little_no_evidence",
        }
    }

    /// Map legend color.
    pub fn color(&self) -> &'static str {
        match self {
            SignificanceClass::StrongSignificant => "blue",
            SignificanceClass::Significant => "green",
            SignificanceClass::WeakEvidence => "yellow",
            SignificanceClass::LittleNoEvidence => "orange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinsMode {
    Fixed,
    Adaptive,
}

impl std::str::FromStr for BinsMode {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "fixed" => Ok(BinsMode::Fixed),
            "adaptive" => Ok(BinsMode::Adaptive),
            other => Err(crate::error::Error::Input(format!(
                "unknown bins mode {other:?}"
            ))),
        }
    }
}

/// Fixed evidence bins, half-open on the left: [0, 0.01) strong,
/// [0.01, 0.05) significant, [0.05, 0.10) weak, [0.10, 1] little/none.
pub fn classify_fixed_bins(p: f64) -> SignificanceClass {
    if p < 0.01 {
        SignificanceClass::StrongSignificant
    } else if p < 0.05 {
        SignificanceClass::Significant
    } else if p < 0.10 {
        SignificanceClass::WeakEvidence
    } else {
        SignificanceClass::LittleNoEvidence
    }
}

/// Adaptive classification: within the rejected set, p-values at or below
/// the midpoint of [min, max] are strong-significant, the rest significant;
/// the accepted set splits symmetrically into weak and little/no evidence.
/// A single-member partition degenerates to its stronger class.
pub fn classify_adaptive(reject: &[bool], pvals: &[f64]) -> Vec<SignificanceClass> {
    assert_eq!(reject.len(), pvals.len());
    let bounds = |flag: bool| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&r, &p) in reject.iter().zip(pvals) {
            if r == flag {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        (lo + hi) / 2.0
    };
    let rejected_mid = bounds(true);
    let accepted_mid = bounds(false);
    reject
        .iter()
        .zip(pvals)
        .map(|(&r, &p)| {
            if r {
                if p <= rejected_mid {
                    SignificanceClass::StrongSignificant
                } else {
                    SignificanceClass::Significant
                }
            } else if p <= accepted_mid {
                SignificanceClass::WeakEvidence
            } else {
                SignificanceClass::LittleNoEvidence
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_bin_boundaries() {
        use SignificanceClass::*;
        assert_eq!(classify_fixed_bins(0.005), StrongSignificant);
        assert_eq!(classify_fixed_bins(0.01), Significant);
        assert_eq!(classify_fixed_bins(0.07), WeakEvidence);
        assert_eq!(classify_fixed_bins(0.10), LittleNoEvidence);
        assert_eq!(classify_fixed_bins(1.0), LittleNoEvidence);
    }

    #[test]
    fn adaptive_midpoint_split() {
        // rejected {0.001, 0.002, 0.009}: midpoint 0.005
        let classes = classify_adaptive(&[true, true, true], &[0.001, 0.002, 0.009]);
        use SignificanceClass::*;
        assert_eq!(classes, vec![StrongSignificant, StrongSignificant, Significant]);
    }

    #[test]
    fn adaptive_single_rejected_is_strong() {
        let classes = classify_adaptive(&[true, false], &[0.004, 0.5]);
        assert_eq!(classes[0], SignificanceClass::StrongSignificant);
        assert_eq!(classes[1], SignificanceClass::WeakEvidence);
    }

    #[test]
    fn adaptive_accepted_split() {
        let classes = classify_adaptive(&[false, false], &[0.2, 0.8]);
        use SignificanceClass::*;
        assert_eq!(classes, vec![WeakEvidence, LittleNoEvidence]);
    }

    proptest! {
        /// Larger p never maps to a strictly stronger class.
        #[test]
        fn fixed_bins_monotone(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(classify_fixed_bins(lo) <= classify_fixed_bins(hi));
        }
    }
}
