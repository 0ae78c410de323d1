//! Multiple-testing corrections.

/// Bonferroni adjustment: each p times the family size, capped at 1.
pub fn bonferroni_adjust(pvals: &[f64]) -> Vec<f64> {
    let m = pvals.len() as f64;
    pvals.iter().map(|p| (p * m).min(1.0)).collect()
}

/// Benjamini-Hochberg step-up adjusted p-values: sort ascending, scale the
/// i-th by m/i, enforce monotonicity from the largest down, map back.
pub fn benjamini_hochberg(pvals: &[f64]) -> Vec<f64> {
    let m = pvals.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).unwrap().then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running_min = 1.0f64;
    for i in (0..m).rev() {
        let rank = i + 1;
        let q = pvals[order[i]] * m as f64 / rank as f64;
        running_min = running_min.min(q).min(1.0);
        adjusted[order[i]] = running_min;
    }
    adjusted
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bonferroni_basics() {
        assert_eq!(bonferroni_adjust(&[0.01]), vec![0.01]);
        assert_eq!(bonferroni_adjust(&[0.01, 0.2]), vec![0.02, 0.4]);
        assert_eq!(bonferroni_adjust(&[0.6, 0.9]), vec![1.0, 1.0]);
    }

    #[test]
    fn bh_two_values() {
        // sorted: 0.01*2/1 = 0.02; 0.04*2/2 = 0.04; already monotone.
        let adj = benjamini_hochberg(&[0.01, 0.04]);
        assert!((adj[0] - 0.02).abs() < 1e-15);
        assert!((adj[1] - 0.04).abs() < 1e-15);
    }

    #[test]
    fn bh_all_equal_unchanged() {
        let adj = benjamini_hochberg(&[0.05, 0.05, 0.05]);
        for a in adj {
            assert!((a - 0.05).abs() < 1e-15);
        }
    }

    /// Definition-based oracle: adjusted_i = min over j with p_(j) >= p_i of
    /// p_(j) * m / rank(j), capped at 1. Quadratic and independent of the
    /// step-up implementation.
    pub(crate) fn bh_definitional(pvals: &[f64]) -> Vec<f64> {
        let m = pvals.len();
        let mut sorted: Vec<(f64, usize)> = pvals.iter().copied().zip(0..).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pvals
            .iter()
            .map(|&p| {
                let mut best = 1.0f64;
                for (rank0, &(ps, _)) in sorted.iter().enumerate() {
                    if ps >= p - 1e-300 {
                        let q = ps * m as f64 / (rank0 + 1) as f64;
                        if q < best {
                            best = q;
                        }
                    }
                }
                best.min(1.0)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn bh_matches_definitional_oracle(pvals in proptest::collection::vec(0.0..=1.0f64, 1..20)) {
            let fast = benjamini_hochberg(&pvals);
            let slow = bh_definitional(&pvals);
            for (f, s) in fast.iter().zip(&slow) {
                prop_assert!((f - s).abs() < 1e-12, "{} vs {}", f, s);
            }
        }

        #[test]
        fn adjusted_never_below_raw(pvals in proptest::collection::vec(0.0..=1.0f64, 1..20)) {
            let bh = benjamini_hochberg(&pvals);
            let bonf = bonferroni_adjust(&pvals);
            for ((raw, b), bf) in pvals.iter().zip(&bh).zip(&bonf) {
                prop_assert!(*b >= raw - 1e-15);
                prop_assert!(*bf >= raw - 1e-15);
                // Bonferroni is never less conservative than BH
                prop_assert!(*bf >= *b - 1e-12);
            }
        }
    }
}
