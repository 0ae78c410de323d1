//! Shapiro-Wilk W test for normality, Royston's AS R94 formulation
//! (Applied Statistics 44, 1995) as used by R's shapiro.test: valid for
//! 3 <= n <= 5000, coefficients from normal order statistics, p-value from
//! a normalizing transformation of W.

use super::dist::{norm_cdf, norm_ppf};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p: f64,
}

fn poly(coef: &[f64], x: f64) -> f64 {
    let mut it = coef.iter();
    let c0 = *it.next().unwrap();
    let mut acc = 0.0;
    for &c in it.rev() {
        acc = (acc + c) * x;
    }
    c0 + acc
}

/// Tests the null hypothesis that `sample` was drawn from a normal
/// distribution. Requires 3 <= n <= 5000 and a non-constant sample.
pub fn shapiro_wilk(sample: &[f64]) -> Result<ShapiroWilk> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::Input(format!(
            "Shapiro-Wilk requires 3 <= n <= 5000, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite value in sample".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(Error::DegenerateSample(
            "constant sample has no normality to test".into(),
        ));
    }

    let an = n as f64;
    let nn2 = n / 2;
    // a[1..=nn2], 1-based like the published algorithm.
    let mut a = vec![0.0; nn2 + 1];
    if n == 3 {
        a[1] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let an25 = an + 0.25;
        let mut summ2 = 0.0;
        for (i, ai) in a.iter_mut().enumerate().skip(1) {
            *ai = norm_ppf((i as f64 - 0.375) / an25);
            summ2 += *ai * *ai;
        }
        summ2 *= 2.0;
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        let a1 = poly(&C1, rsn) - a[1] / ssumm2;
        let (i1, fac) = if n > 5 {
            let a2 = -a[2] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            a[2] = a2;
            (3, fac)
        } else {
            let fac = ((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (2, fac)
        };
        a[1] = a1;
        for ai in a.iter_mut().skip(i1) {
            *ai /= -fac;
        }
    }

    // W as the squared correlation between the ordered sample and the
    // coefficients, computed range-scaled for stability.
    let mut sx = 0.0;
    for v in &x {
        sx += v / range;
    }
    let mut sa = 0.0;
    for i in 1..=n {
        let j = n - i + 1;
        if i != j {
            let sign = if i > j { 1.0 } else { -1.0 };
            sa += sign * a[i.min(j)];
        }
    }
    sx /= an;
    sa /= an;

    let mut ssa = 0.0;
    let mut ssx = 0.0;
    let mut sax = 0.0;
    for i in 1..=n {
        let j = n - i + 1;
        let asa = if i != j {
            let sign = if i > j { 1.0 } else { -1.0 };
            sign * a[i.min(j)] - sa
        } else {
            -sa
        };
        let xsx = x[i - 1] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = (1.0 - w1).clamp(0.0, 1.0);

    Ok(ShapiroWilk {
        w,
        p: p_value(w, n),
    })
}

fn p_value(w: f64, n: usize) -> f64 {
    if w >= 1.0 {
        return 1.0;
    }
    if n == 3 {
        const PI6: f64 = 1.90985931710274; // 6/pi
        const STQR: f64 = 1.04719755119660; // asin(sqrt(3/4))
        return (PI6 * (w.sqrt().asin() - STQR)).clamp(0.0, 1.0);
    }

    const G: [f64; 2] = [-2.273, 0.459];
    const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

    let an = n as f64;
    let mut y = (1.0 - w).ln();
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        let xx = an.ln();
        (poly(&C5, xx), poly(&C6, xx).exp())
    };
    // upper tail of N(m, s)
    1.0 - norm_cdf((y - m) / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n3_equally_spaced_is_perfectly_normal() {
        let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((r.w - 1.0).abs() < 1e-6, "w = {}", r.w);
        assert!((r.p - 1.0).abs() < 1e-6, "p = {}", r.p);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(
            shapiro_wilk(&[5.0, 5.0, 5.0, 5.0]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn n_bounds_enforced() {
        assert!(shapiro_wilk(&[1.0, 2.0]).is_err());
        let big = vec![0.0; 5001];
        assert!(shapiro_wilk(&big).is_err());
    }

    #[test]
    fn heavy_tailed_sample_rejected() {
        // 50 draws from a deterministic heavy-tailed shape: t-like via
        // inverse-CDF of a Cauchy at fixed grid points.
        let sample: Vec<f64> = (1..=50)
            .map(|i| {
                let u = i as f64 / 51.0;
                (std::f64::consts::PI * (u - 0.5)).tan()
            })
            .collect();
        let r = shapiro_wilk(&sample).unwrap();
        assert!(r.p < 0.05, "expected rejection, got p = {}", r.p);
    }
}
