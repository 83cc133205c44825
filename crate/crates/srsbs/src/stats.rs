//! Exact binomial confidence intervals for the reported probabilities.

use statrs::distribution::{Beta, ContinuousCDF};

/// Clopper-Pearson interval for `k` successes in `n` trials at level
/// `1 - alpha`.
pub fn clopper_pearson(k: usize, n: usize, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0)
            .expect("positive shape")
            .inverse_cdf(alpha / 2.0)
    };
    let upper = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf)
            .expect("positive shape")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_cases() {
        // k = 0: upper bound 1 - (alpha / 2)^(1 / n)
        let (lo, hi) = clopper_pearson(0, 300, 0.05);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(1.0 / 300.0))).abs() < 1e-9);
        let (lo, hi) = clopper_pearson(300, 300, 0.05);
        assert!((lo - 0.025f64.powf(1.0 / 300.0)).abs() < 1e-9);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn interior_contains_estimate() {
        let (lo, hi) = clopper_pearson(270, 300, 0.05);
        assert!(lo < 0.9 && 0.9 < hi);
        assert!(hi - lo < 0.08);
    }
}
