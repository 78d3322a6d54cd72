//! Sample moments, two-sample Kolmogorov–Smirnov statistics and the
//! significance policy shared by all Monte-Carlo checks.

use statrs::distribution::{ContinuousCDF, Normal};

/// Single-test threshold on `|z|`.
pub const Z_SINGLE: f64 = 4.0;

/// Family-wise level used for suites of tests.
pub const FAMILY_ALPHA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0, n };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Self { mean, se: (var / n as f64).sqrt(), n }
    }

    /// `mean / se`; a degenerate sample with zero spread scores 0 when its
    /// mean is exactly 0 and `±∞` otherwise.
    pub fn z(&self) -> f64 {
        z_score(self.mean, self.se)
    }
}

pub fn z_score(estimate: f64, se: f64) -> f64 {
    if se > 0.0 {
        estimate / se
    } else if estimate == 0.0 {
        0.0
    } else {
        estimate.signum() * f64::INFINITY
    }
}

/// Two-sided standard normal quantile: `z` with `P(|N(0,1)| > z) = alpha`.
pub fn two_sided_normal_quantile(alpha: f64) -> f64 {
    let n = Normal::standard();
    n.inverse_cdf(1.0 - alpha / 2.0)
}

/// `|z|` threshold for one of `m` simultaneous tests: the Bonferroni
/// quantile at family-wise level [`FAMILY_ALPHA`], never below the
/// single-test threshold.
pub fn suite_threshold(m: usize) -> f64 {
    two_sided_normal_quantile(FAMILY_ALPHA / m.max(1) as f64).max(Z_SINGLE)
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// `sup_x |F_a(x) − F_b(x)|` for the empirical distribution functions of two
/// samples. Infinite values are allowed and compare as usual.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < a.len() && a[i].total_cmp(&x).is_eq() {
            i += 1;
        }
        while j < b.len() && b[j].total_cmp(&x).is_eq() {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`:
/// `sqrt(−ln(alpha/2)/2) · sqrt((n+m)/(n·m))`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn moments() {
        let e = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert_abs_diff_eq!(e.se, (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
        let flat = MeanEstimate::from_samples(&[0.0; 10]);
        assert_eq!(flat.z(), 0.0);
        assert_eq!(MeanEstimate::from_samples(&[1.0; 10]).z(), f64::INFINITY);
    }

    #[test]
    fn normal_quantiles() {
        assert_abs_diff_eq!(two_sided_normal_quantile(0.05), 1.959964, epsilon = 1e-5);
        assert_eq!(suite_threshold(1), 4.0);
        // 1e-3/1000 two-sided is about 4.89
        assert_abs_diff_eq!(suite_threshold(1000), 4.8916, epsilon = 1e-3);
    }

    /// Direct evaluation of the empirical CDF difference at every sample point.
    fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        a.iter().chain(b).map(|&x| (cdf(a, x) - cdf(b, x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_statistic(&[0.0, 0.0], &[5.0]), 1.0);
        assert_eq!(ks_statistic(&[0.0, f64::INFINITY], &[f64::INFINITY]), 0.5);
        assert_abs_diff_eq!(ks_critical(0.05, 100, 100), 1.3581 * 0.141421, epsilon = 1e-4);
    }

    proptest! {
        #[test]
        fn ks_matches_brute_force(a in prop::collection::vec(-3i32..3, 1..30), b in prop::collection::vec(-3i32..3, 1..30)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            prop_assert!((ks_statistic(&a, &b) - ks_brute(&a, &b)).abs() < 1e-12);
        }
    }
}
