//! Confidence intervals for simulation reports.

use crate::optimize::pairwise_sum;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = z / denom * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Sample mean and its standard error. The standard error is 0 for fewer
/// than two values.
pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 0 of 100: upper limit z^2 / (t + z^2)
        let (lo, hi) = wilson_interval(0, 100, Z_95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z_95 * Z_95 / (100.0 + Z_95 * Z_95)).abs() < 1e-15);
        // 50 of 100 is symmetric about 0.5
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!((lo + hi - 1.0).abs() < 1e-15);
        assert!((hi - 0.596_168_5).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for (s, t) in [(0, 1), (1, 1), (3, 7), (999, 1000)] {
            let (lo, hi) = wilson_interval(s, t, Z_95);
            let p = s as f64 / t as f64;
            assert!(lo <= p && p <= hi);
        }
    }

    #[test]
    fn mean_and_error() {
        let (m, se) = mean_and_std_err(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std_err(&[0.3]), (0.3, 0.0));
    }
}
