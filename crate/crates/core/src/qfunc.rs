//! Gaussian tail function and its inverse.

use libm::erfc;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `Q(x) = Pr[N(0,1) > x]`.
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of [`q_func`] on `(0, 1)`.
///
/// Starts from a rational approximation and refines by safeguarded Newton
/// steps on `ln Q(x) = ln p`, which stays well conditioned deep in the tail.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("{p} is outside (0, 1)")));
    }
    Ok(if p == 0.5 {
        0.0
    } else if p < 0.5 {
        upper_tail_inv(p)
    } else {
        // 1 - p is exact for p in [0.5, 1)
        -upper_tail_inv(1.0 - p)
    })
}

/// Solves `Q(x) = p` for `p < 0.5`, so `x > 0`.
fn upper_tail_inv(p: f64) -> f64 {
    let t = (-2.0 * p.ln()).sqrt();
    let mut x = t
        - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
            / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t);
    let target = p.ln();
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    x = x.clamp(lo, hi);
    for _ in 0..100 {
        let q = q_func(x);
        let g = q.ln() - target;
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx ln Q(x) = -phi(x) / Q(x)
        let step = g * q / std_normal_pdf(x);
        let mut next = x + step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}
