//! Finite-blocklength rate bounds for a fixed input distribution.
//!
//! All logarithms are base 2, so rates are in bits per channel use and the
//! moments come from [`info_moments`](crate::dmc::info_moments).

use serde::{Deserialize, Serialize};

use crate::dmc::InfoMoments;
use crate::error::{Error, Result};
use crate::optimize::{lin_space, log_space, scan_golden_max};
use crate::qfunc::q_inv;

/// Berry-Esseen constant for non-identically distributed summands.
pub const BERRY_ESSEEN: f64 = 0.7975;

/// Search range and scan size for the achievability coefficient `K`.
pub const K_RANGE: (f64, f64) = (0.01, 20.0);
/// Search range for `log2(delta)` in the converse.
pub const LOG2_DELTA_RANGE: (f64, f64) = (-40.0, 5.0);
const SCAN_POINTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub eps: f64,
    pub k_coeff: Option<f64>,
    pub delta: Option<f64>,
}

impl BoundParams {
    pub fn new(n: u64, eps: f64) -> Result<Self> {
        let p = BoundParams {
            n,
            eps,
            k_coeff: None,
            delta: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k_coeff = Some(k);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "blocklength must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param("eps", format!("{} is outside (0, 1)", self.eps)));
        }
        if let Some(k) = self.k_coeff {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::param("k_coeff", format!("{k} must be positive")));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::param("delta", format!("{d} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Bits per channel use; `None` when infeasible. May be negative.
    pub rate: Option<f64>,
    /// The `beta_u` or `beta_l` correction.
    pub beta: f64,
    pub feasible: bool,
    pub params_used: BoundParams,
}

impl BoundResult {
    fn new(rate: Option<f64>, beta: f64, params_used: BoundParams) -> Self {
        BoundResult {
            rate,
            beta,
            feasible: rate.is_some(),
            params_used,
        }
    }
}

/// `0.7975 T / sqrt(n V^3)`, zero when the density is constant.
pub fn berry_esseen_term(m: &InfoMoments, n: u64) -> f64 {
    if m.var <= 0.0 {
        0.0
    } else {
        BERRY_ESSEEN * m.third_abs / (n as f64 * m.var.powi(3)).sqrt()
    }
}

/// `sqrt(V/n) Q^{-1}(arg)`, or `None` when `arg` is outside `(0, 1)`.
fn dispersion_penalty(m: &InfoMoments, n: u64, arg: f64) -> Option<f64> {
    if !(arg > 0.0 && arg < 1.0) {
        return None;
    }
    if m.var <= 0.0 {
        return Some(0.0);
    }
    Some((m.var / n as f64).sqrt() * q_inv(arg).ok()?)
}

/// Achievable rate `I - sqrt(V/n) Q^{-1}(eps - beta_u) - K log2(n)/n` with
/// `beta_u = n^{-K} + 0.7975 T / sqrt(n V^3)`.
pub fn achievability_rate(m: &InfoMoments, p: &BoundParams) -> Result<BoundResult> {
    p.validate()?;
    let k = p
        .k_coeff
        .ok_or_else(|| Error::param("k_coeff", "required for the achievability bound"))?;
    let n = p.n as f64;
    let beta = n.powf(-k) + berry_esseen_term(m, p.n);
    let rate = dispersion_penalty(m, p.n, p.eps - beta)
        .map(|pen| m.mutual_info - pen - k * n.log2() / n);
    Ok(BoundResult::new(rate, beta, *p))
}

/// Converse rate `I - sqrt(V/n) Q^{-1}(eps + beta_l) + log2(n)/(2n) -
/// log2(delta)/n` with `beta_l = 0.7975 T / sqrt(n V^3) + delta/sqrt(n)`.
pub fn converse_rate(m: &InfoMoments, p: &BoundParams) -> Result<BoundResult> {
    p.validate()?;
    let delta = p
        .delta
        .ok_or_else(|| Error::param("delta", "required for the converse bound"))?;
    let n = p.n as f64;
    let beta = berry_esseen_term(m, p.n) + delta / n.sqrt();
    let rate = dispersion_penalty(m, p.n, p.eps + beta)
        .map(|pen| m.mutual_info - pen + n.log2() / (2.0 * n) - delta.log2() / n);
    Ok(BoundResult::new(rate, beta, *p))
}

/// Maximizes the achievability rate over `K` in [`K_RANGE`]: a 40-point
/// log-spaced scan followed by golden-section refinement.
pub fn optimize_k(m: &InfoMoments, n: u64, eps: f64) -> Result<BoundResult> {
    let base = BoundParams::new(n, eps)?;
    let eval = |k: f64| -> Option<f64> {
        achievability_rate(m, &base.with_k(k)).ok().and_then(|r| r.rate)
    };
    let grid = log_space(K_RANGE.0, K_RANGE.1, SCAN_POINTS);
    let k = scan_golden_max(&eval, &grid).map_or(K_RANGE.1, |(k, _)| k);
    achievability_rate(m, &base.with_k(k))
}

/// Tightest converse over `delta`: minimizes the bound over
/// `log2(delta)` in [`LOG2_DELTA_RANGE`] with the same scan-then-golden
/// scheme as [`optimize_k`].
///
/// The bound holds for every `delta > 0`, so the smallest value is the one
/// that constrains achievable rates.
pub fn optimize_delta(m: &InfoMoments, n: u64, eps: f64) -> Result<BoundResult> {
    let base = BoundParams::new(n, eps)?;
    let eval = |t: f64| -> Option<f64> {
        converse_rate(m, &base.with_delta(t.exp2()))
            .ok()
            .and_then(|r| r.rate)
            .map(|r| -r)
    };
    let grid = lin_space(LOG2_DELTA_RANGE.0, LOG2_DELTA_RANGE.1, SCAN_POINTS);
    let t = scan_golden_max(&eval, &grid).map_or(LOG2_DELTA_RANGE.0, |(t, _)| t);
    converse_rate(m, &base.with_delta(t.exp2()))
}

/// Normal approximation `I - sqrt(V/n) Q^{-1}(eps)`, without the
/// `O(log n / n)` term.
pub fn second_order_rate(m: &InfoMoments, n: u64, eps: f64) -> Result<f64> {
    BoundParams::new(n, eps)?;
    let pen = dispersion_penalty(m, n, eps).expect("eps validated in (0, 1)");
    Ok(m.mutual_info - pen)
}
