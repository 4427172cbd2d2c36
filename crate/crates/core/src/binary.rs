//! The binary channel `Y = S X` with Bernoulli-`q` state, perfect feedback
//! `Z = Y` and Hamming distortion, plus its closed-form quantities.
//!
//! The marginal `P(y|x)` is a Z-channel: input 0 always yields 0, input 1
//! yields 1 with probability `q`.

use serde::{Deserialize, Serialize};

use crate::dmc::{Alphabets, StateDmc};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryChannelSpec {
    /// `Pr[S = 1]`.
    pub q: f64,
    /// `Pr[X = 1]`.
    pub alpha: f64,
}

impl BinaryChannelSpec {
    pub fn new(q: f64, alpha: f64) -> Result<Self> {
        check_q(q)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::param("alpha", format!("{alpha} is outside [0, 1]")));
        }
        Ok(BinaryChannelSpec { q, alpha })
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::param("q", format!("{q} is outside (0, 1)")))
    }
}

pub fn binary_channel(q: f64) -> Result<StateDmc> {
    check_q(q)?;
    let sizes = Alphabets { x: 2, s: 2, y: 2, z: 2 };
    StateDmc::from_fn(
        sizes,
        vec![1.0 - q, q],
        |x, s, y, z| {
            if y == s * x && z == y {
                1.0
            } else {
                0.0
            }
        },
        |s, s_hat| (s != s_hat) as u8 as f64,
    )
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    xlog2_inv(p) + xlog2_inv(1.0 - p)
}

/// `-p log2 p`.
fn xlog2_inv(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Closed-form quantities of the binary example, all in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryClosedForms {
    pub mutual_info: f64,
    pub var: f64,
    /// Computed as `E|i - I|^3` over the three-point support
    /// `{(1,1), (1,0), (0,0)}` with weights `alpha q`, `alpha (1-q)`, `1-alpha`.
    pub third_abs: f64,
    /// `(1 - alpha) min{q, 1-q}`.
    pub distortion: f64,
    pub capacity: f64,
    pub alpha_star: f64,
}

impl BinaryClosedForms {
    /// Distortion at the capacity-achieving input.
    pub fn d_comm(&self, q: f64) -> f64 {
        (1.0 - self.alpha_star) * q.min(1.0 - q)
    }
}

pub fn binary_closed_forms(spec: &BinaryChannelSpec) -> Result<BinaryClosedForms> {
    let BinaryChannelSpec { q, alpha } = *spec;
    check_q(q)?;
    let hq = binary_entropy(q);
    let mutual_info = binary_entropy(q * alpha) - alpha * hq;

    // Support points of the information density and their probabilities.
    let support = [
        (alpha * q, (1.0 / alpha).log2()),
        (alpha * (1.0 - q), ((1.0 - q) / (1.0 - q * alpha)).log2()),
        (1.0 - alpha, (1.0 / (1.0 - q * alpha)).log2()),
    ];
    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        support
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, i)| p * f(*i))
            .sum()
    };
    let var = (weighted(&|i| i * i) - mutual_info * mutual_info).max(0.0);
    let third_abs = weighted(&|i| (i - mutual_info).abs().powi(3));
    let (var, third_abs) = if alpha == 0.0 || alpha == 1.0 {
        (0.0, 0.0)
    } else {
        (var, third_abs)
    };

    let capacity = (1.0 + q * (1.0 - q).powf((1.0 - q) / q)).log2();
    let alpha_star = 1.0 / (q * (1.0 + (hq / q).exp2()));

    Ok(BinaryClosedForms {
        mutual_info,
        var,
        third_abs,
        distortion: (1.0 - alpha) * q.min(1.0 - q),
        capacity,
        alpha_star,
    })
}

/// Smallest `alpha` meeting `(1 - alpha) min{q, 1-q} <= budget`, clamped to
/// `[0, 1]`.
pub fn alpha_lower_bound(q: f64, budget: f64) -> f64 {
    (1.0 - budget / q.min(1.0 - q)).clamp(0.0, 1.0)
}
