//! Discrete memoryless state-dependent channels and the exact information
//! quantities derived from them.
//!
//! A [`StateDmc`] carries the full per-symbol law `W(y, z | x, s)` together
//! with the i.i.d. state prior and the per-symbol distortion measure. All
//! alphabets are index sets `{0, .., size - 1}`; the estimate alphabet is the
//! state alphabet. Information quantities are in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that an input vector is a pmf.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Alphabet cardinalities of a state-dependent channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub x: usize,
    pub s: usize,
    pub y: usize,
    pub z: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::channel_file::ChannelFile", into = "crate::channel_file::ChannelFile")]
pub struct StateDmc {
    sizes: Alphabets,
    state_prior: Vec<f64>,
    /// Flattened `[x][s][y][z]`.
    kernel: Vec<f64>,
    /// Flattened `[s][s_hat]`.
    distortion: Vec<f64>,
}

impl StateDmc {
    /// Builds a channel from flattened arrays, validating every invariant.
    ///
    /// `kernel` is indexed `[x][s][y][z]` in row-major order and `distortion`
    /// is indexed `[s][s_hat]`.
    pub fn new(
        sizes: Alphabets,
        state_prior: Vec<f64>,
        kernel: Vec<f64>,
        distortion: Vec<f64>,
    ) -> Result<Self> {
        let Alphabets { x, s, y, z } = sizes;
        for (name, size) in [("x_size", x), ("s_size", s), ("y_size", y), ("z_size", z)] {
            if size == 0 {
                return Err(Error::InvalidChannel(format!("{name} must be positive")));
            }
        }
        if state_prior.len() != s {
            return Err(Error::InvalidChannel(format!(
                "state_prior has length {}, expected s_size = {s}",
                state_prior.len()
            )));
        }
        if kernel.len() != x * s * y * z {
            return Err(Error::InvalidChannel(format!(
                "kernel has {} entries, expected {x}*{s}*{y}*{z}",
                kernel.len()
            )));
        }
        if distortion.len() != s * s {
            return Err(Error::InvalidChannel(format!(
                "distortion has {} entries, expected {s}*{s}",
                distortion.len()
            )));
        }

        check_pmf(&state_prior).map_err(|e| Error::InvalidChannel(format!("state_prior{e}")))?;
        for xi in 0..x {
            for si in 0..s {
                let start = (xi * s + si) * y * z;
                let block = &kernel[start..start + y * z];
                if let Some(pos) = block.iter().position(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::InvalidChannel(format!(
                        "kernel[{xi}][{si}][{}][{}] = {} is not a probability",
                        pos / z,
                        pos % z,
                        block[pos]
                    )));
                }
                let total: f64 = block.iter().sum();
                if (total - 1.0).abs() > PMF_TOLERANCE {
                    return Err(Error::InvalidChannel(format!(
                        "kernel[{xi}][{si}] sums to {total}, expected 1"
                    )));
                }
            }
        }
        if let Some(pos) = distortion.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidChannel(format!(
                "distortion[{}][{}] = {} must be finite and nonnegative",
                pos / s,
                pos % s,
                distortion[pos]
            )));
        }

        Ok(StateDmc {
            sizes,
            state_prior,
            kernel,
            distortion,
        })
    }

    /// Builds a channel by evaluating `kernel(x, s, y, z)` and
    /// `distortion(s, s_hat)` over the alphabets.
    pub fn from_fn(
        sizes: Alphabets,
        state_prior: Vec<f64>,
        kernel: impl Fn(usize, usize, usize, usize) -> f64,
        distortion: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut w = Vec::with_capacity(sizes.x * sizes.s * sizes.y * sizes.z);
        for x in 0..sizes.x {
            for s in 0..sizes.s {
                for y in 0..sizes.y {
                    for z in 0..sizes.z {
                        w.push(kernel(x, s, y, z));
                    }
                }
            }
        }
        let mut d = Vec::with_capacity(sizes.s * sizes.s);
        for s in 0..sizes.s {
            for s_hat in 0..sizes.s {
                d.push(distortion(s, s_hat));
            }
        }
        StateDmc::new(sizes, state_prior, w, d)
    }

    pub fn sizes(&self) -> Alphabets {
        self.sizes
    }

    pub fn state_prior(&self) -> &[f64] {
        &self.state_prior
    }

    /// `W(y, z | x, s)`.
    #[inline]
    pub fn kernel(&self, x: usize, s: usize, y: usize, z: usize) -> f64 {
        let a = self.sizes;
        self.kernel[((x * a.s + s) * a.y + y) * a.z + z]
    }

    /// The joint `(y, z)` pmf for a fixed `(x, s)`, flattened `[y][z]`.
    pub fn kernel_block(&self, x: usize, s: usize) -> &[f64] {
        let a = self.sizes;
        let start = (x * a.s + s) * a.y * a.z;
        &self.kernel[start..start + a.y * a.z]
    }

    #[inline]
    pub fn distortion(&self, s: usize, s_hat: usize) -> f64 {
        self.distortion[s * self.sizes.s + s_hat]
    }

    /// Feedback likelihood `P_{Z|SX}(z | s, x) = sum_y W(y, z | x, s)`.
    pub fn feedback_likelihood(&self, x: usize, s: usize, z: usize) -> f64 {
        (0..self.sizes.y).map(|y| self.kernel(x, s, y, z)).sum()
    }
}

/// Checks entries are finite, nonnegative and sum to one. The error string is
/// a suffix meant to follow the field name.
fn check_pmf(p: &[f64]) -> std::result::Result<(), String> {
    if p.is_empty() {
        return Err(" is empty".into());
    }
    if let Some(pos) = p.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(format!("[{pos}] = {} is not a probability", p[pos]));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(format!(" sums to {total}, expected 1"));
    }
    Ok(())
}

/// A pmf over the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDist(Vec<f64>);

impl InputDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_pmf(&probs).map_err(|e| Error::InvalidInput(format!("probs{e}")))?;
        Ok(InputDist(probs))
    }

    /// Renormalizes an almost-pmf produced by an optimizer step. Callers
    /// guarantee entries are nonnegative and not all zero.
    pub(crate) fn from_weights(mut w: Vec<f64>) -> Self {
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        InputDist(w)
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        let mut p = vec![0.0; size];
        p[at] = 1.0;
        InputDist(p)
    }

    pub fn uniform(size: usize) -> Self {
        InputDist(vec![1.0 / size as f64; size])
    }

    /// Binary input with `Pr[X = 1] = alpha`.
    pub fn binary(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} outside [0, 1]")));
        }
        Ok(InputDist(vec![1.0 - alpha, alpha]))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for InputDist {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        InputDist::new(v)
    }
}

impl From<InputDist> for Vec<f64> {
    fn from(p: InputDist) -> Self {
        p.0
    }
}

/// The state- and feedback-averaged channel `P(y | x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalChannel {
    x_size: usize,
    y_size: usize,
    /// Flattened `[x][y]`.
    probs: Vec<f64>,
}

impl MarginalChannel {
    /// Builds a marginal from rows `P(. | x)`. Each row must be a pmf.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let x_size = rows.len();
        if x_size == 0 {
            return Err(Error::InvalidChannel("marginal channel has no inputs".into()));
        }
        let y_size = rows[0].len();
        let mut probs = Vec::with_capacity(x_size * y_size);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != y_size {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} outputs, expected {y_size}",
                    row.len()
                )));
            }
            check_pmf(&row).map_err(|e| Error::InvalidChannel(format!("P(.|x={x}){e}")))?;
            probs.extend(row);
        }
        Ok(MarginalChannel {
            x_size,
            y_size,
            probs,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// `P(y | x)`.
    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.probs[x * self.y_size + y]
    }

    /// The pmf `P(. | x)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.y_size..(x + 1) * self.y_size]
    }
}

/// `P(y | x) = sum_s P_S(s) sum_z W(y, z | x, s)`.
pub fn marginal_channel(dmc: &StateDmc) -> MarginalChannel {
    let a = dmc.sizes();
    let mut probs = vec![0.0; a.x * a.y];
    for x in 0..a.x {
        for (s, &ps) in dmc.state_prior().iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            for y in 0..a.y {
                let wy: f64 = (0..a.z).map(|z| dmc.kernel(x, s, y, z)).sum();
                probs[x * a.y + y] += ps * wy;
            }
        }
    }
    MarginalChannel {
        x_size: a.x,
        y_size: a.y,
        probs,
    }
}

/// `P_Y(y) = sum_x P_X(x) P(y | x)`.
pub fn output_dist(px: &InputDist, pyx: &MarginalChannel) -> Vec<f64> {
    debug_assert_eq!(px.len(), pyx.x_size());
    let mut py = vec![0.0; pyx.y_size()];
    for (x, &p) in px.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (acc, &w) in py.iter_mut().zip(pyx.row(x)) {
            *acc += p * w;
        }
    }
    py
}

/// Information density `log2(P(y|x) / P_Y(y))` in bits.
///
/// Returns negative infinity when `P(y|x) = 0` but `P_Y(y) > 0`.
pub fn info_density(x: usize, y: usize, px: &InputDist, pyx: &MarginalChannel) -> Result<f64> {
    let py = output_dist(px, pyx);
    density_from_parts(pyx.prob(y, x), py[y]).ok_or(Error::ZeroOutputProbability { y })
}

#[inline]
fn density_from_parts(p_cond: f64, p_out: f64) -> Option<f64> {
    if p_out <= 0.0 {
        None
    } else if p_cond == 0.0 {
        Some(f64::NEG_INFINITY)
    } else {
        Some((p_cond / p_out).log2())
    }
}

/// Precomputed information densities for every `(x, y)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    x_size: usize,
    y_size: usize,
    /// Flattened `[x][y]`. `NaN` marks outputs with `P_Y(y) = 0`.
    values: Vec<f64>,
    output: Vec<f64>,
}

impl DensityTable {
    pub fn new(px: &InputDist, pyx: &MarginalChannel) -> Self {
        let output = output_dist(px, pyx);
        let mut values = Vec::with_capacity(pyx.x_size() * pyx.y_size());
        for x in 0..pyx.x_size() {
            for (y, &py) in output.iter().enumerate() {
                values.push(density_from_parts(pyx.prob(y, x), py).unwrap_or(f64::NAN));
            }
        }
        DensityTable {
            x_size: pyx.x_size(),
            y_size: pyx.y_size(),
            values,
            output,
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// `i(x; y)`, or `None` when `P_Y(y) = 0`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let v = self.values[x * self.y_size + y];
        (!v.is_nan()).then_some(v)
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

/// Mean, variance and third absolute central moment of the information
/// density under `P_X P_{Y|X}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMoments {
    /// `I(X;Y)` in bits.
    pub mutual_info: f64,
    /// Dispersion, bits squared.
    pub var: f64,
    /// Third absolute central moment, bits cubed.
    pub third_abs: f64,
}

/// Relative spread below which the information density is treated as
/// constant on its support, forcing `V = T = 0` exactly.
const CONSTANT_DENSITY_TOL: f64 = 1e-12;

/// Exact moments by summation over the joint support.
pub fn info_moments(px: &InputDist, pyx: &MarginalChannel) -> InfoMoments {
    let py = output_dist(px, pyx);
    let mut support: Vec<(f64, f64)> = Vec::new();
    for (x, &p) in px.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (y, &w) in pyx.row(x).iter().enumerate() {
            let joint = p * w;
            if joint > 0.0 {
                support.push((joint, (w / py[y]).log2()));
            }
        }
    }
    let mutual_info: f64 = support.iter().map(|(p, i)| p * i).sum();
    let spread = support
        .iter()
        .map(|(_, i)| (i - mutual_info).abs())
        .fold(0.0, f64::max);
    if spread <= CONSTANT_DENSITY_TOL * mutual_info.abs().max(1.0) {
        return InfoMoments {
            mutual_info,
            var: 0.0,
            third_abs: 0.0,
        };
    }
    let mut var = 0.0;
    let mut third_abs = 0.0;
    for (p, i) in &support {
        let d = (i - mutual_info).abs();
        var += p * d * d;
        third_abs += p * d * d * d;
    }
    InfoMoments {
        mutual_info,
        var,
        third_abs,
    }
}

/// Capacity `max_{P_X} I(X;Y)` of the marginal channel and a maximizing
/// input, by Blahut-Arimoto iteration. Stops once the upper and lower
/// capacity estimates agree to `tol` bits.
pub fn capacity(pyx: &MarginalChannel, tol: f64, max_iter: usize) -> (f64, InputDist) {
    let k = pyx.x_size();
    let mut p = vec![1.0 / k as f64; k];
    let mut c = vec![0.0; k];
    let mut lower = 0.0;
    for _ in 0..max_iter {
        let py = output_dist(&InputDist(p.clone()), pyx);
        // c[x] = exp(D(P(.|x) || P_Y)) in nats
        for (x, cx) in c.iter_mut().enumerate() {
            let kl: f64 = pyx
                .row(x)
                .iter()
                .zip(&py)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, q)| w * (w / q).ln())
                .sum();
            *cx = kl.exp();
        }
        let z: f64 = p.iter().zip(&c).map(|(a, b)| a * b).sum();
        lower = z.ln();
        let upper = c.iter().copied().fold(f64::MIN, f64::max).ln();
        for (pi, ci) in p.iter_mut().zip(&c) {
            *pi *= ci / z;
        }
        if (upper - lower) / std::f64::consts::LN_2 < tol {
            break;
        }
    }
    let dist = InputDist::from_weights(p);
    let cap = info_moments(&dist, pyx).mutual_info;
    debug_assert!(cap + 1e-9 >= lower / std::f64::consts::LN_2 - 1e-9);
    (cap, dist)
}
