//! Rate-distortion-error tradeoff curves and the time-sharing baselines.
//!
//! For each distortion budget the bounds are maximized over every input
//! distribution whose symbolwise-estimator distortion meets the budget.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{optimize_delta, optimize_k, second_order_rate, BoundParams, BoundResult};
use crate::dmc::{capacity, info_moments, marginal_channel, InputDist, MarginalChannel, StateDmc};
use crate::error::{Error, Result};
use crate::estimator::{d_min, d_trivial, EstimatorTable};
use crate::optimize::{golden_max, lin_space, log_space, scan_golden_edges_max};

/// Slack on the distortion constraint.
pub const DISTORTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Achievability,
    Converse,
    SecondOrder,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::Achievability, Side::Converse, Side::SecondOrder];
}

/// The set `{P_X : E[d(S, s*(X, Z))] <= budget}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionConstraint {
    vertex: Vec<f64>,
    budget: f64,
}

impl DistortionConstraint {
    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Per-input-symbol distortions; the constraint is linear in these.
    pub fn vertex_distortions(&self) -> &[f64] {
        &self.vertex
    }

    pub fn distortion(&self, px: &InputDist) -> f64 {
        self.vertex.iter().zip(px.probs()).map(|(d, p)| d * p).sum()
    }

    pub fn admits(&self, px: &InputDist) -> bool {
        self.distortion(px) <= self.budget + DISTORTION_SLACK
    }

    /// Whether any input meets the budget.
    pub fn is_satisfiable(&self) -> bool {
        self.vertex.iter().any(|&d| d <= self.budget + DISTORTION_SLACK)
    }

    /// Admissible `Pr[X = 1]` interval for two-input channels.
    pub fn binary_interval(&self) -> Option<(f64, f64)> {
        assert_eq!(self.vertex.len(), 2, "binary_interval needs two inputs");
        let (v0, v1) = (self.vertex[0], self.vertex[1]);
        let b = self.budget + DISTORTION_SLACK;
        match (v0 <= b, v1 <= b) {
            (true, true) => Some((0.0, 1.0)),
            (false, false) => None,
            // (1 - a) v0 + a v1 <= b
            (false, true) => Some((((v0 - b) / (v0 - v1)).clamp(0.0, 1.0), 1.0)),
            (true, false) => Some((0.0, ((b - v0) / (v1 - v0)).clamp(0.0, 1.0))),
        }
    }
}

/// The distortion-feasible input set for `budget`. An infinite budget admits
/// every input.
pub fn feasible_inputs(dmc: &StateDmc, budget: f64) -> Result<DistortionConstraint> {
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::param("budget", format!("{budget} must be nonnegative")));
    }
    Ok(DistortionConstraint {
        vertex: EstimatorTable::new(dmc).vertex_distortions(dmc),
        budget,
    })
}

/// Search effort for the optimization over input distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSearch {
    /// Seed grid over `Pr[X = 1]` for two-input channels.
    pub binary_grid: usize,
    /// Simplex grid resolution `1/r` for larger input alphabets.
    pub simplex_resolution: usize,
    pub random_starts: usize,
    pub seed: u64,
    /// Skip the simplex grid when it would exceed this many points.
    pub max_grid_points: usize,
    pub max_sweeps: usize,
}

impl Default for InputSearch {
    fn default() -> Self {
        InputSearch {
            binary_grid: 200,
            simplex_resolution: 40,
            random_starts: 50,
            seed: 0x5eed_1dea,
            max_grid_points: 250_000,
            max_sweeps: 50,
        }
    }
}

/// Best value of one bound over the feasible inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideOptimum {
    pub side: Side,
    /// `None` when no feasible input gives a defined bound.
    pub rate: Option<f64>,
    pub input: Option<InputDist>,
    /// Optimized `K` or `delta` at the best input.
    pub bound: Option<BoundResult>,
}

struct Objective<'a> {
    pyx: &'a MarginalChannel,
    n: u64,
    eps: f64,
    side: Side,
}

impl Objective<'_> {
    fn eval(&self, px: &InputDist) -> Option<f64> {
        self.eval_full(px).0
    }

    fn eval_full(&self, px: &InputDist) -> (Option<f64>, Option<BoundResult>) {
        let m = info_moments(px, self.pyx);
        let r = match self.side {
            Side::Achievability => optimize_k(&m, self.n, self.eps),
            Side::Converse => optimize_delta(&m, self.n, self.eps),
            Side::SecondOrder => {
                return (second_order_rate(&m, self.n, self.eps).ok(), None);
            }
        };
        match r {
            Ok(r) => (r.rate, Some(r)),
            Err(_) => (None, None),
        }
    }
}

pub fn max_rate(dmc: &StateDmc, n: u64, eps: f64, budget: f64, side: Side) -> Result<SideOptimum> {
    max_rate_with(dmc, n, eps, budget, side, &InputSearch::default())
}

/// Maximizes the chosen bound over distortion-feasible inputs.
pub fn max_rate_with(
    dmc: &StateDmc,
    n: u64,
    eps: f64,
    budget: f64,
    side: Side,
    search: &InputSearch,
) -> Result<SideOptimum> {
    BoundParams::new(n, eps)?;
    let constraint = feasible_inputs(dmc, budget)?;
    let pyx = marginal_channel(dmc);
    let objective = Objective {
        pyx: &pyx,
        n,
        eps,
        side,
    };
    let best = if !constraint.is_satisfiable() {
        None
    } else if dmc.sizes().x == 1 {
        let p = InputDist::point_mass(1, 0);
        objective.eval(&p).map(|v| (p, v))
    } else if dmc.sizes().x == 2 {
        search_binary(&objective, &constraint, search)
    } else {
        search_simplex(&objective, &constraint, search)
    };
    Ok(match best {
        Some((input, _)) => {
            let (rate, bound) = objective.eval_full(&input);
            SideOptimum {
                side,
                rate,
                input: Some(input),
                bound,
            }
        }
        None => SideOptimum {
            side,
            rate: None,
            input: None,
            bound: None,
        },
    })
}

fn search_binary(
    objective: &Objective,
    constraint: &DistortionConstraint,
    search: &InputSearch,
) -> Option<(InputDist, f64)> {
    let (lo, hi) = constraint.binary_interval()?;
    let eval = |a: f64| InputDist::binary(a).ok().and_then(|p| objective.eval(&p));
    let grid = if hi > lo {
        lin_space(lo, hi, search.binary_grid.max(2))
    } else {
        vec![lo]
    };
    let (alpha, value) = scan_golden_edges_max(&eval, &grid)?;
    Some((InputDist::binary(alpha).ok()?, value))
}

/// Compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if parts == 1 {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in 0..=total {
        cur.push(first);
        compositions(total - first, parts - 1, out, cur);
        cur.pop();
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Grid over the simplex plus multistart pairwise coordinate ascent.
fn search_simplex(
    objective: &Objective,
    constraint: &DistortionConstraint,
    search: &InputSearch,
) -> Option<(InputDist, f64)> {
    let k = constraint.vertex.len();
    let r = search.simplex_resolution.max(1);
    let mut best: Option<(InputDist, f64)> = None;
    let consider = |p: InputDist, v: Option<f64>, best: &mut Option<(InputDist, f64)>| {
        if let Some(v) = v {
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                *best = Some((p, v));
            }
        }
    };

    if binomial(r + k - 1, k - 1) <= search.max_grid_points as f64 {
        let mut points = Vec::new();
        compositions(r, k, &mut points, &mut Vec::new());
        let scored: Vec<(InputDist, Option<f64>)> = points
            .into_par_iter()
            .map(|c| InputDist::from_weights(c.into_iter().map(|v| v as f64).collect()))
            .filter(|p| constraint.admits(p))
            .map(|p| {
                let v = objective.eval(&p);
                (p, v)
            })
            .collect();
        for (p, v) in scored {
            consider(p, v, &mut best);
        }
    }

    // Random starts, pulled into the feasible set along the segment towards
    // the least-distortion vertex.
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let anchor = (0..k)
        .min_by(|&a, &b| constraint.vertex[a].total_cmp(&constraint.vertex[b]))
        .expect("nonempty input alphabet");
    let mut starts: Vec<InputDist> = (0..search.random_starts)
        .map(|_| {
            let w: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
            project_to_constraint(InputDist::from_weights(w), anchor, constraint)
        })
        .collect();
    if let Some((p, _)) = &best {
        starts.push(p.clone());
    }

    let ascended: Vec<(InputDist, Option<f64>)> = starts
        .into_par_iter()
        .map(|p| coordinate_ascent(objective, constraint, p, search.max_sweeps))
        .collect();
    for (p, v) in ascended {
        consider(p, v, &mut best);
    }
    best
}

fn project_to_constraint(p: InputDist, anchor: usize, c: &DistortionConstraint) -> InputDist {
    let d = c.distortion(&p);
    if d <= c.budget {
        return p;
    }
    let da = c.vertex[anchor];
    let lambda = ((d - c.budget) / (d - da)).clamp(0.0, 1.0);
    let w = p
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &v)| (1.0 - lambda) * v + if i == anchor { lambda } else { 0.0 })
        .collect();
    InputDist::from_weights(w)
}

/// Moves probability mass between pairs of inputs, one line search per pair,
/// until a full sweep stops improving.
fn coordinate_ascent(
    objective: &Objective,
    constraint: &DistortionConstraint,
    start: InputDist,
    max_sweeps: usize,
) -> (InputDist, Option<f64>) {
    let k = start.len();
    let mut p = start;
    let mut value = objective.eval(&p);
    for _ in 0..max_sweeps {
        let before = value;
        for i in 0..k {
            for j in (i + 1)..k {
                let (pi, pj) = (p.probs()[i], p.probs()[j]);
                let shifted = |t: f64| -> InputDist {
                    let mut w = p.probs().to_vec();
                    w[i] = pi + t;
                    w[j] = pj - t;
                    InputDist::from_weights(w)
                };
                let eval = |t: f64| -> Option<f64> {
                    let q = shifted(t);
                    if constraint.admits(&q) {
                        objective.eval(&q)
                    } else {
                        None
                    }
                };
                let grid = lin_space(-pi, pj, 9);
                let Some((t, _)) = scan_golden_edges_max(&eval, &grid) else {
                    continue;
                };
                let (t, v) = match eval(t) {
                    Some(v) => (t, v),
                    None => continue,
                };
                if value.is_none_or(|cur| v > cur) {
                    p = shifted(t);
                    value = Some(v);
                }
            }
        }
        match (before, value) {
            (Some(b), Some(a)) if a - b <= 1e-12 => break,
            (None, None) => break,
            _ => {}
        }
    }
    (p, value)
}

/// One row of a tradeoff curve. Raw rates may be negative or `None`
/// (infeasible); presentation clamps them to be nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub distortion_budget: f64,
    pub n: u64,
    pub eps: f64,
    pub rate_ach: Option<f64>,
    pub rate_conv: Option<f64>,
    pub rate_second_order: Option<f64>,
    pub best_input_ach: Option<InputDist>,
    pub best_input_conv: Option<InputDist>,
    pub k_coeff: Option<f64>,
    pub delta: Option<f64>,
}

/// Presentation value of a raw rate: infeasible and negative rates show as 0.
pub fn clamped(rate: Option<f64>) -> f64 {
    rate.map_or(0.0, |r| r.max(0.0))
}

impl TradeoffPoint {
    pub fn presented(&self, side: Side) -> f64 {
        clamped(match side {
            Side::Achievability => self.rate_ach,
            Side::Converse => self.rate_conv,
            Side::SecondOrder => self.rate_second_order,
        })
    }
}

pub fn tradeoff_point(dmc: &StateDmc, n: u64, eps: f64, budget: f64) -> Result<TradeoffPoint> {
    let ach = max_rate(dmc, n, eps, budget, Side::Achievability)?;
    let conv = max_rate(dmc, n, eps, budget, Side::Converse)?;
    let so = max_rate(dmc, n, eps, budget, Side::SecondOrder)?;
    Ok(TradeoffPoint {
        distortion_budget: budget,
        n,
        eps,
        rate_ach: ach.rate,
        rate_conv: conv.rate,
        rate_second_order: so.rate,
        best_input_ach: ach.input,
        best_input_conv: conv.input,
        k_coeff: ach.bound.and_then(|b| b.params_used.k_coeff),
        delta: conv.bound.and_then(|b| b.params_used.delta),
    })
}

/// Tradeoff points for an ascending grid of distortion budgets. Points are
/// computed independently; the output does not depend on the thread count.
pub fn sweep(dmc: &StateDmc, n: u64, eps: f64, budgets: &[f64]) -> Result<Vec<TradeoffPoint>> {
    if budgets.is_empty() {
        return Err(Error::param("budgets", "distortion grid is empty"));
    }
    if budgets.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
        return Err(Error::param("budgets", "distortion grid must be sorted ascending"));
    }
    budgets
        .par_iter()
        .map(|&d| tradeoff_point(dmc, n, eps, d))
        .collect()
}

/// Default 60-point budget grid: 15 log-spaced points just above `D_min`
/// where curves bend sharply, then 45 linear points up to `D_trivial`.
pub fn default_distortion_grid(dmc: &StateDmc) -> Vec<f64> {
    let lo = d_min(dmc).0;
    let hi = d_trivial(dmc);
    let knee = lo + 1e-3;
    if hi <= knee {
        return lin_space(lo, hi.max(lo), 60);
    }
    let mut grid: Vec<f64> = log_space(1e-6, 1e-3, 16)
        .into_iter()
        .take(15)
        .map(|off| lo + off)
        .collect();
    grid.extend(lin_space(knee, hi, 45));
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Basic,
    Improved,
}

/// One operating point of a time-sharing baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub gamma: f64,
    pub rate: f64,
    pub distortion: f64,
    pub variant: Variant,
}

/// The endpoint quantities both time-sharing baselines interpolate between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineAnchors {
    pub n: u64,
    pub eps: f64,
    /// Largest achievability rate over all inputs, clamped at 0.
    pub r_max: f64,
    pub rate_input: Option<InputDist>,
    pub d_min: f64,
    /// The distortion-minimizing input.
    pub sensing_input: InputDist,
    pub d_trivial: f64,
    /// Achievability rate at `sensing_input`, clamped at 0.
    pub r_sense: f64,
    /// Distortion at the capacity-achieving input.
    pub d_comm: f64,
    pub capacity: f64,
    pub capacity_input: InputDist,
}

impl BaselineAnchors {
    pub fn compute(dmc: &StateDmc, n: u64, eps: f64) -> Result<Self> {
        BoundParams::new(n, eps)?;
        let best = max_rate(dmc, n, eps, f64::INFINITY, Side::Achievability)?;
        let (dmin, sensing_input) = d_min(dmc);
        let pyx = marginal_channel(dmc);
        let r_sense = optimize_k(&info_moments(&sensing_input, &pyx), n, eps)?.rate;
        let (cap, capacity_input) = capacity(&pyx, 1e-12, 1_000_000);
        let d_comm = EstimatorTable::new(dmc).expected_distortion(dmc, &capacity_input);
        Ok(BaselineAnchors {
            n,
            eps,
            r_max: clamped(best.rate),
            rate_input: best.input,
            d_min: dmin,
            sensing_input,
            d_trivial: d_trivial(dmc),
            r_sense: clamped(r_sense),
            d_comm,
            capacity: cap,
            capacity_input,
        })
    }

    /// `R = (1-g) R_max`, `D = g D_min + (1-g) D_trivial`.
    pub fn basic(&self, gamma: f64) -> Result<BaselinePoint> {
        check_gamma(gamma)?;
        Ok(BaselinePoint {
            gamma,
            rate: (1.0 - gamma) * self.r_max,
            distortion: gamma * self.d_min + (1.0 - gamma) * self.d_trivial,
            variant: Variant::Basic,
        })
    }

    /// `R = g R_sense + (1-g) R_max`, `D = g D_min + (1-g) D_comm`.
    pub fn improved(&self, gamma: f64) -> Result<BaselinePoint> {
        check_gamma(gamma)?;
        Ok(BaselinePoint {
            gamma,
            rate: gamma * self.r_sense + (1.0 - gamma) * self.r_max,
            distortion: gamma * self.d_min + (1.0 - gamma) * self.d_comm,
            variant: Variant::Improved,
        })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::param("gamma", format!("{gamma} is outside [0, 1]")))
    }
}

pub fn basic_resource_sharing(dmc: &StateDmc, n: u64, eps: f64, gamma: f64) -> Result<BaselinePoint> {
    check_gamma(gamma)?;
    BaselineAnchors::compute(dmc, n, eps)?.basic(gamma)
}

pub fn improved_resource_sharing(
    dmc: &StateDmc,
    n: u64,
    eps: f64,
    gamma: f64,
) -> Result<BaselinePoint> {
    check_gamma(gamma)?;
    BaselineAnchors::compute(dmc, n, eps)?.improved(gamma)
}

/// Golden-section maximization of `I(X;Y)` over `Pr[X = 1]`; used to
/// cross-check the binary capacity.
pub fn binary_mutual_info_max(pyx: &MarginalChannel) -> (f64, f64) {
    let f = |a: f64| InputDist::binary(a).ok().map(|p| info_moments(&p, pyx).mutual_info);
    let (a, v) = golden_max(&f, 0.0, 1.0);
    (a, v.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::binary_channel;

    #[test]
    fn binary_feasible_interval() {
        let dmc = binary_channel(0.4).unwrap();
        let c = feasible_inputs(&dmc, 0.2).unwrap();
        let (lo, hi) = c.binary_interval().unwrap();
        assert!((lo - 0.5).abs() < 1e-9 && hi == 1.0);
        assert!(c.admits(&InputDist::binary(0.5).unwrap()));
        assert!(!c.admits(&InputDist::binary(0.49).unwrap()));

        let c = feasible_inputs(&dmc, 0.4).unwrap();
        assert_eq!(c.binary_interval(), Some((0.0, 1.0)));

        let c = feasible_inputs(&dmc, 0.0).unwrap();
        let (lo, _) = c.binary_interval().unwrap();
        assert!((1.0 - lo) < 1e-10);
        assert!(feasible_inputs(&dmc, -0.1).is_err());
    }

    #[test]
    fn zero_budget_forces_silent_input() {
        let dmc = binary_channel(0.4).unwrap();
        for side in [Side::Achievability, Side::SecondOrder] {
            let r = max_rate(&dmc, 700, 0.05, 0.0, side).unwrap();
            assert!(clamped(r.rate) < 1e-6, "{side:?} {:?}", r.rate);
        }
        // I = V = 0 leaves only the log terms
        let r = max_rate(&dmc, 700, 0.05, 0.0, Side::Converse).unwrap();
        let rate = r.rate.unwrap();
        assert!(rate > 0.0 && rate < 700f64.log2() / 1400.0, "{rate}");
        assert!((r.input.unwrap().probs()[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let dmc = binary_channel(0.4).unwrap();
        assert!(sweep(&dmc, 700, 0.05, &[]).is_err());
        assert!(sweep(&dmc, 700, 0.05, &[0.2, 0.1]).is_err());
        assert_eq!(sweep(&dmc, 700, 0.05, &[0.1]).unwrap().len(), 1);
    }

    #[test]
    fn baseline_endpoints() {
        let dmc = binary_channel(0.4).unwrap();
        let a = BaselineAnchors::compute(&dmc, 700, 0.05).unwrap();
        let b0 = a.basic(0.0).unwrap();
        assert_eq!((b0.rate, b0.distortion), (a.r_max, a.d_trivial));
        let b1 = a.basic(1.0).unwrap();
        assert_eq!((b1.rate, b1.distortion), (0.0, a.d_min));
        let i0 = a.improved(0.0).unwrap();
        assert_eq!((i0.rate, i0.distortion), (a.r_max, a.d_comm));
        assert!((a.d_comm - 0.2432).abs() < 5e-4);
        let i1 = a.improved(1.0).unwrap();
        assert_eq!((i1.rate, i1.distortion), (a.r_sense, 0.0));
        assert!(a.basic(1.5).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let dmc = binary_channel(0.4).unwrap();
        let g = default_distortion_grid(&dmc);
        assert_eq!(g.len(), 60);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[59] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn compositions_count() {
        let mut out = Vec::new();
        compositions(40, 3, &mut out, &mut Vec::new());
        assert_eq!(out.len(), 861);
        assert_eq!(binomial(42, 2), 861.0);
    }
}
