//! Symbolwise Bayes state estimation from the transmitter's `(x, z)` pair and
//! the distortion functionals built on it.

use serde::Serialize;

use crate::dmc::{InputDist, StateDmc};

/// State posterior for one `(x, z)` observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posterior {
    pub probs: Vec<f64>,
    /// False when `(x, z)` has zero probability under every state; `probs`
    /// is then the prior.
    pub reachable: bool,
}

/// `P_{S|XZ}(. | x, z)`, falling back to the prior on unreachable pairs.
pub fn posterior(dmc: &StateDmc, x: usize, z: usize) -> Posterior {
    let prior = dmc.state_prior();
    let joint: Vec<f64> = prior
        .iter()
        .enumerate()
        .map(|(s, &ps)| ps * dmc.feedback_likelihood(x, s, z))
        .collect();
    let total: f64 = joint.iter().sum();
    if total > 0.0 {
        Posterior {
            probs: joint.into_iter().map(|p| p / total).collect(),
            reachable: true,
        }
    } else {
        Posterior {
            probs: prior.to_vec(),
            reachable: false,
        }
    }
}

/// Expected distortion of every candidate estimate under `belief`.
pub fn estimate_costs(dmc: &StateDmc, belief: &[f64]) -> Vec<f64> {
    let s_size = dmc.sizes().s;
    (0..s_size)
        .map(|s_hat| {
            belief
                .iter()
                .enumerate()
                .map(|(s, p)| p * dmc.distortion(s, s_hat))
                .sum()
        })
        .collect()
}

/// Index of the smallest cost; ties go to the smallest index.
fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = i;
        }
    }
    best
}

/// `arg min_{s'} sum_s P_{S|XZ}(s|x,z) d(s, s')`.
pub fn optimal_estimate(dmc: &StateDmc, x: usize, z: usize) -> usize {
    argmin(&estimate_costs(dmc, &posterior(dmc, x, z).probs))
}

/// The estimator for every `(x, z)`, built once and shared.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorTable {
    x_size: usize,
    z_size: usize,
    /// `best[x][z]`
    best: Vec<Vec<usize>>,
    /// `posterior[x][z][s]`
    posterior: Vec<Vec<Vec<f64>>>,
    reachable: Vec<Vec<bool>>,
}

impl EstimatorTable {
    pub fn new(dmc: &StateDmc) -> Self {
        let a = dmc.sizes();
        let mut best = vec![vec![0; a.z]; a.x];
        let mut post = vec![vec![Vec::new(); a.z]; a.x];
        let mut reachable = vec![vec![false; a.z]; a.x];
        for x in 0..a.x {
            for z in 0..a.z {
                let p = posterior(dmc, x, z);
                best[x][z] = argmin(&estimate_costs(dmc, &p.probs));
                reachable[x][z] = p.reachable;
                post[x][z] = p.probs;
            }
        }
        EstimatorTable {
            x_size: a.x,
            z_size: a.z,
            best,
            posterior: post,
            reachable,
        }
    }

    #[inline]
    pub fn estimate(&self, x: usize, z: usize) -> usize {
        self.best[x][z]
    }

    pub fn posterior(&self, x: usize, z: usize) -> &[f64] {
        &self.posterior[x][z]
    }

    pub fn is_reachable(&self, x: usize, z: usize) -> bool {
        self.reachable[x][z]
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    /// Expected per-symbol distortion when every input symbol is `x`.
    pub fn vertex_distortions(&self, dmc: &StateDmc) -> Vec<f64> {
        let a = dmc.sizes();
        (0..a.x)
            .map(|x| {
                let mut total = 0.0;
                for (s, &ps) in dmc.state_prior().iter().enumerate() {
                    for z in 0..a.z {
                        let pz = dmc.feedback_likelihood(x, s, z);
                        if pz > 0.0 {
                            total += ps * pz * dmc.distortion(s, self.best[x][z]);
                        }
                    }
                }
                total
            })
            .collect()
    }

    /// Per-symbol expected distortion under `px`.
    pub fn expected_distortion(&self, dmc: &StateDmc, px: &InputDist) -> f64 {
        self.vertex_distortions(dmc)
            .iter()
            .zip(px.probs())
            .map(|(d, p)| d * p)
            .sum()
    }
}

/// `sum_{x,s,z} d(s, s*(x,z)) P_X(x) P_S(s) P_{Z|XS}(z|x,s)`.
pub fn expected_distortion(dmc: &StateDmc, px: &InputDist) -> f64 {
    EstimatorTable::new(dmc).expected_distortion(dmc, px)
}

/// Distortion of the best estimate that ignores the feedback.
pub fn d_trivial(dmc: &StateDmc) -> f64 {
    let costs = estimate_costs(dmc, dmc.state_prior());
    costs[argmin(&costs)]
}

/// Minimum expected distortion over all inputs. The objective is linear in
/// `P_X`, so the minimum sits on a point mass; ties go to the smallest input.
pub fn d_min(dmc: &StateDmc) -> (f64, InputDist) {
    let vd = EstimatorTable::new(dmc).vertex_distortions(dmc);
    let best = argmin(&vd);
    (vd[best], InputDist::point_mass(vd.len(), best))
}
