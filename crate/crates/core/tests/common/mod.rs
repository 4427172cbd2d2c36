//! Independent reference computations for the integration tests. Nothing
//! here calls into the library's numerics; channels are enumerated tuple by
//! tuple.

#![allow(dead_code)]

use isac_core::{Alphabets, InputDist, StateDmc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_pmf(rng: &mut impl Rng, len: usize, sparse: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            if sparse && rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.01..1.0)
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.random_range(0..len)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

/// A random channel with every alphabet size in `1..=max_size`.
pub fn random_channel(seed: u64, max_size: usize) -> StateDmc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut size = || rng.random_range(1..=max_size);
    let sizes = Alphabets {
        x: size(),
        s: size(),
        y: size(),
        z: size(),
    };
    let prior = random_pmf(&mut rng, sizes.s, true);
    let mut kernel = Vec::new();
    for _ in 0..sizes.x * sizes.s {
        kernel.extend(random_pmf(&mut rng, sizes.y * sizes.z, true));
    }
    let hamming = rng.random_bool(0.5);
    let distortion = (0..sizes.s * sizes.s)
        .map(|i| {
            if hamming {
                (i / sizes.s != i % sizes.s) as u8 as f64
            } else {
                rng.random_range(0.0..2.0)
            }
        })
        .collect();
    StateDmc::new(sizes, prior, kernel, distortion).unwrap()
}

pub fn random_input(seed: u64, len: usize) -> InputDist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    InputDist::new(random_pmf(&mut rng, len, true)).unwrap()
}

/// `P(x, y)` by direct summation over states and feedback.
pub fn joint_xy(dmc: &StateDmc, px: &[f64]) -> Vec<Vec<f64>> {
    let a = dmc.sizes();
    let mut joint = vec![vec![0.0; a.y]; a.x];
    for x in 0..a.x {
        for s in 0..a.s {
            for y in 0..a.y {
                for z in 0..a.z {
                    joint[x][y] += px[x] * dmc.state_prior()[s] * dmc.kernel(x, s, y, z);
                }
            }
        }
    }
    joint
}

/// `(I, V, T)` from the raw definitions over the support of `P(x, y)`.
pub fn brute_moments(dmc: &StateDmc, px: &[f64]) -> (f64, f64, f64) {
    let joint = joint_xy(dmc, px);
    let a = dmc.sizes();
    let py: Vec<f64> = (0..a.y).map(|y| (0..a.x).map(|x| joint[x][y]).sum()).collect();
    let mut terms = Vec::new();
    for x in 0..a.x {
        for y in 0..a.y {
            if joint[x][y] > 0.0 {
                terms.push((joint[x][y], (joint[x][y] / (px[x] * py[y])).log2()));
            }
        }
    }
    let i: f64 = terms.iter().map(|(p, v)| p * v).sum();
    let v: f64 = terms.iter().map(|(p, d)| p * (d - i).powi(2)).sum();
    let t: f64 = terms.iter().map(|(p, d)| p * (d - i).abs().powi(3)).sum();
    (i, v, t)
}

/// Posterior-expected cost of every estimate at `(x, z)`, unnormalized,
/// plus the total mass `P(x, z) / P_X(x)`.
pub fn brute_costs(dmc: &StateDmc, x: usize, z: usize) -> (Vec<f64>, f64) {
    let a = dmc.sizes();
    let weights: Vec<f64> = (0..a.s)
        .map(|s| dmc.state_prior()[s] * (0..a.y).map(|y| dmc.kernel(x, s, y, z)).sum::<f64>())
        .collect();
    let mass = weights.iter().sum();
    let costs = (0..a.s)
        .map(|t| (0..a.s).map(|s| weights[s] * dmc.distortion(s, t)).sum())
        .collect();
    (costs, mass)
}

/// `E[d(S, s_hat(X, Z))]` for a given estimator, by enumeration.
pub fn brute_distortion(dmc: &StateDmc, px: &[f64], estimate: impl Fn(usize, usize) -> usize) -> f64 {
    let a = dmc.sizes();
    let mut total = 0.0;
    for x in 0..a.x {
        for z in 0..a.z {
            let (costs, _) = brute_costs(dmc, x, z);
            total += px[x] * costs[estimate(x, z)];
        }
    }
    total
}

/// `Q(x)` by composite Simpson quadrature of the normal density.
pub fn q_quadrature(x: f64) -> f64 {
    let (a, b) = (x, x + 40.0);
    let steps = 200_000;
    let h = (b - a) / steps as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = phi(a) + phi(b);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * phi(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// Inverse of [`q_quadrature`] by bisection on `[-10, 40]`.
pub fn q_inv_bisection(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 40.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if q_quadrature(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn entropy2(p: f64) -> f64 {
    let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}
