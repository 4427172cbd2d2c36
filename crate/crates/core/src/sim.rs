//! Monte Carlo simulation of the random-coding scheme: i.i.d. codebooks,
//! memoryless channel draws, information-density decoding at the receiver
//! and symbolwise state estimation at the transmitter.
//!
//! Every trial draws from its own ChaCha12 stream: the generator is seeded
//! from the master seed and the stream id is the trial index. Reports are
//! therefore identical for any thread count or trial schedule.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc::{marginal_channel, DensityTable, InputDist, MarginalChannel, StateDmc};
use crate::error::{Error, Result};
use crate::estimator::EstimatorTable;
use crate::stats::{mean_and_std_err, wilson_interval, Z_95};

/// Default cap on `msg_count * n`.
pub const DEFAULT_SYMBOL_CAP: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    /// Picks the codeword with the largest information density.
    #[serde(rename = "maxinfo")]
    MaxInfo,
    /// Picks the first codeword whose density exceeds the threshold.
    Threshold,
}

/// How competing codewords are realized in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Competitors {
    /// Every codeword is drawn symbol by symbol and scored against `y`.
    Explicit,
    /// Each competing codeword is represented by its joint type with the
    /// received sequence, drawn from the exact multinomial law. Same
    /// distribution of decoder decisions as `Explicit` at `O(|X||Y|)` cost
    /// per codeword instead of `O(n)`.
    JointType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub msg_count: u64,
    pub input_dist: InputDist,
    /// Threshold in bits; required by [`Decoder::Threshold`].
    pub threshold_gamma: Option<f64>,
    pub seed: u64,
    /// Reuse one codebook for every trial instead of a fresh draw per trial.
    pub fixed_codebook: bool,
    pub competitors: Competitors,
    pub symbol_cap: u64,
}

impl CodeParams {
    pub fn new(n: usize, msg_count: u64, input_dist: InputDist, seed: u64) -> Self {
        CodeParams {
            n,
            msg_count,
            input_dist,
            threshold_gamma: None,
            seed,
            fixed_codebook: false,
            competitors: Competitors::Explicit,
            symbol_cap: DEFAULT_SYMBOL_CAP,
        }
    }

    /// `log2(M) / n`.
    pub fn rate(&self) -> f64 {
        (self.msg_count as f64).log2() / self.n as f64
    }

    /// Checks the parameters, including the symbol cap, without running
    /// anything.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "blocklength must be at least 1"));
        }
        if self.msg_count == 0 {
            return Err(Error::param("msg_count", "need at least one message"));
        }
        if self.input_dist.len() > 256 {
            return Err(Error::param("input_dist", "simulation supports at most 256 inputs"));
        }
        let symbols = self.msg_count as u128 * self.n as u128;
        if symbols > self.symbol_cap as u128 {
            return Err(Error::CodebookTooLarge {
                msg_count: self.msg_count,
                n: self.n,
                symbols,
                cap: self.symbol_cap,
            });
        }
        if self.fixed_codebook && self.competitors == Competitors::JointType {
            return Err(Error::param(
                "fixed_codebook",
                "a fixed codebook needs explicit competitors",
            ));
        }
        Ok(())
    }
}

/// `log2(M) + K log2(n)`.
pub fn threshold_from_k(msg_count: u64, n: usize, k: f64) -> f64 {
    (msg_count as f64).log2() + k * (n as f64).log2()
}

/// `msg_count` codewords of length `n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    symbols: Vec<u8>,
}

impl Codebook {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::param("codebook", "rows must be nonempty and of equal length"));
        }
        Ok(Codebook {
            n,
            symbols: rows.concat(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.symbols.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn codeword(&self, m: usize) -> &[u8] {
        &self.symbols[m * self.n..(m + 1) * self.n]
    }
}

fn sampler(p: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(p).expect("validated pmf has positive mass")
}

/// Draws `msg_count * n` i.i.d. symbols from the input distribution.
pub fn generate_codebook<R: Rng + ?Sized>(params: &CodeParams, rng: &mut R) -> Result<Codebook> {
    params.validate()?;
    let dist = sampler(params.input_dist.probs());
    let total = params.msg_count as usize * params.n;
    let symbols = (0..total).map(|_| dist.sample(rng) as u8).collect();
    Ok(Codebook {
        n: params.n,
        symbols,
    })
}

/// Channel outputs for one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub y: Vec<usize>,
    pub z: Vec<usize>,
    pub s: Vec<usize>,
}

/// Samplers for the state prior and every `W(., . | x, s)` block.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    z_size: usize,
    s_size: usize,
    state: WeightedIndex<f64>,
    blocks: Vec<WeightedIndex<f64>>,
}

impl ChannelSampler {
    pub fn new(dmc: &StateDmc) -> Self {
        let a = dmc.sizes();
        let blocks = (0..a.x)
            .flat_map(|x| (0..a.s).map(move |s| (x, s)))
            .map(|(x, s)| sampler(dmc.kernel_block(x, s)))
            .collect();
        ChannelSampler {
            z_size: a.z,
            s_size: a.s,
            state: sampler(dmc.state_prior()),
            blocks,
        }
    }

    /// Draws `s_i ~ P_S` and `(y_i, z_i) ~ W(., . | x_i, s_i)` independently
    /// per symbol.
    pub fn transmit<R: Rng + ?Sized>(&self, x: &[u8], rng: &mut R) -> Transmission {
        let mut out = Transmission {
            y: Vec::with_capacity(x.len()),
            z: Vec::with_capacity(x.len()),
            s: Vec::with_capacity(x.len()),
        };
        for &xi in x {
            let s = self.state.sample(rng);
            let cell = self.blocks[xi as usize * self.s_size + s].sample(rng);
            out.s.push(s);
            out.y.push(cell / self.z_size);
            out.z.push(cell % self.z_size);
        }
        out
    }
}

pub fn transmit<R: Rng + ?Sized>(dmc: &StateDmc, x: &[u8], rng: &mut R) -> Transmission {
    ChannelSampler::new(dmc).transmit(x, rng)
}

/// Scores codewords by their joint type with the received sequence, so that
/// codewords with the same type get bit-identical scores.
#[derive(Debug, Clone)]
struct Scorer {
    y_size: usize,
    density: Vec<f64>,
}

impl Scorer {
    fn new(input_dist: &InputDist, marginal: &MarginalChannel) -> Self {
        let table = DensityTable::new(input_dist, marginal);
        let mut density = Vec::with_capacity(table.x_size() * table.y_size());
        for x in 0..table.x_size() {
            for y in 0..table.y_size() {
                // P_Y(y) = 0 never occurs under the true law
                density.push(table.get(x, y).unwrap_or(f64::NEG_INFINITY));
            }
        }
        Scorer {
            y_size: table.y_size(),
            density,
        }
    }

    fn joint_type(&self, x: &[u8], y: &[usize], counts: &mut [u32]) {
        counts.iter_mut().for_each(|c| *c = 0);
        for (&xi, &yi) in x.iter().zip(y) {
            counts[xi as usize * self.y_size + yi] += 1;
        }
    }

    fn score_type(&self, counts: &[u32]) -> f64 {
        let mut total = 0.0;
        for (&c, &d) in counts.iter().zip(&self.density) {
            if c > 0 {
                if d == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                total += c as f64 * d;
            }
        }
        total
    }

    fn score(&self, x: &[u8], y: &[usize], counts: &mut [u32]) -> f64 {
        self.joint_type(x, y, counts);
        self.score_type(counts)
    }
}

fn argmax_first(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (m, s) in scores.enumerate() {
        if m == 0 || s > best_score {
            best = m;
            best_score = s;
        }
    }
    best
}

/// Index of the codeword maximizing `sum_i i(x_i(m); y_i)`; ties go to the
/// smallest index.
pub fn decode_maxinfo(
    codebook: &Codebook,
    y: &[usize],
    input_dist: &InputDist,
    marginal: &MarginalChannel,
) -> usize {
    let scorer = Scorer::new(input_dist, marginal);
    let mut counts = vec![0; scorer.density.len()];
    argmax_first((0..codebook.len()).map(|m| scorer.score(codebook.codeword(m), y, &mut counts)))
}

/// Smallest index whose density sum exceeds `gamma`, or `None` (erasure).
pub fn decode_threshold(
    codebook: &Codebook,
    y: &[usize],
    input_dist: &InputDist,
    marginal: &MarginalChannel,
    gamma: f64,
) -> Option<usize> {
    let scorer = Scorer::new(input_dist, marginal);
    let mut counts = vec![0; scorer.density.len()];
    (0..codebook.len()).find(|&m| scorer.score(codebook.codeword(m), y, &mut counts) > gamma)
}

/// Symbolwise estimates `s*(x_i, z_i)`.
pub fn estimate_states(dmc: &StateDmc, x: &[u8], z: &[usize]) -> Vec<usize> {
    let table = EstimatorTable::new(dmc);
    x.iter()
        .zip(z)
        .map(|(&xi, &zi)| table.estimate(xi as usize, zi))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub errors: u64,
    /// Threshold-decoder erasures; already included in `errors`.
    pub erasures: u64,
    pub eps_hat: f64,
    /// 95% Wilson interval.
    pub eps_ci: (f64, f64),
    pub distortion_hat: f64,
    pub distortion_std_err: f64,
    /// 95% normal-approximation interval.
    pub distortion_ci: (f64, f64),
    pub decoder: Decoder,
    pub competitors: Competitors,
    pub fixed_codebook: bool,
    pub threshold_gamma: Option<f64>,
    pub n: usize,
    pub msg_count: u64,
    pub rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    error: bool,
    erasure: bool,
    distortion: f64,
}

/// The per-trial generator: ChaCha12 keyed by the master seed, stream set to
/// the trial index.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct Experiment<'a> {
    params: &'a CodeParams,
    decoder: Decoder,
    gamma: f64,
    channel: ChannelSampler,
    estimator: EstimatorTable,
    dmc: &'a StateDmc,
    scorer: Scorer,
    input: WeightedIndex<f64>,
    fixed: Option<Codebook>,
}

impl Experiment<'_> {
    fn run_trial(&self, trial: u64) -> Result<TrialOutcome> {
        let mut rng = trial_rng(self.params.seed, trial);
        let msg_count = self.params.msg_count;
        let sent = rng.random_range(0..msg_count) as usize;
        let mut counts = vec![0u32; self.scorer.density.len()];

        let (decoded, tx, x) = match self.params.competitors {
            Competitors::Explicit => {
                let fresh;
                let book = match &self.fixed {
                    Some(book) => book,
                    None => {
                        fresh = generate_codebook(self.params, &mut rng)?;
                        &fresh
                    }
                };
                let x = book.codeword(sent).to_vec();
                let tx = self.channel.transmit(&x, &mut rng);
                let mut scores =
                    (0..book.len()).map(|m| self.scorer.score(book.codeword(m), &tx.y, &mut counts));
                let decoded = match self.decoder {
                    Decoder::MaxInfo => Some(argmax_first(scores)),
                    Decoder::Threshold => scores.position(|s| s > self.gamma),
                };
                (decoded, tx, x)
            }
            Competitors::JointType => {
                let x: Vec<u8> = (0..self.params.n)
                    .map(|_| self.input.sample(&mut rng) as u8)
                    .collect();
                let tx = self.channel.transmit(&x, &mut rng);
                let true_score = self.scorer.score(&x, &tx.y, &mut counts);
                let decoded = self.decode_by_types(sent, true_score, &tx.y, &mut rng, &mut counts);
                (decoded, tx, x)
            }
        };

        let total: f64 = x
            .iter()
            .zip(&tx.z)
            .zip(&tx.s)
            .map(|((&xi, &zi), &si)| self.dmc.distortion(si, self.estimator.estimate(xi as usize, zi)))
            .sum();
        Ok(TrialOutcome {
            error: decoded != Some(sent),
            erasure: decoded.is_none(),
            distortion: total / self.params.n as f64,
        })
    }

    fn decode_by_types(
        &self,
        sent: usize,
        true_score: f64,
        y: &[usize],
        rng: &mut ChaCha12Rng,
        counts: &mut [u32],
    ) -> Option<usize> {
        let y_size = self.scorer.y_size;
        let mut per_output = vec![0u64; y_size];
        for &yi in y {
            per_output[yi] += 1;
        }
        let probs = self.params.input_dist.probs();
        let mut conditional = Vec::with_capacity(probs.len());
        let mut mass_left = 1.0;
        for &pa in probs {
            conditional.push(if mass_left > 0.0 { (pa / mass_left).clamp(0.0, 1.0) } else { 1.0 });
            mass_left -= pa;
        }
        // The first split of every output's count has a fixed size.
        let first: Vec<BinomialTable> = per_output
            .iter()
            .map(|&nb| BinomialTable::new(nb, conditional[0]))
            .collect();
        let last = probs.len() - 1;
        let mut draw = |counts: &mut [u32]| -> f64 {
            for (b, &nb) in per_output.iter().enumerate() {
                let mut remaining = nb;
                for a in 0..probs.len() {
                    let k = if a == last || remaining == 0 {
                        remaining
                    } else if a == 0 {
                        first[b].sample(rng)
                    } else {
                        Binomial::new(remaining, conditional[a]).expect("p in [0, 1]").sample(rng)
                    };
                    counts[a * y_size + b] = k as u32;
                    remaining -= k;
                }
            }
            self.scorer.score_type(counts)
        };
        let msg_count = self.params.msg_count as usize;
        match self.decoder {
            Decoder::MaxInfo => {
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for m in 0..msg_count {
                    let s = if m == sent { true_score } else { draw(counts) };
                    if m == 0 || s > best_score {
                        best = m;
                        best_score = s;
                    }
                }
                Some(best)
            }
            Decoder::Threshold => (0..msg_count).find(|&m| {
                let s = if m == sent { true_score } else { draw(counts) };
                s > self.gamma
            }),
        }
    }
}

/// Inverse-CDF sampler for a binomial law that is drawn many times.
struct BinomialTable {
    cdf: Vec<f64>,
}

impl BinomialTable {
    fn new(n: u64, p: f64) -> Self {
        let mut cdf = Vec::with_capacity(n as usize + 1);
        if p <= 0.0 || p >= 1.0 {
            let at = if p <= 0.0 { 0 } else { n };
            cdf.extend((0..=n).map(|k| if k < at { 0.0 } else { 1.0 }));
            return BinomialTable { cdf };
        }
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        let mut ln_choose = 0.0;
        let mut acc = 0.0;
        for k in 0..=n {
            if k > 0 {
                ln_choose += ((n - k + 1) as f64 / k as f64).ln();
            }
            acc += (ln_choose + k as f64 * lp + (n - k) as f64 * lq).exp();
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        BinomialTable { cdf }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1) as u64
    }
}

/// Runs `trials` independent blocks and aggregates error rate and distortion.
pub fn run_experiment(
    dmc: &StateDmc,
    params: &CodeParams,
    trials: u64,
    decoder: Decoder,
) -> Result<SimReport> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    if params.input_dist.len() != dmc.sizes().x {
        return Err(Error::param(
            "input_dist",
            format!("has {} entries, channel has {} inputs", params.input_dist.len(), dmc.sizes().x),
        ));
    }
    let gamma = match (decoder, params.threshold_gamma) {
        (Decoder::Threshold, None) => {
            return Err(Error::param("threshold_gamma", "required by the threshold decoder"))
        }
        (_, g) => g.unwrap_or(f64::NAN),
    };
    let marginal = marginal_channel(dmc);
    let fixed = if params.fixed_codebook {
        let mut rng = trial_rng(params.seed, u64::MAX);
        Some(generate_codebook(params, &mut rng)?)
    } else {
        None
    };
    let experiment = Experiment {
        params,
        decoder,
        gamma,
        channel: ChannelSampler::new(dmc),
        estimator: EstimatorTable::new(dmc),
        dmc,
        scorer: Scorer::new(&params.input_dist, &marginal),
        input: sampler(params.input_dist.probs()),
        fixed,
    };

    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| experiment.run_trial(t))
        .collect::<Result<_>>()?;

    let errors = outcomes.iter().filter(|o| o.error).count() as u64;
    let erasures = outcomes.iter().filter(|o| o.erasure).count() as u64;
    let distortions: Vec<f64> = outcomes.iter().map(|o| o.distortion).collect();
    let (distortion_hat, se) = mean_and_std_err(&distortions);
    Ok(SimReport {
        trials,
        errors,
        erasures,
        eps_hat: errors as f64 / trials as f64,
        eps_ci: wilson_interval(errors, trials, Z_95),
        distortion_hat,
        distortion_std_err: se,
        distortion_ci: (distortion_hat - Z_95 * se, distortion_hat + Z_95 * se),
        decoder,
        competitors: params.competitors,
        fixed_codebook: params.fixed_codebook,
        threshold_gamma: params.threshold_gamma,
        n: params.n,
        msg_count: params.msg_count,
        rate: params.rate(),
        seed: params.seed,
    })
}
