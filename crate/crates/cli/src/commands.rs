use std::path::{Path, PathBuf};

use isac_core::binary::{binary_closed_forms, BinaryChannelSpec};
use isac_core::bounds::{achievability_rate, converse_rate, optimize_delta, optimize_k, BoundParams};
use isac_core::dmc::{info_moments, marginal_channel};
use isac_core::estimator::{d_min, d_trivial};
use isac_core::sim::threshold_from_k;
use isac_core::tradeoff::{clamped, default_distortion_grid, BaselineAnchors, TradeoffPoint};
use isac_core::{
    binary_channel, channel_file, expected_distortion, max_rate, run_experiment, second_order_rate,
    sweep, CodeParams, Competitors, Decoder, InputDist, Side, StateDmc,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{
    BaselinesArgs, BinaryExampleArgs, BoundsArgs, ChannelSource, CompetitorsArg, DecoderArg,
    GridSpec, SimulateArgs, SweepArgs,
};
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ChannelSource {
    pub fn load(&self) -> Result<StateDmc> {
        match (&self.channel, self.binary_q) {
            (Some(path), None) => Ok(channel_file::load(path)?),
            (None, Some(q)) => Ok(binary_channel(q)?),
            _ => Err(config_err("exactly one of --channel or --binary-q is required")),
        }
    }
}

fn resolve_input(dmc: &StateDmc, alpha: Option<f64>, input: Option<&[f64]>) -> Result<InputDist> {
    let x = dmc.sizes().x;
    let px = match (alpha, input) {
        (Some(a), None) => {
            if x != 2 {
                return Err(config_err(format!("--alpha needs a two-input channel, this one has {x}")));
            }
            InputDist::binary(a)?
        }
        (None, Some(p)) => InputDist::new(p.to_vec())?,
        _ => return Err(config_err("one of --alpha or --input is required")),
    };
    if px.len() != x {
        return Err(config_err(format!("--input has {} entries, the channel has {x} inputs", px.len())));
    }
    Ok(px)
}

fn budgets(dmc: &StateDmc, grid: Option<&GridSpec>) -> Result<Vec<f64>> {
    match grid {
        Some(g) => g.points("--d-grid").map_err(CliError::Config),
        None => Ok(default_distortion_grid(dmc)),
    }
}

pub fn bounds(args: &BoundsArgs) -> Result<Table> {
    let dmc = args.source.load()?;
    let px = resolve_input(&dmc, args.alpha, args.input.as_deref())?;
    let m = info_moments(&px, &marginal_channel(&dmc));
    let distortion = expected_distortion(&dmc, &px);
    let mut table = Table::new(
        "bounds",
        vec![
            "n", "eps", "mutual_info", "dispersion", "third_abs", "distortion", "rate_ach",
            "ach_feasible", "k_coeff", "beta_u", "rate_conv", "conv_feasible", "delta", "beta_l",
            "rate_second_order",
        ],
        args,
    );
    table.flag_columns = vec!["ach_feasible", "conv_feasible"];
    for &n in &args.n {
        let base = BoundParams::new(n, args.eps)?;
        let ach = match args.k {
            Some(k) => achievability_rate(&m, &base.with_k(k))?,
            None => optimize_k(&m, n, args.eps)?,
        };
        let conv = match args.delta {
            Some(d) => converse_rate(&m, &base.with_delta(d))?,
            None => optimize_delta(&m, n, args.eps)?,
        };
        table.push(vec![
            Cell::Int(n),
            Cell::Num(args.eps),
            Cell::Num(m.mutual_info),
            Cell::Num(m.var),
            Cell::Num(m.third_abs),
            Cell::Num(distortion),
            Cell::opt(ach.rate),
            Cell::Bool(ach.feasible),
            Cell::opt(ach.params_used.k_coeff),
            Cell::Num(ach.beta),
            Cell::opt(conv.rate),
            Cell::Bool(conv.feasible),
            Cell::opt(conv.params_used.delta),
            Cell::Num(conv.beta),
            Cell::Num(second_order_rate(&m, n, args.eps)?),
        ]);
    }
    Ok(table)
}

const CURVE_COLUMNS: [&str; 13] = [
    "distortion", "n", "eps", "rate_ach", "rate_conv", "rate_second_order", "ach_feasible",
    "conv_feasible", "second_order_feasible", "k_coeff", "delta", "input_ach", "input_conv",
];

fn curve_row(p: &TradeoffPoint) -> Vec<Cell> {
    vec![
        Cell::Num(p.distortion_budget),
        Cell::Int(p.n),
        Cell::Num(p.eps),
        Cell::Num(p.presented(Side::Achievability)),
        Cell::Num(p.presented(Side::Converse)),
        Cell::Num(p.presented(Side::SecondOrder)),
        Cell::Bool(p.rate_ach.is_some()),
        Cell::Bool(p.rate_conv.is_some()),
        Cell::Bool(p.rate_second_order.is_some()),
        Cell::opt(p.k_coeff),
        Cell::opt(p.delta),
        Cell::probs(p.best_input_ach.as_ref().map(InputDist::probs)),
        Cell::probs(p.best_input_conv.as_ref().map(InputDist::probs)),
    ]
}

fn curves(
    command: &'static str,
    dmc: &StateDmc,
    eps: f64,
    ns: &[u64],
    grid: Option<&GridSpec>,
    config: &impl Serialize,
) -> Result<Table> {
    let budgets = budgets(dmc, grid)?;
    let mut table = Table::new(command, CURVE_COLUMNS.to_vec(), config);
    table.flag_columns = vec!["ach_feasible", "conv_feasible", "second_order_feasible"];
    table.summary.push(("d_min", Cell::Num(d_min(dmc).0)));
    table.summary.push(("d_trivial", Cell::Num(d_trivial(dmc))));
    for &n in ns {
        for p in sweep(dmc, n, eps, &budgets)? {
            table.push(curve_row(&p));
        }
    }
    Ok(table)
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<Table> {
    let dmc = args.source.load()?;
    curves("sweep", &dmc, args.eps, &args.n, args.d_grid.as_ref(), args)
}

pub fn binary_example(args: &BinaryExampleArgs) -> Result<Table> {
    let dmc = binary_channel(args.binary_q)?;
    let closed = binary_closed_forms(&BinaryChannelSpec::new(args.binary_q, 0.5)?)?;
    let mut table = curves("binary-example", &dmc, args.eps, &args.n, args.d_grid.as_ref(), args)?;
    let mut summary = vec![
        ("q", Cell::Num(args.binary_q)),
        ("capacity", Cell::Num(closed.capacity)),
        ("alpha_star", Cell::Num(closed.alpha_star)),
        ("d_comm", Cell::Num(closed.d_comm(args.binary_q))),
    ];
    summary.append(&mut table.summary);
    table.summary = summary;
    Ok(table)
}

pub fn baselines(args: &BaselinesArgs) -> Result<Table> {
    let dmc = args.source.load()?;
    let gammas = args.gamma_grid.points("--gamma-grid").map_err(CliError::Config)?;
    if gammas.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(config_err("--gamma-grid: fractions must lie in [0, 1]"));
    }
    let anchors = BaselineAnchors::compute(&dmc, args.n, args.eps)?;
    let mut table = Table::new(
        "baselines",
        vec!["variant", "gamma", "rate", "distortion", "joint_rate", "joint_dominates"],
        args,
    );
    table.summary = vec![
        ("n", Cell::Int(args.n)),
        ("eps", Cell::Num(args.eps)),
        ("r_max", Cell::Num(anchors.r_max)),
        ("r_sense", Cell::Num(anchors.r_sense)),
        ("d_min", Cell::Num(anchors.d_min)),
        ("d_trivial", Cell::Num(anchors.d_trivial)),
        ("d_comm", Cell::Num(anchors.d_comm)),
        ("capacity", Cell::Num(anchors.capacity)),
    ];
    for gamma in &gammas {
        for point in [anchors.basic(*gamma)?, anchors.improved(*gamma)?] {
            let joint = clamped(max_rate(&dmc, args.n, args.eps, point.distortion, Side::Achievability)?.rate);
            let variant = serde_json::to_value(point.variant)?;
            table.push(vec![
                Cell::Text(variant.as_str().unwrap_or_default().to_string()),
                Cell::Num(point.gamma),
                Cell::Num(point.rate),
                Cell::Num(point.distortion),
                Cell::Num(joint),
                Cell::Bool(joint >= point.rate - 1e-9),
            ]);
        }
    }
    for p in sweep(&dmc, args.n, args.eps, &budgets(&dmc, args.d_grid.as_ref())?)? {
        let rate = p.presented(Side::Achievability);
        table.push(vec![
            Cell::Text("joint".into()),
            Cell::Empty,
            Cell::Num(rate),
            Cell::Num(p.distortion_budget),
            Cell::Num(rate),
            Cell::Empty,
        ]);
    }
    Ok(table)
}

/// A fully resolved simulation request; emitted with every report so the
/// run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub channel: Option<PathBuf>,
    pub binary_q: Option<f64>,
    pub n: usize,
    pub msg_count: u64,
    pub input: Vec<f64>,
    pub trials: u64,
    pub decoder: Decoder,
    pub threshold_gamma: Option<f64>,
    pub seed: u64,
    pub fixed_codebook: bool,
    pub competitors: Competitors,
    pub symbol_cap: u64,
}

fn read_config(path: &Path) -> Result<SimulateConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn resolve_simulation(args: &SimulateArgs) -> Result<(SimulateConfig, StateDmc)> {
    if let Some(path) = &args.config {
        let cfg = read_config(path)?;
        let source = ChannelSource {
            channel: cfg.channel.clone(),
            binary_q: cfg.binary_q,
        };
        let dmc = source.load()?;
        return Ok((cfg, dmc));
    }
    let dmc = args.source.load()?;
    let n = args.n.ok_or_else(|| config_err("--n is required"))?;
    if n == 0 {
        return Err(config_err("--n must be at least 1"));
    }
    let px = resolve_input(&dmc, args.alpha, args.input.as_deref())?;
    let msg_count = match (args.msg_count, args.rate) {
        (Some(m), None) => m,
        (None, Some(r)) => {
            let m = (n as f64 * r).exp2().floor();
            if m.is_nan() || m < 1.0 {
                return Err(CliError::Infeasible(format!("rate {r} at n = {n} gives fewer than one message")));
            }
            if m > u64::MAX as f64 {
                return Err(config_err(format!("rate {r} at n = {n} gives more than 2^64 messages")));
            }
            m as u64
        }
        _ => return Err(config_err("one of --msg-count or --rate is required")),
    };
    let decoder = match args.decoder {
        DecoderArg::MaxInfo => Decoder::MaxInfo,
        DecoderArg::Threshold => Decoder::Threshold,
    };
    let threshold_gamma = match (decoder, args.threshold, args.k) {
        (Decoder::MaxInfo, None, None) => None,
        (_, Some(g), _) => Some(g),
        (_, None, Some(k)) => Some(threshold_from_k(msg_count, n, k)),
        (Decoder::Threshold, None, None) => {
            let m = info_moments(&px, &marginal_channel(&dmc));
            let best = optimize_k(&m, n as u64, args.eps)?;
            let k = best.params_used.k_coeff.filter(|_| best.feasible).ok_or_else(|| {
                CliError::Infeasible(format!("no threshold coefficient is feasible at n = {n}, eps = {}", args.eps))
            })?;
            Some(threshold_from_k(msg_count, n, k))
        }
    };
    let cfg = SimulateConfig {
        channel: args.source.channel.clone(),
        binary_q: args.source.binary_q,
        n,
        msg_count,
        input: px.probs().to_vec(),
        trials: args.trials,
        decoder,
        threshold_gamma,
        seed: args.seed,
        fixed_codebook: args.fixed_codebook,
        competitors: match args.competitors {
            CompetitorsArg::Explicit => Competitors::Explicit,
            CompetitorsArg::JointType => Competitors::JointType,
        },
        symbol_cap: args.symbol_cap,
    };
    Ok((cfg, dmc))
}

pub fn simulate(args: &SimulateArgs) -> Result<Table> {
    let (cfg, dmc) = resolve_simulation(args)?;
    let px = InputDist::new(cfg.input.clone())?;
    let params = CodeParams {
        n: cfg.n,
        msg_count: cfg.msg_count,
        input_dist: px.clone(),
        threshold_gamma: cfg.threshold_gamma,
        seed: cfg.seed,
        fixed_codebook: cfg.fixed_codebook,
        competitors: cfg.competitors,
        symbol_cap: cfg.symbol_cap,
    };
    // Size and shape problems surface before any trial runs.
    params.validate()?;
    if px.len() != dmc.sizes().x {
        return Err(config_err(format!("input has {} entries, the channel has {} inputs", px.len(), dmc.sizes().x)));
    }
    let report = run_experiment(&dmc, &params, cfg.trials, cfg.decoder)?;
    let mut table = Table::new(
        "simulate",
        vec![
            "trials", "errors", "erasures", "eps_hat", "eps_ci_low", "eps_ci_high",
            "distortion_hat", "distortion_std_err", "distortion_ci_low", "distortion_ci_high",
            "expected_distortion", "decoder", "n", "msg_count", "rate", "seed",
        ],
        &cfg,
    );
    table.push(vec![
        Cell::Int(report.trials),
        Cell::Int(report.errors),
        Cell::Int(report.erasures),
        Cell::Num(report.eps_hat),
        Cell::Num(report.eps_ci.0),
        Cell::Num(report.eps_ci.1),
        Cell::Num(report.distortion_hat),
        Cell::Num(report.distortion_std_err),
        Cell::Num(report.distortion_ci.0),
        Cell::Num(report.distortion_ci.1),
        Cell::Num(expected_distortion(&dmc, &px)),
        Cell::Text(serde_json::to_value(report.decoder)?.as_str().unwrap_or_default().to_string()),
        Cell::Int(report.n as u64),
        Cell::Int(report.msg_count),
        Cell::Num(report.rate),
        Cell::Int(report.seed),
    ]);
    Ok(table)
}
