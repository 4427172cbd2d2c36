mod common;

use isac_core::bounds::{berry_esseen_term, optimize_k};
use isac_core::dmc::{info_moments, marginal_channel};
use isac_core::sim::{
    estimate_states, generate_codebook, threshold_from_k, transmit, trial_rng, ChannelSampler,
};
use isac_core::{
    binary_channel, expected_distortion, q_func, run_experiment, Alphabets, CodeParams,
    Competitors, Decoder, InputDist, StateDmc,
};
use rand::Rng;

fn noisy_symmetric() -> StateDmc {
    // Binary symmetric channel whose crossover depends on the state.
    StateDmc::from_fn(
        Alphabets { x: 2, s: 2, y: 2, z: 2 },
        vec![0.5, 0.5],
        |x, s, y, z| {
            let flip = if s == 0 { 0.05 } else { 0.25 };
            let py = if x == y { 1.0 - flip } else { flip };
            let pz = if z == s { 0.8 } else { 0.2 };
            py * pz
        },
        |s, t| (s != t) as u8 as f64,
    )
    .unwrap()
}

#[test]
fn codebook_symbol_frequency() {
    let params = CodeParams::new(10_000, 1, InputDist::binary(0.5).unwrap(), 17);
    let book = generate_codebook(&params, &mut trial_rng(17, 0)).unwrap();
    let ones = book.codeword(0).iter().filter(|&&s| s == 1).count() as f64;
    let sigma = (10_000.0f64 * 0.25).sqrt();
    assert!((ones - 5_000.0).abs() < 3.0 * sigma, "{ones}");
}

#[test]
fn transmit_histogram_matches_kernel() {
    let dmc = common::random_channel(7, 3);
    let a = dmc.sizes();
    let n = 1_000_000;
    let mut rng = trial_rng(3, 0);
    let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..a.x) as u8).collect();
    let tx = transmit(&dmc, &x, &mut rng);
    let mut counts = vec![0u64; a.x * a.s * a.y * a.z];
    for i in 0..n {
        let cell = ((x[i] as usize * a.s + tx.s[i]) * a.y + tx.y[i]) * a.z + tx.z[i];
        counts[cell] += 1;
    }
    let x_counts: Vec<f64> = (0..a.x)
        .map(|v| x.iter().filter(|&&s| s as usize == v).count() as f64)
        .collect();
    for xi in 0..a.x {
        for s in 0..a.s {
            for y in 0..a.y {
                for z in 0..a.z {
                    let p = dmc.state_prior()[s] * dmc.kernel(xi, s, y, z);
                    let expected = x_counts[xi] * p;
                    let sigma = (x_counts[xi] * p * (1.0 - p)).sqrt();
                    let got = counts[((xi * a.s + s) * a.y + y) * a.z + z] as f64;
                    assert!((got - expected).abs() <= 4.0 * sigma.max(1e-9), "cell {xi}{s}{y}{z}");
                }
            }
        }
    }
}

#[test]
fn symbolwise_estimation_distortion() {
    let dmc = binary_channel(0.4).unwrap();
    let n = 1_000_000;
    let mut rng = trial_rng(11, 0);
    let x: Vec<u8> = (0..n).map(|_| rng.random_bool(0.5) as u8).collect();
    let tx = ChannelSampler::new(&dmc).transmit(&x, &mut rng);
    let est = estimate_states(&dmc, &x, &tx.z);
    for i in 0..n {
        if x[i] == 1 {
            assert_eq!(est[i], tx.z[i]);
        } else {
            assert_eq!(est[i], 0);
        }
    }
    let wrong = est.iter().zip(&tx.s).filter(|(a, b)| a != b).count() as f64;
    let sigma = (n as f64 * 0.2 * 0.8).sqrt();
    assert!((wrong - 0.2 * n as f64).abs() < 3.0 * sigma, "{wrong}");
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let dmc = noisy_symmetric();
    let mut params = CodeParams::new(24, 32, InputDist::uniform(2), 42);
    let run = |threads: usize, params: &CodeParams| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment(&dmc, params, 3000, Decoder::MaxInfo).unwrap())
    };
    let one = run(1, &params);
    assert_eq!(one, run(4, &params));
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&run(3, &params)).unwrap()
    );
    params.competitors = Competitors::JointType;
    assert_eq!(run(1, &params), run(5, &params));
    params.seed = 43;
    assert_ne!(one.errors, 0);
    assert_ne!(run(2, &params).distortion_hat, one.distortion_hat);
}

#[test]
fn joint_type_competitors_match_explicit_codebooks() {
    let dmc = noisy_symmetric();
    let trials = 20_000;
    for decoder in [Decoder::MaxInfo, Decoder::Threshold] {
        let mut params = CodeParams::new(20, 64, InputDist::uniform(2), 5);
        params.threshold_gamma = Some(threshold_from_k(64, 20, 0.3));
        let explicit = run_experiment(&dmc, &params, trials, decoder).unwrap();
        params.competitors = Competitors::JointType;
        params.seed = 6;
        let typed = run_experiment(&dmc, &params, trials, decoder).unwrap();
        let (p1, p2) = (explicit.eps_hat, typed.eps_hat);
        let sigma = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / trials as f64).sqrt();
        assert!(p1 > 0.05, "{decoder:?}: too few errors to compare ({p1})");
        assert!((p1 - p2).abs() < 4.0 * sigma, "{decoder:?}: {p1} vs {p2}");
        let dsigma = (explicit.distortion_std_err.powi(2) + typed.distortion_std_err.powi(2)).sqrt();
        assert!((explicit.distortion_hat - typed.distortion_hat).abs() < 4.0 * dsigma);
    }
}

#[test]
fn distortion_converges_to_expected_value() {
    let dmc = noisy_symmetric();
    let px = InputDist::new(vec![0.3, 0.7]).unwrap();
    let params = CodeParams::new(50, 4, px.clone(), 9);
    // 2000 blocks of 50 symbols
    let r = run_experiment(&dmc, &params, 2000, Decoder::MaxInfo).unwrap();
    let exact = expected_distortion(&dmc, &px);
    assert!((r.distortion_hat - exact).abs() < 4.0 * r.distortion_std_err, "{r:?}");
    assert!(r.distortion_ci.0 <= r.distortion_hat && r.distortion_hat <= r.distortion_ci.1);
}

#[test]
fn threshold_decoder_meets_its_error_bound() {
    let dmc = binary_channel(0.4).unwrap();
    let px = InputDist::binary(0.5).unwrap();
    let n = 60;
    let msg_count = 16;
    let m = info_moments(&px, &marginal_channel(&dmc));
    let k = optimize_k(&m, n as u64, 0.3).unwrap().params_used.k_coeff.unwrap();
    let gamma = threshold_from_k(msg_count, n, k);
    let nf = n as f64;
    let bound = q_func((nf * m.mutual_info - gamma) / (nf * m.var).sqrt())
        + nf.powf(-k)
        + berry_esseen_term(&m, n as u64);

    let mut params = CodeParams::new(n, msg_count, px, 21);
    params.threshold_gamma = Some(gamma);
    let threshold = run_experiment(&dmc, &params, 20_000, Decoder::Threshold).unwrap();
    assert!(threshold.eps_ci.0 <= bound, "{threshold:?} bound {bound}");
    assert!(threshold.erasures <= threshold.errors);

    // Same seed, same codebooks and channel draws.
    let maxinfo = run_experiment(&dmc, &params, 20_000, Decoder::MaxInfo).unwrap();
    assert!(maxinfo.eps_ci.0 <= threshold.eps_ci.1, "{maxinfo:?}");
    assert_eq!(maxinfo.distortion_hat, threshold.distortion_hat);
}

#[test]
fn fixed_codebook_mode_runs() {
    let dmc = noisy_symmetric();
    let mut params = CodeParams::new(16, 8, InputDist::uniform(2), 1);
    params.fixed_codebook = true;
    let a = run_experiment(&dmc, &params, 500, Decoder::MaxInfo).unwrap();
    let b = run_experiment(&dmc, &params, 500, Decoder::MaxInfo).unwrap();
    assert_eq!(a, b);
    assert!(a.fixed_codebook);
}

#[test]
fn rejects_mismatched_inputs() {
    let dmc = noisy_symmetric();
    let params = CodeParams::new(16, 8, InputDist::uniform(3), 1);
    assert!(run_experiment(&dmc, &params, 10, Decoder::MaxInfo).is_err());
    let params = CodeParams::new(16, 8, InputDist::uniform(2), 1);
    assert!(run_experiment(&dmc, &params, 0, Decoder::MaxInfo).is_err());
}
