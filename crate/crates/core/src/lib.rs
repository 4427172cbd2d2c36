//! Finite-blocklength analysis of joint communication and state sensing
//! over state-dependent memoryless channels with generalized feedback.
//!
//! The transmitter sends `x` over a channel `W(y, z | x, s)` whose state `s`
//! is drawn i.i.d. from a prior. The receiver decodes from `y`; the
//! transmitter estimates the state sequence from the feedback `z`. The crate
//! computes the optimal symbolwise estimator, achievability and converse
//! rate bounds at blocklength `n` and error probability `eps` under an
//! expected distortion budget, time-sharing baselines and a Monte Carlo
//! simulator for the random-coding scheme.

pub mod binary;
pub mod bounds;
pub mod channel_file;
pub mod dmc;
pub mod error;
pub mod estimator;
pub mod optimize;
pub mod qfunc;
pub mod sim;
pub mod stats;
pub mod tradeoff;

pub use binary::{binary_channel, binary_closed_forms, BinaryChannelSpec, BinaryClosedForms};
pub use bounds::{
    achievability_rate, converse_rate, optimize_delta, optimize_k, second_order_rate, BoundParams,
    BoundResult,
};
pub use dmc::{
    capacity, info_density, info_moments, marginal_channel, output_dist, Alphabets, InfoMoments,
    InputDist, MarginalChannel, StateDmc,
};
pub use error::{Error, Result};
pub use estimator::{d_min, d_trivial, expected_distortion, optimal_estimate, EstimatorTable};
pub use qfunc::{q_func, q_inv};
pub use sim::{run_experiment, CodeParams, Competitors, Decoder, SimReport};
pub use tradeoff::{
    basic_resource_sharing, improved_resource_sharing, max_rate, sweep, tradeoff_point,
    BaselineAnchors, BaselinePoint, Side, TradeoffPoint, Variant,
};
