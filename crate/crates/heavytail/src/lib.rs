//! Tail probabilities of sums of independent heavy-tailed factors.
//!
//! The central object is a [`dist::FactorModel`]: `N` independent factors
//! with regularly-varying tails `F̄_i(x) ~ L(x) x^{-α_i}`, possibly plus
//! light-tailed Gaussian factors. The crate estimates `P[S_N > x]` for large
//! `x` by conditional Monte Carlo,
//!
//! ```text
//! Z(x) = Σ_i F̄_i( (x − S_{N,−i}) ∨ M_{N,−i} ),
//! ```
//!
//! which has bounded relative error, alongside crude Monte Carlo, a
//! partition-based importance sampler, and exponential twisting for Gaussian
//! index models. Companion modules supply the first-order asymptotics and
//! catastrophe-principle bounds ([`asymptotics`]), finite-sample deviation
//! bounds for the estimators ([`bounds`]), and an efficiency laboratory that
//! measures how much faster the conditional estimator concentrates
//! ([`efficiency`], with the mixed-effects rate fit in [`reml`]).
//!
//! All randomness flows through [`rng::StreamKey`] substreams, so every
//! estimate is reproducible bit for bit for a fixed seed and worker count.

// `!(x > 0.0)` is used throughout to reject NaN along with the out-of-range
// values; `partial_cmp` would obscure that.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accum;
pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod dist;
pub mod efficiency;
pub mod error;
pub mod estimators;
pub mod output;
pub mod reml;
pub mod rng;

pub use dist::{FactorDistribution, FactorModel};
pub use error::{Error, Result};
pub use estimators::{
    cmc, cmc_envelope, cmc_single, crude_mc, default_partition_proposals, gaussian_twist,
    is_partition, EstimateResult, GaussianFactorModel, Method,
};
pub use rng::StreamKey;
