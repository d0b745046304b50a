//! Estimators of the sum tail probability `P[S_N > x]`.
//!
//! Four routes are provided:
//! - crude Monte-Carlo on the indicator `1[S_N > x]`,
//! - conditional Monte-Carlo replacing the indicator by
//!   `Z(x) = Σ_i F̄_i((x − S_{N,−i}) ∨ M_{N,−i})`,
//! - partition importance sampling with per-factor proposals,
//! - exponential twisting for the Gaussian index model.
//!
//! Every estimator accumulates the per-sample value and its square in
//! compensated sums, splits the replicate budget across a fixed number of
//! worker substreams, and merges partial moments in worker order so output is
//! bit-identical for a fixed (seed, worker count).

use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::accum::MomentAccumulator;
use crate::dist::{FactorDistribution, FactorModel};
use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Which estimation route produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    CrudeMc,
    Cmc,
    IsPartition,
    GaussianTwist,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::CrudeMc => "crude_mc",
            Method::Cmc => "cmc",
            Method::IsPartition => "is_partition",
            Method::GaussianTwist => "gaussian_twist",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Point estimate with the per-sample second moment needed for error bars.
#[derive(Debug, Clone, Copy)]
pub struct EstimateResult {
    pub estimate: f64,
    /// Mean of the squared per-sample values, `E_n[Z^2]`.
    pub second_moment: f64,
    pub n: u64,
    pub method: Method,
}

impl EstimateResult {
    /// Per-sample variance estimate, clamped at zero.
    pub fn sample_variance(&self) -> f64 {
        (self.second_moment - self.estimate * self.estimate).max(0.0)
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.sample_variance() / self.n as f64).sqrt()
    }

    /// Relative error `se / μ̂`; infinite when the estimate is zero.
    pub fn relative_error(&self) -> f64 {
        if self.estimate > 0.0 {
            self.standard_error() / self.estimate
        } else {
            f64::INFINITY
        }
    }

    /// Half-width of the normal confidence interval at the given level.
    pub fn ci_halfwidth(&self, confidence: f64) -> f64 {
        let z = Normal::standard().inverse_cdf(0.5 * (1.0 + confidence));
        z * self.standard_error()
    }
}

/// Splits `n` replicates over `workers` substreams and merges moments in
/// worker order. `step` is called once per replicate with a scratch state
/// created per worker.
fn run_replicates<S, I, F>(
    n: u64,
    workers: usize,
    stream: &StreamKey,
    init: I,
    step: F,
) -> MomentAccumulator
where
    S: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha12Rng) -> f64 + Sync,
{
    let workers = workers.max(1) as u64;
    let base = n / workers;
    let extra = n % workers;
    let partials: Vec<MomentAccumulator> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let count = base + u64::from(w < extra);
            let mut rng = stream.child(w).rng();
            let mut state = init();
            let mut acc = MomentAccumulator::new();
            for _ in 0..count {
                acc.push(step(&mut state, &mut rng));
            }
            acc
        })
        .collect();
    let mut merged = MomentAccumulator::new();
    for p in &partials {
        merged.merge(p);
    }
    merged
}

fn finish(acc: MomentAccumulator, method: Method) -> EstimateResult {
    EstimateResult {
        estimate: acc.mean(),
        second_moment: acc.second_moment(),
        n: acc.count(),
        method,
    }
}

/// Crude Monte-Carlo: sample all factors, average the indicator.
pub fn crude_mc(
    model: &FactorModel,
    x: f64,
    n: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<EstimateResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let acc = run_replicates(
        n,
        workers,
        stream,
        || (),
        |_, rng| {
            let sum: f64 = model.factors().iter().map(|f| f.sample(rng)).sum();
            f64::from(sum > x)
        },
    );
    Ok(finish(acc, Method::CrudeMc))
}

/// One conditional Monte-Carlo evaluation from a fixed draw vector:
/// `Z(x) = Σ_i F̄_i((x − S_{N,−i}) ∨ M_{N,−i})`.
///
/// For `N = 1` the max over the empty set is `−∞`, so the argument is `x`.
pub fn cmc_single(model: &FactorModel, draws: &[f64], x: f64) -> Result<f64> {
    if draws.len() != model.factor_count() {
        return Err(Error::DrawCountMismatch {
            expected: model.factor_count(),
            got: draws.len(),
        });
    }
    Ok(cmc_single_unchecked(model, draws, x))
}

fn cmc_single_unchecked(model: &FactorModel, draws: &[f64], x: f64) -> f64 {
    let total: f64 = draws.iter().sum();
    // Largest draw and the largest among the others.
    let mut max = f64::NEG_INFINITY;
    let mut max_idx = 0usize;
    let mut second = f64::NEG_INFINITY;
    for (i, &d) in draws.iter().enumerate() {
        if d > max {
            second = max;
            max = d;
            max_idx = i;
        } else if d > second {
            second = d;
        }
    }
    let mut z = 0.0;
    for (i, factor) in model.factors().iter().enumerate() {
        let excluded_max = if i == max_idx { second } else { max };
        let arg = (x - (total - draws[i])).max(excluded_max);
        z += factor.tail(arg);
    }
    z
}

/// Conditional Monte-Carlo estimator averaged over `n` fresh draw vectors.
///
/// Rejects models containing a Gaussian factor: the bounded-relative-error
/// guarantee needs every `F̄_i` to be regularly varying.
pub fn cmc(
    model: &FactorModel,
    x: f64,
    n: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<EstimateResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    if model.has_gaussian_factor() {
        return Err(Error::GaussianFactorUnsupported);
    }
    let acc = run_replicates(
        n,
        workers,
        stream,
        || Vec::with_capacity(model.factor_count()),
        |draws, rng| {
            model.sample_all(rng, draws);
            cmc_single_unchecked(model, draws, x)
        },
    );
    Ok(finish(acc, Method::Cmc))
}

/// Deterministic envelope `Σ_i F̄_i(x/N)`, an upper bound on every
/// realization of `Z(x)` since `(x − S_{N,−i}) ∨ M_{N,−i} ≥ x/N` always.
pub fn cmc_envelope(model: &FactorModel, x: f64) -> f64 {
    let arg = x / model.factor_count() as f64;
    model.factors().iter().map(|f| f.tail(arg)).sum()
}

/// Partition importance sampling.
///
/// Per replicate, draws `X_i ~ F_i` and `X̃_i ~ F̃_i`, and sums the
/// likelihood-ratio-weighted indicators of `{S_N^(i) > x, M_N^(i) = X̃_i}`
/// where the `i`-th coordinate is replaced by its proposal draw. Ties in the
/// maximum resolve in favor of the lowest index.
pub fn is_partition(
    model: &FactorModel,
    proposals: &[FactorDistribution],
    x: f64,
    n: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<EstimateResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    if proposals.len() != model.factor_count() {
        return Err(Error::DrawCountMismatch {
            expected: model.factor_count(),
            got: proposals.len(),
        });
    }
    for (i, (target, proposal)) in model.factors().iter().zip(proposals).enumerate() {
        if !target.has_density() || !proposal.has_density() {
            return Err(Error::ProposalDensityUnavailable { index: i });
        }
        if proposal.support_lower() > target.support_lower() {
            return Err(Error::ProposalNotDominating { index: i });
        }
    }
    let n_factors = model.factor_count();
    let acc = run_replicates(
        n,
        workers,
        stream,
        || (Vec::with_capacity(n_factors), Vec::with_capacity(n_factors)),
        |(draws, proposal_draws): &mut (Vec<f64>, Vec<f64>), rng| {
            model.sample_all(rng, draws);
            proposal_draws.clear();
            proposal_draws.extend(proposals.iter().map(|p| p.sample(rng)));
            let total: f64 = draws.iter().sum();
            let mut z = 0.0;
            for i in 0..n_factors {
                let tilde = proposal_draws[i];
                let sum_i = total - draws[i] + tilde;
                if sum_i <= x {
                    continue;
                }
                // M_N^(i) = X̃_i, lowest index winning ties: strictly above
                // earlier coordinates, at least as large as later ones.
                let beats_max = draws
                    .iter()
                    .enumerate()
                    .all(|(j, &d)| j == i || if j < i { tilde > d } else { tilde >= d });
                if !beats_max {
                    continue;
                }
                let f = model.factors()[i].density(tilde).expect("checked above");
                let g = proposals[i].density(tilde).expect("checked above");
                if f > 0.0 {
                    z += f / g;
                }
            }
            z
        },
    );
    Ok(finish(acc, Method::IsPartition))
}

/// Default proposals for [`is_partition`]: halve each Pareto shape (heavier
/// tail), keep Gaussian factors unchanged.
pub fn default_partition_proposals(model: &FactorModel) -> Result<Vec<FactorDistribution>> {
    model
        .factors()
        .iter()
        .map(|f| match *f {
            FactorDistribution::Pareto {
                alpha,
                scale,
                shift,
            }
            | FactorDistribution::ShiftedPareto {
                alpha,
                scale,
                shift,
            } => FactorDistribution::shifted_pareto(alpha / 2.0, scale, shift),
            FactorDistribution::Gaussian { sigma } => FactorDistribution::gaussian(sigma),
            FactorDistribution::LogPareto { .. } => {
                Err(Error::ProposalDensityUnavailable { index: 0 })
            }
        })
        .collect()
}

/// Gaussian index model `ξ = <β̄, φ> + ε̄` with independent standard normal
/// factors and idiosyncratic noise, so `ξ ~ N(0, v)` with
/// `v = ‖β̄‖² + Σ σ_i²/M²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFactorModel {
    loadings: Vec<f64>,
    idio_sigmas: Vec<f64>,
}

impl GaussianFactorModel {
    pub fn new(loadings: Vec<f64>, idio_sigmas: Vec<f64>) -> Result<Self> {
        let model = Self {
            loadings,
            idio_sigmas,
        };
        if !(model.index_variance() > 0.0) {
            return Err(Error::InvalidParameter(
                "index variance must be positive".into(),
            ));
        }
        Ok(model)
    }

    /// Convenience constructor from the index variance directly.
    pub fn from_index_variance(v: f64) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(
                "index variance must be positive and finite".into(),
            ));
        }
        Ok(Self {
            loadings: vec![v.sqrt()],
            idio_sigmas: Vec::new(),
        })
    }

    /// `v = ‖β̄‖² + Σ σ_i² / M²`.
    pub fn index_variance(&self) -> f64 {
        let beta_sq: f64 = self.loadings.iter().map(|b| b * b).sum();
        let m = self.idio_sigmas.len() as f64;
        let idio: f64 = self.idio_sigmas.iter().map(|s| s * s).sum();
        if self.idio_sigmas.is_empty() {
            beta_sq
        } else {
            beta_sq + idio / (m * m)
        }
    }

    /// Cumulant function `ψ(θ) = θ² v / 2`.
    pub fn cumulant(&self, theta: f64) -> f64 {
        0.5 * theta * theta * self.index_variance()
    }

    /// Optimal twisting parameter `θ* = λ / v`, the solution of `ψ'(θ) = λ`.
    pub fn optimal_twist(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveThreshold(lambda));
        }
        Ok(lambda / self.index_variance())
    }
}

/// Exponentially twisted estimator of `P[ξ > λ]`: samples from
/// `N(θ* v, v)` and averages `1[ξ > λ] · exp(ψ(θ*) − θ* ξ)`.
pub fn gaussian_twist(
    model: &GaussianFactorModel,
    lambda: f64,
    n: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<EstimateResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let theta = model.optimal_twist(lambda)?;
    let v = model.index_variance();
    let twisted_mean = theta * v;
    let sd = v.sqrt();
    let psi = model.cumulant(theta);
    let acc = run_replicates(
        n,
        workers,
        stream,
        || (),
        |_, rng| {
            let z: f64 = StandardNormal.sample(rng);
            let xi = twisted_mean + sd * z;
            if xi > lambda {
                (psi - theta * xi).exp()
            } else {
                0.0
            }
        },
    );
    Ok(finish(acc, Method::GaussianTwist))
}
