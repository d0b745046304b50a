//! Efficiency experiments: deviation probabilities of the CMC and crude
//! Monte-Carlo estimators, the log-ratio `log(Λ)` of those probabilities,
//! and the rate `r̂` at which it shrinks in the sample size, fitted with the
//! random-slope mixed model in [`crate::reml`].
//!
//! A cell is a pair `(x, n)`: deviation bound and inner sample size. Per
//! cell, `log(Λ)` is evaluated `lr_reps` times; each evaluation estimates
//! both deviation probabilities from `outer_reps` independent estimates of
//! size `n` against a shared high-precision `μ(x)` reference.

use rand::RngCore;

use crate::dist::{FactorDistribution, FactorModel};
use crate::error::{Error, Result};
use crate::estimators::{cmc, crude_mc, EstimateResult, Method};
use crate::reml::{reml_fit, RemlFit};
use crate::rng::StreamKey;

/// Deviation bound used by the catastrophe-principle experiments: deep
/// enough in the tail for the one-big-jump regime across the whole shape
/// sweep, while μ stays estimable by conditional Monte Carlo.
pub const CATASTROPHE_X: f64 = 100.0;

/// Shared experiment knobs with desk-scale defaults.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    /// Precision κ of the deviation band `|Z̄ − μ| > κμ`.
    pub kappa: f64,
    /// Outer replications R per deviation-probability estimate.
    pub outer_reps: u64,
    /// Independent log(Λ) evaluations per (x, n) cell.
    pub lr_reps: u64,
    /// Sample size of the CMC reference estimate of μ(x).
    pub n_ref: u64,
    pub seed: u64,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            kappa: 5e-3,
            outer_reps: 50,
            lr_reps: 5,
            n_ref: 1_000_000,
            seed,
            workers: 1,
        }
    }
}

/// Full description of an outer-replication deviation experiment.
#[derive(Debug, Clone)]
pub struct DeviationExperiment {
    pub model: FactorModel,
    pub x_grid: Vec<f64>,
    pub n_grid: Vec<u64>,
    pub config: ExperimentConfig,
}

impl DeviationExperiment {
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        if !(c.kappa > 0.0 && c.kappa < 1.0) {
            return Err(Error::Config(format!("kappa {} outside (0,1)", c.kappa)));
        }
        if c.outer_reps < 2 {
            return Err(Error::Config("outer_reps must be >= 2".into()));
        }
        if self.x_grid.is_empty() || self.n_grid.is_empty() {
            return Err(Error::Config("empty x or n grid".into()));
        }
        let max_n = *self.n_grid.iter().max().unwrap();
        if c.n_ref < max_n.saturating_mul(10) {
            return Err(Error::Config(format!(
                "n_ref {} must be at least 10x the largest inner sample size {max_n}",
                c.n_ref
            )));
        }
        Ok(())
    }
}

/// One row of the re-analysis (long-format) output.
#[derive(Debug, Clone, Copy)]
pub struct LongRecord {
    pub x: f64,
    pub n: u64,
    pub replicate: u64,
    pub method: Method,
    pub estimate: f64,
    pub deviated: bool,
}

/// One log(Λ) evaluation at a cell.
#[derive(Debug, Clone, Copy)]
pub struct LrObservation {
    pub n: u64,
    pub replicate: u64,
    pub cmc_deviations: u64,
    pub crude_deviations: u64,
    /// `None` marks a censored evaluation (a zero deviation count on either
    /// side, which would produce log(0) or log(∞)).
    pub log_lambda: Option<f64>,
}

/// Per-x log-ratio curve with its fitted shrink rate.
#[derive(Debug, Clone)]
pub struct LrCurve {
    pub x: f64,
    pub mu_ref: f64,
    pub observations: Vec<LrObservation>,
    pub fit: Option<RemlFit>,
    pub censored_cells: usize,
}

/// High-precision CMC reference estimate of `μ(x)`.
pub fn estimate_mu_ref(
    model: &FactorModel,
    x: f64,
    n_ref: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<f64> {
    Ok(cmc(model, x, n_ref, stream, workers)?.estimate)
}

fn one_estimate(
    method: Method,
    model: &FactorModel,
    x: f64,
    n: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<EstimateResult> {
    match method {
        Method::CrudeMc => crude_mc(model, x, n, stream, workers),
        Method::Cmc => cmc(model, x, n, stream, workers),
        other => Err(Error::Config(format!(
            "deviation experiments support crude_mc and cmc, not {other}"
        ))),
    }
}

/// Runs `outer_reps` estimates of size `n` and reports each one together
/// with its deviation flag `|estimate − μ_ref| > κ μ_ref`.
#[allow(clippy::too_many_arguments)]
pub fn deviation_cell(
    method: Method,
    model: &FactorModel,
    x: f64,
    n: u64,
    kappa: f64,
    mu_ref: f64,
    outer_reps: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<Vec<(f64, bool)>> {
    if !(mu_ref > 0.0) {
        return Err(Error::Config(format!(
            "reference probability must be positive, got {mu_ref}"
        )));
    }
    let band = kappa * mu_ref;
    (0..outer_reps)
        .map(|rep| {
            let est = one_estimate(method, model, x, n, &stream.child(rep), workers)?;
            Ok((est.estimate, (est.estimate - mu_ref).abs() > band))
        })
        .collect()
}

/// Deviation count and fraction over `outer_reps` replications. A zero count
/// is a valid (censored) outcome.
#[allow(clippy::too_many_arguments)]
pub fn deviation_probability(
    method: Method,
    model: &FactorModel,
    x: f64,
    n: u64,
    kappa: f64,
    mu_ref: f64,
    outer_reps: u64,
    stream: &StreamKey,
    workers: usize,
) -> Result<(u64, f64)> {
    let cell = deviation_cell(
        method, model, x, n, kappa, mu_ref, outer_reps, stream, workers,
    )?;
    let count = cell.iter().filter(|(_, d)| *d).count() as u64;
    Ok((count, count as f64 / outer_reps as f64))
}

/// `log(Λ)` from paired deviation counts; `None` when either count is zero.
pub fn lr_ratio(cmc_deviations: u64, crude_deviations: u64, outer_reps: u64) -> Option<f64> {
    if cmc_deviations == 0 || crude_deviations == 0 {
        None
    } else {
        Some((cmc_deviations as f64 / outer_reps as f64).ln()
            - (crude_deviations as f64 / outer_reps as f64).ln())
    }
}

/// Shrink rate `r̂ = −β̂1` from a fitted curve.
///
/// Errors when no fit exists or the slope is non-negative, carrying the fit
/// diagnostics in the error.
pub fn estimate_r(curve: &LrCurve) -> Result<f64> {
    let fit = curve.fit.as_ref().ok_or_else(|| {
        Error::DegenerateDesign("log-ratio curve has too few uncensored cells to fit".into())
    })?;
    if fit.beta1 < 0.0 {
        Ok(-fit.beta1)
    } else {
        Err(Error::NoExponentialGain {
            beta0: fit.beta0,
            beta1: fit.beta1,
            tau2: fit.tau2,
            sigma2: fit.sigma2,
            censored: curve.censored_cells,
        })
    }
}

/// Fits the random-slope model to the uncensored observations of one curve,
/// grouping by inner sample size.
pub fn fit_lr_curve(x: f64, mu_ref: f64, observations: Vec<LrObservation>) -> LrCurve {
    let censored_cells = observations
        .iter()
        .filter(|o| o.log_lambda.is_none())
        .count();
    let mut by_n: Vec<(u64, Vec<(f64, f64)>)> = Vec::new();
    for obs in &observations {
        let Some(ll) = obs.log_lambda else { continue };
        match by_n.iter_mut().find(|(n, _)| *n == obs.n) {
            Some((_, v)) => v.push((obs.n as f64, ll)),
            None => by_n.push((obs.n, vec![(obs.n as f64, ll)])),
        }
    }
    let fit = if by_n.len() >= 2 {
        let groups: Vec<Vec<(f64, f64)>> = by_n.into_iter().map(|(_, v)| v).collect();
        reml_fit(&groups).ok()
    } else {
        None
    };
    LrCurve {
        x,
        mu_ref,
        observations,
        fit,
        censored_cells,
    }
}

/// Everything produced by one deviation experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub curves: Vec<LrCurve>,
    pub long: Vec<LongRecord>,
}

// Substream lanes under each x-index key.
const LANE_MU_REF: u64 = 0;
const LANE_CELLS: u64 = 1;

/// Runs the full outer-replication pipeline over the (x, n) grid.
pub fn run_deviation_experiment(exp: &DeviationExperiment) -> Result<ExperimentOutput> {
    exp.validate()?;
    let c = exp.config;
    let root = StreamKey::new(c.seed);
    let mut curves = Vec::with_capacity(exp.x_grid.len());
    let mut long = Vec::new();
    for (xi, &x) in exp.x_grid.iter().enumerate() {
        let x_key = root.child(xi as u64);
        let mu_ref = estimate_mu_ref(
            &exp.model,
            x,
            c.n_ref,
            &x_key.child(LANE_MU_REF),
            c.workers,
        )?;
        let mut observations = Vec::new();
        for (ni, &n) in exp.n_grid.iter().enumerate() {
            let cell_key = x_key.child(LANE_CELLS).child(ni as u64);
            for j in 0..c.lr_reps {
                let rep_key = cell_key.child(j);
                let mut counts = [0u64; 2];
                for (mi, method) in [Method::Cmc, Method::CrudeMc].into_iter().enumerate() {
                    let cell = deviation_cell(
                        method,
                        &exp.model,
                        x,
                        n,
                        c.kappa,
                        mu_ref,
                        c.outer_reps,
                        &rep_key.child(mi as u64),
                        c.workers,
                    )?;
                    counts[mi] = cell.iter().filter(|(_, d)| *d).count() as u64;
                    for (rep, (estimate, deviated)) in cell.into_iter().enumerate() {
                        long.push(LongRecord {
                            x,
                            n,
                            replicate: j * c.outer_reps + rep as u64,
                            method,
                            estimate,
                            deviated,
                        });
                    }
                }
                observations.push(LrObservation {
                    n,
                    replicate: j,
                    cmc_deviations: counts[0],
                    crude_deviations: counts[1],
                    log_lambda: lr_ratio(counts[0], counts[1], c.outer_reps),
                });
            }
        }
        curves.push(fit_lr_curve(x, mu_ref, observations));
    }
    Ok(ExperimentOutput { curves, long })
}

/// One row of a summary table: grid key, estimated μ, fitted rate.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub key: f64,
    pub mu: f64,
    pub r: Option<f64>,
}

/// The N = 10 Pareto model with shapes equidistant on [1, 3] and unit scale.
pub fn variable_bound_model() -> FactorModel {
    FactorModel::new(
        (0..10)
            .map(|i| FactorDistribution::pareto(1.0 + 2.0 * i as f64 / 9.0, 1.0).unwrap())
            .collect(),
    )
    .expect("valid by construction")
}

/// Default grids of the variable-deviation-bound experiment: x from 100 to
/// 1000 in steps of 100, inner sample sizes geometric from 40 to 2000.
///
/// The conditional estimator's relative spread σ_rel = se·√n is ~0.15 at
/// x = 100 and shrinks with x, so its log deviation probability falls
/// roughly linearly in n with slope −κ²/(2σ_rel²) and hits censoring around
/// n* = (σ_rel/κ)² ∈ [~30, ~900]. The geometric grid keeps several
/// uncensored cells at every x; a grid of much larger n censors the
/// conditional side everywhere (while the crude side stays saturated) and
/// the log-ratio curve carries no slope.
pub fn variable_bound_grids() -> (Vec<f64>, Vec<u64>) {
    (
        (1..=10).map(|i| 100.0 * i as f64).collect(),
        (0..10)
            .map(|k| (40.0 * (2000.0f64 / 40.0).powf(k as f64 / 9.0)).round() as u64)
            .collect(),
    )
}

/// Variable-deviation-bound experiment: per x, the reference μ and the
/// fitted rate r̂.
pub fn run_var_c(config: &ExperimentConfig) -> Result<(Vec<TableRow>, ExperimentOutput)> {
    let (x_grid, n_grid) = variable_bound_grids();
    let exp = DeviationExperiment {
        model: variable_bound_model(),
        x_grid,
        n_grid,
        config: *config,
    };
    let output = run_deviation_experiment(&exp)?;
    let rows = output
        .curves
        .iter()
        .map(|curve| TableRow {
            key: curve.x,
            mu: curve.mu_ref,
            r: estimate_r(curve).ok(),
        })
        .collect();
    Ok((rows, output))
}

/// Which catastrophe-principle sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatastropheMode {
    /// The minimum shape varies: shapes equidistant on [e, e+1].
    VarMin,
    /// The minimum shape is pinned to 1 and the rest shifted to keep the
    /// same mean shape as the matching VarMin model.
    ConstMin,
}

/// Grid of tail-thickness offsets `e` for the catastrophe sweeps: 1.0 to 5.0
/// in steps of 0.4 (one model per reported table row).
pub fn catastrophe_offsets() -> Vec<f64> {
    (0..11).map(|i| 1.0 + 0.4 * i as f64).collect()
}

/// Builds the 10-factor model for offset `e` in the requested mode.
pub fn catastrophe_model(e: f64, mode: CatastropheMode) -> Result<FactorModel> {
    let base: Vec<f64> = (0..10).map(|i| e + i as f64 / 9.0).collect();
    let alphas: Vec<f64> = match mode {
        CatastropheMode::VarMin => base,
        CatastropheMode::ConstMin => {
            // Drop the minimum, append 1, and shift the kept entries so the
            // mean stays e + 1/2.
            let shift = (e - 1.0) / 9.0;
            base[1..]
                .iter()
                .map(|a| a + shift)
                .chain(std::iter::once(1.0))
                .collect()
        }
    };
    FactorModel::new(
        alphas
            .into_iter()
            .map(|a| FactorDistribution::pareto(a, 1.0))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Catastrophe-principle sweep. The table key is the mean shape `ᾱ` in
/// const-min mode and the minimum shape in var-min mode. Rate fitting can be
/// skipped when only the μ column is needed.
pub fn run_catastrophe(
    config: &ExperimentConfig,
    mode: CatastropheMode,
    estimate_rate: bool,
) -> Result<(Vec<TableRow>, Vec<ExperimentOutput>)> {
    let (_, n_grid) = variable_bound_grids();
    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    for (i, e) in catastrophe_offsets().into_iter().enumerate() {
        let model = catastrophe_model(e, mode)?;
        let key = match mode {
            CatastropheMode::VarMin => e,
            CatastropheMode::ConstMin => e + 0.5,
        };
        let mut cfg = *config;
        cfg.seed = StreamKey::new(config.seed).child(i as u64).rng().next_u64();
        if estimate_rate {
            let exp = DeviationExperiment {
                model,
                x_grid: vec![CATASTROPHE_X],
                n_grid: n_grid.clone(),
                config: cfg,
            };
            let output = run_deviation_experiment(&exp)?;
            let curve = &output.curves[0];
            rows.push(TableRow {
                key,
                mu: curve.mu_ref,
                r: estimate_r(curve).ok(),
            });
            outputs.push(output);
        } else {
            let mu = estimate_mu_ref(
                &model,
                CATASTROPHE_X,
                cfg.n_ref,
                &StreamKey::new(cfg.seed),
                cfg.workers,
            )?;
            rows.push(TableRow { key, mu, r: None });
        }
    }
    Ok((rows, outputs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model() -> FactorModel {
        FactorModel::new(vec![
            FactorDistribution::pareto(1.0, 1.0).unwrap(),
            FactorDistribution::pareto(1.0, 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn mu_ref_single_factor_is_exact() {
        let model =
            FactorModel::new(vec![FactorDistribution::pareto(1.0, 1.0).unwrap()]).unwrap();
        let mu =
            estimate_mu_ref(&model, 100.0, 100_000, &StreamKey::new(1), 1).unwrap();
        assert!((mu - 0.01).abs() < 1e-12);
    }

    #[test]
    fn vacuous_band_never_deviates() {
        let model = tiny_model();
        // κ so large that the band covers every possible estimate.
        let (count, frac) = deviation_probability(
            Method::CrudeMc,
            &model,
            10.0,
            100,
            0.999,
            1.0,
            20,
            &StreamKey::new(2),
            1,
        )
        .unwrap();
        assert_eq!((count, frac), (0, 0.0));
    }

    #[test]
    fn zero_band_always_deviates() {
        let model = tiny_model();
        let mu = 0.243944;
        let (count, frac) = deviation_probability(
            Method::Cmc,
            &model,
            10.0,
            100,
            1e-15,
            mu,
            20,
            &StreamKey::new(3),
            1,
        )
        .unwrap();
        assert_eq!((count, frac), (20, 1.0));
    }

    #[test]
    fn crude_mc_lattice_granularity_forces_deviation() {
        // κμ ≈ 6.75e-6 is far below the 1e-4 estimator lattice at n = 1e4,
        // so nearly every crude estimate deviates.
        let model = variable_bound_model();
        let mu = 1.35e-3;
        let (count, _) = deviation_probability(
            Method::CrudeMc,
            &model,
            1000.0,
            10_000,
            5e-3,
            mu,
            40,
            &StreamKey::new(4),
            1,
        )
        .unwrap();
        assert!(count >= 38, "count {count}");
    }

    #[test]
    fn lr_ratio_values() {
        assert_eq!(lr_ratio(5, 5, 50), Some(0.0));
        let v = lr_ratio(1, 10, 20).unwrap();
        assert!((v - (0.1f64).ln()).abs() < 1e-12);
        assert_eq!(lr_ratio(0, 10, 20), None);
        assert_eq!(lr_ratio(10, 0, 20), None);
    }

    #[test]
    fn estimate_r_sign_convention() {
        let obs = |n: u64, rep: u64, ll: f64| LrObservation {
            n,
            replicate: rep,
            cmc_deviations: 1,
            crude_deviations: 1,
            log_lambda: Some(ll),
        };
        // Clean downward trend: r̂ = -β̂1 > 0.
        let observations: Vec<_> = (1..=5u64)
            .flat_map(|i| {
                (0..3u64).map(move |j| obs(1000 * i, j, 0.01 * j as f64 - i as f64))
            })
            .collect();
        let curve = fit_lr_curve(100.0, 1e-2, observations);
        let r = estimate_r(&curve).unwrap();
        assert!((r - 1e-3).abs() / 1e-3 < 0.1, "r {r}");

        // Upward trend errors with diagnostics.
        let observations: Vec<_> = (1..=5u64)
            .flat_map(|i| (0..3u64).map(move |j| obs(1000 * i, j, i as f64 + 0.01 * j as f64)))
            .collect();
        let curve = fit_lr_curve(100.0, 1e-2, observations);
        assert!(matches!(
            estimate_r(&curve),
            Err(Error::NoExponentialGain { .. })
        ));
    }

    #[test]
    fn censored_observations_are_counted_not_dropped() {
        let observations = vec![
            LrObservation {
                n: 1000,
                replicate: 0,
                cmc_deviations: 0,
                crude_deviations: 10,
                log_lambda: None,
            },
            LrObservation {
                n: 2000,
                replicate: 0,
                cmc_deviations: 2,
                crude_deviations: 10,
                log_lambda: Some(-1.6),
            },
        ];
        let curve = fit_lr_curve(100.0, 1e-2, observations);
        assert_eq!(curve.censored_cells, 1);
        assert_eq!(curve.observations.len(), 2);
        assert!(curve.fit.is_none()); // only one uncensored group
    }

    #[test]
    fn catastrophe_models_have_expected_structure() {
        for e in catastrophe_offsets() {
            let var = catastrophe_model(e, CatastropheMode::VarMin).unwrap();
            assert!((var.min_alpha() - e).abs() < 1e-12);
            let cst = catastrophe_model(e, CatastropheMode::ConstMin).unwrap();
            assert!((cst.min_alpha() - 1.0).abs() < 1e-12);
            // Both modes share the mean shape e + 1/2.
            let mean = |m: &FactorModel| {
                m.factors()
                    .iter()
                    .map(|f| f.rv_index().unwrap())
                    .sum::<f64>()
                    / 10.0
            };
            assert!((mean(&var) - (e + 0.5)).abs() < 1e-12);
            assert!((mean(&cst) - (e + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut config = ExperimentConfig::new(1);
        config.n_ref = 100;
        let exp = DeviationExperiment {
            model: tiny_model(),
            x_grid: vec![10.0],
            n_grid: vec![1000],
            config,
        };
        assert!(matches!(exp.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn small_pipeline_runs_and_is_deterministic() {
        let mut config = ExperimentConfig::new(99);
        config.outer_reps = 10;
        config.lr_reps = 2;
        config.n_ref = 20_000;
        let exp = DeviationExperiment {
            model: tiny_model(),
            x_grid: vec![50.0],
            n_grid: vec![500, 1000, 2000],
            config,
        };
        let a = run_deviation_experiment(&exp).unwrap();
        let b = run_deviation_experiment(&exp).unwrap();
        assert_eq!(a.long.len(), b.long.len());
        for (ra, rb) in a.long.iter().zip(&b.long) {
            assert_eq!(ra.estimate.to_bits(), rb.estimate.to_bits());
            assert_eq!(ra.deviated, rb.deviated);
        }
        assert_eq!(a.curves[0].mu_ref.to_bits(), b.curves[0].mu_ref.to_bits());
        // 3 cells x 2 lr reps x 2 methods x 10 outer reps
        assert_eq!(a.long.len(), 3 * 2 * 2 * 10);
    }
}
