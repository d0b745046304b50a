//! Restricted maximum likelihood for the random-slope model
//! `Y_ij = β0 + β1 X_ij + γ_i X_ij + ε_ij`, with `γ_i ~ N(0, τ²)` and
//! `ε_ij ~ N(0, σ²)`.
//!
//! The fixed effects are profiled out and the scalar ratio `λ = τ²/σ²` is
//! optimized by golden-section search; both variance components then follow
//! in closed form. The group covariance `I + λ x_i x_iᵀ` is rank-one, so all
//! matrix algebra reduces to per-group scalar statistics via
//! Sherman-Morrison.

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
/// Relative tolerance on the optimized ratio τ²/σ².
const RATIO_TOL: f64 = 1e-8;

/// Fitted model with variance components and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemlFit {
    pub beta0: f64,
    pub beta1: f64,
    pub tau2: f64,
    pub sigma2: f64,
    /// Standard error of the slope under the fitted covariance.
    pub beta1_se: f64,
    pub n_obs: usize,
    pub n_groups: usize,
}

/// Per-group sufficient statistics.
#[derive(Debug, Clone, Copy, Default)]
struct GroupStats {
    m: f64,
    sx: f64,
    sxx: f64,
    sy: f64,
    sxy: f64,
    syy: f64,
}

impl GroupStats {
    fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        let mut g = GroupStats::default();
        for &(x, y) in pairs {
            g.m += 1.0;
            g.sx += x;
            g.sxx += x * x;
            g.sy += y;
            g.sxy += x * y;
            g.syy += y * y;
        }
        g
    }
}

/// Profiled quantities at a fixed ratio λ.
struct Profile {
    beta0: f64,
    beta1: f64,
    sigma2: f64,
    /// REML criterion value (up to an additive constant); smaller is better.
    criterion: f64,
    /// (X' W⁻¹ X)⁻¹ slope entry, for the slope standard error.
    slope_precision_inv: f64,
}

fn profile(groups: &[GroupStats], lambda: f64, n_obs: f64) -> Profile {
    // Accumulate A = X'W⁻¹X, b = X'W⁻¹y, c = y'W⁻¹y and log|W|.
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    let (mut b1, mut b2, mut c) = (0.0, 0.0, 0.0);
    let mut log_det_w = 0.0;
    for g in groups {
        let k = lambda / (1.0 + lambda * g.sxx);
        a11 += g.m - k * g.sx * g.sx;
        a12 += g.sx - k * g.sxx * g.sx;
        a22 += g.sxx - k * g.sxx * g.sxx;
        b1 += g.sy - k * g.sx * g.sxy;
        b2 += g.sxy - k * g.sxx * g.sxy;
        c += g.syy - k * g.sxy * g.sxy;
        log_det_w += (1.0 + lambda * g.sxx).ln();
    }
    let det_a = a11 * a22 - a12 * a12;
    // beta = A⁻¹ b
    let beta0 = (a22 * b1 - a12 * b2) / det_a;
    let beta1 = (a11 * b2 - a12 * b1) / det_a;
    let rss = (c - (b1 * beta0 + b2 * beta1)).max(0.0);
    let dof = n_obs - 2.0;
    let sigma2 = rss / dof;
    let criterion = dof * sigma2.max(f64::MIN_POSITIVE).ln() + log_det_w + det_a.ln();
    Profile {
        beta0,
        beta1,
        sigma2,
        criterion,
        slope_precision_inv: a11 / det_a,
    }
}

/// Fits the random-slope model by REML.
///
/// `groups` holds the (X, Y) pairs per group. Needs at least two groups and
/// a non-degenerate X design; with no replicated group the random slope is
/// unidentifiable and the fit degenerates to ordinary least squares (τ² = 0).
pub fn reml_fit(groups: &[Vec<(f64, f64)>]) -> Result<RemlFit> {
    if groups.len() < 2 {
        return Err(Error::DegenerateDesign(
            "need at least two groups".into(),
        ));
    }
    let n_obs: usize = groups.iter().map(Vec::len).sum();
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::DegenerateDesign("empty group".into()));
    }
    let stats: Vec<GroupStats> = groups.iter().map(|g| GroupStats::from_pairs(g)).collect();
    let n = n_obs as f64;
    let sx: f64 = stats.iter().map(|g| g.sx).sum();
    let sxx: f64 = stats.iter().map(|g| g.sxx).sum();
    let x_var = sxx / n - (sx / n) * (sx / n);
    if !(x_var > 1e-12 * (1.0 + sxx / n)) {
        return Err(Error::DegenerateDesign(
            "all X values are (numerically) equal".into(),
        ));
    }

    let replicated = groups.iter().any(|g| g.len() >= 2);
    let lambda_hat = if replicated {
        optimize_ratio(&stats, n)
    } else {
        0.0
    };

    let p = profile(&stats, lambda_hat, n);
    Ok(RemlFit {
        beta0: p.beta0,
        beta1: p.beta1,
        tau2: lambda_hat * p.sigma2,
        sigma2: p.sigma2,
        beta1_se: (p.sigma2 * p.slope_precision_inv).sqrt(),
        n_obs,
        n_groups: groups.len(),
    })
}

/// Golden-section search for λ = τ²/σ² on a log grid, compared against the
/// λ = 0 boundary.
fn optimize_ratio(stats: &[GroupStats], n_obs: f64) -> f64 {
    let max_sxx = stats.iter().map(|g| g.sxx).fold(0.0f64, f64::max).max(1e-300);
    // λ·sxx spans [1e-12, 1e10] over the bracket.
    let mut lo = (1e-12 / max_sxx).ln();
    let mut hi = (1e10 / max_sxx).ln();
    let eval = |u: f64| profile(stats, u.exp(), n_obs).criterion;
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while hi - lo > RATIO_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = eval(x2);
        }
    }
    let lambda = (0.5 * (lo + hi)).exp();
    let at_zero = profile(stats, 0.0, n_obs).criterion;
    let at_lambda = profile(stats, lambda, n_obs).criterion;
    if at_zero <= at_lambda {
        0.0
    } else {
        lambda
    }
}

/// Ordinary least squares on the pooled pairs; the τ² = 0 special case.
pub fn ols_fit(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Err(Error::DegenerateDesign("need at least two points".into()));
    }
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 * (1.0 + sxx) {
        return Err(Error::DegenerateDesign("all X values equal".into()));
    }
    let beta1 = (n * sxy - sx * sy) / det;
    let beta0 = (sy - beta1 * sx) / n;
    Ok((beta0, beta1))
}
