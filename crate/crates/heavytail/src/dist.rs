//! Heavy-tailed and Gaussian factor distributions.
//!
//! A factor is a one-dimensional distribution with an exact tail function
//! `F̄(t) = P[X > t]`, an inverse-CDF sampler, and (for the regularly-varying
//! kinds) tail metadata: the index `α` and the slowly-varying family of
//! `F̄(x) ~ L(x) x^{-α}`. Pareto-type kinds have `L` constant; the log-Pareto
//! kind has `L(x) = (log x)^p`.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Relative tolerance for the bracketed quantile root-find (log-Pareto kind).
const QUANTILE_TOL: f64 = 1e-12;

/// One-dimensional factor distribution with exact tail function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorDistribution {
    /// `F̄(t) = (x_m / t)^α` for `t > x_m`, 1 below the support.
    Pareto {
        alpha: f64,
        scale: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: f64,
    },
    /// Location-shifted Pareto; supports negative values when `shift < 0`.
    ShiftedPareto { alpha: f64, scale: f64, shift: f64 },
    /// `F̄(t) = (log t)^p · t^{-α}` for `t > threshold`, with an atom at the
    /// threshold carrying the remaining mass.
    LogPareto { alpha: f64, p: f64, threshold: f64 },
    /// Centered normal with standard deviation `sigma`.
    Gaussian { sigma: f64 },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl FactorDistribution {
    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        require_positive(alpha, "pareto alpha")?;
        require_positive(scale, "pareto scale")?;
        Ok(Self::Pareto {
            alpha,
            scale,
            shift: 0.0,
        })
    }

    pub fn shifted_pareto(alpha: f64, scale: f64, shift: f64) -> Result<Self> {
        require_positive(alpha, "pareto alpha")?;
        require_positive(scale, "pareto scale")?;
        if !shift.is_finite() {
            return Err(Error::InvalidParameter("shift must be finite".into()));
        }
        Ok(Self::ShiftedPareto {
            alpha,
            scale,
            shift,
        })
    }

    pub fn log_pareto(alpha: f64, p: f64, threshold: f64) -> Result<Self> {
        require_positive(alpha, "log-pareto alpha")?;
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(
                "log-pareto exponent p must be non-negative".into(),
            ));
        }
        // Tail monotonicity needs (log t)^p t^{-α} decreasing on the support,
        // i.e. threshold >= exp(p/α), and log(threshold) > 0.
        let min_threshold = (p / alpha).exp().max(1.0);
        if !(threshold >= min_threshold) || threshold <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "log-pareto threshold must be > 1 and >= exp(p/alpha) = {min_threshold}"
            )));
        }
        Ok(Self::LogPareto {
            alpha,
            p,
            threshold,
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        require_positive(sigma, "gaussian sigma")?;
        Ok(Self::Gaussian { sigma })
    }

    /// Checks the parameter constraints; used after deserializing a model file.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Pareto {
                alpha,
                scale,
                shift,
            }
            | Self::ShiftedPareto {
                alpha,
                scale,
                shift,
            } => {
                Self::shifted_pareto(alpha, scale, shift)?;
            }
            Self::LogPareto {
                alpha,
                p,
                threshold,
            } => {
                Self::log_pareto(alpha, p, threshold)?;
            }
            Self::Gaussian { sigma } => {
                Self::gaussian(sigma)?;
            }
        }
        Ok(())
    }

    /// Exact tail function `F̄(t) = P[X > t]`, defined on all of `ℝ`.
    pub fn tail(&self, t: f64) -> f64 {
        match *self {
            Self::Pareto {
                alpha,
                scale,
                shift,
            }
            | Self::ShiftedPareto {
                alpha,
                scale,
                shift,
            } => {
                let t = t - shift;
                if t <= scale {
                    1.0
                } else {
                    (scale / t).powf(alpha)
                }
            }
            Self::LogPareto {
                alpha,
                p,
                threshold,
            } => {
                if t <= threshold {
                    1.0
                } else {
                    t.ln().powf(p) * t.powf(-alpha)
                }
            }
            Self::Gaussian { sigma } => {
                let z = t / sigma;
                // sf(z) in terms of the standard normal CDF
                Normal::standard().sf(z)
            }
        }
    }

    /// Inverse CDF: the `t` with `P[X <= t] = u`, for `u` in the open unit
    /// interval.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let target_tail = 1.0 - u;
        Ok(match *self {
            Self::Pareto {
                alpha,
                scale,
                shift,
            }
            | Self::ShiftedPareto {
                alpha,
                scale,
                shift,
            } => shift + scale * target_tail.powf(-1.0 / alpha),
            Self::LogPareto { threshold, .. } => {
                if target_tail >= self.tail_strictly_above_threshold(threshold) {
                    // Atom at the threshold absorbs the low quantiles.
                    threshold
                } else {
                    self.invert_tail_bracketed(target_tail, threshold)
                }
            }
            Self::Gaussian { sigma } => Normal::standard().inverse_cdf(u) * sigma,
        })
    }

    /// Tail value approached from above the support threshold (no clamp to 1).
    fn tail_strictly_above_threshold(&self, t: f64) -> f64 {
        match *self {
            Self::LogPareto { alpha, p, .. } => t.ln().powf(p) * t.powf(-alpha),
            _ => self.tail(t),
        }
    }

    /// Bisection on `log t` for tail(t) = target, to 1e-12 relative tolerance.
    fn invert_tail_bracketed(&self, target_tail: f64, lo: f64) -> f64 {
        let mut log_lo = lo.ln();
        let mut log_hi = log_lo;
        // Grow the bracket geometrically until the tail falls below target.
        loop {
            log_hi += 1.0;
            if self.tail(log_hi.exp()) < target_tail {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (log_lo + log_hi);
            if self.tail(mid.exp()) > target_tail {
                log_lo = mid;
            } else {
                log_hi = mid;
            }
            if (log_hi - log_lo) <= QUANTILE_TOL {
                break;
            }
        }
        (0.5 * (log_lo + log_hi)).exp()
    }

    /// Draws one variate: inverse-CDF on an open uniform for the Pareto-type
    /// kinds, standard normal transform for the Gaussian kind.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                z * sigma
            }
            _ => {
                let u: f64 = rng.sample(Open01);
                // u in (0,1), so the quantile is finite.
                self.quantile(u).expect("open uniform is inside (0,1)")
            }
        }
    }

    /// Probability density, where a closed form exists on the whole support.
    ///
    /// Returns `None` for the log-Pareto kind: its atom at the threshold has
    /// no density, which rules it out as an importance-sampling target or
    /// proposal.
    pub fn density(&self, t: f64) -> Option<f64> {
        match *self {
            Self::Pareto {
                alpha,
                scale,
                shift,
            }
            | Self::ShiftedPareto {
                alpha,
                scale,
                shift,
            } => {
                let t = t - shift;
                Some(if t <= scale {
                    0.0
                } else {
                    alpha * scale.powf(alpha) / t.powf(alpha + 1.0)
                })
            }
            Self::LogPareto { .. } => None,
            Self::Gaussian { sigma } => {
                let z = t / sigma;
                Some((-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
            }
        }
    }

    /// Whether [`Self::density`] returns a closed form for this kind.
    pub fn has_density(&self) -> bool {
        !matches!(self, Self::LogPareto { .. })
    }

    /// Infimum of the support.
    pub fn support_lower(&self) -> f64 {
        match *self {
            Self::Pareto { scale, shift, .. } | Self::ShiftedPareto { scale, shift, .. } => {
                scale + shift
            }
            Self::LogPareto { threshold, .. } => threshold,
            Self::Gaussian { .. } => f64::NEG_INFINITY,
        }
    }

    /// Regular-variation tail index `α`, if the kind has one.
    pub fn rv_index(&self) -> Option<f64> {
        match *self {
            Self::Pareto { alpha, .. }
            | Self::ShiftedPareto { alpha, .. }
            | Self::LogPareto { alpha, .. } => Some(alpha),
            Self::Gaussian { .. } => None,
        }
    }

    /// Slowly-varying family: exponent `p` of `L(x) = (log x)^p` together
    /// with the constant prefactor entering `F̄(x) ~ s^α L(x) x^{-α}`.
    fn slowly_varying_signature(&self) -> Option<(f64, f64)> {
        match *self {
            // Shift does not change the leading tail constant.
            Self::Pareto { scale, .. } | Self::ShiftedPareto { scale, .. } => Some((0.0, scale)),
            Self::LogPareto { p, .. } => Some((p, 1.0)),
            Self::Gaussian { .. } => None,
        }
    }

    /// Limit of `F̄_self(x) / F̄_reference(x)` as `x → ∞`, computed
    /// analytically from tail metadata.
    pub fn tail_coefficient(&self, reference: &FactorDistribution) -> Result<f64> {
        let alpha = self
            .rv_index()
            .ok_or(Error::GaussianFactorUnsupported)?;
        let alpha_ref = reference
            .rv_index()
            .ok_or(Error::GaussianFactorUnsupported)?;
        if alpha > alpha_ref {
            return Ok(0.0);
        }
        if alpha < alpha_ref {
            return Err(Error::ReferenceNotHeaviest {
                factor_alpha: alpha,
                reference_alpha: alpha_ref,
            });
        }
        let (p, s) = self.slowly_varying_signature().expect("rv kind");
        let (p_ref, s_ref) = reference.slowly_varying_signature().expect("rv kind");
        if p != p_ref {
            return Err(Error::IncompatibleTailFamilies);
        }
        Ok((s / s_ref).powf(alpha))
    }
}

fn require_positive(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

/// Ordered collection of independent factors with a designated reference
/// tail `F` and tail coefficients `c_i` such that `F̄_i(x) ~ c_i F̄(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    factors: Vec<FactorDistribution>,
    reference: FactorDistribution,
    coefficients: Vec<f64>,
}

impl FactorModel {
    /// Builds a model using the heaviest factor (smallest `α`) as reference.
    ///
    /// Factors with a strictly lighter tail than the reference, including
    /// Gaussian factors, get coefficient zero.
    pub fn new(factors: Vec<FactorDistribution>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter(
                "a factor model needs at least one factor".into(),
            ));
        }
        let reference = factors
            .iter()
            .filter(|f| f.rv_index().is_some())
            .min_by(|a, b| {
                a.rv_index()
                    .partial_cmp(&b.rv_index())
                    .expect("finite indices")
            })
            .cloned()
            .ok_or(Error::NoRegularlyVaryingFactor)?;
        Self::with_reference(factors, reference)
    }

    /// Builds a model against an explicit reference tail.
    pub fn with_reference(
        factors: Vec<FactorDistribution>,
        reference: FactorDistribution,
    ) -> Result<Self> {
        for f in &factors {
            f.validate()?;
        }
        reference.validate()?;
        if reference.rv_index().is_none() {
            return Err(Error::NoRegularlyVaryingFactor);
        }
        let coefficients = factors
            .iter()
            .map(|f| {
                if f.rv_index().is_none() {
                    // Gaussian tails vanish relative to any RV reference.
                    Ok(0.0)
                } else {
                    f.tail_coefficient(&reference)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if coefficients.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "all tail coefficients are zero; reference tail does not support the model".into(),
            ));
        }
        Ok(Self {
            factors,
            reference,
            coefficients,
        })
    }

    pub fn factors(&self) -> &[FactorDistribution] {
        &self.factors
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn reference(&self) -> &FactorDistribution {
        &self.reference
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Tail index of the reference, i.e. `min α_i` over the RV factors.
    pub fn min_alpha(&self) -> f64 {
        self.reference.rv_index().expect("reference is RV")
    }

    pub fn has_gaussian_factor(&self) -> bool {
        self.factors
            .iter()
            .any(|f| matches!(f, FactorDistribution::Gaussian { .. }))
    }

    /// Samples one draw per factor into `out`.
    pub fn sample_all<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.factors.iter().map(|f| f.sample(rng)));
    }
}
