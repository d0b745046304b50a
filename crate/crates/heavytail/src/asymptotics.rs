//! Closed-form tail asymptotics.
//!
//! The sum tail of independent regularly-varying factors is asymptotically
//! `(Σ c_i) F̄(x)`, the maximum obeys the catastrophe-principle sandwich with
//! constant `(1 − e⁻¹)⁻¹`, and the uniformly weighted aggregate of bounded
//! residual tails vanishes as the portfolio grows.

use crate::dist::FactorModel;
use crate::error::{Error, Result};

/// Slowly-varying function `L(x) = (log x)^p`; `p = 0` gives `L ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowlyVarying {
    pub p: f64,
}

impl SlowlyVarying {
    pub const CONSTANT: SlowlyVarying = SlowlyVarying { p: 0.0 };

    pub fn eval(&self, x: f64) -> f64 {
        if self.p == 0.0 {
            1.0
        } else {
            x.ln().powf(self.p)
        }
    }
}

/// First-order tail-equivalence approximation `Σ_i F̄_i(x)` of `P[S_N > x]`.
///
/// When every factor shares the reference tail index this equals
/// `(Σ c_i) · F̄_ref(x)`; with mixed indices the per-factor sum keeps the
/// subdominant terms that still matter at finite `x`.
pub fn asymptotic_sum_tail(model: &FactorModel, x: f64) -> f64 {
    model.factors().iter().map(|f| f.tail(x)).sum()
}

/// Sandwich for `P[max_i X_i > x]` plus the exact product-form value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTailBounds {
    /// `Σ F̄_i(x)`, the asymptotic lower bound.
    pub lower: f64,
    /// `(1 − e⁻¹)⁻¹ Σ F̄_i(x)`, the asymptotic upper bound.
    pub upper: f64,
    /// `1 − Π (1 − F̄_i(x))`, exact by independence.
    pub exact: f64,
}

pub fn max_tail_bounds(model: &FactorModel, x: f64) -> MaxTailBounds {
    let tail_sum: f64 = model.factors().iter().map(|f| f.tail(x)).sum();
    let exact = 1.0
        - model
            .factors()
            .iter()
            .map(|f| 1.0 - f.tail(x))
            .product::<f64>();
    MaxTailBounds {
        lower: tail_sum,
        upper: tail_sum / (1.0 - (-1.0f64).exp()),
        exact,
    }
}

/// Upper bound `c L(Mx) / (M^{α−1} x^α)` on `P[(1/M) Σ ε_i > x]` for `M`
/// independent residuals with tail coefficients uniformly below `c`.
pub fn residual_aggregate_bound(
    c: f64,
    alpha: f64,
    m: u64,
    x: f64,
    slowly_varying: SlowlyVarying,
) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::PropositionInapplicable(alpha));
    }
    if m == 0 || !(x > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "residual bound needs M >= 1, x > 0, c > 0".into(),
        ));
    }
    let m = m as f64;
    Ok(c * slowly_varying.eval(m * x) / (m.powf(alpha - 1.0) * x.powf(alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FactorDistribution;
    use crate::estimators::{cmc, crude_mc};
    use crate::rng::StreamKey;
    use approx::assert_relative_eq;

    fn two_pareto_sum_tail(x: f64) -> f64 {
        2.0 / x + 2.0 * (x - 1.0).ln() / (x * x)
    }

    fn two_pareto_model() -> FactorModel {
        FactorModel::new(vec![
            FactorDistribution::pareto(1.0, 1.0).unwrap(),
            FactorDistribution::pareto(1.0, 1.0).unwrap(),
        ])
        .unwrap()
    }

    /// N = 10 Pareto factors, shapes equidistant on [1, 3], unit scale.
    pub(crate) fn table1_model() -> FactorModel {
        FactorModel::new(
            (0..10)
                .map(|i| FactorDistribution::pareto(1.0 + 2.0 * i as f64 / 9.0, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn sum_tail_two_pareto() {
        let model = two_pareto_model();
        assert_relative_eq!(asymptotic_sum_tail(&model, 1000.0), 2e-3);
        let exact = two_pareto_sum_tail(1000.0);
        assert_relative_eq!(exact, 2.0138e-3, max_relative = 1e-4);
    }

    #[test]
    fn sum_tail_single_factor_is_exact_tail() {
        let model =
            FactorModel::new(vec![FactorDistribution::pareto(2.0, 1.5).unwrap()]).unwrap();
        assert_relative_eq!(
            asymptotic_sum_tail(&model, 30.0),
            model.factors()[0].tail(30.0)
        );
    }

    #[test]
    fn sum_tail_ten_pareto_near_table_magnitude() {
        let model = table1_model();
        // Σ 1000^{-α_i} ≈ 1.2746e-3, within 10% of the simulated 1.35e-3.
        let approx_mu = asymptotic_sum_tail(&model, 1000.0);
        assert_relative_eq!(approx_mu, 1.2746e-3, max_relative = 1e-4);
        assert!((approx_mu / 1.35e-3 - 1.0).abs() < 0.10);
        // Dropping everything but the heaviest factor loses the subdominant
        // terms, which still carry ~27% of the tail at this x.
        assert!(approx_mu > model.reference().tail(1000.0));
    }

    #[test]
    fn sum_tail_ratio_converges_to_one() {
        let model = two_pareto_model();
        let mut prev_gap = f64::INFINITY;
        for &x in &[1e2, 1e3, 1e4] {
            let gap = (two_pareto_sum_tail(x) / asymptotic_sum_tail(&model, x) - 1.0).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 0.05);
    }

    #[test]
    fn max_bounds_inclusion_exclusion() {
        // Two factors with F̄_i(x) = 0.01 each at x = 100.
        let model = two_pareto_model();
        let b = max_tail_bounds(&model, 100.0);
        assert_relative_eq!(b.exact, 1.0 - 0.99f64 * 0.99, max_relative = 1e-12);
        assert_relative_eq!(b.lower, 0.02);
        assert_relative_eq!(b.upper, 0.02 / (1.0 - (-1.0f64).exp()), max_relative = 1e-12);
        // At moderate x the o(F̄) slack is visible: lower > exact here.
        assert!(b.lower > b.exact);
    }

    #[test]
    fn max_bounds_single_factor_exact() {
        let model =
            FactorModel::new(vec![FactorDistribution::pareto(1.0, 1.0).unwrap()]).unwrap();
        let b = max_tail_bounds(&model, 50.0);
        assert_relative_eq!(b.exact, b.lower);
        assert_relative_eq!(b.exact, 0.02);
    }

    #[test]
    fn max_bounds_tight_far_in_the_tail() {
        let model = table1_model();
        let b = max_tail_bounds(&model, 1e4);
        let ratio = b.exact / b.lower;
        assert!(ratio > 1.0 - 1e-3 && ratio <= 1.0, "{ratio}");
    }

    #[test]
    fn max_bounds_first_order_slack_property() {
        let model = table1_model();
        for &x in &[1e2, 1e3, 1e4] {
            let b = max_tail_bounds(&model, x);
            let eps = b.lower; // Σ F̄_i(x), the first-order slack scale
            assert!(b.exact >= b.lower * (1.0 - eps));
            assert!(b.exact <= b.upper * (1.0 + eps));
        }
    }

    #[test]
    fn catastrophe_ratio_near_one() {
        // P[max > x] / P[sum > x] within [0.9, 1.1] deep in the tail.
        let model = table1_model();
        let x = 1e4;
        let max_exact = max_tail_bounds(&model, x).exact;
        let sum = cmc(&model, x, 200_000, &StreamKey::new(70), 1).unwrap();
        let ratio = max_exact / sum.estimate;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn residual_bound_arithmetic() {
        let b = residual_aggregate_bound(1.0, 2.0, 100, 10.0, SlowlyVarying::CONSTANT).unwrap();
        assert_relative_eq!(b, 1e-4);
        assert!(matches!(
            residual_aggregate_bound(1.0, 0.9, 10, 1.0, SlowlyVarying::CONSTANT),
            Err(Error::PropositionInapplicable(_))
        ));
    }

    #[test]
    fn residual_bound_decreases_in_portfolio_size() {
        let mut prev = f64::INFINITY;
        for m in [10, 100, 1000, 10_000] {
            let b =
                residual_aggregate_bound(2.0, 1.5, m, 5.0, SlowlyVarying { p: 1.0 }).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn residual_bound_dominates_simulation() {
        // 100 iid centered Pareto(2, 1) residuals (shift -2 gives mean zero):
        // P[mean > 10] <= bound.
        let m = 100u64;
        let model = FactorModel::new(
            (0..m)
                .map(|_| FactorDistribution::shifted_pareto(2.0, 1.0, -2.0).unwrap())
                .collect(),
        )
        .unwrap();
        let x = 10.0;
        let est = crude_mc(&model, x * m as f64, 1_000_000, &StreamKey::new(71), 1).unwrap();
        let bound =
            residual_aggregate_bound(1.0, 2.0, m, x, SlowlyVarying::CONSTANT).unwrap();
        assert!(
            est.estimate <= bound + 3.0 * est.standard_error(),
            "{} vs {bound}",
            est.estimate
        );
    }
}
