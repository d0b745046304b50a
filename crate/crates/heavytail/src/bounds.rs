//! Concentration bounds on the deviation of the averaged conditional
//! Monte-Carlo estimator from `μ(x)`.
//!
//! All three bounds are controlled by the ratio `N^{2α}/n`, with `α` the tail
//! index of the model's reference (heaviest) factor. Bound values above 1 are
//! vacuous and reported as-is.

use statrs::distribution::{ContinuousCDF, Normal};

/// Which deviation bound a [`BoundReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Clt,
    Markov,
    SubGaussian,
    SubGaussianExact,
}

/// A bound value together with the inputs it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub n: u64,
    pub kappa: f64,
    pub n_factors: u64,
    pub alpha: f64,
}

/// Asymptotic lower bound `2Φ(κ√n / N^α) − 1` on the coverage probability
/// `P[|Z̄_n − μ| ≤ κμ]`.
pub fn clt_coverage(n: u64, kappa: f64, n_factors: u64, alpha: f64) -> f64 {
    let ratio = kappa * (n as f64).sqrt() / (n_factors as f64).powf(alpha);
    2.0 * Normal::standard().cdf(ratio) - 1.0
}

/// Markov deviation bound `N^{2α} / (κ² n)`.
pub fn markov_deviation_bound(n: u64, kappa: f64, n_factors: u64, alpha: f64) -> f64 {
    (n_factors as f64).powf(2.0 * alpha) / (kappa * kappa * n as f64)
}

/// Sub-Gaussian (Hoeffding-type) bound `2 exp(−2nκ² / N^{2α})` in its
/// large-`x` asymptotic form.
pub fn subgaussian_deviation_bound(n: u64, kappa: f64, n_factors: u64, alpha: f64) -> f64 {
    let exponent = -2.0 * n as f64 * kappa * kappa / (n_factors as f64).powf(2.0 * alpha);
    2.0 * exponent.exp()
}

/// Exact-envelope variant `2 exp(−2nκ²μ² / (Σ F̄_i(x/N))²)`, given the target
/// probability `μ` and the deterministic envelope `Σ F̄_i(x/N)`.
pub fn subgaussian_deviation_bound_exact(n: u64, kappa: f64, mu: f64, envelope: f64) -> f64 {
    let exponent = -2.0 * n as f64 * kappa * kappa * mu * mu / (envelope * envelope);
    2.0 * exponent.exp()
}

pub fn report(kind: BoundKind, n: u64, kappa: f64, n_factors: u64, alpha: f64) -> BoundReport {
    let value = match kind {
        BoundKind::Clt => clt_coverage(n, kappa, n_factors, alpha),
        BoundKind::Markov => markov_deviation_bound(n, kappa, n_factors, alpha),
        BoundKind::SubGaussian | BoundKind::SubGaussianExact => {
            subgaussian_deviation_bound(n, kappa, n_factors, alpha)
        }
    };
    BoundReport {
        kind,
        value,
        n,
        kappa,
        n_factors,
        alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clt_quantile_identity() {
        // κ√n / N^α = 1.959964 is the 97.5% normal quantile.
        let n = 10_000u64;
        let kappa = 1.959964 / (n as f64).sqrt();
        assert_relative_eq!(clt_coverage(n, kappa, 1, 1.0), 0.95, epsilon = 1e-6);
    }

    #[test]
    fn clt_limits() {
        assert!(clt_coverage(u64::MAX, 0.01, 10, 2.0) > 1.0 - 1e-12);
        // The worked N=10, α=2 case: n = 1e4 with κ = 1 gives 2Φ(1) − 1.
        assert_relative_eq!(clt_coverage(10_000, 1.0, 10, 2.0), 0.6826895, epsilon = 1e-6);
    }

    #[test]
    fn markov_arithmetic() {
        assert_relative_eq!(markov_deviation_bound(40_000, 0.5, 10, 1.0), 0.01);
        assert!(markov_deviation_bound(u64::MAX, 0.5, 10, 1.0) < 1e-10);
    }

    #[test]
    fn subgaussian_values() {
        // nκ² = N^{2α} gives 2e^{-2}.
        assert_relative_eq!(
            subgaussian_deviation_bound(100, 1.0, 10, 1.0),
            2.0 * (-2.0f64).exp(),
            max_relative = 1e-12
        );
        // κ = 0 is vacuous.
        assert_relative_eq!(subgaussian_deviation_bound(100, 0.0, 10, 1.0), 2.0);
    }

    #[test]
    fn subgaussian_exact_reduces_to_asymptotic_form() {
        // With Σ F̄_i(x/N) = μ N^α the exact variant matches the asymptotic one.
        let (n, kappa, n_factors, alpha) = (5000u64, 0.3, 10u64, 1.5);
        let mu = 1e-4;
        let envelope = mu * (n_factors as f64).powf(alpha);
        assert_relative_eq!(
            subgaussian_deviation_bound_exact(n, kappa, mu, envelope),
            subgaussian_deviation_bound(n, kappa, n_factors, alpha),
            max_relative = 1e-12
        );
    }

    #[test]
    fn bounds_are_monotone() {
        let grid_n = [1_000u64, 5_000, 20_000];
        let grid_kappa = [0.01, 0.05, 0.2];
        let grid_nf = [2u64, 5, 10];
        let grid_alpha = [1.0, 1.5, 2.5];
        let markov =
            |n: u64, k: f64, nf: u64, a: f64| markov_deviation_bound(n, k, nf, a);
        let subg =
            |n: u64, k: f64, nf: u64, a: f64| subgaussian_deviation_bound(n, k, nf, a);
        // Deviation bounds shrink with n and κ, grow with N and α;
        // CLT coverage moves the opposite way, so check 1 − coverage.
        let clt = |n: u64, k: f64, nf: u64, a: f64| 1.0 - clt_coverage(n, k, nf, a);
        for f in [&markov as &dyn Fn(u64, f64, u64, f64) -> f64, &subg, &clt] {
            for w in grid_n.windows(2) {
                assert!(f(w[1], 0.05, 5, 1.5) <= f(w[0], 0.05, 5, 1.5));
            }
            for w in grid_kappa.windows(2) {
                assert!(f(5000, w[1], 5, 1.5) <= f(5000, w[0], 5, 1.5));
            }
            for w in grid_nf.windows(2) {
                assert!(f(5000, 0.05, w[1], 1.5) >= f(5000, 0.05, w[0], 1.5));
            }
            for w in grid_alpha.windows(2) {
                assert!(f(5000, 0.05, 5, w[1]) >= f(5000, 0.05, 5, w[0]));
            }
        }
    }
}
