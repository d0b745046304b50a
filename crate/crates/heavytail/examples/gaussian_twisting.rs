//! Exponentially twisted estimation of Gaussian index-exceedance
//! probabilities.
//!
//! For a Gaussian index ξ ~ N(0, v) the twisted estimator samples from
//! N(λ, v) and reweights by exp(ψ(θ*) − θ*ξ) with θ* = λ/v, so even
//! 1 − Φ(5) ≈ 2.9e-7 is pinned down with a few thousand draws. Crude
//! sampling would need ~10⁹ draws for the same accuracy.
//!
//! Run: `cargo run --release --example gaussian_twisting`

use heavytail::{gaussian_twist, GaussianFactorModel, StreamKey};
use statrs::distribution::{ContinuousCDF, Normal};

fn main() -> heavytail::Result<()> {
    // Index variance from loadings and idiosyncratic noise:
    // v = ‖β‖² + Σσ_i²/M².
    let model = GaussianFactorModel::new(vec![0.6, 0.8], vec![0.0, 0.0])?;
    assert!((model.index_variance() - 1.0).abs() < 1e-12);
    let normal = Normal::standard();
    let key = StreamKey::new(11);

    println!("{:>6} {:>14} {:>14} {:>10}", "λ", "estimate", "1-Φ(λ)", "rel.err");
    for (i, &lambda) in [2.0, 3.0, 4.0, 5.0, 6.0].iter().enumerate() {
        let est = gaussian_twist(&model, lambda, 100_000, &key.child(i as u64), 1)?;
        println!(
            "{lambda:>6} {:>14.6e} {:>14.6e} {:>10.2e}",
            est.estimate,
            normal.sf(lambda),
            est.relative_error(),
        );
    }
    Ok(())
}
