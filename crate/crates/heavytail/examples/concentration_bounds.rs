//! Finite-sample deviation bounds for the averaged conditional estimator.
//!
//! All three bounds on P[|Z̄_n − μ| > κμ] are driven by the ratio N^{2α}/n:
//! the CLT band is asymptotic, Markov is crude but assumption-light, and the
//! sub-Gaussian (Hoeffding) bound decays exponentially once n clears
//! N^{2α}/κ². An empirical deviation frequency is printed alongside.
//!
//! Run: `cargo run --release --example concentration_bounds`

use heavytail::bounds::{clt_coverage, markov_deviation_bound, subgaussian_deviation_bound};
use heavytail::efficiency::deviation_cell;
use heavytail::estimators::Method;
use heavytail::{cmc, FactorDistribution, FactorModel, StreamKey};

fn main() -> heavytail::Result<()> {
    let model = FactorModel::new(
        (0..3)
            .map(|_| FactorDistribution::pareto(1.5, 1.0))
            .collect::<Result<_, _>>()?,
    )?;
    let (n_factors, alpha) = (3, 1.5);
    let (x, kappa, reps) = (50.0, 0.01, 400);
    let key = StreamKey::new(5);
    let mu_ref = cmc(&model, x, 2_000_000, &key.child(0), 1)?.estimate;

    println!(
        "{:>8} {:>10} {:>10} {:>12} {:>10}",
        "n", "1-clt", "markov", "subgaussian", "empirical"
    );
    for (i, &n) in [100u64, 250, 630, 1_600, 4_000].iter().enumerate() {
        let cell = deviation_cell(
            Method::Cmc,
            &model,
            x,
            n,
            kappa,
            mu_ref,
            reps,
            &key.child(1 + i as u64),
            1,
        )?;
        let freq = cell.iter().filter(|(_, d)| *d).count() as f64 / reps as f64;
        println!(
            "{n:>8} {:>10.3e} {:>10.3e} {:>12.3e} {:>10.3}",
            1.0 - clt_coverage(n, kappa, n_factors, alpha),
            markov_deviation_bound(n, kappa, n_factors, alpha),
            subgaussian_deviation_bound(n, kappa, n_factors, alpha),
            freq,
        );
    }
    Ok(())
}
