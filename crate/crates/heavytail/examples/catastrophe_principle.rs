//! The catastrophe principle: far in the tail, the sum of heavy-tailed
//! factors is large essentially only when its single largest term is.
//!
//! P[max_i X_i > x] is sandwiched between Σ F̄_i(x) and
//! (1 − e⁻¹)⁻¹ Σ F̄_i(x), and the ratio P[max > x] / P[sum > x] approaches
//! one as x grows.
//!
//! Run: `cargo run --release --example catastrophe_principle`

use heavytail::asymptotics::max_tail_bounds;
use heavytail::{cmc, FactorDistribution, FactorModel, StreamKey};

fn main() -> heavytail::Result<()> {
    let model = FactorModel::new(
        (0..10)
            .map(|i| FactorDistribution::pareto(1.0 + 2.0 * i as f64 / 9.0, 1.0))
            .collect::<Result<_, _>>()?,
    )?;
    let key = StreamKey::new(23);

    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>10}",
        "x", "max.lower", "max.exact", "max.upper", "P[sum>x]", "max/sum"
    );
    for (i, &x) in [100.0, 1_000.0, 10_000.0, 100_000.0].iter().enumerate() {
        let b = max_tail_bounds(&model, x);
        let sum = cmc(&model, x, 500_000, &key.child(i as u64), 1)?;
        println!(
            "{x:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.4}",
            b.lower,
            b.exact,
            b.upper,
            sum.estimate,
            b.exact / sum.estimate,
        );
    }
    Ok(())
}
