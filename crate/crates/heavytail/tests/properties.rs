//! Property-based checks of the distribution layer and the conditional
//! estimator's structural guarantees.

use heavytail::estimators::{cmc_envelope, cmc_single};
use heavytail::{FactorDistribution, FactorModel, StreamKey};
use proptest::prelude::*;

fn arb_pareto() -> impl Strategy<Value = FactorDistribution> {
    (0.5f64..4.0, 0.25f64..4.0)
        .prop_map(|(alpha, scale)| FactorDistribution::pareto(alpha, scale).unwrap())
}

fn arb_model() -> impl Strategy<Value = FactorModel> {
    prop::collection::vec(arb_pareto(), 1..6)
        .prop_map(|factors| FactorModel::new(factors).unwrap())
}

proptest! {
    #[test]
    fn tail_is_monotone_and_in_range(d in arb_pareto(), a in 0.0f64..1e6, b in 0.0f64..1e6) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (ta, tb) = (d.tail(lo), d.tail(hi));
        prop_assert!((0.0..=1.0).contains(&ta));
        prop_assert!(tb <= ta);
    }

    #[test]
    fn quantile_inverts_tail(d in arb_pareto(), u in 1e-9f64..0.999_999) {
        let t = d.quantile(u).unwrap();
        // F̄(quantile(u)) = 1 − u, up to the rounding of 1 − u itself.
        prop_assert!((d.tail(t) - (1.0 - u)).abs() <= 1e-9 * (1.0 - u) + 1e-15);
    }

    #[test]
    fn samples_stay_in_support(d in arb_pareto(), seed in any::<u64>()) {
        let mut rng = StreamKey::new(seed).rng();
        for _ in 0..64 {
            prop_assert!(d.sample(&mut rng) >= d.support_lower());
        }
    }

    #[test]
    fn conditional_value_obeys_envelope(
        model in arb_model(),
        x in 1.0f64..1e5,
        seed in any::<u64>(),
    ) {
        // Every realization of Z(x) sits in [0, Σ F̄_i(x/N)]: the deviation
        // bounds lean on this deterministic envelope.
        let mut rng = StreamKey::new(seed).rng();
        let mut draws = Vec::new();
        model.sample_all(&mut rng, &mut draws);
        let z = cmc_single(&model, &draws, x).unwrap();
        let envelope = cmc_envelope(&model, x);
        prop_assert!(z >= 0.0);
        prop_assert!(z <= envelope * (1.0 + 1e-12), "z {z} envelope {envelope}");
    }

    #[test]
    fn conditional_value_decreases_in_x(
        model in arb_model(),
        x in 1.0f64..1e4,
        seed in any::<u64>(),
    ) {
        let mut rng = StreamKey::new(seed).rng();
        let mut draws = Vec::new();
        model.sample_all(&mut rng, &mut draws);
        let near = cmc_single(&model, &draws, x).unwrap();
        let far = cmc_single(&model, &draws, 2.0 * x).unwrap();
        prop_assert!(far <= near * (1.0 + 1e-12));
    }
}
