//! Property-based invariants: marginal coherence, entropy inequalities, and
//! the sandwich/dominance relations on randomized models.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use prodentropy::entropy::{
    conditional_entropy_on, markov_k_step_conditional, shannon,
};
use prodentropy::formulas::{c4_bounds, markov_product_entropy, theorem_b_upper_markov};
use prodentropy::models::{
    Alphabet, MarkovChain, ProcessModel, ZeroOneView, DEFAULT_MARGINAL_BUDGET,
};
use prodentropy::returns::r1_distribution;

/// Random row-stochastic matrix with entries bounded away from zero, so the
/// chain is irreducible and aperiodic and the stationary law is unique.
fn arb_chain(states: usize) -> impl Strategy<Value = MarkovChain> {
    prop::collection::vec(prop::collection::vec(0.05..1.0f64, states), states).prop_map(
        move |raw| {
            let transition: Vec<Vec<f64>> = raw
                .into_iter()
                .map(|row| {
                    let s: f64 = row.iter().sum();
                    row.into_iter().map(|v| v / s).collect()
                })
                .collect();
            MarkovChain::from_transition(Alphabet::integers(states).unwrap(), transition).unwrap()
        },
    )
}

fn arb_y() -> impl Strategy<Value = ZeroOneView> {
    prop_oneof![
        // periodic word of length <= 6 with at least one arrival
        (1u8..64, 1usize..=6).prop_map(|(bits, len)| {
            let word: Vec<u16> = (0..len).map(|i| u16::from(bits >> i & 1 == 1)).collect();
            let word = if word.iter().all(|&b| b == 0) {
                vec![1; 1]
            } else {
                word
            };
            ZeroOneView::new(
                ProcessModel::periodic_orbit(Alphabet::binary(), word).unwrap(),
            )
            .unwrap()
        }),
        (0.1..0.9f64).prop_map(|theta| {
            ZeroOneView::new(ProcessModel::iid_bernoulli(theta).unwrap()).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_are_translation_invariant(chain in arb_chain(2), shift in -8i64..8) {
        let m = ProcessModel::markov(chain);
        let indices = [0i64, 2, 3, 7];
        let shifted: Vec<i64> = indices.iter().map(|i| i + shift).collect();
        let a = m.marginal(&indices, DEFAULT_MARGINAL_BUDGET).unwrap();
        let b = m.marginal(&shifted, DEFAULT_MARGINAL_BUDGET).unwrap();
        prop_assert!(a.total_variation(&b) < 1e-9);
    }

    #[test]
    fn marginals_restrict_consistently(chain in arb_chain(3)) {
        let m = ProcessModel::markov(chain);
        let full = m.marginal(&[0, 1, 3], DEFAULT_MARGINAL_BUDGET).unwrap();
        let direct = m.marginal(&[0, 3], DEFAULT_MARGINAL_BUDGET).unwrap();
        let restricted = full.marginalize(&[0, 2]).unwrap();
        prop_assert!(direct.total_variation(&restricted) < 1e-10);
    }

    #[test]
    fn chain_rule_is_exact(chain in arb_chain(2)) {
        let m = ProcessModel::markov(chain);
        let joint = m.marginal(&[0, 1, 2], DEFAULT_MARGINAL_BUDGET).unwrap();
        let given = joint.marginalize(&[1, 2]).unwrap();
        let h_cond = conditional_entropy_on(&joint, &[1, 2]).unwrap();
        assert_abs_diff_eq!(shannon(&joint), shannon(&given) + h_cond, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_reduces_entropy(chain in arb_chain(2)) {
        let m = ProcessModel::markov(chain);
        let h0 = shannon(&m.single_marginal());
        let joint = m.marginal(&[-3, -1, 0], DEFAULT_MARGINAL_BUDGET).unwrap();
        let h_cond = conditional_entropy_on(&joint, &[0, 1]).unwrap();
        prop_assert!(h_cond <= h0 + 1e-12);
    }

    #[test]
    fn k_step_conditional_is_nondecreasing(chain in arb_chain(3)) {
        let mut prev = 0.0;
        for k in 1..=16 {
            let h = markov_k_step_conditional(&chain, k);
            prop_assert!(h >= prev - 1e-12, "k = {k}: {h} < {prev}");
            prev = h;
        }
    }

    #[test]
    fn sandwich_and_dominance_hold(chain in arb_chain(2), y in arb_y()) {
        let theta = y.theta();
        let law = r1_distribution(&y, None, 0, 0).unwrap();
        let ma = markov_product_entropy(&chain, &law, theta);
        let ub = theorem_b_upper_markov(&chain, &law, theta);
        let c4 = c4_bounds(&ProcessModel::markov(chain), theta);
        prop_assert!(c4.lower - 1e-9 <= ma.upper, "lower {} vs {}", c4.lower, ma.value);
        prop_assert!(ma.value <= c4.upper + 1e-9, "upper {} vs {}", c4.upper, ma.value);
        prop_assert!(ma.value <= ub.value + 1e-9, "bound {} vs {}", ub.value, ma.value);
    }

    #[test]
    fn truncated_r1_law_keeps_mass_accounted(theta in 0.1..0.9f64, k in 1usize..12) {
        let y = ZeroOneView::new(ProcessModel::iid_bernoulli(theta).unwrap()).unwrap();
        let law = r1_distribution(&y, Some(k), 0, 0).unwrap();
        let total: f64 = law.probs().iter().sum::<f64>() + law.tail();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
}
