//! Canonical small models used across tests, demos and the CLI.

use crate::models::{Alphabet, MarkovChain, ProcessModel};

/// Two-state chain staying put with probability `1 - p`.
pub fn two_state_chain(p: f64) -> MarkovChain {
    MarkovChain::from_transition(
        Alphabet::binary(),
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
    )
    .unwrap()
}

/// Sliding pairs of fair hidden bits under a bijective relabeling:
/// `X_i = F(xi_i, xi_{i+1})` with F one-to-one onto four symbols. Each
/// coordinate is uniform over four symbols and coordinates at distance >= 2
/// are independent, yet the process is a Markov chain with entropy rate 1 bit.
pub fn sliding_pair_model() -> ProcessModel {
    let hidden =
        MarkovChain::from_transition(Alphabet::binary(), vec![vec![0.5, 0.5], vec![0.5, 0.5]])
            .unwrap();
    ProcessModel::function_of_markov(hidden, 2, vec![0, 1, 2, 3], Alphabet::integers(4).unwrap())
        .unwrap()
}

/// The deterministic 2-cycle on two states.
pub fn rotation_chain() -> MarkovChain {
    MarkovChain::new(
        Alphabet::binary(),
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![0.5, 0.5],
    )
    .unwrap()
}

/// Cyclic permutation chain on `n` states.
pub fn permutation_chain(n: usize) -> MarkovChain {
    let transition = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    MarkovChain::new(
        Alphabet::integers(n).unwrap(),
        transition,
        vec![1.0 / n as f64; n],
    )
    .unwrap()
}
