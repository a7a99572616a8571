//! Exact Shannon and conditional entropy on finite distributions, plus Markov
//! closed forms. All entropies are in bits (base 2); `0 log 0 = 0`.

use crate::error::Result;
use crate::models::{Distribution, MarkovChain, ProcessModel};

pub const LN2: f64 = std::f64::consts::LN_2;

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// `H(dist) = -sum p log2 p`.
pub fn shannon(dist: &Distribution) -> f64 {
    dist.probs().iter().copied().map(plogp).sum()
}

/// Entropy of a probability vector (support implied dense).
pub fn shannon_vec(probs: &[f64]) -> f64 {
    probs.iter().copied().map(plogp).sum()
}

/// `H(A | B)` from a joint law, where `target` and `given` partition the
/// coordinate positions of `joint`. Equals `H(A,B) - H(B)`; terms with
/// `P(b) = 0` never appear since distributions carry no zero-mass atoms.
pub fn conditional_entropy_on(joint: &Distribution, given: &[usize]) -> Result<f64> {
    let b = joint.marginalize(given)?;
    Ok(shannon(joint) - shannon(&b))
}

/// `H(A | B)` for a joint law over pairs: coordinate 0 is A, the rest is B.
pub fn conditional_entropy(joint: &Distribution) -> Result<f64> {
    let given: Vec<usize> = (1..joint.arity()).collect();
    conditional_entropy_on(joint, &given)
}

/// `H(X_k | X_0) = sum_x pi(x) H(row x of P^k)`; by stationarity this also
/// equals `H(X_0 | X_{-k})`.
pub fn markov_k_step_conditional(chain: &MarkovChain, k: u64) -> f64 {
    assert!(k >= 1, "k must be positive");
    let pk = chain.transition_power(k);
    chain
        .stationary()
        .iter()
        .zip(pk.iter())
        .map(|(&pi, row)| pi * shannon_vec(row))
        .sum()
}

/// Entropy rate `h = H(X_1 | X_0)` of a stationary Markov chain.
pub fn markov_entropy_rate(chain: &MarkovChain) -> f64 {
    markov_k_step_conditional(chain, 1)
}

/// Bridge entropy `H(X_{[1,k-1]} | X_0, X_k) = k h - H(X_k | X_0)`.
///
/// The interior is empty for `k = 1`, so the value is 0 there; it is
/// nonnegative for every k.
pub fn markov_bridge_entropy(chain: &MarkovChain, k: u64) -> f64 {
    assert!(k >= 1, "k must be positive");
    let v = k as f64 * markov_entropy_rate(chain) - markov_k_step_conditional(chain, k);
    v.max(0.0)
}

/// Block entropy `H(X_{[0, n-1]})`.
pub fn block_entropy(model: &ProcessModel, n: usize, budget: usize) -> Result<f64> {
    assert!(n >= 1, "n must be positive");
    let indices: Vec<i64> = (0..n as i64).collect();
    let d = model.marginal(&indices, budget)?;
    Ok(shannon(&d))
}
