//! Brute-force ground truth for the censored product `M = X * Y`.
//!
//! `H(M-block | Y-block)` decomposes exactly as the `Y`-average of the entropy
//! of `X` read at the arrival positions of the `Y`-word, which this module
//! enumerates in full. Every closed form elsewhere in the crate is validated
//! against these values at small block lengths. A plug-in empirical estimator
//! from sampled windows closes the loop from the simulation side.

use rayon::prelude::*;
use std::collections::HashMap;

use crate::entropy::{shannon, shannon_vec};
use crate::error::{Error, Result};
use crate::formulas::{EntropyEstimate, Method};
use crate::mc::{derive_seed, seeded_rng};
use crate::models::{ProcessModel, Symbol, ZeroOneView};
use rand::Rng;

pub const DEFAULT_ORACLE_BUDGET: usize = 1 << 24;

/// Exact `H(M_{[0,n)} | Y_{[0,n)})` by full enumeration of `Y`-words.
///
/// Arrival patterns are deduplicated across `Y`-words so each `X`-marginal is
/// computed once; words with no arrivals contribute zero. The budget counts
/// `|X-alphabet|^s` per distinct pattern with `s` arrivals.
pub fn exact_conditional_block_entropy(
    x_model: &ProcessModel,
    y_view: &ZeroOneView,
    n: usize,
    budget: usize,
) -> Result<f64> {
    assert!(n >= 1, "block length must be positive");
    let indices: Vec<i64> = (0..n as i64).collect();
    let y_words = y_view.model().marginal(&indices, budget)?;

    // weight per distinct arrival pattern
    let mut patterns: HashMap<Vec<i64>, f64> = HashMap::new();
    for (word, p) in y_words.iter() {
        let ones: Vec<i64> = (0..n as i64).filter(|&i| word[i as usize] == 1).collect();
        if !ones.is_empty() {
            *patterns.entry(ones).or_insert(0.0) += p;
        }
    }
    let k = x_model.alphabet().len();
    let mut cost: usize = 0;
    for ones in patterns.keys() {
        let terms = k
            .checked_pow(ones.len() as u32)
            .ok_or(Error::BudgetExceeded { needed: usize::MAX, budget })?;
        cost = cost.saturating_add(terms);
    }
    if cost > budget {
        return Err(Error::BudgetExceeded { needed: cost, budget });
    }

    let mut work: Vec<(&Vec<i64>, f64)> = patterns.iter().map(|(o, &w)| (o, w)).collect();
    work.sort_by(|a, b| a.0.cmp(b.0)); // deterministic order for the reduction
    let parts: Vec<Result<f64>> = work
        .par_iter()
        .map(|(ones, w)| Ok(w * shannon(&x_model.marginal(ones, budget)?)))
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Convergence diagnostics for a sequence `H_1, ..., H_N` of conditional block
/// entropies: `H_n / n` (the convergent estimator) and the raw increments
/// `H_n - H_{n-1}` (reported without any monotonicity claim).
#[derive(Debug, Clone)]
pub struct RateEstimates {
    pub per_n: Vec<f64>,
    pub increments: Vec<f64>,
}

pub fn rate_estimates(h_sequence: &[f64]) -> RateEstimates {
    let per_n = h_sequence
        .iter()
        .enumerate()
        .map(|(i, &h)| h / (i + 1) as f64)
        .collect();
    let increments = h_sequence
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    RateEstimates { per_n, increments }
}

/// Plug-in estimate from sampled windows, with undersampling diagnostics.
#[derive(Debug, Clone)]
pub struct PluginEstimate {
    pub estimate: EntropyEstimate,
    /// Conditioning classes (observed Y-blocks) with fewer than 10 hits;
    /// reported, not fatal: the plug-in value is biased low when nonzero.
    pub undersampled_classes: usize,
}

/// Empirical `H(M-block | Y-block)` from sampled `(m_window, y_window)` pairs:
/// plug-in `H(M,Y) - H(Y)` over the first `block_len` coordinates, optional
/// Miller-Madow bias correction, standard error by window bootstrap.
pub fn plugin_estimator(
    samples: &[(Vec<Symbol>, Vec<Symbol>)],
    block_len: usize,
    miller_madow: bool,
    seed: u64,
) -> Result<PluginEstimate> {
    assert!(block_len >= 1);
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if samples.iter().any(|(m, y)| m.len() < block_len || y.len() < block_len) {
        return Err(Error::InvalidArgument("windows shorter than block_len".into()));
    }
    let blocks: Vec<(Vec<Symbol>, Vec<Symbol>)> = samples
        .iter()
        .map(|(m, y)| (m[..block_len].to_vec(), y[..block_len].to_vec()))
        .collect();

    let value = plugin_value(&blocks, miller_madow);

    let mut y_counts: HashMap<&[Symbol], usize> = HashMap::new();
    for (_, y) in &blocks {
        *y_counts.entry(y).or_insert(0) += 1;
    }
    let undersampled_classes = y_counts.values().filter(|&&c| c < 10).count();

    // window bootstrap stderr
    let n_boot = 200;
    let mut rng = seeded_rng(derive_seed(seed, 0x626f_6f74));
    let mut acc = crate::mc::Accumulator::default();
    for _ in 0..n_boot {
        let resample: Vec<(Vec<Symbol>, Vec<Symbol>)> = (0..blocks.len())
            .map(|_| blocks[rng.gen_range(0..blocks.len())].clone())
            .collect();
        acc.push(plugin_value(&resample, miller_madow));
    }
    let n = acc.n as f64;
    // spread of the bootstrap replicates, not the error of their mean
    let stderr = (acc.stderr() * n.sqrt()).max(0.0);

    let estimate = EntropyEstimate::new(
        (value - 4.0 * stderr).max(0.0).min(value),
        (value - 4.0 * stderr).max(0.0).min(value),
        value + 4.0 * stderr,
        Some(stderr),
        Method::MonteCarlo,
    );
    // keep the point value as the reported value
    let estimate = EntropyEstimate { value, ..estimate };
    Ok(PluginEstimate { estimate, undersampled_classes })
}

fn plugin_value(blocks: &[(Vec<Symbol>, Vec<Symbol>)], miller_madow: bool) -> f64 {
    let n = blocks.len() as f64;
    let mut joint: HashMap<&(Vec<Symbol>, Vec<Symbol>), f64> = HashMap::new();
    let mut marg: HashMap<&[Symbol], f64> = HashMap::new();
    for b in blocks {
        *joint.entry(b).or_insert(0.0) += 1.0 / n;
        *marg.entry(&b.1).or_insert(0.0) += 1.0 / n;
    }
    let h_joint = shannon_vec(&joint.values().copied().collect::<Vec<f64>>());
    let h_y = shannon_vec(&marg.values().copied().collect::<Vec<f64>>());
    let mut v = h_joint - h_y;
    if miller_madow {
        let ln2 = std::f64::consts::LN_2;
        v += (joint.len() as f64 - 1.0) / (2.0 * n * ln2)
            - (marg.len() as f64 - 1.0) / (2.0 * n * ln2);
    }
    v.max(0.0)
}

/// Sample `(m_window, y_window)` pairs of the censored product: `M_i` equals
/// `X_i` at arrivals of `Y` and the reserved zero symbol elsewhere.
pub fn sample_product_windows(
    x_model: &ProcessModel,
    y_view: &ZeroOneView,
    window_len: usize,
    n_windows: usize,
    seed: u64,
) -> Vec<(Vec<Symbol>, Vec<Symbol>)> {
    let mut rng = seeded_rng(derive_seed(seed, 0x7077_696e));
    (0..n_windows)
        .map(|_| {
            let x = x_model.sample_window_with(0, window_len, &mut rng);
            let y = y_view.model().sample_window_with(0, window_len, &mut rng);
            let m = x
                .iter()
                .zip(&y)
                .map(|(&xi, &yi)| if yi == 1 { xi } else { 0 })
                .collect();
            (m, y)
        })
        .collect()
}
