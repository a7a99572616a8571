//! Evaluators for the relative entropy rate `H(M|Y)` of the censored product
//! `M = X * Y` and its certified bounds.
//!
//! The central identity: conditioned on `Y`, the product block reveals `X`
//! exactly at the arrival positions of `Y`, so `H(M|Y)` equals
//! `theta * E_{Y_0=1}[ H(X_0 | X at past arrival positions) ]`. Truncating the
//! conditioning to the `m` most recent past arrivals only raises entropy, so
//! every truncation is a certified upper bracket. Markov `X` collapses the
//! conditioning to the nearest arrival and admits exact closed forms.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::entropy::{
    conditional_entropy_on, markov_bridge_entropy, markov_entropy_rate,
    markov_k_step_conditional, shannon, shannon_vec,
};
use crate::error::{Error, Result};
use crate::mc::{chunked_mean, derive_seed, Accumulator};
use crate::models::{MarkovChain, ProcessModel, ZeroOneView};
use crate::returns::{r1_distribution, sample_past_returns, R1Law};

pub const DEFAULT_N_SAMPLES: usize = 100_000;
pub const DEFAULT_M_RETURNS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    ClosedForm,
    MonteCarlo,
    TruncatedBound,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::ClosedForm => "closed-form",
            Method::MonteCarlo => "monte-carlo",
            Method::TruncatedBound => "truncated-bound",
        }
    }
}

/// A numeric result with its certified enclosure; never a bare number.
#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub stderr: Option<f64>,
    pub method: Method,
}

impl EntropyEstimate {
    pub fn new(value: f64, lower: f64, upper: f64, stderr: Option<f64>, method: Method) -> Self {
        debug_assert!(lower <= value + 1e-12 && value <= upper + 1e-12);
        debug_assert_eq!(stderr.is_some(), method == Method::MonteCarlo);
        EntropyEstimate { value, lower, upper, stderr, method }
    }

    pub fn exact(value: f64) -> Self {
        EntropyEstimate::new(value, value, value, None, Method::Exact)
    }

    pub fn closed_form(value: f64) -> Self {
        EntropyEstimate::new(value, value, value, None, Method::ClosedForm)
    }
}

/// Entropy rate `H(X)` when a closed form exists for the model family.
pub fn entropy_rate_closed_form(model: &ProcessModel) -> Option<f64> {
    match model {
        ProcessModel::Iid { dist, .. } => Some(shannon(dist)),
        ProcessModel::Markov(chain) => Some(markov_entropy_rate(chain)),
        ProcessModel::ExchangeableMixture { weights, components, .. } => Some(
            weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * shannon_vec(c))
                .sum(),
        ),
        ProcessModel::PeriodicOrbit { .. } | ProcessModel::ExplicitFiniteSupport { .. } => {
            Some(0.0)
        }
        ProcessModel::FunctionOfMarkov { .. } => model.as_markov().map(|c| markov_entropy_rate(&c)),
    }
}

/// Sandwich bounds `theta*H(X) <= H(M|Y) <= theta*H(X_0)`.
#[derive(Debug, Clone)]
pub struct C4Bounds {
    pub lower: f64,
    pub upper: f64,
    /// False when no closed form for `H(X)` exists and the trivial lower
    /// bound 0 was used instead.
    pub exact: bool,
}

pub fn c4_bounds(x_model: &ProcessModel, theta: f64) -> C4Bounds {
    let upper = theta * shannon(&x_model.single_marginal());
    match entropy_rate_closed_form(x_model) {
        Some(h) => C4Bounds { lower: theta * h, upper, exact: true },
        None => C4Bounds { lower: 0.0, upper, exact: false },
    }
}

/// `H(X_0 | X at the given past positions)`, exact via joint marginals.
/// `past` lists strictly negative indices, nearest first.
fn inner_conditional_entropy(
    x_model: &ProcessModel,
    x_chain: Option<&MarkovChain>,
    past: &[i64],
    budget: usize,
) -> Result<f64> {
    if past.is_empty() {
        return Ok(shannon(&x_model.single_marginal()));
    }
    if let Some(chain) = x_chain {
        // Markov: only the nearest past arrival matters
        return Ok(markov_k_step_conditional(chain, (-past[0]) as u64));
    }
    let mut indices: Vec<i64> = past.to_vec();
    indices.sort_unstable();
    indices.push(0);
    let joint = x_model.marginal(&indices, budget)?;
    let given: Vec<usize> = (0..past.len()).collect();
    conditional_entropy_on(&joint, &given)
}

/// Enumerate the `m` most recent past arrivals for each conditioned phase of a
/// periodic word, with the phase weight.
fn periodic_past_returns(word: &[u16], m: usize) -> Vec<(f64, Vec<i64>)> {
    let p = word.len() as i64;
    let ones: Vec<i64> = (0..p).filter(|&i| word[i as usize] == 1).collect();
    let w = 1.0 / ones.len() as f64;
    ones.iter()
        .map(|&s| {
            let past: Vec<i64> = (1..)
                .filter(|d| word[(s - d).rem_euclid(p) as usize] == 1)
                .take(m)
                .map(|d| -d)
                .collect();
            (w, past)
        })
        .collect()
}

/// `H(M|Y)` via the arrival-position identity, truncated to the `m_returns`
/// most recent past arrivals.
///
/// Exact for i.i.d. `X` (the conditioning is vacuous) and enumerable for
/// periodic `Y`; Monte Carlo over conditioned arrival patterns otherwise, with
/// every inner conditional entropy computed exactly from marginals. The upper
/// bracket is the truncated value itself; the lower bracket is `theta*H(X)`
/// when a closed form exists.
pub fn relative_entropy_rate_a(
    x_model: &ProcessModel,
    y_view: &ZeroOneView,
    m_returns: usize,
    n_samples: usize,
    seed: u64,
    budget: usize,
) -> Result<EntropyEstimate> {
    if m_returns == 0 {
        return Err(Error::InvalidArgument("m_returns must be at least 1".into()));
    }
    let theta = y_view.theta();
    if let ProcessModel::Iid { dist, .. } = x_model {
        return Ok(EntropyEstimate::exact(theta * shannon(dist)));
    }
    let x_chain = x_model.as_markov();
    let rate_lower = entropy_rate_closed_form(x_model).map(|h| theta * h);

    if let ProcessModel::PeriodicOrbit { word, .. } = y_view.model() {
        let mut value = 0.0;
        for (w, past) in periodic_past_returns(word, m_returns) {
            value += w * inner_conditional_entropy(x_model, x_chain.as_ref(), &past, budget)?;
        }
        value *= theta;
        // Markov conditioning collapses to one arrival, so the truncation is
        // already the exact value
        return Ok(if x_chain.is_some() {
            EntropyEstimate::exact(value)
        } else {
            let lower = rate_lower.unwrap_or(0.0).min(value);
            EntropyEstimate::new(value, lower, value, None, Method::TruncatedBound)
        });
    }

    // Monte Carlo over conditioned past-arrival patterns; inner values exact
    // and memoized per pattern
    let cache: Mutex<HashMap<Vec<i64>, f64>> = Mutex::new(HashMap::new());
    let acc: Accumulator = chunked_mean(n_samples, derive_seed(seed, 0x7468_41), |rng| {
        let past = sample_past_returns(y_view, m_returns, rng);
        if let Some(v) = cache.lock().unwrap().get(&past) {
            return *v;
        }
        let v = inner_conditional_entropy(x_model, x_chain.as_ref(), &past, budget)
            .expect("inner marginal within budget");
        cache.lock().unwrap().insert(past, v);
        v
    });
    let value = theta * acc.mean();
    let stderr = theta * acc.stderr();
    let lower = rate_lower.unwrap_or(0.0).min(value);
    Ok(EntropyEstimate::new(
        value,
        lower,
        value.max(lower),
        Some(stderr),
        Method::MonteCarlo,
    ))
}

/// Markov closed form `H(M|Y) = theta * sum_k P(R_1 = k) H(X_k|X_0)`, with the
/// truncation tail pushed into the enclosure via `H(X_k|X_0) <= H(X_0)`.
pub fn markov_product_entropy(chain: &MarkovChain, r1law: &R1Law, theta: f64) -> EntropyEstimate {
    let partial: f64 = r1law
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p > 0.0 {
                p * markov_k_step_conditional(chain, i as u64 + 1)
            } else {
                0.0
            }
        })
        .sum();
    let value = theta * partial;
    let h0 = shannon_vec(&chain.stationary().iter().copied().collect::<Vec<f64>>());
    let upper = value + theta * r1law.tail() * h0;
    match r1law.stderr() {
        Some(se) => {
            // per-bin binomial errors propagate in quadrature
            let var: f64 = se
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let hk = markov_k_step_conditional(chain, i as u64 + 1);
                    (theta * s * hk).powi(2)
                })
                .sum();
            let stderr = var.sqrt();
            EntropyEstimate::new(value, value, upper, Some(stderr), Method::MonteCarlo)
        }
        None if r1law.tail() == 0.0 => EntropyEstimate::closed_form(value),
        None => EntropyEstimate::new(value, value, upper, None, Method::TruncatedBound),
    }
}

/// Exchangeable closed form `H(M|Y) = theta * sum_i w_i H(component_i)`,
/// attaining the sandwich lower bound exactly.
pub fn exchangeable_product_entropy(x_model: &ProcessModel, theta: f64) -> Result<EntropyEstimate> {
    match x_model {
        ProcessModel::ExchangeableMixture { weights, components, .. } => {
            let h: f64 = weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * shannon_vec(c))
                .sum();
            Ok(EntropyEstimate::closed_form(theta * h))
        }
        ProcessModel::Iid { dist, .. } => Ok(EntropyEstimate::closed_form(theta * shannon(dist))),
        _ => Err(Error::InvalidArgument(
            "exchangeable closed form needs an exchangeable mixture".into(),
        )),
    }
}

/// Certified upper bound
/// `H(M|Y) <= h - theta^2 * sum_k P(R_1 = k) * bridge(k)` for Markov `X`.
///
/// Dropping tail terms only weakens the bound, so the value stays certified;
/// the enclosure records how much the truncated tail could tighten it.
pub fn theorem_b_upper_markov(chain: &MarkovChain, r1law: &R1Law, theta: f64) -> EntropyEstimate {
    let h = markov_entropy_rate(chain);
    let mut subtracted = 0.0;
    let mut max_bridge: f64 = 0.0;
    for (i, &p) in r1law.probs().iter().enumerate() {
        let b = markov_bridge_entropy(chain, i as u64 + 1);
        max_bridge = max_bridge.max(b);
        subtracted += p * b;
    }
    let value = h - theta * theta * subtracted;
    let lower = value - theta * theta * r1law.tail() * max_bridge;
    if r1law.tail() == 0.0 && r1law.is_exact() {
        EntropyEstimate::closed_form(value)
    } else {
        EntropyEstimate::new(value, lower, value, None, Method::TruncatedBound)
    }
}

/// Finite-window surrogate of bilateral determinism:
/// `D(k, m) = H(X_{[0,k]} | X_{[-m,-1]}, X_{[k+1,k+m]})`.
#[derive(Debug, Clone)]
pub struct DeterminismProfile {
    pub k_max: usize,
    pub m_max: usize,
    /// `entries[k][m-1] = D(k, m)`.
    pub entries: Vec<Vec<f64>>,
}

impl DeterminismProfile {
    pub fn d(&self, k: usize, m: usize) -> f64 {
        self.entries[k][m - 1]
    }
}

pub fn determinism_profile(
    x_model: &ProcessModel,
    k_max: usize,
    m_max: usize,
    budget: usize,
) -> Result<DeterminismProfile> {
    assert!(m_max >= 1);
    let mut entries = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max as i64 {
        let mut row = Vec::with_capacity(m_max);
        for m in 1..=m_max as i64 {
            let indices: Vec<i64> = (-m..=k + m).collect();
            let joint = x_model.marginal(&indices, budget)?;
            let given: Vec<usize> = (0..indices.len())
                .filter(|&pos| {
                    let i = indices[pos];
                    i < 0 || i > k
                })
                .collect();
            row.push(conditional_entropy_on(&joint, &given)?.max(0.0));
        }
        entries.push(row);
    }
    Ok(DeterminismProfile { k_max, m_max, entries })
}

/// Markov closed form `D(k, m) = (k+2) h - H(X_{k+2} | X_0)`, independent of
/// `m >= 1`.
pub fn markov_determinism(chain: &MarkovChain, k: usize) -> f64 {
    ((k as f64 + 2.0) * markov_entropy_rate(chain) - markov_k_step_conditional(chain, k as u64 + 2))
        .max(0.0)
}

/// Structured verdict for the strict entropy drop `H(M|Y) < H(X)`:
/// both an unbounded return support and a failure of bilateral determinism
/// are needed before a drop can be certified.
#[derive(Debug, Clone)]
pub struct WwwVerdict {
    /// Whether the support of `R_1` is provably infinite (None when unknown).
    pub infinite_return_support: Option<bool>,
    /// Finite-window evidence that `X` is not bilaterally deterministic.
    pub not_bilaterally_deterministic: bool,
    /// Certified `H(M|Y) < H(X)` strictly, via the bridge-term upper bound.
    pub strict_gap_certified: bool,
    /// Certified lower bound on `H(X) - H(M|Y)` when the gap is certified.
    pub gap: Option<f64>,
}

pub fn www_check(x_model: &ProcessModel, y_view: &ZeroOneView, budget: usize) -> Result<WwwVerdict> {
    let infinite_return_support = match y_view.model() {
        ProcessModel::Iid { .. } => Some(true),
        ProcessModel::PeriodicOrbit { .. } | ProcessModel::ExplicitFiniteSupport { .. } => {
            Some(false)
        }
        _ => None,
    };
    let (k_max, m_max) = (4, 3);
    let profile = determinism_profile(x_model, k_max, m_max, budget)?;
    let not_bilaterally_deterministic = profile.d(k_max, m_max) > 1e-9;

    let mut strict_gap_certified = false;
    let mut gap = None;
    if infinite_return_support == Some(true) && not_bilaterally_deterministic {
        if let Some(chain) = x_model.as_markov() {
            let law = r1_distribution(y_view, None, 0, 0)?;
            let ub = theorem_b_upper_markov(&chain, &law, y_view.theta());
            let h = markov_entropy_rate(&chain);
            if ub.value < h - 1e-12 {
                strict_gap_certified = true;
                gap = Some(h - ub.value);
            }
        }
    }
    Ok(WwwVerdict {
        infinite_return_support,
        not_bilaterally_deterministic,
        strict_gap_certified,
        gap,
    })
}

/// Dependence coefficient `beta(n) = sum_x pi(x) TV(P^n(x, .), pi)`.
pub fn markov_beta(chain: &MarkovChain, n: u64) -> f64 {
    assert!(n >= 1);
    let pn = chain.transition_power(n);
    let pi = chain.stationary();
    pi.iter()
        .zip(pn.iter())
        .map(|(&px, row)| {
            px * 0.5
                * row
                    .iter()
                    .zip(pi.iter())
                    .map(|(&a, &b)| (a - b).abs())
                    .sum::<f64>()
        })
        .sum()
}

/// Geometric R1 law of an i.i.d. conditioning process, truncated to tail below
/// [`EXACT_TAIL_TARGET`].
pub fn iid_r1_law(theta: f64) -> Result<R1Law> {
    let view = ZeroOneView::new(ProcessModel::iid_bernoulli(theta)?)?;
    r1_distribution(&view, None, 0, 0)
}
