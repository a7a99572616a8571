//! Stationary process models with exact sparse-index marginals and seeded sampling.
//!
//! Every model is immutable after construction; sampling takes the seed as an
//! argument and holds no mutable state, so models are safe to share across
//! threads.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mc::seeded_rng;

pub const PROB_TOL: f64 = 1e-12;
pub const STATIONARY_TOL: f64 = 1e-10;

/// Default budget for marginal enumeration (intermediate states / terms).
pub const DEFAULT_MARGINAL_BUDGET: usize = 1 << 20;

pub type Symbol = u16;

/// Ordered finite set of symbol labels, at most 64 of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidModel("alphabet must be nonempty".into()));
        }
        if symbols.len() > 64 {
            return Err(Error::InvalidModel("alphabet size must be <= 64".into()));
        }
        let mut seen = symbols.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != symbols.len() {
            return Err(Error::InvalidModel("alphabet symbols must be distinct".into()));
        }
        Ok(Alphabet { symbols })
    }

    /// Alphabet `0, 1, ..., n-1`.
    pub fn integers(n: usize) -> Result<Self> {
        Alphabet::new((0..n).map(|i| i.to_string()).collect())
    }

    /// The `{0, 1}` alphabet.
    pub fn binary() -> Self {
        Alphabet::integers(2).unwrap()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, s: Symbol) -> &str {
        &self.symbols[s as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<Symbol> {
        self.symbols.iter().position(|s| s == label).map(|i| i as Symbol)
    }

    pub fn is_binary(&self) -> bool {
        self.symbols == ["0", "1"]
    }
}

/// Probability vector over a finite support of symbol tuples.
///
/// Support entries are distinct, of equal arity, and kept sorted so that two
/// equal distributions compare equal entry by entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    arity: usize,
    support: Vec<Vec<Symbol>>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(support: Vec<Vec<Symbol>>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(
                "support and probs must have equal length".into(),
            ));
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("support must be nonempty".into()));
        }
        let arity = support[0].len();
        if support.iter().any(|t| t.len() != arity) {
            return Err(Error::InvalidDistribution("support tuples must have equal arity".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution("probabilities must be nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        let mut pairs: Vec<(Vec<Symbol>, f64)> = support.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution("support entries must be distinct".into()));
            }
        }
        let (support, probs) = pairs.into_iter().unzip();
        Ok(Distribution { arity, support, probs })
    }

    /// Build from a map of tuple -> probability, dropping zero-mass entries.
    pub fn from_weights(weights: HashMap<Vec<Symbol>, f64>) -> Result<Self> {
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (t, p) in weights {
            if p > 0.0 {
                support.push(t);
                probs.push(p);
            }
        }
        Distribution::new(support, probs)
    }

    /// Single-coordinate distribution from a dense probability vector.
    pub fn from_dense(probs: &[f64]) -> Result<Self> {
        Distribution::new(
            (0..probs.len()).map(|i| vec![i as Symbol]).collect(),
            probs.to_vec(),
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn support(&self) -> &[Vec<Symbol>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Symbol], f64)> {
        self.support.iter().map(|t| t.as_slice()).zip(self.probs.iter().copied())
    }

    pub fn prob_of(&self, tuple: &[Symbol]) -> f64 {
        match self.support.binary_search_by(|t| t.as_slice().cmp(tuple)) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// Sum the law onto the given coordinate positions.
    pub fn marginalize(&self, coords: &[usize]) -> Result<Distribution> {
        if coords.iter().any(|&c| c >= self.arity) {
            return Err(Error::InvalidArgument("marginalize coordinate out of range".into()));
        }
        let mut weights: HashMap<Vec<Symbol>, f64> = HashMap::new();
        for (t, p) in self.iter() {
            let key: Vec<Symbol> = coords.iter().map(|&c| t[c]).collect();
            *weights.entry(key).or_insert(0.0) += p;
        }
        Distribution::from_weights(weights)
    }

    /// Sample a support entry.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> &[Symbol] {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (t, p) in self.iter() {
            acc += p;
            if u < acc {
                return t;
            }
        }
        self.support.last().unwrap()
    }

    /// Total variation distance to another distribution over the same tuples.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        let mut keys: Vec<&Vec<Symbol>> = self.support.iter().chain(other.support.iter()).collect();
        keys.sort();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|k| (self.prob_of(k) - other.prob_of(k)).abs())
            .sum::<f64>()
    }
}

/// Stationary Markov chain: row-stochastic transition matrix plus a
/// stationary law satisfying pi P = pi.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    alphabet: Alphabet,
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

impl MarkovChain {
    pub fn new(alphabet: Alphabet, transition: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        let n = alphabet.len();
        if transition.len() != n || transition.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel("transition matrix must be square over the alphabet".into()));
        }
        for row in &transition {
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::InvalidModel("transition entries must be nonnegative".into()));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidModel(format!("transition row sums to {s}, not 1")));
            }
        }
        if stationary.len() != n {
            return Err(Error::InvalidModel("stationary vector has wrong length".into()));
        }
        let ssum: f64 = stationary.iter().sum();
        if (ssum - 1.0).abs() > PROB_TOL || stationary.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidModel("stationary vector is not a probability vector".into()));
        }
        let drift: f64 = (0..n)
            .map(|j| {
                let pj: f64 = (0..n).map(|i| stationary[i] * transition[i][j]).sum();
                (pj - stationary[j]).abs()
            })
            .sum();
        if drift > STATIONARY_TOL {
            return Err(Error::InvalidModel(format!(
                "stationary vector violates pi P = pi (l1 drift {drift:.3e})"
            )));
        }
        Ok(MarkovChain { alphabet, transition, stationary })
    }

    /// Construct with the stationary law solved from the transition matrix.
    pub fn from_transition(alphabet: Alphabet, transition: Vec<Vec<f64>>) -> Result<Self> {
        let pi = stationary_dist(&transition)?;
        MarkovChain::new(alphabet, transition, pi)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.alphabet.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `P^k` by repeated squaring, renormalizing rows after every multiply to
    /// guard against drift for k up to 2^10.
    pub fn transition_power(&self, k: u64) -> Vec<Vec<f64>> {
        let n = self.n_states();
        let mut result = identity(n);
        let mut base = self.transition.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = mat_mul_renorm(&result, &base);
            }
            k >>= 1;
            if k > 0 {
                base = mat_mul_renorm(&base, &base);
            }
        }
        result
    }

    /// True when the chain has a single closed communicating class covering
    /// all positive-probability states.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n_states();
        let live: Vec<usize> = (0..n).filter(|&i| self.stationary[i] > 0.0).collect();
        if live.is_empty() {
            return false;
        }
        // reachability from live[0] restricted to live states
        let reachable = |from: usize| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack = vec![from];
            seen[from] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if self.transition[i][j] > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen
        };
        live.iter().all(|&i| {
            let r = reachable(i);
            live.iter().all(|&j| r[j])
        })
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn mat_mul_renorm(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
        let s: f64 = out[i].iter().sum();
        if s > 0.0 {
            for v in out[i].iter_mut() {
                *v /= s;
            }
        }
    }
    out
}

/// Solve `pi P = pi` for the unique stationary law of a row-stochastic matrix.
///
/// Fails with `NonUniqueStationary` when the eigenspace is multidimensional
/// (reducible chain) -- callers must then supply pi explicitly.
pub fn stationary_dist(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = transition.len();
    if n == 0 || transition.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidModel("transition matrix must be square".into()));
    }
    for row in transition {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > PROB_TOL || row.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidModel("transition rows must be probability vectors".into()));
        }
    }
    // Null space of A = (P - I)^T via Gaussian elimination.
    let mut a = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[j][i] = transition[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let eps = 1e-10;
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        // partial pivoting
        let (best, best_val) = (row..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap_or((row, 0.0));
        if best_val < eps {
            continue;
        }
        a.swap(row, best);
        let p = a[row][col];
        for j in 0..n {
            a[row][j] /= p;
        }
        for r in 0..n {
            if r != row && a[r][col].abs() > 0.0 {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[row][j];
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == n {
            break;
        }
    }
    if pivot_cols.len() < n - 1 {
        return Err(Error::NonUniqueStationary);
    }
    // rank is at most n-1 for a stochastic matrix; the single free column
    // parametrizes the eigenvector
    let free_col = (0..n).find(|c| !pivot_cols.contains(c)).ok_or(Error::NonUniqueStationary)?;
    let mut pi = vec![0.0f64; n];
    pi[free_col] = 1.0;
    for (r, &pc) in pivot_cols.iter().enumerate() {
        pi[pc] = -a[r][free_col];
    }
    let s: f64 = pi.iter().sum();
    if s.abs() < eps {
        return Err(Error::NonUniqueStationary);
    }
    for v in pi.iter_mut() {
        *v /= s;
        if *v < 0.0 && *v > -1e-9 {
            *v = 0.0;
        }
    }
    if pi.iter().any(|&p| p < 0.0) {
        return Err(Error::NonUniqueStationary);
    }
    let s: f64 = pi.iter().sum();
    for v in pi.iter_mut() {
        *v /= s;
    }
    Ok(pi)
}

/// A finitely-valued stationary process with exact finite-dimensional
/// marginals and a seeded sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessModel {
    /// Independent identically distributed coordinates.
    Iid { alphabet: Alphabet, dist: Distribution },
    /// Stationary Markov chain.
    Markov(MarkovChain),
    /// Sliding-window relabeling of a hidden Markov chain:
    /// `X_i = relabel(xi_i, ..., xi_{i+w-1})`.
    FunctionOfMarkov {
        base: MarkovChain,
        window: usize,
        /// Dense map from hidden w-tuples (base-|hidden| encoded) to output symbols.
        relabel: Vec<Symbol>,
        alphabet: Alphabet,
    },
    /// de Finetti mixture: draw a component, then run it i.i.d.
    ExchangeableMixture {
        alphabet: Alphabet,
        weights: Vec<f64>,
        components: Vec<Vec<f64>>,
    },
    /// Uniform law on the distinct cyclic shifts of a finite word.
    PeriodicOrbit { alphabet: Alphabet, word: Vec<Symbol> },
    /// Law over length-L words extended periodically with a uniform phase
    /// (testing convenience).
    ExplicitFiniteSupport { alphabet: Alphabet, words: Distribution },
}

impl ProcessModel {
    pub fn iid(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::InvalidModel("probability vector length mismatch".into()));
        }
        let dist = Distribution::from_dense(&probs)?;
        Ok(ProcessModel::Iid { alphabet, dist })
    }

    pub fn iid_bernoulli(theta: f64) -> Result<Self> {
        ProcessModel::iid(Alphabet::binary(), vec![1.0 - theta, theta])
    }

    pub fn markov(chain: MarkovChain) -> Self {
        ProcessModel::Markov(chain)
    }

    pub fn function_of_markov(
        base: MarkovChain,
        window: usize,
        relabel: Vec<Symbol>,
        alphabet: Alphabet,
    ) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidModel("window must be positive".into()));
        }
        let n_tuples = base.n_states().checked_pow(window as u32).ok_or(Error::InvalidModel(
            "hidden tuple space overflows".into(),
        ))?;
        if relabel.len() != n_tuples {
            return Err(Error::InvalidModel(format!(
                "relabel must be total on hidden {window}-tuples ({n_tuples} entries)"
            )));
        }
        if relabel.iter().any(|&s| (s as usize) >= alphabet.len()) {
            return Err(Error::InvalidModel("relabel target out of alphabet".into()));
        }
        Ok(ProcessModel::FunctionOfMarkov { base, window, relabel, alphabet })
    }

    pub fn exchangeable(alphabet: Alphabet, weights: Vec<f64>, components: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(Error::InvalidModel("weights and components must match and be nonempty".into()));
        }
        Distribution::from_dense(&weights)?;
        for c in &components {
            if c.len() != alphabet.len() {
                return Err(Error::InvalidModel("component length mismatch".into()));
            }
            Distribution::from_dense(c)?;
        }
        Ok(ProcessModel::ExchangeableMixture { alphabet, weights, components })
    }

    pub fn periodic_orbit(alphabet: Alphabet, word: Vec<Symbol>) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidModel("periodic word must be nonempty".into()));
        }
        if word.iter().any(|&s| (s as usize) >= alphabet.len()) {
            return Err(Error::InvalidModel("word symbol out of alphabet".into()));
        }
        // reduce to the primitive period so distinct shifts get equal weight
        let word = primitive_period(&word);
        Ok(ProcessModel::PeriodicOrbit { alphabet, word })
    }

    /// Periodic orbit over `{0,1}` from a string like "0110".
    pub fn periodic_binary(word: &str) -> Result<Self> {
        let syms: Result<Vec<Symbol>> = word
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidModel(format!("bad binary digit '{other}'"))),
            })
            .collect();
        ProcessModel::periodic_orbit(Alphabet::binary(), syms?)
    }

    pub fn explicit_finite_support(alphabet: Alphabet, words: Distribution) -> Result<Self> {
        for (w, _) in words.iter() {
            if w.iter().any(|&s| (s as usize) >= alphabet.len()) {
                return Err(Error::InvalidModel("word symbol out of alphabet".into()));
            }
        }
        Ok(ProcessModel::ExplicitFiniteSupport { alphabet, words })
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            ProcessModel::Iid { alphabet, .. } => alphabet,
            ProcessModel::Markov(c) => c.alphabet(),
            ProcessModel::FunctionOfMarkov { alphabet, .. } => alphabet,
            ProcessModel::ExchangeableMixture { alphabet, .. } => alphabet,
            ProcessModel::PeriodicOrbit { alphabet, .. } => alphabet,
            ProcessModel::ExplicitFiniteSupport { alphabet, .. } => alphabet,
        }
    }

    /// Exact single-coordinate law.
    pub fn single_marginal(&self) -> Distribution {
        self.marginal(&[0], DEFAULT_MARGINAL_BUDGET)
            .expect("single-coordinate marginal never exceeds the budget")
    }

    /// Exact joint law at a strictly increasing index set.
    ///
    /// Markov chains chain k-step transition powers across gaps; hidden-chain
    /// windows use a forward transfer pass over the index hull; mixtures mix
    /// product laws. The result is invariant under integer translation of all
    /// indices.
    pub fn marginal(&self, indices: &[i64], budget: usize) -> Result<Distribution> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("index set must be nonempty".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("indices must be strictly increasing".into()));
        }
        match self {
            ProcessModel::Iid { dist, .. } => product_marginal(dist.probs(), indices.len(), budget),
            ProcessModel::Markov(chain) => markov_marginal(chain, indices, budget),
            ProcessModel::FunctionOfMarkov { base, window, relabel, .. } => {
                hidden_window_marginal(base, *window, relabel, indices, budget)
            }
            ProcessModel::ExchangeableMixture { weights, components, .. } => {
                let mut acc: HashMap<Vec<Symbol>, f64> = HashMap::new();
                for (w, comp) in weights.iter().zip(components) {
                    if *w == 0.0 {
                        continue;
                    }
                    let part = product_marginal(comp, indices.len(), budget)?;
                    for (t, p) in part.iter() {
                        *acc.entry(t.to_vec()).or_insert(0.0) += w * p;
                    }
                }
                Distribution::from_weights(acc)
            }
            ProcessModel::PeriodicOrbit { word, .. } => {
                let p = word.len() as i64;
                let mut acc: HashMap<Vec<Symbol>, f64> = HashMap::new();
                for shift in 0..word.len() {
                    let t: Vec<Symbol> = indices
                        .iter()
                        .map(|&i| word[(shift as i64 + i).rem_euclid(p) as usize])
                        .collect();
                    *acc.entry(t).or_insert(0.0) += 1.0 / word.len() as f64;
                }
                Distribution::from_weights(acc)
            }
            ProcessModel::ExplicitFiniteSupport { words, .. } => {
                let period = words.arity() as i64;
                let mut acc: HashMap<Vec<Symbol>, f64> = HashMap::new();
                for (w, pw) in words.iter() {
                    for phase in 0..words.arity() {
                        let t: Vec<Symbol> = indices
                            .iter()
                            .map(|&i| w[(phase as i64 + i).rem_euclid(period) as usize])
                            .collect();
                        *acc.entry(t).or_insert(0.0) += pw / words.arity() as f64;
                    }
                }
                Distribution::from_weights(acc)
            }
        }
    }

    /// Deterministic sample of the coordinates `start, ..., start + len - 1`.
    pub fn sample_window(&self, start: i64, len: usize, seed: u64) -> Vec<Symbol> {
        let mut rng = seeded_rng(seed);
        self.sample_window_with(start, len, &mut rng)
    }

    /// Like [`sample_window`](Self::sample_window) but drawing from a caller-owned generator.
    pub fn sample_window_with<R: Rng>(&self, _start: i64, len: usize, rng: &mut R) -> Vec<Symbol> {
        assert!(len > 0, "window must be nonempty");
        match self {
            ProcessModel::Iid { dist, .. } => {
                (0..len).map(|_| dist.sample(rng)[0]).collect()
            }
            ProcessModel::Markov(chain) => {
                let pi = Distribution::from_dense(chain.stationary()).unwrap();
                let mut state = pi.sample(rng)[0];
                let mut out = Vec::with_capacity(len);
                out.push(state);
                for _ in 1..len {
                    state = sample_row(&chain.transition()[state as usize], rng);
                    out.push(state);
                }
                out
            }
            ProcessModel::FunctionOfMarkov { base, window, relabel, .. } => {
                let hidden_len = len + window - 1;
                let pi = Distribution::from_dense(base.stationary()).unwrap();
                let mut hidden = Vec::with_capacity(hidden_len);
                let mut state = pi.sample(rng)[0];
                hidden.push(state);
                for _ in 1..hidden_len {
                    state = sample_row(&base.transition()[state as usize], rng);
                    hidden.push(state);
                }
                let k = base.n_states();
                (0..len)
                    .map(|i| {
                        let code = hidden[i..i + window]
                            .iter()
                            .fold(0usize, |acc, &s| acc * k + s as usize);
                        relabel[code]
                    })
                    .collect()
            }
            ProcessModel::ExchangeableMixture { weights, components, .. } => {
                let wd = Distribution::from_dense(weights).unwrap();
                let comp = wd.sample(rng)[0] as usize;
                let cd = Distribution::from_dense(&components[comp]).unwrap();
                (0..len).map(|_| cd.sample(rng)[0]).collect()
            }
            ProcessModel::PeriodicOrbit { word, .. } => {
                let shift = rng.gen_range(0..word.len());
                (0..len).map(|i| word[(shift + i) % word.len()]).collect()
            }
            ProcessModel::ExplicitFiniteSupport { words, .. } => {
                let w = words.sample(rng).to_vec();
                let phase = rng.gen_range(0..words.arity());
                (0..len).map(|i| w[(phase + i) % words.arity()]).collect()
            }
        }
    }

    /// Whether ergodicity is verified for this model family, or merely
    /// trusted. Periodic orbits, i.i.d. processes and irreducible Markov
    /// chains are verified; everything else is up to the user.
    pub fn ergodicity(&self) -> Ergodicity {
        match self {
            ProcessModel::Iid { .. } | ProcessModel::PeriodicOrbit { .. } => Ergodicity::Verified,
            ProcessModel::Markov(c) => {
                if c.is_irreducible() {
                    Ergodicity::Verified
                } else {
                    Ergodicity::NotErgodic
                }
            }
            ProcessModel::FunctionOfMarkov { base, .. } => {
                if base.is_irreducible() {
                    Ergodicity::Verified
                } else {
                    Ergodicity::NotErgodic
                }
            }
            _ => Ergodicity::Trusted,
        }
    }

    /// The equivalent Markov chain on output symbols, when one exists.
    ///
    /// An i.i.d. model is trivially Markov. A hidden-window model is Markov on
    /// its own alphabet when the relabeling is injective on w-tuples of
    /// positive stationary probability.
    pub fn as_markov(&self) -> Option<MarkovChain> {
        match self {
            ProcessModel::Markov(c) => Some(c.clone()),
            ProcessModel::Iid { alphabet, dist } => {
                let n = alphabet.len();
                let mut probs = vec![0.0; n];
                for (t, p) in dist.iter() {
                    probs[t[0] as usize] = p;
                }
                let transition = vec![probs.clone(); n];
                MarkovChain::new(alphabet.clone(), transition, probs).ok()
            }
            ProcessModel::FunctionOfMarkov { base, window, relabel, alphabet } => {
                function_of_markov_as_markov(base, *window, relabel, alphabet)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ergodicity {
    Verified,
    Trusted,
    NotErgodic,
}

fn primitive_period(word: &[Symbol]) -> Vec<Symbol> {
    let n = word.len();
    for p in 1..=n {
        if n % p == 0 && (0..n).all(|i| word[i] == word[i % p]) {
            return word[..p].to_vec();
        }
    }
    word.to_vec()
}

fn sample_row<R: Rng>(row: &[f64], rng: &mut R) -> Symbol {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (j, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j as Symbol;
        }
    }
    (row.len() - 1) as Symbol
}

fn product_marginal(probs: &[f64], n: usize, budget: usize) -> Result<Distribution> {
    let live: Vec<(Symbol, f64)> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (i as Symbol, p))
        .collect();
    let size = live.len().checked_pow(n as u32).unwrap_or(usize::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { needed: size, budget });
    }
    let mut support = vec![Vec::new()];
    let mut weights = vec![1.0];
    for _ in 0..n {
        let mut ns = Vec::with_capacity(support.len() * live.len());
        let mut nw = Vec::with_capacity(support.len() * live.len());
        for (t, &w) in support.iter().zip(weights.iter()) {
            for &(s, p) in &live {
                let mut t2 = t.clone();
                t2.push(s);
                ns.push(t2);
                nw.push(w * p);
            }
        }
        support = ns;
        weights = nw;
    }
    Distribution::new(support, weights)
}

fn markov_marginal(chain: &MarkovChain, indices: &[i64], budget: usize) -> Result<Distribution> {
    let n = chain.n_states();
    // transition powers across consecutive gaps
    let gaps: Vec<u64> = indices.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    let powers: Vec<Vec<Vec<f64>>> = gaps.iter().map(|&g| chain.transition_power(g)).collect();
    let size = n.checked_pow(indices.len() as u32).unwrap_or(usize::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded { needed: size, budget });
    }
    let mut acc: HashMap<Vec<Symbol>, f64> = HashMap::new();
    // depth-first over observed coordinates
    let mut stack: Vec<(Vec<Symbol>, f64)> = (0..n)
        .filter(|&s| chain.stationary()[s] > 0.0)
        .map(|s| (vec![s as Symbol], chain.stationary()[s]))
        .collect();
    while let Some((tuple, p)) = stack.pop() {
        if tuple.len() == indices.len() {
            *acc.entry(tuple).or_insert(0.0) += p;
            continue;
        }
        let step = &powers[tuple.len() - 1];
        let last = *tuple.last().unwrap() as usize;
        for next in 0..n {
            let q = step[last][next];
            if q > 0.0 {
                let mut t2 = tuple.clone();
                t2.push(next as Symbol);
                stack.push((t2, p * q));
            }
        }
    }
    Distribution::from_weights(acc)
}

/// Forward transfer pass for `X_i = relabel(xi_i, ..., xi_{i+w-1})`:
/// marginalizes hidden states across index gaps so the cost is linear in the
/// hull width rather than exponential.
fn hidden_window_marginal(
    base: &MarkovChain,
    window: usize,
    relabel: &[Symbol],
    indices: &[i64],
    budget: usize,
) -> Result<Distribution> {
    let k = base.n_states();
    let keep = window; // hidden symbols retained in the state
    let first = indices[0];
    let last_hidden = indices[indices.len() - 1] + window as i64 - 1;
    let mut wanted = indices.to_vec();

    // frontier: (outputs recorded so far, last `keep` hidden symbols) -> prob
    let mut frontier: HashMap<(Vec<Symbol>, Vec<Symbol>), f64> = HashMap::new();
    let mut consumed = 0usize;
    let mut work = 0usize;
    for j in first..=last_hidden {
        let mut next: HashMap<(Vec<Symbol>, Vec<Symbol>), f64> = HashMap::new();
        if consumed == 0 {
            for s in 0..k {
                let p = base.stationary()[s];
                if p > 0.0 {
                    next.insert((Vec::new(), vec![s as Symbol]), p);
                }
            }
        } else {
            for ((outs, state), p) in &frontier {
                let lastsym = *state.last().unwrap() as usize;
                for s in 0..k {
                    let q = base.transition()[lastsym][s];
                    if q == 0.0 {
                        continue;
                    }
                    let mut st = state.clone();
                    st.push(s as Symbol);
                    if st.len() > keep {
                        st.remove(0);
                    }
                    *next.entry((outs.clone(), st)).or_insert(0.0) += p * q;
                    work += 1;
                }
            }
        }
        consumed += 1;
        // the window ending at hidden coord j covers output coordinate j-w+1
        let out_coord = j - window as i64 + 1;
        if consumed >= window && Some(&out_coord) == wanted.first() {
            wanted.remove(0);
            let mut recorded: HashMap<(Vec<Symbol>, Vec<Symbol>), f64> = HashMap::new();
            for ((outs, state), p) in next {
                // consumed >= window, so the state holds at least the last w
                // hidden symbols and the window is exactly its tail
                let code = state[state.len() - window..]
                    .iter()
                    .fold(0usize, |acc, &s| acc * k + s as usize);
                let mut outs2 = outs;
                outs2.push(relabel[code]);
                *recorded.entry((outs2, state)).or_insert(0.0) += p;
            }
            frontier = recorded;
        } else {
            frontier = next;
        }
        work += frontier.len();
        if work > budget {
            return Err(Error::BudgetExceeded { needed: work, budget });
        }
    }
    let mut acc: HashMap<Vec<Symbol>, f64> = HashMap::new();
    for ((outs, _), p) in frontier {
        *acc.entry(outs).or_insert(0.0) += p;
    }
    Distribution::from_weights(acc)
}

fn function_of_markov_as_markov(
    base: &MarkovChain,
    window: usize,
    relabel: &[Symbol],
    alphabet: &Alphabet,
) -> Option<MarkovChain> {
    let k = base.n_states();
    let n_tuples = k.checked_pow(window as u32)?;
    if n_tuples > 1 << 16 {
        return None;
    }
    // stationary law of the w-tuple chain
    let decode = |code: usize| -> Vec<usize> {
        let mut t = vec![0usize; window];
        let mut c = code;
        for i in (0..window).rev() {
            t[i] = c % k;
            c /= k;
        }
        t
    };
    let mut tuple_pi = vec![0.0f64; n_tuples];
    for code in 0..n_tuples {
        let t = decode(code);
        let mut p = base.stationary()[t[0]];
        for w in t.windows(2) {
            p *= base.transition()[w[0]][w[1]];
        }
        tuple_pi[code] = p;
    }
    // injectivity on the reachable tuples
    let mut seen: HashMap<Symbol, usize> = HashMap::new();
    for code in 0..n_tuples {
        if tuple_pi[code] > 0.0 {
            if seen.insert(relabel[code], code).is_some() {
                return None;
            }
        }
    }
    let m = alphabet.len();
    let mut transition = vec![vec![0.0f64; m]; m];
    let mut pi = vec![0.0f64; m];
    for (&out, &code) in &seen {
        pi[out as usize] = tuple_pi[code];
        let t = decode(code);
        let lead = t[window - 1];
        for s in 0..k {
            let q = base.transition()[lead][s];
            if q == 0.0 {
                continue;
            }
            let mut t2 = t[1..].to_vec();
            t2.push(s);
            let code2 = t2.iter().fold(0usize, |acc, &x| acc * k + x);
            let out2 = relabel[code2];
            transition[out as usize][out2 as usize] += q;
        }
    }
    // rows for unreachable output symbols: self-loops keep the matrix stochastic
    for (i, row) in transition.iter_mut().enumerate() {
        if row.iter().sum::<f64>() == 0.0 {
            row[i] = 1.0;
        }
    }
    MarkovChain::new(alphabet.clone(), transition, pi).ok()
}

/// A `{0,1}`-valued model together with its exact one-marginal
/// `theta = P(Y_0 = 1) > 0`.
#[derive(Debug, Clone)]
pub struct ZeroOneView {
    model: ProcessModel,
    theta: f64,
}

impl ZeroOneView {
    pub fn new(model: ProcessModel) -> Result<Self> {
        if !model.alphabet().is_binary() {
            return Err(Error::InvalidModel("zero-one view requires the {0,1} alphabet".into()));
        }
        let theta = model.single_marginal().prob_of(&[1]);
        if theta <= 0.0 {
            return Err(Error::InvalidTheta);
        }
        Ok(ZeroOneView { model, theta })
    }

    pub fn model(&self) -> &ProcessModel {
        &self.model
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}
