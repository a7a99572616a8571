//! Return-time and inter-arrival machinery for `{0,1}` processes, plus the
//! ergodic-theorem self-checks (Birkhoff, Poincare, Kac, invariance of the
//! induced measure).
//!
//! Arrival indexing convention: `r_0` is the first arrival at or after the
//! origin and negative indices walk arrivals strictly before `r_0` in
//! decreasing order, so `r_{-1} < 0` whenever `r_0 >= 0`. Statistical PASS
//! thresholds (4 resp. 5 standard errors) are configuration, not science, and
//! are recorded in every report.

use rand::Rng;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mc::{chunked_mean, derive_seed, seeded_rng, Accumulator};
use crate::models::{ProcessModel, Symbol, ZeroOneView};

/// A sampled stretch of a realization with an absolute start coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub start: i64,
    pub symbols: Vec<Symbol>,
}

impl Word {
    pub fn get(&self, i: i64) -> Option<Symbol> {
        let off = i - self.start;
        if off < 0 {
            return None;
        }
        self.symbols.get(off as usize).copied()
    }

    pub fn end(&self) -> i64 {
        self.start + self.symbols.len() as i64 - 1
    }
}

/// Arrival times of one realization: `past[j] = r_{-(j+1)}`, `future[j] = r_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnSample {
    past: Vec<i64>,
    future: Vec<i64>,
}

impl ReturnSample {
    /// Arrival time `r_i`. Panics when `i` was not extracted.
    pub fn r(&self, i: i64) -> i64 {
        if i >= 0 {
            self.future[i as usize]
        } else {
            self.past[(-i - 1) as usize]
        }
    }

    /// Inter-arrival `t_i = r_i - r_{i-1} >= 1`.
    pub fn inter_arrival(&self, i: i64) -> i64 {
        self.r(i) - self.r(i - 1)
    }

    pub fn past(&self) -> &[i64] {
        &self.past
    }

    pub fn future(&self) -> &[i64] {
        &self.future
    }
}

/// Read off arrival times from a window: `past_count` arrivals before 0 and
/// `future_count` at or after 0 (the latter starting with `r_0`).
pub fn extract_returns(y: &Word, past_count: usize, future_count: usize) -> Result<ReturnSample> {
    let mut past = Vec::new();
    let mut future = Vec::new();
    for (off, &b) in y.symbols.iter().enumerate() {
        if b == 1 {
            let i = y.start + off as i64;
            if i < 0 {
                past.push(i);
            } else {
                future.push(i);
            }
        }
    }
    if past.len() < past_count {
        return Err(Error::InsufficientArrivals {
            side: "past arrivals",
            wanted: past_count,
            found: past.len(),
        });
    }
    if future.len() < future_count {
        return Err(Error::InsufficientArrivals {
            side: "future arrivals",
            wanted: future_count,
            found: future.len(),
        });
    }
    past.reverse(); // r_{-1}, r_{-2}, ... in decreasing time order
    past.truncate(past_count);
    future.truncate(future_count);
    Ok(ReturnSample { past, future })
}

/// Truncated law of the first return time `R_1` under `Y_0 = 1`:
/// `probs[k-1] = P(R_1 = k)` for `k = 1..=K` plus the tail mass `P(R_1 > K)`.
#[derive(Debug, Clone)]
pub struct R1Law {
    probs: Vec<f64>,
    tail: f64,
    stderr: Option<Vec<f64>>,
}

impl R1Law {
    pub fn new(probs: Vec<f64>, tail: f64, stderr: Option<Vec<f64>>) -> Result<Self> {
        if tail < -1e-15 || probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidDistribution("R1 law has negative mass".into()));
        }
        let sum: f64 = probs.iter().sum::<f64>() + tail;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "R1 law mass plus tail sums to {sum}, not 1"
            )));
        }
        Ok(R1Law { probs, tail: tail.max(0.0), stderr })
    }

    pub fn point_mass(k: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[k - 1] = 1.0;
        R1Law { probs, tail: 0.0, stderr: None }
    }

    pub fn truncation(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, k: usize) -> f64 {
        assert!(k >= 1);
        self.probs.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn stderr(&self) -> Option<&[f64]> {
        self.stderr.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.stderr.is_none()
    }
}

/// Exact tail truncation target for the exact paths.
pub const EXACT_TAIL_TARGET: f64 = 1e-6;

/// Law of `R_1` under `Y_0 = 1`.
///
/// Exact for periodic orbits (finite support, zero tail) and i.i.d. models
/// (geometric); empirical with binomial standard errors otherwise. The
/// truncation defaults to the smallest K with tail below [`EXACT_TAIL_TARGET`]
/// on exact paths; empirical paths require an explicit cap.
pub fn r1_distribution(
    view: &ZeroOneView,
    k_cap: Option<usize>,
    n_samples: usize,
    seed: u64,
) -> Result<R1Law> {
    match view.model() {
        ProcessModel::PeriodicOrbit { word, .. } => {
            let p = word.len();
            let ones: Vec<usize> = (0..p).filter(|&i| word[i] == 1).collect();
            let max_gap = p; // gaps never exceed the period
            let mut probs = vec![0.0; k_cap.unwrap_or(max_gap).max(1)];
            let mut tail = 0.0;
            for &s in &ones {
                let gap = (1..=p).find(|&d| word[(s + d) % p] == 1).unwrap();
                if gap <= probs.len() {
                    probs[gap - 1] += 1.0 / ones.len() as f64;
                } else {
                    tail += 1.0 / ones.len() as f64;
                }
            }
            while probs.len() > 1 && *probs.last().unwrap() == 0.0 && k_cap.is_none() {
                probs.pop();
            }
            R1Law::new(probs, tail, None)
        }
        ProcessModel::Iid { .. } => {
            let theta = view.theta();
            let k = k_cap.unwrap_or_else(|| {
                if theta >= 1.0 {
                    1
                } else {
                    ((EXACT_TAIL_TARGET.ln() / (1.0 - theta).ln()).ceil() as usize).max(1)
                }
            });
            let probs: Vec<f64> = (1..=k)
                .map(|j| theta * (1.0 - theta).powi(j as i32 - 1))
                .collect();
            let tail = (1.0 - theta).powi(k as i32);
            R1Law::new(probs, tail, None)
        }
        _ => {
            let k = k_cap.unwrap_or(64);
            let mut counts = vec![0u64; k + 1]; // last slot is the tail
            let mut rng = seeded_rng(derive_seed(seed, 0x517));
            for _ in 0..n_samples {
                match sample_r1(view, &mut rng) {
                    Some(g) if g <= k as i64 => counts[g as usize - 1] += 1,
                    _ => counts[k] += 1,
                }
            }
            let n = n_samples as f64;
            let probs: Vec<f64> = counts[..k].iter().map(|&c| c as f64 / n).collect();
            let tail = counts[k] as f64 / n;
            let stderr = probs
                .iter()
                .map(|&p| (p * (1.0 - p) / n).sqrt())
                .collect();
            R1Law::new(probs, tail, Some(stderr))
        }
    }
}

/// Sample a window under `P_{Y_0 = 1}` covering `[-past_len, future_len]`.
///
/// Periodic orbits and i.i.d. models have exact fast paths; everything else
/// uses rejection on the origin bit, costing 1/theta tries per sample.
pub fn sample_conditioned_window<R: Rng>(
    view: &ZeroOneView,
    past_len: usize,
    future_len: usize,
    rng: &mut R,
) -> Word {
    let len = past_len + future_len + 1;
    match view.model() {
        ProcessModel::PeriodicOrbit { word, .. } => {
            let p = word.len();
            let ones: Vec<usize> = (0..p).filter(|&i| word[i] == 1).collect();
            let s = ones[rng.gen_range(0..ones.len())];
            let symbols = (0..len)
                .map(|i| {
                    let coord = s as i64 - past_len as i64 + i as i64;
                    word[coord.rem_euclid(p as i64) as usize]
                })
                .collect();
            Word { start: -(past_len as i64), symbols }
        }
        ProcessModel::Iid { dist, .. } => {
            let mut symbols: Vec<Symbol> = (0..len).map(|_| dist.sample(rng)[0]).collect();
            symbols[past_len] = 1;
            Word { start: -(past_len as i64), symbols }
        }
        model => loop {
            let symbols = model.sample_window_with(-(past_len as i64), len, rng);
            if symbols[past_len] == 1 {
                return Word { start: -(past_len as i64), symbols };
            }
        },
    }
}

/// First return time `R_1` of one conditioned realization, or None when no
/// arrival shows up within the horizon. A single draw keeps the law unbiased;
/// redrawing longer windows on a miss would over-weight short returns.
fn sample_r1<R: Rng>(view: &ZeroOneView, rng: &mut R) -> Option<i64> {
    let horizon = ((64.0 / view.theta()).ceil() as usize).min(1 << 16);
    let w = sample_conditioned_window(view, 0, horizon, rng);
    w.symbols[1..]
        .iter()
        .position(|&b| b == 1)
        .map(|p| p as i64 + 1)
}

/// The `m` most recent past arrival times of one conditioned realization:
/// `r_{-1} > r_{-2} > ... > r_{-m}`, all negative.
pub fn sample_past_returns<R: Rng>(view: &ZeroOneView, m: usize, rng: &mut R) -> Vec<i64> {
    match view.model() {
        ProcessModel::Iid { .. } => {
            let theta = view.theta();
            let mut acc = 0i64;
            (0..m)
                .map(|_| {
                    acc -= sample_geometric(theta, rng);
                    acc
                })
                .collect()
        }
        _ => {
            let mut past_len = ((2 * m.max(1)) as f64 / view.theta()).ceil() as usize;
            loop {
                let w = sample_conditioned_window(view, past_len, 0, rng);
                if let Ok(rs) = extract_returns(&w, m, 1) {
                    return rs.past().to_vec();
                }
                past_len *= 2;
            }
        }
    }
}

fn sample_geometric<R: Rng>(theta: f64, rng: &mut R) -> i64 {
    if theta >= 1.0 {
        return 1;
    }
    let u: f64 = rng.gen();
    // smallest k >= 1 with 1 - (1-theta)^k > u
    ((1.0 - u).ln() / (1.0 - theta).ln()).ceil().max(1.0) as i64
}

#[derive(Debug, Clone)]
pub struct KacReport {
    pub mean: f64,
    pub target: f64,
    pub stderr: f64,
    pub pass: bool,
    pub exact: bool,
}

/// Kac's lemma: the conditioned mean of `R_1` equals `1/theta`.
pub fn kac_check(view: &ZeroOneView, n_samples: usize, seed: u64) -> KacReport {
    let target = 1.0 / view.theta();
    if let ProcessModel::PeriodicOrbit { word, .. } = view.model() {
        // deterministic returns: mean is exactly period / #ones
        let law = r1_distribution(view, None, 0, seed).unwrap();
        let mean: f64 = law
            .probs()
            .iter()
            .enumerate()
            .map(|(i, &p)| (i + 1) as f64 * p)
            .sum();
        let _ = word;
        return KacReport {
            mean,
            target,
            stderr: 0.0,
            pass: (mean - target).abs() <= 1e-9,
            exact: true,
        };
    }
    let acc = chunked_mean(n_samples, derive_seed(seed, 0x6b61_63), |rng| {
        sample_r1(view, rng).unwrap_or(0) as f64
    });
    let mean = acc.mean();
    let stderr = acc.stderr();
    KacReport {
        mean,
        target,
        stderr,
        pass: (mean - target).abs() <= 4.0 * stderr,
        exact: false,
    }
}

/// Poincare recurrence: fraction of conditioned paths returning within the
/// horizon.
pub fn poincare_check(view: &ZeroOneView, horizon: usize, n_samples: usize, seed: u64) -> f64 {
    if let ProcessModel::PeriodicOrbit { word, .. } = view.model() {
        let p = word.len();
        let ones: Vec<usize> = (0..p).filter(|&i| word[i] == 1).collect();
        let hits = ones
            .iter()
            .filter(|&&s| (1..=horizon).any(|d| word[(s + d) % p] == 1))
            .count();
        return hits as f64 / ones.len() as f64;
    }
    let acc = chunked_mean(n_samples, derive_seed(seed, 0x706f_69), |rng| {
        let w = sample_conditioned_window(view, 0, horizon, rng);
        if w.symbols[1..].iter().any(|&b| b == 1) {
            1.0
        } else {
            0.0
        }
    });
    acc.mean()
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub total_variation: f64,
    pub threshold: f64,
    pub pass: bool,
    pub exact: bool,
}

/// Invariance of the induced measure: the law of a window of `Y` under
/// `Y_0 = 1` matches the law of the same window after the first-return shift.
///
/// With `negative_control` the comparison window is shifted by one plain step
/// instead, which breaks invariance and must FAIL.
pub fn induced_invariance_check(
    view: &ZeroOneView,
    window_len: usize,
    n_samples: usize,
    seed: u64,
    negative_control: bool,
) -> InvarianceReport {
    assert!(window_len >= 1);
    if let ProcessModel::PeriodicOrbit { word, .. } = view.model() {
        let p = word.len();
        let ones: Vec<usize> = (0..p).filter(|&i| word[i] == 1).collect();
        let mut law_a: HashMap<Vec<Symbol>, f64> = HashMap::new();
        let mut law_b: HashMap<Vec<Symbol>, f64> = HashMap::new();
        let w = 1.0 / ones.len() as f64;
        for &s in &ones {
            let read = |from: usize| -> Vec<Symbol> {
                (0..window_len).map(|i| word[(from + i) % p]).collect()
            };
            *law_a.entry(read(s)).or_insert(0.0) += w;
            let from_b = if negative_control {
                s + 1
            } else {
                s + (1..=p).find(|&d| word[(s + d) % p] == 1).unwrap()
            };
            *law_b.entry(read(from_b)).or_insert(0.0) += w;
        }
        let tv = tv_of_maps(&law_a, &law_b);
        return InvarianceReport {
            total_variation: tv,
            threshold: 1e-9,
            pass: tv <= 1e-9,
            exact: true,
        };
    }
    let mut rng = seeded_rng(derive_seed(seed, 0x696e_76));
    let mut counts_a: HashMap<Vec<Symbol>, f64> = HashMap::new();
    let mut counts_b: HashMap<Vec<Symbol>, f64> = HashMap::new();
    let horizon = window_len + (16.0 / view.theta()).ceil() as usize;
    let w = 1.0 / n_samples as f64;
    for _ in 0..n_samples {
        let win = sample_conditioned_window(view, 0, horizon + window_len, &mut rng);
        let a: Vec<Symbol> = win.symbols[..window_len].to_vec();
        *counts_a.entry(a).or_insert(0.0) += w;
        let from = if negative_control {
            1
        } else {
            match win.symbols[1..].iter().position(|&b| b == 1) {
                Some(p) => p + 1,
                None => continue, // no return within horizon; vanishing mass
            }
        };
        let b: Vec<Symbol> = win.symbols[from..from + window_len].to_vec();
        *counts_b.entry(b).or_insert(0.0) += w;
    }
    let tv = tv_of_maps(&counts_a, &counts_b);
    let cells = counts_a.len().max(counts_b.len()) as f64;
    let stderr = (cells / (4.0 * n_samples as f64)).sqrt();
    let threshold = 5.0 * stderr;
    InvarianceReport {
        total_variation: tv,
        threshold,
        pass: tv <= threshold,
        exact: false,
    }
}

fn tv_of_maps(a: &HashMap<Vec<Symbol>, f64>, b: &HashMap<Vec<Symbol>, f64>) -> f64 {
    let mut keys: Vec<&Vec<Symbol>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| (a.get(*k).copied().unwrap_or(0.0) - b.get(*k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct BirkhoffReport {
    pub average: f64,
    pub expectation: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Birkhoff averages of an indicator statistic along one sampled path against
/// the exact expectation. The standard error comes from batch means, which
/// absorbs serial correlation.
pub fn birkhoff_check(model: &ProcessModel, symbol: Symbol, n: usize, seed: u64) -> BirkhoffReport {
    let expectation = model.single_marginal().prob_of(&[symbol]);
    let path = model.sample_window(0, n, derive_seed(seed, 0x6269_72));
    let average = path.iter().filter(|&&s| s == symbol).count() as f64 / n as f64;
    // batch means stderr
    let n_batches = 64.min(n);
    let batch = n / n_batches;
    let mut acc = Accumulator::default();
    for b in 0..n_batches {
        let slice = &path[b * batch..(b + 1) * batch];
        let m = slice.iter().filter(|&&s| s == symbol).count() as f64 / batch as f64;
        acc.push(m);
    }
    let stderr = acc.stderr();
    let pass = match model {
        ProcessModel::PeriodicOrbit { word, .. } if n % word.len() == 0 => {
            (average - expectation).abs() <= 1e-12
        }
        _ => (average - expectation).abs() <= 4.0 * stderr.max(1e-12),
    };
    BirkhoffReport { average, expectation, stderr, pass }
}
