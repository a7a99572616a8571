//! Reproducible chunked Monte Carlo.
//!
//! Every stochastic routine takes an explicit 64-bit seed. Work is split into
//! fixed-size chunks whose generators are seeded from (seed, chunk index), and
//! chunk results are merged in index order, so the result is identical for any
//! thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_CHUNK: usize = 4096;

/// splitmix64 finalizer; used both to whiten raw seeds and to derive
/// per-chunk streams.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0xa076_1d64_78bd_642f)))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed))
}

/// Running mean/variance accumulator with exact merging.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Standard error of the mean (sample variance based).
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let n = self.n as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Mean and stderr of `f` over `n_samples` draws, chunked for parallelism.
pub fn chunked_mean<F>(n_samples: usize, seed: u64, f: F) -> Accumulator
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let n_chunks = n_samples.div_ceil(DEFAULT_CHUNK);
    let chunks: Vec<Accumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded_rng(derive_seed(seed, c as u64));
            let lo = c * DEFAULT_CHUNK;
            let hi = ((c + 1) * DEFAULT_CHUNK).min(n_samples);
            let mut acc = Accumulator::default();
            for _ in lo..hi {
                acc.push(f(&mut rng));
            }
            acc
        })
        .collect();
    let mut total = Accumulator::default();
    for c in &chunks {
        total.merge(c);
    }
    total
}
