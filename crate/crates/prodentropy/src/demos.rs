//! Desk-scale constructions showing what breaks without independence, plus
//! divisor-free indicator words.
//!
//! When `X` and `Y` are allowed to depend on each other the sandwich bounds
//! collapse: `X = Z * W` and `Y = 1 - W` give an identically-zero product even
//! though `H(X) > 0`. The survivors/victims construction goes further,
//! exhibiting a positive-entropy joint law whose censored image has zero
//! entropy, via an entropy-preserving split of the censored-away coordinates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::formulas::{relative_entropy_rate_a, EntropyEstimate};
use crate::mc::{derive_seed, seeded_rng};
use crate::models::{ProcessModel, Symbol, ZeroOneView};
use crate::oracle::plugin_estimator;

/// `X = Z * W`, `Y = 1 - W` for a periodic `{0,1}` word `W`: the product
/// `M = X * Y` vanishes identically while `H(X)` stays positive.
#[derive(Debug, Clone)]
pub struct DependentZeroReport {
    pub windows_checked: usize,
    pub product_always_zero: bool,
    /// Exactly zero: every sampled product window is all zeros.
    pub h_m: f64,
    /// Enclosure for `H(X) = H(Z*W)`, exact when `Z` collapses the
    /// arrival conditioning.
    pub h_x: EntropyEstimate,
    pub h_x_positive: bool,
}

pub fn dependent_zero_demo(
    z_model: &ProcessModel,
    w_orbit: &ProcessModel,
    n_windows: usize,
    seed: u64,
) -> Result<DependentZeroReport> {
    let w_word = match w_orbit {
        ProcessModel::PeriodicOrbit { word, alphabet } if alphabet.is_binary() => word.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "censoring process must be a binary periodic orbit".into(),
            ))
        }
    };
    let ones = w_word.iter().filter(|&&b| b == 1).count();
    if ones == 0 || ones == w_word.len() {
        return Err(Error::InvalidArgument(
            "degenerate orbit: theta must lie strictly between 0 and 1".into(),
        ));
    }

    // sample (Z, phase) jointly; X = Z*W and Y = 1-W share the phase, so
    // X*Y = Z*W*(1-W) is zero at every coordinate
    let mut rng = seeded_rng(derive_seed(seed, 0x6470_7a));
    let p = w_word.len();
    let len = 4 * p;
    let mut product_always_zero = true;
    for _ in 0..n_windows {
        let phase = rng.gen_range(0..p);
        let z = z_model.sample_window_with(0, len, &mut rng);
        for (i, &zi) in z.iter().enumerate() {
            let w = w_word[(phase + i) % p];
            let m = zi * w * (1 - w);
            if m != 0 {
                product_always_zero = false;
            }
        }
    }

    // H(X) = H(X | W) since the periodic W carries no entropy
    let w_view = ZeroOneView::new(w_orbit.clone())?;
    let h_x = relative_entropy_rate_a(z_model, &w_view, 4, 0, seed, 1 << 22)?;
    let h_x_positive = h_x.lower > 1e-12;
    Ok(DependentZeroReport {
        windows_checked: n_windows,
        product_always_zero,
        h_m: 0.0,
        h_x,
        h_x_positive,
    })
}

/// Law of one split stream in the survivors/victims construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentMeasure {
    /// Point mass on the all-zero sequence.
    AllZeros,
    /// Independent fair bits.
    FairCoin,
}

impl ComponentMeasure {
    fn sample<R: Rng>(&self, rng: &mut R) -> Symbol {
        match self {
            ComponentMeasure::AllZeros => 0,
            ComponentMeasure::FairCoin => rng.gen_range(0..2),
        }
    }
}

/// A window of `(x, y)` split by the arrival pattern of `y`: survivors are the
/// `x`-coordinates that the product exposes, victims the censored ones. The
/// origin marker is index 0 of every stored window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitWindow {
    pub survivors: Vec<Symbol>,
    pub victims: Vec<Symbol>,
    pub y: Vec<Symbol>,
}

/// The interleaving split.
pub fn split(x: &[Symbol], y: &[Symbol]) -> SplitWindow {
    assert_eq!(x.len(), y.len());
    let mut survivors = Vec::new();
    let mut victims = Vec::new();
    for (&xi, &yi) in x.iter().zip(y) {
        if yi == 1 {
            survivors.push(xi);
        } else {
            victims.push(xi);
        }
    }
    SplitWindow { survivors, victims, y: y.to_vec() }
}

/// The skew shift on split windows: the base `y` always advances, and exactly
/// one of the two streams advances with it, chosen by the origin bit of `y`.
pub fn skew_shift(s: &SplitWindow) -> SplitWindow {
    let mut out = s.clone();
    out.y.remove(0);
    if s.y[0] == 1 {
        out.survivors.remove(0);
    } else {
        out.victims.remove(0);
    }
    out
}

/// Reassemble the censored product from survivors and the arrival pattern.
pub fn censored_product(survivors: &[Symbol], y: &[Symbol]) -> Vec<Symbol> {
    let mut it = survivors.iter();
    y.iter()
        .map(|&yi| if yi == 1 { *it.next().unwrap() } else { 0 })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SurvivorsVictimsReport {
    pub identity_windows: usize,
    /// Mismatches of `split . (shift x shift) = skew_shift . split`.
    pub split_identity_mismatches: usize,
    /// Mismatches of `product = censored_product . project . split`.
    pub product_identity_mismatches: usize,
    /// Plug-in joint entropy per victim coordinate (the stream that carries
    /// all the randomness under the default measures).
    pub joint_rate: EntropyEstimate,
    /// Plug-in entropy of the product blocks.
    pub product_entropy: f64,
    pub joint_rate_pass: bool,
    pub product_zero_pass: bool,
}

/// The entropy-collapse construction for the period-2 divisor-free word:
/// `y` is one of the two shifts of `01`, survivors follow `khat`, victims
/// follow `ktilde`. With the default choices (`AllZeros`, `FairCoin`) the
/// joint law has positive entropy while the censored product is a shifted
/// all-zero pattern.
pub fn survivors_victims_demo(
    khat: ComponentMeasure,
    ktilde: ComponentMeasure,
    n_samples: usize,
    seed: u64,
) -> SurvivorsVictimsReport {
    let mut rng = seeded_rng(derive_seed(seed, 0x7376_76));

    // exact finite identities on random windows
    let identity_windows = 1_000;
    let mut split_identity_mismatches = 0;
    let mut product_identity_mismatches = 0;
    for _ in 0..identity_windows {
        let (x, y) = sample_pair(khat, ktilde, 64, &mut rng);
        let shifted = split(&x[1..], &y[1..]);
        if shifted != skew_shift(&split(&x, &y)) {
            split_identity_mismatches += 1;
        }
        let s = split(&x, &y);
        let direct: Vec<Symbol> = x.iter().zip(&y).map(|(&a, &b)| a * b).collect();
        if censored_product(&s.survivors, &s.y) != direct {
            product_identity_mismatches += 1;
        }
    }

    // plug-in entropies; the pair (x, y) is packed into one symbol stream so
    // the unconditional plug-in machinery applies
    let block = 8;
    let samples: Vec<(Vec<Symbol>, Vec<Symbol>)> = (0..n_samples)
        .map(|_| {
            let (x, y) = sample_pair(khat, ktilde, block, &mut rng);
            let packed: Vec<Symbol> = x.iter().zip(&y).map(|(&a, &b)| a + 2 * b).collect();
            (packed, vec![0; block])
        })
        .collect();
    let h8 = plugin_estimator(&samples, block, true, derive_seed(seed, 8)).unwrap();
    let h6 = plugin_estimator(&samples, block - 2, true, derive_seed(seed, 6)).unwrap();
    // two more steps add exactly one victim coordinate, so the two-block
    // increment is the per-victim rate
    let value = h8.estimate.value - h6.estimate.value;
    let stderr = (h8.estimate.stderr.unwrap().powi(2) + h6.estimate.stderr.unwrap().powi(2)).sqrt();
    let joint_rate = EntropyEstimate::new(
        value,
        value - 4.0 * stderr,
        value + 4.0 * stderr,
        Some(stderr),
        crate::formulas::Method::MonteCarlo,
    );
    let joint_rate_pass = (value - 1.0).abs() <= 4.0 * stderr;

    let product_samples: Vec<(Vec<Symbol>, Vec<Symbol>)> = (0..n_samples)
        .map(|_| {
            let (x, y) = sample_pair(khat, ktilde, block, &mut rng);
            let m: Vec<Symbol> = x.iter().zip(&y).map(|(&a, &b)| a * b).collect();
            (m, vec![0; block])
        })
        .collect();
    let product_entropy = plugin_estimator(&product_samples, block, false, derive_seed(seed, 2))
        .unwrap()
        .estimate
        .value;
    let product_zero_pass = product_entropy <= 0.01;

    SurvivorsVictimsReport {
        identity_windows,
        split_identity_mismatches,
        product_identity_mismatches,
        joint_rate,
        product_entropy,
        joint_rate_pass,
        product_zero_pass,
    }
}

fn sample_pair<R: Rng>(
    khat: ComponentMeasure,
    ktilde: ComponentMeasure,
    len: usize,
    rng: &mut R,
) -> (Vec<Symbol>, Vec<Symbol>) {
    let phase: usize = rng.gen_range(0..2);
    let y: Vec<Symbol> = (0..len).map(|i| ((i + phase) % 2) as Symbol).collect();
    let x: Vec<Symbol> = y
        .iter()
        .map(|&yi| {
            if yi == 1 {
                khat.sample(rng)
            } else {
                ktilde.sample(rng)
            }
        })
        .collect();
    (x, y)
}

/// Indicator word of the integers free of divisors from `b`, over one period.
#[derive(Debug, Clone)]
pub struct BfreeIndicator {
    /// One full period `lcm(b)` of the indicator, starting at residue 0.
    pub word: Vec<Symbol>,
    pub period: u64,
    pub theta: f64,
    /// Uniform-phase orbit model of the word (reduced to its primitive
    /// period).
    pub orbit: ProcessModel,
}

pub fn bfree_indicator(b: &[u64]) -> Result<BfreeIndicator> {
    if b.is_empty() || b.iter().any(|&d| d < 2) {
        return Err(Error::InvalidArgument(
            "divisor set must be nonempty with all elements at least 2".into(),
        ));
    }
    let mut period: u64 = 1;
    for &d in b {
        let g = gcd(period, d);
        period = period
            .checked_mul(d / g)
            .ok_or(Error::LcmOverflow)?;
    }
    if period > (1 << 24) {
        return Err(Error::LcmOverflow);
    }
    let word: Vec<Symbol> = (0..period)
        .map(|n| u16::from(b.iter().all(|&d| n % d != 0)))
        .collect();
    let ones = word.iter().filter(|&&s| s == 1).count();
    let theta = ones as f64 / period as f64;
    let orbit = ProcessModel::periodic_orbit(crate::models::Alphabet::binary(), word.clone())?;
    Ok(BfreeIndicator { word, period, theta, orbit })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
