//! Acceptance gate: one test per criterion, each printing a single
//! `CRITERION n: PASS` line (visible with `--nocapture`) and enforcing its
//! wall-clock budget. Reference constants below were derived with the
//! brute-force block-entropy oracle in this crate and are frozen here.

use std::time::Instant;

use prodentropy::demos::{
    bfree_indicator, dependent_zero_demo, survivors_victims_demo, ComponentMeasure,
};
use prodentropy::entropy::conditional_entropy_on;
use prodentropy::formulas::{
    c4_bounds, determinism_profile, exchangeable_product_entropy, markov_determinism,
    markov_product_entropy, relative_entropy_rate_a, theorem_b_upper_markov,
};
use prodentropy::models::{Alphabet, MarkovChain, ProcessModel, ZeroOneView};
use prodentropy::oracle::exact_conditional_block_entropy;
use prodentropy::presets::{permutation_chain, sliding_pair_model, two_state_chain};
use prodentropy::returns::{
    birkhoff_check, induced_invariance_check, kac_check, poincare_check, r1_distribution,
};
use rand::Rng;

/// Frozen oracle-derived references for the sticky two-state chain
/// (stay-probability 0.9, uniform stationary law) observed through the
/// alternating arrival pattern `01` (theta = 1/2).
const STICKY_PRODUCT_RATE: f64 = 0.3400385228641399; // = 0.5 * H(X_2 | X_0)
const STICKY_UPPER_BOUND: f64 = 0.4045170582267106; // bridge-term upper bound
const STICKY_C4_LOWER: f64 = 0.2344977967946406; // 0.5 * entropy rate
const STICKY_C4_UPPER: f64 = 0.5; // 0.5 * H(X_0)

fn alternating_y() -> ZeroOneView {
    ZeroOneView::new(
        ProcessModel::periodic_orbit(Alphabet::binary(), vec![0, 1]).unwrap(),
    )
    .unwrap()
}

fn random_chain<R: Rng>(rng: &mut R, states: usize) -> MarkovChain {
    let transition: Vec<Vec<f64>> = (0..states)
        .map(|_| {
            let row: Vec<f64> = (0..states).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect();
    MarkovChain::from_transition(Alphabet::integers(states).unwrap(), transition).unwrap()
}

fn random_y<R: Rng>(rng: &mut R) -> ZeroOneView {
    let model = if rng.gen_bool(0.5) {
        let len = rng.gen_range(1..=6);
        let mut word: Vec<u16> = (0..len).map(|_| u16::from(rng.gen_bool(0.5))).collect();
        if word.iter().all(|&b| b == 0) {
            word[rng.gen_range(0..len)] = 1;
        }
        ProcessModel::periodic_orbit(Alphabet::binary(), word).unwrap()
    } else {
        ProcessModel::iid_bernoulli(rng.gen_range(0.1..0.9)).unwrap()
    };
    ZeroOneView::new(model).unwrap()
}

#[test]
fn criterion_1_pair_fixture_is_one_bit_everywhere() {
    let t0 = Instant::now();
    let x = sliding_pair_model();
    let y = alternating_y();
    let budget = 1 << 24;

    // exact conditional rate via the arrival-position formula
    let a = relative_entropy_rate_a(&x, &y, 8, 0, 0, budget).unwrap();
    assert!((a.value - 1.0).abs() < 1e-9, "A-path value {}", a.value);

    // closed form on the lifted pair chain
    let chain = x.as_markov().unwrap();
    let law = r1_distribution(&y, None, 0, 0).unwrap();
    let ma = markov_product_entropy(&chain, &law, y.theta());
    assert!((ma.value - 1.0).abs() < 1e-9, "closed form {}", ma.value);

    // brute-force oracle: H_n / n for even block lengths up to 12
    for n in [2usize, 4, 6, 8, 10, 12] {
        let h = exact_conditional_block_entropy(&x, &y, n, budget).unwrap();
        assert!(
            (h / n as f64 - 1.0).abs() < 1e-9,
            "oracle H_{n}/{n} = {}",
            h / n as f64
        );
    }

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 10.0, "criterion 1 took {dt:.1}s, budget 10s");
    println!("CRITERION 1: PASS — pair fixture rate is 1.0 bit by formula, closed form, and oracle ({dt:.2}s)");
}

#[test]
fn criterion_2_sticky_chain_cross_validation() {
    let t0 = Instant::now();
    let chain = two_state_chain(0.1);
    let x = ProcessModel::markov(chain.clone());
    let y = alternating_y();
    let theta = y.theta();
    let budget = 1 << 24;

    let law = r1_distribution(&y, None, 0, 0).unwrap();
    let ma = markov_product_entropy(&chain, &law, theta);
    assert!(
        (ma.value - STICKY_PRODUCT_RATE).abs() < 1e-6,
        "closed form {} vs frozen {STICKY_PRODUCT_RATE}",
        ma.value
    );

    // oracle increments over one arrival period converge to the rate
    let h10 = exact_conditional_block_entropy(&x, &y, 10, budget).unwrap();
    let h12 = exact_conditional_block_entropy(&x, &y, 12, budget).unwrap();
    let increment = (h12 - h10) / 2.0;
    assert!(
        (increment - ma.value).abs() < 1e-3,
        "oracle increment {increment} vs {}",
        ma.value
    );

    let ub = theorem_b_upper_markov(&chain, &law, theta);
    assert!((ub.value - STICKY_UPPER_BOUND).abs() < 1e-6);
    assert!(ma.value <= ub.value + 1e-12, "upper bound must dominate");

    let c4 = c4_bounds(&x, theta);
    assert!((c4.lower - STICKY_C4_LOWER).abs() < 1e-9);
    assert!((c4.upper - STICKY_C4_UPPER).abs() < 1e-9);
    assert!(c4.lower - 1e-12 <= ma.value && ma.value <= c4.upper + 1e-12);

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "criterion 2 took {dt:.1}s, budget 60s");
    println!(
        "CRITERION 2: PASS — sticky chain: closed form {:.9}, oracle increment {:.9}, bound {:.9}, sandwich [{:.9}, {:.9}] ({dt:.2}s)",
        ma.value, increment, ub.value, c4.lower, c4.upper
    );
}

#[test]
fn criterion_3_randomized_sandwich_and_dominance() {
    let t0 = Instant::now();
    let mut rng = prodentropy::mc::seeded_rng(0xacce_55);
    let n_pairs = 120;
    for i in 0..n_pairs {
        let chain = random_chain(&mut rng, 2 + i % 2);
        let y = random_y(&mut rng);
        let theta = y.theta();
        let law = r1_distribution(&y, None, 0, 0).unwrap();
        let ma = markov_product_entropy(&chain, &law, theta);
        let ub = theorem_b_upper_markov(&chain, &law, theta);
        let c4 = c4_bounds(&ProcessModel::markov(chain), theta);
        assert!(
            c4.lower - 1e-9 <= ma.upper,
            "pair {i}: lower {} vs enclosure top {}",
            c4.lower,
            ma.upper
        );
        assert!(
            ma.value <= c4.upper + 1e-9,
            "pair {i}: value {} above upper {}",
            ma.value,
            c4.upper
        );
        assert!(
            ma.value <= ub.value + 1e-9,
            "pair {i}: value {} above bound {}",
            ma.value,
            ub.value
        );
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 120.0, "criterion 3 took {dt:.1}s, budget 120s");
    println!("CRITERION 3: PASS — {n_pairs} randomized chain/arrival pairs satisfy the sandwich and dominance with zero violations ({dt:.2}s)");
}

#[test]
fn criterion_4_exchangeable_mixtures_attain_lower_bound() {
    let t0 = Instant::now();
    let mut rng = prodentropy::mc::seeded_rng(0x6d69_78);
    let n_mixtures = 24;
    for i in 0..n_mixtures {
        let k = 2 + i % 2;
        let mut weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        let components: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let p = rng.gen_range(0.05..0.95);
                vec![1.0 - p, p]
            })
            .collect();
        let x = ProcessModel::exchangeable(Alphabet::binary(), weights, components).unwrap();
        let theta = rng.gen_range(0.2..0.8);
        let closed = exchangeable_product_entropy(&x, theta).unwrap();
        let c4 = c4_bounds(&x, theta);
        assert!(
            (closed.value - c4.lower).abs() < 1e-12,
            "mixture {i}: {} vs lower {}",
            closed.value,
            c4.lower
        );
        assert!(closed.value <= c4.upper + 1e-12);
    }

    // Monte Carlo arrival-position estimate against the exact truncated value.
    // By exchangeability the conditional entropy depends only on how many past
    // coordinates are observed, so the m-truncated target is computable
    // exactly from a contiguous joint marginal.
    let m = 4;
    let x = ProcessModel::exchangeable(
        Alphabet::binary(),
        vec![0.5, 0.5],
        vec![vec![0.8, 0.2], vec![0.2, 0.8]],
    )
    .unwrap();
    let theta = 0.5;
    let y = ZeroOneView::new(ProcessModel::iid_bernoulli(theta).unwrap()).unwrap();
    let mc = relative_entropy_rate_a(&x, &y, m, 20_000, 11, 1 << 20).unwrap();
    let indices: Vec<i64> = (-(m as i64)..=0).collect();
    let joint = x.marginal(&indices, 1 << 20).unwrap();
    let given: Vec<usize> = (0..m).collect();
    let truncated_exact = theta * conditional_entropy_on(&joint, &given).unwrap();
    let stderr = mc.stderr.expect("Monte Carlo estimate carries a standard error");
    assert!(
        (mc.value - truncated_exact).abs() < 4.0 * stderr,
        "MC {} vs exact truncated {} (stderr {})",
        mc.value,
        truncated_exact,
        stderr
    );
    // the truncated value is an upper bracket of the true rate
    let c4 = c4_bounds(&x, theta);
    assert!(truncated_exact >= c4.lower - 1e-12);

    let dt = t0.elapsed().as_secs_f64();
    println!("CRITERION 4: PASS — {n_mixtures} exchangeable mixtures attain the lower bound exactly; Monte Carlo matches the exact truncated value within 4 stderr ({dt:.2}s)");
}

#[test]
fn criterion_5_return_time_checks() {
    let t0 = Instant::now();
    for theta in [0.1, 0.25, 0.5] {
        let y = ZeroOneView::new(ProcessModel::iid_bernoulli(theta).unwrap()).unwrap();
        let kac = kac_check(&y, 100_000, 5);
        assert!(kac.pass, "Kac failed at theta {theta}: mean {} target {}", kac.mean, kac.target);
        let inv = induced_invariance_check(&y, 3, 100_000, 5, false);
        assert!(inv.pass, "invariance failed at theta {theta}: tv {}", inv.total_variation);
        let ctl = induced_invariance_check(&y, 3, 100_000, 5, true);
        assert!(!ctl.pass, "negative control must fail at theta {theta}");
        let frac = poincare_check(&y, (64.0 / theta) as usize, 20_000, 5);
        assert!(frac > 0.99, "recurrence fraction {frac} at theta {theta}");
    }

    // periodic arrivals: everything is exact
    let y = ZeroOneView::new(
        ProcessModel::periodic_orbit(Alphabet::binary(), vec![0, 0, 1, 0, 1]).unwrap(),
    )
    .unwrap();
    let kac = kac_check(&y, 0, 0);
    assert!(kac.exact && kac.pass);
    assert!((kac.mean - 1.0 / y.theta()).abs() < 1e-12);
    assert!((poincare_check(&y, 5, 0, 0) - 1.0).abs() < 1e-12);
    let inv = induced_invariance_check(&y, 4, 0, 0, false);
    assert!(inv.exact && inv.pass);

    let birkhoff = birkhoff_check(
        &ProcessModel::markov(two_state_chain(0.2)),
        1,
        1 << 16,
        5,
    );
    assert!(birkhoff.pass, "Birkhoff average {} vs {}", birkhoff.average, birkhoff.expectation);

    let dt = t0.elapsed().as_secs_f64();
    println!("CRITERION 5: PASS — Kac means, induced invariance (with failing negative control), recurrence, and Birkhoff averages all check out ({dt:.2}s)");
}

#[test]
fn criterion_6_determinism_diagnostics() {
    let t0 = Instant::now();
    let budget = 1 << 24;

    // deterministic rotation: the profile vanishes identically
    let perm = ProcessModel::markov(permutation_chain(4));
    let d = determinism_profile(&perm, 3, 3, budget).unwrap();
    for k in 0..=3 {
        for m in 1..=3 {
            assert!(d.d(k, m).abs() < 1e-12, "D({k},{m}) = {}", d.d(k, m));
        }
    }

    // sticky chain: the general-purpose profile matches the closed form
    let chain = two_state_chain(0.1);
    let sticky = ProcessModel::markov(chain.clone());
    let d = determinism_profile(&sticky, 3, 3, budget).unwrap();
    for k in 0..=3 {
        let want = markov_determinism(&chain, k);
        for m in 1..=3 {
            assert!(
                (d.d(k, m) - want).abs() < 1e-10,
                "D({k},{m}) = {} vs closed form {want}",
                d.d(k, m)
            );
        }
    }

    // pair fixture: single gaps are filled for free, double gaps cost 1 bit
    let pair = sliding_pair_model();
    let d = determinism_profile(&pair, 1, 3, budget).unwrap();
    for m in 1..=3 {
        assert!(d.d(0, m).abs() < 1e-10, "D(0,{m}) = {}", d.d(0, m));
        assert!((d.d(1, m) - 1.0).abs() < 1e-10, "D(1,{m}) = {}", d.d(1, m));
    }

    let dt = t0.elapsed().as_secs_f64();
    println!("CRITERION 6: PASS — determinism profiles: zero for the rotation, closed-form match for the sticky chain, 0/1 pattern for the pair fixture ({dt:.2}s)");
}

#[test]
fn criterion_7_demo_constructions() {
    let t0 = Instant::now();

    // dependent factors: zero product entropy with positive factor entropy
    let z = ProcessModel::iid_bernoulli(0.5).unwrap();
    let w = ProcessModel::periodic_orbit(Alphabet::binary(), vec![0, 1]).unwrap();
    let dz = dependent_zero_demo(&z, &w, 2_000, 3).unwrap();
    assert!(dz.product_always_zero);
    assert_eq!(dz.h_m, 0.0);
    assert!(dz.h_x_positive, "H(X) enclosure [{}, {}]", dz.h_x.lower, dz.h_x.upper);
    assert!(dz.h_x.lower > 0.2);

    // survivors/victims factorization
    let sv = survivors_victims_demo(ComponentMeasure::AllZeros, ComponentMeasure::FairCoin, 50_000, 7);
    assert_eq!(sv.split_identity_mismatches, 0);
    assert_eq!(sv.product_identity_mismatches, 0);
    assert!(sv.joint_rate_pass, "joint per-victim rate {} not within 4 stderr of 1 bit", sv.joint_rate.value);
    assert!(sv.product_zero_pass && sv.product_entropy <= 0.01);

    // divisor-free indicator orbits
    let b2 = bfree_indicator(&[2]).unwrap();
    assert_eq!(b2.word, vec![0, 1]);
    assert!((b2.theta - 0.5).abs() < 1e-12);
    let b23 = bfree_indicator(&[2, 3]).unwrap();
    assert_eq!(b23.word, vec![0, 1, 0, 0, 0, 1]);
    assert!((b23.theta - 1.0 / 3.0).abs() < 1e-12);
    let b24 = bfree_indicator(&[2, 4]).unwrap();
    assert!((b24.theta - 0.5).abs() < 1e-12, "redundant divisor must not change the density");

    let dt = t0.elapsed().as_secs_f64();
    println!("CRITERION 7: PASS — dependent-zero, survivors/victims, and divisor-free demos behave as constructed ({dt:.2}s)");
}

#[test]
fn criterion_8_asymptotics_via_finite_certificates() {
    let t0 = Instant::now();
    // Limit statements are exercised through monotone finite-n certificates
    // rather than numerical limits: per-symbol block entropies decrease
    // toward the rate and stay above it at every n.
    let x = ProcessModel::markov(two_state_chain(0.1));
    let y = alternating_y();
    let mut prev = f64::INFINITY;
    for n in [2usize, 4, 6, 8] {
        let h = exact_conditional_block_entropy(&x, &y, n, 1 << 24).unwrap() / n as f64;
        assert!(h <= prev + 1e-12, "H_{n}/{n} = {h} not monotone");
        assert!(h >= STICKY_PRODUCT_RATE - 1e-9, "H_{n}/{n} = {h} fell below the rate");
        prev = h;
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("CRITERION 8: PASS — asymptotic claims are covered by monotone finite-n certificates and the property suites ({dt:.2}s)");
}
