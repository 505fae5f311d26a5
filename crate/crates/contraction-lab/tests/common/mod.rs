//! Randomized property suites shared by `properties` and `acceptance`.
//!
//! Each case draws a 64-bit seed (plus a few scalar parameters) and builds its
//! kernels, measures and functions from a ChaCha stream seeded by it.

#![allow(dead_code)]

use contraction_lab::contraction::{brute_force_contraction, maximize_ratio, orlicz_contraction_bound, BruteForceOptions, Direction};
use contraction_lab::markov::random_stochastic_with;
use contraction_lab::orlicz::{divergence, holder_product_bound, norm, Divergence, Flavor, YoungFunction};
use contraction_lab::par::Exec;
use contraction_lab::{MarkovKernel, ProbVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const CASES: u32 = 1000;

pub const SUITES: [&str; 8] = [
    "dpi",
    "holder",
    "fenchel_young",
    "contraction_le_one",
    "adjointness",
    "kstar_rnd",
    "recursion_power",
    "sandwich",
];

fn config(salt: u64) -> Config {
    Config {
        cases: CASES,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0xC0FFEE ^ salt),
        max_shrink_iters: 64,
        ..Config::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_vec(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..m).map(|_| StandardNormal.sample(rng)).collect()
}

/// Random kernel with a unique stationary law; retried on the rare degenerate draw.
fn kernel_and_pi(m: usize, rng: &mut ChaCha8Rng) -> (MarkovKernel, ProbVector) {
    loop {
        let k = random_stochastic_with(m, rng).unwrap();
        if let Ok(pi) = k.stationary() {
            if pi.min_mass() > 1e-9 {
                return (k, pi);
            }
        }
    }
}

/// All built-in Young functions; `convex_only` drops the two non-convex ones.
fn young(idx: usize, p: f64, convex_only: bool) -> YoungFunction {
    let all = [
        YoungFunction::Power(p),
        YoungFunction::ScaledPower(p),
        YoungFunction::SubGaussian,
        YoungFunction::EntropyPhi,
        YoungFunction::TildePhi,
        YoungFunction::HeavyTail { k: 2.0 + p, m: 1.5 + p / 2.0 },
    ];
    let n = if convex_only { 4 } else { all.len() };
    all[idx % n].clone()
}

fn small_search(seed: u64) -> BruteForceOptions {
    BruteForceOptions { restarts: 4, iterations: 60, seed, exec: Exec::Sequential }
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn dpi(seed: u64, m: usize, alpha: f64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let k = random_stochastic_with(m, &mut r).unwrap();
    let mu = ProbVector::random(m, &mut r);
    let nu = ProbVector::random(m, &mut r);
    let kinds = [
        Divergence::Kl,
        Divergence::Chi2,
        Divergence::Tv,
        Divergence::Hellinger(alpha),
        Divergence::HAlpha(alpha + 1.0),
    ];
    for kind in kinds {
        let before = divergence(&nu, &mu, kind).unwrap();
        let after = divergence(&k.push(&nu), &k.push(&mu), kind).unwrap();
        if after > before + 1e-10 * (1.0 + before) {
            return Err(fail(format!("{kind}: {after} > {before}")));
        }
    }
    Ok(())
}

pub fn holder(seed: u64, m: usize, idx: usize, p: f64) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let mu = ProbVector::random(m, &mut r);
    let scale = r.random_range(0.1..3.0);
    let u: Vec<f64> = normal_vec(m, &mut r).into_iter().map(|v| v * scale).collect();
    let v: Vec<f64> = normal_vec(m, &mut r);
    let psi = young(idx, p, false);
    let (lhs, rhs) = holder_product_bound(&u, &v, &mu, &psi).map_err(|e| fail(e.to_string()))?;
    if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
        return Err(fail(format!("{psi}: {lhs} > {rhs}")));
    }
    Ok(())
}

pub fn fenchel_young(idx: usize, p: f64, x: f64, y: f64) -> Result<(), TestCaseError> {
    let psi = young(idx, p, false);
    let lhs = x * y;
    let rhs = psi.eval(x) + psi.conjugate(y);
    if lhs > rhs + 1e-9 * (1.0 + rhs.abs()) {
        return Err(fail(format!("{psi}: x y = {lhs} > {rhs} at x = {x}, y = {y}")));
    }
    Ok(())
}

pub fn contraction_le_one(seed: u64, m: usize, idx: usize, p: f64, amemiya: bool) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let (k, pi) = kernel_and_pi(m, &mut r);
    let f = normal_vec(m, &mut r);
    let psi = young(idx, p, true);
    let flavor = if amemiya { Flavor::Amemiya } else { Flavor::Luxemburg };
    let before = norm(&f, &pi, &psi, flavor).unwrap();
    let after = norm(&k.apply(&f), &pi, &psi, flavor).unwrap();
    if after > before * (1.0 + 1e-9) + 1e-12 {
        return Err(fail(format!("{psi} {flavor:?}: {after} > {before}")));
    }
    // Constants are fixed points.
    let c = vec![1.7; m];
    let kc = k.apply(&c);
    if kc.iter().any(|v| (v - 1.7).abs() > 1e-12) {
        return Err(fail("K does not fix constants".into()));
    }
    Ok(())
}

pub fn adjointness(seed: u64, m: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let k = random_stochastic_with(m, &mut r).unwrap();
    let mu = ProbVector::random(m, &mut r);
    let mk = k.push(&mu);
    let ks = k.dual(&mu).unwrap();
    let kss = ks.dual(&mk).unwrap();
    let diff = (kss.matrix() - k.matrix()).abs().max();
    if diff > 1e-9 {
        return Err(fail(format!("(K*)* differs from K by {diff}")));
    }
    let f = normal_vec(m, &mut r);
    let h = normal_vec(m, &mut r);
    // ⟨Kf, h⟩_μ = ⟨f, K*h⟩_{μK}
    let kf = k.apply(&f);
    let ksh = ks.apply(&h);
    let lhs: f64 = (0..m).map(|x| mu.get(x) * kf[x] * h[x]).sum();
    let rhs: f64 = (0..m).map(|y| mk.get(y) * f[y] * ksh[y]).sum();
    if !close(lhs, rhs, 1e-10) {
        return Err(fail(format!("<Kf, h> = {lhs} but <f, K*h> = {rhs}")));
    }
    Ok(())
}

pub fn kstar_rnd(seed: u64, m: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let k = random_stochastic_with(m, &mut r).unwrap();
    let mu = ProbVector::random(m, &mut r);
    let nu = ProbVector::random(m, &mut r);
    let ks = k.dual(&mu).unwrap();
    let lhs = ks.apply(&nu.density_wrt(&mu).unwrap());
    let rhs = k.push(&nu).density_wrt(&k.push(&mu)).unwrap();
    for (a, b) in lhs.iter().zip(&rhs) {
        if (a - b).abs() > 1e-10 * (1.0 + b.abs()) {
            return Err(fail(format!("K*(dν/dμ) = {lhs:?} vs dνK/dμK = {rhs:?}")));
        }
    }
    Ok(())
}

pub fn recursion_power(seed: u64, m: usize, p: f64, t: usize, subgaussian: bool) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let (k, pi) = kernel_and_pi(m, &mut r);
    let psi = if subgaussian { YoungFunction::SubGaussian } else { YoungFunction::Power(p) };
    let one = orlicz_contraction_bound(&k, &pi, &psi, &psi, Flavor::Luxemburg, Direction::Forward).unwrap().value;
    let bf = brute_force_contraction(&k.t_step(t), &pi, &psi, &psi, Flavor::Luxemburg, Direction::Forward, &small_search(seed))
        .unwrap();
    if bf > one.powi(t as i32) + 1e-8 {
        return Err(fail(format!("{psi}, t = {t}: brute force {bf} > bound^t {}", one.powi(t as i32))));
    }
    Ok(())
}

pub fn sandwich(seed: u64, m: usize, p: f64, t: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let (k, pi) = kernel_and_pi(m, &mut r);
    let psi = YoungFunction::Power(p);
    let kt = k.t_step(t);
    let opts = small_search(seed);
    let centred = brute_force_contraction(&kt, &pi, &psi, &psi, Flavor::Luxemburg, Direction::Forward, &opts).unwrap();
    let full = maximize_ratio(
        m,
        None,
        |f| {
            let mean = pi.expect(f);
            let g: Vec<f64> = kt.apply(f).into_iter().map(|v| v - mean).collect();
            norm(&g, &pi, &psi, Flavor::Luxemburg).unwrap() / norm(f, &pi, &psi, Flavor::Luxemburg).unwrap()
        },
        &opts,
    );
    if centred > full + 1e-6 || full > 2.0 * centred + 1e-6 {
        return Err(fail(format!("p = {p}, t = {t}: centred {centred}, full {full}")));
    }
    Ok(())
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Runs one suite at [`CASES`] cases.
pub fn run_suite(name: &str) -> Result<(), String> {
    let salt = SUITES.iter().position(|s| *s == name).expect("unknown suite") as u64;
    let mut runner = TestRunner::new(config(salt));
    match name {
        "dpi" => report(runner.run(&(any::<u64>(), 2usize..=6, 0.2f64..4.0), |(s, m, a)| {
            dpi(s, m, if (a - 1.0).abs() < 1e-3 { 1.5 } else { a })
        })),
        "holder" => report(runner.run(&(any::<u64>(), 2usize..=6, 0usize..6, 1.2f64..5.0), |(s, m, i, p)| holder(s, m, i, p))),
        "fenchel_young" => report(runner.run(&(0usize..6, 1.2f64..5.0, 0.0f64..4.0, 0.0f64..20.0), |(i, p, x, y)| {
            fenchel_young(i, p, x, y)
        })),
        "contraction_le_one" => report(runner.run(&(any::<u64>(), 2usize..=6, 0usize..4, 1.1f64..6.0, any::<bool>()), |(s, m, i, p, a)| {
            contraction_le_one(s, m, i, p, a)
        })),
        "adjointness" => report(runner.run(&(any::<u64>(), 2usize..=6), |(s, m)| adjointness(s, m))),
        "kstar_rnd" => report(runner.run(&(any::<u64>(), 2usize..=6), |(s, m)| kstar_rnd(s, m))),
        "recursion_power" => report(runner.run(&(any::<u64>(), 2usize..=4, 1.2f64..6.0, 1usize..=3, prop::bool::weighted(0.1)), |(s, m, p, t, g)| {
            recursion_power(s, m, p, t, g)
        })),
        "sandwich" => report(runner.run(&(any::<u64>(), 2usize..=4, 1.2f64..6.0, 1usize..=3), |(s, m, p, t)| sandwich(s, m, p, t))),
        _ => Err(format!("unknown suite {name}")),
    }
}
