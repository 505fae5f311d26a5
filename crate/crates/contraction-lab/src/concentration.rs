//! Tail bounds for Markov chains: MCMC averages after burn-in, McDiarmid-type
//! concentration for Markovian sequences, the literature baselines they are
//! compared with, and a Monte Carlo oracle.
//!
//! Products over time steps are accumulated in the log domain so long chains
//! (t = 10⁴ and beyond) neither overflow nor underflow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contraction::{exact_l2_contraction, lp_contraction_bound, lp_operator_bound, Direction};
use crate::error::{Error, Result};
use crate::markov::{check_len, MarkovKernel, ProbVector};
use crate::orlicz::young::is_inf_exponent;
use crate::orlicz::{conjugate_exponent, lp_norm};
use crate::par::{count_indexed, derive_seed, Exec};

/// A (possibly time-inhomogeneous) chain `X_1, …, X_t`.
///
/// `X_1 ~ start·K_1^{t0}`; step `i ≥ 2` uses `kernels[(i − 2) mod len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationScenario {
    pub kernels: Vec<MarkovKernel>,
    pub start: ProbVector,
    pub t: usize,
    pub t0: usize,
    pub eta: f64,
    pub p: f64,
}

impl ConcentrationScenario {
    pub fn homogeneous(kernel: MarkovKernel, start: ProbVector, t: usize, eta: f64, p: f64) -> Self {
        Self { kernels: vec![kernel], start, t, t0: 0, eta, p }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernels.is_empty() {
            return Err(Error::Empty);
        }
        let m = self.kernels[0].dim();
        for k in &self.kernels {
            check_len(m, k.dim())?;
        }
        check_len(m, self.start.len())?;
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if self.t < 1 {
            return Err(Error::InvalidParameter("chain length t must be at least 1".into()));
        }
        if !(self.p > 1.0) {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {}", self.p)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.kernels[0].dim()
    }

    /// Kernel producing `X_i` from `X_{i−1}`, for `i ≥ 2`.
    pub fn kernel_at(&self, i: usize) -> &MarkovKernel {
        &self.kernels[(i - 2) % self.kernels.len()]
    }

    pub fn initial(&self) -> ProbVector {
        self.kernels[0].t_step(self.t0).push(&self.start)
    }

    /// Exact marginals `P_1, …, P_t`.
    pub fn marginals(&self) -> Vec<ProbVector> {
        let mut out = Vec::with_capacity(self.t);
        out.push(self.initial());
        for i in 2..=self.t {
            let next = self.kernel_at(i).push(&out[i - 2]);
            out.push(next);
        }
        out
    }
}

/// A tail bound with its natural logarithm (the value itself may under- or overflow).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub value: f64,
    pub log_value: f64,
}

impl TailBound {
    fn from_log(log_value: f64) -> Self {
        Self { value: log_value.exp(), log_value }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ω_p = max_x ((1 − P(x))^p P(x)^{1−p} + 1 − P(x))^{1/p}`, the largest
/// `‖dδ_x/dP − 1‖_{L_p(P)}`.
pub fn omega_p(marginal: &ProbVector, p: f64) -> f64 {
    let mut best: f64 = 0.0;
    for x in 0..marginal.len() {
        let px = marginal.get(x);
        if px <= 0.0 {
            continue;
        }
        let rest = 1.0 - px;
        if rest <= 0.0 {
            continue;
        }
        let a = rest / px;
        let v = if is_inf_exponent(p) {
            a.max(1.0)
        } else {
            (log_add_exp(px.ln() + p * a.ln(), rest.ln()) / p).exp()
        };
        best = best.max(v);
    }
    best
}

/// `2^{1/q} exp(−2tη²/q) Π_{i=2}^t (c_i ω_p^i + 1)` with `c_i` the dual `L_p` bound of `K_i` at `P_{i−1}`.
pub fn markov_mcdiarmid_bound(scn: &ConcentrationScenario) -> Result<TailBound> {
    scn.validate()?;
    let p = scn.p;
    let q = conjugate_exponent(p);
    let t = scn.t as f64;
    let mut log = (2f64).ln() / q - 2.0 * t * scn.eta * scn.eta / q;
    let mut prev = scn.initial();
    for i in 2..=scn.t {
        let k = scn.kernel_at(i);
        if let Some(x) = (0..prev.len()).find(|&x| prev.get(x) <= 0.0) {
            return Err(Error::ZeroMass { state: x });
        }
        let c = lp_contraction_bound(k, &prev, p, p, Direction::Dual)?.value;
        log += (c * omega_p(&prev, p)).ln_1p();
        prev = k.push(&prev);
    }
    Ok(TailBound::from_log(log))
}

/// Doubly-stochastic form with the contraction factor clamped at 1:
/// `2^{1/q} e^{−2tη²/q} ((min{S, 1}((m−1)^p/m + (m−1)/m))^{1/p} + 1)^{t−1}`,
/// `S = Σ_j (Σ_i |λ_{j,i} − 1/m|^q)^{p/q}`.
pub fn doubly_stochastic_concentration(lambda: &MarkovKernel, t: usize, eta: f64, p: f64) -> Result<TailBound> {
    let log_factor = doubly_stochastic_log_factor(lambda, p)?;
    let q = conjugate_exponent(p);
    let tf = t as f64;
    Ok(TailBound::from_log(
        (2f64).ln() / q - 2.0 * tf * eta * eta / q + (tf - 1.0) * log_factor,
    ))
}

/// `log((min{S,1}·ω^p)^{1/p} + 1)` for the uniform marginal.
fn doubly_stochastic_log_factor(lambda: &MarkovKernel, p: f64) -> Result<f64> {
    let b = crate::contraction::doubly_stochastic_bound(lambda, p)?.value;
    let m = lambda.dim() as f64;
    let inner = if is_inf_exponent(p) {
        b.min(1.0) * (m - 1.0).max(1.0)
    } else {
        let log_s = (p * b.ln()).min(0.0);
        let log_w = log_add_exp(p * (m - 1.0).ln() - m.ln(), ((m - 1.0) / m).ln());
        ((log_s + log_w) / p).exp()
    };
    Ok(inner.ln_1p())
}

/// Prior-work doubly-stochastic bound `2^{1/q} e^{−2tη²/q} m^{(t−1)/q}`.
pub fn doubly_stochastic_concentration_old(m: usize, t: usize, eta: f64, p: f64) -> TailBound {
    let q = conjugate_exponent(p);
    let tf = t as f64;
    TailBound::from_log((2f64).ln() / q - 2.0 * tf * eta * eta / q + (tf - 1.0) * (m as f64).ln() / q)
}

/// Leading-order `η` thresholds above which each doubly-stochastic bound decays: (ours, old).
pub fn doubly_stochastic_thresholds(lambda: &MarkovKernel, p: f64) -> Result<(f64, f64)> {
    let q = conjugate_exponent(p);
    let ours = (q * doubly_stochastic_log_factor(lambda, p)? / 2.0).sqrt();
    Ok((ours, ((lambda.dim() as f64).ln() / 2.0).sqrt()))
}

/// General-kernel thresholds `η_1 = √(ln m / 2)` (prior work) and
/// `η_2 = √(q ln(c ω_p + 1)/2)` at the stationary marginal.
pub fn stationary_thresholds(k: &MarkovKernel, p: f64) -> Result<(f64, f64)> {
    let pi = k.stationary()?;
    let q = conjugate_exponent(p);
    let c = lp_contraction_bound(k, &pi, p, p, Direction::Dual)?.value;
    let eta1 = ((k.dim() as f64).ln() / 2.0).sqrt();
    let eta2 = (q * (c * omega_p(&pi, p)).ln_1p() / 2.0).sqrt();
    Ok((eta1, eta2))
}

/// `ϑ = |1 − λ − κ|`.
pub fn theta(lambda: f64, kappa: f64) -> f64 {
    (1.0 - lambda - kappa).abs()
}

/// Per-step factor of the binary bound exactly as stated, `(2ϑκ + λ)/λ`; it presumes `κ ≥ λ`.
pub fn binary_sdpi_factor_literal(lambda: f64, kappa: f64) -> f64 {
    (2.0 * theta(lambda, kappa) * kappa + lambda) / lambda
}

/// Per-step factor with the states relabelled so that the rarer stationary state is used:
/// `(2ϑ·max + min)/min` over `{λ, κ}`.
pub fn binary_sdpi_factor(lambda: f64, kappa: f64) -> f64 {
    let (hi, lo) = (lambda.max(kappa), lambda.min(kappa));
    (2.0 * theta(lambda, kappa) * hi + lo) / lo
}

/// Hypercontractivity factor `(λ + κ)/λ` as stated.
pub fn binary_hyper_factor_literal(lambda: f64, kappa: f64) -> f64 {
    (lambda + kappa) / lambda
}

pub fn binary_hyper_factor(lambda: f64, kappa: f64) -> f64 {
    (lambda + kappa) / lambda.min(kappa)
}

/// `2 exp(−2tη² + (t − 1) ln factor)`.
pub fn binary_tail_from_factor(factor: f64, t: usize, eta: f64) -> TailBound {
    let tf = t as f64;
    TailBound::from_log((2f64).ln() - 2.0 * tf * eta * eta + (tf - 1.0) * factor.ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiteratureBaselines {
    pub paulin: f64,
    pub fan: f64,
    pub marton: f64,
}

pub fn literature_baselines(lambda: f64, kappa: f64, t: usize, eta: f64) -> LiteratureBaselines {
    let s = lambda + kappa;
    let th = theta(lambda, kappa);
    let tf = t as f64;
    let e2 = eta * eta;
    LiteratureBaselines {
        paulin: (-(s * s) * tf * e2 / (1.0 - th.powf(tf)).powi(2)).exp(),
        fan: (-tf * e2 * s / (2.0 - s)).exp(),
        marton: (-2.0 * tf * e2 * s * s + 2.0 * tf * s * (tf * 2f64.ln() / 2.0).sqrt()).exp(),
    }
}

/// The three `η²` thresholds (finite-t leading terms) above which the literature
/// bounds are worse than the binary SDPI bound, with `ϖ = ln(2ϑκ/λ)`.
pub fn literature_crossover(lambda: f64, kappa: f64, t: usize) -> [f64; 3] {
    let th = theta(lambda, kappa);
    let w = (2.0 * th * kappa / lambda).ln();
    let a = (1.0 - th.powf(t as f64)).powi(2);
    [w * a / (2.0 * a - (1.0 - th).powi(2)), w * (1.0 + th) / (2.0 * th), w.sqrt() / (1.0 - th * th)]
}

/// Exact finite-`t` thresholds: `binary_tail_from_factor(factor, t, η)` is below
/// (Paulin, Fan, Marton) iff `η²` exceeds the corresponding entry (`∞` if never).
pub fn literature_crossover_exact(lambda: f64, kappa: f64, t: usize, factor: f64) -> [f64; 3] {
    let s = lambda + kappa;
    let th = theta(lambda, kappa);
    let tf = t as f64;
    let c = 2f64.ln() + (tf - 1.0) * factor.ln();
    let solve = |num: f64, den: f64| if den > 0.0 { (num / den).max(0.0) } else { f64::INFINITY };
    [
        solve(c, tf * (2.0 - s * s / (1.0 - th.powf(tf)).powi(2))),
        solve(c, tf * (2.0 - s / (2.0 - s))),
        solve(c - 2.0 * tf * s * (tf * 2f64.ln() / 2.0).sqrt(), 2.0 * tf * (1.0 - s * s)),
    ]
}

/// Rate and `t0`-step contraction feeding the MCMC bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcChain {
    /// `L_2` contraction `γ` (for BSC(λ), `|1 − 2λ|`).
    pub gamma: f64,
    /// Exponent rate `(1 − γ)/(1 + γ)`, equal to `λ/(1−λ)` for the BSC.
    pub rate: f64,
    /// Bound on `‖(K − 1_π)^{t0}‖_{L_p → L_p}`.
    pub contraction_t0: f64,
}

impl McmcChain {
    pub fn bsc(lambda: f64, t0: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(Error::InvalidParameter(format!("BSC crossover must lie in (0, 1/2), got {lambda}")));
        }
        let gamma = 1.0 - 2.0 * lambda;
        Ok(Self { gamma, rate: lambda / (1.0 - lambda), contraction_t0: gamma.powf(t0 as f64) })
    }

    /// General kernel: `γ` from the exact `L_2` contraction, `t0` factor from the best
    /// of the iterated one-step bound and the dual bound on `K^{t0}`.
    pub fn from_kernel(k: &MarkovKernel, p: f64, t0: usize) -> Result<Self> {
        let pi = k.stationary()?;
        let gamma = exact_l2_contraction(k, &pi)?;
        let beta = lp_operator_bound(k, &pi, p)?;
        let direct = lp_contraction_bound(&k.t_step(t0), &pi, p, p, Direction::Dual)?.value;
        Ok(Self { gamma, rate: (1.0 - gamma) / (1.0 + gamma), contraction_t0: beta.powf(t0 as f64).min(direct) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcBounds {
    pub ours: f64,
    pub fan: f64,
}

/// MCMC tail bounds after `t0` burn-in steps. `start_dev = ‖dν/dπ − 1‖_{L_p(π)}`,
/// `start_sup = ‖dν/dπ‖_{L_∞(π)}` (only used when `p = ∞`).
pub fn mcmc_tail_bounds(chain: &McmcChain, t: usize, t0: usize, eta: f64, p: f64, start_dev: f64, start_sup: f64) -> McmcBounds {
    let q = conjugate_exponent(p);
    let tf = t as f64;
    let base = -2.0 * chain.rate * tf * eta * eta;
    let ours = base.exp() + chain.contraction_t0 * (base / q).exp() * start_dev;
    let g = chain.gamma;
    let t0f = t0 as f64;
    let c = if is_inf_exponent(p) {
        start_sup
    } else if p <= 2.0 {
        let pre = if p < 2.0 { 2f64.powf(2.0 / p) } else { 1.0 };
        1.0 + pre * g.powf(2.0 * t0f / q) * start_dev
    } else {
        1.0 + 2f64.powf(2.0 / q) * g.powf(2.0 * t0f / p) * start_dev
    };
    McmcBounds { ours, fan: c * (base / q).exp() }
}

/// Start-measure deviations `(‖dν/dπ − 1‖_{L_p(π)}, ‖dν/dπ‖_∞)`.
pub fn start_deviation(nu: &ProbVector, pi: &ProbVector, p: f64) -> Result<(f64, f64)> {
    let r = nu.density_wrt(pi)?;
    let c: Vec<f64> = r.iter().map(|v| v - 1.0).collect();
    let sup = r.iter().zip(pi.as_slice()).filter(|(_, &w)| w > 0.0).map(|(v, _)| *v).fold(0.0, f64::max);
    Ok((lp_norm(&c, pi, p), sup))
}

/// Smallest burn-in `t0 ≥ log((δ − K)/(KM))/log|1 − 2λ|` with `K = e^{−2λtη²/(1−λ)}`.
pub fn burn_in_lower_bound(delta: f64, t: usize, eta: f64, lambda: f64, m: f64) -> Result<f64> {
    let k = (-2.0 * lambda * t as f64 * eta * eta / (1.0 - lambda)).exp();
    if delta <= k {
        return Err(Error::DeltaTooSmall { delta, k });
    }
    if delta >= k * (1.0 + m) || (1.0 - 2.0 * lambda).abs() == 0.0 {
        return Ok(0.0);
    }
    Ok((((delta - k) / (k * m)).ln() / (1.0 - 2.0 * lambda).abs().ln()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalTail {
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

const WILSON_Z: f64 = 1.959_963_984_540_054;

pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let ph = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn sample(cum: &[f64], u: f64) -> usize {
    cum.iter().position(|c| u < *c).unwrap_or(cum.len() - 1)
}

fn cumulative(row: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    row.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    /// `|f − centre| ≥ η`.
    TwoSided,
    /// `f − centre ≥ η`.
    Upper,
}

fn simulate(
    scn: &ConcentrationScenario,
    g: &[f64],
    centre: f64,
    side: TailSide,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<EmpiricalTail> {
    scn.validate()?;
    check_len(scn.dim(), g.len())?;
    let start_cum = cumulative(scn.start.as_slice());
    let kernels_cum: Vec<Vec<Vec<f64>>> =
        scn.kernels.iter().map(|k| k.rows().iter().map(|r| cumulative(r)).collect()).collect();
    let first = &kernels_cum[0];
    let nk = kernels_cum.len();
    let t = scn.t;
    let hits = count_indexed(exec, trials as usize, |trial| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
        let mut x = sample(&start_cum, rng.random::<f64>());
        for _ in 0..scn.t0 {
            x = sample(&first[x], rng.random::<f64>());
        }
        let mut sum = g[x];
        for i in 2..=t {
            x = sample(&kernels_cum[(i - 2) % nk][x], rng.random::<f64>());
            sum += g[x];
        }
        let dev = sum / t as f64 - centre;
        match side {
            TailSide::TwoSided => u64::from(dev.abs() >= scn.eta),
            TailSide::Upper => u64::from(dev >= scn.eta),
        }
    });
    let (wilson_lo, wilson_hi) = wilson_interval(hits, trials);
    Ok(EmpiricalTail { hits, trials, frequency: hits as f64 / trials as f64, wilson_lo, wilson_hi })
}

/// Monte Carlo estimate of `P(|f − P_⊗(f)| ≥ η)` for `f = (1/t) Σ g(X_i)`, `g ∈ [0, 1]`,
/// centred at the product-of-marginals mean.
pub fn empirical_tail(scn: &ConcentrationScenario, g: &[f64], trials: u64, seed: u64, exec: Exec) -> Result<EmpiricalTail> {
    if g.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidParameter("g must take values in [0, 1]".into()));
    }
    let centre = scn.marginals().iter().map(|m| m.expect(g)).sum::<f64>() / scn.t as f64;
    simulate(scn, g, centre, TailSide::TwoSided, trials, seed, exec)
}

/// Monte Carlo estimate of `P((1/t) Σ_{i=t0+1}^{t0+t} g(X_i) − π(g) ≥ η)`.
pub fn empirical_mcmc_tail(scn: &ConcentrationScenario, g: &[f64], trials: u64, seed: u64, exec: Exec) -> Result<EmpiricalTail> {
    let pi = scn.kernels[0].stationary()?;
    simulate(scn, g, pi.expect(g), TailSide::Upper, trials, seed, exec)
}
