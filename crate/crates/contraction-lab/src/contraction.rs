//! Upper bounds on contraction coefficients of Markov kernels, the classical
//! baselines they are compared with, and oracles that compute (or lower-bound)
//! the true coefficients.
//!
//! The nested-norm bound for the forward operator is
//!
//! ```text
//! ‖K‖_{L_φ^N(μK) → L_ψ^N(μ)} ≤ ‖ ‖g_X − 1‖_{L_{φ*}^{N*}(μK)} ‖_{L_ψ^N(μ)}
//! ```
//!
//! on mean-zero functions, where `g_x = dK(·|x)/dμK` and `N*` swaps the
//! Amemiya and Luxemburg flavors. The dual bound exchanges the roles of `μ` and
//! `μK` and uses `g_y = dK*(·|y)/dμ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::markov::{check_len, MarkovKernel, ProbVector};
use crate::orlicz::young::is_inf_exponent;
use crate::orlicz::{conjugate_exponent, lp_norm, norm, Flavor, YoungFunction};
use crate::par::{derive_seed, map_indexed, Exec};

/// Stationarity tolerance for operations that require `π K = π`.
pub const STATIONARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Dual,
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fwd" | "forward" => Ok(Direction::Forward),
            "dual" => Ok(Direction::Dual),
            _ => Err(Error::InvalidParameter(format!("unknown direction '{s}' (expected fwd or dual)"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Dual => "dual",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OrliczNested,
    LpNested,
    DoublyStochastic,
    TvEssSup,
    RieszThorin,
    Stein,
    UltraMixing,
    ExactL2,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::OrliczNested => "orlicz_nested",
            Method::LpNested => "lp_nested",
            Method::DoublyStochastic => "doubly_stochastic",
            Method::TvEssSup => "tv_ess_sup",
            Method::RieszThorin => "riesz_thorin",
            Method::Stein => "stein",
            Method::UltraMixing => "ultra_mixing",
            Method::ExactL2 => "exact_l2",
            Method::BruteForce => "brute_force",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionBound {
    pub value: f64,
    pub method: Method,
}

impl ContractionBound {
    /// Bounds above 1 say nothing about contraction; they are still reported.
    pub fn is_vacuous(&self) -> bool {
        self.value > 1.0
    }
}

/// Nested Orlicz-norm bound on the contraction coefficient of `K` (forward) or `K*_μ` (dual).
pub fn orlicz_contraction_bound(
    k: &MarkovKernel,
    mu: &ProbVector,
    psi: &YoungFunction,
    phi: &YoungFunction,
    flavor: Flavor,
    direction: Direction,
) -> Result<ContractionBound> {
    let d = k.densities(mu)?;
    let m = k.dim();
    let phi_star = phi.conjugate_fn();
    let (inner_measure, outer_measure) = match direction {
        Direction::Forward => (&d.pushed, &d.base),
        Direction::Dual => (&d.base, &d.pushed),
    };
    let mut inner = Vec::with_capacity(m);
    for i in 0..m {
        let c = match direction {
            Direction::Forward => d.forward_centered(i),
            Direction::Dual => d.dual_centered(i),
        };
        inner.push(norm(&c, inner_measure, &phi_star, flavor.dual())?);
    }
    let value = norm(&inner, outer_measure, psi, flavor)?;
    Ok(ContractionBound { value, method: Method::OrliczNested })
}

/// `L_p` specialisation: `‖ ‖g − 1‖_{L_{q*}} ‖_{L_p}` with `q* = q/(q−1)`.
/// `q = p` bounds the contraction coefficient, `q < p` the hypercontractivity constant.
pub fn lp_contraction_bound(
    k: &MarkovKernel,
    mu: &ProbVector,
    p: f64,
    q: f64,
    direction: Direction,
) -> Result<ContractionBound> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("need p, q >= 1 (got p = {p}, q = {q})")));
    }
    let d = k.densities(mu)?;
    let q_star = conjugate_exponent(q);
    let m = k.dim();
    let (inner_measure, outer_measure) = match direction {
        Direction::Forward => (&d.pushed, &d.base),
        Direction::Dual => (&d.base, &d.pushed),
    };
    let inner: Vec<f64> = (0..m)
        .map(|i| {
            let c = match direction {
                Direction::Forward => d.forward_centered(i),
                Direction::Dual => d.dual_centered(i),
            };
            lp_norm(&c, inner_measure, q_star)
        })
        .collect();
    Ok(ContractionBound { value: lp_norm(&inner, outer_measure, p), method: Method::LpNested })
}

/// Closed form of the `L_p` bound for `general_binary(λ, κ)` started from `μ = (s, 1−s)`.
pub fn binary_lp_bound_closed_form(lambda: f64, kappa: f64, s: f64, p: f64) -> f64 {
    let ps = conjugate_exponent(p);
    let mk0 = s * (1.0 - lambda) + (1.0 - s) * kappa;
    let mk1 = 1.0 - mk0;
    let a = (s * (1.0 - s).powf(p) + s.powf(p) * (1.0 - s)).powf(1.0 / p);
    let b = (mk0.powf(1.0 - ps) + mk1.powf(1.0 - ps)).powf(1.0 / ps);
    (1.0 - lambda - kappa).abs() * a * b
}

/// Exact norm of `K` from mean-zero `L_2(μK)` into `L_2(μ)`.
pub fn l2_operator_norm(k: &MarkovKernel, mu: &ProbVector) -> Result<f64> {
    check_len(k.dim(), mu.len())?;
    let mk = k.push(mu);
    let m = k.dim();
    if let Some(y) = (0..m).find(|&y| mk.get(y) <= 0.0) {
        return Err(Error::ZeroPushedMass { state: y });
    }
    // B = D_μ^{1/2} K D_{μK}^{-1/2} has top singular pair (√μK, √μ) with value 1; deflate it.
    let b = DMatrix::from_fn(m, m, |x, y| {
        mu.get(x).sqrt() * k.get(x, y) / mk.get(y).sqrt() - mu.get(x).sqrt() * mk.get(y).sqrt()
    });
    let sv = b.svd(false, false).singular_values;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// Exact `L_2(π)` contraction coefficient (second singular value).
pub fn exact_l2_contraction(k: &MarkovKernel, pi: &ProbVector) -> Result<f64> {
    let residual = k.stationarity_residual(pi);
    if residual > STATIONARY_TOL {
        return Err(Error::NotStationary { residual });
    }
    l2_operator_norm(k, pi)
}

/// Sum-based `ℓ_r` norm with max scaling (counting measure).
fn counting_norm(v: &[f64], r: f64) -> f64 {
    let m = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    if is_inf_exponent(r) {
        return m;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / m).powf(r)).sum();
    m * s.powf(1.0 / r)
}

/// Closed-form bound for a doubly-stochastic `Λ`:
/// `(Σ_j (Σ_i |λ_{j,i} − 1/m|^q)^{p/q})^{1/p}` with `q = p/(p−1)`.
pub fn doubly_stochastic_bound(lambda: &MarkovKernel, p: f64) -> Result<ContractionBound> {
    let m = lambda.dim();
    for col in 0..m {
        let sum: f64 = (0..m).map(|x| lambda.get(x, col)).sum();
        if (sum - 1.0).abs() > crate::markov::SUM_TOL {
            return Err(Error::NotDoublyStochastic { col, sum });
        }
    }
    let q = conjugate_exponent(p);
    let u = 1.0 / m as f64;
    let rows: Vec<f64> = (0..m)
        .map(|j| counting_norm(&(0..m).map(|i| lambda.get(j, i) - u).collect::<Vec<_>>(), q))
        .collect();
    Ok(ContractionBound { value: counting_norm(&rows, p), method: Method::DoublyStochastic })
}

/// `max_x Σ_y |A(x,y) − π(y)|` for a kernel `A`, i.e. `‖A − 1_π‖_{L_∞ → L_∞}`.
pub fn linf_deviation_norm(a: &MarkovKernel, pi: &ProbVector) -> f64 {
    (0..a.dim())
        .map(|x| (0..a.dim()).map(|y| (a.get(x, y) - pi.get(y)).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `‖A − 1_π‖_{L_1(π) → L_1(π)} = max_y Σ_x π(x)|A(x,y) − π(y)| / π(y)`.
pub fn l1_deviation_norm(a: &MarkovKernel, pi: &ProbVector) -> f64 {
    (0..a.dim())
        .filter(|&y| pi.get(y) > 0.0)
        .map(|y| {
            (0..a.dim()).map(|x| pi.get(x) * (a.get(x, y) - pi.get(y)).abs()).sum::<f64>() / pi.get(y)
        })
        .fold(0.0, f64::max)
}

/// `max_x 2·TV(Kᵗ(·|x), π)`, equal to `‖Kᵗ − 1_π‖_{L_∞ → L_∞}`.
pub fn tv_ergodicity_bound(k: &MarkovKernel, pi: &ProbVector, t: usize) -> f64 {
    linf_deviation_norm(&k.t_step(t), pi)
}

/// Riesz-Thorin interpolation between the `L_2` spectral gap and the trivial
/// endpoint bound 2 at `L_1`/`L_∞`.
pub fn riesz_thorin_baseline(gamma: f64, p: f64, t: usize) -> f64 {
    let t = t as f64;
    if p <= 1.0 || is_inf_exponent(p) {
        2.0
    } else if p == 2.0 {
        gamma.powf(t)
    } else if p < 2.0 {
        2f64.powf(2.0 / p) * gamma.powf(2.0 * t * (p - 1.0) / p)
    } else {
        2f64.powf(2.0 * (p - 1.0) / p) * gamma.powf(2.0 * t / p)
    }
}

/// Riesz-Thorin with the exact one-step endpoint norm `‖K − 1_π‖` at `L_∞`
/// (for `p > 2`) or `L_1` (for `p < 2`) in place of 2, iterated `t` times:
/// `(γ^{1−θ} M^θ)ᵗ` with `1/p = (1−θ)/2 + θ/r`.
pub fn riesz_thorin_refined(k: &MarkovKernel, pi: &ProbVector, p: f64, t: usize) -> Result<f64> {
    let gamma = exact_l2_contraction(k, pi)?;
    let tf = t as f64;
    if p == 2.0 {
        return Ok(gamma.powf(tf));
    }
    let (theta, m) = if p > 2.0 {
        let theta = if is_inf_exponent(p) { 1.0 } else { 1.0 - 2.0 / p };
        (theta, linf_deviation_norm(k, pi))
    } else {
        (2.0 / p - 1.0, l1_deviation_norm(k, pi))
    };
    Ok((gamma.powf(1.0 - theta) * m.powf(theta)).powf(tf))
}

/// Best of the forward `L_p` and the dual `L_q` bound for one step: both bound
/// `‖K − 1_π‖_{L_p(π) → L_p(π)}` since the dual norm at `q` equals it by duality.
pub fn lp_operator_bound(k: &MarkovKernel, pi: &ProbVector, p: f64) -> Result<f64> {
    let q = conjugate_exponent(p);
    let fwd = lp_contraction_bound(k, pi, p, p, Direction::Forward)?.value;
    let dual = lp_contraction_bound(k, pi, q, q, Direction::Dual)?.value;
    Ok(fwd.min(dual))
}

/// `ε = min_{x,y,z : K(z|y) > 0} K(z|x) / K(z|y)`.
pub fn ultra_mixing_epsilon(k: &MarkovKernel) -> f64 {
    let m = k.dim();
    let mut eps = f64::INFINITY;
    for z in 0..m {
        for y in 0..m {
            let kzy = k.get(y, z);
            if kzy > 0.0 {
                for x in 0..m {
                    eps = eps.min(k.get(x, z) / kzy);
                }
            }
        }
    }
    eps.min(1.0)
}

/// Semigroup bound and Stein-interpolation baseline at one time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupBounds {
    pub t: f64,
    /// Target exponent `p(t) = 2t_∞/(t_∞ − t)`.
    pub p: f64,
    pub ours: f64,
    pub stein: f64,
}

/// `‖ ‖h_t^X − 1‖_{L_{q*}(π)} ‖_{L_p(π)}` with `h_t^x = dH_t(·|x)/dπ`.
pub fn semigroup_bound(k: &MarkovKernel, t: f64, p: f64, q: f64) -> Result<f64> {
    let pi = k.stationary()?;
    let h = k.semigroup(t)?.kernel;
    Ok(lp_contraction_bound(&h, &pi, p, q, Direction::Forward)?.value)
}

/// `max_x ‖h^x − 1‖_{L_2(π)}` for a kernel `A` with stationary `π`; equals `‖A − 1_π‖_{L_2 → L_∞}`.
pub fn l2_to_linf_norm(a: &MarkovKernel, pi: &ProbVector) -> f64 {
    (0..a.dim())
        .map(|x| {
            let c: Vec<f64> = (0..a.dim()).map(|y| a.get(x, y) / pi.get(y) - 1.0).collect();
            lp_norm(&c, pi, 2.0)
        })
        .fold(0.0, f64::max)
}

/// Our bound with `q = 2`, `p = p(t)` against `M_∞^{t/t_∞}`.
pub fn semigroup_bounds(k: &MarkovKernel, t: f64, t_inf: f64) -> Result<SemigroupBounds> {
    if !(t >= 0.0 && t < t_inf) {
        return Err(Error::InvalidParameter(format!("need 0 <= t < t_inf (t = {t}, t_inf = {t_inf})")));
    }
    let pi = k.stationary()?;
    let p = 2.0 * t_inf / (t_inf - t);
    let ht = k.semigroup(t)?.kernel;
    let ours = lp_contraction_bound(&ht, &pi, p, 2.0, Direction::Forward)?.value;
    let m_inf = l2_to_linf_norm(&k.semigroup(t_inf)?.kernel, &pi);
    Ok(SemigroupBounds { t, p, ours, stein: m_inf.powf(t / t_inf) })
}

/// Settings for the multi-start ascent oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self { restarts: 64, iterations: 500, seed: 0x5EED, exec: Exec::Parallel }
    }
}

/// Maximises a scale-invariant ratio over `ℝ^m`, optionally restricted to
/// functions with zero mean under `center`, by multi-start coordinate ascent
/// with step halving. Returns the best value found (a lower estimate of the sup).
pub fn maximize_ratio<F>(m: usize, center: Option<&ProbVector>, ratio: F, opts: &BruteForceOptions) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let project = |f: &mut [f64]| {
        if let Some(c) = center {
            let mean = c.expect(f);
            f.iter_mut().for_each(|v| *v -= mean);
        }
    };
    // Steps that nearly cancel `f` only measure rounding noise.
    let safe = |f: &[f64]| {
        if f.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-3 {
            return f64::NEG_INFINITY;
        }
        let v = ratio(f);
        if v.is_finite() { v } else { f64::NEG_INFINITY }
    };
    let directions: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            project(&mut e);
            e
        })
        .collect();
    let results = map_indexed(opts.exec, opts.restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r as u64));
        let mut f: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        project(&mut f);
        let mut best = safe(&f);
        let mut step = 0.5;
        for _ in 0..opts.iterations {
            let scale = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if scale == 0.0 {
                break;
            }
            f.iter_mut().for_each(|v| *v /= scale);
            // Rounding drift off the constraint set would otherwise get amplified.
            project(&mut f);
            let mut improved = false;
            let rand_dir: Vec<f64> = {
                let mut d: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                project(&mut d);
                d
            };
            for dir in directions.iter().chain(std::iter::once(&rand_dir)) {
                for sign in [1.0, -1.0] {
                    let cand: Vec<f64> = f.iter().zip(dir).map(|(a, b)| a + sign * step * b).collect();
                    let v = safe(&cand);
                    if v > best {
                        best = v;
                        f = cand;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            } else {
                step = (step * 1.5).min(1.0);
            }
        }
        best
    });
    results.into_iter().fold(0.0, f64::max)
}

/// Multi-start lower estimate of the contraction coefficient
/// `sup ‖Kf‖_{ψ,N}(μ) / ‖f‖_{φ,N}(μK)` over mean-zero `f` (or the dual analogue).
pub fn brute_force_contraction(
    k: &MarkovKernel,
    mu: &ProbVector,
    psi: &YoungFunction,
    phi: &YoungFunction,
    flavor: Flavor,
    direction: Direction,
    opts: &BruteForceOptions,
) -> Result<f64> {
    let m = k.dim();
    let (op, src, dst) = match direction {
        Direction::Forward => (k.clone(), k.push(mu), mu.clone()),
        Direction::Dual => (k.dual(mu)?, mu.clone(), k.push(mu)),
    };
    let ratio = |f: &[f64]| -> f64 {
        let den = norm(f, &src, phi, flavor).unwrap_or(f64::NAN);
        if !(den > 1e-300) {
            return f64::NAN;
        }
        let num = norm(&op.apply(f), &dst, psi, flavor).unwrap_or(f64::NAN);
        num / den
    };
    Ok(maximize_ratio(m, Some(&src), ratio, opts))
}
