//! Strong data-processing inequalities: Hellinger/χ² bounds from nested
//! `L_p` norms of the dual densities, the non-linear KL bound driven by the
//! `ρ` functional, graph-walk closed forms, the Dobrushin coefficient and a
//! simplex-search oracle for `η_D(μ, K) = sup_ν D(νK‖μK)/D(ν‖μ)`.

use crate::contraction::{lp_contraction_bound, Direction};
use crate::error::{Error, Result};
use crate::markov::{check_len, tv_distance, Graph, MarkovKernel, ProbVector};
use crate::orlicz::{divergence, kl, rho_functional, Divergence, YoungFunction};
use crate::par::{map_indexed, Exec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SdpiReport {
    pub divergence: Divergence,
    pub bound: f64,
    /// Dobrushin `η_TV`, or a literature bound when one is being compared.
    pub baseline: Option<f64>,
    /// Brute-force lower estimate of the true constant.
    pub oracle: Option<f64>,
}

/// `η_α(μ, K) ≤ ‖ ‖g_Y − 1‖_{L_β(μ)} ‖_{L_α(μK)}^α` with `β = α/(α−1)`; `α = 2` is χ².
pub fn hellinger_sdpi_bound(k: &MarkovKernel, mu: &ProbVector, alpha: f64) -> Result<SdpiReport> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("Hellinger order must exceed 1, got {alpha}")));
    }
    let b = lp_contraction_bound(k, mu, alpha, alpha, Direction::Dual)?.value;
    let divergence = if alpha == 2.0 { Divergence::Chi2 } else { Divergence::HAlpha(alpha) };
    Ok(SdpiReport { divergence, bound: b.powf(alpha), baseline: Some(dobrushin_eta_tv(k)), oracle: None })
}

/// Closed form of [`hellinger_sdpi_bound`] for `general_binary(λ, κ)` and `μ = (s, 1−s)`.
pub fn binary_hellinger_closed_form(lambda: f64, kappa: f64, s: f64, alpha: f64) -> f64 {
    let beta = alpha / (alpha - 1.0);
    let mk0 = s * (1.0 - lambda) + (1.0 - s) * kappa;
    let mk1 = 1.0 - mk0;
    (1.0 - lambda - kappa).abs().powf(alpha)
        * (s * (1.0 - s).powf(beta) + s.powf(beta) * (1.0 - s)).powf(alpha / beta)
        * (mk0.powf(1.0 - alpha) + mk1.powf(1.0 - alpha))
}

/// `|V|(1−λ)² + λ² Σ_y h(y)/deg(y) − 1` with `h(y) = Σ_{x ~ y} 1/deg(x)`.
pub fn graph_chi2_bound(g: &Graph, lambda: f64) -> Result<f64> {
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let n = g.len();
    let s: f64 = (0..n)
        .map(|y| {
            let h: f64 = g.neighbors(y).iter().map(|&x| 1.0 / g.degree(x) as f64).sum();
            h / g.degree(y) as f64
        })
        .sum();
    Ok(n as f64 * (1.0 - lambda).powi(2) + lambda * lambda * s - 1.0)
}

/// [`graph_chi2_bound`] on the complete graph.
pub fn complete_graph_chi2_bound(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    nf * (1.0 - lambda).powi(2) + lambda * lambda * nf / (nf - 1.0) - 1.0
}

/// `sup_{x, x̂} TV(K(·|x), K(·|x̂))`.
pub fn dobrushin_eta_tv(k: &MarkovKernel) -> f64 {
    let rows = k.rows();
    let mut best: f64 = 0.0;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            best = best.max(tv_distance(&rows[a], &rows[b]));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefinedHoeffding {
    /// Two-point law with mass `p` on one atom: `(2p−1)/(2 ln(p/(1−p)))`.
    BinaryP,
    /// Law on `[0, 1]` with mean `κ`, piecewise constant.
    RangeKappa,
}

/// Distribution-refined Hoeffding constants.
pub fn refined_hoeffding(kind: RefinedHoeffding, arg: f64) -> f64 {
    match kind {
        RefinedHoeffding::BinaryP => {
            if arg <= 0.0 || arg >= 1.0 {
                0.0
            } else if (arg - 0.5).abs() < 1e-9 {
                0.25
            } else {
                (2.0 * arg - 1.0) / (2.0 * (arg / (1.0 - arg)).ln())
            }
        }
        RefinedHoeffding::RangeKappa => {
            if arg <= 0.0 {
                0.0
            } else if arg < 0.5 {
                if 0.5 - arg < 1e-9 {
                    0.125
                } else {
                    (1.0 - 2.0 * arg) / (4.0 * ((1.0 - arg) / arg).ln())
                }
            } else {
                arg * (1.0 - arg) / 2.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlSdpiBound {
    /// `μK(φ̂(ρ(g_Y)))`.
    pub phi_hat: f64,
    /// `μK(ρ(g_Y)²)`.
    pub quadratic: f64,
    /// The true `D(νK‖μK)`, kept for the postcondition check.
    pub actual: f64,
    /// `D(ν‖μ) = 0`; all values are 0 by continuity.
    pub degenerate: bool,
}

/// Non-linear KL bound. Ties `dνK/dμK = 1` are put on the `φ` branch.
///
/// On `A = {dνK/dμK < 1}` the pairing `μ((g_y − 1)(dν/dμ − 1))` is negative, so
/// its magnitude is controlled by `ρ(−g_y)`; `ρ(g_y)` alone does not bound it.
pub fn kl_sdpi_bound(k: &MarkovKernel, mu: &ProbVector, nu: &ProbVector) -> Result<KlSdpiBound> {
    check_len(k.dim(), nu.len())?;
    let d = k.densities(mu)?;
    let c = kl(nu, mu)?;
    let mk = &d.pushed;
    let nk = k.push(nu);
    let actual = kl(&nk, mk)?;
    if c <= 0.0 {
        return Ok(KlSdpiBound { phi_hat: 0.0, quadratic: 0.0, actual, degenerate: true });
    }
    let phi = YoungFunction::EntropyPhi;
    let tilde = YoungFunction::TildePhi;
    let mut phi_hat = 0.0;
    let mut quadratic = 0.0;
    for y in 0..k.dim() {
        let g: Vec<f64> = d.dual.row(y).iter().copied().collect();
        let in_a = nk.get(y) / mk.get(y) < 1.0;
        let r = if in_a {
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            rho_functional(&neg, mu, c)?.value
        } else {
            rho_functional(&g, mu, c)?.value
        };
        phi_hat += mk.get(y) * if in_a { tilde.eval(r) } else { phi.eval(r) };
        quadratic += mk.get(y) * r * r;
    }
    Ok(KlSdpiBound { phi_hat, quadratic, actual, degenerate: false })
}

/// Hoeffding-relaxed binary KL bound for `μ = (s, 1−s)` and `ν`, with the `φ̃` branch
/// on the output symbol whose mass decreases.
pub fn binary_kl_hoeffding_bound(lambda: f64, kappa: f64, s: f64, nu0: f64) -> Result<f64> {
    let k = crate::markov::general_binary(lambda, kappa)?;
    let mu = ProbVector::new(vec![s, 1.0 - s])?;
    let nu = ProbVector::new(vec![nu0, 1.0 - nu0])?;
    let dkl = kl(&nu, &mu)?;
    let mk = k.push(&mu);
    let nk = k.push(&nu);
    let c = refined_hoeffding(RefinedHoeffding::BinaryP, s);
    let theta2 = (1.0 - lambda - kappa).powi(2);
    let phi = YoungFunction::EntropyPhi;
    let tilde = YoungFunction::TildePhi;
    Ok((0..2)
        .map(|y| {
            let arg = (2.0 * c * dkl * theta2 / (mk.get(y) * mk.get(y))).sqrt();
            let f = if nk.get(y) < mk.get(y) { &tilde } else { &phi };
            mk.get(y) * f.eval(arg)
        })
        .sum())
}

/// Raginsky's binary comparison bound: `D(ν‖μ)·2σ²`-type quadratic form with Hoeffding's `1/4`.
pub fn binary_kl_quadratic_bound(lambda: f64, kappa: f64, s: f64, nu0: f64) -> Result<f64> {
    let k = crate::markov::general_binary(lambda, kappa)?;
    let mu = ProbVector::new(vec![s, 1.0 - s])?;
    let nu = ProbVector::new(vec![nu0, 1.0 - nu0])?;
    let dkl = kl(&nu, &mu)?;
    let mk = k.push(&mu);
    let theta2 = (1.0 - lambda - kappa).powi(2);
    Ok((0..2).map(|y| 2.0 * 0.25 * dkl * theta2 / mk.get(y)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphKlBounds {
    pub ours: f64,
    pub raginsky: f64,
}

/// Complete-graph KL bounds: `φ̃(√(4 d c(1/|V|) D(ν‖π)))` against
/// `D(ν‖π)(|V|²/2)(1 − |V|λ/(|V|−1))²`. `nu = None` uses `D(ν‖π) ≤ ln|V|`.
pub fn graph_kl_bounds(v: usize, lambda: f64, nu: Option<&ProbVector>) -> Result<GraphKlBounds> {
    if v < 2 {
        return Err(Error::InvalidParameter("complete graph needs at least 2 vertices".into()));
    }
    let n = v as f64;
    let max = (n - 1.0) / n;
    if !(lambda >= 0.0 && lambda < max) {
        return Err(Error::LambdaOutOfRange { lambda, max });
    }
    let dkl = match nu {
        Some(nu) => kl(nu, &ProbVector::uniform(v))?,
        None => n.ln(),
    };
    let s = 1.0 - n * lambda / (n - 1.0);
    let d = (n * s).powi(2);
    let c = refined_hoeffding(RefinedHoeffding::RangeKappa, 1.0 / n);
    let ours = YoungFunction::TildePhi.eval((4.0 * d * c * dkl).sqrt());
    Ok(GraphKlBounds { ours, raginsky: dkl * n * n / 2.0 * s * s })
}

/// `(min, max)` of `g_y` over the support of `μ`, for every output `y`.
fn dual_ranges(k: &MarkovKernel, mu: &ProbVector) -> Result<(Vec<(f64, f64)>, ProbVector)> {
    let d = k.densities(mu)?;
    let ranges = (0..k.dim())
        .map(|y| {
            d.dual
                .row(y)
                .iter()
                .zip(mu.as_slice())
                .filter(|(_, &w)| w > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (v, _)| (a.min(*v), b.max(*v)))
        })
        .collect();
    Ok((ranges, d.pushed))
}

/// `2 μK(σ²(g_Y))` with `σ²` from the two-sided refined Hoeffding constant on the range of `g_y`.
pub fn subgaussian_sdpi_bound(k: &MarkovKernel, mu: &ProbVector) -> Result<f64> {
    let (ranges, pushed) = dual_ranges(k, mu)?;
    let mut total = 0.0;
    for (y, (lo, hi)) in ranges.into_iter().enumerate() {
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        let kappa = ((1.0 - lo) / range).clamp(0.0, 1.0);
        let c = refined_hoeffding(RefinedHoeffding::RangeKappa, kappa)
            .max(refined_hoeffding(RefinedHoeffding::RangeKappa, 1.0 - kappa));
        total += pushed.get(y) * 2.0 * c * range * range;
    }
    Ok(2.0 * total)
}

/// Sub-Gaussian SDPI bound with Hoeffding's proxy `σ²(g_y) = range²/4`: `½ μK(range(g_Y)²)`.
pub fn hoeffding_sdpi_bound(k: &MarkovKernel, mu: &ProbVector) -> Result<f64> {
    let (ranges, pushed) = dual_ranges(k, mu)?;
    Ok(ranges.into_iter().enumerate().map(|(y, (lo, hi))| 0.5 * pushed.get(y) * (hi - lo).powi(2)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpiSearch {
    /// Simplex grid resolution `1/grid_points` (dense grid for `m ≤ 4`, random draws otherwise).
    pub grid_points: usize,
    /// Coordinate-ascent sweeps around the best candidates.
    pub refinements: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl SdpiSearch {
    pub fn for_dim(m: usize) -> Self {
        let grid_points = match m {
            0..=2 => 200,
            3 => 60,
            _ => 20,
        };
        Self { grid_points, refinements: 200, seed: 0x5D1, exec: Exec::Parallel }
    }
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for i in 0..=total {
        prefix.push(i);
        compositions(total - i, parts - 1, prefix, out);
        prefix.pop();
    }
}

const SEARCH_EXCLUSION: f64 = 1e-9;
// Below this the divergence ratio is dominated by rounding in the numerator.
const MIN_DIVERGENCE: f64 = 1e-10;

/// Lower estimate of `η_D(μ, K)` by simplex search plus pairwise mass-moving ascent.
pub fn brute_force_sdpi(k: &MarkovKernel, mu: &ProbVector, kind: Divergence, opts: &SdpiSearch) -> Result<f64> {
    let m = k.dim();
    check_len(m, mu.len())?;
    let mk = k.push(mu);
    let ratio = |nu: &[f64]| -> f64 {
        let close = nu.iter().zip(mu.as_slice()).all(|(a, b)| (a - b).abs() <= SEARCH_EXCLUSION);
        if close || nu.iter().any(|v| *v < 0.0) {
            return f64::NEG_INFINITY;
        }
        let Ok(nu) = ProbVector::from_unnormalized(nu.to_vec()) else { return f64::NEG_INFINITY };
        let (Ok(den), Ok(num)) = (divergence(&nu, mu, kind), divergence(&k.push(&nu), &mk, kind)) else {
            return f64::NEG_INFINITY;
        };
        if den > MIN_DIVERGENCE { num / den } else { f64::NEG_INFINITY }
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    if m <= 4 {
        let mut raw = Vec::new();
        compositions(opts.grid_points, m, &mut Vec::new(), &mut raw);
        let scale = opts.grid_points as f64;
        starts.extend(raw.into_iter().map(|c| c.into_iter().map(|v| v as f64 / scale).collect()));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let n = opts.grid_points.pow(2).max(100);
        starts.extend((0..n).map(|_| ProbVector::random(m, &mut rng).as_slice().to_vec()));
    }
    // Small perturbations of μ: the χ²-type sup is often reached as ν → μ.
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let mut nu = mu.as_slice().to_vec();
                let d = 1e-3 * mu.get(j);
                nu[i] += d;
                nu[j] -= d;
                starts.push(nu);
            }
        }
    }
    let values = map_indexed(opts.exec, starts.len(), |i| ratio(&starts[i]));
    let mut order: Vec<usize> = (0..starts.len()).filter(|&i| values[i].is_finite()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    // Refine the best grid point, the best near-μ start, and a few seeded extras.
    let near_mu = (starts.len() - m * (m - 1)..starts.len()).filter(|i| values[*i].is_finite()).max_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut seeds_idx: Vec<usize> = order.iter().take(4).copied().collect();
    seeds_idx.extend(near_mu);
    let refined = map_indexed(opts.exec, seeds_idx.len(), |r| {
        let mut nu = starts[seeds_idx[r]].clone();
        let mut best = values[seeds_idx[r]];
        let mut step = 1.0 / opts.grid_points as f64;
        for _ in 0..opts.refinements {
            let mut improved = false;
            for i in 0..m {
                for j in 0..m {
                    if i == j {
                        continue;
                    }
                    let mv = step.min(nu[j]);
                    if mv <= 0.0 {
                        continue;
                    }
                    let mut cand = nu.clone();
                    cand[i] += mv;
                    cand[j] -= mv;
                    let v = ratio(&cand);
                    if v > best {
                        best = v;
                        nu = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        best
    });
    Ok(values.iter().chain(&refined).copied().filter(|v| v.is_finite()).fold(0.0, f64::max))
}
