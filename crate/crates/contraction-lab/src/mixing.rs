//! Orlicz mixing times and event-probability bounds.
//!
//! `τ_ψ(K, ε)` is the first `t` with `sup_ν ‖dνKᵗ/dπ − 1‖_{ψ,N} ≤ ε`. On a finite
//! space the sup over starting measures is attained at a Dirac mass.

use crate::contraction::{orlicz_contraction_bound, Direction};
use crate::error::{Error, Result};
use crate::markov::{MarkovKernel, ProbVector};
use crate::orlicz::{conjugate_exponent, lp_norm, norm, Flavor, YoungFunction};
use crate::par::{map_indexed, Exec};

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub epsilon: f64,
    /// `None` when the contraction bound is at least 1 (vacuous).
    pub bound_steps: Option<u64>,
    pub exact_steps: Option<u64>,
    pub psi: YoungFunction,
    pub flavor: Flavor,
    pub sup_nu_norm: f64,
    pub dual_contraction: f64,
}

impl MixingReport {
    pub fn is_vacuous(&self) -> bool {
        self.bound_steps.is_none()
    }
}

/// Closed-form upper bound on `max_x ‖dδ_x/dπ − 1‖_{ψ,N}(π)`.
pub fn max_dirac_norm(pi: &ProbVector, psi: &YoungFunction, flavor: Flavor) -> Result<f64> {
    if let Some(x) = (0..pi.len()).find(|&x| pi.get(x) <= 0.0) {
        return Err(Error::ZeroMass { state: x });
    }
    let mut best: f64 = 0.0;
    for x in 0..pi.len() {
        let px = pi.get(x);
        let rest = 1.0 - px;
        let v = match flavor {
            Flavor::Luxemburg => {
                if px >= 0.5 {
                    1.0 / psi.inverse(1.0 / (2.0 * rest))
                } else {
                    rest / px / psi.inverse(1.0 / (2.0 * px))
                }
            }
            Flavor::Amemiya => {
                if px >= 0.5 {
                    2.0 * rest * psi.conjugate_inverse(1.0 / (2.0 * rest))
                } else {
                    2.0 * rest * psi.conjugate_inverse(1.0 / (2.0 * px))
                }
            }
        };
        // A point mass at a state carrying everything has nothing to mix.
        let v = if rest <= 0.0 { 0.0 } else { v };
        best = best.max(v);
    }
    Ok(best)
}

/// Exact `max_x ‖dδ_x Kᵗ/dπ − 1‖_{ψ,N}(π)`.
pub fn max_dirac_distance(kt: &MarkovKernel, pi: &ProbVector, psi: &YoungFunction, flavor: Flavor) -> Result<f64> {
    let mut best: f64 = 0.0;
    for x in 0..kt.dim() {
        let h: Vec<f64> = (0..kt.dim()).map(|y| kt.get(x, y) / pi.get(y) - 1.0).collect();
        best = best.max(norm(&h, pi, psi, flavor)?);
    }
    Ok(best)
}

/// Steps `⌈log(S/ε) / −log c⌉` from a start radius `S` and a per-step factor `c`.
pub fn steps_from_contraction(start: f64, epsilon: f64, c: f64) -> Option<u64> {
    if start <= epsilon {
        return Some(0);
    }
    if !(c < 1.0) {
        return None;
    }
    if c <= 0.0 {
        return Some(1);
    }
    let t = ((start / epsilon).ln() / -c.ln()).ceil();
    Some(t.max(1.0) as u64)
}

/// Mixing-time bound from the dual contraction bound and [`max_dirac_norm`].
pub fn mixing_time_bound(k: &MarkovKernel, psi: &YoungFunction, flavor: Flavor, epsilon: f64) -> Result<MixingReport> {
    mixing_time_bound_at(k, &k.stationary()?, psi, flavor, epsilon)
}

/// [`mixing_time_bound`] with a caller-supplied stationary measure (needed when it is not unique).
pub fn mixing_time_bound_at(
    k: &MarkovKernel,
    pi: &ProbVector,
    psi: &YoungFunction,
    flavor: Flavor,
    epsilon: f64,
) -> Result<MixingReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let pi = pi.clone();
    let sup_nu_norm = max_dirac_norm(&pi, psi, flavor)?;
    let c = orlicz_contraction_bound(k, &pi, psi, psi, flavor, Direction::Dual)?.value;
    Ok(MixingReport {
        epsilon,
        bound_steps: steps_from_contraction(sup_nu_norm, epsilon, c),
        exact_steps: None,
        psi: psi.clone(),
        flavor,
        sup_nu_norm,
        dual_contraction: c,
    })
}

/// Smallest `t ≤ max_t` with `max_x ‖dδ_x Kᵗ/dπ − 1‖ ≤ ε`, by direct iteration.
pub fn exact_mixing_time(k: &MarkovKernel, psi: &YoungFunction, flavor: Flavor, epsilon: f64, max_t: u64) -> Result<u64> {
    exact_mixing_time_at(k, &k.stationary()?, psi, flavor, epsilon, max_t)
}

pub fn exact_mixing_time_at(
    k: &MarkovKernel,
    pi: &ProbVector,
    psi: &YoungFunction,
    flavor: Flavor,
    epsilon: f64,
    max_t: u64,
) -> Result<u64> {
    let mut kt = MarkovKernel::identity(k.dim());
    for t in 0..=max_t {
        if max_dirac_distance(&kt, pi, psi, flavor)? <= epsilon {
            return Ok(t);
        }
        kt = kt.compose(k);
    }
    Err(Error::NotReached { max_t: max_t as usize })
}

/// Event bound from a known `‖dμKᵗ/dπ − 1‖_{ψ,N}`:
/// Amemiya `(norm + (ψ*)⁻¹(1)) / (ψ*)⁻¹(1/π(E))`, Luxemburg `π(E)ψ⁻¹(1/π(E))(norm + 1/ψ⁻¹(1))`.
pub fn event_bound_orlicz(pi_e: f64, norm_value: f64, psi: &YoungFunction, flavor: Flavor) -> Result<f64> {
    if !(pi_e > 0.0 && pi_e <= 1.0) {
        return Err(Error::InvalidParameter(format!("pi(E) must lie in (0, 1], got {pi_e}")));
    }
    Ok(match flavor {
        Flavor::Amemiya => (norm_value + psi.conjugate_inverse(1.0)) / psi.conjugate_inverse(1.0 / pi_e),
        Flavor::Luxemburg => pi_e * psi.inverse(1.0 / pi_e) * (norm_value + 1.0 / psi.inverse(1.0)),
    })
}

/// Minimum over both flavors when both norms are known.
pub fn event_bound_orlicz_min(pi_e: f64, amemiya: f64, luxemburg: f64, psi: &YoungFunction) -> Result<f64> {
    Ok(event_bound_orlicz(pi_e, amemiya, psi, Flavor::Amemiya)?
        .min(event_bound_orlicz(pi_e, luxemburg, psi, Flavor::Luxemburg)?))
}

/// `π(E)^{1/q}(π(E)^{1/p} + ε)`.
pub fn event_bound_lp(pi_e: f64, epsilon: f64, p: f64) -> Result<f64> {
    if !(pi_e > 0.0 && pi_e <= 1.0) {
        return Err(Error::InvalidParameter(format!("pi(E) must lie in (0, 1], got {pi_e}")));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let q = conjugate_exponent(p);
    Ok(pi_e.powf(1.0 / q) * (pi_e.powf(1.0 / p) + epsilon))
}

/// Heavy-tail event bound with `ψ_k^m` in the Luxemburg flavor.
pub fn heavy_tail_event_bound(pi_e: f64, epsilon: f64, k: f64, m: f64) -> Result<f64> {
    let psi = YoungFunction::HeavyTail { k, m };
    psi.validate()?;
    event_bound_orlicz(pi_e, epsilon, &psi, Flavor::Luxemburg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailRow {
    pub n: u32,
    pub pi_e: f64,
    pub heavy: f64,
    pub lp: f64,
}

/// Both bounds with `π(E) = n^{−decay}` over `n_range`.
pub fn heavy_tail_comparison(
    n_range: std::ops::RangeInclusive<u32>,
    decay: f64,
    epsilon: f64,
    k: f64,
    m: f64,
    p: f64,
) -> Result<Vec<HeavyTailRow>> {
    n_range
        .map(|n| {
            let pi_e = (n as f64).powf(-decay);
            Ok(HeavyTailRow {
                n,
                pi_e,
                heavy: heavy_tail_event_bound(pi_e, epsilon, k, m)?,
                lp: event_bound_lp(pi_e, epsilon, p)?,
            })
        })
        .collect()
}

/// Mixing time guaranteeing exponential decay of the Hoeffding-type event bound:
/// `(log L_p*(π) + qC²/(nη²)) / −log c`, with `L_p*(π)` the Dirac max of the `L_p` radius.
pub fn exponential_convergence_mixing_time(k: &MarkovKernel, p: f64, c_scale: f64, n: f64, eta: f64) -> Result<Option<f64>> {
    let pi = k.stationary()?;
    let psi = YoungFunction::Power(p);
    let start = max_dirac_distance(&MarkovKernel::identity(k.dim()), &pi, &psi, Flavor::Luxemburg)?;
    let c = orlicz_contraction_bound(k, &pi, &psi, &psi, Flavor::Luxemburg, Direction::Dual)?.value;
    if !(c < 1.0) {
        return Ok(None);
    }
    let q = conjugate_exponent(p);
    Ok(Some((start.ln() + q * c_scale * c_scale / (n * eta * eta)) / -c.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventCheck {
    pub events: u64,
    pub violations: u64,
    /// Smallest `bound − probability` over all events.
    pub min_slack: f64,
}

/// Checks `μKᵗ(E) ≤ bound(π(E))` for every nonempty event `E`, where `bound` receives
/// `π(E)` and the exact distance of `μKᵗ` from `π`. The check is only meaningful for `m ≤ 20`.
pub fn check_all_events<F>(mu_t: &ProbVector, pi: &ProbVector, exec: Exec, bound: F) -> EventCheck
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let m = pi.len();
    let n = (1u64 << m) - 1;
    let slack = map_indexed(exec, n as usize, |i| {
        let mask = i as u64 + 1;
        let (mut pe, mut qe) = (0.0, 0.0);
        for x in 0..m {
            if mask >> x & 1 == 1 {
                pe += pi.get(x);
                qe += mu_t.get(x);
            }
        }
        bound(pe.min(1.0)) - qe
    });
    EventCheck {
        events: n,
        violations: slack.iter().filter(|s| **s < -1e-10).count() as u64,
        min_slack: slack.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Exact `‖dμKᵗ/dπ − 1‖_{L_p(π)}`.
pub fn lp_distance(mu_t: &ProbVector, pi: &ProbVector, p: f64) -> Result<f64> {
    let h: Vec<f64> = mu_t.density_wrt(pi)?.into_iter().map(|v| v - 1.0).collect();
    Ok(lp_norm(&h, pi, p))
}
