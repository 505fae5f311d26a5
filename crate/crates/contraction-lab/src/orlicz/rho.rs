//! The functional `ρ_c(f) = inf_{t > 0} (c + log μ(e^{t(f − μf)})) / t`.
//!
//! It is the Legendre-type dual of the cumulant generating function and
//! appears in the KL contraction bound with `c = D(ν‖μ)`.

use crate::error::{Error, Result};
use crate::markov::{check_len, ProbVector};

/// Value of `ρ` plus whether the infimum was only reached in the limit `t → ∞`
/// (constant `f`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho {
    pub value: f64,
    pub degenerate: bool,
}

const GRID: usize = 10_000;

/// `log μ(e^{t g})` via max-shifted summation.
fn log_mgf(g: &[f64], w: &[f64], t: f64) -> f64 {
    let mx = g
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(v, _)| t * v)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = g
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(v, wi)| wi * (t * v - mx).exp())
        .sum();
    mx + s.ln()
}

pub fn rho_functional(f: &[f64], mu: &ProbVector, c: f64) -> Result<Rho> {
    check_len(mu.len(), f.len())?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("rho needs c > 0, got {c}")));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let w = mu.as_slice();
    let mean = mu.expect(f);
    let (lo, hi) = f
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (v, _)| (a.min(*v), b.max(*v)));
    let range = hi - lo;
    if range <= 1e-14 * (1.0 + hi.abs()) {
        return Ok(Rho { value: 0.0, degenerate: true });
    }
    // Homogeneity in the range: ρ_c(f) = R·ρ_c((f − μf)/R).
    let g: Vec<f64> = f.iter().map(|v| (v - mean) / range).collect();
    let obj = |u: f64| {
        let t = u.exp();
        (c + log_mgf(&g, w, t)) / t
    };
    let (a, b) = (1e-8f64.ln(), 1e8f64.ln());
    let step = (b - a) / (GRID - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..GRID {
        let v = obj(a + step * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let l = a + step * best_i.saturating_sub(1) as f64;
    let r = a + step * (best_i + 1).min(GRID - 1) as f64;
    let (_, v) = super::young::golden_max(|u| -obj(u), l, r, 200);
    Ok(Rho { value: range * best.min(-v), degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_is_degenerate() {
        let mu = ProbVector::uniform(3);
        let r = rho_functional(&[2.0, 2.0, 2.0], &mu, 0.3).unwrap();
        assert_eq!(r, Rho { value: 0.0, degenerate: true });
    }

    #[test]
    fn hoeffding_relaxation_dominates() {
        // log-MGF ≤ t²R²/8 gives ρ ≤ √(2c R²/4)
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let mu = ProbVector::random(4, &mut rng);
            let f: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..3.0)).collect();
            let c = rng.random_range(0.01..2.0);
            let range = f.iter().cloned().fold(f64::MIN, f64::max) - f.iter().cloned().fold(f64::MAX, f64::min);
            let r = rho_functional(&f, &mu, c).unwrap().value;
            assert!(r <= (2.0 * c * range * range / 4.0).sqrt() + 1e-9);
            assert!(r >= 0.0);
        }
    }

    #[test]
    fn binary_refined_hoeffding() {
        let p: f64 = 0.2;
        let mu = ProbVector::new(vec![p, 1.0 - p]).unwrap();
        let cp = (2.0 * p - 1.0) / (2.0 * (p / (1.0 - p)).ln());
        let c = 0.4;
        let f = [1.5, -0.5];
        let r = rho_functional(&f, &mu, c).unwrap().value;
        assert!(r <= (2.0 * cp * c * 4.0).sqrt() + 1e-9);
    }

    #[test]
    fn matches_dense_grid() {
        let mu = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let f = [1.0, 0.0];
        let c = 0.5;
        let mean = mu.expect(&f);
        let dense = (1..200_000)
            .map(|i| {
                let t = i as f64 * 1e-4;
                let m: f64 = (0..2).map(|x| mu.get(x) * (t * (f[x] - mean)).exp()).sum();
                (c + m.ln()) / t
            })
            .fold(f64::INFINITY, f64::min);
        let r = rho_functional(&f, &mu, c).unwrap().value;
        assert!(r <= dense + 1e-9 && r > dense - 1e-6);
    }
}
