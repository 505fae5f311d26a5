//! Young functions `ψ: [0, ∞) → [0, ∞]` with their generalised inverses and
//! complementary functions `ψ*(y) = sup_{λ ≥ 0} (λy − ψ(λ))`.
//!
//! Closed forms are used whenever they exist. Everything else goes through a
//! numeric fallback: a log-spaced scan followed by golden-section refinement
//! for `ψ*`, and bracketed bisection for inverses.

use std::f64::consts::E;
use std::fmt;

use crate::error::{Error, Result};

/// Exponents at or above this are treated as `p = ∞`.
pub const P_INF_THRESHOLD: f64 = 1e6;

/// Breakpoint of [`YoungFunction::TildePhi`]: the positive root of `φ(x) = 1`.
pub const X1: f64 = E - 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum YoungFunction {
    /// `|x|^p`, `p ≥ 1`; `p = ∞` is the indicator of `[0, 1]`.
    Power(f64),
    /// `|x|^p / p`.
    ScaledPower(f64),
    /// `e^{x²} − 1`.
    SubGaussian,
    /// `φ(x) = (1+x)ln(1+x) − x`.
    EntropyPhi,
    /// Symmetrised entropy: `(1−x)ln(1−x) + x` on `[0,1)`, `1` on `[1, e−1]`, `φ(x)` beyond.
    TildePhi,
    /// `x^m` on `[0, k]`, then `(1+x)ln(1+x) + k^m − (1+k)ln(1+k)`.
    HeavyTail { k: f64, m: f64 },
    /// Complementary function of the inner one.
    Conjugate(Box<YoungFunction>),
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power(p) if p.is_infinite() => write!(f, "power:inf"),
            Self::Power(p) => write!(f, "power:{p}"),
            Self::ScaledPower(p) => write!(f, "scaled-power:{p}"),
            Self::SubGaussian => write!(f, "subgaussian"),
            Self::EntropyPhi => write!(f, "entropy-phi"),
            Self::TildePhi => write!(f, "tilde-phi"),
            Self::HeavyTail { k, m } => write!(f, "heavy:{k}:{m}"),
            Self::Conjugate(inner) => write!(f, "conj({inner})"),
        }
    }
}

impl std::str::FromStr for YoungFunction {
    type Err = Error;

    /// Parses `power:p`, `scaled-power:p`, `subgaussian`, `entropy-phi`, `tilde-phi`, `heavy:k:m`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownYoung(s.to_string());
        let num = |v: &str| -> Result<f64> {
            if v.eq_ignore_ascii_case("inf") {
                return Ok(f64::INFINITY);
            }
            v.parse::<f64>().map_err(|_| bad())
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        let psi = match parts.as_slice() {
            ["power", p] => Self::Power(num(p)?),
            ["scaled-power", p] => Self::ScaledPower(num(p)?),
            ["subgaussian"] => Self::SubGaussian,
            ["entropy-phi"] => Self::EntropyPhi,
            ["tilde-phi"] => Self::TildePhi,
            ["heavy", k, m] => Self::HeavyTail { k: num(k)?, m: num(m)? },
            _ => return Err(bad()),
        };
        psi.validate()?;
        Ok(psi)
    }
}

/// `(p−1)/p^q`, the coefficient in the conjugate of `x^p`.
fn power_conj_coeff(p: f64) -> f64 {
    let q = conjugate_exponent(p);
    (p - 1.0) * (-q * p.ln()).exp()
}

/// Hölder conjugate `p/(p−1)`, with `1 ↔ ∞`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p <= 1.0 {
        f64::INFINITY
    } else if p >= P_INF_THRESHOLD {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub(crate) fn is_inf_exponent(p: f64) -> bool {
    p >= P_INF_THRESHOLD
}

fn phi(x: f64) -> f64 {
    (1.0 + x) * x.ln_1p() - x
}

impl YoungFunction {
    pub fn power(p: f64) -> Self {
        Self::Power(p)
    }

    pub fn conjugate_fn(&self) -> Self {
        match self {
            Self::Conjugate(inner) => (**inner).clone(),
            other => Self::Conjugate(Box::new(other.clone())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Power(p) | Self::ScaledPower(p) if !(*p >= 1.0) => {
                Err(Error::InvalidParameter(format!("exponent {p} must be >= 1")))
            }
            Self::ScaledPower(p) if p.is_infinite() => {
                Err(Error::InvalidParameter("scaled-power needs a finite exponent".into()))
            }
            Self::HeavyTail { k, m } if !(*k > 0.0 && *m >= 1.0 && k.is_finite() && m.is_finite()) => {
                Err(Error::InvalidParameter(format!("heavy:{k}:{m} needs k > 0 and m >= 1")))
            }
            Self::Conjugate(inner) => inner.validate(),
            _ => Ok(()),
        }
    }

    /// `ψ = a·x^r` for the power-like families; `r` may be 1 or ∞.
    pub fn power_form(&self) -> Option<(f64, f64)> {
        match self {
            Self::Power(p) if is_inf_exponent(*p) => Some((1.0, f64::INFINITY)),
            Self::Power(p) => Some((1.0, *p)),
            Self::ScaledPower(p) => Some((1.0 / p, *p)),
            Self::Conjugate(inner) => match **inner {
                Self::Power(p) if p <= 1.0 => Some((1.0, f64::INFINITY)),
                Self::Power(p) if is_inf_exponent(p) => Some((1.0, 1.0)),
                Self::Power(p) => Some((power_conj_coeff(p), conjugate_exponent(p))),
                Self::ScaledPower(p) if p <= 1.0 => Some((1.0, f64::INFINITY)),
                Self::ScaledPower(p) => {
                    let q = conjugate_exponent(p);
                    Some((1.0 / q, q))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// True for the families that are convex on all of `[0, ∞)`.
    pub fn is_convex(&self) -> bool {
        !matches!(self, Self::TildePhi | Self::HeavyTail { .. })
    }

    /// `ψ(x)` for `x ≥ 0` (the argument's absolute value is used).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if let Some((a, r)) = self.power_form() {
            return eval_power(a, r, x);
        }
        match self {
            Self::SubGaussian => (x * x).exp_m1(),
            Self::EntropyPhi => phi(x),
            Self::TildePhi => {
                if x < 1.0 {
                    let y = 1.0 - x;
                    if y > 0.0 { y * y.ln() + x } else { x }
                } else if x <= X1 {
                    1.0
                } else {
                    phi(x)
                }
            }
            Self::HeavyTail { k, m } => {
                if x <= *k {
                    x.powf(*m)
                } else {
                    (1.0 + x) * x.ln_1p() + k.powf(*m) - (1.0 + k) * k.ln_1p()
                }
            }
            Self::Conjugate(inner) => inner.conjugate(x),
            Self::Power(_) | Self::ScaledPower(_) => unreachable!("handled by power_form"),
        }
    }

    /// Generalised inverse `ψ⁻¹(y) = sup{x ≥ 0 : ψ(x) ≤ y}`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if y == f64::INFINITY {
            return f64::INFINITY;
        }
        let y = y.max(0.0);
        if let Some((a, r)) = self.power_form() {
            if r.is_infinite() {
                return 1.0;
            }
            return (y / a).powf(1.0 / r);
        }
        match self {
            Self::SubGaussian => y.ln_1p().sqrt(),
            Self::HeavyTail { k, m } if y <= k.powf(*m) => y.powf(1.0 / m),
            Self::TildePhi if y == 1.0 => X1,
            _ => numeric_inverse(|x| self.eval(x), y),
        }
    }

    /// `ψ*(y) = sup_{λ ≥ 0} (λy − ψ(λ))`.
    pub fn conjugate(&self, y: f64) -> f64 {
        let y = y.abs();
        if let Some((a, r)) = self.conjugate_power_form() {
            return eval_power(a, r, y);
        }
        match self {
            Self::EntropyPhi => y.exp_m1() - y,
            Self::HeavyTail { k, m } => heavy_conjugate(*k, *m, y),
            Self::Conjugate(inner) if inner.is_convex() => inner.eval(y),
            _ => numeric_conjugate(|x| self.eval(x), y),
        }
    }

    /// `(ψ*)⁻¹(u) = sup{y ≥ 0 : ψ*(y) ≤ u}`.
    pub fn conjugate_inverse(&self, u: f64) -> f64 {
        if u == f64::INFINITY {
            return f64::INFINITY;
        }
        let u = u.max(0.0);
        if let Some((a, r)) = self.conjugate_power_form() {
            if r.is_infinite() {
                return 1.0;
            }
            return (u / a).powf(1.0 / r);
        }
        match self {
            Self::Conjugate(inner) if inner.is_convex() => inner.inverse(u),
            _ => numeric_inverse(|y| self.conjugate(y), u),
        }
    }

    fn conjugate_power_form(&self) -> Option<(f64, f64)> {
        match self {
            Self::Conjugate(inner) if inner.power_form().is_some() => inner.power_form(),
            _ => self.conjugate_fn().power_form(),
        }
    }
}

/// Both pieces of `ψ_k^m` are convex, so the sup is attained at a stationary point
/// of one piece or at the junction `x = k`.
fn heavy_conjugate(k: f64, m: f64, y: f64) -> f64 {
    let left = |x: f64| x * y - x.powf(m);
    let x1 = if m > 1.0 {
        (y / m).powf(1.0 / (m - 1.0)).min(k)
    } else if y > 1.0 {
        k
    } else {
        0.0
    };
    let mut best = left(x1).max(left(k)).max(0.0);
    if y - 1.0 > k.ln_1p() {
        // At 1 + x = e^{y−1} the right piece gives e^{y−1} − y − k^m + (1+k)ln(1+k).
        best = best.max((y - 1.0).exp() - y - k.powf(m) + (1.0 + k) * k.ln_1p());
    }
    best
}

fn eval_power(a: f64, r: f64, x: f64) -> f64 {
    if r.is_infinite() {
        return if x <= 1.0 { 0.0 } else { f64::INFINITY };
    }
    if x == 0.0 {
        return 0.0;
    }
    a * (r * x.ln()).exp()
}

/// `sup{x ≥ 0 : f(x) ≤ y}` for nondecreasing `f` with `f(0) = 0`.
pub(crate) fn numeric_inverse<F: Fn(f64) -> f64>(f: F, y: f64) -> f64 {
    let mut hi = 1.0;
    let mut guard = 0;
    while f(hi) <= y {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    if f(hi / 2.0) <= y {
        lo = hi / 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

const CONJ_SCAN: usize = 400;
const LOG_LO: f64 = -23.025_850_929_940_457; // ln 1e-10
const LOG_HI: f64 = 23.025_850_929_940_457;

/// `sup_{λ ≥ 0} (λy − f(λ))` by a log-spaced scan over `[1e-10, 1e10]` and
/// golden-section refinement around the best grid point.
pub(crate) fn numeric_conjugate<F: Fn(f64) -> f64>(f: F, y: f64) -> f64 {
    let obj = |u: f64| {
        let l = u.exp();
        let v = l * y - f(l);
        if v.is_nan() { f64::NEG_INFINITY } else { v }
    };
    let step = (LOG_HI - LOG_LO) / (CONJ_SCAN - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..CONJ_SCAN {
        let v = obj(LOG_LO + step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = LOG_LO + step * best_i.saturating_sub(1) as f64;
    let b = LOG_LO + step * (best_i + 1).min(CONJ_SCAN - 1) as f64;
    let (_, v) = golden_max(obj, a, b, 200);
    best.max(v).max(0.0)
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd { (c, fc) } else { (d, fd) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in ["power:2", "scaled-power:3", "subgaussian", "entropy-phi", "tilde-phi", "heavy:5:5", "power:inf"] {
            let psi: YoungFunction = s.parse().unwrap();
            assert_eq!(psi.to_string(), s);
        }
        assert!("power".parse::<YoungFunction>().is_err());
        assert!("power:0.5".parse::<YoungFunction>().is_err());
        assert!("gauss".parse::<YoungFunction>().is_err());
    }

    #[test]
    fn power_conjugates() {
        let p2 = YoungFunction::Power(2.0);
        for y in [0.0, 0.3, 1.0, 4.0] {
            assert!((p2.conjugate(y) - y * y / 4.0).abs() < 1e-12);
        }
        let s2 = YoungFunction::ScaledPower(2.0);
        for y in [0.0, 0.3, 1.0, 4.0] {
            assert!((s2.conjugate(y) - y * y / 2.0).abs() < 1e-12);
        }
        let p3 = YoungFunction::Power(3.0);
        for y in [0.2, 1.0, 5.0] {
            let num = numeric_conjugate(|x| p3.eval(x), y);
            assert!((p3.conjugate(y) - num).abs() < 1e-9 * (1.0 + num));
        }
    }

    #[test]
    fn entropy_conjugate_matches_numeric() {
        let e = YoungFunction::EntropyPhi;
        for y in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let num = numeric_conjugate(|x| e.eval(x), y);
            assert!((e.conjugate(y) - num).abs() < 1e-9 * (1.0 + num), "{y}");
        }
    }

    #[test]
    fn heavy_conjugate_matches_numeric() {
        for (k, m) in [(5.0, 5.0), (2.0, 1.5), (3.0, 1.0), (1.0, 3.0)] {
            let h = YoungFunction::HeavyTail { k, m };
            for y in [0.0, 0.3, 1.0, 2.5, 4.0, 10.0, 20.0] {
                let num = numeric_conjugate(|x| h.eval(x), y);
                assert!((h.conjugate(y) - num).abs() < 1e-8 * (1.0 + num), "k={k} m={m} y={y}: {} vs {num}", h.conjugate(y));
            }
        }
    }

    #[test]
    fn tilde_breakpoint() {
        // root of (1+x)ln(1+x) − x = 1, found independently by bisection
        let root = numeric_inverse(phi, 1.0);
        assert!((root - X1).abs() < 1e-12);
        let t = YoungFunction::TildePhi;
        assert!((t.eval(X1) - t.eval(X1 + 1e-13)).abs() < 1e-12);
        assert!((t.eval(X1 - 1e-13) - 1.0).abs() < 1e-12);
        assert!((t.eval(1.0 - 1e-15) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverses() {
        let cases = [
            YoungFunction::Power(2.0),
            YoungFunction::Power(7.5),
            YoungFunction::ScaledPower(3.0),
            YoungFunction::SubGaussian,
            YoungFunction::EntropyPhi,
            YoungFunction::HeavyTail { k: 5.0, m: 5.0 },
            YoungFunction::HeavyTail { k: 2.0, m: 1.5 },
        ];
        for psi in cases {
            for y in [1e-6, 0.1, 1.0, 3.0, 100.0, 1e6] {
                let x = psi.inverse(y);
                assert!((psi.eval(x) - y).abs() < 1e-9 * y.max(1.0), "{psi} {y}");
            }
        }
    }

    #[test]
    fn heavy_tail_is_continuous_at_k() {
        let h = YoungFunction::HeavyTail { k: 5.0, m: 5.0 };
        assert!((h.eval(5.0) - h.eval(5.0 + 1e-12)).abs() < 1e-6);
        assert_eq!(h.eval(5.0), 3125.0);
    }

    #[test]
    fn conjugate_inverse_power() {
        let p = YoungFunction::Power(3.0);
        for u in [0.1, 1.0, 10.0] {
            let y = p.conjugate_inverse(u);
            assert!((p.conjugate(y) - u).abs() < 1e-10 * u.max(1.0));
        }
        let s = YoungFunction::SubGaussian;
        let y = s.conjugate_inverse(1.0);
        assert!((s.conjugate(y) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn infinite_power() {
        let p = YoungFunction::Power(f64::INFINITY);
        assert_eq!(p.eval(0.5), 0.0);
        assert_eq!(p.eval(1.5), f64::INFINITY);
        assert_eq!(p.inverse(3.0), 1.0);
        assert_eq!(p.conjugate(2.0), 2.0);
        assert_eq!(p.conjugate_inverse(2.0), 2.0);
    }
}
