//! φ-divergences between discrete measures.

use std::fmt;
use std::str::FromStr;

use super::norm::lp_norm;
use crate::error::{Error, Result};
use crate::markov::{check_len, ProbVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Kl,
    Chi2,
    /// Hellinger divergence of order α: `(μ((dν/dμ)^α) − 1)/(α − 1)`.
    Hellinger(f64),
    Tv,
    /// `H_α(ν‖μ) = ‖dν/dμ − 1‖_{L_α(μ)}^α`.
    HAlpha(f64),
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Kl => write!(f, "kl"),
            Divergence::Chi2 => write!(f, "chi2"),
            Divergence::Hellinger(a) => write!(f, "hellinger:{a}"),
            Divergence::Tv => write!(f, "tv"),
            Divergence::HAlpha(a) => write!(f, "h:{a}"),
        }
    }
}

impl FromStr for Divergence {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown divergence '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        let d = match parts.as_slice() {
            ["kl"] => Divergence::Kl,
            ["chi2"] => Divergence::Chi2,
            ["tv"] => Divergence::Tv,
            ["h", a] => Divergence::HAlpha(a.parse().map_err(|_| bad())?),
            ["hellinger", a] => Divergence::Hellinger(a.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        match d {
            Divergence::HAlpha(a) if !(a >= 1.0) => Err(bad()),
            Divergence::Hellinger(a) if !(a > 0.0) || a == 1.0 => Err(bad()),
            _ => Ok(d),
        }
    }
}

/// `D(ν‖μ)`; requires `ν ≪ μ`.
pub fn divergence(nu: &ProbVector, mu: &ProbVector, kind: Divergence) -> Result<f64> {
    check_len(mu.len(), nu.len())?;
    let r = nu.density_wrt(mu)?;
    let w = mu.as_slice();
    let v = match kind {
        // μ(r ln r − r + 1) has no cancellation between terms, unlike ν(ln r).
        Divergence::Kl => w
            .iter()
            .zip(&r)
            .filter(|(&wi, _)| wi > 0.0)
            .map(|(wi, &ri)| if ri > 0.0 { wi * (ri * (ri - 1.0).ln_1p() - (ri - 1.0)) } else { *wi })
            .sum::<f64>()
            .max(0.0),
        Divergence::Chi2 => w.iter().zip(&r).map(|(wi, ri)| wi * (ri - 1.0).powi(2)).sum(),
        Divergence::Tv => 0.5 * w.iter().zip(&r).map(|(wi, ri)| wi * (ri - 1.0).abs()).sum::<f64>(),
        Divergence::Hellinger(a) => {
            let s: f64 = w.iter().zip(&r).filter(|(&wi, _)| wi > 0.0).map(|(wi, ri)| wi * ri.powf(a)).sum();
            (s - 1.0) / (a - 1.0)
        }
        Divergence::HAlpha(a) => {
            let c: Vec<f64> = r.iter().map(|ri| ri - 1.0).collect();
            lp_norm(&c, mu, a).powf(a)
        }
    };
    Ok(v)
}

pub fn kl(nu: &ProbVector, mu: &ProbVector) -> Result<f64> {
    divergence(nu, mu, Divergence::Kl)
}

pub fn chi2(nu: &ProbVector, mu: &ProbVector) -> Result<f64> {
    divergence(nu, mu, Divergence::Chi2)
}

/// Shannon entropy in nats.
pub fn entropy(nu: &ProbVector) -> f64 {
    -nu.as_slice().iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}
