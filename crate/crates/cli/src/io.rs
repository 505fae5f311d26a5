//! Kernel and scenario JSON, and CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use contraction_lab::concentration::ConcentrationScenario;
use contraction_lab::{MarkovKernel, ProbVector};
use serde::{Deserialize, Serialize};

use crate::error::{Context, Error, Result};

#[derive(Debug, Serialize, Deserialize)]
pub struct KernelFile {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

/// Kernel plus the measure it is analysed under (the file's `mu`, else the stationary law).
pub struct LoadedKernel {
    pub kernel: MarkovKernel,
    pub mu: ProbVector,
    pub mu_is_stationary: bool,
}

pub fn load_kernel(path: &Path) -> Result<LoadedKernel> {
    let file: KernelFile = read_json(path)?;
    let ctx = || format!("{}", path.display());
    let kernel = MarkovKernel::from_rows(&file.matrix).context(ctx())?;
    let (mu, given) = match file.mu {
        Some(w) => (ProbVector::new(w).context(format!("{}: mu", path.display()))?, true),
        None => (kernel.stationary().context(format!("{}: stationary distribution", path.display()))?, false),
    };
    let mu_is_stationary = !given || kernel.stationarity_residual(&mu) <= contraction_lab::contraction::STATIONARY_TOL;
    Ok(LoadedKernel { kernel, mu, mu_is_stationary })
}

pub fn load_measure(path: &Path) -> Result<ProbVector> {
    let w: Vec<f64> = read_json(path)?;
    ProbVector::new(w).context(format!("{}", path.display()))
}

/// `p` may be given as a number or as the string "inf".
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Num(f64),
    Text(#[serde(deserialize_with = "inf_only")] f64),
}

fn inf_only<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse_exponent(&s).map_err(serde::de::Error::custom)
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Num(v) | Exponent::Text(v) => v,
        }
    }
}

pub fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" | "Inf" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("'{s}' is not a number or 'inf'")),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub kernels: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub kernel: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    pub t: usize,
    #[serde(default)]
    pub t0: usize,
    pub eta: f64,
    #[serde(default = "default_p")]
    pub p: Exponent,
    /// Per-state values of the averaged function, in `[0, 1]`.
    #[serde(default)]
    pub g: Option<Vec<f64>>,
    #[serde(default)]
    pub trials: Option<u64>,
}

fn default_p() -> Exponent {
    Exponent::Num(2.0)
}

pub struct LoadedScenario {
    pub scenario: ConcentrationScenario,
    pub g: Vec<f64>,
    pub trials: Option<u64>,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let f: ScenarioFile = read_json(path)?;
    let name = path.display().to_string();
    let matrices = match (f.kernels, f.kernel) {
        (Some(ks), None) => ks,
        (None, Some(k)) => vec![k],
        _ => return Err(Error::Input(format!("{name}: give exactly one of 'kernel' or 'kernels'"))),
    };
    let kernels = matrices
        .iter()
        .map(|m| MarkovKernel::from_rows(m))
        .collect::<contraction_lab::Result<Vec<_>>>()
        .context(name.clone())?;
    if kernels.is_empty() {
        return Err(Error::Input(format!("{name}: 'kernels' is empty")));
    }
    let start = match f.start {
        Some(w) => ProbVector::new(w).context(format!("{name}: start"))?,
        None => kernels[0].stationary().context(format!("{name}: stationary start"))?,
    };
    let m = kernels[0].dim();
    let g = f.g.unwrap_or_else(|| (0..m).map(|x| if m > 1 { x as f64 / (m - 1) as f64 } else { 0.0 }).collect());
    let scenario = ConcentrationScenario { kernels, start, t: f.t, t0: f.t0, eta: f.eta, p: f.p.value() };
    scenario.validate().context(name.clone())?;
    if g.len() != m {
        return Err(Error::Input(format!("{name}: 'g' has {} entries, expected {m}", g.len())));
    }
    Ok(LoadedScenario { scenario, g, trials: f.trials })
}

/// `%.17g`: 17 significant digits, shortest of fixed and scientific notation.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{v:.*}", (16 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table, kept in memory so rows can be produced in any order and written once.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: Option<&PathBuf>) -> Result<()> {
        let sink: Box<dyn Write> = match out {
            Some(p) => Box::new(fs::File::create(p).map_err(|source| Error::Io { path: p.clone(), source })?),
            None => Box::new(std::io::stdout().lock()),
        };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(sink);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    fmt17(v)
}

pub fn int<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}
