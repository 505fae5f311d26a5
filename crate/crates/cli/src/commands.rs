//! `bound`, `oracle` and `random-kernel`.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use contraction_lab::concentration::{
    binary_sdpi_factor, binary_tail_from_factor, burn_in_lower_bound, doubly_stochastic_concentration,
    empirical_tail, markov_mcdiarmid_bound, ConcentrationScenario,
};
use contraction_lab::contraction::{
    brute_force_contraction, l2_operator_norm, lp_contraction_bound, orlicz_contraction_bound, BruteForceOptions,
    ContractionBound, Direction,
};
use contraction_lab::markov::random_stochastic;
use contraction_lab::mixing::{exact_mixing_time_at, mixing_time_bound_at};
use contraction_lab::orlicz::{Divergence, Flavor, YoungFunction};
use contraction_lab::par::{derive_seed, Exec};
use contraction_lab::sdpi::{
    brute_force_sdpi, hellinger_sdpi_bound, hoeffding_sdpi_bound, subgaussian_sdpi_bound, SdpiSearch,
};
use contraction_lab::{MarkovKernel, ProbVector};

use crate::error::{Context, Error, Result};
use crate::io::{int, load_kernel, load_measure, load_scenario, num, parse_exponent, KernelFile, LoadedKernel, Table};

/// Settings shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: u64,
    pub tol: f64,
    pub exec: Exec,
}

/// What the numbers say, beyond "computed fine".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// Some bound fell below its oracle by more than the tolerance.
    Violation(usize),
    /// Every reported bound is vacuous.
    Vacuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum BoundCmd {
    /// Contraction coefficient bound (L_p or Orlicz).
    Contraction(ContractionArgs),
    /// Strong data-processing constant bound.
    Sdpi(SdpiArgs),
    /// Mixing-time bound.
    Mixing(MixingArgs),
    /// Tail bounds for additive functionals of a scenario chain.
    Concentration(ConcentrationArgs),
    /// Burn-in length needed for the BSC MCMC bound to reach δ.
    BurnIn(BurnInArgs),
}

#[derive(Debug, Args)]
pub struct ContractionArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    /// Young function of the target norm; selects the Orlicz bound.
    #[arg(long)]
    pub psi: Option<YoungFunction>,
    /// Young function of the source norm (defaults to ψ).
    #[arg(long, requires = "psi")]
    pub phi: Option<YoungFunction>,
    #[arg(long, default_value = "L")]
    pub flavor: Flavor,
    #[arg(long, default_value = "2", value_parser = parse_exponent)]
    pub p: f64,
    /// Source exponent (defaults to p; q < p bounds hypercontractivity).
    #[arg(long, value_parser = parse_exponent)]
    pub q: Option<f64>,
    /// Number of steps; the bound is computed for Kᵗ.
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    #[arg(long, default_value = "fwd")]
    pub direction: Direction,
    #[arg(long, value_enum, default_value = "off")]
    pub oracle: Switch,
}

#[derive(Debug, Args)]
pub struct SdpiArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    /// Input measure: "auto" (kernel file's mu, else stationary) or a JSON array file.
    #[arg(long, default_value = "auto")]
    pub mu: String,
    /// chi2, kl, or h:α with α > 1.
    #[arg(long, default_value = "chi2")]
    pub divergence: Divergence,
    #[arg(long, value_enum, default_value = "off")]
    pub oracle: Switch,
}

#[derive(Debug, Args)]
pub struct MixingArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    #[arg(long, default_value = "power:2")]
    pub psi: YoungFunction,
    #[arg(long, default_value = "L")]
    pub flavor: Flavor,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "off")]
    pub oracle: Switch,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Monte Carlo trials (overrides the scenario's "trials"; 0 disables simulation).
    #[arg(long)]
    pub trials: Option<u64>,
    /// One row per chain length 1..=t instead of a single row at t.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Debug, Args)]
pub struct BurnInArgs {
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub lambda: f64,
    /// ‖dν/dπ − 1‖ of the start measure.
    #[arg(long = "sup-dev")]
    pub sup_dev: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Check this kernel instead of the seeded random ones.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// Number of seeded random kernels.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// State-space size of the random kernels.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct RandomKernelArgs {
    #[arg(long, default_value_t = 3)]
    pub m: usize,
}

fn oracle_opts(g: &Globals) -> BruteForceOptions {
    BruteForceOptions { restarts: 16, iterations: 200, seed: g.seed, exec: g.exec }
}

fn sdpi_opts(m: usize, g: &Globals) -> SdpiSearch {
    SdpiSearch { seed: g.seed, exec: g.exec, ..SdpiSearch::for_dim(m) }
}

fn verdict(violations: usize, all_vacuous: bool) -> Verdict {
    if violations > 0 {
        Verdict::Violation(violations)
    } else if all_vacuous {
        Verdict::Vacuous
    } else {
        Verdict::Ok
    }
}

pub fn bound(cmd: &BoundCmd, g: &Globals) -> Result<(Table, Verdict)> {
    match cmd {
        BoundCmd::Contraction(a) => contraction(a, g),
        BoundCmd::Sdpi(a) => sdpi(a, g),
        BoundCmd::Mixing(a) => mixing(a),
        BoundCmd::Concentration(a) => concentration(a, g),
        BoundCmd::BurnIn(a) => burn_in(a),
    }
}

fn contraction(a: &ContractionArgs, g: &Globals) -> Result<(Table, Verdict)> {
    let LoadedKernel { kernel, mu, .. } = load_kernel(&a.kernel)?;
    if a.t == 0 {
        return Err(Error::Input("--t must be at least 1".into()));
    }
    let kt = kernel.t_step(a.t);
    let (psi, phi) = match &a.psi {
        Some(psi) => (psi.clone(), a.phi.clone().unwrap_or_else(|| psi.clone())),
        None => (YoungFunction::power(a.p), YoungFunction::power(a.q.unwrap_or(a.p))),
    };
    let (b, norm_name): (ContractionBound, String) = match &a.psi {
        Some(_) => (
            orlicz_contraction_bound(&kt, &mu, &psi, &phi, a.flavor, a.direction).context("Orlicz bound")?,
            format!("{psi}|{phi}|{}", a.flavor),
        ),
        None => {
            let q = a.q.unwrap_or(a.p);
            (lp_contraction_bound(&kt, &mu, a.p, q, a.direction).context("L_p bound")?, format!("lp:{}:{q}", a.p))
        }
    };
    let exact_l2 = l2_operator_norm(&kt, &mu).context("L2 operator norm")?;
    let oracle = match a.oracle {
        Switch::On => {
            let flavor = if a.psi.is_some() { a.flavor } else { Flavor::Luxemburg };
            Some(
                brute_force_contraction(&kt, &mu, &psi, &phi, flavor, a.direction, &oracle_opts(g))
                    .context("brute-force oracle")?,
            )
        }
        Switch::Off => None,
    };
    let violations = usize::from(oracle.is_some_and(|o| b.value < o - g.tol));
    let mut tab = Table::new(&["direction", "norm", "t", "bound", "method", "exact_l2", "oracle", "vacuous"]);
    tab.push(vec![
        a.direction.to_string(),
        norm_name,
        int(a.t),
        num(b.value),
        b.method.to_string(),
        num(exact_l2),
        oracle.map(num).unwrap_or_default(),
        b.is_vacuous().to_string(),
    ]);
    Ok((tab, verdict(violations, b.is_vacuous())))
}

fn sdpi(a: &SdpiArgs, g: &Globals) -> Result<(Table, Verdict)> {
    let loaded = load_kernel(&a.kernel)?;
    let k = &loaded.kernel;
    let mu = match a.mu.as_str() {
        "auto" => loaded.mu.clone(),
        path => load_measure(&PathBuf::from(path))?,
    };
    let (bound, baseline, baseline_name) = match a.divergence {
        Divergence::Chi2 => {
            let r = hellinger_sdpi_bound(k, &mu, 2.0).context("χ² SDPI bound")?;
            (r.bound, r.baseline.unwrap_or(f64::NAN), "dobrushin")
        }
        Divergence::HAlpha(alpha) => {
            let r = hellinger_sdpi_bound(k, &mu, alpha).context("Hellinger SDPI bound")?;
            (r.bound, r.baseline.unwrap_or(f64::NAN), "dobrushin")
        }
        Divergence::Kl => (
            subgaussian_sdpi_bound(k, &mu).context("KL SDPI bound")?,
            hoeffding_sdpi_bound(k, &mu).context("Hoeffding SDPI constant")?,
            "hoeffding",
        ),
        other => return Err(Error::Input(format!("no SDPI bound for divergence '{other}' (use chi2, kl or h:α)"))),
    };
    let oracle = match a.oracle {
        Switch::On => Some(brute_force_sdpi(k, &mu, a.divergence, &sdpi_opts(k.dim(), g)).context("SDPI oracle")?),
        Switch::Off => None,
    };
    let violations = usize::from(oracle.is_some_and(|o| bound < o - g.tol));
    let vacuous = bound >= 1.0;
    let mut tab = Table::new(&["divergence", "bound", "baseline", "baseline_name", "oracle", "vacuous"]);
    tab.push(vec![
        a.divergence.to_string(),
        num(bound),
        num(baseline),
        baseline_name.into(),
        oracle.map(num).unwrap_or_default(),
        vacuous.to_string(),
    ]);
    Ok((tab, verdict(violations, vacuous)))
}

const MAX_EXACT_STEPS: u64 = 100_000;

fn mixing(a: &MixingArgs) -> Result<(Table, Verdict)> {
    let loaded = load_kernel(&a.kernel)?;
    if !loaded.mu_is_stationary {
        return Err(Error::Input(format!("{}: mu is not stationary for the kernel", a.kernel.display())));
    }
    let r = mixing_time_bound_at(&loaded.kernel, &loaded.mu, &a.psi, a.flavor, a.eps).context("mixing bound")?;
    let exact = match a.oracle {
        Switch::On => Some(
            exact_mixing_time_at(&loaded.kernel, &loaded.mu, &a.psi, a.flavor, a.eps, MAX_EXACT_STEPS)
                .context("exact mixing time")?,
        ),
        Switch::Off => None,
    };
    let violations = match (r.bound_steps, exact) {
        (Some(b), Some(e)) => usize::from(b < e),
        _ => 0,
    };
    let mut tab = Table::new(&["psi", "flavor", "eps", "bound_steps", "exact_steps", "sup_nu_norm", "dual_contraction"]);
    tab.push(vec![
        a.psi.to_string(),
        a.flavor.to_string(),
        num(a.eps),
        r.bound_steps.map(int).unwrap_or_else(|| "inf".into()),
        exact.map(int).unwrap_or_default(),
        num(r.sup_nu_norm),
        num(r.dual_contraction),
    ]);
    Ok((tab, verdict(violations, r.is_vacuous())))
}

/// Binary `(λ, κ)` when the scenario is a single stationary 2×2 channel.
fn binary_channel(scn: &ConcentrationScenario) -> Option<(f64, f64)> {
    let k = &scn.kernels[0];
    if scn.kernels.len() != 1 || k.dim() != 2 {
        return None;
    }
    let pi = k.stationary().ok()?;
    let stationary = scn.start.as_slice().iter().zip(pi.as_slice()).all(|(a, b)| (a - b).abs() < 1e-12);
    let (l, kp) = (k.get(0, 1), k.get(1, 0));
    (stationary && l > 0.0 && kp > 0.0 && l + kp < 1.0).then_some((l, kp))
}

fn is_doubly_stochastic(k: &MarkovKernel) -> bool {
    (0..k.dim()).all(|y| ((0..k.dim()).map(|x| k.get(x, y)).sum::<f64>() - 1.0).abs() < 1e-12)
}

fn concentration(a: &ConcentrationArgs, g: &Globals) -> Result<(Table, Verdict)> {
    let loaded = load_scenario(&a.scenario)?;
    let trials = a.trials.or(loaded.trials).unwrap_or(0);
    if trials > 0 && loaded.g.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Input("'g' must take values in [0, 1]".into()));
    }
    let base = loaded.scenario;
    let lengths: Vec<usize> = if a.sweep { (1..=base.t).collect() } else { vec![base.t] };
    let binary = binary_channel(&base);
    let doubly = base.kernels.len() == 1 && is_doubly_stochastic(&base.kernels[0]);
    let mut tab =
        Table::new(&["t", "mcdiarmid", "binary_sdpi", "doubly_stochastic", "empirical", "wilson_lo", "wilson_hi"]);
    let (mut violations, mut all_vacuous) = (0, true);
    for t in lengths {
        let scn = ConcentrationScenario { t, ..base.clone() };
        let ours = markov_mcdiarmid_bound(&scn).context(format!("t = {t}"))?.value;
        let bin = binary.map(|(l, k)| binary_tail_from_factor(binary_sdpi_factor(l, k), t, scn.eta).value);
        let ds = if doubly {
            Some(doubly_stochastic_concentration(&scn.kernels[0], t, scn.eta, scn.p).context(format!("t = {t}"))?.value)
        } else {
            None
        };
        let emp = if trials > 0 {
            Some(empirical_tail(&scn, &loaded.g, trials, derive_seed(g.seed, t as u64), g.exec).context("simulation")?)
        } else {
            None
        };
        let best = [Some(ours), bin, ds].into_iter().flatten().fold(f64::INFINITY, f64::min);
        all_vacuous &= best >= 1.0;
        if let Some(e) = &emp {
            violations += [Some(ours), bin, ds].into_iter().flatten().filter(|b| *b < e.wilson_lo - g.tol).count();
        }
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        tab.push(vec![
            int(t),
            num(ours),
            opt(bin),
            opt(ds),
            opt(emp.map(|e| e.frequency)),
            opt(emp.map(|e| e.wilson_lo)),
            opt(emp.map(|e| e.wilson_hi)),
        ]);
    }
    Ok((tab, verdict(violations, all_vacuous)))
}

fn burn_in(a: &BurnInArgs) -> Result<(Table, Verdict)> {
    let raw = burn_in_lower_bound(a.delta, a.t, a.eta, a.lambda, a.sup_dev).context("burn-in")?;
    let mut tab = Table::new(&["delta", "t", "eta", "lambda", "t0_real", "t0"]);
    tab.push(vec![num(a.delta), int(a.t), num(a.eta), num(a.lambda), num(raw), num(raw.ceil())]);
    Ok((tab, Verdict::Ok))
}

pub fn random_kernel(a: &RandomKernelArgs, g: &Globals) -> Result<String> {
    let k = random_stochastic(a.m, g.seed).context("random kernel")?;
    let file = KernelFile { matrix: k.rows(), mu: None };
    let mut s = serde_json::to_string_pretty(&file).expect("kernel JSON serializes");
    s.push('\n');
    Ok(s)
}

struct Check {
    name: &'static str,
    bound: f64,
    oracle: f64,
}

/// Every check is "bound ≥ oracle" where the oracle is exact or a lower estimate.
fn checks_for(k: &MarkovKernel, pi: &ProbVector, g: &Globals) -> Result<Vec<Check>> {
    let opts = oracle_opts(g);
    let mut out = Vec::new();
    let l2 = l2_operator_norm(k, pi).context("L2 operator norm")?;
    out.push(Check {
        name: "lp_fwd_p2_vs_exact_l2",
        bound: lp_contraction_bound(k, pi, 2.0, 2.0, Direction::Forward).context("L_p bound")?.value,
        oracle: l2,
    });
    for (name, psi, dir) in [
        ("orlicz_fwd_power3", YoungFunction::Power(3.0), Direction::Forward),
        ("orlicz_dual_power3", YoungFunction::Power(3.0), Direction::Dual),
        ("orlicz_fwd_subgaussian", YoungFunction::SubGaussian, Direction::Forward),
    ] {
        let b = orlicz_contraction_bound(k, pi, &psi, &psi, Flavor::Luxemburg, dir).context(name)?.value;
        let o = brute_force_contraction(k, pi, &psi, &psi, Flavor::Luxemburg, dir, &opts).context(name)?;
        out.push(Check { name, bound: b, oracle: o });
    }
    let search = sdpi_opts(k.dim(), g);
    out.push(Check {
        name: "sdpi_chi2",
        bound: hellinger_sdpi_bound(k, pi, 2.0).context("χ² SDPI")?.bound,
        oracle: brute_force_sdpi(k, pi, Divergence::Chi2, &search).context("χ² oracle")?,
    });
    out.push(Check {
        name: "sdpi_kl",
        bound: subgaussian_sdpi_bound(k, pi).context("KL SDPI")?,
        oracle: brute_force_sdpi(k, pi, Divergence::Kl, &search).context("KL oracle")?,
    });
    let psi = YoungFunction::Power(2.0);
    let r = mixing_time_bound_at(k, pi, &psi, Flavor::Luxemburg, 0.1).context("mixing bound")?;
    if let Some(b) = r.bound_steps {
        let e = exact_mixing_time_at(k, pi, &psi, Flavor::Luxemburg, 0.1, MAX_EXACT_STEPS).context("exact mixing")?;
        out.push(Check { name: "mixing_time_l2", bound: b as f64, oracle: e as f64 });
    }
    let scn = ConcentrationScenario::homogeneous(k.clone(), pi.clone(), 20, 0.25, 2.0);
    let values: Vec<f64> = (0..k.dim()).map(|x| x as f64 / (k.dim() - 1).max(1) as f64).collect();
    let emp = empirical_tail(&scn, &values, 20_000, g.seed, g.exec).context("simulation")?;
    out.push(Check {
        name: "mcdiarmid_vs_wilson_lo",
        bound: markov_mcdiarmid_bound(&scn).context("McDiarmid bound")?.value,
        oracle: emp.wilson_lo,
    });
    Ok(out)
}

pub fn oracle(a: &OracleArgs, g: &Globals) -> Result<(Table, Verdict)> {
    let kernels: Vec<(String, MarkovKernel, ProbVector)> = match &a.kernel {
        Some(path) => {
            let l = load_kernel(path)?;
            if !l.mu_is_stationary {
                return Err(Error::Input(format!("{}: oracle checks need a stationary mu", path.display())));
            }
            vec![(path.display().to_string(), l.kernel, l.mu)]
        }
        None => (0..a.count as u64)
            .map(|j| {
                let k = random_stochastic(a.m, derive_seed(g.seed, j)).context("random kernel")?;
                let pi = k.stationary().context("stationary distribution")?;
                Ok((j.to_string(), k, pi))
            })
            .collect::<Result<_>>()?,
    };
    let mut tab = Table::new(&["kernel", "check", "bound", "oracle", "pass"]);
    let mut violations = 0;
    for (name, k, pi) in &kernels {
        for c in checks_for(k, pi, g)? {
            let pass = c.bound >= c.oracle - g.tol;
            violations += usize::from(!pass);
            tab.push(vec![name.clone(), c.name.into(), num(c.bound), num(c.oracle), pass.to_string()]);
        }
    }
    Ok((tab, verdict(violations, false)))
}
