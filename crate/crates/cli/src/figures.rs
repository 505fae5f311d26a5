//! CSV series behind each comparison figure.

use clap::{Args, ValueEnum};
use contraction_lab::concentration::{
    binary_hyper_factor, binary_hyper_factor_literal, binary_sdpi_factor, binary_sdpi_factor_literal,
    binary_tail_from_factor, literature_baselines, literature_crossover, literature_crossover_exact, mcmc_tail_bounds,
    start_deviation, McmcChain,
};
use contraction_lab::contraction::{
    exact_l2_contraction, lp_contraction_bound, riesz_thorin_baseline, semigroup_bounds, Direction,
};
use contraction_lab::markov::{lazy_graph_walk, random_stochastic, Graph};
use contraction_lab::mixing::heavy_tail_comparison;
use contraction_lab::orlicz::kl;
use contraction_lab::par::derive_seed;
use contraction_lab::sdpi::{
    binary_kl_hoeffding_bound, binary_kl_quadratic_bound, graph_chi2_bound, graph_kl_bounds, hoeffding_sdpi_bound,
};
use contraction_lab::{MarkovKernel, ProbVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Context, Error, Result};
use crate::io::{int, num, parse_exponent, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// Semigroup hypercontractivity bound against Stein interpolation.
    Stein,
    /// L_p bound on K^t against Riesz-Thorin interpolation.
    Interpolation,
    /// Heavy-tail Orlicz event bound against the L_p event bound.
    Powerlaw,
    /// MCMC tail bound after burn-in against Fan et al.
    Mcmc,
    /// Binary-channel KL SDPI bounds along ν.
    KlBinary,
    /// Complete-graph KL SDPI bounds along λ.
    KlGraph,
    /// Path-graph χ² SDPI bound along λ.
    Chi2Path,
    /// Binary-chain tail bounds against Paulin, Fan and Marton.
    Concentration,
    /// η² thresholds above which the binary tail bound wins.
    ConcentrationEta,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Figure to produce.
    #[arg(value_enum, required_unless_present = "figure")]
    pub name: Option<FigureId>,
    /// Same as the positional name.
    #[arg(long = "figure", value_enum, conflicts_with = "name")]
    pub figure: Option<FigureId>,
    /// Norm exponent (the measure parameter μ₀ for kl-binary); "inf" allowed.
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<f64>,
    /// Horizon: chain length, number of time points, or t_∞ for stein.
    #[arg(long)]
    pub t: Option<f64>,
    /// Burn-in steps for mcmc.
    #[arg(long)]
    pub t0: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Crossover probability (λ); for mcmc, switches to BSC(λ).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Second crossover probability (κ) for binary channels.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// State-space size of random kernels.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of kernels, vertices or grid points, depending on the figure.
    #[arg(long)]
    pub n: Option<usize>,
}

impl FigureArgs {
    pub fn id(&self) -> FigureId {
        self.name.or(self.figure).expect("clap enforces a figure name")
    }
}

pub fn run(args: &FigureArgs, seed: u64) -> Result<Table> {
    match args.id() {
        FigureId::Stein => stein(args, seed),
        FigureId::Interpolation => interpolation(args, seed),
        FigureId::Powerlaw => powerlaw(args),
        FigureId::Mcmc => mcmc(args, seed),
        FigureId::KlBinary => kl_binary(args),
        FigureId::KlGraph => kl_graph(args, seed),
        FigureId::Chi2Path => chi2_path(args),
        FigureId::Concentration => concentration(args),
        FigureId::ConcentrationEta => concentration_eta(args),
    }
}

fn kernel(m: usize, seed: u64, j: u64) -> Result<(MarkovKernel, ProbVector)> {
    let k = random_stochastic(m, derive_seed(seed, j)).context(format!("random kernel {j}"))?;
    let pi = k.stationary().context(format!("random kernel {j}"))?;
    Ok((k, pi))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Input(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn steps(name: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(Error::Input(format!("--{name} must be a positive integer, got {v}")))
    }
}

fn stein(a: &FigureArgs, seed: u64) -> Result<Table> {
    let count = a.n.unwrap_or(8);
    let t_inf = positive("t", a.t.unwrap_or(2.0))?;
    let points = 40;
    let mut tab = Table::new(&["kernel", "t", "p", "ours", "stein"]);
    for j in 0..count as u64 {
        let k = random_stochastic(a.m.unwrap_or(2), derive_seed(seed, j)).context("random kernel")?;
        for i in 0..points {
            let t = t_inf * i as f64 / points as f64;
            let s = semigroup_bounds(&k, t, t_inf).context(format!("kernel {j}, t = {t}"))?;
            tab.push(vec![int(j), num(t), num(s.p), num(s.ours), num(s.stein)]);
        }
    }
    Ok(tab)
}

fn interpolation(a: &FigureArgs, seed: u64) -> Result<Table> {
    let count = a.n.unwrap_or(100);
    let m = a.m.unwrap_or(5);
    let p = a.p.unwrap_or(100.0);
    let t = steps("t", a.t.unwrap_or(10.0))?;
    let mut tab = Table::new(&["kernel", "gamma", "ours", "riesz_thorin"]);
    for j in 0..count as u64 {
        let (k, pi) = kernel(m, seed, j)?;
        let ours = lp_contraction_bound(&k.t_step(t), &pi, p, p, Direction::Forward).context("L_p bound")?.value;
        let gamma = exact_l2_contraction(&k, &pi).context("exact L2 contraction")?;
        tab.push(vec![int(j), num(gamma), num(ours), num(riesz_thorin_baseline(gamma, p, t))]);
    }
    Ok(tab)
}

fn powerlaw(a: &FigureArgs) -> Result<Table> {
    let n_max = a.n.unwrap_or(100) as u32;
    let eps = a.eps.unwrap_or(0.5);
    let p = a.p.unwrap_or(1.09);
    let rows = heavy_tail_comparison(2..=n_max, 2.1, eps, 5.0, 5.0, p).context("heavy-tail comparison")?;
    let mut tab = Table::new(&["n", "pi_e", "heavy", "lp"]);
    for r in rows {
        tab.push(vec![int(r.n), num(r.pi_e), num(r.heavy), num(r.lp)]);
    }
    Ok(tab)
}

fn mcmc(a: &FigureArgs, seed: u64) -> Result<Table> {
    let p = a.p.unwrap_or(100.0);
    let t0 = a.t0.unwrap_or(100);
    let eta = positive("eta", a.eta.unwrap_or(0.5))?;
    let t_max = steps("t", a.t.unwrap_or(200.0))?;
    let (chain, pi) = match a.lambda {
        Some(l) => (McmcChain::bsc(l, t0).context("BSC chain")?, ProbVector::uniform(2)),
        None => {
            let (k, pi) = kernel(a.m.unwrap_or(10), seed, 0)?;
            (McmcChain::from_kernel(&k, p, t0).context("MCMC chain")?, pi)
        }
    };
    let nu = ProbVector::dirac(pi.len(), 0);
    let (dev, sup) = start_deviation(&nu, &pi, p).context("start deviation")?;
    let mut tab = Table::new(&["t", "ours", "fan"]);
    for t in 1..=t_max {
        let b = mcmc_tail_bounds(&chain, t, t0, eta, p, dev, sup);
        tab.push(vec![int(t), num(b.ours), num(b.fan)]);
    }
    Ok(tab)
}

fn kl_binary(a: &FigureArgs) -> Result<Table> {
    let lambda = a.lambda.unwrap_or(0.1);
    let kappa = a.kappa.unwrap_or(0.1);
    let s = a.p.unwrap_or(0.4);
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Input(format!("--p (the measure parameter) must lie in (0, 1), got {s}")));
    }
    let points = a.n.unwrap_or(100);
    let k = contraction_lab::markov::general_binary(lambda, kappa).context("binary channel")?;
    let mu = ProbVector::new(vec![s, 1.0 - s]).context("measure")?;
    let mut tab = Table::new(&["q", "actual", "ours", "quadratic"]);
    for i in 1..points {
        let q = s * i as f64 / points as f64;
        let nu = ProbVector::new(vec![q, 1.0 - q]).context("ν")?;
        let actual = kl(&k.push(&nu), &k.push(&mu)).context("KL")?;
        let ours = binary_kl_hoeffding_bound(lambda, kappa, s, q).context("binary KL bound")?;
        let quad = binary_kl_quadratic_bound(lambda, kappa, s, q).context("quadratic bound")?;
        tab.push(vec![num(q), num(actual), num(ours), num(quad)]);
    }
    Ok(tab)
}

fn kl_graph(a: &FigureArgs, seed: u64) -> Result<Table> {
    let v = a.m.unwrap_or(3);
    if v < 2 {
        return Err(Error::Input(format!("--m (number of vertices) must be at least 2, got {v}")));
    }
    let points = a.n.unwrap_or(100);
    let nu = ProbVector::random(v, &mut ChaCha8Rng::seed_from_u64(seed));
    let max = (v as f64 - 1.0) / v as f64;
    let mut tab = Table::new(&["lambda", "ours", "raginsky"]);
    for i in 0..points {
        let lam = max * i as f64 / points as f64;
        let b = graph_kl_bounds(v, lam, Some(&nu)).context(format!("λ = {lam}"))?;
        if b.ours.min(b.raginsky) <= 1.0 {
            tab.push(vec![num(lam), num(b.ours), num(b.raginsky)]);
        }
    }
    Ok(tab)
}

fn chi2_path(a: &FigureArgs) -> Result<Table> {
    let points = a.n.unwrap_or(100);
    let g = Graph::path(3);
    let pi = g.degree_measure().context("degree measure")?;
    let mut tab = Table::new(&["lambda", "ours", "hoeffding"]);
    for i in 0..=points {
        let lam = i as f64 / points as f64;
        let ours = graph_chi2_bound(&g, lam).context(format!("λ = {lam}"))?;
        let walk = lazy_graph_walk(&g, lam).context(format!("λ = {lam}"))?;
        let base = hoeffding_sdpi_bound(&walk, &pi).context(format!("λ = {lam}"))?;
        tab.push(vec![num(lam), num(ours), num(base)]);
    }
    Ok(tab)
}

fn binary_params(a: &FigureArgs, lambda: f64, kappa: f64) -> Result<(f64, f64, usize)> {
    let lambda = a.lambda.unwrap_or(lambda);
    let kappa = a.kappa.unwrap_or(kappa);
    if !(lambda > 0.0 && kappa > 0.0 && lambda + kappa < 1.0) {
        return Err(Error::Input(format!("need λ, κ > 0 and λ + κ < 1 (got {lambda}, {kappa})")));
    }
    Ok((lambda, kappa, steps("t", a.t.unwrap_or(100.0))?))
}

fn concentration(a: &FigureArgs) -> Result<Table> {
    let (lambda, kappa, t_max) = binary_params(a, 1.0 / 3.0, 0.25)?;
    let eta = positive("eta", a.eta.unwrap_or(0.65))?;
    let stated = binary_sdpi_factor_literal(lambda, kappa);
    let relabelled = binary_sdpi_factor(lambda, kappa);
    let hyper = binary_hyper_factor_literal(lambda, kappa);
    let hyper_rel = binary_hyper_factor(lambda, kappa);
    let mut tab = Table::new(&[
        "t",
        "ours_stated",
        "ours_relabelled",
        "hyper_stated",
        "hyper_relabelled",
        "paulin",
        "fan",
        "marton",
    ]);
    for t in 2..=t_max {
        let lit = literature_baselines(lambda, kappa, t, eta);
        let tail = |f| binary_tail_from_factor(f, t, eta).value;
        tab.push(vec![
            int(t),
            num(tail(stated)),
            num(tail(relabelled)),
            num(tail(hyper)),
            num(tail(hyper_rel)),
            num(lit.paulin),
            num(lit.fan),
            num(lit.marton),
        ]);
    }
    Ok(tab)
}

fn concentration_eta(a: &FigureArgs) -> Result<Table> {
    // κ ≥ λ keeps ln(2ϑκ/λ) positive, so the leading-order thresholds are defined.
    let (lambda, kappa, t_max) = binary_params(a, 0.25, 1.0 / 3.0)?;
    let stated = binary_sdpi_factor_literal(lambda, kappa);
    let mut tab =
        Table::new(&["t", "eta2_paulin", "eta2_fan", "eta2_marton", "lead_paulin", "lead_fan", "lead_marton"]);
    for t in 2..=t_max {
        let ex = literature_crossover_exact(lambda, kappa, t, stated);
        let lead = literature_crossover(lambda, kappa, t);
        tab.push(vec![int(t), num(ex[0]), num(ex[1]), num(ex[2]), num(lead[0]), num(lead[1]), num(lead[2])]);
    }
    Ok(tab)
}
