//! `contraction-lab`: bounds, oracles and figure data for finite Markov kernels.
//!
//! Exit codes: 0 success, 2 bad input or parse error, 3 a bound fell below its
//! oracle, 4 every reported bound is vacuous.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod figures;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contraction_lab::par::Exec;

use commands::{BoundCmd, Globals, OracleArgs, RandomKernelArgs, Verdict};
use figures::FigureArgs;

#[derive(Debug, Parser)]
#[command(name = "contraction-lab", version, about = "Contraction, SDPI, mixing and concentration bounds for Markov kernels")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, env = "CONTRACTION_LAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Slack allowed when comparing a bound with its oracle.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the CSV series of a comparison figure.
    Figure(FigureArgs),
    /// Compute one bound for a kernel or scenario.
    Bound {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Check every bound against its oracle; exit 3 on any violation.
    Oracle(OracleArgs),
    /// Print a seeded random kernel as JSON.
    RandomKernel(RandomKernelArgs),
}

fn run(cli: &Cli) -> error::Result<Verdict> {
    let g = Globals {
        seed: cli.seed,
        tol: cli.tol,
        exec: if cli.sequential { Exec::Sequential } else { Exec::Parallel },
    };
    let (table, verdict) = match &cli.command {
        Command::Figure(a) => (figures::run(a, g.seed)?, Verdict::Ok),
        Command::Bound { which } => commands::bound(which, &g)?,
        Command::Oracle(a) => commands::oracle(a, &g)?,
        Command::RandomKernel(a) => {
            let json = commands::random_kernel(a, &g)?;
            match &cli.out {
                Some(p) => std::fs::write(p, json).map_err(|source| error::Error::Io { path: p.clone(), source })?,
                None => std::io::stdout().lock().write_all(json.as_bytes())?,
            }
            return Ok(Verdict::Ok);
        }
    };
    table.write(cli.out.as_ref())?;
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Violation(n)) => {
            eprintln!("error: {n} bound(s) below their oracle");
            ExitCode::from(3)
        }
        Ok(Verdict::Vacuous) => {
            eprintln!("warning: every reported bound is vacuous");
            ExitCode::from(4)
        }
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
