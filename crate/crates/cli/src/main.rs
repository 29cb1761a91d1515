//! `tangle`: command-line front end for the tripartite entanglement measures.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, parse or input error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tangle_core::monotone_lab;
use tangle_core::quasi_pure::sweep_csv;
use tangle_core::states::{read_density, read_state};
use tangle_core::tau_mixed::{minimize_roof_with, RoofOptions};
use tangle_core::{fig1_sweep, tau, tau_a, tau_expanded, SweepState};

#[derive(Parser)]
#[command(name = "tangle", version, about = "Genuine tripartite entanglement of (2x2xn) states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// tau of a pure state file.
    Tau {
        input: PathBuf,
        /// Evaluate by direct expansion and report the difference to the Gram route.
        #[arg(long)]
        expanded: bool,
    },
    /// Quasi-pure estimate tau_a of a density file.
    #[command(name = "tau-a")]
    TauA { input: PathBuf },
    /// Convex-roof upper bound of a density file.
    Mixed {
        input: PathBuf,
        /// Number of ensemble members N (default 2r).
        #[arg(long)]
        ensemble_size: Option<usize>,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// tau_a along x|psi><psi| + (1-x) I/(4n), written as CSV.
    Sweep {
        #[arg(long, value_enum)]
        state: SweepTag,
        #[arg(long, default_value_t = 0.3)]
        x_min: f64,
        #[arg(long, default_value_t = 1.0)]
        x_max: f64,
        #[arg(long, default_value_t = 71, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Trials per party-C dimension (suite-specific default).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepTag {
    GhzPrime,
    WPrime,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Monotonicity,
    LuInvariance,
    Reduction,
    ZeroSet,
    PathEquivalence,
}

impl Suite {
    fn default_trials(self) -> usize {
        match self {
            Suite::Monotonicity => 1000,
            Suite::LuInvariance | Suite::ZeroSet => 500,
            Suite::Reduction | Suite::PathEquivalence => 2000,
        }
    }
}

/// Suite verdict: the summary line and whether it passed.
struct Verdict {
    pass: bool,
    summary: String,
}

fn run_tau(input: &PathBuf, expanded: bool) -> Result<()> {
    let s = read_state(input).with_context(|| format!("reading {}", input.display()))?;
    let gram = tau(&s)?;
    if expanded {
        let value = tau_expanded(&s);
        println!("{value:.10}");
        println!("delta={:.3e}", (value - gram).abs());
    } else {
        println!("{gram:.10}");
    }
    Ok(())
}

fn run_tau_a(input: &PathBuf) -> Result<()> {
    let rho = read_density(input).with_context(|| format!("reading {}", input.display()))?;
    println!("{:.10}", tau_a(&rho)?);
    Ok(())
}

fn run_mixed(input: &PathBuf, ensemble_size: Option<usize>, restarts: usize, seed: u64) -> Result<()> {
    let rho = read_density(input).with_context(|| format!("reading {}", input.display()))?;
    let result = minimize_roof_with(
        &rho,
        &RoofOptions {
            ensemble_size,
            restarts,
            seed,
            ..Default::default()
        },
    )?;
    println!(
        "tau_upper_bound={:.10} N={} restarts={restarts} seed={seed}",
        result.upper_bound, result.ensemble_size
    );
    println!(
        "rank={} eigen_ensemble={:.10} evaluations={} converged={}",
        result.rank, result.eigen_ensemble, result.evaluations, result.converged
    );
    for (i, (p, t)) in result.per_member.iter().enumerate() {
        println!("member {i} p={p:.10} tau={t:.10}");
    }
    Ok(())
}

fn run_sweep(tag: SweepTag, x_min: f64, x_max: f64, steps: u64, out: &PathBuf) -> Result<()> {
    let state = match tag {
        SweepTag::GhzPrime => SweepState::GhzPrime,
        SweepTag::WPrime => SweepState::WPrime,
    };
    let records = fig1_sweep(&state, x_min, x_max, steps as usize)?;
    let mut file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    file.write_all(sweep_csv(&records).as_bytes())
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn run_verify(suite: Suite, trials: usize, seed: u64) -> Result<Verdict> {
    Ok(match suite {
        Suite::Monotonicity => {
            let mut violations = 0;
            let mut worst = f64::NEG_INFINITY;
            for n in [2, 3] {
                let report = monotone_lab::check_monotonicity(n, trials, seed)?;
                violations += report.violations;
                worst = worst.max(report.worst_excess);
            }
            Verdict {
                pass: violations == 0,
                summary: format!("{violations} violations (worst excess {worst:.3e})"),
            }
        }
        Suite::LuInvariance => {
            let mut worst: f64 = 0.0;
            for n in 2..=4 {
                worst = worst.max(monotone_lab::check_lu_invariance(n, trials, seed)?.max_deviation);
            }
            Verdict {
                pass: worst < 1e-9,
                summary: format!("max|tau before - tau after| = {worst:.3e}"),
            }
        }
        Suite::Reduction => {
            let worst = monotone_lab::check_reduction(trials, seed)?;
            Verdict {
                pass: worst < 1e-8,
                summary: format!("max|tau^2 - tangle/2| = {worst:.3e}"),
            }
        }
        Suite::ZeroSet => {
            let report = monotone_lab::check_zero_set(trials, seed, 2..=4)?;
            Verdict {
                pass: report.max() < 1e-10,
                summary: format!(
                    "max tau = {:.3e} (w_222 {:.3e}, AB|C {:.3e}, A|BC {:.3e})",
                    report.max(),
                    report.w_222,
                    report.max_ab_c,
                    report.max_a_bc
                ),
            }
        }
        Suite::PathEquivalence => {
            let worst = monotone_lab::check_path_equivalence(trials, seed, 2..=5)?;
            Verdict {
                pass: worst < 1e-10,
                summary: format!("max|tau - tau_expanded| = {worst:.3e}"),
            }
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Tau { input, expanded } => run_tau(input, *expanded).map(|()| None),
        Command::TauA { input } => run_tau_a(input).map(|()| None),
        Command::Mixed {
            input,
            ensemble_size,
            restarts,
            seed,
        } => run_mixed(input, *ensemble_size, *restarts, *seed).map(|()| None),
        Command::Sweep {
            state,
            x_min,
            x_max,
            steps,
            out,
        } => run_sweep(*state, *x_min, *x_max, *steps, out).map(|()| None),
        Command::Verify { suite, trials, seed } => {
            run_verify(*suite, trials.unwrap_or(suite.default_trials()), *seed).map(Some)
        }
    };
    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(verdict)) => {
            println!("{}: {}", if verdict.pass { "pass" } else { "fail" }, verdict.summary);
            if verdict.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
