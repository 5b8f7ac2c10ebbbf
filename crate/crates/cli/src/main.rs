use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use codedconv_cli::commands;
use codedconv_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "codedconv", version, about = "Coded distributed convolution under stragglers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build execution plans and check worst-case K by enumeration.
    Plan(Common),
    /// Run every strategy on random data under random completion orders.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Add this much to one decoder entry (negative control).
        #[arg(long, hide = true)]
        inject_decode_fault: Option<f64>,
    },
    /// Monte Carlo deadline-failure table as CSV.
    Simulate(Common),
    /// Closed-form exponent report as JSON.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// CSV from `simulate`; adds fitted tail slopes to the report.
        #[arg(long)]
        simulation: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<codedconv_cli::config::Experiment> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        config.validate()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Plan(common) => {
            let exp = common.load()?;
            let (summary, report) = commands::plan(&exp)?;
            eprint!("{summary}");
            emit(common.out.as_deref(), &json(&report)?)?;
            Ok(report
                .plans
                .iter()
                .all(|p| p.brute_force_k.is_none_or(|k| k == p.worst_k)))
        }
        Command::Verify {
            common,
            inject_decode_fault,
        } => {
            let exp = common.load()?;
            let outcomes = commands::verify(&exp, exp.config.seed, inject_decode_fault)?;
            for o in &outcomes {
                eprintln!(
                    "{} {}: {} orders, max relative error {:.3e}, max tasks used {} (worst_k {})",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.strategy,
                    o.orders,
                    o.max_relative_error,
                    o.max_tasks_used,
                    o.worst_k
                );
                if let Some(order) = &o.failing_order {
                    eprintln!("  failing order: {order:?}");
                }
            }
            emit(common.out.as_deref(), &json(&outcomes)?)?;
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::Simulate(common) => {
            let exp = common.load()?;
            let csv = commands::simulate(&exp, exp.config.trials, exp.config.seed)?;
            emit(common.out.as_deref(), &csv)?;
            Ok(true)
        }
        Command::Analyze { common, simulation } => {
            let exp = common.load()?;
            let csv = simulation
                .map(|p| std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let report = commands::analyze(&exp, csv.as_deref())?;
            emit(common.out.as_deref(), &json(&report)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
