//! Command-line harness around the commslide solver library.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use commslide::bench::{
    load_config, rates_from_glob, run_experiment, validate_experiment, ExperimentOutcome,
};

#[derive(Parser)]
#[command(
    name = "commslide",
    version,
    about = "Decentralized consensus optimization: exact primal-dual and communication-sliding solvers over simulated multi-agent networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (N, seed) cell of an experiment config (TOML or JSON; a
    /// cell manifest.json replays that cell byte-identically).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace the config's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Enable or disable the hard bound assertions.
        #[arg(long, value_enum)]
        assert_bounds: Option<Toggle>,
    },
    /// Build and validate the schedules a config implies; do not run.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a log-log convergence slope across matching summary.json files.
    Rates {
        #[arg(long)]
        glob: String,
    },
}

fn print_outcome(outcome: &ExperimentOutcome) {
    for cell in &outcome.cells {
        let primal = cell
            .measured_primal
            .map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "n/a".to_string());
        let feas = cell
            .measured_feas
            .map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "n/a".to_string());
        println!(
            "cell n={} seed={}: comm_rounds={} evals={} primal_gap={} feasibility={}",
            cell.n, cell.seed, cell.comm_rounds, cell.total_oracle_evals, primal, feas
        );
    }
    for assertion in &outcome.assertions {
        println!(
            "assert [{}] {}: {}",
            if assertion.passed { "PASS" } else { "FAIL" },
            assertion.label,
            assertion.detail
        );
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, seed, out, assert_bounds } => {
            let mut cfg = load_config(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if let Some(seed) = seed {
                cfg.seeds = vec![seed];
            }
            if let Some(out) = out {
                cfg.out = Some(out);
            }
            if let Some(toggle) = assert_bounds {
                cfg.assert_bounds = matches!(toggle, Toggle::On);
            }
            let outcome = run_experiment(&cfg).context("running experiment")?;
            print_outcome(&outcome);
            if !outcome.passed {
                eprintln!("experiment finished with failed assertions");
            }
            Ok(outcome.passed)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            let reports = validate_experiment(&cfg).context("building schedules")?;
            let mut all_ok = true;
            for (n, report, inner_ok) in &reports {
                let ok = report.all_passed() && *inner_ok;
                all_ok &= ok;
                println!("N={n}: {}", if ok { "all conditions hold" } else { "FAILED" });
                for check in &report.checks {
                    println!(
                        "  [{}] {} (worst k={}, margin={:.3e})",
                        if check.passed { "ok" } else { "violated" },
                        check.condition.name(),
                        check.worst_k,
                        check.margin
                    );
                }
                println!("  [{}] beta_w", if *inner_ok { "ok" } else { "violated" });
            }
            Ok(all_ok)
        }
        Command::Rates { glob } => {
            let fit = rates_from_glob(&glob).context("fitting rates")?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
