use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparse_mcc_cli::commands::{self, RunOptions, RunReport};
use sparse_mcc_cli::output::cell;
use sparse_mcc_cli::{CliError, Overrides};

/// Monte Carlo runner for sparse MCC adaptive filters.
#[derive(Parser)]
#[command(name = "sparse-mcc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment (or sweep) described by a config file.
    Run(RunArgs),
    /// Run a sparse-echo config (defaults to MCC, ZAMCC, RZAMCC, CIMMCC).
    Echo(RunArgs),
    /// Estimate the mean-square step-size bounds.
    Bound {
        config: PathBuf,
        /// Report both readings of the mixed-Gaussian `nu1`/`nu2` entries.
        #[arg(long)]
        both_variance_readings: bool,
    },
    /// Print the digest a run of this config would record.
    Check {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "SPARSE_MCC_THREADS")]
    threads: Option<usize>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            overrides: Overrides {
                seed: self.seed,
                trials: self.trials,
            },
            threads: self.threads,
        }
    }
}

fn report(r: &RunReport) {
    let scale = r.plan.resolved.scale;
    for (run, result) in r.plan.runs.iter().zip(&r.results) {
        let name = run.dir_name();
        if !name.is_empty() {
            println!("[{name}]");
        }
        for (label, f) in run.labels.iter().zip(&result.filters) {
            println!(
                "{label:>10}  steady_state_msd={} ({scale:?})  diverged={}/{}",
                cell(f.steady_state_msd),
                f.diverged_trials,
                f.trials
            );
        }
    }
    eprintln!("digest {}", r.manifest.config_digest);
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => report(&commands::run(&args.config, &args.options())?),
        Command::Echo(args) => report(&commands::echo(&args.config, &args.options())?),
        Command::Bound {
            config,
            both_variance_readings,
        } => {
            for (k, v) in commands::bound(&config, both_variance_readings)? {
                println!("{k}={v}");
            }
        }
        Command::Check { config, seed, trials } => {
            println!("{}", commands::digest(&config, Overrides { seed, trials })?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
