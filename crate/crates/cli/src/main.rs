use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use riscap_cli::config::{ExperimentKind, Overrides};
use riscap_cli::{execute, RunRequest};

/// Capacity bounds and achievable rates for RIS-aided SIMO channels.
#[derive(Debug, Parser)]
#[command(name = "riscap", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentKind,
    /// JSON configuration file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo samples per estimate.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let req = RunRequest {
        kind: args.experiment,
        config: args.config,
        overrides: Overrides { seed: args.seed, samples: args.samples, out: args.out },
        threads: args.threads,
    };
    match execute(&req) {
        Ok(w) => {
            println!("{}", w.csv.display());
            println!("{}", w.svg.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("riscap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
