//! `hntt`: command-line front end for the hybrid-dataflow NTT model.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad configuration or
//! arguments, 3 I/O. Failures print `{"error": {"kind", "message"}}` on
//! standard error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ConfigArgs, DEFAULT_PRIME_FLOOR};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "hntt",
    version,
    about = "Hybrid-dataflow NTT accelerator model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resolve a configuration and discover its NTT prime.
    Params {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Smallest modulus considered when `q` is not given.
        #[arg(long, default_value_t = DEFAULT_PRIME_FLOOR)]
        prime_floor: u64,
        /// Also dump the twiddle tables as CSV.
        #[arg(long, value_name = "PATH")]
        twiddle_csv: Option<PathBuf>,
    },
    /// Run one forward transform through the engine model.
    Transform {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// HPLY input polynomial.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// HPLY output in bit-reversed order.
        #[arg(long, value_name = "PATH")]
        output: PathBuf,
        /// JSON Lines cycle trace.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Check the engine against the golden transform and audit its traces.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = DEFAULT_PRIME_FLOOR)]
        prime_floor: u64,
        /// Random inputs; run `r` uses seed `seed + r`.
        #[arg(long, default_value_t = 10)]
        runs: u64,
    },
    /// Emit the bank layout and its conflict/burst audit.
    Map {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Layout CSV (`index,bank,offset`).
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Audit the naive `i mod 2p` layout instead.
        #[arg(long)]
        naive: bool,
    },
    /// Print the mode schedule, stage classes and twiddle grid.
    Schedule {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = DEFAULT_PRIME_FLOOR)]
        prime_floor: u64,
        /// Write the per-unit twiddle grid as JSON.
        #[arg(long, value_name = "PATH")]
        twiddles: Option<PathBuf>,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Roofline, cycle and bandwidth model.
    Analyze {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// `stage`, `pipeline`, `hybrid` or `all`.
        #[arg(long, default_value = "all")]
        arch: String,
        /// Inclusive range of log2 n, e.g. `8..16`.
        #[arg(long, value_name = "A..B")]
        sweep_n: Option<String>,
        /// Comma-separated list of p.
        #[arg(long, value_name = "LIST")]
        sweep_p: Option<String>,
        /// Measured throughput for a bandwidth-demand report.
        #[arg(long, value_name = "OPS")]
        achieved_ops: Option<f64>,
        /// Roofline CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Params {
            cfg,
            prime_floor,
            twiddle_csv,
        } => commands::params(&cfg.resolve()?, prime_floor, twiddle_csv.as_deref()),
        Command::Transform {
            cfg,
            input,
            output,
            trace,
        } => commands::transform(&cfg.resolve()?, &input, &output, trace.as_deref()),
        Command::Verify {
            cfg,
            prime_floor,
            runs,
        } => commands::verify(&cfg.resolve()?, prime_floor, runs),
        Command::Map { cfg, csv, naive } => commands::map(&cfg.resolve()?, csv.as_deref(), naive),
        Command::Schedule {
            cfg,
            prime_floor,
            twiddles,
            json,
        } => commands::schedule(&cfg.resolve()?, prime_floor, twiddles.as_deref(), json),
        Command::Analyze {
            cfg,
            arch,
            sweep_n,
            sweep_p,
            achieved_ops,
            csv,
        } => commands::analyze(
            &cfg.resolve()?,
            &commands::AnalyzeArgs {
                arch,
                sweep_n,
                sweep_p,
                achieved_ops,
                csv,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config(e.render().to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.code())
        }
    }
}
