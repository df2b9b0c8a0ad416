use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctcdisc_cli::{execute, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "ctcdisc",
    about = "State discrimination experiments via iterated CTC-simulation circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Dotted-key overrides applied before parsing, e.g. -O n=50 or
        /// -O problem.builtin=\"bb84\".
        #[arg(long = "override", short = 'O', value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Directory for output files.
        #[arg(long = "out", default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            overrides,
            out,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("config error: cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let cfg = match ExperimentConfig::from_toml_with_overrides(&text, &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            match execute(&cfg, &out) {
                Ok(summary) => {
                    println!("{summary}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
