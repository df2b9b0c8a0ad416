//! Config-driven experiment runner: parses a TOML experiment description,
//! builds the discrimination problem, runs one of the four modes, and writes
//! byte-stable CSV output.

pub mod config;
pub mod run;

pub use config::{CliError, ExperimentConfig, Mode};
pub use run::{execute, Summary};

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::ResourceGuard(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}
