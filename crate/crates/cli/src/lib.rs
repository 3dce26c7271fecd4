//! Command-line front end of the Szilard engine simulator.
//!
//! Each command writes its data files plus a `*_report.json` into the output
//! directory. Every file starts with the config hash and the physical
//! constants; wall-clock timings go to `timings.json` only, so everything
//! else is byte-identical across reruns of the same config.

pub mod commands;
pub mod config;
pub mod report;

use szilard_core::Error;

pub use commands::{cmd_cycle, cmd_density, cmd_qbl, cmd_sweep, DensityArgs, SweepWhich};
pub use config::{Overrides, RunConfig};
pub use report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] Error),
    /// Sweep points that could not be computed; the files are still written.
    #[error("{failed} of {total} sweep points failed")]
    PointsFailed { failed: usize, total: usize },
}

impl CliError {
    /// 2 config/usage, 3 numerical invariant, 4 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Usage(_) | Error::Geometry(_) | Error::OutOfValidity { .. } => 2,
                Error::Invariant { .. } => 3,
                Error::Solver { .. } | Error::Truncation { .. } | Error::EmptySpectrum { .. } => 4,
            },
            CliError::PointsFailed { .. } => 4,
        }
    }
}
