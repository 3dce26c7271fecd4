use std::fs;
use std::path::Path;

use serde::Serialize;
use szilard_core::Constants;

use crate::config::RunConfig;
use crate::CliError;

pub const TOOL: &str = "szilard";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Self-contained record of one command: the config that produced it, the
/// constants used and the results.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub constants: Constants,
    pub results: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str, cfg: &RunConfig, results: serde_json::Value) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config_sha256: cfg.hash(),
            config: cfg.physics_json(),
            constants: Constants::codata2018(),
            results,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// `#`-prefixed lines put at the top of text and CSV outputs.
pub fn metadata_header(command: &str, cfg: &RunConfig) -> String {
    let c = Constants::codata2018();
    format!(
        "# {TOOL} {VERSION} {command}\n# config_sha256 {}\n# config {}\n# constants h={:e} J s, k={:e} J/K, m={:e} kg\n",
        cfg.hash(),
        cfg.physics_json(),
        c.h,
        c.k,
        c.m
    )
}

/// Wall-clock seconds per operation, kept apart from the reproducible outputs.
pub fn write_timings(dir: &Path, command: &str, timings: &[(&str, f64)]) -> Result<(), CliError> {
    let ops: serde_json::Map<String, serde_json::Value> = timings.iter().map(|(k, v)| (k.to_string(), (*v).into())).collect();
    let v = serde_json::json!({ "command": command, "seconds": ops });
    fs::write(dir.join("timings.json"), format!("{v:#}\n"))?;
    Ok(())
}
