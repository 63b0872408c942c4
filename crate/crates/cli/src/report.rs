//! Summary artifacts and the error split between usage problems (exit 1)
//! and verification failures (exit 2).

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or file plumbing: exit code 1.
    Usage(String),
    /// The computation ran and the verified property failed, or the core
    /// library refused a precondition: exit code 2.
    Verify(String),
}

impl From<annulus_core::Error> for CliError {
    fn from(e: annulus_core::Error) -> Self {
        CliError::Verify(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io error: {e}"))
    }
}

/// One finished operation: what was claimed, what went in, what came out.
pub struct OpOutput {
    pub claim: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub pass: bool,
}

/// Writes out/summary.json. Keys are sorted by serde_json's map ordering,
/// so identical runs produce identical bytes.
pub fn write_summary(dir: &Path, operation: &str, out: &OpOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let doc = json!({
        "operation": operation,
        "claim": out.claim,
        "inputs": out.inputs,
        "results": out.results,
        "pass": out.pass,
    });
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Usage(format!("summary serialization: {e}")))?;
    fs::write(dir.join("summary.json"), text + "\n")?;
    Ok(())
}

/// Creates a CSV artifact in the output directory.
pub fn artifact(dir: &Path, name: &str) -> Result<fs::File, CliError> {
    fs::create_dir_all(dir)?;
    Ok(fs::File::create(dir.join(name))?)
}
