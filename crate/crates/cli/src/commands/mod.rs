// SPDX-License-Identifier: Apache-2.0

pub mod breakeven;
pub mod catalog;
pub mod comm;
pub mod place;
pub mod repro;
pub mod shuffle;
pub mod simulate;
pub mod workload;

use std::path::Path;

use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::report::Outcome;

/// Subcommand name, recorded parameters, and the rendered outcome.
pub type CmdOutput = (String, Value, Outcome);

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))
}

/// Accepts either a bare document or a report envelope, returning the payload.
pub fn unwrap_report(text: &str, path: &Path) -> CliResult<Value> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::invalid(format!("{} is not valid JSON: {e}", path.display())))?;
    match value {
        Value::Object(mut map) if map.contains_key("manifest") && map.contains_key("result") => {
            Ok(map.remove("result").expect("checked above"))
        }
        other => Ok(other),
    }
}
