// SPDX-License-Identifier: Apache-2.0

//! Report envelope and the json / table / csv renderers.

use clap::ValueEnum;
use rust_decimal::Decimal;
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::money::Usd;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub parameters: Value,
    pub catalog_checksum: String,
    pub tool_version: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub title: Option<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            title: None,
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn titled(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    /// Two-column key/value table.
    pub fn pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        let mut t = Table::new(["field", "value"]);
        for (k, v) in pairs {
            t.row([k.into(), v.into()]);
        }
        t
    }

    fn render_aligned(&self, out: &mut String) {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate().take(cols) {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        if let Some(title) = &self.title {
            out.push_str(title);
            out.push('\n');
        }
        let line = |cells: &[String], out: &mut String| {
            let padded: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
                .collect();
            out.push_str(padded.join("  ").trim_end());
            out.push('\n');
        };
        line(&self.headers, out);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&rule, out);
        for row in &self.rows {
            line(row, out);
        }
    }
}

/// What a subcommand hands back for rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub tables: Vec<Table>,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    /// Nonzero when the command ran but its checks did not hold.
    pub exit_code: i32,
}

impl Outcome {
    pub fn new(result: Value, tables: Vec<Table>) -> Self {
        Outcome {
            result,
            tables,
            inputs: Vec::new(),
            seed: None,
            exit_code: 0,
        }
    }

    pub fn with_inputs(mut self, inputs: Vec<String>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Currency and number formatting shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub full_precision: bool,
}

impl Style {
    /// JSON money: a number rounded to 6 decimals, or the exact decimal as a
    /// string under `--full-precision`.
    pub fn money(&self, usd: Usd) -> Value {
        if self.full_precision {
            Value::String(usd.format(None))
        } else {
            decimal_number(usd.round_dp(6).amount())
        }
    }

    /// Table money: 2 decimals (6 below one cent), or exact under `--full-precision`.
    pub fn money_cell(&self, usd: Usd) -> String {
        if self.full_precision {
            format!("${}", usd.format(None))
        } else if !usd.amount().is_zero() && usd.amount().abs() < Decimal::new(1, 2) {
            format!("${}", usd.format(Some(6)))
        } else {
            format!("${}", usd.format(Some(2)))
        }
    }
}

pub fn decimal_number(d: Decimal) -> Value {
    use rust_decimal::prelude::ToPrimitive;
    json!(d.to_f64().unwrap_or(f64::NAN))
}

/// Integers beyond `u64` fall back to floating point.
pub fn big(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n as f64),
    }
}

pub fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn envelope(manifest: &RunManifest, result: Value) -> CliResult<Value> {
    let mut root = Map::new();
    root.insert("manifest".into(), to_value(manifest)?);
    root.insert("result".into(), result);
    Ok(Value::Object(root))
}

pub fn render(format: Format, manifest: &RunManifest, outcome: &Outcome) -> CliResult<String> {
    match format {
        Format::Json => {
            let doc = envelope(manifest, outcome.result.clone())?;
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Table => {
            let mut out = String::new();
            for (i, t) in outcome.tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                t.render_aligned(&mut out);
            }
            Ok(out)
        }
        Format::Csv => {
            let mut out = String::new();
            for (i, t) in outcome.tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                let fail = |e: csv::Error| CliError::Internal(e.to_string());
                w.write_record(&t.headers).map_err(fail)?;
                for row in &t.rows {
                    w.write_record(row).map_err(fail)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
                out.push_str(&String::from_utf8_lossy(&bytes));
            }
            Ok(out)
        }
    }
}

/// Decimal byte count in the largest unit that keeps it at or above one.
pub fn human_bytes(bytes: u128) -> String {
    const UNITS: [(&str, u128); 5] = [
        ("PB", 1_000_000_000_000_000),
        ("TB", 1_000_000_000_000),
        ("GB", 1_000_000_000),
        ("MB", 1_000_000),
        ("KB", 1_000),
    ];
    for (name, size) in UNITS {
        if bytes >= size {
            let v = Decimal::from_i128_with_scale(bytes as i128, 0) / Decimal::from_i128_with_scale(size as i128, 0);
            return format!("{} {name}", v.round_dp(3).normalize());
        }
    }
    format!("{bytes} B")
}
