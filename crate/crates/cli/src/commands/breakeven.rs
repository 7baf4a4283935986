// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use clap::Args;
use rust_decimal::prelude::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::money::dec;
use faasim_core::simcore::{
    breakeven_duty_cycle, per_minute_cost_ratio, reprice_to_ratio, serverful_cost, simulate, ColdStartModel,
    FallacyPreset, PlatformConfig,
};
use faasim_core::workloads::fixed_interval_trace;

use super::{read_input, CmdOutput};
use crate::error::{CliError, CliResult};
use crate::report::{to_value, Outcome, Table};
use crate::Ctx;

#[derive(Debug, Args, Serialize)]
pub struct BreakevenArgs {
    /// Serverless-to-serverful per-minute price ratio; derived from the catalog when omitted.
    #[arg(long, conflicts_with = "preset")]
    pub ratio: Option<f64>,
    /// Bundled preset (`fallacy`) or a preset JSON file.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value = "aws-lambda")]
    pub serverless: String,
    #[arg(long, default_value = "aws-ec2")]
    pub serverful: String,
    /// Function memory for the per-minute comparison.
    #[arg(long, default_value_t = 0.5)]
    pub memory_gb: f64,
    /// Busy fractions to cross-check by simulating an hour of one-minute cycles.
    #[arg(long, value_delimiter = ',')]
    pub busy: Vec<f64>,
}

fn load_preset(name: &str) -> CliResult<(FallacyPreset, Option<String>)> {
    let bundled = FallacyPreset::bundled();
    if name == "fallacy" || name == bundled.name {
        return Ok((bundled, None));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::invalid(format!("unknown preset `{name}` (bundled: fallacy)")));
    }
    let preset = serde_json::from_str(&read_input(path)?)
        .map_err(|e| CliError::invalid(format!("{} is not a breakeven preset: {e}", path.display())))?;
    Ok((preset, Some(path.display().to_string())))
}

fn percent(f: f64) -> String {
    format!("{:.2}%", f * 100.0)
}

pub fn run(ctx: &Ctx, args: &BreakevenArgs) -> CliResult<CmdOutput> {
    if !(args.memory_gb.is_finite() && args.memory_gb > 0.0) {
        return Err(CliError::invalid("--memory-gb must be positive"));
    }
    let (preset, inputs) = match &args.preset {
        Some(name) => {
            let (p, input) = load_preset(name)?;
            (Some(p), input.into_iter().collect())
        }
        None => (None, Vec::new()),
    };
    let (serverless_name, serverful_name, memory_gb) = match &preset {
        Some(p) => (p.serverless.clone(), p.serverful.clone(), p.memory_gb),
        None => (args.serverless.clone(), args.serverful.clone(), args.memory_gb),
    };
    let serverless = ctx.catalog.compute(&serverless_name)?;
    let serverful = ctx.catalog.compute(&serverful_name)?;
    let (ratio, source) = match (&preset, args.ratio) {
        (Some(p), _) => (p.ratio, "preset"),
        (None, Some(r)) => (r, "given"),
        (None, None) => (
            per_minute_cost_ratio(serverless, serverful, dec(memory_gb))
                .to_f64()
                .ok_or_else(|| CliError::Internal("ratio out of range".into()))?,
            "catalog",
        ),
    };
    let duty = breakeven_duty_cycle(ratio)?;

    let mut result = Map::new();
    result.insert("ratio".into(), json!(ratio));
    result.insert("ratio_source".into(), json!(source));
    result.insert("breakeven_busy_fraction".into(), json!(duty));
    let mut rows = vec![
        ("ratio".to_string(), format!("{ratio:.4}")),
        ("ratio_source".into(), source.to_string()),
        ("breakeven".into(), percent(duty)),
    ];
    if let Some(p) = &preset {
        result.insert("preset".into(), json!(p.name));
        rows.insert(0, ("preset".into(), p.name.clone()));
    }
    let mut tables = vec![Table::pairs(rows)];

    if !args.busy.is_empty() {
        // Price the function so a minute costs exactly `ratio` serverful minutes.
        let repriced = reprice_to_ratio(serverless, serverful, dec(memory_gb), dec(ratio));
        let mut platform = PlatformConfig::new(repriced);
        platform.cold_start = ColdStartModel::none();
        let always_on = serverful_cost(3600.0, serverful)?;
        let style = ctx.style;
        let mut table = Table::new(["busy", "serverless_usd", "serverful_usd", "cheaper"]).titled("one hour");
        let mut checks = Vec::new();
        for &busy in &args.busy {
            if !(busy > 0.0 && busy <= 1.0) {
                return Err(CliError::invalid(format!("--busy {busy} outside (0, 1]")));
            }
            let trace = fixed_interval_trace(60, 0.0, 60.0, 60.0 * busy, memory_gb)?;
            let r = simulate(&trace, &platform)?;
            let cheaper = if r.cost_usd < always_on {
                "serverless"
            } else if r.cost_usd > always_on {
                "serverful"
            } else {
                "equal"
            };
            table.row([
                percent(busy),
                style.money_cell(r.cost_usd),
                style.money_cell(always_on),
                cheaper.to_string(),
            ]);
            let mut row = Map::new();
            row.insert("busy_fraction".into(), json!(busy));
            row.insert("serverless_usd".into(), style.money(r.cost_usd));
            row.insert("serverful_usd".into(), style.money(always_on));
            row.insert("cheaper".into(), json!(cheaper));
            checks.push(Value::Object(row));
        }
        result.insert("simulated".into(), Value::Array(checks));
        tables.push(table);
    }
    Ok((
        "breakeven".into(),
        to_value(args)?,
        Outcome::new(Value::Object(result), tables).with_inputs(inputs),
    ))
}
