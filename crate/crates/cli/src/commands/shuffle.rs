// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::money::dec;
use faasim_core::shuffleplan::{
    all_write_request_cost, plan, price_plan, ExecProfile, ShufflePlan, ShufflePreset, ShuffleProblem,
};
use faasim_core::units::parse_bytes;

use super::{read_input, CmdOutput};
use crate::error::{CliError, CliResult};
use crate::report::{big, decimal_number, human_bytes, to_value, Outcome, Style, Table};
use crate::Ctx;

#[derive(Debug, Subcommand)]
pub enum ShuffleCmd {
    /// Block, transfer and fast-storage counts for a shuffle.
    Plan(PlanArgs),
    /// Dollar cost of a shuffle from execution figures or a preset.
    Price(PriceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    /// Data to shuffle, e.g. 100TB.
    #[arg(long)]
    pub data: String,
    /// Function memory cap, which bounds the block size.
    #[arg(long, default_value = "3GB")]
    pub block: String,
    #[arg(long, default_value_t = 1)]
    pub stages: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PriceArgs {
    /// Bundled preset name (`cloudsort`) or a preset JSON file.
    #[arg(long, conflicts_with_all = ["data", "gb_seconds"])]
    pub preset: Option<String>,
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long, default_value = "3GB")]
    pub block: String,
    #[arg(long, default_value_t = 1)]
    pub stages: u64,
    /// Function GB-seconds consumed.
    #[arg(long)]
    pub gb_seconds: Option<f64>,
    /// Fast-store GB-hours held.
    #[arg(long, default_value_t = 0.0)]
    pub fast_gb_hours: f64,
    /// Write fraction of slow-store requests.
    #[arg(long, default_value_t = 1.0)]
    pub write_fraction: f64,
    /// Slow-store request count; defaults to the plan's.
    #[arg(long)]
    pub requests: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub duration_s: f64,
}

pub fn run(ctx: &Ctx, cmd: &ShuffleCmd) -> CliResult<CmdOutput> {
    match cmd {
        ShuffleCmd::Plan(args) => run_plan(ctx, args),
        ShuffleCmd::Price(args) => run_price(ctx, args),
    }
}

fn plan_json(p: &ShufflePlan, problem: &ShuffleProblem) -> Value {
    let mut m = Map::new();
    m.insert("data_bytes".into(), json!(problem.data_bytes));
    m.insert("block_bytes".into(), json!(problem.function_memory_cap_bytes));
    m.insert("mappers".into(), json!(p.mappers));
    m.insert("reducers".into(), json!(p.reducers));
    m.insert("stages".into(), json!(p.stages));
    m.insert("transfers".into(), big(p.transfers));
    m.insert("io_ops".into(), big(p.io_ops));
    m.insert("slow_store_io_ops".into(), big(p.slow_store_io_ops()));
    m.insert("per_stage_transfers".into(), big(p.per_stage_transfers));
    m.insert("fast_storage_bytes".into(), json!(p.fast_storage_bytes));
    Value::Object(m)
}

fn plan_rows(p: &ShufflePlan, problem: &ShuffleProblem) -> Vec<(String, String)> {
    vec![
        ("data".into(), human_bytes(problem.data_bytes as u128)),
        ("block".into(), human_bytes(problem.function_memory_cap_bytes as u128)),
        ("mappers".into(), p.mappers.to_string()),
        ("reducers".into(), p.reducers.to_string()),
        ("stages".into(), p.stages.to_string()),
        ("transfers".into(), p.transfers.to_string()),
        ("io_ops".into(), p.io_ops.to_string()),
        ("slow_store_io_ops".into(), p.slow_store_io_ops().to_string()),
        ("per_stage_transfers".into(), p.per_stage_transfers.to_string()),
        ("fast_storage".into(), human_bytes(p.fast_storage_bytes as u128)),
    ]
}

fn run_plan(ctx: &Ctx, args: &PlanArgs) -> CliResult<CmdOutput> {
    let problem = ShuffleProblem::new(
        parse_bytes(&args.data, ctx.units)?,
        parse_bytes(&args.block, ctx.units)?,
        args.stages,
    )?;
    let p = plan(&problem)?;
    Ok((
        "shuffle plan".into(),
        to_value(args)?,
        Outcome::new(plan_json(&p, &problem), vec![Table::pairs(plan_rows(&p, &problem))]),
    ))
}

fn load_preset(name: &str) -> CliResult<(ShufflePreset, Option<String>)> {
    if name == "cloudsort" || name == "cloudsort-100tb" {
        return Ok((ShufflePreset::cloudsort(), None));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::invalid(format!(
            "unknown preset `{name}` (bundled: cloudsort)"
        )));
    }
    let preset = ShufflePreset::from_json_str(&read_input(path)?)?;
    Ok((preset, Some(path.display().to_string())))
}

fn cost_rows(style: Style, c: &faasim_core::shuffleplan::ShuffleCostBreakdown) -> Vec<(String, String)> {
    vec![
        ("compute_usd".into(), style.money_cell(c.compute_usd)),
        ("slow_store_request_usd".into(), style.money_cell(c.slow_store_request_usd)),
        ("fast_store_usd".into(), style.money_cell(c.fast_store_usd)),
        ("total_usd".into(), style.money_cell(c.total_usd)),
        ("duration_s".into(), c.duration_s.normalize().to_string()),
    ]
}

fn run_price(ctx: &Ctx, args: &PriceArgs) -> CliResult<CmdOutput> {
    let style = ctx.style;
    let (problem, exec, preset, inputs) = match &args.preset {
        Some(name) => {
            let (preset, input) = load_preset(name)?;
            (preset.problem, preset.exec.clone(), Some(preset), input.into_iter().collect())
        }
        None => {
            let data = args
                .data
                .as_deref()
                .ok_or_else(|| CliError::invalid("pass --preset or --data"))?;
            let problem = ShuffleProblem::new(
                parse_bytes(data, ctx.units)?,
                parse_bytes(&args.block, ctx.units)?,
                args.stages,
            )?;
            let exec = ExecProfile {
                function_gb_seconds: dec(args.gb_seconds.unwrap_or(0.0)),
                fast_store_gb_hours: dec(args.fast_gb_hours),
                slow_store_write_fraction: dec(args.write_fraction),
                slow_store_requests: args.requests.map(u128::from),
                duration_s: dec(args.duration_s),
                ..ExecProfile::default()
            };
            (problem, exec, None, Vec::new())
        }
    };
    let p = plan(&problem)?;
    let cost = price_plan(&p, &ctx.catalog, &exec)?;
    let all_write = all_write_request_cost(&p, &ctx.catalog, &exec.slow_store)?;

    let mut cost_json = Map::new();
    cost_json.insert("compute_usd".into(), style.money(cost.compute_usd));
    cost_json.insert("slow_store_request_usd".into(), style.money(cost.slow_store_request_usd));
    cost_json.insert("fast_store_usd".into(), style.money(cost.fast_store_usd));
    cost_json.insert("total_usd".into(), style.money(cost.total_usd));
    cost_json.insert("duration_s".into(), decimal_number(cost.duration_s));

    let mut result = Map::new();
    result.insert("plan".into(), plan_json(&p, &problem));
    result.insert("cost".into(), Value::Object(cost_json));
    result.insert("all_write_request_usd".into(), style.money(all_write));
    let mut rows = cost_rows(style, &cost);
    rows.push(("all_write_request_usd".into(), style.money_cell(all_write)));
    if let Some(preset) = preset {
        let matches = preset.matches(&cost);
        let mut pj = Map::new();
        pj.insert("name".into(), json!(preset.name));
        pj.insert("expected_total_usd".into(), style.money(preset.expected.total_usd));
        pj.insert("matches_expected".into(), json!(matches));
        result.insert("preset".into(), Value::Object(pj));
        rows.insert(0, ("preset".into(), preset.name.clone()));
        rows.push(("matches_expected".into(), matches.to_string()));
    }
    let tables = vec![
        Table::pairs(rows).titled("cost"),
        Table::pairs(plan_rows(&p, &problem)).titled("plan"),
    ];
    Ok((
        "shuffle price".into(),
        to_value(args)?,
        Outcome::new(Value::Object(result), tables).with_inputs(inputs),
    ))
}
