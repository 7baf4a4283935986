// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::simcore::{simulate, ColdStartModel, PlatformConfig, DEFAULT_KEEP_ALIVE_S};
use faasim_core::units::parse_seconds;
use faasim_core::workloads::InvocationTrace;

use super::{read_input, unwrap_report, CmdOutput};
use crate::error::{CliError, CliResult};
use crate::report::{to_value, Outcome, Table};
use crate::Ctx;

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Invocation trace JSON, bare or inside a report.
    #[arg(long)]
    pub trace: PathBuf,
    /// Compute service billed for each invocation.
    #[arg(long, default_value = "aws-lambda")]
    pub service: String,
    /// Idle time before an instance is retired, e.g. 10m.
    #[arg(long)]
    pub keep_alive: Option<String>,
    #[arg(long, default_value = "0.5s")]
    pub t_schedule: String,
    #[arg(long, default_value = "0s")]
    pub t_env: String,
    #[arg(long, default_value = "0s")]
    pub t_app: String,
    /// Environments started ahead of the first arrival.
    #[arg(long, default_value_t = 0)]
    pub prestarted: u64,
    /// Include one row per invocation.
    #[arg(long)]
    pub details: bool,
}

pub fn run(ctx: &Ctx, args: &SimulateArgs) -> CliResult<CmdOutput> {
    let text = read_input(&args.trace)?;
    let value = unwrap_report(&text, &args.trace)?;
    let trace: InvocationTrace = serde_json::from_value(value)
        .map_err(|e| CliError::invalid(format!("{} is not an invocation trace: {e}", args.trace.display())))?;

    let mut platform = PlatformConfig::new(ctx.catalog.compute(&args.service)?.clone());
    platform.cold_start = ColdStartModel {
        t_schedule_s: parse_seconds(&args.t_schedule)?,
        t_env_s: parse_seconds(&args.t_env)?,
        t_app_s: parse_seconds(&args.t_app)?,
    };
    platform.keep_alive_s = match &args.keep_alive {
        Some(k) => parse_seconds(k)?,
        None => DEFAULT_KEEP_ALIVE_S,
    };
    platform.warm_pool_prestarted = args.prestarted;
    let r = simulate(&trace, &platform)?;
    let style = ctx.style;

    let mut summary = Map::new();
    summary.insert("invocations".into(), json!(r.invocations.len()));
    summary.insert("rejected".into(), json!(r.rejected.len()));
    summary.insert("billed_units".into(), json!(r.billed_units));
    summary.insert("cost_usd".into(), style.money(r.cost_usd));
    summary.insert("peak_concurrency".into(), json!(r.peak_concurrency));
    summary.insert("instances_created".into(), json!(r.instances_created));
    summary.insert("cold_starts".into(), json!(r.cold_starts));
    summary.insert("prestarted_used".into(), json!(r.prestarted_used));
    summary.insert("instance_seconds_running".into(), json!(r.instance_seconds_running));
    summary.insert("busy_seconds".into(), json!(r.busy_seconds));
    summary.insert("utilization".into(), json!(r.utilization));
    summary.insert("end_s".into(), json!(r.end_s));

    let mut tables = vec![Table::pairs([
        ("invocations".to_string(), r.invocations.len().to_string()),
        ("rejected".into(), r.rejected.len().to_string()),
        ("billed_units".into(), r.billed_units.to_string()),
        ("cost_usd".into(), style.money_cell(r.cost_usd)),
        ("peak_concurrency".into(), r.peak_concurrency.to_string()),
        ("instances_created".into(), r.instances_created.to_string()),
        ("cold_starts".into(), r.cold_starts.to_string()),
        ("prestarted_used".into(), r.prestarted_used.to_string()),
        ("utilization".into(), format!("{:.4}", r.utilization)),
        ("end_s".into(), format!("{:.3}", r.end_s)),
    ])
    .titled("summary")];

    let mut result = Map::new();
    result.insert("service".into(), json!(args.service));
    result.insert("summary".into(), Value::Object(summary));
    let rejected = r
        .rejected
        .iter()
        .map(|x| json!({"index": x.index, "arrival_s": x.arrival_s, "reason": x.reason}))
        .collect();
    result.insert("rejected".into(), Value::Array(rejected));
    if !r.rejected.is_empty() {
        let mut t = Table::new(["index", "arrival_s", "reason"]).titled("rejected");
        for x in &r.rejected {
            t.row([x.index.to_string(), format!("{:.3}", x.arrival_s), x.reason.clone()]);
        }
        tables.push(t);
    }
    if args.details {
        let mut t = Table::new([
            "index", "arrival_s", "start", "latency_s", "instance", "finish_s", "units", "cost_usd",
        ])
        .titled("invocations");
        let mut rows = Vec::new();
        for i in &r.invocations {
            t.row([
                i.index.to_string(),
                format!("{:.3}", i.arrival_s),
                to_value(&i.start)?.as_str().unwrap_or_default().to_string(),
                format!("{:.3}", i.start_latency_s),
                i.instance.to_string(),
                format!("{:.3}", i.finish_s),
                i.billed_units.to_string(),
                style.money_cell(i.cost_usd),
            ]);
            let mut row = Map::new();
            row.insert("index".into(), json!(i.index));
            row.insert("arrival_s".into(), json!(i.arrival_s));
            row.insert("start".into(), to_value(&i.start)?);
            row.insert("start_latency_s".into(), json!(i.start_latency_s));
            row.insert("instance".into(), json!(i.instance));
            row.insert("finish_s".into(), json!(i.finish_s));
            row.insert("billed_units".into(), json!(i.billed_units));
            row.insert("cost_usd".into(), style.money(i.cost_usd));
            rows.push(Value::Object(row));
        }
        result.insert("invocations".into(), Value::Array(rows));
        tables.push(t);
    }
    Ok((
        "simulate".into(),
        to_value(args)?,
        Outcome::new(Value::Object(result), tables).with_inputs(vec![args.trace.display().to_string()]),
    ))
}
