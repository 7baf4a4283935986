// SPDX-License-Identifier: Apache-2.0

use clap::{Args, Subcommand, ValueEnum};
use rust_decimal::Decimal;
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::catalog::Range;
use faasim_core::money::{dec, Usd};
use faasim_core::units::SECONDS_PER_MONTH;

use super::CmdOutput;
use crate::error::{CliError, CliResult};
use crate::report::{to_value, Outcome, Table};
use crate::Ctx;

#[derive(Debug, Subcommand)]
pub enum CatalogCmd {
    /// Storage and compute tables of the loaded catalog.
    Show,
    /// Price capacity, sustained IOPS or a request count on one storage service.
    Cost(CostArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Per {
    Month,
    Minute,
}

#[derive(Debug, Args, Serialize)]
pub struct CostArgs {
    #[arg(long)]
    pub service: String,
    /// GB of stored capacity.
    #[arg(long)]
    pub capacity_gb: Option<f64>,
    /// Months the capacity is held.
    #[arg(long, default_value_t = 1.0)]
    pub months: f64,
    /// Requests per second, sustained.
    #[arg(long)]
    pub iops: Option<f64>,
    #[arg(long, value_enum, default_value = "month")]
    pub per: Per,
    /// Write fraction of the sustained requests (default 0.5).
    #[arg(long)]
    pub mix: Option<f64>,
    #[arg(long)]
    pub reads: Option<f64>,
    #[arg(long)]
    pub writes: Option<f64>,
}

pub fn run(ctx: &Ctx, cmd: &CatalogCmd) -> CliResult<CmdOutput> {
    match cmd {
        CatalogCmd::Show => show(ctx),
        CatalogCmd::Cost(args) => cost(ctx, args),
    }
}

fn range(r: &Range) -> String {
    if r.is_point() {
        r.low.normalize().to_string()
    } else {
        format!("{}-{}", r.low.normalize(), r.high.normalize())
    }
}

fn show(ctx: &Ctx) -> CliResult<CmdOutput> {
    let mut storage = Table::new([
        "service",
        "class",
        "latency_ms",
        "capacity_usd_gb_month",
        "throughput_usd_mbps_month",
        "iops_usd_month",
        "function_access",
        "provisioning",
        "persistence",
    ])
    .titled("storage");
    for s in &ctx.catalog.storage {
        storage.row([
            s.name.clone(),
            s.class.as_str().to_string(),
            range(&s.latency_ms),
            range(&s.capacity_usd_per_gb_month),
            range(&s.throughput_usd_per_mbps_month),
            range(&s.iops_usd_per_month),
            if s.function_accessible { "yes" } else { "no" }.to_string(),
            enum_str(&s.provisioning)?,
            enum_str(&s.persistence)?,
        ]);
    }
    let mut compute = Table::new([
        "service",
        "kind",
        "memory_gib",
        "local_storage_gib",
        "max_run_time_s",
        "accounting_unit_s",
        "price_per_unit_usd",
    ])
    .titled("compute");
    for c in &ctx.catalog.compute {
        let price = match c.price_per_unit_max_usd {
            Some(max) => format!("{}-{}", c.price_per_unit_usd.normalize(), max.normalize()),
            None => c.price_per_unit_usd.normalize().to_string(),
        };
        compute.row([
            c.name.clone(),
            enum_str(&c.kind)?,
            format!("{}-{}", c.memory_min_gib.normalize(), c.memory_max_gib.normalize()),
            c.max_local_storage_gib.normalize().to_string(),
            c.max_run_time_s
                .map_or_else(|| "unlimited".to_string(), |t| t.normalize().to_string()),
            c.accounting_unit_s.normalize().to_string(),
            price,
        ]);
    }
    let result = to_value(&ctx.catalog)?;
    Ok((
        "catalog show".into(),
        json!({}),
        Outcome::new(result, vec![storage, compute]),
    ))
}

fn enum_str<T: Serialize>(v: &T) -> CliResult<String> {
    match to_value(v)? {
        Value::String(s) => Ok(s),
        other => Ok(other.to_string()),
    }
}

fn non_negative(name: &str, v: f64) -> CliResult<Decimal> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(CliError::invalid(format!("--{name} must be a non-negative number")));
    }
    Ok(dec(v))
}

fn cost(ctx: &Ctx, args: &CostArgs) -> CliResult<CmdOutput> {
    let service = ctx.catalog.storage(&args.service)?;
    let style = ctx.style;
    let mut components = Map::new();
    let mut table = Table::new(["component", "quantity", "cost_usd"]);
    let mut total = Usd::ZERO;

    if let Some(gb) = args.capacity_gb {
        let (gb, months) = (non_negative("capacity-gb", gb)?, non_negative("months", args.months)?);
        let c = service.capacity_cost_dec(gb, months);
        components.insert("capacity_usd".into(), style.money(c));
        table.row([
            "capacity".to_string(),
            format!("{} GB x {} month", gb.normalize(), months.normalize()),
            style.money_cell(c),
        ]);
        total += c;
    }
    if let Some(iops) = args.iops {
        let iops_d = non_negative("iops", iops)?;
        let mix = args.mix.unwrap_or(0.5);
        let c = match args.per {
            Per::Minute => service.sustained_iops_rate_cost(iops, mix)?,
            Per::Month => {
                if !(0.0..=1.0).contains(&mix) {
                    return Err(CliError::invalid(format!("--mix {mix} outside [0, 1]")));
                }
                let requests = iops_d * Decimal::from(SECONDS_PER_MONTH);
                let writes = requests * dec(mix);
                service.request_cost_dec(requests - writes, writes)
            }
        };
        let per = match args.per {
            Per::Month => "month",
            Per::Minute => "minute",
        };
        components.insert("iops_usd".into(), style.money(c));
        components.insert("iops_per".into(), json!(per));
        table.row([
            format!("iops per {per}"),
            format!("{} req/s, write fraction {}", iops_d.normalize(), dec(mix).normalize()),
            style.money_cell(c),
        ]);
        total += c;
    }
    if args.reads.is_some() || args.writes.is_some() {
        let reads = non_negative("reads", args.reads.unwrap_or(0.0))?;
        let writes = non_negative("writes", args.writes.unwrap_or(0.0))?;
        let c = service.request_cost_dec(reads, writes);
        components.insert("requests_usd".into(), style.money(c));
        table.row([
            "requests".to_string(),
            format!("{} reads, {} writes", reads.normalize(), writes.normalize()),
            style.money_cell(c),
        ]);
        total += c;
    }
    if components.is_empty() {
        return Err(CliError::invalid(
            "nothing to price: pass --capacity-gb, --iops, or --reads/--writes",
        ));
    }
    table.row(["total".to_string(), String::new(), style.money_cell(total)]);
    let mut result = Map::new();
    result.insert("service".into(), json!(service.name));
    result.extend(components);
    result.insert("total_usd".into(), style.money(total));
    Ok((
        "catalog cost".into(),
        to_value(args)?,
        Outcome::new(Value::Object(result), vec![table]),
    ))
}
