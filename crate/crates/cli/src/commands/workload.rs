// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::commpatterns::{remote_messages, remote_traffic_bytes, Granularity};
use faasim_core::units::{parse_bytes, parse_seconds};
use faasim_core::workloads::{
    fixed_interval_trace, gen_cholesky_dag, gen_paramserver, gen_shuffle_dag, parallelism_profile, poisson_trace,
    CholeskyParams, DurationDist, InvocationTrace, TaskGraph, Workload, WorkerLayout,
};

use super::{read_input, unwrap_report, CmdOutput};
use crate::error::{CliError, CliResult};
use crate::report::{big, human_bytes, to_value, Outcome, Table};
use crate::Ctx;

#[derive(Debug, Subcommand)]
pub enum WorkloadCmd {
    /// Generate a task graph, communication schedule or invocation trace.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Per-level width and working set of a task graph.
    Profile(ProfileArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCmd {
    /// Bipartite map/reduce graph.
    Shuffle(ShuffleGen),
    /// Right-looking blocked Cholesky graph.
    Cholesky(CholeskyGen),
    /// Parameter-server rounds of aggregation and broadcast.
    Paramserver(ParamserverGen),
    /// Invocation trace for the simulator.
    Trace(TraceGen),
}

#[derive(Debug, Args, Serialize)]
pub struct ShuffleGen {
    #[arg(long)]
    pub mappers: u64,
    #[arg(long)]
    pub reducers: u64,
    /// Bytes per mapper-to-reducer transfer.
    #[arg(long, default_value = "1MB")]
    pub bytes: String,
    /// Also write the bare graph JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CholeskyGen {
    /// Blocks per matrix dimension.
    #[arg(long)]
    pub blocks: u64,
    #[arg(long, default_value_t = 4096)]
    pub block_dim: u64,
    #[arg(long, default_value_t = 1.0e10)]
    pub flops_per_second: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ParamserverGen {
    #[arg(long)]
    pub workers: u64,
    #[arg(long)]
    pub rounds: u64,
    /// Gradient size per worker.
    #[arg(long, default_value = "4MB")]
    pub bytes: String,
    /// Workers per instance.
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    #[arg(long, default_value = "function")]
    pub granularity: Granularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Fixed,
    Poisson,
}

#[derive(Debug, Args, Serialize)]
pub struct TraceGen {
    #[arg(long, value_enum)]
    pub kind: TraceKind,
    #[arg(long)]
    pub count: usize,
    /// Poisson arrival rate per second.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Fixed spacing between arrivals, e.g. 60s.
    #[arg(long)]
    pub interval: Option<String>,
    #[arg(long, default_value = "0s")]
    pub start: String,
    /// Fixed duration of every invocation.
    #[arg(long)]
    pub duration: Option<String>,
    /// Mean of exponential durations (Poisson traces only).
    #[arg(long, conflicts_with = "duration")]
    pub duration_mean: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub memory_gb: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    /// Task graph JSON, bare or inside a report.
    #[arg(long)]
    pub graph: PathBuf,
}

pub fn run(ctx: &Ctx, cmd: &WorkloadCmd) -> CliResult<CmdOutput> {
    match cmd {
        WorkloadCmd::Gen(GenCmd::Shuffle(a)) => {
            let w = gen_shuffle_dag(
                positive("mappers", a.mappers)?,
                positive("reducers", a.reducers)?,
                parse_bytes(&a.bytes, ctx.units)?,
            );
            graph_output("workload gen shuffle", to_value(a)?, &w, a.out.as_deref())
        }
        WorkloadCmd::Gen(GenCmd::Cholesky(a)) => {
            if !(a.flops_per_second.is_finite() && a.flops_per_second > 0.0) {
                return Err(CliError::invalid("--flops-per-second must be positive"));
            }
            let params = CholeskyParams {
                blocks: positive("blocks", a.blocks)?,
                block_dim: positive("block-dim", a.block_dim)?,
                flops_per_second: a.flops_per_second,
            };
            let w = Workload::Explicit(gen_cholesky_dag(params));
            graph_output("workload gen cholesky", to_value(a)?, &w, a.out.as_deref())
        }
        WorkloadCmd::Gen(GenCmd::Paramserver(a)) => paramserver(ctx, a),
        WorkloadCmd::Gen(GenCmd::Trace(a)) => trace(ctx, a),
        WorkloadCmd::Profile(a) => profile(a),
    }
}

fn positive(name: &str, v: u64) -> CliResult<u64> {
    if v == 0 {
        return Err(CliError::invalid(format!("--{name} must be at least 1")));
    }
    Ok(v)
}

fn write_artifact(path: Option<&Path>, value: &Value) -> CliResult<Vec<String>> {
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))?;
    Ok(Vec::new())
}

fn graph_output(name: &str, params: Value, w: &Workload, out: Option<&Path>) -> CliResult<CmdOutput> {
    let graph = to_value(&w.to_graph_json())?;
    write_artifact(out, &graph)?;
    let generator = graph["metadata"]["generator"].as_str().unwrap_or_default().to_string();
    let table = Table::pairs([
        ("generator".to_string(), generator),
        ("tasks".into(), w.task_count().to_string()),
        ("edges".into(), w.edge_count().to_string()),
        ("edge_bytes".into(), human_bytes(w.total_edge_bytes())),
        ("implicit".into(), matches!(w, Workload::ImplicitShuffle(_)).to_string()),
    ]);
    Ok((name.into(), params, Outcome::new(graph, vec![table])))
}

fn paramserver(ctx: &Ctx, a: &ParamserverGen) -> CliResult<CmdOutput> {
    let bytes = parse_bytes(&a.bytes, ctx.units)?;
    let layout = WorkerLayout {
        functions_per_instance: positive("k", a.k)?,
        granularity: a.granularity,
    };
    let steps = gen_paramserver(positive("workers", a.workers)?, positive("rounds", a.rounds)?, bytes, layout);
    let mut table = Table::new(["round", "pattern", "parties", "messages", "bytes"]);
    let mut rows = Vec::new();
    let (mut total_messages, mut total_bytes) = (0u128, 0u128);
    for (i, s) in steps.iter().enumerate() {
        let round = i / 2 + 1;
        let (m, b) = (remote_messages(s), remote_traffic_bytes(s));
        total_messages += m;
        total_bytes += b;
        table.row([
            round.to_string(),
            s.pattern.to_string(),
            s.deployment.network_parties().to_string(),
            m.to_string(),
            b.to_string(),
        ]);
        let mut row = Map::new();
        row.insert("round".into(), json!(round));
        row.insert("pattern".into(), json!(s.pattern.as_str()));
        row.insert("parties".into(), json!(s.deployment.network_parties()));
        row.insert("messages".into(), big(m));
        row.insert("bytes".into(), big(b));
        rows.push(Value::Object(row));
    }
    let mut result = Map::new();
    result.insert("steps".into(), Value::Array(rows));
    result.insert("total_messages".into(), big(total_messages));
    result.insert("total_bytes".into(), big(total_bytes));
    Ok((
        "workload gen paramserver".into(),
        to_value(a)?,
        Outcome::new(Value::Object(result), vec![table]),
    ))
}

fn trace(ctx: &Ctx, a: &TraceGen) -> CliResult<CmdOutput> {
    let seconds = |name: &str, v: &Option<String>| -> CliResult<f64> {
        let raw = v.as_deref().ok_or_else(|| CliError::invalid(format!("--{name} is required")))?;
        Ok(parse_seconds(raw)?)
    };
    let (t, seed) = match a.kind {
        TraceKind::Fixed => {
            let t = fixed_interval_trace(
                a.count,
                parse_seconds(&a.start)?,
                seconds("interval", &a.interval)?,
                seconds("duration", &a.duration)?,
                a.memory_gb,
            )?;
            (t, None)
        }
        TraceKind::Poisson => {
            let rate = a.rate.ok_or_else(|| CliError::invalid("--rate is required for poisson traces"))?;
            let dist = match (&a.duration, &a.duration_mean) {
                (Some(_), _) => DurationDist::Fixed(seconds("duration", &a.duration)?),
                (None, Some(_)) => DurationDist::Exponential {
                    mean: seconds("duration-mean", &a.duration_mean)?,
                },
                (None, None) => return Err(CliError::invalid("pass --duration or --duration-mean")),
            };
            if let DurationDist::Exponential { mean } = dist {
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(CliError::invalid("--duration-mean must be positive"));
                }
            }
            let seed = ctx.seed.unwrap_or(0);
            (poisson_trace(seed, rate, a.count, dist, a.memory_gb)?, Some(seed))
        }
    };
    let value = to_value(&t)?;
    write_artifact(a.out.as_deref(), &value)?;
    let table = trace_summary(&t);
    let mut outcome = Outcome::new(value, vec![table]);
    if let Some(seed) = seed {
        outcome = outcome.with_seed(seed);
    }
    Ok(("workload gen trace".into(), to_value(a)?, outcome))
}

fn trace_summary(t: &InvocationTrace) -> Table {
    let span = t
        .invocations
        .iter()
        .map(|i| i.arrival_s + i.duration_s)
        .fold(0.0, f64::max);
    Table::pairs([
        ("invocations".to_string(), t.len().to_string()),
        ("busy_seconds".into(), format!("{:.3}", t.busy_seconds())),
        ("span_s".into(), format!("{span:.3}")),
        ("max_overlap".into(), t.max_overlap().to_string()),
    ])
}

pub fn load_graph(path: &Path) -> CliResult<Workload> {
    let text = read_input(path)?;
    let value = unwrap_report(&text, path)?;
    let graph: TaskGraph = serde_json::from_value(value)
        .map_err(|e| CliError::invalid(format!("{} is not a task graph: {e}", path.display())))?;
    Ok(Workload::from_graph_json(graph)?)
}

fn profile(a: &ProfileArgs) -> CliResult<CmdOutput> {
    let w = load_graph(&a.graph)?;
    let p = parallelism_profile(&w)?;
    let mut table = Table::new(["level", "ready_tasks", "working_set_bytes"]);
    let mut levels = Vec::new();
    for l in &p.levels {
        table.row([l.level.to_string(), l.ready_tasks.to_string(), l.working_set_bytes.to_string()]);
        let mut row = Map::new();
        row.insert("level".into(), json!(l.level));
        row.insert("ready_tasks".into(), json!(l.ready_tasks));
        row.insert("working_set_bytes".into(), big(l.working_set_bytes));
        levels.push(Value::Object(row));
    }
    let mut result = Map::new();
    result.insert("levels".into(), Value::Array(levels));
    result.insert("peak_width".into(), json!(p.peak_width()));
    result.insert("total_tasks".into(), json!(p.total_tasks()));
    Ok((
        "workload profile".into(),
        to_value(a)?,
        Outcome::new(Value::Object(result), vec![table]).with_inputs(vec![a.graph.display().to_string()]),
    ))
}
