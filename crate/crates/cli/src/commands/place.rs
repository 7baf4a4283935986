// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::{json, Map, Value};

use faasim_core::placement::{
    place_exhaustive, place_greedy, place_random, singleton_placement, Placement, PlacementProblem,
    EXHAUSTIVE_TASK_LIMIT,
};

use super::workload::load_graph;
use super::CmdOutput;
use crate::error::CliResult;
use crate::report::{big, to_value, Outcome, Table};
use crate::Ctx;

#[derive(Debug, Args, Serialize)]
pub struct PlaceArgs {
    /// Task graph JSON, bare or inside a report.
    #[arg(long)]
    pub graph: PathBuf,
    /// Instances available.
    #[arg(long)]
    pub n: usize,
    /// Task slots per instance.
    #[arg(long)]
    pub k: usize,
    /// Skip the exhaustive search even on small graphs.
    #[arg(long)]
    pub no_exhaustive: bool,
}

fn placement_json(p: &Placement) -> CliResult<Value> {
    let mut m = Map::new();
    m.insert("cross_instance_bytes".into(), big(p.cross_instance_bytes));
    m.insert("remote_message_count".into(), json!(p.remote_message_count));
    m.insert("instances_used".into(), json!(p.instances_used()));
    m.insert("assignment".into(), to_value(&p.assignment)?);
    Ok(Value::Object(m))
}

pub fn run(ctx: &Ctx, args: &PlaceArgs) -> CliResult<CmdOutput> {
    let graph = load_graph(&args.graph)?.materialize(faasim_core::workloads::MATERIALIZE_EDGE_LIMIT)?;
    let problem = PlacementProblem::new(graph, args.n, args.k);
    problem.validate()?;

    let mut strategies: Vec<(&str, Placement)> = vec![
        ("singleton", singleton_placement(&problem.graph)?),
        ("greedy", place_greedy(&problem)?),
    ];
    let mut seed = None;
    if let Some(s) = ctx.seed {
        strategies.push(("random", place_random(&problem, s)?));
        seed = Some(s);
    }
    if !args.no_exhaustive && problem.graph.tasks.len() <= EXHAUSTIVE_TASK_LIMIT {
        strategies.push(("exhaustive", place_exhaustive(&problem)?));
    }

    let mut table = Table::new(["strategy", "instances_used", "cross_instance_bytes", "remote_messages"])
        .titled("strategies");
    let mut result = Map::new();
    result.insert("tasks".into(), json!(problem.graph.tasks.len()));
    result.insert("n".into(), json!(args.n));
    result.insert("k".into(), json!(args.k));
    let mut by_name = Map::new();
    for (name, p) in &strategies {
        table.row([
            name.to_string(),
            p.instances_used().to_string(),
            p.cross_instance_bytes.to_string(),
            p.remote_message_count.to_string(),
        ]);
        by_name.insert(name.to_string(), placement_json(p)?);
    }
    result.insert("strategies".into(), Value::Object(by_name));

    let greedy = &strategies[1].1;
    let mut assign = Table::new(["task", "instance", "slot"]).titled("greedy assignment");
    for a in &greedy.assignment {
        assign.row([a.task.to_string(), a.instance.to_string(), a.slot.to_string()]);
    }
    let mut outcome =
        Outcome::new(Value::Object(result), vec![table, assign]).with_inputs(vec![args.graph.display().to_string()]);
    if let Some(s) = seed {
        outcome = outcome.with_seed(s);
    }
    Ok(("place".into(), to_value(args)?, outcome))
}
