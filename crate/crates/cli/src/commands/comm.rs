// SPDX-License-Identifier: Apache-2.0

use clap::Args;
use serde::Serialize;
use serde_json::Value;

use faasim_core::commpatterns::{
    remote_messages, remote_traffic_bytes, traffic_overhead_ratio, CommScenario, Deployment, Granularity,
    Pattern,
};

use super::CmdOutput;
use crate::error::{CliError, CliResult};
use crate::report::{big, to_value, Outcome, Table};
use crate::Ctx;

#[derive(Debug, Args, Serialize)]
pub struct CommArgs {
    /// broadcast, aggregation or shuffle.
    #[arg(long)]
    pub pattern: Pattern,
    /// Instances.
    #[arg(long)]
    pub n: u64,
    /// Functions per instance.
    #[arg(long)]
    pub k: u64,
    /// vm (grouped) or function (grained); both when omitted.
    #[arg(long)]
    pub granularity: Option<Granularity>,
    /// Bytes per message, e.g. 4MB.
    #[arg(long, default_value = "1")]
    pub payload: String,
}

pub fn run(ctx: &Ctx, args: &CommArgs) -> CliResult<CmdOutput> {
    let payload = faasim_core::units::parse_bytes(&args.payload, ctx.units)?;
    let granularities = match args.granularity {
        Some(g) => vec![g],
        None => vec![Granularity::VmGrouped, Granularity::FunctionGrained],
    };
    let mut rows = Vec::new();
    let mut table = Table::new(["pattern", "n", "k", "granularity", "messages", "bytes"]);
    for g in granularities {
        let d = Deployment::new(args.n, args.k, g).map_err(CliError::Validation)?;
        let s = CommScenario::new(args.pattern, d, payload);
        let (messages, bytes) = (remote_messages(&s), remote_traffic_bytes(&s));
        table.row([
            args.pattern.to_string(),
            args.n.to_string(),
            args.k.to_string(),
            g.to_string(),
            messages.to_string(),
            bytes.to_string(),
        ]);
        let mut row = serde_json::Map::new();
        row.insert("pattern".into(), Value::String(args.pattern.to_string()));
        row.insert("n".into(), args.n.into());
        row.insert("k".into(), args.k.into());
        row.insert("granularity".into(), Value::String(g.to_string()));
        row.insert("messages".into(), big(messages));
        row.insert("bytes".into(), big(bytes));
        rows.push(Value::Object(row));
    }
    let ratio = traffic_overhead_ratio(args.pattern, args.k);
    let mut result = serde_json::Map::new();
    result.insert("scenarios".into(), Value::Array(rows));
    result.insert("function_to_vm_ratio".into(), big(ratio));
    Ok(("comm".into(), to_value(args)?, Outcome::new(Value::Object(result), vec![table])))
}
