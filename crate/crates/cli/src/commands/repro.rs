// SPDX-License-Identifier: Apache-2.0

use serde_json::{json, Value};

use faasim_core::repro::{run_checks, CheckStatus};

use super::CmdOutput;
use crate::error::CliResult;
use crate::report::{to_value, Outcome, Table};
use crate::Ctx;

pub fn run(ctx: &Ctx) -> CliResult<CmdOutput> {
    let checks = run_checks(&ctx.catalog);
    let mut table = Table::new(["id", "location", "claim", "status", "detail"]);
    for c in &checks {
        table.row([
            c.id.clone(),
            c.location.clone(),
            c.claim.clone(),
            c.status.label().to_string(),
            c.detail.clone(),
        ]);
    }
    let count = |s: CheckStatus| checks.iter().filter(|c| c.status == s).count();
    let failed = count(CheckStatus::Fail);
    let result = json!({
        "checks": to_value(&checks)?,
        "passed": count(CheckStatus::Pass),
        "failed": failed,
        "external": count(CheckStatus::External),
    });
    let mut outcome = Outcome::new(result, vec![table]);
    if failed > 0 {
        outcome.exit_code = 1;
    }
    Ok(("repro".into(), Value::Object(Default::default()), outcome))
}
