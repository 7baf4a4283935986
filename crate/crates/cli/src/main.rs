// SPDX-License-Identifier: Apache-2.0

//! `faasim`: serverless versus serverful cost and performance models.

mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use faasim_core::catalog::{ServiceCatalog, DEFAULT_CATALOG_JSON};
use faasim_core::units::UnitSystem;

use crate::error::{CliError, CliResult};
use crate::report::{render, Format, RunManifest, Style};

pub const CATALOG_ENV: &str = "FAASIM_CATALOG";

#[derive(Debug, Parser)]
#[command(name = "faasim", version, about = "Serverless vs serverful cost and performance models")]
struct Cli {
    /// Service catalog JSON (defaults to $FAASIM_CATALOG, then the bundled catalog).
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Print exact currency amounts instead of rounding.
    #[arg(long, global = true)]
    full_precision: bool,
    /// Read KB/MB/GB/TB suffixes as powers of 1024.
    #[arg(long, global = true)]
    binary_units: bool,
    /// Seed for randomized generators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect the service catalog and price storage usage.
    #[command(subcommand)]
    Catalog(commands::catalog::CatalogCmd),
    /// Remote message counts for a communication pattern.
    Comm(commands::comm::CommArgs),
    /// Plan and price shuffles through external storage.
    #[command(subcommand)]
    Shuffle(commands::shuffle::ShuffleCmd),
    /// Generate and profile workloads.
    #[command(subcommand)]
    Workload(commands::workload::WorkloadCmd),
    /// Replay an invocation trace on a simulated FaaS platform.
    Simulate(commands::simulate::SimulateArgs),
    /// Place graph tasks on instances to cut cross-instance traffic.
    Place(commands::place::PlaceArgs),
    /// Busy fraction at which serverless and always-on instances cost the same.
    Breakeven(commands::breakeven::BreakevenArgs),
    /// Run every published-figure check.
    Repro,
}

/// Loaded once per run and shared by the subcommands.
pub struct Ctx {
    pub catalog: ServiceCatalog,
    pub catalog_checksum: String,
    pub catalog_path: Option<PathBuf>,
    pub units: UnitSystem,
    pub style: Style,
    pub seed: Option<u64>,
}

impl Ctx {
    fn load(cli: &Cli) -> CliResult<Self> {
        let path = cli
            .catalog
            .clone()
            .or_else(|| std::env::var_os(CATALOG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let text = match &path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::invalid(format!("cannot read catalog {}: {e}", p.display())))?,
            None => DEFAULT_CATALOG_JSON.to_string(),
        };
        let catalog = ServiceCatalog::from_json_str(&text)?;
        Ok(Ctx {
            catalog,
            catalog_checksum: hex(&Sha256::digest(text.as_bytes())),
            catalog_path: path,
            units: if cli.binary_units {
                UnitSystem::Binary
            } else {
                UnitSystem::Decimal
            },
            style: Style {
                full_precision: cli.full_precision,
            },
            seed: cli.seed,
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn run(cli: Cli) -> CliResult<(String, i32)> {
    let ctx = Ctx::load(&cli)?;
    let (subcommand, parameters, outcome) = match &cli.command {
        Command::Catalog(cmd) => commands::catalog::run(&ctx, cmd)?,
        Command::Comm(args) => commands::comm::run(&ctx, args)?,
        Command::Shuffle(cmd) => commands::shuffle::run(&ctx, cmd)?,
        Command::Workload(cmd) => commands::workload::run(&ctx, cmd)?,
        Command::Simulate(args) => commands::simulate::run(&ctx, args)?,
        Command::Place(args) => commands::place::run(&ctx, args)?,
        Command::Breakeven(args) => commands::breakeven::run(&ctx, args)?,
        Command::Repro => commands::repro::run(&ctx)?,
    };
    let mut inputs = outcome.inputs.clone();
    if let Some(p) = &ctx.catalog_path {
        inputs.insert(0, p.display().to_string());
    }
    let manifest = RunManifest {
        subcommand,
        inputs,
        parameters,
        catalog_checksum: ctx.catalog_checksum.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: outcome.seed,
    };
    Ok((render(cli.format, &manifest, &outcome)?, outcome.exit_code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
