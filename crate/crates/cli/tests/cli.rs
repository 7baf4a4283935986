use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_faasim");
const SCHEMAS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/schemas");

fn faasim(args: &[&str]) -> Output {
    faasim_env(args, &[])
}

fn faasim_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("FAASIM_CATALOG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = faasim(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&ok(&full)).expect("valid JSON")
}

fn scratch() -> PathBuf {
    static N: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "faasim-cli-{}-{}",
        std::process::id(),
        N.fetch_add(1, Ordering::SeqCst)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn assert_schema(name: &str, report: &Value) {
    let text = std::fs::read_to_string(format!("{SCHEMAS}/{name}.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name}: {}", msgs.join("; "));
}

fn write_graph(dir: &Path) -> PathBuf {
    let path = dir.join("graph.json");
    ok(&["workload", "gen", "cholesky", "--blocks", "3", "--out", s(&path)]);
    path
}

fn write_trace(dir: &Path) -> PathBuf {
    let path = dir.join("trace.json");
    ok(&[
        "--seed", "3", "workload", "gen", "trace", "--kind", "poisson", "--count", "40", "--rate", "0.2",
        "--duration-mean", "3s", "--out", s(&path),
    ]);
    path
}

#[test]
fn object_capacity_price() {
    let r = json(&["catalog", "cost", "--service", "object", "--capacity-gb", "1"]);
    assert_eq!(r["result"]["capacity_usd"], 0.023);
    assert_eq!(r["result"]["total_usd"], 0.023);
}

#[test]
fn sustained_write_iops_per_minute() {
    let r = json(&[
        "catalog", "cost", "--service", "object", "--iops", "100000", "--per", "minute", "--mix", "1.0",
    ]);
    assert_eq!(r["result"]["iops_usd"], 30.0);
    assert_eq!(r["result"]["iops_per"], "minute");
}

#[test]
fn shuffle_plan_fast_storage() {
    let out = ok(&["shuffle", "plan", "--data", "100TB", "--block", "3GB", "--stages", "50"]);
    assert!(out.lines().any(|l| l.starts_with("fast_storage") && l.ends_with("2 TB")), "{out}");
    let r = json(&["shuffle", "plan", "--data", "100TB", "--block", "3GB", "--stages", "50"]);
    assert_eq!(r["result"]["fast_storage_bytes"], 2_000_000_000_000u64);
}

#[test]
fn breakeven_ratio() {
    let out = ok(&["breakeven", "--ratio", "7.5"]);
    assert!(out.contains("13.33%"), "{out}");
}

#[test]
fn comm_function_grained_shuffle() {
    let r = json(&["comm", "--pattern", "shuffle", "--n", "2", "--k", "2", "--granularity", "function"]);
    assert_eq!(r["result"]["scenarios"][0]["messages"], 16);
    let out = ok(&["comm", "--pattern", "shuffle", "--n", "2", "--k", "2"]);
    assert!(out.contains("vm-grouped") && out.contains("function-grained"), "{out}");
}

#[test]
fn validation_errors_exit_two() {
    let dir = scratch();
    let graph = write_graph(&dir);
    for args in [
        vec!["catalog", "cost", "--service", "nosuch", "--capacity-gb", "1"],
        vec!["catalog", "cost", "--service", "object"],
        vec!["simulate", "--trace", "/definitely/missing.json"],
        vec!["place", "--graph", s(&graph), "--n", "2", "--k", "2"],
        vec!["shuffle", "plan", "--data", "ten", "--block", "3GB"],
        vec!["comm", "--pattern", "shuffle", "--n", "0", "--k", "2"],
    ] {
        let o = faasim(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert!(err.starts_with("error: "), "{err}");
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(faasim(&["nosuch"]).status.code(), Some(2));
    assert_eq!(faasim(&["comm", "--pattern", "ring", "--n", "1", "--k", "1"]).status.code(), Some(2));
    assert_eq!(faasim(&["--help"]).status.code(), Some(0));
    assert_eq!(faasim(&["--version"]).status.code(), Some(0));
}

#[test]
fn failed_checks_exit_one() {
    let dir = scratch();
    let empty = dir.join("empty.json");
    std::fs::write(&empty, "{}").unwrap();
    let o = faasim(&["--catalog", s(&empty), "repro"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert_eq!(ok(&["repro"]).matches("FAIL").count(), 0);
}

#[test]
fn empty_catalog_shows_empty_tables() {
    let dir = scratch();
    let empty = dir.join("empty.json");
    std::fs::write(&empty, "{}").unwrap();
    let out = ok(&["--catalog", s(&empty), "catalog", "show"]);
    assert!(out.contains("storage") && out.contains("compute"), "{out}");
    let r = json(&["--catalog", s(&empty), "catalog", "show"]);
    assert_eq!(r["result"]["storage"], Value::Array(vec![]));
    assert_eq!(r["result"]["compute"], Value::Array(vec![]));
}

#[test]
fn catalog_env_override_and_flag_precedence() {
    let dir = scratch();
    let default: Value = json(&["catalog", "show"])["result"].clone();
    let mut cheap = default.clone();
    for svc in cheap["storage"].as_array_mut().unwrap() {
        if svc["name"] == "object" {
            svc["capacity_usd_per_gb_month"] = 0.05.into();
        }
    }
    let path = dir.join("cheap.json");
    std::fs::write(&path, serde_json::to_string(&cheap).unwrap()).unwrap();
    let args = ["--format", "json", "catalog", "cost", "--service", "object", "--capacity-gb", "1"];

    let o = faasim_env(&args, &[("FAASIM_CATALOG", s(&path))]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["total_usd"], 0.05);
    assert_eq!(r["manifest"]["inputs"][0], s(&path));
    let base = json(&args[2..]);
    assert_ne!(r["manifest"]["catalog_checksum"], base["manifest"]["catalog_checksum"]);

    let bundled = dir.join("bundled.json");
    std::fs::write(&bundled, serde_json::to_string(&default).unwrap()).unwrap();
    let mut flagged = vec!["--catalog", s(&bundled)];
    flagged.extend_from_slice(&args);
    let o = faasim_env(&flagged, &[("FAASIM_CATALOG", s(&path))]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["total_usd"], 0.023);
}

#[test]
fn json_and_table_agree() {
    let args = ["comm", "--pattern", "aggregation", "--n", "3", "--k", "4", "--payload", "2MB"];
    let r = json(&args);
    let table = ok(&args);
    for sc in r["result"]["scenarios"].as_array().unwrap() {
        let line = table
            .lines()
            .find(|l| l.contains(sc["granularity"].as_str().unwrap()))
            .unwrap();
        let cells: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cells[4], sc["messages"].to_string());
        assert_eq!(cells[5], sc["bytes"].to_string());
    }

    let args = ["shuffle", "plan", "--data", "1TB", "--block", "1GB"];
    let r = json(&args);
    let table = ok(&args);
    for key in ["mappers", "reducers", "transfers", "io_ops"] {
        let line = table.lines().find(|l| l.split_whitespace().next() == Some(key)).unwrap();
        assert_eq!(line.split_whitespace().last().unwrap(), r["result"][key].to_string(), "{key}");
    }

    let csv = ok(&["--format", "csv", "comm", "--pattern", "aggregation", "--n", "3", "--k", "4", "--payload", "2MB"]);
    assert_eq!(csv.lines().next(), Some("pattern,n,k,granularity,messages,bytes"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn reports_round_trip_byte_identical() {
    let dir = scratch();
    let args = ["--format", "json", "workload", "gen", "cholesky", "--blocks", "3"];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    let parsed: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", first);

    // A report envelope is accepted wherever the bare document is.
    let envelope = dir.join("report.json");
    std::fs::write(&envelope, &first).unwrap();
    let bare = write_graph(&dir);
    let a = json(&["place", "--graph", s(&envelope), "--n", "3", "--k", "4"]);
    let b = json(&["place", "--graph", s(&bare), "--n", "3", "--k", "4"]);
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn seeded_traces_are_reproducible() {
    let args = |seed: &'static str| {
        [
            "--seed", seed, "workload", "gen", "trace", "--kind", "poisson", "--count", "10", "--rate", "1",
            "--duration", "1s",
        ]
    };
    let a = json(&args("5"));
    assert_eq!(a, json(&args("5")));
    assert_ne!(a["result"], json(&args("6"))["result"]);
    assert_eq!(a["manifest"]["seed"], 5);
}

#[test]
fn simulate_generated_trace() {
    let dir = scratch();
    let trace = write_trace(&dir);
    let r = json(&["simulate", "--trace", s(&trace), "--details"]);
    assert_eq!(r["result"]["summary"]["invocations"], 40);
    assert_eq!(r["result"]["invocations"].as_array().unwrap().len(), 40);
    let cold = r["result"]["summary"]["cold_starts"].as_u64().unwrap();
    let none = json(&["simulate", "--trace", s(&trace), "--keep-alive", "0s"]);
    assert!(none["result"]["summary"]["cold_starts"].as_u64().unwrap() >= cold);
}

#[test]
fn place_compares_strategies() {
    let dir = scratch();
    let graph = write_graph(&dir);
    let r = json(&["place", "--graph", s(&graph), "--n", "3", "--k", "4"]);
    let st = &r["result"]["strategies"];
    assert_eq!(st["greedy"]["cross_instance_bytes"], st["exhaustive"]["cross_instance_bytes"]);
    assert!(st["singleton"]["cross_instance_bytes"].as_u64() > st["greedy"]["cross_instance_bytes"].as_u64());
}

#[test]
fn bundled_presets() {
    let r = json(&["shuffle", "price", "--preset", "cloudsort"]);
    assert_eq!(r["result"]["preset"]["matches_expected"], true);
    assert_eq!(r["result"]["cost"]["total_usd"], 163.0);

    let r = json(&["breakeven", "--preset", "fallacy", "--busy", "0.1,0.2"]);
    assert_eq!(r["result"]["ratio"], 7.5);
    let sim = r["result"]["simulated"].as_array().unwrap();
    assert_eq!(sim[0]["cheaper"], "serverless");
    assert_eq!(sim[1]["cheaper"], "serverful");

    let o = faasim(&["shuffle", "price", "--preset", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_precision_money_is_exact() {
    let r = json(&["--full-precision", "catalog", "cost", "--service", "object", "--reads", "1"]);
    assert_eq!(r["result"]["requests_usd"], "0.0000004");
}

#[test]
fn outputs_match_schemas() {
    let dir = scratch();
    let graph = write_graph(&dir);
    let trace = write_trace(&dir);
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("catalog-show", vec!["catalog", "show"]),
        ("catalog-cost", vec!["catalog", "cost", "--service", "object", "--capacity-gb", "2", "--iops", "10", "--reads", "5"]),
        ("comm", vec!["comm", "--pattern", "broadcast", "--n", "4", "--k", "2"]),
        ("shuffle-plan", vec!["shuffle", "plan", "--data", "100TB", "--stages", "50"]),
        ("shuffle-price", vec!["shuffle", "price", "--preset", "cloudsort"]),
        ("shuffle-price", vec!["shuffle", "price", "--data", "1TB", "--gb-seconds", "1000"]),
        ("workload-gen-graph", vec!["workload", "gen", "shuffle", "--mappers", "3", "--reducers", "2"]),
        ("workload-gen-graph", vec!["workload", "gen", "shuffle", "--mappers", "100000", "--reducers", "100000"]),
        ("workload-gen-graph", vec!["workload", "gen", "cholesky", "--blocks", "4"]),
        ("workload-gen-paramserver", vec!["workload", "gen", "paramserver", "--workers", "8", "--rounds", "2", "--k", "4"]),
        ("workload-gen-trace", vec!["workload", "gen", "trace", "--kind", "fixed", "--count", "3", "--interval", "1m", "--duration", "6s"]),
        ("workload-gen-trace", vec!["--seed", "1", "workload", "gen", "trace", "--kind", "poisson", "--count", "3", "--rate", "1", "--duration", "1s"]),
        ("workload-profile", vec!["workload", "profile", "--graph", s(&graph)]),
        ("simulate", vec!["simulate", "--trace", s(&trace), "--details"]),
        ("place", vec!["--seed", "2", "place", "--graph", s(&graph), "--n", "3", "--k", "4"]),
        ("breakeven", vec!["breakeven", "--preset", "fallacy", "--busy", "0.5"]),
        ("breakeven", vec!["breakeven"]),
        ("repro", vec!["repro"]),
    ];
    for (schema, args) in cases {
        assert_schema(schema, &json(&args));
    }
    assert_schema("catalog-cost", &json(&["--full-precision", "catalog", "cost", "--service", "object", "--capacity-gb", "1"]));
}
