// SPDX-License-Identifier: Apache-2.0

//! Planning and pricing of shuffles staged through external storage.
//!
//! Every mapper writes one object per reducer and every reducer reads it
//! back, so a shuffle of `M` mappers and `R` reducers costs `M × R`
//! transfers and `2 × M × R` storage operations. A staged shuffle runs `S`
//! sequential rounds over disjoint mapper groups of `⌈M/S⌉`; only one
//! round's data (`⌈D/S⌉` bytes) sits in fast storage at a time, and the
//! transfers go through the fast store instead of the object store.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, ServiceCatalog};
use crate::money::{serde_decimal, Usd};
use crate::units::GB;

pub const DEFAULT_FUNCTION_MEMORY_CAP: u64 = 3 * GB;

pub const CLOUDSORT_PRESET_JSON: &str = include_str!("../presets/cloudsort100tb.json");

#[derive(Debug, Error)]
pub enum ShuffleError {
    #[error("invalid shuffle problem: {0}")]
    InvalidProblem(String),
    #[error("invalid execution profile: {0}")]
    InvalidExec(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("malformed preset: {0}")]
    Preset(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShuffleProblem {
    pub data_bytes: u64,
    #[serde(default = "default_cap")]
    pub function_memory_cap_bytes: u64,
    #[serde(default = "one")]
    pub stages: u64,
}

fn default_cap() -> u64 {
    DEFAULT_FUNCTION_MEMORY_CAP
}

fn one() -> u64 {
    1
}

impl ShuffleProblem {
    pub fn new(data_bytes: u64, function_memory_cap_bytes: u64, stages: u64) -> Result<Self, ShuffleError> {
        let problem = ShuffleProblem {
            data_bytes,
            function_memory_cap_bytes,
            stages,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), ShuffleError> {
        if self.data_bytes == 0 {
            return Err(ShuffleError::InvalidProblem("data size must be positive".into()));
        }
        if self.function_memory_cap_bytes == 0 {
            return Err(ShuffleError::InvalidProblem(
                "function memory cap must be positive".into(),
            ));
        }
        if self.stages == 0 {
            return Err(ShuffleError::InvalidProblem("stages must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShufflePlan {
    pub mappers: u64,
    pub reducers: u64,
    pub stages: u64,
    pub transfers: u128,
    pub io_ops: u128,
    pub per_stage_transfers: u128,
    /// Peak bytes resident in fast storage; zero for a single-stage shuffle.
    pub fast_storage_bytes: u64,
}

impl ShufflePlan {
    /// Storage operations that hit the slow object store.
    pub fn slow_store_io_ops(&self) -> u128 {
        if self.stages > 1 {
            0
        } else {
            self.io_ops
        }
    }
}

/// `⌈data / cap⌉` with decimal byte units.
pub fn block_count(data_bytes: u64, cap_bytes: u64) -> u64 {
    assert!(cap_bytes > 0, "block size must be positive");
    data_bytes.div_ceil(cap_bytes)
}

pub fn plan(problem: &ShuffleProblem) -> Result<ShufflePlan, ShuffleError> {
    problem.validate()?;
    let blocks = block_count(problem.data_bytes, problem.function_memory_cap_bytes);
    let transfers = blocks as u128 * blocks as u128;
    let (per_stage_transfers, fast_storage_bytes) = if problem.stages > 1 {
        (
            blocks.div_ceil(problem.stages) as u128 * blocks as u128,
            problem.data_bytes.div_ceil(problem.stages),
        )
    } else {
        (transfers, 0)
    };
    Ok(ShufflePlan {
        mappers: blocks,
        reducers: blocks,
        stages: problem.stages,
        transfers,
        io_ops: 2 * transfers,
        per_stage_transfers,
        fast_storage_bytes,
    })
}

/// Measured or calibrated execution figures used to price a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecProfile {
    #[serde(with = "serde_decimal")]
    pub function_gb_seconds: Decimal,
    #[serde(with = "serde_decimal")]
    pub fast_store_gb_hours: Decimal,
    #[serde(with = "serde_decimal")]
    pub slow_store_write_fraction: Decimal,
    /// Overrides the plan's slow-store operation count when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slow_store_requests: Option<u128>,
    #[serde(default, with = "serde_decimal")]
    pub duration_s: Decimal,
    #[serde(default = "default_compute")]
    pub compute_service: String,
    #[serde(default = "default_slow")]
    pub slow_store: String,
    #[serde(default = "default_fast")]
    pub fast_store: String,
}

fn default_compute() -> String {
    "aws-lambda".into()
}
fn default_slow() -> String {
    "object".into()
}
fn default_fast() -> String {
    "memory".into()
}

impl Default for ExecProfile {
    fn default() -> Self {
        ExecProfile {
            function_gb_seconds: Decimal::ZERO,
            fast_store_gb_hours: Decimal::ZERO,
            slow_store_write_fraction: Decimal::ONE,
            slow_store_requests: None,
            duration_s: Decimal::ZERO,
            compute_service: default_compute(),
            slow_store: default_slow(),
            fast_store: default_fast(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleCostBreakdown {
    pub compute_usd: Usd,
    pub slow_store_request_usd: Usd,
    pub fast_store_usd: Usd,
    pub total_usd: Usd,
    #[serde(with = "serde_decimal")]
    pub duration_s: Decimal,
}

/// Prices a plan. Each component is rounded to whole micro-dollars and the
/// total is their sum.
pub fn price_plan(
    plan: &ShufflePlan,
    catalog: &ServiceCatalog,
    exec: &ExecProfile,
) -> Result<ShuffleCostBreakdown, ShuffleError> {
    for (field, v) in [
        ("function_gb_seconds", exec.function_gb_seconds),
        ("fast_store_gb_hours", exec.fast_store_gb_hours),
        ("duration_s", exec.duration_s),
    ] {
        if v < Decimal::ZERO {
            return Err(ShuffleError::InvalidExec(format!("{field} is negative")));
        }
    }
    let f = exec.slow_store_write_fraction;
    if f < Decimal::ZERO || f > Decimal::ONE {
        return Err(ShuffleError::InvalidExec(format!(
            "slow_store_write_fraction {f} outside [0, 1]"
        )));
    }
    let compute = catalog.compute(&exec.compute_service)?;
    let slow = catalog.storage(&exec.slow_store)?;
    let fast = catalog.storage(&exec.fast_store)?;

    let compute_usd = Usd::new(exec.function_gb_seconds * compute.gib_second_rate()).round_micros();
    let requests = Decimal::from(
        exec.slow_store_requests.unwrap_or_else(|| plan.slow_store_io_ops()),
    );
    let writes = requests * f;
    let slow_store_request_usd = slow.request_cost_dec(requests - writes, writes).round_micros();
    let fast_store_usd = fast.capacity_hours_cost(exec.fast_store_gb_hours).round_micros();

    Ok(ShuffleCostBreakdown {
        compute_usd,
        slow_store_request_usd,
        fast_store_usd,
        total_usd: compute_usd + slow_store_request_usd + fast_store_usd,
        duration_s: exec.duration_s,
    })
}

/// Dollar figures a preset is expected to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedBreakdown {
    pub compute_usd: Usd,
    pub slow_store_request_usd: Usd,
    pub fast_store_usd: Usd,
    pub total_usd: Usd,
    #[serde(with = "serde_decimal")]
    pub duration_s: Decimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShufflePreset {
    pub name: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub problem: ShuffleProblem,
    pub exec: ExecProfile,
    pub expected: ExpectedBreakdown,
}

impl ShufflePreset {
    pub fn from_json_str(text: &str) -> Result<Self, ShuffleError> {
        let preset: ShufflePreset = serde_json::from_str(text)?;
        preset.problem.validate()?;
        Ok(preset)
    }

    pub fn cloudsort() -> Self {
        Self::from_json_str(CLOUDSORT_PRESET_JSON).expect("bundled preset is valid")
    }

    pub fn run(&self, catalog: &ServiceCatalog) -> Result<(ShufflePlan, ShuffleCostBreakdown), ShuffleError> {
        let plan = plan(&self.problem)?;
        let cost = price_plan(&plan, catalog, &self.exec)?;
        Ok((plan, cost))
    }

    pub fn matches(&self, cost: &ShuffleCostBreakdown) -> bool {
        let e = &self.expected;
        cost.compute_usd.micros() == e.compute_usd.micros()
            && cost.slow_store_request_usd.micros() == e.slow_store_request_usd.micros()
            && cost.fast_store_usd.micros() == e.fast_store_usd.micros()
            && cost.total_usd.micros() == e.total_usd.micros()
    }
}

/// Request cost of the single-stage plan when every operation is priced as a write.
pub fn all_write_request_cost(plan: &ShufflePlan, catalog: &ServiceCatalog, store: &str) -> Result<Usd, ShuffleError> {
    let slow = catalog.storage(store)?;
    Ok(slow.request_cost_dec(Decimal::ZERO, Decimal::from(plan.io_ops)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_catalog;
    use crate::money::dec;
    use crate::units::{GB, TB};
    use proptest::prelude::*;

    #[test]
    fn block_count_examples() {
        assert_eq!(block_count(100 * TB, 3 * GB), 33_334);
        assert_eq!(block_count(GB, GB), 1);
        assert_eq!(block_count(10 * GB, 3 * GB), 4);
    }

    #[test]
    fn hundred_terabytes_single_stage() {
        let p = plan(&ShuffleProblem::new(100 * TB, 3 * GB, 1).unwrap()).unwrap();
        assert_eq!(p.transfers, 33_334u128 * 33_334);
        assert!((1.10e9..=1.12e9).contains(&(p.transfers as f64)));
        assert_eq!(p.io_ops, 2 * p.transfers);
        assert_eq!(p.fast_storage_bytes, 0);
        assert_eq!(p.per_stage_transfers, p.transfers);
    }

    #[test]
    fn fifty_stages_need_two_terabytes() {
        let p = plan(&ShuffleProblem::new(100 * TB, 3 * GB, 50).unwrap()).unwrap();
        assert_eq!(p.fast_storage_bytes, 2 * TB);
        assert_eq!(p.per_stage_transfers, 667 * 33_334);
        assert_eq!(p.slow_store_io_ops(), 0);
    }

    #[test]
    fn trivial_plan() {
        let p = plan(&ShuffleProblem::new(3 * GB, 3 * GB, 1).unwrap()).unwrap();
        assert_eq!((p.mappers, p.reducers, p.transfers, p.io_ops), (1, 1, 1, 2));
    }

    #[test]
    fn invalid_problems() {
        assert!(ShuffleProblem::new(0, GB, 1).is_err());
        assert!(ShuffleProblem::new(GB, 0, 1).is_err());
        assert!(ShuffleProblem::new(GB, GB, 0).is_err());
    }

    #[test]
    fn stages_equal_to_mappers() {
        let p = plan(&ShuffleProblem::new(10 * GB, GB, 10).unwrap()).unwrap();
        assert_eq!(p.per_stage_transfers, p.reducers as u128);
    }

    #[test]
    fn all_write_cost_of_hundred_terabytes() {
        let c = default_catalog();
        let p = plan(&ShuffleProblem::new(100 * TB, 3 * GB, 1).unwrap()).unwrap();
        let cost = all_write_request_cost(&p, &c, "object").unwrap().to_f64();
        assert!((cost - 11_111.0).abs() / 11_111.0 <= 0.01, "{cost}");
        let exec = ExecProfile::default();
        let priced = price_plan(&p, &c, &exec).unwrap();
        assert_eq!(priced.slow_store_request_usd.micros(), 11_111_555_560);
    }

    #[test]
    fn empty_exec_costs_nothing() {
        let c = default_catalog();
        let p = plan(&ShuffleProblem::new(GB, GB, 2).unwrap()).unwrap();
        let cost = price_plan(&p, &c, &ExecProfile::default()).unwrap();
        assert_eq!(cost.total_usd, Usd::ZERO);
    }

    #[test]
    fn cloudsort_preset_reproduces_breakdown() {
        let preset = ShufflePreset::cloudsort();
        let (p, cost) = preset.run(&default_catalog()).unwrap();
        assert_eq!(p.fast_storage_bytes, 2 * TB);
        assert_eq!(cost.compute_usd.micros(), 117_000_000);
        assert_eq!(cost.slow_store_request_usd.micros(), 14_000_000);
        assert_eq!(cost.fast_store_usd.micros(), 32_000_000);
        assert_eq!(cost.total_usd.micros(), 163_000_000);
        assert_eq!(cost.duration_s, Decimal::from(2945));
        assert!(preset.matches(&cost));
    }

    #[test]
    fn rejects_bad_exec() {
        let c = default_catalog();
        let p = plan(&ShuffleProblem::new(GB, GB, 1).unwrap()).unwrap();
        let mut exec = ExecProfile {
            function_gb_seconds: dec(-1.0),
            ..ExecProfile::default()
        };
        assert!(matches!(price_plan(&p, &c, &exec), Err(ShuffleError::InvalidExec(_))));
        exec.function_gb_seconds = Decimal::ONE;
        exec.slow_store = "tape".into();
        assert!(matches!(
            price_plan(&p, &c, &exec),
            Err(ShuffleError::Catalog(CatalogError::UnknownService(_)))
        ));
        exec.slow_store = "object".into();
        exec.slow_store_write_fraction = dec(1.5);
        assert!(price_plan(&p, &c, &exec).is_err());
    }

    proptest! {
        #[test]
        fn counting_identities(d in 1u64..10_000_000_000_000, m in 1_000_000u64..10_000_000_000, s in 1u64..200) {
            let p = plan(&ShuffleProblem::new(d, m, s).unwrap()).unwrap();
            prop_assert_eq!(p.transfers, p.mappers as u128 * p.reducers as u128);
            prop_assert_eq!(p.io_ops, 2 * p.transfers);
            prop_assert_eq!(p.mappers, p.reducers);
            if s > 1 {
                prop_assert_eq!(p.fast_storage_bytes, d.div_ceil(s));
                let next = plan(&ShuffleProblem::new(d, m, s + 1).unwrap()).unwrap();
                prop_assert!(next.fast_storage_bytes <= p.fast_storage_bytes);
            }
        }

        #[test]
        fn monotone_in_data(d in 1u64..1_000_000_000_000, extra in 0u64..1_000_000_000_000, s in 1u64..20) {
            let c = default_catalog();
            let a = plan(&ShuffleProblem::new(d, 3 * GB, s).unwrap()).unwrap();
            let b = plan(&ShuffleProblem::new(d + extra, 3 * GB, s).unwrap()).unwrap();
            prop_assert!(b.transfers >= a.transfers);
            let exec = ExecProfile::default();
            let ca = price_plan(&a, &c, &exec).unwrap();
            let cb = price_plan(&b, &c, &exec).unwrap();
            prop_assert!(cb.total_usd >= ca.total_usd);
        }

        #[test]
        fn pricing_is_linear(gbs in 0u64..10_000_000, hours in 0u64..100_000, scale in 0u64..50) {
            let c = default_catalog();
            let p = plan(&ShuffleProblem::new(100 * GB, 3 * GB, 4).unwrap()).unwrap();
            let base = ExecProfile {
                function_gb_seconds: Decimal::from(gbs),
                fast_store_gb_hours: Decimal::from(hours),
                ..ExecProfile::default()
            };
            let scaled = ExecProfile {
                function_gb_seconds: Decimal::from(gbs * scale),
                fast_store_gb_hours: Decimal::from(hours * scale),
                ..ExecProfile::default()
            };
            let a = price_plan(&p, &c, &base).unwrap();
            let b = price_plan(&p, &c, &scaled).unwrap();
            // Components are rounded to micro-dollars, so allow one micro per unit of scale.
            let tol = scale as i128 + 1;
            prop_assert!((b.compute_usd.micros() - a.compute_usd.micros() * scale as i128).abs() <= tol);
            prop_assert!((b.fast_store_usd.micros() - a.fast_store_usd.micros() * scale as i128).abs() <= tol);
        }
    }
}
