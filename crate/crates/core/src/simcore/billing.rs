// SPDX-License-Identifier: Apache-2.0

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, ComputeKind, ComputeServiceSpec, ServiceCatalog};
use crate::money::{ceil_to_u64, dec, Usd};

pub const FALLACY_PRESET_JSON: &str = include_str!("../../presets/fallacy_t3nano.json");

#[derive(Debug, Error, PartialEq)]
pub enum BillingError {
    #[error("duration {duration_s} s exceeds the {limit_s} s run-time limit")]
    ExceedsMaxRunTime { duration_s: f64, limit_s: f64 },
    #[error("memory {memory_gb} GiB outside the configurable range [{min_gb}, {max_gb}]")]
    MemoryOutOfRange {
        memory_gb: f64,
        min_gb: f64,
        max_gb: f64,
    },
    #[error("duration must be finite and non-negative, got {0}")]
    BadDuration(f64),
    #[error("cost ratio must be positive and finite, got {0}")]
    BadRatio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bill {
    pub units: u64,
    pub cost_usd: Usd,
}

/// `⌈duration / accounting unit⌉`, computed on the decimal value of the duration.
pub fn billed_units(duration_s: f64, spec: &ComputeServiceSpec) -> Result<u64, BillingError> {
    if !(duration_s.is_finite() && duration_s >= 0.0) {
        return Err(BillingError::BadDuration(duration_s));
    }
    Ok(ceil_to_u64(dec(duration_s) / spec.accounting_unit_s))
}

pub fn bill(duration_s: f64, memory_gb: f64, spec: &ComputeServiceSpec) -> Result<Bill, BillingError> {
    let units = billed_units(duration_s, spec)?;
    if let Some(limit) = spec.max_run_time_s {
        if dec(duration_s) > limit {
            return Err(BillingError::ExceedsMaxRunTime {
                duration_s,
                limit_s: to_f64(limit),
            });
        }
    }
    let memory = dec(memory_gb);
    if !(memory_gb.is_finite() && memory >= spec.memory_min_gib && memory <= spec.memory_max_gib) {
        return Err(BillingError::MemoryOutOfRange {
            memory_gb,
            min_gb: to_f64(spec.memory_min_gib),
            max_gb: to_f64(spec.memory_max_gib),
        });
    }
    let cost_usd = spec.unit_price(memory) * units + Usd::new(spec.request_fee_usd);
    Ok(Bill { units, cost_usd })
}

/// `⌈duration / unit⌉ × price × (memory / base memory) + request fee`.
pub fn bill_invocation(
    duration_s: f64,
    memory_gb: f64,
    spec: &ComputeServiceSpec,
) -> Result<Usd, BillingError> {
    bill(duration_s, memory_gb, spec).map(|b| b.cost_usd)
}

/// Always-on instance cost over `span_s`, billed in whole accounting units
/// at the base memory price.
pub fn serverful_cost(span_s: f64, spec: &ComputeServiceSpec) -> Result<Usd, BillingError> {
    let units = billed_units(span_s, spec)?;
    Ok(Usd::new(spec.price_per_unit_usd) * units)
}

/// Busy fraction below which a serverless deployment is cheaper than an
/// always-on instance that costs `1/ratio` as much per minute.
pub fn breakeven_duty_cycle(per_minute_cost_ratio: f64) -> Result<f64, BillingError> {
    if !(per_minute_cost_ratio.is_finite() && per_minute_cost_ratio > 0.0) {
        return Err(BillingError::BadRatio(per_minute_cost_ratio));
    }
    Ok(1.0 / per_minute_cost_ratio)
}

/// Per-minute price of a function at `memory_gib` over the per-minute price
/// of the serverful instance.
pub fn per_minute_cost_ratio(
    serverless: &ComputeServiceSpec,
    serverful: &ComputeServiceSpec,
    memory_gib: Decimal,
) -> Decimal {
    serverless.per_minute_price(memory_gib).amount() / serverful.per_minute_price(serverful.base_memory_gib).amount()
}

/// A copy of `serverless` re-priced so that, at `memory_gib`, a minute costs
/// exactly `ratio` times a minute of `serverful`.
pub fn reprice_to_ratio(
    serverless: &ComputeServiceSpec,
    serverful: &ComputeServiceSpec,
    memory_gib: Decimal,
    ratio: Decimal,
) -> ComputeServiceSpec {
    let target_per_minute = serverful.per_minute_price(serverful.base_memory_gib).amount() * ratio;
    let units_per_minute = Decimal::from(60) / serverless.accounting_unit_s;
    let mut spec = serverless.clone();
    spec.price_per_unit_usd =
        target_per_minute / units_per_minute / serverless.memory_scale(memory_gib);
    spec.request_fee_usd = Decimal::ZERO;
    spec
}

/// The per-minute comparison of a half-GiB function against a t3.nano.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FallacyPreset {
    pub name: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub ratio: f64,
    pub memory_gb: f64,
    pub serverless: String,
    pub serverful: String,
}

impl FallacyPreset {
    pub fn bundled() -> Self {
        serde_json::from_str(FALLACY_PRESET_JSON).expect("bundled preset is valid")
    }

    /// Serverless and serverful specs priced at exactly the preset ratio.
    pub fn specs(
        &self,
        catalog: &ServiceCatalog,
    ) -> Result<(ComputeServiceSpec, ComputeServiceSpec), CatalogError> {
        let serverless = catalog.compute(&self.serverless)?;
        let serverful = catalog.compute(&self.serverful)?;
        if serverless.kind != ComputeKind::ServerlessFunction || serverful.kind != ComputeKind::ServerfulVm {
            return Err(CatalogError::InvalidArgument(
                "preset services have the wrong kinds".into(),
            ));
        }
        let repriced = reprice_to_ratio(serverless, serverful, dec(self.memory_gb), dec(self.ratio));
        Ok((repriced, serverful.clone()))
    }
}

fn to_f64(d: Decimal) -> f64 {
    use rust_decimal::prelude::ToPrimitive;
    d.to_f64().unwrap_or(f64::NAN)
}
