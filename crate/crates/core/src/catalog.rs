// SPDX-License-Identifier: Apache-2.0

//! Priced models of compute and storage services.
//!
//! A [`ServiceCatalog`] is loaded from JSON, validated once, and is immutable
//! afterwards. All unit-cost arithmetic (capacity, per-request, IOPS-month,
//! sustained IOPS rates, per-GiB-second compute rates) lives here.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::{dec, serde_decimal, Usd};
use crate::units::{HOURS_PER_MONTH, SECONDS_PER_MONTH};

/// The bundled catalog: Lambda and EC2 from the compute comparison table and
/// the six storage columns of the storage characteristics table.
pub const DEFAULT_CATALOG_JSON: &str = include_str!("../data/default_catalog.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid catalog entry `{entry}`: {reason}")]
    Validation { entry: String, reason: String },
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComputeKind {
    ServerlessFunction,
    ServerfulVm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryPriceScaling {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StorageClass {
    Block,
    Object,
    File,
    ElasticDb,
    Memory,
    Ideal,
}

impl StorageClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StorageClass::Block => "block",
            StorageClass::Object => "object",
            StorageClass::File => "file",
            StorageClass::ElasticDb => "elastic-db",
            StorageClass::Memory => "memory",
            StorageClass::Ideal => "ideal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provisioning {
    Transparent,
    Manual,
    CapacityOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Persistence {
    LocalPersistent,
    DistributedPersistent,
    LocalEphemeral,
    /// The idealized service leaves the guarantee open.
    Various,
}

/// A value quoted either as a single number or as a `{low, high}` range.
///
/// Computations use the midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Range {
    pub low: Decimal,
    pub high: Decimal,
}

impl Range {
    pub fn point(value: Decimal) -> Self {
        Range {
            low: value,
            high: value,
        }
    }

    pub fn mid(&self) -> Decimal {
        if self.low == self.high {
            self.low
        } else {
            (self.low + self.high) / Decimal::TWO
        }
    }

    pub fn is_point(&self) -> bool {
        self.low == self.high
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    Point(#[serde(with = "serde_decimal")] Decimal),
    Span {
        #[serde(with = "serde_decimal")]
        low: Decimal,
        #[serde(with = "serde_decimal")]
        high: Decimal,
    },
}

impl Serialize for Range {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_point() {
            RangeRepr::Point(self.low).serialize(serializer)
        } else {
            RangeRepr::Span {
                low: self.low,
                high: self.high,
            }
            .serialize(serializer)
        }
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match RangeRepr::deserialize(deserializer)? {
            RangeRepr::Point(v) => Range::point(v),
            RangeRepr::Span { low, high } => Range { low, high },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeServiceSpec {
    pub name: String,
    pub kind: ComputeKind,
    #[serde(with = "serde_decimal")]
    pub memory_min_gib: Decimal,
    #[serde(with = "serde_decimal")]
    pub memory_max_gib: Decimal,
    #[serde(with = "serde_decimal")]
    pub max_local_storage_gib: Decimal,
    #[serde(
        default,
        with = "serde_decimal::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub max_run_time_s: Option<Decimal>,
    #[serde(with = "serde_decimal")]
    pub accounting_unit_s: Decimal,
    #[serde(with = "serde_decimal")]
    pub price_per_unit_usd: Decimal,
    /// Upper end of the quoted price range (largest instance type); display only.
    #[serde(
        default,
        with = "serde_decimal::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub price_per_unit_max_usd: Option<Decimal>,
    #[serde(with = "serde_decimal")]
    pub base_memory_gib: Decimal,
    #[serde(default)]
    pub memory_price_scaling: MemoryPriceScaling,
    #[serde(default, with = "serde_decimal")]
    pub request_fee_usd: Decimal,
}

impl ComputeServiceSpec {
    pub fn is_serverless(&self) -> bool {
        self.kind == ComputeKind::ServerlessFunction
    }

    /// Multiplier applied to the base price for a configured memory size.
    pub fn memory_scale(&self, memory_gib: Decimal) -> Decimal {
        match self.memory_price_scaling {
            MemoryPriceScaling::Linear => memory_gib / self.base_memory_gib,
        }
    }

    /// Price of one accounting unit at the given memory size.
    pub fn unit_price(&self, memory_gib: Decimal) -> Usd {
        Usd::new(self.price_per_unit_usd * self.memory_scale(memory_gib))
    }

    /// USD per GiB-second: `price / accounting_unit / base_memory`.
    pub fn gib_second_rate(&self) -> Decimal {
        self.price_per_unit_usd / self.accounting_unit_s / self.base_memory_gib
    }

    /// Cost of one minute of execution at the given memory size, ignoring rounding.
    pub fn per_minute_price(&self, memory_gib: Decimal) -> Usd {
        self.unit_price(memory_gib) * (Decimal::from(60) / self.accounting_unit_s)
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let fail = |reason: &str| {
            Err(CatalogError::Validation {
                entry: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.memory_min_gib > self.memory_max_gib {
            return fail("memory_min_gib exceeds memory_max_gib");
        }
        if self.memory_min_gib.is_sign_negative() || self.max_local_storage_gib.is_sign_negative()
        {
            return fail("memory and storage sizes must be non-negative");
        }
        if self.accounting_unit_s <= Decimal::ZERO {
            return fail("accounting_unit_s must be positive");
        }
        if self.base_memory_gib <= Decimal::ZERO {
            return fail("base_memory_gib must be positive");
        }
        if is_negative(self.price_per_unit_usd)
            || is_negative(self.request_fee_usd)
            || self.price_per_unit_max_usd.is_some_and(is_negative)
        {
            return fail("prices must be non-negative");
        }
        match (self.kind, self.max_run_time_s) {
            (ComputeKind::ServerlessFunction, None) => {
                return fail("serverless functions require max_run_time_s")
            }
            (_, Some(t)) if t <= Decimal::ZERO => return fail("max_run_time_s must be positive"),
            _ => {}
        }
        Ok(())
    }
}

/// Per-request price held as `usd / per_requests` so costs derived from a
/// monthly IOPS cell multiply before dividing and stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestPrice {
    pub usd: Decimal,
    pub per_requests: u64,
}

impl RequestPrice {
    pub fn cost(&self, requests: Decimal) -> Decimal {
        if self.per_requests == 1 {
            requests * self.usd
        } else {
            requests * self.usd / Decimal::from(self.per_requests)
        }
    }

    pub fn per_request(&self) -> Decimal {
        self.cost(Decimal::ONE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageServiceSpec {
    pub name: String,
    pub class: StorageClass,
    pub function_accessible: bool,
    pub provisioning: Provisioning,
    pub persistence: Persistence,
    pub latency_ms: Range,
    pub capacity_usd_per_gb_month: Range,
    pub throughput_usd_per_mbps_month: Range,
    /// Monthly cost of one sustained request per second at a 50/50 read/write mix.
    pub iops_usd_per_month: Range,
    /// Explicit per-request prices. When absent, both are backed out of
    /// `iops_usd_per_month` as `cell / 2,592,000`.
    #[serde(
        default,
        with = "serde_decimal::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub read_request_usd: Option<Decimal>,
    #[serde(
        default,
        with = "serde_decimal::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub write_request_usd: Option<Decimal>,
    #[serde(with = "serde_decimal")]
    pub min_transfer_kb: Decimal,
}

impl StorageServiceSpec {
    fn blended(&self) -> RequestPrice {
        RequestPrice {
            usd: self.iops_usd_per_month.mid(),
            per_requests: SECONDS_PER_MONTH,
        }
    }

    pub fn read_price(&self) -> RequestPrice {
        self.read_request_usd
            .map(|usd| RequestPrice {
                usd,
                per_requests: 1,
            })
            .unwrap_or_else(|| self.blended())
    }

    pub fn write_price(&self) -> RequestPrice {
        self.write_request_usd
            .map(|usd| RequestPrice {
                usd,
                per_requests: 1,
            })
            .unwrap_or_else(|| self.blended())
    }

    /// `gb × months × capacity price`.
    pub fn capacity_cost(&self, gb: f64, months: f64) -> Usd {
        self.capacity_cost_dec(dec(gb), dec(months))
    }

    pub fn capacity_cost_dec(&self, gb: Decimal, months: Decimal) -> Usd {
        Usd::new(gb * months * self.capacity_usd_per_gb_month.mid())
    }

    /// Capacity held for a number of hours, with a 720-hour month.
    pub fn capacity_hours_cost(&self, gb_hours: Decimal) -> Usd {
        Usd::new(
            gb_hours * self.capacity_usd_per_gb_month.mid() / Decimal::from(HOURS_PER_MONTH),
        )
    }

    /// `reads × read price + writes × write price`.
    pub fn request_cost(&self, reads: f64, writes: f64) -> Usd {
        self.request_cost_dec(dec(reads), dec(writes))
    }

    pub fn request_cost_dec(&self, reads: Decimal, writes: Decimal) -> Usd {
        Usd::new(self.read_price().cost(reads) + self.write_price().cost(writes))
    }

    /// Cost of `iops` requests per second sustained for 30 days at a 50/50 mix.
    pub fn iops_month_cost(&self, iops: f64) -> Usd {
        let half = dec(iops) * Decimal::from(SECONDS_PER_MONTH) / Decimal::TWO;
        self.request_cost_dec(half, half)
    }

    /// Dollars per minute for sustaining `iops` with a write fraction `mix`.
    pub fn sustained_iops_rate_cost(&self, iops: f64, mix: f64) -> Result<Usd, CatalogError> {
        if !(0.0..=1.0).contains(&mix) {
            return Err(CatalogError::InvalidArgument(format!(
                "write fraction {mix} outside [0, 1]"
            )));
        }
        let per_minute = dec(iops) * Decimal::from(60);
        let writes = per_minute * dec(mix);
        Ok(self.request_cost_dec(per_minute - writes, writes))
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let fail = |reason: String| {
            Err(CatalogError::Validation {
                entry: self.name.clone(),
                reason,
            })
        };
        for (field, range) in [
            ("latency_ms", &self.latency_ms),
            ("capacity_usd_per_gb_month", &self.capacity_usd_per_gb_month),
            (
                "throughput_usd_per_mbps_month",
                &self.throughput_usd_per_mbps_month,
            ),
            ("iops_usd_per_month", &self.iops_usd_per_month),
        ] {
            if is_negative(range.low) || is_negative(range.high) {
                return fail(format!("{field} must be non-negative"));
            }
            if range.low > range.high {
                return fail(format!("{field} low exceeds high"));
            }
        }
        if self.read_request_usd.is_some_and(is_negative)
            || self.write_request_usd.is_some_and(is_negative)
        {
            return fail("request prices must be non-negative".into());
        }
        if is_negative(self.min_transfer_kb) {
            return fail("min_transfer_kb must be non-negative".into());
        }
        if self.iops_month_cost(1.0).is_negative() {
            return fail("derived IOPS-month price is negative".into());
        }
        Ok(())
    }
}

fn is_negative(value: Decimal) -> bool {
    value < Decimal::ZERO
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceCatalog {
    #[serde(default)]
    pub compute: Vec<ComputeServiceSpec>,
    #[serde(default)]
    pub storage: Vec<StorageServiceSpec>,
}

impl ServiceCatalog {
    pub fn from_json_str(text: &str) -> Result<Self, CatalogError> {
        let catalog: ServiceCatalog = serde_json::from_str(text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let mut seen = HashSet::new();
        let names = self
            .compute
            .iter()
            .map(|c| &c.name)
            .chain(self.storage.iter().map(|s| &s.name));
        for name in names {
            if name.trim().is_empty() {
                return Err(CatalogError::Validation {
                    entry: name.clone(),
                    reason: "empty name".into(),
                });
            }
            if !seen.insert(name) {
                return Err(CatalogError::Validation {
                    entry: name.clone(),
                    reason: "duplicate name".into(),
                });
            }
        }
        self.compute.iter().try_for_each(ComputeServiceSpec::validate)?;
        self.storage.iter().try_for_each(StorageServiceSpec::validate)?;
        Ok(())
    }

    pub fn compute(&self, name: &str) -> Result<&ComputeServiceSpec, CatalogError> {
        self.compute
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| CatalogError::UnknownService(name.to_string()))
    }

    /// Looks a storage service up by name, falling back to its class name.
    pub fn storage(&self, name: &str) -> Result<&StorageServiceSpec, CatalogError> {
        self.storage
            .iter()
            .find(|s| s.name == name)
            .or_else(|| self.storage.iter().find(|s| s.class.as_str() == name))
            .ok_or_else(|| CatalogError::UnknownService(name.to_string()))
    }

    pub fn first_compute(&self, kind: ComputeKind) -> Option<&ComputeServiceSpec> {
        self.compute.iter().find(|c| c.kind == kind)
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<ServiceCatalog, CatalogError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ServiceCatalog::from_json_str(&text)
}

pub fn default_catalog() -> ServiceCatalog {
    ServiceCatalog::from_json_str(DEFAULT_CATALOG_JSON).expect("bundled catalog is valid")
}
