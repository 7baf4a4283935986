// SPDX-License-Identifier: Apache-2.0

//! FaaS platform simulation, per-invocation billing and the serverful
//! baseline.

mod billing;
mod engine;

pub use billing::{
    bill, bill_invocation, billed_units, breakeven_duty_cycle, per_minute_cost_ratio,
    reprice_to_ratio, serverful_cost, Bill, BillingError, FallacyPreset, FALLACY_PRESET_JSON,
};
pub use engine::{
    simulate, ColdStartModel, InvocationRecord, PlatformConfig, Rejection, SimError, SimResult,
    StartKind, DEFAULT_KEEP_ALIVE_S,
};
