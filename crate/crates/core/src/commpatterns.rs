// SPDX-License-Identifier: Apache-2.0

//! Closed-form message and traffic counts for broadcast, aggregation and
//! shuffle.
//!
//! A remote message is one that crosses an instance boundary. With
//! `VmGrouped` deployments the K tasks on an instance share, combine or
//! aggregate locally, so one message per instance (or per ordered instance
//! pair, for shuffle) suffices. With `FunctionGrained` deployments every task
//! is its own instance.
//!
//! Broadcast sources and aggregation sinks count as one of the parties, and
//! the counts are kept as exactly `N` rather than `N - 1`. Shuffle counts
//! include an instance's message to itself, giving `N²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Broadcast,
    Aggregation,
    Shuffle,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Broadcast, Pattern::Aggregation, Pattern::Shuffle];

    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Broadcast => "broadcast",
            Pattern::Aggregation => "aggregation",
            Pattern::Shuffle => "shuffle",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "broadcast" => Ok(Pattern::Broadcast),
            "aggregation" | "aggregate" => Ok(Pattern::Aggregation),
            "shuffle" => Ok(Pattern::Shuffle),
            other => Err(format!("unknown pattern `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    VmGrouped,
    FunctionGrained,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::VmGrouped => "vm-grouped",
            Granularity::FunctionGrained => "function-grained",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vm" | "vm-grouped" | "grouped" => Ok(Granularity::VmGrouped),
            "fn" | "function" | "function-grained" => Ok(Granularity::FunctionGrained),
            other => Err(format!("unknown granularity `{other}`")),
        }
    }
}

/// `N` instances with `K` functions (tasks) each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Deployment {
    pub n_instances: u64,
    pub functions_per_instance: u64,
    pub granularity: Granularity,
}

impl Deployment {
    pub fn new(n: u64, k: u64, granularity: Granularity) -> Result<Self, String> {
        if n == 0 || k == 0 {
            return Err(format!("deployment needs N >= 1 and K >= 1 (got N={n}, K={k})"));
        }
        Ok(Deployment {
            n_instances: n,
            functions_per_instance: k,
            granularity,
        })
    }

    /// Number of parties that exchange messages over the network.
    pub fn network_parties(&self) -> u64 {
        match self.granularity {
            Granularity::VmGrouped => self.n_instances,
            Granularity::FunctionGrained => self.n_instances * self.functions_per_instance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommScenario {
    pub pattern: Pattern,
    pub deployment: Deployment,
    pub payload_bytes: u64,
}

impl CommScenario {
    pub fn new(pattern: Pattern, deployment: Deployment, payload_bytes: u64) -> Self {
        CommScenario {
            pattern,
            deployment,
            payload_bytes,
        }
    }
}

/// Remote messages needed for one round of the scenario's pattern.
pub fn remote_messages(scenario: &CommScenario) -> u128 {
    let parties = scenario.deployment.network_parties() as u128;
    match scenario.pattern {
        Pattern::Broadcast | Pattern::Aggregation => parties,
        Pattern::Shuffle => parties * parties,
    }
}

/// How many times more messages function-grained deployments send than
/// VM-grouped ones with `K` functions per instance.
pub fn traffic_overhead_ratio(pattern: Pattern, k: u64) -> u128 {
    let k = k as u128;
    match pattern {
        Pattern::Broadcast | Pattern::Aggregation => k,
        Pattern::Shuffle => k * k,
    }
}

pub fn remote_traffic_bytes(scenario: &CommScenario) -> u128 {
    remote_messages(scenario) * scenario.payload_bytes as u128
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommReport {
    pub pattern: Pattern,
    pub n: u64,
    pub k: u64,
    pub granularity: Granularity,
    pub messages: u128,
    pub bytes: u128,
}

impl From<&CommScenario> for CommReport {
    fn from(s: &CommScenario) -> Self {
        CommReport {
            pattern: s.pattern,
            n: s.deployment.n_instances,
            k: s.deployment.functions_per_instance,
            granularity: s.deployment.granularity,
            messages: remote_messages(s),
            bytes: remote_traffic_bytes(s),
        }
    }
}
