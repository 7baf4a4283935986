// SPDX-License-Identifier: Apache-2.0

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::billing::bill;
use crate::catalog::ComputeServiceSpec;
use crate::money::Usd;
use crate::workloads::{InvocationTrace, TraceError};

pub const DEFAULT_KEEP_ALIVE_S: f64 = 600.0;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("cold-start component {0} must be finite and non-negative")]
    BadColdStart(&'static str),
    #[error("keep_alive_s must be finite and non-negative, got {0}")]
    BadKeepAlive(f64),
    #[error("invalid trace: {0}")]
    Trace(#[from] TraceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColdStartModel {
    pub t_schedule_s: f64,
    pub t_env_s: f64,
    pub t_app_s: f64,
}

impl Default for ColdStartModel {
    fn default() -> Self {
        ColdStartModel {
            t_schedule_s: 0.5,
            t_env_s: 0.0,
            t_app_s: 0.0,
        }
    }
}

impl ColdStartModel {
    pub fn none() -> Self {
        ColdStartModel {
            t_schedule_s: 0.0,
            t_env_s: 0.0,
            t_app_s: 0.0,
        }
    }

    pub fn full(&self) -> f64 {
        self.t_schedule_s + self.t_env_s + self.t_app_s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [
            ("t_schedule_s", self.t_schedule_s),
            ("t_env_s", self.t_env_s),
            ("t_app_s", self.t_app_s),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::BadColdStart(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformConfig {
    pub compute: ComputeServiceSpec,
    #[serde(default)]
    pub cold_start: ColdStartModel,
    #[serde(default = "default_keep_alive")]
    pub keep_alive_s: f64,
    #[serde(default)]
    pub warm_pool_prestarted: u64,
}

fn default_keep_alive() -> f64 {
    DEFAULT_KEEP_ALIVE_S
}

impl PlatformConfig {
    pub fn new(compute: ComputeServiceSpec) -> Self {
        PlatformConfig {
            compute,
            cold_start: ColdStartModel::default(),
            keep_alive_s: DEFAULT_KEEP_ALIVE_S,
            warm_pool_prestarted: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.cold_start.validate()?;
        if !(self.keep_alive_s.is_finite() && self.keep_alive_s >= 0.0) {
            return Err(SimError::BadKeepAlive(self.keep_alive_s));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    Warm,
    Cold,
    Prestarted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvocationRecord {
    pub index: usize,
    pub arrival_s: f64,
    pub start_latency_s: f64,
    pub cold: bool,
    pub start: StartKind,
    pub instance: usize,
    pub finish_s: f64,
    pub billed_units: u64,
    pub cost_usd: Usd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub arrival_s: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub invocations: Vec<InvocationRecord>,
    pub rejected: Vec<Rejection>,
    pub billed_units: u64,
    pub cost_usd: Usd,
    pub peak_concurrency: usize,
    pub instances_created: usize,
    pub cold_starts: usize,
    pub prestarted_used: usize,
    pub instance_seconds_running: f64,
    pub busy_seconds: f64,
    pub utilization: f64,
    /// Time of the last retirement; nothing runs or accrues cost after it.
    pub end_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    Completion,
    Retirement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    kind: EventKind,
    instance: usize,
    generation: u64,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.instance.cmp(&other.instance))
            .then(self.generation.cmp(&other.generation))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Instance {
    created_s: f64,
    retired_s: Option<f64>,
    generation: u64,
}

struct Engine<'a> {
    platform: &'a PlatformConfig,
    events: BinaryHeap<Reverse<Event>>,
    instances: Vec<Instance>,
    /// Idle instances, least recently freed first.
    idle: Vec<usize>,
    busy: usize,
    peak: usize,
}

impl Engine<'_> {
    fn drain_until(&mut self, t: f64) {
        while let Some(Reverse(ev)) = self.events.peek().copied() {
            if ev.time > t {
                break;
            }
            self.events.pop();
            self.handle(ev);
        }
    }

    fn handle(&mut self, ev: Event) {
        let inst = &mut self.instances[ev.instance];
        if inst.generation != ev.generation {
            return;
        }
        match ev.kind {
            EventKind::Completion => {
                self.busy -= 1;
                inst.generation += 1;
                self.idle.push(ev.instance);
                self.events.push(Reverse(Event {
                    time: ev.time + self.platform.keep_alive_s,
                    kind: EventKind::Retirement,
                    instance: ev.instance,
                    generation: inst.generation,
                }));
            }
            EventKind::Retirement => {
                inst.retired_s = Some(ev.time);
                inst.generation += 1;
                self.idle.retain(|&i| i != ev.instance);
            }
        }
    }
}

/// Event-driven replay of `trace` on a FaaS platform.
///
/// Every arrival gets its own instance: the most recently freed idle one if
/// any, otherwise a new one. Events at the same instant are applied in the
/// order completions, retirements, arrivals; arrivals keep trace order.
pub fn simulate(trace: &InvocationTrace, platform: &PlatformConfig) -> Result<SimResult, SimError> {
    trace.validate()?;
    platform.validate()?;
    let spec = &platform.compute;
    let mut engine = Engine {
        platform,
        events: BinaryHeap::new(),
        instances: Vec::new(),
        idle: Vec::new(),
        busy: 0,
        peak: 0,
    };
    let mut prestarted_left = platform.warm_pool_prestarted;
    let mut invocations = Vec::with_capacity(trace.len());
    let mut rejected = Vec::new();
    let (mut cold_starts, mut prestarted_used) = (0, 0);
    let mut billed_units = 0u64;
    let mut cost_usd = Usd::ZERO;
    let mut busy_seconds = 0.0;

    for (index, inv) in trace.invocations.iter().enumerate() {
        let billed = match bill(inv.duration_s, inv.memory_gb, spec) {
            Ok(b) => b,
            Err(e) => {
                rejected.push(Rejection {
                    index,
                    arrival_s: inv.arrival_s,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        engine.drain_until(inv.arrival_s);

        let (instance, start, latency) = match engine.idle.pop() {
            Some(i) => {
                engine.instances[i].generation += 1;
                (i, StartKind::Warm, 0.0)
            }
            None => {
                engine.instances.push(Instance {
                    created_s: inv.arrival_s,
                    retired_s: None,
                    generation: 0,
                });
                let i = engine.instances.len() - 1;
                if prestarted_left > 0 {
                    prestarted_left -= 1;
                    prestarted_used += 1;
                    (i, StartKind::Prestarted, platform.cold_start.t_app_s)
                } else {
                    cold_starts += 1;
                    (i, StartKind::Cold, platform.cold_start.full())
                }
            }
        };
        let finish_s = inv.arrival_s + latency + inv.duration_s;
        engine.busy += 1;
        engine.peak = engine.peak.max(engine.busy);
        engine.events.push(Reverse(Event {
            time: finish_s,
            kind: EventKind::Completion,
            instance,
            generation: engine.instances[instance].generation,
        }));

        billed_units += billed.units;
        cost_usd += billed.cost_usd;
        busy_seconds += inv.duration_s;
        invocations.push(InvocationRecord {
            index,
            arrival_s: inv.arrival_s,
            start_latency_s: latency,
            cold: start != StartKind::Warm,
            start,
            instance,
            finish_s,
            billed_units: billed.units,
            cost_usd: billed.cost_usd,
        });
    }
    engine.drain_until(f64::INFINITY);

    let mut instance_seconds_running = 0.0;
    let mut end_s: f64 = 0.0;
    for inst in &engine.instances {
        let retired = inst.retired_s.expect("every instance retires once drained");
        instance_seconds_running += retired - inst.created_s;
        end_s = end_s.max(retired);
    }
    let utilization = if instance_seconds_running > 0.0 {
        (busy_seconds / instance_seconds_running).min(1.0)
    } else {
        0.0
    };
    Ok(SimResult {
        invocations,
        rejected,
        billed_units,
        cost_usd,
        peak_concurrency: engine.peak,
        instances_created: engine.instances.len(),
        cold_starts,
        prestarted_used,
        instance_seconds_running,
        busy_seconds,
        utilization,
        end_s,
    })
}
