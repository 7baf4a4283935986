// SPDX-License-Identifier: Apache-2.0

//! Invocation traces and their seeded generators.
//!
//! Randomized traces use SplitMix64 so that any implementation can
//! reproduce them bit for bit:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! A uniform `u` in `[0, 1)` is `(next >> 11) * 2⁻⁵³`, and an exponential
//! sample with rate `λ` is `-ln(1 - u) / λ`. Poisson arrivals draw the
//! inter-arrival gap first and then, for exponential durations, the
//! duration, from the same stream. The first arrival is at the first gap.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("invocation {0}: arrival is earlier than the previous one")]
    Unsorted(usize),
    #[error("invocation {0}: duration must be positive and finite")]
    BadDuration(usize),
    #[error("invocation {0}: arrival must be finite and non-negative")]
    BadArrival(usize),
    #[error("invocation {0}: memory must be positive and finite")]
    BadMemory(usize),
    #[error("invalid generator parameter: {0}")]
    BadParameter(String),
}

/// 64-bit SplitMix generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_exp(&mut self, rate: f64) -> f64 {
        -(1.0 - self.next_f64()).ln() / rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Invocation {
    pub arrival_s: f64,
    pub duration_s: f64,
    pub memory_gb: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generator: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvocationTrace {
    pub invocations: Vec<Invocation>,
    pub meta: Option<TraceMeta>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TraceRepr {
    Bare(Vec<Invocation>),
    WithMeta {
        invocations: Vec<Invocation>,
        #[serde(flatten)]
        meta: TraceMeta,
    },
}

impl Serialize for InvocationTrace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.meta {
            None => self.invocations.serialize(serializer),
            Some(meta) => {
                #[derive(Serialize)]
                struct Out<'a> {
                    invocations: &'a [Invocation],
                    #[serde(flatten)]
                    meta: &'a TraceMeta,
                }
                Out {
                    invocations: &self.invocations,
                    meta,
                }
                .serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for InvocationTrace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match TraceRepr::deserialize(deserializer)? {
            TraceRepr::Bare(invocations) => InvocationTrace {
                invocations,
                meta: None,
            },
            TraceRepr::WithMeta { invocations, meta } => InvocationTrace {
                invocations,
                meta: Some(meta),
            },
        })
    }
}

impl InvocationTrace {
    pub fn new(invocations: Vec<Invocation>) -> Result<Self, TraceError> {
        let trace = InvocationTrace {
            invocations,
            meta: None,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.invocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.invocations.is_empty()
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let mut prev = f64::NEG_INFINITY;
        for (i, inv) in self.invocations.iter().enumerate() {
            if !(inv.arrival_s.is_finite() && inv.arrival_s >= 0.0) {
                return Err(TraceError::BadArrival(i));
            }
            if inv.arrival_s < prev {
                return Err(TraceError::Unsorted(i));
            }
            if !(inv.duration_s.is_finite() && inv.duration_s > 0.0) {
                return Err(TraceError::BadDuration(i));
            }
            if !(inv.memory_gb.is_finite() && inv.memory_gb > 0.0) {
                return Err(TraceError::BadMemory(i));
            }
            prev = inv.arrival_s;
        }
        Ok(())
    }

    /// Maximum number of invocations in flight at once, treating each as the
    /// half-open interval `[arrival, arrival + duration)`.
    pub fn max_overlap(&self) -> usize {
        let mut in_flight: BinaryHeap<Reverse<OrdF64>> = BinaryHeap::new();
        let mut peak = 0;
        for inv in &self.invocations {
            while in_flight
                .peek()
                .is_some_and(|Reverse(end)| end.0 <= inv.arrival_s)
            {
                in_flight.pop();
            }
            in_flight.push(Reverse(OrdF64(inv.arrival_s + inv.duration_s)));
            peak = peak.max(in_flight.len());
        }
        peak
    }

    /// Sum of invocation durations.
    pub fn busy_seconds(&self) -> f64 {
        self.invocations.iter().map(|i| i.duration_s).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DurationDist {
    Fixed(f64),
    Exponential { mean: f64 },
}

/// `count` invocations every `interval_s` seconds starting at `start_s`.
pub fn fixed_interval_trace(
    count: usize,
    start_s: f64,
    interval_s: f64,
    duration_s: f64,
    memory_gb: f64,
) -> Result<InvocationTrace, TraceError> {
    if !(interval_s.is_finite() && interval_s >= 0.0) {
        return Err(TraceError::BadParameter(format!("interval {interval_s}")));
    }
    let invocations = (0..count)
        .map(|i| Invocation {
            arrival_s: start_s + i as f64 * interval_s,
            duration_s,
            memory_gb,
        })
        .collect();
    let mut params = Map::new();
    params.insert("count".into(), count.into());
    params.insert("start_s".into(), start_s.into());
    params.insert("interval_s".into(), interval_s.into());
    params.insert("duration_s".into(), duration_s.into());
    params.insert("memory_gb".into(), memory_gb.into());
    let trace = InvocationTrace {
        invocations,
        meta: Some(TraceMeta {
            seed: None,
            generator: "fixed".into(),
            params,
        }),
    };
    trace.validate()?;
    Ok(trace)
}

/// Poisson arrivals at `rate_per_s`, `count` invocations.
pub fn poisson_trace(
    seed: u64,
    rate_per_s: f64,
    count: usize,
    duration: DurationDist,
    memory_gb: f64,
) -> Result<InvocationTrace, TraceError> {
    if !(rate_per_s.is_finite() && rate_per_s > 0.0) {
        return Err(TraceError::BadParameter(format!("rate {rate_per_s}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut t = 0.0;
    let mut invocations = Vec::with_capacity(count);
    for _ in 0..count {
        t += rng.next_exp(rate_per_s);
        let duration_s = match duration {
            DurationDist::Fixed(d) => d,
            // Exponential draws can round to zero; keep durations positive.
            DurationDist::Exponential { mean } => rng.next_exp(1.0 / mean).max(1e-9),
        };
        invocations.push(Invocation {
            arrival_s: t,
            duration_s,
            memory_gb,
        });
    }
    let mut params = Map::new();
    params.insert("rate_per_s".into(), rate_per_s.into());
    params.insert("count".into(), count.into());
    match duration {
        DurationDist::Fixed(d) => {
            params.insert("duration_s".into(), d.into());
        }
        DurationDist::Exponential { mean } => {
            params.insert("duration_mean_s".into(), mean.into());
        }
    }
    params.insert("memory_gb".into(), memory_gb.into());
    let trace = InvocationTrace {
        invocations,
        meta: Some(TraceMeta {
            seed: Some(seed),
            generator: "poisson".into(),
            params,
        }),
    };
    trace.validate()?;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0 and seed 1234567 of the reference SplitMix64.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        let mut r = SplitMix64::new(1_234_567);
        assert_eq!(r.next_u64(), 6_457_827_717_110_365_317);
        assert_eq!(r.next_u64(), 3_203_168_211_198_807_973);
    }

    #[test]
    fn uniform_range() {
        let mut r = SplitMix64::new(42);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn poisson_is_deterministic_and_sorted() {
        let a = poisson_trace(7, 2.0, 500, DurationDist::Exponential { mean: 0.3 }, 0.5).unwrap();
        let b = poisson_trace(7, 2.0, 500, DurationDist::Exponential { mean: 0.3 }, 0.5).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let c = poisson_trace(8, 2.0, 500, DurationDist::Exponential { mean: 0.3 }, 0.5).unwrap();
        assert_ne!(a, c);
        let mean_gap = a.invocations.last().unwrap().arrival_s / 500.0;
        assert!((mean_gap - 0.5).abs() < 0.1, "{mean_gap}");
    }

    #[test]
    fn validation_errors() {
        let inv = |a, d| Invocation {
            arrival_s: a,
            duration_s: d,
            memory_gb: 0.5,
        };
        assert_eq!(
            InvocationTrace::new(vec![inv(1.0, 1.0), inv(0.5, 1.0)]),
            Err(TraceError::Unsorted(1))
        );
        assert_eq!(
            InvocationTrace::new(vec![inv(0.0, 0.0)]),
            Err(TraceError::BadDuration(0))
        );
        assert!(poisson_trace(1, 0.0, 1, DurationDist::Fixed(1.0), 1.0).is_err());
    }

    #[test]
    fn json_forms() {
        let bare = r#"[{"arrival_s": 0, "duration_s": 1.5, "memory_gb": 0.5}]"#;
        let t: InvocationTrace = serde_json::from_str(bare).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.meta.is_none());
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.starts_with('['));

        let p = poisson_trace(3, 1.0, 4, DurationDist::Fixed(1.0), 1.0).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: InvocationTrace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn overlap_counts() {
        let t = fixed_interval_trace(5, 0.0, 1.0, 2.5, 0.5).unwrap();
        assert_eq!(t.max_overlap(), 3);
        let t = fixed_interval_trace(5, 0.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(t.max_overlap(), 1);
        assert_eq!(InvocationTrace::default().max_overlap(), 0);
    }
}
