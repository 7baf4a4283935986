// SPDX-License-Identifier: Apache-2.0

//! Workload generators: task graphs for shuffle, blocked Cholesky and
//! parameter-server training, plus invocation traces for the simulator.

mod generators;
mod graph;
mod profile;
mod trace;

pub use generators::{
    cholesky_task_count, flops_comm_ratio, gen_cholesky_dag, gen_paramserver, gen_shuffle_dag,
    CholeskyParams, WorkerLayout, MATERIALIZE_EDGE_LIMIT,
};
pub use graph::{
    Edge, GraphError, GraphMetadata, ShuffleShape, Task, TaskGraph, Workload, WorkloadParseError,
};
pub use profile::{parallelism_profile, LevelStats, ParallelismProfile};
pub use trace::{
    fixed_interval_trace, poisson_trace, DurationDist, Invocation, InvocationTrace, SplitMix64,
    TraceError, TraceMeta,
};
