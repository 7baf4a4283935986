// SPDX-License-Identifier: Apache-2.0

//! Graph generators for the shuffle, blocked Cholesky and parameter-server
//! workloads.

use std::collections::HashMap;

use serde_json::{json, Map, Value};

use super::graph::{Edge, GraphMetadata, ShuffleShape, Task, TaskGraph, Workload};
use crate::commpatterns::{CommScenario, Deployment, Granularity, Pattern};

/// Shuffle graphs with more edges than this are kept implicit.
pub const MATERIALIZE_EDGE_LIMIT: u128 = 10_000_000;

pub(crate) fn shuffle_params(s: &ShuffleShape) -> Map<String, Value> {
    let mut params = Map::new();
    params.insert("mappers".into(), json!(s.mappers));
    params.insert("reducers".into(), json!(s.reducers));
    params.insert("bytes_per_transfer".into(), json!(s.bytes_per_transfer));
    params
}

/// Mapper ids are `0..M`, reducer ids `M..M+R`.
pub(crate) fn explicit_shuffle(s: ShuffleShape) -> TaskGraph {
    let mut tasks = Vec::with_capacity(s.task_count() as usize);
    for id in 0..s.mappers {
        tasks.push(Task {
            id,
            duration_s: 1.0,
            memory_gb: 3.0,
            kind: "map".into(),
        });
    }
    for r in 0..s.reducers {
        tasks.push(Task {
            id: s.mappers + r,
            duration_s: 1.0,
            memory_gb: 3.0,
            kind: "reduce".into(),
        });
    }
    let mut edges = Vec::with_capacity(s.edge_count() as usize);
    for m in 0..s.mappers {
        for r in 0..s.reducers {
            edges.push(Edge {
                src: m,
                dst: s.mappers + r,
                bytes: s.bytes_per_transfer,
            });
        }
    }
    TaskGraph {
        tasks,
        edges,
        metadata: GraphMetadata {
            generator: "shuffle".into(),
            params: shuffle_params(&s),
            implicit: false,
        },
    }
}

/// Bipartite map/reduce graph: every mapper feeds every reducer.
pub fn gen_shuffle_dag(mappers: u64, reducers: u64, bytes_per_transfer: u64) -> Workload {
    assert!(mappers >= 1 && reducers >= 1, "shuffle needs at least one mapper and reducer");
    let shape = ShuffleShape {
        mappers,
        reducers,
        bytes_per_transfer,
    };
    if shape.edge_count() > MATERIALIZE_EDGE_LIMIT {
        Workload::ImplicitShuffle(shape)
    } else {
        Workload::Explicit(explicit_shuffle(shape))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholeskyParams {
    /// Blocks per matrix dimension.
    pub blocks: u64,
    /// Rows (and columns) per block.
    pub block_dim: u64,
    /// Sustained floating-point rate used to turn flop counts into durations.
    pub flops_per_second: f64,
}

impl CholeskyParams {
    pub fn new(blocks: u64) -> Self {
        CholeskyParams {
            blocks,
            block_dim: 4096,
            flops_per_second: 1.0e10,
        }
    }

    /// Dense double-precision block.
    pub fn block_bytes(&self) -> u64 {
        self.block_dim * self.block_dim * 8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CholeskyOp {
    Factorize { k: u64 },
    Solve { i: u64, k: u64 },
    Update { i: u64, j: u64, k: u64 },
}

/// `Σ_k [1 + m + m(m+1)/2]` with `m = T - k - 1`.
pub fn cholesky_task_count(blocks: u64) -> u64 {
    (0..blocks)
        .map(|k| {
            let m = blocks - k - 1;
            1 + m + m * (m + 1) / 2
        })
        .sum()
}

/// Right-looking blocked Cholesky.
///
/// Step `k` factorizes the diagonal block, solves the `T-k-1` blocks below
/// it, and applies one fused update per lower-triangle block of the
/// trailing matrix. Each update feeds the task that next touches its block
/// in step `k+1`.
pub fn gen_cholesky_dag(params: CholeskyParams) -> TaskGraph {
    let t = params.blocks;
    assert!(t >= 1, "Cholesky needs at least one block");
    let b = params.block_dim as f64;
    let bytes = params.block_bytes();
    let secs = |flops: f64| (flops / params.flops_per_second).max(f64::MIN_POSITIVE);
    let block_gb = bytes as f64 / 1e9;

    let mut ids: HashMap<CholeskyOp, u64> = HashMap::new();
    let mut tasks = Vec::new();
    let mut add = |op: CholeskyOp, kind: &str, flops: f64, blocks_resident: f64| {
        let id = tasks.len() as u64;
        tasks.push(Task {
            id,
            duration_s: secs(flops),
            memory_gb: block_gb * blocks_resident,
            kind: kind.into(),
        });
        ids.insert(op, id);
    };
    for k in 0..t {
        add(CholeskyOp::Factorize { k }, "factorize", b * b * b / 3.0, 1.0);
        for i in k + 1..t {
            add(CholeskyOp::Solve { i, k }, "solve", b * b * b, 2.0);
        }
        for i in k + 1..t {
            for j in k + 1..=i {
                let (kind, flops) = if i == j {
                    ("syrk", b * b * b)
                } else {
                    ("gemm", 2.0 * b * b * b)
                };
                add(CholeskyOp::Update { i, j, k }, kind, flops, 3.0);
            }
        }
    }

    let mut edges = Vec::new();
    let mut link = |from: CholeskyOp, to: CholeskyOp| {
        edges.push(Edge {
            src: ids[&from],
            dst: ids[&to],
            bytes,
        });
    };
    for k in 0..t {
        for i in k + 1..t {
            link(CholeskyOp::Factorize { k }, CholeskyOp::Solve { i, k });
        }
        for i in k + 1..t {
            for j in k + 1..=i {
                let update = CholeskyOp::Update { i, j, k };
                link(CholeskyOp::Solve { i, k }, update);
                if j != i {
                    link(CholeskyOp::Solve { i: j, k }, update);
                }
                let next = if i == k + 1 && j == k + 1 {
                    CholeskyOp::Factorize { k: k + 1 }
                } else if j == k + 1 {
                    CholeskyOp::Solve { i, k: k + 1 }
                } else {
                    CholeskyOp::Update { i, j, k: k + 1 }
                };
                link(update, next);
            }
        }
    }
    edges.sort_by_key(|e| (e.src, e.dst));

    let mut meta = Map::new();
    meta.insert("blocks".into(), json!(t));
    meta.insert("block_dim".into(), json!(params.block_dim));
    meta.insert("flops_per_second".into(), json!(params.flops_per_second));
    TaskGraph {
        tasks,
        edges,
        metadata: GraphMetadata {
            generator: "cholesky".into(),
            params: meta,
            implicit: false,
        },
    }
}

/// How parameter-server workers are packed onto instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerLayout {
    pub functions_per_instance: u64,
    pub granularity: Granularity,
}

impl Default for WorkerLayout {
    fn default() -> Self {
        WorkerLayout {
            functions_per_instance: 1,
            granularity: Granularity::FunctionGrained,
        }
    }
}

/// `rounds` repetitions of gradient aggregation followed by a broadcast of
/// the updated model, over `workers` parties laid out `K` per instance
/// (`N = ⌈W/K⌉`).
pub fn gen_paramserver(
    workers: u64,
    rounds: u64,
    gradient_bytes: u64,
    layout: WorkerLayout,
) -> Vec<CommScenario> {
    assert!(workers >= 1 && rounds >= 1, "parameter server needs W, R >= 1");
    let k = layout.functions_per_instance.max(1);
    let deployment = Deployment::new(workers.div_ceil(k), k, layout.granularity)
        .expect("N and K are positive");
    (0..rounds)
        .flat_map(|_| {
            [
                CommScenario::new(Pattern::Aggregation, deployment, gradient_bytes),
                CommScenario::new(Pattern::Broadcast, deployment, gradient_bytes),
            ]
        })
        .collect()
}

/// Cholesky computation over communication: `(n³/3) / n² = n/3`.
pub fn flops_comm_ratio(n: u64) -> f64 {
    assert!(n >= 1);
    n as f64 / 3.0
}
