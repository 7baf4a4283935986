// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::graph::{GraphError, TaskGraph, Workload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub ready_tasks: u64,
    /// Bytes produced before this level and consumed at or after it.
    pub working_set_bytes: u128,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelismProfile {
    pub levels: Vec<LevelStats>,
}

impl ParallelismProfile {
    pub fn widths(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.ready_tasks).collect()
    }

    pub fn peak_width(&self) -> u64 {
        self.levels.iter().map(|l| l.ready_tasks).max().unwrap_or(0)
    }

    pub fn total_tasks(&self) -> u64 {
        self.levels.iter().map(|l| l.ready_tasks).sum()
    }
}

fn profile_graph(graph: &TaskGraph) -> Result<ParallelismProfile, GraphError> {
    let levels = graph.levels()?;
    let depth = levels.iter().max().map_or(0, |&m| m + 1);
    let mut widths = vec![0u64; depth];
    for &l in &levels {
        widths[l] += 1;
    }
    // Difference array: an edge is live over levels (level(src), level(dst)].
    let mut delta = vec![0i128; depth + 1];
    let index = graph.index_of();
    for e in &graph.edges {
        let s = levels[index[&e.src]];
        let d = levels[index[&e.dst]];
        delta[s + 1] += e.bytes as i128;
        delta[d + 1] -= e.bytes as i128;
    }
    let mut live = 0i128;
    let levels = (0..depth)
        .map(|level| {
            live += delta[level];
            LevelStats {
                level,
                ready_tasks: widths[level],
                working_set_bytes: live as u128,
            }
        })
        .collect();
    Ok(ParallelismProfile { levels })
}

/// ASAP levelization with per-level width and working set.
pub fn parallelism_profile(workload: &Workload) -> Result<ParallelismProfile, GraphError> {
    match workload {
        Workload::Explicit(g) => profile_graph(g),
        Workload::ImplicitShuffle(s) => Ok(ParallelismProfile {
            levels: vec![
                LevelStats {
                    level: 0,
                    ready_tasks: s.mappers,
                    working_set_bytes: 0,
                },
                LevelStats {
                    level: 1,
                    ready_tasks: s.reducers,
                    working_set_bytes: s.edge_count() * s.bytes_per_transfer as u128,
                },
            ],
        }),
    }
}
