// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("duplicate task id {0}")]
    DuplicateTask(u64),
    #[error("edge {src} -> {dst} references unknown task {missing}")]
    DanglingEdge { src: u64, dst: u64, missing: u64 },
    #[error("task {0} has a non-positive or non-finite duration")]
    BadDuration(u64),
    #[error("task {0} has a negative or non-finite memory demand")]
    BadMemory(u64),
    #[error("self-loop on task {0}")]
    SelfLoop(u64),
    #[error("graph contains a cycle through task {0}")]
    Cycle(u64),
    #[error("implicit graph is missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("graph with {edges} edges is too large to materialize (limit {limit})")]
    TooLarge { edges: u128, limit: u128 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub id: u64,
    pub duration_s: f64,
    pub memory_gb: f64,
    pub kind: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub src: u64,
    pub dst: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphMetadata {
    pub generator: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub implicit: bool,
}

/// A materialized computation graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskGraph {
    pub tasks: Vec<Task>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub metadata: GraphMetadata,
}

impl TaskGraph {
    pub fn index_of(&self) -> HashMap<u64, usize> {
        self.tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect()
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let mut index = HashMap::with_capacity(self.tasks.len());
        for (i, t) in self.tasks.iter().enumerate() {
            if index.insert(t.id, i).is_some() {
                return Err(GraphError::DuplicateTask(t.id));
            }
            if !(t.duration_s.is_finite() && t.duration_s > 0.0) {
                return Err(GraphError::BadDuration(t.id));
            }
            if !(t.memory_gb.is_finite() && t.memory_gb >= 0.0) {
                return Err(GraphError::BadMemory(t.id));
            }
        }
        for e in &self.edges {
            for end in [e.src, e.dst] {
                if !index.contains_key(&end) {
                    return Err(GraphError::DanglingEdge {
                        src: e.src,
                        dst: e.dst,
                        missing: end,
                    });
                }
            }
            if e.src == e.dst {
                return Err(GraphError::SelfLoop(e.src));
            }
        }
        self.levels().map(|_| ())
    }

    /// ASAP level of every task, in task order.
    ///
    /// Sources sit at level 0; every other task one past its deepest predecessor.
    pub fn levels(&self) -> Result<Vec<usize>, GraphError> {
        let index = self.index_of();
        let n = self.tasks.len();
        let mut indegree = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            let (Some(&s), Some(&d)) = (index.get(&e.src), index.get(&e.dst)) else {
                let missing = if index.contains_key(&e.src) { e.dst } else { e.src };
                return Err(GraphError::DanglingEdge {
                    src: e.src,
                    dst: e.dst,
                    missing,
                });
            };
            succ[s].push(d);
            indegree[d] += 1;
        }
        let mut level = vec![0usize; n];
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut visited = 0;
        while let Some(u) = ready.pop() {
            visited += 1;
            for &v in &succ[u] {
                level[v] = level[v].max(level[u] + 1);
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    ready.push(v);
                }
            }
        }
        if visited != n {
            let stuck = (0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.tasks[i].id)
                .min()
                .unwrap_or_default();
            return Err(GraphError::Cycle(stuck));
        }
        Ok(level)
    }

    pub fn total_edge_bytes(&self) -> u128 {
        self.edges.iter().map(|e| e.bytes as u128).sum()
    }
}

/// Shape of a bipartite shuffle graph too large to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleShape {
    pub mappers: u64,
    pub reducers: u64,
    pub bytes_per_transfer: u64,
}

impl ShuffleShape {
    pub fn task_count(&self) -> u128 {
        self.mappers as u128 + self.reducers as u128
    }

    pub fn edge_count(&self) -> u128 {
        self.mappers as u128 * self.reducers as u128
    }
}

/// A computation graph, either materialized or described by its generator.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    Explicit(TaskGraph),
    ImplicitShuffle(ShuffleShape),
}

impl Workload {
    pub fn task_count(&self) -> u128 {
        match self {
            Workload::Explicit(g) => g.tasks.len() as u128,
            Workload::ImplicitShuffle(s) => s.task_count(),
        }
    }

    pub fn edge_count(&self) -> u128 {
        match self {
            Workload::Explicit(g) => g.edges.len() as u128,
            Workload::ImplicitShuffle(s) => s.edge_count(),
        }
    }

    pub fn total_edge_bytes(&self) -> u128 {
        match self {
            Workload::Explicit(g) => g.total_edge_bytes(),
            Workload::ImplicitShuffle(s) => s.edge_count() * s.bytes_per_transfer as u128,
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        match self {
            Workload::Explicit(g) => g.validate(),
            Workload::ImplicitShuffle(_) => Ok(()),
        }
    }

    /// Materializes the graph when it has at most `edge_limit` edges.
    pub fn materialize(&self, edge_limit: u128) -> Result<TaskGraph, GraphError> {
        match self {
            Workload::Explicit(g) => Ok(g.clone()),
            Workload::ImplicitShuffle(s) => {
                if s.edge_count() > edge_limit {
                    return Err(GraphError::TooLarge {
                        edges: s.edge_count(),
                        limit: edge_limit,
                    });
                }
                Ok(super::generators::explicit_shuffle(*s))
            }
        }
    }

    pub fn to_graph_json(&self) -> TaskGraph {
        match self {
            Workload::Explicit(g) => g.clone(),
            Workload::ImplicitShuffle(s) => TaskGraph {
                tasks: Vec::new(),
                edges: Vec::new(),
                metadata: GraphMetadata {
                    generator: "shuffle".into(),
                    params: super::generators::shuffle_params(s),
                    implicit: true,
                },
            },
        }
    }

    pub fn from_graph_json(graph: TaskGraph) -> Result<Self, GraphError> {
        if !graph.metadata.implicit {
            graph.validate()?;
            return Ok(Workload::Explicit(graph));
        }
        let p = &graph.metadata.params;
        let get = |key: &'static str| {
            p.get(key)
                .and_then(Value::as_u64)
                .ok_or(GraphError::MissingParam(key))
        };
        Ok(Workload::ImplicitShuffle(ShuffleShape {
            mappers: get("mappers")?,
            reducers: get("reducers")?,
            bytes_per_transfer: get("bytes_per_transfer")?,
        }))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_graph_json()).expect("graph serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, WorkloadParseError> {
        let graph: TaskGraph = serde_json::from_str(text)?;
        Ok(Self::from_graph_json(graph)?)
    }
}

#[derive(Debug, Error)]
pub enum WorkloadParseError {
    #[error("malformed task graph: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
