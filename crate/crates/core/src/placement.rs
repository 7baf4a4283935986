// SPDX-License-Identifier: Apache-2.0

//! Co-location of graph tasks on instances with a fixed number of slots.
//!
//! All tasks are treated as resident at once. Cross-instance traffic is the
//! sum of edge bytes whose endpoints sit on different instances; messages
//! are combined per ordered instance pair and per ASAP level of the sender.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::workloads::{GraphError, SplitMix64, TaskGraph};

/// Largest graph `place_exhaustive` accepts.
pub const EXHAUSTIVE_TASK_LIMIT: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum PlacementError {
    #[error("{tasks} tasks do not fit on {n} instances with {k} slots each")]
    Infeasible { tasks: usize, n: usize, k: usize },
    #[error("exhaustive search is limited to {limit} tasks, got {tasks}")]
    TooLarge { tasks: usize, limit: usize },
    #[error("task {0} is not assigned")]
    Unassigned(u64),
    #[error("slot {slot} on instance {instance} holds more than one task")]
    SlotConflict { instance: usize, slot: usize },
    #[error("N and K must be at least 1")]
    ZeroCapacity,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementProblem {
    pub graph: TaskGraph,
    pub n_instances: usize,
    pub slots_per_instance: usize,
}

impl PlacementProblem {
    pub fn new(graph: TaskGraph, n_instances: usize, slots_per_instance: usize) -> Self {
        PlacementProblem {
            graph,
            n_instances,
            slots_per_instance,
        }
    }

    pub fn validate(&self) -> Result<(), PlacementError> {
        self.graph.validate()?;
        if self.n_instances == 0 || self.slots_per_instance == 0 {
            return Err(PlacementError::ZeroCapacity);
        }
        let tasks = self.graph.tasks.len();
        if self.n_instances.saturating_mul(self.slots_per_instance) < tasks {
            return Err(PlacementError::Infeasible {
                tasks,
                n: self.n_instances,
                k: self.slots_per_instance,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSlot {
    pub task: u64,
    pub instance: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementCost {
    pub cross_instance_bytes: u128,
    pub remote_message_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    /// Sorted by task id.
    pub assignment: Vec<TaskSlot>,
    pub cross_instance_bytes: u128,
    pub remote_message_count: u64,
}

impl Placement {
    /// Builds a placement from a task → instance map; slots follow task id
    /// order within each instance.
    pub fn from_instances(
        instances: &BTreeMap<u64, usize>,
        graph: &TaskGraph,
    ) -> Result<Self, PlacementError> {
        let mut next_slot: HashMap<usize, usize> = HashMap::new();
        let assignment = instances
            .iter()
            .map(|(&task, &instance)| {
                let slot = next_slot.entry(instance).or_default();
                *slot += 1;
                TaskSlot {
                    task,
                    instance,
                    slot: *slot - 1,
                }
            })
            .collect();
        let mut placement = Placement {
            assignment,
            cross_instance_bytes: 0,
            remote_message_count: 0,
        };
        let cost = evaluate(&placement, graph)?;
        placement.cross_instance_bytes = cost.cross_instance_bytes;
        placement.remote_message_count = cost.remote_message_count;
        Ok(placement)
    }

    pub fn instance_of(&self) -> HashMap<u64, usize> {
        self.assignment.iter().map(|a| (a.task, a.instance)).collect()
    }

    pub fn instances_used(&self) -> usize {
        self.assignment
            .iter()
            .map(|a| a.instance)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn cost(&self) -> PlacementCost {
        PlacementCost {
            cross_instance_bytes: self.cross_instance_bytes,
            remote_message_count: self.remote_message_count,
        }
    }
}

/// Recomputes traffic and message counts of `placement` on `graph`.
pub fn evaluate(placement: &Placement, graph: &TaskGraph) -> Result<PlacementCost, PlacementError> {
    let mut slots = BTreeSet::new();
    for a in &placement.assignment {
        if !slots.insert((a.instance, a.slot)) {
            return Err(PlacementError::SlotConflict {
                instance: a.instance,
                slot: a.slot,
            });
        }
    }
    let instance = placement.instance_of();
    for t in &graph.tasks {
        if !instance.contains_key(&t.id) {
            return Err(PlacementError::Unassigned(t.id));
        }
    }
    let levels = graph.levels()?;
    let index = graph.index_of();
    let mut bytes = 0u128;
    let mut messages = BTreeSet::new();
    for e in &graph.edges {
        let (a, b) = (instance[&e.src], instance[&e.dst]);
        if a != b {
            bytes += e.bytes as u128;
            messages.insert((a, b, levels[index[&e.src]]));
        }
    }
    Ok(PlacementCost {
        cross_instance_bytes: bytes,
        remote_message_count: messages.len() as u64,
    })
}

fn sorted_ids(graph: &TaskGraph) -> Vec<u64> {
    let mut ids: Vec<u64> = graph.tasks.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    ids
}

/// Every task on its own instance.
pub fn singleton_placement(graph: &TaskGraph) -> Result<Placement, PlacementError> {
    let map = sorted_ids(graph)
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    Placement::from_instances(&map, graph)
}

/// Tasks of each ASAP level packed `k` per instance, in id order, with each
/// level on its own instances.
pub fn level_grouped_placement(graph: &TaskGraph, k: usize) -> Result<Placement, PlacementError> {
    if k == 0 {
        return Err(PlacementError::ZeroCapacity);
    }
    let levels = graph.levels()?;
    let mut by_level: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for (t, &l) in graph.tasks.iter().zip(&levels) {
        by_level.entry(l).or_default().push(t.id);
    }
    let mut map = BTreeMap::new();
    let mut next = 0;
    for ids in by_level.values_mut() {
        ids.sort_unstable();
        for chunk in ids.chunks(k) {
            for &id in chunk {
                map.insert(id, next);
            }
            next += 1;
        }
    }
    Placement::from_instances(&map, graph)
}

/// Uniformly random assignment of tasks to the N×K slots.
pub fn place_random(problem: &PlacementProblem, seed: u64) -> Result<Placement, PlacementError> {
    problem.validate()?;
    let k = problem.slots_per_instance;
    let mut slots: Vec<usize> = (0..problem.n_instances * k).collect();
    let mut rng = SplitMix64::new(seed);
    for i in (1..slots.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        slots.swap(i, j);
    }
    let map = sorted_ids(&problem.graph)
        .into_iter()
        .zip(slots)
        .map(|(id, s)| (id, s / k))
        .collect();
    Placement::from_instances(&map, &problem.graph)
}

struct Groups {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Groups {
    fn new(n: usize) -> Self {
        Groups {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = x;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (a.min(b), a.max(b));
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Greedy co-location.
///
/// Edges are visited heaviest first (ties by `(src, dst)`); the endpoint
/// groups merge while the merged group fits on one instance. Groups are then
/// packed first-fit decreasing; a group that fits no instance whole is split
/// across the first instances with room. A bounded move/swap pass polishes
/// the result.
pub fn place_greedy(problem: &PlacementProblem) -> Result<Placement, PlacementError> {
    problem.validate()?;
    let graph = &problem.graph;
    let k = problem.slots_per_instance;
    let ids = sorted_ids(graph);
    let pos: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut edges: Vec<_> = graph.edges.iter().collect();
    edges.sort_by(|a, b| b.bytes.cmp(&a.bytes).then((a.src, a.dst).cmp(&(b.src, b.dst))));
    let mut groups = Groups::new(ids.len());
    for e in edges {
        let (a, b) = (groups.find(pos[&e.src]), groups.find(pos[&e.dst]));
        if a != b && groups.size[a] + groups.size[b] <= k {
            groups.union(a, b);
        }
    }

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..ids.len() {
        let root = groups.find(i);
        members.entry(root).or_default().push(i);
    }
    let mut order: Vec<Vec<usize>> = members.into_values().collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut free = vec![k; problem.n_instances];
    let mut bin_of = vec![0usize; ids.len()];
    for group in order {
        if let Some(bin) = free.iter().position(|&f| f >= group.len()) {
            free[bin] -= group.len();
            for i in group {
                bin_of[i] = bin;
            }
            continue;
        }
        for i in group {
            let bin = free
                .iter()
                .position(|&f| f > 0)
                .expect("total capacity covers every task");
            free[bin] -= 1;
            bin_of[i] = bin;
        }
    }

    let mut adjacency: Vec<Vec<(usize, i128)>> = vec![Vec::new(); ids.len()];
    for e in &graph.edges {
        let (a, b) = (pos[&e.src], pos[&e.dst]);
        adjacency[a].push((b, e.bytes as i128));
        adjacency[b].push((a, e.bytes as i128));
    }
    refine(&mut bin_of, &mut free, &adjacency);

    let map = ids.into_iter().zip(bin_of).collect();
    Placement::from_instances(&map, graph)
}

/// Hill climbing over single moves and pairwise swaps, taking the first
/// strictly improving change in index order until none is left.
fn refine(bin_of: &mut [usize], free: &mut [usize], adjacency: &[Vec<(usize, i128)>]) {
    // Bytes that stop crossing instances if task `t` sits on `bin`, minus those that start.
    let gain = |bin_of: &[usize], t: usize, bin: usize| -> i128 {
        adjacency[t]
            .iter()
            .map(|&(u, w)| {
                if u == t {
                    0
                } else if bin_of[u] == bin {
                    w
                } else if bin_of[u] == bin_of[t] {
                    -w
                } else {
                    0
                }
            })
            .sum()
    };
    let n = bin_of.len();
    let max_passes = 4 * n.max(1);
    for _ in 0..max_passes {
        let mut improved = false;
        'search: for a in 0..n {
            for bin in 0..free.len() {
                if bin != bin_of[a] && free[bin] > 0 && gain(bin_of, a, bin) > 0 {
                    free[bin] -= 1;
                    free[bin_of[a]] += 1;
                    bin_of[a] = bin;
                    improved = true;
                    break 'search;
                }
            }
            for b in a + 1..n {
                let (ba, bb) = (bin_of[a], bin_of[b]);
                if ba == bb {
                    continue;
                }
                let shared: i128 = adjacency[a].iter().filter(|&&(u, _)| u == b).map(|&(_, w)| w).sum();
                let delta = gain(bin_of, a, bb) + gain(bin_of, b, ba) - 2 * shared;
                if delta > 0 {
                    bin_of.swap(a, b);
                    improved = true;
                    break 'search;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Optimal placement by enumerating set partitions of the tasks (in id
/// order) into at most N blocks of at most K tasks.
///
/// Ties go to the lexicographically smallest assignment vector.
pub fn place_exhaustive(problem: &PlacementProblem) -> Result<Placement, PlacementError> {
    problem.validate()?;
    let graph = &problem.graph;
    let ids = sorted_ids(graph);
    if ids.len() > EXHAUSTIVE_TASK_LIMIT {
        return Err(PlacementError::TooLarge {
            tasks: ids.len(),
            limit: EXHAUSTIVE_TASK_LIMIT,
        });
    }
    let pos: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    // Edges indexed by their later endpoint so cost accrues as soon as both ends are placed.
    let mut back: Vec<Vec<(usize, u128)>> = vec![Vec::new(); ids.len()];
    for e in &graph.edges {
        let (a, b) = (pos[&e.src], pos[&e.dst]);
        let (early, late) = (a.min(b), a.max(b));
        back[late].push((early, e.bytes as u128));
    }

    struct Search<'a> {
        back: &'a [Vec<(usize, u128)>],
        n: usize,
        k: usize,
        current: Vec<usize>,
        sizes: Vec<usize>,
        best: Option<(u128, Vec<usize>)>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, cost: u128) {
            if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
                return;
            }
            if i == self.back.len() {
                self.best = Some((cost, self.current.clone()));
                return;
            }
            let blocks = self.sizes.len();
            for block in 0..=blocks.min(self.n - 1) {
                if block == blocks {
                    self.sizes.push(0);
                }
                if self.sizes[block] < self.k {
                    let added: u128 = self.back[i]
                        .iter()
                        .filter(|&&(j, _)| self.current[j] != block)
                        .map(|&(_, b)| b)
                        .sum();
                    self.sizes[block] += 1;
                    self.current.push(block);
                    self.run(i + 1, cost + added);
                    self.current.pop();
                    self.sizes[block] -= 1;
                }
                if block == blocks {
                    self.sizes.pop();
                }
            }
        }
    }

    let mut search = Search {
        back: &back,
        n: problem.n_instances,
        k: problem.slots_per_instance,
        current: Vec::with_capacity(ids.len()),
        sizes: Vec::new(),
        best: None,
    };
    search.run(0, 0);
    let (_, best) = search.best.expect("a feasible partition exists");
    let map = ids.into_iter().zip(best).collect();
    Placement::from_instances(&map, graph)
}
