//! Validity checks for candidate predecessor arrays.
//!
//! The DFS conditions are necessary but not sufficient. The Bellman-Ford
//! check is exact.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algorithms::deterministic_bellman_ford_costs;
use crate::error::{Error, Result};
use crate::graph::{path_cost_from_source, Cost, Graph, PredecessorArray, Reachability, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DfsCondition {
    /// Vertex 0 is its own parent.
    StartNode,
    /// Every non-root parent pointer is a graph edge.
    Edges,
    /// Parent pointers contain no cycle longer than a self-loop.
    NoCycle,
    /// A root is not reachable from any lower-index vertex.
    RootUnreachableFromLower,
    /// A parent is reachable from the lowest-index vertex reaching its child.
    ParentReachableFromMinAncestor,
    /// Non-tree edges admit an exploration order: every edge between two
    /// unrelated subtrees points to one explored earlier.
    CrossEdgeOrder,
}

impl DfsCondition {
    pub const ALL: [DfsCondition; 6] = [
        DfsCondition::StartNode,
        DfsCondition::Edges,
        DfsCondition::NoCycle,
        DfsCondition::RootUnreachableFromLower,
        DfsCondition::ParentReachableFromMinAncestor,
        DfsCondition::CrossEdgeOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DfsCondition::StartNode => "StartNode",
            DfsCondition::Edges => "Edges",
            DfsCondition::NoCycle => "NoCycle",
            DfsCondition::RootUnreachableFromLower => "RootUnreachableFromLower",
            DfsCondition::ParentReachableFromMinAncestor => "ParentReachableFromMinAncestor",
            DfsCondition::CrossEdgeOrder => "CrossEdgeOrder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BfCondition {
    /// The source is its own parent.
    Source,
    /// Every tree edge exists in the graph.
    Edges,
    NoCycle,
    /// Path costs along the tree match the optimal costs.
    Cost,
}

impl BfCondition {
    pub fn name(self) -> &'static str {
        match self {
            BfCondition::Source => "Source",
            BfCondition::Edges => "Edges",
            BfCondition::NoCycle => "NoCycle",
            BfCondition::Cost => "Cost",
        }
    }
}

impl fmt::Display for DfsCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BfCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfsVerdict {
    pub valid: bool,
    pub failed_conditions: Vec<DfsCondition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfVerdict {
    pub valid: bool,
    pub failed_conditions: Vec<BfCondition>,
}

/// Task-independent verdict with failed condition names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    pub failed: Vec<String>,
}

impl From<DfsVerdict> for Verdict {
    fn from(v: DfsVerdict) -> Self {
        Verdict { valid: v.valid, failed: v.failed_conditions.iter().map(|c| c.name().to_string()).collect() }
    }
}

impl From<BfVerdict> for Verdict {
    fn from(v: BfVerdict) -> Self {
        Verdict { valid: v.valid, failed: v.failed_conditions.iter().map(|c| c.name().to_string()).collect() }
    }
}

fn check_len(g: &Graph, pi: &PredecessorArray) -> Result<()> {
    if pi.len() == g.n() {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected: g.n(), actual: pi.len() })
    }
}

pub fn check_dfs_valid(g: &Graph, pi: &PredecessorArray) -> Result<DfsVerdict> {
    check_len(g, pi)?;
    Ok(dfs_verdict_with(g, pi, &Reachability::new(g)))
}

/// DFS verdict reusing a precomputed closure of `g`.
pub fn dfs_verdict_with(g: &Graph, pi: &PredecessorArray, reach: &Reachability) -> DfsVerdict {
    let n = g.n();
    let is_root = |t: usize| pi[t] == t;
    let mut failed = Vec::new();

    if pi[0] != 0 {
        failed.push(DfsCondition::StartNode);
    }
    if !(0..n).all(|t| is_root(t) || g.has_edge(pi[t], t)) {
        failed.push(DfsCondition::Edges);
    }
    let acyclic = pi.is_acyclic();
    if !acyclic {
        failed.push(DfsCondition::NoCycle);
    }
    if (0..n).any(|t| is_root(t) && (0..t).any(|s| reach.reaches(s, t))) {
        failed.push(DfsCondition::RootUnreachableFromLower);
    }
    if (0..n).any(|t| !is_root(t) && !reach.reaches(reach.lowest_reacher(t), pi[t])) {
        failed.push(DfsCondition::ParentReachableFromMinAncestor);
    }
    if acyclic && !exploration_order_exists(g, pi) {
        failed.push(DfsCondition::CrossEdgeOrder);
    }
    DfsVerdict { valid: failed.is_empty(), failed_conditions: failed }
}

/// For every graph edge `(u, v)` between vertices where neither is an
/// ancestor of the other, the subtree holding `v` must be explored before
/// the one holding `u`: earlier among siblings below their lowest common
/// ancestor, or a lower root across trees. Siblings need one order that
/// satisfies all such constraints.
fn exploration_order_exists(g: &Graph, pi: &PredecessorArray) -> bool {
    let n = g.n();
    let mut depth = vec![usize::MAX; n];
    fn depth_of(v: usize, pi: &PredecessorArray, depth: &mut [usize]) -> usize {
        if depth[v] == usize::MAX {
            depth[v] = if pi[v] == v { 0 } else { depth_of(pi[v], pi, depth) + 1 };
        }
        depth[v]
    }
    for v in 0..n {
        depth_of(v, pi, &mut depth);
    }
    let lift = |mut v: usize, d: usize| {
        while depth[v] > d {
            v = pi[v];
        }
        v
    };

    // after[x] lists siblings that must be explored after x
    let mut after: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (u, v, _) in g.arcs() {
        if pi[v] == u {
            continue;
        }
        let d = depth[u].min(depth[v]);
        let (mut a, mut b) = (lift(u, d), lift(v, d));
        if a == b {
            // one endpoint is an ancestor of the other
            continue;
        }
        while pi[a] != pi[b] && pi[a] != a {
            a = pi[a];
            b = pi[b];
        }
        if pi[a] == a {
            // different trees: roots are claimed in increasing order
            if b > a {
                return false;
            }
            continue;
        }
        after[b].push(a);
        indegree[a] += 1;
    }

    let mut queue: VecDeque<usize> = (0..n).filter(|&x| indegree[x] == 0).collect();
    let mut seen = 0;
    while let Some(x) = queue.pop_front() {
        seen += 1;
        for &y in &after[x] {
            indegree[y] -= 1;
            if indegree[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    seen == n
}

pub fn bf_verdict(g: &Graph, pi: &PredecessorArray) -> Result<BfVerdict> {
    let costs = deterministic_bellman_ford_costs(g)?;
    bf_verdict_with(g, pi, &costs)
}

/// Bellman-Ford verdict against precomputed optimal costs.
pub fn bf_verdict_with(g: &Graph, pi: &PredecessorArray, costs: &[Cost]) -> Result<BfVerdict> {
    let source = g.require_source()?;
    check_len(g, pi)?;
    let mut failed = Vec::new();
    if pi[source] != source {
        failed.push(BfCondition::Source);
    }
    if !(0..g.n()).all(|v| pi[v] == v || g.has_edge(pi[v], v)) {
        failed.push(BfCondition::Edges);
    }
    if !pi.is_acyclic() {
        failed.push(BfCondition::NoCycle);
    }
    for (v, &best) in costs.iter().enumerate() {
        let matches = match best {
            Cost::Infinite => pi[v] == v,
            Cost::Finite(_) => path_cost_from_source(g, pi, v)? == Some(best),
        };
        if !matches {
            failed.push(BfCondition::Cost);
            break;
        }
    }
    Ok(BfVerdict { valid: failed.is_empty(), failed_conditions: failed })
}

pub fn check_bf_valid(g: &Graph, pi: &PredecessorArray) -> Result<bool> {
    Ok(bf_verdict(g, pi)?.valid)
}

/// Verdict for either task.
pub fn verdict(task: Task, g: &Graph, pi: &PredecessorArray) -> Result<Verdict> {
    Ok(match task {
        Task::Dfs => check_dfs_valid(g, pi)?.into(),
        Task::Bf => bf_verdict(g, pi)?.into(),
    })
}

pub fn is_valid(task: Task, g: &Graph, pi: &PredecessorArray) -> Result<bool> {
    Ok(verdict(task, g, pi)?.valid)
}

/// Reusable validator for many candidates on one graph.
#[derive(Debug, Clone)]
pub enum Validator<'g> {
    Dfs(&'g Graph, Reachability),
    Bf(&'g Graph, Vec<crate::graph::Cost>),
}

impl<'g> Validator<'g> {
    pub fn new(task: Task, g: &'g Graph) -> Result<Self> {
        Ok(match task {
            Task::Dfs => Validator::Dfs(g, Reachability::new(g)),
            Task::Bf => Validator::Bf(g, deterministic_bellman_ford_costs(g)?),
        })
    }

    pub fn verdict(&self, pi: &PredecessorArray) -> Result<Verdict> {
        match self {
            Validator::Dfs(g, reach) => {
                check_len(g, pi)?;
                Ok(dfs_verdict_with(g, pi, reach).into())
            }
            Validator::Bf(g, costs) => Ok(bf_verdict_with(g, pi, costs)?.into()),
        }
    }

    pub fn is_valid(&self, pi: &PredecessorArray) -> Result<bool> {
        Ok(self.verdict(pi)?.valid)
    }
}
