//! Reference algorithms: randomized DFS and Bellman-Ford, their deterministic
//! counterparts, and exhaustive enumeration of every output they can produce.

mod bellman_ford;
mod dfs;
mod enumerate;

use serde::{Deserialize, Serialize};

pub use bellman_ford::{deterministic_bellman_ford_costs, randomized_bellman_ford};
pub use dfs::{dfs_with_order, randomized_dfs, randomized_dfs_checked};
pub use enumerate::{
    enumerate_dfs_trees, enumerate_dfs_trees_with_limit, enumerate_shortest_path_trees,
    enumerate_shortest_path_trees_with_limit, ENUMERATION_LIMIT,
};

use crate::error::Result;
use crate::graph::{Graph, PredecessorArray, Task};

/// How DFS breaks ties between unexplored out-neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiebreakMode {
    /// One shuffled order of `V \ {0}` for the whole run.
    #[default]
    PerRunGlobalShuffle,
    /// A fresh choice at every expansion.
    PerNodeShuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TiebreakPolicy {
    pub mode: TiebreakMode,
    pub seed: u64,
}

impl TiebreakPolicy {
    pub fn new(seed: u64) -> Self {
        TiebreakPolicy { mode: TiebreakMode::default(), seed }
    }

    pub fn with_mode(mut self, mode: TiebreakMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Runs the task's randomized algorithm once.
pub fn run_randomized(task: Task, g: &Graph, policy: &TiebreakPolicy) -> Result<PredecessorArray> {
    match task {
        Task::Dfs => Ok(randomized_dfs(g, policy)),
        Task::Bf => randomized_bellman_ford(g, policy),
    }
}
