//! Multiple-solution reasoning for DFS and Bellman-Ford: randomized
//! reference algorithms, parent distributions, stochastic samplers,
//! validity checks and evaluation studies.

pub mod algorithms;
pub mod distribution;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod samplers;
pub mod seed;
pub mod stats;
pub mod validity;

pub use error::{Error, Result};
pub use graph::{Cost, Graph, GraphSpec, PredecessorArray, Task};
