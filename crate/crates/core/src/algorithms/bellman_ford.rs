use rand::seq::SliceRandom;

use super::TiebreakPolicy;
use crate::error::Result;
use crate::graph::{Cost, Graph, PredecessorArray};
use crate::seed::rng_from_seed;

/// Bellman-Ford with a freshly shuffled relaxation order in every pass.
///
/// A relaxation only fires on a strictly smaller cost, so which of several
/// equal-cost predecessors wins depends on the shuffle. Vertices the source
/// cannot reach keep themselves as parent.
pub fn randomized_bellman_ford(g: &Graph, policy: &TiebreakPolicy) -> Result<PredecessorArray> {
    let source = g.require_source()?;
    let n = g.n();
    let mut rng = rng_from_seed(policy.seed);
    let mut arcs = g.arcs();
    let mut cost = vec![Cost::Infinite; n];
    let mut parents: Vec<usize> = (0..n).collect();
    cost[source] = Cost::Finite(0);

    for _ in 1..n {
        arcs.shuffle(&mut rng);
        let mut changed = false;
        for &(u, v, w) in &arcs {
            let candidate = cost[u].plus(w);
            if candidate < cost[v] {
                cost[v] = candidate;
                parents[v] = u;
                changed = true;
            }
        }
        // a pass without updates is a fixed point for every later order
        if !changed {
            break;
        }
    }
    Ok(PredecessorArray::new(parents).expect("parents are vertex indices"))
}

/// Exact minimum path cost from the source, in units of `1 / g.denominator()`.
pub fn deterministic_bellman_ford_costs(g: &Graph) -> Result<Vec<Cost>> {
    let source = g.require_source()?;
    let n = g.n();
    let arcs = g.arcs();
    let mut cost = vec![Cost::Infinite; n];
    cost[source] = Cost::Finite(0);
    for _ in 1..n {
        let mut changed = false;
        for &(u, v, w) in &arcs {
            let candidate = cost[u].plus(w);
            if candidate < cost[v] {
                cost[v] = candidate;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(cost)
}
