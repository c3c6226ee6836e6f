use rand::seq::{IndexedRandom, SliceRandom};

use super::{TiebreakMode, TiebreakPolicy};
use crate::error::{Error, Result};
use crate::graph::{Graph, PredecessorArray};
use crate::seed::rng_from_seed;

/// DFS with ordered restarts: roots are tried in ascending index order and
/// `next_child(current, visited)` picks which unvisited out-neighbour of
/// `current` is explored next.
pub(super) fn dfs_with<F>(g: &Graph, mut next_child: F) -> PredecessorArray
where
    F: FnMut(usize, &[bool]) -> Option<usize>,
{
    let n = g.n();
    let mut visited = vec![false; n];
    let mut parents: Vec<usize> = (0..n).collect();
    let mut stack = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        stack.push(root);
        while let Some(&current) = stack.last() {
            match next_child(current, &visited) {
                Some(child) => {
                    visited[child] = true;
                    parents[child] = current;
                    stack.push(child);
                }
                None => {
                    stack.pop();
                }
            }
        }
    }
    PredecessorArray::new(parents).expect("parents are vertex indices")
}

/// DFS exploring children in the fixed priority `order`.
///
/// `order` lists candidate children; vertices absent from it are never
/// entered through an edge (vertex 0 is always the first root and needs no
/// entry). With `order = 1..n` this is the canonical ascending-index DFS.
pub fn dfs_with_order(g: &Graph, order: &[usize]) -> PredecessorArray {
    dfs_with(g, |current, visited| order.iter().copied().find(|&c| !visited[c] && g.has_edge(current, c)))
}

/// DFS with randomized edge exploration and ordered restarts.
///
/// Undirected graphs are explored through their symmetric adjacency.
pub fn randomized_dfs(g: &Graph, policy: &TiebreakPolicy) -> PredecessorArray {
    let mut rng = rng_from_seed(policy.seed);
    match policy.mode {
        TiebreakMode::PerRunGlobalShuffle => {
            let mut order: Vec<usize> = (1..g.n()).collect();
            order.shuffle(&mut rng);
            dfs_with_order(g, &order)
        }
        TiebreakMode::PerNodeShuffle => {
            let mut candidates = Vec::with_capacity(g.n());
            dfs_with(g, |current, visited| {
                candidates.clear();
                candidates.extend(g.out_neighbors(current).filter(|&c| !visited[c]));
                candidates.choose(&mut rng).copied()
            })
        }
    }
}

/// As [`randomized_dfs`], but with `strict` set undirected input is refused.
pub fn randomized_dfs_checked(g: &Graph, policy: &TiebreakPolicy, strict: bool) -> Result<PredecessorArray> {
    if strict && !g.is_directed() {
        return Err(Error::UndirectedInput);
    }
    Ok(randomized_dfs(g, policy))
}
