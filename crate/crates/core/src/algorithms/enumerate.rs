//! Exhaustive oracles over every tiebreak outcome. Exponential; small graphs
//! only.

use std::collections::{BTreeMap, BTreeSet};

use super::dfs::dfs_with_order;
use super::{deterministic_bellman_ford_costs, TiebreakMode};
use crate::error::{Error, Result};
use crate::graph::{Cost, Graph, PredecessorArray};

pub const ENUMERATION_LIMIT: usize = 8;

fn check_limit(g: &Graph, limit: usize) -> Result<()> {
    if g.n() > limit {
        Err(Error::EnumerationLimit { n: g.n(), limit })
    } else {
        Ok(())
    }
}

/// Every DFS tree reachable under `mode`, with its exact probability.
pub fn enumerate_dfs_trees(g: &Graph, mode: TiebreakMode) -> Result<BTreeMap<PredecessorArray, f64>> {
    enumerate_dfs_trees_with_limit(g, mode, ENUMERATION_LIMIT)
}

pub fn enumerate_dfs_trees_with_limit(
    g: &Graph,
    mode: TiebreakMode,
    limit: usize,
) -> Result<BTreeMap<PredecessorArray, f64>> {
    check_limit(g, limit)?;
    Ok(match mode {
        TiebreakMode::PerRunGlobalShuffle => global_orders(g),
        TiebreakMode::PerNodeShuffle => {
            let mut out = BTreeMap::new();
            let n = g.n();
            let state = Walk { visited: vec![false; n], parents: (0..n).collect(), stack: Vec::new(), next_root: 0 };
            per_node(g, state, 1.0, &mut out);
            out
        }
    })
}

fn global_orders(g: &Graph) -> BTreeMap<PredecessorArray, f64> {
    let mut order: Vec<usize> = (1..g.n()).collect();
    let mut counts: BTreeMap<PredecessorArray, u64> = BTreeMap::new();
    let mut total = 0u64;
    loop {
        *counts.entry(dfs_with_order(g, &order)).or_default() += 1;
        total += 1;
        if !next_permutation(&mut order) {
            break;
        }
    }
    counts.into_iter().map(|(pi, c)| (pi, c as f64 / total as f64)).collect()
}

/// Lexicographic successor; false once the last permutation is passed.
fn next_permutation(xs: &mut [usize]) -> bool {
    let Some(i) = xs.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = xs.iter().rposition(|&x| x > xs[i]).expect("pivot has a successor");
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

#[derive(Clone)]
struct Walk {
    visited: Vec<bool>,
    parents: Vec<usize>,
    stack: Vec<usize>,
    next_root: usize,
}

fn per_node(g: &Graph, mut w: Walk, prob: f64, out: &mut BTreeMap<PredecessorArray, f64>) {
    loop {
        let Some(&current) = w.stack.last() else {
            while w.next_root < g.n() && w.visited[w.next_root] {
                w.next_root += 1;
            }
            if w.next_root == g.n() {
                let pi = PredecessorArray::new(w.parents).expect("parents are vertex indices");
                *out.entry(pi).or_default() += prob;
                return;
            }
            w.visited[w.next_root] = true;
            w.stack.push(w.next_root);
            continue;
        };
        let candidates: Vec<usize> = g.out_neighbors(current).filter(|&c| !w.visited[c]).collect();
        match candidates.len() {
            0 => {
                w.stack.pop();
            }
            1 => descend(&mut w, current, candidates[0]),
            k => {
                let share = prob / k as f64;
                for &child in &candidates {
                    let mut branch = w.clone();
                    descend(&mut branch, current, child);
                    per_node(g, branch, share, out);
                }
                return;
            }
        }
    }
}

fn descend(w: &mut Walk, parent: usize, child: usize) {
    w.visited[child] = true;
    w.parents[child] = parent;
    w.stack.push(child);
}

/// All shortest-path trees: every combination of per-vertex predecessors on
/// the shortest-path DAG. Unreachable vertices are their own parents.
pub fn enumerate_shortest_path_trees(g: &Graph) -> Result<BTreeSet<PredecessorArray>> {
    enumerate_shortest_path_trees_with_limit(g, ENUMERATION_LIMIT)
}

pub fn enumerate_shortest_path_trees_with_limit(g: &Graph, limit: usize) -> Result<BTreeSet<PredecessorArray>> {
    let source = g.require_source()?;
    check_limit(g, limit)?;
    let cost = deterministic_bellman_ford_costs(g)?;
    let choices: Vec<Vec<usize>> = (0..g.n())
        .map(|v| {
            if v == source || cost[v] == Cost::Infinite {
                return vec![v];
            }
            g.in_neighbors(v).filter(|&u| cost[u].plus(g.weight_units(u, v)) == cost[v]).collect()
        })
        .collect();

    let mut trees = BTreeSet::new();
    let mut current = vec![0; g.n()];
    product(&choices, 0, &mut current, &mut trees);
    Ok(trees)
}

fn product(choices: &[Vec<usize>], i: usize, current: &mut Vec<usize>, out: &mut BTreeSet<PredecessorArray>) {
    if i == choices.len() {
        out.insert(PredecessorArray::new(current.clone()).expect("parents are vertex indices"));
        return;
    }
    for &p in &choices[i] {
        current[i] = p;
        product(choices, i + 1, current, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(v: &[usize]) -> PredecessorArray {
        PredecessorArray::new(v.to_vec()).unwrap()
    }

    #[test]
    fn permutations_are_exhaustive() {
        let mut xs = vec![1, 2, 3, 4];
        let mut count = 1;
        while next_permutation(&mut xs) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(xs, vec![4, 3, 2, 1]);
        assert!(!next_permutation(&mut []));
    }

    #[test]
    fn g3_has_two_equally_likely_trees() {
        let g3 = Graph::unweighted(3, true, None, &[(0, 1), (0, 2), (1, 2), (2, 1)]).unwrap();
        for mode in [TiebreakMode::PerRunGlobalShuffle, TiebreakMode::PerNodeShuffle] {
            let trees = enumerate_dfs_trees(&g3, mode).unwrap();
            assert_eq!(trees.len(), 2);
            assert!((trees[&pa(&[0, 0, 1])] - 0.5).abs() < 1e-12);
            assert!((trees[&pa(&[0, 2, 0])] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_dfs_enumerations() {
        let line = Graph::unweighted(3, true, None, &[(0, 1), (1, 2)]).unwrap();
        let trees = enumerate_dfs_trees(&line, TiebreakMode::default()).unwrap();
        assert_eq!(trees.keys().cloned().collect::<Vec<_>>(), vec![pa(&[0, 0, 1])]);
        let edgeless = Graph::unweighted(2, true, None, &[]).unwrap();
        let trees = enumerate_dfs_trees(&edgeless, TiebreakMode::PerNodeShuffle).unwrap();
        assert_eq!(trees.keys().cloned().collect::<Vec<_>>(), vec![pa(&[0, 1])]);
    }

    #[test]
    fn modes_share_support() {
        // Any per-node run is reproduced by the global order equal to its
        // discovery order, so the two modes reach the same trees.
        let g = Graph::unweighted(4, true, None, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        let global = enumerate_dfs_trees(&g, TiebreakMode::PerRunGlobalShuffle).unwrap();
        let per_node = enumerate_dfs_trees(&g, TiebreakMode::PerNodeShuffle).unwrap();
        assert_eq!(global.keys().collect::<Vec<_>>(), per_node.keys().collect::<Vec<_>>());
        for trees in [&global, &per_node] {
            let total: f64 = trees.values().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn limit_is_enforced() {
        let g = Graph::unweighted(9, true, Some(0), &[]).unwrap();
        assert!(matches!(
            enumerate_dfs_trees(&g, TiebreakMode::default()),
            Err(Error::EnumerationLimit { n: 9, limit: 8 })
        ));
        assert!(enumerate_shortest_path_trees(&g).is_err());
    }

    #[test]
    fn shortest_path_tree_examples() {
        let g4 = Graph::unweighted(4, false, Some(0), &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let trees = enumerate_shortest_path_trees(&g4).unwrap();
        assert_eq!(trees, BTreeSet::from([pa(&[0, 0, 0, 1]), pa(&[0, 0, 0, 2])]));

        let path = Graph::unweighted(3, false, Some(0), &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(enumerate_shortest_path_trees(&path).unwrap().len(), 1);

        let single = Graph::unweighted(1, false, Some(0), &[]).unwrap();
        assert_eq!(enumerate_shortest_path_trees(&single).unwrap(), BTreeSet::from([pa(&[0])]));
    }
}
