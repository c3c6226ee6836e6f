use std::collections::BTreeSet;

use proptest::prelude::*;

use multisol::algorithms::{
    deterministic_bellman_ford_costs, dfs_with_order, enumerate_dfs_trees, enumerate_shortest_path_trees,
    randomized_bellman_ford, randomized_dfs, TiebreakMode, TiebreakPolicy,
};
use multisol::distribution::{build_empirical, kl_divergence, perturb, ParentDistribution};
use multisol::evaluation::{coverage_study, draw_samples, uniques_and_valids, Case, EvalConfig};
use multisol::graph::{generate_graph, path_cost_from_source, tree_edges, Reachability};
use multisol::samplers::{extract, Method, SamplerConfig};
use multisol::seed::rng_from_seed;
use multisol::validity::{check_bf_valid, check_dfs_valid};
use multisol::{Graph, GraphSpec, PredecessorArray, Task};

fn task() -> impl Strategy<Value = Task> {
    prop_oneof![Just(Task::Dfs), Just(Task::Bf)]
}

fn graph(task: Task, n: usize, p: f64, seed: u64) -> Graph {
    generate_graph(&GraphSpec::new(task, n, seed).with_edge_probability(p)).unwrap()
}

fn random_dist(n: usize, seed: u64) -> ParentDistribution {
    perturb(&ParentDistribution::point_mass(&vec![0; n]).unwrap(), 1.0, seed).unwrap()
}

/// Textbook recursive DFS with ascending child order and ordered restarts.
fn canonical_dfs(g: &Graph) -> Vec<usize> {
    fn visit(g: &Graph, u: usize, seen: &mut [bool], pi: &mut [usize]) {
        seen[u] = true;
        for v in 0..g.n() {
            if g.has_edge(u, v) && !seen[v] {
                pi[v] = u;
                visit(g, v, seen, pi);
            }
        }
    }
    let mut seen = vec![false; g.n()];
    let mut pi: Vec<usize> = (0..g.n()).collect();
    for r in 0..g.n() {
        if !seen[r] {
            visit(g, r, &mut seen, &mut pi);
        }
    }
    pi
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generation_is_reproducible(task in task(), n in 1usize..20, p in 0.05f64..=1.0, seed: u64) {
        let g = graph(task, n, p, seed);
        g.check_invariants().unwrap();
        prop_assert_eq!(&g, &graph(task, n, p, seed));
        prop_assert_eq!(g.source(), (task == Task::Bf).then_some(0));
    }

    #[test]
    fn reachability_is_reflexive_and_transitive(n in 1usize..9, p in 0.05f64..0.6, seed: u64) {
        let g = graph(Task::Dfs, n, p, seed);
        let r = Reachability::new(&g);
        for a in 0..n {
            prop_assert!(r.reaches(a, a));
            for b in 0..n {
                for c in 0..n {
                    prop_assert!(!(r.reaches(a, b) && r.reaches(b, c)) || r.reaches(a, c));
                }
            }
        }
    }

    #[test]
    fn tree_edges_skip_roots(parents in prop::collection::vec(0usize..8, 8)) {
        let pi = PredecessorArray::new(parents).unwrap();
        let roots = pi.roots().count();
        prop_assert_eq!(tree_edges(&pi).len(), pi.len() - roots);
    }

    #[test]
    fn identity_order_is_canonical_dfs(n in 1usize..14, p in 0.05f64..0.8, seed: u64) {
        let g = graph(Task::Dfs, n, p, seed);
        let order: Vec<usize> = (1..n).collect();
        prop_assert_eq!(dfs_with_order(&g, &order).into_vec(), canonical_dfs(&g));
    }

    #[test]
    fn randomized_outputs_pass_their_checkers(n in 3usize..17, p in 0.05f64..0.8, gseed: u64, seed: u64) {
        let g = graph(Task::Dfs, n, p, gseed);
        for mode in [TiebreakMode::PerRunGlobalShuffle, TiebreakMode::PerNodeShuffle] {
            let pi = randomized_dfs(&g, &TiebreakPolicy::new(seed).with_mode(mode));
            let verdict = check_dfs_valid(&g, &pi).unwrap();
            prop_assert!(verdict.valid, "{:?} failed {:?}", pi, verdict.failed_conditions);
        }
        let g = graph(Task::Bf, n, p, gseed);
        let pi = randomized_bellman_ford(&g, &TiebreakPolicy::new(seed)).unwrap();
        prop_assert!(check_bf_valid(&g, &pi).unwrap());
        let costs = deterministic_bellman_ford_costs(&g).unwrap();
        for (v, &c) in costs.iter().enumerate() {
            prop_assert_eq!(path_cost_from_source(&g, &pi, v).unwrap(), Some(c));
        }
    }

    #[test]
    fn empirical_rows_are_exact_and_supported(task in task(), n in 1usize..7, p in 0.1f64..0.9, gseed: u64, seed: u64) {
        let g = graph(task, n, p, gseed);
        let dist = build_empirical(&g, task, 20, seed).unwrap();
        prop_assert_eq!(&dist, &build_empirical(&g, task, 20, seed).unwrap());
        let trees: BTreeSet<PredecessorArray> = match task {
            Task::Dfs => enumerate_dfs_trees(&g, TiebreakMode::PerRunGlobalShuffle).unwrap().into_keys().collect(),
            Task::Bf => enumerate_shortest_path_trees(&g).unwrap(),
        };
        for v in 0..n {
            let row = dist.row(v);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (u, &mass) in row.iter().enumerate() {
                if mass > 0.0 {
                    prop_assert!(trees.iter().any(|t| t[v] == u), "row {} parent {}", v, u);
                }
            }
        }
    }

    #[test]
    fn kl_is_non_negative_and_zero_on_itself(n in 1usize..10, a: u64, b: u64) {
        let p = random_dist(n, a);
        let q = random_dist(n, b);
        let d = kl_divergence(&p, &q).unwrap();
        prop_assert!(d.is_finite() && d >= 0.0);
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn samplers_are_total_and_reproducible(task in task(), n in 1usize..12, p in 0.05f64..0.9, gseed: u64, dseed: u64, seed: u64) {
        let g = graph(task, n, p, gseed);
        let dist = random_dist(n, dseed);
        for &method in Method::ALL.iter().filter(|m| m.supports(task)) {
            let cfg = SamplerConfig::new(method, seed);
            let a = extract(&dist, &g, &cfg, &mut rng_from_seed(seed)).unwrap();
            let b = extract(&dist, &g, &cfg, &mut rng_from_seed(seed)).unwrap();
            prop_assert_eq!(a.parents.len(), n);
            prop_assert_eq!(&a, &b);
            if method == Method::Argmax {
                let c = extract(&dist, &g, &cfg, &mut rng_from_seed(seed ^ 1)).unwrap();
                prop_assert_eq!(&a, &c);
            }
        }
    }

    #[test]
    fn bf_samplers_use_graph_edges_on_empirical_distributions(n in 2usize..10, p in 0.1f64..0.9, gseed: u64, seed: u64) {
        let g = graph(Task::Bf, n, p, gseed);
        let case = Case { dist: build_empirical(&g, Task::Bf, 20, gseed).unwrap(), graph: g };
        for method in [Method::Beam, Method::Greedy] {
            for s in draw_samples(&case, &SamplerConfig::new(method, seed), 5, seed).unwrap() {
                if s.random_fallbacks == 0 {
                    let pi = s.parents.parents();
                    prop_assert!((0..n).all(|v| pi[v] == v || case.graph.has_edge(pi[v], v)));
                }
            }
        }
    }

    #[test]
    fn point_masses_come_back_unchanged(n in 1usize..10, p in 0.1f64..0.9, gseed: u64, seed: u64) {
        let g = graph(Task::Bf, n, p, gseed);
        let tree = randomized_bellman_ford(&g, &TiebreakPolicy::new(seed)).unwrap();
        let dist = ParentDistribution::point_mass(tree.parents()).unwrap();
        for method in [Method::Argmax, Method::AltUpwards, Method::Beam, Method::Greedy] {
            let got = extract(&dist, &g, &SamplerConfig::new(method, seed), &mut rng_from_seed(seed)).unwrap();
            prop_assert_eq!(&got.parents, &tree, "{}", method);
        }
    }

    #[test]
    fn counts_stay_within_the_sample_budget(task in task(), n in 1usize..8, k in 1usize..8, gseed: u64, seed: u64) {
        let g = graph(task, n, 0.5, gseed);
        let case = Case { dist: build_empirical(&g, task, 20, gseed).unwrap(), graph: g };
        for &method in Method::for_task(task) {
            let (uniques, valids) = uniques_and_valids(task, &case, &SamplerConfig::new(method, seed), k, seed).unwrap();
            prop_assert!((1..=k).contains(&uniques));
            prop_assert!(valids <= k);
        }
    }
}

#[test]
fn coverage_never_exceeds_the_solution_count() {
    for task in [Task::Dfs, Task::Bf] {
        let mut cfg = EvalConfig::new(task, Method::Random, 5, 11);
        cfg.graph_count = 1;
        cfg.samples_per_graph = 30;
        for seed in 0..10 {
            cfg.seed = seed;
            let g = graph(task, 5, 0.5, seed);
            let solutions = match task {
                Task::Dfs => enumerate_dfs_trees(&g, TiebreakMode::PerRunGlobalShuffle).unwrap().len(),
                Task::Bf => enumerate_shortest_path_trees(&g).unwrap().len(),
            };
            let methods: Vec<Method> = Method::for_task(task).to_vec();
            for row in coverage_study(&cfg, &methods, Some(std::slice::from_ref(&g))).unwrap() {
                assert!(row.value <= solutions as f64, "{row:?} vs {solutions}");
            }
        }
    }
}

/// The DFS conditions are necessary but not sufficient; report how many
/// non-trees slip through on small graphs.
#[test]
fn dfs_checker_false_acceptances_are_measured() {
    let (mut accepted, mut false_accepts) = (0usize, 0usize);
    for seed in 0..40 {
        let g = graph(Task::Dfs, 5, 0.4, seed);
        let trees = enumerate_dfs_trees(&g, TiebreakMode::PerNodeShuffle).unwrap();
        for code in 0..5usize.pow(5) {
            let parents: Vec<usize> = (0..5).map(|i| code / 5usize.pow(i) % 5).collect();
            let pi = PredecessorArray::new(parents).unwrap();
            if check_dfs_valid(&g, &pi).unwrap().valid {
                accepted += 1;
                false_accepts += usize::from(!trees.contains_key(&pi));
            }
        }
    }
    println!("accepted {accepted}, of which {false_accepts} are not DFS trees");
    assert!(accepted > 0);
}
