//! Parent-probability distributions: empirical construction from repeated
//! randomized runs, a perturbation standing in for model predictions, and
//! KL divergence with the rerun-count study built on it.

use rand::Rng as _;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_randomized, TiebreakMode, TiebreakPolicy};
use crate::error::{Error, Result};
use crate::graph::{generate_graph, Graph, GraphSpec, Task};
use crate::seed::{derive_seed, TAG_DIST, TAG_GRAPH};
use crate::stats::mean_std;

/// Additive smoothing applied to every entry before taking KL.
pub const KL_EPSILON: f64 = 1e-8;

/// Default number of algorithm reruns behind an empirical distribution.
pub const DEFAULT_RERUNS: usize = 20;

const ROW_TOLERANCE: f64 = 1e-9;

/// Row-stochastic `n x n` matrix; `probs[child][parent]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRecord")]
pub struct ParentDistribution {
    n: usize,
    probs: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct DistributionRecord {
    n: usize,
    probs: Vec<Vec<f64>>,
}

impl TryFrom<DistributionRecord> for ParentDistribution {
    type Error = Error;

    fn try_from(r: DistributionRecord) -> Result<Self> {
        if r.probs.len() != r.n {
            return Err(Error::LengthMismatch { expected: r.n, actual: r.probs.len() });
        }
        ParentDistribution::new(r.probs)
    }
}

impl ParentDistribution {
    /// Validates shape, entry range and row sums (within 1e-9).
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let n = probs.len();
        for (i, row) in probs.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: row.len() });
            }
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::NotStochastic { row: i, reason: format!("entry {x} outside [0, 1]") });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::NotStochastic { row: i, reason: format!("row sums to {sum}") });
            }
        }
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(ParentDistribution { n, probs })
    }

    /// Point masses encoding a single predecessor array.
    pub fn point_mass(parents: &[usize]) -> Result<Self> {
        let n = parents.len();
        let mut probs = vec![vec![0.0; n]; n];
        for (child, &p) in parents.iter().enumerate() {
            if p >= n {
                return Err(Error::VertexOutOfRange { vertex: p, n });
            }
            probs[child][p] = 1.0;
        }
        ParentDistribution::new(probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, child: usize) -> &[f64] {
        &self.probs[child]
    }

    pub fn get(&self, child: usize, parent: usize) -> f64 {
        self.probs[child][parent]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Column sums: expected number of children of each vertex (self-parents
    /// included).
    pub fn parent_mass(&self) -> Vec<f64> {
        (0..self.n).map(|u| self.probs.iter().map(|row| row[u]).sum()).collect()
    }
}

/// Integer parent tallies over a batch of runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentCounts {
    pub runs: usize,
    /// `counts[child][parent]`
    pub counts: Vec<Vec<usize>>,
}

impl ParentCounts {
    pub fn to_distribution(&self) -> ParentDistribution {
        let runs = self.runs as f64;
        let probs = self.counts.iter().map(|row| row.iter().map(|&c| c as f64 / runs).collect()).collect();
        ParentDistribution::new(probs).expect("counts of complete runs are stochastic")
    }
}

/// Tallies the parents produced by `runs` randomized executions. Run `r` uses
/// the sub-seed `derive_seed(seed, [r])`.
pub fn count_parents(g: &Graph, task: Task, runs: usize, seed: u64, mode: TiebreakMode) -> Result<ParentCounts> {
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let n = g.n();
    let mut counts = vec![vec![0usize; n]; n];
    for r in 0..runs {
        let policy = TiebreakPolicy { mode, seed: derive_seed(seed, &[r as u64]) };
        let pi = run_randomized(task, g, &policy)?;
        for (child, &p) in pi.parents().iter().enumerate() {
            counts[child][p] += 1;
        }
    }
    Ok(ParentCounts { runs, counts })
}

/// Empirical parent distribution over `runs` randomized executions.
pub fn build_empirical(g: &Graph, task: Task, runs: usize, seed: u64) -> Result<ParentDistribution> {
    build_empirical_with_mode(g, task, runs, seed, TiebreakMode::default())
}

pub fn build_empirical_with_mode(
    g: &Graph,
    task: Task,
    runs: usize,
    seed: u64,
    mode: TiebreakMode,
) -> Result<ParentDistribution> {
    Ok(count_parents(g, task, runs, seed, mode)?.to_distribution())
}

fn smoothed(row: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let total: f64 = row.iter().sum::<f64>() + KL_EPSILON * row.len() as f64;
    row.iter().map(move |x| (x + KL_EPSILON) / total)
}

/// Mean over rows of `KL(p_row || q_row)` after ε-smoothing both rows.
pub fn kl_divergence(p: &ParentDistribution, q: &ParentDistribution) -> Result<f64> {
    if p.n() != q.n() {
        return Err(Error::LengthMismatch { expected: p.n(), actual: q.n() });
    }
    let total: f64 = p
        .rows()
        .iter()
        .zip(q.rows())
        .map(|(pr, qr)| smoothed(pr).zip(smoothed(qr)).map(|(a, b)| a * (a / b).ln()).sum::<f64>())
        .sum();
    // rounding can leave tiny negatives for identical rows
    Ok((total / p.n() as f64).max(0.0))
}

/// Mixes every row with a uniformly random point of the simplex:
/// `(1 - alpha) * row + alpha * u`.
pub fn perturb(p: &ParentDistribution, alpha: f64, seed: u64) -> Result<ParentDistribution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha {alpha} outside [0, 1]")));
    }
    if alpha == 0.0 {
        return Ok(p.clone());
    }
    let mut rng = crate::seed::rng_from_seed(seed);
    let n = p.n();
    let probs = p
        .rows()
        .iter()
        .map(|row| {
            // flat Dirichlet via normalized exponentials
            let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            let mixed: Vec<f64> =
                row.iter().zip(&draws).map(|(x, e)| ((1.0 - alpha) * x + alpha * e / total).clamp(0.0, 1.0)).collect();
            let s: f64 = mixed.iter().sum();
            mixed.into_iter().map(|x| x / s).collect()
        })
        .collect();
    ParentDistribution::new(probs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerunStudyConfig {
    pub sizes: Vec<usize>,
    pub graphs_per_size: usize,
    pub rerun_counts: Vec<usize>,
    pub task: Task,
    pub edge_probability: f64,
    pub seed: u64,
}

impl RerunStudyConfig {
    pub fn new(task: Task, seed: u64) -> Self {
        RerunStudyConfig {
            sizes: (5..=64).collect(),
            graphs_per_size: 100,
            rerun_counts: vec![20, 50, 100],
            task,
            edge_probability: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be non-empty and positive");
        }
        if self.graphs_per_size == 0 {
            return bad("graphs_per_size must be positive");
        }
        if self.rerun_counts.len() < 2 || self.rerun_counts.contains(&0) {
            return bad("at least two positive rerun counts are required");
        }
        Ok(())
    }
}

/// One `(size, pair)` line of the rerun study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerunRow {
    pub size: usize,
    pub pair_lo: usize,
    pub pair_hi: usize,
    pub mean_kl: f64,
    pub std_kl: f64,
}

/// Unordered pairs `(lo, hi)` of the sorted, de-duplicated counts.
pub fn count_pairs(counts: &[usize]) -> Vec<(usize, usize)> {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            pairs.push((sorted[i], sorted[j]));
        }
    }
    pairs
}

/// KL values `KL(P_lo || P_hi)` per pair of rerun counts for one graph.
/// Distributions for different counts use independent sub-seeds.
pub fn rerun_divergences(g: &Graph, task: Task, counts: &[usize], seed: u64) -> Result<Vec<((usize, usize), f64)>> {
    count_pairs(counts)
        .into_iter()
        .map(|(lo, hi)| {
            let p_lo = build_empirical(g, task, lo, derive_seed(seed, &[TAG_DIST, lo as u64]))?;
            let p_hi = build_empirical(g, task, hi, derive_seed(seed, &[TAG_DIST, hi as u64]))?;
            Ok(((lo, hi), kl_divergence(&p_lo, &p_hi)?))
        })
        .collect()
}

/// For every size, generates `graphs_per_size` graphs and reports the mean
/// and standard deviation of the pairwise KL divergences.
pub fn rerun_divergence_study(cfg: &RerunStudyConfig) -> Result<Vec<RerunRow>> {
    cfg.validate()?;
    let pairs = count_pairs(&cfg.rerun_counts);
    let items: Vec<(usize, usize)> =
        cfg.sizes.iter().flat_map(|&size| (0..cfg.graphs_per_size).map(move |gi| (size, gi))).collect();
    let per_graph: Vec<Vec<((usize, usize), f64)>> = items
        .par_iter()
        .map(|&(size, gi)| {
            let graph_seed = derive_seed(cfg.seed, &[TAG_GRAPH, size as u64, gi as u64]);
            let spec = GraphSpec::new(cfg.task, size, graph_seed).with_edge_probability(cfg.edge_probability);
            let g = generate_graph(&spec)?;
            let dist_seed = derive_seed(cfg.seed, &[TAG_DIST, size as u64, gi as u64]);
            rerun_divergences(&g, cfg.task, &cfg.rerun_counts, dist_seed)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &size in &cfg.sizes {
        for &(lo, hi) in &pairs {
            let values: Vec<f64> = items
                .iter()
                .zip(&per_graph)
                .filter(|((s, _), _)| *s == size)
                .flat_map(|(_, kls)| kls.iter().filter(|(p, _)| *p == (lo, hi)).map(|(_, kl)| *kl))
                .collect();
            let (mean_kl, std_kl) = mean_std(&values);
            rows.push(RerunRow { size, pair_lo: lo, pair_hi: hi, mean_kl, std_kl });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::enumerate_dfs_trees;

    fn g3() -> Graph {
        Graph::unweighted(3, true, None, &[(0, 1), (0, 2), (1, 2), (2, 1)]).unwrap()
    }

    fn line() -> Graph {
        Graph::unweighted(3, true, None, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn g3_row_one_is_half_and_half() {
        let p = build_empirical(&g3(), Task::Dfs, 1000, 11).unwrap();
        assert!((p.get(1, 0) - 0.5).abs() < 0.05);
        assert_eq!(p.get(1, 1), 0.0);
        assert!((p.get(1, 2) - 0.5).abs() < 0.05);
    }

    #[test]
    fn line_graph_gives_point_masses() {
        for runs in [1, 7, 20] {
            let p = build_empirical(&line(), Task::Dfs, runs, 3).unwrap();
            assert_eq!(p.rows(), &[vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        }
    }

    #[test]
    fn empirical_converges_to_enumeration() {
        let exact = enumerate_dfs_trees(&g3(), TiebreakMode::default()).unwrap();
        let mut oracle = vec![vec![0.0; 3]; 3];
        for (pi, w) in &exact {
            for (child, &p) in pi.parents().iter().enumerate() {
                oracle[child][p] += w;
            }
        }
        let p = build_empirical(&g3(), Task::Dfs, 2000, 5).unwrap();
        for (row, orow) in p.rows().iter().zip(&oracle) {
            let tv: f64 = row.iter().zip(orow).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            assert!(tv < 0.05, "{tv}");
        }
    }

    #[test]
    fn counts_are_exact_and_deterministic() {
        let g = generate_graph(&GraphSpec::new(Task::Bf, 8, 2)).unwrap();
        let c = count_parents(&g, Task::Bf, 20, 9, TiebreakMode::default()).unwrap();
        for row in &c.counts {
            assert_eq!(row.iter().sum::<usize>(), 20);
        }
        assert_eq!(c, count_parents(&g, Task::Bf, 20, 9, TiebreakMode::default()).unwrap());
        assert_eq!(build_empirical(&g, Task::Bf, 20, 9), build_empirical(&g, Task::Bf, 20, 9));
    }

    #[test]
    fn empirical_errors() {
        assert!(build_empirical(&line(), Task::Dfs, 0, 1).is_err());
        // BF needs a source
        assert_eq!(build_empirical(&line(), Task::Bf, 5, 1), Err(Error::MissingSource));
    }

    #[test]
    fn kl_examples() {
        let p = build_empirical(&g3(), Task::Dfs, 50, 1).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);

        let one = ParentDistribution::point_mass(&[0]).unwrap();
        assert_eq!(kl_divergence(&one, &one).unwrap(), 0.0);

        let p = ParentDistribution::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let q = ParentDistribution::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        // straight-line evaluation of the smoothed row formula
        let eps = KL_EPSILON;
        let half = (0.5 + eps) / (1.0 + 2.0 * eps);
        let hi = (1.0 + eps) / (1.0 + 2.0 * eps);
        let lo = eps / (1.0 + 2.0 * eps);
        let row1 = half * (half / hi).ln() + half * (half / lo).ln();
        let expected = (0.0 + row1) / 2.0;
        let got = kl_divergence(&p, &q).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((expected - 4.2586).abs() < 1e-3);

        let small = ParentDistribution::point_mass(&[0, 0]).unwrap();
        assert!(kl_divergence(&small, &ParentDistribution::point_mass(&[0]).unwrap()).is_err());
    }

    #[test]
    fn perturb_examples() {
        let p = build_empirical(&g3(), Task::Dfs, 20, 4).unwrap();
        assert_eq!(perturb(&p, 0.0, 8).unwrap(), p);
        assert!(perturb(&p, 1.5, 8).is_err());
        assert!(perturb(&p, -0.1, 8).is_err());

        // alpha = 1 discards the input rows
        let other = ParentDistribution::point_mass(&[0, 1, 2]).unwrap();
        let a = perturb(&p, 1.0, 8).unwrap();
        let b = perturb(&other, 1.0, 8).unwrap();
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbation_increases_divergence_on_average() {
        let p = build_empirical(&g3(), Task::Dfs, 20, 4).unwrap();
        let mean_kl = |alpha: f64| {
            (0..100).map(|s| kl_divergence(&p, &perturb(&p, alpha, s).unwrap()).unwrap()).sum::<f64>() / 100.0
        };
        let (a, b, c) = (mean_kl(0.1), mean_kl(0.3), mean_kl(0.6));
        assert!(a <= b && b <= c, "{a} {b} {c}");
    }

    #[test]
    fn distribution_validation() {
        assert!(ParentDistribution::new(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
        assert!(ParentDistribution::new(vec![vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
        assert!(ParentDistribution::new(vec![vec![1.0], vec![1.0]]).is_err());
        assert!(ParentDistribution::new(vec![]).is_err());
        let bad: std::result::Result<ParentDistribution, _> = serde_json::from_str(r#"{"n": 3, "probs": [[1.0]]}"#);
        assert!(bad.is_err());
        let ok: ParentDistribution = serde_json::from_str(r#"{"n": 2, "probs": [[1.0, 0.0], [0.25, 0.75]]}"#).unwrap();
        assert_eq!(ok.get(1, 1), 0.75);
        assert_eq!(ok.parent_mass(), vec![1.25, 0.75]);
    }

    #[test]
    fn degenerate_rerun_study_is_zero() {
        for seed in 0..5 {
            let kls = rerun_divergences(&line(), Task::Dfs, &[20, 50, 100], seed).unwrap();
            assert_eq!(kls.len(), 3);
            assert!(kls.iter().all(|(_, kl)| *kl == 0.0));
        }
    }

    #[test]
    fn rerun_study_shape_and_validation() {
        let cfg = RerunStudyConfig {
            sizes: vec![3, 4],
            graphs_per_size: 3,
            rerun_counts: vec![100, 20, 50],
            task: Task::Dfs,
            edge_probability: 0.5,
            seed: 1,
        };
        let rows = rerun_divergence_study(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 3);
        assert_eq!((rows[0].pair_lo, rows[0].pair_hi), (20, 50));
        assert!(rows.iter().all(|r| r.mean_kl.is_finite() && r.mean_kl >= 0.0));

        let mut bad = cfg.clone();
        bad.rerun_counts = vec![20];
        assert!(rerun_divergence_study(&bad).is_err());
        bad.rerun_counts = vec![0, 20];
        assert!(bad.validate().is_err());
    }
}
