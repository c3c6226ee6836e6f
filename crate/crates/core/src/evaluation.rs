//! Evaluation studies: uniques and valids per batch of samples, single-sample
//! accuracy over repeated runs, coverage of the solution space and mean edge
//! reuse.
//!
//! Every graph, distribution and sample draws from a sub-seed derived from
//! the configuration seed and its coordinates, so results do not depend on
//! thread scheduling.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_randomized, TiebreakMode, TiebreakPolicy};
use crate::distribution::{build_empirical_with_mode, perturb, ParentDistribution, DEFAULT_RERUNS};
use crate::error::{Error, Result};
use crate::graph::{generate_graph, tree_edges, Graph, GraphSpec, PredecessorArray, Task};
use crate::samplers::{extract, Extraction, Method, SamplerConfig};
use crate::seed::{derive_seed, derived_rng, TAG_DIST, TAG_GRAPH, TAG_PERTURB, TAG_REFERENCE, TAG_SAMPLE};
use crate::stats::mean_std;
use crate::validity::Validator;

/// Where the distribution handed to the samplers comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Empirical,
    /// Empirical distribution mixed with random noise of weight `alpha`.
    Perturbed(f64),
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionKind::Empirical => f.write_str("empirical"),
            DistributionKind::Perturbed(a) => write!(f, "perturbed:{a}"),
        }
    }
}

/// Denominator of the pairwise edge overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReuseDenominator {
    /// `|A ∩ B| / |A ∪ B|`
    #[default]
    Union,
    /// `|A ∩ B| / |A|`
    First,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub task: Task,
    pub sampler: SamplerConfig,
    pub graph_spec: GraphSpec,
    pub graph_count: usize,
    pub samples_per_graph: usize,
    pub runs: usize,
    /// Algorithm reruns behind each empirical distribution.
    pub reruns: usize,
    pub distribution: DistributionKind,
    pub tiebreak: TiebreakMode,
    pub reuse_denominator: ReuseDenominator,
    pub seed: u64,
}

impl EvalConfig {
    pub fn new(task: Task, method: Method, n: usize, seed: u64) -> Self {
        EvalConfig {
            task,
            sampler: SamplerConfig::new(method, seed),
            graph_spec: GraphSpec::new(task, n, seed),
            graph_count: 50,
            samples_per_graph: 5,
            runs: 5,
            reruns: DEFAULT_RERUNS,
            distribution: DistributionKind::Empirical,
            tiebreak: TiebreakMode::default(),
            reuse_denominator: ReuseDenominator::default(),
            seed,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.sampler.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("graph_count", self.graph_count),
            ("samples_per_graph", self.samples_per_graph),
            ("runs", self.runs),
            ("reruns", self.reruns),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.graph_spec.task != self.task {
            return Err(Error::Config("graph spec task differs from evaluation task".into()));
        }
        if let DistributionKind::Perturbed(a) = self.distribution {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("alpha {a} outside [0, 1]")));
            }
        }
        if !self.sampler.method.supports(self.task) {
            return Err(Error::MethodTask { method: self.sampler.method.name(), task: self.task.name() });
        }
        self.sampler.validate()?;
        self.graph_spec.validate()
    }
}

/// A graph with the distribution the samplers read from.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub graph: Graph,
    pub dist: ParentDistribution,
}

fn coords(run: usize, index: usize) -> [u64; 2] {
    [run as u64, index as u64]
}

/// Builds the configured distribution for graph `index` of `run`.
pub fn build_case(cfg: &EvalConfig, graph: Graph, run: usize, index: usize) -> Result<Case> {
    let [r, i] = coords(run, index);
    let empirical = build_empirical_with_mode(
        &graph,
        cfg.task,
        cfg.reruns,
        derive_seed(cfg.seed, &[TAG_DIST, r, i]),
        cfg.tiebreak,
    )?;
    let dist = match cfg.distribution {
        DistributionKind::Empirical => empirical,
        DistributionKind::Perturbed(alpha) => perturb(&empirical, alpha, derive_seed(cfg.seed, &[TAG_PERTURB, r, i]))?,
    };
    Ok(Case { graph, dist })
}

pub fn generate_case_graph(cfg: &EvalConfig, run: usize, index: usize) -> Result<Graph> {
    let [r, i] = coords(run, index);
    let spec = cfg.graph_spec.clone().with_seed(derive_seed(cfg.seed, &[TAG_GRAPH, r, i]));
    generate_graph(&spec)
}

/// Cases for one run: freshly generated graphs, or the given ones.
pub fn run_cases(cfg: &EvalConfig, run: usize, graphs: Option<&[Graph]>) -> Result<Vec<Case>> {
    match graphs {
        Some(gs) => gs.par_iter().enumerate().map(|(i, g)| build_case(cfg, g.clone(), run, i)).collect(),
        None => (0..cfg.graph_count)
            .into_par_iter()
            .map(|i| build_case(cfg, generate_case_graph(cfg, run, i)?, run, i))
            .collect(),
    }
}

/// Draws `k` samples; sample `j` uses its own sub-seed of `seed`.
pub fn draw_samples(case: &Case, sampler: &SamplerConfig, k: usize, seed: u64) -> Result<Vec<Extraction>> {
    (0..k)
        .map(|j| {
            let mut rng = derived_rng(seed, &[j as u64]);
            extract(&case.dist, &case.graph, sampler, &mut rng)
        })
        .collect()
}

fn sample_seed(cfg: &EvalConfig, run: usize, index: usize) -> u64 {
    let [r, i] = coords(run, index);
    derive_seed(cfg.sampler.seed, &[TAG_SAMPLE, r, i])
}

/// Distinct arrays among `k` samples, and the number of valid samples
/// counted with multiplicity.
pub fn uniques_and_valids(
    task: Task,
    case: &Case,
    sampler: &SamplerConfig,
    k: usize,
    seed: u64,
) -> Result<(usize, usize)> {
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let validator = Validator::new(task, &case.graph)?;
    let samples = draw_samples(case, sampler, k, seed)?;
    count_uniques_valids(&validator, samples.iter().map(|s| &s.parents))
}

fn count_uniques_valids<'a>(
    validator: &Validator<'_>,
    samples: impl Iterator<Item = &'a PredecessorArray>,
) -> Result<(usize, usize)> {
    let mut distinct = BTreeSet::new();
    let mut valids = 0;
    for pi in samples {
        valids += usize::from(validator.is_valid(pi)?);
        distinct.insert(pi);
    }
    Ok((distinct.len(), valids))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GraphOutcome {
    first_valid: bool,
    uniques: usize,
    valids: usize,
    random_fallbacks: usize,
}

fn evaluate_case(
    cfg: &EvalConfig,
    sampler: &SamplerConfig,
    case: &Case,
    run: usize,
    index: usize,
) -> Result<GraphOutcome> {
    let validator = Validator::new(cfg.task, &case.graph)?;
    let samples = draw_samples(case, sampler, cfg.samples_per_graph, sample_seed(cfg, run, index))?;
    let first_valid = validator.is_valid(&samples[0].parents)?;
    let (uniques, valids) = count_uniques_valids(&validator, samples.iter().map(|s| &s.parents))?;
    Ok(GraphOutcome {
        first_valid,
        uniques,
        valids,
        random_fallbacks: samples.iter().map(|s| s.random_fallbacks).sum(),
    })
}

/// Aggregate metrics of one method: per-run means over graphs, then mean
/// and population standard deviation over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub method: String,
    pub n: usize,
    pub dist: String,
    pub uniques_mean: f64,
    pub uniques_std: f64,
    pub valids_mean: f64,
    pub valids_std: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub random_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub method: String,
    pub n: usize,
    pub dist: String,
    pub uniques_mean: f64,
    pub uniques_std: f64,
    pub valids_mean: f64,
    pub valids_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub method: String,
    pub n: usize,
    pub dist: String,
    pub acc_mean: f64,
    pub acc_std: f64,
}

impl From<&MetricsRecord> for Table1Row {
    fn from(m: &MetricsRecord) -> Self {
        Table1Row {
            method: m.method.clone(),
            n: m.n,
            dist: m.dist.clone(),
            uniques_mean: m.uniques_mean,
            uniques_std: m.uniques_std,
            valids_mean: m.valids_mean,
            valids_std: m.valids_std,
        }
    }
}

impl From<&MetricsRecord> for Table2Row {
    fn from(m: &MetricsRecord) -> Self {
        Table2Row {
            method: m.method.clone(),
            n: m.n,
            dist: m.dist.clone(),
            acc_mean: m.accuracy_mean,
            acc_std: m.accuracy_std,
        }
    }
}

/// Evaluates several methods on the same graphs and distributions.
///
/// With `graphs` given, every run reuses them and only the distributions and
/// samples are redrawn.
pub fn method_table(cfg: &EvalConfig, methods: &[Method], graphs: Option<&[Graph]>) -> Result<Vec<MetricsRecord>> {
    for &m in methods {
        cfg.clone().with_method(m).validate()?;
    }
    let mut per_method: Vec<Vec<[f64; 3]>> = vec![Vec::with_capacity(cfg.runs); methods.len()];
    let mut fallbacks = vec![0usize; methods.len()];
    for run in 0..cfg.runs {
        let cases = run_cases(cfg, run, graphs)?;
        for (mi, &method) in methods.iter().enumerate() {
            let sampler = SamplerConfig { method, ..cfg.sampler.clone() };
            let outcomes: Vec<GraphOutcome> = cases
                .par_iter()
                .enumerate()
                .map(|(i, case)| evaluate_case(cfg, &sampler, case, run, i))
                .collect::<Result<_>>()?;
            let count = outcomes.len() as f64;
            let accuracy = outcomes.iter().filter(|o| o.first_valid).count() as f64 / count;
            let uniques = outcomes.iter().map(|o| o.uniques as f64).sum::<f64>() / count;
            let valids = outcomes.iter().map(|o| o.valids as f64).sum::<f64>() / count;
            per_method[mi].push([accuracy, uniques, valids]);
            fallbacks[mi] += outcomes.iter().map(|o| o.random_fallbacks).sum::<usize>();
        }
    }
    Ok(methods
        .iter()
        .zip(per_method)
        .zip(fallbacks)
        .map(|((method, runs), random_fallbacks)| {
            let column = |k: usize| mean_std(&runs.iter().map(|r| r[k]).collect::<Vec<_>>());
            let (accuracy_mean, accuracy_std) = column(0);
            let (uniques_mean, uniques_std) = column(1);
            let (valids_mean, valids_std) = column(2);
            MetricsRecord {
                method: method.name().to_string(),
                n: cfg.graph_spec.n,
                dist: cfg.distribution.to_string(),
                uniques_mean,
                uniques_std,
                valids_mean,
                valids_std,
                accuracy_mean,
                accuracy_std,
                random_fallbacks,
            }
        })
        .collect())
}

/// Metrics of the configured sampler.
pub fn accuracy_suite(cfg: &EvalConfig) -> Result<MetricsRecord> {
    Ok(method_table(cfg, &[cfg.sampler.method], None)?.remove(0))
}

/// Mean pairwise overlap of tree edge sets over all unordered sample pairs.
/// Pairs of empty edge sets count as full overlap.
pub fn mean_edge_reuse(samples: &[PredecessorArray]) -> Result<f64> {
    mean_edge_reuse_with(samples, ReuseDenominator::Union)
}

pub fn mean_edge_reuse_with(samples: &[PredecessorArray], denominator: ReuseDenominator) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Config("edge reuse needs at least two samples".into()));
    }
    let edges: Vec<BTreeSet<(usize, usize)>> = samples.iter().map(tree_edges).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            total += overlap(&edges[i], &edges[j], denominator);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

fn overlap(a: &BTreeSet<(usize, usize)>, b: &BTreeSet<(usize, usize)>, denominator: ReuseDenominator) -> f64 {
    let shared = a.intersection(b).count();
    let base = match denominator {
        ReuseDenominator::Union => a.union(b).count(),
        ReuseDenominator::First => a.len(),
    };
    if base == 0 {
        if a.is_empty() && b.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        shared as f64 / base as f64
    }
}

/// Label of the reference algorithm in study output.
pub const REFERENCE_LABEL: &str = "reference";

/// One point of a per-sample-index series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub n: usize,
    pub dist: String,
    pub sample_index: usize,
    pub value: f64,
}

/// Stochastic samplers whose curves the studies report by default.
pub fn study_methods(task: Task) -> Vec<Method> {
    match task {
        Task::Dfs => vec![Method::AltUpwards, Method::Upwards],
        Task::Bf => vec![Method::Beam, Method::Greedy],
    }
}

type LabelledSamples = (String, Vec<Vec<PredecessorArray>>);

/// `samples_per_graph` solutions per graph for every method and for the
/// reference algorithm, all from run 0 of the configuration.
fn study_samples(
    cfg: &EvalConfig,
    methods: &[Method],
    graphs: Option<&[Graph]>,
) -> Result<(Vec<Case>, Vec<LabelledSamples>)> {
    for &m in methods {
        cfg.clone().with_method(m).validate()?;
    }
    let cases = run_cases(cfg, 0, graphs)?;
    let k = cfg.samples_per_graph;
    let mut out = Vec::new();
    for &method in methods {
        let sampler = SamplerConfig { method, ..cfg.sampler.clone() };
        let per_graph = cases
            .par_iter()
            .enumerate()
            .map(|(i, case)| {
                let samples: Vec<Extraction> = draw_samples(case, &sampler, k, sample_seed(cfg, 0, i))?;
                Ok(samples.into_iter().map(|s| s.parents).collect())
            })
            .collect::<Result<_>>()?;
        out.push((method.name().to_string(), per_graph));
    }
    let reference = cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let runs = (0..k)
                .map(|j| {
                    let seed = derive_seed(cfg.seed, &[TAG_REFERENCE, i as u64, j as u64]);
                    run_randomized(cfg.task, &case.graph, &TiebreakPolicy { mode: cfg.tiebreak, seed })
                })
                .collect::<Result<_>>()?;
            Ok(runs)
        })
        .collect::<Result<_>>()?;
    out.push((REFERENCE_LABEL.to_string(), reference));
    Ok((cases, out))
}

/// Cumulative number of distinct valid solutions after each sample, averaged
/// over graphs, per method and for the reference algorithm.
pub fn coverage_study(cfg: &EvalConfig, methods: &[Method], graphs: Option<&[Graph]>) -> Result<Vec<CurveRow>> {
    let (cases, samples) = study_samples(cfg, methods, graphs)?;
    let validators: Vec<Validator> = cases.iter().map(|c| Validator::new(cfg.task, &c.graph)).collect::<Result<_>>()?;
    let k = cfg.samples_per_graph;
    let mut rows = Vec::new();
    for (label, per_graph) in samples {
        let mut sums = vec![0.0; k];
        for (validator, pis) in validators.iter().zip(&per_graph) {
            let mut seen = BTreeSet::new();
            for (s, pi) in pis.iter().enumerate() {
                if validator.is_valid(pi)? {
                    seen.insert(pi);
                }
                sums[s] += seen.len() as f64;
            }
        }
        let count = per_graph.len() as f64;
        rows.extend(sums.into_iter().enumerate().map(|(s, total)| CurveRow {
            method: label.clone(),
            n: cfg.graph_spec.n,
            dist: cfg.distribution.to_string(),
            sample_index: s + 1,
            value: total / count,
        }));
    }
    Ok(rows)
}

/// Mean edge reuse over the first `s` samples for `s = 2..=k`, averaged
/// over graphs, per method and for the reference algorithm.
pub fn edge_reuse_evolution(cfg: &EvalConfig, methods: &[Method], graphs: Option<&[Graph]>) -> Result<Vec<CurveRow>> {
    let k = cfg.samples_per_graph;
    if k < 2 {
        return Err(Error::Config("edge reuse needs at least two samples per graph".into()));
    }
    let (_, samples) = study_samples(cfg, methods, graphs)?;
    let mut rows = Vec::new();
    for (label, per_graph) in samples {
        for s in 2..=k {
            let values: Vec<f64> = per_graph
                .iter()
                .map(|pis| mean_edge_reuse_with(&pis[..s], cfg.reuse_denominator))
                .collect::<Result<_>>()?;
            rows.push(CurveRow {
                method: label.clone(),
                n: cfg.graph_spec.n,
                dist: cfg.distribution.to_string(),
                sample_index: s,
                value: mean_std(&values).0,
            });
        }
    }
    Ok(rows)
}
