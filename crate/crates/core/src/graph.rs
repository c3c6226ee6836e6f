//! Weighted graphs over linearly ordered vertices, predecessor arrays and the
//! path primitives shared by the algorithms and the validity checks.
//!
//! Edge weights are exact rationals stored as integer numerators over one
//! graph-wide denominator, so path costs compare exactly.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::Index;

use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Which algorithm a graph (and its solutions) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Dfs,
    Bf,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Dfs => "dfs",
            Task::Bf => "bf",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dfs" => Ok(Task::Dfs),
            "bf" => Ok(Task::Bf),
            _ => Err(format!("unknown task {s:?}; expected dfs|bf")),
        }
    }
}

/// Path cost in units of `1 / Graph::denominator()`.
///
/// `Infinite` is the sentinel for vertices the source cannot reach; two
/// sentinels compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(u64),
    Infinite,
}

impl Cost {
    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn plus(self, units: u64) -> Cost {
        match self {
            Cost::Finite(c) => Cost::Finite(c + units),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "crate::io::GraphRecord", into = "crate::io::GraphRecord")]
pub struct Graph {
    n: usize,
    directed: bool,
    /// Row-major numerators, 0 = no edge.
    weights: Vec<u64>,
    denominator: u64,
    source: Option<usize>,
}

impl Graph {
    /// Builds a graph from integer weight numerators over `denominator`.
    ///
    /// For undirected graphs each listed edge is mirrored. The weight fraction
    /// is stored in lowest terms.
    pub fn from_scaled_edges(
        n: usize,
        directed: bool,
        source: Option<usize>,
        denominator: u64,
        edges: &[(usize, usize, u64)],
    ) -> Result<Graph> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if denominator == 0 {
            return Err(Error::Config("weight denominator must be positive".into()));
        }
        if let Some(s) = source {
            check_vertex(s, n)?;
        }
        let mut weights = vec![0; n * n];
        for &(u, v, w) in edges {
            check_vertex(u, n)?;
            check_vertex(v, n)?;
            if u == v {
                return Err(Error::InvalidEdge(u, v, "self-loops are not allowed"));
            }
            if w == 0 {
                return Err(Error::InvalidEdge(u, v, "weight must be positive"));
            }
            let existing = weights[u * n + v];
            if existing != 0 && existing != w {
                return Err(Error::InvalidEdge(u, v, "conflicting weights"));
            }
            weights[u * n + v] = w;
            if !directed {
                let mirrored = weights[v * n + u];
                if mirrored != 0 && mirrored != w {
                    return Err(Error::InvalidEdge(u, v, "asymmetric undirected weights"));
                }
                weights[v * n + u] = w;
            }
        }
        let mut g = Graph { n, directed, weights, denominator, source };
        g.reduce();
        Ok(g)
    }

    /// Builds a graph from exact rational weights, bringing them to a common
    /// denominator.
    pub fn from_edges(
        n: usize,
        directed: bool,
        source: Option<usize>,
        edges: &[(usize, usize, Ratio<u64>)],
    ) -> Result<Graph> {
        let denominator = edges.iter().fold(1u64, |acc, (_, _, w)| acc.lcm(w.denom()));
        let scaled: Vec<_> = edges.iter().map(|&(u, v, w)| (u, v, w.numer() * (denominator / w.denom()))).collect();
        Graph::from_scaled_edges(n, directed, source, denominator, &scaled)
    }

    /// Unit-weight graph.
    pub fn unweighted(n: usize, directed: bool, source: Option<usize>, edges: &[(usize, usize)]) -> Result<Graph> {
        let edges: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        Graph::from_scaled_edges(n, directed, source, 1, &edges)
    }

    fn reduce(&mut self) {
        let g = self.weights.iter().fold(self.denominator, |acc, &w| if w == 0 { acc } else { acc.gcd(&w) });
        if g > 1 {
            self.denominator /= g;
            for w in &mut self.weights {
                *w /= g;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn source(&self) -> Option<usize> {
        self.source
    }

    pub fn require_source(&self) -> Result<usize> {
        self.source.ok_or(Error::MissingSource)
    }

    pub fn with_source(mut self, source: Option<usize>) -> Result<Graph> {
        if let Some(s) = source {
            check_vertex(s, self.n)?;
        }
        self.source = source;
        Ok(self)
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weights[u * self.n + v] != 0
    }

    /// Weight numerator of `(u, v)`; 0 when absent.
    pub fn weight_units(&self, u: usize, v: usize) -> u64 {
        self.weights[u * self.n + v]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<Ratio<u64>> {
        match self.weight_units(u, v) {
            0 => None,
            w => Some(Ratio::new(w, self.denominator)),
        }
    }

    pub fn out_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.weights[u * self.n..(u + 1) * self.n];
        row.iter().enumerate().filter(|(_, &w)| w != 0).map(|(v, _)| v)
    }

    pub fn in_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(u, v))
    }

    /// Every arc `(u, v, units)`; undirected edges appear in both directions.
    pub fn arcs(&self) -> Vec<(usize, usize, u64)> {
        let mut arcs = Vec::new();
        for u in 0..self.n {
            for v in self.out_neighbors(u) {
                arcs.push((u, v, self.weight_units(u, v)));
            }
        }
        arcs
    }

    /// Edges as listed in files: undirected edges once with `u < v`.
    pub fn edge_list(&self) -> Vec<(usize, usize, Ratio<u64>)> {
        self.arcs()
            .into_iter()
            .filter(|&(u, v, _)| self.directed || u < v)
            .map(|(u, v, w)| (u, v, Ratio::new(w, self.denominator)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        let arcs = self.weights.iter().filter(|&&w| w != 0).count();
        if self.directed {
            arcs
        } else {
            arcs / 2
        }
    }

    /// Checks the structural invariants; constructors already enforce them.
    pub fn check_invariants(&self) -> Result<()> {
        for u in 0..self.n {
            if self.has_edge(u, u) {
                return Err(Error::InvalidEdge(u, u, "self-loop"));
            }
            if !self.directed {
                for v in 0..self.n {
                    if self.weight_units(u, v) != self.weight_units(v, u) {
                        return Err(Error::InvalidEdge(u, v, "asymmetric undirected weights"));
                    }
                }
            }
        }
        if let Some(s) = self.source {
            check_vertex(s, self.n)?;
        }
        Ok(())
    }
}

pub(crate) fn check_vertex(v: usize, n: usize) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(Error::VertexOutOfRange { vertex: v, n })
    }
}

/// `parents[i]` is the parent of vertex `i`; roots are their own parents.
///
/// Entries are always valid vertex indices. Arrays without a root can still
/// be represented: samplers may emit them from arbitrary distributions and
/// the validity checks reject them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PredecessorArray(Vec<usize>);

impl PredecessorArray {
    pub fn new(parents: Vec<usize>) -> Result<Self> {
        let n = parents.len();
        for &p in &parents {
            check_vertex(p, n)?;
        }
        Ok(PredecessorArray(parents))
    }

    /// Every vertex its own root.
    pub fn identity(n: usize) -> Self {
        PredecessorArray((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parents(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(i, &p)| *i == p).map(|(i, _)| i)
    }

    pub fn has_root(&self) -> bool {
        self.roots().next().is_some()
    }

    /// Follows parent pointers from `v` and returns the root reached, or
    /// `None` when the walk enters a pointer cycle of length two or more.
    pub fn root_of(&self, v: usize) -> Option<usize> {
        let mut x = v;
        for _ in 0..=self.0.len() {
            if self.0[x] == x {
                return Some(x);
            }
            x = self.0[x];
        }
        None
    }

    /// True when every vertex reaches a self-parent.
    pub fn is_acyclic(&self) -> bool {
        (0..self.0.len()).all(|v| self.root_of(v).is_some())
    }
}

impl Index<usize> for PredecessorArray {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl TryFrom<Vec<usize>> for PredecessorArray {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        PredecessorArray::new(v)
    }
}

impl From<PredecessorArray> for Vec<usize> {
    fn from(p: PredecessorArray) -> Vec<usize> {
        p.0
    }
}

impl fmt::Display for PredecessorArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Parameters of the random graph generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edge_probability: f64,
    pub task: Task,
    /// Positive integer weights drawn uniformly for each edge (BF only).
    pub weight_set: Vec<u64>,
    /// Divide drawn weights by the largest member of `weight_set`.
    pub normalize: bool,
    /// Overrides the task's default orientation (DFS directed, BF undirected).
    #[serde(default)]
    pub directed: Option<bool>,
    pub seed: u64,
}

impl GraphSpec {
    pub fn new(task: Task, n: usize, seed: u64) -> GraphSpec {
        GraphSpec { n, edge_probability: 0.5, task, weight_set: vec![1, 2, 3], normalize: true, directed: None, seed }
    }

    pub fn with_edge_probability(mut self, p: f64) -> GraphSpec {
        self.edge_probability = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> GraphSpec {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        if !(self.edge_probability > 0.0 && self.edge_probability <= 1.0) {
            return Err(Error::EdgeProbability(self.edge_probability));
        }
        if self.weight_set.is_empty() || self.weight_set.contains(&0) {
            return Err(Error::WeightSet);
        }
        Ok(())
    }
}

/// Samples an Erdős–Rényi graph.
///
/// DFS graphs are directed with unit weights and no source; BF graphs are
/// undirected, weighted from `weight_set`, with source 0.
pub fn generate_graph(spec: &GraphSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.n;
    let directed = spec.directed.unwrap_or(spec.task == Task::Dfs);
    let mut rng = rng_from_seed(spec.seed);

    let mut weight_set = spec.weight_set.clone();
    weight_set.sort_unstable();
    weight_set.dedup();
    let max_weight = *weight_set.last().expect("validated non-empty");

    let mut edges = Vec::new();
    for u in 0..n {
        let lo = if directed { 0 } else { u + 1 };
        for v in lo..n {
            if u == v || !rng.random_bool(spec.edge_probability) {
                continue;
            }
            let w = match spec.task {
                Task::Dfs => 1,
                Task::Bf => weight_set[rng.random_range(0..weight_set.len())],
            };
            edges.push((u, v, w));
        }
    }

    let (denominator, source) = match spec.task {
        Task::Dfs => (1, None),
        Task::Bf => (if spec.normalize { max_weight } else { 1 }, Some(0)),
    };
    Graph::from_scaled_edges(n, directed, source, denominator, &edges)
}

/// True iff a directed path `s -> t` exists; every vertex reaches itself.
pub fn reachable(g: &Graph, s: usize, t: usize) -> Result<bool> {
    check_vertex(s, g.n())?;
    check_vertex(t, g.n())?;
    Ok(reachable_from(g, s)[t])
}

fn reachable_from(g: &Graph, s: usize) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for v in g.out_neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Precomputed reflexive transitive closure.
#[derive(Debug, Clone)]
pub struct Reachability {
    n: usize,
    closure: Vec<bool>,
}

impl Reachability {
    pub fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut closure = Vec::with_capacity(n * n);
        for s in 0..n {
            closure.extend(reachable_from(g, s));
        }
        Reachability { n, closure }
    }

    pub fn reaches(&self, s: usize, t: usize) -> bool {
        self.closure[s * self.n + t]
    }

    /// Lowest-index vertex that reaches `t`.
    pub fn lowest_reacher(&self, t: usize) -> usize {
        (0..self.n).find(|&s| self.reaches(s, t)).expect("reachability is reflexive")
    }
}

/// `{(pi[v], v) : pi[v] != v}`.
pub fn tree_edges(pi: &PredecessorArray) -> BTreeSet<(usize, usize)> {
    pi.parents().iter().enumerate().filter(|(v, &p)| p != *v).map(|(v, &p)| (p, v)).collect()
}

/// Cost of the parent-pointer path from the source to `v`.
///
/// `Ok(None)` means the cost is undefined: the walk enters a pointer cycle or
/// uses an edge missing from `g`. A walk ending at a non-source self-parent
/// yields the infinite sentinel.
pub fn path_cost_from_source(g: &Graph, pi: &PredecessorArray, v: usize) -> Result<Option<Cost>> {
    let source = g.require_source()?;
    if pi.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), actual: pi.len() });
    }
    check_vertex(v, g.n())?;
    let mut total = 0u64;
    let mut x = v;
    for _ in 0..=g.n() {
        if x == source {
            return Ok(Some(Cost::Finite(total)));
        }
        let p = pi[x];
        if p == x {
            return Ok(Some(Cost::Infinite));
        }
        if !g.has_edge(p, x) {
            return Ok(None);
        }
        total += g.weight_units(p, x);
        x = p;
    }
    Ok(None)
}
