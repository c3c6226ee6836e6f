//! Extraction of candidate predecessor arrays from a parent distribution.
//!
//! DFS: argmax, upwards sampling and its variant without parent masking.
//! Bellman-Ford: argmax, beam search over backward paths, greedy
//! minimum-weight parent, and the uniform random baseline.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::ParentDistribution;
use crate::error::{Error, Result};
use crate::graph::{Graph, PredecessorArray, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Argmax,
    Upwards,
    AltUpwards,
    Beam,
    Greedy,
    Random,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Argmax, Method::Upwards, Method::AltUpwards, Method::Beam, Method::Greedy, Method::Random];

    pub fn name(self) -> &'static str {
        match self {
            Method::Argmax => "argmax",
            Method::Upwards => "upwards",
            Method::AltUpwards => "alt-upwards",
            Method::Beam => "beam",
            Method::Greedy => "greedy",
            Method::Random => "random",
        }
    }

    /// Methods reported for a task, in table order.
    pub fn for_task(task: Task) -> &'static [Method] {
        match task {
            Task::Dfs => &[Method::Argmax, Method::AltUpwards, Method::Upwards, Method::Random],
            Task::Bf => &[Method::Argmax, Method::Beam, Method::Greedy, Method::Random],
        }
    }

    /// Beam and greedy rely on edge weights and a source.
    pub fn supports(self, task: Task) -> bool {
        !matches!((self, task), (Method::Beam | Method::Greedy, Task::Dfs))
    }

    pub fn is_deterministic(self) -> bool {
        self == Method::Argmax
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
            format!("unknown method {s:?}; expected one of {}", names.join("|"))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: Method,
    /// Partial paths kept per beam stage.
    pub beam_width: usize,
    /// Candidate predecessors drawn per partial path.
    pub beam_branch: usize,
    /// Parents drawn per greedy round.
    pub greedy_parent_samples: usize,
    /// Extra greedy rounds when no drawn parent is plausible.
    pub greedy_max_resamples: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        SamplerConfig {
            method,
            beam_width: 3,
            beam_branch: 3,
            greedy_parent_samples: 5,
            greedy_max_resamples: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.beam_branch == 0 || self.greedy_parent_samples == 0 {
            return Err(Error::Config("sampler counts must be at least 1".into()));
        }
        Ok(())
    }
}

/// A sampled array together with how often the uniform random fallback was
/// needed to produce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub parents: PredecessorArray,
    pub random_fallbacks: usize,
}

/// Draws a parent of `v` from its row restricted to unmasked columns.
///
/// When the restricted row has no mass, a uniformly random unmasked vertex is
/// returned instead (any vertex if all are masked); the flag reports this.
pub fn sample_predecessor_traced<R: Rng + ?Sized>(
    p: &ParentDistribution,
    v: usize,
    mask: &[bool],
    rng: &mut R,
) -> (usize, bool) {
    let row = p.row(v);
    let allowed = |j: usize| !mask.get(j).copied().unwrap_or(false);
    let total: f64 = (0..row.len()).filter(|&j| allowed(j)).map(|j| row[j]).sum();
    if total > 0.0 {
        let mut target = rng.random::<f64>() * total;
        let mut last = None;
        for j in (0..row.len()).filter(|&j| allowed(j) && row[j] > 0.0) {
            last = Some(j);
            if target < row[j] {
                return (j, false);
            }
            target -= row[j];
        }
        return (last.expect("positive mass has a column"), false);
    }
    let open: Vec<usize> = (0..row.len()).filter(|&j| allowed(j)).collect();
    let pick = if open.is_empty() { rng.random_range(0..row.len()) } else { open[rng.random_range(0..open.len())] };
    (pick, true)
}

pub fn sample_predecessor<R: Rng + ?Sized>(p: &ParentDistribution, v: usize, mask: &[bool], rng: &mut R) -> usize {
    sample_predecessor_traced(p, v, mask, rng).0
}

/// Most likely parent per row, lowest index on ties.
pub fn argmax_extract(p: &ParentDistribution) -> PredecessorArray {
    let parents = p
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &x)| if x > best.1 { (j, x) } else { best })
                .0
        })
        .collect();
    PredecessorArray::new(parents).expect("argmax indices are vertices")
}

/// Vertices sorted by ascending parent mass (the "leafiest" first); stable,
/// so equal masses keep index order.
fn leaf_order(p: &ParentDistribution) -> Vec<usize> {
    let mass = p.parent_mass();
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.sort_by(|&a, &b| mass[a].total_cmp(&mass[b]));
    order
}

/// Samples parents leaf-first and walks upwards until it meets a vertex
/// whose parent is already set. With `mask_consumed`, a vertex whose parent
/// has been sampled can no longer be drawn as anyone's parent.
fn upwards<R: Rng + ?Sized>(p: &ParentDistribution, mask_consumed: bool, rng: &mut R) -> Extraction {
    let n = p.n();
    let mut parents: Vec<Option<usize>> = vec![None; n];
    let mut masked = vec![false; n];
    let mut random_fallbacks = 0;
    for leaf in leaf_order(p) {
        if parents[leaf].is_some() {
            continue;
        }
        let mut current = leaf;
        loop {
            let (parent, fell_back) = sample_predecessor_traced(p, current, &masked, rng);
            random_fallbacks += usize::from(fell_back);
            parents[current] = Some(parent);
            if mask_consumed {
                masked[current] = true;
            }
            if parents[parent].is_some() {
                break;
            }
            current = parent;
        }
    }
    let parents = parents.into_iter().map(|p| p.expect("every vertex is visited")).collect();
    Extraction { parents: PredecessorArray::new(parents).expect("sampled parents are vertices"), random_fallbacks }
}

pub fn upwards_sample<R: Rng + ?Sized>(p: &ParentDistribution, rng: &mut R) -> PredecessorArray {
    upwards(p, true, rng).parents
}

pub fn alt_upwards_sample<R: Rng + ?Sized>(p: &ParentDistribution, rng: &mut R) -> PredecessorArray {
    upwards(p, false, rng).parents
}

/// Up to `k` distinct columns of positive mass, drawn without replacement.
fn draw_distinct<R: Rng + ?Sized>(row: &[f64], excluded: &[bool], k: usize, rng: &mut R) -> Vec<usize> {
    let mut taken = excluded.to_vec();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let total: f64 = (0..row.len()).filter(|&j| !taken[j]).map(|j| row[j]).sum();
        if total <= 0.0 {
            break;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for j in (0..row.len()).filter(|&j| !taken[j] && row[j] > 0.0) {
            pick = Some(j);
            if target < row[j] {
                break;
            }
            target -= row[j];
        }
        let j = pick.expect("positive mass has a column");
        taken[j] = true;
        out.push(j);
    }
    out
}

/// Lowest-weight in-neighbour of `v`, lowest index on ties.
fn lightest_parent(g: &Graph, v: usize) -> Option<usize> {
    g.in_neighbors(v).min_by_key(|&u| (g.weight_units(u, v), u))
}

struct Partial {
    head: usize,
    /// Predecessor of the target vertex on this path.
    first: usize,
    cost: u64,
    on_path: Vec<bool>,
}

fn beam_parent<R: Rng + ?Sized>(
    p: &ParentDistribution,
    g: &Graph,
    cfg: &SamplerConfig,
    source: usize,
    v: usize,
    rng: &mut R,
) -> (usize, bool) {
    let n = g.n();
    let mut on_path = vec![false; n];
    on_path[v] = true;
    let mut beam = vec![Partial { head: v, first: v, cost: 0, on_path }];
    let mut best: Option<(u64, usize)> = None;
    let mut unreachable_claim: Option<usize> = None;

    for _ in 0..n {
        let mut next = Vec::new();
        for path in &beam {
            let mut excluded = path.on_path.clone();
            excluded[path.head] = false;
            for q in draw_distinct(p.row(path.head), &excluded, cfg.beam_branch, rng) {
                let first = if path.head == v { q } else { path.first };
                if q == path.head {
                    // the row names its own vertex as a root
                    unreachable_claim.get_or_insert(first);
                    continue;
                }
                if !g.has_edge(q, path.head) {
                    continue;
                }
                let cost = path.cost + g.weight_units(q, path.head);
                if q == source {
                    if best.is_none_or(|(c, _)| cost < c) {
                        best = Some((cost, first));
                    }
                    continue;
                }
                let mut on_path = path.on_path.clone();
                on_path[q] = true;
                next.push(Partial { head: q, first, cost, on_path });
            }
        }
        if let Some((c, _)) = best {
            next.retain(|path| path.cost < c);
        }
        next.sort_by_key(|path| path.cost);
        next.truncate(cfg.beam_width);
        if next.is_empty() {
            break;
        }
        beam = next;
    }

    if let Some((_, first)) = best {
        return (first, false);
    }
    if let Some(first) = unreachable_claim {
        return (first, false);
    }
    match lightest_parent(g, v) {
        Some(u) => (u, false),
        None => (rng.random_range(0..n), true),
    }
}

/// Beam search over backward paths for every non-source vertex.
pub fn beam_extract_traced<R: Rng + ?Sized>(
    p: &ParentDistribution,
    g: &Graph,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Extraction> {
    let source = g.require_source()?;
    check_sizes(p, g)?;
    let mut parents = vec![source; g.n()];
    let mut random_fallbacks = 0;
    for v in (0..g.n()).filter(|&v| v != source) {
        let (parent, fell_back) = beam_parent(p, g, cfg, source, v, rng);
        parents[v] = parent;
        random_fallbacks += usize::from(fell_back);
    }
    Ok(Extraction { parents: PredecessorArray::new(parents).expect("beam parents are vertices"), random_fallbacks })
}

pub fn beam_extract<R: Rng + ?Sized>(
    p: &ParentDistribution,
    g: &Graph,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<PredecessorArray> {
    Ok(beam_extract_traced(p, g, cfg, rng)?.parents)
}

fn greedy_parent<R: Rng + ?Sized>(
    p: &ParentDistribution,
    g: &Graph,
    cfg: &SamplerConfig,
    v: usize,
    rng: &mut R,
) -> usize {
    let mut drew_self = false;
    for _ in 0..=cfg.greedy_max_resamples {
        let mut best: Option<(u64, usize)> = None;
        for _ in 0..cfg.greedy_parent_samples {
            let q = sample_predecessor(p, v, &[], rng);
            if q == v {
                drew_self = true;
            } else if g.has_edge(q, v) {
                let key = (g.weight_units(q, v), q);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        if let Some((_, q)) = best {
            return q;
        }
    }
    if drew_self {
        return v;
    }
    lightest_parent(g, v).unwrap_or(v)
}

/// Greedy minimum-weight choice among sampled plausible parents.
///
/// A drawn self-parent is not plausible, but when nothing plausible turns up
/// it is honoured as the unreachable-vertex convention before falling back
/// to the lightest graph parent.
pub fn greedy_extract<R: Rng + ?Sized>(
    p: &ParentDistribution,
    g: &Graph,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<PredecessorArray> {
    let source = g.require_source()?;
    check_sizes(p, g)?;
    let parents = (0..g.n()).map(|v| if v == source { source } else { greedy_parent(p, g, cfg, v, rng) }).collect();
    Ok(PredecessorArray::new(parents).expect("greedy parents are vertices"))
}

/// Uniform random parents; the source (or vertex 0) is its own parent.
pub fn random_extract<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> PredecessorArray {
    let n = g.n();
    let root = g.source().unwrap_or(0);
    let parents = (0..n).map(|v| if v == root { root } else { rng.random_range(0..n) }).collect();
    PredecessorArray::new(parents).expect("random parents are vertices")
}

fn check_sizes(p: &ParentDistribution, g: &Graph) -> Result<()> {
    if p.n() == g.n() {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected: g.n(), actual: p.n() })
    }
}

/// Runs the configured method once.
pub fn extract<R: Rng + ?Sized>(
    p: &ParentDistribution,
    g: &Graph,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Extraction> {
    check_sizes(p, g)?;
    let plain = |parents| Extraction { parents, random_fallbacks: 0 };
    Ok(match cfg.method {
        Method::Argmax => plain(argmax_extract(p)),
        Method::Upwards => upwards(p, true, rng),
        Method::AltUpwards => upwards(p, false, rng),
        Method::Beam => beam_extract_traced(p, g, cfg, rng)?,
        Method::Greedy => plain(greedy_extract(p, g, cfg, rng)?),
        Method::Random => plain(random_extract(g, rng)),
    })
}
