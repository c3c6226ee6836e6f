use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use multisol::distribution::{
    build_empirical_with_mode, perturb, rerun_divergence_study, ParentDistribution, RerunStudyConfig,
};
use multisol::evaluation::{
    coverage_study, draw_samples, edge_reuse_evolution, method_table, study_methods, Case, DistributionKind,
    EvalConfig, Table1Row, Table2Row,
};
use multisol::graph::{generate_graph, Graph, GraphSpec, PredecessorArray, Task};
use multisol::io::{read_json, to_csv, write_json};
use multisol::samplers::Method;
use multisol::seed::{derive_seed, TAG_DIST, TAG_GRAPH, TAG_PERTURB, TAG_SAMPLE};
use multisol::validity::Validator;

use crate::args::{Command, DistChoice, Study, StudyArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, RunManifest};

/// Environment variable naming the default directory for study outputs.
pub const OUT_DIR_ENV: &str = "MULTISOL_OUT_DIR";

/// Samples of one graph as written by `sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSolutions {
    pub graph: usize,
    pub method: String,
    pub solutions: Vec<SolutionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub parents: PredecessorArray,
    #[serde(default)]
    pub valid: bool,
    #[serde(default)]
    pub failed: Vec<String>,
    #[serde(default)]
    pub random_fallbacks: usize,
}

fn read_file<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_json(BufReader::new(file)).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    write_json(&mut w, value).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let text = to_csv(rows).map_err(|e| CliError::Validation(e.to_string()))?;
    write_text(path, &text)
}

fn write_manifest(out: &Path, name: &str, config: &Command, seed: u64) -> CliResult<()> {
    write_json_file(&manifest_path(out), &RunManifest::new(name, config.clone(), seed))
}

fn infer_task(task: Option<Task>, graphs: &[Graph]) -> Task {
    task.unwrap_or_else(|| match graphs.first().and_then(Graph::source) {
        Some(_) => Task::Bf,
        None => Task::Dfs,
    })
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Validation(format!("alpha {alpha} outside [0, 1]")))
    }
}

fn positive(name: &str, value: usize) -> CliResult<()> {
    if value == 0 {
        Err(CliError::Validation(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

fn default_out(file: String) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")).join(file)
}

/// Fills every defaulted option so a manifest records the full configuration.
pub fn resolve(command: Command) -> CliResult<Command> {
    let resolve_study = |mut a: StudyArgs, name: &str, curve: bool| -> CliResult<StudyArgs> {
        a.graph_count.get_or_insert(if curve { 10 } else { 50 });
        a.samples.get_or_insert(if curve { 25 } else { 5 });
        if a.methods.is_none() {
            a.methods = Some(if curve { study_methods(a.task) } else { Method::for_task(a.task).to_vec() });
        }
        if a.graphs.is_none() {
            a.end_to_end = true;
        }
        if a.out.is_none() {
            a.out = Some(default_out(format!("{name}-{}-n{}.csv", a.task, a.n)));
        }
        match (a.dist, a.alpha) {
            (DistChoice::Perturbed, None) => Err(CliError::Usage("--dist perturbed requires --alpha".into())),
            (DistChoice::Empirical, Some(_)) => Err(CliError::Usage("--alpha applies only to --dist perturbed".into())),
            _ => Ok(a),
        }
    };
    Ok(match command {
        Command::Study(study) => Command::Study(match study {
            Study::Reruns(mut a) => {
                a.sizes.get_or_insert_with(|| (5..=64).collect());
                a.out.get_or_insert_with(|| default_out(format!("reruns-{}.csv", a.task)));
                Study::Reruns(a)
            }
            Study::Coverage(a) => Study::Coverage(resolve_study(a, "coverage", true)?),
            Study::EdgeReuse(mut a) => {
                a.study = resolve_study(a.study, "edge-reuse", true)?;
                Study::EdgeReuse(a)
            }
            Study::Table1(a) => Study::Table1(resolve_study(a, "table1", false)?),
            Study::Table2(a) => Study::Table2(resolve_study(a, "table2", false)?),
        }),
        other => other,
    })
}

/// Replaces the primary output path of a command.
fn set_out(command: &mut Command, out: PathBuf) -> CliResult<()> {
    match command {
        Command::Gen(a) => a.out = out,
        Command::Dist(a) => a.out = out,
        Command::Sample(a) => a.out = out,
        Command::Check(a) => a.out = Some(out),
        Command::Study(Study::Reruns(a)) => a.out = Some(out),
        Command::Study(Study::EdgeReuse(a)) => a.study.out = Some(out),
        Command::Study(Study::Coverage(a) | Study::Table1(a) | Study::Table2(a)) => a.out = Some(out),
        Command::Replay(_) => return Err(CliError::Validation("a manifest cannot record a replay".into())),
    }
    Ok(())
}

/// Runs a command and returns the data files it wrote.
pub fn run(command: Command) -> CliResult<Vec<PathBuf>> {
    let command = resolve(command)?;
    match &command {
        Command::Gen(a) => {
            positive("--count", a.count)?;
            let spec = GraphSpec {
                n: a.n,
                edge_probability: a.edge_probability,
                task: a.task,
                weight_set: a.weights.clone(),
                normalize: !a.no_normalize,
                directed: None,
                seed: a.seed,
            };
            spec.validate()?;
            let graphs: Vec<Graph> = (0..a.count)
                .into_par_iter()
                .map(|i| generate_graph(&spec.clone().with_seed(derive_seed(a.seed, &[TAG_GRAPH, i as u64]))))
                .collect::<Result<_, _>>()?;
            write_json_file(&a.out, &graphs)?;
            write_manifest(&a.out, "gen", &command, a.seed)?;
            Ok(vec![a.out.clone()])
        }
        Command::Dist(a) => {
            positive("--runs", a.runs)?;
            if let Some(alpha) = a.perturb {
                check_alpha(alpha)?;
            }
            let graphs: Vec<Graph> = read_file(&a.input)?;
            let task = infer_task(a.task, &graphs);
            let dists: Vec<ParentDistribution> = graphs
                .par_iter()
                .enumerate()
                .map(|(i, g)| {
                    let i = i as u64;
                    let p = build_empirical_with_mode(
                        g,
                        task,
                        a.runs,
                        derive_seed(a.seed, &[TAG_DIST, i]),
                        a.tiebreak.into(),
                    )?;
                    match a.perturb {
                        Some(alpha) => perturb(&p, alpha, derive_seed(a.seed, &[TAG_PERTURB, i])),
                        None => Ok(p),
                    }
                })
                .collect::<Result<_, _>>()?;
            write_json_file(&a.out, &dists)?;
            write_manifest(&a.out, "dist", &command, a.seed)?;
            Ok(vec![a.out.clone()])
        }
        Command::Sample(a) => {
            positive("--k", a.k)?;
            let graphs: Vec<Graph> = read_file(&a.graphs)?;
            let dists: Vec<ParentDistribution> = read_file(&a.dists)?;
            if graphs.len() != dists.len() {
                return Err(CliError::Validation(format!("{} graphs but {} distributions", graphs.len(), dists.len())));
            }
            let task = infer_task(a.task, &graphs);
            if !a.method.supports(task) {
                return Err(multisol::Error::MethodTask { method: a.method.name(), task: task.name() }.into());
            }
            let sampler = a.knobs.config(a.method, a.seed);
            sampler.validate()?;
            let out: Vec<GraphSolutions> = graphs
                .into_par_iter()
                .zip(dists)
                .enumerate()
                .map(|(i, (graph, dist))| {
                    if graph.n() != dist.n() {
                        return Err(CliError::Validation(format!(
                            "graph {i} has {} vertices but its distribution has {}",
                            graph.n(),
                            dist.n()
                        )));
                    }
                    let case = Case { graph, dist };
                    let validator = Validator::new(task, &case.graph)?;
                    let samples = draw_samples(&case, &sampler, a.k, derive_seed(a.seed, &[TAG_SAMPLE, i as u64]))?;
                    let solutions = samples
                        .into_iter()
                        .map(|s| {
                            let verdict = validator.verdict(&s.parents)?;
                            Ok(SolutionRecord {
                                parents: s.parents,
                                valid: verdict.valid,
                                failed: verdict.failed,
                                random_fallbacks: s.random_fallbacks,
                            })
                        })
                        .collect::<Result<_, multisol::Error>>()?;
                    Ok(GraphSolutions { graph: i, method: a.method.name().to_string(), solutions })
                })
                .collect::<CliResult<_>>()?;
            write_json_file(&a.out, &out)?;
            write_manifest(&a.out, "sample", &command, a.seed)?;
            Ok(vec![a.out.clone()])
        }
        Command::Check(a) => {
            let graphs: Vec<Graph> = read_file(&a.graphs)?;
            let solutions: Vec<GraphSolutions> = read_file(&a.solutions)?;
            let task = infer_task(a.task, &graphs);
            let mut text = String::from("index,valid,failed_tags\n");
            let mut index = 0;
            for entry in &solutions {
                let graph = graphs.get(entry.graph).ok_or_else(|| {
                    CliError::Validation(format!("solutions refer to graph {} of {}", entry.graph, graphs.len()))
                })?;
                let validator = Validator::new(task, graph)?;
                for s in &entry.solutions {
                    let verdict = validator.verdict(&s.parents)?;
                    text.push_str(&format!("{index},{},{}\n", verdict.valid, verdict.failed.join(";")));
                    index += 1;
                }
            }
            match &a.out {
                Some(out) => {
                    write_text(out, &text)?;
                    write_manifest(out, "check", &command, 0)?;
                    Ok(vec![out.clone()])
                }
                None => {
                    print!("{text}");
                    Ok(Vec::new())
                }
            }
        }
        Command::Study(study) => run_study(study, &command),
        Command::Replay(a) => {
            let manifest: RunManifest = read_file(&a.manifest)?;
            if manifest.tool_version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: manifest written by version {}, replaying with {}",
                    manifest.tool_version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            let mut config = manifest.config;
            if let Some(out) = &a.out {
                set_out(&mut config, out.clone())?;
            } else if matches!(config, Command::Replay(_)) {
                return Err(CliError::Validation("a manifest cannot record a replay".into()));
            }
            run(config)
        }
    }
}

fn eval_config(a: &StudyArgs, method: Method) -> EvalConfig {
    let mut cfg = EvalConfig::new(a.task, method, a.n, a.seed);
    cfg.sampler = a.knobs.config(method, a.seed);
    cfg.graph_spec = GraphSpec::new(a.task, a.n, a.seed).with_edge_probability(a.edge_probability);
    cfg.graph_count = a.graph_count.expect("resolved");
    cfg.samples_per_graph = a.samples.expect("resolved");
    cfg.runs = a.runs;
    cfg.reruns = a.reruns;
    cfg.distribution = match (a.dist, a.alpha) {
        (DistChoice::Perturbed, Some(alpha)) => DistributionKind::Perturbed(alpha),
        _ => DistributionKind::Empirical,
    };
    cfg.tiebreak = a.tiebreak.into();
    cfg
}

fn study_graphs(a: &StudyArgs) -> CliResult<Option<Vec<Graph>>> {
    let Some(path) = &a.graphs else {
        return Ok(None);
    };
    let graphs: Vec<Graph> = read_file(path)?;
    if graphs.is_empty() {
        return Err(CliError::Validation(format!("{} holds no graphs", path.display())));
    }
    if let Some(g) = graphs.iter().find(|g| g.n() != a.n) {
        return Err(CliError::Validation(format!("--n {} but a graph has {} vertices", a.n, g.n())));
    }
    Ok(Some(graphs))
}

fn run_study(study: &Study, command: &Command) -> CliResult<Vec<PathBuf>> {
    let (name, out, seed) = match study {
        Study::Reruns(a) => {
            let cfg = RerunStudyConfig {
                sizes: a.sizes.clone().expect("resolved"),
                graphs_per_size: a.graphs_per_size,
                rerun_counts: a.counts.clone(),
                task: a.task,
                edge_probability: a.edge_probability,
                seed: a.seed,
            };
            let out = a.out.clone().expect("resolved");
            write_csv(&out, &rerun_divergence_study(&cfg)?)?;
            ("study reruns", out, a.seed)
        }
        Study::Coverage(a) | Study::Table1(a) | Study::Table2(a) => {
            let methods = a.methods.clone().expect("resolved");
            positive("--methods", methods.len())?;
            let cfg = eval_config(a, methods[0]);
            let graphs = study_graphs(a)?;
            let out = a.out.clone().expect("resolved");
            let name = match study {
                Study::Coverage(_) => {
                    write_csv(&out, &coverage_study(&cfg, &methods, graphs.as_deref())?)?;
                    "study coverage"
                }
                Study::Table1(_) => {
                    let rows = method_table(&cfg, &methods, graphs.as_deref())?;
                    write_csv(&out, &rows.iter().map(Table1Row::from).collect::<Vec<_>>())?;
                    "study table1"
                }
                _ => {
                    let rows = method_table(&cfg, &methods, graphs.as_deref())?;
                    write_csv(&out, &rows.iter().map(Table2Row::from).collect::<Vec<_>>())?;
                    "study table2"
                }
            };
            (name, out, a.seed)
        }
        Study::EdgeReuse(e) => {
            let a = &e.study;
            let methods = a.methods.clone().expect("resolved");
            let mut cfg = eval_config(a, methods.first().copied().unwrap_or(Method::Random));
            cfg.reuse_denominator = e.denominator.into();
            let graphs = study_graphs(a)?;
            let out = a.out.clone().expect("resolved");
            write_csv(&out, &edge_reuse_evolution(&cfg, &methods, graphs.as_deref())?)?;
            ("study edge-reuse", out, a.seed)
        }
    };
    write_manifest(&out, name, command, seed)?;
    Ok(vec![out])
}
