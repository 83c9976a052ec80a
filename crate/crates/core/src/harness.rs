//! Per-instance runs, corpus experiments against the exact oracle, and the
//! JSON / CSV outputs they produce.

use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constants::{inverse_factorial, published_iteration_bound, InstanceConstants, Mode};
use crate::decider::{verify_certificate, Basis, Verdict};
use crate::dual::StartMode;
use crate::ellipsoid::{run_solver, write_trace_csv, SolverConfig, SolverError, Termination, TraceRow};
use crate::graph::{all_connected_graphs, emit_dimacs, generate, parse_dimacs, GeneratorSpec, Graph, GraphError};
use crate::numerics::rational_string;
use crate::oracle::{is_hamiltonian_exact, OracleError, OracleMethod};

/// JSON schema describing [`RunReport`].
pub const RUN_REPORT_SCHEMA: &str = include_str!("../schemas/run_report.schema.json");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: GraphError,
    },
    #[error("{path}: invalid manifest: {msg}")]
    Manifest { path: PathBuf, msg: String },
    #[error("instance {name}: {source}")]
    Generate {
        name: String,
        #[source]
        source: GraphError,
    },
    #[error("instance {name}: needs at least 3 vertices, got {n}")]
    TooSmall { name: String, n: usize },
    #[error("instance {name}: {source}")]
    Solver {
        name: String,
        #[source]
        source: SolverError,
    },
    #[error("instance {name}: invariant violated: {msg}")]
    Invariant { name: String, msg: String },
    #[error("duplicate instance name {0}")]
    DuplicateName(String),
}

impl HarnessError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant { .. } | HarnessError::Solver { .. } => 3,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub name: String,
    pub n: usize,
    pub m: usize,
    /// SHA-256 of the canonical DIMACS text.
    pub content_hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "R2")]
    pub r_squared: String,
    pub r_form: String,
    #[serde(rename = "L_form")]
    pub l_form: String,
    pub epsilon: String,
    pub delta: String,
    pub tau: String,
    #[serde(rename = "N")]
    pub iterations: String,
    pub p: String,
}

impl From<&InstanceConstants> for ConstantsReport {
    fn from(c: &InstanceConstants) -> Self {
        ConstantsReport {
            m: rational_string(&c.m),
            r_squared: rational_string(&c.r_squared),
            r_form: c.r_form(),
            l_form: c.l_form(),
            epsilon: rational_string(&c.epsilon),
            delta: rational_string(&c.delta),
            tau: rational_string(&c.tau),
            iterations: c.iterations.to_string(),
            p: c.precision_bits.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub mode: Mode,
    pub start_mode: StartMode,
    pub precision_bits: Option<u32>,
    pub max_iters: Option<u64>,
    pub early_exit: bool,
    pub seed: u64,
}

impl From<&SolverConfig> for ConfigReport {
    fn from(c: &SolverConfig) -> Self {
        ConfigReport {
            mode: c.mode,
            start_mode: c.start_mode,
            precision_bits: c.precision_bits,
            max_iters: c.max_iters,
            early_exit: c.early_exit,
            seed: c.seed,
        }
    }
}

impl From<&ConfigReport> for SolverConfig {
    fn from(c: &ConfigReport) -> Self {
        SolverConfig {
            mode: c.mode,
            start_mode: c.start_mode,
            precision_bits: c.precision_bits,
            max_iters: c.max_iters,
            early_exit: c.early_exit,
            seed: c.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultReport {
    /// `null` when no iterate was feasible.
    pub best_dual: Option<String>,
    pub best_lambda: Option<Vec<String>>,
    pub decision: Verdict,
    pub basis: Basis,
    pub threshold: String,
    pub certificate: Option<Vec<usize>>,
    pub iterations_run: u64,
    pub iteration_limit: u64,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `null` when the oracle ran out of budget.
    pub is_hamiltonian: Option<bool>,
    pub cycle: Option<Vec<usize>>,
    pub method: OracleMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concordance {
    Agree,
    Disagree,
    OracleUnresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceInfo,
    pub constants: ConstantsReport,
    pub config: ConfigReport,
    pub result: ResultReport,
    pub oracle: OracleReport,
    pub concordance: Concordance,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A report together with the trace it was built from.
#[derive(Clone, Debug)]
pub struct InstanceRun {
    pub report: RunReport,
    pub trace: Vec<TraceRow>,
}

pub fn content_hash(g: &Graph) -> String {
    hex::encode(Sha256::digest(emit_dimacs(g).as_bytes()))
}

/// Solve, query the oracle and cross-check.
pub fn run_instance(name: &str, g: &Graph, cfg: &SolverConfig) -> Result<InstanceRun, HarnessError> {
    if g.n() < 3 {
        return Err(HarnessError::TooSmall {
            name: name.to_string(),
            n: g.n(),
        });
    }
    let run = run_solver(g, cfg).map_err(|source| HarnessError::Solver {
        name: name.to_string(),
        source,
    })?;
    let certificate = run.decision.certificate.as_ref().map(|c| c.vertices().to_vec());
    if let Some(c) = &certificate {
        if !verify_certificate(g, c) {
            return Err(HarnessError::Invariant {
                name: name.to_string(),
                msg: format!("certificate {c:?} does not verify"),
            });
        }
    }
    let oracle = match is_hamiltonian_exact(g, OracleMethod::Auto) {
        Ok(r) => OracleReport {
            is_hamiltonian: Some(r.is_hamiltonian),
            cycle: r.cycle,
            method: r.method,
        },
        Err(OracleError::Unresolved(_)) => OracleReport {
            is_hamiltonian: None,
            cycle: None,
            method: OracleMethod::Backtracking,
        },
        Err(e) => {
            return Err(HarnessError::Invariant {
                name: name.to_string(),
                msg: e.to_string(),
            })
        }
    };
    let says_ham = run.decision.verdict == Verdict::Hamiltonian;
    let concordance = match oracle.is_hamiltonian {
        None => Concordance::OracleUnresolved,
        Some(h) if h == says_ham => Concordance::Agree,
        Some(_) => Concordance::Disagree,
    };
    let report = RunReport {
        instance: InstanceInfo {
            name: name.to_string(),
            n: g.n(),
            m: g.edge_count(),
            content_hash: content_hash(g),
        },
        constants: ConstantsReport::from(&run.constants),
        config: ConfigReport::from(cfg),
        result: ResultReport {
            best_dual: run.best_value.as_ref().map(rational_string),
            best_lambda: run
                .best_lambda
                .as_ref()
                .map(|l| l.iter().map(rational_string).collect()),
            decision: run.decision.verdict,
            basis: run.decision.basis,
            threshold: rational_string(&run.decision.threshold),
            certificate,
            iterations_run: run.iterations_run,
            iteration_limit: run.iteration_limit,
            termination: run.termination,
        },
        oracle,
        concordance,
    };
    Ok(InstanceRun {
        report,
        trace: run.trace,
    })
}

pub fn read_graph(path: &Path) -> Result<Graph, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_dimacs(&text).map_err(|source| HarnessError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// [`run_instance`] on a DIMACS file, named after its file stem.
pub fn run_instance_path(path: &Path, cfg: &SolverConfig) -> Result<InstanceRun, HarnessError> {
    let g = read_graph(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    run_instance(&name, &g, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerateFilter {
    Connected,
    ConnectedNonHamiltonian,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateSpec {
    pub n: usize,
    #[serde(default = "default_filter")]
    pub filter: EnumerateFilter,
}

fn default_filter() -> EnumerateFilter {
    EnumerateFilter::Connected
}

/// One manifest line: a DIMACS path, a generator, or a canonical enumeration
/// of small connected graphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifestEntry {
    Path {
        path: PathBuf,
        #[serde(default)]
        name: Option<String>,
    },
    Generator {
        generator: GeneratorSpec,
        #[serde(default)]
        name: Option<String>,
    },
    Enumerate {
        enumerate: EnumerateSpec,
    },
}

/// A named graph ready to run.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub graph: Graph,
}

pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<ManifestEntry>, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::Manifest {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn load_manifest(path: &Path) -> Result<Vec<Instance>, HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let entries = parse_manifest(&text, path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    expand_manifest(&entries, base)
}

/// Resolve entries into instances; relative paths are taken from `base`.
pub fn expand_manifest(entries: &[ManifestEntry], base: &Path) -> Result<Vec<Instance>, HarnessError> {
    let mut out = Vec::new();
    for entry in entries {
        match entry {
            ManifestEntry::Path { path, name } => {
                let full = base.join(path);
                let graph = read_graph(&full)?;
                let name = name.clone().unwrap_or_else(|| {
                    path.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "instance".into())
                });
                out.push(Instance { name, graph });
            }
            ManifestEntry::Generator { generator, name } => {
                let name = name.clone().unwrap_or_else(|| generator.name());
                let graph = generate(generator)
                    .map_err(|source| HarnessError::Generate {
                        name: name.clone(),
                        source,
                    })?
                    .graph;
                out.push(Instance { name, graph });
            }
            ManifestEntry::Enumerate { enumerate } => {
                let label = match enumerate.filter {
                    EnumerateFilter::Connected => "connected",
                    EnumerateFilter::ConnectedNonHamiltonian => "nonham",
                };
                let graphs = all_connected_graphs(enumerate.n).map_err(|source| HarnessError::Generate {
                    name: format!("{label}{}", enumerate.n),
                    source,
                })?;
                let keep = graphs.into_iter().filter(|g| match enumerate.filter {
                    EnumerateFilter::Connected => true,
                    EnumerateFilter::ConnectedNonHamiltonian => {
                        !is_hamiltonian_exact(g, OracleMethod::HeldKarp).is_ok_and(|r| r.is_hamiltonian)
                    }
                });
                for (i, graph) in keep.enumerate() {
                    out.push(Instance {
                        name: format!("{label}{}_{i:03}", enumerate.n),
                        graph,
                    });
                }
            }
        }
    }
    let mut names: Vec<&str> = out.iter().map(|i| i.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::DuplicateName(w[0].to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceCounts {
    pub agree: usize,
    pub disagree: usize,
    pub oracle_unresolved: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub instances: usize,
    pub agree: usize,
    pub disagree: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByOracleClass {
    pub hamiltonian: ClassCounts,
    pub non_hamiltonian: ClassCounts,
    pub unresolved: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualBoundRow {
    pub name: String,
    pub n: usize,
    pub best_dual: Option<String>,
    pub inverse_factorial: String,
    pub tau: String,
    pub at_least_inverse_factorial: bool,
    pub at_least_tau: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualBoundSummary {
    pub instances: usize,
    pub at_least_inverse_factorial: usize,
    pub at_least_tau: usize,
    pub below_tau: usize,
    pub no_feasible_iterate: usize,
    pub rows: Vec<DualBoundRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRow {
    pub name: String,
    pub n: usize,
    pub iterations_run: u64,
    pub iteration_limit: u64,
    #[serde(rename = "N")]
    pub budget: String,
    pub published_bound: String,
    pub termination: Termination,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub total_iterations_run: u64,
    pub max_iterations_run: u64,
    pub hit_limit: usize,
    pub budget_within_published_bound: usize,
    pub rows: Vec<IterationRow>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub instances: usize,
    pub concordance: ConcordanceCounts,
    pub by_oracle_class: ByOracleClass,
    pub non_hamiltonian_best_dual: DualBoundSummary,
    pub iterations: IterationSummary,
}

impl CorpusSummary {
    pub fn from_reports(reports: &[RunReport]) -> Self {
        let mut s = CorpusSummary {
            instances: reports.len(),
            ..Default::default()
        };
        for r in reports {
            match r.concordance {
                Concordance::Agree => s.concordance.agree += 1,
                Concordance::Disagree => s.concordance.disagree += 1,
                Concordance::OracleUnresolved => s.concordance.oracle_unresolved += 1,
            }
            let agree = r.concordance == Concordance::Agree;
            let class = match r.oracle.is_hamiltonian {
                Some(true) => &mut s.by_oracle_class.hamiltonian,
                Some(false) => &mut s.by_oracle_class.non_hamiltonian,
                None => {
                    s.by_oracle_class.unresolved += 1;
                    continue_iterations(&mut s.iterations, r);
                    continue;
                }
            };
            class.instances += 1;
            if agree {
                class.agree += 1;
            } else {
                class.disagree += 1;
            }
            if r.oracle.is_hamiltonian == Some(false) {
                add_bound_row(&mut s.non_hamiltonian_best_dual, r);
            }
            continue_iterations(&mut s.iterations, r);
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

fn add_bound_row(d: &mut DualBoundSummary, r: &RunReport) {
    let n = r.instance.n;
    let inv = inverse_factorial(n);
    let tau = crate::numerics::parse_rational(&r.constants.tau).expect("report tau is a rational");
    let best: Option<BigRational> = r
        .result
        .best_dual
        .as_deref()
        .map(|b| crate::numerics::parse_rational(b).expect("report best_dual is a rational"));
    let ge_inv = best.as_ref().is_some_and(|b| *b >= inv);
    let ge_tau = best.as_ref().is_some_and(|b| *b >= tau);
    d.instances += 1;
    d.at_least_inverse_factorial += usize::from(ge_inv);
    d.at_least_tau += usize::from(ge_tau);
    d.below_tau += usize::from(best.is_some() && !ge_tau);
    d.no_feasible_iterate += usize::from(best.is_none());
    d.rows.push(DualBoundRow {
        name: r.instance.name.clone(),
        n,
        best_dual: r.result.best_dual.clone(),
        inverse_factorial: rational_string(&inv),
        tau: r.constants.tau.clone(),
        at_least_inverse_factorial: ge_inv,
        at_least_tau: ge_tau,
    });
}

fn continue_iterations(it: &mut IterationSummary, r: &RunReport) {
    let n = r.instance.n;
    let published = published_iteration_bound(n);
    let budget: u64 = r.constants.iterations.parse().expect("report N is an integer");
    it.total_iterations_run += r.result.iterations_run;
    it.max_iterations_run = it.max_iterations_run.max(r.result.iterations_run);
    it.hit_limit += usize::from(r.result.iterations_run >= r.result.iteration_limit);
    it.budget_within_published_bound += usize::from(budget <= published);
    it.rows.push(IterationRow {
        name: r.instance.name.clone(),
        n,
        iterations_run: r.result.iterations_run,
        iteration_limit: r.result.iteration_limit,
        budget: r.constants.iterations.clone(),
        published_bound: published.to_string(),
        termination: r.result.termination,
    });
}

pub struct CorpusRun {
    pub runs: Vec<InstanceRun>,
    pub summary: CorpusSummary,
}

/// Run every instance, `jobs` at a time (0 = one per core). Output order
/// follows the input order.
pub fn run_corpus(instances: &[Instance], cfg: &SolverConfig, jobs: usize) -> Result<CorpusRun, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    let runs: Vec<InstanceRun> = pool.install(|| {
        instances
            .par_iter()
            .map(|inst| run_instance(&inst.name, &inst.graph, cfg))
            .collect::<Result<_, _>>()
    })?;
    let reports: Vec<RunReport> = runs.iter().map(|r| r.report.clone()).collect();
    let summary = CorpusSummary::from_reports(&reports);
    Ok(CorpusRun { runs, summary })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Writes `<name>.report.json` and, if `trace` is set, `<name>.trace.csv`.
pub fn write_run(dir: &Path, run: &InstanceRun, trace: bool) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = &run.report.instance.name;
    write_file(
        &dir.join(format!("{name}.report.json")),
        run.report.to_json().as_bytes(),
    )?;
    if trace {
        let mut buf = Vec::new();
        write_trace_csv(&run.trace, &mut buf).expect("writing to memory");
        write_file(&dir.join(format!("{name}.trace.csv")), &buf)?;
    }
    Ok(())
}

/// Writes every run followed by `summary.json`, sequentially.
pub fn write_corpus(dir: &Path, corpus: &CorpusRun, trace: bool) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for run in &corpus.runs {
        write_run(dir, run, trace)?;
    }
    write_file(&dir.join("summary.json"), corpus.summary.to_json().as_bytes())
}
