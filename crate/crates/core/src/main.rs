use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::json;

use hamdual::constants::Mode;
use hamdual::dual::{eval_dual, LambdaVector, StartMode};
use hamdual::ellipsoid::SolverConfig;
use hamdual::graph::{emit_dimacs, generate, GeneratorSpec};
use hamdual::harness::{
    load_manifest, read_graph, run_corpus, run_instance_path, write_corpus, write_run, HarnessError,
};
use hamdual::numerics::{parse_rational, rational_string};
use hamdual::oracle::{is_hamiltonian_exact, OracleMethod};

#[derive(Parser)]
#[command(
    name = "hamdual",
    version,
    about = "Lagrangian-dual ellipsoid solver for Hamiltonian circuit, with an exact oracle"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// faithful: budget N and 5N bits; practical: capped iterations and fewer bits
    #[arg(long, global = true, value_enum, default_value = "practical")]
    mode: Mode,
    #[arg(long, global = true, value_enum, default_value = "paper_fixed")]
    start_mode: StartMode,
    /// Fractional bits of the ellipsoid state (practical mode)
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true)]
    max_iters: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for `corpus` (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Keep iterating after a certificate is found
    #[arg(long, global = true)]
    no_early_exit: bool,
    /// Also write per-iteration CSV traces
    #[arg(long, global = true)]
    trace: bool,
}

impl Global {
    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            mode: self.mode,
            start_mode: self.start_mode,
            precision_bits: self.precision_bits,
            max_iters: self.max_iters,
            early_exit: !self.no_early_exit,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as DIMACS
    Gen {
        /// Generator spec as JSON, e.g. '{"kind":"gnp","n":8,"p":"1/2","seed":1}'
        spec: String,
        /// Output file (stdout if omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the dual function at a point
    DualEval {
        graph: PathBuf,
        /// JSON array of rationals or decimals, e.g. '["0","1/2","0.25"]'
        lambda: String,
    },
    /// Decide Hamiltonicity exactly
    Oracle {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: OracleMethod,
    },
    /// Run the solver and the oracle on one instance
    Solve { graph: PathBuf },
    /// Run every instance of a manifest
    Corpus { manifest: PathBuf },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e.exit_code() {
            3 => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{ctx}: {e}"))
}

fn parse_lambda(text: &str) -> Result<Vec<BigRational>, Failure> {
    let raw: Vec<serde_json::Value> = serde_json::from_str(text).map_err(input("lambda"))?;
    raw.iter()
        .map(|v| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => return Err(Failure::Input(format!("lambda: not a number: {other}"))),
            };
            parse_rational(&s).map_err(input("lambda"))
        })
        .collect()
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen { spec, output } => {
            let spec: GeneratorSpec = serde_json::from_str(spec).map_err(input("generator spec"))?;
            let generated = generate(&spec).map_err(input("generator"))?;
            let text = emit_dimacs(&generated.graph);
            match output {
                Some(path) => fs::write(path, text).map_err(input(&path.display().to_string()))?,
                None => print!("{text}"),
            }
        }
        Command::DualEval { graph, lambda } => {
            let graph = read_graph(graph)?;
            let lambda = LambdaVector::new(parse_lambda(lambda)?);
            let r = eval_dual(&graph, &lambda, g.start_mode).map_err(input("dual"))?;
            print_json(&json!({
                "value": rational_string(&r.value),
                "walk": r.walk.vertices(),
                "supergradient": r.supergradient,
                "arcs_relaxed": r.arcs_relaxed,
            }));
        }
        Command::Oracle { graph, method } => {
            let graph = read_graph(graph)?;
            let r = is_hamiltonian_exact(&graph, *method).map_err(input("oracle"))?;
            print_json(&serde_json::to_value(&r).expect("json"));
        }
        Command::Solve { graph } => {
            let run = run_instance_path(graph, &g.solver_config())?;
            write_run(&g.out_dir, &run, g.trace)?;
            print!("{}", run.report.to_json());
        }
        Command::Corpus { manifest } => {
            let instances = load_manifest(manifest)?;
            let corpus = run_corpus(&instances, &g.solver_config(), g.jobs)?;
            write_corpus(&g.out_dir, &corpus, g.trace)?;
            print!("{}", corpus.summary.to_json());
            eprintln!(
                "{} instances written to {}",
                corpus.runs.len(),
                Path::new(&g.out_dir).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
