//! `adgmarl`: build and check action dependency graphs, compute oracle
//! values, and run seeded AD-MPI experiments.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adgmarl::builder::{greedy_adg, min_adg_exhaustive};
use adgmarl::dp::{maximizing_joint_actions, value_iteration};
use adgmarl::experiment::{load_adg, load_game, read_input, run_experiment, ExperimentConfig, ReportFormat, ORACLE_TOL};
use adgmarl::graph::{check_condition, check_condition_superset};
use adgmarl::joint::enum_cap_from_env;
use adgmarl::mpi::ad_mpi_seeded;
use adgmarl::optimality::OPTIMALITY_TOL;
use adgmarl::policy::{AdgDocument, PolicyDocument};
use adgmarl::{ActionDependencyGraph, AdMpiTrace, Error, MarkovGame};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "adgmarl", version, about = "Action-dependent policy iteration on coordination-graph Markov games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an ADG for a game's coordination graph.
    BuildAdg {
        /// Built-in instance name or path to a game document.
        #[arg(long)]
        game: String,
        #[arg(long, value_enum)]
        method: Method,
        /// Also write the ADG document to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an ADG document against a game's coordination graph.
    Check {
        #[arg(long)]
        game: String,
        #[arg(long)]
        adg: PathBuf,
    },
    /// Optimal values by exhaustive joint-action enumeration.
    Oracle {
        #[arg(long)]
        game: String,
    },
    /// Run a restart experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Single seeded AD-MPI run with the full sweep trace.
    Solve {
        #[arg(long)]
        game: String,
        /// ADG document path, or one of greedy, exhaustive, dense, empty.
        #[arg(long)]
        adg: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_sweeps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    Greedy,
    Exhaustive,
    Dense,
    Empty,
}

impl Method {
    fn parse(name: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(name, false).ok()
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(msg) => write!(f, "error: {msg}"),
            Failure::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            match failure {
                Failure::Validation(_) => ExitCode::from(1),
                Failure::Internal(_) => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    let cap = enum_cap_from_env()?;
    match command {
        Command::BuildAdg { game, method, out } => build_adg(&game, method, out.as_deref()),
        Command::Check { game, adg } => check(&game, &adg),
        Command::Oracle { game } => oracle(&game, cap),
        Command::Run { config, out, format } => run(&config, out, format, cap),
        Command::Solve {
            game,
            adg,
            seed,
            max_sweeps,
            out,
        } => solve(&game, &adg, seed, max_sweeps, out.as_deref(), cap),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Internal(e.to_string())),
            _ => Ok(()),
        },
    }
}

fn adg_for_method(game: &MarkovGame, method: Method) -> CliResult<ActionDependencyGraph> {
    let cg = game.cg();
    let n = cg.agent_count();
    Ok(match method {
        Method::Greedy => greedy_adg(cg),
        Method::Exhaustive => min_adg_exhaustive(cg)?.1,
        Method::Dense => ActionDependencyGraph::fully_dense((0..n).collect())?,
        Method::Empty => ActionDependencyGraph::empty(n)?,
    })
}

#[derive(Serialize)]
struct BuildOutput<'a> {
    game: &'a str,
    method: Method,
    edge_count: usize,
    condition_holds: bool,
    superset_holds: bool,
    adg: AdgDocument,
}

fn build_adg(source: &str, method: Method, out: Option<&Path>) -> CliResult<()> {
    let game = load_game(source)?;
    let adg = adg_for_method(&game, method)?;
    let doc = AdgDocument::from_adg(&adg);
    if let Some(path) = out {
        write_file(path, &to_json(&doc)?)?;
    }
    let output = BuildOutput {
        game: source,
        method,
        edge_count: adg.edge_count(),
        condition_holds: check_condition(game.cg(), &adg)?,
        superset_holds: check_condition_superset(game.cg(), &adg)?,
        adg: doc,
    };
    emit(None, &to_json(&output)?)
}

#[derive(Serialize)]
struct PositionCheck {
    position: usize,
    agent: usize,
    parents: Vec<usize>,
    required: Vec<usize>,
    ok: bool,
}

#[derive(Serialize)]
struct CheckOutput {
    edge_count: usize,
    condition_holds: bool,
    superset_holds: bool,
    positions: Vec<PositionCheck>,
}

fn check(source: &str, adg_path: &Path) -> CliResult<()> {
    let game = load_game(source)?;
    let adg = load_adg(&adg_path.to_string_lossy(), game.agent_count())?;
    let cg = game.cg();
    let positions = adg
        .order()
        .iter()
        .enumerate()
        .map(|(k, &agent)| {
            let required = cg.neighbors_of_set(&adg.suffix(k))?;
            let parents = adg.parents(agent);
            Ok(PositionCheck {
                position: k + 1,
                agent: agent + 1,
                parents: parents.iter().map(|a| a + 1).collect(),
                required: required.iter().map(|a| a + 1).collect(),
                ok: parents.iter().copied().eq(required.iter().copied()),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let output = CheckOutput {
        edge_count: adg.edge_count(),
        condition_holds: check_condition(cg, &adg)?,
        superset_holds: check_condition_superset(cg, &adg)?,
        positions,
    };
    emit(None, &to_json(&output)?)
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    game: &'a str,
    gamma: f64,
    values: Vec<f64>,
    /// Every maximizing joint action; single-state games only.
    #[serde(skip_serializing_if = "Option::is_none")]
    argmax: Option<Vec<Vec<usize>>>,
    /// Lexicographically smallest greedy joint action per state.
    #[serde(skip_serializing_if = "Option::is_none")]
    greedy_joint_actions: Option<Vec<Vec<usize>>>,
}

fn oracle(source: &str, cap: u64) -> CliResult<()> {
    let game = load_game(source)?;
    let v = value_iteration(&game, ORACLE_TOL, cap)?;
    let (argmax, greedy) = if game.state_count() == 1 {
        (Some(maximizing_joint_actions(&game, &v, 0, OPTIMALITY_TOL, cap)?), None)
    } else {
        let greedy = (0..game.state_count())
            .map(|s| maximizing_joint_actions(&game, &v, s, 0.0, cap).map(|mut all| all.swap_remove(0)))
            .collect::<Result<Vec<_>, Error>>()?;
        (None, Some(greedy))
    };
    let output = OracleOutput {
        game: source,
        gamma: game.gamma(),
        values: v.into_vec(),
        argmax,
        greedy_joint_actions: greedy,
    };
    emit(None, &to_json(&output)?)
}

fn run(config_path: &Path, out: Option<PathBuf>, format: Option<Format>, cap: u64) -> CliResult<()> {
    let config = ExperimentConfig::from_json(&read_input(config_path)?)?;
    let out = out
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .ok_or_else(|| Failure::Validation("no output path; pass --out or set `output` in the config".into()))?;
    let format = format.map(ReportFormat::from).unwrap_or(config.format);
    let report = run_experiment(&config, cap)?;
    write_file(&out, &report.render(format))?;
    let successes = report.rows.iter().filter(|r| r.success).count();
    println!(
        "{}: {} ADG ({} edges, condition {}), {}/{} runs optimal, success_rate {}, report written to {}",
        report.game,
        report.adg_variant.as_str(),
        report.adg_edges,
        report.condition_holds,
        successes,
        report.rows.len(),
        report.success_rate,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    game: &'a str,
    seed: u64,
    edge_count: usize,
    condition_holds: bool,
    /// Absent when the joint action space exceeds the enumeration cap.
    optimal_values: Option<Vec<f64>>,
    gap: Option<f64>,
    trace: AdMpiTrace,
    policy: PolicyDocument,
}

fn solve(source: &str, adg_arg: &str, seed: u64, max_sweeps: usize, out: Option<&Path>, cap: u64) -> CliResult<()> {
    let game = load_game(source)?;
    let adg = match Method::parse(adg_arg) {
        Some(method) => adg_for_method(&game, method)?,
        None => load_adg(adg_arg, game.agent_count())?,
    };
    let condition_holds = check_condition(game.cg(), &adg)?;
    let edge_count = adg.edge_count();
    let (policy, trace) = ad_mpi_seeded(&game, adg, seed, max_sweeps)?;
    let optimal = match value_iteration(&game, ORACLE_TOL, cap) {
        Ok(v) => Some(v),
        Err(Error::EnumerationCap { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let output = SolveOutput {
        game: source,
        seed,
        edge_count,
        condition_holds,
        gap: optimal.as_ref().map(|v| trace.final_values.sup_distance(v)),
        optimal_values: optimal.map(|v| v.into_vec()),
        trace,
        policy: policy.to_document(),
    };
    emit(out, &to_json(&output)?)
}
