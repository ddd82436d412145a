//! Seeded restart experiments: many random initial policies on one ADG,
//! each run to termination and compared against the enumeration oracle.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builder::greedy_adg;
use crate::dp::value_iteration;
use crate::error::{Error, Result};
use crate::game::{builtin_instance, game_from_json, MarkovGame, BUILTIN_NAMES};
use crate::graph::{check_condition, ActionDependencyGraph, CoordinationGraph};
use crate::mpi::{ad_mpi_seeded, MpiStatus};
use crate::policy::AdgDocument;
use crate::value::ValueTable;

/// Convergence threshold used for the oracle's value iteration.
pub const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdgVariant {
    SparseGreedy,
    DenseFull,
    Empty,
    File,
}

impl AdgVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            AdgVariant::SparseGreedy => "sparse_greedy",
            AdgVariant::DenseFull => "dense_full",
            AdgVariant::Empty => "empty",
            AdgVariant::File => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in instance name or path to a game document.
    pub game: String,
    pub adg_variant: AdgVariant,
    /// ADG document, required when `adg_variant` is `file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adg_path: Option<String>,
    pub seeds: Vec<u64>,
    pub max_sweeps: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub format: ReportFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| {
            if e.is_data() {
                Error::Schema(e.to_string())
            } else {
                Error::Parse(e.to_string())
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("seeds must not be empty".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
        }
        if (self.adg_variant == AdgVariant::File) != self.adg_path.is_some() {
            return Err(Error::InvalidArgument("adg_path is required exactly when adg_variant is `file`".into()));
        }
        Ok(())
    }
}

/// Loads a built-in instance by name, or a game document from a path.
pub fn load_game(source: &str) -> Result<MarkovGame> {
    if BUILTIN_NAMES.contains(&source) {
        return builtin_instance(source);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Error::UnknownInstance(source.to_string()));
    }
    game_from_json(&read_input(path)?)
}

/// Unreadable input files are the caller's mistake, not an internal failure.
pub fn read_input(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// Reads an ADG document and checks it against the game's agent count.
pub fn load_adg(path: &str, n: usize) -> Result<ActionDependencyGraph> {
    let text = read_input(path)?;
    let doc: AdgDocument = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let adg = doc.to_adg()?;
    if adg.agent_count() != n {
        return Err(Error::SizeMismatch(adg.agent_count(), n));
    }
    Ok(adg)
}

/// The ADG for a non-file variant. The dense ADG uses the identity order.
pub fn adg_for_variant(cg: &CoordinationGraph, variant: AdgVariant) -> Result<ActionDependencyGraph> {
    let n = cg.agent_count();
    match variant {
        AdgVariant::SparseGreedy => Ok(greedy_adg(cg)),
        AdgVariant::DenseFull => ActionDependencyGraph::fully_dense((0..n).collect()),
        AdgVariant::Empty => ActionDependencyGraph::empty(n),
        AdgVariant::File => Err(Error::InvalidArgument("file variant needs a path".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seed: u64,
    pub status: MpiStatus,
    pub sweeps: usize,
    pub final_values: Vec<f64>,
    pub gap: f64,
    /// Induced joint action (1 state games only), 0-based.
    pub joint_action: Option<Vec<usize>>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub game: String,
    pub adg_variant: AdgVariant,
    pub adg_edges: usize,
    pub condition_holds: bool,
    pub tolerance: f64,
    pub optimal_values: Vec<f64>,
    pub success_rate: f64,
    pub mean_final_value: f64,
    pub rows: Vec<RunRow>,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

impl ExperimentReport {
    fn from_rows(config: &ExperimentConfig, adg: &ActionDependencyGraph, condition_holds: bool, optimal: &ValueTable, rows: Vec<RunRow>) -> Self {
        let count = rows.len() as f64;
        let success_rate = rows.iter().filter(|r| r.success).count() as f64 / count;
        let mean_final_value = rows
            .iter()
            .map(|r| r.final_values.iter().sum::<f64>() / r.final_values.len() as f64)
            .sum::<f64>()
            / count;
        Self {
            game: config.game.clone(),
            adg_variant: config.adg_variant,
            adg_edges: adg.edge_count(),
            condition_holds,
            tolerance: config.tolerance,
            optimal_values: optimal.as_slice().to_vec(),
            success_rate,
            mean_final_value,
            rows,
        }
    }

    /// One line per seed; multi-state values are `;`-separated per state.
    pub fn to_csv(&self) -> String {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["seed", "status", "sweeps", "final_value", "optimal_value", "gap", "joint_action", "adg_edges"])
            .expect("in-memory write");
        for row in &self.rows {
            out.write_record([
                row.seed.to_string(),
                row.status.to_string(),
                row.sweeps.to_string(),
                join(&row.final_values),
                join(&self.optimal_values),
                row.gap.to_string(),
                row.joint_action.as_deref().map(join).unwrap_or_default(),
                self.adg_edges.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }
}

fn run_seed(game: &MarkovGame, adg: &ActionDependencyGraph, optimal: &ValueTable, config: &ExperimentConfig, seed: u64) -> Result<RunRow> {
    let (_, trace) = ad_mpi_seeded(game, adg.clone(), seed, config.max_sweeps)?;
    let gap = trace.final_values.sup_distance(optimal);
    Ok(RunRow {
        seed,
        status: trace.status,
        sweeps: trace.sweep_count(),
        final_values: trace.final_values.as_slice().to_vec(),
        gap,
        joint_action: (game.state_count() == 1).then(|| trace.final_joint_actions[0].clone()),
        success: gap < config.tolerance,
    })
}

#[cfg(feature = "parallel")]
fn run_all(game: &MarkovGame, adg: &ActionDependencyGraph, optimal: &ValueTable, config: &ExperimentConfig) -> Result<Vec<RunRow>> {
    use rayon::prelude::*;
    config.seeds.par_iter().map(|&s| run_seed(game, adg, optimal, config, s)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all(game: &MarkovGame, adg: &ActionDependencyGraph, optimal: &ValueTable, config: &ExperimentConfig) -> Result<Vec<RunRow>> {
    config.seeds.iter().map(|&s| run_seed(game, adg, optimal, config, s)).collect()
}

/// Runs the experiment on an already-loaded game and ADG.
pub fn run_on(game: &MarkovGame, adg: &ActionDependencyGraph, config: &ExperimentConfig, cap: u64) -> Result<ExperimentReport> {
    config.validate()?;
    if adg.agent_count() != game.agent_count() {
        return Err(Error::SizeMismatch(adg.agent_count(), game.agent_count()));
    }
    let optimal = value_iteration(game, ORACLE_TOL, cap)?;
    let condition_holds = check_condition(game.cg(), adg)?;
    let mut rows = run_all(game, adg, &optimal, config)?;
    rows.sort_by_key(|r| r.seed);
    Ok(ExperimentReport::from_rows(config, adg, condition_holds, &optimal, rows))
}

/// Loads the configured game and ADG, then runs every seed.
pub fn run_experiment(config: &ExperimentConfig, cap: u64) -> Result<ExperimentReport> {
    config.validate()?;
    let game = load_game(&config.game)?;
    let adg = match (config.adg_variant, &config.adg_path) {
        (AdgVariant::File, Some(path)) => load_adg(path, game.agent_count())?,
        (variant, _) => adg_for_variant(game.cg(), variant)?,
    };
    run_on(&game, &adg, config, cap)
}
