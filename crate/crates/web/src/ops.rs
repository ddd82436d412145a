//! The demo's operations as plain functions from strings to serializable
//! views, so they run and test natively.

use std::collections::BTreeMap;

use adgmarl::builder::{greedy_adg, min_adg_exhaustive};
use adgmarl::dp::value_iteration;
use adgmarl::experiment::{adg_for_variant, run_on, AdgVariant, ExperimentConfig, ORACLE_TOL};
use adgmarl::game::BUILTIN_NAMES;
use adgmarl::graph::{check_condition, check_condition_superset};
use adgmarl::joint::DEFAULT_ENUM_CAP;
use adgmarl::mpi::ad_mpi_seeded;
use adgmarl::{builtin_instance, ActionDependencyGraph, CoordinationGraph, Error, MarkovGame};
use serde::Serialize;

/// Upper bounds keeping a single call responsive in the browser.
pub const MAX_AGENTS: usize = 16;
pub const MAX_SEEDS: u32 = 500;
const MAX_SWEEPS: usize = 200;
const SUCCESS_TOL: f64 = 1e-8;

pub type OpResult<T> = Result<T, String>;

fn err(e: Error) -> String {
    e.to_string()
}

#[derive(Debug, Serialize)]
pub struct Instance {
    pub name: &'static str,
    pub agents: usize,
    pub edges: String,
}

/// Built-in games with their coordination graphs in edge-list form.
pub fn instances() -> Vec<Instance> {
    BUILTIN_NAMES
        .iter()
        .map(|&name| {
            let game = builtin_instance(name).expect("built-in instances load");
            Instance {
                name,
                agents: game.agent_count(),
                edges: format_edges(game.cg().edges()),
            }
        })
        .collect()
}

fn format_edges(edges: &[(usize, usize)]) -> String {
    edges.iter().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect::<Vec<_>>().join(" ")
}

/// Parses `1-2 2-3, 3-4` into 0-based pairs.
pub fn parse_edges(text: &str) -> OpResult<Vec<(usize, usize)>> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| !t.is_empty())
        .map(|token| {
            let (a, b) = token.split_once('-').ok_or_else(|| format!("`{token}` is not of the form i-j"))?;
            let label = |s: &str| match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(format!("bad agent label `{s}` in `{token}`")),
            };
            Ok((label(a)?, label(b)?))
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct PositionView {
    pub agent: usize,
    pub parents: Vec<usize>,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct AdgView {
    pub agents: usize,
    pub cg_edges: Vec<[usize; 2]>,
    pub adg_edges: Vec<[usize; 2]>,
    pub order: Vec<usize>,
    pub edge_count: usize,
    pub condition_holds: bool,
    pub superset_holds: bool,
    /// In decision order; labels are 1-based.
    pub positions: Vec<PositionView>,
}

fn one_based(edges: &[(usize, usize)]) -> Vec<[usize; 2]> {
    edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect()
}

/// Builds an ADG for a hand-entered coordination graph.
pub fn build_adg(agents: usize, edges: &str, method: &str) -> OpResult<AdgView> {
    if agents > MAX_AGENTS {
        return Err(format!("at most {MAX_AGENTS} agents"));
    }
    let cg = CoordinationGraph::new(agents, &parse_edges(edges)?).map_err(err)?;
    let adg = match method {
        "greedy" => greedy_adg(&cg),
        "exhaustive" => min_adg_exhaustive(&cg).map_err(err)?.1,
        "dense" => ActionDependencyGraph::fully_dense((0..agents).collect()).map_err(err)?,
        "empty" => ActionDependencyGraph::empty(agents).map_err(err)?,
        other => return Err(format!("unknown method `{other}`")),
    };
    view(&cg, &adg)
}

fn view(cg: &CoordinationGraph, adg: &ActionDependencyGraph) -> OpResult<AdgView> {
    let positions = adg
        .order()
        .iter()
        .enumerate()
        .map(|(k, &agent)| {
            let required = cg.neighbors_of_set(&adg.suffix(k)).map_err(err)?;
            let parents = adg.parents(agent);
            Ok(PositionView {
                agent: agent + 1,
                parents: parents.iter().map(|p| p + 1).collect(),
                ok: parents.iter().copied().eq(required.iter().copied()),
            })
        })
        .collect::<OpResult<Vec<_>>>()?;
    Ok(AdgView {
        agents: cg.agent_count(),
        cg_edges: one_based(cg.edges()),
        adg_edges: one_based(adg.edges()),
        order: adg.order().iter().map(|a| a + 1).collect(),
        edge_count: adg.edge_count(),
        condition_holds: check_condition(cg, adg).map_err(err)?,
        superset_holds: check_condition_superset(cg, adg).map_err(err)?,
        positions,
    })
}

fn parse_variant(name: &str) -> OpResult<AdgVariant> {
    match name {
        "sparse_greedy" => Ok(AdgVariant::SparseGreedy),
        "dense_full" => Ok(AdgVariant::DenseFull),
        "empty" => Ok(AdgVariant::Empty),
        other => Err(format!("unknown ADG variant `{other}`")),
    }
}

fn load(game: &str, variant: &str) -> OpResult<(MarkovGame, ActionDependencyGraph)> {
    let game = builtin_instance(game).map_err(err)?;
    let adg = adg_for_variant(game.cg(), parse_variant(variant)?).map_err(err)?;
    Ok((game, adg))
}

#[derive(Debug, Serialize)]
pub struct Outcome {
    pub value: f64,
    pub joint_action: Vec<usize>,
    pub count: usize,
}

#[derive(Debug, Serialize)]
pub struct RestartView {
    pub optimal_value: f64,
    pub success_rate: f64,
    pub mean_final_value: f64,
    pub mean_sweeps: f64,
    pub adg_edges: usize,
    /// Distinct converged outcomes, best first.
    pub outcomes: Vec<Outcome>,
}

/// Runs seeds `0..seeds` from random initial policies on a built-in game.
pub fn restart_stats(game: &str, variant: &str, seeds: u32) -> OpResult<RestartView> {
    if seeds == 0 || seeds > MAX_SEEDS {
        return Err(format!("seeds must be in 1..={MAX_SEEDS}"));
    }
    let (g, adg) = load(game, variant)?;
    let config = ExperimentConfig {
        game: game.to_string(),
        adg_variant: parse_variant(variant)?,
        adg_path: None,
        seeds: (0..seeds as u64).collect(),
        max_sweeps: MAX_SWEEPS,
        tolerance: SUCCESS_TOL,
        output: None,
        format: Default::default(),
    };
    let report = run_on(&g, &adg, &config, DEFAULT_ENUM_CAP).map_err(err)?;
    // keyed by the exact bits so equal values group together
    let mut groups: BTreeMap<(u64, Vec<usize>), usize> = BTreeMap::new();
    for row in &report.rows {
        let action = row.joint_action.clone().unwrap_or_default();
        *groups.entry((row.final_values[0].to_bits(), action)).or_default() += 1;
    }
    let mut outcomes: Vec<Outcome> = groups
        .into_iter()
        .map(|((bits, joint_action), count)| Outcome {
            value: f64::from_bits(bits),
            joint_action,
            count,
        })
        .collect();
    outcomes.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.joint_action.cmp(&b.joint_action)));
    Ok(RestartView {
        optimal_value: report.optimal_values[0],
        success_rate: report.success_rate,
        mean_final_value: report.mean_final_value,
        mean_sweeps: report.rows.iter().map(|r| r.sweeps as f64).sum::<f64>() / report.rows.len() as f64,
        adg_edges: report.adg_edges,
        outcomes,
    })
}

#[derive(Debug, Serialize)]
pub struct SweepView {
    pub value: f64,
    pub joint_action: Vec<usize>,
    pub changes: usize,
}

#[derive(Debug, Serialize)]
pub struct TraceView {
    pub status: &'static str,
    pub optimal_value: f64,
    pub sweeps: Vec<SweepView>,
}

/// One seeded run, sweep by sweep, on state 0 of a built-in game.
pub fn solve_trace(game: &str, variant: &str, seed: u64) -> OpResult<TraceView> {
    let (g, adg) = load(game, variant)?;
    let optimal = value_iteration(&g, ORACLE_TOL, DEFAULT_ENUM_CAP).map_err(err)?;
    let (_, trace) = ad_mpi_seeded(&g, adg, seed, MAX_SWEEPS).map_err(err)?;
    Ok(TraceView {
        status: trace.status.as_str(),
        optimal_value: optimal.get(0),
        sweeps: trace
            .sweeps
            .iter()
            .map(|s| SweepView {
                value: s.values.get(0),
                joint_action: s.joint_actions[0].clone(),
                changes: s.changes,
            })
            .collect(),
    })
}
