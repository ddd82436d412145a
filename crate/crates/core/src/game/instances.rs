//! Built-in coordination polymatrix games.
//!
//! Payoff matrices are indexed `[a_i][a_j]` with `i < j` the edge's agents.
//! Every edge not listed explicitly uses [`baseline`].

use super::MarkovGame;
use crate::error::{Error, Result};
use crate::graph::CoordinationGraph;

pub const BUILTIN_NAMES: [&str; 5] = ["fig2_line", "star5", "ring5", "tree7", "mesh9"];

const ACTIONS: usize = 5;

/// 1.0 on the diagonal, 0.1 elsewhere.
fn baseline() -> Vec<Vec<f64>> {
    (0..ACTIONS)
        .map(|r| (0..ACTIONS).map(|c| if r == c { 1.0 } else { 0.1 }).collect())
        .collect()
}

fn with_overrides(mut m: Vec<Vec<f64>>, cells: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    for &(r, c, v) in cells {
        m[r][c] = v;
    }
    m
}

/// Star tables: diagonal 3.5, 3.5, 3.5, 3.25, 3.0 over a 0.5 background.
fn star_base() -> Vec<Vec<f64>> {
    let diag = [3.5, 3.5, 3.5, 3.25, 3.0];
    (0..ACTIONS)
        .map(|r| (0..ACTIONS).map(|c| if r == c { diag[r] } else { 0.5 }).collect())
        .collect()
}

/// Assigns matrices to the graph's sorted edges from `(i, j) -> matrix`
/// pairs given with 1-based labels.
fn assemble(cg: CoordinationGraph, special: Vec<((usize, usize), Vec<Vec<f64>>)>) -> Result<MarkovGame> {
    let payoffs = cg
        .edges()
        .iter()
        .map(|&(i, j)| {
            special
                .iter()
                .find(|((a, b), _)| (a - 1, b - 1) == (i, j))
                .map(|(_, m)| m.clone())
                .unwrap_or_else(baseline)
        })
        .collect();
    let n = cg.agent_count();
    MarkovGame::polymatrix(cg, vec![ACTIONS; n], payoffs)
}

fn fig2_line() -> Result<MarkovGame> {
    let m = vec![vec![1.0, 0.0], vec![0.0, 0.6]];
    MarkovGame::polymatrix(CoordinationGraph::line(3)?, vec![2; 3], vec![m.clone(), m])
}

fn star5() -> Result<MarkovGame> {
    let cg = CoordinationGraph::star(5)?;
    assemble(
        cg,
        vec![
            ((1, 2), with_overrides(star_base(), &[(0, 1, 5.0), (1, 2, 6.0)])),
            ((1, 3), with_overrides(star_base(), &[(0, 2, 5.0), (1, 2, 6.0)])),
            ((1, 4), with_overrides(star_base(), &[(0, 3, 5.0), (1, 2, 6.0)])),
            ((1, 5), with_overrides(star_base(), &[(0, 4, 5.0), (1, 1, 0.5)])),
        ],
    )
}

fn ring5() -> Result<MarkovGame> {
    let cg = CoordinationGraph::ring(5)?;
    assemble(
        cg,
        vec![
            ((2, 3), with_overrides(baseline(), &[(1, 2, 2.0)])),
            ((4, 5), with_overrides(baseline(), &[(1, 2, 2.0)])),
            ((1, 5), with_overrides(baseline(), &[(1, 1, 10.0)])),
        ],
    )
}

fn tree7() -> Result<MarkovGame> {
    let cg = CoordinationGraph::binary_tree(7)?;
    let leaf = with_overrides(baseline(), &[(1, 1, 0.5), (2, 2, 1.5)]);
    assemble(
        cg,
        vec![
            ((1, 3), with_overrides(baseline(), &[(1, 1, 2.0), (1, 2, 1.5)])),
            ((3, 6), leaf.clone()),
            ((3, 7), leaf),
        ],
    )
}

fn mesh9() -> Result<MarkovGame> {
    let cg = CoordinationGraph::grid(3, 3)?;
    assemble(
        cg,
        vec![
            ((5, 6), with_overrides(baseline(), &[(1, 2, 2.0)])),
            ((6, 9), with_overrides(baseline(), &[(1, 1, 10.0)])),
        ],
    )
}

/// Looks up a built-in game by name (see [`BUILTIN_NAMES`]).
pub fn builtin_instance(name: &str) -> Result<MarkovGame> {
    match name {
        "fig2_line" => fig2_line(),
        "star5" => star5(),
        "ring5" => ring5(),
        "tree7" => tree7(),
        "mesh9" => mesh9(),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}
