//! JSON game documents.
//!
//! ```json
//! {
//!   "n_agents": 3, "actions": [2, 2, 2], "states": 1, "gamma": 0.0,
//!   "cg_edges": [[1, 2], [2, 3]],
//!   "rewards": { "1-2": [[[1.0, 0.0], [0.0, 0.6]]], "2-3": [[[1.0, 0.0], [0.0, 0.6]]] }
//! }
//! ```
//!
//! Reward tables are `[state][a_i][a_j]`, transition tables (optional)
//! `[state][a_i][a_j][next_state]`. Agents are 1-based, edges `i < j`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EdgeTable, MarkovGame};
use crate::error::{Error, Result};
use crate::graph::CoordinationGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    pub n_agents: usize,
    pub actions: Vec<usize>,
    pub states: usize,
    pub gamma: f64,
    pub cg_edges: Vec<[usize; 2]>,
    pub rewards: BTreeMap<String, Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<BTreeMap<String, Vec<Vec<Vec<Vec<f64>>>>>>,
}

fn edge_key(i: usize, j: usize) -> String {
    format!("{}-{}", i + 1, j + 1)
}

fn check_keys<T>(map: &BTreeMap<String, T>, keys: &[String], what: &str) -> Result<()> {
    if let Some(missing) = keys.iter().find(|k| !map.contains_key(*k)) {
        return Err(Error::Schema(format!("missing {what} table for edge {missing}")));
    }
    if let Some(extra) = map.keys().find(|k| !keys.contains(k)) {
        return Err(Error::Schema(format!("{what} table `{extra}` does not name a CG edge")));
    }
    Ok(())
}

fn flatten_rewards(key: &str, table: &[Vec<Vec<f64>>], dims: (usize, usize, usize)) -> Result<Vec<f64>> {
    let (states, rows, cols) = dims;
    let ok = table.len() == states && table.iter().all(|s| s.len() == rows && s.iter().all(|r| r.len() == cols));
    if !ok {
        return Err(Error::Schema(format!(
            "reward table for edge {key} must have shape [{states}][{rows}][{cols}]"
        )));
    }
    Ok(table.iter().flatten().flatten().copied().collect())
}

fn flatten_transitions(key: &str, table: &[Vec<Vec<Vec<f64>>>], dims: (usize, usize, usize)) -> Result<Vec<f64>> {
    let (states, rows, cols) = dims;
    let ok = table.len() == states
        && table.iter().all(|s| {
            s.len() == rows && s.iter().all(|r| r.len() == cols && r.iter().all(|c| c.len() == states))
        });
    if !ok {
        return Err(Error::Schema(format!(
            "transition table for edge {key} must have shape [{states}][{rows}][{cols}][{states}]"
        )));
    }
    Ok(table.iter().flatten().flatten().flatten().copied().collect())
}

impl GameDocument {
    /// Checks the document against the schema and builds a validated game.
    pub fn into_game(self) -> Result<MarkovGame> {
        let n = self.n_agents;
        if self.actions.len() != n {
            return Err(Error::Schema(format!(
                "`actions` has {} entries for {n} agents",
                self.actions.len()
            )));
        }
        let mut edges = Vec::with_capacity(self.cg_edges.len());
        for &[i, j] in &self.cg_edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::AgentOutOfRange { agent: i.max(j).max(1), n });
            }
            if i >= j {
                return Err(Error::Schema(format!("cg edge [{i}, {j}] must satisfy i < j")));
            }
            edges.push((i - 1, j - 1));
        }
        let cg = CoordinationGraph::new(n, &edges)?;
        let keys: Vec<String> = cg.edges().iter().map(|&(i, j)| edge_key(i, j)).collect();
        check_keys(&self.rewards, &keys, "reward")?;
        let rewards = cg
            .edges()
            .iter()
            .zip(&keys)
            .map(|(&(i, j), key)| {
                let dims = (self.states, self.actions[i], self.actions[j]);
                let values = flatten_rewards(key, &self.rewards[key], dims)?;
                EdgeTable::new((i, j), dims.0, dims.1, dims.2, 1, values)
            })
            .collect::<Result<Vec<_>>>()?;
        let transitions = match &self.transitions {
            None => None,
            Some(map) => {
                check_keys(map, &keys, "transition")?;
                Some(
                    cg.edges()
                        .iter()
                        .zip(&keys)
                        .map(|(&(i, j), key)| {
                            let dims = (self.states, self.actions[i], self.actions[j]);
                            let values = flatten_transitions(key, &map[key], dims)?;
                            EdgeTable::new((i, j), dims.0, dims.1, dims.2, dims.0, values)
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        MarkovGame::new(cg, self.states, self.actions, self.gamma, rewards, transitions)
    }

    pub fn from_game(game: &MarkovGame) -> Self {
        let s = game.state_count();
        let reward_doc = |t: &EdgeTable| -> Vec<Vec<Vec<f64>>> {
            let (_, rows, cols, _) = t.dims();
            (0..s)
                .map(|st| (0..rows).map(|r| (0..cols).map(|c| t.get(st, r, c)).collect()).collect())
                .collect()
        };
        let transition_doc = |t: &EdgeTable| -> Vec<Vec<Vec<Vec<f64>>>> {
            let (_, rows, cols, _) = t.dims();
            (0..s)
                .map(|st| {
                    (0..rows)
                        .map(|r| (0..cols).map(|c| t.slice(st, r, c).to_vec()).collect())
                        .collect()
                })
                .collect()
        };
        let key = |t: &EdgeTable| edge_key(t.edge().0, t.edge().1);
        Self {
            n_agents: game.agent_count(),
            actions: game.action_counts().to_vec(),
            states: s,
            gamma: game.gamma(),
            cg_edges: game.cg().edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            rewards: game.rewards().iter().map(|t| (key(t), reward_doc(t))).collect(),
            transitions: game
                .transitions()
                .map(|ts| ts.iter().map(|t| (key(t), transition_doc(t))).collect()),
        }
    }
}

/// Parses and validates a game document.
pub fn game_from_json(text: &str) -> Result<MarkovGame> {
    let doc: GameDocument = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            Error::Schema(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    })?;
    doc.into_game()
}

pub fn game_to_json(game: &MarkovGame) -> String {
    serde_json::to_string_pretty(&GameDocument::from_game(game)).expect("game documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin_instance;

    #[test]
    fn builtin_round_trips() {
        for name in crate::game::BUILTIN_NAMES {
            let game = builtin_instance(name).unwrap();
            let text = game_to_json(&game);
            assert_eq!(game_from_json(&text).unwrap(), game, "{name}");
        }
    }

    #[test]
    fn missing_edge_table_is_named() {
        let text = r#"{"n_agents": 3, "actions": [2,2,2], "states": 1, "gamma": 0.0,
            "cg_edges": [[1,2],[2,3]], "rewards": {"1-2": [[[1,0],[0,1]]]}}"#;
        match game_from_json(text) {
            Err(Error::Schema(msg)) => assert!(msg.contains("2-3"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"n_agents": 2, "actions": [1,1], "states": 1, "gamma": 0.0,
            "cg_edges": [], "rewards": {}, "colour": "red"}"#;
        assert!(matches!(game_from_json(text), Err(Error::Schema(_))));
        let text = r#"{"n_agents": 2, "actions": [1,1], "states": 1, "gamma": 0.0,
            "cg_edges": [], "rewards": {"1-2": [[[0]]]}}"#;
        assert!(matches!(game_from_json(text), Err(Error::Schema(_))));
    }

    #[test]
    fn scientific_notation_and_malformed_json() {
        let text = r#"{"n_agents": 2, "actions": [1,1], "states": 1, "gamma": 0e0,
            "cg_edges": [[1,2]], "rewards": {"1-2": [[[2.5E-1]]]}}"#;
        let g = game_from_json(text).unwrap();
        assert_eq!(g.global_reward(0, &[0, 0]).unwrap(), 0.25);
        assert!(matches!(game_from_json("{ not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn transition_sum_violation_cites_state_and_action() {
        let text = r#"{"n_agents": 2, "actions": [1,2], "states": 2, "gamma": 0.5,
            "cg_edges": [[1,2]], "rewards": {"1-2": [[[0,0]],[[0,0]]]},
            "transitions": {"1-2": [[[[0.5,0.5],[0.5,0.5]]], [[[1.0,0.0],[0.4,0.5]]]]}}"#;
        match game_from_json(text) {
            Err(Error::InvalidTransition { state, action, .. }) => {
                assert_eq!(state, 1);
                assert_eq!(action, vec![0, 1]);
            }
            other => panic!("expected transition error, got {other:?}"),
        }
    }

    #[test]
    fn bad_shape_and_edges() {
        let text = r#"{"n_agents": 2, "actions": [2,2], "states": 1, "gamma": 0.0,
            "cg_edges": [[1,2]], "rewards": {"1-2": [[[0,0]]]}}"#;
        assert!(matches!(game_from_json(text), Err(Error::Schema(_))));
        let text = r#"{"n_agents": 2, "actions": [1,1], "states": 1, "gamma": 0.0,
            "cg_edges": [[2,1]], "rewards": {}}"#;
        assert!(matches!(game_from_json(text), Err(Error::Schema(_))));
        let text = r#"{"n_agents": 2, "actions": [1,1], "states": 1, "gamma": 0.0,
            "cg_edges": [[1,3]], "rewards": {}}"#;
        assert!(matches!(game_from_json(text), Err(Error::AgentOutOfRange { .. })));
    }
}
