//! Tabular Markov games whose rewards and transitions decompose over the
//! edges of a coordination graph.
//!
//! A polymatrix game is the special case with one state, `gamma = 0` and no
//! transition tables.

mod document;
mod instances;
pub mod random;

pub use document::{game_from_json, game_to_json, GameDocument};
pub use instances::{builtin_instance, BUILTIN_NAMES};

use crate::error::{Error, Result};
use crate::graph::CoordinationGraph;
use crate::joint::{JointActionSpace, DEFAULT_ENUM_CAP};
use crate::value::ValueTable;

/// Tolerance on the row sums of the aggregate transition kernel.
pub const TRANSITION_SUM_TOL: f64 = 1e-9;
/// Most negative aggregate transition entry still treated as zero.
pub const TRANSITION_NEG_TOL: f64 = 1e-12;

/// Values attached to one CG edge `(i, j)`, `i < j`, laid out as
/// `[state][a_i][a_j][inner]` where `inner` is 1 for rewards and the
/// number of states for transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTable {
    edge: (usize, usize),
    states: usize,
    rows: usize,
    cols: usize,
    inner: usize,
    values: Vec<f64>,
}

impl EdgeTable {
    pub fn new(edge: (usize, usize), states: usize, rows: usize, cols: usize, inner: usize, values: Vec<f64>) -> Result<Self> {
        let expected = states * rows * cols * inner;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "edge {}-{}: expected {expected} entries, got {}",
                edge.0 + 1,
                edge.1 + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema(format!(
                "edge {}-{}: table contains a non-finite entry",
                edge.0 + 1,
                edge.1 + 1
            )));
        }
        Ok(Self {
            edge,
            states,
            rows,
            cols,
            inner,
            values,
        })
    }

    pub fn edge(&self) -> (usize, usize) {
        self.edge
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.states, self.rows, self.cols, self.inner)
    }

    #[inline]
    fn offset(&self, s: usize, ai: usize, aj: usize) -> usize {
        ((s * self.rows + ai) * self.cols + aj) * self.inner
    }

    /// Scalar entry of a reward-shaped table.
    #[inline]
    pub fn get(&self, s: usize, ai: usize, aj: usize) -> f64 {
        self.values[self.offset(s, ai, aj)]
    }

    /// Inner slice (the next-state row for transition tables).
    pub fn slice(&self, s: usize, ai: usize, aj: usize) -> &[f64] {
        let o = self.offset(s, ai, aj);
        &self.values[o..o + self.inner]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovGame {
    cg: CoordinationGraph,
    state_count: usize,
    action_counts: Vec<usize>,
    gamma: f64,
    rewards: Vec<EdgeTable>,
    transitions: Option<Vec<EdgeTable>>,
}

impl MarkovGame {
    /// Validates and assembles a game. `rewards` (and `transitions`, when
    /// present) are aligned with `cg.edges()`.
    pub fn new(
        cg: CoordinationGraph,
        state_count: usize,
        action_counts: Vec<usize>,
        gamma: f64,
        rewards: Vec<EdgeTable>,
        transitions: Option<Vec<EdgeTable>>,
    ) -> Result<Self> {
        let n = cg.agent_count();
        if action_counts.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} action counts for {n} agents",
                action_counts.len()
            )));
        }
        if let Some(i) = action_counts.iter().position(|&c| c == 0) {
            return Err(Error::Schema(format!("agent {} has no actions", i + 1)));
        }
        if state_count == 0 {
            return Err(Error::Schema("state count must be positive".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Schema(format!("gamma {gamma} outside [0, 1)")));
        }
        let check_tables = |tables: &[EdgeTable], inner: usize, what: &str| -> Result<()> {
            if tables.len() != cg.edge_count() {
                return Err(Error::ShapeMismatch(format!(
                    "{} {what} tables for {} edges",
                    tables.len(),
                    cg.edge_count()
                )));
            }
            for (table, &(i, j)) in tables.iter().zip(cg.edges()) {
                let want = (state_count, action_counts[i], action_counts[j], inner);
                if table.edge != (i, j) || table.dims() != want {
                    return Err(Error::ShapeMismatch(format!(
                        "{what} table for edge {}-{} has shape {:?}, expected {:?}",
                        i + 1,
                        j + 1,
                        table.dims(),
                        want
                    )));
                }
            }
            Ok(())
        };
        check_tables(&rewards, 1, "reward")?;
        match &transitions {
            Some(t) => check_tables(t, state_count, "transition")?,
            None if state_count != 1 => {
                return Err(Error::Schema(
                    "games without transition tables must have exactly one state".into(),
                ))
            }
            None => {}
        }
        let game = Self {
            cg,
            state_count,
            action_counts,
            gamma,
            rewards,
            transitions,
        };
        game.validate_transitions()?;
        Ok(game)
    }

    /// Single-state, `gamma = 0` game with payoff matrices `payoffs[e][a_i][a_j]`
    /// aligned with `cg.edges()`.
    pub fn polymatrix(cg: CoordinationGraph, action_counts: Vec<usize>, payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if payoffs.len() != cg.edge_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} payoff matrices for {} edges",
                payoffs.len(),
                cg.edge_count()
            )));
        }
        let rewards = cg
            .edges()
            .iter()
            .zip(payoffs)
            .map(|(&(i, j), m)| {
                let rows = action_counts.get(i).copied().unwrap_or(0);
                let cols = action_counts.get(j).copied().unwrap_or(0);
                if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                    return Err(Error::ShapeMismatch(format!(
                        "payoff matrix for edge {}-{} must be {rows}x{cols}",
                        i + 1,
                        j + 1
                    )));
                }
                EdgeTable::new((i, j), 1, rows, cols, 1, m.into_iter().flatten().collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cg, 1, action_counts, 0.0, rewards, None)
    }

    fn validate_transitions(&self) -> Result<()> {
        if self.transitions.is_none() {
            return Ok(());
        }
        let space = self.joint_space();
        let count = space.checked_size(DEFAULT_ENUM_CAP)?;
        let mut a = vec![0; self.agent_count()];
        for s in 0..self.state_count {
            for idx in 0..count {
                space.decode(idx, &mut a);
                self.aggregate_transition(s, &a)?;
            }
        }
        Ok(())
    }

    pub fn cg(&self) -> &CoordinationGraph {
        &self.cg
    }

    pub fn agent_count(&self) -> usize {
        self.cg.agent_count()
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rewards(&self) -> &[EdgeTable] {
        &self.rewards
    }

    pub fn transitions(&self) -> Option<&[EdgeTable]> {
        self.transitions.as_deref()
    }

    pub fn is_polymatrix(&self) -> bool {
        self.state_count == 1 && self.gamma == 0.0 && self.transitions.is_none()
    }

    pub fn joint_space(&self) -> JointActionSpace {
        JointActionSpace::new(&self.action_counts)
    }

    fn check_index(&self, s: usize, a: &[usize]) -> Result<()> {
        if s >= self.state_count {
            return Err(Error::IndexOutOfRange(format!(
                "state {s} (game has {} states)",
                self.state_count
            )));
        }
        if !self.joint_space().contains(a) {
            return Err(Error::IndexOutOfRange(format!("joint action {a:?}")));
        }
        Ok(())
    }

    /// `r(s, a) = Σ_{(i,j) ∈ E_c} r_ij(s, a_i, a_j)`.
    pub fn global_reward(&self, s: usize, a: &[usize]) -> Result<f64> {
        self.check_index(s, a)?;
        Ok(self.reward_unchecked(s, a))
    }

    #[inline]
    pub(crate) fn reward_unchecked(&self, s: usize, a: &[usize]) -> f64 {
        self.rewards
            .iter()
            .map(|t| t.get(s, a[t.edge.0], a[t.edge.1]))
            .sum()
    }

    /// Edge-summed next-state distribution `P(·|s, a)`.
    ///
    /// Negative dust down to `-1e-12` is clamped to zero and a row sum within
    /// `1e-9` of one is renormalised; anything else is a validation error.
    pub fn aggregate_transition(&self, s: usize, a: &[usize]) -> Result<Vec<f64>> {
        let tables = self.transitions.as_ref().ok_or(Error::MissingTransitions)?;
        self.check_index(s, a)?;
        let mut dist = vec![0.0; self.state_count];
        for t in tables {
            for (acc, p) in dist.iter_mut().zip(t.slice(s, a[t.edge.0], a[t.edge.1])) {
                *acc += p;
            }
        }
        let invalid = |reason: String| Error::InvalidTransition {
            state: s,
            action: a.to_vec(),
            reason,
        };
        for (next, p) in dist.iter_mut().enumerate() {
            if *p < -TRANSITION_NEG_TOL {
                return Err(invalid(format!("P(s'={next}) = {p} is negative")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > TRANSITION_SUM_TOL {
            return Err(invalid(format!("probabilities sum to {sum}")));
        }
        dist.iter_mut().for_each(|p| *p /= sum);
        Ok(dist)
    }

    /// Edge-local action values `Q_ij^V = r_ij + γ Σ_{s'} P_ij(s'|s,a_i,a_j) V(s')`.
    ///
    /// Their edge sum equals the dense `Q^V`. Games without transition
    /// tables only support this when `gamma = 0`.
    pub fn local_q_tables(&self, v: &ValueTable) -> Result<Vec<EdgeTable>> {
        if v.len() != self.state_count {
            return Err(Error::ShapeMismatch(format!(
                "value table has {} states, game has {}",
                v.len(),
                self.state_count
            )));
        }
        let transitions = match (&self.transitions, self.gamma) {
            (_, 0.0) => return Ok(self.rewards.clone()),
            (None, _) => return Err(Error::MissingTransitions),
            (Some(t), _) => t,
        };
        let v = v.as_slice();
        Ok(self
            .rewards
            .iter()
            .zip(transitions)
            .map(|(r, p)| {
                let mut values = r.values.clone();
                for s in 0..r.states {
                    for ai in 0..r.rows {
                        for aj in 0..r.cols {
                            let future: f64 = p.slice(s, ai, aj).iter().zip(v).map(|(p, v)| p * v).sum();
                            values[r.offset(s, ai, aj)] += self.gamma * future;
                        }
                    }
                }
                EdgeTable { values, ..r.clone() }
            })
            .collect())
    }
}

/// A [`MarkovGame`] known to be a single-step polymatrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame(MarkovGame);

impl PolymatrixGame {
    pub fn new(cg: CoordinationGraph, action_counts: Vec<usize>, payoffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        MarkovGame::polymatrix(cg, action_counts, payoffs).map(Self)
    }

    /// Payoff `r_ij(a_i, a_j)` for the edge with index `edge` in `cg().edges()`.
    pub fn payoff(&self, edge: usize, ai: usize, aj: usize) -> f64 {
        self.0.rewards[edge].get(0, ai, aj)
    }

    pub fn game(&self) -> &MarkovGame {
        &self.0
    }

    pub fn into_game(self) -> MarkovGame {
        self.0
    }
}

impl TryFrom<MarkovGame> for PolymatrixGame {
    type Error = Error;

    fn try_from(game: MarkovGame) -> Result<Self> {
        if game.is_polymatrix() {
            Ok(Self(game))
        } else {
            Err(Error::InvalidArgument(
                "a polymatrix game needs one state, gamma = 0 and no transitions".into(),
            ))
        }
    }
}
