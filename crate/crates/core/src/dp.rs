//! Exact tabular dynamic programming over joint actions.
//!
//! Every routine that maximises over the joint action space enumerates it
//! explicitly and refuses to run past an enumeration cap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{EdgeTable, MarkovGame};
use crate::policy::ActionDependentPolicy;
use crate::value::{QTable, ValueTable};

/// Largest state count solved by direct factorisation in policy evaluation.
pub const DIRECT_SOLVE_MAX_STATES: usize = 2_000;
/// Sup-norm residual at which iterative policy evaluation stops.
pub const ITERATIVE_EVAL_TOL: f64 = 1e-12;

fn check_values(game: &MarkovGame, v: &ValueTable) -> Result<()> {
    if v.len() != game.state_count() {
        return Err(Error::ShapeMismatch(format!(
            "value table has {} states, game has {}",
            v.len(),
            game.state_count()
        )));
    }
    Ok(())
}

/// `Σ_{s'} P(s'|s,a) V(s')`; games without transitions self-loop.
fn expected_next_value(game: &MarkovGame, v: &ValueTable, s: usize, a: &[usize]) -> Result<f64> {
    if game.transitions().is_none() {
        return Ok(v[0]);
    }
    let dist = game.aggregate_transition(s, a)?;
    Ok(dist.iter().zip(v.as_slice()).map(|(p, v)| p * v).sum())
}

/// `Q^V(s,a) = r(s,a) + γ Σ_{s'} P(s'|s,a) V(s')` at one joint action.
pub fn q_value(game: &MarkovGame, v: &ValueTable, s: usize, a: &[usize]) -> Result<f64> {
    check_values(game, v)?;
    let r = game.global_reward(s, a)?;
    if game.gamma() == 0.0 {
        return Ok(r);
    }
    Ok(r + game.gamma() * expected_next_value(game, v, s, a)?)
}

/// Dense `Q^V` over every state and joint action.
pub fn q_from_v(game: &MarkovGame, v: &ValueTable, cap: u64) -> Result<QTable> {
    check_values(game, v)?;
    let space = game.joint_space();
    let count = space.checked_size(cap)?;
    let mut values = Vec::with_capacity(count * game.state_count());
    let mut a = vec![0; game.agent_count()];
    for s in 0..game.state_count() {
        a.iter_mut().for_each(|x| *x = 0);
        for _ in 0..count {
            let mut q = game.reward_unchecked(s, &a);
            if game.gamma() != 0.0 {
                q += game.gamma() * expected_next_value(game, v, s, &a)?;
            }
            values.push(q);
            space.advance(&mut a);
        }
    }
    Ok(QTable::from_parts(count, values))
}

/// `T_π V(s) = Q^V(s, rollout(π, s))`.
pub fn bellman_policy(game: &MarkovGame, policy: &ActionDependentPolicy, v: &ValueTable) -> Result<ValueTable> {
    policy.check_game(game)?;
    let values = (0..game.state_count())
        .map(|s| q_value(game, v, s, &policy.rollout(s)))
        .collect::<Result<Vec<_>>>()?;
    ValueTable::new(values)
}

/// `TV(s) = max_a Q^V(s, a)` by exhaustive enumeration.
pub fn bellman_optimal(game: &MarkovGame, v: &ValueTable, cap: u64) -> Result<ValueTable> {
    check_values(game, v)?;
    if game.transitions().is_none() {
        let best = max_reward(game, 0, cap)?;
        return Ok(ValueTable::from_vec_unchecked(vec![best + game.gamma() * v[0]]));
    }
    let q = q_from_v(game, v, cap)?;
    Ok(ValueTable::from_vec_unchecked(
        (0..game.state_count())
            .map(|s| q.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect(),
    ))
}

fn max_reward(game: &MarkovGame, s: usize, cap: u64) -> Result<f64> {
    let space = game.joint_space();
    let count = space.checked_size(cap)?;
    let mut a = vec![0; game.agent_count()];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..count {
        best = best.max(game.reward_unchecked(s, &a));
        space.advance(&mut a);
    }
    Ok(best)
}

/// Solves `(I - γ P) V = r` for a fixed deterministic decision rule.
fn solve_linear(transition: &[Vec<f64>], reward: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let n = reward.len();
    let a = DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - gamma * transition[i][j]);
    let b = DVector::from_column_slice(reward);
    let x = a.lu().solve(&b).ok_or(Error::Singular)?;
    Ok(x.iter().copied().collect())
}

fn iterate_linear(transition: &[Vec<f64>], reward: &[f64], gamma: f64) -> Vec<f64> {
    let mut v = vec![0.0; reward.len()];
    loop {
        let next: Vec<f64> = transition
            .iter()
            .zip(reward)
            .map(|(row, r)| r + gamma * row.iter().zip(&v).map(|(p, x)| p * x).sum::<f64>())
            .collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < ITERATIVE_EVAL_TOL {
            return v;
        }
    }
}

fn evaluate_rule(transition: &[Vec<f64>], reward: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if reward.len() <= DIRECT_SOLVE_MAX_STATES {
        solve_linear(transition, reward, gamma)
    } else {
        Ok(iterate_linear(transition, reward, gamma))
    }
}

/// Reward and transition rows of the joint action chosen in each state.
fn induced_chain(game: &MarkovGame, actions: &[Vec<usize>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let reward = actions
        .iter()
        .enumerate()
        .map(|(s, a)| game.global_reward(s, a))
        .collect::<Result<Vec<_>>>()?;
    let transition = if game.transitions().is_none() {
        vec![vec![1.0]]
    } else {
        actions
            .iter()
            .enumerate()
            .map(|(s, a)| game.aggregate_transition(s, a))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((reward, transition))
}

/// `V^π`, the fixed point of `T_π`.
///
/// `gamma = 0` returns the immediate reward; otherwise the linear system is
/// factorised directly (or iterated for very large state spaces).
pub fn policy_evaluation(game: &MarkovGame, policy: &ActionDependentPolicy) -> Result<ValueTable> {
    policy.check_game(game)?;
    let actions: Vec<Vec<usize>> = (0..game.state_count()).map(|s| policy.rollout(s)).collect();
    evaluate_joint_actions(game, &actions)
}

/// Value of playing `actions[s]` in every state `s`.
pub fn evaluate_joint_actions(game: &MarkovGame, actions: &[Vec<usize>]) -> Result<ValueTable> {
    if actions.len() != game.state_count() {
        return Err(Error::ShapeMismatch("one joint action per state required".into()));
    }
    let (reward, transition) = induced_chain(game, actions)?;
    if game.gamma() == 0.0 {
        return ValueTable::new(reward);
    }
    ValueTable::new(evaluate_rule(&transition, &reward, game.gamma())?)
}

/// Iterates `T` from `V = 0` until successive iterates differ by less than
/// `tol (1 - γ) / (2γ)`, which guarantees `‖TV - V‖∞ < tol`. With `γ = 0`
/// a single application is exact.
pub fn value_iteration(game: &MarkovGame, tol: f64, cap: u64) -> Result<ValueTable> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let gamma = game.gamma();
    let mut v = ValueTable::zeros(game.state_count());
    if gamma == 0.0 {
        return bellman_optimal(game, &v, cap);
    }
    let threshold = tol * (1.0 - gamma) / (2.0 * gamma);
    if game.transitions().is_none() {
        // self-loop: TV = m + γV, so iterate the scalar directly
        let m = max_reward(game, 0, cap)?;
        let mut x = 0.0;
        loop {
            let next = m + gamma * x;
            let done = (next - x).abs() < threshold;
            x = next;
            if done {
                return ValueTable::new(vec![x]);
            }
        }
    }
    loop {
        let next = bellman_optimal(game, &v, cap)?;
        let diff = next.sup_distance(&v);
        v = next;
        if diff < threshold {
            return Ok(v);
        }
    }
}

/// `argmax_a Q^V(s, a)`, lexicographically smallest among ties.
pub fn greedy_joint_action(game: &MarkovGame, v: &ValueTable, s: usize, cap: u64) -> Result<Vec<usize>> {
    let all = maximizing_joint_actions(game, v, s, 0.0, cap)?;
    Ok(all.into_iter().next().expect("joint action space is non-empty"))
}

/// All joint actions within `tol` of `max_a Q^V(s, a)`, in lexicographic order.
pub fn maximizing_joint_actions(game: &MarkovGame, v: &ValueTable, s: usize, tol: f64, cap: u64) -> Result<Vec<Vec<usize>>> {
    check_values(game, v)?;
    if s >= game.state_count() {
        return Err(Error::IndexOutOfRange(format!("state {s}")));
    }
    let space = game.joint_space();
    let count = space.checked_size(cap)?;
    let mut a = vec![0; game.agent_count()];
    let mut q = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = game.reward_unchecked(s, &a);
        if game.gamma() != 0.0 {
            x += game.gamma() * expected_next_value(game, v, s, &a)?;
        }
        q.push(x);
        space.advance(&mut a);
    }
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(q.iter()
        .enumerate()
        .filter(|(_, &x)| x >= best - tol)
        .map(|(i, _)| {
            space.decode(i, &mut a);
            a.clone()
        })
        .collect())
}

/// Optimal value of `agent` when every other agent plays the fixed joint
/// action `others[s]` (its own entry is ignored). Solved by policy
/// iteration with exact evaluation.
pub fn best_response_value(game: &MarkovGame, others: &[Vec<usize>], agent: usize) -> Result<ValueTable> {
    let states = game.state_count();
    if others.len() != states || agent >= game.agent_count() {
        return Err(Error::ShapeMismatch("best response inputs".into()));
    }
    let actions = game.action_counts()[agent];
    let joint = |s: usize, ai: usize| {
        let mut a = others[s].clone();
        a[agent] = ai;
        a
    };
    let mut reward = vec![vec![0.0; actions]; states];
    let mut transition = vec![vec![Vec::new(); actions]; states];
    for s in 0..states {
        for ai in 0..actions {
            let a = joint(s, ai);
            reward[s][ai] = game.global_reward(s, &a)?;
            transition[s][ai] = match game.transitions() {
                None => vec![1.0],
                Some(_) => game.aggregate_transition(s, &a)?,
            };
        }
    }
    let gamma = game.gamma();
    if gamma == 0.0 {
        return ValueTable::new(reward.iter().map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect());
    }
    let mut rule = vec![0usize; states];
    loop {
        let p: Vec<Vec<f64>> = (0..states).map(|s| transition[s][rule[s]].clone()).collect();
        let r: Vec<f64> = (0..states).map(|s| reward[s][rule[s]]).collect();
        let v = evaluate_rule(&p, &r, gamma)?;
        let mut changed = false;
        for s in 0..states {
            let q = |ai: usize| reward[s][ai] + gamma * transition[s][ai].iter().zip(&v).map(|(p, x)| p * x).sum::<f64>();
            let incumbent = q(rule[s]);
            let (best, best_q) = (0..actions)
                .map(|ai| (ai, q(ai)))
                .fold((rule[s], incumbent), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best_q > incumbent + 1e-12 * (1.0 + incumbent.abs()) {
                rule[s] = best;
                changed = true;
            }
        }
        if !changed {
            return ValueTable::new(v);
        }
    }
}

/// `Q^V(s, a)` as a sum of edge-local tables plus a per-state constant.
///
/// Decomposable games put everything in the tables. Games without
/// transitions and `γ > 0` self-loop, so `γ V(0)` becomes the constant.
#[derive(Debug, Clone)]
pub(crate) struct LocalQ {
    tables: Vec<EdgeTable>,
    offsets: Vec<f64>,
}

impl LocalQ {
    pub(crate) fn new(game: &MarkovGame, v: &ValueTable) -> Result<Self> {
        check_values(game, v)?;
        if game.transitions().is_none() && game.gamma() > 0.0 {
            return Ok(Self {
                tables: game.rewards().to_vec(),
                offsets: vec![game.gamma() * v[0]],
            });
        }
        Ok(Self {
            tables: game.local_q_tables(v)?,
            offsets: vec![0.0; game.state_count()],
        })
    }

    #[cfg(test)]
    pub(crate) fn eval(&self, s: usize, a: &[usize]) -> f64 {
        self.offsets[s] + self.tables.iter().map(|t| t.get(s, a[t.edge().0], a[t.edge().1])).sum::<f64>()
    }

    pub(crate) fn tables(&self) -> &[EdgeTable] {
        &self.tables
    }

    /// Upper bound on `|Q(s, a)|` over all states and joint actions.
    pub(crate) fn magnitude_bound(&self) -> f64 {
        let offset = self.offsets.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        offset
            + self
                .tables
                .iter()
                .map(|t| t.values().iter().fold(0.0f64, |m, x| m.max(x.abs())))
                .sum::<f64>()
    }

    /// The listed edge terms without the offset.
    #[inline]
    pub(crate) fn sum_edges(&self, s: usize, a: &[usize], edges: &[usize]) -> f64 {
        edges
            .iter()
            .map(|&e| {
                let t = &self.tables[e];
                t.get(s, a[t.edge().0], a[t.edge().1])
            })
            .sum::<f64>()
    }
}
