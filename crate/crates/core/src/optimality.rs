//! Solution-concept checks for deterministic policies.
//!
//! All three compare values with an absolute slack of [`OPTIMALITY_TOL`].

use crate::dp::{best_response_value, policy_evaluation, q_value};
use crate::error::{Error, Result};
use crate::game::MarkovGame;
use crate::policy::ActionDependentPolicy;

pub const OPTIMALITY_TOL: f64 = 1e-9;

/// True iff no table entry of any agent has an action that strictly raises
/// `Q^π(s, ·)` when the agent and its parents are overridden and everyone
/// else completes the joint action through the policy.
pub fn is_gd_locally_optimal(game: &MarkovGame, policy: &ActionDependentPolicy) -> Result<bool> {
    let v = policy_evaluation(game, policy)?;
    let n = policy.agent_count();
    let mut tuple = Vec::new();
    for agent in 0..n {
        let parents = policy.adg().parents(agent);
        for s in 0..policy.state_count() {
            for t in 0..policy.tuple_count(agent) {
                policy.decode_tuple(agent, t, &mut tuple);
                let mut fixed = vec![None; n];
                for (&p, &a) in parents.iter().zip(&tuple) {
                    fixed[p] = Some(a);
                }
                let mut q = |ai: usize| -> Result<f64> {
                    fixed[agent] = Some(ai);
                    let joint = policy.complete_with_overrides(s, &fixed)?;
                    q_value(game, &v, s, &joint)
                };
                let current = q(policy.action(agent, s, &tuple)?)?;
                for ai in 0..policy.action_counts()[agent] {
                    if q(ai)? > current + OPTIMALITY_TOL {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

fn require_independent(policy: &ActionDependentPolicy) -> Result<()> {
    if policy.adg().is_empty() {
        Ok(())
    } else {
        Err(Error::NotIndependent)
    }
}

/// True iff no single agent gains from a one-step deviation in any state,
/// measured by `Q^π`.
pub fn is_agent_by_agent_optimal(game: &MarkovGame, policy: &ActionDependentPolicy) -> Result<bool> {
    require_independent(policy)?;
    let v = policy_evaluation(game, policy)?;
    for s in 0..game.state_count() {
        let joint = policy.rollout(s);
        let current = q_value(game, &v, s, &joint)?;
        for agent in 0..game.agent_count() {
            let mut a = joint.clone();
            for ai in 0..game.action_counts()[agent] {
                a[agent] = ai;
                if q_value(game, &v, s, &a)? > current + OPTIMALITY_TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// True iff no agent's best-response value exceeds `V^π` at any state.
pub fn is_nash(game: &MarkovGame, policy: &ActionDependentPolicy) -> Result<bool> {
    require_independent(policy)?;
    let v = policy_evaluation(game, policy)?;
    let others: Vec<Vec<usize>> = (0..game.state_count()).map(|s| policy.rollout(s)).collect();
    for agent in 0..game.agent_count() {
        let best = best_response_value(game, &others, agent)?;
        if best.as_slice().iter().zip(v.as_slice()).any(|(b, v)| *b > v + OPTIMALITY_TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}
