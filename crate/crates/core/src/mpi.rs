//! Action-dependent multi-agent policy iteration.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dp::{policy_evaluation, LocalQ};
use crate::error::{Error, Result};
use crate::game::MarkovGame;
use crate::policy::ActionDependentPolicy;
use crate::value::ValueTable;

/// Two Q-values count as tied when they differ by less than this multiple
/// of `1 + max |Q|`.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MpiStatus {
    Converged,
    CycleDetected,
    MaxSweeps,
}

impl MpiStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::CycleDetected => "cycle_detected",
            Self::MaxSweeps => "max_sweeps",
        }
    }
}

impl std::fmt::Display for MpiStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sweep: the policy `π^k` that was evaluated and how many table
/// entries the improvement step changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub values: ValueTable,
    pub policy_hash: u64,
    pub joint_actions: Vec<Vec<usize>>,
    pub changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdMpiTrace {
    /// Seed of the initial policy, when it was drawn at random.
    pub seed: Option<u64>,
    pub sweeps: Vec<SweepRecord>,
    pub status: MpiStatus,
    /// `V^π` and induced joint actions of the returned policy.
    pub final_values: ValueTable,
    pub final_joint_actions: Vec<Vec<usize>>,
}

impl AdMpiTrace {
    pub fn sweep_count(&self) -> usize {
        self.sweeps.len()
    }

    /// Value tables in evaluation order, ending with the returned policy's.
    pub fn value_history(&self) -> impl Iterator<Item = &ValueTable> {
        self.sweeps.iter().map(|r| &r.values).chain(std::iter::once(&self.final_values))
    }

    /// Largest pointwise decrease between consecutive value tables (zero if
    /// the sequence never decreases).
    pub fn max_decrease(&self) -> f64 {
        let history: Vec<&ValueTable> = self.value_history().collect();
        history
            .windows(2)
            .flat_map(|w| w[0].as_slice().iter().zip(w[1].as_slice()).map(|(a, b)| a - b))
            .fold(0.0, f64::max)
    }
}

fn induced(policy: &ActionDependentPolicy) -> Vec<Vec<usize>> {
    (0..policy.state_count()).map(|s| policy.rollout(s)).collect()
}

/// Improves every table entry of the agent at `position` against `q`,
/// reading earlier agents from their already-updated tables. Returns the
/// new table and the number of changed entries.
///
/// Candidates are compared on the edges touching the agent or anyone after
/// it; the remaining terms are common to every candidate. `slack` is the
/// absolute tie tolerance.
fn improve_agent(policy: &ActionDependentPolicy, q: &LocalQ, position: usize, slack: f64) -> (Vec<usize>, usize) {
    let adg = policy.adg();
    let agent = adg.order()[position];
    let actions = policy.action_counts()[agent];
    let parents = adg.parents(agent);
    let radices: Vec<usize> = parents.iter().map(|&p| policy.action_counts()[p]).collect();
    let tuples = policy.tuple_count(agent);
    let n = policy.agent_count();
    let varying: Vec<usize> = (0..q.tables().len())
        .filter(|&e| {
            let (i, j) = q.tables()[e].edge();
            adg.position(i) >= position || adg.position(j) >= position
        })
        .collect();
    // Earlier agents that are not parents still act, reading the overrides.
    let free: Vec<usize> = adg.order()[..position]
        .iter()
        .copied()
        .filter(|a| parents.binary_search(a).is_err())
        .collect();
    let old = policy.table(agent);
    let mut table = old.to_vec();
    let mut changes = 0;
    let mut tuple = vec![0; parents.len()];
    let mut joint = vec![0; n];
    let mut values = vec![0.0; actions];
    for s in 0..policy.state_count() {
        tuple.iter_mut().for_each(|x| *x = 0);
        for t in 0..tuples {
            for (&p, &a) in parents.iter().zip(&tuple) {
                joint[p] = a;
            }
            policy.complete_agents(s, &free, &mut joint);
            for (ai, slot) in values.iter_mut().enumerate() {
                joint[agent] = ai;
                policy.complete_into(s, &[], &mut joint, position + 1);
                *slot = q.sum_edges(s, &joint, &varying);
            }
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let entry = s * tuples + t;
            let incumbent = old[entry];
            if values[incumbent] < best - slack {
                table[entry] = values.iter().position(|&v| v >= best - slack).expect("a maximiser exists");
                changes += 1;
            }
            // odometer over parent tuples, last parent fastest
            for (slot, &r) in tuple.iter_mut().zip(&radices).rev() {
                *slot += 1;
                if *slot < r {
                    break;
                }
                *slot = 0;
            }
        }
    }
    (table, changes)
}

/// Runs policy iteration from `init` on its own action dependency graph.
///
/// Each sweep evaluates `π^k` exactly, then improves agents one at a time in
/// decision order. An entry keeps its current action whenever that action
/// is still a maximiser; otherwise the smallest maximising action is taken.
/// Stops when a sweep changes nothing, when a policy repeats, or after
/// `max_sweeps` sweeps.
pub fn ad_mpi(game: &MarkovGame, init: ActionDependentPolicy, max_sweeps: usize) -> Result<(ActionDependentPolicy, AdMpiTrace)> {
    init.check_game(game)?;
    if max_sweeps == 0 {
        return Err(Error::InvalidArgument("max_sweeps must be at least 1".into()));
    }
    let mut policy = init;
    let mut seen = HashSet::from([policy.snapshot_hash()]);
    let mut sweeps = Vec::new();
    let status = loop {
        let values = policy_evaluation(game, &policy)?;
        let q = LocalQ::new(game, &values)?;
        let slack = TIE_TOL * (1.0 + q.magnitude_bound());
        let hash = policy.snapshot_hash();
        let joint_actions = induced(&policy);
        let mut changes = 0;
        for position in 0..policy.agent_count() {
            let (table, changed) = improve_agent(&policy, &q, position, slack);
            if changed > 0 {
                policy.set_table(policy.adg().order()[position], table);
                changes += changed;
            }
        }
        sweeps.push(SweepRecord {
            values,
            policy_hash: hash,
            joint_actions,
            changes,
        });
        if changes == 0 {
            break MpiStatus::Converged;
        }
        if !seen.insert(policy.snapshot_hash()) {
            break MpiStatus::CycleDetected;
        }
        if sweeps.len() >= max_sweeps {
            break MpiStatus::MaxSweeps;
        }
    };
    let final_values = match status {
        MpiStatus::Converged => sweeps.last().expect("at least one sweep").values.clone(),
        _ => policy_evaluation(game, &policy)?,
    };
    let final_joint_actions = induced(&policy);
    Ok((
        policy,
        AdMpiTrace {
            seed: None,
            sweeps,
            status,
            final_values,
            final_joint_actions,
        },
    ))
}

/// Draws a keyed random initial policy on `adg` and runs [`ad_mpi`],
/// recording the seed in the trace.
pub fn ad_mpi_seeded(
    game: &MarkovGame,
    adg: crate::graph::ActionDependencyGraph,
    seed: u64,
    max_sweeps: usize,
) -> Result<(ActionDependentPolicy, AdMpiTrace)> {
    if adg.agent_count() != game.agent_count() {
        return Err(Error::SizeMismatch(adg.agent_count(), game.agent_count()));
    }
    let init = ActionDependentPolicy::random(adg, game.state_count(), game.action_counts(), seed)?;
    let (policy, mut trace) = ad_mpi(game, init, max_sweeps)?;
    trace.seed = Some(seed);
    Ok((policy, trace))
}
