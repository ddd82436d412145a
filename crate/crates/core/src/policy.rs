//! Deterministic action-dependent policies.
//!
//! Agent `i` holds a table mapping `(state, a_{N_d(i)})` to an action, where
//! the parent actions are listed in ascending agent order. Agents act in the
//! ADG's decision order, each reading the actions its parents already
//! emitted. With an empty ADG this is an ordinary independent policy.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::MarkovGame;
use crate::graph::ActionDependencyGraph;

/// Words reserved per table entry in the keyed initialisation stream.
const WORDS_PER_ENTRY: u128 = 4;
/// Words the generator computes per refill.
const BUFFERED_WORDS: u128 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDependentPolicy {
    adg: ActionDependencyGraph,
    state_count: usize,
    action_counts: Vec<usize>,
    /// Number of parent-action tuples per agent.
    combos: Vec<usize>,
    tables: Vec<Vec<usize>>,
}

impl ActionDependentPolicy {
    /// Validated dimensions with every entry set to action 0.
    fn shaped(adg: ActionDependencyGraph, state_count: usize, action_counts: &[usize]) -> Result<Self> {
        let n = adg.agent_count();
        if action_counts.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} action counts for {n} agents",
                action_counts.len()
            )));
        }
        if state_count == 0 || action_counts.contains(&0) {
            return Err(Error::ShapeMismatch("empty state or action set".into()));
        }
        let combos: Vec<usize> = (0..n)
            .map(|i| adg.parents(i).iter().map(|&p| action_counts[p]).product())
            .collect();
        let tables = combos.iter().map(|&c| vec![0; c * state_count]).collect();
        Ok(Self {
            adg,
            state_count,
            action_counts: action_counts.to_vec(),
            combos,
            tables,
        })
    }

    /// Builds a policy by evaluating `f(agent, state, parent_actions)` on
    /// every table entry.
    pub fn from_fn<F>(adg: ActionDependencyGraph, state_count: usize, action_counts: &[usize], mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, &[usize]) -> usize,
    {
        let mut policy = Self::shaped(adg, state_count, action_counts)?;
        let mut tuple = Vec::new();
        for i in 0..policy.agent_count() {
            for s in 0..state_count {
                for t in 0..policy.combos[i] {
                    policy.decode_tuple(i, t, &mut tuple);
                    let a = f(i, s, &tuple);
                    if a >= policy.action_counts[i] {
                        return Err(Error::IndexOutOfRange(format!(
                            "agent {} action {a} (has {} actions)",
                            i + 1,
                            policy.action_counts[i]
                        )));
                    }
                    policy.tables[i][s * policy.combos[i] + t] = a;
                }
            }
        }
        Ok(policy)
    }

    /// Every entry of agent `i` plays `actions[i]`.
    pub fn constant(adg: ActionDependencyGraph, state_count: usize, action_counts: &[usize], actions: &[usize]) -> Result<Self> {
        if actions.len() != adg.agent_count() {
            return Err(Error::ShapeMismatch("one action per agent required".into()));
        }
        Self::from_fn(adg, state_count, action_counts, |i, _, _| actions[i])
    }

    /// Independent policy playing `per_state[s]` in state `s`.
    pub fn independent(action_counts: &[usize], per_state: &[Vec<usize>]) -> Result<Self> {
        let adg = ActionDependencyGraph::empty(action_counts.len())?;
        if per_state.iter().any(|a| a.len() != action_counts.len()) {
            return Err(Error::ShapeMismatch("joint action length".into()));
        }
        Self::from_fn(adg, per_state.len(), action_counts, |i, s, _| per_state[s][i])
    }

    /// Uniformly random entries from a counter-based stream keyed by
    /// `(seed, agent, state, parent tuple)`, so each entry is independent of
    /// the order in which tables are filled.
    pub fn random(adg: ActionDependencyGraph, state_count: usize, action_counts: &[usize], seed: u64) -> Result<Self> {
        let mut policy = Self::shaped(adg, state_count, action_counts)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..policy.tables.len() {
            rng.set_stream(i as u64);
            let range = policy.action_counts[i] as u32;
            for (entry, slot) in policy.tables[i].iter_mut().enumerate() {
                let target = entry as u128 * WORDS_PER_ENTRY;
                let at = rng.get_word_pos();
                if at <= target && target - at < BUFFERED_WORDS {
                    // stepping inside the buffered block avoids regenerating it
                    for _ in at..target {
                        rng.next_u32();
                    }
                } else {
                    rng.set_word_pos(target);
                }
                *slot = rng.gen_range(0..range) as usize;
            }
        }
        Ok(policy)
    }

    /// Checks that the policy's dimensions match `game`.
    pub fn check_game(&self, game: &MarkovGame) -> Result<()> {
        if self.adg.agent_count() != game.agent_count()
            || self.state_count != game.state_count()
            || self.action_counts != game.action_counts()
        {
            return Err(Error::ShapeMismatch(format!(
                "policy ({} agents, {} states, actions {:?}) does not fit game ({} agents, {} states, actions {:?})",
                self.adg.agent_count(),
                self.state_count,
                self.action_counts,
                game.agent_count(),
                game.state_count(),
                game.action_counts()
            )));
        }
        Ok(())
    }

    pub fn adg(&self) -> &ActionDependencyGraph {
        &self.adg
    }

    pub fn agent_count(&self) -> usize {
        self.adg.agent_count()
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    /// Entries of agent `i`, laid out `[state][parent tuple]`.
    pub fn table(&self, agent: usize) -> &[usize] {
        &self.tables[agent]
    }

    pub fn tuple_count(&self, agent: usize) -> usize {
        self.combos[agent]
    }

    /// Parent actions of the `tuple`-th entry of an agent's per-state table.
    pub fn decode_tuple(&self, agent: usize, mut tuple: usize, out: &mut Vec<usize>) {
        let parents = self.adg.parents(agent);
        out.clear();
        out.resize(parents.len(), 0);
        for (slot, &p) in out.iter_mut().zip(parents).rev() {
            let r = self.action_counts[p];
            *slot = tuple % r;
            tuple /= r;
        }
    }

    /// Table index of `(state, parent actions read from a joint action)`.
    #[inline]
    pub(crate) fn entry_index(&self, agent: usize, state: usize, joint: &[usize]) -> usize {
        let tuple = self
            .adg
            .parents(agent)
            .iter()
            .fold(0, |acc, &p| acc * self.action_counts[p] + joint[p]);
        state * self.combos[agent] + tuple
    }

    /// Action of `agent` in `state` given its parents' actions (ascending).
    pub fn action(&self, agent: usize, state: usize, parent_actions: &[usize]) -> Result<usize> {
        let parents = self.adg.parents(agent);
        if state >= self.state_count || parent_actions.len() != parents.len() {
            return Err(Error::IndexOutOfRange(format!("entry of agent {}", agent + 1)));
        }
        let mut tuple = 0;
        for (&a, &p) in parent_actions.iter().zip(parents) {
            if a >= self.action_counts[p] {
                return Err(Error::IndexOutOfRange(format!("action {a} of agent {}", p + 1)));
            }
            tuple = tuple * self.action_counts[p] + a;
        }
        Ok(self.tables[agent][state * self.combos[agent] + tuple])
    }

    pub(crate) fn set_table(&mut self, agent: usize, table: Vec<usize>) {
        debug_assert_eq!(table.len(), self.tables[agent].len());
        self.tables[agent] = table;
    }

    /// Joint action produced by acting in decision order.
    pub fn rollout(&self, state: usize) -> Vec<usize> {
        let mut joint = vec![0; self.agent_count()];
        self.complete_into(state, &[], &mut joint, 0);
        joint
    }

    /// Acts in decision order, except that agents with `fixed[i] = Some(a)`
    /// emit `a` without consulting their table. Everyone else reads the
    /// actions already emitted, fixed or computed.
    pub fn complete_with_overrides(&self, state: usize, fixed: &[Option<usize>]) -> Result<Vec<usize>> {
        let n = self.agent_count();
        if fixed.len() != n {
            return Err(Error::ShapeMismatch(format!("{} overrides for {n} agents", fixed.len())));
        }
        if state >= self.state_count {
            return Err(Error::IndexOutOfRange(format!("state {state}")));
        }
        for (i, f) in fixed.iter().enumerate() {
            if let Some(a) = *f {
                if a >= self.action_counts[i] {
                    return Err(Error::IndexOutOfRange(format!(
                        "fixed action {a} for agent {} (has {} actions)",
                        i + 1,
                        self.action_counts[i]
                    )));
                }
            }
        }
        let mut joint = vec![0; n];
        self.complete_into(state, fixed, &mut joint, 0);
        Ok(joint)
    }

    /// Fills `joint` for positions `from..n`. Positions before `from` must
    /// already hold their emitted actions. An empty `fixed` means no
    /// overrides.
    #[inline]
    pub(crate) fn complete_into(&self, state: usize, fixed: &[Option<usize>], joint: &mut [usize], from: usize) {
        for &agent in &self.adg.order()[from..] {
            joint[agent] = match fixed.get(agent).copied().flatten() {
                Some(a) => a,
                None => self.tables[agent][self.entry_index(agent, state, joint)],
            };
        }
    }

    /// Lets each listed agent act, in the given order, on `joint`.
    #[inline]
    pub(crate) fn complete_agents(&self, state: usize, agents: &[usize], joint: &mut [usize]) {
        for &agent in agents {
            joint[agent] = self.tables[agent][self.entry_index(agent, state, joint)];
        }
    }

    /// FNV-1a over 64-bit words of all tables.
    pub fn snapshot_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for table in &self.tables {
            for &a in table.iter().chain(std::iter::once(&usize::MAX)) {
                h ^= a as u64;
                h = h.wrapping_mul(PRIME);
            }
        }
        h
    }

    pub fn to_document(&self) -> PolicyDocument {
        let mut tuple = Vec::new();
        let tables = (0..self.agent_count())
            .map(|i| {
                let mut entries = Vec::with_capacity(self.tables[i].len());
                for s in 0..self.state_count {
                    for t in 0..self.combos[i] {
                        self.decode_tuple(i, t, &mut tuple);
                        entries.push((s, tuple.clone(), self.tables[i][s * self.combos[i] + t]));
                    }
                }
                AgentTable {
                    agent: i + 1,
                    parents: self.adg.parents(i).iter().map(|p| p + 1).collect(),
                    entries,
                }
            })
            .collect();
        PolicyDocument {
            adg: AdgDocument::from_adg(&self.adg),
            states: self.state_count,
            actions: self.action_counts.clone(),
            tables,
        }
    }

    pub fn from_document(doc: &PolicyDocument) -> Result<Self> {
        let adg = doc.adg.to_adg()?;
        let n = adg.agent_count();
        if doc.tables.len() != n {
            return Err(Error::Schema(format!("{} tables for {n} agents", doc.tables.len())));
        }
        let mut policy = Self::shaped(adg, doc.states, &doc.actions)?;
        let mut seen: Vec<Vec<bool>> = policy.tables.iter().map(|t| vec![false; t.len()]).collect();
        for table in &doc.tables {
            let i = table
                .agent
                .checked_sub(1)
                .filter(|&i| i < n)
                .ok_or(Error::AgentOutOfRange { agent: table.agent, n })?;
            let parents: Vec<usize> = policy.adg.parents(i).iter().map(|p| p + 1).collect();
            if table.parents != parents {
                return Err(Error::Schema(format!(
                    "agent {} lists parents {:?}, graph has {:?}",
                    table.agent, table.parents, parents
                )));
            }
            for (s, tuple, a) in &table.entries {
                let index = policy.action(i, *s, tuple).map(|_| {
                    let t = tuple
                        .iter()
                        .zip(policy.adg.parents(i))
                        .fold(0, |acc, (&x, &p)| acc * policy.action_counts[p] + x);
                    s * policy.combos[i] + t
                })?;
                if *a >= policy.action_counts[i] {
                    return Err(Error::IndexOutOfRange(format!("action {a} for agent {}", i + 1)));
                }
                if std::mem::replace(&mut seen[i][index], true) {
                    return Err(Error::Schema(format!("duplicate entry for agent {}", i + 1)));
                }
                policy.tables[i][index] = *a;
            }
        }
        if let Some(i) = seen.iter().position(|s| s.contains(&false)) {
            return Err(Error::Schema(format!("table of agent {} is incomplete", i + 1)));
        }
        Ok(policy)
    }
}

/// Serialized ADG: 1-based decision order and `[from, to]` edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdgDocument {
    pub n_agents: usize,
    pub order: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

impl AdgDocument {
    pub fn from_adg(adg: &ActionDependencyGraph) -> Self {
        Self {
            n_agents: adg.agent_count(),
            order: adg.order().iter().map(|a| a + 1).collect(),
            edges: adg.edges().iter().map(|&(j, i)| [j + 1, i + 1]).collect(),
        }
    }

    pub fn to_adg(&self) -> Result<ActionDependencyGraph> {
        let n = self.n_agents;
        let to_zero = |a: usize| {
            a.checked_sub(1)
                .filter(|&x| x < n)
                .ok_or(Error::AgentOutOfRange { agent: a, n })
        };
        let edges = self
            .edges
            .iter()
            .map(|&[j, i]| Ok((to_zero(j)?, to_zero(i)?)))
            .collect::<Result<Vec<_>>>()?;
        let order = self.order.iter().map(|&a| to_zero(a)).collect::<Result<Vec<_>>>()?;
        ActionDependencyGraph::new(n, &edges, order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentTable {
    pub agent: usize,
    pub parents: Vec<usize>,
    /// `(state, parent actions, action)`.
    pub entries: Vec<(usize, Vec<usize>, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    pub adg: AdgDocument,
    pub states: usize,
    pub actions: Vec<usize>,
    pub tables: Vec<AgentTable>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> ActionDependencyGraph {
        ActionDependencyGraph::new(3, &[(0, 1), (1, 2)], vec![0, 1, 2]).unwrap()
    }

    /// π1 = 1, π2(a1) = a1, π3(a2) = a2.
    fn copy_chain(first: usize) -> ActionDependentPolicy {
        ActionDependentPolicy::from_fn(chain3(), 1, &[2, 2, 2], |i, _, p| if i == 0 { first } else { p[0] }).unwrap()
    }

    #[test]
    fn rollout_examples() {
        let independent = ActionDependentPolicy::independent(&[2, 3], &[vec![1, 2], vec![0, 1]]).unwrap();
        assert_eq!(independent.rollout(0), vec![1, 2]);
        assert_eq!(independent.rollout(1), vec![0, 1]);
        assert_eq!(copy_chain(1).rollout(0), vec![1, 1, 1]);
        assert_eq!(copy_chain(0).rollout(0), vec![0, 0, 0]);
    }

    #[test]
    fn override_examples() {
        let p = copy_chain(1);
        assert_eq!(p.complete_with_overrides(0, &[None; 3]).unwrap(), p.rollout(0));
        assert_eq!(
            p.complete_with_overrides(0, &[Some(0), Some(1), Some(0)]).unwrap(),
            vec![0, 1, 0]
        );
        assert_eq!(p.complete_with_overrides(0, &[Some(0), None, None]).unwrap(), vec![0, 0, 0]);
        assert!(p.complete_with_overrides(0, &[Some(2), None, None]).is_err());
        assert!(p.complete_with_overrides(0, &[None, None]).is_err());
    }

    #[test]
    fn non_identity_order_rollout() {
        // 1 -> 2 <- 3, order (1, 3, 2); agent 2 plays 1 iff both parents play 1
        let adg = ActionDependencyGraph::new(3, &[(0, 1), (2, 1)], vec![0, 2, 1]).unwrap();
        let p = ActionDependentPolicy::from_fn(adg, 1, &[2, 2, 2], |i, _, par| match i {
            1 => usize::from(par == [1, 1]),
            _ => 1,
        })
        .unwrap();
        assert_eq!(p.rollout(0), vec![1, 1, 1]);
        assert_eq!(p.complete_with_overrides(0, &[Some(0), None, None]).unwrap(), vec![0, 0, 1]);
        assert_eq!(p.action(1, 0, &[1, 0]).unwrap(), 0);
    }

    #[test]
    fn random_is_keyed_and_in_range() {
        let adg = ActionDependencyGraph::fully_dense(vec![0, 1, 2]).unwrap();
        let a = ActionDependentPolicy::random(adg.clone(), 2, &[3, 2, 4], 42).unwrap();
        let b = ActionDependentPolicy::random(adg.clone(), 2, &[3, 2, 4], 42).unwrap();
        let c = ActionDependentPolicy::random(adg, 2, &[3, 2, 4], 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.snapshot_hash(), c.snapshot_hash());
        for i in 0..3 {
            assert!(a.table(i).iter().all(|&x| x < a.action_counts()[i]));
        }
    }

    #[test]
    fn random_entries_do_not_depend_on_other_agents() {
        // Agent 0's table is the same whatever the graph does to agent 2.
        let sparse = ActionDependencyGraph::empty(3).unwrap();
        let dense = ActionDependencyGraph::fully_dense(vec![0, 1, 2]).unwrap();
        let a = ActionDependentPolicy::random(sparse, 2, &[4, 4, 4], 9).unwrap();
        let b = ActionDependentPolicy::random(dense, 2, &[4, 4, 4], 9).unwrap();
        assert_eq!(a.table(0), b.table(0));
    }

    #[test]
    fn document_round_trip_and_errors() {
        let adg = ActionDependencyGraph::new(3, &[(0, 1), (2, 1)], vec![0, 2, 1]).unwrap();
        let p = ActionDependentPolicy::random(adg, 2, &[2, 3, 2], 5).unwrap();
        let doc = p.to_document();
        let text = serde_json::to_string(&doc).unwrap();
        let back: PolicyDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(ActionDependentPolicy::from_document(&back).unwrap(), p);

        let mut missing = doc.clone();
        missing.tables[1].entries.pop();
        assert!(matches!(ActionDependentPolicy::from_document(&missing), Err(Error::Schema(_))));
        let mut dup = doc;
        let first = dup.tables[0].entries[0].clone();
        dup.tables[0].entries[1] = first;
        assert!(matches!(ActionDependentPolicy::from_document(&dup), Err(Error::Schema(_))));
    }

    #[test]
    fn from_fn_rejects_out_of_range_actions() {
        let adg = ActionDependencyGraph::empty(2).unwrap();
        assert!(ActionDependentPolicy::from_fn(adg, 1, &[2, 2], |_, _, _| 2).is_err());
    }
}
