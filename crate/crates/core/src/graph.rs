//! Coordination graphs, action dependency graphs and the neighbourhood
//! algebra relating them.
//!
//! Agents are 0-based inside the crate. Error messages and the document
//! formats use 1-based labels.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A set of (0-based) agents.
pub type AgentSet = BTreeSet<usize>;

fn check_agent(agent: usize, n: usize) -> Result<()> {
    if agent >= n {
        Err(Error::AgentOutOfRange { agent: agent + 1, n })
    } else {
        Ok(())
    }
}

/// Undirected graph over agents. An edge `(i, j)` means the value function
/// carries a pairwise term in `a_i` and `a_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinationGraph {
    n: usize,
    /// Sorted, each pair stored as `(min, max)`.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl CoordinationGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoAgents);
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            check_agent(i, n)?;
            check_agent(j, n)?;
            if i == j {
                return Err(Error::SelfLoop(i + 1));
            }
            normalized.push((i.min(j), i.max(j)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0 + 1, w[0].1 + 1));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &normalized {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges: normalized,
            adjacency,
        })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, &[])
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn line(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    /// Cycle over all agents; `n >= 3`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("ring needs at least 3 agents, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// Agent 0 is the centre.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::new(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::new(n, &edges)
    }

    /// `rows x cols` grid, agents numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(rows * cols, &edges)
    }

    /// Heap-ordered binary tree: agent `v` has children `2v+1` and `2v+2`.
    pub fn binary_tree(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
        Self::new(n, &edges)
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, agent: usize) -> &[usize] {
        &self.adjacency[agent]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .is_some_and(|list| list.binary_search(&j).is_ok())
    }

    /// Agents adjacent to some member of `set`, excluding `set` itself.
    pub fn neighbors_of_set(&self, set: &AgentSet) -> Result<AgentSet> {
        for &a in set {
            check_agent(a, self.n)?;
        }
        Ok(set
            .iter()
            .flat_map(|&a| self.adjacency[a].iter().copied())
            .filter(|b| !set.contains(b))
            .collect())
    }

    /// Edges with one endpoint in `a` and the other in `b`, as `(min, max)`.
    pub fn edges_between(&self, a: &AgentSet, b: &AgentSet) -> BTreeSet<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(i, j)| (a.contains(&i) && b.contains(&j)) || (a.contains(&j) && b.contains(&i)))
            .collect()
    }
}

/// Directed acyclic graph over agents with an explicit decision order.
///
/// An edge `(j, i)` means agent `i`'s policy reads the action of agent `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDependencyGraph {
    n: usize,
    /// Sorted `(from, to)` pairs.
    edges: Vec<(usize, usize)>,
    order: Vec<usize>,
    position: Vec<usize>,
    /// In-neighbours of each agent, ascending.
    parents: Vec<Vec<usize>>,
}

impl ActionDependencyGraph {
    /// Builds and validates a graph with the given decision order.
    ///
    /// Acyclicity is checked before the order, so a cyclic edge set always
    /// reports [`Error::Cycle`].
    pub fn new(n: usize, edges: &[(usize, usize)], order: Vec<usize>) -> Result<Self> {
        let (edges, parents) = Self::normalize(n, edges)?;
        Self::topological_sort(n, &parents)?;
        if order.len() != n {
            return Err(Error::InvalidPermutation(n));
        }
        let mut position = vec![usize::MAX; n];
        for (k, &agent) in order.iter().enumerate() {
            if agent >= n || position[agent] != usize::MAX {
                return Err(Error::InvalidPermutation(n));
            }
            position[agent] = k;
        }
        for &(from, to) in &edges {
            if position[from] > position[to] {
                return Err(Error::OrderInconsistent {
                    from: from + 1,
                    to: to + 1,
                });
            }
        }
        Ok(Self {
            n,
            edges,
            order,
            position,
            parents,
        })
    }

    /// Builds a graph whose decision order is the topological sort that
    /// always emits the lowest available label first.
    pub fn with_topological_order(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let (_, parents) = Self::normalize(n, edges)?;
        let order = Self::topological_sort(n, &parents)?;
        Self::new(n, edges, order)
    }

    /// Graph with no edges and the identity order.
    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, &[], (0..n).collect())
    }

    /// Fully dense graph over `order`: every agent reads all predecessors.
    pub fn fully_dense(order: Vec<usize>) -> Result<Self> {
        let edges: Vec<_> = order
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| order[..k].iter().map(move |&j| (j, i)))
            .collect();
        Self::new(order.len(), &edges, order)
    }

    fn normalize(n: usize, edges: &[(usize, usize)]) -> Result<(Vec<(usize, usize)>, Vec<Vec<usize>>)> {
        if n == 0 {
            return Err(Error::NoAgents);
        }
        let mut sorted = Vec::with_capacity(edges.len());
        for &(from, to) in edges {
            check_agent(from, n)?;
            check_agent(to, n)?;
            if from == to {
                return Err(Error::SelfLoop(from + 1));
            }
            sorted.push((from, to));
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0 + 1, w[0].1 + 1));
        }
        let mut parents = vec![Vec::new(); n];
        for &(from, to) in &sorted {
            parents[to].push(from);
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        Ok((sorted, parents))
    }

    fn topological_sort(n: usize, parents: &[Vec<usize>]) -> Result<Vec<usize>> {
        let mut children = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (to, ps) in parents.iter().enumerate() {
            indegree[to] = ps.len();
            for &from in ps {
                children[from].push(to);
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() < n {
            let stuck = (0..n).find(|&v| indegree[v] > 0).unwrap_or(0);
            return Err(Error::Cycle(Self::cycle_member(stuck, parents, &indegree) + 1));
        }
        Ok(order)
    }

    // Walk parents among the unsorted remainder until a vertex repeats.
    fn cycle_member(start: usize, parents: &[Vec<usize>], indegree: &[usize]) -> usize {
        let mut seen = vec![false; parents.len()];
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            match parents[v].iter().find(|&&p| indegree[p] > 0) {
                Some(&p) => v = p,
                None => break,
            }
        }
        v
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 0-based position of `agent` in the decision order.
    pub fn position(&self, agent: usize) -> usize {
        self.position[agent]
    }

    /// In-neighbours `N_d(i)`, ascending.
    pub fn parents(&self, agent: usize) -> &[usize] {
        &self.parents[agent]
    }

    /// Closed in-neighbourhood `N_d[i]`.
    pub fn closed_parents(&self, agent: usize) -> AgentSet {
        let mut set: AgentSet = self.parents[agent].iter().copied().collect();
        set.insert(agent);
        set
    }

    /// Agents at positions `>= k` (0-based).
    pub fn suffix(&self, k: usize) -> AgentSet {
        self.order[k.min(self.n)..].iter().copied().collect()
    }

    /// Agents at positions `< k` (0-based).
    pub fn prefix(&self, k: usize) -> AgentSet {
        self.order[..k.min(self.n)].iter().copied().collect()
    }

    /// `N_d(S)`: in-neighbours of members of `set`, excluding `set`.
    pub fn parents_of_set(&self, set: &AgentSet) -> AgentSet {
        set.iter()
            .flat_map(|&a| self.parents[a].iter().copied())
            .filter(|p| !set.contains(p))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn check_sizes(gc: &CoordinationGraph, gd: &ActionDependencyGraph) -> Result<()> {
    if gc.agent_count() != gd.agent_count() {
        return Err(Error::SizeMismatch(gc.agent_count(), gd.agent_count()));
    }
    Ok(())
}

fn check_position(gd: &ActionDependencyGraph, k: usize) -> Result<()> {
    if k >= gd.agent_count() {
        return Err(Error::PositionOutOfRange {
            position: k + 1,
            n: gd.agent_count(),
        });
    }
    Ok(())
}

/// `N_c` of the suffix starting at each position of the decision order.
fn suffix_neighborhoods(gc: &CoordinationGraph, gd: &ActionDependencyGraph) -> Vec<AgentSet> {
    (0..gd.agent_count())
        .map(|k| {
            gc.neighbors_of_set(&gd.suffix(k))
                .expect("suffix agents are in range")
        })
        .collect()
}

/// Whether `N_d(σ(k)) = N_c({σ(k), ..., σ(n)})` at every position `k` of the
/// decision order `σ`. This is the structural condition under which locally
/// optimal action-dependent policies are globally optimal.
pub fn check_condition(gc: &CoordinationGraph, gd: &ActionDependencyGraph) -> Result<bool> {
    check_sizes(gc, gd)?;
    Ok(suffix_neighborhoods(gc, gd)
        .iter()
        .zip(gd.order())
        .all(|(required, &agent)| gd.parents(agent).iter().copied().eq(required.iter().copied())))
}

/// Relaxed form: `N_d(σ(k)) ⊇ N_c(suffix at k)` for every position.
pub fn check_condition_superset(gc: &CoordinationGraph, gd: &ActionDependencyGraph) -> Result<bool> {
    check_sizes(gc, gd)?;
    Ok(suffix_neighborhoods(gc, gd)
        .iter()
        .zip(gd.order())
        .all(|(required, &agent)| required.iter().all(|r| gd.parents(agent).binary_search(r).is_ok())))
}

/// Compares the CG edges crossing from the suffix at position `k` into the
/// prefix with those crossing from the suffix into `N_d(σ(k))`.
pub fn edge_partition_identity(gc: &CoordinationGraph, gd: &ActionDependencyGraph, k: usize) -> Result<bool> {
    check_sizes(gc, gd)?;
    check_position(gd, k)?;
    let suffix = gd.suffix(k);
    let prefix = gd.prefix(k);
    let parents: AgentSet = gd.parents(gd.order()[k]).iter().copied().collect();
    Ok(gc.edges_between(&suffix, &prefix) == gc.edges_between(&suffix, &parents))
}

/// Whether `N_d[σ(k)] ⊇ N_d(later positions)`.
pub fn nested_neighborhood_identity(gc: &CoordinationGraph, gd: &ActionDependencyGraph, k: usize) -> Result<bool> {
    check_sizes(gc, gd)?;
    check_position(gd, k)?;
    let closed = gd.closed_parents(gd.order()[k]);
    let later = gd.suffix(k + 1);
    Ok(gd.parents_of_set(&later).is_subset(&closed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> AgentSet {
        xs.iter().map(|x| x - 1).collect()
    }

    fn adg(n: usize, edges: &[(usize, usize)], order: &[usize]) -> Result<ActionDependencyGraph> {
        let edges: Vec<_> = edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        ActionDependencyGraph::new(n, &edges, order.iter().map(|x| x - 1).collect())
    }

    #[test]
    fn neighbors_of_set_examples() {
        let line = CoordinationGraph::line(3).unwrap();
        assert_eq!(line.neighbors_of_set(&set(&[3])).unwrap(), set(&[2]));
        assert_eq!(line.neighbors_of_set(&set(&[1, 2, 3])).unwrap(), set(&[]));
        let ring = CoordinationGraph::ring(5).unwrap();
        assert_eq!(ring.neighbors_of_set(&set(&[4, 5])).unwrap(), set(&[1, 3]));
        assert_eq!(ring.neighbors_of_set(&AgentSet::new()).unwrap(), AgentSet::new());
    }

    #[test]
    fn neighbors_of_set_rejects_out_of_range() {
        let line = CoordinationGraph::line(3).unwrap();
        assert_eq!(
            line.neighbors_of_set(&set(&[4])),
            Err(Error::AgentOutOfRange { agent: 4, n: 3 })
        );
    }

    #[test]
    fn cg_rejects_bad_edges() {
        assert_eq!(CoordinationGraph::new(3, &[(1, 1)]), Err(Error::SelfLoop(2)));
        assert_eq!(
            CoordinationGraph::new(3, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 2))
        );
        assert!(matches!(
            CoordinationGraph::new(3, &[(0, 3)]),
            Err(Error::AgentOutOfRange { .. })
        ));
        assert_eq!(CoordinationGraph::new(0, &[]), Err(Error::NoAgents));
    }

    #[test]
    fn validate_adg_examples() {
        assert!(adg(3, &[(1, 2), (2, 3)], &[1, 2, 3]).is_ok());
        assert!(matches!(adg(2, &[(1, 2), (2, 1)], &[1, 2]), Err(Error::Cycle(_))));
        assert!(matches!(
            ActionDependencyGraph::with_topological_order(2, &[(0, 1), (1, 0)]),
            Err(Error::Cycle(_))
        ));
        let g = adg(3, &[(1, 2), (3, 2)], &[1, 3, 2]).unwrap();
        assert_eq!(g.parents(1), &[0, 2]);
        assert_eq!(
            adg(3, &[(1, 2), (3, 2)], &[1, 2, 3]),
            Err(Error::OrderInconsistent { from: 3, to: 2 })
        );
        assert!(matches!(adg(3, &[(1, 4)], &[1, 2, 3]), Err(Error::AgentOutOfRange { .. })));
        assert_eq!(adg(3, &[], &[1, 1, 2]), Err(Error::InvalidPermutation(3)));
        assert_eq!(adg(3, &[(1, 2), (1, 2)], &[1, 2, 3]), Err(Error::DuplicateEdge(1, 2)));
    }

    #[test]
    fn topological_order_prefers_low_labels() {
        let g = ActionDependencyGraph::with_topological_order(4, &[(3, 0), (2, 1)]).unwrap();
        assert_eq!(g.order(), &[2, 1, 3, 0]);
    }

    #[test]
    fn condition_on_line_examples() {
        let line = CoordinationGraph::line(3).unwrap();
        let chain = adg(3, &[(1, 2), (2, 3)], &[1, 2, 3]).unwrap();
        assert!(check_condition(&line, &chain).unwrap());
        let collider = adg(3, &[(1, 2), (3, 2)], &[1, 3, 2]).unwrap();
        assert!(!check_condition(&line, &collider).unwrap());
        let empty = ActionDependencyGraph::empty(3).unwrap();
        assert!(!check_condition(&line, &empty).unwrap());
        assert!(!check_condition_superset(&line, &empty).unwrap());
        let dense = adg(3, &[(1, 2), (1, 3), (2, 3)], &[1, 2, 3]).unwrap();
        assert!(check_condition_superset(&line, &dense).unwrap());
        assert!(!check_condition(&line, &dense).unwrap());
        assert!(check_condition_superset(&line, &chain).unwrap());
    }

    #[test]
    fn condition_size_mismatch() {
        let line = CoordinationGraph::line(3).unwrap();
        let g = ActionDependencyGraph::empty(4).unwrap();
        assert_eq!(check_condition(&line, &g), Err(Error::SizeMismatch(3, 4)));
        assert_eq!(check_condition_superset(&line, &g), Err(Error::SizeMismatch(3, 4)));
    }

    #[test]
    fn graph_identities_small_cases() {
        let line = CoordinationGraph::line(3).unwrap();
        let chain = adg(3, &[(1, 2), (2, 3)], &[1, 2, 3]).unwrap();
        // position 2: suffix {2,3}, prefix {1}, N_d(2) = {1}; both sides {(1,2)}
        assert!(edge_partition_identity(&line, &chain, 1).unwrap());
        for k in 0..3 {
            assert!(nested_neighborhood_identity(&line, &chain, k).unwrap());
        }
        assert!(matches!(
            edge_partition_identity(&line, &chain, 3),
            Err(Error::PositionOutOfRange { position: 4, n: 3 })
        ));

        let star = CoordinationGraph::star(5).unwrap();
        let fan = adg(5, &[(1, 2), (1, 3), (1, 4), (1, 5)], &[1, 2, 3, 4, 5]).unwrap();
        for k in 0..5 {
            assert!(nested_neighborhood_identity(&star, &fan, k).unwrap());
        }

        let edgeless = CoordinationGraph::empty(4).unwrap();
        let any = ActionDependencyGraph::fully_dense(vec![2, 0, 3, 1]).unwrap();
        for k in 0..4 {
            assert!(edge_partition_identity(&edgeless, &any, k).unwrap());
        }
    }

    #[test]
    fn nested_identity_fails_without_condition() {
        // line 1-2-3 with only 1 -> 3: agent 3 reads 1, agent 2 reads nothing
        let line = CoordinationGraph::line(3).unwrap();
        let g = adg(3, &[(1, 3)], &[1, 2, 3]).unwrap();
        assert!(!nested_neighborhood_identity(&line, &g, 1).unwrap());
    }

    #[test]
    fn named_topologies() {
        assert_eq!(CoordinationGraph::grid(3, 3).unwrap().edge_count(), 12);
        let tree = CoordinationGraph::binary_tree(7).unwrap();
        assert_eq!(tree.edges(), &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        assert!(CoordinationGraph::ring(2).is_err());
        assert_eq!(CoordinationGraph::complete(4).unwrap().edge_count(), 6);
    }
}
