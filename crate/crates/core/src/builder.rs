//! Construction of action dependency graphs that satisfy the optimality
//! condition for a given coordination graph.

use crate::error::{Error, Result};
use crate::graph::{ActionDependencyGraph, AgentSet, CoordinationGraph};

/// Largest agent count accepted by [`min_adg_exhaustive`].
pub const EXHAUSTIVE_MAX_AGENTS: usize = 10;

fn check_permutation(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    for &a in order {
        if a >= n || std::mem::replace(&mut seen[a], true) {
            return Err(Error::InvalidPermutation(n));
        }
    }
    Ok(())
}

/// The unique ADG with decision order `order` whose in-neighbourhoods equal
/// the CG neighbourhood of each suffix of the order.
pub fn adg_from_order(gc: &CoordinationGraph, order: &[usize]) -> Result<ActionDependencyGraph> {
    let n = gc.agent_count();
    check_permutation(n, order)?;
    let mut edges = Vec::new();
    let mut suffix = AgentSet::new();
    for &agent in order.iter().rev() {
        suffix.insert(agent);
        for j in gc.neighbors_of_set(&suffix)? {
            edges.push((j, agent));
        }
    }
    ActionDependencyGraph::new(n, &edges, order.to_vec())
}

/// Greedy elimination order built back to front.
///
/// Each step fills the last open position with the unplaced agent `v`
/// minimising `|N_c(S ∪ {v})|`, where `S` is the set already placed behind
/// it. Ties go to the lowest label.
pub fn greedy_order(gc: &CoordinationGraph) -> Vec<usize> {
    let n = gc.agent_count();
    let mut order = vec![0; n];
    let mut placed = AgentSet::new();
    for pos in (0..n).rev() {
        let best = (0..n)
            .filter(|v| !placed.contains(v))
            .min_by_key(|&v| {
                let mut candidate = placed.clone();
                candidate.insert(v);
                gc.neighbors_of_set(&candidate).map(|s| s.len()).unwrap_or(usize::MAX)
            })
            .expect("an unplaced agent remains");
        placed.insert(best);
        order[pos] = best;
    }
    order
}

/// Sparse ADG from the greedy order.
pub fn greedy_adg(gc: &CoordinationGraph) -> ActionDependencyGraph {
    adg_from_order(gc, &greedy_order(gc)).expect("greedy order is a permutation")
}

/// Number of edges `adg_from_order` would produce, computed on bitmasks.
fn edge_count_for_order(adjacency: &[u64], order: &[usize]) -> usize {
    let mut suffix = 0u64;
    let mut reach = 0u64;
    let mut count = 0;
    for &agent in order.iter().rev() {
        suffix |= 1 << agent;
        reach |= adjacency[agent];
        count += (reach & !suffix).count_ones() as usize;
    }
    count
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("a larger element exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Exhaustive search for the order yielding the fewest ADG edges. Among
/// equally sparse orders the lexicographically smallest wins.
pub fn min_adg_exhaustive(gc: &CoordinationGraph) -> Result<(Vec<usize>, ActionDependencyGraph)> {
    let n = gc.agent_count();
    if n > EXHAUSTIVE_MAX_AGENTS {
        return Err(Error::TooManyAgents {
            n,
            max: EXHAUSTIVE_MAX_AGENTS,
        });
    }
    let adjacency: Vec<u64> = (0..n)
        .map(|i| gc.neighbors(i).iter().fold(0u64, |m, &j| m | (1 << j)))
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_count = edge_count_for_order(&adjacency, &perm);
    while next_permutation(&mut perm) {
        let count = edge_count_for_order(&adjacency, &perm);
        if count < best_count {
            best_count = count;
            best.clone_from(&perm);
        }
    }
    let adg = adg_from_order(gc, &best)?;
    Ok((best, adg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::check_condition;

    #[test]
    fn from_order_examples() {
        let line = CoordinationGraph::line(3).unwrap();
        let g = adg_from_order(&line, &[0, 1, 2]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert!(check_condition(&line, &g).unwrap());

        let star = CoordinationGraph::star(5).unwrap();
        let g = adg_from_order(&star, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3), (0, 4)]);

        let k3 = CoordinationGraph::complete(3).unwrap();
        for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            assert_eq!(adg_from_order(&k3, &order).unwrap().edge_count(), 3);
        }
    }

    #[test]
    fn from_order_rejects_non_permutation() {
        let line = CoordinationGraph::line(3).unwrap();
        assert_eq!(adg_from_order(&line, &[0, 0, 1]), Err(Error::InvalidPermutation(3)));
        assert_eq!(adg_from_order(&line, &[0, 1]), Err(Error::InvalidPermutation(3)));
        assert_eq!(adg_from_order(&line, &[0, 1, 3]), Err(Error::InvalidPermutation(3)));
    }

    #[test]
    fn greedy_examples() {
        let star = CoordinationGraph::star(5).unwrap();
        // centre and last leaf tie for the front; the lower label goes later
        assert_eq!(greedy_order(&star), vec![4, 0, 3, 2, 1]);
        assert_eq!(greedy_adg(&star).edge_count(), 4);

        let line = CoordinationGraph::line(3).unwrap();
        assert_eq!(greedy_adg(&line).edge_count(), 2);

        let single = CoordinationGraph::empty(1).unwrap();
        assert_eq!(greedy_order(&single), vec![0]);
        assert!(greedy_adg(&single).is_empty());
    }

    #[test]
    fn exhaustive_examples() {
        let line = CoordinationGraph::line(3).unwrap();
        let (order, g) = min_adg_exhaustive(&line).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(order, vec![0, 1, 2]);
        let (_, g) = min_adg_exhaustive(&CoordinationGraph::complete(3).unwrap()).unwrap();
        assert_eq!(g.edge_count(), 3);
        let ring = CoordinationGraph::ring(5).unwrap();
        let (_, g) = min_adg_exhaustive(&ring).unwrap();
        assert_eq!(g.edge_count(), greedy_adg(&ring).edge_count());
        assert!(matches!(
            min_adg_exhaustive(&CoordinationGraph::line(11).unwrap()),
            Err(Error::TooManyAgents { n: 11, max: 10 })
        ));
    }

    #[test]
    fn bitmask_count_matches_construction() {
        let ring = CoordinationGraph::ring(6).unwrap();
        let adjacency: Vec<u64> = (0..6)
            .map(|i| ring.neighbors(i).iter().fold(0u64, |m, &j| m | (1 << j)))
            .collect();
        let mut perm: Vec<usize> = (0..6).collect();
        loop {
            assert_eq!(
                edge_count_for_order(&adjacency, &perm),
                adg_from_order(&ring, &perm).unwrap().edge_count()
            );
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        let mut prev = p.clone();
        while next_permutation(&mut p) {
            assert!(p > prev);
            prev.clone_from(&p);
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
