//! Random instances for fuzzing and experiments.

use rand::Rng;

use super::{EdgeTable, MarkovGame};
use crate::error::{Error, Result};
use crate::graph::CoordinationGraph;

/// Erdős–Rényi graph: each pair is an edge with probability `edge_prob`.
pub fn random_cg<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_prob: f64) -> Result<CoordinationGraph> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((i, j));
            }
        }
    }
    CoordinationGraph::new(n, &edges)
}

fn random_rewards<R: Rng + ?Sized>(rng: &mut R, cg: &CoordinationGraph, action_counts: &[usize], states: usize) -> Result<Vec<EdgeTable>> {
    cg.edges()
        .iter()
        .map(|&(i, j)| {
            let len = states * action_counts[i] * action_counts[j];
            let values = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            EdgeTable::new((i, j), states, action_counts[i], action_counts[j], 1, values)
        })
        .collect()
}

/// Single-state polymatrix game with payoffs uniform in `[-1, 1)`.
pub fn random_polymatrix<R: Rng + ?Sized>(rng: &mut R, cg: CoordinationGraph, action_counts: Vec<usize>) -> Result<MarkovGame> {
    let rewards = random_rewards(rng, &cg, &action_counts, 1)?;
    MarkovGame::new(cg, 1, action_counts, 0.0, rewards, None)
}

/// Game whose transition kernel is a state-dependent mixture of per-edge
/// kernels: `P_ij(·|s, a_i, a_j) = w_ij(s) K_ij(·|s, a_i, a_j)` with the
/// weights `w_ij(s)` summing to one over edges.
pub fn random_decomposable_game<R: Rng + ?Sized>(
    rng: &mut R,
    cg: CoordinationGraph,
    action_counts: Vec<usize>,
    states: usize,
    gamma: f64,
) -> Result<MarkovGame> {
    if cg.edge_count() == 0 {
        return Err(Error::InvalidArgument(
            "a decomposable transition kernel needs at least one CG edge".into(),
        ));
    }
    if action_counts.len() != cg.agent_count() {
        return Err(Error::ShapeMismatch("action counts do not match the graph".into()));
    }
    let rewards = random_rewards(rng, &cg, &action_counts, states)?;
    let weights: Vec<Vec<f64>> = (0..states)
        .map(|_| {
            let raw: Vec<f64> = (0..cg.edge_count()).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        })
        .collect();
    let transitions = cg
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let mut values = Vec::with_capacity(states * action_counts[i] * action_counts[j] * states);
            for w in &weights {
                for _ in 0..action_counts[i] * action_counts[j] {
                    let row: Vec<f64> = (0..states).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
                    let total: f64 = row.iter().sum();
                    values.extend(row.into_iter().map(|p| w[e] * p / total));
                }
            }
            EdgeTable::new((i, j), states, action_counts[i], action_counts[j], states, values)
        })
        .collect::<Result<Vec<_>>>()?;
    MarkovGame::new(cg, states, action_counts, gamma, rewards, Some(transitions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn aggregate_is_a_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let cg = CoordinationGraph::ring(4).unwrap();
            let game = random_decomposable_game(&mut rng, cg, vec![2, 3, 2, 2], 3, 0.9).unwrap();
            let space = game.joint_space();
            let mut a = vec![0; 4];
            loop {
                for s in 0..3 {
                    let d = game.aggregate_transition(s, &a).unwrap();
                    assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    assert!(d.iter().all(|&p| p >= 0.0));
                }
                if !space.advance(&mut a) {
                    break;
                }
            }
        }
    }

    #[test]
    fn edgeless_graph_cannot_carry_transitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cg = CoordinationGraph::empty(3).unwrap();
        assert!(random_decomposable_game(&mut rng, cg, vec![2; 3], 2, 0.9).is_err());
    }
}
