use adgmarl::builder::{adg_from_order, greedy_adg, greedy_order, min_adg_exhaustive};
use adgmarl::dp::{best_response_value, policy_evaluation, q_from_v, value_iteration};
use adgmarl::game::random::{random_cg, random_decomposable_game, random_polymatrix};
use adgmarl::game::{game_from_json, game_to_json, GameDocument};
use adgmarl::graph::{check_condition, check_condition_superset};
use adgmarl::joint::DEFAULT_ENUM_CAP;
use adgmarl::mpi::{ad_mpi_seeded, MpiStatus};
use adgmarl::optimality::{is_agent_by_agent_optimal, is_gd_locally_optimal, is_nash};
use adgmarl::policy::PolicyDocument;
use adgmarl::{ActionDependencyGraph, ActionDependentPolicy, CoordinationGraph, MarkovGame, ValueTable};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Random DAG: a random order with each forward pair kept with probability `p`.
fn random_adg(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ActionDependencyGraph {
    let order = shuffled(rng, n);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((order[a], order[b]));
            }
        }
    }
    ActionDependencyGraph::new(n, &edges, order).unwrap()
}

fn small_game(rng: &mut ChaCha8Rng, max_agents: usize, max_states: usize, gamma: f64) -> MarkovGame {
    let n = rng.gen_range(2..=max_agents);
    let cg = loop {
        let cg = random_cg(rng, n, 0.6).unwrap();
        if cg.edge_count() > 0 {
            break cg;
        }
    };
    let actions: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let states = rng.gen_range(1..=max_states);
    random_decomposable_game(rng, cg, actions, states, gamma).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn condition_implies_superset(seed in any::<u64>(), n in 1usize..8, p in 0.0f64..1.0) {
        let mut r = rng(seed);
        let cg = random_cg(&mut r, n, p).unwrap();
        let density = r.gen_range(0.0..1.0);
        let adg = random_adg(&mut r, n, density);
        if check_condition(&cg, &adg).unwrap() {
            prop_assert!(check_condition_superset(&cg, &adg).unwrap());
        }
        let from_order = adg_from_order(&cg, adg.order()).unwrap();
        prop_assert!(check_condition(&cg, &from_order).unwrap());
        // any ADG satisfying the superset form with the same order contains the minimal one
        if check_condition_superset(&cg, &adg).unwrap() {
            for e in from_order.edges() {
                prop_assert!(adg.edges().contains(e));
            }
        }
    }

    #[test]
    fn greedy_is_bounded_by_exhaustive_and_dense(seed in any::<u64>(), n in 1usize..7, p in 0.0f64..1.0) {
        let cg = random_cg(&mut rng(seed), n, p).unwrap();
        let greedy = greedy_adg(&cg).edge_count();
        let (_, best) = min_adg_exhaustive(&cg).unwrap();
        prop_assert!(best.edge_count() <= greedy);
        prop_assert!(greedy <= n * (n - 1) / 2);
        let order = greedy_order(&cg);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn complete_and_edgeless_graphs(seed in any::<u64>(), n in 1usize..8) {
        let order = shuffled(&mut rng(seed), n);
        let complete = CoordinationGraph::complete(n).unwrap();
        prop_assert_eq!(adg_from_order(&complete, &order).unwrap().edge_count(), n * (n - 1) / 2);
        let edgeless = CoordinationGraph::empty(n).unwrap();
        prop_assert!(adg_from_order(&edgeless, &order).unwrap().is_empty());
        let dense = ActionDependencyGraph::fully_dense(order).unwrap();
        prop_assert!(check_condition(&complete, &dense).unwrap());
    }

    #[test]
    fn suffix_ignores_prefix_agents_outside_parents(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let cg = random_cg(&mut r, n, 0.5).unwrap();
        let order = shuffled(&mut r, n);
        let adg = adg_from_order(&cg, &order).unwrap();
        let actions = vec![3; n];
        let policy = ActionDependentPolicy::random(adg.clone(), 1, &actions, r.gen()).unwrap();
        let k = r.gen_range(0..n);
        let agent = order[k];
        let mut base = vec![None; n];
        for &p in adg.parents(agent) {
            base[p] = Some(r.gen_range(0..3));
        }
        base[agent] = Some(r.gen_range(0..3));
        let mut perturbed = base.clone();
        for &other in &order[..k] {
            if perturbed[other].is_none() {
                perturbed[other] = Some(r.gen_range(0..3));
            }
        }
        let a = policy.complete_with_overrides(0, &base).unwrap();
        let b = policy.complete_with_overrides(0, &perturbed).unwrap();
        for &later in &order[k..] {
            prop_assert_eq!(a[later], b[later]);
        }
    }

    #[test]
    fn overrides_are_respected(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let adg = random_adg(&mut r, n, 0.5);
        let actions: Vec<usize> = (0..n).map(|_| r.gen_range(1..=3)).collect();
        let policy = ActionDependentPolicy::random(adg, 2, &actions, r.gen()).unwrap();
        let fixed: Vec<Option<usize>> = actions
            .iter()
            .map(|&k| if r.gen() { Some(r.gen_range(0..k)) } else { None })
            .collect();
        let joint = policy.complete_with_overrides(1, &fixed).unwrap();
        for (i, f) in fixed.iter().enumerate() {
            if let Some(a) = f {
                prop_assert_eq!(joint[i], *a);
            }
        }
        prop_assert_eq!(policy.complete_with_overrides(1, &vec![None; n]).unwrap(), policy.rollout(1));
        let all: Vec<Option<usize>> = joint.iter().map(|&a| Some(a)).collect();
        prop_assert_eq!(policy.complete_with_overrides(1, &all).unwrap(), joint);
    }

    #[test]
    fn policy_document_round_trip(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let adg = random_adg(&mut r, n, 0.5);
        let actions: Vec<usize> = (0..n).map(|_| r.gen_range(1..=3)).collect();
        let policy = ActionDependentPolicy::random(adg, r.gen_range(1..3), &actions, r.gen()).unwrap();
        let text = serde_json::to_string(&policy.to_document()).unwrap();
        let doc: PolicyDocument = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(ActionDependentPolicy::from_document(&doc).unwrap(), policy);
    }

    #[test]
    fn game_document_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let game = small_game(&mut r, 4, 3, 0.7);
        prop_assert_eq!(game_from_json(&game_to_json(&game)).unwrap(), game);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn policy_values_never_exceed_the_optimum(seed in any::<u64>(), gamma in prop_oneof![Just(0.0), 0.1f64..0.95]) {
        let mut r = rng(seed);
        let game = small_game(&mut r, 4, 3, gamma);
        let optimal = value_iteration(&game, 1e-10, DEFAULT_ENUM_CAP).unwrap();
        let adg = random_adg(&mut r, game.agent_count(), 0.5);
        let policy = ActionDependentPolicy::random(adg, game.state_count(), game.action_counts(), r.gen()).unwrap();
        let v = policy_evaluation(&game, &policy).unwrap();
        for s in 0..game.state_count() {
            prop_assert!(v[s] <= optimal[s] + 1e-8);
        }
    }

    #[test]
    fn converged_runs_are_locally_optimal_and_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let game = small_game(&mut r, 4, 2, 0.8);
        let adg = random_adg(&mut r, game.agent_count(), 0.4);
        let (policy, trace) = ad_mpi_seeded(&game, adg, r.gen(), 500).unwrap();
        prop_assert!(trace.max_decrease() <= 1e-10);
        if trace.status == MpiStatus::Converged {
            prop_assert!(is_gd_locally_optimal(&game, &policy).unwrap());
            // the induced joint actions are then agent-by-agent optimal
            let induced: Vec<Vec<usize>> = (0..game.state_count()).map(|s| policy.rollout(s)).collect();
            let flat = ActionDependentPolicy::independent(game.action_counts(), &induced).unwrap();
            prop_assert!(is_agent_by_agent_optimal(&game, &flat).unwrap());
        }
    }

    #[test]
    fn condition_adgs_reach_the_optimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let game = small_game(&mut r, 4, 3, 0.9);
        let order = shuffled(&mut r, game.agent_count());
        let adg = adg_from_order(game.cg(), &order).unwrap();
        let (_, trace) = ad_mpi_seeded(&game, adg, r.gen(), 500).unwrap();
        prop_assert_eq!(trace.status, MpiStatus::Converged);
        let optimal = value_iteration(&game, 1e-11, DEFAULT_ENUM_CAP).unwrap();
        prop_assert!(trace.final_values.sup_distance(&optimal) < 1e-8);
    }

    #[test]
    fn optimal_policies_are_nash(seed in any::<u64>()) {
        let mut r = rng(seed);
        let game = small_game(&mut r, 3, 2, 0.5);
        let dense = ActionDependencyGraph::fully_dense((0..game.agent_count()).collect()).unwrap();
        let (policy, _) = ad_mpi_seeded(&game, dense, r.gen(), 500).unwrap();
        let induced: Vec<Vec<usize>> = (0..game.state_count()).map(|s| policy.rollout(s)).collect();
        let flat = ActionDependentPolicy::independent(game.action_counts(), &induced).unwrap();
        prop_assert!(is_nash(&game, &flat).unwrap());
    }

    #[test]
    fn best_response_dominates_own_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let game = small_game(&mut r, 3, 3, 0.7);
        let per_state: Vec<Vec<usize>> = (0..game.state_count())
            .map(|_| game.action_counts().iter().map(|&k| r.gen_range(0..k)).collect())
            .collect();
        let policy = ActionDependentPolicy::independent(game.action_counts(), &per_state).unwrap();
        let v = policy_evaluation(&game, &policy).unwrap();
        for agent in 0..game.agent_count() {
            let best = best_response_value(&game, &per_state, agent).unwrap();
            for s in 0..game.state_count() {
                prop_assert!(best[s] >= v[s] - 1e-9);
            }
        }
    }

    #[test]
    fn q_matches_a_direct_computation(seed in any::<u64>()) {
        // computed straight from the document's nested arrays
        let mut r = rng(seed);
        let game = small_game(&mut r, 3, 3, 0.6);
        let doc = GameDocument::from_game(&game);
        let v = ValueTable::new((0..doc.states).map(|_| r.gen_range(-5.0..5.0)).collect()).unwrap();
        let q = q_from_v(&game, &v, DEFAULT_ENUM_CAP).unwrap();
        let space = game.joint_space();
        let mut a = vec![0; doc.n_agents];
        for s in 0..doc.states {
            for idx in 0..q.joint_count() {
                space.decode(idx, &mut a);
                let mut expected = 0.0;
                for [i, j] in &doc.cg_edges {
                    let key = format!("{i}-{j}");
                    let (ai, aj) = (a[i - 1], a[j - 1]);
                    expected += doc.rewards[&key][s][ai][aj];
                    let next = &doc.transitions.as_ref().unwrap()[&key][s][ai][aj];
                    expected += doc.gamma * next.iter().zip(v.as_slice()).map(|(p, x)| p * x).sum::<f64>();
                }
                prop_assert!((q.get(s, idx) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reward_ignores_edge_listing_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..6);
        let cg = random_cg(&mut r, n, 0.7).unwrap();
        let game = random_polymatrix(&mut r, cg, vec![2; n]).unwrap();
        let mut doc = GameDocument::from_game(&game);
        doc.cg_edges.shuffle(&mut r);
        let reordered = doc.into_game().unwrap();
        let space = game.joint_space();
        let mut a = vec![0; n];
        loop {
            prop_assert_eq!(game.global_reward(0, &a).unwrap(), reordered.global_reward(0, &a).unwrap());
            if !space.advance(&mut a) {
                break;
            }
        }
    }
}
