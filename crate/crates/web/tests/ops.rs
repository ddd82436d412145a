use adgmarl_web::ops::{build_adg, instances, parse_edges, restart_stats, solve_trace};

#[test]
fn edge_lists_parse_with_mixed_separators() {
    assert_eq!(parse_edges("1-2 2-3,3-4;\n4-5").unwrap(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    assert_eq!(parse_edges("  ").unwrap(), vec![]);
    assert!(parse_edges("1-").is_err());
    assert!(parse_edges("0-1").is_err());
    assert!(parse_edges("12").is_err());
}

#[test]
fn instance_list_matches_builtins() {
    let list = instances();
    let names: Vec<_> = list.iter().map(|i| i.name).collect();
    assert_eq!(names, ["fig2_line", "star5", "ring5", "tree7", "mesh9"]);
    assert_eq!(list[0].edges, "1-2 2-3");
    for inst in &list {
        let view = build_adg(inst.agents, &inst.edges, "greedy").unwrap();
        assert!(view.condition_holds, "{}", inst.name);
        assert!(view.positions.iter().all(|p| p.ok));
    }
}

#[test]
fn build_adg_on_entered_graphs() {
    let line = build_adg(3, "1-2 2-3", "greedy").unwrap();
    assert_eq!(line.edge_count, 2);
    assert_eq!(line.order.len(), 3);

    let star = build_adg(5, "1-2 1-3 1-4 1-5", "dense").unwrap();
    assert_eq!(star.edge_count, 10);
    assert!(!star.condition_holds);
    assert!(star.superset_holds);

    let empty = build_adg(3, "1-2 2-3", "empty").unwrap();
    assert!(!empty.condition_holds);
    assert_eq!(empty.positions.iter().filter(|p| !p.ok).count(), 2);

    let triangle = build_adg(3, "1-2 2-3 1-3", "exhaustive").unwrap();
    assert_eq!(triangle.edge_count, 3);

    assert!(build_adg(3, "1-4", "greedy").is_err());
    assert!(build_adg(3, "1-1", "greedy").is_err());
    assert!(build_adg(3, "1-2", "random").is_err());
    assert!(build_adg(40, "", "greedy").is_err());
}

#[test]
fn restart_outcomes_on_the_line_game() {
    let sparse = restart_stats("fig2_line", "sparse_greedy", 50).unwrap();
    assert_eq!(sparse.success_rate, 1.0);
    assert_eq!(sparse.outcomes.len(), 1);
    assert_eq!(sparse.outcomes[0].value, 2.0);
    assert_eq!(sparse.outcomes[0].count, 50);

    let empty = restart_stats("fig2_line", "empty", 50).unwrap();
    assert!(empty.success_rate < 1.0);
    assert_eq!(empty.outcomes.iter().map(|o| o.count).sum::<usize>(), 50);
    let values: Vec<f64> = empty.outcomes.iter().map(|o| o.value).collect();
    assert_eq!(values, [2.0, 1.2]);
    assert_eq!(empty.outcomes[1].joint_action, [1, 1, 1]);
    let recount = empty.outcomes[0].count as f64 / 50.0;
    assert_eq!(empty.success_rate, recount);

    assert!(restart_stats("fig2_line", "empty", 0).is_err());
    assert!(restart_stats("fig2_line", "file", 5).is_err());
    assert!(restart_stats("nowhere", "empty", 5).is_err());
}

#[test]
fn solve_trace_is_monotone() {
    let trace = solve_trace("star5", "empty", 3).unwrap();
    assert_eq!(trace.optimal_value, 20.0);
    assert!(trace.sweeps.windows(2).all(|w| w[1].value >= w[0].value - 1e-10));
    assert_eq!(trace.sweeps.last().unwrap().changes, 0);
    assert_eq!(trace.status, "converged");

    let sparse = solve_trace("star5", "sparse_greedy", 3).unwrap();
    assert_eq!(sparse.sweeps.last().unwrap().value, 20.0);
}
