use std::collections::BTreeMap;

use locit::edge::{
    cv_edge_stage, edge_3ag_run, edge_ag_run, edge_color, kuhn_2defective_edge, triple_index, Edge,
    EdgeMode,
};
use locit::engine::RoundModel;
use locit::graph::{build_graph, Graph, GraphKind};

fn proper_edges(g: &Graph, c: &BTreeMap<Edge, u64>) -> bool {
    let edges = g.edges();
    for (x, &e) in edges.iter().enumerate() {
        for &f in &edges[x + 1..] {
            let touch = e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1;
            if touch && c[&e] == c[&f] {
                return false;
            }
        }
    }
    true
}

fn graphs() -> Vec<Graph> {
    let mut out = vec![
        build_graph(GraphKind::Path, 4, 2, 0).unwrap(),
        build_graph(GraphKind::Cycle, 7, 2, 0).unwrap(),
        build_graph(GraphKind::Complete, 4, 3, 0).unwrap(),
        build_graph(GraphKind::Complete, 6, 5, 0).unwrap(),
        build_graph(GraphKind::Star, 5, 4, 0).unwrap(),
    ];
    for seed in 0..5 {
        out.push(build_graph(GraphKind::RandomCapped, 30, 3 + seed as u32, seed).unwrap());
    }
    out
}

#[test]
fn star_ranks_are_distinct_at_the_center() {
    let g = build_graph(GraphKind::Star, 5, 4, 0).unwrap();
    let pairs = kuhn_2defective_edge(&g);
    let mut is: Vec<u32> = pairs.values().map(|p| p.0).collect();
    is.sort_unstable();
    assert_eq!(is, vec![1, 2, 3, 4]);
    assert!(pairs.values().all(|p| p.1 == 1));
}

#[test]
fn rank_classes_have_degree_at_most_two() {
    for g in graphs() {
        let pairs = kuhn_2defective_edge(&g);
        for v in g.vertices() {
            let mut count: BTreeMap<(u32, u32), usize> = BTreeMap::new();
            for &w in g.neighbors(v) {
                *count.entry(pairs[&(v.min(w), v.max(w))]).or_default() += 1;
            }
            assert!(count.values().all(|&c| c <= 2));
        }
    }
}

#[test]
fn centralized_cv_gives_proper_triples() {
    for g in graphs() {
        let delta = g.delta_bound() as u64;
        let triples = cv_edge_stage(&g, &kuhn_2defective_edge(&g)).unwrap();
        let colors: BTreeMap<Edge, u64> = triples
            .iter()
            .map(|(&e, &(i, j, k))| (e, triple_index(i, j, k, delta)))
            .collect();
        assert!(proper_edges(&g, &colors));
        assert!(colors.values().all(|&c| c < 3 * delta * delta));
    }
}

#[test]
fn pipelines_are_proper_every_round() {
    for g in graphs() {
        for mode in [EdgeMode::Ag, EdgeMode::Exact] {
            for known in [false, true] {
                let run = edge_color(&g, mode, RoundModel::Local, known).unwrap();
                assert!(proper_edges(&g, &run.colors));
                let pre = run.protocol.preamble_rounds();
                for r in pre..=run.trace.rounds_run() {
                    assert!(proper_edges(&g, &run.values_at(r).unwrap()), "round {r}");
                }
                if mode == EdgeMode::Exact {
                    let top = (2 * g.delta_bound() as u64).saturating_sub(2);
                    assert!(run.colors.values().all(|&c| c <= top));
                } else {
                    assert!(run.final_rounds.unwrap() <= run.protocol.q as usize);
                }
            }
        }
    }
}

#[test]
fn start_from_given_triples() {
    let g = build_graph(GraphKind::Star, 4, 3, 0).unwrap();
    let triples = cv_edge_stage(&g, &kuhn_2defective_edge(&g)).unwrap();
    let colors: BTreeMap<Edge, u64> = triples
        .iter()
        .map(|(&e, &(i, j, k))| (e, triple_index(i, j, k, 3)))
        .collect();
    let run = edge_3ag_run(&g, &colors, RoundModel::BitRound).unwrap();
    let mut out: Vec<u64> = run.colors.values().copied().collect();
    out.sort_unstable();
    out.dedup();
    assert_eq!(out.len(), 3);
    assert!(out.iter().all(|&c| c <= 4));
    let run = edge_ag_run(&g, &colors, RoundModel::BitRound).unwrap();
    assert!(proper_edges(&g, &run.colors));
}

#[test]
fn single_edge_finishes_at_once() {
    let g = Graph::from_edges(2, 1, [0, 1], &[(0, 1)]).unwrap();
    let run = edge_3ag_run(&g, &BTreeMap::from([((0, 1), 2)]), RoundModel::Local).unwrap();
    assert_eq!(run.colors[&(0, 1)], 0);
}

#[test]
fn bit_budget_per_edge() {
    for n in [64u32, 256] {
        for delta in [4u32, 8, 16] {
            let g = build_graph(GraphKind::RandomCapped, n, delta, 1).unwrap();
            let run = edge_color(&g, EdgeMode::Exact, RoundModel::BitRound, false).unwrap();
            let budget = 4.0 * delta as f64 + 8.0 * (n as f64).log2();
            let measured = run.trace.max_bits_per_direction();
            println!("n={n} Δ={delta} bits={measured} budget={budget}");
            assert!((measured as f64) <= budget);
        }
    }
}
