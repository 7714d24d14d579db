use std::collections::BTreeMap;

use locit::ag::arb::{arbdefective_color, defective_coloring};
use locit::ag::three::{exact_delta_plus_one, three_ag_run, ExactParams, ThreeAgMode};
use locit::ag::{ag_run, standard_reduction, AgWire};
use locit::algebra::select_prime;
use locit::engine::RoundModel;
use locit::graph::{build_graph, Graph, GraphKind, VertexId};

fn proper(g: &Graph, c: &BTreeMap<VertexId, u64>) -> bool {
    g.edges().iter().all(|(u, v)| c[u] != c[v])
}

fn graphs() -> Vec<Graph> {
    let mut out = vec![
        build_graph(GraphKind::Path, 9, 2, 0).unwrap(),
        build_graph(GraphKind::Cycle, 11, 2, 0).unwrap(),
        build_graph(GraphKind::Complete, 6, 5, 0).unwrap(),
        build_graph(GraphKind::Star, 8, 7, 0).unwrap(),
    ];
    for seed in 0..6 {
        out.push(build_graph(GraphKind::RandomCapped, 40, 3 + seed as u32, seed).unwrap());
    }
    out
}

#[test]
fn ag_pipeline_is_proper_and_bounded() {
    for g in graphs() {
        for wire in [AgWire::Color, AgWire::OneBit] {
            let run = ag_run(&g, RoundModel::Local, wire).unwrap();
            assert!(proper(&g, &run.colors));
            assert!(run.colors.values().all(|&c| c <= g.delta_bound() as u64));
            assert!(run.ag_rounds_used <= run.pipeline.q as usize);
        }
    }
}

#[test]
fn exact_scheme_reaches_delta_plus_one() {
    for g in graphs() {
        let run = exact_delta_plus_one(&g, RoundModel::Local).unwrap();
        assert!(proper(&g, &run.colors), "{:?}", run.colors);
        assert!(run.colors.values().all(|&c| c <= g.delta_bound() as u64));
        assert!(run.mixed_rounds.is_some());
    }
}

#[test]
fn exact_params_fit_for_all_small_deltas() {
    for delta in 0..=64u64 {
        let n_bound = 1u64 << 20;
        let pipe = locit::ag::three::ExactPipeline::new(n_bound, delta).unwrap();
        assert!(pipe.params.p <= 2 * pipe.params.n);
        let _ = ExactParams::new(delta, 1).unwrap();
    }
}

#[test]
fn three_ag_plain_and_epsilon() {
    for g in graphs() {
        let delta = g.delta_bound() as u64;
        let ids: BTreeMap<VertexId, u64> = g.vertices().map(|v| (v, v as u64)).collect();
        let p = select_prime((2 * delta + 2).max(4));
        let run = three_ag_run(&g, &ids, p, ThreeAgMode::Plain, RoundModel::Local).unwrap();
        assert!(proper(&g, &run.colors));
        assert!(run.colors.values().all(|&c| c < p));
        assert!(run.b_zero_round.unwrap() <= run.budget);
        let p = select_prime(((3 * delta).div_ceil(2)).max(4));
        let run = three_ag_run(&g, &ids, p, ThreeAgMode::Epsilon(0.5), RoundModel::Local).unwrap();
        assert!(proper(&g, &run.colors));
        assert!(run.b_zero_round.unwrap() <= run.budget);
    }
}

#[test]
fn reduction_keeps_properness() {
    for g in graphs() {
        let ids: BTreeMap<VertexId, u64> = g.vertices().map(|v| (v, v as u64)).collect();
        let (c, _) = standard_reduction(&g, &ids, g.n_bound() as u64).unwrap();
        assert!(proper(&g, &c));
        assert!(c.values().all(|&x| x <= g.delta_bound() as u64));
    }
}

#[test]
fn defective_and_arbdefective_bounds() {
    for g in graphs() {
        let delta = g.delta_bound() as u64;
        for p in 1..=delta.max(1) {
            let d = defective_coloring(&g, p, RoundModel::Local).unwrap();
            for v in g.vertices() {
                let same = g.neighbors(v).iter().filter(|u| d.colors[u] == d.colors[&v]).count();
                assert!(same as u64 <= d.defect_bound);
            }
            let a = arbdefective_color(&g, p, RoundModel::Local).unwrap();
            assert!(a.final_at.values().all(Option::is_some), "p={p}");
            assert!(a.colors.values().all(|&c| c < a.q));
            for v in g.vertices() {
                let same_psi = g.neighbors(v).iter().filter(|u| a.psi0[u] == a.psi0[&v]).count();
                assert!(a.out_degree[&v] <= p as usize + same_psi);
            }
        }
    }
}
