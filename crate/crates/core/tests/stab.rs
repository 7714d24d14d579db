mod common;

use common::{proper, proper_edges, random_script};
use locit::engine::{FaultKind, FaultScript, RoundModel};
use locit::graph::{build_graph, GraphKind};
use locit::stab::line::{copies_consistent, edge_colors, line_run, matching, LineProtocol, LineState};
use locit::stab::{colors_of, coloring_bound, mis_of, ss_run, MisKind, SsCore, SsRam, Status};
use locit::verify::{adjustment_radius, adjustment_radius_edges, is_mis, is_mm, stabilization_time};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_ram(rng: &mut ChaCha8Rng, total: u64) -> SsRam {
    SsRam {
        color: rng.gen_range(0..total + total / 4 + 1),
        mu: rng.gen_bool(0.5),
        status: [Status::Mis, Status::NotMis, Status::Undecided][rng.gen_range(0..3)],
    }
}

fn check_coloring_run(core: &SsCore, seed: u64, n: u32, delta: u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = build_graph(GraphKind::RandomCapped, n, delta, seed).unwrap();
    let total = core.table.total();
    let script = random_script(&g, &mut rng, 6, 1, 12, true, |r| random_ram(r, total));
    let f = script.last_round().unwrap_or(0);
    let bound = coloring_bound(core);
    let trace = ss_run(&g, core, RoundModel::Local, &script, f + bound + 5).unwrap();
    for r in f..trace.snapshots.len() {
        assert!(proper(&trace.graphs[r], &colors_of(&trace.snapshots[r])), "seed {seed} round {r}");
    }
    let t = stabilization_time(&trace, |_, s| s.values().all(|x| core.is_final(x.color))).unwrap();
    assert!(t <= bound, "seed {seed}: {t} > {bound}");
}

#[test]
fn ag_coloring_stabilizes_after_churn() {
    for seed in 0..12 {
        let core = SsCore::ag(60, 6, MisKind::None);
        check_coloring_run(&core, seed, 60, 6);
    }
}

#[test]
fn exact_coloring_stabilizes_to_delta_plus_one() {
    for seed in 0..12 {
        let core = SsCore::exact(60, 6, MisKind::None).unwrap();
        check_coloring_run(&core, seed, 60, 6);
    }
}

#[test]
fn single_vertex_recovers_from_any_value() {
    let g = build_graph(GraphKind::Path, 1, 1, 0).unwrap();
    let core = SsCore::exact(1, 1, MisKind::None).unwrap();
    for color in [0, 1, 5, 1000, u64::MAX] {
        let mut script = FaultScript::none();
        script.push(1, FaultKind::Corrupt { target: 0, state: SsRam { color, ..SsRam::BLANK } });
        let trace = ss_run(&g, &core, RoundModel::Local, &script, 20).unwrap();
        assert!(trace.final_state()[&0].color <= 1);
    }
}

#[test]
fn k3_corruption_gives_proper_coloring_every_round() {
    let g = build_graph(GraphKind::Complete, 3, 2, 0).unwrap();
    let core = SsCore::ag(3, 2, MisKind::None);
    let total = core.table.total();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let mut script = FaultScript::none();
        for v in 0..3 {
            script.push(1, FaultKind::Corrupt { target: v, state: random_ram(&mut rng, total) });
        }
        let trace = ss_run(&g, &core, RoundModel::Local, &script, 2 + coloring_bound(&core)).unwrap();
        for s in &trace.snapshots[1..] {
            assert!(proper(&g, &colors_of(s)));
        }
        assert!(trace.final_state().values().all(|x| core.is_final(x.color)));
    }
}

#[test]
fn mis_variants_stabilize() {
    for kind in [MisKind::Mu, MisKind::Status] {
        for seed in 0..6 {
            let g = build_graph(GraphKind::RandomCapped, 40, 5, seed).unwrap();
            let core = SsCore::ag(40, 5, kind);
            let total = core.table.total();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let script = random_script(&g, &mut rng, 5, 1, 8, true, |r| random_ram(r, total));
            let f = script.last_round().unwrap_or(0);
            let rounds = f + 2 * coloring_bound(&core) + core.final_palette() as usize;
            let trace = ss_run(&g, &core, RoundModel::Local, &script, rounds).unwrap();
            assert!(is_mis(trace.final_graph(), &mis_of(&core, trace.final_state())).unwrap());
        }
    }
}

#[test]
fn single_corruption_radii() {
    for seed in 0..8 {
        let g = build_graph(GraphKind::RandomCapped, 40, 5, seed).unwrap();
        let core = SsCore::ag(40, 5, MisKind::Status);
        let settle = 2 * coloring_bound(&core) + core.final_palette() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let target = rng.gen_range(0..40);
        let mut script = FaultScript::none();
        script.push(settle, FaultKind::Corrupt { target, state: random_ram(&mut rng, core.table.total()) });
        let trace = ss_run(&g, &core, RoundModel::Local, &script, 2 * settle).unwrap();
        let color_r = adjustment_radius(&trace, |_, s| colors_of(s)).unwrap_or(0);
        let mis_r = adjustment_radius(&trace, |_, s| mis_of(&core, s)).unwrap_or(0);
        assert!(color_r <= 1, "seed {seed}: coloring radius {color_r}");
        assert!(mis_r <= 2, "seed {seed}: MIS radius {mis_r}");
    }
}

#[test]
fn line_graph_mm_and_edge_coloring() {
    for seed in 0..4 {
        let g = build_graph(GraphKind::RandomCapped, 20, 4, seed).unwrap();
        let mm = LineProtocol::mm(20, 4);
        let ec = LineProtocol::edge_coloring(20, 4).unwrap();
        let settle_mm = 2 * coloring_bound(&mm.core) + mm.core.final_palette() as usize;
        let settle_ec = 2 * coloring_bound(&ec.core);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = rng.gen_range(0..20);
        let corrupt = |rng: &mut ChaCha8Rng, core: &SsCore| {
            let mut st = LineState::default();
            for &w in g.neighbors(target) {
                st.copies.insert(w, random_ram(rng, core.table.total()));
            }
            st
        };

        let mut script = FaultScript::none();
        script.push(settle_mm, FaultKind::Corrupt { target, state: corrupt(&mut rng, &mm.core) });
        let t = line_run(&g, &mm, RoundModel::Local, &script, 2 * settle_mm).unwrap();
        assert!(copies_consistent(&g, t.final_state()));
        assert!(is_mm(&g, &matching(&g, t.final_state())).unwrap());
        let r = adjustment_radius_edges(&t, matching).unwrap_or(0);
        assert!(r <= 3, "seed {seed}: MM radius {r}");

        let mut script = FaultScript::none();
        script.push(settle_ec, FaultKind::Corrupt { target, state: corrupt(&mut rng, &ec.core) });
        let t = line_run(&g, &ec, RoundModel::Local, &script, 2 * settle_ec).unwrap();
        for r in settle_ec + 1..t.snapshots.len() {
            assert!(proper_edges(&g, &edge_colors(&g, &t.snapshots[r])), "round {r}");
        }
        assert!(edge_colors(&g, t.final_state()).values().all(|&c| c <= 6));
        let r = adjustment_radius_edges(&t, edge_colors).unwrap_or(0);
        assert!(r <= 2, "seed {seed}: edge-coloring radius {r}");
    }
}
