#![allow(dead_code)]

use std::collections::BTreeMap;

use locit::engine::{FaultKind, FaultScript};
use locit::graph::{apply_topology_event, Graph, TopologyEvent, VertexId};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Properness straight from the definition.
pub fn proper<C: PartialEq>(g: &Graph, c: &BTreeMap<VertexId, C>) -> bool {
    g.edges().iter().all(|(u, v)| c[u] != c[v])
}

pub fn proper_edges<C: PartialEq>(g: &Graph, c: &BTreeMap<(VertexId, VertexId), C>) -> bool {
    let edges = g.edges();
    edges.iter().enumerate().all(|(x, e)| {
        edges[x + 1..].iter().all(|f| {
            let touch = e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1;
            !touch || c[e] != c[f]
        })
    })
}

/// Random topology event valid on `g`, if one exists.
pub fn random_topology(g: &Graph, rng: &mut ChaCha8Rng) -> Option<TopologyEvent> {
    let verts: Vec<VertexId> = g.vertices().collect();
    let cap = g.delta_bound() as usize;
    for _ in 0..20 {
        let ev = match rng.gen_range(0..4) {
            0 => {
                let edges = g.edges();
                let &(u, v) = edges.choose(rng)?;
                TopologyEvent::RemoveEdge { u, v }
            }
            1 => {
                let &u = verts.choose(rng)?;
                let &v = verts.choose(rng)?;
                if u == v || g.has_edge(u, v) || g.degree(u) >= cap || g.degree(v) >= cap {
                    continue;
                }
                TopologyEvent::AddEdge { u, v }
            }
            2 if verts.len() > 2 => TopologyEvent::RemoveVertex { v: *verts.choose(rng)? },
            _ => {
                let free: Vec<VertexId> = (0..g.n_bound()).filter(|v| !g.contains(*v)).collect();
                TopologyEvent::AddVertex { v: *free.choose(rng)? }
            }
        };
        return Some(ev);
    }
    None
}

/// `events` faults spread over rounds `[first, last]`; corruption picks a
/// live vertex and a state from `corrupt`.
pub fn random_script<S>(
    g: &Graph,
    rng: &mut ChaCha8Rng,
    events: usize,
    first: usize,
    last: usize,
    topology: bool,
    mut corrupt: impl FnMut(&mut ChaCha8Rng) -> S,
) -> FaultScript<S> {
    let mut rounds: Vec<usize> = (0..events).map(|_| rng.gen_range(first..=last)).collect();
    rounds.sort_unstable();
    let mut script = FaultScript::none();
    let mut current = g.clone();
    for round in rounds {
        let kind = if topology && rng.gen_bool(0.5) {
            match random_topology(&current, rng) {
                Some(event) => {
                    current = apply_topology_event(&current, &event).expect("valid event");
                    FaultKind::Topology { event }
                }
                None => continue,
            }
        } else {
            let verts: Vec<VertexId> = current.vertices().collect();
            let Some(&target) = verts.choose(rng) else { continue };
            FaultKind::Corrupt {
                target,
                state: corrupt(rng),
            }
        };
        script.push(round, kind);
    }
    script
}
