//! Straight-line oracles and run metrics. Nothing here calls into the
//! algorithm modules.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::engine::RunTrace;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

pub type Edge = (VertexId, VertexId);

fn lookup<'a, K: Ord + std::fmt::Debug, V>(map: &'a BTreeMap<K, V>, key: &K) -> Result<&'a V> {
    map.get(key)
        .ok_or_else(|| Error::ImproperInput(format!("no value assigned to {key:?}")))
}

pub fn is_proper_coloring<C: PartialEq>(graph: &Graph, colors: &BTreeMap<VertexId, C>) -> Result<bool> {
    for v in graph.vertices() {
        lookup(colors, &v)?;
    }
    for (u, v) in graph.edges() {
        if colors[&u] == colors[&v] {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_proper_edge_coloring<C: PartialEq>(graph: &Graph, colors: &BTreeMap<Edge, C>) -> Result<bool> {
    for v in graph.vertices() {
        let incident: Vec<Edge> = graph.neighbors(v).iter().map(|&w| (v.min(w), v.max(w))).collect();
        for (i, e) in incident.iter().enumerate() {
            let ce = lookup(colors, e)?;
            for f in &incident[i + 1..] {
                if ce == lookup(colors, f)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Independent and dominating.
pub fn is_mis(graph: &Graph, members: &BTreeMap<VertexId, bool>) -> Result<bool> {
    for v in graph.vertices() {
        let inside = *lookup(members, &v)?;
        let mut covered = inside;
        for &w in graph.neighbors(v) {
            let other = *lookup(members, &w)?;
            if inside && other {
                return Ok(false);
            }
            covered |= other;
        }
        if !covered {
            return Ok(false);
        }
    }
    Ok(true)
}

/// No two matched edges share a vertex, and every unmatched edge touches a
/// matched one.
pub fn is_mm(graph: &Graph, matched: &BTreeMap<Edge, bool>) -> Result<bool> {
    let mut saturated = BTreeSet::new();
    for (u, v) in graph.edges() {
        if *lookup(matched, &(u, v))? && (!saturated.insert(u) || !saturated.insert(v)) {
            return Ok(false);
        }
    }
    Ok(graph
        .edges()
        .iter()
        .all(|(u, v)| saturated.contains(u) || saturated.contains(v)))
}

/// Largest number of same-colored neighbors of any vertex.
pub fn defect<C: PartialEq>(graph: &Graph, colors: &BTreeMap<VertexId, C>) -> Result<usize> {
    let mut worst = 0;
    for v in graph.vertices() {
        let c = lookup(colors, &v)?;
        let mut same = 0;
        for w in graph.neighbors(v) {
            if lookup(colors, w)? == c {
                same += 1;
            }
        }
        worst = worst.max(same);
    }
    Ok(worst)
}

/// Largest same-colored out-degree under `heads` (edge to its head).
pub fn arbdefect_witness<C: PartialEq>(
    graph: &Graph,
    colors: &BTreeMap<VertexId, C>,
    heads: &BTreeMap<Edge, VertexId>,
) -> Result<usize> {
    let mut out: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (u, v) in graph.edges() {
        let head = *lookup(heads, &(u, v))?;
        if head != u && head != v {
            return Err(Error::ImproperInput(format!("head {head} is not on edge ({u},{v})")));
        }
        if lookup(colors, &u)? == lookup(colors, &v)? {
            let tail = if head == u { v } else { u };
            *out.entry(tail).or_default() += 1;
        }
    }
    Ok(out.values().copied().max().unwrap_or(0))
}

/// Rounds until `pred` holds forever, counted from the last fault round
/// inclusively (`s − f + 1`), or the first such snapshot index in a
/// fault-free run. `None` if the predicate fails on the last snapshot.
pub fn stabilization_time<S>(
    trace: &RunTrace<S>,
    pred: impl Fn(&Graph, &BTreeMap<VertexId, S>) -> bool,
) -> Option<usize> {
    let f = trace.last_fault_round().unwrap_or(0);
    let mut s = None;
    for r in (f..trace.snapshots.len()).rev() {
        if pred(&trace.graphs[r], &trace.snapshots[r]) {
            s = Some(r);
        } else {
            break;
        }
    }
    let s = s?;
    Some(if f == 0 { s } else { s - f + 1 })
}

/// Hop distance from the fault sites over the final topology; sites start
/// at their recorded initial distance.
pub fn fault_distances<S>(trace: &RunTrace<S>) -> BTreeMap<VertexId, u32> {
    let graph = trace.final_graph();
    let mut dist: BTreeMap<VertexId, u32> = BTreeMap::new();
    let mut seeds: Vec<(u32, VertexId)> = trace
        .rounds
        .iter()
        .flat_map(|r| r.fault_sites.iter().map(|&(v, d)| (d, v)))
        .filter(|(_, v)| graph.contains(*v))
        .collect();
    seeds.sort_unstable();
    let mut queue = VecDeque::new();
    for (d, v) in seeds {
        if dist.get(&v).is_none_or(|&old| d < old) {
            dist.insert(v, d);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for &w in graph.neighbors(v) {
            if dist.get(&w).is_none_or(|&old| d + 1 < old) {
                dist.insert(w, d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Snapshot just before the first fault.
fn baseline_index<S>(trace: &RunTrace<S>) -> Option<usize> {
    trace.fault_rounds().first().map(|&f| f - 1)
}

/// Largest distance from a fault site of any vertex whose output differs
/// between the pre-fault snapshot and the final one. `None` when nothing
/// changed; `u32::MAX` for a changed vertex out of reach of every site.
pub fn adjustment_radius<S, O: PartialEq>(
    trace: &RunTrace<S>,
    output: impl Fn(&Graph, &BTreeMap<VertexId, S>) -> BTreeMap<VertexId, O>,
) -> Option<u32> {
    let b = baseline_index(trace)?;
    let before = output(&trace.graphs[b], &trace.snapshots[b]);
    let after = output(trace.final_graph(), trace.final_state());
    let dist = fault_distances(trace);
    after
        .iter()
        .filter(|(v, o)| before.get(v) != Some(o))
        .map(|(v, _)| dist.get(v).copied().unwrap_or(u32::MAX))
        .max()
}

/// Edge version: an edge's distance is the larger endpoint distance.
pub fn adjustment_radius_edges<S, O: PartialEq>(
    trace: &RunTrace<S>,
    output: impl Fn(&Graph, &BTreeMap<VertexId, S>) -> BTreeMap<Edge, O>,
) -> Option<u32> {
    let b = baseline_index(trace)?;
    let before = output(&trace.graphs[b], &trace.snapshots[b]);
    let after = output(trace.final_graph(), trace.final_state());
    let dist = fault_distances(trace);
    let d = |v: &VertexId| dist.get(v).copied().unwrap_or(u32::MAX);
    after
        .iter()
        .filter(|(e, o)| before.get(e) != Some(o))
        .map(|((u, v), _)| d(u).max(d(v)))
        .max()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: u32) -> Graph {
        let edges: Vec<Edge> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_edges(n, n - 1, 0..n, &edges).unwrap()
    }

    #[test]
    fn k3_colorings() {
        let g = k(3);
        let good = BTreeMap::from([(0, 0), (1, 1), (2, 2)]);
        let bad = BTreeMap::from([(0, 0), (1, 0), (2, 1)]);
        assert!(is_proper_coloring(&g, &good).unwrap());
        assert!(!is_proper_coloring(&g, &bad).unwrap());
        assert!(is_proper_coloring(&g, &BTreeMap::from([(0, 0)])).is_err());
    }

    #[test]
    fn k4_single_color_defect() {
        let g = k(4);
        let c: BTreeMap<VertexId, u8> = (0..4).map(|v| (v, 0)).collect();
        assert_eq!(defect(&g, &c).unwrap(), 3);
    }

    #[test]
    fn star_mis() {
        let g = Graph::from_edges(3, 2, 0..3, &[(0, 1), (0, 2)]).unwrap();
        let center = BTreeMap::from([(0, true), (1, false), (2, false)]);
        let leaf = BTreeMap::from([(0, false), (1, true), (2, false)]);
        assert!(is_mis(&g, &center).unwrap());
        assert!(!is_mis(&g, &leaf).unwrap());
    }

    #[test]
    fn path_matchings() {
        let g = Graph::from_edges(4, 2, 0..4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let mid = BTreeMap::from([((0, 1), false), ((1, 2), true), ((2, 3), false)]);
        let both = BTreeMap::from([((0, 1), true), ((1, 2), true), ((2, 3), false)]);
        let none = BTreeMap::from([((0, 1), false), ((1, 2), false), ((2, 3), false)]);
        assert!(is_mm(&g, &mid).unwrap());
        assert!(!is_mm(&g, &both).unwrap());
        assert!(!is_mm(&g, &none).unwrap());
    }
}
