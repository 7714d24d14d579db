//! Bounded-degree undirected graphs with dynamic topology updates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// An undirected simple graph whose vertex IDs lie in `[0, n_bound)` and
/// whose degrees never exceed `delta_bound`.
///
/// Adjacency lists are kept sorted so that port numbering is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n_bound: u32,
    delta_bound: u32,
    adjacency: BTreeMap<VertexId, Vec<VertexId>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Path,
    Cycle,
    Complete,
    Star,
    RandomCapped,
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "path" => GraphKind::Path,
            "cycle" => GraphKind::Cycle,
            "complete" => GraphKind::Complete,
            "star" => GraphKind::Star,
            "random-capped" => GraphKind::RandomCapped,
            other => return Err(Error::GraphParams(format!("unknown graph kind {other:?}"))),
        })
    }
}

/// A change to the communication graph, applied between rounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TopologyEvent {
    AddVertex { v: VertexId },
    RemoveVertex { v: VertexId },
    AddEdge { u: VertexId, v: VertexId },
    RemoveEdge { u: VertexId, v: VertexId },
}

impl Graph {
    /// An edgeless graph with no vertices.
    pub fn empty(n_bound: u32, delta_bound: u32) -> Self {
        Graph {
            n_bound,
            delta_bound,
            adjacency: BTreeMap::new(),
        }
    }

    /// Builds a graph on `vertices` from an explicit edge list.
    pub fn from_edges(
        n_bound: u32,
        delta_bound: u32,
        vertices: impl IntoIterator<Item = VertexId>,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Self> {
        let mut g = Graph::empty(n_bound, delta_bound);
        for v in vertices {
            g.insert_vertex(v)?;
        }
        for &(u, v) in edges {
            g.insert_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n_bound(&self) -> u32 {
        self.n_bound
    }

    pub fn delta_bound(&self) -> u32 {
        self.delta_bound
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency.keys().copied()
    }

    /// Sorted neighbor list; empty for absent vertices.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// All edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.adjacency
            .iter()
            .flat_map(|(&u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    fn insert_vertex(&mut self, v: VertexId) -> Result<()> {
        if v >= self.n_bound {
            return Err(Error::Topology(format!(
                "vertex {v} outside [0, {})",
                self.n_bound
            )));
        }
        if self.adjacency.contains_key(&v) {
            return Err(Error::Topology(format!("vertex {v} already present")));
        }
        self.adjacency.insert(v, Vec::new());
        Ok(())
    }

    fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::Topology(format!("self-loop at {u}")));
        }
        for w in [u, v] {
            if !self.contains(w) {
                return Err(Error::Topology(format!("edge ({u},{v}): vertex {w} absent")));
            }
        }
        if self.has_edge(u, v) {
            return Err(Error::Topology(format!("edge ({u},{v}) already present")));
        }
        for w in [u, v] {
            if self.degree(w) as u32 >= self.delta_bound {
                return Err(Error::Topology(format!(
                    "edge ({u},{v}): degree of {w} would exceed {}",
                    self.delta_bound
                )));
            }
        }
        for (a, b) in [(u, v), (v, u)] {
            let list = self.adjacency.get_mut(&a).expect("checked above");
            let pos = list.binary_search(&b).unwrap_err();
            list.insert(pos, b);
        }
        Ok(())
    }

    fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::Topology(format!("edge ({u},{v}) absent")));
        }
        for (a, b) in [(u, v), (v, u)] {
            let list = self.adjacency.get_mut(&a).expect("edge present");
            let pos = list.binary_search(&b).expect("edge present");
            list.remove(pos);
        }
        Ok(())
    }

    fn delete_vertex(&mut self, v: VertexId) -> Result<()> {
        let ns = self
            .adjacency
            .remove(&v)
            .ok_or_else(|| Error::Topology(format!("vertex {v} absent")))?;
        for u in ns {
            let list = self.adjacency.get_mut(&u).expect("symmetric adjacency");
            let pos = list.binary_search(&v).expect("symmetric adjacency");
            list.remove(pos);
        }
        Ok(())
    }

    /// Serializes to the edge-list fixture format: a header `n delta`
    /// followed by one `u v` line per edge. Vertices are `0..n`.
    pub fn to_fixture(&self) -> String {
        let mut out = format!("{} {}\n", self.n_bound, self.delta_bound);
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").expect("writing to a String");
        }
        out
    }

    /// Parses the edge-list fixture format. Blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse_fixture(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_pair = |line: usize, l: &str| -> Result<(u32, u32)> {
            let fields: Vec<&str> = l.split_whitespace().collect();
            let bad = || Error::Parse {
                line,
                msg: format!("expected two integers, found {l:?}"),
            };
            if fields.len() != 2 {
                return Err(bad());
            }
            Ok((
                fields[0].parse().map_err(|_| bad())?,
                fields[1].parse().map_err(|_| bad())?,
            ))
        };
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, delta) = parse_pair(line, header)?;
        let mut g = Graph::empty(n, delta);
        for v in 0..n {
            g.insert_vertex(v)?;
        }
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            g.insert_edge(u, v).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(g)
    }
}

/// Deterministic generator. Vertices are `0..n` and `n_bound = n`.
pub fn build_graph(kind: GraphKind, n: u32, delta_cap: u32, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::GraphParams("n must be at least 1".into()));
    }
    let mut edges = Vec::new();
    match kind {
        GraphKind::Path => edges.extend((1..n).map(|v| (v - 1, v))),
        GraphKind::Cycle => {
            edges.extend((1..n).map(|v| (v - 1, v)));
            if n >= 3 {
                edges.push((0, n - 1));
            }
        }
        GraphKind::Complete => {
            for u in 0..n {
                edges.extend((u + 1..n).map(|v| (u, v)));
            }
        }
        GraphKind::Star => edges.extend((1..n).map(|v| (0, v))),
        GraphKind::RandomCapped => {
            if delta_cap == 0 {
                return Err(Error::GraphParams("random-capped needs delta >= 1".into()));
            }
            return Ok(random_capped(n, delta_cap, seed));
        }
    }
    let needed = required_degree(kind, n);
    if needed > delta_cap {
        return Err(Error::GraphParams(format!(
            "{kind:?} on {n} vertices needs degree {needed}, cap is {delta_cap}"
        )));
    }
    Graph::from_edges(n, delta_cap, 0..n, &edges)
}

fn required_degree(kind: GraphKind, n: u32) -> u32 {
    match kind {
        GraphKind::Path | GraphKind::Cycle => match n {
            1 => 0,
            2 => 1,
            _ => 2,
        },
        GraphKind::Complete | GraphKind::Star => n - 1,
        GraphKind::RandomCapped => 0,
    }
}

fn random_capped(n: u32, cap: u32, seed: u64) -> Graph {
    let mut g = Graph::empty(n, cap);
    for v in 0..n {
        g.insert_vertex(v).expect("fresh id");
    }
    if n < 2 {
        return g;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = (n as u64 * cap as u64 / 2) as usize;
    let attempts = 4 * n as usize * cap as usize;
    for _ in 0..attempts {
        if g.edge_count() >= target {
            break;
        }
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !g.has_edge(u, v) && g.degree(u) < cap as usize && g.degree(v) < cap as usize {
            g.insert_edge(u, v).expect("checked");
        }
    }
    g
}

/// Applies one topology event, returning the updated graph. The input graph
/// is left untouched; an invalid event is rejected with a diagnostic.
pub fn apply_topology_event(graph: &Graph, event: &TopologyEvent) -> Result<Graph> {
    let mut g = graph.clone();
    match *event {
        TopologyEvent::AddVertex { v } => g.insert_vertex(v)?,
        TopologyEvent::RemoveVertex { v } => g.delete_vertex(v)?,
        TopologyEvent::AddEdge { u, v } => g.insert_edge(u, v)?,
        TopologyEvent::RemoveEdge { u, v } => g.delete_edge(u, v)?,
    }
    Ok(g)
}
