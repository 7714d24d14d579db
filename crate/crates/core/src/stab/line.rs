//! Maximal matching and edge coloring by running the vertex layer on the
//! line graph. Each vertex keeps one record per incident edge; the copy
//! held by the smaller endpoint wins when the two disagree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MisKind, SsCore, SsRam, Status};
use crate::algebra::Color;
use crate::engine::{run, Ctx, FaultScript, Inbox, Outbox, Protocol, RoundModel, RunOptions, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

pub type Edge = (VertexId, VertexId);

/// Copy of the edge `(u, v)` both endpoints agree on: the smaller
/// endpoint's record.
pub fn reconcile_virtual(u: VertexId, copy_u: SsRam, v: VertexId, copy_v: SsRam) -> SsRam {
    if u < v {
        copy_u
    } else {
        copy_v
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineState {
    pub copies: BTreeMap<VertexId, SsRam>,
}

#[derive(Clone, Debug)]
pub struct LineProtocol {
    pub core: SsCore,
    pub n_bound: u64,
}

impl LineProtocol {
    /// Line graph of a graph with the given bounds: `n² ` edge identifiers
    /// and degree `2Δ − 2`.
    pub fn line_bounds(n_bound: u64, delta: u64) -> (u64, u64) {
        (n_bound * n_bound, (2 * delta).saturating_sub(2))
    }

    pub fn mm(n_bound: u64, delta: u64) -> Self {
        let (n_l, d_l) = Self::line_bounds(n_bound, delta);
        LineProtocol {
            core: SsCore::ag(n_l, d_l, MisKind::Status),
            n_bound,
        }
    }

    pub fn edge_coloring(n_bound: u64, delta: u64) -> Result<Self> {
        let (n_l, d_l) = Self::line_bounds(n_bound, delta);
        Ok(LineProtocol {
            core: SsCore::exact(n_l, d_l, MisKind::None)?,
            n_bound,
        })
    }

    pub fn edge_id(&self, u: VertexId, v: VertexId) -> u64 {
        u.min(v) as u64 * self.n_bound + u.max(v) as u64
    }
}

fn table_of(state: &LineState, neighbors: &[VertexId]) -> Vec<(VertexId, SsRam)> {
    neighbors
        .iter()
        .map(|&w| (w, state.copies.get(&w).copied().unwrap_or(SsRam::BLANK)))
        .collect()
}

impl Protocol for LineProtocol {
    type State = LineState;
    type Msg = Vec<(VertexId, SsRam)>;

    fn init(&self, _id: VertexId) -> LineState {
        LineState::default()
    }

    fn send(&self, ctx: &Ctx<'_>, state: &LineState) -> Outbox<Self::Msg> {
        Outbox::Broadcast(table_of(state, ctx.neighbors))
    }

    fn step(&self, ctx: &Ctx<'_>, state: &LineState, inbox: &Inbox<Self::Msg>) -> Result<LineState> {
        if inbox.ported().is_none() {
            return Err(Error::Model {
                vertex: ctx.id,
                round: ctx.round,
                reason: "line-graph simulation needs port numbering".into(),
            });
        }
        let me = ctx.id;
        let mine = table_of(state, ctx.neighbors);
        let mut copies = BTreeMap::new();
        for &v in ctx.neighbors {
            let theirs: &[(VertexId, SsRam)] = inbox.from(v).map_or(&[], Vec::as_slice);
            let lookup = |t: &[(VertexId, SsRam)], w: VertexId| {
                t.iter().find(|(x, _)| *x == w).map_or(SsRam::BLANK, |(_, r)| *r)
            };
            let rec = reconcile_virtual(me, lookup(&mine, v), v, lookup(theirs, me));
            let neighbors: Vec<SsRam> = mine
                .iter()
                .filter(|(w, _)| *w != v)
                .chain(theirs.iter().filter(|(x, _)| *x != me))
                .map(|(_, r)| *r)
                .collect();
            copies.insert(v, self.core.step(self.edge_id(me, v), &rec, &neighbors)?);
        }
        Ok(LineState { copies })
    }

    fn msg_bits(&self, _round: usize, msg: &Self::Msg) -> usize {
        msg.len() * self.core.ram_bits()
    }
}

pub fn line_run(
    graph: &Graph,
    protocol: &LineProtocol,
    model: RoundModel,
    faults: &FaultScript<LineState>,
    rounds: usize,
) -> Result<RunTrace<LineState>> {
    run(graph, protocol, model, faults, RunOptions::rounds(rounds))
}

/// Per-edge records as held by the smaller endpoint, over `graph`'s edges.
pub fn edge_records(graph: &Graph, state: &BTreeMap<VertexId, LineState>) -> BTreeMap<Edge, SsRam> {
    graph
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let r = state
                .get(&u)
                .and_then(|s| s.copies.get(&v))
                .copied()
                .unwrap_or(SsRam::BLANK);
            ((u, v), r)
        })
        .collect()
}

pub fn edge_colors(graph: &Graph, state: &BTreeMap<VertexId, LineState>) -> BTreeMap<Edge, Color> {
    edge_records(graph, state)
        .into_iter()
        .map(|(e, r)| (e, r.color))
        .collect()
}

pub fn matching(graph: &Graph, state: &BTreeMap<VertexId, LineState>) -> BTreeMap<Edge, bool> {
    edge_records(graph, state)
        .into_iter()
        .map(|(e, r)| (e, r.status == Status::Mis))
        .collect()
}

/// True when both endpoints hold the same record for every edge.
pub fn copies_consistent(graph: &Graph, state: &BTreeMap<VertexId, LineState>) -> bool {
    graph.edges().iter().all(|&(u, v)| {
        let a = state.get(&u).and_then(|s| s.copies.get(&v));
        let b = state.get(&v).and_then(|s| s.copies.get(&u));
        a.is_some() && a == b
    })
}
