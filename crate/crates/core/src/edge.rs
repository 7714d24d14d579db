//! Direct `(2Δ−1)`-edge-coloring: rank pairs from the ID orientation,
//! Cole-Vishkin inside each rank class, then 1-bit additive-group rounds or
//! 2-bit rounds of the exact mixed scheme.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ag::three::{ExactParams, Mixed};
use crate::algebra::{
    ag_update, bits_for, ceil_sqrt, decode_pair, encode_pair, has_conflict, select_prime, Color,
};
use crate::engine::{run, Ctx, FaultScript, Inbox, Outbox, Protocol, RoundModel, RunOptions, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::linial::cv::{cole_vishkin_3color, cv_bounds, cv_fold, cv_free_color, CvItem};

/// An edge as `(min, max)`.
pub type Edge = (VertexId, VertexId);

/// Rank of `v` among the neighbors of `u` with a greater ID (1-based).
fn out_rank(neighbors: &[VertexId], u: VertexId, v: VertexId) -> u32 {
    neighbors.iter().filter(|&&x| x > u && x <= v).count() as u32
}

/// Rank of `u` among the neighbors of `v` with a smaller ID (1-based).
fn in_rank(neighbors: &[VertexId], v: VertexId, u: VertexId) -> u32 {
    neighbors.iter().filter(|&&x| x < v && x <= u).count() as u32
}

/// Edges oriented toward the greater ID; `⟨i, j⟩` is the rank of the head
/// among the tail's out-neighbors and of the tail among the head's
/// in-neighbors.
pub fn kuhn_2defective_edge(graph: &Graph) -> BTreeMap<Edge, (u32, u32)> {
    graph
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let i = out_rank(graph.neighbors(u), u, v);
            let j = in_rank(graph.neighbors(v), v, u);
            ((u, v), (i, j))
        })
        .collect()
}

/// Index of the triple `⟨i, j, k⟩` (with `k ∈ {1, 2, 3}`) in `[0, 3Δ²)`.
pub fn triple_index(i: u32, j: u32, k: u8, delta: u64) -> Color {
    (((i as u64 - 1) * delta + (j as u64 - 1)) * 3) + (k as u64 - 1)
}

/// Cole-Vishkin inside every rank class, each edge identified by its
/// endpoint pair. Returns `⟨i, j, k⟩` per edge.
pub fn cv_edge_stage(
    graph: &Graph,
    pairs: &BTreeMap<Edge, (u32, u32)>,
) -> Result<BTreeMap<Edge, (u32, u32, u8)>> {
    let n = graph.n_bound() as u64;
    let mut classes: BTreeMap<(u32, u32), Vec<Edge>> = BTreeMap::new();
    for (&e, &ij) in pairs {
        classes.entry(ij).or_default().push(e);
    }
    let mut out = BTreeMap::new();
    for ((i, j), edges) in classes {
        let index: BTreeMap<Edge, usize> = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut tail_of: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (k, &(u, _)) in edges.iter().enumerate() {
            if tail_of.insert(u, k).is_some() {
                return Err(Error::NotPathForest(format!("class ⟨{i},{j}⟩ has two edges out of {u}")));
            }
        }
        let items: Vec<CvItem> = edges
            .iter()
            .map(|&(u, v)| CvItem {
                id: u as u64 * n + v as u64,
                succ: tail_of.get(&v).copied(),
            })
            .collect();
        let colors = cole_vishkin_3color(&items)?;
        for (e, k) in index {
            out.insert(e, (i, j, colors[k] + 1));
        }
    }
    Ok(out)
}

/// Final stage of the edge pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeMode {
    /// Pairs modulo a prime, one conflict bit per endpoint per round.
    Ag,
    /// The exact mixed scheme with `N = 2Δ − 1`, test and hold bits per
    /// endpoint per round.
    Exact,
}

/// Per-edge state, identical at both endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSlot {
    pub pair: Option<(u32, u32)>,
    /// Cole-Vishkin color while folding.
    pub cv: u64,
    /// Color of the final stage.
    pub value: Option<Color>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeVertexState {
    pub slots: BTreeMap<VertexId, EdgeSlot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeMsg {
    Id(VertexId),
    Rank(u32),
    Fold(u64),
    /// Color of this endpoint's class neighbor (7 when absent).
    Side(u64),
    Bit(bool),
    Bits(bool, bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeStage {
    Ids,
    Ranks,
    Fold(usize),
    Reduce(u64),
    Final(usize),
}

#[derive(Clone, Debug)]
pub struct EdgeProtocol {
    pub mode: EdgeMode,
    pub delta: u64,
    pub n_bound: u64,
    pub known_ids: bool,
    /// Palette bounds of the folds, starting at `n_bound²`.
    pub bounds: Vec<u64>,
    /// Modulus in AG mode.
    pub q: u64,
    pub exact: Option<ExactParams>,
    /// Starting colors per vertex when the preamble is skipped.
    pub start: Option<BTreeMap<VertexId, BTreeMap<VertexId, Color>>>,
}

const NO_SIDE: u64 = 7;

impl EdgeProtocol {
    pub fn new(n_bound: u64, delta: u64, mode: EdgeMode, known_ids: bool) -> Result<Self> {
        let delta_l = (2 * delta).saturating_sub(2);
        let palette = (3 * delta * delta).max(1);
        let q = select_prime((2 * delta_l + 1).max(ceil_sqrt(palette)));
        let exact = match mode {
            EdgeMode::Ag => None,
            EdgeMode::Exact => Some(ExactParams::new(delta_l, palette)?),
        };
        Ok(EdgeProtocol {
            mode,
            delta,
            n_bound,
            known_ids,
            bounds: cv_bounds((n_bound * n_bound).max(1)),
            q,
            exact,
            start: None,
        })
    }

    /// Skips the preamble and starts the final stage from `colors`.
    pub fn with_start(mut self, colors: &BTreeMap<Edge, Color>) -> Self {
        let mut start: BTreeMap<VertexId, BTreeMap<VertexId, Color>> = BTreeMap::new();
        for (&(u, v), &c) in colors {
            start.entry(u).or_default().insert(v, c);
            start.entry(v).or_default().insert(u, c);
        }
        self.start = Some(start);
        self
    }

    pub fn preamble_rounds(&self) -> usize {
        if self.start.is_some() {
            0
        } else {
            usize::from(!self.known_ids) + 1 + (self.bounds.len() - 1) + 3
        }
    }

    pub fn stage(&self, round: usize) -> EdgeStage {
        if self.start.is_some() {
            return EdgeStage::Final(round);
        }
        let mut r = round;
        if !self.known_ids {
            if r == 1 {
                return EdgeStage::Ids;
            }
            r -= 1;
        }
        if r == 1 {
            return EdgeStage::Ranks;
        }
        r -= 1;
        let folds = self.bounds.len() - 1;
        if r <= folds {
            return EdgeStage::Fold(r);
        }
        r -= folds;
        if r <= 3 {
            return EdgeStage::Reduce(6 - r as u64);
        }
        EdgeStage::Final(r - 3)
    }

    fn is_final(&self, value: Color) -> bool {
        match self.mode {
            EdgeMode::Ag => value < self.q,
            EdgeMode::Exact => value < self.exact.expect("exact params").n,
        }
    }

    /// Edge color reported once the run ends.
    pub fn output(&self, value: Color) -> Color {
        match self.mode {
            EdgeMode::Ag => value % self.q,
            EdgeMode::Exact => value,
        }
    }

    pub fn budget(&self) -> usize {
        match self.exact {
            None => self.q as usize,
            Some(e) => 4 * (e.p + e.n) as usize * e.n as usize + 16,
        }
    }

    /// Class neighbors of the edge to `other`: the incoming class edge when
    /// this vertex is the tail, the outgoing one when it is the head.
    fn class_neighbor(&self, me: VertexId, other: VertexId, state: &EdgeVertexState) -> Option<u64> {
        let slot = &state.slots[&other];
        let pair = slot.pair?;
        state
            .slots
            .iter()
            .find(|(&w, s)| {
                w != other && s.pair == Some(pair) && ((me < other) == (w < me))
            })
            .map(|(_, s)| s.cv)
    }

    fn local_test(&self, other: VertexId, state: &EdgeVertexState) -> Result<(bool, bool)> {
        let me = state.slots[&other].value.expect("final stage");
        let rest = state
            .slots
            .iter()
            .filter(|(&w, _)| w != other)
            .map(|(_, s)| s.value.expect("final stage"));
        match self.mode {
            EdgeMode::Ag => {
                let others = rest.map(|c| encode_pair(c, self.q)).collect::<Result<Vec<_>>>()?;
                Ok((has_conflict(encode_pair(me, self.q)?, &others)?, false))
            }
            EdgeMode::Exact => {
                let ex = self.exact.expect("exact params");
                let others = rest.map(|c| ex.decode(c)).collect::<Result<Vec<Mixed>>>()?;
                Ok(ex.local_flags(ex.decode(me)?, &others))
            }
        }
    }

    fn apply(&self, value: Color, test: bool, hold: bool) -> Result<Color> {
        match self.mode {
            EdgeMode::Ag => Ok(decode_pair(ag_update(encode_pair(value, self.q)?, test))),
            EdgeMode::Exact => {
                let ex = self.exact.expect("exact params");
                Ok(ex.encode(ex.apply(ex.decode(value)?, test, hold)))
            }
        }
    }
}

impl Protocol for EdgeProtocol {
    type State = EdgeVertexState;
    type Msg = EdgeMsg;

    fn init(&self, id: VertexId) -> EdgeVertexState {
        let slots = self
            .start
            .as_ref()
            .and_then(|s| s.get(&id))
            .map(|m| {
                m.iter()
                    .map(|(&w, &c)| {
                        (
                            w,
                            EdgeSlot {
                                pair: None,
                                cv: 0,
                                value: Some(c),
                            },
                        )
                    })
                    .collect()
            })
            .unwrap_or_default();
        EdgeVertexState { slots }
    }

    fn send(&self, ctx: &Ctx<'_>, state: &EdgeVertexState) -> Outbox<EdgeMsg> {
        let me = ctx.id;
        let per = |f: &dyn Fn(VertexId) -> Option<EdgeMsg>| {
            Outbox::PerNeighbor(ctx.neighbors.iter().filter_map(|&w| f(w).map(|m| (w, m))).collect())
        };
        match self.stage(ctx.round) {
            EdgeStage::Ids => Outbox::Broadcast(EdgeMsg::Id(me)),
            EdgeStage::Ranks => per(&|w| {
                Some(EdgeMsg::Rank(if me < w {
                    out_rank(ctx.neighbors, me, w)
                } else {
                    in_rank(ctx.neighbors, me, w)
                }))
            }),
            EdgeStage::Fold(_) => per(&|w| {
                (w < me).then(|| {
                    let succ = self.class_neighbor(me, w, state);
                    EdgeMsg::Fold(cv_fold(state.slots[&w].cv, succ))
                })
            }),
            EdgeStage::Reduce(target) => per(&|w| {
                (state.slots[&w].cv == target)
                    .then(|| EdgeMsg::Side(self.class_neighbor(me, w, state).unwrap_or(NO_SIDE)))
            }),
            EdgeStage::Final(_) => per(&|w| {
                let value = state.slots[&w].value?;
                if self.is_final(value) {
                    return None;
                }
                let (test, hold) = self.local_test(w, state).ok()?;
                Some(match self.mode {
                    EdgeMode::Ag => EdgeMsg::Bit(test),
                    EdgeMode::Exact => EdgeMsg::Bits(test, hold),
                })
            }),
        }
    }

    fn step(&self, ctx: &Ctx<'_>, state: &EdgeVertexState, inbox: &Inbox<EdgeMsg>) -> Result<EdgeVertexState> {
        let me = ctx.id;
        let model_err = |reason: &str| Error::Model {
            vertex: me,
            round: ctx.round,
            reason: reason.into(),
        };
        if inbox.ported().is_none() {
            return Err(model_err("edge coloring needs port numbering"));
        }
        let mut next = state.clone();
        match self.stage(ctx.round) {
            EdgeStage::Ids => {
                for &w in ctx.neighbors {
                    let (u, v) = (me.min(w), me.max(w));
                    next.slots.insert(
                        w,
                        EdgeSlot {
                            pair: None,
                            cv: u as u64 * self.n_bound + v as u64,
                            value: None,
                        },
                    );
                }
            }
            EdgeStage::Ranks => {
                for &w in ctx.neighbors {
                    let Some(EdgeMsg::Rank(theirs)) = inbox.from(w) else {
                        return Err(model_err("missing rank"));
                    };
                    let (u, v) = (me.min(w), me.max(w));
                    let pair = if me < w {
                        (out_rank(ctx.neighbors, me, w), *theirs)
                    } else {
                        (*theirs, in_rank(ctx.neighbors, me, w))
                    };
                    next.slots.insert(
                        w,
                        EdgeSlot {
                            pair: Some(pair),
                            cv: u as u64 * self.n_bound + v as u64,
                            value: None,
                        },
                    );
                }
            }
            EdgeStage::Fold(_) => {
                for &w in ctx.neighbors {
                    let cv = if w < me {
                        cv_fold(state.slots[&w].cv, self.class_neighbor(me, w, state))
                    } else {
                        match inbox.from(w) {
                            Some(EdgeMsg::Fold(c)) => *c,
                            _ => return Err(model_err("missing fold")),
                        }
                    };
                    next.slots.get_mut(&w).expect("slot").cv = cv;
                }
            }
            EdgeStage::Reduce(target) => {
                for &w in ctx.neighbors {
                    let slot = &state.slots[&w];
                    if slot.cv == target {
                        let mine = self.class_neighbor(me, w, state);
                        let theirs = match inbox.from(w) {
                            Some(EdgeMsg::Side(c)) => (*c != NO_SIDE).then_some(*c),
                            _ => return Err(model_err("missing side")),
                        };
                        let (pred, succ) = if me < w { (mine, theirs) } else { (theirs, mine) };
                        next.slots.get_mut(&w).expect("slot").cv = cv_free_color(pred, succ);
                    }
                }
                if target == 3 {
                    for slot in next.slots.values_mut() {
                        let (i, j) = slot.pair.expect("ranked");
                        let t = triple_index(i, j, slot.cv as u8 + 1, self.delta);
                        slot.value = Some(t);
                    }
                }
            }
            EdgeStage::Final(_) => {
                for &w in ctx.neighbors {
                    let Some(value) = state.slots[&w].value else {
                        return Err(model_err("edge without a color"));
                    };
                    if self.is_final(value) {
                        continue;
                    }
                    let (test, hold) = self.local_test(w, state)?;
                    let (t2, h2) = match inbox.from(w) {
                        Some(EdgeMsg::Bit(b)) => (*b, false),
                        Some(EdgeMsg::Bits(t, h)) => (*t, *h),
                        _ => return Err(model_err("missing conflict bits")),
                    };
                    next.slots.get_mut(&w).expect("slot").value =
                        Some(self.apply(value, test || t2, hold || h2)?);
                }
            }
        }
        Ok(next)
    }

    fn msg_bits(&self, round: usize, msg: &EdgeMsg) -> usize {
        match msg {
            EdgeMsg::Id(_) => bits_for(self.n_bound),
            EdgeMsg::Rank(_) => bits_for(self.delta + 1),
            EdgeMsg::Fold(_) => match self.stage(round) {
                EdgeStage::Fold(f) => bits_for(self.bounds[f]),
                _ => bits_for(self.n_bound * self.n_bound),
            },
            EdgeMsg::Side(_) => 3,
            EdgeMsg::Bit(_) => 1,
            EdgeMsg::Bits(..) => 2,
        }
    }

    fn phase_bits(&self, round: usize) -> Option<usize> {
        Some(match self.stage(round) {
            EdgeStage::Ids => bits_for(self.n_bound),
            EdgeStage::Ranks => bits_for(self.delta + 1),
            EdgeStage::Fold(f) => bits_for(self.bounds[f]),
            EdgeStage::Reduce(_) => 3,
            EdgeStage::Final(_) => match self.mode {
                EdgeMode::Ag => 1,
                EdgeMode::Exact => 2,
            },
        })
    }

    fn halted(&self, round: usize, state: &EdgeVertexState) -> bool {
        round >= self.preamble_rounds()
            && state
                .slots
                .values()
                .all(|s| s.value.is_some_and(|v| self.is_final(v)))
    }
}

/// True when both endpoints of every edge hold the same slot.
pub fn endpoints_consistent(graph: &Graph, states: &BTreeMap<VertexId, EdgeVertexState>) -> bool {
    graph.edges().iter().all(|&(u, v)| {
        let a = states.get(&u).and_then(|s| s.slots.get(&v));
        let b = states.get(&v).and_then(|s| s.slots.get(&u));
        a == b
    })
}

#[derive(Clone, Debug)]
pub struct EdgeRun {
    pub colors: BTreeMap<Edge, Color>,
    pub protocol: EdgeProtocol,
    pub trace: RunTrace<EdgeVertexState>,
    /// Rounds of the final stage until every edge was final.
    pub final_rounds: Option<usize>,
}

impl EdgeRun {
    /// Edge colors (raw final-stage values) at snapshot `r`, when every
    /// edge has one.
    pub fn values_at(&self, r: usize) -> Option<BTreeMap<Edge, Color>> {
        let snap = self.trace.snapshots.get(r)?;
        let mut out = BTreeMap::new();
        for (&u, s) in snap {
            for (&w, slot) in &s.slots {
                if u < w {
                    out.insert((u, w), slot.value?);
                }
            }
        }
        Some(out)
    }
}

fn drive(graph: &Graph, protocol: EdgeProtocol, model: RoundModel) -> Result<EdgeRun> {
    let pre = protocol.preamble_rounds();
    let trace = run(
        graph,
        &protocol,
        model,
        &FaultScript::none(),
        RunOptions::until_halted(pre + protocol.budget()),
    )?;
    for (r, snap) in trace.snapshots.iter().enumerate() {
        if !endpoints_consistent(graph, snap) {
            return Err(Error::Topology(format!("endpoint states disagree after round {r}")));
        }
    }
    let done = |s: &BTreeMap<VertexId, EdgeVertexState>| {
        s.values()
            .all(|st| st.slots.values().all(|x| x.value.is_some_and(|v| protocol.is_final(v))))
    };
    let final_rounds = trace.snapshots.iter().skip(pre).position(done);
    let mut colors = BTreeMap::new();
    for (&u, s) in trace.final_state() {
        for (&w, slot) in &s.slots {
            if u < w {
                let v = slot.value.ok_or_else(|| Error::Params("edge never colored".into()))?;
                colors.insert((u, w), protocol.output(v));
            }
        }
    }
    Ok(EdgeRun {
        colors,
        protocol,
        trace,
        final_rounds,
    })
}

/// Full distributed pipeline.
pub fn edge_color(graph: &Graph, mode: EdgeMode, model: RoundModel, known_ids: bool) -> Result<EdgeRun> {
    let protocol = EdgeProtocol::new(graph.n_bound() as u64, graph.delta_bound() as u64, mode, known_ids)?;
    drive(graph, protocol, model)
}

fn start_checked(graph: &Graph, colors: &BTreeMap<Edge, Color>, palette: u64) -> Result<()> {
    for (u, v) in graph.edges() {
        let c = *colors
            .get(&(u, v))
            .ok_or_else(|| Error::ImproperInput(format!("edge ({u},{v}) uncolored")))?;
        if c >= palette {
            return Err(Error::ColorRange { value: c, modulus: palette });
        }
        for w in [u, v] {
            for &x in graph.neighbors(w) {
                let f = (w.min(x), w.max(x));
                if f != (u, v) && colors.get(&f) == Some(&c) {
                    return Err(Error::ImproperInput(format!("edges ({u},{v}) and {f:?} share {c}")));
                }
            }
        }
    }
    Ok(())
}

/// 1-bit AG rounds from a proper edge coloring with palette `<= 3Δ²`.
pub fn edge_ag_run(graph: &Graph, colors: &BTreeMap<Edge, Color>, model: RoundModel) -> Result<EdgeRun> {
    let delta = graph.delta_bound() as u64;
    let protocol = EdgeProtocol::new(graph.n_bound() as u64, delta, EdgeMode::Ag, true)?.with_start(colors);
    start_checked(graph, colors, protocol.q * protocol.q)?;
    drive(graph, protocol, model)
}

/// 2-bit rounds of the exact scheme, ending with colors in `[0, 2Δ−2]`.
pub fn edge_3ag_run(graph: &Graph, colors: &BTreeMap<Edge, Color>, model: RoundModel) -> Result<EdgeRun> {
    let delta = graph.delta_bound() as u64;
    let protocol =
        EdgeProtocol::new(graph.n_bound() as u64, delta, EdgeMode::Exact, true)?.with_start(colors);
    start_checked(graph, colors, protocol.exact.expect("exact params").palette())?;
    drive(graph, protocol, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_ranks() {
        let g = Graph::from_edges(2, 1, [0, 1], &[(0, 1)]).unwrap();
        assert_eq!(kuhn_2defective_edge(&g)[&(0, 1)], (1, 1));
    }

    #[test]
    fn stages_cover_the_preamble() {
        let p = EdgeProtocol::new(16, 3, EdgeMode::Ag, false).unwrap();
        assert_eq!(p.stage(1), EdgeStage::Ids);
        assert_eq!(p.stage(2), EdgeStage::Ranks);
        assert_eq!(p.stage(3), EdgeStage::Fold(1));
        let pre = p.preamble_rounds();
        assert_eq!(p.stage(pre), EdgeStage::Reduce(3));
        assert_eq!(p.stage(pre + 1), EdgeStage::Final(1));
    }
}
