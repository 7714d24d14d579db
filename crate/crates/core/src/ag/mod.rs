//! Static additive-group pipelines: AG, standard reduction, arbdefective
//! coloring, 3AG and the exact (Δ+1) scheme.

pub mod arb;
pub mod three;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{ag_update, bits_for, ceil_sqrt, encode_pair, select_prime, Color};
use crate::engine::{run, Ctx, FaultScript, Inbox, Outbox, Protocol, RoundModel, RunOptions, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::linial::{linial_step, reduction_chain, LinialParams};

/// Field size for the additive-group stage on a palette of `k` colors.
pub fn ag_modulus(delta: u64, k: u64) -> u64 {
    select_prime((2 * delta + 1).max(ceil_sqrt(k)))
}

/// Colors of all neighbors as delivered this round.
pub(crate) fn neighbor_colors(inbox: &Inbox<Color>) -> Vec<Color> {
    inbox.messages().copied().collect()
}

/// Bare additive-group rounds from a given proper coloring.
#[derive(Clone, Debug)]
pub struct AgProtocol {
    pub q: u64,
    pub initial: BTreeMap<VertexId, Color>,
}

impl Protocol for AgProtocol {
    type State = Color;
    type Msg = Color;

    fn init(&self, id: VertexId) -> Color {
        self.initial.get(&id).copied().unwrap_or(id as Color)
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &Color) -> Outbox<Color> {
        Outbox::Broadcast(*state)
    }

    fn step(&self, _ctx: &Ctx<'_>, state: &Color, inbox: &Inbox<Color>) -> Result<Color> {
        let mine = encode_pair(*state, self.q)?;
        let mut conflicted = false;
        for &c in inbox.messages() {
            conflicted |= encode_pair(c, self.q)?.b == mine.b;
        }
        let next = ag_update(mine, conflicted);
        Ok(next.a * next.q + next.b)
    }

    fn msg_bits(&self, _round: usize, _msg: &Color) -> usize {
        bits_for(self.q * self.q)
    }

    fn halted(&self, _round: usize, state: &Color) -> bool {
        *state < self.q
    }
}

/// Message format of the AG stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgWire {
    /// Every round carries the full color.
    Color,
    /// After one announcement round each vertex sends only whether it
    /// shifted; receivers track neighbor colors per port.
    OneBit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AgMsg {
    Color(Color),
    Bit(bool),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgPipeState {
    pub color: Color,
    /// Tracked neighbor colors in the one-bit wire format.
    pub tracked: BTreeMap<VertexId, Color>,
    /// Whether the last AG step shifted.
    pub shifted: bool,
}

/// Linial reduction to `O(Δ²)` colors, `q` additive-group rounds, then the
/// standard reduction down to `Δ + 1` colors.
#[derive(Clone, Debug)]
pub struct AgPipeline {
    pub chain: Vec<LinialParams>,
    pub q: u64,
    pub delta: u64,
    pub wire: AgWire,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgStage {
    Linial(usize),
    Ag(usize),
    Reduce(u64),
    Done,
}

impl AgPipeline {
    pub fn new(n_bound: u64, delta: u64, wire: AgWire) -> Self {
        let chain = reduction_chain(n_bound, delta);
        let k = chain.last().map_or(n_bound, LinialParams::target);
        AgPipeline {
            chain,
            q: ag_modulus(delta, k),
            delta,
            wire,
        }
    }

    pub fn linial_rounds(&self) -> usize {
        self.chain.len()
    }

    pub fn reduction_rounds(&self) -> usize {
        self.q.saturating_sub(self.delta + 1) as usize
    }

    pub fn total_rounds(&self) -> usize {
        self.linial_rounds() + self.q as usize + self.reduction_rounds()
    }

    pub fn stage(&self, round: usize) -> AgStage {
        let l = self.linial_rounds();
        let q = self.q as usize;
        if round <= l {
            AgStage::Linial(round - 1)
        } else if round <= l + q {
            AgStage::Ag(round - l - 1)
        } else if round <= self.total_rounds() {
            AgStage::Reduce(self.q - 1 - (round - l - q - 1) as u64)
        } else {
            AgStage::Done
        }
    }

    fn uses_bit(&self, round: usize) -> bool {
        matches!(self.stage(round), AgStage::Ag(i) if i > 0) && self.wire == AgWire::OneBit
    }
}

impl Protocol for AgPipeline {
    type State = AgPipeState;
    type Msg = AgMsg;

    fn init(&self, id: VertexId) -> AgPipeState {
        AgPipeState {
            color: id as Color,
            tracked: BTreeMap::new(),
            shifted: false,
        }
    }

    fn send(&self, ctx: &Ctx<'_>, state: &AgPipeState) -> Outbox<AgMsg> {
        if self.uses_bit(ctx.round) {
            Outbox::Broadcast(AgMsg::Bit(state.shifted))
        } else if self.stage(ctx.round) == AgStage::Done {
            Outbox::Silent
        } else {
            Outbox::Broadcast(AgMsg::Color(state.color))
        }
    }

    fn step(&self, ctx: &Ctx<'_>, state: &AgPipeState, inbox: &Inbox<AgMsg>) -> Result<AgPipeState> {
        let colors = || -> Vec<Color> {
            inbox
                .messages()
                .filter_map(|m| match m {
                    AgMsg::Color(c) => Some(*c),
                    AgMsg::Bit(_) => None,
                })
                .collect()
        };
        let mut next = state.clone();
        match self.stage(ctx.round) {
            AgStage::Linial(i) => {
                next.color = linial_step(state.color, &colors(), &[], &self.chain[i])?;
            }
            AgStage::Ag(i) => {
                let q = self.q;
                let mine = encode_pair(state.color, q)?;
                let neighbor_pairs: Vec<Color> = match self.wire {
                    AgWire::Color => colors(),
                    AgWire::OneBit => {
                        let ported = inbox.ported().ok_or_else(|| Error::Model {
                            vertex: ctx.id,
                            round: ctx.round,
                            reason: "one-bit wire needs sender identities".into(),
                        })?;
                        if i == 0 {
                            next.tracked = ported
                                .iter()
                                .filter_map(|(s, m)| match m {
                                    AgMsg::Color(c) => Some((*s, *c)),
                                    AgMsg::Bit(_) => None,
                                })
                                .collect();
                        } else {
                            for (s, m) in ported {
                                if let (AgMsg::Bit(shift), Some(c)) = (m, next.tracked.get_mut(s)) {
                                    let p = ag_update(encode_pair(*c, q)?, *shift);
                                    *c = p.a * q + p.b;
                                }
                            }
                        }
                        next.tracked.values().copied().collect()
                    }
                };
                let mut conflicted = false;
                for c in neighbor_pairs {
                    conflicted |= encode_pair(c, q)?.b == mine.b;
                }
                let p = ag_update(mine, conflicted);
                next.color = p.a * q + p.b;
                next.shifted = conflicted;
            }
            AgStage::Reduce(target) => {
                next.tracked.clear();
                if state.color == target {
                    let used = colors();
                    next.color = (0..).find(|c| !used.contains(c)).expect("finite neighborhood");
                }
            }
            AgStage::Done => {}
        }
        Ok(next)
    }

    fn msg_bits(&self, round: usize, msg: &AgMsg) -> usize {
        match msg {
            AgMsg::Bit(_) => 1,
            AgMsg::Color(_) => self.phase_bits(round).unwrap_or(1),
        }
    }

    fn phase_bits(&self, round: usize) -> Option<usize> {
        if self.uses_bit(round) {
            return Some(1);
        }
        Some(match self.stage(round) {
            AgStage::Linial(i) => bits_for(self.chain[i].m),
            AgStage::Ag(_) => bits_for(self.q * self.q),
            AgStage::Reduce(_) => bits_for(self.q),
            AgStage::Done => 0,
        })
    }

    fn halted(&self, round: usize, _state: &AgPipeState) -> bool {
        round >= self.total_rounds()
    }
}

/// Outcome of the static AG pipeline.
#[derive(Clone, Debug)]
pub struct AgRun {
    pub colors: BTreeMap<VertexId, Color>,
    pub pipeline: AgPipeline,
    pub trace: RunTrace<AgPipeState>,
    /// Rounds of the AG stage until every vertex was final.
    pub ag_rounds_used: usize,
}

pub fn ag_run(graph: &Graph, model: RoundModel, wire: AgWire) -> Result<AgRun> {
    let pipeline = AgPipeline::new(graph.n_bound() as u64, graph.delta_bound() as u64, wire);
    let total = pipeline.total_rounds().max(1);
    let trace = run(graph, &pipeline, model, &FaultScript::none(), RunOptions::rounds(total))?;
    let l = pipeline.linial_rounds();
    let ag_rounds_used = (0..=pipeline.q as usize)
        .find(|&i| {
            trace
                .snapshots
                .get(l + i)
                .is_some_and(|s| s.values().all(|st| st.color < pipeline.q))
        })
        .unwrap_or(usize::MAX);
    let colors = trace
        .final_state()
        .iter()
        .map(|(&v, s)| (v, s.color))
        .collect();
    Ok(AgRun {
        colors,
        pipeline,
        trace,
        ag_rounds_used,
    })
}

/// Standard reduction: in each round the vertices of the current highest
/// class recolor to the smallest color absent from their neighborhood.
#[derive(Clone, Debug)]
pub struct ReductionProtocol {
    pub alpha: u64,
    pub initial: BTreeMap<VertexId, Color>,
}

impl Protocol for ReductionProtocol {
    type State = Color;
    type Msg = Color;

    fn init(&self, id: VertexId) -> Color {
        self.initial[&id]
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &Color) -> Outbox<Color> {
        Outbox::Broadcast(*state)
    }

    fn step(&self, ctx: &Ctx<'_>, state: &Color, inbox: &Inbox<Color>) -> Result<Color> {
        let target = self.alpha - ctx.round as u64;
        if *state != target {
            return Ok(*state);
        }
        let used = neighbor_colors(inbox);
        Ok((0..).find(|c| !used.contains(c)).expect("finite neighborhood"))
    }

    fn msg_bits(&self, _round: usize, _msg: &Color) -> usize {
        bits_for(self.alpha)
    }
}

/// Reduces a proper `alpha`-coloring to `Δ + 1` colors in `alpha − (Δ+1)`
/// rounds. Returns the new coloring and the number of rounds used.
pub fn standard_reduction(
    graph: &Graph,
    coloring: &BTreeMap<VertexId, Color>,
    alpha: u64,
) -> Result<(BTreeMap<VertexId, Color>, usize)> {
    for v in graph.vertices() {
        let c = *coloring
            .get(&v)
            .ok_or_else(|| Error::ImproperInput(format!("vertex {v} uncolored")))?;
        if c >= alpha {
            return Err(Error::ColorRange { value: c, modulus: alpha });
        }
        if graph.neighbors(v).iter().any(|u| coloring.get(u) == Some(&c)) {
            return Err(Error::ImproperInput(format!("vertex {v} shares color {c}")));
        }
    }
    let rounds = alpha.saturating_sub(graph.delta_bound() as u64 + 1) as usize;
    if rounds == 0 {
        return Ok((coloring.clone(), 0));
    }
    let protocol = ReductionProtocol {
        alpha,
        initial: coloring.clone(),
    };
    let trace = run(
        graph,
        &protocol,
        RoundModel::Local,
        &FaultScript::none(),
        RunOptions::rounds(rounds),
    )?;
    Ok((trace.final_state().clone(), rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphKind};

    #[test]
    fn reduction_of_triangle() {
        let g = build_graph(GraphKind::Cycle, 3, 2, 0).unwrap();
        let c: BTreeMap<_, _> = [(0, 0), (1, 1), (2, 3)].into_iter().collect();
        let (out, rounds) = standard_reduction(&g, &c, 4).unwrap();
        assert_eq!(rounds, 1);
        assert_eq!(out[&2], 2);
    }

    #[test]
    fn reduction_noop_at_delta_plus_one() {
        let g = build_graph(GraphKind::Cycle, 3, 2, 0).unwrap();
        let c: BTreeMap<_, _> = [(0, 0), (1, 1), (2, 2)].into_iter().collect();
        let (out, rounds) = standard_reduction(&g, &c, 3).unwrap();
        assert_eq!(rounds, 0);
        assert_eq!(out, c);
    }

    #[test]
    fn reduction_of_path() {
        let g = build_graph(GraphKind::Path, 4, 2, 0).unwrap();
        let c: BTreeMap<_, _> = [(0, 0), (1, 1), (2, 2), (3, 3)].into_iter().collect();
        let (out, rounds) = standard_reduction(&g, &c, 4).unwrap();
        assert_eq!(rounds, 1);
        let expected: BTreeMap<_, _> = [(0, 0), (1, 1), (2, 2), (3, 0)].into_iter().collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn reduction_rejects_improper() {
        let g = build_graph(GraphKind::Path, 2, 1, 0).unwrap();
        let c: BTreeMap<_, _> = [(0, 1), (1, 1)].into_iter().collect();
        assert!(standard_reduction(&g, &c, 3).is_err());
    }

    #[test]
    fn single_vertex_finalizes_in_one_round() {
        let g = Graph::from_edges(1, 1, [0], &[]).unwrap();
        let proto = AgProtocol {
            q: 5,
            initial: [(0, 13)].into_iter().collect(),
        };
        let t = run(&g, &proto, RoundModel::Local, &FaultScript::none(), RunOptions::rounds(2)).unwrap();
        assert_eq!(t.snapshots[1][&0], 3);
    }
}
