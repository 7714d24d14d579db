//! Defective and arbdefective colorings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{arb_update, bits_for, ceil_sqrt, encode_pair, select_prime, Color, ColorPair};
use crate::engine::{run, Ctx, FaultScript, Inbox, Outbox, Protocol, RoundModel, RunOptions, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::linial::{defective_params, defective_step, linial_step, reduction_chain, LinialParams};

/// Plain reduction chain followed by one defect-tolerant step.
#[derive(Clone, Debug)]
pub struct DefectivePlan {
    pub p: u64,
    pub chain: Vec<LinialParams>,
    /// `None` when `p >= Δ` and every vertex takes color 0.
    pub last: Option<LinialParams>,
}

impl DefectivePlan {
    pub fn new(n_bound: u64, delta: u64, p: u64) -> Self {
        if p >= delta {
            return DefectivePlan {
                p,
                chain: Vec::new(),
                last: None,
            };
        }
        let chain = reduction_chain(n_bound, delta);
        let m = chain.last().map_or(n_bound, LinialParams::target);
        let last = defective_params(m, delta, p);
        DefectivePlan {
            p,
            chain,
            last: Some(last),
        }
    }

    pub fn rounds(&self) -> usize {
        self.chain.len() + usize::from(self.last.is_some())
    }

    pub fn palette(&self) -> u64 {
        self.last.map_or(1, |l| l.target())
    }

    /// Guaranteed bound on same-color neighbors.
    pub fn defect_bound(&self, delta: u64) -> u64 {
        if self.last.is_some() {
            self.p - 1
        } else {
            delta
        }
    }

    fn initial(&self, id: VertexId) -> Color {
        if self.last.is_some() {
            id as Color
        } else {
            0
        }
    }

    fn step(&self, round: usize, color: Color, neighbors: &[Color]) -> Result<Color> {
        let i = round - 1;
        if i < self.chain.len() {
            linial_step(color, neighbors, &[], &self.chain[i])
        } else if let Some(last) = &self.last {
            defective_step(color, neighbors, self.p, last)
        } else {
            Ok(color)
        }
    }

    fn bits(&self, round: usize) -> usize {
        let i = round - 1;
        if i < self.chain.len() {
            bits_for(self.chain[i].m)
        } else {
            self.last.map_or(1, |l| bits_for(l.m))
        }
    }
}

#[derive(Clone, Debug)]
pub struct DefectiveColoring {
    pub colors: BTreeMap<VertexId, Color>,
    pub palette: u64,
    pub defect_bound: u64,
    pub rounds: usize,
    pub trace: RunTrace<Color>,
}

struct DefectiveProtocol<'a>(&'a DefectivePlan);

impl Protocol for DefectiveProtocol<'_> {
    type State = Color;
    type Msg = Color;

    fn init(&self, id: VertexId) -> Color {
        self.0.initial(id)
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &Color) -> Outbox<Color> {
        Outbox::Broadcast(*state)
    }

    fn step(&self, ctx: &Ctx<'_>, state: &Color, inbox: &Inbox<Color>) -> Result<Color> {
        let ns: Vec<Color> = inbox.messages().copied().collect();
        self.0.step(ctx.round, *state, &ns)
    }

    fn msg_bits(&self, round: usize, _msg: &Color) -> usize {
        self.0.bits(round)
    }
}

/// Defective coloring with at most `p − 1` same-colored neighbors per vertex
/// (a single class when `p >= Δ`).
pub fn defective_coloring(graph: &Graph, p: u64, model: RoundModel) -> Result<DefectiveColoring> {
    if p == 0 {
        return Err(Error::Params("defect parameter p must be at least 1".into()));
    }
    let delta = graph.delta_bound() as u64;
    let plan = DefectivePlan::new(graph.n_bound() as u64, delta, p);
    let trace = run(
        graph,
        &DefectiveProtocol(&plan),
        model,
        &FaultScript::none(),
        RunOptions::rounds(plan.rounds().max(1)),
    )?;
    Ok(DefectiveColoring {
        colors: trace.final_state().clone(),
        palette: plan.palette(),
        defect_bound: plan.defect_bound(delta),
        rounds: plan.rounds(),
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbState {
    /// Evolving defective color during the first stage, then `ψ₀`.
    pub psi0: Color,
    pub pair: Option<ColorPair>,
    /// Loop round at which the vertex became final (0 if final on entry).
    pub final_at: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ArbMsg {
    pub psi0: Color,
    pub b: Option<u64>,
}

/// Defective front end followed by `2⌈Δ/p⌉ + 1` finalization rounds.
#[derive(Clone, Debug)]
pub struct ArbProtocol {
    pub plan: DefectivePlan,
    pub p: u64,
    pub q: u64,
    pub loop_rounds: usize,
}

impl ArbProtocol {
    pub fn new(n_bound: u64, delta: u64, p: u64) -> Self {
        let plan = DefectivePlan::new(n_bound, delta, p);
        let k = delta.div_ceil(p);
        let q = select_prime((2 * k + 2).max(ceil_sqrt(plan.palette())));
        ArbProtocol {
            plan,
            p,
            q,
            loop_rounds: 2 * k as usize + 1,
        }
    }

    fn enter_loop(&self, psi0: Color) -> Result<ArbState> {
        let pair = encode_pair(psi0, self.q)?;
        Ok(ArbState {
            psi0,
            pair: Some(pair),
            final_at: pair.is_final().then_some(0),
        })
    }

    pub fn total_rounds(&self) -> usize {
        self.plan.rounds() + self.loop_rounds
    }
}

impl Protocol for ArbProtocol {
    type State = ArbState;
    type Msg = ArbMsg;

    fn init(&self, id: VertexId) -> ArbState {
        let c = self.plan.initial(id);
        if self.plan.rounds() == 0 {
            self.enter_loop(c).expect("single class fits the modulus")
        } else {
            ArbState {
                psi0: c,
                pair: None,
                final_at: None,
            }
        }
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &ArbState) -> Outbox<ArbMsg> {
        Outbox::Broadcast(ArbMsg {
            psi0: state.psi0,
            b: state.pair.map(|p| p.b),
        })
    }

    fn step(&self, ctx: &Ctx<'_>, state: &ArbState, inbox: &Inbox<ArbMsg>) -> Result<ArbState> {
        let front = self.plan.rounds();
        if ctx.round <= front {
            let ns: Vec<Color> = inbox.messages().map(|m| m.psi0).collect();
            let c = self.plan.step(ctx.round, state.psi0, &ns)?;
            return if ctx.round == front {
                self.enter_loop(c)
            } else {
                Ok(ArbState {
                    psi0: c,
                    ..state.clone()
                })
            };
        }
        let pair = state.pair.expect("loop stage has a pair");
        if pair.is_final() || ctx.round > self.total_rounds() {
            return Ok(state.clone());
        }
        let count = inbox
            .messages()
            .filter(|m| m.psi0 != state.psi0 && m.b == Some(pair.b))
            .count();
        let next = arb_update(pair, count, self.p as usize);
        Ok(ArbState {
            psi0: state.psi0,
            pair: Some(next),
            final_at: next.is_final().then_some(ctx.round - front),
        })
    }

    fn msg_bits(&self, round: usize, _msg: &ArbMsg) -> usize {
        if round <= self.plan.rounds() {
            self.plan.bits(round)
        } else {
            bits_for(self.plan.palette()) + bits_for(self.q)
        }
    }

    fn halted(&self, round: usize, _state: &ArbState) -> bool {
        round >= self.total_rounds()
    }
}

#[derive(Clone, Debug)]
pub struct ArbdefectiveResult {
    /// Final colors `b` of the pairs `⟨0, b⟩` (or the raw pair value if a
    /// vertex failed to finalize).
    pub colors: BTreeMap<VertexId, Color>,
    pub psi0: BTreeMap<VertexId, Color>,
    pub final_at: BTreeMap<VertexId, Option<usize>>,
    /// Head of each edge `(min, max)`: the endpoint that finalized first,
    /// ties going to the greater ID.
    pub orientation: BTreeMap<(VertexId, VertexId), VertexId>,
    pub out_degree: BTreeMap<VertexId, usize>,
    pub q: u64,
    pub loop_rounds: usize,
    pub defect_bound: u64,
    pub trace: RunTrace<ArbState>,
}

pub fn arbdefective_color(graph: &Graph, p: u64, model: RoundModel) -> Result<ArbdefectiveResult> {
    let delta = graph.delta_bound() as u64;
    if p == 0 || p > delta.max(1) {
        return Err(Error::Params(format!("p must lie in [1, {delta}]")));
    }
    let proto = ArbProtocol::new(graph.n_bound() as u64, delta, p);
    let trace = run(
        graph,
        &proto,
        model,
        &FaultScript::none(),
        RunOptions::rounds(proto.total_rounds()),
    )?;
    let fin = trace.final_state();
    let colors: BTreeMap<VertexId, Color> = fin
        .iter()
        .map(|(&v, s)| {
            let pair = s.pair.expect("loop reached");
            (v, pair.a * pair.q + pair.b)
        })
        .collect();
    let final_at: BTreeMap<VertexId, Option<usize>> =
        fin.iter().map(|(&v, s)| (v, s.final_at)).collect();
    let mut orientation = BTreeMap::new();
    let mut out_degree: BTreeMap<VertexId, usize> = graph.vertices().map(|v| (v, 0)).collect();
    for (u, v) in graph.edges() {
        let key = |w: VertexId| (final_at[&w].unwrap_or(usize::MAX), std::cmp::Reverse(w));
        let head = if key(u) < key(v) { u } else { v };
        let tail = if head == u { v } else { u };
        orientation.insert((u, v), head);
        if colors[&u] == colors[&v] {
            *out_degree.get_mut(&tail).expect("vertex") += 1;
        }
    }
    Ok(ArbdefectiveResult {
        colors,
        psi0: fin.iter().map(|(&v, s)| (v, s.psi0)).collect(),
        final_at,
        orientation,
        out_degree,
        q: proto.q,
        loop_rounds: proto.loop_rounds,
        defect_bound: proto.plan.defect_bound(delta),
        trace,
    })
}
