//! Three-coordinate additive-group coloring and the exact (Δ+1) scheme that
//! mixes it with additive-group rounds modulo `N = Δ + 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    agn_update, bits_for, decode_triple, encode_triple, is_prime, select_prime, three_ag_update,
    Color, ColorPair, ColorTriple,
};
use crate::engine::{run, Ctx, FaultScript, Inbox, Outbox, Protocol, RoundModel, RunOptions, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::linial::{linial_step, reduction_chain, LinialParams};

/// Conflict tests of one triple against its neighbors' triples.
///
/// In the `c ≠ 0` stage a neighbor counts only when it shares `b` and sits
/// in a different `c` class: neighbors with the same nonzero `c` keep a
/// constant `b` offset and already differ in `a`, so they may leave the
/// stage together.
pub fn triple_conflicts(mine: ColorTriple, neighbors: &[ColorTriple]) -> (bool, bool) {
    let b_conf = neighbors.iter().any(|u| u.b == mine.b && u.c != mine.c);
    let a_conf = neighbors.iter().any(|u| u.a == mine.a);
    (b_conf, a_conf)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThreeAgMode {
    /// `p >= 2Δ + 2`, budget `2p` rounds.
    Plain,
    /// `p >= (1+ε)Δ`.
    Epsilon(f64),
}

impl ThreeAgMode {
    pub fn budget(&self, p: u64) -> usize {
        match self {
            ThreeAgMode::Plain => 2 * p as usize,
            ThreeAgMode::Epsilon(eps) => 2 * ((1.0 / eps).ceil() as usize + 2) * p as usize,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThreeAgProtocol {
    pub p: u64,
    pub initial: BTreeMap<VertexId, Color>,
}

impl Protocol for ThreeAgProtocol {
    type State = Color;
    type Msg = Color;

    fn init(&self, id: VertexId) -> Color {
        self.initial.get(&id).copied().unwrap_or(id as Color)
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &Color) -> Outbox<Color> {
        Outbox::Broadcast(*state)
    }

    fn step(&self, _ctx: &Ctx<'_>, state: &Color, inbox: &Inbox<Color>) -> Result<Color> {
        let mine = encode_triple(*state, self.p)?;
        if mine.is_final() {
            return Ok(*state);
        }
        let ns = inbox
            .messages()
            .map(|&c| encode_triple(c, self.p))
            .collect::<Result<Vec<_>>>()?;
        let (b_conf, a_conf) = triple_conflicts(mine, &ns);
        Ok(decode_triple(three_ag_update(mine, b_conf, a_conf, false)))
    }

    fn msg_bits(&self, _round: usize, _msg: &Color) -> usize {
        bits_for(self.p * self.p * self.p)
    }

    fn halted(&self, _round: usize, state: &Color) -> bool {
        *state < self.p
    }
}

#[derive(Clone, Debug)]
pub struct ThreeAgRun {
    pub colors: BTreeMap<VertexId, Color>,
    pub trace: RunTrace<Color>,
    pub budget: usize,
    /// First round after which every `c` coordinate is zero.
    pub c_zero_round: Option<usize>,
    /// First round after which every vertex is final.
    pub b_zero_round: Option<usize>,
}

/// Runs 3AG(p) from a proper coloring with palette at most `p³`.
pub fn three_ag_run(
    graph: &Graph,
    initial: &BTreeMap<VertexId, Color>,
    p: u64,
    mode: ThreeAgMode,
    model: RoundModel,
) -> Result<ThreeAgRun> {
    let delta = graph.delta_bound() as u64;
    if !is_prime(p) {
        return Err(Error::Params(format!("p = {p} is not prime")));
    }
    match mode {
        ThreeAgMode::Plain if p < 2 * delta + 2 => {
            return Err(Error::Params(format!("plain mode needs p >= 2Δ+2 = {}", 2 * delta + 2)));
        }
        ThreeAgMode::Epsilon(eps) if !(eps > 0.0 && eps <= 1.0) || (p as f64) < (1.0 + eps) * delta as f64 => {
            return Err(Error::Params(format!("need 0 < ε <= 1 and p >= (1+ε)Δ, got ε = {eps}")));
        }
        _ => {}
    }
    for v in graph.vertices() {
        let c = *initial
            .get(&v)
            .ok_or_else(|| Error::ImproperInput(format!("vertex {v} uncolored")))?;
        if c >= p * p * p {
            return Err(Error::ColorRange { value: c, modulus: p * p * p });
        }
        if graph.neighbors(v).iter().any(|u| initial.get(u) == Some(&c)) {
            return Err(Error::ImproperInput(format!("vertex {v} shares color {c}")));
        }
    }
    let proto = ThreeAgProtocol {
        p,
        initial: initial.clone(),
    };
    let budget = mode.budget(p);
    let trace = run(graph, &proto, model, &FaultScript::none(), RunOptions::until_halted(budget))?;
    let first = |pred: &dyn Fn(Color) -> bool| {
        trace
            .snapshots
            .iter()
            .position(|s| s.values().all(|&c| pred(c)))
    };
    let c_zero_round = first(&|c| c < p * p);
    let b_zero_round = first(&|c| c < p);
    Ok(ThreeAgRun {
        colors: trace.final_state().clone(),
        trace,
        budget,
        c_zero_round,
        b_zero_round,
    })
}

/// Parameters of the exact scheme: low colors are pairs modulo `N = Δ+1`,
/// high colors are triples modulo a prime `p <= 2N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactParams {
    pub n: u64,
    pub p: u64,
}

/// A color of the exact scheme.
///
/// Values `[0, 2N)` are low pairs `⟨w, a⟩` (value `w·N + a`, final iff
/// `w = 0`); values from `2N` on are triples `t ∈ [p, p³)` at value
/// `2N + t − p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mixed {
    Low(ColorPair),
    High(ColorTriple),
}

impl Mixed {
    pub fn is_final(&self) -> bool {
        matches!(self, Mixed::Low(p) if p.a == 0)
    }

    pub fn is_low(&self) -> bool {
        matches!(self, Mixed::Low(_))
    }
}

impl ExactParams {
    /// Smallest prime `p >= max(⌈1.5Δ⌉ + 1, 2)` whose encoding holds
    /// `palette` colors; fails if that exceeds `2N`.
    pub fn new(delta: u64, palette: u64) -> Result<Self> {
        let n = delta + 1;
        let mut p = select_prime(((3 * delta).div_ceil(2) + 1).max(2));
        while 2 * n + p * p * p - p < palette {
            p = select_prime(p + 1);
        }
        if p > 2 * n {
            return Err(Error::Params(format!(
                "palette {palette} needs p = {p} > 2N = {}",
                2 * n
            )));
        }
        Ok(ExactParams { n, p })
    }

    /// Number of representable colors.
    pub fn palette(&self) -> u64 {
        2 * self.n + self.p * self.p * self.p - self.p
    }

    pub fn decode(&self, value: Color) -> Result<Mixed> {
        if value < 2 * self.n {
            Ok(Mixed::Low(ColorPair {
                a: value / self.n,
                b: value % self.n,
                q: self.n,
            }))
        } else if value < self.palette() {
            Ok(Mixed::High(encode_triple(value - 2 * self.n + self.p, self.p)?))
        } else {
            Err(Error::ColorRange {
                value,
                modulus: self.palette(),
            })
        }
    }

    pub fn encode(&self, m: Mixed) -> Color {
        match m {
            Mixed::Low(p) => p.a * self.n + p.b,
            Mixed::High(t) => 2 * self.n + decode_triple(t) - self.p,
        }
    }

    /// Local test and hold flags of `me` against the given neighbors.
    ///
    /// Low working colors test for a low neighbor with the same residue.
    /// Triples use the three-coordinate tests, where low final neighbors
    /// also block any conversion onto their value. `hold` reports a low
    /// neighbor that is not final.
    pub fn local_flags(&self, me: Mixed, neighbors: &[Mixed]) -> (bool, bool) {
        let hold = neighbors.iter().any(|u| u.is_low() && !u.is_final());
        let low_final_value = |a: u64| {
            neighbors
                .iter()
                .any(|u| matches!(u, Mixed::Low(p) if p.a == 0 && p.b == a))
        };
        let test = match me {
            Mixed::Low(p) => {
                p.a != 0
                    && neighbors
                        .iter()
                        .any(|u| matches!(u, Mixed::Low(o) if o.b == p.b))
            }
            Mixed::High(t) => {
                let highs: Vec<ColorTriple> = neighbors
                    .iter()
                    .filter_map(|u| match u {
                        Mixed::High(o) => Some(*o),
                        Mixed::Low(_) => None,
                    })
                    .collect();
                let (b_conf, a_conf) = triple_conflicts(t, &highs);
                if t.c != 0 {
                    b_conf || (t.b == 0 && low_final_value(t.a))
                } else {
                    a_conf || low_final_value(t.a)
                }
            }
        };
        (test, hold)
    }

    /// Next color given the combined test and hold flags.
    pub fn apply(&self, me: Mixed, test: bool, hold: bool) -> Mixed {
        match me {
            Mixed::Low(p) => Mixed::Low(agn_update(p, test, false, self.n)),
            Mixed::High(t) => {
                let next = three_ag_update(t, test, test, hold);
                if next.is_final() {
                    Mixed::Low(ColorPair {
                        a: next.a / self.n,
                        b: next.a % self.n,
                        q: self.n,
                    })
                } else {
                    Mixed::High(next)
                }
            }
        }
    }

    pub fn update(&self, me: Mixed, neighbors: &[Mixed]) -> Mixed {
        let (test, hold) = self.local_flags(me, neighbors);
        self.apply(me, test, hold)
    }

    /// The at most two colors `me` can take in the next round.
    pub fn successors(&self, me: Mixed) -> Vec<Color> {
        let mut out: Vec<Color> = [
            self.apply(me, true, true),
            self.apply(me, false, false),
        ]
        .iter()
        .map(|m| self.encode(*m))
        .collect();
        out.dedup();
        out
    }
}

/// Linial reduction followed by the exact scheme until every color is a
/// final low color in `[0, Δ]`.
#[derive(Clone, Debug)]
pub struct ExactPipeline {
    pub chain: Vec<LinialParams>,
    pub params: ExactParams,
}

impl ExactPipeline {
    pub fn new(n_bound: u64, delta: u64) -> Result<Self> {
        let chain = reduction_chain(n_bound, delta);
        let palette = chain.last().map_or(n_bound, LinialParams::target);
        Ok(ExactPipeline {
            chain,
            params: ExactParams::new(delta, palette)?,
        })
    }

    /// Round budget for the mixed stage.
    pub fn budget(&self) -> usize {
        let (n, p) = (self.params.n as usize, self.params.p as usize);
        4 * (p + n) * n + 16
    }
}

impl Protocol for ExactPipeline {
    type State = Color;
    type Msg = Color;

    fn init(&self, id: VertexId) -> Color {
        id as Color
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &Color) -> Outbox<Color> {
        Outbox::Broadcast(*state)
    }

    fn step(&self, ctx: &Ctx<'_>, state: &Color, inbox: &Inbox<Color>) -> Result<Color> {
        let ns: Vec<Color> = inbox.messages().copied().collect();
        if ctx.round <= self.chain.len() {
            return linial_step(*state, &ns, &[], &self.chain[ctx.round - 1]);
        }
        let me = self.params.decode(*state)?;
        if me.is_final() {
            return Ok(*state);
        }
        let others = ns
            .iter()
            .map(|&c| self.params.decode(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.params.encode(self.params.update(me, &others)))
    }

    fn msg_bits(&self, round: usize, _msg: &Color) -> usize {
        if round <= self.chain.len() {
            bits_for(self.chain[round - 1].m)
        } else {
            bits_for(self.params.palette())
        }
    }

    fn halted(&self, round: usize, state: &Color) -> bool {
        round >= self.chain.len() && *state < self.params.n
    }
}

#[derive(Clone, Debug)]
pub struct ExactRun {
    pub colors: BTreeMap<VertexId, Color>,
    pub pipeline: ExactPipeline,
    pub trace: RunTrace<Color>,
    /// Rounds of the mixed stage until every vertex was final.
    pub mixed_rounds: Option<usize>,
}

/// Proper `(Δ+1)`-coloring without the standard reduction.
pub fn exact_delta_plus_one(graph: &Graph, model: RoundModel) -> Result<ExactRun> {
    let pipeline = ExactPipeline::new(graph.n_bound() as u64, graph.delta_bound() as u64)?;
    let l = pipeline.chain.len();
    let trace = run(
        graph,
        &pipeline,
        model,
        &FaultScript::none(),
        RunOptions::until_halted(l + pipeline.budget()),
    )?;
    let n = pipeline.params.n;
    let mixed_rounds = trace
        .snapshots
        .iter()
        .skip(l)
        .position(|s| s.values().all(|&c| c < n));
    Ok(ExactRun {
        colors: trace.final_state().clone(),
        pipeline,
        trace,
        mixed_rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_params_fit_small_deltas() {
        let p = ExactParams::new(2, 25).unwrap();
        assert_eq!(p.n, 3);
        assert_eq!(p.p, 5);
        for v in 0..p.palette() {
            assert_eq!(p.encode(p.decode(v).unwrap()), v);
        }
    }

    #[test]
    fn high_never_converts_under_hold() {
        let p = ExactParams::new(4, 100).unwrap();
        let me = Mixed::High(ColorTriple { c: 0, b: 2, a: 1, p: p.p });
        let low_working = Mixed::Low(ColorPair { a: 1, b: 3, q: p.n });
        let next = p.update(me, &[low_working]);
        assert!(matches!(next, Mixed::High(_)));
    }

    #[test]
    fn lone_high_vertex_finishes_low() {
        let p = ExactParams::new(3, 100).unwrap();
        let mut me = p.decode(p.palette() - 1).unwrap();
        for _ in 0..(4 * p.p) {
            me = p.update(me, &[]);
        }
        assert!(me.is_final());
        assert!(p.encode(me) < p.n);
    }
}
