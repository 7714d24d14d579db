//! Synchronous round engine: message exchange under a communication model,
//! double-buffered state updates, fault injection and bit metering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{apply_topology_event, Graph, TopologyEvent, VertexId};

/// Communication model enforced by the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoundModel {
    /// Unbounded messages.
    Local,
    /// At most `word_bits` bits per edge direction per round.
    Congest { word_bits: usize },
    /// One bit per edge direction per engine round; longer payloads are
    /// serialized over consecutive engine rounds.
    BitRound,
    /// Unbounded broadcast messages delivered as a deduplicated set without
    /// sender identities.
    SetLocal,
}

impl fmt::Display for RoundModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundModel::Local => write!(f, "local"),
            RoundModel::Congest { word_bits } => write!(f, "congest:{word_bits}"),
            RoundModel::BitRound => write!(f, "bit"),
            RoundModel::SetLocal => write!(f, "set-local"),
        }
    }
}

impl std::str::FromStr for RoundModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(RoundModel::Local),
            "bit" | "bit-round" => Ok(RoundModel::BitRound),
            "set-local" => Ok(RoundModel::SetLocal),
            _ => {
                let bits = s
                    .strip_prefix("congest:")
                    .and_then(|b| b.parse::<usize>().ok())
                    .filter(|&b| b > 0)
                    .ok_or_else(|| Error::Params(format!("unknown model {s:?}")))?;
                Ok(RoundModel::Congest { word_bits: bits })
            }
        }
    }
}

impl Serialize for RoundModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RoundModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How a payload of known length is spread over engine rounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub engine_rounds: usize,
    /// Bits carried in each engine round.
    pub per_round: Vec<usize>,
}

pub fn serialize_message(payload_bits: usize, model: RoundModel) -> Schedule {
    match model {
        RoundModel::BitRound => Schedule {
            engine_rounds: payload_bits.max(1),
            per_round: (0..payload_bits.max(1))
                .map(|i| usize::from(i < payload_bits))
                .collect(),
        },
        RoundModel::Congest { word_bits } => {
            let rounds = payload_bits.div_ceil(word_bits).max(1);
            let per_round = (0..rounds)
                .map(|i| payload_bits.saturating_sub(i * word_bits).min(word_bits))
                .collect();
            Schedule {
                engine_rounds: rounds,
                per_round,
            }
        }
        RoundModel::Local | RoundModel::SetLocal => Schedule {
            engine_rounds: 1,
            per_round: vec![payload_bits],
        },
    }
}

/// Read-only view a vertex has during one round.
#[derive(Clone, Copy, Debug)]
pub struct Ctx<'a> {
    pub id: VertexId,
    /// Algorithm round, starting at 1.
    pub round: usize,
    /// Sorted neighbor IDs (port numbering).
    pub neighbors: &'a [VertexId],
    pub n_bound: u32,
    pub delta_bound: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outbox<M> {
    Silent,
    Broadcast(M),
    PerNeighbor(Vec<(VertexId, M)>),
}

/// Messages received in one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inbox<M> {
    /// Sorted by sender.
    Ported(Vec<(VertexId, M)>),
    /// Deduplicated and sorted, with senders stripped.
    Set(Vec<M>),
}

impl<M> Inbox<M> {
    pub fn messages(&self) -> Box<dyn Iterator<Item = &M> + '_> {
        match self {
            Inbox::Ported(v) => Box::new(v.iter().map(|(_, m)| m)),
            Inbox::Set(v) => Box::new(v.iter()),
        }
    }

    pub fn ported(&self) -> Option<&[(VertexId, M)]> {
        match self {
            Inbox::Ported(v) => Some(v),
            Inbox::Set(_) => None,
        }
    }

    pub fn from(&self, sender: VertexId) -> Option<&M> {
        let v = self.ported()?;
        v.binary_search_by_key(&sender, |(s, _)| *s)
            .ok()
            .map(|i| &v[i].1)
    }
}

/// A per-vertex algorithm. `send` and `step` see only the vertex's own
/// state and the messages delivered this round.
pub trait Protocol: Sync {
    type State: Clone + Send + Sync + PartialEq + fmt::Debug;
    type Msg: Clone + Send + Sync + Ord + fmt::Debug;

    /// State of a vertex that starts (or joins) with the given ID.
    fn init(&self, id: VertexId) -> Self::State;

    fn send(&self, ctx: &Ctx<'_>, state: &Self::State) -> Outbox<Self::Msg>;

    fn step(
        &self,
        ctx: &Ctx<'_>,
        state: &Self::State,
        inbox: &Inbox<Self::Msg>,
    ) -> Result<Self::State>;

    /// Encoded length of a message sent in `round`.
    fn msg_bits(&self, round: usize, msg: &Self::Msg) -> usize;

    /// Declared payload length for `round` under bit serialization. When
    /// present, every message of the round must fit and the round occupies
    /// exactly this many engine rounds.
    fn phase_bits(&self, _round: usize) -> Option<usize> {
        None
    }

    /// True once the vertex will never change state again.
    fn halted(&self, _round: usize, _state: &Self::State) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FaultKind<S> {
    /// Overwrites the target's RAM.
    Corrupt { target: VertexId, state: S },
    Topology { event: TopologyEvent },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultEvent<S> {
    /// Applied at the start of this round, before message exchange.
    pub round: usize,
    pub kind: FaultKind<S>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultScript<S> {
    pub events: Vec<FaultEvent<S>>,
}

impl<S> Default for FaultScript<S> {
    fn default() -> Self {
        FaultScript { events: Vec::new() }
    }
}

impl<S> FaultScript<S> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn push(&mut self, round: usize, kind: FaultKind<S>) {
        self.events.push(FaultEvent { round, kind });
    }

    pub fn last_round(&self) -> Option<usize> {
        self.events.iter().map(|e| e.round).max()
    }
}

/// Bits sent over one edge direction in one algorithm round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub from: VertexId,
    pub to: VertexId,
    pub bits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// First engine round used by this algorithm round.
    pub engine_start: usize,
    pub engine_rounds: usize,
    /// True when at least one fault event was applied this round.
    pub faulted: bool,
    /// Vertices touched by faults this round, with their initial distance
    /// for adjustment-radius accounting.
    pub fault_sites: Vec<(VertexId, u32)>,
    pub ledger: Vec<LedgerEntry>,
}

#[derive(Clone, Debug)]
pub struct RunTrace<S> {
    pub model: RoundModel,
    /// `snapshots[0]` is the initial state; `snapshots[r]` follows round `r`.
    pub snapshots: Vec<BTreeMap<VertexId, S>>,
    /// `graphs[r]` is the topology in effect during round `r`.
    pub graphs: Vec<Arc<Graph>>,
    pub rounds: Vec<RoundRecord>,
}

impl<S> RunTrace<S> {
    pub fn rounds_run(&self) -> usize {
        self.rounds.len()
    }

    pub fn final_state(&self) -> &BTreeMap<VertexId, S> {
        self.snapshots.last().expect("initial snapshot")
    }

    pub fn final_graph(&self) -> &Graph {
        self.graphs.last().expect("initial graph")
    }

    pub fn bit_rounds(&self) -> usize {
        self.rounds.iter().map(|r| r.engine_rounds).sum()
    }

    /// Latest round at which a fault was applied.
    pub fn last_fault_round(&self) -> Option<usize> {
        self.rounds
            .iter()
            .filter(|r| r.faulted)
            .map(|r| r.round)
            .max()
    }

    pub fn fault_rounds(&self) -> Vec<usize> {
        self.rounds
            .iter()
            .filter(|r| r.faulted)
            .map(|r| r.round)
            .collect()
    }

    /// Total bits per edge direction over the whole run.
    pub fn bits_per_direction(&self) -> BTreeMap<(VertexId, VertexId), usize> {
        let mut totals = BTreeMap::new();
        for r in &self.rounds {
            for e in &r.ledger {
                *totals.entry((e.from, e.to)).or_insert(0) += e.bits;
            }
        }
        totals
    }

    pub fn max_bits_per_direction(&self) -> usize {
        self.bits_per_direction().values().copied().max().unwrap_or(0)
    }

    /// Largest number of bits any edge direction carries within a single
    /// engine round.
    pub fn max_bits_per_engine_round(&self) -> usize {
        self.rounds
            .iter()
            .flat_map(|r| {
                r.ledger
                    .iter()
                    .map(move |e| e.bits.div_ceil(r.engine_rounds.max(1)))
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub max_rounds: usize,
    /// Stop early once every vertex reports `halted` and no faults remain.
    pub stop_when_halted: bool,
}

impl RunOptions {
    pub fn rounds(max_rounds: usize) -> Self {
        RunOptions {
            max_rounds,
            stop_when_halted: false,
        }
    }

    pub fn until_halted(max_rounds: usize) -> Self {
        RunOptions {
            max_rounds,
            stop_when_halted: true,
        }
    }
}

fn apply_faults<P: Protocol>(
    protocol: &P,
    graph: &mut Graph,
    states: &mut BTreeMap<VertexId, P::State>,
    events: &[&FaultEvent<P::State>],
) -> Result<Vec<(VertexId, u32)>> {
    let mut sites = BTreeSet::new();
    for ev in events {
        match &ev.kind {
            FaultKind::Corrupt { target, state } => {
                if !graph.contains(*target) {
                    return Err(Error::Topology(format!(
                        "corruption targets absent vertex {target}"
                    )));
                }
                states.insert(*target, state.clone());
                sites.insert((*target, 0));
            }
            FaultKind::Topology { event } => {
                let next = apply_topology_event(graph, event)?;
                match *event {
                    TopologyEvent::AddVertex { v } => {
                        states.insert(v, protocol.init(v));
                        sites.insert((v, 0));
                    }
                    TopologyEvent::RemoveVertex { v } => {
                        states.remove(&v);
                        sites.extend(graph.neighbors(v).iter().map(|&u| (u, 1)));
                    }
                    TopologyEvent::AddEdge { u, v } | TopologyEvent::RemoveEdge { u, v } => {
                        sites.insert((u, 0));
                        sites.insert((v, 0));
                    }
                }
                *graph = next;
            }
        }
    }
    // Keep the smallest distance per vertex; drop vertices removed later.
    let mut best: BTreeMap<VertexId, u32> = BTreeMap::new();
    for (v, d) in sites {
        if graph.contains(v) {
            let e = best.entry(v).or_insert(d);
            *e = (*e).min(d);
        }
    }
    Ok(best.into_iter().collect())
}

/// Runs `protocol` on `graph` under `model`, applying `faults` at the start
/// of their rounds. Identical inputs give identical traces.
pub fn run<P: Protocol>(
    graph: &Graph,
    protocol: &P,
    model: RoundModel,
    faults: &FaultScript<P::State>,
    opts: RunOptions,
) -> Result<RunTrace<P::State>> {
    if opts.max_rounds == 0 {
        return Err(Error::Params("max_rounds must be at least 1".into()));
    }
    let mut g = graph.clone();
    let mut states: BTreeMap<VertexId, P::State> =
        g.vertices().map(|v| (v, protocol.init(v))).collect();
    let mut trace = RunTrace {
        model,
        snapshots: vec![states.clone()],
        graphs: vec![Arc::new(g.clone())],
        rounds: Vec::new(),
    };
    let last_fault = faults.last_round().unwrap_or(0);
    let mut engine_clock = 0;

    for round in 1..=opts.max_rounds {
        let due: Vec<&FaultEvent<P::State>> =
            faults.events.iter().filter(|e| e.round == round).collect();
        let fault_sites = apply_faults(protocol, &mut g, &mut states, &due)?;
        let graph_now = if due.is_empty() {
            Arc::clone(trace.graphs.last().expect("initial graph"))
        } else {
            Arc::new(g.clone())
        };

        let ids: Vec<VertexId> = states.keys().copied().collect();
        let ctx_of = |v: VertexId| Ctx {
            id: v,
            round,
            neighbors: graph_now.neighbors(v),
            n_bound: graph_now.n_bound(),
            delta_bound: graph_now.delta_bound(),
        };

        let outboxes: Vec<Outbox<P::Msg>> = ids
            .par_iter()
            .map(|&v| protocol.send(&ctx_of(v), &states[&v]))
            .collect();

        let declared = protocol.phase_bits(round);
        let mut ported: BTreeMap<VertexId, Vec<(VertexId, P::Msg)>> =
            ids.iter().map(|&v| (v, Vec::new())).collect();
        let mut ledger = Vec::new();
        let mut longest = 0;
        for (&v, outbox) in ids.iter().zip(&outboxes) {
            let deliveries: Vec<(VertexId, &P::Msg)> = match outbox {
                Outbox::Silent => Vec::new(),
                Outbox::Broadcast(m) => graph_now.neighbors(v).iter().map(|&u| (u, m)).collect(),
                Outbox::PerNeighbor(list) => {
                    if model == RoundModel::SetLocal {
                        return Err(Error::Model {
                            vertex: v,
                            round,
                            reason: "per-neighbor messages are not available in SET-LOCAL".into(),
                        });
                    }
                    let mut seen = BTreeSet::new();
                    for (u, _) in list {
                        if !graph_now.has_edge(v, *u) || !seen.insert(*u) {
                            return Err(Error::Model {
                                vertex: v,
                                round,
                                reason: format!("message addressed to non-neighbor or duplicate port {u}"),
                            });
                        }
                    }
                    list.iter().map(|(u, m)| (*u, m)).collect()
                }
            };
            for (u, m) in deliveries {
                let bits = protocol.msg_bits(round, m);
                let limit = match (model, declared) {
                    (RoundModel::Congest { word_bits }, _) => Some(word_bits),
                    (RoundModel::BitRound, Some(l)) => Some(l),
                    _ => None,
                };
                if let Some(limit) = limit {
                    if bits > limit {
                        return Err(Error::Bandwidth {
                            vertex: v,
                            round,
                            bits,
                            limit,
                        });
                    }
                }
                longest = longest.max(bits);
                ledger.push(LedgerEntry { from: v, to: u, bits });
                ported.get_mut(&u).expect("neighbor is live").push((v, m.clone()));
            }
        }
        let engine_rounds = match model {
            RoundModel::BitRound => declared.unwrap_or(longest).max(1),
            _ => 1,
        };

        let inboxes: Vec<Inbox<P::Msg>> = ids
            .iter()
            .map(|v| {
                let mut msgs = ported.remove(v).expect("inbox per live vertex");
                msgs.sort_by_key(|(s, _)| *s);
                if model == RoundModel::SetLocal {
                    let set: BTreeSet<P::Msg> = msgs.into_iter().map(|(_, m)| m).collect();
                    Inbox::Set(set.into_iter().collect())
                } else {
                    Inbox::Ported(msgs)
                }
            })
            .collect();

        let next: Vec<Result<P::State>> = ids
            .par_iter()
            .zip(inboxes.par_iter())
            .map(|(&v, inbox)| protocol.step(&ctx_of(v), &states[&v], inbox))
            .collect();
        let mut new_states = BTreeMap::new();
        for (&v, s) in ids.iter().zip(next) {
            new_states.insert(v, s?);
        }
        states = new_states;

        trace.rounds.push(RoundRecord {
            round,
            engine_start: engine_clock,
            engine_rounds,
            faulted: !due.is_empty(),
            fault_sites,
            ledger,
        });
        engine_clock += engine_rounds;
        trace.snapshots.push(states.clone());
        trace.graphs.push(graph_now);

        if opts.stop_when_halted
            && round >= last_fault
            && states.values().all(|s| protocol.halted(round, s))
        {
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_lengths() {
        assert_eq!(serialize_message(20, RoundModel::BitRound).engine_rounds, 20);
        assert_eq!(
            serialize_message(20, RoundModel::Congest { word_bits: 32 }).engine_rounds,
            1
        );
        assert_eq!(serialize_message(1, RoundModel::BitRound).engine_rounds, 1);
        assert_eq!(
            serialize_message(70, RoundModel::Congest { word_bits: 32 }).per_round,
            vec![32, 32, 6]
        );
        assert!(serialize_message(20, RoundModel::BitRound)
            .per_round
            .iter()
            .all(|&b| b == 1));
    }

    #[test]
    fn model_parsing() {
        assert_eq!("local".parse::<RoundModel>().unwrap(), RoundModel::Local);
        assert_eq!(
            "congest:16".parse::<RoundModel>().unwrap(),
            RoundModel::Congest { word_bits: 16 }
        );
        assert_eq!("bit".parse::<RoundModel>().unwrap(), RoundModel::BitRound);
        assert_eq!("set-local".parse::<RoundModel>().unwrap(), RoundModel::SetLocal);
        assert!("congest:0".parse::<RoundModel>().is_err());
        assert!("radio".parse::<RoundModel>().is_err());
    }
}
