//! Runs a scenario end to end and produces its trace records, summary row
//! and verdicts.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ag::arb::{arbdefective_color, defective_coloring};
use crate::ag::three::{exact_delta_plus_one, three_ag_run, ThreeAgMode};
use crate::ag::{ag_run, AgWire};
use crate::algebra::{select_prime, Color};
use crate::edge::{edge_color, EdgeMode};
use crate::engine::{FaultKind, FaultScript, RoundRecord, RunTrace};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::scenario::{Algorithm, FaultSpec, Scenario};
use crate::stab::line::{edge_colors, line_run, matching, LineProtocol, LineState};
use crate::stab::{coloring_bound, colors_of, mis_of, ss_run, MisKind, SsCore, SsRam};
use crate::verify::{self, Edge};

/// Output of one snapshot in algorithm-neutral form.
#[derive(Clone, Debug, PartialEq)]
pub enum View {
    Vertices {
        colors: BTreeMap<VertexId, Color>,
        mis: Option<BTreeMap<VertexId, bool>>,
    },
    Edges {
        colors: BTreeMap<Edge, Color>,
        matched: Option<BTreeMap<Edge, bool>>,
    },
}

impl View {
    pub fn palette(&self) -> usize {
        let set: BTreeSet<Color> = match self {
            View::Vertices { colors, .. } => colors.values().copied().collect(),
            View::Edges { colors, .. } => colors.values().copied().collect(),
        };
        set.len()
    }

    /// Oracle verdict on properness.
    pub fn proper(&self, graph: &Graph) -> bool {
        match self {
            View::Vertices { colors, .. } => verify::is_proper_coloring(graph, colors).unwrap_or(false),
            View::Edges { colors, .. } => verify::is_proper_edge_coloring(graph, colors).unwrap_or(false),
        }
    }

    /// Oracle verdict on the MIS or matching carried by the view, if any.
    pub fn structure_valid(&self, graph: &Graph) -> Option<bool> {
        match self {
            View::Vertices { mis: Some(m), .. } => Some(verify::is_mis(graph, m).unwrap_or(false)),
            View::Edges { matched: Some(m), .. } => Some(verify::is_mm(graph, m).unwrap_or(false)),
            _ => None,
        }
    }
}

/// One line of a JSONL trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TraceRecord {
    Header {
        scenario: String,
        algorithm: Algorithm,
        model: String,
        n_bound: u32,
        delta: u32,
        vertices: Vec<VertexId>,
        edges: Vec<Edge>,
        stab_bound: usize,
    },
    Round {
        round: usize,
        /// Present when the topology changed this round.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        topology: Option<(Vec<VertexId>, Vec<Edge>)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        colors: Option<Vec<(VertexId, Color)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge_colors: Option<Vec<(VertexId, VertexId, Color)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mis: Option<Vec<VertexId>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matched: Option<Vec<Edge>>,
        /// Whether this round must be proper.
        check: bool,
        proper: bool,
        bits: usize,
        engine_rounds: usize,
        faulted: bool,
    },
    Summary {
        row: SummaryRow,
        stabilized_at: Option<usize>,
        adjusted_set: Vec<VertexId>,
        stab_bound: usize,
        proper_every_round: bool,
        final_valid: Option<bool>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub algorithm: String,
    pub n: usize,
    pub delta: u32,
    pub rounds: usize,
    pub bit_rounds: usize,
    pub stab_rounds: Option<usize>,
    pub palette: usize,
    pub adj_radius: Option<u32>,
    pub max_bits_per_edge: usize,
}

pub const CSV_HEADER: &str =
    "scenario,algorithm,n,delta,rounds,bit_rounds,stab_rounds,palette,adj_radius,max_bits_per_edge";

/// Writes rows with the summary header.
pub fn write_summary_csv(rows: &[SummaryRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv(input: impl std::io::Read) -> Result<Vec<SummaryRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<SummaryRow>, csv::Error>>()
        .map_err(Error::from)
}

/// Per-snapshot views plus run metadata, independent of the protocol state.
struct Collected {
    views: Vec<View>,
    graphs: Vec<Arc<Graph>>,
    rounds: Vec<RoundRecord>,
    bit_rounds: usize,
    max_bits: usize,
    last_fault: Option<usize>,
    /// First snapshot that must be proper (`None`: never checked).
    check_from: Option<usize>,
    /// Predicate on a snapshot view for stabilization.
    stable: StablePredicate,
    stab_bound: usize,
    adj_radius: Option<u32>,
    adjusted_set: Vec<VertexId>,
}

/// Predicate on a snapshot view for stabilization.
type StablePredicate = Box<dyn Fn(&Graph, &View) -> bool>;

fn collect<S>(trace: &RunTrace<S>, view: impl Fn(&Graph, &BTreeMap<VertexId, S>) -> View) -> (Vec<View>, Vec<Arc<Graph>>) {
    let views = trace
        .snapshots
        .iter()
        .zip(&trace.graphs)
        .map(|(s, g)| view(g, s))
        .collect();
    (views, trace.graphs.clone())
}

fn meta<S>(
    trace: &RunTrace<S>,
    views: Vec<View>,
    graphs: Vec<Arc<Graph>>,
    check_from: Option<usize>,
    stable: StablePredicate,
    stab_bound: usize,
) -> Collected {
    Collected {
        views,
        graphs,
        rounds: trace.rounds.clone(),
        bit_rounds: trace.bit_rounds(),
        max_bits: trace.max_bits_per_direction(),
        last_fault: trace.last_fault_round(),
        check_from,
        stable,
        stab_bound,
        adj_radius: None,
        adjusted_set: Vec::new(),
    }
}

fn vertex_view(colors: BTreeMap<VertexId, Color>) -> View {
    View::Vertices { colors, mis: None }
}

fn all_below(view: &View, bound: u64) -> bool {
    match view {
        View::Vertices { colors, .. } => colors.values().all(|&c| c < bound),
        View::Edges { colors, .. } => colors.values().all(|&c| c < bound),
    }
}

fn ss_script(faults: &[FaultSpec], line: Option<u32>) -> Result<(FaultScript<SsRam>, FaultScript<LineState>)> {
    let mut plain = FaultScript::none();
    let mut lined = FaultScript::none();
    for f in faults {
        match f {
            FaultSpec::Corrupt {
                round,
                target,
                color,
                mu,
                status,
            } => {
                let ram = SsRam {
                    color: *color,
                    mu: *mu,
                    status: *status,
                };
                plain.push(*round, FaultKind::Corrupt { target: *target, state: ram });
                if let Some(n) = line {
                    let copies = (0..n).filter(|w| w != target).map(|w| (w, ram)).collect();
                    lined.push(*round, FaultKind::Corrupt {
                        target: *target,
                        state: LineState { copies },
                    });
                }
            }
            FaultSpec::Topology { round, event } => {
                plain.push(*round, FaultKind::Topology { event: *event });
                lined.push(*round, FaultKind::Topology { event: *event });
            }
        }
        if f.round() == 0 {
            return Err(Error::Params("fault rounds start at 1".into()));
        }
    }
    Ok((plain, lined))
}

fn changed_vertices<K: Ord + Clone, O: PartialEq>(
    before: &BTreeMap<K, O>,
    after: &BTreeMap<K, O>,
    endpoints: impl Fn(&K) -> Vec<VertexId>,
) -> Vec<VertexId> {
    let set: BTreeSet<VertexId> = after
        .iter()
        .filter(|(k, o)| before.get(k) != Some(o))
        .flat_map(|(k, _)| endpoints(k))
        .collect();
    set.into_iter().collect()
}

fn run_collected(s: &Scenario, graph: &Graph) -> Result<Collected> {
    let model = s.model;
    let delta = graph.delta_bound() as u64;
    let n_bound = graph.n_bound() as u64;
    let p = &s.params;
    Ok(match s.algorithm {
        Algorithm::Ag | Algorithm::AgOnebit => {
            let wire = if s.algorithm == Algorithm::Ag { AgWire::Color } else { AgWire::OneBit };
            let r = ag_run(graph, model, wire)?;
            let (v, g) = collect(&r.trace, |_, st| vertex_view(st.iter().map(|(&k, x)| (k, x.color)).collect()));
            meta(&r.trace, v, g, Some(0), Box::new(move |_, v| all_below(v, delta + 1)), r.pipeline.total_rounds())
        }
        Algorithm::ThreeAg => {
            let pp = p.p.unwrap_or_else(|| select_prime(2 * delta + 2));
            let mode = p.epsilon.map_or(ThreeAgMode::Plain, ThreeAgMode::Epsilon);
            let ids = graph.vertices().map(|v| (v, v as Color)).collect();
            let r = three_ag_run(graph, &ids, pp, mode, model)?;
            let (v, g) = collect(&r.trace, |_, st| vertex_view(st.clone()));
            meta(&r.trace, v, g, Some(0), Box::new(move |_, v| all_below(v, pp)), r.budget)
        }
        Algorithm::Exact => {
            let r = exact_delta_plus_one(graph, model)?;
            let (v, g) = collect(&r.trace, |_, st| vertex_view(st.clone()));
            let bound = r.pipeline.chain.len() + r.pipeline.budget();
            meta(&r.trace, v, g, Some(0), Box::new(move |_, v| all_below(v, delta + 1)), bound)
        }
        Algorithm::Defective => {
            let r = defective_coloring(graph, p.p.unwrap_or(1), model)?;
            let (v, g) = collect(&r.trace, |_, st| vertex_view(st.clone()));
            let rounds = r.rounds.max(1);
            meta(&r.trace, v, g, None, Box::new(|_, _| true), rounds)
        }
        Algorithm::Arbdefective => {
            let r = arbdefective_color(graph, p.p.unwrap_or(1), model)?;
            let (v, g) = collect(&r.trace, |_, st| {
                vertex_view(
                    st.iter()
                        .map(|(&k, x)| (k, x.pair.map_or(x.psi0, |q| q.a * q.q + q.b)))
                        .collect(),
                )
            });
            let q = r.q;
            let bound = r.trace.rounds_run();
            meta(&r.trace, v, g, None, Box::new(move |_, v| all_below(v, q)), bound)
        }
        Algorithm::SsColoring | Algorithm::SsExact | Algorithm::SsMis | Algorithm::SsMisMu => {
            let mis = match s.algorithm {
                Algorithm::SsMis => MisKind::Status,
                Algorithm::SsMisMu => MisKind::Mu,
                _ => MisKind::None,
            };
            let core = if s.algorithm == Algorithm::SsExact {
                SsCore::exact(n_bound, delta, mis)?
            } else {
                SsCore::ag(n_bound, delta, mis)
            };
            let (script, _) = ss_script(&s.faults, None)?;
            let f = script.last_round().unwrap_or(0);
            let extra = if mis == MisKind::None { 0 } else { coloring_bound(&core) + core.final_palette() as usize };
            let stab_bound = coloring_bound(&core) + extra;
            let rounds = p.rounds.unwrap_or(f + stab_bound + 5);
            let trace = ss_run(graph, &core, model, &script, rounds)?;
            let with_mis = mis != MisKind::None;
            let view = |_: &Graph, st: &BTreeMap<VertexId, SsRam>| View::Vertices {
                colors: colors_of(st),
                mis: with_mis.then(|| mis_of(&core, st)),
            };
            let (v, g) = collect(&trace, view);
            let fp = core.final_palette();
            let stable: StablePredicate = Box::new(move |g, v| {
                all_below(v, fp) && v.proper(g) && v.structure_valid(g).unwrap_or(true)
            });
            let mut c = meta(&trace, v, g, Some(f), stable, stab_bound);
            if f > 0 {
                c.adj_radius = if with_mis {
                    verify::adjustment_radius(&trace, |_, st| mis_of(&core, st))
                } else {
                    verify::adjustment_radius(&trace, |_, st| colors_of(st))
                };
                let b = trace.fault_rounds()[0] - 1;
                c.adjusted_set = if with_mis {
                    changed_vertices(&mis_of(&core, &trace.snapshots[b]), &mis_of(&core, trace.final_state()), |v| vec![*v])
                } else {
                    changed_vertices(&colors_of(&trace.snapshots[b]), &colors_of(trace.final_state()), |v| vec![*v])
                };
            }
            c
        }
        Algorithm::SsMm | Algorithm::SsEdge => {
            let proto = if s.algorithm == Algorithm::SsMm {
                LineProtocol::mm(n_bound, delta)
            } else {
                LineProtocol::edge_coloring(n_bound, delta)?
            };
            let (_, script) = ss_script(&s.faults, Some(graph.n_bound()))?;
            let f = script.last_round().unwrap_or(0);
            let is_mm = s.algorithm == Algorithm::SsMm;
            let core = &proto.core;
            let extra = if is_mm { coloring_bound(core) + core.final_palette() as usize } else { 0 };
            let stab_bound = 1 + coloring_bound(core) + extra;
            let rounds = p.rounds.unwrap_or(f + stab_bound + 5);
            let trace = line_run(graph, &proto, model, &script, rounds)?;
            let view = |g: &Graph, st: &BTreeMap<VertexId, LineState>| View::Edges {
                colors: edge_colors(g, st),
                matched: is_mm.then(|| matching(g, st)),
            };
            let (v, g) = collect(&trace, view);
            let fp = core.final_palette();
            let stable: StablePredicate = Box::new(move |g, v| {
                all_below(v, fp) && v.proper(g) && v.structure_valid(g).unwrap_or(true)
            });
            let mut c = meta(&trace, v, g, Some(f + 1), stable, stab_bound);
            if f > 0 {
                let b = trace.fault_rounds()[0] - 1;
                let (before, after) = (&trace.snapshots[b], trace.final_state());
                let (gb, ga) = (&trace.graphs[b], trace.final_graph());
                let ends = |e: &Edge| vec![e.0, e.1];
                if is_mm {
                    c.adj_radius = verify::adjustment_radius_edges(&trace, matching);
                    c.adjusted_set = changed_vertices(&matching(gb, before), &matching(ga, after), ends);
                } else {
                    c.adj_radius = verify::adjustment_radius_edges(&trace, edge_colors);
                    c.adjusted_set = changed_vertices(&edge_colors(gb, before), &edge_colors(ga, after), ends);
                }
            }
            c
        }
        Algorithm::EdgeAg | Algorithm::EdgeExact => {
            let mode = if s.algorithm == Algorithm::EdgeAg { EdgeMode::Ag } else { EdgeMode::Exact };
            let r = edge_color(graph, mode, model, p.known_ids)?;
            let pre = r.protocol.preamble_rounds();
            let views: Vec<View> = (0..r.trace.snapshots.len())
                .map(|i| View::Edges {
                    colors: r.values_at(i).unwrap_or_default(),
                    matched: None,
                })
                .collect();
            let proto = r.protocol.clone();
            let top = match mode {
                EdgeMode::Ag => proto.q,
                EdgeMode::Exact => proto.exact.expect("exact params").n,
            };
            let stable: StablePredicate = Box::new(move |g, v| {
                let complete = match v {
                    View::Edges { colors, .. } => colors.len() == g.edge_count(),
                    View::Vertices { .. } => false,
                };
                complete && all_below(v, top)
            });
            meta(&r.trace, views, r.trace.graphs.clone(), Some(pre), stable, pre + proto.budget())
        }
    })
}

/// Everything produced by one scenario.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub records: Vec<TraceRecord>,
    pub summary: SummaryRow,
    pub proper_every_round: bool,
    pub final_valid: Option<bool>,
    pub stab_bound: usize,
}

impl Outcome {
    /// 0 ok, 2 bound violation, 3 oracle violation.
    pub fn exit_code(&self) -> i32 {
        if !self.proper_every_round || self.final_valid == Some(false) {
            3
        } else if self.summary.stab_rounds.is_none_or(|t| t > self.stab_bound) {
            2
        } else {
            0
        }
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn topology_of(g: &Graph) -> (Vec<VertexId>, Vec<Edge>) {
    (g.vertices().collect(), g.edges())
}

pub fn run_scenario(s: &Scenario) -> Result<Outcome> {
    let graph = s.build_graph()?;
    let c = run_collected(s, &graph)?;
    let mut records = vec![TraceRecord::Header {
        scenario: s.name.clone(),
        algorithm: s.algorithm,
        model: s.model.to_string(),
        n_bound: graph.n_bound(),
        delta: graph.delta_bound(),
        vertices: graph.vertices().collect(),
        edges: graph.edges(),
        stab_bound: c.stab_bound,
    }];
    let mut proper_every_round = true;
    for (r, view) in c.views.iter().enumerate() {
        let g = &c.graphs[r];
        let check = c.check_from.is_some_and(|f| r >= f);
        let proper = view.proper(g);
        proper_every_round &= !check || proper;
        let rec = r.checked_sub(1).map(|i| &c.rounds[i]);
        let topology = (r > 0 && !Arc::ptr_eq(g, &c.graphs[r - 1])).then(|| topology_of(g));
        let (colors, edge_colors, mis, matched) = match view {
            View::Vertices { colors, mis } => (
                Some(colors.iter().map(|(&v, &c)| (v, c)).collect()),
                None,
                mis.as_ref().map(|m| m.iter().filter(|(_, &b)| b).map(|(&v, _)| v).collect()),
                None,
            ),
            View::Edges { colors, matched } => (
                None,
                Some(colors.iter().map(|(&(u, v), &c)| (u, v, c)).collect()),
                None,
                matched.as_ref().map(|m| m.iter().filter(|(_, &b)| b).map(|(&e, _)| e).collect()),
            ),
        };
        records.push(TraceRecord::Round {
            round: r,
            topology,
            colors,
            edge_colors,
            mis,
            matched,
            check,
            proper,
            bits: rec.map_or(0, |x| x.ledger.iter().map(|e| e.bits).sum()),
            engine_rounds: rec.map_or(0, |x| x.engine_rounds),
            faulted: rec.is_some_and(|x| x.faulted),
        });
    }

    let f = c.last_fault.unwrap_or(0);
    let mut s_idx = None;
    for r in (f..c.views.len()).rev() {
        if (c.stable)(&c.graphs[r], &c.views[r]) {
            s_idx = Some(r);
        } else {
            break;
        }
    }
    let stab_rounds = if s.algorithm.self_stabilizing() {
        s_idx.map(|s| if f == 0 { s } else { s - f + 1 })
    } else {
        s_idx.map(|_| c.rounds.len())
    };
    let last_view = c.views.last().expect("initial view");
    let last_graph = c.graphs.last().expect("initial graph");
    let final_valid = last_view.structure_valid(last_graph);
    let summary = SummaryRow {
        scenario: s.name.clone(),
        algorithm: s.algorithm.name().into(),
        n: graph.vertex_count(),
        delta: graph.delta_bound(),
        rounds: c.rounds.len(),
        bit_rounds: c.bit_rounds,
        stab_rounds,
        palette: last_view.palette(),
        adj_radius: c.adj_radius,
        max_bits_per_edge: c.max_bits,
    };
    records.push(TraceRecord::Summary {
        row: summary.clone(),
        stabilized_at: s_idx,
        adjusted_set: c.adjusted_set.clone(),
        stab_bound: c.stab_bound,
        proper_every_round,
        final_valid,
    });
    Ok(Outcome {
        records,
        summary,
        proper_every_round,
        final_valid,
        stab_bound: c.stab_bound,
    })
}

/// Result of re-checking a trace file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCheck {
    pub exit_code: i32,
    pub problems: Vec<String>,
}

/// Re-validates every checked round and the summary claims with the
/// oracles. Oracle disagreements give exit code 3, bound violations 2.
pub fn verify_trace(text: &str) -> Result<TraceCheck> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let parse = |(i, l): (usize, &str)| -> Result<TraceRecord> {
        serde_json::from_str(l).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })
    };
    let header = lines.next().ok_or_else(|| Error::Trace("empty trace".into()))?;
    let TraceRecord::Header {
        n_bound,
        delta,
        vertices,
        edges,
        ..
    } = parse(header)?
    else {
        return Err(Error::Trace("first line is not a header".into()));
    };
    let mut graph = Graph::from_edges(n_bound, delta, vertices, &edges)?;
    let mut problems = Vec::new();
    let mut oracle_bad = false;
    let mut bound_bad = false;
    let mut last_view: Option<View> = None;
    let mut saw_summary = false;
    for item in lines {
        let line = item.0 + 1;
        match parse(item)? {
            TraceRecord::Header { .. } => return Err(Error::Trace(format!("second header at line {line}"))),
            TraceRecord::Round {
                round,
                topology,
                colors,
                edge_colors,
                mis,
                matched,
                check,
                proper,
                ..
            } => {
                if let Some((vs, es)) = topology {
                    graph = Graph::from_edges(n_bound, delta, vs, &es)?;
                }
                let view = if let Some(cs) = colors {
                    let colors: BTreeMap<VertexId, Color> = cs.into_iter().collect();
                    let mis = mis.map(|m| {
                        let set: BTreeSet<VertexId> = m.into_iter().collect();
                        colors.keys().map(|v| (*v, set.contains(v))).collect()
                    });
                    View::Vertices { colors, mis }
                } else {
                    let colors: BTreeMap<Edge, Color> =
                        edge_colors.unwrap_or_default().into_iter().map(|(u, v, c)| ((u, v), c)).collect();
                    let matched = matched.map(|m| {
                        let set: BTreeSet<Edge> = m.into_iter().collect();
                        colors.keys().map(|e| (*e, set.contains(e))).collect()
                    });
                    View::Edges { colors, matched }
                };
                let actual = view.proper(&graph);
                if actual != proper {
                    oracle_bad = true;
                    problems.push(format!("round {round}: trace claims proper={proper}, oracle says {actual}"));
                } else if check && !actual {
                    oracle_bad = true;
                    problems.push(format!("round {round}: coloring is not proper"));
                }
                last_view = Some(view);
            }
            TraceRecord::Summary {
                row,
                stab_bound,
                final_valid,
                ..
            } => {
                saw_summary = true;
                let view = last_view.as_ref().ok_or_else(|| Error::Trace("summary before any round".into()))?;
                if view.palette() != row.palette {
                    oracle_bad = true;
                    problems.push(format!("palette claimed {}, oracle counts {}", row.palette, view.palette()));
                }
                let valid = view.structure_valid(&graph);
                if valid != final_valid {
                    oracle_bad = true;
                    problems.push(format!("final structure claimed {final_valid:?}, oracle says {valid:?}"));
                }
                if valid == Some(false) {
                    oracle_bad = true;
                    problems.push("final MIS or matching is invalid".into());
                }
                match row.stab_rounds {
                    Some(t) if t <= stab_bound => {}
                    other => {
                        bound_bad = true;
                        problems.push(format!("stabilization {other:?} exceeds bound {stab_bound}"));
                    }
                }
            }
        }
    }
    if !saw_summary {
        return Err(Error::Trace("trace has no summary line".into()));
    }
    let exit_code = if oracle_bad {
        3
    } else if bound_bad {
        2
    } else {
        0
    };
    Ok(TraceCheck { exit_code, problems })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_leaves_missing_fields_empty() {
        let row = SummaryRow {
            scenario: "s".into(),
            algorithm: "ag".into(),
            n: 3,
            delta: 2,
            rounds: 9,
            bit_rounds: 9,
            stab_rounds: None,
            palette: 3,
            adj_radius: None,
            max_bits_per_edge: 40,
        };
        let mut buf = Vec::new();
        write_summary_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\ns,ag,3,2,9,9,,3,,40\n"));
        assert_eq!(read_summary_csv(buf.as_slice()).unwrap(), vec![row]);
    }
}
