//! Self-stabilizing coloring and MIS. Each vertex keeps one small RAM
//! record and recomputes it every round from its neighbors' records.

pub mod line;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ag::three::ExactParams;
use crate::algebra::{ag_update, bits_for, encode_pair, Color};
use crate::engine::{run, Ctx, FaultScript, Inbox, Outbox, Protocol, RoundModel, RunOptions, RunTrace};
use crate::error::Result;
use crate::graph::{Graph, VertexId};
use crate::linial::{compact_interval_table, interval_table, mod_linial, IntervalTable};

/// True when `my_color` is shared with a neighbor or lies outside every
/// interval.
pub fn check_error(my_color: Color, neighbor_colors: &[Color], total: u64) -> bool {
    my_color >= total || neighbor_colors.contains(&my_color)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Mis,
    NotMis,
    #[default]
    Undecided,
}

/// The corruptible per-vertex memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SsRam {
    pub color: Color,
    pub mu: bool,
    pub status: Status,
}

impl SsRam {
    /// Record of a virtual vertex that has no copy yet; the invalid color
    /// forces a reset.
    pub const BLANK: SsRam = SsRam {
        color: u64::MAX,
        mu: false,
        status: Status::Undecided,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MisKind {
    None,
    /// `μ_v = 1` iff no smaller-colored neighbor has `μ = 1`.
    Mu,
    Status,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStage {
    /// Pairs modulo `q0` in `I_0`.
    Ag,
    /// The exact mixed scheme in `I_0`.
    Exact(ExactParams),
}

/// The pure per-vertex step shared by the vertex and line-graph protocols.
#[derive(Clone, Debug)]
pub struct SsCore {
    pub table: IntervalTable,
    pub stage: SsStage,
    pub mis: MisKind,
}

impl SsCore {
    pub fn ag(n_bound: u64, delta: u64, mis: MisKind) -> Self {
        SsCore {
            table: interval_table(n_bound, delta),
            stage: SsStage::Ag,
            mis,
        }
    }

    /// `I_0` widened to the exact scheme's full palette, so that triples
    /// never drift into `I_1`.
    pub fn exact(n_bound: u64, delta: u64, mis: MisKind) -> Result<Self> {
        let mut table = compact_interval_table(n_bound, delta);
        let params = ExactParams::new(delta, table.sizes[0])?;
        table.widen_base(params.palette());
        Ok(SsCore {
            table,
            stage: SsStage::Exact(params),
            mis,
        })
    }

    /// Colors a stabilized run ends in.
    pub fn final_palette(&self) -> u64 {
        match self.stage {
            SsStage::Ag => self.table.q0(),
            SsStage::Exact(p) => p.n,
        }
    }

    pub fn is_final(&self, color: Color) -> bool {
        color < self.final_palette()
    }

    /// `q` of the `I_0` stage.
    pub fn q(&self) -> u64 {
        match self.stage {
            SsStage::Ag => self.table.q0(),
            SsStage::Exact(p) => p.p,
        }
    }

    /// Possible next colors of an `I_0` color.
    pub fn successors(&self, color: Color) -> Result<Vec<Color>> {
        match self.stage {
            SsStage::Ag => {
                let q = self.table.q0();
                let pair = encode_pair(color, q)?;
                let mut out = vec![pair.a * q + (pair.a + pair.b) % q, pair.b];
                out.dedup();
                Ok(out)
            }
            SsStage::Exact(p) => Ok(p.successors(p.decode(color)?)),
        }
    }

    fn color_step(&self, color: Color, neighbors: &[Color]) -> Result<Color> {
        let t = &self.table;
        let j = t.interval_of(color).expect("checked range");
        let within = |k: usize| -> Vec<Color> {
            neighbors
                .iter()
                .copied()
                .filter(|&c| t.interval_of(c) == Some(k))
                .collect()
        };
        if j >= 2 {
            return mod_linial(color, &within(j), &[], t);
        }
        let base = within(0);
        if j == 1 {
            let target = t.steps[0].target();
            let mut forbidden = Vec::new();
            for &c in &base {
                forbidden.extend(self.successors(c)?.into_iter().filter(|&s| s < target));
            }
            forbidden.sort_unstable();
            forbidden.dedup();
            return mod_linial(color, &within(1), &forbidden, t);
        }
        match self.stage {
            SsStage::Ag => {
                let q = t.q0();
                let pair = encode_pair(color, q)?;
                if pair.is_final() {
                    return Ok(color);
                }
                let conflicted = base.iter().any(|&c| c % q == pair.b);
                let next = ag_update(pair, conflicted);
                Ok(next.a * q + next.b)
            }
            SsStage::Exact(p) => {
                let me = p.decode(color)?;
                if me.is_final() {
                    return Ok(color);
                }
                let others = base.iter().map(|&c| p.decode(c)).collect::<Result<Vec<_>>>()?;
                Ok(p.encode(p.update(me, &others)))
            }
        }
    }

    fn mis_step(&self, ram: &SsRam, neighbors: &[SsRam]) -> (bool, Status) {
        match self.mis {
            MisKind::None => (ram.mu, ram.status),
            MisKind::Mu => {
                let mu = neighbors.iter().all(|u| u.color >= ram.color || !u.mu);
                (mu, ram.status)
            }
            MisKind::Status => {
                let mis_near = neighbors.iter().any(|u| u.status == Status::Mis);
                let smallest_undecided = neighbors
                    .iter()
                    .filter(|u| u.status == Status::Undecided)
                    .all(|u| ram.color < u.color);
                let status = match ram.status {
                    Status::Mis if mis_near => Status::Undecided,
                    Status::Mis => Status::Mis,
                    _ if mis_near => Status::NotMis,
                    _ if smallest_undecided => Status::Mis,
                    _ => Status::Undecided,
                };
                (ram.mu, status)
            }
        }
    }

    /// One round for the vertex (or virtual vertex) with identifier `id`.
    pub fn step(&self, id: u64, ram: &SsRam, neighbors: &[SsRam]) -> Result<SsRam> {
        let colors: Vec<Color> = neighbors.iter().map(|u| u.color).collect();
        let color = if check_error(ram.color, &colors, self.table.total()) {
            self.table.id_color(id)
        } else {
            self.color_step(ram.color, &colors)?
        };
        let (mu, status) = self.mis_step(ram, neighbors);
        Ok(SsRam { color, mu, status })
    }

    pub fn ram_bits(&self) -> usize {
        bits_for(self.table.total())
            + match self.mis {
                MisKind::None => 0,
                MisKind::Mu => 1,
                MisKind::Status => 2,
            }
    }
}

/// Vertex-level protocol. Vertices start from their reset color.
#[derive(Clone, Debug)]
pub struct SsProtocol(pub SsCore);

impl Protocol for SsProtocol {
    type State = SsRam;
    type Msg = SsRam;

    fn init(&self, id: VertexId) -> SsRam {
        SsRam {
            color: self.0.table.id_color(id as u64),
            mu: false,
            status: Status::Undecided,
        }
    }

    fn send(&self, _ctx: &Ctx<'_>, state: &SsRam) -> Outbox<SsRam> {
        Outbox::Broadcast(*state)
    }

    fn step(&self, ctx: &Ctx<'_>, state: &SsRam, inbox: &Inbox<SsRam>) -> Result<SsRam> {
        let ns: Vec<SsRam> = inbox.messages().copied().collect();
        self.0.step(ctx.id as u64, state, &ns)
    }

    fn msg_bits(&self, _round: usize, _msg: &SsRam) -> usize {
        self.0.ram_bits()
    }
}

/// Rounds after the last fault within which every color is final: the
/// descent through `r` intervals, one reset round, and `q` rounds in `I_0`.
pub fn coloring_bound(core: &SsCore) -> usize {
    core.table.r() + 1 + core.q() as usize
}

pub fn ss_run(
    graph: &Graph,
    core: &SsCore,
    model: RoundModel,
    faults: &FaultScript<SsRam>,
    rounds: usize,
) -> Result<RunTrace<SsRam>> {
    run(graph, &SsProtocol(core.clone()), model, faults, RunOptions::rounds(rounds))
}

pub fn colors_of(state: &BTreeMap<VertexId, SsRam>) -> BTreeMap<VertexId, Color> {
    state.iter().map(|(&v, s)| (v, s.color)).collect()
}

pub fn mis_of(core: &SsCore, state: &BTreeMap<VertexId, SsRam>) -> BTreeMap<VertexId, bool> {
    state
        .iter()
        .map(|(&v, s)| {
            let inside = match core.mis {
                MisKind::Mu => s.mu,
                _ => s.status == Status::Mis,
            };
            (v, inside)
        })
        .collect()
}
