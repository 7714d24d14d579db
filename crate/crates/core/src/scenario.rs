//! Scenario and sweep-grid files.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::RoundModel;
use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph, GraphKind, TopologyEvent, VertexId};
use crate::stab::Status;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ag,
    AgOnebit,
    ThreeAg,
    Exact,
    Defective,
    Arbdefective,
    SsColoring,
    SsExact,
    SsMis,
    SsMisMu,
    SsMm,
    SsEdge,
    EdgeAg,
    EdgeExact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 14] = [
        Algorithm::Ag,
        Algorithm::AgOnebit,
        Algorithm::ThreeAg,
        Algorithm::Exact,
        Algorithm::Defective,
        Algorithm::Arbdefective,
        Algorithm::SsColoring,
        Algorithm::SsExact,
        Algorithm::SsMis,
        Algorithm::SsMisMu,
        Algorithm::SsMm,
        Algorithm::SsEdge,
        Algorithm::EdgeAg,
        Algorithm::EdgeExact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ag => "ag",
            Algorithm::AgOnebit => "ag-onebit",
            Algorithm::ThreeAg => "three-ag",
            Algorithm::Exact => "exact",
            Algorithm::Defective => "defective",
            Algorithm::Arbdefective => "arbdefective",
            Algorithm::SsColoring => "ss-coloring",
            Algorithm::SsExact => "ss-exact",
            Algorithm::SsMis => "ss-mis",
            Algorithm::SsMisMu => "ss-mis-mu",
            Algorithm::SsMm => "ss-mm",
            Algorithm::SsEdge => "ss-edge",
            Algorithm::EdgeAg => "edge-ag",
            Algorithm::EdgeExact => "edge-exact",
        }
    }

    pub fn self_stabilizing(&self) -> bool {
        matches!(
            self,
            Algorithm::SsColoring
                | Algorithm::SsExact
                | Algorithm::SsMis
                | Algorithm::SsMisMu
                | Algorithm::SsMm
                | Algorithm::SsEdge
        )
    }

    /// Output lives on edges rather than vertices.
    pub fn on_edges(&self) -> bool {
        matches!(
            self,
            Algorithm::SsMm | Algorithm::SsEdge | Algorithm::EdgeAg | Algorithm::EdgeExact
        )
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Params(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    /// Generator kind; ignored when `edges` is given.
    #[serde(default)]
    pub kind: Option<String>,
    pub n: u32,
    pub delta: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Explicit edge list over vertices `0..n`.
    #[serde(default)]
    pub edges: Option<Vec<(VertexId, VertexId)>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub p: Option<u64>,
    pub epsilon: Option<f64>,
    pub rounds: Option<usize>,
    #[serde(default)]
    pub known_ids: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FaultSpec {
    /// Overwrites the target's RAM (every edge copy for line-graph runs).
    Corrupt {
        round: usize,
        target: VertexId,
        color: u64,
        #[serde(default)]
        mu: bool,
        #[serde(default)]
        status: Status,
    },
    Topology {
        round: usize,
        event: TopologyEvent,
    },
}

impl FaultSpec {
    pub fn round(&self) -> usize {
        match self {
            FaultSpec::Corrupt { round, .. } | FaultSpec::Topology { round, .. } => *round,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub algorithm: Algorithm,
    #[serde(default = "default_model")]
    pub model: RoundModel,
    #[serde(default)]
    pub seed: u64,
    pub graph: GraphSpec,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
}

fn default_model() -> RoundModel {
    RoundModel::Local
}

/// Converts a TOML error into a diagnostic carrying its 1-based line.
fn toml_error(text: &str, err: toml::de::Error) -> Error {
    let line = err
        .span()
        .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    Error::Parse {
        line,
        msg: err.message().to_string(),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| toml_error(text, e))?;
        if !s.algorithm.self_stabilizing() && !s.faults.is_empty() {
            return Err(Error::Params(format!(
                "algorithm '{}' does not accept faults",
                s.algorithm.name()
            )));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn build_graph(&self) -> Result<Graph> {
        let g = &self.graph;
        if let Some(edges) = &g.edges {
            return Graph::from_edges(g.n, g.delta, 0..g.n, edges);
        }
        let kind: GraphKind = g.kind.as_deref().unwrap_or("random-capped").parse()?;
        build_graph(kind, g.n, g.delta, g.seed.unwrap_or(self.seed))
    }
}

/// A sweep over `(algorithm, kind, n, Δ, seed)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub name: String,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<String>,
    pub n: Vec<u32>,
    pub delta: Vec<u32>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_model")]
    pub model: RoundModel,
    #[serde(default)]
    pub params: Params,
}

fn default_kinds() -> Vec<String> {
    vec!["random-capped".into()]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(text, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// One scenario per grid point, skipping points a generator rejects.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            for kind in &self.kinds {
                for &n in &self.n {
                    for &delta in &self.delta {
                        for &seed in &self.seeds {
                            let graph = GraphSpec {
                                kind: Some(kind.clone()),
                                n,
                                delta,
                                seed: Some(seed),
                                edges: None,
                            };
                            out.push(Scenario {
                                name: format!("{}-{}-{kind}-n{n}-d{delta}-s{seed}", self.name, algorithm.name()),
                                algorithm,
                                model: self.model,
                                seed,
                                graph,
                                params: self.params.clone(),
                                faults: Vec::new(),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}
