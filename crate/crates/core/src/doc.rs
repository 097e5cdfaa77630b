//! File formats: JSON documents for graphs, maps and partitions, and DOT
//! export. Labels are the only cross-file identity, so they must be stable
//! and distinct.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::BuiltGame;
use crate::congruence::Partition;
use crate::graph::{Gamegraph, GraphError, PositionId, Rulegraph};
use crate::morphism::{MorphismError, PositionMap};
use crate::valuation::{Outcome, TerminalLabeling};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Validation(#[from] GraphError),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("declared start {declared:?} is not the source {actual:?}")]
    StartMismatch { declared: String, actual: String },
    #[error("document has no start position")]
    MissingStart,
    #[error("map does not cover position {0:?}")]
    MissingMapping(String),
    #[error(transparent)]
    Map(#[from] MorphismError),
    #[error("invalid partition: {0}")]
    Partition(#[from] crate::congruence::CongruenceError),
}

/// JSON form of a rulegraph or gamegraph. Positions are labels in id order;
/// arrows are `[from, to]` label pairs sorted by endpoint ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub positions: Vec<String>,
    pub arrows: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_labels: Option<BTreeMap<String, Outcome>>,
}

/// A validated document: the graph plus whatever the document declared.
#[derive(Debug, Clone)]
pub struct ParsedGraph {
    pub graph: Rulegraph,
    pub start: Option<PositionId>,
    pub terminal_labels: Option<TerminalLabeling>,
}

impl ParsedGraph {
    /// The declared gamegraph; errors when no start is present.
    pub fn gamegraph(&self) -> Result<Gamegraph, DocError> {
        let start = self.start.ok_or(DocError::MissingStart)?;
        let game = Gamegraph::new(self.graph.clone())?;
        debug_assert_eq!(game.start(), start);
        Ok(game)
    }
}

impl GraphDocument {
    pub fn from_rulegraph(graph: &Rulegraph) -> Self {
        GraphDocument {
            positions: graph.labels().to_vec(),
            arrows: graph
                .arrows()
                .map(|(p, q)| (graph.label(p).to_string(), graph.label(q).to_string()))
                .collect(),
            start: None,
            terminal_labels: None,
        }
    }

    pub fn from_gamegraph(game: &Gamegraph) -> Self {
        let mut doc = Self::from_rulegraph(game.graph());
        doc.start = Some(game.start_label().to_string());
        doc
    }

    pub fn from_built(built: &BuiltGame) -> Self {
        let mut doc = Self::from_rulegraph(&built.graph);
        doc.start = built.start.map(|s| built.graph.label(s).to_string());
        doc.terminal_labels = built.terminal_labels.as_ref().map(|labeling| {
            labeling
                .iter()
                .map(|(p, o)| (built.graph.label(p).to_string(), o))
                .collect()
        });
        doc
    }

    pub fn parse(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    /// Validates the document into a graph. A declared start must be the
    /// unique source; terminal labels must name existing positions (coverage
    /// of exactly the terminals is checked when the labeled outcome is
    /// computed).
    pub fn validate(&self) -> Result<ParsedGraph, DocError> {
        let graph = Rulegraph::new(self.positions.clone(), &self.arrows)?;
        let start = match &self.start {
            None => None,
            Some(label) => {
                let game = Gamegraph::new(graph.clone())?;
                if game.start_label() != label {
                    return Err(DocError::StartMismatch {
                        declared: label.clone(),
                        actual: game.start_label().to_string(),
                    });
                }
                Some(game.start())
            }
        };
        let terminal_labels = match &self.terminal_labels {
            None => None,
            Some(map) => {
                let mut outcomes = BTreeMap::new();
                for (label, &outcome) in map {
                    let p = graph
                        .position_by_label(label)
                        .ok_or_else(|| DocError::UnknownLabel(label.clone()))?;
                    outcomes.insert(p, outcome);
                }
                Some(TerminalLabeling::new(outcomes))
            }
        };
        Ok(ParsedGraph {
            graph,
            start,
            terminal_labels,
        })
    }
}

pub fn parse_graph(text: &str) -> Result<ParsedGraph, DocError> {
    GraphDocument::parse(text)?.validate()
}

/// `{"map": {"srcLabel": "dstLabel", ...}}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDocument {
    pub map: BTreeMap<String, String>,
}

impl MapDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents serialize")
    }

    pub fn from_position_map(
        domain: &Rulegraph,
        codomain: &Rulegraph,
        map: &PositionMap,
    ) -> Self {
        MapDocument {
            map: domain
                .positions()
                .map(|p| {
                    (
                        domain.label(p).to_string(),
                        codomain.label(map.apply(p)).to_string(),
                    )
                })
                .collect(),
        }
    }

    /// Resolves labels into a total position map between the two graphs.
    pub fn to_position_map(
        &self,
        domain: &Rulegraph,
        codomain: &Rulegraph,
    ) -> Result<PositionMap, DocError> {
        let mut table = Vec::with_capacity(domain.position_count());
        for p in domain.positions() {
            let from = domain.label(p);
            let to = self
                .map
                .get(from)
                .ok_or_else(|| DocError::MissingMapping(from.to_string()))?;
            let target = codomain
                .position_by_label(to)
                .ok_or_else(|| DocError::UnknownLabel(to.clone()))?;
            table.push(target);
        }
        for key in self.map.keys() {
            if domain.position_by_label(key).is_none() {
                return Err(DocError::UnknownLabel(key.clone()));
            }
        }
        Ok(PositionMap::new(domain, codomain, table)?)
    }
}

/// `{"blocks": [["a","b"], ...]}`; singleton blocks are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDocument {
    pub blocks: Vec<Vec<String>>,
}

impl PartitionDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("documents serialize")
    }

    /// Serializes with nontrivial blocks only, each sorted by label, blocks
    /// ordered by their smallest label.
    pub fn from_partition(graph: &Rulegraph, partition: &Partition) -> Self {
        let mut blocks: Vec<Vec<String>> = partition
            .nontrivial_blocks()
            .map(|block| {
                let mut labels: Vec<String> =
                    block.iter().map(|&p| graph.label(p).to_string()).collect();
                labels.sort();
                labels
            })
            .collect();
        blocks.sort();
        PartitionDocument { blocks }
    }

    pub fn to_partition(&self, graph: &Rulegraph) -> Result<Partition, DocError> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let mut ids = Vec::with_capacity(block.len());
            for label in block {
                ids.push(
                    graph
                        .position_by_label(label)
                        .ok_or_else(|| DocError::UnknownLabel(label.clone()))?,
                );
            }
            blocks.push(ids);
        }
        Ok(Partition::from_blocks(graph.position_count(), blocks)?)
    }
}

/// Renders a graph as DOT text, one node per position with an optional
/// bracketed annotation, one edge per arrow, all in id order.
pub fn export_dot(graph: &Rulegraph, annotations: Option<&[String]>) -> String {
    let mut out = String::from("digraph {\n");
    for p in graph.positions() {
        let label = match annotations {
            Some(notes) => format!("{} [{}]", graph.label(p), notes[p.index()]),
            None => graph.label(p).to_string(),
        };
        out.push_str(&format!(
            "  {} [label={}];\n",
            dot_id(graph.label(p)),
            dot_id(&label)
        ));
    }
    for (p, q) in graph.arrows() {
        out.push_str(&format!(
            "  {} -> {};\n",
            dot_id(graph.label(p)),
            dot_id(graph.label(q))
        ));
    }
    out.push_str("}\n");
    out
}

fn dot_id(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}
