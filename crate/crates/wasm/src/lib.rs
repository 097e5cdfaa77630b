//! Browser demo bindings: build a game, annotate it with valuations, collapse
//! it to its minimum quotient, and tabulate enumeration counts. Everything is
//! returned as JSON strings; the page renders the SVG.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use gamegraphs::builders::{self, GameSpec};
use gamegraphs::congruence::min_quotient;
use gamegraphs::enumeration::{count_simple_rulegraphs, x_total};
use gamegraphs::valuation::{
    formal_birthdays, nim_values, outcome_normal,
};
use gamegraphs::Rulegraph;

#[derive(Serialize)]
struct NodeView {
    label: String,
    /// Column within the birthday layer, centered around zero.
    x: f64,
    /// Birthday layer; terminals sit at zero.
    layer: u64,
    nim: u64,
    fbd: u64,
    outcome: String,
    /// Minimum-quotient block, for coloring merged positions alike.
    block: usize,
}

#[derive(Serialize)]
struct GraphView {
    nodes: Vec<NodeView>,
    arrows: Vec<(usize, usize)>,
    start: Option<usize>,
    layers: u64,
}

fn graph_view(graph: &Rulegraph, start: Option<usize>) -> GraphView {
    let nim = nim_values(graph);
    let fbd = formal_birthdays(graph);
    let outcome = outcome_normal(graph);
    let blocks = min_quotient(graph).partition;
    let layers = fbd.iter().copied().max().unwrap_or(0);
    let mut per_layer: Vec<usize> = vec![0; layers as usize + 1];
    for &b in &fbd {
        per_layer[b as usize] += 1;
    }
    let mut next_in_layer: Vec<usize> = vec![0; layers as usize + 1];
    let nodes = graph
        .positions()
        .map(|p| {
            let layer = fbd[p.index()];
            let slot = next_in_layer[layer as usize];
            next_in_layer[layer as usize] += 1;
            let width = per_layer[layer as usize];
            NodeView {
                label: graph.label(p).to_string(),
                x: slot as f64 - (width as f64 - 1.0) / 2.0,
                layer,
                nim: nim[p.index()],
                fbd: fbd[p.index()],
                outcome: outcome[p.index()].to_string(),
                block: blocks.block_of(p),
            }
        })
        .collect();
    let arrows = graph
        .arrows()
        .map(|(p, q)| (p.index(), q.index()))
        .collect();
    GraphView {
        nodes,
        arrows,
        start,
        layers,
    }
}

fn spec_from(kind: &str, a: u32, b: u32) -> Result<GameSpec, String> {
    match kind {
        "star" => Ok(GameSpec::Star(a as u64)),
        "nim-tuple" => Ok(GameSpec::NimTuple(vec![a as u64, b as u64])),
        "nim-multiset" => Ok(GameSpec::NimMultiset(vec![a as u64, b as u64])),
        "wythoff" => Ok(GameSpec::Wythoff(a as u64, b as u64)),
        "subtraction" => Ok(GameSpec::Subtraction(
            a as u64,
            (1..=b as u64).collect(),
        )),
        "grundy" => Ok(GameSpec::Grundy(a as u64)),
        "maze" => Ok(GameSpec::Maze(a, b)),
        "m-graph" => Ok(GameSpec::MGraph(a)),
        other => Err(format!("unknown game kind {other:?}")),
    }
}

fn build_view_json(kind: &str, a: u32, b: u32) -> Result<String, String> {
    let spec = spec_from(kind, a, b)?;
    let built =
        builders::build(&spec, builders::DEFAULT_M_GRAPH_DEPTH).map_err(|e| e.to_string())?;
    let view = graph_view(&built.graph, built.start.map(|s| s.index()));
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

fn quotient_view_json(kind: &str, a: u32, b: u32) -> Result<String, String> {
    let spec = spec_from(kind, a, b)?;
    let built =
        builders::build(&spec, builders::DEFAULT_M_GRAPH_DEPTH).map_err(|e| e.to_string())?;
    let q = min_quotient(&built.graph);
    let start = built
        .start
        .map(|s| q.map.apply(s).index());
    #[derive(Serialize)]
    struct QuotientView {
        original: GraphView,
        quotient: GraphView,
        merged_blocks: usize,
    }
    let original = graph_view(&built.graph, built.start.map(|s| s.index()));
    let quotient = graph_view(&q.graph, start);
    let merged = built.graph.position_count() - q.graph.position_count();
    serde_json::to_string(&QuotientView {
        original,
        quotient,
        merged_blocks: merged,
    })
    .map_err(|e| e.to_string())
}

fn counts_json(max_positions: u32, max_fbd: u32) -> Result<String, String> {
    #[derive(Serialize)]
    struct Counts {
        positions: Vec<u64>,
        rulegraphs: Vec<u64>,
        gamegraphs: Vec<u64>,
        birthdays: Vec<u32>,
        by_birthday: Vec<String>,
    }
    let max_positions = max_positions.min(7) as usize;
    let max_fbd = max_fbd.min(4);
    let mut counts = Counts {
        positions: Vec::new(),
        rulegraphs: Vec::new(),
        gamegraphs: Vec::new(),
        birthdays: Vec::new(),
        by_birthday: Vec::new(),
    };
    for n in 1..=max_positions {
        counts.positions.push(n as u64);
        counts
            .rulegraphs
            .push(count_simple_rulegraphs(n, false, max_positions).map_err(|e| e.to_string())?);
        counts
            .gamegraphs
            .push(count_simple_rulegraphs(n, true, max_positions).map_err(|e| e.to_string())?);
    }
    for d in 0..=max_fbd {
        counts.birthdays.push(d);
        counts
            .by_birthday
            .push(x_total(d, max_fbd).map_err(|e| e.to_string())?.to_string());
    }
    serde_json::to_string(&counts).map_err(|e| e.to_string())
}

/// Builds a game and returns its layered view with per-position nim value,
/// birthday, normal-play outcome, and minimum-quotient block.
#[wasm_bindgen]
pub fn build_game_view(kind: &str, a: u32, b: u32) -> Result<String, JsError> {
    build_view_json(kind, a, b).map_err(|e| JsError::new(&e))
}

/// Builds a game together with its minimum quotient.
#[wasm_bindgen]
pub fn min_quotient_view(kind: &str, a: u32, b: u32) -> Result<String, JsError> {
    quotient_view_json(kind, a, b).map_err(|e| JsError::new(&e))
}

/// Enumeration counts: simple rulegraphs/gamegraphs by positions and the
/// `x_d` totals by formal birthday.
#[wasm_bindgen]
pub fn enumeration_counts(max_positions: u32, max_fbd: u32) -> Result<String, JsError> {
    counts_json(max_positions, max_fbd).map_err(|e| JsError::new(&e))
}
