//! Command-line surface over the gamegraphs library.
//!
//! Exit codes: 0 for success and true verdicts, 1 for false verdicts (with a
//! machine-readable witness on stdout), 2 for errors.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use gamegraphs::builders::{self, BuildError, GameSpec};
use gamegraphs::congruence::{
    self, con_lattice, emulationally_equivalent, is_congruence, min_quotient, quotient,
    CongruenceClash, Partition,
};
use gamegraphs::doc::{
    export_dot, GraphDocument, MapDocument, ParsedGraph, PartitionDocument,
};
use gamegraphs::enumeration::{
    self, count_simple_rulegraphs, stream_by_fbd, stream_simple_rulegraphs, x_total,
};
use gamegraphs::morphism::{
    are_isomorphic, check_option_preserving, check_source_preserving,
    find_option_preserving_map, OptionClash, SourceClash,
};
use gamegraphs::valuation::{
    outcome_with_terminal_labels, BuiltinValuation, ValueTable,
};
use gamegraphs::{Gamegraph, PositionId, Rulegraph, Verdict};

#[derive(Parser)]
#[command(name = "gamegraphs", version, about = "Digraph games: build, analyze, map, quotient, enumerate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a game and print its graph document.
    ///
    /// Games: star N | nim-tuple P1 P2 .. | nim-multiset P1 P2 .. |
    /// wythoff A B | subtraction N S1,S2,.. | grundy N | maze ROWS COLS |
    /// m-graph D
    Build {
        game: String,
        params: Vec<String>,
        /// Raise the M^d depth limit (default 3; depth 4 has 65536 positions).
        #[arg(long)]
        allow_depth: Option<u32>,
    },
    /// Evaluate a valuation on every position of a graph.
    Analyze {
        file: PathBuf,
        /// nim | outcome+ | outcome- | fbd | mindist | terminal-labeled
        #[arg(long)]
        valuation: String,
    },
    /// Box-product sum of two graphs.
    Sum { left: PathBuf, right: PathBuf },
    /// Check a map file for option (and optionally source) preservation.
    CheckMap {
        src: PathBuf,
        dst: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Also require the starting position to be preserved.
        #[arg(long)]
        source: bool,
    },
    /// Exhaustively search for an option preserving map.
    FindMap {
        src: PathBuf,
        dst: PathBuf,
        #[arg(long)]
        source: bool,
        /// Domain position cap for the exhaustive search (default 16).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Decide isomorphism, printing a witness map when one exists.
    Iso { left: PathBuf, right: PathBuf },
    /// Check whether a partition file is a congruence relation.
    CheckCongruence {
        file: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Quotient a graph by a verified congruence.
    Quotient {
        file: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Minimum quotient: collapse to the unique simple form.
    Minquot { file: PathBuf },
    /// Enumerate all congruence relations of a small graph.
    ConLattice {
        file: PathBuf,
        /// Position cap for the exhaustive scan (default 10).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Emulational equivalence: isomorphic minimum quotients.
    Emul { left: PathBuf, right: PathBuf },
    /// Count or stream simple rulegraphs, by formal birthday or positions.
    Enumerate {
        #[arg(long, value_name = "D", conflicts_with = "by_positions")]
        by_fbd: Option<u32>,
        #[arg(long, value_name = "N")]
        by_positions: Option<usize>,
        /// Keep only gamegraphs (exactly one source).
        #[arg(long)]
        gamegraphs: bool,
        /// Print each graph as a JSON line instead of counting.
        #[arg(long)]
        stream: bool,
        /// Override the default size budget.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Export a graph as DOT text.
    Export {
        file: PathBuf,
        /// Emit DOT (the only supported format).
        #[arg(long)]
        dot: bool,
        /// Annotate nodes: nim | outcome+ | outcome- | fbd | mindist | block
        #[arg(long)]
        annotate: Option<String>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

const TRUE_EXIT: ExitCode = ExitCode::SUCCESS;

/// Exit status for "checked and found false", as opposed to "could not check".
fn false_exit() -> ExitCode {
    ExitCode::from(1)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build {
            game,
            params,
            allow_depth,
        } => {
            let spec = parse_game_spec(&game, &params)?;
            let depth_limit = allow_depth.unwrap_or(builders::DEFAULT_M_GRAPH_DEPTH);
            let built = builders::build(&spec, depth_limit).map_err(build_error)?;
            println!("{}", GraphDocument::from_built(&built).to_json());
            Ok(TRUE_EXIT)
        }
        Command::Analyze { file, valuation } => analyze(&file, &valuation),
        Command::Sum { left, right } => {
            let a = load(&left)?;
            let b = load(&right)?;
            let graph = builders::box_sum(&a.graph, &b.graph).map_err(build_error)?;
            let mut doc = GraphDocument::from_rulegraph(&graph);
            if a.start.is_some() && b.start.is_some() {
                let game = Gamegraph::new(graph)?;
                doc.start = Some(game.start_label().to_string());
            }
            println!("{}", doc.to_json());
            Ok(TRUE_EXIT)
        }
        Command::CheckMap {
            src,
            dst,
            map,
            source,
        } => check_map(&src, &dst, &map, source),
        Command::FindMap {
            src,
            dst,
            source,
            budget,
        } => find_map(&src, &dst, source, budget),
        Command::Iso { left, right } => iso(&left, &right),
        Command::CheckCongruence { file, partition } => check_congruence(&file, &partition),
        Command::Quotient { file, partition } => {
            let parsed = load(&file)?;
            let part = load_partition(&partition, &parsed.graph)?;
            let q = quotient(&parsed.graph, &part)?;
            let mut doc = GraphDocument::from_rulegraph(&q.graph);
            if parsed.start.is_some() {
                let game = Gamegraph::new(q.graph.clone())?;
                doc.start = Some(game.start_label().to_string());
            }
            println!("{}", doc.to_json());
            Ok(TRUE_EXIT)
        }
        Command::Minquot { file } => {
            let parsed = load(&file)?;
            let q = min_quotient(&parsed.graph);
            let mut doc = GraphDocument::from_rulegraph(&q.graph);
            if parsed.start.is_some() {
                let game = Gamegraph::new(q.graph.clone())?;
                doc.start = Some(game.start_label().to_string());
            }
            println!("{}", doc.to_json());
            Ok(TRUE_EXIT)
        }
        Command::ConLattice { file, budget } => {
            let parsed = load(&file)?;
            let budget = budget.unwrap_or(congruence::DEFAULT_LATTICE_BUDGET);
            let lattice = con_lattice(&parsed.graph, budget)?;
            let blocks = |p: &Partition| PartitionDocument::from_partition(&parsed.graph, p).blocks;
            let congruences: Vec<Value> = lattice
                .elements()
                .iter()
                .map(|p| json!(blocks(p)))
                .collect();
            println!(
                "{}",
                json!({
                    "count": lattice.len(),
                    "congruences": congruences,
                    "bottom": blocks(&lattice.elements()[lattice.bottom_index()]),
                    "top": blocks(&lattice.elements()[lattice.top_index()]),
                })
            );
            Ok(TRUE_EXIT)
        }
        Command::Emul { left, right } => {
            let a = load(&left)?;
            let b = load(&right)?;
            let verdict = emulationally_equivalent(&a.graph, &b.graph);
            match &verdict.iso {
                Some(map) => {
                    println!(
                        "{}",
                        json!({
                            "equivalent": true,
                            "min_quotient_iso": MapDocument::from_position_map(
                                &verdict.left_min, &verdict.right_min, map).map,
                        })
                    );
                    Ok(TRUE_EXIT)
                }
                None => {
                    println!(
                        "{}",
                        json!({
                            "equivalent": false,
                            "left_min_positions": verdict.left_min.position_count(),
                            "right_min_positions": verdict.right_min.position_count(),
                        })
                    );
                    Ok(false_exit())
                }
            }
        }
        Command::Enumerate {
            by_fbd,
            by_positions,
            gamegraphs,
            stream,
            budget,
        } => enumerate(by_fbd, by_positions, gamegraphs, stream, budget),
        Command::Export {
            file,
            dot,
            annotate,
        } => {
            if !dot {
                bail!("only --dot export is supported");
            }
            let parsed = load(&file)?;
            let notes = match annotate.as_deref() {
                None => None,
                Some(kind) => Some(annotations(&parsed.graph, kind)?),
            };
            print!("{}", export_dot(&parsed.graph, notes.as_deref()));
            Ok(TRUE_EXIT)
        }
    }
}

fn load(path: &Path) -> Result<ParsedGraph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    gamegraphs::doc::parse_graph(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_partition(path: &Path, graph: &Rulegraph) -> Result<Partition> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let doc = PartitionDocument::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok(doc.to_partition(graph)?)
}

fn build_error(err: BuildError) -> anyhow::Error {
    anyhow!("{err}")
}

fn parse_game_spec(game: &str, params: &[String]) -> Result<GameSpec> {
    let nums = |params: &[String]| -> Result<Vec<u64>> {
        params
            .iter()
            .map(|p| p.parse::<u64>().with_context(|| format!("bad number {p:?}")))
            .collect()
    };
    let one = |params: &[String]| -> Result<u64> {
        match params {
            [single] => single
                .parse::<u64>()
                .with_context(|| format!("bad number {single:?}")),
            _ => bail!("{game} takes exactly one parameter"),
        }
    };
    match game {
        "star" => Ok(GameSpec::Star(one(params)?)),
        "nim-tuple" => Ok(GameSpec::NimTuple(nums(params)?)),
        "nim-multiset" => Ok(GameSpec::NimMultiset(nums(params)?)),
        "wythoff" => match nums(params)?.as_slice() {
            [a, b] => Ok(GameSpec::Wythoff(*a, *b)),
            _ => bail!("wythoff takes two heap sizes"),
        },
        "subtraction" => match params {
            [n, set] => {
                let n = n.parse::<u64>().context("bad stone count")?;
                let allowed = set
                    .split(',')
                    .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad amount {s:?}")))
                    .collect::<Result<Vec<u64>>>()?;
                Ok(GameSpec::Subtraction(n, allowed))
            }
            _ => bail!("subtraction takes a stone count and a comma-separated set"),
        },
        "grundy" => Ok(GameSpec::Grundy(one(params)?)),
        "maze" => match nums(params)?.as_slice() {
            [rows, cols] => Ok(GameSpec::Maze(*rows as u32, *cols as u32)),
            _ => bail!("maze takes rows and columns"),
        },
        "m-graph" => Ok(GameSpec::MGraph(one(params)? as u32)),
        other => bail!(
            "unknown game {other:?}; expected star, nim-tuple, nim-multiset, wythoff, \
             subtraction, grundy, maze, or m-graph"
        ),
    }
}

fn analyze(file: &Path, valuation: &str) -> Result<ExitCode> {
    let parsed = load(file)?;
    let graph = &parsed.graph;
    let values: Value = if valuation == "terminal-labeled" {
        let game = parsed.gamegraph().map_err(|e| anyhow!("{e}"))?;
        let labeling = parsed
            .terminal_labels
            .as_ref()
            .ok_or_else(|| anyhow!("document has no terminal_labels"))?;
        let outcomes = outcome_with_terminal_labels(&game, labeling)?;
        Value::Object(
            graph
                .positions()
                .map(|p| {
                    (
                        graph.label(p).to_string(),
                        Value::String(outcomes[p.index()].to_string()),
                    )
                })
                .collect(),
        )
    } else {
        let table = builtin_valuation(valuation)?.evaluate(graph);
        Value::Object(
            graph
                .positions()
                .map(|p| (graph.label(p).to_string(), table_value(&table, p)))
                .collect(),
        )
    };
    let mut output = json!({ "values": values });
    if let Some(start) = parsed.start {
        output["graph_value"] = values_entry(&values, graph.label(start));
    }
    println!("{output}");
    Ok(TRUE_EXIT)
}

fn values_entry(values: &Value, label: &str) -> Value {
    values
        .get(label)
        .cloned()
        .expect("start is a position")
}

fn table_value(table: &ValueTable, p: PositionId) -> Value {
    match table {
        ValueTable::Numbers(v) => json!(v[p.index()]),
        ValueTable::Outcomes(v) => Value::String(v[p.index()].to_string()),
    }
}

fn builtin_valuation(name: &str) -> Result<BuiltinValuation> {
    gamegraphs::valuation::BUILTIN_VALUATIONS
        .into_iter()
        .find(|v| v.name() == name)
        .ok_or_else(|| {
            anyhow!("unknown valuation {name:?}; expected nim, outcome+, outcome-, fbd, mindist, or terminal-labeled")
        })
}

fn option_clash_json(
    domain: &Rulegraph,
    codomain: &Rulegraph,
    clash: &OptionClash,
) -> Value {
    let labels = |set: &BTreeSet<PositionId>| -> Vec<String> {
        set.iter().map(|&p| codomain.label(p).to_string()).collect()
    };
    json!({
        "kind": "option",
        "position": domain.label(clash.position),
        "image_options": labels(&clash.image_options),
        "mapped_options": labels(&clash.mapped_options),
    })
}

fn source_clash_json(codomain: &Rulegraph, clash: &SourceClash) -> Value {
    json!({
        "kind": "source",
        "mapped_start": codomain.label(clash.mapped_start),
        "expected_start": codomain.label(clash.expected_start),
    })
}

fn check_map(src: &Path, dst: &Path, map_file: &Path, source: bool) -> Result<ExitCode> {
    let domain = load(src)?;
    let codomain = load(dst)?;
    let text = std::fs::read_to_string(map_file)
        .with_context(|| format!("reading {}", map_file.display()))?;
    let map_doc =
        MapDocument::parse(&text).map_err(|e| anyhow!("{}: {e}", map_file.display()))?;
    let map = map_doc.to_position_map(&domain.graph, &codomain.graph)?;
    if let Verdict::Fails(clash) =
        check_option_preserving(&domain.graph, &codomain.graph, &map)
    {
        println!(
            "{}",
            json!({"holds": false,
                   "witness": option_clash_json(&domain.graph, &codomain.graph, &clash)})
        );
        return Ok(false_exit());
    }
    if source {
        let d = domain.gamegraph().map_err(|e| anyhow!("{src:?}: {e}", src = src.display()))?;
        let c = codomain
            .gamegraph()
            .map_err(|e| anyhow!("{dst:?}: {e}", dst = dst.display()))?;
        if let Verdict::Fails(clash) = check_source_preserving(&d, &c, &map) {
            println!(
                "{}",
                json!({"holds": false, "witness": source_clash_json(&codomain.graph, &clash)})
            );
            return Ok(false_exit());
        }
    }
    println!("{}", json!({"holds": true}));
    Ok(TRUE_EXIT)
}

fn find_map(src: &Path, dst: &Path, source: bool, budget: Option<usize>) -> Result<ExitCode> {
    let domain = load(src)?;
    let codomain = load(dst)?;
    let budget = budget.unwrap_or(gamegraphs::morphism::DEFAULT_SEARCH_BUDGET);
    let forced = if source {
        let d = domain.gamegraph().map_err(|e| anyhow!("{e}"))?;
        let c = codomain.gamegraph().map_err(|e| anyhow!("{e}"))?;
        Some((d.start(), c.start()))
    } else {
        None
    };
    match find_option_preserving_map(&domain.graph, &codomain.graph, forced, budget)? {
        Some(map) => {
            println!(
                "{}",
                MapDocument::from_position_map(&domain.graph, &codomain.graph, &map).to_json()
            );
            Ok(TRUE_EXIT)
        }
        None => {
            println!(
                "{}",
                json!({
                    "exists": false,
                    "checked_exhaustively": true,
                    "domain_positions": domain.graph.position_count(),
                })
            );
            Ok(false_exit())
        }
    }
}

fn iso(left: &Path, right: &Path) -> Result<ExitCode> {
    let a = load(left)?;
    let b = load(right)?;
    match are_isomorphic(&a.graph, &b.graph) {
        Some(map) => {
            println!(
                "{}",
                json!({
                    "isomorphic": true,
                    "map": MapDocument::from_position_map(&a.graph, &b.graph, &map).map,
                })
            );
            Ok(TRUE_EXIT)
        }
        None => {
            println!(
                "{}",
                json!({
                    "isomorphic": false,
                    "left": {"positions": a.graph.position_count(), "arrows": a.graph.arrow_count()},
                    "right": {"positions": b.graph.position_count(), "arrows": b.graph.arrow_count()},
                })
            );
            Ok(false_exit())
        }
    }
}

fn congruence_clash_json(graph: &Rulegraph, partition: &Partition, clash: &CongruenceClash) -> Value {
    let class_labels = |classes: &BTreeSet<usize>| -> Vec<Vec<String>> {
        classes
            .iter()
            .map(|&b| {
                partition
                    .block(b)
                    .iter()
                    .map(|&p| graph.label(p).to_string())
                    .collect()
            })
            .collect()
    };
    json!({
        "left": graph.label(clash.left),
        "right": graph.label(clash.right),
        "left_option_classes": class_labels(&clash.left_classes),
        "right_option_classes": class_labels(&clash.right_classes),
    })
}

fn check_congruence(file: &Path, partition_file: &Path) -> Result<ExitCode> {
    let parsed = load(file)?;
    let partition = load_partition(partition_file, &parsed.graph)?;
    match is_congruence(&parsed.graph, &partition) {
        Verdict::Holds => {
            println!("{}", json!({"holds": true}));
            Ok(TRUE_EXIT)
        }
        Verdict::Fails(clash) => {
            println!(
                "{}",
                json!({"holds": false,
                       "witness": congruence_clash_json(&parsed.graph, &partition, &clash)})
            );
            Ok(false_exit())
        }
    }
}

fn enumerate(
    by_fbd: Option<u32>,
    by_positions: Option<usize>,
    gamegraphs: bool,
    stream: bool,
    budget: Option<u64>,
) -> Result<ExitCode> {
    let print_collection = |arena: &gamegraphs::hfset::HfArena,
                            sets: &[gamegraphs::hfset::HfSetId]| {
        let graph = arena
            .collection_to_rulegraph(sets)
            .expect("streamed collections are membership closed");
        println!("{}", GraphDocument::from_rulegraph(&graph).to_json());
    };
    match (by_fbd, by_positions) {
        (Some(d), None) => {
            if stream || gamegraphs {
                let budget = budget.map(|b| u32::try_from(b).unwrap_or(u32::MAX)).unwrap_or(enumeration::DEFAULT_FBD_BUDGET);
                let mut count: u64 = 0;
                stream_by_fbd(d, budget, |arena, sets| {
                    if gamegraphs {
                        let graph = arena
                            .collection_to_rulegraph(sets)
                            .expect("membership closed");
                        if graph.sources().len() != 1 {
                            return;
                        }
                    }
                    count += 1;
                    if stream {
                        print_collection(arena, sets);
                    }
                })?;
                if !stream {
                    println!("{count}");
                }
            } else {
                let depth_budget =
                    budget.map(|b| u32::try_from(b).unwrap_or(u32::MAX)).unwrap_or(enumeration::DEFAULT_TABLE_DEPTH);
                println!("{}", x_total(d, depth_budget)?);
            }
            Ok(TRUE_EXIT)
        }
        (None, Some(n)) => {
            if stream {
                let budget =
                    budget.map(|b| usize::try_from(b).unwrap_or(usize::MAX)).unwrap_or(enumeration::DEFAULT_STREAM_BUDGET);
                stream_simple_rulegraphs(n, gamegraphs, budget, print_collection)?;
            } else {
                let budget =
                    budget.map(|b| usize::try_from(b).unwrap_or(usize::MAX)).unwrap_or(enumeration::DEFAULT_COUNT_BUDGET);
                println!("{}", count_simple_rulegraphs(n, gamegraphs, budget)?);
            }
            Ok(TRUE_EXIT)
        }
        _ => bail!("pass exactly one of --by-fbd or --by-positions"),
    }
}

fn annotations(graph: &Rulegraph, kind: &str) -> Result<Vec<String>> {
    if kind == "block" {
        let q = min_quotient(graph);
        return Ok(graph
            .positions()
            .map(|p| format!("block={}", q.partition.block_of(p)))
            .collect());
    }
    let valuation = builtin_valuation(kind)?;
    let table = valuation.evaluate(graph);
    Ok(graph
        .positions()
        .map(|p| format!("{}={}", valuation.name(), table.render(p)))
        .collect())
}

