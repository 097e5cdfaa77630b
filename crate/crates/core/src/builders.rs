//! Constructors for the concrete games used as fixtures: one-pile NIM chains,
//! multi-pile NIM in tuple and multiset form, Wythoff's game, subtraction
//! games, Grundy's game, the mouse-in-a-maze game, the `M^d` rulegraphs, box
//! product sums, and the named natural maps between them.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use thiserror::Error;

use crate::graph::{Gamegraph, GraphError, PositionId, Rulegraph};
use crate::hfset::HfArena;
use crate::morphism::{check_option_preserving, check_source_preserving, PositionMap};
use crate::valuation::{Outcome, TerminalLabeling};

/// Largest `M^d` depth built without an explicit override; `M^4` already has
/// 65536 positions.
pub const DEFAULT_M_GRAPH_DEPTH: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("invalid game spec: {0}")]
    InvalidSpec(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parameter block selecting one of the built-in games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSpec {
    Star(u64),
    NimTuple(Vec<u64>),
    NimMultiset(Vec<u64>),
    Wythoff(u64, u64),
    Subtraction(u64, Vec<u64>),
    Grundy(u64),
    Maze(u32, u32),
    MGraph(u32),
}

/// A built game: `M^d` has several sources for `d ≥ 2`, so the start is
/// optional; only the maze carries a terminal labeling.
#[derive(Debug, Clone)]
pub struct BuiltGame {
    pub graph: Rulegraph,
    pub start: Option<PositionId>,
    pub terminal_labels: Option<TerminalLabeling>,
}

impl BuiltGame {
    fn from_gamegraph(game: Gamegraph) -> Self {
        let start = game.start();
        BuiltGame {
            graph: game.into_rulegraph(),
            start: Some(start),
            terminal_labels: None,
        }
    }
}

pub fn build(spec: &GameSpec, m_graph_depth_limit: u32) -> Result<BuiltGame, BuildError> {
    match spec {
        GameSpec::Star(n) => Ok(BuiltGame::from_gamegraph(star(*n))),
        GameSpec::NimTuple(piles) => Ok(BuiltGame::from_gamegraph(nim_tuple(piles))),
        GameSpec::NimMultiset(piles) => Ok(BuiltGame::from_gamegraph(nim_multiset(piles))),
        GameSpec::Wythoff(a, b) => Ok(BuiltGame::from_gamegraph(wythoff(*a, *b))),
        GameSpec::Subtraction(n, allowed) => {
            let set: BTreeSet<u64> = allowed.iter().copied().collect();
            Ok(BuiltGame::from_gamegraph(subtraction(*n, &set)?))
        }
        GameSpec::Grundy(n) => Ok(BuiltGame::from_gamegraph(grundy(*n))),
        GameSpec::Maze(rows, cols) => {
            let (game, labels) = maze(*rows, *cols)?;
            let start = game.start();
            Ok(BuiltGame {
                graph: game.into_rulegraph(),
                start: Some(start),
                terminal_labels: Some(labels),
            })
        }
        GameSpec::MGraph(d) => {
            let graph = m_graph(*d, m_graph_depth_limit)?;
            let start = Gamegraph::new(graph.clone()).ok().map(|g| g.start());
            Ok(BuiltGame {
                graph,
                start,
                terminal_labels: None,
            })
        }
    }
}

/// One-pile NIM with `n` stones: positions `0..=n`, `Opt(ζ) = {0, .., ζ-1}`.
pub fn star(n: u64) -> Gamegraph {
    let n = n as usize;
    let labels = (0..=n).map(|i| i.to_string()).collect();
    let options = (0..=n).map(|i| (0..i).map(PositionId).collect()).collect();
    Gamegraph::new(Rulegraph::from_options(labels, options).expect("chain is valid"))
        .expect("n is the unique source")
}

/// Builds the forward closure of a deterministic move function and returns
/// the game along with the payload of every position.
fn closure_game<P, F, L>(start: P, moves: F, label: L) -> (Gamegraph, Vec<P>)
where
    P: Clone + Ord + Hash,
    F: Fn(&P) -> Vec<P>,
    L: Fn(&P) -> String,
{
    let mut seen: BTreeSet<P> = BTreeSet::new();
    let mut stack = vec![start.clone()];
    seen.insert(start.clone());
    while let Some(p) = stack.pop() {
        for q in moves(&p) {
            if seen.insert(q.clone()) {
                stack.push(q);
            }
        }
    }
    let payloads: Vec<P> = seen.into_iter().collect();
    let id_of: HashMap<&P, PositionId> = payloads
        .iter()
        .enumerate()
        .map(|(i, p)| (p, PositionId(i)))
        .collect();
    let labels = payloads.iter().map(&label).collect();
    let options = payloads
        .iter()
        .map(|p| moves(p).iter().map(|q| id_of[q]).collect())
        .collect();
    let graph = Rulegraph::from_options(labels, options).expect("closure game is valid");
    let game = Gamegraph::new(graph).expect("moves never re-enter the start");
    (game, payloads)
}

fn tuple_label(tuple: &[u64]) -> String {
    let parts: Vec<String> = tuple.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

fn multiset_label(values: &[u64]) -> String {
    if values.is_empty() {
        return "∅".to_string();
    }
    let parts: Vec<String> = values.iter().map(u64::to_string).collect();
    format!("⟦{}⟧", parts.join(","))
}

fn nim_tuple_internal(piles: &[u64]) -> (Gamegraph, Vec<Vec<u64>>) {
    closure_game(
        piles.to_vec(),
        |tuple| {
            let mut out = Vec::new();
            for (i, &h) in tuple.iter().enumerate() {
                for v in 0..h {
                    let mut next = tuple.clone();
                    next[i] = v;
                    out.push(next);
                }
            }
            out
        },
        |tuple| tuple_label(tuple),
    )
}

/// Multi-pile NIM on ordered piles; every tuple of reduced pile sizes is a
/// position.
pub fn nim_tuple(piles: &[u64]) -> Gamegraph {
    nim_tuple_internal(piles).0
}

fn nim_multiset_internal(piles: &[u64]) -> (Gamegraph, Vec<Vec<u64>>) {
    let mut start = piles.to_vec();
    start.sort_unstable();
    closure_game(
        start,
        |multiset| {
            let mut out = Vec::new();
            for (i, &h) in multiset.iter().enumerate() {
                for v in 0..h {
                    let mut next = multiset.clone();
                    next[i] = v;
                    next.sort_unstable();
                    out.push(next);
                }
            }
            out
        },
        |multiset| multiset_label(multiset),
    )
}

/// Multi-pile NIM with indistinguishable piles: positions are multisets,
/// rendered sorted ascending.
pub fn nim_multiset(piles: &[u64]) -> Gamegraph {
    nim_multiset_internal(piles).0
}

fn wythoff_internal(a: u64, b: u64) -> (Gamegraph, Vec<Vec<u64>>) {
    let mut start = vec![a, b];
    start.sort_unstable();
    closure_game(
        start,
        |heaps| {
            let (a, b) = (heaps[0], heaps[1]);
            let mut out = Vec::new();
            let mut push = |x: u64, y: u64| {
                let mut pair = [x, y];
                pair.sort_unstable();
                out.push(pair.to_vec());
            };
            for k in 1..=a {
                push(a - k, b);
            }
            for k in 1..=b {
                push(a, b - k);
            }
            for k in 1..=a.min(b) {
                push(a - k, b - k);
            }
            out
        },
        |heaps| multiset_label(heaps),
    )
}

/// Wythoff's game on two heaps: remove stones from one heap or the same
/// number from both.
pub fn wythoff(a: u64, b: u64) -> Gamegraph {
    wythoff_internal(a, b).0
}

fn subtraction_internal(
    n: u64,
    allowed: &BTreeSet<u64>,
) -> Result<(Gamegraph, Vec<u64>), BuildError> {
    if allowed.is_empty() {
        return Err(BuildError::InvalidSpec("empty subtraction set".into()));
    }
    if allowed.contains(&0) {
        return Err(BuildError::InvalidSpec(
            "subtraction set entries must be at least 1".into(),
        ));
    }
    let allowed = allowed.clone();
    let (game, stones) = closure_game(
        n,
        move |&stones| {
            allowed
                .iter()
                .filter(|&&k| k <= stones)
                .map(|&k| stones - k)
                .collect()
        },
        |stones| stones.to_string(),
    );
    Ok((game, stones))
}

/// Subtraction game: from `k` stones remove any amount in `allowed`. Only
/// stone counts reachable from `n` become positions.
pub fn subtraction(n: u64, allowed: &BTreeSet<u64>) -> Result<Gamegraph, BuildError> {
    Ok(subtraction_internal(n, allowed)?.0)
}

fn grundy_internal(n: u64) -> (Gamegraph, Vec<Vec<u64>>) {
    closure_game(
        vec![n],
        |heaps| {
            let mut out = Vec::new();
            let mut distinct: Vec<u64> = heaps.clone();
            distinct.dedup();
            for &h in distinct.iter().filter(|&&h| h >= 3) {
                let at = heaps.iter().position(|&x| x == h).unwrap();
                for low in 1..=(h - 1) / 2 {
                    let high = h - low;
                    if low == high {
                        continue;
                    }
                    let mut next = heaps.clone();
                    next.remove(at);
                    next.push(high);
                    next.push(low);
                    next.sort_unstable_by(|a, b| b.cmp(a));
                    out.push(next);
                }
            }
            out
        },
        |heaps| multiset_label(heaps),
    )
}

/// Grundy's game from a single heap: a move divides one heap into two
/// non-equal heaps. Heap multisets render sorted descending.
pub fn grundy(n: u64) -> Gamegraph {
    grundy_internal(n).0
}

/// The mouse-in-a-maze game on a `rows × cols` grid. The mouse starts at
/// (0,0) and moves right or up; the top row and rightmost column are
/// terminal, the unreachable top-right corner is excluded. Top-row terminals
/// are `N` (cheese), right-column terminals are `P` (cat).
pub fn maze(rows: u32, cols: u32) -> Result<(Gamegraph, TerminalLabeling), BuildError> {
    if rows < 2 || cols < 2 {
        return Err(BuildError::InvalidSpec(
            "maze needs at least 2 rows and 2 columns".into(),
        ));
    }
    let mut cells: Vec<(u32, u32)> = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            if x == cols - 1 && y == rows - 1 {
                continue;
            }
            cells.push((x, y));
        }
    }
    let id_of: HashMap<(u32, u32), PositionId> = cells
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, PositionId(i)))
        .collect();
    let is_terminal = |(x, y): (u32, u32)| x == cols - 1 || y == rows - 1;
    let labels = cells.iter().map(|&(x, y)| format!("({x},{y})")).collect();
    let options = cells
        .iter()
        .map(|&(x, y)| {
            if is_terminal((x, y)) {
                Vec::new()
            } else {
                vec![id_of[&(x + 1, y)], id_of[&(x, y + 1)]]
            }
        })
        .collect();
    let game = Gamegraph::new(Rulegraph::from_options(labels, options)?)?;
    let outcomes = cells
        .iter()
        .filter(|&&c| is_terminal(c))
        .map(|&(x, y)| {
            let outcome = if y == rows - 1 { Outcome::N } else { Outcome::P };
            (id_of[&(x, y)], outcome)
        })
        .collect();
    Ok((game, TerminalLabeling::new(outcomes)))
}

/// `M^d`: positions are all hereditarily finite sets of rank at most `d`,
/// with an arrow `(A, B)` exactly when `B ∈ A`. Has `ᵈ2` positions and
/// formal birthday `d`; a rulegraph but not a gamegraph once `d ≥ 2`.
pub fn m_graph(d: u32, depth_limit: u32) -> Result<Rulegraph, BuildError> {
    if d > depth_limit {
        return Err(BuildError::BudgetExceeded(format!(
            "M^{d} needs an explicit override (limit {depth_limit})"
        )));
    }
    if d > 4 {
        return Err(BuildError::BudgetExceeded(
            "M^5 would have 2^65536 positions".into(),
        ));
    }
    let mut arena = HfArena::new();
    let sets = arena.sets_up_to_rank(d);
    Ok(arena
        .collection_to_rulegraph(&sets)
        .expect("rank universe is membership closed"))
}

/// Box product of two rulegraphs: the sum game. Positions are pairs and a
/// move plays in exactly one component.
pub fn box_sum(left: &Rulegraph, right: &Rulegraph) -> Result<Rulegraph, BuildError> {
    let mut labels = Vec::with_capacity(left.position_count() * right.position_count());
    let mut options = Vec::with_capacity(labels.capacity());
    let id = |x: PositionId, y: PositionId| {
        PositionId(x.index() * right.position_count() + y.index())
    };
    for x in left.positions() {
        for y in right.positions() {
            labels.push(format!("({},{})", left.label(x), right.label(y)));
            let mut opts: Vec<PositionId> =
                left.options(x).iter().map(|&x2| id(x2, y)).collect();
            opts.extend(right.options(y).iter().map(|&y2| id(x, y2)));
            options.push(opts);
        }
    }
    Ok(Rulegraph::from_options(labels, options)?)
}

/// Sum of two gamegraphs, started at the pair of starts.
pub fn box_sum_gamegraph(
    left: &Gamegraph,
    right: &Gamegraph,
) -> Result<Gamegraph, BuildError> {
    let graph = box_sum(left.graph(), right.graph())?;
    let game = Gamegraph::new(graph)?;
    debug_assert_eq!(
        game.start_label(),
        format!("({},{})", left.start_label(), right.start_label())
    );
    Ok(game)
}

/// Named option preserving maps between the built-in games, verified on
/// construction and useful as morphism fixtures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NaturalMapSpec {
    /// Forget the order of the NIM piles: `(a₁,…,aₙ) ↦ ⟦a₁,…,aₙ⟧`.
    TupleToMultiset(Vec<u64>),
    /// Collapse Wythoff's game onto a subtraction game: `⟦a,b⟧ ↦ a+b`.
    /// Only option preserving for small fixtures such as (1,2).
    WythoffToSubtraction(u64, u64),
    /// Ignore heaps of size 1 and 2 in Grundy's game.
    GrundyDropSmallHeaps(u64),
}

#[derive(Debug, Clone)]
pub struct NaturalMap {
    pub domain: Gamegraph,
    pub codomain: Gamegraph,
    pub map: PositionMap,
}

pub fn natural_map(spec: &NaturalMapSpec) -> Result<NaturalMap, BuildError> {
    let built = match spec {
        NaturalMapSpec::TupleToMultiset(piles) => {
            let (domain, tuples) = nim_tuple_internal(piles);
            let (codomain, multisets) = nim_multiset_internal(piles);
            let id_of: HashMap<&Vec<u64>, PositionId> = multisets
                .iter()
                .enumerate()
                .map(|(i, m)| (m, PositionId(i)))
                .collect();
            let table = tuples
                .iter()
                .map(|t| {
                    let mut sorted = t.clone();
                    sorted.sort_unstable();
                    id_of[&sorted]
                })
                .collect();
            let map = PositionMap::new(domain.graph(), codomain.graph(), table)
                .expect("total by construction");
            NaturalMap {
                domain,
                codomain,
                map,
            }
        }
        NaturalMapSpec::WythoffToSubtraction(a, b) => {
            let (domain, heaps) = wythoff_internal(*a, *b);
            let (codomain, stones) = subtraction_internal(a + b, &BTreeSet::from([1, 2]))?;
            let id_of: HashMap<u64, PositionId> = stones
                .iter()
                .enumerate()
                .map(|(i, &s)| (s, PositionId(i)))
                .collect();
            let table = heaps.iter().map(|h| id_of[&(h[0] + h[1])]).collect();
            let map = PositionMap::new(domain.graph(), codomain.graph(), table)
                .expect("total by construction");
            NaturalMap {
                domain,
                codomain,
                map,
            }
        }
        NaturalMapSpec::GrundyDropSmallHeaps(n) => {
            let (domain, heaps) = grundy_internal(*n);
            let filtered: Vec<Vec<u64>> = heaps
                .iter()
                .map(|h| h.iter().copied().filter(|&x| x > 2).collect())
                .collect();
            let mut image: Vec<Vec<u64>> = filtered.clone();
            image.sort_unstable();
            image.dedup();
            let id_of: HashMap<&Vec<u64>, PositionId> = image
                .iter()
                .enumerate()
                .map(|(i, m)| (m, PositionId(i)))
                .collect();
            let labels = image.iter().map(|m| multiset_label(m)).collect();
            let mut options: Vec<Vec<PositionId>> = vec![Vec::new(); image.len()];
            for p in domain.graph().positions() {
                let from = id_of[&filtered[p.index()]];
                for q in domain.graph().options(p) {
                    let to = id_of[&filtered[q.index()]];
                    options[from.index()].push(to);
                }
            }
            let codomain = Gamegraph::new(Rulegraph::from_options(labels, options)?)?;
            let table = filtered.iter().map(|m| id_of[m]).collect();
            let map = PositionMap::new(domain.graph(), codomain.graph(), table)
                .expect("total by construction");
            NaturalMap {
                domain,
                codomain,
                map,
            }
        }
    };
    if let crate::Verdict::Fails(clash) =
        check_option_preserving(built.domain.graph(), built.codomain.graph(), &built.map)
    {
        return Err(BuildError::InvalidSpec(format!(
            "map is not option preserving at {}",
            built.domain.graph().label(clash.position)
        )));
    }
    if !check_source_preserving(&built.domain, &built.codomain, &built.map).holds() {
        return Err(BuildError::InvalidSpec(
            "map does not preserve the starting position".into(),
        ));
    }
    Ok(built)
}
