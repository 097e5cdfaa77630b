//! Digraph maps between rulegraphs: option/source preservation checks with
//! witnesses, image rulegraphs, kernels, isomorphism, and bounded exhaustive
//! search for option preserving maps.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::congruence::Partition;
use crate::graph::{Gamegraph, PositionId, Rulegraph};
use crate::hfset::HfArena;
use crate::valuation::formal_birthdays;
use crate::Verdict;

/// Default cap on domain size for exhaustive map search.
pub const DEFAULT_SEARCH_BUDGET: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error("map table has {got} entries but the domain has {expected} positions")]
    TableSize { got: usize, expected: usize },
    #[error("map target {target} is out of range for a codomain of {codomain} positions")]
    TargetOutOfRange { target: usize, codomain: usize },
    #[error("maps are not composable: first codomain {first}, second domain {second}")]
    NotComposable { first: usize, second: usize },
    #[error("map is not option preserving at position {}", .0.position.index())]
    NotOptionPreserving(OptionClash),
    #[error("search budget exceeded: domain has {size} positions, budget is {budget}")]
    BudgetExceeded { size: usize, budget: usize },
}

/// A total function from the positions of one graph to the positions of
/// another, recorded as a table indexed by domain position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMap {
    table: Vec<PositionId>,
    codomain_len: usize,
}

impl PositionMap {
    pub fn new(
        domain: &Rulegraph,
        codomain: &Rulegraph,
        table: Vec<PositionId>,
    ) -> Result<Self, MorphismError> {
        Self::from_table(table, domain.position_count(), codomain.position_count())
    }

    pub fn from_table(
        table: Vec<PositionId>,
        domain_len: usize,
        codomain_len: usize,
    ) -> Result<Self, MorphismError> {
        if table.len() != domain_len {
            return Err(MorphismError::TableSize {
                got: table.len(),
                expected: domain_len,
            });
        }
        for q in &table {
            if q.index() >= codomain_len {
                return Err(MorphismError::TargetOutOfRange {
                    target: q.index(),
                    codomain: codomain_len,
                });
            }
        }
        Ok(PositionMap {
            table,
            codomain_len,
        })
    }

    pub fn identity(graph: &Rulegraph) -> Self {
        PositionMap {
            table: graph.positions().collect(),
            codomain_len: graph.position_count(),
        }
    }

    pub fn apply(&self, p: PositionId) -> PositionId {
        self.table[p.index()]
    }

    pub fn table(&self) -> &[PositionId] {
        &self.table
    }

    pub fn domain_len(&self) -> usize {
        self.table.len()
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain_len
    }

    /// `then ∘ self`: apply `self` first.
    pub fn compose(&self, then: &PositionMap) -> Result<PositionMap, MorphismError> {
        if self.codomain_len != then.domain_len() {
            return Err(MorphismError::NotComposable {
                first: self.codomain_len,
                second: then.domain_len(),
            });
        }
        Ok(PositionMap {
            table: self.table.iter().map(|&q| then.apply(q)).collect(),
            codomain_len: then.codomain_len,
        })
    }

    pub fn image_set(&self) -> BTreeSet<PositionId> {
        self.table.iter().copied().collect()
    }

    pub fn is_surjective(&self) -> bool {
        self.image_set().len() == self.codomain_len
    }

    pub fn is_injective(&self) -> bool {
        self.image_set().len() == self.table.len()
    }

    /// Inverse of a bijective map.
    pub fn inverse(&self) -> Option<PositionMap> {
        if self.table.len() != self.codomain_len {
            return None;
        }
        let mut table = vec![None; self.codomain_len];
        for (p, &q) in self.table.iter().enumerate() {
            if table[q.index()].replace(PositionId(p)).is_some() {
                return None;
            }
        }
        Some(PositionMap {
            table: table.into_iter().map(Option::unwrap).collect(),
            codomain_len: self.table.len(),
        })
    }
}

/// Witness for a failed option preservation check at one position: the
/// options of the image differ from the image of the options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionClash {
    pub position: PositionId,
    pub image_options: BTreeSet<PositionId>,
    pub mapped_options: BTreeSet<PositionId>,
}

/// Checks `Opt(α(p)) = α(Opt(p))` at every position.
pub fn check_option_preserving(
    domain: &Rulegraph,
    codomain: &Rulegraph,
    map: &PositionMap,
) -> Verdict<OptionClash> {
    debug_assert_eq!(map.domain_len(), domain.position_count());
    debug_assert_eq!(map.codomain_len(), codomain.position_count());
    for p in domain.positions() {
        let image_options: BTreeSet<PositionId> =
            codomain.options(map.apply(p)).iter().copied().collect();
        let mapped_options: BTreeSet<PositionId> =
            domain.options(p).iter().map(|&q| map.apply(q)).collect();
        if image_options != mapped_options {
            return Verdict::Fails(OptionClash {
                position: p,
                image_options,
                mapped_options,
            });
        }
    }
    Verdict::Holds
}

/// Witness for a failed source preservation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceClash {
    pub mapped_start: PositionId,
    pub expected_start: PositionId,
}

pub fn check_source_preserving(
    domain: &Gamegraph,
    codomain: &Gamegraph,
    map: &PositionMap,
) -> Verdict<SourceClash> {
    let mapped = map.apply(domain.start());
    if mapped == codomain.start() {
        Verdict::Holds
    } else {
        Verdict::Fails(SourceClash {
            mapped_start: mapped,
            expected_start: codomain.start(),
        })
    }
}

/// Kernel of a map: the partition of the domain by equal image.
pub fn kernel(domain: &Rulegraph, map: &PositionMap) -> Partition {
    debug_assert_eq!(map.domain_len(), domain.position_count());
    Partition::from_key(domain.position_count(), |p| map.apply(p).index())
}

/// The rulegraph induced by the image of an option preserving map, along
/// with how it sits inside the codomain.
#[derive(Debug, Clone)]
pub struct ImageGraph {
    pub graph: Rulegraph,
    /// Image position -> codomain position.
    pub embedding: Vec<PositionId>,
    /// Domain -> image graph; equals the original map followed by re-indexing.
    pub projection: PositionMap,
}

/// Restricts the codomain to the image of a verified option preserving map.
/// Option preservation makes the image closed under options, so the induced
/// subgraph keeps every arrow.
pub fn image_rulegraph(
    domain: &Rulegraph,
    codomain: &Rulegraph,
    map: &PositionMap,
) -> Result<ImageGraph, MorphismError> {
    if let Verdict::Fails(clash) = check_option_preserving(domain, codomain, map) {
        return Err(MorphismError::NotOptionPreserving(clash));
    }
    let embedding: Vec<PositionId> = map.image_set().into_iter().collect();
    let mut new_id: HashMap<PositionId, PositionId> = HashMap::with_capacity(embedding.len());
    for (i, &old) in embedding.iter().enumerate() {
        new_id.insert(old, PositionId(i));
    }
    let labels = embedding
        .iter()
        .map(|&old| codomain.label(old).to_string())
        .collect();
    let options = embedding
        .iter()
        .map(|&old| codomain.options(old).iter().map(|q| new_id[q]).collect())
        .collect();
    let graph = Rulegraph::from_options(labels, options).expect("image of a rulegraph is one");
    let projection = PositionMap {
        table: map.table.iter().map(|q| new_id[q]).collect(),
        codomain_len: embedding.len(),
    };
    Ok(ImageGraph {
        graph,
        embedding,
        projection,
    })
}

/// Image of a gamegraph under an option preserving map, started at the image
/// of the start.
pub fn image_gamegraph(
    domain: &Gamegraph,
    codomain: &Rulegraph,
    map: &PositionMap,
) -> Result<(Gamegraph, ImageGraph), MorphismError> {
    let image = image_rulegraph(domain.graph(), codomain, map)?;
    let game = Gamegraph::new(image.graph.clone())
        .expect("the image of a gamegraph is a gamegraph");
    debug_assert_eq!(game.start(), image.projection.apply(domain.start()));
    Ok((game, image))
}

/// Decides digraph isomorphism, returning a bijective option preserving map
/// when one exists. Simple graphs compare by canonical form; otherwise a
/// backtracking search bucketed by (formal birthday, out-degree, in-degree).
pub fn are_isomorphic(a: &Rulegraph, b: &Rulegraph) -> Option<PositionMap> {
    if a.position_count() != b.position_count() || a.arrow_count() != b.arrow_count() {
        return None;
    }
    let n = a.position_count();
    if n == 0 {
        return Some(PositionMap {
            table: Vec::new(),
            codomain_len: 0,
        });
    }
    if is_extensional(a) && is_extensional(b) {
        return simple_isomorphism(a, b);
    }

    let sig_a = signatures(a);
    let sig_b = signatures(b);
    {
        let mut sa = sig_a.clone();
        let mut sb = sig_b.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        if sa != sb {
            return None;
        }
    }
    let mut candidates: HashMap<(u64, usize, usize), Vec<PositionId>> = HashMap::new();
    for q in b.positions() {
        candidates.entry(sig_b[q.index()]).or_default().push(q);
    }
    // most constrained first: smallest candidate bucket, then deepest
    let mut order: Vec<PositionId> = a.positions().collect();
    order.sort_by_key(|p| {
        let sig = sig_a[p.index()];
        (candidates[&sig].len(), std::cmp::Reverse(sig.0), p.index())
    });

    let adj_a = adjacency(a);
    let adj_b = adjacency(b);
    let mut assignment: Vec<Option<PositionId>> = vec![None; n];
    let mut used = vec![false; n];
    if assign_isomorphism(
        &order,
        0,
        &sig_a,
        &candidates,
        &adj_a,
        &adj_b,
        &mut assignment,
        &mut used,
    ) {
        let table: Vec<PositionId> = assignment.into_iter().map(Option::unwrap).collect();
        let map = PositionMap {
            table,
            codomain_len: n,
        };
        debug_assert!(check_option_preserving(a, b, &map).holds());
        Some(map)
    } else {
        None
    }
}

fn is_extensional(graph: &Rulegraph) -> bool {
    let mut seen: HashMap<&[PositionId], ()> = HashMap::with_capacity(graph.position_count());
    graph
        .positions()
        .all(|p| seen.insert(graph.options(p), ()).is_none())
}

/// On simple rulegraphs canonical forms are a complete invariant, and each
/// form occurs once per graph, so the matching is forced.
fn simple_isomorphism(a: &Rulegraph, b: &Rulegraph) -> Option<PositionMap> {
    let mut arena = HfArena::new();
    let canon_a = arena.canonicalize(a);
    let canon_b = arena.canonicalize(b);
    let mut by_form: HashMap<crate::hfset::HfSetId, PositionId> =
        HashMap::with_capacity(canon_b.len());
    for (i, &c) in canon_b.iter().enumerate() {
        by_form.insert(c, PositionId(i));
    }
    let mut table = Vec::with_capacity(canon_a.len());
    for &c in &canon_a {
        table.push(*by_form.get(&c)?);
    }
    let map = PositionMap {
        table,
        codomain_len: b.position_count(),
    };
    if map.is_injective() {
        debug_assert!(check_option_preserving(a, b, &map).holds());
        Some(map)
    } else {
        None
    }
}

fn signatures(graph: &Rulegraph) -> Vec<(u64, usize, usize)> {
    let fbd = formal_birthdays(graph);
    let in_deg = graph.in_degrees();
    graph
        .positions()
        .map(|p| (fbd[p.index()], graph.options(p).len(), in_deg[p.index()]))
        .collect()
}

fn adjacency(graph: &Rulegraph) -> Vec<Vec<bool>> {
    let n = graph.position_count();
    let mut adj = vec![vec![false; n]; n];
    for (p, q) in graph.arrows() {
        adj[p.index()][q.index()] = true;
    }
    adj
}

#[allow(clippy::too_many_arguments)]
fn assign_isomorphism(
    order: &[PositionId],
    depth: usize,
    sig_a: &[(u64, usize, usize)],
    candidates: &HashMap<(u64, usize, usize), Vec<PositionId>>,
    adj_a: &[Vec<bool>],
    adj_b: &[Vec<bool>],
    assignment: &mut Vec<Option<PositionId>>,
    used: &mut Vec<bool>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let p = order[depth];
    for &q in &candidates[&sig_a[p.index()]] {
        if used[q.index()] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&earlier| {
            let image = assignment[earlier.index()].unwrap();
            adj_a[p.index()][earlier.index()] == adj_b[q.index()][image.index()]
                && adj_a[earlier.index()][p.index()] == adj_b[image.index()][q.index()]
        });
        if !consistent {
            continue;
        }
        assignment[p.index()] = Some(q);
        used[q.index()] = true;
        if assign_isomorphism(
            order, depth + 1, sig_a, candidates, adj_a, adj_b, assignment, used,
        ) {
            return true;
        }
        assignment[p.index()] = None;
        used[q.index()] = false;
    }
    false
}

/// Exhaustive search for option preserving maps. Positions are assigned in
/// increasing birthday order, so when `p` is assigned all of `α(Opt(p))` is
/// known and the image of `p` must be a position whose option set equals it
/// exactly; candidates come from a codomain option-set index.
struct MapSearch<'a, 'v> {
    domain: &'a Rulegraph,
    order: Vec<PositionId>,
    by_options: HashMap<Vec<PositionId>, Vec<PositionId>>,
    forced: Option<(PositionId, PositionId)>,
    codomain_len: usize,
    /// Receives each complete map; returning false stops the search.
    emit: &'v mut dyn FnMut(PositionMap) -> bool,
}

impl MapSearch<'_, '_> {
    /// Returns true when the search should stop.
    fn run(&mut self, table: &mut Vec<Option<PositionId>>, depth: usize) -> bool {
        if depth == self.order.len() {
            let map = PositionMap {
                table: table.iter().map(|q| q.unwrap()).collect(),
                codomain_len: self.codomain_len,
            };
            return !(self.emit)(map);
        }
        let p = self.order[depth];
        let mut mapped: Vec<PositionId> = self
            .domain
            .options(p)
            .iter()
            .map(|q| table[q.index()].expect("options assigned first"))
            .collect();
        mapped.sort_unstable();
        mapped.dedup();
        let Some(candidates) = self.by_options.get(&mapped).cloned() else {
            return false;
        };
        for q in candidates {
            if let Some((src, dst)) = self.forced {
                if p == src && q != dst {
                    continue;
                }
            }
            table[p.index()] = Some(q);
            if self.run(table, depth + 1) {
                return true;
            }
            table[p.index()] = None;
        }
        false
    }
}

/// Streams every option preserving map from `domain` to `codomain` in a
/// deterministic order; the visitor returns whether to keep searching.
/// `forced` pins a single assignment, typically start to start.
pub fn visit_option_preserving_maps(
    domain: &Rulegraph,
    codomain: &Rulegraph,
    forced: Option<(PositionId, PositionId)>,
    budget: usize,
    mut emit: impl FnMut(PositionMap) -> bool,
) -> Result<(), MorphismError> {
    if domain.position_count() > budget {
        return Err(MorphismError::BudgetExceeded {
            size: domain.position_count(),
            budget,
        });
    }
    let fbd = formal_birthdays(domain);
    let mut order: Vec<PositionId> = domain.positions().collect();
    order.sort_by_key(|p| (fbd[p.index()], p.index()));
    let mut by_options: HashMap<Vec<PositionId>, Vec<PositionId>> = HashMap::new();
    for q in codomain.positions() {
        by_options
            .entry(codomain.options(q).to_vec())
            .or_default()
            .push(q);
    }
    let mut search = MapSearch {
        domain,
        order,
        by_options,
        forced,
        codomain_len: codomain.position_count(),
        emit: &mut emit,
    };
    let mut table = vec![None; domain.position_count()];
    search.run(&mut table, 0);
    Ok(())
}

/// Finds one option preserving map, or proves by exhaustion that none exists.
pub fn find_option_preserving_map(
    domain: &Rulegraph,
    codomain: &Rulegraph,
    forced: Option<(PositionId, PositionId)>,
    budget: usize,
) -> Result<Option<PositionMap>, MorphismError> {
    let mut found = None;
    visit_option_preserving_maps(domain, codomain, forced, budget, |map| {
        found = Some(map);
        false
    })?;
    Ok(found)
}

/// All option preserving maps between two small graphs, in a fixed order.
pub fn all_option_preserving_maps(
    domain: &Rulegraph,
    codomain: &Rulegraph,
    budget: usize,
) -> Result<Vec<PositionMap>, MorphismError> {
    let mut maps = Vec::new();
    visit_option_preserving_maps(domain, codomain, None, budget, |map| {
        maps.push(map);
        true
    })?;
    Ok(maps)
}

/// Source and option preserving map search between gamegraphs.
pub fn find_gamegraph_map(
    domain: &Gamegraph,
    codomain: &Gamegraph,
    require_source: bool,
    budget: usize,
) -> Result<Option<PositionMap>, MorphismError> {
    let forced = require_source.then_some((domain.start(), codomain.start()));
    find_option_preserving_map(domain.graph(), codomain.graph(), forced, budget)
}
