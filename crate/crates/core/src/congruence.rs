//! Congruence relations and quotients of rulegraphs.
//!
//! An equivalence relation `∼` on positions is a congruence when `p ∼ q`
//! forces `[Opt(p)] = [Opt(q)]`. Quotients by congruences are again
//! rulegraphs, the quotient map is option preserving, and every rulegraph has
//! a unique maximum congruence `⋈` whose quotient is simple.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{Gamegraph, PositionId, Rulegraph};
use crate::hfset::HfArena;
use crate::morphism::{are_isomorphic, PositionMap};
use crate::Verdict;

/// Default cap on positions for exhaustive congruence lattice enumeration.
pub const DEFAULT_LATTICE_BUDGET: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CongruenceError {
    #[error("blocks are not disjoint: position {0} appears twice")]
    OverlappingBlocks(usize),
    #[error("block member {0} is out of range")]
    MemberOutOfRange(usize),
    #[error("empty block")]
    EmptyBlock,
    #[error("partition describes {got} positions but the graph has {expected}")]
    SizeMismatch { got: usize, expected: usize },
    #[error("partition is not a congruence: positions {} and {} have different option classes",
        .0.left.index(), .0.right.index())]
    NotACongruence(CongruenceClash),
    #[error("first partition does not refine the second: block of {0} straddles blocks")]
    NotRefinement(usize),
    #[error("lattice budget exceeded: graph has {size} positions, budget is {budget}")]
    BudgetExceeded { size: usize, budget: usize },
}

/// A partition of the positions of one graph into disjoint nonempty blocks.
/// Blocks are ordered by smallest member and members are sorted, so equal
/// partitions compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<PositionId>>,
}

impl Partition {
    pub fn singletons(n: usize) -> Self {
        Partition {
            block_of: (0..n).collect(),
            blocks: (0..n).map(|i| vec![PositionId(i)]).collect(),
        }
    }

    /// Builds a partition from explicit blocks; positions not mentioned are
    /// implicit singletons.
    pub fn from_blocks(
        n: usize,
        blocks: Vec<Vec<PositionId>>,
    ) -> Result<Self, CongruenceError> {
        let mut assignment: Vec<Option<usize>> = vec![None; n];
        let mut next = 0;
        for block in &blocks {
            if block.is_empty() {
                return Err(CongruenceError::EmptyBlock);
            }
            for p in block {
                if p.index() >= n {
                    return Err(CongruenceError::MemberOutOfRange(p.index()));
                }
                if assignment[p.index()].replace(next).is_some() {
                    return Err(CongruenceError::OverlappingBlocks(p.index()));
                }
            }
            next += 1;
        }
        for slot in assignment.iter_mut() {
            if slot.is_none() {
                *slot = Some(next);
                next += 1;
            }
        }
        Ok(Self::from_assignment(
            assignment.into_iter().map(Option::unwrap).collect(),
        ))
    }

    /// Normalizes an arbitrary block assignment: blocks are renumbered in
    /// order of first appearance by smallest member.
    pub fn from_assignment(raw: Vec<usize>) -> Self {
        let mut renumber: HashMap<usize, usize> = HashMap::new();
        let mut blocks: Vec<Vec<PositionId>> = Vec::new();
        let mut block_of = Vec::with_capacity(raw.len());
        for (i, &r) in raw.iter().enumerate() {
            let b = *renumber.entry(r).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(PositionId(i));
            block_of.push(b);
        }
        Partition { block_of, blocks }
    }

    /// Groups positions by an arbitrary key, e.g. by image under a map.
    pub fn from_key<K: std::hash::Hash + Eq>(n: usize, mut key: impl FnMut(PositionId) -> K) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let mut raw = Vec::with_capacity(n);
        for i in 0..n {
            let next = ids.len();
            raw.push(*ids.entry(key(PositionId(i))).or_insert(next));
        }
        Self::from_assignment(raw)
    }

    pub fn position_count(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, p: PositionId) -> usize {
        self.block_of[p.index()]
    }

    pub fn block(&self, b: usize) -> &[PositionId] {
        &self.blocks[b]
    }

    pub fn blocks(&self) -> &[Vec<PositionId>] {
        &self.blocks
    }

    pub fn nontrivial_blocks(&self) -> impl Iterator<Item = &[PositionId]> {
        self.blocks.iter().filter(|b| b.len() > 1).map(Vec::as_slice)
    }

    pub fn is_discrete(&self) -> bool {
        self.block_count() == self.position_count()
    }

    pub fn related(&self, p: PositionId, q: PositionId) -> bool {
        self.block_of(p) == self.block_of(q)
    }

    /// True when every block of `self` lies inside one block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        debug_assert_eq!(self.position_count(), coarser.position_count());
        self.blocks.iter().all(|block| {
            let target = coarser.block_of(block[0]);
            block.iter().all(|&p| coarser.block_of(p) == target)
        })
    }

    /// Common refinement: the meet in the lattice of all partitions. For two
    /// congruences this need not be a congruence again; the congruence-lattice
    /// meet is [`coarsest_congruence_refining`] applied to it.
    pub fn meet(&self, other: &Partition) -> Partition {
        debug_assert_eq!(self.position_count(), other.position_count());
        Self::from_key(self.position_count(), |p| {
            (self.block_of(p), other.block_of(p))
        })
    }

    /// Equivalence closure of the union: the join in the partition lattice,
    /// computed by union-find over the two block structures.
    pub fn join(&self, other: &Partition) -> Partition {
        let n = self.position_count();
        debug_assert_eq!(n, other.position_count());
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for blocks in [&self.blocks, &other.blocks] {
            for block in blocks.iter() {
                let root = find(&mut parent, block[0].index());
                for p in &block[1..] {
                    let other_root = find(&mut parent, p.index());
                    parent[other_root] = root;
                }
            }
        }
        let raw: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Self::from_assignment(raw)
    }
}

/// Witness that a partition is not a congruence: two related positions whose
/// option sets fall into different block sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceClash {
    pub left: PositionId,
    pub right: PositionId,
    pub left_classes: BTreeSet<usize>,
    pub right_classes: BTreeSet<usize>,
}

/// Checks `p ∼ q ⟹ [Opt(p)] = [Opt(q)]` block by block.
pub fn is_congruence(graph: &Rulegraph, partition: &Partition) -> Verdict<CongruenceClash> {
    debug_assert_eq!(partition.position_count(), graph.position_count());
    let classes = |p: PositionId| -> BTreeSet<usize> {
        graph
            .options(p)
            .iter()
            .map(|&q| partition.block_of(q))
            .collect()
    };
    for block in partition.blocks() {
        let first = block[0];
        let first_classes = classes(first);
        for &p in &block[1..] {
            let p_classes = classes(p);
            if p_classes != first_classes {
                return Verdict::Fails(CongruenceClash {
                    left: first,
                    right: p,
                    left_classes: first_classes,
                    right_classes: p_classes,
                });
            }
        }
    }
    Verdict::Holds
}

/// A quotient rulegraph together with the option preserving quotient map.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub graph: Rulegraph,
    pub map: PositionMap,
    pub partition: Partition,
}

/// Builds the quotient without re-validating; callers guarantee the
/// congruence property. Class labels wrap the smallest member's label.
fn build_quotient(graph: &Rulegraph, partition: Partition) -> Quotient {
    let labels: Vec<String> = partition
        .blocks()
        .iter()
        .map(|block| format!("[{}]", graph.label(block[0])))
        .collect();
    let mut options: Vec<Vec<PositionId>> = vec![Vec::new(); partition.block_count()];
    for (b, block) in partition.blocks().iter().enumerate() {
        // any member gives the same option classes
        options[b] = graph
            .options(block[0])
            .iter()
            .map(|&q| PositionId(partition.block_of(q)))
            .collect();
    }
    let quotient = Rulegraph::from_options(labels, options)
        .expect("quotient of a rulegraph by a congruence is a rulegraph");
    let table: Vec<PositionId> = (0..graph.position_count())
        .map(|i| PositionId(partition.block_of(PositionId(i))))
        .collect();
    let map = PositionMap::from_table(table, graph.position_count(), quotient.position_count())
        .expect("quotient map is total");
    Quotient {
        graph: quotient,
        map,
        partition,
    }
}

/// Quotient of a rulegraph by a verified congruence relation.
pub fn quotient(graph: &Rulegraph, partition: &Partition) -> Result<Quotient, CongruenceError> {
    if partition.position_count() != graph.position_count() {
        return Err(CongruenceError::SizeMismatch {
            got: partition.position_count(),
            expected: graph.position_count(),
        });
    }
    if let Verdict::Fails(clash) = is_congruence(graph, partition) {
        return Err(CongruenceError::NotACongruence(clash));
    }
    Ok(build_quotient(graph, partition.clone()))
}

/// Quotient of a gamegraph; the start's class is a singleton and becomes the
/// new start.
pub fn quotient_gamegraph(
    game: &Gamegraph,
    partition: &Partition,
) -> Result<(Gamegraph, Quotient), CongruenceError> {
    let q = quotient(game.graph(), partition)?;
    let quotient_game = Gamegraph::new(q.graph.clone())
        .expect("quotient of a gamegraph is a gamegraph");
    debug_assert_eq!(quotient_game.start(), q.map.apply(game.start()));
    Ok((quotient_game, q))
}

/// The maximum congruence `⋈` and its simple quotient, computed in one pass
/// by canonical forms: positions are identified exactly when they share one.
pub fn min_quotient(graph: &Rulegraph) -> Quotient {
    let mut arena = HfArena::new();
    let canon = arena.canonicalize(graph);
    let partition =
        Partition::from_key(graph.position_count(), |p| canon[p.index()]);
    build_quotient(graph, partition)
}

pub fn min_quotient_gamegraph(game: &Gamegraph) -> (Gamegraph, Quotient) {
    let q = min_quotient(game.graph());
    let quotient_game = Gamegraph::new(q.graph.clone())
        .expect("minimum quotient of a gamegraph is a gamegraph");
    (quotient_game, q)
}

/// Witness that a rulegraph is not simple: two positions with equal options.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptClash {
    pub first: PositionId,
    pub second: PositionId,
}

/// A rulegraph is simple exactly when `Opt` is injective.
pub fn is_simple(graph: &Rulegraph) -> Verdict<OptClash> {
    let mut seen: HashMap<&[PositionId], PositionId> =
        HashMap::with_capacity(graph.position_count());
    for p in graph.positions() {
        if let Some(&first) = seen.get(graph.options(p)) {
            return Verdict::Fails(OptClash { first, second: p });
        }
        seen.insert(graph.options(p), p);
    }
    Verdict::Holds
}

/// Result of an emulational equivalence test: the two minimum quotients and
/// the isomorphism between them when it exists.
#[derive(Debug, Clone)]
pub struct EmulationVerdict {
    pub left_min: Rulegraph,
    pub right_min: Rulegraph,
    pub iso: Option<PositionMap>,
}

impl EmulationVerdict {
    pub fn equivalent(&self) -> bool {
        self.iso.is_some()
    }
}

/// Two rulegraphs are emulationally equivalent exactly when their minimum
/// quotients are isomorphic.
pub fn emulationally_equivalent(left: &Rulegraph, right: &Rulegraph) -> EmulationVerdict {
    let left_min = min_quotient(left).graph;
    let right_min = min_quotient(right).graph;
    let iso = are_isomorphic(&left_min, &right_min);
    EmulationVerdict {
        left_min,
        right_min,
        iso,
    }
}

/// All congruence relations of a rulegraph, ordered by refinement.
#[derive(Debug, Clone)]
pub struct CongruenceLattice {
    elements: Vec<Partition>,
    /// `leq[i][j]` iff element `i` refines element `j`.
    leq: Vec<Vec<bool>>,
    bottom: usize,
    top: usize,
}

impl CongruenceLattice {
    pub fn elements(&self) -> &[Partition] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of the diagonal congruence `Δ`.
    pub fn bottom_index(&self) -> usize {
        self.bottom
    }

    /// Index of the maximum congruence `⋈`.
    pub fn top_index(&self) -> usize {
        self.top
    }

    pub fn refines(&self, finer: usize, coarser: usize) -> bool {
        self.leq[finer][coarser]
    }

    pub fn index_of(&self, partition: &Partition) -> Option<usize> {
        self.elements.iter().position(|p| p == partition)
    }

    /// Lattice meet: the greatest congruence refining both. This can be
    /// strictly finer than the common refinement of the two partitions,
    /// which need not be a congruence; congruences are closed under join, so
    /// the set of common lower bounds has a unique greatest element.
    pub fn meet_index(&self, a: usize, b: usize) -> usize {
        let lower: Vec<usize> = (0..self.elements.len())
            .filter(|&i| self.leq[i][a] && self.leq[i][b])
            .collect();
        lower
            .iter()
            .copied()
            .find(|&i| lower.iter().all(|&j| self.leq[j][i]))
            .expect("common lower bounds are join-closed, so a greatest one exists")
    }

    /// Join by equivalence closure of the union; always in the lattice.
    pub fn join_index(&self, a: usize, b: usize) -> usize {
        let joined = self.elements[a].join(&self.elements[b]);
        self.index_of(&joined)
            .expect("congruences are closed under join")
    }
}

/// Exhaustively enumerates `Con(R)`. Every congruence refines `⋈`, so the
/// search only considers partitions assembled from set partitions of the
/// individual `⋈` blocks; vertical collapses are excluded for free.
pub fn con_lattice(
    graph: &Rulegraph,
    budget: usize,
) -> Result<CongruenceLattice, CongruenceError> {
    let n = graph.position_count();
    if n > budget {
        return Err(CongruenceError::BudgetExceeded { size: n, budget });
    }
    let bowtie = min_quotient(graph).partition;
    let per_block: Vec<Vec<Vec<usize>>> = bowtie
        .blocks()
        .iter()
        .map(|block| set_partitions(block.len()))
        .collect();

    let mut elements = Vec::new();
    let mut choice = vec![0usize; per_block.len()];
    loop {
        let mut raw = vec![0usize; n];
        let mut next_class = 0;
        for (b, block) in bowtie.blocks().iter().enumerate() {
            let assignment = &per_block[b][choice[b]];
            let classes = assignment.iter().max().map_or(0, |m| m + 1);
            for (i, &p) in block.iter().enumerate() {
                raw[p.index()] = next_class + assignment[i];
            }
            next_class += classes;
        }
        let candidate = Partition::from_assignment(raw);
        if is_congruence(graph, &candidate).holds() {
            elements.push(candidate);
        }
        // advance the mixed-radix counter over per-block choices
        let mut done = true;
        for (b, c) in choice.iter_mut().enumerate() {
            *c += 1;
            if *c < per_block[b].len() {
                done = false;
                break;
            }
            *c = 0;
        }
        if done {
            break;
        }
    }

    // finest first, then lexicographic on block assignments
    elements.sort_by(|a, b| {
        b.block_count().cmp(&a.block_count()).then_with(|| {
            let ka: Vec<usize> = (0..n).map(|i| a.block_of(PositionId(i))).collect();
            let kb: Vec<usize> = (0..n).map(|i| b.block_of(PositionId(i))).collect();
            ka.cmp(&kb)
        })
    });
    let leq: Vec<Vec<bool>> = elements
        .iter()
        .map(|a| elements.iter().map(|b| a.refines(b)).collect())
        .collect();
    let bottom = elements
        .iter()
        .position(Partition::is_discrete)
        .expect("the diagonal is always a congruence");
    let top = elements
        .iter()
        .position(|p| p == &bowtie)
        .expect("the maximum congruence is in its own lattice");
    Ok(CongruenceLattice {
        elements,
        leq,
        bottom,
        top,
    })
}

/// All set partitions of `{0, .., n-1}` as restricted-growth assignments.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    fn grow(current: &mut Vec<usize>, i: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if i == current.len() {
            out.push(current.clone());
            return;
        }
        for value in 0..=max_used + 1 {
            current[i] = value;
            grow(current, i + 1, max_used.max(value), out);
        }
    }
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    current[0] = 0;
    grow(&mut current, 1, 0, &mut out);
    out
}

/// Verified join of two congruences.
pub fn join_congruences(
    graph: &Rulegraph,
    a: &Partition,
    b: &Partition,
) -> Result<Partition, CongruenceError> {
    for part in [a, b] {
        if let Verdict::Fails(clash) = is_congruence(graph, part) {
            return Err(CongruenceError::NotACongruence(clash));
        }
    }
    Ok(a.join(b))
}

/// The coarsest congruence refining a given partition, by repeated block
/// splitting on option-class signatures. Fixpoints of the splitting step are
/// exactly the congruences, the step is monotone, and every congruence below
/// the input stays below each iterate, so the result is the greatest
/// congruence within the input partition.
pub fn coarsest_congruence_refining(graph: &Rulegraph, partition: &Partition) -> Partition {
    let mut current = partition.clone();
    loop {
        let next = Partition::from_key(graph.position_count(), |p| {
            let classes: BTreeSet<usize> = graph
                .options(p)
                .iter()
                .map(|&q| current.block_of(q))
                .collect();
            (current.block_of(p), classes)
        });
        if next.block_count() == current.block_count() {
            debug_assert!(is_congruence(graph, &current).holds());
            return current;
        }
        current = next;
    }
}

/// Verified meet of two congruences: the greatest congruence refining both.
/// The plain common refinement of the partitions is not enough — two
/// congruences can intersect, as relations, in a non-congruence.
pub fn meet_congruences(
    graph: &Rulegraph,
    a: &Partition,
    b: &Partition,
) -> Result<Partition, CongruenceError> {
    for part in [a, b] {
        if let Verdict::Fails(clash) = is_congruence(graph, part) {
            return Err(CongruenceError::NotACongruence(clash));
        }
    }
    Ok(coarsest_congruence_refining(graph, &a.meet(b)))
}

/// Pushes a congruence `C ⊇ D` forward to the quotient `R/D`, realizing the
/// order isomorphism `C ↦ C/D` between the interval above `D` and
/// `Con(R/D)`.
pub fn pushforward_congruence(
    graph: &Rulegraph,
    d: &Partition,
    c: &Partition,
) -> Result<Partition, CongruenceError> {
    if d.position_count() != graph.position_count()
        || c.position_count() != graph.position_count()
    {
        return Err(CongruenceError::SizeMismatch {
            got: d.position_count().max(c.position_count()),
            expected: graph.position_count(),
        });
    }
    if !d.refines(c) {
        let straddler = d
            .blocks()
            .iter()
            .find(|block| {
                let target = c.block_of(block[0]);
                block.iter().any(|&p| c.block_of(p) != target)
            })
            .expect("some block straddles");
        return Err(CongruenceError::NotRefinement(straddler[0].index()));
    }
    // each D-class lies in one C-class; group D-classes by it
    let mut raw = vec![0usize; d.block_count()];
    for (b, block) in d.blocks().iter().enumerate() {
        raw[b] = c.block_of(block[0]);
    }
    Ok(Partition::from_assignment(raw))
}
