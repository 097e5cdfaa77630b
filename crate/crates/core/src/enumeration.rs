//! Counting and exhaustive generation of simple rulegraphs and gamegraphs,
//! two ways: by formal birthday (an index recursion over arbitrary-precision
//! counts, plus layer-by-layer generation) and by number of positions
//! (depth-first generation of membership-closed collections of hereditarily
//! finite sets, which are exactly the extensional acyclic digraphs).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::hfset::{HfArena, HfSetId};

/// Default cap for counting by positions.
pub const DEFAULT_COUNT_BUDGET: usize = 7;
/// Default cap for streaming graphs by positions.
pub const DEFAULT_STREAM_BUDGET: usize = 5;
/// Default cap for generation by formal birthday; depth 3 already yields
/// 4125 graphs and depth 4 is astronomically out of reach.
pub const DEFAULT_FBD_BUDGET: u32 = 3;
/// Default cap for the index table depth. Depth 4 is computable but large.
pub const DEFAULT_TABLE_DEPTH: u32 = 4;
/// Default cap, in bits, for tower-of-two values.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

fn budget_error(message: impl Into<String>) -> EnumerationError {
    EnumerationError::BudgetExceeded(message.into())
}

/// `ⁿ2`: the tower of twos of height `n`, the number of simple gamegraphs up
/// to isomorphism with formal birthday at most `n`.
pub fn tower2(n: u32, bit_budget: u64) -> Result<BigUint, EnumerationError> {
    let mut value = BigUint::one();
    for step in 0..n {
        let bits = value.to_u64().filter(|&b| b <= bit_budget).ok_or_else(|| {
            budget_error(format!(
                "tower2({n}) needs 2^(tower2({step})) with more than {bit_budget} bits"
            ))
        })?;
        value = BigUint::one() << bits;
    }
    Ok(value)
}

/// Per-depth table of `x_{d,t,u}`: the number of simple rulegraphs up to
/// isomorphism with formal birthday `d`, `t` top positions and `u` rest
/// positions. Entries with count zero are absent, so each level's key set is
/// the index set `I_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    levels: Vec<BTreeMap<(u64, u64), BigUint>>,
}

impl CountTable {
    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, d: u32) -> &BTreeMap<(u64, u64), BigUint> {
        &self.levels[d as usize]
    }

    pub fn indices(&self, d: u32) -> Vec<(u64, u64)> {
        self.level(d).keys().copied().collect()
    }

    pub fn count(&self, d: u32, t: u64, u: u64) -> BigUint {
        self.level(d).get(&(t, u)).cloned().unwrap_or_else(BigUint::zero)
    }

    /// `x_d`: the level total.
    pub fn total(&self, d: u32) -> BigUint {
        self.level(d).values().sum()
    }
}

/// Number of option-set choices when extending an index-`(t,u)` rulegraph:
/// subsets of the positions that contain at least one top position.
fn available_option_sets(t: u64, u: u64) -> u64 {
    (1u64 << (t + u)) - (1u64 << u)
}

/// Builds the `x_{d,t,u}` table up to `depth` by the index recursion:
/// `x_{d+1,T,t+u} += C(2^{t+u} - 2^u, T) · x_{d,t,u}` for `1 ≤ T ≤ 2^{t+u} - 2^u`.
///
/// Depth 4 is the practical limit: its largest level holds tens of thousands
/// of multi-kilobyte entries.
pub fn index_table(depth: u32, max_depth: u32) -> Result<CountTable, EnumerationError> {
    if depth > max_depth {
        return Err(budget_error(format!(
            "index table depth {depth} exceeds limit {max_depth}"
        )));
    }
    let mut levels = vec![BTreeMap::from([((1u64, 0u64), BigUint::one())])];
    for d in 0..depth {
        let mut next: BTreeMap<(u64, u64), BigUint> = BTreeMap::new();
        for (&(t, u), count) in &levels[d as usize] {
            if t + u >= 63 {
                return Err(budget_error(format!(
                    "index ({t},{u}) at depth {d} overflows the option-set count"
                )));
            }
            let avail = available_option_sets(t, u);
            // binomials over the row computed incrementally
            let mut binom = BigUint::one();
            for new_tops in 1..=avail {
                binom = binom * (avail - new_tops + 1) / new_tops;
                let entry = next.entry((new_tops, t + u)).or_insert_with(BigUint::zero);
                *entry += &binom * count;
            }
        }
        levels.push(next);
    }
    Ok(CountTable { levels })
}

/// `x_d` by the alternate formula
/// `x_d = Σ (2^(2^{t+u} - 2^u) - 1) · x_{d-1,t,u}` over `I_{d-1}`,
/// which only needs the previous level of the table.
pub fn x_total(d: u32, max_depth: u32) -> Result<BigUint, EnumerationError> {
    if d > max_depth {
        return Err(budget_error(format!(
            "x_{d} exceeds depth limit {max_depth}"
        )));
    }
    if d == 0 {
        return Ok(BigUint::one());
    }
    let table = index_table(d - 1, max_depth)?;
    let mut total = BigUint::zero();
    for (&(t, u), count) in table.level(d - 1) {
        let exponent = available_option_sets(t, u);
        let families = (BigUint::one() << exponent) - BigUint::one();
        total += families * count;
    }
    Ok(total)
}

/// `2^(C(d+1,2) - d)`: the number of simple rulegraphs with `d+1` positions
/// and formal birthday `d`, all of which are gamegraphs.
pub fn count_min_positions(d: u64) -> BigUint {
    let exponent = if d < 2 { 0 } else { d * (d - 1) / 2 };
    BigUint::one() << exponent
}

/// Whether a simple rulegraph with `m` positions and formal birthday `d`
/// exists: exactly when `d + 1 ≤ m ≤ ᵈ2`.
pub fn feasibility(m: u64, d: u32) -> bool {
    if m < d as u64 + 1 {
        return false;
    }
    match d {
        0 => m <= 1,
        1 => m <= 2,
        2 => m <= 4,
        3 => m <= 16,
        4 => m <= 65536,
        // ⁵2 and beyond dwarf any u64
        _ => true,
    }
}

/// Depth-first generation of membership-closed collections of `n` sets,
/// added in strictly increasing set order; since the order extends rank,
/// children are always present before their parents. Each collection — one
/// extensional acyclic digraph up to isomorphism — appears exactly once.
fn collections_of_size(
    arena: &mut HfArena,
    collection: &mut Vec<HfSetId>,
    n: usize,
    gamegraphs_only: bool,
    // counting mode may roll the intern table back on backtrack; streaming
    // keeps ids stable for the whole run so visitors can retain them
    rollback: bool,
    visit: &mut dyn FnMut(&HfArena, &[HfSetId]),
) -> u64 {
    if collection.len() == n {
        if gamegraphs_only && count_sources(arena, collection) != 1 {
            return 0;
        }
        visit(arena, collection);
        return 1;
    }
    let k = collection.len();
    let last = *collection.last().expect("collection is seeded with ∅");
    let mark = arena.len();
    let mut candidates: Vec<HfSetId> = Vec::new();
    let mut subset = Vec::with_capacity(k);
    for mask in 1u64..(1 << k) {
        subset.clear();
        for (i, &s) in collection.iter().enumerate() {
            if mask & (1 << i) != 0 {
                subset.push(s);
            }
        }
        let candidate = arena.intern(&subset);
        if arena.cmp(candidate, last) == Ordering::Greater {
            candidates.push(candidate);
        }
    }
    candidates.sort_unstable_by(|&a, &b| arena.cmp(a, b));
    let mut count = 0;
    for candidate in candidates {
        collection.push(candidate);
        count += collections_of_size(arena, collection, n, gamegraphs_only, rollback, visit);
        collection.pop();
    }
    if rollback {
        arena.truncate(mark);
    }
    count
}

/// Sources of the corresponding digraph: sets that are elements of no other
/// set in the collection.
fn count_sources(arena: &HfArena, collection: &[HfSetId]) -> usize {
    collection
        .iter()
        .filter(|&&s| {
            !collection
                .iter()
                .any(|&t| t != s && arena.contains(t, s))
        })
        .count()
}

fn enumerate_by_positions(
    n: usize,
    gamegraphs_only: bool,
    budget: usize,
    rollback: bool,
    visit: &mut dyn FnMut(&HfArena, &[HfSetId]),
) -> Result<u64, EnumerationError> {
    if n > budget {
        return Err(budget_error(format!(
            "{n} positions exceeds limit {budget}"
        )));
    }
    if n == 0 {
        return Ok(if gamegraphs_only { 0 } else { 1 });
    }
    let mut arena = HfArena::new();
    let mut collection = vec![arena.empty()];
    Ok(collections_of_size(
        &mut arena,
        &mut collection,
        n,
        gamegraphs_only,
        rollback,
        visit,
    ))
}

/// Counts simple rulegraphs (or gamegraphs) with exactly `n` positions up to
/// isomorphism, without materializing graphs. The intern table is rolled back
/// on backtrack, so memory stays flat even for the long n = 8, 9 runs.
pub fn count_simple_rulegraphs(
    n: usize,
    gamegraphs_only: bool,
    budget: usize,
) -> Result<u64, EnumerationError> {
    enumerate_by_positions(n, gamegraphs_only, budget, true, &mut |_, _| {})
}

/// Streams each collection through `visit`; convert with
/// [`HfArena::collection_to_rulegraph`] to obtain the graph. Set ids stay
/// valid across the whole stream.
pub fn stream_simple_rulegraphs(
    n: usize,
    gamegraphs_only: bool,
    budget: usize,
    mut visit: impl FnMut(&HfArena, &[HfSetId]),
) -> Result<u64, EnumerationError> {
    enumerate_by_positions(n, gamegraphs_only, budget, false, &mut visit)
}

/// Layer-by-layer generation of simple rulegraphs with formal birthday
/// exactly `target`: each step adds a nonempty family of new top positions
/// with distinct option sets, each containing at least one previous top.
fn layers_by_fbd(
    arena: &mut HfArena,
    collection: &mut Vec<HfSetId>,
    tops: &[HfSetId],
    current: u32,
    target: u32,
    visit: &mut dyn FnMut(&HfArena, &[HfSetId]),
) -> Result<u64, EnumerationError> {
    if current == target {
        let mut sorted = collection.clone();
        sorted.sort_unstable_by(|&a, &b| arena.cmp(a, b));
        visit(arena, &sorted);
        return Ok(1);
    }
    let k = collection.len();
    if k >= 63 {
        return Err(budget_error(format!(
            "layer of {k} positions has too many option sets to enumerate"
        )));
    }
    let is_top = |s: &HfSetId| tops.contains(s);
    let mut option_sets: Vec<HfSetId> = Vec::new();
    let mut subset = Vec::with_capacity(k);
    for mask in 1u64..(1 << k) {
        subset.clear();
        let mut touches_top = false;
        for (i, &s) in collection.iter().enumerate() {
            if mask & (1 << i) != 0 {
                subset.push(s);
                touches_top |= is_top(&s);
            }
        }
        if touches_top {
            option_sets.push(arena.intern(&subset));
        }
    }
    option_sets.sort_unstable_by(|&a, &b| arena.cmp(a, b));
    let m = option_sets.len();
    if m >= 63 {
        return Err(budget_error(format!(
            "{m} option sets yield too many families to enumerate"
        )));
    }
    let mut count = 0;
    for family in 1u64..(1 << m) {
        let new_tops: Vec<HfSetId> = option_sets
            .iter()
            .enumerate()
            .filter(|(i, _)| family & (1 << i) != 0)
            .map(|(_, &s)| s)
            .collect();
        let base_len = collection.len();
        collection.extend_from_slice(&new_tops);
        count += layers_by_fbd(arena, collection, &new_tops, current + 1, target, visit)?;
        collection.truncate(base_len);
    }
    Ok(count)
}

fn enumerate_by_fbd(
    d: u32,
    budget: u32,
    visit: &mut dyn FnMut(&HfArena, &[HfSetId]),
) -> Result<u64, EnumerationError> {
    if d > budget {
        return Err(budget_error(format!(
            "formal birthday {d} exceeds limit {budget}"
        )));
    }
    let mut arena = HfArena::new();
    let empty = arena.empty();
    let mut collection = vec![empty];
    layers_by_fbd(&mut arena, &mut collection, &[empty], 0, d, visit)
}

/// Counts simple rulegraphs with formal birthday exactly `d` by exhaustive
/// generation; must agree with [`x_total`].
pub fn count_by_fbd(d: u32, budget: u32) -> Result<u64, EnumerationError> {
    enumerate_by_fbd(d, budget, &mut |_, _| {})
}

/// Streams each generated collection, sorted in set order.
pub fn stream_by_fbd(
    d: u32,
    budget: u32,
    mut visit: impl FnMut(&HfArena, &[HfSetId]),
) -> Result<u64, EnumerationError> {
    enumerate_by_fbd(d, budget, &mut visit)
}
