//! Interned hereditarily finite sets: the "identify each position with the set
//! of its options" engine behind minimum quotients, fast isomorphism of simple
//! rulegraphs, and exhaustive enumeration.
//!
//! An [`HfArena`] owns the intern table. Two structurally equal sets built in
//! the same arena always share one [`HfSetId`], so structural equality is id
//! equality. Ids from different arenas must never be compared.

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{GraphError, Rulegraph};

/// Identity of an interned hereditarily finite set within one arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HfSetId(u32);

impl HfSetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HfError {
    #[error("collection is not membership closed: {set} is missing its element {missing}")]
    NotMembershipClosed { set: String, missing: String },
    #[error("invalid set notation at byte {at}: {message}")]
    Parse { at: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Intern table for hereditarily finite sets.
pub struct HfArena {
    /// Children sorted ascending by [`HfArena::cmp`].
    children: Vec<Box<[HfSetId]>>,
    ranks: Vec<u32>,
    index: HashMap<Box<[HfSetId]>, HfSetId>,
}

impl Default for HfArena {
    fn default() -> Self {
        Self::new()
    }
}

impl HfArena {
    pub fn new() -> Self {
        let mut arena = HfArena {
            children: Vec::new(),
            ranks: Vec::new(),
            index: HashMap::new(),
        };
        arena.insert(Box::new([]));
        arena
    }

    /// The empty set; interned at id 0 in every arena.
    pub fn empty(&self) -> HfSetId {
        HfSetId(0)
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn insert(&mut self, key: Box<[HfSetId]>) -> HfSetId {
        let id = HfSetId(self.children.len() as u32);
        let rank = key
            .iter()
            .map(|c| self.ranks[c.index()] + 1)
            .max()
            .unwrap_or(0);
        self.children.push(key.clone());
        self.ranks.push(rank);
        self.index.insert(key, id);
        id
    }

    /// Interns the set with the given children, deduplicating and sorting.
    pub fn intern(&mut self, children: &[HfSetId]) -> HfSetId {
        let mut kids = children.to_vec();
        kids.sort_unstable_by(|&a, &b| self.cmp(a, b));
        kids.dedup();
        if let Some(&id) = self.index.get(kids.as_slice()) {
            return id;
        }
        self.insert(kids.into_boxed_slice())
    }

    /// Rolls the intern table back to a previous [`HfArena::len`]. Ids handed
    /// out after the mark become invalid and may be reassigned, so this is
    /// only for search loops that provably drop them first, e.g. enumeration
    /// backtracking.
    pub(crate) fn truncate(&mut self, mark: usize) {
        while self.children.len() > mark {
            let key = self.children.pop().expect("above the mark");
            self.ranks.pop();
            self.index.remove(&key);
        }
    }

    /// `rank(∅) = 0`; otherwise one more than the largest child rank. Equals
    /// the formal birthday of the corresponding position.
    pub fn rank(&self, set: HfSetId) -> u32 {
        self.ranks[set.index()]
    }

    pub fn children(&self, set: HfSetId) -> &[HfSetId] {
        &self.children[set.index()]
    }

    pub fn contains(&self, set: HfSetId, element: HfSetId) -> bool {
        self.children(set).binary_search_by(|&c| self.cmp(c, element)).is_ok()
    }

    /// Strict total order on sets: by rank first, then lexicographically on
    /// the sorted child sequences. Iterative: two distinct sets always differ
    /// at some first child, and descending there strictly lowers the rank.
    pub fn cmp(&self, a: HfSetId, b: HfSetId) -> Ordering {
        let (mut a, mut b) = (a, b);
        loop {
            if a == b {
                return Ordering::Equal;
            }
            match self.rank(a).cmp(&self.rank(b)) {
                Ordering::Equal => {}
                unequal => return unequal,
            }
            let (ca, cb) = (self.children(a), self.children(b));
            match ca.iter().zip(cb).find(|(x, y)| x != y) {
                Some((&x, &y)) => {
                    a = x;
                    b = y;
                }
                None => return ca.len().cmp(&cb.len()),
            }
        }
    }

    /// Nested-brace notation with children listed in set order.
    pub fn notation(&self, set: HfSetId) -> String {
        let mut out = String::new();
        // (set, next child to render); explicit stack keeps deep sets safe
        let mut stack: Vec<(HfSetId, usize)> = vec![(set, 0)];
        while let Some(frame) = stack.last_mut() {
            let (s, next) = *frame;
            let kids = self.children(s);
            if kids.is_empty() {
                out.push('∅');
                stack.pop();
                continue;
            }
            if next == 0 {
                out.push('{');
            }
            if next < kids.len() {
                if next > 0 {
                    out.push(',');
                }
                frame.1 += 1;
                stack.push((kids[next], 0));
            } else {
                out.push('}');
                stack.pop();
            }
        }
        out
    }

    /// Parses nested-brace notation; `∅` and `{}` both denote the empty set.
    pub fn parse(&mut self, text: &str) -> Result<HfSetId, HfError> {
        let err = |at: usize, message: &str| HfError::Parse {
            at,
            message: message.to_string(),
        };
        let mut stack: Vec<Vec<HfSetId>> = Vec::new();
        let mut done: Option<HfSetId> = None;
        for (at, ch) in text.char_indices() {
            if ch.is_whitespace() {
                continue;
            }
            if done.is_some() {
                return Err(err(at, "trailing input after a complete set"));
            }
            match ch {
                '{' => stack.push(Vec::new()),
                '∅' => {
                    let id = self.empty();
                    match stack.last_mut() {
                        Some(frame) => frame.push(id),
                        None => done = Some(id),
                    }
                }
                '}' => {
                    let frame = stack.pop().ok_or_else(|| err(at, "unmatched '}'"))?;
                    let id = self.intern(&frame);
                    match stack.last_mut() {
                        Some(parent) => parent.push(id),
                        None => done = Some(id),
                    }
                }
                ',' => {
                    if stack.is_empty() {
                        return Err(err(at, "',' outside braces"));
                    }
                }
                other => return Err(err(at, &format!("unexpected character {other:?}"))),
            }
        }
        if !stack.is_empty() {
            return Err(err(text.len(), "unclosed '{'"));
        }
        done.ok_or_else(|| err(text.len(), "empty input"))
    }

    /// Replaces every position bottom-up with the set of its options:
    /// `canon(p) = { canon(q) | q ∈ Opt(p) }`. Two positions get the same id
    /// exactly when the maximum congruence relates them.
    pub fn canonicalize(&mut self, graph: &Rulegraph) -> Vec<HfSetId> {
        let mut canon: Vec<Option<HfSetId>> = vec![None; graph.position_count()];
        for &p in graph.topo_order().iter().rev() {
            let kids: Vec<HfSetId> = graph
                .options(p)
                .iter()
                .map(|q| canon[q.index()].expect("options canonicalized first"))
                .collect();
            canon[p.index()] = Some(self.intern(&kids));
        }
        canon.into_iter().map(Option::unwrap).collect()
    }

    /// Builds the simple rulegraph of a membership-closed collection:
    /// positions are the sets in set order, with an arrow `(A, B)` exactly
    /// when `B ∈ A`. Labels are the sets' notations.
    pub fn collection_to_rulegraph(&self, sets: &[HfSetId]) -> Result<Rulegraph, HfError> {
        let mut sorted = sets.to_vec();
        sorted.sort_unstable_by(|&a, &b| self.cmp(a, b));
        sorted.dedup();
        let mut position: HashMap<HfSetId, usize> = HashMap::with_capacity(sorted.len());
        for (i, &s) in sorted.iter().enumerate() {
            position.insert(s, i);
        }
        let mut options = Vec::with_capacity(sorted.len());
        for &s in &sorted {
            let mut opts = Vec::with_capacity(self.children(s).len());
            for &child in self.children(s) {
                match position.get(&child) {
                    Some(&i) => opts.push(crate::graph::PositionId(i)),
                    None => {
                        return Err(HfError::NotMembershipClosed {
                            set: self.notation(s),
                            missing: self.notation(child),
                        })
                    }
                }
            }
            options.push(opts);
        }
        let labels = sorted.iter().map(|&s| self.notation(s)).collect();
        Ok(Rulegraph::from_options(labels, options)?)
    }

    /// Every set of rank at most `d`, sorted ascending. There are `ᵈ2` of
    /// them, so this is only practical for `d ≤ 4`.
    pub fn sets_up_to_rank(&mut self, d: u32) -> Vec<HfSetId> {
        assert!(d <= 4, "ᵈ2 sets do not fit in memory beyond d = 4");
        let mut all = vec![self.empty()];
        for _ in 0..d {
            let base = all.clone();
            let mut next = Vec::with_capacity(1usize << base.len());
            let mut subset = Vec::new();
            for mask in 0u64..(1 << base.len()) {
                subset.clear();
                for (i, &s) in base.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        subset.push(s);
                    }
                }
                next.push(self.intern(&subset));
            }
            next.sort_unstable_by(|&a, &b| self.cmp(a, b));
            next.dedup();
            all = next;
        }
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Rulegraph;

    fn star2() -> Rulegraph {
        Rulegraph::from_strs(&["0", "1", "2"], &[("1", "0"), ("2", "0"), ("2", "1")]).unwrap()
    }

    #[test]
    fn star2_canonicalizes_to_nimber_two() {
        let mut arena = HfArena::new();
        let canon = arena.canonicalize(&star2());
        let notations: Vec<String> = canon.iter().map(|&c| arena.notation(c)).collect();
        assert_eq!(notations, ["∅", "{∅}", "{∅,{∅}}"]);
    }

    #[test]
    fn merged_chain_canonicalizes_to_non_nimber() {
        // 3-position path: the start becomes {{∅}}, which has nim-number 0
        // but is not a nimber.
        let r = Rulegraph::from_strs(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let mut arena = HfArena::new();
        let canon = arena.canonicalize(&r);
        assert_eq!(arena.notation(canon[0]), "{{∅}}");
    }

    #[test]
    fn terminals_canonicalize_to_empty() {
        let mut arena = HfArena::new();
        let r = star2();
        let canon = arena.canonicalize(&r);
        for t in r.terminals() {
            assert_eq!(canon[t.index()], arena.empty());
        }
    }

    #[test]
    fn order_extends_rank() {
        let mut arena = HfArena::new();
        let empty = arena.empty();
        let one = arena.intern(&[empty]);
        let two = arena.intern(&[empty, one]);
        assert_eq!(arena.cmp(empty, one), Ordering::Less);
        assert_eq!(arena.cmp(one, two), Ordering::Less);
        assert_eq!(arena.cmp(two, two), Ordering::Equal);
        // rank ties resolve on the first differing child
        let singleton_one = arena.intern(&[one]);
        assert_eq!(arena.rank(singleton_one), arena.rank(two));
        assert_eq!(arena.cmp(two, singleton_one), Ordering::Less);
    }

    #[test]
    fn interning_collapses_duplicates_and_order() {
        let mut arena = HfArena::new();
        let empty = arena.empty();
        let one = arena.intern(&[empty]);
        let a = arena.intern(&[one, empty, empty]);
        let b = arena.intern(&[empty, one]);
        assert_eq!(a, b);
    }

    #[test]
    fn collection_round_trips_to_m2() {
        let mut arena = HfArena::new();
        let sets = arena.sets_up_to_rank(2);
        assert_eq!(sets.len(), 4);
        let graph = arena.collection_to_rulegraph(&sets).unwrap();
        assert_eq!(graph.position_count(), 4);
        // arrows (A,B) iff B ∈ A: |arrows| = Σ |A| over the four subsets
        assert_eq!(graph.arrow_count(), 4);
    }

    #[test]
    fn singleton_collection_is_one_vertex() {
        let arena = HfArena::new();
        let graph = arena.collection_to_rulegraph(&[arena.empty()]).unwrap();
        assert_eq!(graph.position_count(), 1);
        assert_eq!(graph.label(crate::graph::PositionId(0)), "∅");
    }

    #[test]
    fn missing_element_is_reported() {
        let mut arena = HfArena::new();
        let empty = arena.empty();
        let one = arena.intern(&[empty]);
        let err = arena.collection_to_rulegraph(&[one]).unwrap_err();
        assert_eq!(
            err,
            HfError::NotMembershipClosed {
                set: "{∅}".into(),
                missing: "∅".into(),
            }
        );
    }

    #[test]
    fn notation_parse_round_trip() {
        let mut arena = HfArena::new();
        for text in ["∅", "{∅}", "{∅,{∅}}", "{{∅}}", "{∅,{∅},{∅,{∅}}}"] {
            let id = arena.parse(text).unwrap();
            assert_eq!(arena.notation(id), text);
        }
        let braces = arena.parse("{}").unwrap();
        assert_eq!(braces, arena.empty());
        assert!(arena.parse("{").is_err());
        assert!(arena.parse("}").is_err());
        assert!(arena.parse("").is_err());
        assert!(arena.parse("{∅}x").is_err());
    }

    #[test]
    fn rank_matches_birthday_on_star2() {
        let mut arena = HfArena::new();
        let r = star2();
        let canon = arena.canonicalize(&r);
        let fbd = crate::valuation::formal_birthdays(&r);
        for p in r.positions() {
            assert_eq!(arena.rank(canon[p.index()]) as u64, fbd[p.index()]);
        }
    }

    #[test]
    fn universe_sizes_are_towers() {
        let mut arena = HfArena::new();
        assert_eq!(arena.sets_up_to_rank(0).len(), 1);
        assert_eq!(arena.sets_up_to_rank(1).len(), 2);
        assert_eq!(arena.sets_up_to_rank(2).len(), 4);
        assert_eq!(arena.sets_up_to_rank(3).len(), 16);
    }
}
