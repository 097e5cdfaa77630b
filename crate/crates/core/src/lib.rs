//! Digraph model of impartial combinatorial games.
//!
//! A *rulegraph* is a finite acyclic digraph whose vertices are positions and
//! whose out-neighbors are the options available to the player to move; a
//! *gamegraph* additionally has a unique starting position. This crate builds
//! and validates such graphs, computes valuations (nim values, outcomes,
//! formal birthdays), checks and searches option preserving maps, constructs
//! quotients by congruence relations down to the unique minimum quotient, and
//! enumerates simple rulegraphs and gamegraphs both by formal birthday and by
//! number of positions.

pub mod builders;
pub mod congruence;
pub mod doc;
pub mod enumeration;
pub mod graph;
pub mod hfset;
pub mod morphism;
pub mod valuation;

pub use graph::{Gamegraph, GraphError, PositionId, Rulegraph};
pub use valuation::Outcome;

/// Outcome of a checked property: it holds, or it fails with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }

    pub fn into_witness(self) -> Option<W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}
