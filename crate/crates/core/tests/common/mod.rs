//! Shared fixtures and randomized generators for the integration suites.
#![allow(dead_code)] // each test target uses its own subset

use proptest::prelude::*;

use gamegraphs::congruence::{is_congruence, Partition};
use gamegraphs::graph::{Gamegraph, PositionId, Rulegraph};

/// The six-position rulegraph of the congruence-lattice example:
/// arrows 1→3, 1→4, 2→3, 2→4, 3→5, 3→6, 4→6.
pub fn lattice_example() -> Rulegraph {
    Rulegraph::from_strs(
        &["1", "2", "3", "4", "5", "6"],
        &[
            ("1", "3"),
            ("1", "4"),
            ("2", "3"),
            ("2", "4"),
            ("3", "5"),
            ("3", "6"),
            ("4", "6"),
        ],
    )
    .unwrap()
}

/// Left gamegraph of the emulational-equivalence counterexample: seven
/// positions, no option preserving map to its partner in either direction.
pub fn emulation_example_left() -> Gamegraph {
    Gamegraph::new(
        Rulegraph::from_strs(
            &["a", "b1", "b2", "b3", "c", "d1", "d2"],
            &[
                ("a", "b1"),
                ("a", "b2"),
                ("a", "b3"),
                ("b1", "c"),
                ("b1", "d1"),
                ("b2", "c"),
                ("b3", "c"),
                ("b3", "d2"),
                ("c", "d1"),
            ],
        )
        .unwrap(),
    )
    .unwrap()
}

/// Right gamegraph of the counterexample: eight positions.
pub fn emulation_example_right() -> Gamegraph {
    Gamegraph::new(
        Rulegraph::from_strs(
            &["s1", "s21", "s22", "s23", "s31", "s32", "s41", "s42"],
            &[
                ("s1", "s21"),
                ("s1", "s22"),
                ("s1", "s23"),
                ("s21", "s31"),
                ("s22", "s32"),
                ("s22", "s41"),
                ("s23", "s32"),
                ("s23", "s42"),
                ("s31", "s41"),
                ("s32", "s42"),
            ],
        )
        .unwrap(),
    )
    .unwrap()
}

/// The common minimum quotient of both counterexample gamegraphs.
pub fn emulation_example_quotient() -> Gamegraph {
    Gamegraph::new(
        Rulegraph::from_strs(
            &["k1", "k21", "k22", "k3", "k4"],
            &[
                ("k1", "k21"),
                ("k1", "k22"),
                ("k21", "k3"),
                ("k22", "k3"),
                ("k22", "k4"),
                ("k3", "k4"),
            ],
        )
        .unwrap(),
    )
    .unwrap()
}

/// The eight-position rulegraph whose stepwise identifications end in a
/// three-position path.
pub fn identification_example() -> Rulegraph {
    Rulegraph::from_strs(
        &["t1", "t2", "t3", "m1", "m2", "b1", "b2", "b3"],
        &[
            ("t1", "m1"),
            ("t1", "m2"),
            ("t2", "m1"),
            ("t2", "m2"),
            ("t3", "m1"),
            ("t3", "m2"),
            ("m1", "b1"),
            ("m1", "b2"),
            ("m1", "b3"),
            ("m2", "b2"),
        ],
    )
    .unwrap()
}

/// Random rulegraph on up to `max_n` positions: arrows point from higher to
/// lower ids, so the result is always acyclic.
pub fn arb_rulegraph(max_n: usize) -> impl Strategy<Value = Rulegraph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.4), n * (n - 1) / 2).prop_map(
            move |bits| rulegraph_from_bits(n, &bits),
        )
    })
}

/// Random gamegraph: a random rulegraph with the top position wired to every
/// other source so the source is unique.
pub fn arb_gamegraph(max_n: usize) -> impl Strategy<Value = Gamegraph> {
    arb_rulegraph(max_n).prop_map(|graph| {
        let n = graph.position_count();
        let top = PositionId(n - 1);
        let mut options: Vec<Vec<PositionId>> = graph
            .positions()
            .map(|p| graph.options(p).to_vec())
            .collect();
        for s in graph.sources() {
            if s != top {
                options[top.index()].push(s);
            }
        }
        let rebuilt = Rulegraph::from_options(graph.labels().to_vec(), options)
            .expect("added arrows keep ids decreasing");
        Gamegraph::new(rebuilt).expect("top is the unique source")
    })
}

fn rulegraph_from_bits(n: usize, bits: &[bool]) -> Rulegraph {
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let mut options = vec![Vec::new(); n];
    let mut k = 0;
    for (from, opts) in options.iter_mut().enumerate() {
        for to in 0..from {
            if bits[k] {
                opts.push(PositionId(to));
            }
            k += 1;
        }
    }
    Rulegraph::from_options(labels, options).expect("high-to-low arrows are acyclic")
}

/// Derives a congruence from merge seeds: repeatedly unite two blocks whose
/// option-class sets agree, a step that always preserves the congruence
/// property. Seeds select among the mergeable pairs, so every prefix is a
/// congruence and the empty seed list gives the diagonal.
pub fn random_congruence(graph: &Rulegraph, seeds: &[u32]) -> Partition {
    let n = graph.position_count();
    let mut partition = Partition::singletons(n);
    for &seed in seeds {
        let mergeable = mergeable_pairs(graph, &partition);
        if mergeable.is_empty() {
            break;
        }
        let (a, b) = mergeable[seed as usize % mergeable.len()];
        let raw: Vec<usize> = (0..n)
            .map(|i| {
                let block = partition.block_of(PositionId(i));
                if block == b {
                    a
                } else {
                    block
                }
            })
            .collect();
        partition = Partition::from_assignment(raw);
        debug_assert!(is_congruence(graph, &partition).holds());
    }
    partition
}

fn mergeable_pairs(graph: &Rulegraph, partition: &Partition) -> Vec<(usize, usize)> {
    use std::collections::BTreeSet;
    let classes: Vec<BTreeSet<usize>> = partition
        .blocks()
        .iter()
        .map(|block| {
            graph
                .options(block[0])
                .iter()
                .map(|&q| partition.block_of(q))
                .collect()
        })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            if classes[a] == classes[b] {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Strategy bundling a random rulegraph with a random congruence on it.
pub fn arb_rulegraph_with_congruence(
    max_n: usize,
) -> impl Strategy<Value = (Rulegraph, Partition)> {
    (arb_rulegraph(max_n), prop::collection::vec(any::<u32>(), 0..6)).prop_map(
        |(graph, seeds)| {
            let partition = random_congruence(&graph, &seeds);
            (graph, partition)
        },
    )
}

/// Strategy bundling a random gamegraph with a random congruence on it.
pub fn arb_gamegraph_with_congruence(
    max_n: usize,
) -> impl Strategy<Value = (Gamegraph, Partition)> {
    (arb_gamegraph(max_n), prop::collection::vec(any::<u32>(), 0..6)).prop_map(
        |(game, seeds)| {
            let partition = random_congruence(game.graph(), &seeds);
            (game, partition)
        },
    )
}
