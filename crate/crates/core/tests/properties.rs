//! Module-level invariants checked on randomized inputs, beyond the
//! acceptance criteria: constructor fuzzing, valuation recurrences, canonical
//! form laws, map composition and inverse closure, and the interval
//! isomorphism of congruence lattices at desk scale.

mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;

use gamegraphs::builders::maze;
use gamegraphs::congruence::{con_lattice, min_quotient, pushforward_congruence, quotient};
use gamegraphs::graph::{Gamegraph, PositionId, Rulegraph};
use gamegraphs::hfset::HfArena;
use gamegraphs::morphism::{
    are_isomorphic, check_option_preserving, check_source_preserving,
    find_option_preserving_map,
};
use gamegraphs::valuation::{
    formal_birthdays, mex, min_distance_to_terminal, nim_values,
    outcome_with_terminal_labels, Outcome, TerminalLabeling, ValueTable, BUILTIN_VALUATIONS,
};

use common::*;

fn shuffled_copy(graph: &Rulegraph, seeds: &[u32]) -> Rulegraph {
    let n = graph.position_count();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = seeds[i % seeds.len().max(1)] as usize % (i + 1);
        perm.swap(i, j);
    }
    let mut labels = vec![String::new(); n];
    let mut options = vec![Vec::new(); n];
    for i in 0..n {
        labels[perm[i]] = graph.label(PositionId(i)).to_string();
        options[perm[i]] = graph
            .options(PositionId(i))
            .iter()
            .map(|q| PositionId(perm[q.index()]))
            .collect();
    }
    Rulegraph::from_options(labels, options).expect("permutation preserves validity")
}

/// Independent acyclicity oracle: Kahn's algorithm.
fn kahn_is_acyclic(n: usize, arrows: &[(usize, usize)]) -> bool {
    let mut in_deg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(f, t) in arrows {
        out[f].push(t);
        in_deg[t] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| in_deg[i] == 0).collect();
    let mut removed = 0;
    while let Some(v) = queue.pop_front() {
        removed += 1;
        for &w in &out[v] {
            in_deg[w] -= 1;
            if in_deg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    removed == n
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    /// The fuzz constructor never accepts an invalid graph.
    #[test]
    fn constructor_accepts_only_valid_graphs(
        labels in prop::collection::vec("[ab]{0,2}", 0..6),
        arrow_picks in prop::collection::vec((0usize..6, 0usize..6), 0..12),
    ) {
        let arrows: Vec<(String, String)> = arrow_picks
            .iter()
            .filter_map(|&(f, t)| {
                Some((labels.get(f)?.clone(), labels.get(t)?.clone()))
            })
            .collect();
        match Rulegraph::new(labels.clone(), &arrows) {
            Err(_) => {}
            Ok(graph) => {
                // distinct labels
                let unique: HashSet<&String> = graph.labels().iter().collect();
                prop_assert_eq!(unique.len(), graph.position_count());
                // options sorted, deduplicated, no self-loops
                let mut id_arrows = Vec::new();
                for p in graph.positions() {
                    let opts = graph.options(p);
                    for window in opts.windows(2) {
                        prop_assert!(window[0] < window[1]);
                    }
                    for &q in opts {
                        prop_assert!(q != p);
                        id_arrows.push((p.index(), q.index()));
                    }
                }
                // acyclic by an independent oracle
                prop_assert!(kahn_is_acyclic(graph.position_count(), &id_arrows));
            }
        }
    }

    /// `f(p) = μ(f(Opt(p)))` holds position-wise for every builtin.
    #[test]
    fn valuation_recurrences_hold(graph in arb_rulegraph(10)) {
        for builtin in BUILTIN_VALUATIONS {
            match builtin.evaluate(&graph) {
                ValueTable::Numbers(values) => {
                    for p in graph.positions() {
                        let opts: BTreeSet<u64> =
                            graph.options(p).iter().map(|q| values[q.index()]).collect();
                        let expected = match builtin.name() {
                            "nim" => mex(&opts),
                            "fbd" => opts.iter().map(|v| v + 1).max().unwrap_or(0),
                            "mindist" => opts.iter().next().map(|v| v + 1).unwrap_or(0),
                            other => unreachable!("numeric builtin {other}"),
                        };
                        prop_assert_eq!(values[p.index()], expected);
                    }
                }
                ValueTable::Outcomes(values) => {
                    for p in graph.positions() {
                        let opts: BTreeSet<Outcome> =
                            graph.options(p).iter().map(|q| values[q.index()]).collect();
                        let expected = match builtin.name() {
                            "outcome+" => {
                                if opts.contains(&Outcome::P) { Outcome::N } else { Outcome::P }
                            }
                            "outcome-" => {
                                if opts.is_empty() || opts.contains(&Outcome::P) {
                                    Outcome::N
                                } else {
                                    Outcome::P
                                }
                            }
                            other => unreachable!("outcome builtin {other}"),
                        };
                        prop_assert_eq!(values[p.index()], expected);
                    }
                }
            }
        }
    }

    /// Canonical rank equals the formal birthday.
    #[test]
    fn canonical_rank_is_birthday(graph in arb_rulegraph(10)) {
        let mut arena = HfArena::new();
        let canon = arena.canonicalize(&graph);
        let fbd = formal_birthdays(&graph);
        for p in graph.positions() {
            prop_assert_eq!(arena.rank(canon[p.index()]) as u64, fbd[p.index()]);
        }
    }

    /// Structural equality of interned sets is id equality.
    #[test]
    fn interning_is_structural(
        graph in arb_rulegraph(8),
        other in arb_rulegraph(8),
    ) {
        let mut arena = HfArena::new();
        let canon_a = arena.canonicalize(&graph);
        let canon_b = arena.canonicalize(&other);
        for &a in canon_a.iter().chain(&canon_b) {
            for &b in canon_a.iter().chain(&canon_b) {
                prop_assert_eq!(a == b, arena.notation(a) == arena.notation(b));
            }
        }
    }

    /// Canonical form sets are a complete isomorphism invariant for simple
    /// rulegraphs.
    #[test]
    fn canonical_forms_decide_simple_isomorphism(
        left in arb_rulegraph(10),
        right in arb_rulegraph(10),
    ) {
        let a = min_quotient(&left).graph;
        let b = min_quotient(&right).graph;
        let mut arena = HfArena::new();
        let forms_a: BTreeSet<String> = arena
            .canonicalize(&a)
            .into_iter()
            .map(|s| arena.notation(s))
            .collect();
        let forms_b: BTreeSet<String> = arena
            .canonicalize(&b)
            .into_iter()
            .map(|s| arena.notation(s))
            .collect();
        prop_assert_eq!(are_isomorphic(&a, &b).is_some(), forms_a == forms_b);
    }

    /// Rebuilding a simple rulegraph from its canonical image is lossless.
    #[test]
    fn canonical_collection_round_trips(graph in arb_rulegraph(10)) {
        let simple = min_quotient(&graph).graph;
        let mut arena = HfArena::new();
        let canon = arena.canonicalize(&simple);
        let rebuilt = arena.collection_to_rulegraph(&canon).unwrap();
        prop_assert!(are_isomorphic(&simple, &rebuilt).is_some());
    }

    /// For a simple rulegraph all induced gamegraphs are pairwise
    /// non-isomorphic.
    #[test]
    fn induced_gamegraphs_of_simple_graphs_differ(graph in arb_rulegraph(7)) {
        let simple = min_quotient(&graph).graph;
        let games = simple.gamma();
        for i in 0..games.len() {
            for j in 0..i {
                prop_assert!(
                    are_isomorphic(games[i].graph(), games[j].graph()).is_none()
                );
            }
        }
    }

    /// Every position of a gamegraph is a subposition of the start, and the
    /// induced subgraph keeps exactly the arrows among subpositions.
    #[test]
    fn subposition_reachability_and_induction(game in arb_gamegraph(10)) {
        let graph = game.graph();
        let all: BTreeSet<PositionId> = graph.positions().collect();
        prop_assert_eq!(graph.subpositions(game.start()).unwrap(), all);

        for p in graph.positions() {
            let subs = graph.subpositions(p).unwrap();
            let induced = graph.induced_gamegraph(p).unwrap();
            let expected: usize = subs
                .iter()
                .map(|&q| {
                    graph
                        .options(q)
                        .iter()
                        .filter(|r| subs.contains(r))
                        .count()
                })
                .sum();
            prop_assert_eq!(induced.graph().arrow_count(), expected);
        }
    }

    /// Compositions and inverses of verified maps stay in the category.
    #[test]
    fn composition_and_inverse_closure(
        (graph, partition) in arb_rulegraph_with_congruence(10),
        seeds in prop::collection::vec(any::<u32>(), 1..8),
    ) {
        // composition of two quotient maps is option preserving
        let first = quotient(&graph, &partition).unwrap();
        let second_partition = random_congruence(&first.graph, &seeds);
        let second = quotient(&first.graph, &second_partition).unwrap();
        let composed = first.map.compose(&second.map).unwrap();
        prop_assert!(check_option_preserving(&graph, &second.graph, &composed).holds());

        // faithfulness: arrows map to arrows, and image arrows lift
        for (p, q) in graph.arrows() {
            prop_assert!(second
                .graph
                .options(composed.apply(p))
                .contains(&composed.apply(q)));
        }
        for p in graph.positions() {
            for &image_option in second.graph.options(composed.apply(p)) {
                prop_assert!(graph
                    .options(p)
                    .iter()
                    .any(|&r| composed.apply(r) == image_option));
            }
        }

        // the inverse of a bijective option preserving map is one as well
        let shuffled = shuffled_copy(&graph, &seeds);
        let iso = are_isomorphic(&graph, &shuffled).unwrap();
        let inverse = iso.inverse().unwrap();
        prop_assert!(check_option_preserving(&shuffled, &graph, &inverse).holds());
    }

    /// When option preserving maps exist in both directions between
    /// gamegraphs, the found maps preserve sources.
    #[test]
    fn two_way_maps_preserve_sources(
        game in arb_gamegraph(8),
        seeds in prop::collection::vec(any::<u32>(), 1..8),
    ) {
        let shuffled = Gamegraph::new(shuffled_copy(game.graph(), &seeds)).unwrap();
        let forward = find_option_preserving_map(game.graph(), shuffled.graph(), None, 8)
            .unwrap();
        let backward = find_option_preserving_map(shuffled.graph(), game.graph(), None, 8)
            .unwrap();
        if let (Some(forward), Some(backward)) = (forward, backward) {
            prop_assert!(check_source_preserving(&game, &shuffled, &forward).holds());
            prop_assert!(check_source_preserving(&shuffled, &game, &backward).holds());
        } else {
            prop_assert!(false, "isomorphic copies admit maps both ways");
        }
    }

    /// The interval above D in Con(R) is order-isomorphic to Con(R/D),
    /// exhaustively for small graphs.
    #[test]
    fn interval_isomorphism_of_congruence_lattices(graph in arb_rulegraph(7)) {
        let lattice = con_lattice(&graph, 7).unwrap();
        for d in lattice.elements() {
            let quotient_graph = quotient(&graph, d).unwrap().graph;
            let sub_lattice = con_lattice(&quotient_graph, 7).unwrap();
            let above: Vec<_> = lattice
                .elements()
                .iter()
                .filter(|c| d.refines(c))
                .collect();
            let pushed: Vec<_> = above
                .iter()
                .map(|c| pushforward_congruence(&graph, d, c).unwrap())
                .collect();
            prop_assert_eq!(pushed.len(), sub_lattice.len());
            let distinct: HashSet<_> = pushed.iter().collect();
            prop_assert_eq!(distinct.len(), sub_lattice.len());
            for p in &pushed {
                prop_assert!(sub_lattice.index_of(p).is_some());
            }
            for i in 0..above.len() {
                for j in 0..above.len() {
                    prop_assert_eq!(
                        above[i].refines(above[j]),
                        pushed[i].refines(&pushed[j])
                    );
                }
            }
        }
    }

    /// Meets and joins computed in the enumerated lattice are genuine
    /// greatest lower and least upper bounds.
    #[test]
    fn lattice_closure_under_meet_and_join(graph in arb_rulegraph(6)) {
        let lattice = con_lattice(&graph, 6).unwrap();
        for a in 0..lattice.len() {
            for b in 0..lattice.len() {
                let met = lattice.meet_index(a, b);
                prop_assert!(lattice.refines(met, a) && lattice.refines(met, b));
                let joined = lattice.join_index(a, b);
                prop_assert!(lattice.refines(a, joined) && lattice.refines(b, joined));
                for c in 0..lattice.len() {
                    if lattice.refines(c, a) && lattice.refines(c, b) {
                        prop_assert!(lattice.refines(c, met), "meet is greatest");
                    }
                    if lattice.refines(a, c) && lattice.refines(b, c) {
                        prop_assert!(lattice.refines(joined, c), "join is least");
                    }
                }
            }
        }
        prop_assert!(lattice
            .elements()
            .iter()
            .all(|c| c.refines(&lattice.elements()[lattice.top_index()])));
    }

    /// The standalone meet agrees with the lattice meet and handles inputs
    /// whose plain intersection fails to be a congruence.
    #[test]
    fn standalone_meet_is_the_lattice_meet(graph in arb_rulegraph(6)) {
        let lattice = con_lattice(&graph, 6).unwrap();
        for a in 0..lattice.len() {
            for b in 0..lattice.len() {
                let met = gamegraphs::congruence::meet_congruences(
                    &graph,
                    &lattice.elements()[a],
                    &lattice.elements()[b],
                )
                .unwrap();
                prop_assert_eq!(&met, &lattice.elements()[lattice.meet_index(a, b)]);
            }
        }
    }
}

/// Terminal-labeled outcomes are not preserved by option preserving maps:
/// the maze's mixed labeling cannot descend to its minimum quotient.
#[test]
fn terminal_labeled_outcome_is_not_map_invariant() {
    let (game, labeling) = maze(3, 4).unwrap();
    let (min_game, q) = gamegraphs::congruence::min_quotient_gamegraph(&game);
    assert!(check_option_preserving(game.graph(), min_game.graph(), &q.map).holds());

    // every maze terminal collapses into a single quotient terminal; label it P
    let quotient_terminals = min_game.graph().terminals();
    assert_eq!(quotient_terminals.len(), 1);
    let quotient_labeling = TerminalLabeling::new(
        quotient_terminals.iter().map(|&t| (t, Outcome::P)).collect(),
    );

    let original = outcome_with_terminal_labels(&game, &labeling).unwrap();
    let collapsed = outcome_with_terminal_labels(&min_game, &quotient_labeling).unwrap();
    let differs = game
        .graph()
        .positions()
        .any(|p| original[p.index()] != collapsed[q.map.apply(p).index()]);
    assert!(
        differs,
        "a witness position must change its labeled outcome across the map"
    );
}

/// Bucketing the by-positions enumeration by formal birthday reproduces the
/// index-recursion totals for small depths.
#[test]
fn position_and_birthday_enumerations_cross_check() {
    use gamegraphs::enumeration::stream_simple_rulegraphs;
    let mut by_birthday: std::collections::BTreeMap<u32, u64> = Default::default();
    for n in 1..=6 {
        stream_simple_rulegraphs(n, false, 6, |arena, sets| {
            let depth = sets.iter().map(|&s| arena.rank(s)).max().unwrap();
            *by_birthday.entry(depth).or_default() += 1;
        })
        .unwrap();
    }
    // every simple rulegraph with fbd ≤ 2 has at most 4 positions, so the
    // n ≤ 6 sweep is complete for these depths
    assert_eq!(by_birthday.get(&0), Some(&1));
    assert_eq!(by_birthday.get(&1), Some(&1));
    assert_eq!(by_birthday.get(&2), Some(&3));
}

/// Streamed collections are simple, pairwise distinct, and the gamegraph
/// filter agrees with counting sources.
#[test]
fn streamed_graphs_are_simple_and_distinct() {
    use gamegraphs::enumeration::stream_simple_rulegraphs;
    for n in 1..=5 {
        let mut keys = HashSet::new();
        let mut one_source = 0u64;
        let total = stream_simple_rulegraphs(n, false, 5, |arena, sets| {
            keys.insert(sets.to_vec());
            let graph = arena.collection_to_rulegraph(sets).unwrap();
            assert!(gamegraphs::congruence::is_simple(&graph).holds());
            if graph.sources().len() == 1 {
                one_source += 1;
            }
        })
        .unwrap();
        assert_eq!(keys.len() as u64, total, "collections are distinct");
        let filtered = stream_simple_rulegraphs(n, true, 5, |_, _| {}).unwrap();
        assert_eq!(filtered, one_source, "gamegraph filter counts sources");
    }
}

/// Distances, birthdays and nim values agree with a brute-force walk search
/// on a fixed fixture.
#[test]
fn fixture_valuations_cross_check() {
    let r = lattice_example();
    let label = |l: &str| r.position_by_label(l).unwrap().index();
    let fbd = formal_birthdays(&r);
    assert_eq!(fbd[label("1")], 2);
    assert_eq!(fbd[label("4")], 1);
    let dist = min_distance_to_terminal(&r);
    assert_eq!(dist[label("1")], 2);
    assert_eq!(dist[label("3")], 1);
    let nim = nim_values(&r);
    assert_eq!(nim[label("5")], 0);
    assert_eq!(nim[label("3")], 1);
}
