//! Valuations: per-position functions `f` satisfying `f(p) = μ(f(Opt(p)))` for
//! a fixed set aggregator `μ`, computed in one reverse-topological sweep.
//!
//! The aggregator contract is set-based: duplicates and order among the
//! option values never matter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{Gamegraph, PositionId, Rulegraph};

/// Winner designation for a position: previous or next player wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Outcome {
    P,
    N,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::P => "P",
            Outcome::N => "N",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuationError {
    #[error("terminal labeling mismatch: missing {missing:?}, extra {extra:?}")]
    LabelMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },
}

/// Evaluates the valuation determined by `μ` on every position.
pub fn evaluate<V, M>(graph: &Rulegraph, mut mu: M) -> Vec<V>
where
    V: Clone + Ord,
    M: FnMut(&BTreeSet<V>) -> V,
{
    let mut values: Vec<Option<V>> = vec![None; graph.position_count()];
    for &p in graph.topo_order().iter().rev() {
        let opts: BTreeSet<V> = graph
            .options(p)
            .iter()
            .map(|q| values[q.index()].clone().expect("options are evaluated first"))
            .collect();
        values[p.index()] = Some(mu(&opts));
    }
    values.into_iter().map(Option::unwrap).collect()
}

/// Minimum excludant of a finite set of naturals.
pub fn mex(values: &BTreeSet<u64>) -> u64 {
    let mut candidate = 0;
    for &v in values {
        if v == candidate {
            candidate += 1;
        } else if v > candidate {
            break;
        }
    }
    candidate
}

pub fn nim_values(graph: &Rulegraph) -> Vec<u64> {
    evaluate(graph, mex)
}

pub fn outcome_normal(graph: &Rulegraph) -> Vec<Outcome> {
    evaluate(graph, |opts| {
        if opts.contains(&Outcome::P) {
            Outcome::N
        } else {
            Outcome::P
        }
    })
}

pub fn outcome_misere(graph: &Rulegraph) -> Vec<Outcome> {
    evaluate(graph, |opts| {
        if opts.is_empty() || opts.contains(&Outcome::P) {
            Outcome::N
        } else {
            Outcome::P
        }
    })
}

/// `fbd(p) = sup { fbd(q) + 1 | q ∈ Opt(p) }` with `sup ∅ = 0`.
pub fn formal_birthdays(graph: &Rulegraph) -> Vec<u64> {
    evaluate(graph, |opts| opts.iter().map(|v| v + 1).max().unwrap_or(0))
}

/// Formal birthday of the whole graph: the largest position birthday.
pub fn formal_birthday(graph: &Rulegraph) -> u64 {
    formal_birthdays(graph).into_iter().max().unwrap_or(0)
}

pub fn min_distance_to_terminal(graph: &Rulegraph) -> Vec<u64> {
    evaluate(graph, |opts| {
        opts.iter().next().map(|v| v + 1).unwrap_or(0)
    })
}

/// The five named aggregators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinValuation {
    Nim,
    OutcomeNormal,
    OutcomeMisere,
    FormalBirthday,
    MinDistance,
}

pub const BUILTIN_VALUATIONS: [BuiltinValuation; 5] = [
    BuiltinValuation::Nim,
    BuiltinValuation::OutcomeNormal,
    BuiltinValuation::OutcomeMisere,
    BuiltinValuation::FormalBirthday,
    BuiltinValuation::MinDistance,
];

impl BuiltinValuation {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinValuation::Nim => "nim",
            BuiltinValuation::OutcomeNormal => "outcome+",
            BuiltinValuation::OutcomeMisere => "outcome-",
            BuiltinValuation::FormalBirthday => "fbd",
            BuiltinValuation::MinDistance => "mindist",
        }
    }

    pub fn evaluate(self, graph: &Rulegraph) -> ValueTable {
        match self {
            BuiltinValuation::Nim => ValueTable::Numbers(nim_values(graph)),
            BuiltinValuation::OutcomeNormal => ValueTable::Outcomes(outcome_normal(graph)),
            BuiltinValuation::OutcomeMisere => ValueTable::Outcomes(outcome_misere(graph)),
            BuiltinValuation::FormalBirthday => ValueTable::Numbers(formal_birthdays(graph)),
            BuiltinValuation::MinDistance => {
                ValueTable::Numbers(min_distance_to_terminal(graph))
            }
        }
    }
}

/// Per-position values of a builtin valuation, numeric or outcome-valued.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueTable {
    Numbers(Vec<u64>),
    Outcomes(Vec<Outcome>),
}

impl ValueTable {
    pub fn len(&self) -> usize {
        match self {
            ValueTable::Numbers(v) => v.len(),
            ValueTable::Outcomes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn render(&self, p: PositionId) -> String {
        match self {
            ValueTable::Numbers(v) => v[p.index()].to_string(),
            ValueTable::Outcomes(v) => v[p.index()].to_string(),
        }
    }
}

/// A fixed outcome for each terminal position of one particular graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TerminalLabeling {
    outcomes: BTreeMap<PositionId, Outcome>,
}

impl TerminalLabeling {
    pub fn new(outcomes: BTreeMap<PositionId, Outcome>) -> Self {
        TerminalLabeling { outcomes }
    }

    pub fn outcome(&self, p: PositionId) -> Option<Outcome> {
        self.outcomes.get(&p).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PositionId, Outcome)> + '_ {
        self.outcomes.iter().map(|(&p, &o)| (p, o))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Mixed-play outcome: terminals keep their given labels, nonterminal
/// positions get `μ⁺` of their option outcomes. Not a valuation — there is no
/// single value for `μ(∅)` — so option preserving maps need not preserve it.
pub fn outcome_with_terminal_labels(
    game: &Gamegraph,
    labeling: &TerminalLabeling,
) -> Result<Vec<Outcome>, ValuationError> {
    let graph = game.graph();
    let terminals = graph.terminals();
    let labeled: BTreeSet<PositionId> = labeling.iter().map(|(p, _)| p).collect();
    if labeled != terminals {
        return Err(ValuationError::LabelMismatch {
            missing: terminals
                .difference(&labeled)
                .map(|&p| graph.label(p).to_string())
                .collect(),
            extra: labeled
                .difference(&terminals)
                .map(|&p| {
                    graph
                        .labels()
                        .get(p.index())
                        .cloned()
                        .unwrap_or_else(|| format!("#{}", p.index()))
                })
                .collect(),
        });
    }
    let mut values: Vec<Option<Outcome>> = vec![None; graph.position_count()];
    for &p in graph.topo_order().iter().rev() {
        let value = if graph.is_terminal(p) {
            labeling.outcome(p).expect("labeling covers terminals")
        } else if graph
            .options(p)
            .iter()
            .any(|q| values[q.index()] == Some(Outcome::P))
        {
            Outcome::N
        } else {
            Outcome::P
        };
        values[p.index()] = Some(value);
    }
    Ok(values.into_iter().map(Option::unwrap).collect())
}
