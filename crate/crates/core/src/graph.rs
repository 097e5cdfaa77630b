//! Rulegraphs and gamegraphs: finite acyclic digraphs whose vertices are game
//! positions and whose out-neighborhoods are the option sets.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

/// Dense index of a position within its owning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PositionId(pub usize);

impl PositionId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("arrow endpoint {0:?} is not a position label")]
    UnknownEndpoint(String),
    #[error("self-loop at {0:?}")]
    SelfLoop(String),
    #[error("directed cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("graph has no source")]
    NoSource,
    #[error("multiple sources: {}", .0.join(", "))]
    MultipleSources(Vec<String>),
    #[error("position index {0} out of range")]
    UnknownPosition(usize),
}

/// A finite digraph with no directed cycle. Positions carry distinct string
/// labels; `options(p)` is the sorted out-neighborhood of `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rulegraph {
    labels: Vec<String>,
    options: Vec<Vec<PositionId>>,
    /// Every position appears before all of its options.
    topo: Vec<PositionId>,
}

impl Rulegraph {
    /// Builds a rulegraph from labels and label-pair arrows. Ids are assigned
    /// in label list order; option sets are deduplicated and sorted.
    pub fn new(labels: Vec<String>, arrows: &[(String, String)]) -> Result<Self, GraphError> {
        let mut by_label: HashMap<&str, usize> = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if by_label.insert(label, i).is_some() {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }
        let mut options = vec![Vec::new(); labels.len()];
        for (from, to) in arrows {
            let &f = by_label
                .get(from.as_str())
                .ok_or_else(|| GraphError::UnknownEndpoint(from.clone()))?;
            let &t = by_label
                .get(to.as_str())
                .ok_or_else(|| GraphError::UnknownEndpoint(to.clone()))?;
            options[f].push(PositionId(t));
        }
        drop(by_label);
        Self::from_options(labels, options)
    }

    /// Convenience wrapper over [`Rulegraph::new`] for literal fixtures.
    pub fn from_strs(labels: &[&str], arrows: &[(&str, &str)]) -> Result<Self, GraphError> {
        let arrows: Vec<(String, String)> = arrows
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Self::new(labels.iter().map(|s| s.to_string()).collect(), &arrows)
    }

    /// Builds a rulegraph from labels and per-position option lists given by id.
    pub fn from_options(
        labels: Vec<String>,
        mut options: Vec<Vec<PositionId>>,
    ) -> Result<Self, GraphError> {
        assert_eq!(labels.len(), options.len(), "one option list per label");
        let n = labels.len();
        {
            let mut seen: HashMap<&str, ()> = HashMap::with_capacity(n);
            for label in &labels {
                if seen.insert(label, ()).is_some() {
                    return Err(GraphError::DuplicateLabel(label.clone()));
                }
            }
        }
        for (p, opts) in options.iter_mut().enumerate() {
            opts.sort_unstable();
            opts.dedup();
            for q in opts.iter() {
                if q.index() >= n {
                    return Err(GraphError::UnknownPosition(q.index()));
                }
                if q.index() == p {
                    return Err(GraphError::SelfLoop(labels[p].clone()));
                }
            }
        }
        let topo = toposort(&labels, &options)?;
        Ok(Rulegraph {
            labels,
            options,
            topo,
        })
    }

    pub fn position_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = PositionId> {
        (0..self.labels.len()).map(PositionId)
    }

    pub fn label(&self, p: PositionId) -> &str {
        &self.labels[p.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position_by_label(&self, label: &str) -> Option<PositionId> {
        self.labels.iter().position(|l| l == label).map(PositionId)
    }

    /// The option set `Opt(p)`, sorted ascending by id.
    pub fn options(&self, p: PositionId) -> &[PositionId] {
        &self.options[p.index()]
    }

    pub fn option_lists(&self) -> &[Vec<PositionId>] {
        &self.options
    }

    pub fn arrow_count(&self) -> usize {
        self.options.iter().map(Vec::len).sum()
    }

    pub fn arrows(&self) -> impl Iterator<Item = (PositionId, PositionId)> + '_ {
        self.positions()
            .flat_map(move |p| self.options(p).iter().map(move |&q| (p, q)))
    }

    pub fn is_terminal(&self, p: PositionId) -> bool {
        self.options[p.index()].is_empty()
    }

    /// Positions with no in-neighbor.
    pub fn sources(&self) -> BTreeSet<PositionId> {
        let mut has_in = vec![false; self.position_count()];
        for opts in &self.options {
            for q in opts {
                has_in[q.index()] = true;
            }
        }
        has_in
            .iter()
            .enumerate()
            .filter(|(_, &h)| !h)
            .map(|(i, _)| PositionId(i))
            .collect()
    }

    /// Positions with no option.
    pub fn terminals(&self) -> BTreeSet<PositionId> {
        self.positions().filter(|&p| self.is_terminal(p)).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut degrees = vec![0; self.position_count()];
        for opts in &self.options {
            for q in opts {
                degrees[q.index()] += 1;
            }
        }
        degrees
    }

    /// A fixed order listing every position before all of its options.
    pub fn topo_order(&self) -> &[PositionId] {
        &self.topo
    }

    /// All positions reachable from `p` by a directed walk, including `p`.
    pub fn subpositions(&self, p: PositionId) -> Result<BTreeSet<PositionId>, GraphError> {
        if p.index() >= self.position_count() {
            return Err(GraphError::UnknownPosition(p.index()));
        }
        let mut seen = vec![false; self.position_count()];
        let mut stack = vec![p];
        seen[p.index()] = true;
        let mut reached = BTreeSet::new();
        while let Some(q) = stack.pop() {
            reached.insert(q);
            for &r in self.options(q) {
                if !seen[r.index()] {
                    seen[r.index()] = true;
                    stack.push(r);
                }
            }
        }
        Ok(reached)
    }

    /// The gamegraph `R_p` induced by the subpositions of `p`, started at `p`.
    pub fn induced_gamegraph(&self, p: PositionId) -> Result<Gamegraph, GraphError> {
        let subs = self.subpositions(p)?;
        let old_ids: Vec<PositionId> = subs.into_iter().collect();
        let mut new_id = HashMap::with_capacity(old_ids.len());
        for (i, &old) in old_ids.iter().enumerate() {
            new_id.insert(old, PositionId(i));
        }
        let labels = old_ids
            .iter()
            .map(|&old| self.labels[old.index()].clone())
            .collect();
        let options = old_ids
            .iter()
            .map(|&old| self.options(old).iter().map(|q| new_id[q]).collect())
            .collect();
        let graph = Self::from_options(labels, options)?;
        Ok(Gamegraph {
            start: new_id[&p],
            graph,
        })
    }

    /// `Γ(R)`: the induced gamegraph at every position, in position order.
    pub fn gamma(&self) -> Vec<Gamegraph> {
        self.positions()
            .map(|p| {
                self.induced_gamegraph(p)
                    .expect("positions of a valid graph induce gamegraphs")
            })
            .collect()
    }
}

/// A rulegraph with a unique source; in the finite case every position is
/// automatically a subposition of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gamegraph {
    graph: Rulegraph,
    start: PositionId,
}

impl Gamegraph {
    /// Promotes a rulegraph whose source is unique. No reachability check is
    /// needed: a finite rulegraph with a unique source is a gamegraph.
    pub fn new(graph: Rulegraph) -> Result<Self, GraphError> {
        let sources = graph.sources();
        match sources.len() {
            0 => Err(GraphError::NoSource),
            1 => Ok(Gamegraph {
                start: *sources.iter().next().unwrap(),
                graph,
            }),
            _ => Err(GraphError::MultipleSources(
                sources.iter().map(|&s| graph.label(s).to_string()).collect(),
            )),
        }
    }

    pub fn graph(&self) -> &Rulegraph {
        &self.graph
    }

    pub fn into_rulegraph(self) -> Rulegraph {
        self.graph
    }

    pub fn start(&self) -> PositionId {
        self.start
    }

    pub fn start_label(&self) -> &str {
        self.graph.label(self.start)
    }
}

/// Iterative depth-first search; rejects cycles so that arbitrarily long
/// chains cannot overflow the call stack.
fn toposort(labels: &[String], options: &[Vec<PositionId>]) -> Result<Vec<PositionId>, GraphError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = labels.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        mark[root] = Mark::Open;
        stack.push((root, 0));
        while let Some(frame) = stack.last_mut() {
            let (p, next) = *frame;
            if next < options[p].len() {
                frame.1 += 1;
                let q = options[p][next].index();
                match mark[q] {
                    Mark::New => {
                        mark[q] = Mark::Open;
                        stack.push((q, 0));
                    }
                    Mark::Open => {
                        let from = stack
                            .iter()
                            .position(|&(v, _)| v == q)
                            .expect("open vertex is on the stack");
                        let mut cycle: Vec<String> =
                            stack[from..].iter().map(|&(v, _)| labels[v].clone()).collect();
                        cycle.push(labels[q].clone());
                        return Err(GraphError::CycleDetected(cycle));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[p] = Mark::Done;
                order.push(PositionId(p));
                stack.pop();
            }
        }
    }
    order.reverse();
    Ok(order)
}
