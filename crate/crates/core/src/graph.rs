//! Graph of a pattern matrix and the color change rule.
//!
//! For an `r x s` pattern with `r <= s`, the graph has one node per column.
//! Entry `(i, j)` being `*` (resp. `?`) gives a solid (resp. dashed) edge
//! from node `j` to node `i`. A node with exactly one white out-neighbor,
//! reached over a solid edge, turns that neighbor black. The pattern has
//! full row rank for every member exactly when nodes `0..r` all end black.
//!
//! Nodes are zero-based here; JSON exports shift them to 1-based labels.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{FdiError, Result};
use crate::pattern::{PatternMatrix, PatternSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Star,
    Question,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructGraph {
    node_count: usize,
    row_count: usize,
    edges_star: BTreeSet<(usize, usize)>,
    edges_question: BTreeSet<(usize, usize)>,
    // out[j] = (target, kind), sorted by target
    out: Vec<Vec<(usize, EdgeKind)>>,
}

impl StructGraph {
    pub fn build(m: &PatternMatrix) -> Result<Self> {
        if m.rows() > m.cols() {
            return Err(FdiError::dims(
                "graph construction",
                format!(
                    "pattern is {}x{}; more rows than columns (transpose first)",
                    m.rows(),
                    m.cols()
                ),
            ));
        }
        let mut g = StructGraph {
            node_count: m.cols(),
            row_count: m.rows(),
            edges_star: BTreeSet::new(),
            edges_question: BTreeSet::new(),
            out: vec![Vec::new(); m.cols()],
        };
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                match m.get(i, j) {
                    PatternSymbol::Zero => continue,
                    PatternSymbol::Star => {
                        g.edges_star.insert((j, i));
                        g.out[j].push((i, EdgeKind::Star));
                    }
                    PatternSymbol::Question => {
                        g.edges_question.insert((j, i));
                        g.out[j].push((i, EdgeKind::Question));
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    /// Solid edges as `(from, to)`.
    pub fn edges_star(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges_star
    }

    /// Dashed edges as `(from, to)`.
    pub fn edges_question(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges_question
    }

    pub fn out_neighbors(&self, node: usize) -> &[(usize, EdgeKind)] {
        &self.out[node]
    }

    /// The node `from` would force given the current black set, if any.
    pub fn forced_by(&self, from: usize, black: &BTreeSet<usize>) -> Option<usize> {
        let mut white = self.out[from].iter().filter(|(to, _)| !black.contains(to));
        match (white.next(), white.next()) {
            (Some(&(to, EdgeKind::Star)), None) => Some(to),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ForcingStep {
    pub round: usize,
    pub forcing_node: usize,
    pub forced_node: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColoringState {
    pub black: BTreeSet<usize>,
    pub derivation: Vec<ForcingStep>,
}

impl ColoringState {
    /// Derivation with 1-based node labels and rounds, as exported to JSON.
    pub fn derivation_json(&self) -> serde_json::Value {
        let steps: Vec<_> = self
            .derivation
            .iter()
            .map(|s| ForcingStep {
                round: s.round + 1,
                forcing_node: s.forcing_node + 1,
                forced_node: s.forced_node + 1,
            })
            .collect();
        serde_json::to_value(steps).expect("forcing steps serialize")
    }
}

/// Runs the rule to its fixpoint.
///
/// Each round takes the black set at the start of the round, scans nodes in
/// ascending order and applies every force that is still valid when reached.
pub fn color_closure(g: &StructGraph) -> ColoringState {
    let mut state = ColoringState::default();
    let mut round = 0;
    loop {
        let snapshot = state.black.clone();
        let mut progressed = false;
        for from in 0..g.node_count {
            if g.forced_by(from, &snapshot).is_none() {
                continue;
            }
            // Re-check against the live set: an earlier force this round may
            // already have blackened the target.
            if let Some(to) = g.forced_by(from, &state.black) {
                state.black.insert(to);
                state.derivation.push(ForcingStep {
                    round,
                    forcing_node: from,
                    forced_node: to,
                });
                progressed = true;
            }
        }
        if !progressed {
            return state;
        }
        round += 1;
    }
}

/// Runs the rule applying one force at a time, letting `pick` choose which
/// of the currently applicable forcing nodes acts next. Every step is
/// recorded as its own round.
pub fn color_closure_with(
    g: &StructGraph,
    mut pick: impl FnMut(&[usize]) -> usize,
) -> ColoringState {
    let mut state = ColoringState::default();
    loop {
        let candidates: Vec<usize> = (0..g.node_count)
            .filter(|&from| g.forced_by(from, &state.black).is_some())
            .collect();
        if candidates.is_empty() {
            return state;
        }
        let from = candidates[pick(&candidates) % candidates.len()];
        let to = g
            .forced_by(from, &state.black)
            .expect("candidate can force");
        state.derivation.push(ForcingStep {
            round: state.derivation.len(),
            forcing_node: from,
            forced_node: to,
        });
        state.black.insert(to);
    }
}

pub fn is_colorable(g: &StructGraph) -> bool {
    let closure = color_closure(g);
    (0..g.row_count).all(|i| closure.black.contains(&i))
}

/// Full row rank for every member of the class. Wide-enough check only:
/// patterns with more rows than columns never qualify.
pub fn pattern_full_row_rank(m: &PatternMatrix) -> bool {
    match StructGraph::build(m) {
        Ok(g) => is_colorable(&g),
        Err(_) => false,
    }
}

pub fn pattern_full_col_rank(m: &PatternMatrix) -> bool {
    pattern_full_row_rank(&m.transpose())
}
