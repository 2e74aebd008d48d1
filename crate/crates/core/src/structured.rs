//! Structural FDI analysis of a pattern triple `(A, L, C)`.
//!
//! The structural index `eta_i` is the smallest `eta >= 1` with
//! `C A^(eta-1) L_i` not the zero pattern. A missing index rules out
//! solvability for the whole class. When all indices exist, the columns
//! `C A^(eta_i-1) L_i` form the pattern matrix `R`; full column rank of `R`
//! (decided by colorability of the graph of `R^T`) certifies solvability.
//! Otherwise the structural test is silent and the verdict is
//! inconclusive.

use crate::error::{FdiError, Result};
use crate::graph::{self, ColoringState, StructGraph};
use crate::pattern::{PatternMatrix, PatternSymbol};
use crate::sampling::MonteCarloSummary;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredTriple {
    a: PatternMatrix,
    l: PatternMatrix,
    c: PatternMatrix,
}

impl StructuredTriple {
    /// `A` is `n x n`, `L` is `n x q`, `C` is `p x n`.
    pub fn new(a: PatternMatrix, l: PatternMatrix, c: PatternMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(FdiError::dims(
                "block A",
                format!("A is {}x{}, expected square", n, a.cols()),
            ));
        }
        if l.rows() != n {
            return Err(FdiError::dims(
                "block L",
                format!("L has {} rows, A is {n}x{n}", l.rows()),
            ));
        }
        if c.cols() != n {
            return Err(FdiError::dims(
                "block C",
                format!("C has {} columns, A is {n}x{n}", c.cols()),
            ));
        }
        Ok(Self { a, l, c })
    }

    pub fn a(&self) -> &PatternMatrix {
        &self.a
    }

    pub fn l(&self) -> &PatternMatrix {
        &self.l
    }

    pub fn c(&self) -> &PatternMatrix {
        &self.c
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn fault_count(&self) -> usize {
        self.l.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }

    fn check_fault(&self, i: usize) -> Result<()> {
        if i >= self.fault_count() {
            return Err(FdiError::FaultOutOfRange {
                index: i,
                count: self.fault_count(),
            });
        }
        Ok(())
    }

    /// `C (A^j L_i)` as a pattern column.
    pub fn markov_pattern(&self, i: usize, j: usize) -> Result<PatternMatrix> {
        self.check_fault(i)?;
        self.c.mul(&self.a.power(j)?.mul(&self.l.column(i))?)
    }
}

/// Index search over `j < limit`.
pub fn structural_index_within(
    sys: &StructuredTriple,
    i: usize,
    limit: usize,
) -> Result<Option<usize>> {
    sys.check_fault(i)?;
    let li = sys.l.column(i);
    let mut power = PatternMatrix::identity(sys.state_dim());
    for j in 0..limit {
        if j > 0 {
            power = power.mul(&sys.a)?;
        }
        if !sys.c.mul(&power.mul(&li)?)?.is_zero() {
            return Ok(Some(j + 1));
        }
    }
    Ok(None)
}

/// Structural index of fault column `i` (zero-based). Nonzero patterns are
/// walks in the graph of `A`, and a shortest walk never needs more than
/// `n - 1` steps, so the scan stops at `eta = n`.
pub fn structural_index(sys: &StructuredTriple, i: usize) -> Result<Option<usize>> {
    structural_index_within(sys, i, sys.state_dim())
}

pub fn structural_indices(sys: &StructuredTriple) -> Vec<Option<usize>> {
    (0..sys.fault_count())
        .map(|i| structural_index(sys, i).expect("fault column in range"))
        .collect()
}

fn assemble_r(sys: &StructuredTriple, eta: &[Option<usize>]) -> Result<PatternMatrix> {
    let missing: Vec<usize> = eta
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.is_none().then_some(i))
        .collect();
    if !missing.is_empty() {
        return Err(FdiError::MissingIndex(missing));
    }
    let columns = eta
        .iter()
        .enumerate()
        .map(|(i, e)| sys.markov_pattern(i, e.expect("checked above") - 1))
        .collect::<Result<Vec<_>>>()?;
    if columns.is_empty() {
        return Ok(PatternMatrix::zeros(sys.output_dim(), 0));
    }
    PatternMatrix::hstack(&columns)
}

/// Pattern matrix `R` with column `i` equal to `C A^(eta_i-1) L_i`.
pub fn build_pattern_r(sys: &StructuredTriple) -> Result<PatternMatrix> {
    assemble_r(sys, &structural_indices(sys))
}

/// Per column: does it contain a `*`? Such a column is nonzero for every
/// member, which pins the numeric index to the structural one.
pub fn star_column_check(r: &PatternMatrix) -> Vec<bool> {
    (0..r.cols())
        .map(|j| (0..r.rows()).any(|i| r.get(i, j) == PatternSymbol::Star))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuredVerdict {
    Solvable,
    NotSolvable,
    Inconclusive,
}

impl StructuredVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            StructuredVerdict::Solvable => "Solvable",
            StructuredVerdict::NotSolvable => "NotSolvable",
            StructuredVerdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerdictReason {
    /// Zero-based fault column without a structural index.
    MissingIndex { fault: usize },
    /// The graph of `R^T` is colorable, so `R` has full column rank.
    ColorableRankCertificate,
    /// Indices exist but `R` is not full column rank for the whole class.
    SufficiencyGap,
}

#[derive(Clone, Debug)]
pub struct StructuredReport {
    pub eta: Vec<Option<usize>>,
    pub r_pattern: Option<PatternMatrix>,
    pub verdict: StructuredVerdict,
    pub reasons: Vec<VerdictReason>,
    pub star_column_flags: Vec<bool>,
    pub coloring_trace: Option<ColoringState>,
    /// Empirical evidence only; never changes the verdict.
    pub monte_carlo: Option<MonteCarloSummary>,
}

impl StructuredReport {
    pub fn attach_monte_carlo(&mut self, summary: MonteCarloSummary) {
        self.monte_carlo = Some(summary);
    }
}

pub fn analyze_structured(sys: &StructuredTriple) -> StructuredReport {
    let eta = structural_indices(sys);
    let star_column_flags: Vec<bool> = eta
        .iter()
        .enumerate()
        .map(|(i, e)| match e {
            Some(e) => {
                star_column_check(&sys.markov_pattern(i, e - 1).expect("fault column in range"))[0]
            }
            None => false,
        })
        .collect();
    let missing: Vec<VerdictReason> = eta
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            e.is_none()
                .then_some(VerdictReason::MissingIndex { fault: i })
        })
        .collect();
    if !missing.is_empty() {
        return StructuredReport {
            eta,
            r_pattern: None,
            verdict: StructuredVerdict::NotSolvable,
            reasons: missing,
            star_column_flags,
            coloring_trace: None,
            monte_carlo: None,
        };
    }
    let r = assemble_r(sys, &eta).expect("all indices exist");
    let r_t = r.transpose();
    // Graph of R^T needs q <= p; otherwise no member can have full column rank.
    let coloring_trace = StructGraph::build(&r_t)
        .ok()
        .map(|g| graph::color_closure(&g));
    let full_col_rank = coloring_trace
        .as_ref()
        .is_some_and(|c| (0..r_t.rows()).all(|i| c.black.contains(&i)));
    let (verdict, reason) = if full_col_rank {
        (
            StructuredVerdict::Solvable,
            VerdictReason::ColorableRankCertificate,
        )
    } else {
        (
            StructuredVerdict::Inconclusive,
            VerdictReason::SufficiencyGap,
        )
    };
    StructuredReport {
        eta,
        r_pattern: Some(r),
        verdict,
        reasons: vec![reason],
        star_column_flags,
        coloring_trace,
        monte_carlo: None,
    }
}
