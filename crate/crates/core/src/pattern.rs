//! Pattern matrices over the symbols `0`, `*` and `?`.
//!
//! A pattern matrix stands for the class of all real matrices that are
//! exactly zero where the pattern has `0`, nonzero where it has `*`, and
//! unconstrained where it has `?`. Sums and products follow fixed lookup
//! tables so that the product of two patterns contains every product of
//! their members.
//!
//! Text format: one row per line, entries separated by whitespace, a blank
//! line (or end of input) ends the block. Serialization uses a single space
//! between entries and a trailing newline after every row.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{FdiError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternSymbol {
    /// Entry is exactly zero.
    Zero,
    /// Entry is nonzero.
    Star,
    /// Entry is arbitrary.
    Question,
}

use PatternSymbol::{Question as Q, Star as S, Zero as Z};

// Rows and columns are indexed Zero, Star, Question.
const ADD_TABLE: [[PatternSymbol; 3]; 3] = [[Z, S, Q], [S, Q, Q], [Q, Q, Q]];
const MUL_TABLE: [[PatternSymbol; 3]; 3] = [[Z, Z, Z], [Z, S, Q], [Z, Q, Q]];

impl PatternSymbol {
    pub const ALL: [PatternSymbol; 3] = [Z, S, Q];

    fn slot(self) -> usize {
        match self {
            Z => 0,
            S => 1,
            Q => 2,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Z
    }

    pub fn as_char(self) -> char {
        match self {
            Z => '0',
            S => '*',
            Q => '?',
        }
    }

    /// Parses a single token. Accepts `∗` as an alias for `*`.
    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "0" => Some(Z),
            "*" | "∗" => Some(S),
            "?" => Some(Q),
            _ => None,
        }
    }
}

impl Add for PatternSymbol {
    type Output = PatternSymbol;

    fn add(self, rhs: Self) -> Self {
        ADD_TABLE[self.slot()][rhs.slot()]
    }
}

impl Mul for PatternSymbol {
    type Output = PatternSymbol;

    fn mul(self, rhs: Self) -> Self {
        MUL_TABLE[self.slot()][rhs.slot()]
    }
}

impl fmt::Display for PatternSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub fn symbol_add(a: PatternSymbol, b: PatternSymbol) -> PatternSymbol {
    a + b
}

pub fn symbol_mul(a: PatternSymbol, b: PatternSymbol) -> PatternSymbol {
    a * b
}

/// Dense row-major pattern matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatternMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<PatternSymbol>,
}

impl PatternMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<PatternSymbol>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(FdiError::dims(
                "pattern matrix",
                format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    entries.len()
                ),
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> PatternSymbol,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// All-zero pattern.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Z)
    }

    /// `*` on the diagonal, `0` elsewhere.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S } else { Z })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> PatternSymbol {
        assert!(
            i < self.rows && j < self.cols,
            "pattern index ({i}, {j}) out of bounds"
        );
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[PatternSymbol] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> PatternMatrix {
        Self::from_fn(self.rows, 1, |i, _| self.get(i, j))
    }

    /// Concatenates equally tall patterns side by side.
    pub fn hstack(blocks: &[PatternMatrix]) -> Result<PatternMatrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if let Some(bad) = blocks.iter().find(|b| b.rows != rows) {
            return Err(FdiError::dims(
                "pattern hstack",
                format!("row counts {rows} and {} differ", bad.rows),
            ));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut offsets = Vec::with_capacity(cols);
        for (k, b) in blocks.iter().enumerate() {
            offsets.extend((0..b.cols).map(|j| (k, j)));
        }
        Ok(Self::from_fn(rows, cols, |i, j| {
            let (k, jj) = offsets[j];
            blocks[k].get(i, jj)
        }))
    }

    pub fn transpose(&self) -> PatternMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &PatternMatrix) -> Result<PatternMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FdiError::dims(
                "pattern addition",
                format!(
                    "{}x{} + {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn mul(&self, other: &PatternMatrix) -> Result<PatternMatrix> {
        if self.cols != other.rows {
            return Err(FdiError::dims(
                "pattern product",
                format!(
                    "{}x{} * {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Z, |acc, k| acc + self.get(i, k) * other.get(k, j))
        }))
    }

    /// `M^0 = I`, `M^k = M^(k-1) M`.
    pub fn power(&self, k: usize) -> Result<PatternMatrix> {
        if !self.is_square() {
            return Err(FdiError::dims(
                "pattern power",
                format!("{}x{} is not square", self.rows, self.cols),
            ));
        }
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|s| s.is_zero())
    }

    /// Whether `m` lies in the pattern class. An entry counts as zero when its
    /// magnitude is at most `zero_tol`.
    pub fn is_member(&self, m: &DMatrix<f64>, zero_tol: f64) -> Result<bool> {
        if m.nrows() != self.rows || m.ncols() != self.cols {
            return Err(FdiError::dims(
                "pattern membership",
                format!(
                    "matrix is {}x{}, pattern is {}x{}",
                    m.nrows(),
                    m.ncols(),
                    self.rows,
                    self.cols
                ),
            ));
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let small = m[(i, j)].abs() <= zero_tol;
                let ok = match self.get(i, j) {
                    Z => small,
                    S => !small,
                    Q => true,
                };
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Rows rendered as space-separated symbols, without newlines.
    pub fn row_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    /// Parses one block whose first line sits at `first_line` (1-based) in
    /// the surrounding file, so errors point at the right place.
    pub fn parse_block(lines: &[&str], first_line: usize) -> Result<PatternMatrix> {
        let mut entries = Vec::new();
        let mut cols: Option<usize> = None;
        for (k, line) in lines.iter().enumerate() {
            let line_no = first_line + k;
            let mut row_len = 0;
            for (column, token) in tokens_with_columns(line) {
                let sym = PatternSymbol::from_token(token).ok_or_else(|| FdiError::Parse {
                    line: line_no,
                    column,
                    message: format!("unexpected token `{token}`, expected one of 0 * ?"),
                })?;
                entries.push(sym);
                row_len += 1;
            }
            match cols {
                None => cols = Some(row_len),
                Some(c) if c != row_len => {
                    return Err(FdiError::Parse {
                        line: line_no,
                        column: 1,
                        message: format!("row has {row_len} entries, previous rows have {c}"),
                    })
                }
                _ => {}
            }
        }
        let cols = cols.ok_or_else(|| FdiError::Parse {
            line: first_line,
            column: 1,
            message: "empty pattern block".into(),
        })?;
        PatternMatrix::new(lines.len(), cols, entries)
    }
}

/// Whitespace-separated tokens paired with their 1-based character column.
pub(crate) fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push((c + 1, &line[b..byte]));
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        out.push((c + 1, &line[b..]));
    }
    out.into_iter()
}

impl fmt::Display for PatternMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.row_strings() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for PatternMatrix {
    type Err = FdiError;

    /// Parses the first block of `s`; anything after the terminating blank
    /// line is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<&str> = s.lines().collect();
        let start = lines
            .iter()
            .position(|l| !l.trim().is_empty())
            .ok_or_else(|| FdiError::Parse {
                line: 1,
                column: 1,
                message: "empty pattern block".into(),
            })?;
        let end = lines[start..]
            .iter()
            .position(|l| l.trim().is_empty())
            .map_or(lines.len(), |p| start + p);
        if let Some(extra) = lines[end..].iter().position(|l| !l.trim().is_empty()) {
            return Err(FdiError::Parse {
                line: end + extra + 1,
                column: 1,
                message: "unexpected content after pattern block".into(),
            });
        }
        PatternMatrix::parse_block(&lines[start..end], start + 1)
    }
}

/// Convenience constructor used heavily in tests: `pattern!["* 0", "? *"]`.
#[macro_export]
macro_rules! pattern {
    ($($row:expr),+ $(,)?) => {{
        let text = [$($row),+].join("\n");
        text.parse::<$crate::pattern::PatternMatrix>().expect("valid pattern literal")
    }};
}
