//! Input file formats.
//!
//! Structured-system file: three labelled pattern blocks,
//!
//! ```text
//! A:
//! 0 0
//! 0 0
//!
//! L:
//! * *
//! 0 *
//!
//! C:
//! * *
//! * 0
//! ```
//!
//! Lines starting with `#` are comments and also end a block. Numeric systems are JSON objects
//! `{"A": [[..]], "L": [[..]], "C": [[..]]}` with row-major nested arrays;
//! scenarios are `{"duration", "step", "faults": [{"kind", "onset",
//! "amplitude", "freq"}]}` with `kind` one of `zero`, `step`, `sinusoid`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FdiError, Result};
use crate::numeric::NumericTriple;
use crate::pattern::PatternMatrix;
use crate::sim::{FaultScenario, FaultSignal};
use crate::structured::StructuredTriple;

const LABELS: [&str; 3] = ["A", "L", "C"];

pub fn parse_structured(text: &str) -> Result<StructuredTriple> {
    let lines: Vec<&str> = text.lines().collect();
    let mut blocks: [Option<PatternMatrix>; 3] = [None, None, None];
    let mut k = 0;
    while k < lines.len() {
        let line = lines[k].trim();
        if line.is_empty() || line.starts_with('#') {
            k += 1;
            continue;
        }
        let label = line.strip_suffix(':').map(str::trim);
        let slot = label
            .and_then(|l| LABELS.iter().position(|&x| x == l))
            .ok_or_else(|| FdiError::Parse {
                line: k + 1,
                column: 1,
                message: format!("expected a block label `A:`, `L:` or `C:`, found `{line}`"),
            })?;
        if blocks[slot].is_some() {
            return Err(FdiError::Parse {
                line: k + 1,
                column: 1,
                message: format!("block {} appears twice", LABELS[slot]),
            });
        }
        let start = k + 1;
        let mut end = start;
        while end < lines.len()
            && !lines[end].trim().is_empty()
            && !lines[end].trim_start().starts_with('#')
            && !is_label(lines[end])
        {
            end += 1;
        }
        let rows = &lines[start..end];
        if rows.is_empty() {
            return Err(FdiError::Parse {
                line: k + 1,
                column: 1,
                message: format!("block {} is empty", LABELS[slot]),
            });
        }
        blocks[slot] = Some(PatternMatrix::parse_block(rows, start + 1)?);
        k = end;
    }
    let [a, l, c] = blocks;
    let missing = |name: &str| FdiError::Parse {
        line: lines.len().max(1),
        column: 1,
        message: format!("missing block {name}"),
    };
    StructuredTriple::new(
        a.ok_or_else(|| missing("A"))?,
        l.ok_or_else(|| missing("L"))?,
        c.ok_or_else(|| missing("C"))?,
    )
}

fn is_label(line: &str) -> bool {
    let t = line.trim();
    t.strip_suffix(':')
        .is_some_and(|l| LABELS.contains(&l.trim()))
}

pub fn format_structured(sys: &StructuredTriple) -> String {
    format!("A:\n{}\nL:\n{}\nC:\n{}", sys.a(), sys.l(), sys.c())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NumericSystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>], cols_if_empty: usize) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(cols_if_empty, Vec::len);
    if let Some(k) = rows.iter().position(|r| r.len() != cols) {
        return Err(FdiError::dims(
            format!("block {name}"),
            format!(
                "row {} has {} entries, row 1 has {cols}",
                k + 1,
                rows[k].len()
            ),
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl NumericSystemFile {
    pub fn into_triple(self) -> Result<NumericTriple> {
        let a = matrix_from_rows("A", &self.a, 0)?;
        let l = matrix_from_rows("L", &self.l, 0)?;
        let c = matrix_from_rows("C", &self.c, a.nrows())?;
        NumericTriple::new(a, l, c)
    }

    pub fn from_triple(sys: &NumericTriple) -> Self {
        Self {
            a: matrix_rows(sys.a()),
            l: matrix_rows(sys.l()),
            c: matrix_rows(sys.c()),
        }
    }
}

fn json_error(e: serde_json::Error) -> FdiError {
    FdiError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_numeric(text: &str) -> Result<NumericTriple> {
    serde_json::from_str::<NumericSystemFile>(text)
        .map_err(json_error)?
        .into_triple()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: String,
    #[serde(default)]
    pub onset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub duration: f64,
    pub step: f64,
    pub faults: Vec<FaultSpec>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<FaultScenario> {
        let faults = self
            .faults
            .iter()
            .enumerate()
            .map(|(i, f)| match f.kind.as_str() {
                "zero" => Ok(FaultSignal::Zero),
                "step" => Ok(FaultSignal::Step {
                    onset: f.onset,
                    amplitude: f.amplitude,
                }),
                "sinusoid" => Ok(FaultSignal::Sinusoid {
                    freq: f.freq.ok_or_else(|| {
                        FdiError::InvalidInput(format!("fault {}: sinusoid needs `freq`", i + 1))
                    })?,
                    amplitude: f.amplitude,
                    onset: f.onset,
                }),
                other => Err(FdiError::InvalidInput(format!(
                    "fault {}: unknown kind `{other}` (expected zero, step or sinusoid)",
                    i + 1
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        FaultScenario::new(self.duration, self.step, faults)
    }
}

pub fn parse_scenario(text: &str) -> Result<FaultScenario> {
    serde_json::from_str::<ScenarioFile>(text)
        .map_err(json_error)?
        .into_scenario()
}

#[derive(Deserialize)]
struct GainFile {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
}

/// Reads `{"G": [[..]]}`, as written by the friend report.
pub fn parse_gain(text: &str, state_dim: usize, output_dim: usize) -> Result<DMatrix<f64>> {
    let file: GainFile = serde_json::from_str(text).map_err(json_error)?;
    let g = matrix_from_rows("G", &file.g, output_dim)?;
    if g.nrows() != state_dim || g.ncols() != output_dim {
        return Err(FdiError::dims(
            "block G",
            format!(
                "G is {}x{}, expected {state_dim}x{output_dim}",
                g.nrows(),
                g.ncols()
            ),
        ));
    }
    Ok(g)
}
