//! JSON reports with canonical layout: object keys sorted, two-space
//! indentation, integers verbatim and floats in scientific notation with 17
//! significant digits. Identical inputs yield byte-identical reports.
//!
//! Fault numbers and graph nodes are 1-based in every report.

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::numeric::{FriendGain, NumericReason, NumericReport, NumericTriple};
use crate::sampling::MonteCarloSummary;
use crate::sim::{IsolationReport, ResidualTrace, SimDiagnostics};
use crate::structured::{StructuredReport, VerdictReason};

/// 17 significant digits, e.g. `-2.0000000000000000e0`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&value.to_string()),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => out.push_str(&format_float(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[key], depth + 1);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, depth: usize) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!(m[(i, j)])).collect()))
            .collect(),
    )
}

fn optional_indices(v: &[Option<usize>]) -> Value {
    Value::Array(
        v.iter()
            .map(|d| d.map_or(Value::Null, |d| json!(d)))
            .collect(),
    )
}

pub fn triple_json(sys: &NumericTriple) -> Value {
    json!({ "A": matrix_json(sys.a()), "L": matrix_json(sys.l()), "C": matrix_json(sys.c()) })
}

pub fn structured_reason_json(r: &VerdictReason) -> Value {
    match r {
        VerdictReason::MissingIndex { fault } => {
            json!({ "code": "MissingIndex", "fault": fault + 1 })
        }
        VerdictReason::ColorableRankCertificate => json!({ "code": "ColorableRankCertificate" }),
        VerdictReason::SufficiencyGap => json!({ "code": "SufficiencyGap" }),
    }
}

pub fn structured_report_json(report: &StructuredReport) -> Value {
    let mut map = Map::new();
    map.insert("eta".into(), optional_indices(&report.eta));
    map.insert(
        "R".into(),
        report
            .r_pattern
            .as_ref()
            .map_or(Value::Null, |r| json!(r.row_strings())),
    );
    map.insert("verdict".into(), json!(report.verdict.as_str()));
    map.insert(
        "reasons".into(),
        Value::Array(report.reasons.iter().map(structured_reason_json).collect()),
    );
    map.insert("star_columns".into(), json!(report.star_column_flags));
    map.insert(
        "coloring_trace".into(),
        report.coloring_trace.as_ref().map_or(Value::Null, |c| {
            json!({
                "black": c.black.iter().map(|b| b + 1).collect::<Vec<_>>(),
                "derivation": c.derivation_json(),
            })
        }),
    );
    if let Some(mc) = &report.monte_carlo {
        map.insert("monte_carlo".into(), monte_carlo_json(mc));
    }
    Value::Object(map)
}

fn numeric_reason_json(r: &NumericReason) -> Value {
    match r {
        NumericReason::MissingIndex { fault } => {
            json!({ "code": "MissingIndex", "fault": fault + 1 })
        }
        NumericReason::RankDeficient { rank, required } => {
            json!({ "code": "RankDeficient", "rank": rank, "required": required })
        }
        NumericReason::FullColumnRank => json!({ "code": "FullColumnRank" }),
    }
}

pub fn numeric_report_json(report: &NumericReport) -> Value {
    json!({
        "d": optional_indices(&report.d),
        "R": report.r.as_ref().map_or(Value::Null, matrix_json),
        "rank_of_R": report.rank_of_r,
        "solvable": report.solvable,
        "reasons": report.reasons.iter().map(numeric_reason_json).collect::<Vec<_>>(),
        "fault_subspace_dims": report.fault_subspaces.iter().map(|s| s.dim()).collect::<Vec<_>>(),
        "output_subspace_dims": report.output_subspaces.iter().map(|s| s.dim()).collect::<Vec<_>>(),
    })
}

pub fn friend_json(friend: &FriendGain) -> Value {
    json!({ "G": matrix_json(&friend.gain), "residual_norm": friend.residual_norm })
}

pub fn monte_carlo_json(mc: &MonteCarloSummary) -> Value {
    json!({
        "n_samples": mc.n_samples,
        "seed": mc.seed,
        "solvable": mc.solvable,
        "unsolvable": mc.unsolvable,
        "witness": mc.witness.as_ref().map_or(Value::Null, triple_json),
        "empirical_only": true,
    })
}

pub fn isolation_json(
    iso: &IsolationReport,
    trace: &ResidualTrace,
    diagnostics: &SimDiagnostics,
) -> Value {
    let faults: Vec<Value> = iso
        .active
        .iter()
        .zip(&iso.peak_norms)
        .enumerate()
        .map(|(i, (&active, &peak))| {
            json!({
                "fault": i + 1,
                "verdict": if active { "active" } else { "inactive" },
                "peak_norm": peak,
            })
        })
        .collect();
    json!({
        "threshold": iso.threshold,
        "faults": faults,
        "decomposition_defect": trace.decomposition_defect,
        "peak_residual_norm": trace.peak_residual_norm(),
        "samples": trace.times.len(),
        "warnings": diagnostics.warnings,
        "diverged": diagnostics.diverged,
        "suggested_step": diagnostics.suggested_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn canonical_layout() {
        let v = json!({ "b": [1, 2.5], "a": null, "c": {}, "d": [] });
        assert_eq!(
            to_canonical_json(&v),
            "{\n  \"a\": null,\n  \"b\": [\n    1,\n    2.5000000000000000e0\n  ],\n  \"c\": {},\n  \"d\": []\n}\n"
        );
        let parsed: Value = serde_json::from_str(&to_canonical_json(&v)).unwrap();
        assert_eq!(parsed, v);
    }
}
