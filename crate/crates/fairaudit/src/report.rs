//! Deterministic report emission.
//!
//! JSON reports are canonicalized before writing: keys sorted, every number
//! rounded to 6 significant digits. Plain-text tables are rendered from the
//! canonical JSON value, so re-rendering a saved report reproduces the table
//! byte for byte. Non-finite numbers (a disparate impact of +inf) appear as
//! JSON null.

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Round to `digits` significant digits.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return serde_json::Number::from_f64(round_sig(f, 6))
                        .map(Value::Number)
                        .unwrap_or(Value::Null);
                }
            }
            Value::Number(n)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => {
            // serde_json's map is sorted by key already; rebuild for values
            Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect())
        }
        other => other,
    }
}

/// Canonical JSON value of any serializable report.
pub fn canonical_value<T: Serialize>(report: &T) -> Result<Value> {
    Ok(canonicalize(serde_json::to_value(report)?))
}

/// Canonical JSON text (pretty-printed, stable key order, 6 significant
/// digits, trailing newline).
pub fn canonical_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&canonical_value(report)?)?;
    s.push('\n');
    Ok(s)
}

fn fmt_cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => "-".to_string(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn render_rows(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_line = |cells: &[String], widths: &[usize]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    let header_cells: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    out.push_str(&fmt_line(&header_cells, &widths));
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-"),
    );
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_line(row, &widths));
        out.push('\n');
    }
    out
}

fn fairness_row(case: &Value) -> Vec<String> {
    let f = case.get("fairness");
    vec![
        format!("Case {}", fmt_cell(case.get("case"))),
        fmt_cell(f.and_then(|f| f.get("spd"))),
        fmt_cell(f.and_then(|f| f.get("eod"))),
        fmt_cell(f.and_then(|f| f.get("di"))),
    ]
}

fn performance_row(case: &Value) -> Vec<String> {
    let p = case.get("performance");
    vec![
        format!("Case {}", fmt_cell(case.get("case"))),
        fmt_cell(p.and_then(|p| p.get("accuracy"))),
        fmt_cell(p.and_then(|p| p.get("fnr"))),
        fmt_cell(p.and_then(|p| p.get("recall"))),
        fmt_cell(p.and_then(|p| p.get("f1"))),
    ]
}

/// Render the cross-case comparison (fairness and performance tables, plus
/// the before/after mitigation table for cases that report training-data
/// fairness) from a canonical JSON value. Accepts either a run summary
/// (`{"cases": [...]}`) or a single case object.
pub fn render_tables(value: &Value) -> String {
    let cases: Vec<&Value> = match value.get("cases").and_then(Value::as_array) {
        Some(list) => list.iter().collect(),
        None => vec![value],
    };
    let mut out = String::new();
    out.push_str("Fairness metrics (test predictions)\n");
    let rows: Vec<Vec<String>> = cases.iter().map(|c| fairness_row(c)).collect();
    out.push_str(&render_rows(&["", "SPD", "EOD", "DI"], &rows));
    out.push('\n');
    out.push_str("Performance metrics (test set)\n");
    let rows: Vec<Vec<String>> = cases.iter().map(|c| performance_row(c)).collect();
    out.push_str(&render_rows(
        &["", "Accuracy", "FNR", "Recall", "F1"],
        &rows,
    ));

    let mut mitigation_rows: Vec<Vec<String>> = Vec::new();
    for case in &cases {
        let before = case.get("train_fairness_before");
        let after = case.get("train_fairness_after");
        if let (Some(b), Some(a)) = (before, after) {
            if b.is_null() || a.is_null() {
                continue;
            }
            mitigation_rows.push(vec![
                format!("Case {} before", fmt_cell(case.get("case"))),
                fmt_cell(b.get("spd")),
                fmt_cell(b.get("di")),
            ]);
            mitigation_rows.push(vec![
                format!("Case {} after (weighted)", fmt_cell(case.get("case"))),
                fmt_cell(a.get("spd")),
                fmt_cell(a.get("di")),
            ]);
            if let Some(u) = case.get("train_fairness_after_unweighted") {
                if !u.is_null() {
                    mitigation_rows.push(vec![
                        format!("Case {} after (unweighted)", fmt_cell(case.get("case"))),
                        fmt_cell(u.get("spd")),
                        fmt_cell(u.get("di")),
                    ]);
                }
            }
        }
    }
    if !mitigation_rows.is_empty() {
        out.push('\n');
        out.push_str("Training-data fairness before/after mitigation\n");
        out.push_str(&render_rows(&["", "SPD", "DI"], &mitigation_rows));
    }
    out
}
