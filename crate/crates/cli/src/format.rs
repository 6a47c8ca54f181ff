//! Deterministic number formatting for CSV and JSON output.

use nalgebra::DMatrix;
use serde_json::Value;

/// Significant digits of CSV cells.
pub const CSV_DIGITS: usize = 9;
/// Significant digits of scalar gains in JSON.
pub const GAIN_DIGITS: usize = 12;
/// Significant digits of matrix entries in JSON.
pub const MATRIX_DIGITS: usize = 15;

pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal form of `x` rounded to `digits`; exponent notation
/// outside `[1e-4, 1e9)`.
pub fn number(x: f64, digits: usize) -> String {
    let r = round_sig(x, digits);
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-4..1e9).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn json_number(x: f64, digits: usize) -> Value {
    serde_json::Number::from_f64(round_sig(x, digits))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Row-major nested arrays.
pub fn json_matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|row| Value::Array(row.iter().map(|&v| json_number(v, MATRIX_DIGITS)).collect()))
            .collect(),
    )
}

pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// A CSV cell: integers verbatim, reals with `CSV_DIGITS` digits.
pub enum Cell {
    Int(usize),
    Real(f64),
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .into_iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Real(v) => number(v, CSV_DIGITS),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
