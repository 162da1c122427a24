//! Output rendering: JSON (schema-stable), CSV, and plain text, plus
//! string forms for exact rationals.

use clap::ValueEnum;
use num_traits::{One, ToPrimitive};
use serde_json::Value;
use wheelperc::linalg::Rational;
use wheelperc::matchings::NoncrossingMatching;

/// Output format for the data stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// A tabular view of a result, used by the csv and plain renderers.
#[derive(Debug, Clone)]
pub struct TableView {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One command's result: a stable JSON document, an optional tabular
/// view, and the process exit code.
#[derive(Debug)]
pub struct CommandResult {
    pub json: Value,
    pub table: Option<TableView>,
    pub exit: i32,
}

impl CommandResult {
    pub fn new(json: Value) -> Self {
        Self { json, table: None, exit: 0 }
    }

    pub fn with_table(mut self, table: TableView) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_exit(mut self, exit: i32) -> Self {
        self.exit = exit;
        self
    }
}

/// Reduced "p/q" form ("p" when the denominator is one).
pub fn rational_str(r: &Rational) -> String {
    r.to_string()
}

/// "p/2^e" form when the reduced denominator is a power of two.
pub fn dyadic_str(r: &Rational) -> Option<String> {
    let d = r.denom();
    if d.is_one() {
        return Some(r.numer().to_string());
    }
    let mag = d.magnitude();
    let e = mag.trailing_zeros()?;
    if mag.bits() == e + 1 {
        Some(format!("{}/2^{}", r.numer(), e))
    } else {
        None
    }
}

/// Decimal approximation for human-facing columns.
pub fn decimal(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Matching as a JSON arc list `[[a,b],...]`, openers ascending.
pub fn matching_json(p: &NoncrossingMatching) -> Value {
    Value::Array(
        p.arcs()
            .into_iter()
            .map(|(a, b)| Value::Array(vec![a.into(), b.into()]))
            .collect(),
    )
}

/// Matching as a compact arc-list string, the same text accepted by
/// `--matching`.
pub fn matching_str(p: &NoncrossingMatching) -> String {
    matching_json(p).to_string()
}

fn csv_cell(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scalar_str(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Renders a result in the requested format, with a trailing newline.
pub fn render(result: &CommandResult, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&result.json).expect("serializable result");
            s.push('\n');
            s
        }
        Format::Csv => match &result.table {
            Some(t) => {
                let mut out = String::new();
                out.push_str(&t.header.iter().map(|h| csv_cell(h)).collect::<Vec<_>>().join(","));
                out.push('\n');
                for row in &t.rows {
                    out.push_str(&row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out
            }
            None => {
                let mut out = String::from("key,value\n");
                if let Value::Object(map) = &result.json {
                    for (k, v) in map {
                        out.push_str(&format!("{},{}\n", csv_cell(k), csv_cell(&scalar_str(v))));
                    }
                }
                out
            }
        },
        Format::Plain => match &result.table {
            Some(t) => {
                let mut widths: Vec<usize> = t.header.iter().map(|h| h.len()).collect();
                for row in &t.rows {
                    for (w, c) in widths.iter_mut().zip(row) {
                        *w = (*w).max(c.len());
                    }
                }
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                };
                let mut out = line(&t.header);
                out.push('\n');
                for row in &t.rows {
                    out.push_str(&line(row));
                    out.push('\n');
                }
                out
            }
            None => {
                let mut out = String::new();
                if let Value::Object(map) = &result.json {
                    for (k, v) in map {
                        out.push_str(&format!("{k}: {}\n", scalar_str(v)));
                    }
                }
                out
            }
        },
    }
}
