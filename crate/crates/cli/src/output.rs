//! Report model shared by every subcommand, with JSON and CSV emitters.
//!
//! Reals are rounded to 15 significant digits before either emitter sees
//! them, so both encodings carry the same numbers. Complex values are
//! {re, im} in JSON and two columns `name.re`, `name.im` in CSV.

use serde_json::{json, Map, Value};
use wg_core::Complex64;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Int(i64),
    Real(f64),
    Cx(Complex64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Val {
    fn from(v: f64) -> Self {
        Val::Real(v)
    }
}
impl From<u64> for Val {
    fn from(v: u64) -> Self {
        Val::Int(v as i64)
    }
}
impl From<i64> for Val {
    fn from(v: i64) -> Self {
        Val::Int(v)
    }
}
impl From<usize> for Val {
    fn from(v: usize) -> Self {
        Val::Int(v as i64)
    }
}
impl From<Complex64> for Val {
    fn from(v: Complex64) -> Self {
        Val::Cx(v)
    }
}
impl From<bool> for Val {
    fn from(v: bool) -> Self {
        Val::Bool(v)
    }
}
impl From<&str> for Val {
    fn from(v: &str) -> Self {
        Val::Text(v.to_string())
    }
}
impl From<String> for Val {
    fn from(v: String) -> Self {
        Val::Text(v)
    }
}

pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap()
}

fn real_json(x: f64) -> Value {
    if x.is_finite() {
        json!(round15(x))
    } else {
        json!(real_text(x))
    }
}

fn real_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{}", round15(x))
    }
}

impl Val {
    pub fn to_json(&self) -> Value {
        match self {
            Val::Int(i) => json!(i),
            Val::Real(x) => real_json(*x),
            Val::Cx(c) => json!({"re": real_json(c.re), "im": real_json(c.im)}),
            Val::Text(s) => json!(s),
            Val::Bool(b) => json!(b),
        }
    }

    fn csv_cells(&self) -> Vec<String> {
        match self {
            Val::Int(i) => vec![i.to_string()],
            Val::Real(x) => vec![real_text(*x)],
            Val::Cx(c) => vec![real_text(c.re), real_text(c.im)],
            Val::Text(s) => vec![csv_quote(s)],
            Val::Bool(b) => vec![b.to_string()],
        }
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Optional chart: x column, y columns, log axes.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub x: String,
    pub ys: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub summary: Vec<(String, Val)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Val>>,
    pub plot: Option<PlotSpec>,
}

impl Report {
    pub fn new(command: &str, config: Value, columns: &[&str]) -> Self {
        Report {
            command: command.to_string(),
            config,
            summary: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            plot: None,
        }
    }

    pub fn sum(&mut self, key: &str, v: impl Into<Val>) -> &mut Self {
        self.summary.push((key.to_string(), v.into()));
        self
    }

    pub fn row(&mut self, r: Vec<Val>) {
        debug_assert_eq!(r.len(), self.columns.len());
        self.rows.push(r);
    }

    fn summary_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.summary {
            m.insert(k.clone(), v.to_json());
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Val::to_json).collect())).collect();
        let doc = json!({
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "summary": self.summary_json(),
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).unwrap();
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema: {SCHEMA}\n"));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# config: {}\n", serde_json::to_string(&self.config).unwrap()));
        out.push_str(&format!("# summary: {}\n", serde_json::to_string(&self.summary_json()).unwrap()));
        // complex columns split in two; detect from the first row
        let header: Vec<String> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(i, c)| match self.rows.first().map(|r| &r[i]) {
                Some(Val::Cx(_)) => vec![format!("{c}.re"), format!("{c}.im")],
                _ => vec![c.clone()],
            })
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().flat_map(Val::csv_cells).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Numeric series for a column (complex columns give the modulus).
    pub fn series(&self, col: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == col)?;
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Val::Int(v) => Some(*v as f64),
                Val::Real(v) => Some(*v),
                Val::Cx(c) => Some(c.norm()),
                _ => None,
            })
            .collect()
    }
}
