//! Report envelope, pass/fail flags and CSV tables.

use current1d::io::{format_g17, lenient_f64, to_json};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flag {
    pub name: String,
    #[serde(with = "lenient_f64")]
    pub value: f64,
    #[serde(with = "lenient_f64")]
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Default)]
pub struct Flags(pub Vec<Flag>);

impl Flags {
    /// `value ≤ bound`; NaN fails.
    pub fn le(&mut self, name: &str, value: f64, bound: f64) {
        self.0.push(Flag {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        });
    }

    /// `|value − target| ≤ tol`, reported as the deviation.
    pub fn close(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        self.le(name, (value - target).abs(), tol);
    }

    pub fn holds(&mut self, name: &str, ok: bool) {
        self.0.push(Flag {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            passed: ok,
        });
    }

    pub fn passed(&self) -> bool {
        self.0.iter().all(|f| f.passed)
    }
}

/// Every JSON report has this shape; `result` depends on the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<T> {
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub passed: bool,
    pub checks: Vec<Flag>,
    pub result: T,
}

pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_g17(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// What a command hands back to `main`.
pub struct Done {
    pub json: String,
    pub table: Option<Table>,
    pub passed: bool,
}

impl Done {
    pub fn new<T: Serialize>(command: &str, seed: u64, tol: Option<f64>, flags: Flags, result: T, table: Option<Table>) -> anyhow::Result<Self> {
        let passed = flags.passed();
        let report = Report {
            command: command.into(),
            seed,
            tol,
            passed,
            checks: flags.0,
            result,
        };
        Ok(Done {
            json: to_json(&report)?,
            table,
            passed,
        })
    }
}
