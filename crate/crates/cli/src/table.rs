//! Tabular output shared by every subcommand.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Result;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits so printed values are
/// stable across platforms.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    pub fn probs(v: Option<&[f64]>) -> Cell {
        match v {
            Some(p) => Cell::Text(
                p.iter()
                    .map(|x| round_sig(*x).to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            None => Cell::Empty,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => round_sig(*x).to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(round_sig(*x)),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows plus the metadata that goes into the CSV comment header and the
/// JSON envelope.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Derived scalars reported above the rows.
    pub summary: Vec<(&'static str, Cell)>,
    /// The resolved configuration, echoed verbatim.
    pub config: Value,
    /// Feasibility flag columns; if every one is false on every row the
    /// request is infeasible.
    pub flag_columns: Vec<&'static str>,
}

impl Table {
    pub fn new(command: &'static str, columns: Vec<&'static str>, config: &impl Serialize) -> Self {
        Table {
            command,
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
            config: serde_json::to_value(config).expect("config serializes"),
            flag_columns: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// True when some row has a true feasibility flag, or when the table
    /// declares no flags.
    pub fn any_feasible(&self) -> bool {
        if self.flag_columns.is_empty() {
            return true;
        }
        let idx: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| self.flag_columns.contains(c))
            .map(|(i, _)| i)
            .collect();
        self.rows
            .iter()
            .any(|r| idx.iter().any(|&i| r[i] == Cell::Bool(true)))
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "# isac-fbl {} {}", env!("CARGO_PKG_VERSION"), self.command)?;
        writeln!(out, "# config {}", serde_json::to_string(&self.config)?)?;
        for (k, v) in &self.summary {
            writeln!(out, "# {k} = {}", v.csv())?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    m.insert((*c).to_string(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| ((*k).to_string(), v.json()))
            .collect();
        json!({
            "tool": "isac-fbl",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "summary": summary,
            "columns": self.columns,
            "rows": rows,
        })
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }
}
