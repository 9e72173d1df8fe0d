//! Tabular output in CSV or JSON with a configuration header.

use std::collections::BTreeMap;
use std::io::Write;

use crate::config::Format;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Shortest decimal that round-trips to the same `f64`, in exponent form
/// for very small or very large magnitudes.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        // Drop the sign of negative zero so equal values print equally.
        "0".into()
    } else if x.abs() < 1e-4 || x.abs() >= 1e16 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `key = value` lines appended to the header (run summaries).
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.to_string(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Writes `table` with a header recording the tool version, the command and
/// the resolved configuration in key order.
pub fn write_table(
    w: &mut dyn Write,
    format: Format,
    command: &str,
    config: &BTreeMap<String, String>,
    table: &Table,
) -> Result<(), CliError> {
    let version = env!("CARGO_PKG_VERSION");
    match format {
        Format::Csv => {
            writeln!(w, "# dssh {version}")?;
            writeln!(w, "# command = {command}")?;
            for (k, v) in config {
                writeln!(w, "# {k} = {v}")?;
            }
            for (k, v) in &table.notes {
                writeln!(w, "# {k} = {v}")?;
            }
            let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
            csv.write_record(&table.columns).map_err(csv_error)?;
            for row in &table.rows {
                csv.write_record(row.iter().map(Cell::csv_text)).map_err(csv_error)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            let mut header = serde_json::Map::new();
            header.insert("version".into(), version.into());
            header.insert("command".into(), command.into());
            let cfg: serde_json::Map<String, serde_json::Value> =
                config.iter().map(|(k, v)| (k.clone(), v.as_str().into())).collect();
            header.insert("config".into(), cfg.into());
            let notes: serde_json::Map<String, serde_json::Value> =
                table.notes.iter().map(|(k, v)| (k.clone(), v.as_str().into())).collect();
            header.insert("notes".into(), notes.into());
            let doc = serde_json::json!({
                "header": header,
                "columns": table.columns,
                "rows": table.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
