//! Tabular artifacts and their writers.
//!
//! CSV files have a header row, comma separators, LF line endings and every
//! float printed with 17 significant digits so it round-trips exactly.
//! JSON files hold an array of row objects with columns in header order.

use std::fs;
use std::path::{Path, PathBuf};

use qwsearch::matrix::format_sig17;
use serde_json::{json, Map, Value};

use crate::config::OutputFormat;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    /// A value that could not be computed (for example no root in range).
    Empty,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match *self {
            Cell::Num(x) => format_sig17(x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match *self {
            Cell::Num(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(i),
            Cell::Bool(b) => Value::Bool(b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub description: &'static str,
}

pub const fn col(name: &'static str, description: &'static str) -> Column {
    Column { name, description }
}

/// A named table destined for one output file.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Run parameters recorded in the schema sidecar.
    pub metadata: Map<String, Value>,
}

impl DataTable {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Self {
        DataTable {
            name: name.into(),
            columns,
            rows: Vec::new(),
            metadata: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width differs from header in {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.name.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&rows).expect("serializable");
        text.push('\n');
        text
    }

    pub fn schema(&self, format: OutputFormat) -> String {
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|c| json!({ "name": c.name, "description": c.description }))
            .collect();
        let schema = json!({
            "name": self.name,
            "format": format.extension(),
            "rows": self.rows.len(),
            "columns": columns,
            "metadata": Value::Object(self.metadata.clone()),
        });
        let mut text = serde_json::to_string_pretty(&schema).expect("serializable");
        text.push('\n');
        text
    }

    /// Writes `<name>.<ext>` and, if requested, `<name>.schema.json`.
    pub fn write(
        &self,
        dir: &Path,
        format: OutputFormat,
        with_schema: bool,
    ) -> Result<Vec<PathBuf>, CliError> {
        let body = match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        };
        let mut written = vec![write_file(
            dir,
            &format!("{}.{}", self.name, format.extension()),
            &body,
        )?];
        if with_schema {
            written.push(write_file(
                dir,
                &format!("{}.schema.json", self.name),
                &self.schema(format),
            )?);
        }
        Ok(written)
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
