//! Column-oriented datasets with CSV round-tripping.
//!
//! Columns are named, ordered, and typed as binary (values constrained to
//! 0/1) or continuous. Column order is preserved exactly as inserted so CSV
//! output follows the producing model's node order. Binary cells serialize
//! as `0`/`1`; continuous cells use the shortest round-trip float rendering.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

// ── Types and errors ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("duplicate column {name}")]
    DuplicateColumn { name: String },
    #[error("column {column} has {got} rows, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown column {name}")]
    UnknownColumn { name: String },
    #[error("column {column} is binary but row {row} holds {value}")]
    NonBinaryValue {
        column: String,
        row: usize,
        value: f64,
    },
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("csv: {0}")]
    Csv(String),
}

/// An ordered collection of equal-length named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    values: Vec<Vec<f64>>,
    index: BTreeMap<String, usize>,
}

// ── Construction and access ──────────────────────────────────────────────────

impl Dataset {
    pub fn new() -> Dataset {
        Dataset::default()
    }

    /// Append a column. The first column fixes the row count; binary columns
    /// must contain only 0.0 and 1.0.
    pub fn push_column(
        &mut self,
        name: impl Into<String>,
        kind: ColumnKind,
        values: Vec<f64>,
    ) -> Result<(), DataError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(DataError::DuplicateColumn { name });
        }
        if let Some(expected) = self.values.first().map(Vec::len) {
            if values.len() != expected {
                return Err(DataError::LengthMismatch {
                    column: name,
                    expected,
                    got: values.len(),
                });
            }
        }
        if kind == ColumnKind::Binary {
            if let Some(row) = values.iter().position(|v| *v != 0.0 && *v != 1.0) {
                return Err(DataError::NonBinaryValue {
                    column: name,
                    row,
                    value: values[row],
                });
            }
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.kinds.push(kind);
        self.values.push(values);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    /// Column names in insertion order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64], DataError> {
        self.index
            .get(name)
            .map(|&i| self.values[i].as_slice())
            .ok_or_else(|| DataError::UnknownColumn { name: name.to_string() })
    }

    pub fn kind(&self, name: &str) -> Result<ColumnKind, DataError> {
        self.index
            .get(name)
            .map(|&i| self.kinds[i])
            .ok_or_else(|| DataError::UnknownColumn { name: name.to_string() })
    }

    pub fn value(&self, name: &str, row: usize) -> Result<f64, DataError> {
        Ok(self.column(name)?[row])
    }

    /// New dataset holding the given rows (indices may repeat — this is the
    /// resampling primitive), with column order and kinds preserved.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut out = Dataset::new();
        for ((name, kind), values) in self.names.iter().zip(&self.kinds).zip(&self.values) {
            let picked = rows.iter().map(|&r| values[r]).collect();
            out.push_column(name.clone(), *kind, picked)
                .expect("selection preserves validity");
        }
        out
    }

    /// New dataset holding only the named columns, in the order given.
    /// Dropped columns are physically absent from the result, so downstream
    /// code cannot accidentally condition on them.
    pub fn select_columns(&self, names: &[String]) -> Result<Dataset, DataError> {
        let mut out = Dataset::new();
        for name in names {
            let values = self.column(name)?.to_vec();
            out.push_column(name.clone(), self.kind(name)?, values)?;
        }
        Ok(out)
    }

    // ── CSV ──────────────────────────────────────────────────────────────────

    /// Parse CSV with a header row. Every cell must be numeric; a column is
    /// typed binary when all of its values are 0 or 1, continuous otherwise
    /// (the typing affects only re-serialization and stratification display).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Dataset, DataError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| DataError::Csv(e.to_string()))?
            .iter()
            .map(str::trim)
            .map(str::to_string)
            .collect();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
        for (row_idx, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
            if record.len() != headers.len() {
                return Err(DataError::Csv(format!(
                    "row {} has {} fields, expected {}",
                    row_idx + 1,
                    record.len(),
                    headers.len()
                )));
            }
            for (col_idx, cell) in record.iter().enumerate() {
                let parsed = cell.trim().parse::<f64>().map_err(|_| DataError::ParseCell {
                    row: row_idx + 1,
                    column: headers[col_idx].clone(),
                    value: cell.to_string(),
                })?;
                columns[col_idx].push(parsed);
            }
        }
        let mut out = Dataset::new();
        for (name, values) in headers.into_iter().zip(columns) {
            let kind = if values.iter().all(|v| *v == 0.0 || *v == 1.0) {
                ColumnKind::Binary
            } else {
                ColumnKind::Continuous
            };
            out.push_column(name, kind, values)?;
        }
        Ok(out)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.names)
            .map_err(|e| DataError::Csv(e.to_string()))?;
        let mut record = Vec::with_capacity(self.names.len());
        for row in 0..self.n_rows() {
            record.clear();
            for (kind, values) in self.kinds.iter().zip(&self.values) {
                let v = values[row];
                record.push(match kind {
                    ColumnKind::Binary => format!("{}", v as i64),
                    ColumnKind::Continuous => format!("{v}"),
                });
            }
            wtr.write_record(&record)
                .map_err(|e| DataError::Csv(e.to_string()))?;
        }
        wtr.flush().map_err(|e| DataError::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String, DataError> {
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

// ── Tests ────────────────────────────────────────────────────────────────────
