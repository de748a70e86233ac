//! Tabular data: CSV ingestion, validation and label encoding.
//!
//! Features are stored column-major. Categorical columns hold integer codes
//! `0..K` as `f64`, with `category_labels[code]` giving the original string.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    /// Empty for numeric columns.
    pub category_labels: Vec<String>,
}

impl ColumnMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnMeta {
            name: name.into(),
            kind: ColumnKind::Numeric,
            category_labels: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, labels: Vec<String>) -> Self {
        ColumnMeta {
            name: name.into(),
            kind: ColumnKind::Categorical,
            category_labels: labels,
        }
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == ColumnKind::Categorical
    }

    pub fn n_categories(&self) -> usize {
        self.category_labels.len()
    }
}

/// Immutable feature matrix plus response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    response: Vec<f64>,
    col_meta: Vec<ColumnMeta>,
    response_name: String,
}

impl Dataset {
    /// Builds a dataset from feature columns, checking shape, completeness
    /// and that every categorical column uses exactly the codes `0..K`.
    pub fn new(
        features: Vec<Vec<f64>>,
        col_meta: Vec<ColumnMeta>,
        response: Vec<f64>,
    ) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if features.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if features.len() != col_meta.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature columns but {} column descriptions",
                features.len(),
                col_meta.len()
            )));
        }
        if let Some(row) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::MissingValue {
                row: row + 1,
                col: "<response>".into(),
            });
        }
        for (col, meta) in features.iter().zip(&col_meta) {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    what: "feature column",
                    got: col.len(),
                    expected: n,
                });
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::MissingValue {
                    row: row + 1,
                    col: meta.name.clone(),
                });
            }
            if meta.is_categorical() {
                check_codes(col, meta)?;
            }
        }
        Ok(Dataset {
            features,
            response,
            col_meta,
            response_name: "y".into(),
        })
    }

    pub fn with_response_name(mut self, name: impl Into<String>) -> Self {
        self.response_name = name.into();
        self
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn column(&self, j: usize) -> Result<&[f64]> {
        self.features
            .get(j)
            .map(Vec::as_slice)
            .ok_or(Error::ColumnOutOfRange {
                index: j,
                ncols: self.features.len(),
            })
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn col_meta(&self) -> &[ColumnMeta] {
        &self.col_meta
    }

    pub fn meta(&self, j: usize) -> Result<&ColumnMeta> {
        self.col_meta.get(j).ok_or(Error::ColumnOutOfRange {
            index: j,
            ncols: self.col_meta.len(),
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.col_meta.iter().position(|m| m.name == name)
    }

    /// Returns `X` without column `j`; rows and response are untouched.
    pub fn drop_column(&self, j: usize) -> Result<Dataset> {
        let p = self.n_features();
        if j >= p {
            return Err(Error::ColumnOutOfRange { index: j, ncols: p });
        }
        if p == 1 {
            return Err(Error::InvalidDataset(
                "cannot drop the only feature column".into(),
            ));
        }
        let keep = |i: &usize| *i != j;
        Ok(Dataset {
            features: (0..p)
                .filter(keep)
                .map(|i| self.features[i].clone())
                .collect(),
            response: self.response.clone(),
            col_meta: (0..p)
                .filter(keep)
                .map(|i| self.col_meta[i].clone())
                .collect(),
            response_name: self.response_name.clone(),
        })
    }

    /// Writes the dataset back out as CSV: features in order, categorical
    /// columns decoded to their labels, response last.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.col_meta.iter().map(|m| m.name.as_str()).collect();
        header.push(&self.response_name);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for i in 0..self.n_rows() {
            record.clear();
            for (col, meta) in self.features.iter().zip(&self.col_meta) {
                if meta.is_categorical() {
                    record.push(meta.category_labels[col[i] as usize].clone());
                } else {
                    record.push(col[i].to_string());
                }
            }
            record.push(self.response[i].to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<output>".into(),
            source: e,
        })?;
        Ok(())
    }
}

fn check_codes(col: &[f64], meta: &ColumnMeta) -> Result<()> {
    let k = meta.n_categories();
    let labels: BTreeSet<&String> = meta.category_labels.iter().collect();
    if labels.len() != k {
        return Err(Error::InvalidDataset(format!(
            "column '{}' has duplicate category labels",
            meta.name
        )));
    }
    let mut seen = vec![false; k];
    for &v in col {
        let code = v as usize;
        if v < 0.0 || v.fract() != 0.0 || code >= k {
            return Err(Error::InvalidDataset(format!(
                "column '{}' holds {} which is not a code in 0..{}",
                meta.name, v, k
            )));
        }
        seen[code] = true;
    }
    if let Some(code) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidDataset(format!(
            "column '{}' never uses category code {}",
            meta.name, code
        )));
    }
    Ok(())
}

/// Label-encodes strings: distinct values sorted lexicographically get
/// codes `0..K`.
pub fn encode_categorical<S: AsRef<str>>(values: &[S]) -> (Vec<f64>, Vec<String>) {
    let labels: Vec<String> = values
        .iter()
        .map(|v| v.as_ref())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let codes = values.iter().map(|v| index[v.as_ref()] as f64).collect();
    (codes, labels)
}

pub fn decode_categorical(codes: &[f64], labels: &[String]) -> Vec<String> {
    codes.iter().map(|&c| labels[c as usize].clone()).collect()
}

/// Loads a headered CSV file. Every column other than `response_col`
/// becomes a feature, in file order.
pub fn load_csv<P, S>(path: P, response_col: &str, categorical_cols: &[S]) -> Result<Dataset>
where
    P: AsRef<Path>,
    S: AsRef<str>,
{
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_csv(file, response_col, categorical_cols)
}

/// Like [`load_csv`] but reads from any byte source.
pub fn read_csv<R, S>(input: R, response_col: &str, categorical_cols: &[S]) -> Result<Dataset>
where
    R: Read,
    S: AsRef<str>,
{
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    let response_idx = header
        .iter()
        .position(|h| h == response_col)
        .ok_or_else(|| Error::MissingColumn(response_col.to_owned()))?;
    let mut is_cat = vec![false; header.len()];
    for name in categorical_cols {
        let name = name.as_ref();
        let idx = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))?;
        if idx == response_idx {
            return Err(Error::InvalidDataset(format!(
                "response column '{name}' cannot be categorical"
            )));
        }
        is_cat[idx] = true;
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    col: header[c].clone(),
                });
            }
            if is_cat[c] {
                raw[c].push(cell.to_owned());
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row,
                    col: header[c].clone(),
                    value: cell.to_owned(),
                })?;
                if !v.is_finite() {
                    return Err(Error::MissingValue {
                        row,
                        col: header[c].clone(),
                    });
                }
                numeric[c].push(v);
            }
        }
    }

    let mut features = Vec::with_capacity(header.len() - 1);
    let mut meta = Vec::with_capacity(header.len() - 1);
    let mut response = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == response_idx {
            response = std::mem::take(&mut numeric[c]);
        } else if is_cat[c] {
            let (codes, labels) = encode_categorical(&raw[c]);
            features.push(codes);
            meta.push(ColumnMeta::categorical(name.clone(), labels));
        } else {
            features.push(std::mem::take(&mut numeric[c]));
            meta.push(ColumnMeta::numeric(name.clone()));
        }
    }
    if features.len() < 2 {
        return Err(Error::InvalidDataset(
            "need at least two feature columns besides the response".into(),
        ));
    }
    Ok(Dataset::new(features, meta, response)?.with_response_name(response_col))
}
