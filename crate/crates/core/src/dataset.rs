//! Sample storage, label conventions and CSV ingestion.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Class mark of a sample unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// `+1` for positives, `-1` for negatives.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// Two distinct unit indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair {
    pub i: usize,
    pub j: usize,
}

impl IndexPair {
    pub fn new(i: usize, j: usize, m: usize) -> Result<Self> {
        for index in [i, j] {
            if index >= m {
                return Err(Error::IndexOutOfRange { index, m });
            }
        }
        if i == j {
            return Err(Error::Config(format!("pair ({i}, {j}) repeats a unit")));
        }
        Ok(Self { i, j })
    }

    /// All `m(m-1)/2` pairs with `i < j`, in lexicographic order.
    pub fn all(m: usize) -> impl Iterator<Item = IndexPair> {
        (0..m).flat_map(move |i| (i + 1..m).map(move |j| IndexPair { i, j }))
    }
}

/// Feature matrix (row-major, `m x d`) with one label per row.
///
/// Row order is the unit identity; nothing in the crate reorders rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    features: Vec<T>,
    labels: Vec<Label>,
    dim: usize,
}

/// Rows kept by [`Dataset::subset_excluding`] and their original indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Subset<T> {
    pub data: Dataset<T>,
    pub original: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from row-major features. Requires at least one row,
    /// at least one column and finite values everywhere.
    pub fn new(features: Vec<T>, dim: usize, labels: Vec<Label>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("at least one feature column required".into()));
        }
        if labels.is_empty() {
            return Err(Error::TooFewRows { got: 0, need: 1 });
        }
        if features.len() != labels.len() * dim {
            return Err(Error::Shape(format!(
                "{} feature values for {} rows of width {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                column: pos % dim,
            });
        }
        Ok(Self {
            features,
            labels,
            dim,
        })
    }

    pub fn from_rows(rows: &[Vec<T>], labels: Vec<Label>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("ragged rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Self::new(rows.concat(), dim, labels)
    }

    /// Number of sample units.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    /// Indices of positive units.
    pub fn positives(&self) -> Vec<usize> {
        self.indices_of(Label::Positive)
    }

    /// Indices of negative units.
    pub fn negatives(&self) -> Vec<usize> {
        self.indices_of(Label::Negative)
    }

    fn indices_of(&self, which: Label) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == which)
            .map(|(i, _)| i)
            .collect()
    }

    /// `(n_pos, n_neg)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        (pos, self.len() - pos)
    }

    /// Removes the `excluded` rows, keeping the rest in order.
    pub fn subset_excluding(&self, excluded: &[usize]) -> Result<Subset<T>> {
        let m = self.len();
        let mut drop = vec![false; m];
        for &index in excluded {
            if index >= m {
                return Err(Error::IndexOutOfRange { index, m });
            }
            drop[index] = true;
        }
        let original: Vec<usize> = (0..m).filter(|&i| !drop[i]).collect();
        if original.is_empty() {
            return Err(Error::ExcludeAll(m));
        }
        Ok(Subset {
            data: self.select(&original)?,
            original,
        })
    }

    /// Dataset made of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let m = self.len();
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &index in indices {
            if index >= m {
                return Err(Error::IndexOutOfRange { index, m });
            }
            features.extend_from_slice(self.row(index));
            labels.push(self.labels[index]);
        }
        Self::new(features, self.dim, labels)
    }

    /// Copy with every label flipped.
    pub fn with_flipped_labels(&self) -> Self {
        Self {
            features: self.features.clone(),
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
            dim: self.dim,
        }
    }

    pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file, label_column)
    }

    /// Parses a headed CSV. The label column may use `{0, 1}` or `{-1, 1}`
    /// (0 maps to negative); every other column must be numeric.
    pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let label_at = headers
            .iter()
            .position(|h| h.trim() == label_column)
            .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
        let dim = headers.len() - 1;

        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut codes = BTreeSet::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (col, cell) in record.iter().enumerate() {
                let cell = cell.trim();
                if col == label_at {
                    let (label, code) = parse_label(cell).ok_or_else(|| Error::InvalidLabel {
                        row,
                        value: cell.to_string(),
                    })?;
                    codes.insert(code);
                    if codes.contains(&0) && codes.contains(&-1) {
                        return Err(Error::InvalidLabel {
                            row,
                            value: cell.to_string(),
                        });
                    }
                    labels.push(label);
                } else {
                    let value: T = cell.parse().map_err(|_| Error::NonNumeric {
                        row,
                        column: headers[col].to_string(),
                        value: cell.to_string(),
                    })?;
                    features.push(value);
                }
            }
        }
        if labels.len() < 2 {
            return Err(Error::TooFewRows {
                got: labels.len(),
                need: 2,
            });
        }
        Self::new(features, dim, labels)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(file, label_column)
    }

    /// Writes features as `x0..x{d-1}` followed by the label column (`1`/`0`).
    /// Values use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim).map(|c| format!("x{c}")).collect();
        header.push(label_column.to_string());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.dim + 1);
        for (row, label) in self.rows().zip(&self.labels) {
            record.clear();
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(if label.is_positive() { "1" } else { "0" }.to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn parse_label(cell: &str) -> Option<(Label, i8)> {
    let v: f64 = cell.parse().ok()?;
    if v == 1.0 {
        Some((Label::Positive, 1))
    } else if v == 0.0 {
        Some((Label::Negative, 0))
    } else if v == -1.0 {
        Some((Label::Negative, -1))
    } else {
        None
    }
}
