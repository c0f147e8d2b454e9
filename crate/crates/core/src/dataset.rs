//! Tabular classification data: numeric feature columns plus a final
//! label column.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    /// Class index per row, into `classes`.
    pub labels: Vec<usize>,
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|l| **l >= classes.len()) {
            return Err(Error::Data(format!("label index {bad} has no class name")));
        }
        let feature_names = (0..features.ncols()).map(|i| format!("x{i}")).collect();
        Ok(Dataset {
            features,
            labels,
            classes,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file).map_err(|e| match e {
            Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Reads CSV with a header row. Every column but the last must be
    /// numeric; the last column holds class labels, which are mapped to
    /// indices in sorted order.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Data(e.to_string()))?
            .clone();
        if headers.len() < 2 {
            return Err(Error::Data("need at least one feature column and a label column".into()));
        }
        let n_features = headers.len() - 1;
        let mut values = Vec::new();
        let mut raw_labels = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Data(e.to_string()))?;
            if record.len() != headers.len() {
                return Err(Error::Data(format!("line {}: expected {} fields", i + 2, headers.len())));
            }
            for j in 0..n_features {
                let field = record[j].trim();
                let x: f64 = field.parse().map_err(|_| {
                    Error::Data(format!("line {}, column `{}`: `{field}` is not numeric", i + 2, &headers[j]))
                })?;
                values.push(x);
            }
            raw_labels.push(record[n_features].trim().to_string());
        }
        if raw_labels.is_empty() {
            return Err(Error::Data("no data rows".into()));
        }
        let mut classes = raw_labels.clone();
        classes.sort();
        classes.dedup();
        let labels = raw_labels
            .iter()
            .map(|l| classes.binary_search(l).unwrap_or_default())
            .collect();
        let features = DMatrix::from_row_slice(raw_labels.len(), n_features, &values);
        Ok(Dataset {
            features,
            labels,
            classes,
            feature_names: headers.iter().take(n_features).map(str::to_string).collect(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.feature_names.join(",");
        out.push_str(",label\n");
        for i in 0..self.n_rows() {
            for j in 0..self.n_features() {
                out.push_str(&format!("{},", self.features[(i, j)]));
            }
            out.push_str(&self.classes[self.labels[i]]);
            out.push('\n');
        }
        out
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let features = DMatrix::from_fn(rows.len(), self.n_features(), |i, j| self.features[(rows[i], j)]);
        Dataset {
            features,
            labels: rows.iter().map(|r| self.labels[*r]).collect(),
            classes: self.classes.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// The bundled synthetic benchmark (`data/synthetic.csv`): three classes in
/// four dimensions. Class `c` is centred at `2c` on the first feature and
/// at `-c` on the second; the other two features are noise.
pub fn synthetic(rows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(rows * 4);
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let c = i % 3;
        let mut gauss = || {
            // Box-Muller
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let row = [
            2.0 * c as f64 + 0.9 * gauss(),
            -(c as f64) + 0.9 * gauss(),
            gauss(),
            gauss(),
        ];
        values.extend(row.iter().map(|x| (x * 1000.0).round() / 1000.0));
        labels.push(c);
    }
    let features = DMatrix::from_row_slice(rows, 4, &values);
    Dataset::new(features, labels, vec!["a".into(), "b".into(), "c".into()])
        .expect("synthetic data is well-formed")
}
