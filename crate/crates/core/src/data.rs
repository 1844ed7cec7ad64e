//! Dataset ingestion, whitening and sample moment aggregates.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::exec::{map_indexed, pairwise_sum, Execution};
use crate::risk::AggregatesF64;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MissingPolicy {
    /// Exclude every column that has a missing value.
    #[default]
    DropColumns,
    /// Exclude every row that has a missing value.
    DropRows,
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// `None` picks the most frequent of `,`, `;` and tab in the first line.
    pub delimiter: Option<u8>,
    pub has_header: bool,
    pub missing_tokens: Vec<String>,
    pub drop_columns: Vec<String>,
    pub missing: MissingPolicy,
    pub correlation_threshold: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: None,
            has_header: true,
            missing_tokens: vec!["?".into(), "".into(), "NA".into()],
            drop_columns: Vec::new(),
            missing: MissingPolicy::default(),
            correlation_threshold: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelatedPair {
    pub first: String,
    pub second: String,
    pub correlation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub dropped_rows: usize,
    pub dropped_columns: Vec<String>,
    pub correlated: Vec<CorrelatedPair>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub column_names: Vec<String>,
    /// n x p
    pub rows: DMatrix<f64>,
    pub report: LoadReport,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn p(&self) -> usize {
        self.rows.ncols()
    }

    /// Builds a dataset from rows already in memory.
    pub fn from_rows(column_names: Vec<String>, rows: &[Vec<f64>], threshold: f64) -> Result<Self> {
        let p = column_names.len();
        if rows.is_empty() || p == 0 {
            return Err(Error::EmptyDataset);
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Csv { line: bad as u64 + 1, message: format!("expected {p} values") });
        }
        let m = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        let mut ds = Dataset { column_names, rows: m, report: LoadReport::default() };
        ds.check_shape()?;
        ds.report.correlated = ds.correlated_pairs(threshold);
        Ok(ds)
    }

    fn check_shape(&self) -> Result<()> {
        if self.n() == 0 || self.p() == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.n() <= self.p() {
            return Err(Error::InvalidArgument(format!(
                "dataset has {} rows for {} columns; need more rows than columns",
                self.n(),
                self.p()
            )));
        }
        Ok(())
    }

    /// Column pairs whose absolute sample correlation exceeds `threshold`.
    pub fn correlated_pairs(&self, threshold: f64) -> Vec<CorrelatedPair> {
        let n = self.n() as f64;
        let means: Vec<f64> = (0..self.p()).map(|j| self.rows.column(j).sum() / n).collect();
        let centred: Vec<DVector<f64>> =
            (0..self.p()).map(|j| self.rows.column(j).map(|v| v - means[j])).collect();
        let norms: Vec<f64> = centred.iter().map(|c| c.norm()).collect();
        let mut out = Vec::new();
        for a in 0..self.p() {
            for b in a + 1..self.p() {
                if norms[a] == 0.0 || norms[b] == 0.0 {
                    continue;
                }
                let r = centred[a].dot(&centred[b]) / (norms[a] * norms[b]);
                if r.abs() > threshold {
                    out.push(CorrelatedPair {
                        first: self.column_names[a].clone(),
                        second: self.column_names[b].clone(),
                        correlation: r,
                    });
                }
            }
        }
        out
    }
}

fn sniff_delimiter(first_line: &str) -> u8 {
    let candidates = [b',', b';', b'\t'];
    candidates
        .into_iter()
        .max_by_key(|d| first_line.bytes().filter(|b| b == d).count())
        .filter(|d| first_line.as_bytes().contains(d))
        .unwrap_or(b',')
}

pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, options)
}

pub fn parse_csv(text: &str, options: &LoadOptions) -> Result<Dataset> {
    let delimiter = options.delimiter.unwrap_or_else(|| sniff_delimiter(text.lines().next().unwrap_or("")));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(options.has_header)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::Csv { line, message: e.to_string() }
    };

    let mut names: Vec<String> = if options.has_header {
        reader.headers().map_err(csv_err)?.iter().map(|h| h.trim_matches('"').to_string()).collect()
    } else {
        Vec::new()
    };
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if names.is_empty() {
            names = (1..=record.len()).map(|i| format!("x{i}")).collect();
        }
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            if options.drop_columns.iter().any(|d| d == &names[j]) {
                row.push(Some(0.0));
                continue;
            }
            if options.missing_tokens.iter().any(|t| t == field) {
                row.push(None);
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                line,
                message: format!("non-numeric value `{field}` in column `{}`", names[j]),
            })?;
            row.push(Some(v));
        }
        cells.push(row);
    }
    if let Some(unknown) = options.drop_columns.iter().find(|d| !names.contains(d)) {
        return Err(Error::InvalidArgument(format!("no column named `{unknown}`")));
    }

    let mut report = LoadReport::default();
    let mut keep_col: Vec<bool> = names.iter().map(|n| !options.drop_columns.contains(n)).collect();
    for (j, name) in names.iter().enumerate() {
        if !keep_col[j] {
            report.dropped_columns.push(name.clone());
        }
    }
    let mut keep_row = vec![true; cells.len()];
    match options.missing {
        MissingPolicy::DropColumns => {
            for j in 0..names.len() {
                if keep_col[j] && cells.iter().any(|r| r[j].is_none()) {
                    keep_col[j] = false;
                    report.dropped_columns.push(names[j].clone());
                }
            }
        }
        MissingPolicy::DropRows => {
            for (i, row) in cells.iter().enumerate() {
                if row.iter().enumerate().any(|(j, v)| keep_col[j] && v.is_none()) {
                    keep_row[i] = false;
                    report.dropped_rows += 1;
                }
            }
        }
    }
    let cols: Vec<usize> = (0..names.len()).filter(|&j| keep_col[j]).collect();
    let rows: Vec<usize> = (0..cells.len()).filter(|&i| keep_row[i]).collect();
    if cols.is_empty() || rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = DMatrix::from_fn(rows.len(), cols.len(), |i, j| cells[rows[i]][cols[j]].expect("kept cells are present"));
    let mut ds = Dataset { column_names: cols.iter().map(|&j| names[j].clone()).collect(), rows: m, report };
    ds.check_shape()?;
    ds.report.correlated = ds.correlated_pairs(options.correlation_threshold);
    Ok(ds)
}

/// Whitened principal-component scores.
#[derive(Clone, Debug)]
pub struct StandardizedMatrix {
    /// n x p, zero column means and identity second moments.
    pub scores: DMatrix<f64>,
    pub center: DVector<f64>,
    /// p x p map from centred data to scores.
    pub transform: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
    pub condition_number: f64,
}

pub fn standardize(data: &Dataset) -> Result<StandardizedMatrix> {
    let n = data.n() as f64;
    let p = data.p();
    let center = DVector::from_fn(p, |j, _| data.rows.column(j).sum() / n);
    let mut centred = data.rows.clone();
    for j in 0..p {
        let c = center[j];
        centred.column_mut(j).iter_mut().for_each(|v| *v -= c);
    }
    let cov = centred.transpose() * &centred / n;
    let eig = SymmetricEigen::new(cov);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
    let null: Vec<Vec<f64>> = (0..p)
        .filter(|&k| !(eig.eigenvalues[k] > 1e-12 * max))
        .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    if !null.is_empty() || !(max > 0.0) {
        return Err(Error::SingularCovariance { condition: condition_number, directions: null });
    }
    let mut transform = eig.eigenvectors.clone();
    for k in 0..p {
        let s = 1.0 / eig.eigenvalues[k].sqrt();
        transform.column_mut(k).iter_mut().for_each(|v| *v *= s);
    }
    let scores = &centred * &transform;
    Ok(StandardizedMatrix { scores, center, transform, eigenvalues: eig.eigenvalues, condition_number })
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (n, p) = m.shape();
    let mut out = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            out[i * p + j] = m[(i, j)];
        }
    }
    out
}

/// The three aggregates of third- and fourth-order sample moments.
pub fn sample_aggregates(std: &StandardizedMatrix) -> AggregatesF64 {
    sample_aggregates_with(std, Execution::default())
}

pub fn sample_aggregates_with(std: &StandardizedMatrix, exec: Execution) -> AggregatesF64 {
    moment_aggregates(&std.scores, exec)
}

/// Aggregates of an arbitrary score matrix (no whitening check).
pub fn moment_aggregates(scores: &DMatrix<f64>, exec: Execution) -> AggregatesF64 {
    let (n, p) = scores.shape();
    let x = row_major(scores);
    let nf = n as f64;
    let row = |t: usize| &x[t * p..(t + 1) * p];
    let sq: Vec<f64> = (0..n).map(|t| row(t).iter().map(|v| v * v).sum()).collect();

    let m1_parts: Vec<f64> = sq.iter().map(|s| s * s).collect();
    let m1 = pairwise_sum(&m1_parts) / nf;

    let v: Vec<f64> = (0..p)
        .map(|k| {
            let parts: Vec<f64> = (0..n).map(|t| sq[t] * x[t * p + k]).collect();
            pairwise_sum(&parts) / nf
        })
        .collect();
    let m2b = pairwise_sum(&v.iter().map(|a| a * a).collect::<Vec<_>>());

    let m2a = if p * p < 6 * n { m2a_tensor(&x, n, p, exec) } else { m2a_gram(&x, n, p, exec) };
    AggregatesF64 { m2a, m2b, m1 }
}

/// `sum_{ijk} m_ijk^2` from the symmetric third-moment tensor.
fn m2a_tensor(x: &[f64], n: usize, p: usize, exec: Execution) -> f64 {
    let nf = n as f64;
    let parts = map_indexed(exec, p, |i| {
        let mut acc = Vec::new();
        for j in i..p {
            for k in j..p {
                let terms: Vec<f64> = (0..n).map(|t| x[t * p + i] * x[t * p + j] * x[t * p + k]).collect();
                let m = pairwise_sum(&terms) / nf;
                let mult = match (i == j, j == k) {
                    (true, true) => 1.0,
                    (true, false) | (false, true) => 3.0,
                    (false, false) => 6.0,
                };
                acc.push(mult * m * m);
            }
        }
        pairwise_sum(&acc)
    });
    pairwise_sum(&parts)
}

/// `n^-2 sum_{t,s} (x_t . x_s)^3`.
fn m2a_gram(x: &[f64], n: usize, p: usize, exec: Execution) -> f64 {
    let parts = map_indexed(exec, n, |t| {
        let xt = &x[t * p..(t + 1) * p];
        let terms: Vec<f64> = (0..n)
            .map(|s| {
                let d: f64 = xt.iter().zip(&x[s * p..(s + 1) * p]).map(|(a, b)| a * b).sum();
                d * d * d
            })
            .collect();
        pairwise_sum(&terms)
    });
    pairwise_sum(&parts) / (n as f64 * n as f64)
}

/// Exposes both third-moment strategies for testing and benchmarking.
pub fn m2a_by(scores: &DMatrix<f64>, gram: bool, exec: Execution) -> f64 {
    let (n, p) = scores.shape();
    let x = row_major(scores);
    if gram {
        m2a_gram(&x, n, p, exec)
    } else {
        m2a_tensor(&x, n, p, exec)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub p: usize,
    #[serde(flatten)]
    pub aggregates: AggregatesF64,
    pub condition_number: f64,
    pub dropped_rows: usize,
    pub dropped_columns: Vec<String>,
    pub correlated: Vec<CorrelatedPair>,
}

/// Load, whiten and aggregate in one step.
pub fn moments_from_csv(path: &Path, options: &LoadOptions, exec: Execution) -> Result<MomentReport> {
    let ds = load_csv(path, options)?;
    let st = standardize(&ds)?;
    let aggregates = sample_aggregates_with(&st, exec);
    Ok(MomentReport {
        n: ds.n(),
        p: ds.p(),
        aggregates,
        condition_number: st.condition_number,
        dropped_rows: ds.report.dropped_rows,
        dropped_columns: ds.report.dropped_columns,
        correlated: ds.report.correlated,
    })
}
