//! Synthetic regression generators and CSV ingestion.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Rank of the latent factor space in the correlated design.
pub const LATENT_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetMeta {
    pub informative_count: usize,
    pub correlated: bool,
    pub seed: Option<u64>,
    pub standardized: bool,
    pub noise_sd: Option<f64>,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub x: Matrix,
    pub y: Vector,
    pub meta: DatasetMeta,
}

impl RegressionDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn rows(&self, idx: &[usize]) -> (Matrix, Vector) {
        let x = Matrix::from_fn(idx.len(), self.p(), |i, j| self.x[(idx[i], j)]);
        let y = Vector::from_fn(idx.len(), |i, _| self.y[idx[i]]);
        (x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthSpec {
    pub n: usize,
    pub informative: usize,
    pub irrelevant: usize,
    pub correlated: bool,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// 5 informative + 45 irrelevant features with unit noise.
    pub fn new(n: usize, correlated: bool, seed: u64) -> Self {
        Self {
            n,
            informative: 5,
            irrelevant: 45,
            correlated,
            noise_sd: 1.0,
            seed,
        }
    }

    pub fn p(&self) -> usize {
        self.informative + self.irrelevant
    }

    /// Coefficient vector: ones on the leading `informative` features.
    pub fn beta_star(&self) -> Vec<f64> {
        (0..self.p())
            .map(|j| if j < self.informative { 1.0 } else { 0.0 })
            .collect()
    }
}

/// `y = Xβ* + ε` with i.i.d. standard normal features, or `X = Z A` with
/// `Z` an `n × 10` standard normal matrix and `A` a seeded `10 × p` mixing
/// matrix in the correlated case.
pub fn gen_synth_regression(spec: &SynthSpec) -> Result<RegressionDataset> {
    if spec.n < 2 {
        return Err(Error::InvalidInput(format!("n must be >= 2, got {}", spec.n)));
    }
    if spec.p() == 0 {
        return Err(Error::InvalidInput("at least one feature is required".into()));
    }
    if !(spec.noise_sd.is_finite() && spec.noise_sd >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "noise_sd must be >= 0, got {}",
            spec.noise_sd
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = spec.p();
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let x = if spec.correlated {
        let a = Matrix::from_fn(LATENT_DIM, p, |_, _| gauss());
        let z = Matrix::from_fn(spec.n, LATENT_DIM, |_, _| gauss());
        z * a
    } else {
        Matrix::from_fn(spec.n, p, |_, _| gauss())
    };
    let beta = Vector::from_vec(spec.beta_star());
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let eps = Vector::from_fn(spec.n, |_, _| noise.sample(&mut rng));
    let y = &x * beta + eps;
    Ok(RegressionDataset {
        x,
        y,
        meta: DatasetMeta {
            informative_count: spec.informative,
            correlated: spec.correlated,
            seed: Some(spec.seed),
            standardized: false,
            noise_sd: Some(spec.noise_sd),
            feature_names: (0..p).map(|j| format!("x{j}")).collect(),
        },
    })
}

/// Reads a headed, comma-separated numeric table. Every column except
/// `target_column` becomes a feature.
pub fn load_csv(
    path: impl AsRef<Path>,
    target_column: &str,
    standardize_features: bool,
) -> Result<RegressionDataset> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, target_column, standardize_features)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    target_column: &str,
    standardize_features: bool,
) -> Result<RegressionDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let target = headers.iter().position(|h| h == target_column).ok_or_else(|| {
        Error::Data(format!(
            "target column '{target_column}' not found in header {headers:?}"
        ))
    })?;

    let mut features: Vec<f64> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "row {row}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "row {row}, column '{}': non-numeric value '{cell}'",
                    headers[col]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "row {row}, column '{}': non-finite value",
                    headers[col]
                )));
            }
            if col == target {
                y.push(v);
            } else {
                features.push(v);
            }
        }
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::Data("no data rows".into()));
    }
    let p = headers.len() - 1;
    let mut x = Matrix::from_row_slice(n, p, &features);
    let mut y = Vector::from_vec(y);
    if standardize_features {
        x = standardize(&x).0;
        let mean = y.mean();
        y.add_scalar_mut(-mean);
    }
    let feature_names = headers
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i != target)
        .map(|(_, h)| h)
        .collect();
    Ok(RegressionDataset {
        x,
        y,
        meta: DatasetMeta {
            informative_count: p,
            correlated: false,
            seed: None,
            standardized: standardize_features,
            noise_sd: None,
            feature_names,
        },
    })
}

/// Centers every column and scales it to unit (population) variance.
/// Constant columns are centered only. Returns the transformed matrix with
/// the column means and scales that were removed.
pub fn standardize(x: &Matrix) -> (Matrix, Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    let mut means = Vec::with_capacity(x.ncols());
    let mut scales = Vec::with_capacity(x.ncols());
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let var = col.norm_squared() / n;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        col /= sd;
        // second pass removes the residual mean left by rounding
        let resid = col.sum() / n;
        col.add_scalar_mut(-resid);
        means.push(mean);
        scales.push(sd);
    }
    (out, means, scales)
}

/// Seeded shuffle of `0..n` cut into `(train, test)` with
/// `round(test_fraction · n)` test rows (at least one of each).
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rows to split, got {n}"
        )));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let test = idx.split_off(n - n_test);
    Ok((idx, test))
}

/// Seeded permutation of `0..n` dealt into `k` folds whose sizes differ by
/// at most one.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("k must be >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::InvalidInput(format!("{n} rows cannot fill {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (i, v) in idx.into_iter().enumerate() {
        folds[i % k].push(v);
    }
    Ok(folds)
}

/// Complement of `fold` in `0..n`, in increasing order.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in fold {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}
