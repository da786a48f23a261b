//! Comparison harness: method registries, per-cell runners and the results
//! table writer.
//!
//! A ridge cell `(method, n, seed)` draws `round(n / 0.9)` rows, splits them
//! into 10 seeded outer folds (so each fit sees about `n` rows and 10% of
//! the sample is held out) and reports the RMSE pooled over all held-out
//! predictions. A graphical-model cell draws `n` rows from the double ring
//! and reports `KL(Θ* ‖ Θ̂)`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::baselines::{
    grid_points, ic_select, kfold_cv_select, Criterion, GgmFamily, GridSpec, LassoFamily, RidgeFamily,
};
use crate::data::{complement, gen_synth_regression, kfold_indices, RegressionDataset, SynthSpec};
use crate::error::{Error, Result};
use crate::ggm::{self, double_ring_precision, double_ring_sample, kl_gaussian, GgmProblem};
use crate::linalg::Matrix;
use crate::mdlrs::{fit, StopRule};
use crate::ridge::{self, predict, RidgeNormalizer, RidgeProblem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub method: String,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    pub metric: f64,
    pub wall_time_ms: f64,
    pub extra: BTreeMap<String, Value>,
}

macro_rules! method_enum {
    ($name:ident { $($variant:ident => $id:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn id(self) -> &'static str {
                match self {
                    $($name::$variant => $id),+
                }
            }

            pub fn parse(s: &str) -> Result<Self> {
                match s {
                    $($id => Ok($name::$variant),)+
                    other => Err(Error::InvalidInput(format!(
                        "unknown method '{other}'; registered methods: {}",
                        Self::ALL.iter().map(|m| m.id()).collect::<Vec<_>>().join(", ")
                    ))),
                }
            }
        }
    };
}

method_enum!(RidgeMethod {
    MdlrsFull => "mdlrs-full",
    MdlrsDiag => "mdlrs-diag",
    CvRidge => "cv-ridge",
    BicRidge => "bic-ridge",
    CvLasso => "cv-lasso",
});

method_enum!(GgmMethod {
    Mdlrs => "mdlrs",
    CvGrid => "cv-grid",
    AicGrid => "aic-grid",
    BicGrid => "bic-grid",
    EbicGrid => "ebic-grid",
});

/// Parses a comma-separated method list, keeping registry order.
pub fn parse_methods<M: Copy + Ord>(list: &str, parse: impl Fn(&str) -> Result<M>) -> Result<Vec<M>> {
    let mut out: Vec<M> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidInput("no methods selected".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RidgeConfig {
    pub methods: Vec<RidgeMethod>,
    pub grid: GridSpec,
    pub outer_folds: usize,
    pub cv_folds: usize,
    pub stop: StopRule,
    pub timing: bool,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            methods: RidgeMethod::ALL.to_vec(),
            grid: GridSpec::default(),
            outer_folds: 10,
            cv_folds: 10,
            stop: StopRule::default(),
            timing: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum RidgeSource {
    Synthetic { correlated: bool, noise_sd: f64 },
    Dataset(RegressionDataset),
}

impl RidgeSource {
    fn draw(&self, n: usize, seed: u64) -> Result<RegressionDataset> {
        let total = ((n as f64) / 0.9).round() as usize;
        match self {
            RidgeSource::Synthetic { correlated, noise_sd } => gen_synth_regression(&SynthSpec {
                noise_sd: *noise_sd,
                ..SynthSpec::new(total, *correlated, seed)
            }),
            RidgeSource::Dataset(d) => {
                if total > d.n() {
                    return Err(Error::InvalidInput(format!(
                        "n = {n} needs {total} rows but the dataset has {}",
                        d.n()
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut idx = sample(&mut rng, d.n(), total).into_vec();
                idx.sort_unstable();
                let (x, y) = d.rows(&idx);
                Ok(RegressionDataset {
                    x,
                    y,
                    meta: d.meta.clone(),
                })
            }
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

fn summarize(values: &[f64]) -> Value {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let median = if v.is_empty() { f64::NAN } else { v[v.len() / 2] };
    json!({
        "min": v.first().copied().unwrap_or(f64::NAN),
        "median": median,
        "max": v.last().copied().unwrap_or(f64::NAN),
    })
}

/// Pooled held-out RMSE of one ridge method on one `(n, seed)` cell.
pub fn run_ridge_cell(
    source: &RidgeSource,
    method: RidgeMethod,
    n: usize,
    seed: u64,
    cfg: &RidgeConfig,
) -> Result<ExperimentResult> {
    let data = source.draw(n, seed)?;
    let total = data.n();
    let folds = kfold_indices(total, cfg.outer_folds, seed)?;
    let grid = grid_points(&cfg.grid);

    let (outcome, ms) = timed(|| {
        let mut sq = 0.0;
        let mut selected = Vec::new();
        let mut iterations = Vec::new();
        for (f, test) in folds.iter().enumerate() {
            let train = complement(total, test);
            let (xt, yt) = data.rows(&train);
            let (xv, yv) = data.rows(test);
            let inner_seed = seed.wrapping_mul(1000).wrapping_add(f as u64);
            let beta: Vec<f64> = match method {
                RidgeMethod::MdlrsFull | RidgeMethod::MdlrsDiag => {
                    let variant = if method == RidgeMethod::MdlrsFull {
                        RidgeNormalizer::Full
                    } else {
                        RidgeNormalizer::Diagonal
                    };
                    let problem = RidgeProblem::with_default_bounds(xt, yt)?.with_normalizer(variant);
                    let fitted = fit(
                        &problem,
                        &ridge::default_box(problem.p())?.geometric_center(),
                        cfg.stop,
                    )?;
                    let w = fitted.lambda.weights();
                    selected.push(w.iter().map(|l| l.ln()).sum::<f64>() / w.len() as f64);
                    iterations.push(fitted.iterations() as f64);
                    fitted.theta.beta
                }
                RidgeMethod::CvRidge | RidgeMethod::BicRidge => {
                    let fam = RidgeFamily::new(xt, yt);
                    let sel = if method == RidgeMethod::CvRidge {
                        kfold_cv_select(&fam, &grid, cfg.cv_folds, inner_seed)?
                    } else {
                        ic_select(&fam, &grid, Criterion::Bic)?
                    };
                    selected.push(sel.lambda.ln());
                    fam.fit(sel.lambda)?.beta
                }
                RidgeMethod::CvLasso => {
                    let fam = LassoFamily::new(xt, yt);
                    let sel = kfold_cv_select(&fam, &grid, cfg.cv_folds, inner_seed)?;
                    selected.push(sel.lambda.ln());
                    fam.fit(sel.lambda)?.0
                }
            };
            let pred = predict(&beta, &xv)?;
            sq += pred
                .iter()
                .zip(yv.iter())
                .map(|(p, t)| (p - t).powi(2))
                .sum::<f64>();
        }
        Ok(((sq / total as f64).sqrt(), selected, iterations))
    })?;
    let (metric, selected, iterations) = outcome;

    let mut extra = BTreeMap::new();
    extra.insert("total_rows".into(), json!(total));
    extra.insert("log_lambda".into(), summarize(&selected));
    if !iterations.is_empty() {
        extra.insert("iterations".into(), summarize(&iterations));
    }
    Ok(ExperimentResult {
        method: method.id().into(),
        n,
        dim: data.p(),
        seed,
        metric,
        wall_time_ms: if cfg.timing { ms } else { 0.0 },
        extra,
    })
}

pub fn run_ridge(
    source: &RidgeSource,
    ns: &[usize],
    seeds: &[u64],
    cfg: &RidgeConfig,
) -> Result<Vec<ExperimentResult>> {
    let cells: Vec<(RidgeMethod, usize, u64)> = cfg
        .methods
        .iter()
        .flat_map(|&m| {
            ns.iter()
                .flat_map(move |&n| seeds.iter().map(move |&s| (m, n, s)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(m, n, s)| run_ridge_cell(source, m, n, s, cfg))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GgmConfig {
    pub methods: Vec<GgmMethod>,
    pub grid: GridSpec,
    pub cv_folds: usize,
    pub ebic_gamma: f64,
    pub radius: Option<f64>,
    pub stop: StopRule,
    pub timing: bool,
}

impl Default for GgmConfig {
    fn default() -> Self {
        Self {
            methods: GgmMethod::ALL.to_vec(),
            grid: GridSpec::default(),
            cv_folds: 10,
            ebic_gamma: 0.5,
            radius: None,
            stop: StopRule::default(),
            timing: false,
        }
    }
}

/// Seed of the data stream for a `(m, n, seed)` cell.
pub fn ggm_data_seed(m: usize, n: usize, seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((m as u64) << 40) ^ (n as u64)
}

pub fn run_ggm_cell(
    method: GgmMethod,
    m: usize,
    n: usize,
    seed: u64,
    cfg: &GgmConfig,
) -> Result<ExperimentResult> {
    let truth = double_ring_precision(m)?;
    let data = double_ring_sample(m, n, ggm_data_seed(m, n, seed))?;
    let grid = grid_points(&cfg.grid);
    let mut extra = BTreeMap::new();

    let (theta, ms) = timed(|| -> Result<Matrix> {
        match method {
            GgmMethod::Mdlrs => {
                let problem = GgmProblem::from_data(&data, cfg.radius)?;
                let fitted = fit(&problem, &ggm::default_box(m)?.geometric_center(), cfg.stop)?;
                let logs: Vec<f64> = fitted.lambda.weights().iter().map(|l| l.ln()).collect();
                extra.insert("log_lambda".into(), summarize(&logs));
                extra.insert("iterations".into(), json!(fitted.iterations()));
                extra.insert("radius".into(), json!(problem.radius()));
                extra.insert("radius_ok".into(), json!(fitted.theta.radius_ok));
                extra.insert("solver_converged".into(), json!(fitted.theta.converged));
                Ok(fitted.theta.theta)
            }
            _ => {
                let fam = GgmFamily {
                    data: data.clone(),
                    radius: cfg.radius,
                };
                let sel = match method {
                    GgmMethod::CvGrid => kfold_cv_select(&fam, &grid, cfg.cv_folds, seed)?,
                    GgmMethod::AicGrid => ic_select(&fam, &grid, Criterion::Aic)?,
                    GgmMethod::BicGrid => ic_select(&fam, &grid, Criterion::Bic)?,
                    GgmMethod::EbicGrid => ic_select(
                        &fam,
                        &grid,
                        Criterion::ExtendedBic {
                            gamma: cfg.ebic_gamma,
                        },
                    )?,
                    GgmMethod::Mdlrs => unreachable!(),
                };
                extra.insert("lambda".into(), json!(sel.lambda));
                extra.insert("grid_index".into(), json!(sel.index));
                extra.insert("penalty_family".into(), json!("quadratic"));
                fam.fit(sel.lambda)
            }
        }
    })?;
    let metric = kl_gaussian(&truth, &theta)?;
    Ok(ExperimentResult {
        method: method.id().into(),
        n,
        dim: m,
        seed,
        metric,
        wall_time_ms: if cfg.timing { ms } else { 0.0 },
        extra,
    })
}

pub fn run_ggm(ms: &[usize], ns: &[usize], seeds: &[u64], cfg: &GgmConfig) -> Result<Vec<ExperimentResult>> {
    let cells: Vec<(GgmMethod, usize, usize, u64)> = cfg
        .methods
        .iter()
        .flat_map(|&meth| {
            ms.iter().flat_map(move |&m| {
                ns.iter()
                    .flat_map(move |&n| seeds.iter().map(move |&s| (meth, m, n, s)))
            })
        })
        .collect();
    cells
        .par_iter()
        .map(|&(meth, m, n, s)| run_ggm_cell(meth, m, n, s, cfg))
        .collect()
}

pub const CSV_HEADER: [&str; 7] = [
    "method",
    "n",
    "dim",
    "seed",
    "metric",
    "wall_time_ms",
    "extra_json",
];

/// Writes rows in the given order with a fixed header. Floats use Rust's
/// shortest round-trip formatting, so identical inputs give identical bytes.
pub fn write_results<W: Write>(out: W, rows: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let extra = serde_json::to_string(&r.extra).map_err(|e| Error::Data(e.to_string()))?;
        w.write_record([
            r.method.clone(),
            r.n.to_string(),
            r.dim.to_string(),
            r.seed.to_string(),
            r.metric.to_string(),
            r.wall_time_ms.to_string(),
            extra,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Median of `metric` over rows matching `method`, `n` and `dim`.
pub fn median_metric(rows: &[ExperimentResult], method: &str, n: usize, dim: usize) -> Option<f64> {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.n == n && r.dim == dim)
        .map(|r| r.metric)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}
