//! Scalar-weight grid search baselines: K-fold cross validation and
//! information criteria, plus a coordinate-descent lasso used only by the
//! lasso CV baseline.
//!
//! Grid values are per-sample weights. A model fitted on `n` rows uses the
//! penalty weight `n · λ`, so the same grid means the same amount of
//! shrinkage at every sample size.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{complement, kfold_indices};
use crate::error::{Error, Result};
use crate::ggm::{heldout_nll, solve_ggm, GgmProblem};
use crate::linalg::{Matrix, Vector};
use crate::ridge::{solve_ridge, RidgeProblem, RidgeSolution};
use crate::types::Lambda;

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Spacing {
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "grid needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self {
            lo,
            hi,
            count,
            spacing: Spacing::Logarithmic,
        })
    }
}

impl Default for GridSpec {
    /// 20 points over `[1e-4, 1]`.
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1.0,
            count: 20,
            spacing: Spacing::Logarithmic,
        }
    }
}

/// Geometric progression from `lo` to `hi` inclusive.
pub fn grid_points(spec: &GridSpec) -> Vec<f64> {
    let last = spec.count - 1;
    let ratio = spec.hi / spec.lo;
    (0..spec.count)
        .map(|i| match i {
            0 => spec.lo,
            i if i == last => spec.hi,
            i => spec.lo * ratio.powf(i as f64 / last as f64),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub lambda: f64,
    pub index: usize,
    pub scores: Vec<f64>,
}

/// First minimum wins, so ties resolve to the smaller weight.
fn select(grid: &[f64], scores: Vec<f64>) -> Result<Selection> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        if best.is_none_or(|b| *s < scores[b]) {
            best = Some(i);
        }
    }
    let index = best.ok_or_else(|| Error::Numerical("every grid score is NaN".into()))?;
    Ok(Selection {
        lambda: grid[index],
        index,
        scores,
    })
}

/// A model family indexed by a scalar weight that can be refit on row
/// subsets.
pub trait CvModel: Sync {
    fn n(&self) -> usize;

    /// Fits on `train` with per-sample weight `lambda` and returns the
    /// held-out negative log-likelihood summed over `test`.
    fn heldout_nll(&self, train: &[usize], test: &[usize], lambda: f64) -> Result<f64>;

    /// [`CvModel::heldout_nll`] for every grid weight on one split. Models
    /// with cheap warm starts override this to walk the path.
    fn heldout_path(&self, train: &[usize], test: &[usize], grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&l| self.heldout_nll(train, test, l)).collect()
    }
}

/// Held-out NLL per sample for every grid point; folds run in parallel.
/// Ties go to the smaller weight.
pub fn kfold_cv_select<M: CvModel + ?Sized>(
    model: &M,
    grid: &[f64],
    k: usize,
    seed: u64,
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let n = model.n();
    let folds = kfold_indices(n, k, seed)?;
    if folds.iter().any(Vec::is_empty) {
        return Err(Error::InvalidInput("a fold has no rows".into()));
    }
    let trains: Vec<Vec<usize>> = folds.iter().map(|f| complement(n, f)).collect();
    let per_fold: Vec<Vec<f64>> = trains
        .par_iter()
        .zip(folds.par_iter())
        .map(|(train, test)| model.heldout_path(train, test, grid))
        .collect::<Result<_>>()?;
    let scores = (0..grid.len())
        .map(|i| per_fold.iter().map(|f| f[i]).sum::<f64>() / n as f64)
        .collect();
    select(grid, scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Criterion {
    Aic,
    Bic,
    /// BIC plus `2γ log C(P, k)` for a model with `k` of `P` candidate terms.
    ExtendedBic {
        gamma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IcTerms {
    pub nll: f64,
    pub df: f64,
    /// `(selected, candidates)` for the extended BIC; `None` when the model
    /// has no discrete support.
    pub support: Option<(usize, usize)>,
}

pub trait IcModel: Sync {
    fn n(&self) -> usize;

    /// Fit on all rows with per-sample weight `lambda`.
    fn ic_terms(&self, lambda: f64) -> Result<IcTerms>;
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

pub fn ic_score(terms: &IcTerms, n: usize, criterion: Criterion) -> f64 {
    let base = 2.0 * terms.nll;
    match criterion {
        Criterion::Aic => base + 2.0 * terms.df,
        Criterion::Bic => base + (n as f64).ln() * terms.df,
        Criterion::ExtendedBic { gamma } => {
            let extra = terms
                .support
                .map_or(0.0, |(k, p)| 2.0 * gamma * ln_binomial(p, k.min(p)));
            base + (n as f64).ln() * terms.df + extra
        }
    }
}

/// `argmin_λ 2·NLL(θ̂_λ) + penalty · df(λ)`; ties go to the smaller weight.
pub fn ic_select<M: IcModel + ?Sized>(model: &M, grid: &[f64], criterion: Criterion) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let n = model.n();
    let scores: Result<Vec<f64>> = grid
        .par_iter()
        .map(|&l| model.ic_terms(l).map(|t| ic_score(&t, n, criterion)))
        .collect();
    select(grid, scores?)
}

fn subset(x: &Matrix, y: &Vector, idx: &[usize]) -> (Matrix, Vector) {
    let xs = Matrix::from_fn(idx.len(), x.ncols(), |i, j| x[(idx[i], j)]);
    let ys = Vector::from_fn(idx.len(), |i, _| y[idx[i]]);
    (xs, ys)
}

fn gaussian_nll(residuals: impl Iterator<Item = f64>, sigma2: f64) -> f64 {
    residuals
        .map(|r| 0.5 * (r * r / sigma2 + LOG_2PI + sigma2.ln()))
        .sum()
}

/// Scalar ridge: `(C + nλI) β = Xᵀy`.
#[derive(Debug, Clone)]
pub struct RidgeFamily {
    pub x: Matrix,
    pub y: Vector,
}

impl RidgeFamily {
    pub fn new(x: Matrix, y: Vector) -> Self {
        Self { x, y }
    }

    fn fit_rows(&self, x: Matrix, y: Vector, lambda: f64) -> Result<(RidgeProblem, RidgeSolution)> {
        let n = x.nrows() as f64;
        let p = x.ncols();
        let problem = RidgeProblem::with_default_bounds(x, y)?;
        let sol = solve_ridge(&problem, &Lambda::fixed(lambda * n, p)?)?;
        Ok((problem, sol))
    }

    pub fn fit(&self, lambda: f64) -> Result<RidgeSolution> {
        Ok(self.fit_rows(self.x.clone(), self.y.clone(), lambda)?.1)
    }
}

impl CvModel for RidgeFamily {
    fn n(&self) -> usize {
        self.x.nrows()
    }

    fn heldout_nll(&self, train: &[usize], test: &[usize], lambda: f64) -> Result<f64> {
        let (xt, yt) = subset(&self.x, &self.y, train);
        let (_, sol) = self.fit_rows(xt, yt, lambda)?;
        let (xv, yv) = subset(&self.x, &self.y, test);
        let resid = &yv - &xv * Vector::from_column_slice(&sol.beta);
        Ok(gaussian_nll(resid.iter().copied(), sol.sigma2))
    }
}

impl IcModel for RidgeFamily {
    fn n(&self) -> usize {
        self.x.nrows()
    }

    fn ic_terms(&self, lambda: f64) -> Result<IcTerms> {
        let (problem, sol) = self.fit_rows(self.x.clone(), self.y.clone(), lambda)?;
        Ok(IcTerms {
            nll: problem.negative_log_likelihood(&sol.beta, sol.sigma2)?,
            // the noise variance is one more free parameter
            df: problem.effective_df(lambda * problem.n() as f64)? + 1.0,
            support: None,
        })
    }
}

const LASSO_GAP_TOL: f64 = 1e-5;
const LASSO_MAX_SWEEPS: usize = 100_000;

/// Cyclic coordinate descent for `(1/2n)‖y − Xβ‖² + α‖β‖₁`.
///
/// Without a warm start the solution is reached along a geometric path of
/// weights from `α_max = max_j |x_jᵀy|/n` down to `α`, each stage warm
/// started from the previous one. A stage stops once the duality gap falls
/// below `1e-5 · ‖y‖²/(2n)`, or once the primal objective stops decreasing
/// by more than `1e-12` relative over a check interval.
pub fn lasso_cd(x: &Matrix, y: &Vector, alpha: f64, warm: Option<&[f64]>) -> Result<Vec<f64>> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
            context: "target vs design rows",
        });
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
    }
    let nf = n as f64;
    let col_sq: Vec<f64> = x.column_iter().map(|c| c.norm_squared() / nf).collect();
    if let Some(w) = warm.filter(|w| w.len() == p) {
        return lasso_stage(x, y, &col_sq, alpha, w.to_vec());
    }
    let alpha_max = x.column_iter().map(|c| c.dot(y).abs() / nf).fold(0.0, f64::max);
    let mut beta = vec![0.0; p];
    if alpha >= alpha_max {
        return Ok(beta);
    }
    let floor = alpha.max(alpha_max * 1e-12);
    let stages = ((alpha_max / floor).log10() * PATH_STAGES_PER_DECADE)
        .ceil()
        .max(1.0) as usize;
    let ratio = (floor / alpha_max).powf(1.0 / stages as f64);
    let mut a = alpha_max;
    for _ in 0..stages.saturating_sub(1) {
        a *= ratio;
        beta = lasso_stage(x, y, &col_sq, a, beta)?;
    }
    lasso_stage(x, y, &col_sq, alpha, beta)
}

const PATH_STAGES_PER_DECADE: f64 = 5.0;
const GAP_CHECK_EVERY: usize = 5;

/// Primal objective and duality gap at `β` with the residual `r = y − Xβ`.
fn lasso_duality_gap(x: &Matrix, y: &Vector, beta: &[f64], resid: &Vector, alpha: f64) -> (f64, f64) {
    let nf = x.nrows() as f64;
    let primal = resid.norm_squared() / (2.0 * nf) + alpha * beta.iter().map(|b| b.abs()).sum::<f64>();
    let corr = (x.transpose() * resid).amax() / nf;
    let s = if corr > alpha { alpha / corr } else { 1.0 };
    // dual point ν = s r / n; D(ν) = ‖y‖²/(2n) − (n/2)‖ν − y/n‖²
    let diff = resid * (s / nf) - y / nf;
    let dual = y.norm_squared() / (2.0 * nf) - 0.5 * nf * diff.norm_squared();
    (primal, primal - dual)
}

fn lasso_stage(x: &Matrix, y: &Vector, col_sq: &[f64], alpha: f64, mut beta: Vec<f64>) -> Result<Vec<f64>> {
    let nf = x.nrows() as f64;
    let tol = LASSO_GAP_TOL * (y.norm_squared() / (2.0 * nf)).max(f64::MIN_POSITIVE);
    let mut resid = y - x * Vector::from_column_slice(&beta);
    let mut gap = f64::INFINITY;
    let mut last_primal = f64::INFINITY;
    for sweep in 0..LASSO_MAX_SWEEPS {
        for j in 0..beta.len() {
            if col_sq[j] == 0.0 {
                beta[j] = 0.0;
                continue;
            }
            let col = x.column(j);
            let rho = col.dot(&resid) / nf + col_sq[j] * beta[j];
            let new = soft_threshold(rho, alpha) / col_sq[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                resid.axpy(-delta, &col, 1.0);
                beta[j] = new;
            }
        }
        if sweep % GAP_CHECK_EVERY == 0 {
            let (primal, g) = lasso_duality_gap(x, y, &beta, &resid, alpha);
            gap = g;
            // an ill-conditioned active set can leave a gap floor above `tol`
            // once the primal has stopped moving in floating point
            if gap <= tol || last_primal - primal <= 1e-12 * primal.abs() {
                return Ok(beta);
            }
            last_primal = primal;
        }
    }
    Err(Error::Numerical(format!(
        "lasso did not converge in {LASSO_MAX_SWEEPS} sweeps at alpha = {alpha} (duality gap {gap:e})"
    )))
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct LassoFamily {
    pub x: Matrix,
    pub y: Vector,
}

impl LassoFamily {
    pub fn new(x: Matrix, y: Vector) -> Self {
        Self { x, y }
    }

    /// Coefficients and the residual variance on the fitted rows.
    pub fn fit(&self, alpha: f64) -> Result<(Vec<f64>, f64)> {
        fit_lasso(&self.x, &self.y, alpha)
    }
}

fn fit_lasso(x: &Matrix, y: &Vector, alpha: f64) -> Result<(Vec<f64>, f64)> {
    let beta = lasso_cd(x, y, alpha, None)?;
    Ok((beta.clone(), lasso_sigma2(x, y, &beta)))
}

fn lasso_sigma2(x: &Matrix, y: &Vector, beta: &[f64]) -> f64 {
    let rss = (y - x * Vector::from_column_slice(&beta)).norm_squared();
    (rss / x.nrows() as f64).max(crate::ridge::DEFAULT_SIGMA_BOUNDS.0)
}

impl CvModel for LassoFamily {
    fn n(&self) -> usize {
        self.x.nrows()
    }

    fn heldout_nll(&self, train: &[usize], test: &[usize], alpha: f64) -> Result<f64> {
        let (xt, yt) = subset(&self.x, &self.y, train);
        let (beta, sigma2) = fit_lasso(&xt, &yt, alpha)?;
        let (xv, yv) = subset(&self.x, &self.y, test);
        let resid = &yv - &xv * Vector::from_column_slice(&beta);
        Ok(gaussian_nll(resid.iter().copied(), sigma2))
    }

    /// Walks the grid from the largest weight down, warm starting each fit.
    fn heldout_path(&self, train: &[usize], test: &[usize], grid: &[f64]) -> Result<Vec<f64>> {
        let (xt, yt) = subset(&self.x, &self.y, train);
        let (xv, yv) = subset(&self.x, &self.y, test);
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
        let mut out = vec![0.0; grid.len()];
        let mut beta: Option<Vec<f64>> = None;
        for i in order {
            let b = lasso_cd(&xt, &yt, grid[i], beta.as_deref())?;
            let resid = &yv - &xv * Vector::from_column_slice(&b);
            out[i] = gaussian_nll(resid.iter().copied(), lasso_sigma2(&xt, &yt, &b));
            beta = Some(b);
        }
        Ok(out)
    }
}

/// Graphical model with one shared edge weight `n · λ` on every pair.
#[derive(Debug, Clone)]
pub struct GgmFamily {
    pub data: Matrix,
    pub radius: Option<f64>,
}

impl GgmFamily {
    pub fn new(data: Matrix) -> Self {
        Self { data, radius: None }
    }

    pub fn fit_rows(&self, data: &Matrix, lambda: f64) -> Result<(GgmProblem, Matrix)> {
        let problem = GgmProblem::from_data(data, self.radius)?;
        let m = problem.m();
        let w = Matrix::from_fn(
            m,
            m,
            |i, j| if i == j { 0.0 } else { lambda * problem.n() as f64 },
        );
        let est = solve_ggm(&problem, &w, None)?;
        Ok((problem, est.theta))
    }

    pub fn fit(&self, lambda: f64) -> Result<Matrix> {
        Ok(self.fit_rows(&self.data, lambda)?.1)
    }
}

fn rows_of(data: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), data.ncols(), |i, j| data[(idx[i], j)])
}

impl CvModel for GgmFamily {
    fn n(&self) -> usize {
        self.data.nrows()
    }

    fn heldout_nll(&self, train: &[usize], test: &[usize], lambda: f64) -> Result<f64> {
        let (_, theta) = self.fit_rows(&rows_of(&self.data, train), lambda)?;
        let xv = rows_of(&self.data, test);
        heldout_nll(&theta, &(xv.transpose() * &xv), test.len())
    }
}

impl IcModel for GgmFamily {
    fn n(&self) -> usize {
        self.data.nrows()
    }

    fn ic_terms(&self, lambda: f64) -> Result<IcTerms> {
        let (problem, theta) = self.fit_rows(&self.data, lambda)?;
        let df = problem.effective_df(&theta);
        let m = problem.m();
        Ok(IcTerms {
            nll: problem.negative_log_likelihood(&theta)?,
            df: df as f64,
            support: Some((df - m, m * (m - 1) / 2)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synth_regression, SynthSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn default_grid() {
        let g = grid_points(&GridSpec::default());
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[19], 1.0);
        let r = 10f64.powf(4.0 / 19.0);
        for w in g.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
        assert_eq!(grid_points(&GridSpec::default()), g);
    }

    #[test]
    fn two_point_grid_and_validation() {
        assert_eq!(grid_points(&GridSpec::new(0.5, 2.0, 2).unwrap()), vec![0.5, 2.0]);
        assert!(GridSpec::new(1.0, 1.0, 5).is_err());
        assert!(GridSpec::new(1.0, 2.0, 1).is_err());
        assert!(GridSpec::new(0.0, 2.0, 3).is_err());
    }

    struct Constant;

    impl CvModel for Constant {
        fn n(&self) -> usize {
            20
        }
        fn heldout_nll(&self, _: &[usize], test: &[usize], _: f64) -> Result<f64> {
            Ok(test.len() as f64)
        }
    }

    impl IcModel for Constant {
        fn n(&self) -> usize {
            20
        }
        fn ic_terms(&self, lambda: f64) -> Result<IcTerms> {
            // df decreases with λ, NLL constant
            Ok(IcTerms {
                nll: 3.0,
                df: 1.0 / lambda,
                support: None,
            })
        }
    }

    #[test]
    fn single_point_and_ties() {
        assert_eq!(kfold_cv_select(&Constant, &[0.3], 5, 1).unwrap().lambda, 0.3);
        assert_eq!(
            kfold_cv_select(&Constant, &[0.1, 0.2, 0.3], 5, 1).unwrap().lambda,
            0.1
        );
        assert_eq!(ic_select(&Constant, &[0.3], Criterion::Aic).unwrap().lambda, 0.3);
        // with constant NLL the df rule alone decides: smallest df, i.e. largest λ here
        assert_eq!(
            ic_select(&Constant, &[0.1, 0.2, 0.3], Criterion::Bic)
                .unwrap()
                .lambda,
            0.3
        );
    }

    #[test]
    fn binomial_log() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(7, 0), 0.0);
        assert!((ln_binomial(7, 7)).abs() < 1e-12);
    }

    #[test]
    fn lasso_orthogonal_design_soft_thresholds() {
        // XᵀX/n = I  =>  β_j = S(xⱼᵀy/n, α)
        let n = 4;
        let x = Matrix::from_row_slice(n, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let y = Vector::from_vec(vec![3.0, 1.0, -1.0, -2.0]);
        let beta = lasso_cd(&x, &y, 0.5, None).unwrap();
        let z0 = x.column(0).dot(&y) / 4.0;
        let z1 = x.column(1).dot(&y) / 4.0;
        assert!((beta[0] - soft_threshold(z0, 0.5)).abs() < 1e-12);
        assert!((beta[1] - soft_threshold(z1, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn lasso_underdetermined_small_alpha() {
        let d = gen_synth_regression(&SynthSpec::new(27, false, 1)).unwrap();
        let beta = lasso_cd(&d.x, &d.y, 1e-4, None).unwrap();
        let r = &d.y - &d.x * Vector::from_column_slice(&beta);
        for j in 0..beta.len() {
            assert!((d.x.column(j).dot(&r) / 27.0).abs() <= 1e-4 + 1e-3);
        }
    }

    #[test]
    fn lasso_kkt() {
        let d = gen_synth_regression(&SynthSpec::new(40, false, 2)).unwrap();
        let alpha = 0.1;
        let beta = lasso_cd(&d.x, &d.y, alpha, None).unwrap();
        let r = &d.y - &d.x * Vector::from_column_slice(&beta);
        let (_, gap) = lasso_duality_gap(&d.x, &d.y, &beta, &r, alpha);
        assert!(gap <= LASSO_GAP_TOL * d.y.norm_squared() / 80.0);
        for (j, b) in beta.iter().enumerate() {
            let g = d.x.column(j).dot(&r) / 40.0;
            if *b != 0.0 {
                assert!((g - alpha * b.signum()).abs() < 1e-3);
            } else {
                assert!(g.abs() <= alpha + 1e-3);
            }
        }
    }

    #[test]
    fn cv_is_deterministic_and_interior_on_strong_signal() {
        let mut picks = Vec::new();
        let grid = grid_points(&GridSpec::new(1e-4, 1e2, 20).unwrap());
        for seed in 0..20 {
            let d = gen_synth_regression(&SynthSpec {
                noise_sd: 0.5,
                ..SynthSpec::new(30, false, seed)
            })
            .unwrap();
            let fam = RidgeFamily::new(d.x, d.y);
            let a = kfold_cv_select(&fam, &grid, 10, seed).unwrap();
            let b = kfold_cv_select(&fam, &grid, 10, seed).unwrap();
            assert_eq!(a.index, b.index);
            picks.push(a.index);
        }
        picks.sort_unstable();
        let median = picks[picks.len() / 2];
        assert!(median > 0 && median < grid.len() - 1, "median index {median}");
    }

    #[test]
    fn bic_shrinks_at_least_as_much_as_cv_on_noise() {
        let grid = grid_points(&GridSpec::new(1e-4, 1e2, 20).unwrap());
        let mut bic = Vec::new();
        let mut cv = Vec::new();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Matrix::from_fn(40, 10, |_, _| StandardNormal.sample(&mut rng));
            let y = Vector::from_fn(40, |_, _| StandardNormal.sample(&mut rng));
            let fam = RidgeFamily::new(x, y);
            bic.push(ic_select(&fam, &grid, Criterion::Bic).unwrap().lambda);
            cv.push(kfold_cv_select(&fam, &grid, 10, seed).unwrap().lambda);
        }
        bic.sort_by(f64::total_cmp);
        cv.sort_by(f64::total_cmp);
        assert!(bic[10] >= cv[10], "bic {} cv {}", bic[10], cv[10]);
    }

    #[test]
    fn ggm_family_selects() {
        let x = crate::ggm::double_ring_sample(6, 60, 1).unwrap();
        let fam = GgmFamily::new(x);
        let grid = grid_points(&GridSpec::default());
        let cv = kfold_cv_select(&fam, &grid, 5, 0).unwrap();
        assert!(grid.contains(&cv.lambda));
        for c in [
            Criterion::Aic,
            Criterion::Bic,
            Criterion::ExtendedBic { gamma: 0.5 },
        ] {
            let s = ic_select(&fam, &grid, c).unwrap();
            assert!(s.scores.iter().all(|v| v.is_finite()));
        }
    }
}
