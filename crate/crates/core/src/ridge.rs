//! Variable-temperature ridge regression with per-coefficient penalties.
//!
//! The RERM is
//!
//! ```text
//! min_{σ² ∈ [a, b], β}  ‖y − Xβ‖² / (2σ²) + (n/2) log 2πσ² + Σ_j λ_j β_j² / (2σ²)
//! ```
//!
//! and its uLNML adds `½ log det(C + diag λ) − ½ Σ_j log λ_j` with `C = XᵀX`.
//! A diagonal variant replaces `C` by its diagonal in the normalizer.

use serde::Serialize;

use crate::convex_step::tikhonov_root;
use crate::error::{check_len, Error, Result};
use crate::linalg::{cholesky, inverse_pd, logdet_from_cholesky, Matrix, Vector};
use crate::normalizer::tikhonov_term;
use crate::types::{project_limits, BoxDomain, Interval, Lambda, PenaltyKind, RermProblem, UpperSmoothness};

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// Which normalizer bound drives the weight update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RidgeNormalizer {
    /// Exact `½ log det(C + diag λ) / det diag λ`.
    Full,
    /// `Σ_j ½ log((C_jj + λ_j) / λ_j)`.
    Diagonal,
}

#[derive(Debug, Clone)]
pub struct RidgeProblem {
    design: Matrix,
    target: Vector,
    sigma_bounds: Interval,
    gram: Matrix,
    xty: Vector,
    normalizer: RidgeNormalizer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RidgeSolution {
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub rerm_objective: f64,
}

pub const DEFAULT_SIGMA_BOUNDS: (f64, f64) = (1e-4, 1e4);

impl RidgeProblem {
    pub fn new(design: Matrix, target: Vector, sigma_bounds: Interval) -> Result<Self> {
        let (n, p) = design.shape();
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput(format!(
                "design must be non-empty, got {n}x{p}"
            )));
        }
        check_len(n, target.len(), "target vs design rows")?;
        if design.iter().chain(target.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design and target must be finite".into()));
        }
        let gram = design.transpose() * &design;
        let xty = design.transpose() * &target;
        Ok(Self {
            design,
            target,
            sigma_bounds,
            gram,
            xty,
            normalizer: RidgeNormalizer::Full,
        })
    }

    pub fn with_default_bounds(design: Matrix, target: Vector) -> Result<Self> {
        let (a, b) = DEFAULT_SIGMA_BOUNDS;
        Self::new(design, target, Interval::new(a, b)?)
    }

    pub fn with_normalizer(mut self, normalizer: RidgeNormalizer) -> Self {
        self.normalizer = normalizer;
        self
    }

    pub fn normalizer(&self) -> RidgeNormalizer {
        self.normalizer
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    pub fn sigma_bounds(&self) -> Interval {
        self.sigma_bounds
    }

    fn regularized_gram(&self, weights: &[f64]) -> Matrix {
        let mut a = self.gram.clone();
        for (j, w) in weights.iter().enumerate() {
            a[(j, j)] += w;
        }
        a
    }

    fn rss(&self, beta: &Vector) -> f64 {
        (&self.target - &self.design * beta).norm_squared()
    }

    /// `‖y − Xβ‖²/(2σ²) + (n/2) log 2πσ²`.
    pub fn negative_log_likelihood(&self, beta: &[f64], sigma2: f64) -> Result<f64> {
        check_len(self.p(), beta.len(), "beta vs design columns")?;
        if !(sigma2 > 0.0) {
            return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
        }
        let b = Vector::from_column_slice(beta);
        Ok(self.rss(&b) / (2.0 * sigma2) + 0.5 * self.n() as f64 * (LOG_2PI + sigma2.ln()))
    }

    /// Ridge degrees of freedom `tr[(C + λI)⁻¹ C]` for a scalar weight.
    pub fn effective_df(&self, lambda: f64) -> Result<f64> {
        let a = self.regularized_gram(&vec![lambda; self.p()]);
        let chol = cholesky(&a, "C + λI")?;
        Ok(chol.solve(&self.gram).trace())
    }
}

/// Joint minimizer over `(β, σ²)` for fixed weights.
///
/// `β̂ = (C + diag λ)⁻¹ Xᵀy` does not depend on σ², after which σ̂² is the
/// clamped penalized mean squared residual.
pub fn solve_ridge(problem: &RidgeProblem, lambda: &Lambda) -> Result<RidgeSolution> {
    check_len(problem.p(), lambda.dim(), "lambda vs design columns")?;
    let a = problem.regularized_gram(lambda.weights());
    let chol = cholesky(&a, "C + diag λ")?;
    let beta = chol.solve(&problem.xty);
    let rss = problem.rss(&beta);
    let pen: f64 = beta.iter().zip(lambda.weights()).map(|(b, l)| l * b * b).sum();
    let n = problem.n() as f64;
    let sigma2 = problem.sigma_bounds.clamp((rss + pen) / n);
    let rerm_objective = (rss + pen) / (2.0 * sigma2) + 0.5 * n * (LOG_2PI + sigma2.ln());
    if !rerm_objective.is_finite() {
        return Err(Error::Numerical("ridge objective is not finite".into()));
    }
    Ok(RidgeSolution {
        beta: beta.as_slice().to_vec(),
        sigma2,
        rerm_objective,
    })
}

/// `½ log det(C + diag λ) − ½ Σ log λ_j`, evaluated as
/// `½ log det(I + Λ^{-1/2} C Λ^{-1/2})` to stay non-negative in floating point.
pub fn full_log_normalizer(gram: &Matrix, weights: &[f64]) -> Result<f64> {
    let p = gram.nrows();
    check_len(p, weights.len(), "lambda vs gram")?;
    let inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let m = Matrix::from_fn(p, p, |i, j| {
        let v = gram[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 + v
        } else {
            v
        }
    });
    let chol = cholesky(&m, "I + Λ^{-1/2} C Λ^{-1/2}")?;
    Ok(0.5 * logdet_from_cholesky(&chol))
}

/// uLNML(X | λ) for the problem's normalizer variant.
pub fn ridge_ulnml(problem: &RidgeProblem, lambda: &Lambda) -> Result<f64> {
    let sol = solve_ridge(problem, lambda)?;
    Ok(sol.rerm_objective + problem.log_normalizer(lambda)?)
}

const SWEEP_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 50;

/// Cyclic coordinate minimization of
/// `Σ_j λ_j β̂_j²/(2σ̂²) + ½ log det(C + diag λ) − ½ Σ_j log λ_j`.
///
/// With `B = (C + diag λ)⁻¹`, the matrix with `λ_j` removed has
/// `[A_{-j}⁻¹]_jj = B_jj / (1 − λ_j B_jj)`, so coordinate `j` sees the scalar
/// Tikhonov problem with effective smoothness `h_j = 1/B_jj − λ_j`. `B` is
/// refreshed by Sherman–Morrison after each coordinate move and rebuilt from
/// a factorization at the start of every sweep.
pub fn ridge_convex_step(
    solution: &RidgeSolution,
    problem: &RidgeProblem,
    lambda: &Lambda,
) -> Result<Lambda> {
    check_len(problem.p(), lambda.dim(), "lambda vs design columns")?;
    let domain = lambda.domain();
    let sigma = solution.sigma2.sqrt();
    let theta_eq: Vec<f64> = solution.beta.iter().map(|b| b.abs() / sigma).collect();
    let mut w = lambda.weights().to_vec();
    let p = w.len();

    for _ in 0..MAX_SWEEPS {
        let mut b = inverse_pd(&problem.regularized_gram(&w), "C + diag λ")?;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let bjj = b[(j, j)];
            let h = (1.0 / bjj - w[j]).max(0.0);
            let new = domain.get(j).clamp(tikhonov_root(theta_eq[j], h, 1.0));
            let delta = new - w[j];
            if delta == 0.0 {
                continue;
            }
            max_change = max_change.max(delta.abs() / w[j].max(1.0));
            w[j] = new;
            let denom = 1.0 + delta * bjj;
            let col = b.column(j).clone_owned();
            b.ger(-delta / denom, &col, &col, 1.0);
        }
        if max_change < SWEEP_TOL {
            break;
        }
    }
    Ok(project_limits(&w, domain))
}

pub fn predict(beta: &[f64], design: &Matrix) -> Result<Vec<f64>> {
    check_len(design.ncols(), beta.len(), "beta vs design columns")?;
    let b = Vector::from_column_slice(beta);
    Ok((design * b).as_slice().to_vec())
}

pub fn rmse(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    check_len(truth.len(), predicted.len(), "prediction vs truth")?;
    if truth.is_empty() {
        return Err(Error::InvalidInput("rmse of empty vectors".into()));
    }
    let mse = predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mse.sqrt())
}

impl RermProblem for RidgeProblem {
    type Theta = RidgeSolution;

    fn dim_theta(&self) -> usize {
        self.p() + 1
    }

    fn dim_lambda(&self) -> usize {
        self.p()
    }

    fn solve(&self, lambda: &Lambda, _warm_start: Option<&RidgeSolution>) -> Result<RidgeSolution> {
        solve_ridge(self, lambda)
    }

    fn loss(&self, theta: &RidgeSolution) -> Result<f64> {
        self.negative_log_likelihood(&theta.beta, theta.sigma2)
    }

    fn penalty_features(&self, theta: &RidgeSolution) -> Vec<f64> {
        theta.beta.iter().map(|b| b * b / (2.0 * theta.sigma2)).collect()
    }

    fn smoothness(&self) -> UpperSmoothness {
        UpperSmoothness::diagonal(self.gram.diagonal().as_slice().to_vec(), 0.0)
            .expect("gram diagonal is non-negative")
    }

    fn penalty_kind(&self) -> PenaltyKind {
        PenaltyKind::Tikhonov { scale: 1.0 }
    }

    fn log_normalizer(&self, lambda: &Lambda) -> Result<f64> {
        match self.normalizer {
            RidgeNormalizer::Full => full_log_normalizer(&self.gram, lambda.weights()),
            RidgeNormalizer::Diagonal => {
                check_len(self.p(), lambda.dim(), "lambda vs design columns")?;
                Ok(self
                    .gram
                    .diagonal()
                    .iter()
                    .zip(lambda.weights())
                    .map(|(&h, &l)| tikhonov_term(h, l, 1.0))
                    .sum())
            }
        }
    }

    fn convex_step(&self, theta: &RidgeSolution, lambda: &Lambda) -> Result<Lambda> {
        match self.normalizer {
            RidgeNormalizer::Full => ridge_convex_step(theta, self, lambda),
            RidgeNormalizer::Diagonal => {
                let sigma = theta.sigma2.sqrt();
                let t: Vec<f64> = theta.beta.iter().map(|b| b / sigma).collect();
                let h = self.gram.diagonal().as_slice().to_vec();
                crate::convex_step::update_tikhonov(&t, &h, 1.0, lambda.domain())
            }
        }
    }
}

/// Default MDL-RS weight box for ridge: `[1e-6, 1e6]^p`.
pub fn default_box(p: usize) -> Result<BoxDomain> {
    BoxDomain::uniform(p, 1e-6, 1e6)
}
