//! Zero-mean Gaussian precision estimation with per-edge quadratic penalties:
//!
//! ```text
//! min_{Θ ≻ 0}  ½ tr(SΘ) − (n/2) log det Θ + (nm/2) log 2π + Σ_{i≠j} λ_ij Θ_ij²
//! ```
//!
//! with `S = XᵀX`. Weights are tied across `(i, j)` and `(j, i)`, so the free
//! weights are the `m(m−1)/2` unordered pairs in row-major upper-triangular
//! order. The normalizer bound uses the isotropic smoothness
//! `h0 = m n R²`, where `R` bounds the diagonal of `Θ⁻¹`.

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::convex_step::tikhonov_root;
use crate::error::{check_len, Error, Result};
use crate::linalg::{cholesky, is_symmetric, logdet_from_cholesky, max_abs, trace_product, Matrix};
use crate::types::{project_limits, BoxDomain, Lambda, PenaltyKind, RermProblem, UpperSmoothness};

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// Off-diagonal coupling of the double-ring model.
pub const RING_COEFFICIENT: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct GgmProblem {
    scatter: Matrix,
    n: usize,
    radius: f64,
    h0: f64,
    pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecisionEstimate {
    #[serde(skip)]
    pub theta: Matrix,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Whether `diag Θ̂⁻¹ <= R` holds at the estimate.
    pub radius_ok: bool,
}

pub fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
}

impl GgmProblem {
    /// `radius = None` selects `R = 10 · max_i S_ii / n`.
    pub fn new(scatter: Matrix, n: usize, radius: Option<f64>) -> Result<Self> {
        if !scatter.is_square() || scatter.nrows() == 0 {
            return Err(Error::InvalidInput(
                "scatter must be a non-empty square matrix".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidInput("sample count must be >= 1".into()));
        }
        if !is_symmetric(&scatter, 1e-10) {
            return Err(Error::InvalidInput("scatter must be symmetric".into()));
        }
        let m = scatter.nrows();
        if let Some(i) = (0..m).find(|&i| !(scatter[(i, i)] > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "variable {i} has zero scatter (degenerate)"
            )));
        }
        let radius = match radius {
            Some(r) if r.is_finite() && r > 0.0 => r,
            Some(r) => return Err(Error::InvalidInput(format!("radius must be > 0, got {r}"))),
            None => 10.0 * scatter.diagonal().max() / n as f64,
        };
        let h0 = m as f64 * n as f64 * radius * radius;
        Ok(Self {
            scatter,
            n,
            radius,
            h0,
            pairs: upper_pairs(m),
        })
    }

    /// Builds the problem from an `n × m` data matrix.
    pub fn from_data(data: &Matrix, radius: Option<f64>) -> Result<Self> {
        Self::new(data.transpose() * data, data.nrows(), radius)
    }

    pub fn m(&self) -> usize {
        self.scatter.nrows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn scatter(&self) -> &Matrix {
        &self.scatter
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Symmetric weight matrix with zero diagonal from pair weights.
    pub fn weight_matrix(&self, weights: &[f64]) -> Result<Matrix> {
        check_len(self.pairs.len(), weights.len(), "pair weights")?;
        let mut w = Matrix::zeros(self.m(), self.m());
        for (&(i, j), &l) in self.pairs.iter().zip(weights) {
            w[(i, j)] = l;
            w[(j, i)] = l;
        }
        Ok(w)
    }

    pub fn pair_weights(&self, weights: &Matrix) -> Vec<f64> {
        self.pairs.iter().map(|&(i, j)| weights[(i, j)]).collect()
    }

    /// Gaussian negative log-likelihood of the data under precision `Θ`.
    pub fn negative_log_likelihood(&self, theta: &Matrix) -> Result<f64> {
        let chol = cholesky(theta, "precision")?;
        Ok(nll_with_cholesky(&self.scatter, self.n, theta, &chol))
    }

    fn objective_with(&self, theta: &Matrix, weights: &Matrix, chol: &Cholesky<f64, nalgebra::Dyn>) -> f64 {
        nll_with_cholesky(&self.scatter, self.n, theta, chol) + penalty(theta, weights)
    }

    /// Number of nonzero edges (`|Θ_ij| > 1e-3`, `i < j`) plus the diagonal.
    pub fn effective_df(&self, theta: &Matrix) -> usize {
        self.m()
            + self
                .pairs
                .iter()
                .filter(|&&(i, j)| theta[(i, j)].abs() > 1e-3)
                .count()
    }
}

fn nll_with_cholesky(scatter: &Matrix, n: usize, theta: &Matrix, chol: &Cholesky<f64, nalgebra::Dyn>) -> f64 {
    let n = n as f64;
    let m = theta.nrows() as f64;
    0.5 * trace_product(scatter, theta) - 0.5 * n * logdet_from_cholesky(chol) + 0.5 * n * m * LOG_2PI
}

fn penalty(theta: &Matrix, weights: &Matrix) -> f64 {
    theta.iter().zip(weights.iter()).map(|(t, w)| w * t * t).sum()
}

/// Held-out Gaussian NLL of `n_test` rows with scatter `s_test`.
pub fn heldout_nll(theta: &Matrix, s_test: &Matrix, n_test: usize) -> Result<f64> {
    let chol = cholesky(theta, "precision")?;
    Ok(nll_with_cholesky(s_test, n_test, theta, &chol))
}

const GRAD_TOL_PER_SAMPLE: f64 = 1e-6;
const MAX_NEWTON: usize = 200;
const MAX_HALVINGS: usize = 60;
const ARMIJO: f64 = 1e-4;

/// Penalized Newton–CG with a backtracking line search that rejects any
/// trial point whose Cholesky factorization fails.
///
/// The Newton system `(n/2) W D W + 2 λ∘D = −G` (`W = Θ⁻¹`) is solved by
/// Jacobi-preconditioned conjugate gradients over symmetric matrices with
/// the Frobenius inner product. Converged when `max |G| < 1e-6 n`.
pub fn solve_ggm(
    problem: &GgmProblem,
    weights: &Matrix,
    warm_start: Option<&Matrix>,
) -> Result<PrecisionEstimate> {
    let m = problem.m();
    if weights.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: weights.nrows(),
            context: "weight matrix vs variables",
        });
    }
    let mut w = weights.clone();
    for i in 0..m {
        w[(i, i)] = 0.0;
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidInput("edge weights must be finite and >= 0".into()));
    }

    let n = problem.n as f64;
    let s = &problem.scatter;
    let start = warm_start
        .filter(|t| t.shape() == (m, m) && (*t).clone().cholesky().is_some())
        .cloned()
        .unwrap_or_else(|| Matrix::from_fn(m, m, |i, j| if i == j { n / s[(i, i)] } else { 0.0 }));

    let mut theta = start;
    let mut chol = cholesky(&theta, "initial precision")?;
    let mut f = problem.objective_with(&theta, &w, &chol);
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..MAX_NEWTON {
        iterations = it;
        let inv = symmetric_inverse(&chol);
        let grad = s * 0.5 - &inv * (0.5 * n) + w.component_mul(&theta) * 2.0;
        let gmax = max_abs(&grad);
        if gmax < GRAD_TOL_PER_SAMPLE * n {
            converged = true;
            break;
        }

        let mut dir = newton_cg(&inv, &w, &grad, n);
        let mut slope = trace_product(&grad, &dir);
        if !(slope < 0.0) {
            dir = -grad.clone();
            slope = -grad.norm_squared();
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = &theta + &dir * step;
            if let Some(c) = trial.clone().cholesky() {
                let ft = problem.objective_with(&trial, &w, &c);
                if ft.is_finite() && ft <= f + ARMIJO * step * slope {
                    theta = trial;
                    chol = c;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // no decrease possible at this resolution; report as-is
            break;
        }
        iterations = it + 1;
    }

    let inv = symmetric_inverse(&chol);
    let radius_ok = (0..m).all(|i| inv[(i, i)] <= problem.radius * (1.0 + 1e-12));
    if !converged {
        let grad = s * 0.5 - &inv * (0.5 * n) + w.component_mul(&theta) * 2.0;
        converged = max_abs(&grad) < GRAD_TOL_PER_SAMPLE * n;
    }
    Ok(PrecisionEstimate {
        theta,
        objective: f,
        converged,
        iterations,
        radius_ok,
    })
}

fn symmetric_inverse(chol: &Cholesky<f64, nalgebra::Dyn>) -> Matrix {
    let inv = chol.inverse();
    (&inv + inv.transpose()) * 0.5
}

fn newton_cg(inv: &Matrix, w: &Matrix, grad: &Matrix, n: f64) -> Matrix {
    let m = inv.nrows();
    let half_n = 0.5 * n;
    let apply = |d: &Matrix| -> Matrix { (inv * d * inv) * half_n + w.component_mul(d) * 2.0 };
    let precond = Matrix::from_fn(m, m, |i, j| {
        1.0 / (half_n * (inv[(i, i)] * inv[(j, j)] + inv[(i, j)] * inv[(i, j)]) + 2.0 * w[(i, j)])
    });

    let b = -grad;
    let bnorm = b.norm();
    let tol = (0.5f64).min(bnorm.sqrt()) * bnorm;
    let mut x = Matrix::zeros(m, m);
    let mut r = b.clone();
    let mut z = r.component_mul(&precond);
    let mut p = z.clone();
    let mut rz = trace_product(&r, &z);
    for _ in 0..(m * m).max(50) {
        let hp = apply(&p);
        let curv = trace_product(&p, &hp);
        if curv <= 0.0 {
            break;
        }
        let alpha = rz / curv;
        x += &p * alpha;
        r -= &hp * alpha;
        if r.norm() <= tol * 1e-2 {
            break;
        }
        z = r.component_mul(&precond);
        let rz_next = trace_product(&r, &z);
        p = &z + &p * (rz_next / rz);
        rz = rz_next;
    }
    if x.iter().all(|v| *v == 0.0) {
        return b;
    }
    x
}

/// uLNML(X | λ) for pair weights `lambda`.
pub fn ggm_ulnml(problem: &GgmProblem, lambda: &Lambda) -> Result<f64> {
    let est = solve_ggm(problem, &problem.weight_matrix(lambda.weights())?, None)?;
    Ok(est.objective + problem.log_normalizer(lambda)?)
}

/// `Σ_{i<j} log((h0 + λ_ij)/λ_ij)`: the ordered-pair sum of
/// `½ log((h0 + λ)/λ)` with tied weights.
pub fn ggm_log_normalizer(h0: f64, weights: &[f64]) -> f64 {
    weights.iter().map(|&l| (h0 / l).ln_1p()).sum()
}

/// Per-pair minimizer of `2λ Θ_ij² + log((h0 + λ)/λ)`, clamped to the box.
///
/// Halving this objective gives `λΘ² + ½ log((2h0 + 2λ)/(2λ))`, the scaled
/// Tikhonov form with `s = 2` and smoothness `2 h0`.
pub fn ggm_convex_step(estimate: &Matrix, problem: &GgmProblem, domain: &BoxDomain) -> Result<Lambda> {
    check_len(problem.pairs.len(), domain.dim(), "box vs pairs")?;
    let raw: Vec<f64> = problem
        .pairs
        .iter()
        .map(|&(i, j)| tikhonov_root(estimate[(i, j)], 2.0 * problem.h0, 2.0))
        .collect();
    Ok(project_limits(&raw, domain))
}

impl RermProblem for GgmProblem {
    type Theta = PrecisionEstimate;

    fn dim_theta(&self) -> usize {
        self.m() * (self.m() + 1) / 2
    }

    fn dim_lambda(&self) -> usize {
        self.pairs.len()
    }

    fn solve(&self, lambda: &Lambda, warm_start: Option<&PrecisionEstimate>) -> Result<PrecisionEstimate> {
        solve_ggm(
            self,
            &self.weight_matrix(lambda.weights())?,
            warm_start.map(|e| &e.theta),
        )
    }

    fn loss(&self, theta: &PrecisionEstimate) -> Result<f64> {
        self.negative_log_likelihood(&theta.theta)
    }

    /// `2 Θ_ij²` per unordered pair.
    fn penalty_features(&self, theta: &PrecisionEstimate) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(i, j)| 2.0 * theta.theta[(i, j)].powi(2))
            .collect()
    }

    fn smoothness(&self) -> UpperSmoothness {
        UpperSmoothness::isotropic(self.h0, self.pairs.len(), 0.0).expect("h0 is positive")
    }

    /// Per unordered pair the penalty is `2λΘ² = (4/2) λ Θ²`.
    fn penalty_kind(&self) -> PenaltyKind {
        PenaltyKind::Tikhonov { scale: 4.0 }
    }

    fn log_normalizer(&self, lambda: &Lambda) -> Result<f64> {
        check_len(self.pairs.len(), lambda.dim(), "lambda vs pairs")?;
        Ok(ggm_log_normalizer(self.h0, lambda.weights()))
    }

    fn convex_step(&self, theta: &PrecisionEstimate, lambda: &Lambda) -> Result<Lambda> {
        ggm_convex_step(&theta.theta, self, lambda.domain())
    }
}

/// Default MDL-RS weight box for the graphical model: `[1e-6, 1e6]^d`.
pub fn default_box(m: usize) -> Result<BoxDomain> {
    BoxDomain::uniform(m * (m - 1) / 2, 1e-6, 1e6)
}

/// Circulant precision with unit diagonal and [`RING_COEFFICIENT`] at ring
/// distance 1 and 2.
pub fn double_ring_precision(m: usize) -> Result<Matrix> {
    if m < 5 {
        return Err(Error::InvalidInput(format!("double ring needs m >= 5, got {m}")));
    }
    Ok(Matrix::from_fn(m, m, |i, j| {
        let d = (i as isize - j as isize).rem_euclid(m as isize) as usize;
        let d = d.min(m - d);
        match d {
            0 => 1.0,
            1 | 2 => RING_COEFFICIENT,
            _ => 0.0,
        }
    }))
}

/// `n` i.i.d. rows from `N(0, (Θ*)⁻¹)` for the double-ring `Θ*`.
pub fn double_ring_sample(m: usize, n: usize, seed: u64) -> Result<Matrix> {
    let precision = double_ring_precision(m)?;
    sample_gaussian(&precision, n, seed)
}

/// Zero-mean Gaussian rows with the given precision. With `Θ = L Lᵀ`, rows
/// are `x = L⁻ᵀ z`.
pub fn sample_gaussian(precision: &Matrix, n: usize, seed: u64) -> Result<Matrix> {
    let m = precision.nrows();
    let chol = cholesky(precision, "true precision")?;
    let lt = chol.l().transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Matrix::zeros(n, m);
    for r in 0..n {
        let z = nalgebra::DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        let x = lt
            .solve_upper_triangular(&z)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        out.set_row(r, &x.transpose());
    }
    Ok(out)
}

/// `KL(N(0, Θ_true⁻¹) ‖ N(0, Θ_hat⁻¹))
///   = ½ [tr(Θ_hat Σ_true) − m + log det Θ_true − log det Θ_hat]`.
pub fn kl_gaussian(theta_true: &Matrix, theta_hat: &Matrix) -> Result<f64> {
    if theta_true.shape() != theta_hat.shape() {
        return Err(Error::DimensionMismatch {
            expected: theta_true.nrows(),
            got: theta_hat.nrows(),
            context: "precision matrices",
        });
    }
    let ct = cholesky(theta_true, "true precision")?;
    let ch = cholesky(theta_hat, "estimated precision")?;
    let sigma = ct.inverse();
    let m = theta_true.nrows() as f64;
    let kl =
        0.5 * (trace_product(theta_hat, &sigma) - m + logdet_from_cholesky(&ct) - logdet_from_cholesky(&ch));
    Ok(kl.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdlrs::{fit, StopRule};
    use rand::Rng;

    fn random_pd(rng: &mut ChaCha8Rng, m: usize) -> Matrix {
        let a = Matrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        a.transpose() * &a + Matrix::identity(m, m) * 0.5
    }

    #[test]
    fn white_data_heavy_penalty_gives_identity() {
        let n = 50;
        let p = GgmProblem::new(Matrix::identity(4, 4) * n as f64, n, None).unwrap();
        let w = Matrix::from_element(4, 4, 1e8);
        let e = solve_ggm(&p, &w, None).unwrap();
        assert!(e.converged);
        // diagonal-only analytic minimizer: ½S_ii − n/(2θ_ii) = 0  =>  θ_ii = n/S_ii = 1
        assert!((&e.theta - Matrix::identity(4, 4)).amax() < 1e-6);
    }

    #[test]
    fn scalar_case_closed_form() {
        let p = GgmProblem::new(Matrix::from_element(1, 1, 8.0), 20, None).unwrap();
        let e = solve_ggm(&p, &Matrix::zeros(1, 1), None).unwrap();
        assert!((e.theta[(0, 0)] - 2.5).abs() < 1e-6);
    }

    #[test]
    fn two_by_two_matches_grid_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Matrix::from_fn(30, 2, |_, _| rng.random_range(-1.5..1.5));
        let p = GgmProblem::from_data(&x, None).unwrap();
        let w = p.weight_matrix(&[3.0]).unwrap();
        let e = solve_ggm(&p, &w, None).unwrap();
        let obj = |a: f64, b: f64, c: f64| -> f64 {
            let t = Matrix::from_row_slice(2, 2, &[a, c, c, b]);
            match t.clone().cholesky() {
                Some(ch) => p.objective_with(&t, &w, &ch),
                None => f64::INFINITY,
            }
        };
        let (a0, b0, c0) = (e.theta[(0, 0)], e.theta[(1, 1)], e.theta[(0, 1)]);
        let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
        let h = 0.01;
        for i in -20..=20 {
            for j in -20..=20 {
                for k in -20..=20 {
                    let (a, b, c) = (a0 + h * i as f64, b0 + h * j as f64, c0 + h * k as f64);
                    let v = obj(a, b, c);
                    if v < best.0 {
                        best = (v, a, b, c);
                    }
                }
            }
        }
        assert!(e.objective <= best.0 + 1e-9);
        assert!((best.1 - a0).abs() <= h && (best.2 - b0).abs() <= h && (best.3 - c0).abs() <= h);
    }

    #[test]
    fn stationarity_and_fixed_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = double_ring_precision(8).unwrap();
        let x = sample_gaussian(&truth, 60, 4).unwrap();
        let p = GgmProblem::from_data(&x, None).unwrap();
        let weights: Vec<f64> = (0..p.pairs().len())
            .map(|_| rng.random_range(0.01..100.0))
            .collect();
        let w = p.weight_matrix(&weights).unwrap();
        let e = solve_ggm(&p, &w, None).unwrap();
        assert!(e.converged);
        let inv = e.theta.clone().cholesky().unwrap().inverse();
        let grad = p.scatter() * 0.5 - inv * (0.5 * 60.0) + w.component_mul(&e.theta) * 2.0;
        assert!(max_abs(&grad) < 1e-6 * 60.0);
        let diag_mle = Matrix::from_fn(8, 8, |i, j| if i == j { 60.0 / p.scatter()[(i, i)] } else { 0.0 });
        for probe in [&truth, &diag_mle] {
            let ch = probe.clone().cholesky().unwrap();
            assert!(e.objective <= p.objective_with(probe, &w, &ch) + 1e-9);
        }
        assert!(e.radius_ok);
    }

    #[test]
    fn rejects_degenerate_variable() {
        let mut s = Matrix::identity(3, 3);
        s[(1, 1)] = 0.0;
        assert!(GgmProblem::new(s, 10, None).is_err());
    }

    #[test]
    fn normalizer_identity_ratio() {
        let h0 = 7.5;
        let v = ggm_log_normalizer(h0, &[h0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert!(ggm_log_normalizer(h0, &[1e300]) < 1e-290);
    }

    #[test]
    fn normalizer_three_pairs_high_precision() {
        // Σ_k log(1 + 1/k), k = 1..3, at 30 digits
        let h0 = 3.3;
        let v = ggm_log_normalizer(h0, &[h0, 2.0 * h0, 3.0 * h0]);
        assert!((v - 1.386_294_361_119_890_6).abs() < 1e-14);
    }

    #[test]
    fn convex_step_cases() {
        let p = GgmProblem::new(Matrix::identity(3, 3) * 10.0, 10, Some(1.0)).unwrap();
        let d = BoxDomain::uniform(3, 1e-3, 1e3).unwrap();
        let mut t = Matrix::identity(3, 3);
        t[(0, 1)] = 0.0;
        t[(1, 0)] = 0.0;
        t[(0, 2)] = 1e6;
        t[(2, 0)] = 1e6;
        t[(1, 2)] = 0.3;
        t[(2, 1)] = 0.3;
        let l = ggm_convex_step(&t, &p, &d).unwrap();
        assert_eq!(l.weights()[0], 1e3);
        assert_eq!(l.weights()[1], 1e-3);
        // numeric oracle on 2λΘ² + log((h0 + λ)/λ), h0 = 3·10·1 = 30
        let num = crate::convex_step::update_numeric(
            &[2.0 * 0.09],
            |_, lam| 1.0 / (30.0 + lam) - 1.0 / lam,
            &BoxDomain::uniform(1, 1e-3, 1e3).unwrap(),
        )
        .unwrap();
        assert!((l.weights()[2] - num.weights()[0]).abs() < 1e-8);
    }

    #[test]
    fn convex_step_h0_four() {
        // m = 1 is not a graph; use m = 2, n = 2, R = 1 => h0 = 4
        let p = GgmProblem::new(Matrix::identity(2, 2) * 2.0, 2, Some(1.0)).unwrap();
        assert_eq!(p.h0(), 4.0);
        let d = BoxDomain::uniform(1, 1e-6, 1e6).unwrap();
        let t = Matrix::from_row_slice(2, 2, &[1.0, 0.7, 0.7, 1.0]);
        let l = ggm_convex_step(&t, &p, &d).unwrap();
        let num =
            crate::convex_step::update_numeric(&[2.0 * 0.49], |_, lam| 1.0 / (4.0 + lam) - 1.0 / lam, &d)
                .unwrap();
        assert!((l.weights()[0] - num.weights()[0]).abs() < 1e-8);
    }

    #[test]
    fn ring_precision_min_eigenvalue() {
        let t = double_ring_precision(10).unwrap();
        let eig = t.clone().symmetric_eigen().eigenvalues.min();
        let brute = (0..10)
            .map(|k| {
                let w = 2.0 * std::f64::consts::PI * k as f64 / 10.0;
                1.0 + 0.5 * w.cos() + 0.5 * (2.0 * w).cos()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((eig - brute).abs() < 1e-12);
        assert!(brute >= 0.4375 - 1e-12);
        assert!(double_ring_precision(4).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = double_ring_sample(6, 20, 42).unwrap();
        let b = double_ring_sample(6, 20, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, double_ring_sample(6, 20, 43).unwrap());
    }

    #[test]
    fn sample_covariance_converges() {
        let m = 6;
        let n = 100_000;
        let x = double_ring_sample(m, n, 1).unwrap();
        let cov = x.transpose() * &x / n as f64;
        let sigma = double_ring_precision(m).unwrap().cholesky().unwrap().inverse();
        assert!((cov - sigma).amax() <= 0.05);
    }

    #[test]
    fn kl_cases() {
        let i1 = Matrix::identity(1, 1);
        assert_eq!(kl_gaussian(&i1, &i1).unwrap(), 0.0);
        let kl = kl_gaussian(&i1, &(i1.clone() * 2.0)).unwrap();
        assert!((kl - 0.153_426_409_720_027_35).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = random_pd(&mut rng, 4);
            let b = random_pd(&mut rng, 4);
            assert!(kl_gaussian(&a, &b).unwrap() >= 0.0);
            assert!(kl_gaussian(&a, &a).unwrap() <= 1e-10);
        }
        assert!(kl_gaussian(&i1, &(i1.clone() * -1.0)).is_err());
    }

    #[test]
    fn mdlrs_descends() {
        let truth = double_ring_precision(6).unwrap();
        let x = sample_gaussian(&truth, 80, 3).unwrap();
        let p = GgmProblem::from_data(&x, None).unwrap();
        let f = fit(
            &p,
            &default_box(6).unwrap().geometric_center(),
            StopRule::default(),
        )
        .unwrap();
        assert!(f.trace.max_relative_increase() <= 1e-9);
    }
}
