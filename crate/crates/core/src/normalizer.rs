//! Analytic upper bound of the LNML normalizing factor and the uLNML
//! objective `h_X(θ, λ) = f_X(θ) + g(θ, λ) + log Z̄(λ)`.
//!
//! Weight-independent constants (`e^{c0}`, the Gaussian mass of the
//! neighborhood, the temperature constant of variable-temperature models)
//! are dropped: they never move the argmin over λ.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::types::{Lambda, RermProblem};

/// `log Z̄(λ)` and its per-coordinate contributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizerBound {
    pub value: f64,
    pub per_coord: Vec<f64>,
}

impl NormalizerBound {
    fn from_terms(per_coord: Vec<f64>) -> Self {
        Self {
            value: per_coord.iter().sum(),
            per_coord,
        }
    }
}

fn check_h(h_diag: &[f64]) -> Result<()> {
    if let Some(h) = h_diag.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "smoothness entries must be >= 0, got {h}"
        )));
    }
    Ok(())
}

/// Tikhonov bound for `g = (s/2) Σ λ_j θ_j²`:
/// `Σ_j ½ log((h_j + s λ_j) / (s λ_j))`.
pub fn log_normalizer_tikhonov(h_diag: &[f64], lambda: &Lambda, scale: f64) -> Result<NormalizerBound> {
    check_len(lambda.dim(), h_diag.len(), "smoothness vs lambda")?;
    check_h(h_diag)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be > 0, got {scale}")));
    }
    let terms = h_diag
        .iter()
        .zip(lambda.weights())
        .map(|(&h, &l)| tikhonov_term(h, l, scale))
        .collect();
    Ok(NormalizerBound::from_terms(terms))
}

#[inline]
pub(crate) fn tikhonov_term(h: f64, lambda: f64, scale: f64) -> f64 {
    0.5 * (h / (scale * lambda)).ln_1p()
}

/// Lasso bound for `g = Σ λ_j |θ_j|`:
/// `Σ_j [½ log(e/2π) + ½ log((h_j + λ_j²) / λ_j²)]`.
///
/// The constant `½ log(e/2π)` is folded into each coordinate's term so that
/// the per-coordinate entries still sum to `value`.
pub fn log_normalizer_lasso(h_diag: &[f64], lambda: &Lambda) -> Result<NormalizerBound> {
    check_len(lambda.dim(), h_diag.len(), "smoothness vs lambda")?;
    check_h(h_diag)?;
    let terms = h_diag
        .iter()
        .zip(lambda.weights())
        .map(|(&h, &l)| lasso_term(h, l))
        .collect();
    Ok(NormalizerBound::from_terms(terms))
}

pub(crate) const HALF_LOG_E_OVER_2PI: f64 = 0.5 * (1.0 - 1.837_877_066_409_345_5);

#[inline]
pub(crate) fn lasso_term(h: f64, lambda: f64) -> f64 {
    HALF_LOG_E_OVER_2PI + 0.5 * (h / (lambda * lambda)).ln_1p()
}

/// `f_X(θ) + g(θ, λ) + log Z̄(λ)`. At `θ = solve(λ)` this is uLNML(X | λ).
pub fn ulnml_objective<P: RermProblem + ?Sized>(
    problem: &P,
    theta: &P::Theta,
    lambda: &Lambda,
) -> Result<f64> {
    let loss = problem.loss(theta)?;
    let penalty = problem.penalty(theta, lambda);
    let norm = problem.log_normalizer(lambda)?;
    Ok(loss + penalty + norm)
}

/// uLNML(X | λ) with the RERM solved from scratch.
pub fn ulnml_at<P: RermProblem + ?Sized>(problem: &P, lambda: &Lambda) -> Result<f64> {
    let theta = problem.solve(lambda, None)?;
    ulnml_objective(problem, &theta, lambda)
}
