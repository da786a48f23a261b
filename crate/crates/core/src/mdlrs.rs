//! Alternating minimization of uLNML over `(θ, λ)`.
//!
//! Each iteration solves the RERM for the current weights (the concave part
//! of uLNML as a function of λ) and then minimizes the convex remainder
//! `g(θ_t, λ) + log Z̄(λ)` over the box. The recorded objective
//! `h(θ_t, λ_t)` majorizes `uLNML(λ_t)` and never increases as long as the
//! RERM solver does not increase its objective from the warm start.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normalizer::ulnml_objective;
use crate::types::{FitTrace, IterationRecord, Lambda, RermProblem, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopRule {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl StopRule {
    pub fn new(max_iter: usize, rel_tol: f64) -> Result<Self> {
        if max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be >= 1".into()));
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        Ok(Self { max_iter, rel_tol })
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rel_tol: 1e-8,
        }
    }
}

/// Result of a selection run: the per-iteration trace plus the RERM solution
/// re-solved at the final weights.
#[derive(Debug, Clone, Serialize)]
pub struct Fit<T> {
    pub trace: FitTrace<T>,
    pub lambda: Lambda,
    pub theta: T,
    /// `uLNML(X | lambda)` evaluated at `theta`.
    pub ulnml: f64,
}

impl<T> Fit<T> {
    pub fn iterations(&self) -> usize {
        self.trace.iterations.len()
    }
}

pub fn fit<P: RermProblem + ?Sized>(problem: &P, lambda0: &Lambda, stop: StopRule) -> Result<Fit<P::Theta>> {
    if lambda0.dim() != problem.dim_lambda() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim_lambda(),
            got: lambda0.dim(),
            context: "initial lambda vs problem",
        });
    }
    let wrap = |iteration: usize| {
        move |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        }
    };

    let mut lambda = lambda0.clone();
    let mut theta: Option<P::Theta> = None;
    let mut records: Vec<IterationRecord<P::Theta>> = Vec::new();
    let mut stop_reason = StopReason::MaxIter;

    for t in 1..=stop.max_iter {
        let next_theta = problem.solve(&lambda, theta.as_ref()).map_err(wrap(t))?;
        let rerm = problem.rerm_objective(&next_theta, &lambda).map_err(wrap(t))?;
        let next_lambda = problem.convex_step(&next_theta, &lambda).map_err(wrap(t))?;
        let h = ulnml_objective(problem, &next_theta, &next_lambda).map_err(wrap(t))?;
        if !h.is_finite() {
            return Err(wrap(t)(Error::Numerical(format!("uLNML evaluated to {h}"))));
        }

        let prev = records.last().map(|r| r.ulnml);
        records.push(IterationRecord {
            lambda: next_lambda.clone(),
            theta: next_theta.clone(),
            ulnml: h,
            rerm_objective: rerm,
        });
        lambda = next_lambda;
        theta = Some(next_theta);

        if let Some(prev) = prev {
            if (h - prev).abs() / (1.0 + prev.abs()) < stop.rel_tol {
                stop_reason = StopReason::Tolerance;
                break;
            }
        }
    }

    let final_theta = problem
        .solve(&lambda, theta.as_ref())
        .map_err(wrap(records.len() + 1))?;
    let ulnml = ulnml_objective(problem, &final_theta, &lambda)?;
    Ok(Fit {
        trace: FitTrace {
            iterations: records,
            converged: stop_reason == StopReason::Tolerance,
            stop_reason,
        },
        lambda,
        theta: final_theta,
        ulnml,
    })
}

/// Runs [`fit`] from every initial point and keeps the run with the lowest
/// final uLNML. Ties go to the earliest init.
pub fn fit_multistart<P>(problem: &P, inits: &[Lambda], stop: StopRule) -> Result<Fit<P::Theta>>
where
    P: RermProblem + Sync + ?Sized,
    P::Theta: Send,
{
    if inits.is_empty() {
        return Err(Error::InvalidInput(
            "at least one initial lambda is required".into(),
        ));
    }
    let runs: Vec<Result<Fit<P::Theta>>> = inits.par_iter().map(|l0| fit(problem, l0, stop)).collect();

    let mut best: Option<Fit<P::Theta>> = None;
    let mut failures = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        match run {
            Ok(f) => {
                if best.as_ref().is_none_or(|b| f.ulnml < b.ulnml) {
                    best = Some(f);
                }
            }
            Err(e) => failures.push((i, e)),
        }
    }
    best.ok_or(Error::AllStartsFailed(failures))
}

/// Largest coordinate change produced by one more weight update at the fit's
/// solution. Near zero at a stationary point of uLNML.
pub fn stationarity_residual<P: RermProblem + ?Sized>(problem: &P, fit: &Fit<P::Theta>) -> Result<f64> {
    let next = problem.convex_step(&fit.theta, &fit.lambda)?;
    Ok(next.max_abs_diff(&fit.lambda))
}
