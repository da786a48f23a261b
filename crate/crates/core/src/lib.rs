//! Penalty selection for regularized empirical risk minimization by
//! minimizing uLNML, an analytic upper bound of the luckiness normalized
//! maximum likelihood code length.
//!
//! The crate is organized around the [`RermProblem`] contract:
//!
//! - [`normalizer`] evaluates the normalizer bound `log Z̄(λ)` and uLNML;
//! - [`convex_step`] minimizes the convex part over the weight box;
//! - [`mdlrs`] alternates RERM solves and weight updates;
//! - [`ridge`] and [`ggm`] are the two built-in model plugins;
//! - [`baselines`] provides scalar grid search with CV, AIC and BIC;
//! - [`oracle`] computes exact normalizers by quadrature on a 1-D model;
//! - [`data`] and [`experiments`] generate datasets and drive comparisons.

pub mod baselines;
pub mod cli;
pub mod convex_step;
pub mod data;
pub mod error;
pub mod experiments;
pub mod ggm;
pub mod linalg;
pub mod mdlrs;
pub mod normalizer;
pub mod oracle;
pub mod ridge;
pub mod types;

pub use error::{Error, Result};
pub use mdlrs::{fit, fit_multistart, Fit, StopRule};
pub use normalizer::{ulnml_objective, NormalizerBound};
pub use types::{
    project_box, BoxDomain, FitTrace, Interval, IterationRecord, Lambda, PenaltyKind, RermProblem,
    ResidualKind, StopReason, UpperSmoothness,
};
