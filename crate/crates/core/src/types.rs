//! Shared domain types: penalty weights with their box domain, smoothness
//! descriptors, and the regularized-ERM problem contract consumed by the
//! selection loop.

use serde::Serialize;

use crate::convex_step;
use crate::error::{check_len, Error, Result};
use crate::normalizer;

/// Closed interval `[lo, hi]` with `0 < lo <= hi < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || lo > hi {
            return Err(Error::InvalidInput(format!(
                "interval must satisfy 0 < lo <= hi < inf, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn geometric_midpoint(&self) -> f64 {
        (self.lo * self.hi).sqrt().clamp(self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Product of per-coordinate intervals; the admissible set of penalty weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    bounds: Vec<Interval>,
}

impl BoxDomain {
    pub fn new(bounds: Vec<Interval>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidInput(
                "box must have at least one coordinate".into(),
            ));
        }
        Ok(Self { bounds })
    }

    /// The same interval on every coordinate.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let iv = Interval::new(lo, hi)?;
        Self::new(vec![iv; dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn get(&self, j: usize) -> Interval {
        self.bounds[j]
    }

    pub fn lower_corner(&self) -> Vec<f64> {
        self.bounds.iter().map(Interval::lo).collect()
    }

    pub fn upper_corner(&self) -> Vec<f64> {
        self.bounds.iter().map(Interval::hi).collect()
    }

    /// Per-coordinate geometric midpoint, the default starting point of the
    /// selection loop.
    pub fn geometric_center(&self) -> Lambda {
        Lambda {
            weights: self.bounds.iter().map(Interval::geometric_midpoint).collect(),
            domain: self.clone(),
        }
    }
}

/// Penalty weight vector, always stored with (and inside) its box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda {
    weights: Vec<f64>,
    #[serde(skip)]
    domain: BoxDomain,
}

impl Lambda {
    /// Builds a weight vector that must already lie in the box.
    pub fn new(weights: Vec<f64>, domain: BoxDomain) -> Result<Self> {
        check_len(domain.dim(), weights.len(), "lambda weights vs box")?;
        for (j, (&w, iv)) in weights.iter().zip(domain.bounds()).enumerate() {
            if !w.is_finite() || !iv.contains(w) {
                return Err(Error::InvalidInput(format!(
                    "weight {j} = {w} outside [{}, {}]",
                    iv.lo(),
                    iv.hi()
                )));
            }
        }
        Ok(Self { weights, domain })
    }

    /// Constant weight on every coordinate, projected into the box.
    pub fn constant(value: f64, domain: BoxDomain) -> Result<Self> {
        let raw = vec![value; domain.dim()];
        project_box(&raw, &domain)
    }

    /// `value` on every coordinate inside the degenerate box `[value, value]^dim`.
    pub fn fixed(value: f64, dim: usize) -> Result<Self> {
        let domain = BoxDomain::uniform(dim, value, value)?;
        Ok(Self {
            weights: vec![value; dim],
            domain,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn max_abs_diff(&self, other: &Lambda) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// Clamps each raw coordinate into its interval.
pub fn project_box(raw: &[f64], domain: &BoxDomain) -> Result<Lambda> {
    check_len(domain.dim(), raw.len(), "raw lambda vs box")?;
    if let Some((j, x)) = raw.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite weight at coordinate {j}: {x}"
        )));
    }
    Ok(project_limits(raw, domain))
}

/// Projection for closed-form updates, where `+inf` is the legitimate limit
/// of a diverging minimizer and maps to the upper corner. Callers guarantee
/// no NaN.
pub(crate) fn project_limits(raw: &[f64], domain: &BoxDomain) -> Lambda {
    debug_assert!(raw.iter().all(|x| !x.is_nan()));
    Lambda {
        weights: raw
            .iter()
            .zip(domain.bounds())
            .map(|(&x, iv)| iv.clamp(x))
            .collect(),
        domain: domain.clone(),
    }
}

/// Shape of the remainder term `r` in the upper-smoothness inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResidualKind {
    /// `r = 0`; the Gaussian mass constant is then exactly one.
    Zero,
    /// Declared for completeness. Normalizer evaluation rejects it.
    BoundedResidual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SmoothnessMatrix {
    Isotropic { value: f64, dim: usize },
    Diagonal(Vec<f64>),
}

/// Diagonal upper-smoothness descriptor `(H0, c0, r)` of the loss.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperSmoothness {
    pub h: SmoothnessMatrix,
    pub c0: f64,
    pub r_kind: ResidualKind,
}

impl UpperSmoothness {
    pub fn diagonal(h_diag: Vec<f64>, c0: f64) -> Result<Self> {
        if h_diag.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::InvalidInput(
                "smoothness entries must be finite and >= 0".into(),
            ));
        }
        Self::check_c0(c0)?;
        Ok(Self {
            h: SmoothnessMatrix::Diagonal(h_diag),
            c0,
            r_kind: ResidualKind::Zero,
        })
    }

    pub fn isotropic(value: f64, dim: usize, c0: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "isotropic smoothness must be >= 0, got {value}"
            )));
        }
        Self::check_c0(c0)?;
        Ok(Self {
            h: SmoothnessMatrix::Isotropic { value, dim },
            c0,
            r_kind: ResidualKind::Zero,
        })
    }

    fn check_c0(c0: f64) -> Result<()> {
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(Error::InvalidInput(format!("c0 must be >= 0, got {c0}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.h {
            SmoothnessMatrix::Isotropic { dim, .. } => *dim,
            SmoothnessMatrix::Diagonal(d) => d.len(),
        }
    }

    pub fn h_diag(&self) -> Vec<f64> {
        match &self.h {
            SmoothnessMatrix::Isotropic { value, dim } => vec![*value; *dim],
            SmoothnessMatrix::Diagonal(d) => d.clone(),
        }
    }
}

/// Penalty family, linear in the weights.
///
/// `Tikhonov { scale: s }` is `g(θ, λ) = (s/2) Σ λ_j θ_j²`; `Lasso` is
/// `g(θ, λ) = Σ λ_j |θ_j|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PenaltyKind {
    Tikhonov { scale: f64 },
    Lasso,
}

impl PenaltyKind {
    pub fn tikhonov(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Tikhonov scale must be > 0, got {scale}"
            )));
        }
        Ok(Self::Tikhonov { scale })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIter,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord<T> {
    pub lambda: Lambda,
    pub theta: T,
    pub ulnml: f64,
    pub rerm_objective: f64,
}

/// Per-iteration history of the alternating selection loop.
#[derive(Debug, Clone, Serialize)]
pub struct FitTrace<T> {
    pub iterations: Vec<IterationRecord<T>>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl<T> FitTrace<T> {
    pub fn last(&self) -> &IterationRecord<T> {
        self.iterations.last().expect("trace has at least one iteration")
    }

    pub fn final_ulnml(&self) -> f64 {
        self.last().ulnml
    }

    pub fn ulnml_values(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.ulnml).collect()
    }

    /// Largest relative increase between consecutive uLNML values (zero when
    /// the sequence is non-increasing).
    pub fn max_relative_increase(&self) -> f64 {
        self.iterations
            .windows(2)
            .map(|w| (w[1].ulnml - w[0].ulnml) / (1.0 + w[0].ulnml.abs()))
            .fold(0.0, f64::max)
    }
}

/// A regularized empirical risk minimization problem with a penalty linear in
/// its weights: `min_θ f_X(θ) + Σ_j λ_j g_j(θ)`.
///
/// The default `log_normalizer` and `convex_step` build on the diagonal
/// smoothness and the penalty family. Models whose normalizer bound is not
/// diagonal override both.
pub trait RermProblem {
    type Theta: Clone;

    fn dim_theta(&self) -> usize;
    fn dim_lambda(&self) -> usize;

    /// Minimizer of the penalized objective for fixed weights. `warm_start`
    /// is the previous iterate; implementations may ignore it, but an
    /// iterative solver must not return a point worse than the warm start.
    fn solve(&self, lambda: &Lambda, warm_start: Option<&Self::Theta>) -> Result<Self::Theta>;

    /// Negative log-likelihood `f_X(θ)`.
    fn loss(&self, theta: &Self::Theta) -> Result<f64>;

    /// `(g_1(θ), ..., g_d(θ))`.
    fn penalty_features(&self, theta: &Self::Theta) -> Vec<f64>;

    fn smoothness(&self) -> UpperSmoothness;

    fn penalty_kind(&self) -> PenaltyKind;

    fn penalty(&self, theta: &Self::Theta, lambda: &Lambda) -> f64 {
        self.penalty_features(theta)
            .iter()
            .zip(lambda.weights())
            .map(|(g, l)| g * l)
            .sum()
    }

    fn rerm_objective(&self, theta: &Self::Theta, lambda: &Lambda) -> Result<f64> {
        Ok(self.loss(theta)? + self.penalty(theta, lambda))
    }

    /// `log Z̄(λ)` up to a weight-independent constant.
    fn log_normalizer(&self, lambda: &Lambda) -> Result<f64> {
        let smooth = self.smoothness();
        if smooth.r_kind != ResidualKind::Zero {
            return Err(Error::InvalidInput("only r = 0 smoothness is supported".into()));
        }
        let h = smooth.h_diag();
        let bound = match self.penalty_kind() {
            PenaltyKind::Tikhonov { scale } => normalizer::log_normalizer_tikhonov(&h, lambda, scale)?,
            PenaltyKind::Lasso => normalizer::log_normalizer_lasso(&h, lambda)?,
        };
        Ok(bound.value)
    }

    /// `argmin_λ Σ_j λ_j g_j(θ) + log Z̄(λ)` over the box of `lambda`.
    fn convex_step(&self, theta: &Self::Theta, lambda: &Lambda) -> Result<Lambda> {
        let h = self.smoothness().h_diag();
        let features = self.penalty_features(theta);
        match self.penalty_kind() {
            PenaltyKind::Tikhonov { scale } => {
                // g_j = (s/2) θ_j²  =>  |θ_j| = sqrt(2 g_j / s)
                let theta_eq: Vec<f64> = features.iter().map(|g| (2.0 * g / scale).sqrt()).collect();
                convex_step::update_tikhonov(&theta_eq, &h, scale, lambda.domain())
            }
            PenaltyKind::Lasso => convex_step::update_lasso(&features, &h, lambda.domain()),
        }
    }
}
