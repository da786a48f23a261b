//! Quadrature ground truth on the scalar Gaussian-location model
//!
//! ```text
//! f_x(θ) = (x − θ)²/2 + ½ log 2π,   g(θ, λ) = λθ²/2,   θ ∈ Ω
//! ```
//!
//! with `Ω = [−B, B]` or `Ω = ℝ`. Here `H̄₀ = Ḣ₀ = 1`, `c₀ = 0` and the RERM
//! minimizer is `θ̂(x) = clamp(x/(1+λ), −B, B)`, so every quantity in the
//! normalizer bounds reduces to a one-dimensional integral.
//!
//! All integrals are computed with adaptive Gauss–Kronrod (7/15) quadrature.
//! Data-domain truncation keeps at least 12 unit standard deviations of tail
//! beyond the last kink, which leaves a truncated mass below `e^{-72}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const LOG_2PI: f64 = 1.837_877_066_409_345_5;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const TAIL_SD: f64 = 12.0;
const MAX_DEPTH: u32 = 30;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (k, err) = gk15(f, a, b);
    if !k.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    if err <= tol || err <= 4.0 * f64::EPSILON * k.abs() {
        return Ok(k);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature(format!(
            "no convergence after {MAX_DEPTH} levels on [{a}, {b}] (error estimate {err:e})"
        )));
    }
    let m = 0.5 * (a + b);
    Ok(adapt(f, a, m, 0.5 * tol, depth + 1)? + adapt(f, m, b, 0.5 * tol, depth + 1)?)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration limits must be finite: [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    adapt(&f, a, b, tol, 0)
}

/// Integral over the union of consecutive pieces `[p_0, p_1], [p_1, p_2], …`.
fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> Result<f64> {
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    points
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], tol / pieces))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ParamDomain {
    Unbounded,
    /// `Ω = [−B, B]`.
    Bounded(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scalar1DModel {
    pub domain: ParamDomain,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "lambda must be a positive finite number, got {lambda}"
        )))
    }
}

impl Scalar1DModel {
    pub fn unbounded() -> Self {
        Self {
            domain: ParamDomain::Unbounded,
        }
    }

    pub fn bounded(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidInput(format!("B must be > 0, got {b}")));
        }
        Ok(Self {
            domain: ParamDomain::Bounded(b),
        })
    }

    pub fn theta_hat(&self, x: f64, lambda: f64) -> f64 {
        let t = x / (1.0 + lambda);
        match self.domain {
            ParamDomain::Unbounded => t,
            ParamDomain::Bounded(b) => t.clamp(-b, b),
        }
    }

    /// `min_θ f_x(θ) + g(θ, λ)`.
    pub fn rerm_min(&self, x: f64, lambda: f64) -> f64 {
        let t = self.theta_hat(x, lambda);
        0.5 * (x - t).powi(2) + 0.5 * lambda * t * t + 0.5 * LOG_2PI
    }

    /// Kink of the integrand: `|x| = B(1+λ)`; `None` when unbounded.
    fn kink(&self, lambda: f64) -> Option<f64> {
        match self.domain {
            ParamDomain::Unbounded => None,
            ParamDomain::Bounded(b) => Some(b * (1.0 + lambda)),
        }
    }

    /// Truncation point of the (symmetric) data integral.
    pub fn x_max(&self, lambda: f64) -> f64 {
        match self.domain {
            // integrand is a centered Gaussian with variance (1+λ)/λ
            ParamDomain::Unbounded => TAIL_SD * ((1.0 + lambda) / lambda).sqrt(),
            ParamDomain::Bounded(b) => {
                let kink = b * (1.0 + lambda);
                kink + TAIL_SD.max(TAIL_SD * ((1.0 + lambda) / lambda).sqrt().min(kink))
            }
        }
    }
}

/// `Z(λ) = ∫ exp{−min_θ [f_x(θ) + g(θ, λ)]} dx` by quadrature.
pub fn z_quadrature(model: &Scalar1DModel, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let f = |x: f64| (-model.rerm_min(x, lambda)).exp();
    let xm = model.x_max(lambda);
    let points: Vec<f64> = match model.kink(lambda) {
        Some(k) if k < xm => vec![0.0, k, xm],
        _ => vec![0.0, xm],
    };
    // the integrand is even and at most 1/√(2π)
    let half = integrate_pieces(&f, &points, 1e-14 * xm.max(1.0))?;
    Ok(2.0 * half)
}

/// `LNML(x | λ) = min_θ [f_x(θ) + g(θ, λ)] + log Z(λ)` for a single
/// observation.
pub fn lnml_quadrature(model: &Scalar1DModel, x: f64, lambda: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!(
            "observation must be finite, got {x}"
        )));
    }
    Ok(model.rerm_min(x, lambda) + z_quadrature(model, lambda)?.ln())
}

/// The uLNML normalizer of this model, `½ log((1+λ)/λ)`.
pub fn ulnml_log_normalizer(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(0.5 * (1.0 / lambda).ln_1p())
}

/// `R(1; [−u, u]) = P(|z| ≤ u)` for `z ~ N(0, 1)`.
pub fn neighborhood_mass(u: f64) -> Result<f64> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::InvalidInput(format!(
            "neighborhood radius must be > 0, got {u}"
        )));
    }
    let phi = |z: f64| INV_SQRT_2PI * (-0.5 * z * z).exp();
    let upper = u.min(40.0);
    Ok((2.0 * integrate(phi, 0.0, upper, 1e-16)?).min(1.0))
}

/// `T(ψ) = ∫_{x: θ̂(x, λ) ∈ int Ω} e^{−f_x(ψ)} dx`; identically 1 on `Ω = ℝ`.
pub fn t_function(model: &Scalar1DModel, psi: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let Some(k) = model.kink(lambda) else {
        return Ok(1.0);
    };
    let phi = |x: f64| INV_SQRT_2PI * (-0.5 * (x - psi).powi(2)).exp();
    // clip to where the Gaussian has mass
    let lo = (-k).max(psi - 40.0);
    let hi = k.min(psi + 40.0);
    if lo >= hi {
        return Ok(0.0);
    }
    let mut points = vec![lo];
    if lo < psi && psi < hi {
        points.push(psi);
    }
    points.push(hi);
    integrate_pieces(&phi, &points, 1e-16)
}

/// `inf_{ψ ∈ [−v, v]} T(ψ)`. `T` is the convolution of a symmetric interval
/// indicator with the unit Gaussian, so it is even and non-increasing in
/// `|ψ|`; the infimum sits at `|ψ| = v`.
pub fn t_infimum(model: &Scalar1DModel, v: f64, lambda: f64) -> Result<f64> {
    t_function(model, v, lambda)
}

/// `∫_{−v}^{v} e^{−λθ²/2} dθ`.
pub fn penalty_mass(v: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let sd = lambda.sqrt().recip();
    let upper = v.min(40.0 * sd);
    let f = |t: f64| (-0.5 * lambda * t * t).exp();
    Ok(2.0 * integrate(f, 0.0, upper, 1e-15 * sd.max(1.0))?)
}

/// Upper bound of `Z(λ)` with the neighborhood `U = [−u, u]`:
/// `√(1+λ)/(√(2π) R) ∫_{Ω+U} e^{−λθ²/2} dθ`.
pub fn z_upper_neighborhood(model: &Scalar1DModel, lambda: f64, u: f64) -> Result<f64> {
    let v = match model.domain {
        ParamDomain::Unbounded => f64::INFINITY,
        ParamDomain::Bounded(b) => b + u,
    };
    let r = neighborhood_mass(u)?;
    Ok((1.0 + lambda).sqrt() * INV_SQRT_2PI / r * penalty_mass(v, lambda)?)
}

/// Lower bound of `Z(λ)` with `V = [−v, v]`:
/// `det Ḣ(λ)^{1/2}/√(2π) · inf_V T · ∫_V e^{−λθ²/2} dθ` with `Ḣ(λ) = 1 + λ`.
pub fn z_lower_bound(model: &Scalar1DModel, lambda: f64, v: f64) -> Result<f64> {
    let t_inf = if v.is_finite() {
        t_infimum(model, v, lambda)?
    } else {
        1.0
    };
    if matches!(model.domain, ParamDomain::Bounded(_)) && !v.is_finite() {
        return Ok(0.0);
    }
    Ok((1.0 + lambda).sqrt() * INV_SQRT_2PI * t_inf * penalty_mass(v, lambda)?)
}

/// Golden-section minimizer on `[a, b]`.
///
/// The bracket is shrunk to `1e-11`, but comparisons of function values limit
/// the attainable accuracy to about `sqrt(ε)` times the curvature scale; use
/// [`minimize_1d_with_derivative`] when `1e-10` is needed. For a monotone
/// objective the search collapses onto the better endpoint, which is then
/// returned exactly.
pub fn minimize_1d<F: Fn(f64) -> f64>(objective: F, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("invalid bracket [{a}, {b}]")));
    }
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > 1e-11 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    let candidates = [(mid, objective(mid)), (a, objective(a)), (b, objective(b))];
    let best = candidates
        .iter()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .ok_or_else(|| Error::Numerical("objective is NaN on the whole bracket".into()))?;
    Ok(best.0)
}

/// Bisection on the sign of `derivative` over `[a, b]` to `1e-10` absolute.
/// Without a sign change the endpoint with the lower objective is returned.
pub fn minimize_1d_with_derivative<F, D>(objective: F, derivative: D, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("invalid bracket [{a}, {b}]")));
    }
    let (da, db) = (derivative(a), derivative(b));
    if !(da < 0.0 && db > 0.0) {
        return Ok(if objective(a) <= objective(b) { a } else { b });
    }
    let (mut lo, mut hi) = (a, b);
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if derivative(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub lambda: f64,
    pub log_z: f64,
    /// `log` of the neighborhood upper bound minus `log Z`.
    pub gap: f64,
    /// uLNML normalizer `½ log(1 + 1/λ)` minus `log Z`.
    pub ulnml_gap: f64,
    pub log_lower: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    /// Uniform constant `−log R(1; U) − log inf_{Ω+U} T`.
    pub bound: f64,
    /// Neighborhood radius `u` of `U = [−u, u]`.
    pub u: f64,
    pub passed: bool,
}

impl GapReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Uniform gap constant and the radius achieving it, with `T` taken at the
/// smallest weight `lambda_min` (the smallest interior-data set).
pub fn gap_constant(model: &Scalar1DModel, lambda_min: f64) -> Result<(f64, f64)> {
    let b = match model.domain {
        ParamDomain::Unbounded => return Ok((0.0, f64::INFINITY)),
        ParamDomain::Bounded(b) => b,
    };
    let value = |u: f64| -> f64 {
        match (neighborhood_mass(u), t_infimum(model, b + u, lambda_min)) {
            (Ok(r), Ok(t)) if r > 0.0 && t > 0.0 => -r.ln() - t.ln(),
            _ => f64::INFINITY,
        }
    };
    let u = minimize_1d(value, 1e-3, 20.0)?;
    Ok((value(u), u))
}

/// Measures `log Z̄_U(λ) − log Z(λ)` on every grid weight and compares it
/// against the single constant from [`gap_constant`].
pub fn gap_check(model: &Scalar1DModel, lambdas: &[f64]) -> Result<GapReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let (bound, u) = gap_constant(model, lambda_min)?;
    let rows: Result<Vec<GapRow>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let log_z = z_quadrature(model, lambda)?.ln();
            let ulnml_gap = ulnml_log_normalizer(lambda)? - log_z;
            let (gap, v) = match model.domain {
                ParamDomain::Unbounded => (ulnml_gap, f64::INFINITY),
                ParamDomain::Bounded(b) => (z_upper_neighborhood(model, lambda, u)?.ln() - log_z, b + u),
            };
            let log_lower = z_lower_bound(model, lambda, v)?.ln();
            Ok(GapRow {
                lambda,
                log_z,
                gap,
                ulnml_gap,
                log_lower,
            })
        })
        .collect();
    let rows = rows?;
    let passed = rows.iter().all(|r| r.gap <= bound + 1e-8);
    Ok(GapReport {
        rows,
        bound,
        u,
        passed,
    })
}

/// `count` weights spaced evenly in log scale over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i + 1 == count => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}
