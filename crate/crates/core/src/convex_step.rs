//! The weight-update half of the selection loop:
//! `argmin_{λ ∈ box} Σ_j λ_j g_j(θ) + log Z̄(λ)` for fixed `θ`.
//!
//! Both bounds are separable across coordinates, so each update is a set of
//! independent scalar convex problems solved in closed form and clamped.

use crate::error::{check_len, Error, Result};
use crate::types::{project_limits, BoxDomain, Lambda};

/// Unconstrained minimizer of `(s/2) λ θ² + ½ log((h + sλ)/(sλ))`.
///
/// The first-order condition in `u = sλ` is `u² + h u − h/θ² = 0`; the
/// positive root is evaluated as `2 / (θ² + |θ| sqrt(θ² + 4/h))`, which has
/// no cancellation and reaches the right limits for `h = 0` (→ 0) and
/// `h = ∞` (→ 1/θ²). `θ = 0` diverges to `+∞`.
pub fn tikhonov_root(theta: f64, h: f64, scale: f64) -> f64 {
    if theta == 0.0 {
        return f64::INFINITY;
    }
    let t2 = theta * theta;
    let u = 2.0 / (t2 + theta.abs() * (t2 + 4.0 / h).sqrt());
    u / scale
}

/// Unconstrained minimizer of `λ|θ| + ½ log((h + λ²)/λ²)`.
///
/// Stationarity gives the depressed cubic `λ³ + hλ − h/|θ| = 0`, which has a
/// single positive root. Cardano's formula with `α = h / (2|θ|)` gives the
/// starting value; a few Newton steps remove the cancellation that
/// `∛(α + D) + ∛(α − D)` suffers when `h` dominates.
pub fn lasso_root(theta: f64, h: f64) -> f64 {
    let t = theta.abs();
    if t == 0.0 {
        return f64::INFINITY;
    }
    if h == 0.0 {
        return 0.0;
    }
    let q = h / t;
    let alpha = 0.5 * q;
    let disc = (alpha * alpha + (h / 3.0).powi(3)).sqrt();
    let mut lam = (alpha + disc).cbrt() + (alpha - disc).cbrt();
    if !(lam.is_finite() && lam > 0.0) {
        // fall back to the bound λ <= min(q^{1/3}, q/h)
        lam = q.cbrt().min(1.0 / t);
    }
    for _ in 0..4 {
        let f = lam * lam * lam + h * lam - q;
        let df = 3.0 * lam * lam + h;
        let next = lam - f / df;
        if !(next.is_finite() && next > 0.0) {
            break;
        }
        lam = next;
    }
    lam
}

fn check_inputs(theta: &[f64], h_diag: &[f64], domain: &BoxDomain) -> Result<()> {
    check_len(domain.dim(), theta.len(), "theta vs box")?;
    check_len(domain.dim(), h_diag.len(), "smoothness vs box")?;
    if let Some(t) = theta.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite parameter {t}")));
    }
    if let Some(h) = h_diag.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "smoothness entries must be >= 0, got {h}"
        )));
    }
    Ok(())
}

/// Closed-form weight update for `g = (s/2) Σ λ_j θ_j²` with diagonal `H0`.
pub fn update_tikhonov(theta: &[f64], h_diag: &[f64], scale: f64, domain: &BoxDomain) -> Result<Lambda> {
    check_inputs(theta, h_diag, domain)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be > 0, got {scale}")));
    }
    let raw: Vec<f64> = theta
        .iter()
        .zip(h_diag)
        .map(|(&t, &h)| tikhonov_root(t, h, scale))
        .collect();
    Ok(project_limits(&raw, domain))
}

/// Closed-form weight update for `g = Σ λ_j |θ_j|` with diagonal `H0`.
pub fn update_lasso(theta: &[f64], h_diag: &[f64], domain: &BoxDomain) -> Result<Lambda> {
    check_inputs(theta, h_diag, domain)?;
    let raw: Vec<f64> = theta
        .iter()
        .zip(h_diag)
        .map(|(&t, &h)| lasso_root(t, h))
        .collect();
    Ok(project_limits(&raw, domain))
}

/// Per-coordinate bisection on the sign of `g_j + ∂_j log Z̄(λ)`.
///
/// Requires each scalar objective `λ_j g_j + b_j(λ_j)` to be convex on the
/// interval. `bound_derivative(j, λ_j)` returns `∂ b_j / ∂ λ_j`. Bisection
/// runs until the bracket stops shrinking in floating point, which is well
/// below `1e-10 (b_j − a_j)`.
pub fn update_numeric<F>(penalty_features: &[f64], bound_derivative: F, domain: &BoxDomain) -> Result<Lambda>
where
    F: Fn(usize, f64) -> f64,
{
    check_len(domain.dim(), penalty_features.len(), "features vs box")?;
    let mut out = Vec::with_capacity(domain.dim());
    for (j, (&g, iv)) in penalty_features.iter().zip(domain.bounds()).enumerate() {
        let deriv = |l: f64| g + bound_derivative(j, l);
        let (mut lo, mut hi) = (iv.lo(), iv.hi());
        let (d_lo, d_hi) = (deriv(lo), deriv(hi));
        if !(d_lo.is_finite() && d_hi.is_finite()) {
            return Err(Error::Numerical(format!(
                "derivative not finite at bracket of coordinate {j}: ({d_lo}, {d_hi})"
            )));
        }
        if d_lo >= 0.0 {
            out.push(lo);
            continue;
        }
        if d_hi <= 0.0 {
            out.push(hi);
            continue;
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if deriv(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Lambda::new(out, domain.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide(d: usize) -> BoxDomain {
        BoxDomain::uniform(d, 1e-6, 1e6).unwrap()
    }

    // ∂/∂λ of ½ log((h + sλ)/(sλ)), written independently of the root formula
    fn tik_bound_deriv(h: f64, s: f64, l: f64) -> f64 {
        0.5 * s / (h + s * l) - 0.5 / l
    }

    fn lasso_bound_deriv(h: f64, l: f64) -> f64 {
        l / (h + l * l) - 1.0 / l
    }

    #[test]
    fn tikhonov_reference_value() {
        let l = update_tikhonov(&[1.0], &[4.0], 1.0, &wide(1)).unwrap();
        assert!((l.weights()[0] - 0.828_427_124_746_190_1).abs() < 1e-14);
    }

    #[test]
    fn tikhonov_unit_scale_half_h_form() {
        for &(h, t) in &[(4.0f64, 1.0f64), (0.3, 2.0), (100.0, 0.01)] {
            let direct: f64 = h / 2.0 * ((1.0 + 4.0 / (t * t * h)).sqrt() - 1.0);
            assert!((tikhonov_root(t, h, 1.0) - direct).abs() < 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn tikhonov_degenerate_coordinates() {
        let d = BoxDomain::uniform(3, 0.1, 50.0).unwrap();
        let l = update_tikhonov(&[0.0, 1e9, 1.0], &[4.0, 4.0, 0.0], 1.0, &d).unwrap();
        assert_eq!(l.weights(), &[50.0, 0.1, 0.1]);
    }

    #[test]
    fn tikhonov_matches_numeric() {
        let d = wide(1);
        let closed = update_tikhonov(&[1.0], &[4.0], 1.0, &d).unwrap();
        let numeric = update_numeric(&[0.5], |_, l| tik_bound_deriv(4.0, 1.0, l), &d).unwrap();
        assert!((closed.weights()[0] - numeric.weights()[0]).abs() < 1e-8);
    }

    #[test]
    fn general_scale_matches_numeric() {
        let d = wide(1);
        for &(s, h, t) in &[(2.0, 8.0, 0.25), (0.37, 1.3, 2.2), (25.0, 0.01, 0.05)] {
            let closed = update_tikhonov(&[t], &[h], s, &d).unwrap();
            let numeric = update_numeric(&[0.5 * s * t * t], |_, l| tik_bound_deriv(h, s, l), &d).unwrap();
            assert!(
                (closed.weights()[0] - numeric.weights()[0]).abs() < 1e-8,
                "s={s} h={h} t={t}"
            );
        }
    }

    #[test]
    fn lasso_reference_value() {
        // positive root of λ³ + 3λ − 3 = 0
        let l = update_lasso(&[1.0], &[3.0], &wide(1)).unwrap();
        assert!((l.weights()[0] - 0.817_731_673_886_823_5).abs() < 1e-13);
        let numeric = update_numeric(&[1.0], |_, l| lasso_bound_deriv(3.0, l), &wide(1)).unwrap();
        assert!((l.weights()[0] - numeric.weights()[0]).abs() < 1e-8);
    }

    #[test]
    fn lasso_root_satisfies_cubic() {
        for &(h, t) in &[(3.0, 1.0), (1e4, 0.3), (1e-4, 20.0), (7.0, 1e-5)] {
            let l = lasso_root(t, h);
            let resid = l * l * l + h * l - h / t;
            assert!(resid.abs() < 1e-10 * (h / t), "h={h} t={t} resid={resid}");
        }
    }

    #[test]
    fn lasso_degenerate_coordinates() {
        let d = BoxDomain::uniform(2, 0.5, 20.0).unwrap();
        let l = update_lasso(&[0.0, 1.0], &[3.0, 0.0], &d).unwrap();
        assert_eq!(l.weights(), &[20.0, 0.5]);
    }

    #[test]
    fn numeric_monotone_objectives_hit_endpoints() {
        let d = BoxDomain::uniform(2, 1.0, 3.0).unwrap();
        let l = update_numeric(&[1.0, -1.0], |_, _| 0.0, &d).unwrap();
        assert_eq!(l.weights(), &[1.0, 3.0]);
    }

    #[test]
    fn numeric_rejects_non_finite_bracket() {
        let d = BoxDomain::uniform(1, 1.0, 3.0).unwrap();
        assert!(update_numeric(&[1.0], |_, _| f64::NAN, &d).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closed_forms_agree_with_bisection(
                h in 1e-3f64..1e3,
                t in prop_oneof![-10.0f64..-1e-2, 1e-2f64..10.0],
                s in 0.1f64..10.0,
            ) {
                let d = wide(1);
                let tik = update_tikhonov(&[t], &[h], s, &d).unwrap();
                let tik_num = update_numeric(&[0.5 * s * t * t], |_, l| tik_bound_deriv(h, s, l), &d).unwrap();
                prop_assert!((tik.weights()[0] - tik_num.weights()[0]).abs() < 1e-8);

                let las = update_lasso(&[t], &[h], &d).unwrap();
                let las_num = update_numeric(&[t.abs()], |_, l| lasso_bound_deriv(h, l), &d).unwrap();
                prop_assert!((las.weights()[0] - las_num.weights()[0]).abs() < 1e-8);
            }

            #[test]
            fn outputs_in_box(
                ts in proptest::collection::vec(-1e3f64..1e3, 1..6),
                h in 0.0f64..1e4,
                lo in 1e-4f64..1.0,
                span in 0.0f64..1e3,
            ) {
                let d = BoxDomain::uniform(ts.len(), lo, lo + span).unwrap();
                let hs = vec![h; ts.len()];
                for l in [update_tikhonov(&ts, &hs, 1.0, &d).unwrap(), update_lasso(&ts, &hs, &d).unwrap()] {
                    prop_assert!(Lambda::new(l.weights().to_vec(), d.clone()).is_ok());
                }
            }
        }
    }
}
