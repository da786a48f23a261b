//! C ABI over the `ulnml` library.
//!
//! All functions return a [`UlnmlStatus`]. On failure a message is kept in
//! thread-local storage and can be read with [`ulnml_last_error`]. Matrices
//! are dense row-major `double` arrays. Handles are opaque and must be
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ulnml::convex_step::{update_lasso, update_tikhonov};
use ulnml::ggm::{self, GgmProblem};
use ulnml::linalg::{Matrix, Vector};
use ulnml::normalizer::{log_normalizer_lasso, log_normalizer_tikhonov};
use ulnml::ridge::{self, RidgeNormalizer, RidgeProblem};
use ulnml::{fit, BoxDomain, Error, Lambda, StopRule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UlnmlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    Domain = 5,
    Io = 6,
    Panic = 7,
}

/// Normalizer variant for ridge handles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UlnmlRidgeNormalizer {
    Full = 0,
    Diagonal = 1,
}

/// Opaque ridge regression problem.
pub struct UlnmlRidge {
    problem: RidgeProblem,
}

/// Opaque Gaussian graphical model problem.
pub struct UlnmlGgm {
    problem: GgmProblem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UlnmlStatus {
    match e {
        Error::InvalidInput(_) | Error::Data(_) => UlnmlStatus::InvalidInput,
        Error::DimensionMismatch { .. } => UlnmlStatus::DimensionMismatch,
        Error::Domain(_) => UlnmlStatus::Domain,
        Error::Io(_) | Error::Csv(_) => UlnmlStatus::Io,
        Error::Iteration { source, .. } => status_of(source),
        _ => UlnmlStatus::Numerical,
    }
}

struct Fail(UlnmlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> UlnmlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UlnmlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UlnmlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(UlnmlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    *p = v;
    Ok(())
}

fn checked_len(a: usize, b: usize) -> Result<usize, Fail> {
    a.checked_mul(b)
        .ok_or_else(|| Fail(UlnmlStatus::InvalidInput, "matrix size overflows".into()))
}

/// Message of the most recent call on this thread if it failed, else null.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ulnml_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Tikhonov normalizer bound `Σ ½ log(1 + h_j / (s λ_j))`.
///
/// # Safety
/// `h` and `lambda` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ulnml_log_normalizer_tikhonov(
    h: *const f64,
    lambda: *const f64,
    len: usize,
    scale: f64,
    out: *mut f64,
) -> UlnmlStatus {
    guard(|| {
        let h = slice(h, len, "h")?;
        let l = Lambda::new(slice(lambda, len, "lambda")?.to_vec(), open_box(len)?)?;
        write(out, log_normalizer_tikhonov(h, &l, scale)?.value, "out")
    })
}

/// Lasso normalizer bound `Σ [½ log(e/2π) + ½ log(1 + h_j / λ_j²)]`.
///
/// # Safety
/// As [`ulnml_log_normalizer_tikhonov`].
#[no_mangle]
pub unsafe extern "C" fn ulnml_log_normalizer_lasso(
    h: *const f64,
    lambda: *const f64,
    len: usize,
    out: *mut f64,
) -> UlnmlStatus {
    guard(|| {
        let h = slice(h, len, "h")?;
        let l = Lambda::new(slice(lambda, len, "lambda")?.to_vec(), open_box(len)?)?;
        write(out, log_normalizer_lasso(h, &l)?.value, "out")
    })
}

fn open_box(len: usize) -> Result<BoxDomain, Fail> {
    Ok(BoxDomain::uniform(len.max(1), f64::MIN_POSITIVE, f64::MAX)?)
}

/// Closed-form Tikhonov weight update projected to `[lo, hi]^len`.
///
/// # Safety
/// `theta` and `h` must point to `len` doubles, `out` to `len` writable ones.
#[no_mangle]
pub unsafe extern "C" fn ulnml_update_tikhonov(
    theta: *const f64,
    h: *const f64,
    len: usize,
    scale: f64,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> UlnmlStatus {
    guard(|| {
        let t = slice(theta, len, "theta")?;
        let h = slice(h, len, "h")?;
        let o = slice_mut(out, len, "out")?;
        let l = update_tikhonov(t, h, scale, &BoxDomain::uniform(len, lo, hi)?)?;
        o.copy_from_slice(l.weights());
        Ok(())
    })
}

/// Closed-form lasso weight update projected to `[lo, hi]^len`.
///
/// # Safety
/// As [`ulnml_update_tikhonov`].
#[no_mangle]
pub unsafe extern "C" fn ulnml_update_lasso(
    theta: *const f64,
    h: *const f64,
    len: usize,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> UlnmlStatus {
    guard(|| {
        let t = slice(theta, len, "theta")?;
        let h = slice(h, len, "h")?;
        let o = slice_mut(out, len, "out")?;
        let l = update_lasso(t, h, &BoxDomain::uniform(len, lo, hi)?)?;
        o.copy_from_slice(l.weights());
        Ok(())
    })
}

/// Builds a ridge problem from an `n × p` row-major design and `n` targets.
///
/// # Safety
/// `x` must hold `n * p` doubles, `y` `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ulnml_ridge_new(
    x: *const f64,
    n: usize,
    p: usize,
    y: *const f64,
    normalizer: UlnmlRidgeNormalizer,
    out: *mut *mut UlnmlRidge,
) -> UlnmlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = slice(x, checked_len(n, p)?, "x")?;
        let ys = slice(y, n, "y")?;
        let kind = match normalizer {
            UlnmlRidgeNormalizer::Full => RidgeNormalizer::Full,
            UlnmlRidgeNormalizer::Diagonal => RidgeNormalizer::Diagonal,
        };
        let problem = RidgeProblem::with_default_bounds(
            Matrix::from_row_slice(n, p, xs),
            Vector::from_column_slice(ys),
        )?
        .with_normalizer(kind);
        *out = Box::into_raw(Box::new(UlnmlRidge { problem }));
        Ok(())
    })
}

/// Runs MDL-RS from the box center. `lambda_out` and `beta_out` receive `p`
/// values each; `ulnml_out` and `iterations_out` may be null.
///
/// # Safety
/// `handle` must come from [`ulnml_ridge_new`]; buffers must hold `p` doubles.
#[no_mangle]
pub unsafe extern "C" fn ulnml_ridge_fit(
    handle: *const UlnmlRidge,
    max_iter: usize,
    rel_tol: f64,
    lambda_out: *mut f64,
    beta_out: *mut f64,
    ulnml_out: *mut f64,
    iterations_out: *mut usize,
) -> UlnmlStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let p = h.problem.p();
        let lam = slice_mut(lambda_out, p, "lambda_out")?;
        let beta = slice_mut(beta_out, p, "beta_out")?;
        let f = fit(
            &h.problem,
            &ridge::default_box(p)?.geometric_center(),
            StopRule::new(max_iter, rel_tol)?,
        )?;
        lam.copy_from_slice(f.lambda.weights());
        beta.copy_from_slice(&f.theta.beta);
        if !ulnml_out.is_null() {
            *ulnml_out = f.ulnml;
        }
        if !iterations_out.is_null() {
            *iterations_out = f.iterations();
        }
        Ok(())
    })
}

/// Releases a ridge handle. Null is ignored.
///
/// # Safety
/// `handle` must come from [`ulnml_ridge_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ulnml_ridge_free(handle: *mut UlnmlRidge) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Builds a graphical model problem from an `n × m` row-major data matrix.
/// `radius <= 0` selects the data-dependent default.
///
/// # Safety
/// `data` must hold `n * m` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ulnml_ggm_new(
    data: *const f64,
    n: usize,
    m: usize,
    radius: f64,
    out: *mut *mut UlnmlGgm,
) -> UlnmlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = slice(data, checked_len(n, m)?, "data")?;
        let r = if radius > 0.0 { Some(radius) } else { None };
        let problem = GgmProblem::from_data(&Matrix::from_row_slice(n, m, d), r)?;
        *out = Box::into_raw(Box::new(UlnmlGgm { problem }));
        Ok(())
    })
}

/// Number of free pair weights, `m (m − 1) / 2`; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or come from [`ulnml_ggm_new`].
#[no_mangle]
pub unsafe extern "C" fn ulnml_ggm_num_pairs(handle: *const UlnmlGgm) -> usize {
    handle.as_ref().map_or(0, |h| h.problem.pairs().len())
}

/// Runs MDL-RS from the box center. `theta_out` receives the `m × m`
/// precision (row-major), `lambda_out` the pair weights in upper-triangular
/// row order. `ulnml_out` and `iterations_out` may be null.
///
/// # Safety
/// `handle` must come from [`ulnml_ggm_new`]; buffers must be sized as above.
#[no_mangle]
pub unsafe extern "C" fn ulnml_ggm_fit(
    handle: *const UlnmlGgm,
    max_iter: usize,
    rel_tol: f64,
    theta_out: *mut f64,
    lambda_out: *mut f64,
    ulnml_out: *mut f64,
    iterations_out: *mut usize,
) -> UlnmlStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let m = h.problem.m();
        let theta = slice_mut(theta_out, m * m, "theta_out")?;
        let lam = slice_mut(lambda_out, h.problem.pairs().len(), "lambda_out")?;
        let f = fit(
            &h.problem,
            &ggm::default_box(m)?.geometric_center(),
            StopRule::new(max_iter, rel_tol)?,
        )?;
        for i in 0..m {
            for j in 0..m {
                theta[i * m + j] = f.theta.theta[(i, j)];
            }
        }
        lam.copy_from_slice(f.lambda.weights());
        if !ulnml_out.is_null() {
            *ulnml_out = f.ulnml;
        }
        if !iterations_out.is_null() {
            *iterations_out = f.iterations();
        }
        Ok(())
    })
}

/// Releases a graphical model handle. Null is ignored.
///
/// # Safety
/// `handle` must come from [`ulnml_ggm_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ulnml_ggm_free(handle: *mut UlnmlGgm) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
