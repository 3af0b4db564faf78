//! C interface to `gms`.
//!
//! Every function returns a [`GmsStatus`]. On failure a message is stored in
//! a thread-local slot and can be read with [`gms_last_error_message`].
//! Matrices are passed as row-major `double` arrays. Handles are opaque and
//! must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gms::numerics::{self, PointSet, Subspace};
use gms::recovery::{self, RecoveryResult, Reduction};
use gms::solver::IrlsConfig;
use gms::synthdata::{self, SyntheticConfig};
use gms::GmsError;
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The data or the solver failed numerically (rank deficiency,
    /// divergence, degenerate spectra).
    Numerical = 3,
    /// The caller's buffer is too small.
    BufferTooSmall = 4,
    Panic = 5,
}

/// Data points, one per row.
pub struct GmsPoints {
    inner: PointSet,
}

/// Outcome of a recovery call.
pub struct GmsResult {
    inner: RecoveryResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(GmsStatus, String);

impl From<GmsError> for Failure {
    fn from(e: GmsError) -> Self {
        let status = if e.is_numerical() {
            GmsStatus::Numerical
        } else {
            GmsStatus::InvalidArgument
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(GmsStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(GmsStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GmsStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GmsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            GmsStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_matrix(m: &DMatrix<f64>, out: *mut f64, out_len: usize) -> Result<(), Failure> {
    let need = m.nrows() * m.ncols();
    if out_len < need {
        return Err(Failure(
            GmsStatus::BufferTooSmall,
            format!("buffer holds {out_len} values, need {need}"),
        ));
    }
    if need == 0 {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("out"));
    }
    let dst = std::slice::from_raw_parts_mut(out, need);
    for (k, v) in m.transpose().iter().enumerate() {
        dst[k] = *v;
    }
    Ok(())
}

fn row_major(data: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next `gms_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn gms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies an `n × dim` row-major array into a new point set.
///
/// # Safety
/// `data` must point to `n * dim` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn gms_points_new(
    data: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut GmsPoints,
) -> GmsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let len = n.checked_mul(dim).ok_or_else(|| invalid("n * dim overflows"))?;
        let values = slice(data, len, "data")?;
        let inner = PointSet::new(row_major(values, n, dim))?;
        *out = Box::into_raw(Box::new(GmsPoints { inner }));
        Ok(())
    })
}

/// # Safety
/// `points` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn gms_points_free(points: *mut GmsPoints) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// # Safety
/// `points` must be a live handle; `n` and `dim` may be null.
#[no_mangle]
pub unsafe extern "C" fn gms_points_shape(
    points: *const GmsPoints,
    n: *mut usize,
    dim: *mut usize,
) -> GmsStatus {
    guard(|| {
        let p = points.as_ref().ok_or_else(|| null("points"))?;
        if !n.is_null() {
            *n = p.inner.len();
        }
        if !dim.is_null() {
            *dim = p.inner.dim();
        }
        Ok(())
    })
}

/// Samples the haystack model: `n1` Gaussian inliers on a random
/// `d`-subspace of ℝ^dim and `n0` outliers uniform on the unit cube, with
/// Gaussian noise of size `eta` on the inliers. When `basis_out` is not
/// null the `dim × d` basis of the subspace is written to it row-major.
///
/// # Safety
/// `out` must be writable; `basis_out` must hold `basis_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gms_haystack(
    n1: usize,
    n0: usize,
    dim: usize,
    d: usize,
    eta: f64,
    seed: u64,
    out: *mut *mut GmsPoints,
    basis_out: *mut f64,
    basis_len: usize,
) -> GmsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = SyntheticConfig::haystack(n1, n0, dim, d)
            .with_eta(eta)
            .with_seed(seed);
        let sample = synthdata::generate(&cfg)?;
        if !basis_out.is_null() {
            write_matrix(sample.l_star.basis(), basis_out, basis_len)?;
        }
        *out = Box::into_raw(Box::new(GmsPoints {
            inner: sample.points,
        }));
        Ok(())
    })
}

/// Runs GMS. `d = 0` estimates the dimension from the largest log-eigengap;
/// `delta <= 0` and `max_iter = 0` select the defaults.
///
/// # Safety
/// `points` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gms_recover(
    points: *const GmsPoints,
    d: usize,
    delta: f64,
    max_iter: usize,
    out: *mut *mut GmsResult,
) -> GmsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = points.as_ref().ok_or_else(|| null("points"))?;
        let mut cfg = IrlsConfig::default();
        if delta > 0.0 {
            cfg.delta = delta;
        } else if delta.is_nan() {
            return Err(invalid("delta is NaN"));
        }
        if max_iter > 0 {
            cfg.max_iter = max_iter;
        }
        let d = (d > 0).then_some(d);
        let inner = recovery::gms_with(&p.inner, d, &cfg, Reduction::Lossless)?;
        *out = Box::into_raw(Box::new(GmsResult { inner }));
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn gms_result_free(result: *mut GmsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Ambient and subspace dimension of the recovered subspace.
///
/// # Safety
/// `result` must be a live handle; `ambient` and `d` may be null.
#[no_mangle]
pub unsafe extern "C" fn gms_result_dims(
    result: *const GmsResult,
    ambient: *mut usize,
    d: *mut usize,
) -> GmsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if !ambient.is_null() {
            *ambient = r.inner.subspace.ambient_dim();
        }
        if !d.is_null() {
            *d = r.inner.subspace.dim();
        }
        Ok(())
    })
}

/// Writes the `D × d` orthonormal basis row-major.
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gms_result_basis(
    result: *const GmsResult,
    out: *mut f64,
    out_len: usize,
) -> GmsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        write_matrix(r.inner.subspace.basis(), out, out_len)
    })
}

/// Writes the `D × D` minimizer `Q̂` row-major.
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gms_result_q(
    result: *const GmsResult,
    out: *mut f64,
    out_len: usize,
) -> GmsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        write_matrix(r.inner.q_hat.matrix(), out, out_len)
    })
}

/// Iteration count and convergence flag of the underlying solve.
///
/// # Safety
/// `result` must be a live handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn gms_result_solve_info(
    result: *const GmsResult,
    iterations: *mut usize,
    converged: *mut bool,
    objective: *mut f64,
) -> GmsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if !iterations.is_null() {
            *iterations = r.inner.solve.iterations;
        }
        if !converged.is_null() {
            *converged = r.inner.solve.converged;
        }
        if !objective.is_null() {
            *objective = r.inner.solve.final_objective();
        }
        Ok(())
    })
}

/// Frobenius distance between the projectors onto the spans of two
/// row-major orthonormal bases of sizes `dim × da` and `dim × db`.
///
/// # Safety
/// `a` and `b` must hold `dim * da` and `dim * db` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gms_recovery_error(
    a: *const f64,
    da: usize,
    b: *const f64,
    db: usize,
    dim: usize,
    out: *mut f64,
) -> GmsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = |k: usize| dim.checked_mul(k).ok_or_else(|| invalid("size overflows"));
        let sa = Subspace::new(row_major(slice(a, len(da)?, "a")?, dim, da))?;
        let sb = Subspace::new(row_major(slice(b, len(db)?, "b")?, dim, db))?;
        *out = numerics::recovery_error(&sa, &sb)?;
        Ok(())
    })
}
