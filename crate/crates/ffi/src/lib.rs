//! C ABI over the `suptail` library.
//!
//! Every function returns a [`SuptailStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read with
//! [`suptail_last_error_message`]. Panics never cross the boundary; they are
//! reported as `SUPTAIL_STATUS_PANIC`.
//!
//! Functions taking a `const SuptailParams *` accept `NULL` for the default
//! constants and the class `D = 1`, `L = 1`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use suptail::bounds::{self, BoundParams, DenseClass, Regime};
use suptail::empirical::{self, SamplePath};
use suptail::montecarlo;
use suptail::poisson;
use suptail::rng::{experiment, StreamSeed};
use suptail::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuptailStatus {
    Ok = 0,
    InvalidArgument = 1,
    /// The bound's validity conditions fail at this input.
    NotApplicable = 2,
    StateSpaceTooLarge = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuptailRegime {
    A = 0,
    B = 1,
    C = 2,
}

impl From<Regime> for SuptailRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::A => SuptailRegime::A,
            Regime::B => SuptailRegime::B,
            Regime::C => SuptailRegime::C,
        }
    }
}

/// Poisson lower-bound construction at rate `n`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuptailLowerBound {
    pub hat_u: f64,
    pub m_star: u64,
    pub log_t: f64,
    /// `1 - exp(-T)`
    pub probability: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuptailCondition {
    pub holds: bool,
    /// `log LHS - log RHS`
    pub log_margin: f64,
}

/// Bound constants plus the density parameters of the class.
pub struct SuptailParams {
    bounds: BoundParams,
    dims: DenseClass,
}

/// A sorted uniform sample.
pub struct SuptailPath {
    path: SamplePath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: SuptailStatus, msg: impl Into<String>) -> SuptailStatus {
    set_last_error(msg.into());
    status
}

fn status_of(err: Error) -> SuptailStatus {
    let status = match &err {
        Error::StateSpaceTooLarge { .. } => SuptailStatus::StateSpaceTooLarge,
        e if e.is_not_applicable() => SuptailStatus::NotApplicable,
        _ => SuptailStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

fn guard(body: impl FnOnce() -> Result<(), SuptailStatus>) -> SuptailStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SuptailStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SuptailStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift<T>(r: suptail::Result<T>) -> Result<T, SuptailStatus> {
    r.map_err(status_of)
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, SuptailStatus> {
    p.as_mut()
        .ok_or_else(|| fail(SuptailStatus::NullPointer, format!("{name} is NULL")))
}

unsafe fn params_or_default(p: *const SuptailParams) -> (BoundParams, DenseClass) {
    match p.as_ref() {
        Some(p) => (p.bounds, p.dims),
        None => (BoundParams::default(), DenseClass::default()),
    }
}

/// Message of the last failed call on this thread, or `NULL` after a
/// successful one. The pointer stays valid until the next call into the
/// library on the same thread.
#[no_mangle]
pub extern "C" fn suptail_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn suptail_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Allocates parameters holding the defaults. Release with
/// [`suptail_params_free`].
#[no_mangle]
pub extern "C" fn suptail_params_new() -> *mut SuptailParams {
    Box::into_raw(Box::new(SuptailParams {
        bounds: BoundParams::default(),
        dims: DenseClass::default(),
    }))
}

/// # Safety
/// `params` must be `NULL` or a pointer from [`suptail_params_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn suptail_params_free(params: *mut SuptailParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Sets one constant by name (`C1` .. `C6`, `K`, `alpha`, `alpha_bar`, `C`,
/// `A0`, `Cbar`). The set is validated as a whole; on failure nothing changes.
///
/// # Safety
/// `params` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn suptail_params_set(
    params: *mut SuptailParams,
    name: *const c_char,
    value: f64,
) -> SuptailStatus {
    guard(|| {
        let params = out(params, "params")?;
        if name.is_null() {
            return Err(fail(SuptailStatus::NullPointer, "name is NULL"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(SuptailStatus::InvalidArgument, "name is not UTF-8"))?;
        let mut next = params.bounds;
        lift(next.set(name, value))?;
        lift(next.validate())?;
        params.bounds = next;
        Ok(())
    })
}

/// Sets the density parameter `D ≥ 1` and exponent `L > 0` of the class.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn suptail_params_set_class(
    params: *mut SuptailParams,
    d: f64,
    l: f64,
) -> SuptailStatus {
    guard(|| {
        let params = out(params, "params")?;
        params.dims = lift(DenseClass::new(d, l))?;
        Ok(())
    })
}

/// # Safety
/// `out_regime` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_classify_regime(
    n: u64,
    sigma2: f64,
    out_regime: *mut SuptailRegime,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_regime, "out_regime")?;
        *o = lift(bounds::classify_regime(n, sigma2))?.into();
        Ok(())
    })
}

/// # Safety
/// `params` must be `NULL` or a live handle; `out_u` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_threshold_u(
    n: u64,
    sigma2: f64,
    params: *const SuptailParams,
    out_u: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_u, "out_u")?;
        let (p, dims) = params_or_default(params);
        *o = lift(bounds::threshold_u(n, sigma2, &dims, &p))?;
        Ok(())
    })
}

/// # Safety
/// `params` must be `NULL` or a live handle; `out_u_bar` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_threshold_u_bar(
    sigma2: f64,
    params: *const SuptailParams,
    out_u_bar: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_u_bar, "out_u_bar")?;
        let (p, dims) = params_or_default(params);
        *o = lift(bounds::threshold_u_bar(sigma2, &dims, &p))?;
        Ok(())
    })
}

/// `û(σ)`.
///
/// # Safety
/// `params` must be `NULL` or a live handle; `out_level` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_lower_bound_level(
    n: u64,
    sigma2: f64,
    params: *const SuptailParams,
    out_level: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_level, "out_level")?;
        let (p, _) = params_or_default(params);
        *o = lift(bounds::lower_bound_level(n, sigma2, &p))?;
        Ok(())
    })
}

/// Main tail bound, valid for `v ≥ u(σ)`.
///
/// # Safety
/// `params` must be `NULL` or a live handle; `out_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_upper_bound(
    n: u64,
    sigma2: f64,
    v: f64,
    params: *const SuptailParams,
    out_bound: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_bound, "out_bound")?;
        let (p, dims) = params_or_default(params);
        *o = lift(bounds::upper_bound_theorem1(n, sigma2, v, &dims, &p))?;
        Ok(())
    })
}

/// Gaussian-type bound for `ū(σ) ≤ v ≤ √n σ²` in regime C.
///
/// # Safety
/// `params` must be `NULL` or a live handle; `out_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_upper_bound_extension(
    n: u64,
    sigma2: f64,
    v: f64,
    params: *const SuptailParams,
    out_bound: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_bound, "out_bound")?;
        let (p, dims) = params_or_default(params);
        *o = lift(bounds::upper_bound_extension(n, sigma2, v, &dims, &p))?;
        Ok(())
    })
}

/// Bound for `ū(σ) < v ≤ u(σ)` in regime C.
///
/// # Safety
/// `params` must be `NULL` or a live handle; `out_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_upper_bound_gap(
    n: u64,
    sigma2: f64,
    v: f64,
    params: *const SuptailParams,
    out_bound: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_bound, "out_bound")?;
        let (p, dims) = params_or_default(params);
        *o = lift(bounds::upper_bound_gap(n, sigma2, v, &dims, &p))?;
        Ok(())
    })
}

/// Bennett's inequality for a single function.
///
/// # Safety
/// `out_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_bennett(
    n: u64,
    sigma2: f64,
    v: f64,
    out_bound: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_bound, "out_bound")?;
        *o = lift(bounds::bennett_bound(n, sigma2, v))?;
        Ok(())
    })
}

/// # Safety
/// `params` must be `NULL` or a live handle; `out_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_bennett_simplified(
    n: u64,
    sigma2: f64,
    v: f64,
    params: *const SuptailParams,
    out_bound: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_bound, "out_bound")?;
        let (p, _) = params_or_default(params);
        *o = lift(bounds::bennett_simplified(n, sigma2, v, &p))?;
        Ok(())
    })
}

/// # Safety
/// `out_bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_analytic_lower_bound(
    n: f64,
    sigma2: f64,
    out_bound: *mut SuptailLowerBound,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_bound, "out_bound")?;
        let b = lift(poisson::analytic_lower_bound(n, sigma2))?;
        *o = SuptailLowerBound {
            hat_u: b.hat_u,
            m_star: b.m_star,
            log_t: b.log_t,
            probability: b.probability,
        };
        Ok(())
    })
}

/// Sufficient condition for the lower bound to exceed `1 - delta`.
///
/// # Safety
/// `out_condition` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_check_sufficient_condition(
    n: f64,
    sigma2: f64,
    delta: f64,
    out_condition: *mut SuptailCondition,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_condition, "out_condition")?;
        let c = lift(poisson::check_inequality_24(n, sigma2, delta))?;
        *o = SuptailCondition {
            holds: c.holds,
            log_margin: c.log_margin,
        };
        Ok(())
    })
}

/// Exact `P(max_j |N_j - nσ²| ≥ √n v)` for small instances.
///
/// # Safety
/// `out_probability` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_exact_tail_small(
    n: u64,
    sigma2: f64,
    v: f64,
    out_probability: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_probability, "out_probability")?;
        *o = lift(montecarlo::exact_tail_small(n, sigma2, v))?;
        Ok(())
    })
}

/// # Safety
/// `out_low` and `out_high` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_wilson_interval(
    hits: u64,
    reps: u64,
    confidence: f64,
    out_low: *mut f64,
    out_high: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let lo = out(out_low, "out_low")?;
        let hi = out(out_high, "out_high")?;
        (*lo, *hi) = lift(montecarlo::wilson_interval(hits, reps, confidence))?;
        Ok(())
    })
}

/// Draws `n` uniform points from stream `(seed, replication)`. Release with
/// [`suptail_path_free`].
///
/// # Safety
/// `out_path` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_sample_uniform(
    n: usize,
    seed: u64,
    replication: u64,
    out_path: *mut *mut SuptailPath,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_path, "out_path")?;
        let seed = StreamSeed::new(seed, experiment::UNIFORM_PATH, replication);
        let path = lift(empirical::sample_uniform(n, seed))?;
        *o = Box::into_raw(Box::new(SuptailPath { path }));
        Ok(())
    })
}

/// Copies `len` points in `[0, 1]`. Release with [`suptail_path_free`].
///
/// # Safety
/// `points` must point to `len` readable doubles; `out_path` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_from_points(
    points: *const f64,
    len: usize,
    out_path: *mut *mut SuptailPath,
) -> SuptailStatus {
    guard(|| {
        let o = out(out_path, "out_path")?;
        if points.is_null() {
            return Err(fail(SuptailStatus::NullPointer, "points is NULL"));
        }
        let points = std::slice::from_raw_parts(points, len).to_vec();
        let path = lift(SamplePath::from_points(points))?;
        *o = Box::into_raw(Box::new(SuptailPath { path }));
        Ok(())
    })
}

/// # Safety
/// `path` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_free(path: *mut SuptailPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of points, 0 for `NULL`.
///
/// # Safety
/// `path` must be `NULL` or a live handle.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_len(path: *const SuptailPath) -> usize {
    path.as_ref().map_or(0, |p| p.path.n())
}

/// Copies the sorted points into `buffer`, which must hold
/// [`suptail_path_len`] doubles.
///
/// # Safety
/// `path` must be a live handle and `buffer` writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_points(
    path: *const SuptailPath,
    buffer: *mut f64,
    capacity: usize,
) -> SuptailStatus {
    guard(|| {
        let path = path
            .as_ref()
            .ok_or_else(|| fail(SuptailStatus::NullPointer, "path is NULL"))?;
        if buffer.is_null() {
            return Err(fail(SuptailStatus::NullPointer, "buffer is NULL"));
        }
        let points = path.path.points();
        if capacity < points.len() {
            return Err(fail(
                SuptailStatus::InvalidArgument,
                format!("buffer holds {capacity} values, need {}", points.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buffer, points.len()).copy_from_slice(points);
        Ok(())
    })
}

/// Supremum of the centered grid class of cell width `sigma2`, with the
/// lowest one-based cell attaining it.
///
/// # Safety
/// `path` must be a live handle; `out_value` and `out_cell` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_sup_increments(
    path: *const SuptailPath,
    sigma2: f64,
    out_value: *mut f64,
    out_cell: *mut u64,
) -> SuptailStatus {
    guard(|| {
        let path = path
            .as_ref()
            .ok_or_else(|| fail(SuptailStatus::NullPointer, "path is NULL"))?;
        let value = out(out_value, "out_value")?;
        let cell = out(out_cell, "out_cell")?;
        let sup = lift(empirical::sup_via_increments(&path.path, sigma2))?;
        *value = sup.value;
        *cell = sup.cell;
        Ok(())
    })
}

/// Modulus of continuity of `G_n` at width `delta`.
///
/// # Safety
/// `path` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn suptail_path_modulus(
    path: *const SuptailPath,
    delta: f64,
    out_value: *mut f64,
) -> SuptailStatus {
    guard(|| {
        let path = path
            .as_ref()
            .ok_or_else(|| fail(SuptailStatus::NullPointer, "path is NULL"))?;
        let o = out(out_value, "out_value")?;
        *o = lift(empirical::modulus_statistic(&path.path, delta))?;
        Ok(())
    })
}
