//! C ABI over `hysteresis-core`.
//!
//! Every entry point returns an [`HlStatus`]. On failure the message is kept
//! per thread and read back with [`hl_last_error`]. Loops live behind the
//! opaque [`HlLoop`] handle, created by one of the `hl_loop_new_*`
//! constructors and released with [`hl_loop_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use hysteresis_core::area::area_numeric;
use hysteresis_core::cli::Preset;
use hysteresis_core::piecewise::{PlayLoop, PlaySpec};
use hysteresis_core::smooth::{LoopSpec, ShiftedLoop};
use hysteresis_core::{Error, ParametricLoop};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    /// A parameter violates the loop's constraints.
    InvalidArgument = 1,
    /// The request has no answer for this loop, e.g. the area of an open curve.
    Domain = 2,
    NullPointer = 3,
    /// A bug inside the library; the handle should not be reused.
    Internal = 4,
}

/// Opaque loop handle.
pub struct HlLoop {
    inner: Arc<dyn ParametricLoop>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> HlStatus {
    match e {
        Error::InvalidParameter { .. } | Error::DegenerateShift(_) | Error::Unsupported(_) => HlStatus::InvalidArgument,
        _ => HlStatus::Domain,
    }
}

/// Runs `f`, turning errors and panics into a status plus the last-error text.
fn guard<F: FnOnce() -> Result<(), (HlStatus, String)>>(f: F) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            HlStatus::Internal
        }
    }
}

fn core(e: Error) -> (HlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HlStatus, String) {
    (HlStatus::NullPointer, format!("{what} is null"))
}

fn check_out(out: *mut *mut HlLoop) -> Result<(), (HlStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    Ok(())
}

unsafe fn store(out: *mut *mut HlLoop, lp: Arc<dyn ParametricLoop>) -> Result<(), (HlStatus, String)> {
    *out = Box::into_raw(Box::new(HlLoop { inner: lp }));
    Ok(())
}

unsafe fn handle<'a>(lp: *const HlLoop) -> Result<&'a HlLoop, (HlStatus, String)> {
    lp.as_ref().ok_or_else(|| null("loop"))
}

/// Creates the shifted smooth loop. Shifts are in radians; `m` must be odd.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_new_shifted(
    a: f64,
    bx: f64,
    by: f64,
    m: u32,
    n: u32,
    d1: f64,
    d2: f64,
    d3: f64,
    out: *mut *mut HlLoop,
) -> HlStatus {
    guard(|| {
        check_out(out)?;
        let spec = LoopSpec::new(a, bx, by, m, n).and_then(|s| s.with_shifts(d1, d2, d3)).map_err(core)?;
        let lp = ShiftedLoop::new(spec).map_err(core)?;
        store(out, Arc::new(lp))
    })
}

/// Creates a play loop with ramp angle `beta` and gain angle `gamma`, radians.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_new_play(
    a: f64,
    bx: f64,
    by: f64,
    beta: f64,
    gamma: f64,
    out: *mut *mut HlLoop,
) -> HlStatus {
    guard(|| {
        check_out(out)?;
        let spec = PlaySpec::new(a, bx, by, beta, gamma).map_err(core)?;
        store(out, Arc::new(PlayLoop::new(spec).map_err(core)?))
    })
}

/// Creates a named preset, using the same names as the command-line tool
/// (for example `"triple_classical"`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_new_preset(name: *const c_char, out: *mut *mut HlLoop) -> HlStatus {
    guard(|| {
        check_out(out)?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|_| (HlStatus::InvalidArgument, "name is not UTF-8".into()))?;
        let preset = Preset::from_name(name).ok_or_else(|| (HlStatus::InvalidArgument, format!("unknown preset '{name}'")))?;
        store(out, preset.build().map_err(core)?.lp)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `lp` must come from a constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_free(lp: *mut HlLoop) {
    if !lp.is_null() {
        drop(Box::from_raw(lp));
    }
}

/// Parameter period of the loop, or NaN for a null handle.
///
/// # Safety
/// `lp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_period(lp: *const HlLoop) -> f64 {
    lp.as_ref().map_or(f64::NAN, |l| l.inner.period())
}

/// Evaluates the loop at phase `alpha`.
///
/// # Safety
/// `lp` must be a live handle and `x`, `y` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_eval(lp: *const HlLoop, alpha: f64, x: *mut f64, y: *mut f64) -> HlStatus {
    guard(|| {
        let l = handle(lp)?;
        if x.is_null() || y.is_null() {
            return Err(null("output"));
        }
        if !alpha.is_finite() {
            return Err((HlStatus::InvalidArgument, "alpha must be finite".into()));
        }
        let p = l.inner.point(alpha);
        *x = p.x;
        *y = p.y;
        Ok(())
    })
}

/// Samples `count` points over one closed period into `xs` and `ys`.
///
/// # Safety
/// `lp` must be a live handle and `xs`, `ys` valid for `count` writes.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_sample(lp: *const HlLoop, count: usize, xs: *mut f64, ys: *mut f64) -> HlStatus {
    guard(|| {
        let l = handle(lp)?;
        if xs.is_null() || ys.is_null() {
            return Err(null("output"));
        }
        let curve = hysteresis_core::Curve::sample(l.inner.as_ref(), count).map_err(core)?;
        let xs = std::slice::from_raw_parts_mut(xs, count);
        let ys = std::slice::from_raw_parts_mut(ys, count);
        for (i, p) in curve.points.iter().enumerate() {
            xs[i] = p.x;
            ys[i] = p.y;
        }
        Ok(())
    })
}

/// Signed enclosed area; counterclockwise loops are positive.
///
/// # Safety
/// `lp` must be a live handle and `area` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn hl_loop_area(lp: *const HlLoop, area: *mut f64) -> HlStatus {
    guard(|| {
        let l = handle(lp)?;
        if area.is_null() {
            return Err(null("area"));
        }
        *area = area_numeric(l.inner.as_ref()).map_err(core)?.value;
        Ok(())
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
