//! C ABI over `spinchain`.
//!
//! Every function returns a [`SpinchainStatus`]; on failure the message is
//! available from [`spinchain_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use spinchain::changepoint::{self, PipelineOutput, RocOptions, WindowPlan};
use spinchain::cli::RunConfig;
use spinchain::datasets;
use spinchain::pauli::{build_basis, OperatorBasis};
use spinchain::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinchainStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Validation = 4,
    DegenerateData = 5,
    Convergence = 6,
    Degeneracy = 7,
    Format = 8,
    Config = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for SpinchainStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension(_) => Self::Dimension,
            Error::Validation(_) => Self::Validation,
            Error::Parameter(_) => Self::InvalidArgument,
            Error::DegenerateData(_) => Self::DegenerateData,
            Error::Convergence(_) => Self::Convergence,
            Error::Degeneracy { .. } => Self::Degeneracy,
            Error::Format(_) | Error::Json(_) => Self::Format,
            Error::Config(_) => Self::Config,
            Error::Io(_) => Self::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (SpinchainStatus, String)>) -> SpinchainStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpinchainStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SpinchainStatus::Panic
        }
    }
}

fn lib(e: Error) -> (SpinchainStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(name: &str) -> (SpinchainStatus, String) {
    (SpinchainStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], (SpinchainStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn fill(out: *mut f64, capacity: usize, values: &[f64], written: *mut usize) -> Result<(), (SpinchainStatus, String)> {
    if !written.is_null() {
        *written = values.len();
    }
    if capacity < values.len() {
        return Err((SpinchainStatus::BufferTooSmall, format!("buffer holds {capacity} values, {} needed", values.len())));
    }
    if !values.is_empty() {
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn spinchain_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spinchain_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

pub struct SpinchainBasis(Arc<OperatorBasis>);

/// Translation-invariant Pauli basis for chain length `l` and arity up to `k_max`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn spinchain_basis_new(l: usize, k_max: usize, out: *mut *mut SpinchainBasis) -> SpinchainStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let b = build_basis(l, k_max).map_err(lib)?;
        *out = Box::into_raw(Box::new(SpinchainBasis(Arc::new(b))));
        Ok(())
    })
}

/// Number of operators `T`.
///
/// # Safety
/// `basis` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_basis_len(basis: *const SpinchainBasis, out: *mut usize) -> SpinchainStatus {
    guard(|| {
        let b = basis.as_ref().ok_or_else(|| null("basis"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = b.0.len();
        Ok(())
    })
}

/// # Safety
/// `basis` must come from [`spinchain_basis_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spinchain_basis_free(basis: *mut SpinchainBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

pub struct SpinchainConfig(RunConfig);

/// Default run configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_config_default(out: *mut *mut SpinchainConfig) -> SpinchainStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(SpinchainConfig(RunConfig::default())));
        Ok(())
    })
}

/// Configuration from TOML text; missing keys take their defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_config_from_toml(toml: *const c_char, out: *mut *mut SpinchainConfig) -> SpinchainStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(toml).to_str().map_err(|e| (SpinchainStatus::Format, e.to_string()))?;
        let cfg = RunConfig::from_toml(text).map_err(lib)?;
        cfg.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(SpinchainConfig(cfg)));
        Ok(())
    })
}

/// Writes the 64-character hex config hash plus NUL into `buf` (at least 65 bytes).
///
/// # Safety
/// `config` must be live; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn spinchain_config_hash(config: *const SpinchainConfig, buf: *mut c_char, len: usize) -> SpinchainStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let h = c.0.hash();
        if len < h.len() + 1 {
            return Err((SpinchainStatus::BufferTooSmall, format!("hash needs {} bytes", h.len() + 1)));
        }
        ptr::copy_nonoverlapping(h.as_ptr().cast(), buf, h.len());
        *buf.add(h.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `config` must come from a constructor here and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spinchain_config_free(config: *mut SpinchainConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

pub struct SpinchainResult {
    output: PipelineOutput,
    modes: usize,
}

/// Runs the sliding-window pipeline on `samples`.
///
/// # Safety
/// Handles must be live, `samples` must hold `len` values, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_pipeline_run(
    config: *const SpinchainConfig,
    basis: *const SpinchainBasis,
    samples: *const f64,
    len: usize,
    out: *mut *mut SpinchainResult,
) -> SpinchainStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let b = basis.as_ref().ok_or_else(|| null("basis"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let x = slice(samples, len, "samples")?;
        let output = changepoint::run_pipeline(x, &c.0.pipeline, &b.0).map_err(lib)?;
        *out = Box::into_raw(Box::new(SpinchainResult { output, modes: c.0.pipeline.modes }));
        Ok(())
    })
}

/// Number of windows, including skipped ones.
///
/// # Safety
/// `result` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_result_window_count(result: *const SpinchainResult, out: *mut usize) -> SpinchainStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.output.window_count;
        Ok(())
    })
}

/// `UQ[ℓ]` per window (NaN for skipped windows). `written` receives the count needed.
///
/// # Safety
/// `result` must be live; `out` must hold `capacity` values; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn spinchain_result_uq(result: *const SpinchainResult, out: *mut f64, capacity: usize, written: *mut usize) -> SpinchainStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let v: Vec<f64> = (0..r.output.window_count).map(|l| r.output.window(l).map_or(f64::NAN, |w| w.uq)).collect();
        fill(out, capacity, &v, written)
    })
}

/// Mode distance of each window to the previous one.
///
/// # Safety
/// As for [`spinchain_result_uq`].
#[no_mangle]
pub unsafe extern "C" fn spinchain_result_distance_signal(result: *const SpinchainResult, out: *mut f64, capacity: usize, written: *mut usize) -> SpinchainStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let v = changepoint::distance_signal(&r.output, r.modes).map_err(lib)?;
        fill(out, capacity, &v, written)
    })
}

/// # Safety
/// `result` must come from [`spinchain_pipeline_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spinchain_result_free(result: *mut SpinchainResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Mean-jump series for `seed` (5000 values).
///
/// # Safety
/// `out` must hold `capacity` values; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn spinchain_gen_mean_jumps(seed: u64, out: *mut f64, capacity: usize, written: *mut usize) -> SpinchainStatus {
    guard(|| fill(out, capacity, &datasets::gen_mean_jumps(seed).samples, written))
}

/// Variance-jump series for `seed` (5000 values).
///
/// # Safety
/// As for [`spinchain_gen_mean_jumps`].
#[no_mangle]
pub unsafe extern "C" fn spinchain_gen_variance_jumps(seed: u64, out: *mut f64, capacity: usize, written: *mut usize) -> SpinchainStatus {
    guard(|| fill(out, capacity, &datasets::gen_variance_jumps(seed).samples, written))
}

/// Silverman's rule-of-thumb bandwidth.
///
/// # Safety
/// `samples` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_silverman_bandwidth(samples: *const f64, len: usize, out: *mut f64) -> SpinchainStatus {
    guard(|| {
        let x = slice(samples, len, "samples")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = spinchain::kme::silverman_bandwidth(x).map_err(lib)?;
        Ok(())
    })
}

/// Peak-detection ROC AUC of a window-indexed score signal against sample-index truths.
///
/// # Safety
/// `scores` and `truth` must hold their lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spinchain_roc_auc(
    scores: *const f64,
    n_scores: usize,
    truth: *const usize,
    n_truth: usize,
    window: usize,
    stride: usize,
    tolerance: usize,
    out: *mut f64,
) -> SpinchainStatus {
    guard(|| {
        let s = slice(scores, n_scores, "scores")?;
        let t = slice(truth, n_truth, "truth")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let plan = WindowPlan::new(window, stride).map_err(lib)?;
        let opts = RocOptions { tolerance, ..RocOptions::default() };
        *out = changepoint::roc(s, t, &plan, &opts).map_err(lib)?.auc;
        Ok(())
    })
}
