//! C interface to `umacs`.
//!
//! Every function returns a [`UmacsStatus`]; on anything but `UMACS_STATUS_OK`
//! the calling thread's last error message is set and can be read with
//! [`umacs_last_error_message`]. Objects are opaque handles created by a
//! `*_new` or producing function and released by the matching `*_free`.
//! Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use umacs::experiments::{self, TrialSettings};
use umacs::model::{self, ReceivedSignal, SensingMatrix, SupportSet, SystemConfig};
use umacs::recovery::{self, Algorithm, RecoveryOutput, RecoveryParams};
use umacs::Error;

pub const UMACS_ALGORITHM_OMP: u32 = 0;
pub const UMACS_ALGORITHM_GOMP: u32 = 1;
pub const UMACS_ALGORITHM_COSAMP: u32 = 2;
pub const UMACS_ALGORITHM_SP: u32 = 3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UmacsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Infeasible = 3,
    Dimension = 4,
    UndefinedStatistic = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 8,
}

/// Pooled detection-probability estimate with its 95% score interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UmacsPdEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub detected: u64,
    pub messages: u64,
    pub trials_run: usize,
}

/// Opaque sensing matrix.
pub struct UmacsMatrix(SensingMatrix);

/// Opaque decoder result.
pub struct UmacsRecovery(RecoveryOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UmacsStatus {
    match e {
        Error::Parameter { .. } | Error::Contract(_) | Error::Range(_) | Error::Parse { .. } => {
            UmacsStatus::InvalidParameter
        }
        Error::Infeasible(_) => UmacsStatus::Infeasible,
        Error::Dimension(_) => UmacsStatus::Dimension,
        Error::UndefinedStatistic(_) => UmacsStatus::UndefinedStatistic,
        _ => UmacsStatus::Internal,
    }
}

struct Fail(UmacsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(UmacsStatus::NullPointer, format!("`{name}` is null"))
}

/// Runs `f`, recording failures and containing panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> UmacsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UmacsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            UmacsStatus::Panic
        }
    }
}

fn algorithm(code: u32) -> Result<Algorithm, Fail> {
    match code {
        UMACS_ALGORITHM_OMP => Ok(Algorithm::Omp),
        UMACS_ALGORITHM_GOMP => Ok(Algorithm::Gomp),
        UMACS_ALGORITHM_COSAMP => Ok(Algorithm::Cosamp),
        UMACS_ALGORITHM_SP => Ok(Algorithm::Sp),
        other => Err(Fail(UmacsStatus::InvalidParameter, format!("unknown algorithm code {other}"))),
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn copy_out<T: Copy>(src: &[T], dst: &mut [T]) -> Result<(), Fail> {
    if dst.len() < src.len() {
        return Err(Fail(
            UmacsStatus::BufferTooSmall,
            format!("buffer holds {} values, {} needed", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn umacs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Linear `Eb/N0` of a phase split with CS power `p1` and energy ratio `alpha`.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn umacs_eb_n0(p1: f64, np: usize, alpha: f64, b: u32, out: *mut f64) -> UmacsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = experiments::eb_n0(p1, np, alpha, b)?;
        Ok(())
    })
}

/// Linear CS power spending an `Eb/N0` budget given in dB, less `backoff_db`.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn umacs_p1_from_budget(
    ebn0_db: f64,
    np: usize,
    alpha: f64,
    b: u32,
    backoff_db: f64,
    out: *mut f64,
) -> UmacsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = experiments::p1_from_budget(ebn0_db, np, alpha, b, backoff_db)?;
        Ok(())
    })
}

/// Builds an `np x 2^bp` sensing matrix with column energy `np * p1`.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn umacs_matrix_new(bp: u32, np: usize, p1: f64, seed: u64, out: *mut *mut UmacsMatrix) -> UmacsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = model::build_sensing_matrix(bp, np, p1, seed)?;
        *out = Box::into_raw(Box::new(UmacsMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a handle from [`umacs_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn umacs_matrix_free(matrix: *mut UmacsMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// # Safety
/// `matrix` must be a live handle; `rows` and `columns` null or writable.
#[no_mangle]
pub unsafe extern "C" fn umacs_matrix_shape(matrix: *const UmacsMatrix, rows: *mut usize, columns: *mut usize) -> UmacsStatus {
    guard(|| {
        let m = &matrix.as_ref().ok_or_else(|| null("matrix"))?.0;
        let rows = rows.as_mut().ok_or_else(|| null("rows"))?;
        let columns = columns.as_mut().ok_or_else(|| null("columns"))?;
        *rows = m.num_rows();
        *columns = m.num_columns();
        Ok(())
    })
}

/// Copies column `j` into `out[0..rows]`.
///
/// # Safety
/// `matrix` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn umacs_matrix_column(matrix: *const UmacsMatrix, j: usize, out: *mut f64, len: usize) -> UmacsStatus {
    guard(|| {
        let m = &matrix.as_ref().ok_or_else(|| null("matrix"))?.0;
        let dst = slice_mut(out, len, "out")?;
        copy_out(&m.column(j)?, dst)
    })
}

/// Noiseless superposition of the columns listed in `support` (repeats
/// allowed) written to `out[0..rows]`.
///
/// # Safety
/// `matrix` must be a live handle; `support` valid for `count` reads and
/// `out` for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn umacs_transmit(
    matrix: *const UmacsMatrix,
    support: *const usize,
    count: usize,
    out: *mut f64,
    len: usize,
) -> UmacsStatus {
    guard(|| {
        let m = &matrix.as_ref().ok_or_else(|| null("matrix"))?.0;
        let s = SupportSet::new(slice(support, count, "support")?.to_vec(), true)?;
        let dst = slice_mut(out, len, "out")?;
        copy_out(&model::transmit(m, &s)?, dst)
    })
}

/// Adds unit-variance Gaussian noise drawn from `seed` to `signal`, in place.
///
/// # Safety
/// `signal` must be valid for `len` reads and writes.
#[no_mangle]
pub unsafe extern "C" fn umacs_add_noise(signal: *mut f64, len: usize, seed: u64) -> UmacsStatus {
    guard(|| {
        let s = slice_mut(signal, len, "signal")?;
        let noisy = model::add_noise(s, seed);
        s.copy_from_slice(&noisy.samples);
        Ok(())
    })
}

/// Decodes `y` with a known-sparsity decoder. `epsilon < 0` selects the
/// default residual stopping threshold.
///
/// # Safety
/// `matrix` must be a live handle, `y` valid for `len` reads and `out`
/// null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn umacs_recover(
    matrix: *const UmacsMatrix,
    y: *const f64,
    len: usize,
    algorithm_code: u32,
    k: usize,
    gomp_l: usize,
    epsilon: f64,
    out: *mut *mut UmacsRecovery,
) -> UmacsStatus {
    guard(|| {
        let m = &matrix.as_ref().ok_or_else(|| null("matrix"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let y = ReceivedSignal::new(slice(y, len, "y")?.to_vec());
        let mut params = RecoveryParams::known_sparsity(algorithm(algorithm_code)?, k, 0.0, gomp_l);
        if epsilon >= 0.0 {
            params.epsilon = Some(epsilon);
        }
        let r = recovery::recover(&y, m, &params)?;
        *out = Box::into_raw(Box::new(UmacsRecovery(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from [`umacs_recover`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn umacs_recovery_free(result: *mut UmacsRecovery) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of declared indices.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn umacs_recovery_support_len(result: *const UmacsRecovery, out: *mut usize) -> UmacsStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.0;
        *out.as_mut().ok_or_else(|| null("out"))? = r.support_estimate.len();
        Ok(())
    })
}

/// Copies the declared indices, ascending, into `out`.
///
/// # Safety
/// `result` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn umacs_recovery_support(result: *const UmacsRecovery, out: *mut usize, len: usize) -> UmacsStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.0;
        copy_out(&r.support_estimate, slice_mut(out, len, "out")?)
    })
}

/// Final residual norm and iteration count.
///
/// # Safety
/// `result` must be a live handle; the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn umacs_recovery_summary(
    result: *const UmacsRecovery,
    residual_norm: *mut f64,
    iterations: *mut usize,
) -> UmacsStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.0;
        *residual_norm.as_mut().ok_or_else(|| null("residual_norm"))? = r.residual_norm;
        *iterations.as_mut().ok_or_else(|| null("iterations"))? = r.iterations;
        Ok(())
    })
}

/// Monte Carlo detection probability over `trials` trials from `seed`.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn umacs_estimate_pd(
    b: u32,
    bp: u32,
    nt: usize,
    np: usize,
    ka: usize,
    p1: f64,
    algorithm_code: u32,
    excess: f64,
    gomp_l: usize,
    trials: usize,
    seed: u64,
    out: *mut UmacsPdEstimate,
) -> UmacsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let config = SystemConfig::new(b, bp, nt, np, ka)?;
        let params = RecoveryParams::known_sparsity(algorithm(algorithm_code)?, ka, excess, gomp_l);
        let pd = experiments::estimate_pd(&config, p1, &params, &TrialSettings::new(trials, seed))?;
        *out = UmacsPdEstimate {
            estimate: pd.rate.estimate,
            lower: pd.rate.lower,
            upper: pd.rate.upper,
            detected: pd.rate.successes,
            messages: pd.rate.population,
            trials_run: pd.trials_run,
        };
        Ok(())
    })
}
