//! C ABI over the simulator.
//!
//! Objects are opaque handles created and destroyed through this API. Every fallible
//! call returns a [`CfiStatus`]; on failure a description is available from
//! [`cfi_last_error_message`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cellfree_isac::config::ExperimentConfig;
use cellfree_isac::error::Error;
use cellfree_isac::harness::{run_experiment, write_results, ResultSet};
use cellfree_isac::metrics::MetricKind;
use cellfree_isac::sensing::calibrate_threshold;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Domain = 4,
    Io = 5,
    Internal = 6,
    Panic = 7,
}

/// Metric selector for sample queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfiMetric {
    RateBps = 0,
    SensingSnrDb = 1,
    Statistic = 2,
    Decision = 3,
}

impl From<CfiMetric> for MetricKind {
    fn from(m: CfiMetric) -> Self {
        match m {
            CfiMetric::RateBps => MetricKind::RateBps,
            CfiMetric::SensingSnrDb => MetricKind::SensingSnrDb,
            CfiMetric::Statistic => MetricKind::Statistic,
            CfiMetric::Decision => MetricKind::Decision,
        }
    }
}

/// Opaque experiment configuration.
pub struct CfiConfig {
    inner: ExperimentConfig,
}

/// Opaque result of one experiment arm.
pub struct CfiResult {
    inner: ResultSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CfiStatus {
    match err {
        Error::Config(_) | Error::Parse { .. } => CfiStatus::Config,
        Error::Domain(_) => CfiStatus::Domain,
        Error::Io(_) | Error::Csv(_) => CfiStatus::Io,
        Error::Internal(_) => CfiStatus::Internal,
        Error::Drop { source, .. } => status_of(source),
    }
}

fn fail(status: CfiStatus, msg: impl Into<String>) -> CfiStatus {
    set_error(msg.into());
    status
}

/// Run `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), CfiStatus>) -> CfiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfiStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(CfiStatus::Panic, "panic inside the simulator"),
    }
}

fn lift<T>(r: cellfree_isac::error::Result<T>) -> Result<T, CfiStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, CfiStatus> {
    if p.is_null() {
        return Err(fail(CfiStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CfiStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, CfiStatus> {
    p.as_ref().ok_or_else(|| fail(CfiStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CfiStatus> {
    p.as_mut().ok_or_else(|| fail(CfiStatus::NullPointer, format!("{what} is null")))
}

/// Message of the last failed call on this thread, or null. Owned by the library;
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cfi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cfi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration holding the baseline defaults. Free with [`cfi_config_free`].
#[no_mangle]
pub extern "C" fn cfi_config_default() -> *mut CfiConfig {
    Box::into_raw(Box::new(CfiConfig {
        inner: ExperimentConfig::default(),
    }))
}

/// Load a `key = value` configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_config_load(path: *const c_char, out: *mut *mut CfiConfig) -> CfiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = lift(ExperimentConfig::load(Path::new(path)))?;
        *out = Box::into_raw(Box::new(CfiConfig { inner }));
        Ok(())
    })
}

/// Override one configuration field.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cfi_config_set(cfg: *mut CfiConfig, key: *const c_char, value: *const c_char) -> CfiStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        lift(cfg.inner.set(key, value))
    })
}

/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn cfi_config_validate(cfg: *const CfiConfig) -> CfiStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        lift(cfg.inner.validate())
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cfi_config_free(cfg: *mut CfiConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Detection threshold for a cluster of total dictionary rank `rank`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_calibrate_threshold(rank: usize, noise_var: f64, pfa: f64, out: *mut f64) -> CfiStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = lift(calibrate_threshold(rank, noise_var, pfa))?;
        Ok(())
    })
}

/// Run every drop of the configured experiment. Free the result with [`cfi_result_free`].
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_run_experiment(cfg: *const CfiConfig, out: *mut *mut CfiResult) -> CfiStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        let out = out_arg(out, "out")?;
        let inner = lift(run_experiment(&cfg.inner))?;
        *out = Box::into_raw(Box::new(CfiResult { inner }));
        Ok(())
    })
}

/// Number of samples of one metric.
///
/// # Safety
/// `res` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_result_sample_count(res: *const CfiResult, metric: CfiMetric, out: *mut usize) -> CfiStatus {
    guard(|| {
        let res = ref_arg(res, "result")?;
        let out = out_arg(out, "out")?;
        let kind = MetricKind::from(metric);
        *out = res.inner.samples.iter().filter(|s| s.kind == kind).count();
        Ok(())
    })
}

/// Copy up to `len` samples of one metric into `buf`, in run order; `written`
/// receives the number copied.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_result_samples(
    res: *const CfiResult,
    metric: CfiMetric,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> CfiStatus {
    guard(|| {
        let res = ref_arg(res, "result")?;
        let written = out_arg(written, "written")?;
        if buf.is_null() && len > 0 {
            return Err(fail(CfiStatus::NullPointer, "buf is null"));
        }
        let kind = MetricKind::from(metric);
        let mut n = 0;
        for s in res.inner.samples.iter().filter(|s| s.kind == kind).take(len) {
            *buf.add(n) = s.value;
            n += 1;
        }
        *written = n;
        Ok(())
    })
}

/// Median of one metric (NaN when there are no samples).
///
/// # Safety
/// `res` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_result_median(res: *const CfiResult, metric: CfiMetric, out: *mut f64) -> CfiStatus {
    guard(|| {
        let res = ref_arg(res, "result")?;
        let out = out_arg(out, "out")?;
        *out = res.inner.median(metric.into()).unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Detection and false-alarm rates; NaN marks an undefined rate.
///
/// # Safety
/// `res` must come from this library; `pd` and `pfa` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cfi_result_detection_rates(res: *const CfiResult, pd: *mut f64, pfa: *mut f64) -> CfiStatus {
    guard(|| {
        let res = ref_arg(res, "result")?;
        let pd = out_arg(pd, "pd")?;
        let pfa = out_arg(pfa, "pfa")?;
        *pd = res.inner.detection.pd.unwrap_or(f64::NAN);
        *pfa = res.inner.detection.pfa.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Write the result directory (config echo, CSV files, summary).
///
/// # Safety
/// `res` must come from this library; `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cfi_result_write(res: *const CfiResult, dir: *const c_char) -> CfiStatus {
    guard(|| {
        let res = ref_arg(res, "result")?;
        let dir = str_arg(dir, "dir")?;
        lift(write_results(Path::new(dir), &res.inner.config, std::slice::from_ref(&res.inner)))
    })
}

/// # Safety
/// `res` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cfi_result_free(res: *mut CfiResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let p = cfi_last_error_message();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }

    #[test]
    fn threshold_and_errors() {
        let mut t = 0.0;
        assert_eq!(unsafe { cfi_calibrate_threshold(1, 1.0, 0.01, &mut t) }, CfiStatus::Ok);
        assert!((t - 100f64.ln()).abs() < 1e-9);
        assert_eq!(unsafe { cfi_calibrate_threshold(1, 1.0, 1.5, &mut t) }, CfiStatus::Domain);
        assert!(last_error().contains("(0, 1)"));
        assert_eq!(unsafe { cfi_calibrate_threshold(1, 1.0, 0.5, ptr::null_mut()) }, CfiStatus::NullPointer);
    }

    #[test]
    fn config_set_and_validate() {
        let cfg = cfi_config_default();
        let key = CString::new("drops").unwrap();
        let bad = CString::new("zero").unwrap();
        let zero = CString::new("0").unwrap();
        unsafe {
            assert_eq!(cfi_config_set(cfg, key.as_ptr(), bad.as_ptr()), CfiStatus::Config);
            assert_eq!(cfi_config_set(cfg, key.as_ptr(), zero.as_ptr()), CfiStatus::Ok);
            assert_eq!(cfi_config_validate(cfg), CfiStatus::Config);
            let unknown = CString::new("nonsense").unwrap();
            assert_eq!(cfi_config_set(cfg, unknown.as_ptr(), zero.as_ptr()), CfiStatus::Config);
            cfi_config_free(cfg);
        }
    }

    #[test]
    fn run_and_query() {
        let cfg = cfi_config_default();
        let set = |k: &str, v: &str| {
            let (k, v) = (CString::new(k).unwrap(), CString::new(v).unwrap());
            assert_eq!(unsafe { cfi_config_set(cfg, k.as_ptr(), v.as_ptr()) }, CfiStatus::Ok);
        };
        set("drops", "1");
        set("fading", "2");
        let mut res = ptr::null_mut();
        unsafe {
            assert_eq!(cfi_run_experiment(cfg, &mut res), CfiStatus::Ok);
            let mut n = 0;
            assert_eq!(cfi_result_sample_count(res, CfiMetric::RateBps, &mut n), CfiStatus::Ok);
            assert_eq!(n, 64);
            let mut buf = vec![0.0; n];
            let mut written = 0;
            assert_eq!(cfi_result_samples(res, CfiMetric::RateBps, buf.as_mut_ptr(), n, &mut written), CfiStatus::Ok);
            assert_eq!(written, n);
            assert!(buf.iter().all(|&r| r >= 0.0));
            let mut med = 0.0;
            assert_eq!(cfi_result_median(res, CfiMetric::SensingSnrDb, &mut med), CfiStatus::Ok);
            assert!(med.is_finite());
            let dir = tempfile::tempdir().unwrap();
            let d = CString::new(dir.path().to_str().unwrap()).unwrap();
            assert_eq!(cfi_result_write(res, d.as_ptr()), CfiStatus::Ok);
            assert!(dir.path().join("utc").join("metrics.csv").exists());
            cfi_result_free(res);
            cfi_config_free(cfg);
        }
    }

    #[test]
    fn load_missing_file() {
        let path = CString::new("/nonexistent/cellfree.cfg").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(unsafe { cfi_config_load(path.as_ptr(), &mut cfg) }, CfiStatus::Io);
        assert!(cfg.is_null());
    }
}
