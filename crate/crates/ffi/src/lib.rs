//! C ABI for the inclusion-reconstruction solver.
//!
//! All objects are opaque handles created and destroyed through this API.
//! Functions return `sr_status`; on failure a thread-local message is
//! available via `sr_last_error`. Strings are NUL-terminated UTF-8.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use shaperecon::admm::{self, AdmmConfig, RunOutput, RunPaths};
use shaperecon::geometry::BoundaryPolyline;
use shaperecon::metrics::write_history;
use shaperecon::problems::CauchyData;
use shaperecon::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum sr_status {
    SR_OK = 0,
    /// Bad arguments, configuration, input data, or I/O.
    SR_ERR_INPUT = 2,
    /// Numerical failure (solver breakdown, line-search stagnation, ...).
    SR_ERR_NUMERIC = 3,
    /// A required pointer argument was NULL or not valid UTF-8.
    SR_ERR_POINTER = 4,
    /// Internal panic; the library state is still consistent.
    SR_ERR_INTERNAL = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
}

fn status_of(err: &Error) -> sr_status {
    match err {
        Error::Config(_) | Error::Data(_) | Error::Io(_) | Error::Geometry(_) => {
            sr_status::SR_ERR_INPUT
        }
        _ => sr_status::SR_ERR_NUMERIC,
    }
}

fn fail(err: &Error) -> sr_status {
    set_error(&err.to_string());
    status_of(err)
}

/// Copies the message of the most recent error on this thread into `buf`
/// (NUL-terminated, truncated to `len` bytes). Returns the full message
/// length in bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn sr_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn guarded(f: impl FnOnce() -> sr_status) -> sr_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            sr_status::SR_ERR_INTERNAL
        }
    }
}

/// Opaque measured-data handle.
pub struct sr_data {
    inner: CauchyData,
}

/// Opaque run-configuration handle.
pub struct sr_config {
    inner: AdmmConfig,
    reference: Option<BoundaryPolyline>,
}

/// Opaque finished-run handle.
pub struct sr_result {
    inner: RunOutput,
}

/// Reads a data CSV and its JSON sidecar into a new handle.
#[no_mangle]
pub unsafe extern "C" fn sr_data_read(
    csv_path: *const c_char,
    json_path: *const c_char,
    out: *mut *mut sr_data,
) -> sr_status {
    guarded(|| {
        let (Some(csv), Some(json)) = (cstr(csv_path), cstr(json_path)) else {
            set_error("NULL or non-UTF-8 path");
            return sr_status::SR_ERR_POINTER;
        };
        if out.is_null() {
            set_error("NULL output pointer");
            return sr_status::SR_ERR_POINTER;
        }
        match CauchyData::read(Path::new(csv), Path::new(json)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(sr_data { inner }));
                sr_status::SR_OK
            }
            Err(e) => fail(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_data_free(data: *mut sr_data) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Creates a configuration with the built-in defaults.
#[no_mangle]
pub unsafe extern "C" fn sr_config_new(out: *mut *mut sr_config) -> sr_status {
    guarded(|| {
        if out.is_null() {
            set_error("NULL output pointer");
            return sr_status::SR_ERR_POINTER;
        }
        *out = Box::into_raw(Box::new(sr_config {
            inner: AdmmConfig::default(),
            reference: None,
        }));
        sr_status::SR_OK
    })
}

/// Sets one configuration key (same keys as the config file format).
#[no_mangle]
pub unsafe extern "C" fn sr_config_set(
    config: *mut sr_config,
    key: *const c_char,
    value: *const c_char,
) -> sr_status {
    guarded(|| {
        let Some(config) = config.as_mut() else {
            set_error("NULL config");
            return sr_status::SR_ERR_POINTER;
        };
        let (Some(key), Some(value)) = (cstr(key), cstr(value)) else {
            set_error("NULL or non-UTF-8 key/value");
            return sr_status::SR_ERR_POINTER;
        };
        let mut paths = RunPaths::default();
        match admm::set_config_key(&mut config.inner, &mut paths, key, value) {
            Ok(()) => sr_status::SR_OK,
            Err(e) => fail(&e),
        }
    })
}

/// Loads the true inclusion boundary from an `x,y` CSV so the run records
/// Hausdorff distances; optional.
#[no_mangle]
pub unsafe extern "C" fn sr_config_set_reference(
    config: *mut sr_config,
    truth_csv: *const c_char,
) -> sr_status {
    guarded(|| {
        let Some(config) = config.as_mut() else {
            set_error("NULL config");
            return sr_status::SR_ERR_POINTER;
        };
        let Some(path) = cstr(truth_csv) else {
            set_error("NULL or non-UTF-8 path");
            return sr_status::SR_ERR_POINTER;
        };
        match BoundaryPolyline::read_csv(Path::new(path)) {
            Ok(poly) => {
                config.reference = Some(poly);
                sr_status::SR_OK
            }
            Err(e) => fail(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_config_free(config: *mut sr_config) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a reconstruction. On success `*out` owns the run history and final
/// geometry. A run that aborted numerically still returns SR_ERR_NUMERIC,
/// but `*out` is populated with the partial history.
#[no_mangle]
pub unsafe extern "C" fn sr_run(
    config: *const sr_config,
    data: *const sr_data,
    out: *mut *mut sr_result,
) -> sr_status {
    guarded(|| {
        let (Some(config), Some(data)) = (config.as_ref(), data.as_ref()) else {
            set_error("NULL config or data");
            return sr_status::SR_ERR_POINTER;
        };
        if out.is_null() {
            set_error("NULL output pointer");
            return sr_status::SR_ERR_POINTER;
        }
        match admm::run(&config.inner, &data.inner, config.reference.as_ref()) {
            Ok(output) => {
                let aborted = output.aborted.clone();
                *out = Box::into_raw(Box::new(sr_result { inner: output }));
                match aborted {
                    None => sr_status::SR_OK,
                    Some(diag) => {
                        set_error(&diag);
                        sr_status::SR_ERR_NUMERIC
                    }
                }
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of recorded iterations (including the initial record).
#[no_mangle]
pub unsafe extern "C" fn sr_result_len(result: *const sr_result) -> usize {
    result
        .as_ref()
        .map(|r| r.inner.history.records().len())
        .unwrap_or(0)
}

/// Copies one history record into the seven provided slots
/// (J, G, J_norm, hausdorff, t, primal_residual after the iteration index).
#[no_mangle]
pub unsafe extern "C" fn sr_result_record(
    result: *const sr_result,
    index: usize,
    k: *mut usize,
    values: *mut f64,
) -> sr_status {
    guarded(|| {
        let Some(result) = result.as_ref() else {
            set_error("NULL result");
            return sr_status::SR_ERR_POINTER;
        };
        let Some(rec) = result.inner.history.records().get(index) else {
            set_error("record index out of range");
            return sr_status::SR_ERR_INPUT;
        };
        if k.is_null() || values.is_null() {
            set_error("NULL output pointer");
            return sr_status::SR_ERR_POINTER;
        }
        *k = rec.k;
        let out = std::slice::from_raw_parts_mut(values, 6);
        out.copy_from_slice(&[
            rec.j,
            rec.g,
            rec.j_norm,
            rec.hausdorff,
            rec.t,
            rec.primal_residual,
        ]);
        sr_status::SR_OK
    })
}

/// Writes the run history CSV to `path`.
#[no_mangle]
pub unsafe extern "C" fn sr_result_write_history(
    result: *const sr_result,
    path: *const c_char,
) -> sr_status {
    guarded(|| {
        let Some(result) = result.as_ref() else {
            set_error("NULL result");
            return sr_status::SR_ERR_POINTER;
        };
        let Some(path) = cstr(path) else {
            set_error("NULL or non-UTF-8 path");
            return sr_status::SR_ERR_POINTER;
        };
        match write_history(&result.inner.history, Path::new(path)) {
            Ok(()) => sr_status::SR_OK,
            Err(e) => fail(&e),
        }
    })
}

/// Writes the final inclusion boundary as an `x,y` CSV.
#[no_mangle]
pub unsafe extern "C" fn sr_result_write_boundary(
    result: *const sr_result,
    path: *const c_char,
) -> sr_status {
    guarded(|| {
        let Some(result) = result.as_ref() else {
            set_error("NULL result");
            return sr_status::SR_ERR_POINTER;
        };
        let Some(path) = cstr(path) else {
            set_error("NULL or non-UTF-8 path");
            return sr_status::SR_ERR_POINTER;
        };
        let boundary = match result
            .inner
            .final_mesh
            .boundary_polyline(shaperecon::mesh::BoundaryLabel::Inner)
        {
            Ok(b) => b,
            Err(e) => return fail(&e),
        };
        match boundary.write_csv(Path::new(path)) {
            Ok(()) => sr_status::SR_OK,
            Err(e) => fail(&e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sr_result_free(result: *mut sr_result) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            assert_eq!(
                sr_data_read(std::ptr::null(), std::ptr::null(), std::ptr::null_mut()),
                sr_status::SR_ERR_POINTER
            );
            assert_eq!(sr_config_new(std::ptr::null_mut()), sr_status::SR_ERR_POINTER);
            assert_eq!(sr_result_len(std::ptr::null()), 0);
            sr_data_free(std::ptr::null_mut());
            sr_config_free(std::ptr::null_mut());
            sr_result_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn config_set_validates_keys() {
        unsafe {
            let mut cfg: *mut sr_config = std::ptr::null_mut();
            assert_eq!(sr_config_new(&mut cfg), sr_status::SR_OK);
            let key = CString::new("beta").unwrap();
            let val = CString::new("0.01").unwrap();
            assert_eq!(sr_config_set(cfg, key.as_ptr(), val.as_ptr()), sr_status::SR_OK);
            let bad = CString::new("bogus").unwrap();
            assert_eq!(
                sr_config_set(cfg, bad.as_ptr(), val.as_ptr()),
                sr_status::SR_ERR_INPUT
            );
            let mut buf = [0i8; 128];
            let n = sr_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
            sr_config_free(cfg);
        }
    }

    #[test]
    fn missing_data_file_reports_input_error() {
        unsafe {
            let csv = CString::new("/nonexistent/data.csv").unwrap();
            let json = CString::new("/nonexistent/data.json").unwrap();
            let mut data: *mut sr_data = std::ptr::null_mut();
            assert_eq!(
                sr_data_read(csv.as_ptr(), json.as_ptr(), &mut data),
                sr_status::SR_ERR_INPUT
            );
        }
    }
}
