//! C ABI for the loopshield library.
//!
//! Opaque handles, integer status codes, and a thread-local error message.
//! Every function is panic-safe: a Rust panic is caught at the boundary and
//! surfaced as [`LsStatus::Internal`].
//!
//! Ownership rules: handles returned through `out` parameters belong to the
//! caller and are released with the matching `*_free` function; strings
//! returned through `char **out` are released with [`ls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use loopshield::scenarios;
use loopshield::sim::{run_scenario, summarize, Scenario, SimLog, SummaryReport};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Scenario file or text failed to parse or validate.
    ConfigError = 3,
    /// No golden scenario has the requested name.
    UnknownGolden = 4,
    /// The simulation rejected the scenario or failed mid-run.
    RunError = 5,
    /// Filesystem error while writing an artifact.
    IoError = 6,
    /// The run produced no stability region to export.
    NoRegion = 7,
    /// A panic was caught at the boundary; see ls_last_error_message.
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(clean).unwrap_or_default();
    });
}

fn fail(status: LsStatus, msg: &str) -> LsStatus {
    set_error(msg);
    status
}

/// Run `f` with panics converted to [`LsStatus::Internal`].
fn guarded(f: impl FnOnce() -> LsStatus) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic at the ffi boundary".into());
            fail(LsStatus::Internal, &msg)
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated C string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, LsStatus> {
    if ptr.is_null() {
        return Err(fail(LsStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(LsStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn out_arg<'a, T>(ptr: *mut T) -> Result<&'a mut T, LsStatus> {
    if ptr.is_null() {
        return Err(fail(LsStatus::NullArgument, "null output pointer"));
    }
    Ok(unsafe { &mut *ptr })
}

/// Opaque scenario handle.
pub struct LsScenario {
    inner: Scenario,
}

/// Opaque result handle: the full log plus its summary.
pub struct LsRunResult {
    log: SimLog,
    summary: SummaryReport,
}

/// Copy the message of the most recent error on this thread into `buf`
/// (NUL-terminated, truncated to `capacity`). Returns the full message
/// length in bytes, excluding the NUL; call with a null `buf` to size a
/// buffer.
///
/// # Safety
/// `buf` must be null or point to at least `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ls_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of built-in golden scenarios.
#[no_mangle]
pub extern "C" fn ls_golden_count() -> usize {
    scenarios::all().len()
}

/// Name of golden scenario `index` as a newly allocated string, or null if
/// out of range. Free with [`ls_string_free`].
#[no_mangle]
pub extern "C" fn ls_golden_name(index: usize) -> *mut c_char {
    match scenarios::all().get(index) {
        Some(g) => CString::new(g.name).expect("static name").into_raw(),
        None => std::ptr::null_mut(),
    }
}

/// Load the golden scenario with the given name.
///
/// # Safety
/// `name` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the scenario.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_golden(
    name: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    guarded(|| {
        let (name, out) = match (utf8_arg(name), out_arg(out)) {
            (Ok(n), Ok(o)) => (n, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match scenarios::by_name(name) {
            Some(g) => {
                *out = Box::into_raw(Box::new(LsScenario { inner: g.scenario }));
                LsStatus::Ok
            }
            None => fail(
                LsStatus::UnknownGolden,
                &format!("unknown golden scenario {name:?}"),
            ),
        }
    })
}

/// Parse a scenario from file contents already in memory.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_str(
    text: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    guarded(|| {
        let (text, out) = match (utf8_arg(text), out_arg(out)) {
            (Ok(t), Ok(o)) => (t, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match loopshield::config::parse_scenario(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(LsScenario { inner: s }));
                LsStatus::Ok
            }
            Err(e) => fail(LsStatus::ConfigError, &e.to_string()),
        }
    })
}

/// Load a scenario file from disk.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_from_file(
    path: *const c_char,
    out: *mut *mut LsScenario,
) -> LsStatus {
    guarded(|| {
        let (path, out) = match (utf8_arg(path), out_arg(out)) {
            (Ok(p), Ok(o)) => (p, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match loopshield::config::load_scenario(Path::new(path)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(LsScenario { inner: s }));
                LsStatus::Ok
            }
            Err(e) => fail(LsStatus::ConfigError, &e.to_string()),
        }
    })
}

/// Enable or disable the intrusion detector. Disabling it also disables
/// compensation.
///
/// # Safety
/// `scenario` must be a live handle from a scenario constructor.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_set_ids_enabled(
    scenario: *mut LsScenario,
    enabled: bool,
) -> LsStatus {
    guarded(|| {
        let Ok(s) = out_arg(scenario) else {
            return LsStatus::NullArgument;
        };
        s.inner.ids_enabled = enabled;
        if !enabled {
            s.inner.compensation_enabled = false;
        }
        LsStatus::Ok
    })
}

/// Enable or disable the controller swap (detection still runs).
///
/// # Safety
/// `scenario` must be a live handle from a scenario constructor.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_set_compensation_enabled(
    scenario: *mut LsScenario,
    enabled: bool,
) -> LsStatus {
    guarded(|| {
        let Ok(s) = out_arg(scenario) else {
            return LsStatus::NullArgument;
        };
        s.inner.compensation_enabled = enabled;
        LsStatus::Ok
    })
}

/// Release a scenario handle. Null is a no-op.
///
/// # Safety
/// `scenario` must be null or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_scenario_free(scenario: *mut LsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Run a scenario to completion.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid. On success `*out`
/// owns the result.
#[no_mangle]
pub unsafe extern "C" fn ls_run(
    scenario: *const LsScenario,
    out: *mut *mut LsRunResult,
) -> LsStatus {
    guarded(|| {
        if scenario.is_null() {
            return fail(LsStatus::NullArgument, "null scenario");
        }
        let Ok(out) = out_arg(out) else {
            return LsStatus::NullArgument;
        };
        let scenario = &(*scenario).inner;
        match run_scenario(scenario) {
            Ok(log) => {
                let summary = summarize(&log);
                *out = Box::into_raw(Box::new(LsRunResult { log, summary }));
                LsStatus::Ok
            }
            Err(e) => fail(LsStatus::RunError, &e.to_string()),
        }
    })
}

/// Release a run result. Null is a no-op.
///
/// # Safety
/// `result` must be null or a live handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_free(result: *mut LsRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string allocated by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The run summary as a JSON document. Free with [`ls_string_free`].
///
/// # Safety
/// `result` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_summary_json(
    result: *const LsRunResult,
    out: *mut *mut c_char,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let Ok(out) = out_arg(out) else {
            return LsStatus::NullArgument;
        };
        let json = serde_json::to_string_pretty(&(*result).summary).expect("summary serializes");
        *out = CString::new(json).expect("json has no NUL").into_raw();
        LsStatus::Ok
    })
}

unsafe fn optional_scalar(
    result: *const LsRunResult,
    has: *mut bool,
    value: *mut f64,
    get: impl Fn(&SummaryReport) -> Option<f64>,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let (Ok(has), Ok(value)) = (out_arg(has), out_arg(value)) else {
            return LsStatus::NullArgument;
        };
        match get(&(*result).summary) {
            Some(v) => {
                *has = true;
                *value = v;
            }
            None => {
                *has = false;
                *value = 0.0;
            }
        }
        LsStatus::Ok
    })
}

/// Detection time in seconds; `*has` is false when the detector never fired.
///
/// # Safety
/// All pointers must be valid; `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_detection_time(
    result: *const LsRunResult,
    has: *mut bool,
    value: *mut f64,
) -> LsStatus {
    optional_scalar(result, has, value, |s| s.detection_time)
}

/// Controller swap time in seconds; `*has` is false when no swap happened.
///
/// # Safety
/// All pointers must be valid; `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_swap_time(
    result: *const LsRunResult,
    has: *mut bool,
    value: *mut f64,
) -> LsStatus {
    optional_scalar(result, has, value, |s| s.swap_time)
}

/// Mean |r - y| over the final 5% of samples.
///
/// # Safety
/// All pointers must be valid; `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_steady_state_error(
    result: *const LsRunResult,
    value: *mut f64,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let Ok(value) = out_arg(value) else {
            return LsStatus::NullArgument;
        };
        *value = (*result).summary.steady_state_error;
        LsStatus::Ok
    })
}

/// Largest |y| over the whole run.
///
/// # Safety
/// All pointers must be valid; `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_peak_output(
    result: *const LsRunResult,
    value: *mut f64,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let Ok(value) = out_arg(value) else {
            return LsStatus::NullArgument;
        };
        *value = (*result).summary.peak_output;
        LsStatus::Ok
    })
}

/// Whether the output hit the divergence clamp at any point.
///
/// # Safety
/// All pointers must be valid; `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_diverged(
    result: *const LsRunResult,
    value: *mut bool,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let Ok(value) = out_arg(value) else {
            return LsStatus::NullArgument;
        };
        *value = (*result).summary.diverged;
        LsStatus::Ok
    })
}

/// Write the per-sample timeseries CSV to `path`.
///
/// # Safety
/// `result` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_write_csv(
    result: *const LsRunResult,
    path: *const c_char,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let path = match utf8_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let write = || -> std::io::Result<()> {
            let file = std::fs::File::create(path)?;
            let mut w = std::io::BufWriter::new(file);
            (*result).log.write_csv(&mut w)?;
            std::io::Write::flush(&mut w)
        };
        match write() {
            Ok(()) => LsStatus::Ok,
            Err(e) => fail(LsStatus::IoError, &format!("{path}: {e}")),
        }
    })
}

/// Write the stability region computed from the identified model, when the
/// compensation pipeline ran; [`LsStatus::NoRegion`] otherwise.
///
/// # Safety
/// `result` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ls_run_result_write_region_csv(
    result: *const LsRunResult,
    path: *const c_char,
) -> LsStatus {
    guarded(|| {
        if result.is_null() {
            return fail(LsStatus::NullArgument, "null result");
        }
        let path = match utf8_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let Some(region) = (*result).log.region.as_ref() else {
            return fail(LsStatus::NoRegion, "the compensation pipeline did not run");
        };
        let write = || -> std::io::Result<()> {
            let file = std::fs::File::create(path)?;
            let mut w = std::io::BufWriter::new(file);
            region.write_csv(&mut w)?;
            std::io::Write::flush(&mut w)
        };
        match write() {
            Ok(()) => LsStatus::Ok,
            Err(e) => fail(LsStatus::IoError, &format!("{path}: {e}")),
        }
    })
}
