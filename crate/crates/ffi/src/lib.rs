//! C ABI for the smallcover library.
//!
//! Instances travel as JSON (the same wire format the CLI reads), handles
//! are opaque pointers, and every fallible call returns an [`ScStatus`];
//! the detailed message of the last failure on the current thread is
//! available through [`sc_last_error_message`]. Strings returned through
//! out-parameters are owned by the caller and must be released with
//! [`sc_string_free`].

use smallcover::cli::{render_report, run, Overrides};
use smallcover::model::{
    expected_supremum_exact, expected_supremum_mc, threshold_family, Instance, InstanceSpec,
};
use smallcover::rational::format_rat;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Status codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The configuration failed to parse or validate.
    ConfigError = 3,
    /// An exact operation exceeded its enumeration budget.
    BudgetExceeded = 4,
    /// The command ran and reported a violation (CLI exit code 1).
    ViolationFound = 5,
    InternalError = 6,
}

/// Opaque handle around a validated instance.
pub struct ScInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn status_of(err: &smallcover::Error) -> ScStatus {
    match err {
        smallcover::Error::BudgetExceeded { .. } => ScStatus::BudgetExceeded,
        _ => ScStatus::ConfigError,
    }
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn read_utf8<'a>(ptr_in: *const c_char) -> Result<&'a str, ScStatus> {
    if ptr_in.is_null() {
        set_error("null pointer argument".into());
        return Err(ScStatus::NullPointer);
    }
    CStr::from_ptr(ptr_in).to_str().map_err(|_| {
        set_error("input is not valid UTF-8".into());
        ScStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, text: String) -> ScStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            ScStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior nul byte".into());
            ScStatus::InternalError
        }
    }
}

/// Parses an instance from its JSON wire form
/// `{d, n, p, f, T, K, delta, L | Kprime}` into an opaque handle.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_parse(
    json: *const c_char,
    out: *mut *mut ScInstance,
) -> ScStatus {
    if out.is_null() {
        set_error("null out-pointer".into());
        return ScStatus::NullPointer;
    }
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let spec = match InstanceSpec::parse(text) {
        Ok(s) => s,
        Err(e) => {
            set_error(e.to_string());
            return ScStatus::ConfigError;
        }
    };
    match spec.build() {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ScInstance { inner }));
            ScStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Releases an instance handle. Null is a no-op.
///
/// # Safety
/// `inst` must come from [`sc_instance_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_free(inst: *mut ScInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Dimension d of the instance.
///
/// # Safety
/// `inst` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_instance_dim(inst: *const ScInstance, out: *mut usize) -> ScStatus {
    if inst.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return ScStatus::NullPointer;
    }
    *out = (*inst).inner.dim();
    ScStatus::Ok
}

/// Exact expected supremum as a "num/den" string.
///
/// # Safety
/// `inst` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn sc_expected_supremum(
    inst: *const ScInstance,
    budget: u64,
    out: *mut *mut c_char,
) -> ScStatus {
    if inst.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return ScStatus::NullPointer;
    }
    match expected_supremum_exact(&(*inst).inner, budget) {
        Ok(value) => give_string(out, format_rat(&value)),
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Seeded Monte Carlo estimate of the expected supremum.
///
/// # Safety
/// `inst` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sc_expected_supremum_mc(
    inst: *const ScInstance,
    samples: u64,
    seed: u64,
    out_estimate: *mut f64,
    out_std_error: *mut f64,
) -> ScStatus {
    if inst.is_null() || out_estimate.is_null() || out_std_error.is_null() {
        set_error("null pointer argument".into());
        return ScStatus::NullPointer;
    }
    if samples < 2 {
        set_error("need at least two samples".into());
        return ScStatus::ConfigError;
    }
    let est = expected_supremum_mc(&(*inst).inner, samples, seed);
    *out_estimate = est.estimate;
    *out_std_error = est.std_error;
    ScStatus::Ok
}

/// Number of configurations in the threshold family.
///
/// # Safety
/// `inst` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_family_size(
    inst: *const ScInstance,
    budget: u64,
    out: *mut u64,
) -> ScStatus {
    if inst.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return ScStatus::NullPointer;
    }
    match threshold_family(&(*inst).inner, budget) {
        Ok(family) => {
            *out = family.len() as u64;
            ScStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Runs one CLI command (`estimate`, `family`, `witness`, `cover`,
/// `classes`, `reduce`, `verify`, `selector`) over a full JSON config
/// document and returns the rendered report. Seeds, sample counts, mode and
/// budget are read from the config document itself.
///
/// The status mirrors the CLI exit codes: `Ok` for exit 0,
/// `ViolationFound` for exit 1, `ConfigError` for exit 2 and
/// `BudgetExceeded` for exit 3. The report is written in every case.
///
/// # Safety
/// `command` and `config_json` must be nul-terminated strings; `out_report`
/// receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn sc_run(
    command: *const c_char,
    config_json: *const c_char,
    out_report: *mut *mut c_char,
) -> ScStatus {
    if out_report.is_null() {
        set_error("null out-pointer".into());
        return ScStatus::NullPointer;
    }
    let command = match read_utf8(command) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let config = match read_utf8(config_json) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let outcome = run(command, config, &Overrides::default());
    let rendered = render_report(&outcome.report);
    let status = match outcome.exit {
        0 => ScStatus::Ok,
        1 => ScStatus::ViolationFound,
        3 => ScStatus::BudgetExceeded,
        _ => ScStatus::ConfigError,
    };
    if status != ScStatus::Ok {
        set_error(format!("command {command:?} exited with {}", outcome.exit));
    }
    let write_status = give_string(out_report, rendered);
    if write_status != ScStatus::Ok {
        return write_status;
    }
    status
}

/// Releases a string produced by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
