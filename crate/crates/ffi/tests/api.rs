//! Exercises the C surface from Rust: handles, status codes, string
//! ownership, and full-command dispatch.

use smallcover_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

const I1_INSTANCE: &str = r#"{
    "d": 2, "n": 3,
    "p": ["1/2", "1/4", "1/4"],
    "f": ["0", "1", "2"],
    "T": [["1", "0"], ["0", "1"], ["1/2", "1/2"]],
    "K": 2, "delta": "1/2", "L": "3/2"
}"#;

fn parse_i1() -> *mut ScInstance {
    let json = CString::new(I1_INSTANCE).unwrap();
    let mut handle: *mut ScInstance = ptr::null_mut();
    let status = unsafe { sc_instance_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, ScStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn version_is_a_static_string() {
    let version = unsafe { CStr::from_ptr(sc_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_evaluate_free_round_trip() {
    let handle = parse_i1();

    let mut dim = 0usize;
    assert_eq!(unsafe { sc_instance_dim(handle, &mut dim) }, ScStatus::Ok);
    assert_eq!(dim, 2);

    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sc_expected_supremum(handle, 1_000_000, &mut out) };
    assert_eq!(status, ScStatus::Ok);
    let value = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    assert_eq!(value, "19/16");
    unsafe { sc_string_free(out) };

    let mut size = 0u64;
    assert_eq!(
        unsafe { sc_family_size(handle, 1_000_000, &mut size) },
        ScStatus::Ok
    );
    assert_eq!(size, 5);

    let mut estimate = 0.0f64;
    let mut std_error = 0.0f64;
    let status =
        unsafe { sc_expected_supremum_mc(handle, 65_536, 7, &mut estimate, &mut std_error) };
    assert_eq!(status, ScStatus::Ok);
    assert!((estimate - 1.1875).abs() <= 4.0 * std_error);

    unsafe { sc_instance_free(handle) };
}

#[test]
fn budget_errors_carry_a_message() {
    let handle = parse_i1();
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sc_expected_supremum(handle, 4, &mut out) };
    assert_eq!(status, ScStatus::BudgetExceeded);
    let message = unsafe { CStr::from_ptr(sc_last_error_message()) };
    assert!(message.to_str().unwrap().contains("budget"));
    unsafe { sc_instance_free(handle) };
}

#[test]
fn invalid_instances_are_rejected() {
    let json = CString::new(
        r#"{"d": 1, "n": 1, "p": ["1/2"], "f": ["0"],
        "T": [["1"]], "K": 1, "delta": "1/2", "L": "1"}"#,
    )
    .unwrap();
    let mut handle: *mut ScInstance = ptr::null_mut();
    let status = unsafe { sc_instance_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, ScStatus::ConfigError);
    assert!(handle.is_null());

    let mut dim = 0usize;
    assert_eq!(
        unsafe { sc_instance_dim(ptr::null(), &mut dim) },
        ScStatus::NullPointer
    );
}

#[test]
fn run_dispatches_full_commands() {
    let command = CString::new("estimate").unwrap();
    let config = CString::new(format!(r#"{{ "instance": {I1_INSTANCE} }}"#)).unwrap();
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sc_run(command.as_ptr(), config.as_ptr(), &mut out) };
    assert_eq!(status, ScStatus::Ok);
    let report = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { sc_string_free(out) };
    assert!(report.contains("\"S_T\": \"19/16\""), "{report}");

    // a config schema error maps to ConfigError but still yields a report
    let bad = CString::new("{}").unwrap();
    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    let status = unsafe { sc_run(command.as_ptr(), bad.as_ptr(), &mut out) };
    assert_eq!(status, ScStatus::ConfigError);
    let report = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { sc_string_free(out) };
    assert!(report.contains("\"error\""), "{report}");
}

#[test]
fn generated_header_exists_with_the_core_symbols() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/smallcover.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "sc_version",
        "sc_instance_parse",
        "sc_instance_free",
        "sc_expected_supremum",
        "sc_run",
        "sc_string_free",
        "ScStatus",
        "ScInstance",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
