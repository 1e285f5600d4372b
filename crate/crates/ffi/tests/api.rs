use std::ffi::{CStr, CString};
use std::ptr;

use capbound_ffi::*;

fn last_error() -> String {
    let p = cb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fast() -> CbOptions {
    CbOptions { restarts: 4, max_iter: 400, ..cb_options_default() }
}

fn builtin(name: &str, params: &[f64]) -> *mut CbChannel {
    let name = CString::new(name).unwrap();
    let mut ch = ptr::null_mut();
    let st = unsafe { cb_channel_builtin(name.as_ptr(), params.as_ptr(), params.len(), &mut ch) };
    assert_eq!(st, CbStatus::Ok);
    ch
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { cb_string_free(p) };
    s
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn builtin_dims_and_complement() {
    let ch = builtin("erasure", &[2.0, 0.25]);
    let (mut a, mut b, mut e) = (0, 0, 0);
    assert_eq!(unsafe { cb_channel_dims(ch, &mut a, &mut b, &mut e) }, CbStatus::Ok);
    assert_eq!((a, b), (2, 3));
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { cb_channel_complement(ch, &mut c) }, CbStatus::Ok);
    let (mut ca, mut cb) = (0, 0);
    assert_eq!(unsafe { cb_channel_dims(c, &mut ca, &mut cb, ptr::null_mut()) }, CbStatus::Ok);
    assert_eq!((ca, cb), (2, e));
    unsafe {
        cb_channel_free(c);
        cb_channel_free(ch);
    }
}

#[test]
fn kraus_round_trip_through_json() {
    // Bit flip with probability 0.1.
    let (s, t) = (0.9f64.sqrt(), 0.1f64.sqrt());
    let data = [s, 0.0, 0.0, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, t, 0.0, t, 0.0, 0.0, 0.0];
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { cb_channel_from_kraus(2, 2, 2, data.as_ptr(), &mut ch) }, CbStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { cb_channel_to_json(ch, &mut json) }, CbStatus::Ok);
    let json = CString::new(take_string(json)).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { cb_channel_from_json(json.as_ptr(), &mut back) }, CbStatus::Ok);
    let mut d = f64::NAN;
    assert_eq!(unsafe { cb_diamond_distance(ch, back, ptr::null(), &mut d) }, CbStatus::Ok);
    assert!(d.abs() < 1e-6, "{d}");
    unsafe {
        cb_channel_free(back);
        cb_channel_free(ch);
    }
}

#[test]
fn non_tp_kraus_is_a_validation_error() {
    let data = [0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { cb_channel_from_kraus(2, 2, 1, data.as_ptr(), &mut ch) }, CbStatus::Validation);
    assert!(ch.is_null());
    assert!(last_error().contains("not trace preserving"), "{}", last_error());
}

#[test]
fn null_and_bad_utf8_inputs_are_reported() {
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { cb_channel_from_json(ptr::null(), &mut ch) }, CbStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { cb_channel_from_json(bad.as_ptr().cast(), &mut ch) }, CbStatus::InvalidUtf8);
    let mut v = 0.0;
    assert_eq!(unsafe { cb_channel_quantity(ptr::null(), CbQuantity::Q1, ptr::null(), &mut v) }, CbStatus::NullPointer);
    let name = CString::new("no-such-channel").unwrap();
    assert_eq!(unsafe { cb_channel_builtin(name.as_ptr(), ptr::null(), 0, &mut ch) }, CbStatus::Validation);
}

#[test]
fn invalid_options_are_rejected() {
    let ch = builtin("amplitude_damping", &[0.3]);
    let opts = CbOptions { restarts: 0, ..cb_options_default() };
    let mut v = 0.0;
    assert_eq!(unsafe { cb_channel_quantity(ch, CbQuantity::Q1, &opts, &mut v) }, CbStatus::Validation);
    let opts = CbOptions { sdp_tol: -1.0, ..cb_options_default() };
    assert_eq!(unsafe { cb_channel_quantity(ch, CbQuantity::TransposeBound, &opts, &mut v) }, CbStatus::Validation);
    unsafe { cb_channel_free(ch) };
}

#[test]
fn erasure_quantities_match_closed_forms() {
    let ch = builtin("erasure", &[2.0, 0.25]);
    let opts = fast();
    let q = |k| {
        let mut v = f64::NAN;
        assert_eq!(unsafe { cb_channel_quantity(ch, k, &opts, &mut v) }, CbStatus::Ok, "{}", last_error());
        v
    };
    assert!((q(CbQuantity::Q1) - 0.5).abs() < 1e-6);
    assert!((q(CbQuantity::Ce) - 1.5).abs() < 1e-6);
    assert!((q(CbQuantity::Chi) - 0.75).abs() < 1e-6);
    assert!(q(CbQuantity::EpsDegradable) < 1e-6);
    unsafe { cb_channel_free(ch) };
}

#[test]
fn bounds_json_matches_cli_document() {
    let ch = builtin("amplitude_damping", &[0.3]);
    let opts = fast();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cb_bounds_json(ch, &opts, 0, &mut out) }, CbStatus::Ok, "{}", last_error());
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "bounds");
    assert!(!v["reports"].as_array().unwrap().is_empty());
    unsafe { cb_channel_free(ch) };
}

#[test]
fn state_bounds_json_for_maximally_entangled_pair() {
    let h = 0.5;
    let mut rho = [0.0f64; 32];
    for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        rho[2 * (r * 4 + c)] = h;
    }
    let mut st = ptr::null_mut();
    assert_eq!(unsafe { cb_state_from_density(2, 2, rho.as_ptr(), &mut st) }, CbStatus::Ok, "{}", last_error());
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cb_state_bounds_json(st, &fast(), false, &mut out) }, CbStatus::Ok, "{}", last_error());
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["command"], "state-bounds");
    assert_eq!(v["dims"], serde_json::json!([2, 2]));
    unsafe { cb_state_free(st) };
}

#[test]
fn small_search_runs_from_json_config() {
    let cfg = CString::new(r#"{"dim_in":2,"dim_out":2,"dim_env":2,"seeds":1,"iterations":10,"optim":{"restarts":2}}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cb_search_bippt_json(cfg.as_ptr(), &mut out) }, CbStatus::Ok, "{}", last_error());
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["command"], "search-bippt");
    assert_eq!(v["records"].as_array().unwrap().len() + v["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        cb_channel_free(ptr::null_mut());
        cb_state_free(ptr::null_mut());
        cb_string_free(ptr::null_mut());
    }
}
