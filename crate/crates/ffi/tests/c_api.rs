use std::ffi::{CStr, CString};
use std::ptr;

use spectral_fractal_ffi::*;

fn quarter_cantor() -> *mut SfProblem {
    let (r, b, l) = ([4i64], [0i64, 2], [0i64, 1]);
    let mut p = ptr::null_mut();
    let st = unsafe { sf_problem_new(1, r.as_ptr(), b.as_ptr(), 2, l.as_ptr(), 2, &mut p) };
    assert_eq!(st, SfStatus::Ok);
    p
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        sf_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn validate_and_mu_hat() {
    let p = quarter_cantor();
    let (mut valid, mut defect) = (false, 1.0);
    unsafe {
        assert_eq!(sf_validate(p, &mut valid, &mut defect), SfStatus::Ok);
        assert!(valid && defect < 1e-12);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(sf_mu_hat(p, [0.0].as_ptr(), 1, &mut re, &mut im), SfStatus::Ok);
        assert!((re - 1.0).abs() < 1e-15 && im.abs() < 1e-15);
        assert_eq!(sf_mu_hat(p, [1.0].as_ptr(), 1, &mut re, &mut im), SfStatus::Ok);
        assert!((re * re + im * im).sqrt() < 1e-12);
        assert_eq!(sf_mu_hat(p, [0.5, 0.5].as_ptr(), 2, &mut re, &mut im), SfStatus::InvalidInput);
        sf_problem_free(p);
    }
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(sf_problem_new(1, [1i64].as_ptr(), [0i64, 1].as_ptr(), 2, ptr::null(), 0, &mut p), SfStatus::InvalidInput);
        assert!(last_error().contains("expansive"), "{}", last_error());
        assert!(p.is_null());
        assert_eq!(sf_problem_new(1, ptr::null(), [0i64].as_ptr(), 1, ptr::null(), 0, &mut p), SfStatus::NullPointer);
        let bad = CString::new(r#"{"R": [[4]], "B": [[0], [2]], "L": [[0], [2]]}"#).unwrap();
        assert_eq!(sf_problem_from_json(bad.as_ptr(), &mut p), SfStatus::Ok);
        let (mut valid, mut defect) = (true, 0.0);
        assert_eq!(sf_validate(p, &mut valid, &mut defect), SfStatus::Ok);
        assert!(!valid);
        let job = CString::new(r#"{"command": "spectrum"}"#).unwrap();
        let mut rep = ptr::null_mut();
        assert_eq!(sf_run(p, job.as_ptr(), &mut rep), SfStatus::Refused);
        sf_problem_free(p);
    }
}

#[test]
fn zero_set_of_the_stretched_interval() {
    let json = CString::new(r#"{"R": [[2]], "B": [[0], [2]]}"#).unwrap();
    let mut p = ptr::null_mut();
    let mut z = SfZeroSet::Empty;
    unsafe {
        assert_eq!(sf_problem_from_json(json.as_ptr(), &mut p), SfStatus::Ok);
        assert_eq!(sf_zero_set(p, &mut z), SfStatus::Ok);
        assert_eq!(z, SfZeroSet::NonEmpty);
        sf_problem_free(p);
    }
}

#[test]
fn reports_round_trip_through_verify() {
    let p = quarter_cantor();
    let job = CString::new(r#"{"command": "validate", "tower_depth": 3}"#).unwrap();
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(sf_run(p, job.as_ptr(), &mut rep), SfStatus::Ok);
        assert_eq!(sf_report_exit_code(rep), 0);
        let json = CStr::from_ptr(sf_report_json(rep)).to_str().unwrap().to_owned();
        assert!(json.contains("\"valid\": true"));
        let mut passed = false;
        let c = CString::new(json.clone()).unwrap();
        assert_eq!(sf_verify(c.as_ptr(), &mut passed), SfStatus::Ok);
        assert!(passed);
        let tampered = CString::new(json.replace("\"valid\": true", "\"valid\": false")).unwrap();
        assert_eq!(sf_verify(tampered.as_ptr(), &mut passed), SfStatus::Ok);
        assert!(!passed);
        sf_report_free(rep);
        sf_problem_free(p);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spectral_fractal.h")).unwrap();
    for name in ["sf_problem_new", "sf_run", "sf_verify", "sf_report_free", "SF_STATUS_CAP_EXCEEDED", "typedef struct SfProblem SfProblem"] {
        assert!(header.contains(name), "{name} missing from the header");
    }
    assert!(unsafe { CStr::from_ptr(sf_version()) }.to_str().unwrap().starts_with("0."));
}
