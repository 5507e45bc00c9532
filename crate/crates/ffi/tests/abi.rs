use std::ffi::{CStr, CString};
use std::ptr;

use symgrowth_ffi::*;

const INTERVAL: &str =
    r#"{"group": {"type": "cyclic", "n": 20}, "set": {"type": "interval", "start": 0, "length": 5}}"#;

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    sg_string_free(s);
    out
}

unsafe fn load(json: &str) -> *mut SgInstance {
    let json = CString::new(json).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(sg_instance_load(json.as_ptr(), &mut inst), SgStatus::Ok);
    inst
}

#[test]
fn run_and_verify_through_the_abi() {
    unsafe {
        let inst = load(INTERVAL);
        let mut n = 0;
        assert_eq!(sg_instance_size(inst, &mut n), SgStatus::Ok);
        assert_eq!(n, 5);

        let mut cert = ptr::null_mut();
        assert_eq!(sg_run(inst, 2, &mut cert), SgStatus::Ok);
        assert_eq!(sg_certificate_verified(cert), 1);

        let mut json = ptr::null_mut();
        assert_eq!(sg_certificate_to_json(cert, &mut json), SgStatus::Ok);
        let text = take(json);
        assert!(text.contains("\"rhs\": \"25/18\""));

        let c_text = CString::new(text.clone()).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(sg_certificate_from_json(c_text.as_ptr(), &mut back), SgStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(sg_certificate_to_json(back, &mut again), SgStatus::Ok);
        assert_eq!(take(again), text);

        let mut report = ptr::null_mut();
        assert_eq!(sg_verify(back, inst, &mut report), SgStatus::Ok);
        assert!(take(report).contains("\"overall\": true"));
        assert_eq!(sg_verify(cert, inst, ptr::null_mut()), SgStatus::Ok);

        // a certificate checked against a different set does not verify
        let other = load(
            r#"{"group": {"type": "cyclic", "n": 20}, "set": {"type": "interval", "start": 0, "length": 6}}"#,
        );
        assert_eq!(sg_verify(cert, other, ptr::null_mut()), SgStatus::Unverified);

        sg_certificate_free(back);
        sg_certificate_free(cert);
        sg_instance_free(other);
        sg_instance_free(inst);
    }
}

#[test]
fn json_queries() {
    unsafe {
        let inst = load(INTERVAL);
        let mut out = ptr::null_mut();
        assert_eq!(sg_doubling_json(inst, &mut out), SgStatus::Ok);
        assert!(take(out).contains("\"K\": \"9/5\""));

        let eta = CString::new("4/5").unwrap();
        assert_eq!(sg_sym_json(inst, eta.as_ptr(), &mut out), SgStatus::Ok);
        let members: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(members, serde_json::json!([[0], [1], [19]]));

        assert_eq!(sg_almost_invariant_json(inst, 3, &mut out), SgStatus::Ok);
        assert!(take(out).contains("\"chain\""));
        sg_instance_free(inst);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut inst = ptr::null_mut();
        let bad = CString::new(
            r#"{"group": {"type": "cyclic", "n": 0}, "set": {"type": "explicit", "elements": []}}"#,
        )
        .unwrap();
        assert_eq!(sg_instance_load(bad.as_ptr(), &mut inst), SgStatus::InvalidInput);
        assert!(inst.is_null());
        assert!(!CStr::from_ptr(sg_last_error_message()).to_bytes().is_empty());

        assert_eq!(sg_instance_load(ptr::null(), &mut inst), SgStatus::NullPointer);

        let inst = load(INTERVAL);
        let mut out = ptr::null_mut();
        let eta = CString::new("0.8").unwrap();
        assert_eq!(sg_sym_json(inst, eta.as_ptr(), &mut out), SgStatus::InvalidInput);
        let mut cert = ptr::null_mut();
        assert_eq!(sg_run(inst, 0, &mut cert), SgStatus::InvalidInput);
        assert_eq!(sg_certificate_verified(ptr::null()), 0);
        sg_instance_free(inst);
        sg_instance_free(ptr::null_mut());
        sg_string_free(ptr::null_mut());

        let v = CStr::from_ptr(sg_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
