use std::ffi::{CStr, CString};
use std::ptr;

use linsys_ffi::*;

fn builtin(name: &str) -> *mut LinsysSystem {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { linsys_system_builtin(name.as_ptr(), &mut h) }, LinsysStatus::Ok);
    h
}

fn last_error() -> String {
    let p = linsys_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parse_render_and_counts() {
    let text = CString::new("x1 - 2x2 + x3 = 0\n").unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(linsys_system_parse(text.as_ptr(), &mut h), LinsysStatus::Ok);
        assert_eq!(linsys_system_variable_count(h), 3);
        assert_eq!(linsys_system_equation_count(h), 1);
        let mut s = ptr::null_mut();
        assert_eq!(linsys_system_render(h, &mut s), LinsysStatus::Ok);
        assert!(CStr::from_ptr(s).to_str().unwrap().contains("= 0"));
        linsys_string_free(s);
        linsys_system_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let bad = CString::new("x1 + = 0").unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(linsys_system_parse(bad.as_ptr(), &mut h), LinsysStatus::Syntax);
        assert!(h.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(linsys_system_parse(ptr::null(), &mut h), LinsysStatus::NullPointer);
        let missing = CString::new("NOPE").unwrap();
        assert_eq!(linsys_system_builtin(missing.as_ptr(), &mut h), LinsysStatus::NotFound);
        assert!(last_error().contains("NOPE"));
        let s = builtin("S3AP");
        let mut out = LinsysBound::default();
        assert_eq!(linsys_upper_bound_strong(s, 4, 1, &mut out), LinsysStatus::NotPrime);
        linsys_system_free(s);
        linsys_system_free(ptr::null_mut());
    }
}

#[test]
fn parameters_and_numeric_entry_points() {
    unsafe {
        let h = builtin("STAR3");
        let mut q = LinsysParameters::default();
        assert_eq!(linsys_system_parameters(h, &mut q), LinsysStatus::Ok);
        assert!(q.irreducible);
        linsys_system_free(h);

        let mut b = LinsysBound::default();
        assert_eq!(linsys_lambda(3, 1.0 / 3.0, 2, &mut b), LinsysStatus::Ok);
        assert!((b.value - 3.0648015050615722).abs() < 1e-6);
        assert_eq!(linsys_lambda(3, -1.0, 2, &mut b), LinsysStatus::InvalidArgument);

        let mut c = LinsysBound::default();
        assert_eq!(linsys_c_tilde(1, 1, 1, 3, 3, &mut c), LinsysStatus::Ok);
        assert!(c.value > 0.0 && c.value <= 3.0);

        let (mut holds, mut margin) = (false, 0.0);
        assert_eq!(linsys_star_inequality(3, 0, 1, &mut holds, &mut margin), LinsysStatus::Ok);
        assert!(holds);
        assert!((margin - 0.5).abs() < 1e-12);
        assert_eq!(linsys_star_inequality(3, 0, 1, ptr::null_mut(), &mut margin), LinsysStatus::NullPointer);
    }
}

#[test]
fn search_and_reduction() {
    unsafe {
        let h = builtin("S3AP");
        let mut r = LinsysSearchResult::default();
        assert_eq!(linsys_max_free(h, 5, 1, LinsysFreeness::Strong, 1, &mut r), LinsysStatus::Ok);
        assert!(r.exhaustive);
        assert_eq!(r.value, 2);

        let (mut bt, mut empty_one) = (0u64, false);
        assert_eq!(linsys_reduction_b_tilde(h, &mut bt, &mut empty_one), LinsysStatus::Ok);
        assert!(bt >= 1);
        assert!(empty_one);

        let mut ub = LinsysBound::default();
        assert_eq!(linsys_upper_bound_strong(h, 5, 2, &mut ub), LinsysStatus::Ok);
        assert!(ub.value <= 25.0 && ub.value > 0.0);
        linsys_system_free(h);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/linsys.h")).unwrap();
    for name in [
        "linsys_last_error",
        "linsys_system_parse",
        "linsys_system_builtin",
        "linsys_system_free",
        "linsys_system_variable_count",
        "linsys_system_equation_count",
        "linsys_system_render",
        "linsys_string_free",
        "linsys_system_parameters",
        "linsys_lambda",
        "linsys_c_tilde",
        "linsys_star_inequality",
        "linsys_upper_bound_strong",
        "linsys_reduction_b_tilde",
        "linsys_max_free",
        "LINSYS_STATUS_OK",
        "typedef struct LinsysSystem LinsysSystem",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
