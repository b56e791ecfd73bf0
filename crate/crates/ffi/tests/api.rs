use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use suptail::bounds::{threshold_u, BoundParams, DenseClass};
use suptail_ffi::*;

fn last_error() -> Option<String> {
    let p = suptail_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(suptail_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn thresholds_match_the_library() {
    let mut u = 0.0;
    let status = unsafe { suptail_threshold_u(1000, 0.01, ptr::null(), &mut u) };
    assert_eq!(status, SuptailStatus::Ok);
    assert!(last_error().is_none());
    let expected = threshold_u(1000, 0.01, &DenseClass::default(), &BoundParams::default()).unwrap();
    assert_eq!(u, expected);

    let mut regime = SuptailRegime::A;
    unsafe { suptail_classify_regime(1000, 0.01, &mut regime) };
    assert_eq!(regime, SuptailRegime::C);
}

#[test]
fn params_handle_overrides_and_rejects() {
    let params = suptail_params_new();
    let name = CString::new("C6").unwrap();
    let mut base = 0.0;
    let mut scaled = 0.0;
    unsafe {
        suptail_threshold_u_bar(0.01, params, &mut base);
        assert_eq!(suptail_params_set(params, name.as_ptr(), 40.0), SuptailStatus::Ok);
        suptail_threshold_u_bar(0.01, params, &mut scaled);
        assert!((scaled - 2.0 * base).abs() < 1e-12 * scaled);

        let bad = CString::new("C2").unwrap();
        assert_eq!(suptail_params_set(params, bad.as_ptr(), 1.5), SuptailStatus::InvalidArgument);
        assert!(last_error().unwrap().contains("C2"));
        let unknown = CString::new("nope").unwrap();
        assert_ne!(suptail_params_set(params, unknown.as_ptr(), 1.0), SuptailStatus::Ok);

        assert_eq!(suptail_params_set_class(params, 0.5, 1.0), SuptailStatus::InvalidArgument);
        assert_eq!(suptail_params_set_class(params, 4.0, 2.0), SuptailStatus::Ok);
        suptail_params_free(params);
        suptail_params_free(ptr::null_mut());
    }
}

#[test]
fn bounds_report_not_applicable() {
    let mut b = -1.0;
    unsafe {
        assert_eq!(suptail_upper_bound(1000, 0.01, 1e-3, ptr::null(), &mut b), SuptailStatus::NotApplicable);
        assert_eq!(b, -1.0);
        assert!(last_error().unwrap().contains("threshold"));
        assert_eq!(
            suptail_upper_bound_extension(100, 1e-4, 0.5, ptr::null(), &mut b),
            SuptailStatus::NotApplicable
        );
        assert_eq!(suptail_bennett(100, 0.1, 0.0, &mut b), SuptailStatus::Ok);
        assert_eq!(b, 1.0);
        assert_eq!(suptail_bennett(0, 0.1, 1.0, &mut b), SuptailStatus::InvalidArgument);
        assert_eq!(suptail_bennett_simplified(100, 0.1, 2.5, ptr::null(), &mut b), SuptailStatus::Ok);
        assert!(b > 0.0 && b < 1.0);
    }
}

#[test]
fn null_out_pointers_are_rejected() {
    unsafe {
        assert_eq!(suptail_bennett(10, 0.1, 1.0, ptr::null_mut()), SuptailStatus::NullPointer);
        assert!(last_error().unwrap().contains("out_bound"));
        assert_eq!(suptail_path_modulus(ptr::null(), 0.5, &mut 0.0), SuptailStatus::NullPointer);
        assert_eq!(suptail_path_len(ptr::null()), 0);
    }
}

#[test]
fn exact_tail_and_wilson() {
    let mut p = 0.0;
    let (mut lo, mut hi) = (0.0, 0.0);
    unsafe {
        assert_eq!(suptail_exact_tail_small(3, 0.5, 0.0, &mut p), SuptailStatus::Ok);
        assert_eq!(p, 1.0);
        assert_eq!(suptail_exact_tail_small(200, 1e-3, 1.0, &mut p), SuptailStatus::StateSpaceTooLarge);
        assert_eq!(suptail_wilson_interval(5, 100, 0.95, &mut lo, &mut hi), SuptailStatus::Ok);
        assert!(lo < 0.05 && 0.05 < hi);
        assert_eq!(suptail_wilson_interval(5, 0, 0.95, &mut lo, &mut hi), SuptailStatus::InvalidArgument);
    }
}

#[test]
fn poisson_lower_bound_and_condition() {
    let n: f64 = 1e6;
    let s2 = n.ln() / (7.0 * n) * 1e-3;
    let mut lb = SuptailLowerBound { hat_u: 0.0, m_star: 0, log_t: 0.0, probability: 0.0 };
    let mut cond = SuptailCondition { holds: false, log_margin: 0.0 };
    unsafe {
        assert_eq!(suptail_analytic_lower_bound(n, s2, &mut lb), SuptailStatus::Ok);
        assert_eq!(suptail_check_sufficient_condition(n, s2, 0.1, &mut cond), SuptailStatus::Ok);
    }
    assert!(lb.m_star >= 1);
    if cond.holds {
        assert!(lb.probability >= 0.9);
    }
}

#[test]
fn path_round_trip() {
    let pts = [0.9, 0.1, 0.4, 0.4];
    let mut path = ptr::null_mut();
    unsafe {
        assert_eq!(suptail_path_from_points(pts.as_ptr(), pts.len(), &mut path), SuptailStatus::Ok);
        assert_eq!(suptail_path_len(path), 4);
        let mut buf = [0.0; 4];
        assert_eq!(suptail_path_points(path, buf.as_mut_ptr(), 4), SuptailStatus::Ok);
        assert_eq!(buf, [0.1, 0.4, 0.4, 0.9]);
        assert_eq!(suptail_path_points(path, buf.as_mut_ptr(), 3), SuptailStatus::InvalidArgument);

        let (mut value, mut cell) = (0.0, 0);
        assert_eq!(suptail_path_sup_increments(path, 0.25, &mut value, &mut cell), SuptailStatus::Ok);
        // cells of width 1/4 hold 1, 2, 0, 1 points against an expectation of 1
        assert!((value - 0.5).abs() < 1e-12);
        assert_eq!(cell, 2);

        let mut m = 0.0;
        assert_eq!(suptail_path_modulus(path, 0.0, &mut m), SuptailStatus::InvalidArgument);
        assert_eq!(suptail_path_modulus(path, 1.0, &mut m), SuptailStatus::Ok);
        assert!(m > 0.0);
        suptail_path_free(path);

        let bad = [0.5, 1.5];
        let mut other = ptr::null_mut();
        assert_eq!(suptail_path_from_points(bad.as_ptr(), 2, &mut other), SuptailStatus::InvalidArgument);
        assert!(other.is_null());
    }
}

#[test]
fn sampled_paths_are_reproducible() {
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        suptail_path_sample_uniform(100, 7, 3, &mut a);
        suptail_path_sample_uniform(100, 7, 3, &mut b);
        let (mut x, mut y) = (vec![0.0; 100], vec![0.0; 100]);
        suptail_path_points(a, x.as_mut_ptr(), 100);
        suptail_path_points(b, y.as_mut_ptr(), 100);
        assert_eq!(x, y);
        assert!(x.windows(2).all(|w| w[0] <= w[1]));
        suptail_path_free(a);
        suptail_path_free(b);
    }
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/suptail.h");
    let text = std::fs::read_to_string(&header).unwrap();
    assert!(text.contains("#ifndef SUPTAIL_H"));
    for name in [
        "suptail_version",
        "suptail_last_error_message",
        "suptail_params_new",
        "suptail_params_set",
        "suptail_threshold_u",
        "suptail_upper_bound_gap",
        "suptail_exact_tail_small",
        "suptail_path_modulus",
        "SUPTAIL_STATUS_NOT_APPLICABLE",
        "typedef struct SuptailPath SuptailPath",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }

    // compile the header when a C compiler is around
    if let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    {
        assert!(status.success());
    }
}
