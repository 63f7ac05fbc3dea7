use std::ffi::{c_char, CStr, CString};
use std::ptr;

use lasserre_bounds_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { lb_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn parse(src: &str, n: usize) -> *mut LbPolynomial {
    let s = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { lb_polynomial_parse(s.as_ptr(), n, &mut p) }, LbStatus::Ok);
    p
}

fn unit_box(n: usize) -> *mut LbDomain {
    let lo = CString::new("0").unwrap();
    let hi = CString::new("1").unwrap();
    let los = vec![lo.as_ptr(); n];
    let his = vec![hi.as_ptr(); n];
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { lb_domain_box(los.as_ptr(), his.as_ptr(), n, &mut d) }, LbStatus::Ok);
    d
}

#[test]
fn linear_bound_through_the_abi() {
    let f = parse("x1", 1);
    let d = unit_box(1);
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(lb_polynomial_degree(f), 1);
        assert_eq!(lb_domain_dim(d), 1);
        assert_eq!(lb_bound_compute(f, d, 1, 0, &mut b), LbStatus::Ok);
        let exact = (3.0 - 3f64.sqrt()) / 6.0;
        assert!((lb_bound_value(b) - exact).abs() < 1e-12);
        assert!(lb_bound_cond(b) >= 1.0);

        let mut len = 0usize;
        assert_eq!(lb_bound_eigenvector(b, ptr::null_mut(), 0, &mut len), LbStatus::Ok);
        assert_eq!(len, 2);
        let mut short = [0.0f64; 1];
        assert_eq!(lb_bound_eigenvector(b, short.as_mut_ptr(), 1, &mut len), LbStatus::BufferTooSmall);
        let mut v = [0.0f64; 2];
        assert_eq!(lb_bound_eigenvector(b, v.as_mut_ptr(), 2, &mut len), LbStatus::Ok);
        assert!(v.iter().any(|c| *c != 0.0));

        lb_bound_free(b);
        lb_domain_free(d);
        lb_polynomial_free(f);
    }
}

#[test]
fn sampling_is_deterministic_and_in_domain() {
    let f = parse("(x1-1/2)^2+x2", 2);
    let d = unit_box(2);
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(lb_bound_compute(f, d, 3, 0, &mut b), LbStatus::Ok);
        let draw = |seed| {
            let mut pts = vec![0.0; 2 * 50];
            let mut vals = vec![0.0; 50];
            assert_eq!(lb_sample(f, d, b, 50, seed, pts.as_mut_ptr(), vals.as_mut_ptr()), LbStatus::Ok);
            (pts, vals)
        };
        let (p1, v1) = draw(7);
        let (p2, v2) = draw(7);
        assert_eq!(p1, p2);
        assert_eq!(v1, v2);
        assert_ne!(draw(8).0, p1);
        for (k, x) in p1.chunks(2).enumerate() {
            assert!(x.iter().all(|c| (0.0..=1.0).contains(c)));
            let mut fx = 0.0;
            assert_eq!(lb_polynomial_evaluate(f, x.as_ptr(), 2, &mut fx), LbStatus::Ok);
            assert_eq!(fx, v1[k]);
        }
        lb_bound_free(b);
        lb_domain_free(d);
        lb_polynomial_free(f);
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    let bad = CString::new("x1 +* 2").unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(lb_polynomial_parse(bad.as_ptr(), 1, &mut p), LbStatus::Parse);
        assert!(p.is_null());
        assert!(last_error().contains("syntax error"), "{}", last_error());

        assert_eq!(lb_polynomial_parse(ptr::null(), 1, &mut p), LbStatus::NullPointer);

        let mut d = ptr::null_mut();
        assert_eq!(lb_domain_simplex(0, &mut d), LbStatus::InvalidDomain);
        assert!(d.is_null());

        let f = parse("x1*x2", 2);
        let mut out = 0.0;
        let x = [1.0];
        assert_eq!(lb_polynomial_evaluate(f, x.as_ptr(), 1, &mut out), LbStatus::DimensionMismatch);

        let ball = {
            let mut d = ptr::null_mut();
            assert_eq!(lb_domain_ball(3, &mut d), LbStatus::Ok);
            d
        };
        let mut b = ptr::null_mut();
        assert_eq!(lb_bound_compute(f, ball, 1, 0, &mut b), LbStatus::DimensionMismatch);
        assert!(b.is_null());

        let needed = lb_last_error_message(ptr::null_mut(), 0);
        assert_eq!(needed, last_error().len());

        assert_eq!(lb_bound_compute(f, ball, 1, 0, ptr::null_mut()), LbStatus::NullPointer);
        assert!(lb_bound_value(ptr::null()).is_nan());

        lb_domain_free(ball);
        lb_polynomial_free(f);
        lb_polynomial_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_the_error() {
    let bad = CString::new("(").unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_ne!(lb_polynomial_parse(bad.as_ptr(), 1, &mut p), LbStatus::Ok);
        let f = parse("1", 1);
        assert_eq!(last_error(), "");
        lb_polynomial_free(f);
        let v = CStr::from_ptr(lb_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
