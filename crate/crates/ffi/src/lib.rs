//! C ABI over `lasserre_bounds`.
//!
//! Every object crosses the boundary as an opaque pointer owned by the caller and released
//! with the matching `lb_*_free`. Fallible calls return an [`LbStatus`]; on failure the
//! message is kept per thread and can be read with [`lb_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lasserre_bounds::bound::{compute_bound_with, BoundOptions};
use lasserre_bounds::numeric::parse_rational;
use lasserre_bounds::{parse_polynomial, sampler, BoundResult, Domain, Error, Polynomial};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    DimensionMismatch = 4,
    InvalidDomain = 5,
    Conditioning = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

pub struct LbPolynomial(Polynomial);

pub struct LbDomain(Domain);

pub struct LbBound(BoundResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> LbStatus {
    match err {
        Error::Syntax { .. } | Error::BadExponent { .. } | Error::VariableOutOfRange { .. } | Error::InvalidRational(_) => {
            LbStatus::Parse
        }
        Error::DimensionMismatch { .. } => LbStatus::DimensionMismatch,
        Error::InvalidDomain(_) | Error::UnsupportedDomain(_) | Error::PointOutsideDomain(_) => LbStatus::InvalidDomain,
        Error::Conditioning { .. } => LbStatus::Conditioning,
        Error::NotNormalized { .. } | Error::DegeneratePrefix { .. } => LbStatus::Numerical,
        _ => LbStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (LbStatus, String)>) -> LbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            LbStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside lasserre_bounds");
            LbStatus::Panic
        }
    }
}

fn lib(err: Error) -> (LbStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (LbStatus, String) {
    (LbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LbStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LbStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (LbStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (LbStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (LbStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copies the last error message of the calling thread into `buf` as a NUL-terminated string.
///
/// Returns the message length in bytes without the terminator. When `buf_len` is too small the
/// message is truncated; pass `buf = NULL` to query the length.
///
/// # Safety
/// `buf` must be null or point to `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn lb_last_error_message(buf: *mut c_char, buf_len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && buf_len > 0 {
            let k = bytes.len().min(buf_len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Parses `source` as a polynomial in `x1..x{n_vars}`.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lb_polynomial_parse(source: *const c_char, n_vars: usize, out: *mut *mut LbPolynomial) -> LbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let p = parse_polynomial(text(source, "source")?, n_vars).map_err(lib)?;
        *out = Box::into_raw(Box::new(LbPolynomial(p)));
        Ok(())
    })
}

/// Evaluates `p` at `x[0..n]`.
///
/// # Safety
/// `p` must come from [`lb_polynomial_parse`], `x` must hold `n` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn lb_polynomial_evaluate(p: *const LbPolynomial, x: *const f64, n: usize, out: *mut f64) -> LbStatus {
    guard(|| {
        let p = handle(p, "polynomial")?;
        let x = slice(x, n, "x")?;
        *out_ptr(out, "out")? = p.0.evaluate(x).map_err(lib)?;
        Ok(())
    })
}

/// Total degree of `p`, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or come from [`lb_polynomial_parse`].
#[no_mangle]
pub unsafe extern "C" fn lb_polynomial_degree(p: *const LbPolynomial) -> u32 {
    p.as_ref().map_or(0, |p| p.0.degree())
}

/// Number of variables of `p`, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or come from [`lb_polynomial_parse`].
#[no_mangle]
pub unsafe extern "C" fn lb_polynomial_n_vars(p: *const LbPolynomial) -> usize {
    p.as_ref().map_or(0, |p| p.0.n_vars())
}

/// # Safety
/// `p` must be null or an unreleased handle from [`lb_polynomial_parse`].
#[no_mangle]
pub unsafe extern "C" fn lb_polynomial_free(p: *mut LbPolynomial) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Box `[lo_i, hi_i]`; bounds are rational literals such as `"-2"`, `"1/3"` or `"2.048"`.
///
/// # Safety
/// `lo` and `hi` must each hold `n` NUL-terminated strings and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn lb_domain_box(
    lo: *const *const c_char,
    hi: *const *const c_char,
    n: usize,
    out: *mut *mut LbDomain,
) -> LbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let lo = slice(lo, n, "lo")?;
        let hi = slice(hi, n, "hi")?;
        let mut bounds = Vec::with_capacity(n);
        for (&l, &h) in lo.iter().zip(hi) {
            let l = parse_rational(text(l, "lo entry")?).map_err(lib)?;
            let h = parse_rational(text(h, "hi entry")?).map_err(lib)?;
            bounds.push((l, h));
        }
        *out = Box::into_raw(Box::new(LbDomain(Domain::new_box(bounds).map_err(lib)?)));
        Ok(())
    })
}

/// Standard simplex `{x >= 0, sum x <= 1}` in dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lb_domain_simplex(n: usize, out: *mut *mut LbDomain) -> LbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = Box::into_raw(Box::new(LbDomain(Domain::simplex(n).map_err(lib)?)));
        Ok(())
    })
}

/// Unit Euclidean ball in dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lb_domain_ball(n: usize, out: *mut *mut LbDomain) -> LbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = Box::into_raw(Box::new(LbDomain(Domain::ball(n).map_err(lib)?)));
        Ok(())
    })
}

/// Dimension of `d`, or 0 for a null handle.
///
/// # Safety
/// `d` must be null or come from an `lb_domain_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn lb_domain_dim(d: *const LbDomain) -> usize {
    d.as_ref().map_or(0, |d| d.0.dim())
}

/// # Safety
/// `d` must be null or an unreleased domain handle.
#[no_mangle]
pub unsafe extern "C" fn lb_domain_free(d: *mut LbDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Upper bound of order `r` for the minimum of `f` over `d`. A nonzero `rescale` maps a box to
/// `[-1, 1]^n` first.
///
/// # Safety
/// `f` and `d` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lb_bound_compute(
    f: *const LbPolynomial,
    d: *const LbDomain,
    r: u32,
    rescale: i32,
    out: *mut *mut LbBound,
) -> LbStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let f = handle(f, "polynomial")?;
        let d = handle(d, "domain")?;
        let res = compute_bound_with(&f.0, &d.0, r, BoundOptions { rescale: rescale != 0 }).map_err(lib)?;
        *out = Box::into_raw(Box::new(LbBound(res)));
        Ok(())
    })
}

/// Bound value, or NaN for a null handle.
///
/// # Safety
/// `b` must be null or come from [`lb_bound_compute`].
#[no_mangle]
pub unsafe extern "C" fn lb_bound_value(b: *const LbBound) -> f64 {
    b.as_ref().map_or(f64::NAN, |b| b.0.value)
}

/// 1-norm condition number of the equilibrated moment matrix, or NaN for a null handle.
///
/// # Safety
/// `b` must be null or come from [`lb_bound_compute`].
#[no_mangle]
pub unsafe extern "C" fn lb_bound_cond(b: *const LbBound) -> f64 {
    b.as_ref().map_or(f64::NAN, |b| b.0.cond_b)
}

/// Copies the eigenvector into `buf` and writes its length to `len_out`.
///
/// Call with `buf = NULL` to query the length; a short buffer yields `BufferTooSmall`.
///
/// # Safety
/// `b` must be a valid handle, `buf` null or `buf_len` writable doubles, `len_out` valid.
#[no_mangle]
pub unsafe extern "C" fn lb_bound_eigenvector(
    b: *const LbBound,
    buf: *mut f64,
    buf_len: usize,
    len_out: *mut usize,
) -> LbStatus {
    guard(|| {
        let v = &handle(b, "bound")?.0.eigvec;
        *out_ptr(len_out, "len_out")? = v.len();
        if buf.is_null() {
            return Ok(());
        }
        if buf_len < v.len() {
            return Err((LbStatus::BufferTooSmall, format!("need {} doubles, got {buf_len}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Draws `count` points from the density of `b` over `d` with the given seed.
///
/// `points` receives `count * n` doubles in row-major order and `values` receives `f` at each
/// point. The same seed always yields the same output.
///
/// # Safety
/// All handles must be valid; `points` must hold `count * n` and `values` `count` doubles.
#[no_mangle]
pub unsafe extern "C" fn lb_sample(
    f: *const LbPolynomial,
    d: *const LbDomain,
    b: *const LbBound,
    count: usize,
    seed: u64,
    points: *mut f64,
    values: *mut f64,
) -> LbStatus {
    guard(|| {
        let f = handle(f, "polynomial")?;
        let d = handle(d, "domain")?;
        let b = handle(b, "bound")?;
        if points.is_null() || values.is_null() {
            return Err(null("output buffer"));
        }
        let chain = sampler::build_chain(&b.0.density, &d.0).map_err(lib)?;
        let batch = sampler::sample(&chain, &f.0, count, seed).map_err(lib)?;
        let n = d.0.dim();
        for (k, (x, v)) in batch.points.iter().zip(&batch.values).enumerate() {
            ptr::copy_nonoverlapping(x.as_ptr(), points.add(k * n), n);
            *values.add(k) = *v;
        }
        Ok(())
    })
}

/// # Safety
/// `b` must be null or an unreleased handle from [`lb_bound_compute`].
#[no_mangle]
pub unsafe extern "C" fn lb_bound_free(b: *mut LbBound) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
