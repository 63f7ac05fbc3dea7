//! Conversions between exact rationals, `f64` and double-double values.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Parses `"p/q"`, an integer, or a decimal literal (`"-2.048"`, `"1e-3"`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::InvalidRational(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(p / q);
    }
    let (neg, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = body[i + 1..].parse().map_err(|_| bad())?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Exact rational value of a double-double.
pub fn from_twofloat(x: TwoFloat) -> BigRational {
    from_f64(x.hi()) + from_f64(x.lo())
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Rounds an exact rational to double-double precision (about 106 bits).
pub fn to_twofloat(r: &BigRational) -> TwoFloat {
    if r.is_zero() {
        return TwoFloat::from(0.0);
    }
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = den.bits() as i64 - num.bits() as i64 + 112;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let hi = q.to_f64().unwrap();
    let rem = &q - float_to_bigint(hi);
    let lo = rem.to_f64().unwrap();
    let hi = ldexp(hi, -shift);
    let lo = ldexp(lo, -shift);
    let v = TwoFloat::from(hi) + TwoFloat::from(lo);
    if neg {
        -v
    } else {
        v
    }
}

/// Double-double quotient refined to full precision (`TwoFloat`'s own `/` is only f64-accurate).
pub fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn float_to_bigint(x: f64) -> BigInt {
    let r = from_f64(x);
    debug_assert!(r.denom().is_one());
    r.to_integer()
}

/// Decomposes a finite `f64` into `(mantissa, exponent)` with `x = mantissa * 2^exponent`.
pub fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { Sign::Plus } else { Sign::Minus };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    (BigInt::from_biguint(sign, m.into()), e)
}

/// Writes a slice of double-double values as integers over a shared power of two:
/// `values[i] = ints[i] * 2^exponent` exactly.
pub fn common_dyadic(values: &[TwoFloat]) -> (Vec<BigInt>, i64) {
    let parts: Vec<[(BigInt, i64); 2]> = values
        .iter()
        .map(|v| [decompose(v.hi()), decompose(v.lo())])
        .collect();
    let exponent = parts
        .iter()
        .flat_map(|p| p.iter())
        .filter(|(m, _)| !m.is_zero())
        .map(|(_, e)| *e)
        .min()
        .unwrap_or(0);
    let ints = parts
        .into_iter()
        .map(|p| {
            p.into_iter()
                .filter(|(m, _)| !m.is_zero())
                .map(|(m, e)| m << (e - exponent) as usize)
                .fold(BigInt::zero(), |acc, x| acc + x)
        })
        .collect();
    (ints, exponent)
}

/// `2^e` as an exact rational.
pub fn pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << e as usize)
    } else {
        BigRational::new(one, BigInt::one() << (-e) as usize)
    }
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `k!!` with the conventions `0!! = (-1)!! = 1`.
pub fn double_factorial(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= BigInt::from(i);
        i -= 2;
    }
    acc
}
