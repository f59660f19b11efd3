//! Exact rational helpers: parsing, formatting, dyadic rounding, square-root bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn parse_int(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    t.parse::<BigInt>().map_err(|_| Error::Parse {
        what: "integer",
        input: s.to_string(),
    })
}

/// Parses `p/q`, a plain integer, or a terminating decimal such as `2.1`.
///
/// Decimals are read exactly (`2.1` is `21/10`), never through floating point.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse {
        what: "rational",
        input: s.to_string(),
    };
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_int(p).map_err(|_| bad())?;
        let q = parse_int(q).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.trim_start().starts_with('-');
        let ip = if ip.is_empty() || ip == "-" || ip == "+" {
            "0"
        } else {
            ip
        };
        let whole = parse_int(ip).map_err(|_| bad())?.abs();
        let frac: BigInt = fp.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = BigRational::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    Ok(BigRational::from_integer(parse_int(t).map_err(|_| bad())?))
}

/// Always `p/q`, even for integers, so the output parses back unambiguously.
pub fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

pub fn floor(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil(r: &BigRational) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Integer part of log2 |r| plus one, clamped at zero; an upper bound on log2 |r| + 1.
pub fn magnitude_bits(r: &BigRational) -> u64 {
    let n = r.numer().bits();
    let d = r.denom().bits();
    (n + 1).saturating_sub(d)
}

pub fn dyadic_floor(r: &BigRational, p: u64) -> BigRational {
    BigRational::new(floor(&(r * BigRational::from_integer(pow2(p)))), pow2(p))
}

pub fn dyadic_ceil(r: &BigRational, p: u64) -> BigRational {
    BigRational::new(ceil(&(r * BigRational::from_integer(pow2(p)))), pow2(p))
}

/// Rational bounds `lo <= sqrt(r) <= hi` with `hi - lo <= 2^(1-p)`.
pub fn sqrt_bounds(r: &BigRational, p: u64) -> (BigRational, BigRational) {
    assert!(!r.is_negative(), "sqrt of a negative rational");
    let scaled = r * BigRational::from_integer(pow2(2 * p));
    let lo = floor(&scaled).sqrt();
    let c = ceil(&scaled);
    let mut hi = c.sqrt();
    if &hi * &hi < c {
        hi += 1;
    }
    (BigRational::new(lo, pow2(p)), BigRational::new(hi, pow2(p)))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Decimal string truncated toward negative infinity after `digits` places.
pub fn to_decimal_floor(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let v = floor(&(r * BigRational::from_integer(scale.clone())));
    render_scaled(&v, &scale, digits)
}

/// Decimal string rounded toward positive infinity after `digits` places.
pub fn to_decimal_ceil(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let v = ceil(&(r * BigRational::from_integer(scale.clone())));
    render_scaled(&v, &scale, digits)
}

fn render_scaled(v: &BigInt, scale: &BigInt, digits: usize) -> String {
    let neg = v.is_negative();
    let (q, rem) = v.abs().div_rem(scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{q}");
    }
    format!("{sign}{q}.{:0>width$}", rem, width = digits)
}

pub fn ratio(p: impl Into<BigInt>, q: impl Into<BigInt>) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), ratio(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("2.1").unwrap(), ratio(21, 10));
        assert_eq!(parse_rational("-0.05").unwrap(), ratio(-1, 20));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal_floor(&ratio(-1, 3), 3), "-0.334");
        assert_eq!(to_decimal_ceil(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(to_decimal_floor(&ratio(22, 7), 4), "3.1428");
        assert_eq!(to_decimal_floor(&int(5), 0), "5");
    }

    #[test]
    fn floors() {
        assert_eq!(floor(&ratio(-7, 2)), BigInt::from(-4));
        assert_eq!(ceil(&ratio(-7, 2)), BigInt::from(-3));
        assert_eq!(ceil(&ratio(8, 2)), BigInt::from(4));
    }

    proptest! {
        #[test]
        fn fmt_roundtrip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = ratio(p, q);
            prop_assert_eq!(parse_rational(&fmt_rational(&r)).unwrap(), r);
        }

        #[test]
        fn sqrt_brackets(p in 0u64..1_000_000, q in 1u64..1_000, bits in 1u64..80) {
            let r = ratio(p, q);
            let (lo, hi) = sqrt_bounds(&r, bits);
            prop_assert!(&lo * &lo <= r);
            prop_assert!(&hi * &hi >= r);
            prop_assert!(hi - lo <= BigRational::new(BigInt::from(2), pow2(bits)));
        }

        #[test]
        fn dyadic_brackets(p in -100_000i64..100_000, q in 1i64..997, bits in 0u64..40) {
            let r = ratio(p, q);
            prop_assert!(dyadic_floor(&r, bits) <= r);
            prop_assert!(dyadic_ceil(&r, bits) >= r);
        }
    }
}
