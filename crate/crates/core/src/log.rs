//! Certified natural logarithms of positive rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::constants::Constant;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::fixed;
use crate::rational::pow2;

/// Enclosure of `ln x` of width at most about `2^-(p-3)`.
pub fn ln(x: &BigRational, p: u64) -> Result<Enclosure> {
    if !x.is_positive() {
        return Err(Error::pre("logarithm of a non-positive number"));
    }
    Ok(ln_int(x.numer(), p).sub(&ln_int(x.denom(), p)))
}

/// `ln m = b ln 2 + 2 atanh((m - 2^b)/(m + 2^b))` with `2^b <= m < 2^(b+1)`.
pub fn ln_int(m: &BigInt, p: u64) -> Enclosure {
    debug_assert!(m.is_positive());
    let b = m.bits() - 1;
    let two_b = pow2(b);
    let bb = BigRational::from_integer(b.into());
    let ln2 = Constant::Log2.enclose(p + 2 + 64 - b.leading_zeros() as u64);
    let head = ln2.scale(&bb);
    if *m == two_b {
        return head;
    }
    let z = BigRational::new(m - &two_b, m + &two_b);
    let at = fixed::atanh_rational(&z, p + 2).to_enclosure();
    head.add(&at.scale(&BigRational::from_integer(2.into())))
}

/// Float approximation of `ln |x|` that survives values far outside the f64 range.
pub fn ln_approx(x: &BigRational) -> f64 {
    ln_int_approx(x.numer()) - ln_int_approx(x.denom())
}

pub fn ln_int_approx(m: &BigInt) -> f64 {
    let m = m.abs();
    if m.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = m.bits();
    if bits <= 1000 {
        return m.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (m >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Enclosure of `ln x / ln y` for positive `x` and `y > 1`.
pub fn log_ratio(x: &BigRational, y: &BigRational, p: u64) -> Result<Enclosure> {
    if y <= &BigRational::one() {
        return Err(Error::pre("log base must exceed 1"));
    }
    ln(x, p)?.div(&ln(y, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, ratio};
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        // ln 10 and ln(1/3), mpmath.
        let ln10 = parse_rational("2.302585092994045684017991454684364207601").unwrap();
        let e = ln(&ratio(10, 1), 128).unwrap();
        assert!(e.width_within(120));
        assert!((e.mid() - ln10).abs() < ratio(1, BigInt::from(10).pow(30)));
        let l3 = parse_rational("-1.098612288668109691395245236922525704647").unwrap();
        let e = ln(&ratio(1, 3), 128).unwrap();
        assert!((e.mid() - l3).abs() < ratio(1, BigInt::from(10).pow(30)));
        assert_eq!(
            ln(&ratio(1, 1), 64).unwrap(),
            Enclosure::exact(BigRational::zero())
        );
        assert!(ln(&ratio(0, 1), 64).is_err());
    }

    #[test]
    fn huge_arguments() {
        let big = BigInt::from(3).pow(2000);
        let e = ln_int(&big, 80);
        let expect = 2000.0 * 3f64.ln();
        assert!((e.to_f64_mid() - expect).abs() < 1e-9);
        assert!((ln_int_approx(&big) - expect).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn matches_float(n in 1u64..u64::MAX, d in 1u64..1_000_000) {
            let x = ratio(n, d);
            let e = ln(&x, 96).unwrap();
            let f = (n as f64).ln() - (d as f64).ln();
            prop_assert!((e.to_f64_mid() - f).abs() < 1e-9);
            prop_assert!(e.width_within(90));
        }

        #[test]
        fn additive(a in 1u64..100_000, b in 1u64..100_000) {
            let s = ln(&ratio(a, 1), 100).unwrap().add(&ln(&ratio(b, 1), 100).unwrap());
            let p = ln(&ratio(a * b, 1), 100).unwrap();
            prop_assert!(s.intersects(&p));
        }
    }
}
