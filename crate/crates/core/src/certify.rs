//! Exact decisions about oracle values by refining precision until an
//! enclosure separates the cases.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::oracle::RealOracle;
use crate::rational::{floor, magnitude_bits};

pub const DEFAULT_START_BITS: u64 = 64;
pub const DEFAULT_CAP_BITS: u64 = 1 << 20;

/// Refinement policy: start at `start_bits`, double until a decision is made
/// or `cap_bits` is exceeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Certifier {
    pub start_bits: u64,
    pub cap_bits: u64,
}

impl Default for Certifier {
    fn default() -> Self {
        Certifier {
            start_bits: DEFAULT_START_BITS,
            cap_bits: DEFAULT_CAP_BITS,
        }
    }
}

impl Certifier {
    pub fn with_cap(cap_bits: u64) -> Self {
        Certifier {
            start_bits: DEFAULT_START_BITS.min(cap_bits.max(1)),
            cap_bits,
        }
    }

    /// Runs `decide` on enclosures of `q*x - p` at doubling precision.
    ///
    /// For exact rational oracles the value itself is passed as a zero-width
    /// enclosure, so `decide` must succeed on it.
    pub fn refine<T>(
        &self,
        x: &RealOracle,
        q: &BigRational,
        p: &BigRational,
        mut decide: impl FnMut(&Enclosure) -> Option<T>,
    ) -> Result<T> {
        if let Some(v) = x.exact_value() {
            let e = Enclosure::exact(q * v - p);
            return decide(&e).ok_or_else(|| Error::Certificate("undecidable exact value".into()));
        }
        let extra = magnitude_bits(q) + 1;
        let mut k = self.start_bits;
        loop {
            let e = x.enclose(k + extra)?.scale(q).shift(&-p);
            if let Some(t) = decide(&e) {
                return Ok(t);
            }
            if k >= self.cap_bits {
                return Err(Error::Inconclusive { cap: self.cap_bits });
            }
            k = (k * 2).min(self.cap_bits);
        }
    }

    /// Exact sign of `q*x - p`.
    pub fn sign_of_form(&self, x: &RealOracle, q: &BigInt, p: &BigInt) -> Result<Ordering> {
        if q.is_zero() && p.is_zero() {
            return Err(Error::pre("form (q, p) = (0, 0)"));
        }
        self.sign_of_rational_form(
            x,
            &BigRational::from_integer(q.clone()),
            &BigRational::from_integer(p.clone()),
        )
    }

    pub fn sign_of_rational_form(
        &self,
        x: &RealOracle,
        q: &BigRational,
        p: &BigRational,
    ) -> Result<Ordering> {
        self.refine(x, q, p, |e| e.sign())
    }

    /// Sign of `x - r`.
    pub fn compare(&self, x: &RealOracle, r: &BigRational) -> Result<Ordering> {
        self.sign_of_rational_form(x, &BigRational::one(), r)
    }

    /// `floor(q*x - p)`.
    pub fn floor_of(&self, x: &RealOracle, q: &BigRational, p: &BigRational) -> Result<BigInt> {
        self.refine(x, q, p, |e| {
            let f = floor(&e.lo);
            (f == floor(&e.hi)).then_some(f)
        })
    }

    /// Nearest integer to `q*x`. Fails with `HalfInteger` when `q*x` is exactly
    /// a half-integer.
    pub fn nearest_integer(&self, x: &RealOracle, q: &BigInt, index: u64) -> Result<BigInt> {
        let q = BigRational::from_integer(q.clone());
        let half = BigRational::new(1.into(), 2.into());
        if let Some(v) = x.exact_value() {
            let t = &q * v + &half;
            if t.is_integer() {
                return Err(Error::HalfInteger { index });
            }
            return Ok(floor(&t));
        }
        self.floor_of(x, &q, &-half)
    }

    /// Enclosure of `q*x - p` whose width is at most `2^-rel_bits` times its
    /// magnitude. Errors with `ZeroResidual` when the value is exactly zero.
    pub fn relative(
        &self,
        x: &RealOracle,
        q: &BigInt,
        p: &BigInt,
        rel_bits: u64,
        index: u64,
    ) -> Result<Enclosure> {
        let qr = BigRational::from_integer(q.clone());
        let pr = BigRational::from_integer(p.clone());
        if let Some(v) = x.exact_value() {
            let e = Enclosure::exact(&qr * v - pr);
            if e.lo.is_zero() {
                return Err(Error::ZeroResidual { index });
            }
            return Ok(e);
        }
        let extra = magnitude_bits(&qr) + 1;
        let mut k = self.start_bits;
        loop {
            let e = x.enclose(k + extra)?.scale(&qr).shift(&-&pr);
            let mut next = k * 2;
            if e.excludes_zero() {
                let mag = e.lo.abs().min(e.hi.abs());
                let w = e.width();
                if &w * BigRational::from_integer(BigInt::one() << rel_bits) <= mag {
                    return Ok(e);
                }
                // The scale is known now; jump straight to the needed precision.
                let deficit = (crate::log::ln_approx(&w) - crate::log::ln_approx(&mag))
                    / std::f64::consts::LN_2;
                next = k + (deficit.max(0.0) as u64) + rel_bits + 4;
            }
            if k >= self.cap_bits {
                return Err(Error::Inconclusive { cap: self.cap_bits });
            }
            k = next.min(self.cap_bits);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn o(s: &str) -> RealOracle {
        s.parse().unwrap()
    }

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn signs() {
        let c = Certifier::default();
        assert_eq!(
            c.sign_of_form(&o("const:sqrt2"), &bi(1), &bi(1)).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            c.sign_of_form(&o("rat:3/7"), &bi(7), &bi(3)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            c.sign_of_form(&o("const:golden"), &bi(5), &bi(8)).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            c.sign_of_form(&o("const:golden"), &bi(8), &bi(13)).unwrap(),
            Ordering::Less
        );
        assert!(c.sign_of_form(&o("const:e"), &bi(0), &bi(0)).is_err());
    }

    #[test]
    fn cap_reached() {
        // Exact rationals never refine; an 8-bit cap cannot separate 1e-12 from 0.
        let c = Certifier::with_cap(8);
        let x = o("affine:1,1/1000000000000:rat:0");
        assert_eq!(
            c.sign_of_form(&x, &bi(1), &bi(0)).unwrap(),
            Ordering::Greater
        );
        let y = o("cf:[0;1000000000000,1]+periodic:[1]");
        assert!(matches!(
            c.compare(&y, &ratio(0, 1)),
            Err(Error::Inconclusive { cap: 8 })
        ));
    }

    #[test]
    fn floors_and_rounding() {
        let c = Certifier::default();
        let phi = o("const:golden");
        assert_eq!(
            c.floor_of(&phi, &ratio(100, 1), &ratio(0, 1)).unwrap(),
            bi(161)
        );
        assert_eq!(c.nearest_integer(&phi, &bi(3), 0).unwrap(), bi(5));
        assert!(matches!(
            c.nearest_integer(&o("rat:1/2"), &bi(1), 7),
            Err(Error::HalfInteger { index: 7 })
        ));
        assert_eq!(c.nearest_integer(&o("rat:1/3"), &bi(2), 0).unwrap(), bi(1));
    }

    #[test]
    fn relative_precision() {
        let c = Certifier::default();
        let x = o("const:sqrt2");
        let (q, p) = (BigInt::from(470832), BigInt::from(665857));
        let e = c.relative(&x, &q, &p, 60, 0).unwrap();
        assert!(e.excludes_zero());
        let mag = e.lo.abs().min(e.hi.abs());
        assert!(e.width() * BigRational::from_integer(BigInt::one() << 60) <= mag);
        assert!(matches!(
            c.relative(&o("rat:2/3"), &bi(3), &bi(2), 60, 4),
            Err(Error::ZeroResidual { index: 4 })
        ));
    }
}
