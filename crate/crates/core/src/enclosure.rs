use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{dyadic_ceil, dyadic_floor, fmt_rational, parse_rational, pow2};

/// A closed interval `[lo, hi]` of exact rationals known to contain some real.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi, "inverted enclosure");
        Enclosure { lo, hi }
    }

    pub fn exact(x: BigRational) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x,
        }
    }

    /// Hull of two points in either order.
    pub fn hull(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// `hi - lo <= 2^-k`.
    pub fn width_within(&self, k: u64) -> bool {
        self.width() * BigRational::from_integer(pow2(k)) <= BigRational::from_integer(1.into())
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    /// Sign of every point in the interval, or `None` if it straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn excludes_zero(&self) -> bool {
        matches!(self.sign(), Some(Ordering::Greater | Ordering::Less))
    }

    pub fn neg(&self) -> Self {
        Enclosure {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add(&self, o: &Enclosure) -> Self {
        Enclosure {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Enclosure) -> Self {
        Enclosure {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn shift(&self, b: &BigRational) -> Self {
        Enclosure {
            lo: &self.lo + b,
            hi: &self.hi + b,
        }
    }

    pub fn scale(&self, a: &BigRational) -> Self {
        Enclosure::hull(&self.lo * a, &self.hi * a)
    }

    pub fn scale_int(&self, a: &BigInt) -> Self {
        self.scale(&BigRational::from_integer(a.clone()))
    }

    pub fn mul(&self, o: &Enclosure) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }

    pub fn abs(&self) -> Self {
        match self.sign() {
            Some(Ordering::Greater) | Some(Ordering::Equal) => self.clone(),
            Some(Ordering::Less) => self.neg(),
            None => Enclosure {
                lo: BigRational::zero(),
                hi: self.lo.abs().max(self.hi.abs()),
            },
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if !self.excludes_zero() {
            return Err(Error::Degenerate(
                "reciprocal of an interval containing zero".into(),
            ));
        }
        Ok(Enclosure::hull(self.lo.recip(), self.hi.recip()))
    }

    pub fn div(&self, o: &Enclosure) -> Result<Self> {
        Ok(self.mul(&o.recip()?))
    }

    /// Outward rounding to the dyadic grid `2^-p`; keeps denominators small.
    pub fn round_out(&self, p: u64) -> Self {
        if self.lo.denom().bits() <= p + 1 && self.hi.denom().bits() <= p + 1 {
            return self.clone();
        }
        Enclosure {
            lo: dyadic_floor(&self.lo, p),
            hi: dyadic_ceil(&self.hi, p),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"lo": fmt_rational(&self.lo), "hi": fmt_rational(&self.hi)})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse {
                    what: "enclosure",
                    input: v.to_string(),
                })
                .and_then(parse_rational)
        };
        let (lo, hi) = (get("lo")?, get("hi")?);
        if lo > hi {
            return Err(Error::Parse {
                what: "enclosure",
                input: v.to_string(),
            });
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn to_f64_mid(&self) -> f64 {
        crate::rational::to_f64(&self.mid())
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            fmt_rational(&self.lo),
            fmt_rational(&self.hi)
        )
    }
}
