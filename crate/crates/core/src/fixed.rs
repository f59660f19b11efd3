//! Fixed-point interval series. A value `[lo, hi] * 2^-p` is carried as two
//! integers; every truncation is a floor, and the accumulated error is added
//! back to `hi` term by term so the bracket stays rigorous.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::enclosure::Enclosure;
use crate::rational::pow2;

#[derive(Clone, Debug)]
pub(crate) struct Fixed {
    pub lo: BigInt,
    pub hi: BigInt,
    pub p: u64,
}

impl Fixed {
    pub fn to_enclosure(&self) -> Enclosure {
        Enclosure::new(
            BigRational::new(self.lo.clone(), pow2(self.p)),
            BigRational::new(self.hi.clone(), pow2(self.p)),
        )
    }

    fn scale(&self, m: i64) -> Fixed {
        let (a, b) = (&self.lo * m, &self.hi * m);
        let (lo, hi) = if m >= 0 { (a, b) } else { (b, a) };
        Fixed { lo, hi, p: self.p }
    }

    fn add(&self, o: &Fixed) -> Fixed {
        debug_assert_eq!(self.p, o.p);
        Fixed {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
            p: self.p,
        }
    }
}

/// sum_{j>=0} 1/((2j+1) m^(2j+1)) = atanh(1/m) for integer m >= 2.
pub(crate) fn atanh_inv(m: u64, p: u64) -> Fixed {
    let m2 = BigInt::from(m) * m;
    let mut pow = pow2(p) / m;
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut j = 0u64;
    while !pow.is_zero() {
        sum += &pow / (2 * j + 1);
        pow /= &m2;
        j += 1;
        terms += 1;
    }
    let hi = &sum + terms + 2;
    Fixed { lo: sum, hi, p }
}

/// sum_{j>=0} (-1)^j/((2j+1) m^(2j+1)) = atan(1/m).
pub(crate) fn atan_inv(m: u64, p: u64) -> Fixed {
    let m2 = BigInt::from(m) * m;
    let mut pow = pow2(p) / m;
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut j = 0u64;
    while !pow.is_zero() {
        let t = &pow / (2 * j + 1);
        if j % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        pow /= &m2;
        j += 1;
        terms += 1;
    }
    Fixed {
        lo: &sum - terms - 1,
        hi: &sum + terms + 1,
        p,
    }
}

pub(crate) fn pi(p: u64) -> Fixed {
    atan_inv(5, p).scale(16).add(&atan_inv(239, p).scale(-4))
}

pub(crate) fn ln2(p: u64) -> Fixed {
    atanh_inv(3, p).scale(2)
}

pub(crate) fn e(p: u64) -> Fixed {
    let mut t = pow2(p);
    let mut sum = t.clone();
    let mut terms = 1u64;
    let mut j = 1u64;
    while !t.is_zero() {
        t /= j;
        sum += &t;
        j += 1;
        terms += 1;
    }
    Fixed {
        hi: &sum + terms + 2,
        lo: sum,
        p,
    }
}

pub(crate) fn sqrt_int(n: u64, p: u64) -> Fixed {
    let lo = (BigInt::from(n) << (2 * p)).sqrt();
    let hi = if &lo * &lo == BigInt::from(n) << (2 * p) {
        lo.clone()
    } else {
        &lo + 1
    };
    Fixed { lo, hi, p }
}

/// (5/2) sum_{k>=1} (-1)^(k-1) / (k^3 binom(2k, k)).
pub(crate) fn zeta3(p: u64) -> Fixed {
    let one = pow2(p);
    let mut binom = BigInt::from(2);
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut k = 1u64;
    loop {
        let den = &binom * BigInt::from(k).pow(3);
        let t = &one / den;
        if t.is_zero() {
            break;
        }
        if k % 2 == 1 {
            sum += t;
        } else {
            sum -= t;
        }
        terms += 1;
        binom = binom * (2 * k + 1) * (2 * k + 2) / ((k + 1) * (k + 1));
        k += 1;
    }
    let s = Fixed {
        lo: &sum - terms - 1,
        hi: &sum + terms + 1,
        p,
    };
    let five = s.scale(5);
    Fixed {
        lo: five.lo.div_floor(&BigInt::from(2)),
        hi: -((-five.hi).div_floor(&BigInt::from(2))),
        p,
    }
}

/// atanh(z) for rational 0 <= z <= 1/2, using separate floor and ceiling power chains.
pub(crate) fn atanh_rational(z: &BigRational, p: u64) -> Fixed {
    debug_assert!(!z.is_negative() && z <= &BigRational::new(1.into(), 2.into()));
    let one = pow2(p);
    let zn = z.numer() * &one;
    let z_lo = zn.div_floor(z.denom());
    let z_hi = -((-&zn).div_floor(z.denom()));
    let z2_lo = &z_lo * &z_lo;
    let z2_hi = &z_hi * &z_hi;
    let shift = 2 * p;
    let mut pw_lo = z_lo.clone();
    let mut pw_hi = z_hi.clone();
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    let mut j = 0u64;
    while pw_hi > BigInt::one() {
        let d = 2 * j + 1;
        lo += &pw_lo / d;
        hi += -((-&pw_hi).div_floor(&BigInt::from(d)));
        pw_lo = (&pw_lo * &z2_lo) >> shift;
        let t = &pw_hi * &z2_hi;
        pw_hi = -((-t) >> shift);
        j += 1;
    }
    // Remaining tail is at most pw_hi / (1 - z^2) <= 4/3 ulp.
    hi += 2;
    Fixed { lo, hi, p }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, to_decimal_floor};

    /// `reference` is rounded to its last digit.
    fn check(f: Fixed, reference: &str) {
        let e = f.to_enclosure();
        let digits = reference.split_once('.').unwrap().1.len();
        let lo = parse_rational(reference).unwrap();
        let ulp = BigRational::new(1.into(), num_traits::pow(BigInt::from(10), digits));
        let r = Enclosure::new(&lo - &ulp, lo + ulp);
        assert!(
            e.intersects(&r),
            "{reference} vs {}",
            to_decimal_floor(&e.lo, 45)
        );
        assert!(e.width_within(f.p - 16));
    }

    #[test]
    fn series_contain_reference() {
        let p = 200;
        check(pi(p), "3.1415926535897932384626433832795028841971693993751");
        check(e(p), "2.7182818284590452353602874713526624977572470937000");
        check(
            ln2(p),
            "0.69314718055994530941723212145817656807550013436026",
        );
        check(
            zeta3(p),
            "1.2020569031595942853997381615114499907649862923405",
        );
        check(
            sqrt_int(2, p),
            "1.4142135623730950488016887242096980785696718753769",
        );
    }

    #[test]
    fn atanh_small() {
        let z = BigRational::new(1.into(), 3.into());
        let f = atanh_rational(&z, 100);
        let g = atanh_inv(3, 100);
        assert!(f.to_enclosure().intersects(&g.to_enclosure()));
        let zero = atanh_rational(&BigRational::zero(), 64).to_enclosure();
        assert!(zero.contains(&BigRational::zero()));
    }
}
