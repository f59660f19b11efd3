//! Catalog constants with rigorous enclosures.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_rational::BigRational;

use crate::enclosure::Enclosure;
use crate::error::Error;
use crate::fixed::{self, Fixed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Sqrt2,
    Sqrt3,
    Sqrt5,
    Golden,
    Log2,
    Zeta2,
    Zeta3,
    E,
}

impl Constant {
    pub const ALL: [Constant; 8] = [
        Constant::Sqrt2,
        Constant::Sqrt3,
        Constant::Sqrt5,
        Constant::Golden,
        Constant::Log2,
        Constant::Zeta2,
        Constant::Zeta3,
        Constant::E,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Constant::Sqrt2 => "sqrt2",
            Constant::Sqrt3 => "sqrt3",
            Constant::Sqrt5 => "sqrt5",
            Constant::Golden => "golden",
            Constant::Log2 => "log2",
            Constant::Zeta2 => "zeta2",
            Constant::Zeta3 => "zeta3",
            Constant::E => "e",
        }
    }

    /// Enclosure of width at most `2^-k`. Results are memoized per `(constant, k)`.
    pub fn enclose(self, k: u64) -> Enclosure {
        let cache = CACHE.get_or_init(Default::default);
        if let Some(e) = cache.lock().unwrap().get(&(self, k)) {
            return e.clone();
        }
        let e = self.compute(k);
        cache.lock().unwrap().insert((self, k), e.clone());
        e
    }

    fn compute(self, k: u64) -> Enclosure {
        let mut p = k + 16 + 2 * (64 - k.leading_zeros() as u64);
        loop {
            let e = self.at_precision(p);
            if e.width_within(k) {
                return e;
            }
            p += 32;
        }
    }

    fn at_precision(self, p: u64) -> Enclosure {
        match self {
            Constant::Sqrt2 => fixed::sqrt_int(2, p).to_enclosure(),
            Constant::Sqrt3 => fixed::sqrt_int(3, p).to_enclosure(),
            Constant::Sqrt5 => fixed::sqrt_int(5, p).to_enclosure(),
            Constant::Golden => {
                let s = fixed::sqrt_int(5, p);
                let one = crate::rational::pow2(p);
                Fixed {
                    lo: &s.lo + &one,
                    hi: &s.hi + &one,
                    p: p + 1,
                }
                .to_enclosure()
            }
            Constant::Log2 => fixed::ln2(p).to_enclosure(),
            Constant::E => fixed::e(p).to_enclosure(),
            Constant::Zeta3 => fixed::zeta3(p).to_enclosure(),
            Constant::Zeta2 => {
                let pi = fixed::pi(p).to_enclosure();
                let six = BigRational::from_integer(6.into());
                let sq = pi.mul(&pi);
                Enclosure::new(&sq.lo / &six, &sq.hi / &six).round_out(p)
            }
        }
    }
}

static CACHE: OnceLock<Mutex<HashMap<(Constant, u64), Enclosure>>> = OnceLock::new();

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Constant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Constant::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse {
                what: "constant name",
                input: s.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    // mpmath, 50 significant digits, rounded.
    const REFERENCE: [(Constant, &str); 8] = [
        (
            Constant::Sqrt2,
            "1.4142135623730950488016887242096980785696718753769",
        ),
        (
            Constant::Sqrt3,
            "1.7320508075688772935274463415058723669428052538104",
        ),
        (
            Constant::Sqrt5,
            "2.2360679774997896964091736687312762354406183596115",
        ),
        (
            Constant::Golden,
            "1.6180339887498948482045868343656381177203091798058",
        ),
        (
            Constant::Log2,
            "0.69314718055994530941723212145817656807550013436026",
        ),
        (
            Constant::Zeta2,
            "1.6449340668482264364724151666460251892189499012068",
        ),
        (
            Constant::Zeta3,
            "1.2020569031595942853997381615114499907649862923405",
        ),
        (
            Constant::E,
            "2.7182818284590452353602874713526624977572470937000",
        ),
    ];

    #[test]
    fn midpoint_agrees_to_thirty_digits() {
        let tol = parse_rational("1/1000000000000000000000000000000").unwrap();
        for (c, r) in REFERENCE {
            let e = c.enclose(128);
            assert!(e.width_within(128));
            let d = e.mid() - parse_rational(r).unwrap();
            assert!(num_traits::Signed::abs(&d) < tol, "{c}");
        }
    }

    #[test]
    fn names_roundtrip() {
        for c in Constant::ALL {
            assert_eq!(c.name().parse::<Constant>().unwrap(), c);
        }
        assert!("pi".parse::<Constant>().is_err());
    }

    #[test]
    fn memo_is_transparent() {
        for c in Constant::ALL {
            assert_eq!(c.enclose(200), c.compute(200));
        }
    }
}
