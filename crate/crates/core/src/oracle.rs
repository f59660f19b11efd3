//! Real numbers presented as on-demand rational enclosures.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::constants::Constant;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, magnitude_bits, parse_int, parse_rational};

/// Largest partial quotient (in bits) a generator may emit.
pub const MAX_QUOTIENT_BITS: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealOracle {
    Rational(BigRational),
    Constant(Constant),
    ContinuedFraction(CfSpec),
    /// `a * inner + b` with `a != 0`.
    Affine {
        a: BigRational,
        b: BigRational,
        inner: Box<RealOracle>,
    },
}

/// Tail rule for quotients past the explicit prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CfTail {
    /// The expansion stops after the prefix; the value is rational.
    Finite,
    Periodic(Vec<BigInt>),
    /// `a_0 = 0`, `a_j = base^(j!)` for `1 <= j <= cutoff`, then all ones.
    Liouville {
        base: BigInt,
        cutoff: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfSpec {
    prefix: Vec<BigInt>,
    tail: CfTail,
}

impl CfSpec {
    pub fn finite(quotients: Vec<BigInt>) -> Result<Self> {
        let mut q = quotients;
        if q.is_empty() {
            return Err(Error::pre("continued fraction needs at least a0"));
        }
        check_positive(&q[1..])?;
        // [.., a, 1] and [.., a + 1] are the same number; keep the canonical form.
        if q.len() > 1 && q.last().unwrap().is_one() {
            q.pop();
            *q.last_mut().unwrap() += 1;
        }
        Ok(CfSpec {
            prefix: q,
            tail: CfTail::Finite,
        })
    }

    pub fn periodic(prefix: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::pre("continued fraction needs at least a0"));
        }
        if period.is_empty() {
            return Err(Error::pre("empty period"));
        }
        check_positive(&prefix[1..])?;
        check_positive(&period)?;
        Ok(CfSpec {
            prefix,
            tail: CfTail::Periodic(period),
        })
    }

    pub fn liouville(base: BigInt, cutoff: u32) -> Result<Self> {
        if base < BigInt::from(2) {
            return Err(Error::pre("Liouville base must be at least 2"));
        }
        Ok(CfSpec {
            prefix: vec![BigInt::zero()],
            tail: CfTail::Liouville { base, cutoff },
        })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.tail, CfTail::Finite)
    }

    /// Number of quotients after `a_0`, or `None` for infinite expansions.
    pub fn finite_depth(&self) -> Option<usize> {
        self.is_finite().then(|| self.prefix.len() - 1)
    }

    /// Partial quotient `a_j`; `Ok(None)` past the end of a finite expansion.
    pub fn quotient(&self, j: usize) -> Result<Option<BigInt>> {
        if j < self.prefix.len() {
            return Ok(Some(self.prefix[j].clone()));
        }
        match &self.tail {
            CfTail::Finite => Ok(None),
            CfTail::Periodic(p) => Ok(Some(p[(j - self.prefix.len()) % p.len()].clone())),
            CfTail::Liouville { base, cutoff } => {
                if j > *cutoff as usize {
                    return Ok(Some(BigInt::one()));
                }
                let fact: u128 = (1..=j as u128).product();
                let bits = fact.saturating_mul(base.bits() as u128);
                if bits > MAX_QUOTIENT_BITS as u128 {
                    return Err(Error::Unrepresentable {
                        index: j,
                        reason: format!("{base}^({j}!) exceeds {MAX_QUOTIENT_BITS} bits"),
                    });
                }
                Ok(Some(base.pow(fact as u32)))
            }
        }
    }

    /// Exact value of a finite expansion.
    pub fn value(&self) -> Option<BigRational> {
        if !self.is_finite() {
            return None;
        }
        let mut it = self.prefix.iter().rev();
        let mut x = BigRational::from_integer(it.next()?.clone());
        for a in it {
            x = BigRational::from_integer(a.clone()) + x.recip();
        }
        Some(x)
    }

    /// Enclosure between two consecutive convergents, at least `2^-k` tight.
    fn enclose(&self, k: u64) -> Result<Enclosure> {
        if let Some(v) = self.value() {
            return Ok(Enclosure::exact(v));
        }
        let target = BigInt::one() << k;
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let a0 = self.quotient(0)?.unwrap();
        let (mut p1, mut q1) = (a0, BigInt::one());
        let mut j = 1;
        loop {
            let a = self.quotient(j)?.unwrap();
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            // |x - p1/q1| <= 1/(q1 q2) and x lies between consecutive convergents.
            if &q1 * &q2 >= target {
                return Ok(Enclosure::hull(
                    BigRational::new(p1, q1),
                    BigRational::new(p2, q2),
                ));
            }
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            j += 1;
        }
    }
}

fn check_positive(q: &[BigInt]) -> Result<()> {
    if q.iter().any(|a| !a.is_positive()) {
        return Err(Error::pre("partial quotients after a0 must be at least 1"));
    }
    Ok(())
}

impl RealOracle {
    pub fn rational(r: BigRational) -> Self {
        RealOracle::Rational(r)
    }

    pub fn affine(a: BigRational, b: BigRational, inner: RealOracle) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::pre("affine scale must be nonzero"));
        }
        Ok(RealOracle::Affine {
            a,
            b,
            inner: Box::new(inner),
        })
    }

    /// `self + m` for rational `m`, collapsing nested shifts.
    pub fn shifted(&self, m: &BigRational) -> RealOracle {
        match self {
            RealOracle::Rational(r) => RealOracle::Rational(r + m),
            RealOracle::Affine { a, b, inner } => RealOracle::Affine {
                a: a.clone(),
                b: b + m,
                inner: inner.clone(),
            },
            other => RealOracle::Affine {
                a: BigRational::one(),
                b: m.clone(),
                inner: Box::new(other.clone()),
            },
        }
    }

    /// The value, when the definition is an exact rational.
    pub fn exact_value(&self) -> Option<BigRational> {
        match self {
            RealOracle::Rational(r) => Some(r.clone()),
            RealOracle::Constant(_) => None,
            RealOracle::ContinuedFraction(cf) => cf.value(),
            RealOracle::Affine { a, b, inner } => inner.exact_value().map(|x| a * x + b),
        }
    }

    /// Rational enclosure of width at most `2^-k` containing the defined real.
    pub fn enclose(&self, k: u64) -> Result<Enclosure> {
        if k == 0 {
            return Err(Error::pre("precision must be at least 1 bit"));
        }
        match self {
            RealOracle::Rational(r) => Ok(Enclosure::exact(r.clone())),
            RealOracle::Constant(c) => Ok(c.enclose(k)),
            RealOracle::ContinuedFraction(cf) => cf.enclose(k),
            RealOracle::Affine { a, b, inner } => {
                let e = inner.enclose(k + magnitude_bits(a) + 2)?;
                Ok(e.scale(a).shift(b))
            }
        }
    }
}

impl fmt::Display for CfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let CfTail::Liouville { base, cutoff } = &self.tail {
            return write!(f, "cf:liouville:{base}:{cutoff}");
        }
        write!(f, "cf:[{}", self.prefix[0])?;
        for (i, a) in self.prefix[1..].iter().enumerate() {
            write!(f, "{}{a}", if i == 0 { ";" } else { "," })?;
        }
        write!(f, "]")?;
        if let CfTail::Periodic(p) = &self.tail {
            let s: Vec<String> = p.iter().map(|a| a.to_string()).collect();
            write!(f, "+periodic:[{}]", s.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Display for RealOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealOracle::Rational(r) => write!(f, "rat:{}", fmt_rational(r)),
            RealOracle::Constant(c) => write!(f, "const:{c}"),
            RealOracle::ContinuedFraction(cf) => write!(f, "{cf}"),
            RealOracle::Affine { a, b, inner } => {
                write!(f, "affine:{},{}:{inner}", fmt_rational(a), fmt_rational(b))
            }
        }
    }
}

fn parse_list(s: &str, src: &str) -> Result<Vec<BigInt>> {
    let bad = || Error::Parse {
        what: "oracle",
        input: src.to_string(),
    };
    s.split([',', ';'])
        .map(|t| parse_int(t).map_err(|_| bad()))
        .collect()
}

fn parse_cf(body: &str, src: &str) -> Result<CfSpec> {
    let bad = || Error::Parse {
        what: "oracle",
        input: src.to_string(),
    };
    if let Some(rest) = body.strip_prefix("liouville:") {
        let mut it = rest.split(':');
        let base = parse_int(it.next().ok_or_else(bad)?).map_err(|_| bad())?;
        let cutoff = match it.next() {
            Some(c) => c.trim().parse::<u32>().map_err(|_| bad())?,
            None => 6,
        };
        if it.next().is_some() {
            return Err(bad());
        }
        return CfSpec::liouville(base, cutoff);
    }
    let (head, period) = match body.split_once("+periodic:") {
        Some((h, p)) => (h, Some(p)),
        None => (body, None),
    };
    let inner = head
        .trim()
        .strip_prefix('[')
        .and_then(|h| h.strip_suffix(']'))
        .ok_or_else(bad)?;
    let prefix = parse_list(inner, src)?;
    match period {
        None => CfSpec::finite(prefix),
        Some(p) => {
            let p = p
                .trim()
                .strip_prefix('[')
                .and_then(|h| h.strip_suffix(']'))
                .ok_or_else(bad)?;
            CfSpec::periodic(prefix, parse_list(p, src)?)
        }
    }
}

impl FromStr for RealOracle {
    type Err = Error;

    /// Grammar: `rat:<p>/<q>`, `const:<name>`, `cf:[a0;a1,...]`,
    /// `cf:[...]+periodic:[...]`, `cf:liouville:<B>[:<cutoff>]`,
    /// `affine:<a>,<b>:<oracle>` with rational `a`, `b`, or the shorthand
    /// `affine:<a>/<b>:<oracle>` with integer `a`, `b`.
    fn from_str(src: &str) -> Result<Self> {
        let s = src.trim();
        let bad = || Error::Parse {
            what: "oracle",
            input: src.to_string(),
        };
        let (kind, body) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "rat" => Ok(RealOracle::Rational(parse_rational(body)?)),
            "const" => Ok(RealOracle::Constant(body.trim().parse()?)),
            "cf" => Ok(RealOracle::ContinuedFraction(parse_cf(body, src)?)),
            "affine" => {
                let (coef, inner) = body.split_once(':').ok_or_else(bad)?;
                let (a, b) = match coef.split_once(',') {
                    Some((a, b)) => (parse_rational(a)?, parse_rational(b)?),
                    None => {
                        let (a, b) = coef.split_once('/').ok_or_else(bad)?;
                        (
                            BigRational::from_integer(parse_int(a)?),
                            BigRational::from_integer(parse_int(b)?),
                        )
                    }
                };
                RealOracle::affine(a, b, inner.parse()?)
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn o(s: &str) -> RealOracle {
        s.parse().unwrap()
    }

    #[test]
    fn grammar() {
        assert_eq!(o("rat:1/3"), RealOracle::Rational(ratio(1, 3)));
        assert_eq!(o("const:zeta3"), RealOracle::Constant(Constant::Zeta3));
        assert_eq!(
            o("cf:[0;3,1000000]").exact_value(),
            Some(ratio(1_000_000, 3_000_001))
        );
        assert_eq!(o("cf:[1;2,1]"), o("cf:[1;3]"));
        let a = o("affine:1/-1:const:sqrt2");
        assert_eq!(a.to_string(), "affine:1/1,-1/1:const:sqrt2");
        assert_eq!(o("affine:1/2,3/4:rat:2").exact_value(), Some(ratio(7, 4)));
        for bad in [
            "",
            "rat:",
            "const:pi",
            "cf:[1;0,2]",
            "cf:[]",
            "affine:0,1:rat:1",
            "cf:[1;2]+periodic:[]",
            "zzz:1",
        ] {
            assert!(bad.parse::<RealOracle>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_roundtrips() {
        for s in [
            "rat:-7/3",
            "const:golden",
            "cf:[2;1,2]+periodic:[1,1,4]",
            "cf:[0;3,1000000]",
            "cf:liouville:10:4",
            "affine:3/2,-1/1:cf:[1]+periodic:[2]",
        ] {
            let x = o(s);
            assert_eq!(o(&x.to_string()), x);
        }
        assert_eq!(o("cf:liouville:10").to_string(), "cf:liouville:10:6");
    }

    #[test]
    fn small_enclosures() {
        let e = o("rat:1/3").enclose(20).unwrap();
        assert_eq!(e, Enclosure::exact(ratio(1, 3)));
        let e = o("const:sqrt2").enclose(10).unwrap();
        assert!(e.width_within(10));
        let d = e.mid() - crate::rational::parse_rational("1.41421356").unwrap();
        assert!(d.abs() < ratio(1, 1024));
        let z = o("const:zeta3").enclose(64).unwrap();
        let r = crate::rational::parse_rational("1.20205690315959428539973816").unwrap();
        let tol = ratio(1, BigInt::from(10).pow(26));
        assert!(z.intersects(&Enclosure::new(&r - &tol, &r + &tol)));
    }

    #[test]
    fn liouville_quotients() {
        let cf = CfSpec::liouville(int(10).numer().clone(), 3).unwrap();
        let q: Vec<BigInt> = (0..6).map(|j| cf.quotient(j).unwrap().unwrap()).collect();
        let want: Vec<BigInt> = [0u64, 10, 100, 1_000_000, 1, 1]
            .into_iter()
            .map(BigInt::from)
            .collect();
        assert_eq!(q, want);
        let cf = CfSpec::liouville(BigInt::from(10), 9).unwrap();
        assert!(matches!(
            cf.quotient(9),
            Err(Error::Unrepresentable { index: 9, .. })
        ));
    }

    #[test]
    fn periodic_cf_matches_constant() {
        let a = o("cf:[1]+periodic:[2]").enclose(300).unwrap();
        let b = o("const:sqrt2").enclose(300).unwrap();
        assert!(a.intersects(&b));
        let g = o("cf:[1]+periodic:[1]").enclose(200).unwrap();
        assert!(g.intersects(&o("const:golden").enclose(200).unwrap()));
    }

    proptest! {
        #[test]
        fn nesting_and_width(k in 1u64..400, dk in 1u64..200, which in 0usize..6) {
            let src = ["const:sqrt3", "const:log2", "const:e", "cf:[0;1,2]+periodic:[3,1]", "affine:-5/3,2/7:const:zeta2", "cf:liouville:3:4"][which];
            let x = o(src);
            let a = x.enclose(k).unwrap();
            let b = x.enclose(k + dk).unwrap();
            prop_assert!(a.width_within(k));
            prop_assert!(b.width_within(k + dk));
            prop_assert!(a.intersects(&b));
        }

        #[test]
        fn affine_consistency(p in -20i64..20, q in 1i64..20, bn in -5i64..5, k in 1u64..200) {
            prop_assume!(p != 0);
            let a = ratio(p, q);
            let b = ratio(bn, 3);
            let inner = o("const:sqrt5");
            let x = RealOracle::affine(a.clone(), b.clone(), inner.clone()).unwrap();
            let outer = inner.enclose(k + magnitude_bits(&a) + 2).unwrap().scale(&a).shift(&b);
            prop_assert!(x.enclose(k).unwrap().is_subset_of(&outer));
        }
    }
}
