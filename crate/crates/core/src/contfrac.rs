//! Certified continued-fraction expansions, convergents and finite-depth
//! irrationality-exponent estimates.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::certify::Certifier;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::log::log_ratio;
use crate::oracle::RealOracle;
use crate::rational::{dyadic_floor, floor, to_decimal_floor};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfExpansion {
    /// `a_0; a_1, ..., a_d`.
    pub quotients: Vec<BigInt>,
    pub certified: bool,
    /// The real is rational and its expansion ended before the requested depth.
    pub terminated: bool,
    /// Enclosure precision that settled the last quotient (0 when read directly).
    pub bits_used: u64,
}

impl CfExpansion {
    pub fn depth(&self) -> usize {
        self.quotients.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub index: usize,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }

    pub fn to_json(&self) -> Value {
        json!({"p": self.p.to_string(), "q": self.q.to_string(), "k": self.index})
    }
}

/// First `depth + 1` quotients of the real defined by `x` (fewer if it is
/// rational with a shorter expansion).
pub fn expand(x: &RealOracle, depth: usize, cert: &Certifier) -> Result<CfExpansion> {
    if let RealOracle::ContinuedFraction(cf) = x {
        let mut quotients = Vec::with_capacity(depth + 1);
        for j in 0..=depth {
            match cf.quotient(j)? {
                Some(a) => quotients.push(a),
                None => break,
            }
        }
        let terminated = quotients.len() <= depth;
        return Ok(CfExpansion {
            quotients,
            certified: true,
            terminated,
            bits_used: 0,
        });
    }
    if let Some(v) = x.exact_value() {
        let mut quotients = euclid(&v);
        let terminated = quotients.len() <= depth;
        quotients.truncate(depth + 1);
        return Ok(CfExpansion {
            quotients,
            certified: true,
            terminated,
            bits_used: 0,
        });
    }
    let mut k = cert.start_bits;
    loop {
        let (quotients, complete) = interval_expand(&x.enclose(k)?, depth);
        if complete {
            return Ok(CfExpansion {
                quotients,
                certified: true,
                terminated: false,
                bits_used: k,
            });
        }
        if k >= cert.cap_bits {
            return Err(Error::Inconclusive { cap: cert.cap_bits });
        }
        k = (k * 2).min(cert.cap_bits);
    }
}

/// Quotients shared by every point of the enclosure; `true` once `depth + 1`
/// of them are settled.
fn interval_expand(e: &Enclosure, depth: usize) -> (Vec<BigInt>, bool) {
    let (mut lo, mut hi) = (e.lo.clone(), e.hi.clone());
    let mut out = Vec::new();
    for j in 0..=depth {
        let a = floor(&lo);
        if floor(&hi) != a {
            return (out, false);
        }
        let exact_floor = lo.is_integer();
        out.push(a.clone());
        if j == depth {
            break;
        }
        if exact_floor {
            // The fractional part could be zero; only more precision can tell.
            return (out, false);
        }
        let ar = BigRational::from_integer(a);
        let nlo = (&hi - &ar).recip();
        let nhi = (&lo - &ar).recip();
        lo = nlo;
        hi = nhi;
    }
    (out, true)
}

fn euclid(v: &BigRational) -> Vec<BigInt> {
    let (mut n, mut d) = (v.numer().clone(), v.denom().clone());
    let mut out = Vec::new();
    while !d.is_zero() {
        let (a, r) = n.div_mod_floor(&d);
        out.push(a);
        n = std::mem::replace(&mut d, r);
    }
    out
}

/// `p_k = a_k p_{k-1} + p_{k-2}`, `q_k = a_k q_{k-1} + q_{k-2}`.
pub fn convergents(quotients: &[BigInt]) -> Vec<Convergent> {
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let p = a * &p1 + &p0;
            let q = a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p.clone());
            q0 = std::mem::replace(&mut q1, q.clone());
            Convergent { p, q, index }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuEstimate {
    /// Rounded down to a multiple of `2^-64`; never below 2.
    pub mu_lower: BigRational,
    pub depth: usize,
    pub witness_index: Option<usize>,
    /// Indices `k` scanned (inclusive).
    pub window: (usize, usize),
}

impl MuEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "mu_lower": to_decimal_floor(&self.mu_lower, 12),
            "depth": self.depth,
            "witness_index": self.witness_index,
            "window": [self.window.0, self.window.1],
        })
    }
}

/// Largest `1 + log q_{k+1} / log q_k` over the upper half of the explored
/// depth, `k` in `[max(1, depth/2), depth - 1]`.
pub fn mu_estimate(x: &RealOracle, depth: usize, cert: &Certifier) -> Result<MuEstimate> {
    let cf = expand(x, depth, cert)?;
    mu_from_expansion(&cf, depth)
}

pub fn mu_from_expansion(cf: &CfExpansion, depth: usize) -> Result<MuEstimate> {
    if depth < 2 {
        return Err(Error::pre("mu estimate needs depth >= 2"));
    }
    if cf.terminated {
        return Err(Error::Degenerate(
            "rational number: expansion terminates".into(),
        ));
    }
    let conv = convergents(&cf.quotients);
    let two = BigRational::from_integer(2.into());
    let lo_k = (depth / 2).max(1);
    let mut best = two.clone();
    let mut witness = None;
    let mut best_raw: Option<BigRational> = None;
    for k in lo_k..depth {
        if conv[k].q < BigInt::from(2) {
            continue;
        }
        let r = log_ratio(
            &BigRational::from_integer(conv[k + 1].q.clone()),
            &BigRational::from_integer(conv[k].q.clone()),
            64,
        )?;
        let m = dyadic_floor(&(BigRational::one() + r.lo), 64);
        if best_raw.as_ref().map_or(true, |b| &m > b) {
            best_raw = Some(m.clone());
            witness = Some(k);
        }
        if m > best {
            best = m;
        }
    }
    Ok(MuEstimate {
        mu_lower: best,
        depth,
        witness_index: witness,
        window: (lo_k, depth - 1),
    })
}

pub fn expansion_json(cf: &CfExpansion, mu: Option<&MuEstimate>) -> Value {
    let conv: Vec<Value> = convergents(&cf.quotients)
        .iter()
        .map(Convergent::to_json)
        .collect();
    let mut v = json!({
        "quotients": cf.quotients.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "convergents": conv,
        "certified": cf.certified,
        "terminated": cf.terminated,
    });
    if let Some(m) = mu {
        v["mu_lower"] = json!(to_decimal_floor(&m.mu_lower, 12));
        v["witness_index"] = json!(m.witness_index);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn o(s: &str) -> RealOracle {
        s.parse().unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&a| BigInt::from(a)).collect()
    }

    fn pq(c: &[Convergent]) -> Vec<(i64, i64)> {
        use num_traits::ToPrimitive;
        c.iter()
            .map(|c| (c.p.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect()
    }

    #[test]
    fn catalog_expansions() {
        let c = Certifier::default();
        assert_eq!(
            expand(&o("const:sqrt2"), 5, &c).unwrap().quotients,
            ints(&[1, 2, 2, 2, 2, 2])
        );
        assert_eq!(
            expand(&o("const:golden"), 6, &c).unwrap().quotients,
            ints(&[1; 7])
        );
        assert_eq!(
            expand(&o("const:zeta3"), 4, &c).unwrap().quotients,
            ints(&[1, 4, 1, 18, 1])
        );
        // e = [2; 1, 2, 1, 1, 4, 1, 1, 6, ...]
        assert_eq!(
            expand(&o("const:e"), 9, &c).unwrap().quotients,
            ints(&[2, 1, 2, 1, 1, 4, 1, 1, 6, 1])
        );
        assert_eq!(
            expand(&o("rat:-7/3"), 10, &c).unwrap().quotients,
            ints(&[-3, 1, 2])
        );
        assert!(expand(&o("rat:-7/3"), 10, &c).unwrap().terminated);
    }

    #[test]
    fn zeta3_deeper() {
        // mpmath: zeta(3) = [1; 4, 1, 18, 1, 1, 1, 4, 1, 9, 9, 2, 1, 1, 1, 2, 7, 1, 1, 7, 11]
        let c = Certifier::default();
        let want = ints(&[
            1, 4, 1, 18, 1, 1, 1, 4, 1, 9, 9, 2, 1, 1, 1, 2, 7, 1, 1, 7, 11,
        ]);
        assert_eq!(expand(&o("const:zeta3"), 20, &c).unwrap().quotients, want);
    }

    #[test]
    fn convergent_examples() {
        assert_eq!(
            pq(&convergents(&ints(&[1, 1, 1, 1, 1]))),
            vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]
        );
        assert_eq!(
            pq(&convergents(&ints(&[1, 2, 2, 2]))),
            vec![(1, 1), (3, 2), (7, 5), (17, 12)]
        );
        assert_eq!(
            pq(&convergents(&ints(&[0, 4, 2]))),
            vec![(0, 1), (1, 4), (2, 9)]
        );
    }

    #[test]
    fn mu_examples() {
        let c = Certifier::default();
        let g = mu_estimate(&o("const:golden"), 50, &c).unwrap();
        let f = crate::rational::to_f64(&g.mu_lower);
        assert!(f > 2.0 && f < 2.05, "{f}");
        let s = mu_estimate(&o("const:sqrt2"), 30, &c).unwrap();
        let f = crate::rational::to_f64(&s.mu_lower);
        assert!((2.0..2.1).contains(&f), "{f}");
        let l = mu_estimate(&o("cf:liouville:10"), 6, &c).unwrap();
        assert!(crate::rational::to_f64(&l.mu_lower) > 5.0);
        assert_eq!(l.witness_index, Some(5));
        assert!(mu_estimate(&o("const:e"), 1, &c).is_err());
        assert!(matches!(
            mu_estimate(&o("rat:1/7"), 5, &c),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn deep_sqrt2_mu() {
        let c = Certifier::default();
        let m = mu_estimate(&o("const:sqrt2"), 400, &c).unwrap();
        let inv = BigRational::one() / (&m.mu_lower - BigRational::one());
        let f = crate::rational::to_f64(&inv);
        assert!((0.99..=1.0).contains(&f), "{f}");
    }

    #[test]
    fn json_shape() {
        let c = Certifier::default();
        let cf = expand(&o("const:sqrt2"), 3, &c).unwrap();
        let v = expansion_json(&cf, None);
        assert_eq!(v["quotients"], json!(["1", "2", "2", "2"]));
        assert_eq!(v["convergents"][3], json!({"p": "17", "q": "12", "k": 3}));
    }

    proptest! {
        #[test]
        fn roundtrip_and_identities(qs in proptest::collection::vec(1i64..50, 1..25), a0 in -5i64..5, tail in 1i64..4) {
            let mut all = vec![a0];
            all.extend(&qs);
            let spec = format!("cf:[{a0};{}]+periodic:[{tail}]", qs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","));
            let x = o(&spec);
            let c = Certifier::default();
            let d = all.len() - 1;
            prop_assert_eq!(&expand(&x, d, &c).unwrap().quotients, &ints(&all));
            // Same real through the generic interval path.
            let y = RealOracle::affine(BigRational::one(), BigRational::zero(), x).unwrap();
            prop_assert_eq!(&expand(&y, d, &c).unwrap().quotients, &ints(&all));
            let conv = convergents(&ints(&all));
            for k in 1..conv.len() {
                let det = &conv[k].p * &conv[k - 1].q - &conv[k - 1].p * &conv[k].q;
                let sign = if k % 2 == 1 { 1 } else { -1 };
                prop_assert_eq!(det, BigInt::from(sign));
                prop_assert!(conv[k].q > conv[k - 1].q || k == 1);
            }
        }
    }
}
