//! Independent checks: brute-force lemma outcomes, witness inequalities and
//! continued-fraction identities.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certify::Certifier;
use crate::contfrac::{convergents, expand};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::farey::{CaseIIWitness, CaseIWitness, DisjunctionResult, LemmaParams, Outcome};
use crate::oracle::RealOracle;
use crate::rational::{ceil, floor};

/// `eps <= q*xi - p <= c'*eps` and `Q <= q <= cQ`.
pub fn check_case_ii(
    x: &RealOracle,
    params: &LemmaParams,
    w: &CaseIIWitness,
    cert: &Certifier,
) -> Result<bool> {
    let q = BigRational::from_integer(w.q.clone());
    if q < params.q || q > &params.c * &params.q {
        return Ok(false);
    }
    let hi = &params.c_prime * &params.eps;
    cert.refine(x, &q, &BigRational::from_integer(w.p.clone()), |e| {
        if e.lo >= params.eps && e.hi <= hi {
            Some(true)
        } else if e.hi < params.eps || e.lo > hi {
            Some(false)
        } else {
            None
        }
    })
}

/// Coprime `u >= 1`, `0 <= v <= u`, `u < bound_u` and `|xi - v/u| <= bound_dist`.
pub fn check_case_i(
    x: &RealOracle,
    params: &LemmaParams,
    w: &CaseIWitness,
    cert: &Certifier,
) -> Result<bool> {
    if !w.u.is_positive() || w.v.is_negative() || w.v > w.u || !w.u.gcd(&w.v).is_one() {
        return Ok(false);
    }
    let bound_u = params.bound_u();
    let bound_dist = params.bound_dist(&w.u);
    if BigRational::from_integer(w.u.clone()) >= bound_u
        || w.bound_u != bound_u
        || w.bound_dist != bound_dist
    {
        return Ok(false);
    }
    let r = BigRational::new(w.v.clone(), w.u.clone());
    cert.refine(x, &BigRational::one(), &r, |e| {
        let d = e.abs();
        if d.hi <= bound_dist {
            Some(true)
        } else if d.lo > bound_dist {
            Some(false)
        } else {
            None
        }
    })
}

pub fn check_result(
    x: &RealOracle,
    params: &LemmaParams,
    res: &DisjunctionResult,
    cert: &Certifier,
) -> Result<bool> {
    match &res.outcome {
        Outcome::CaseI(w) => check_case_i(x, params, w, cert),
        Outcome::CaseII(w) => check_case_ii(x, params, w, cert),
    }
}

/// Fixed-point view of `xi`: `lo/2^k <= xi <= hi/2^k`.
struct Dyadic {
    lo: BigInt,
    hi: BigInt,
    k: u64,
}

impl Dyadic {
    fn new(x: &RealOracle, k: u64) -> Result<Self> {
        let e = x.enclose(k)?;
        let s = BigRational::from_integer(BigInt::one() << k);
        Ok(Dyadic {
            lo: floor(&(&e.lo * &s)),
            hi: ceil(&(&e.hi * &s)),
            k,
        })
    }

    /// `Some(true)` when `frac(q*xi)` surely lies in `[a, b]`, `Some(false)` when surely not.
    fn frac_in(&self, q: &BigInt, a: &BigRational, b: &BigRational) -> Option<(bool, BigInt)> {
        let ql = q * &self.lo;
        let qh = q * &self.hi;
        let p = &ql >> self.k;
        if &qh >> self.k != p {
            return None;
        }
        let s = BigRational::from_integer(BigInt::one() << self.k);
        let fl = BigRational::from_integer(&ql - (&p << self.k)) / &s;
        let fh = BigRational::from_integer(&qh - (&p << self.k)) / &s;
        if &fl >= a && &fh <= b {
            Some((true, p))
        } else if &fh < a || &fl > b {
            Some((false, p))
        } else {
            None
        }
    }
}

/// Smallest `q` in `[Q, cQ]` with `frac(q*xi)` in `[eps, c'*eps]`, by enumeration.
pub fn brute_case_ii(
    x: &RealOracle,
    params: &LemmaParams,
    cert: &Certifier,
) -> Result<Option<(BigInt, BigInt)>> {
    let lo = ceil(&params.q);
    let hi = floor(&(&params.c * &params.q));
    let top = &params.c_prime * &params.eps;
    let exact = x.exact_value();
    let fixed = if exact.is_none() {
        Some(Dyadic::new(x, hi.bits() + 96)?)
    } else {
        None
    };
    let mut q = lo;
    while q <= hi {
        let hit = match (&exact, &fixed) {
            (Some(v), _) => {
                let t = BigRational::from_integer(q.clone()) * v;
                let p = floor(&t);
                let f = t - BigRational::from_integer(p.clone());
                (f >= params.eps && f <= top).then_some(p)
            }
            (None, Some(d)) => match d.frac_in(&q, &params.eps, &top) {
                Some((true, p)) => Some(p),
                Some((false, _)) => None,
                None => {
                    let qr = BigRational::from_integer(q.clone());
                    let p = cert.floor_of(x, &qr, &BigRational::zero())?;
                    let w = CaseIIWitness {
                        p: p.clone(),
                        q: q.clone(),
                        value: Enclosure::exact(BigRational::zero()),
                    };
                    check_case_ii(x, params, &w, cert)?.then_some(p)
                }
            },
            _ => unreachable!(),
        };
        if let Some(p) = hit {
            return Ok(Some((q, p)));
        }
        q += 1;
    }
    Ok(None)
}

/// Smallest `u < limit` admitting a case I pair `(u, v)`, by enumeration.
pub fn brute_case_i(
    x: &RealOracle,
    params: &LemmaParams,
    limit: &BigInt,
    cert: &Certifier,
) -> Result<Option<(BigInt, BigInt)>> {
    let mut u = BigInt::one();
    let bound_u = params.bound_u();
    while &u < limit && BigRational::from_integer(u.clone()) < bound_u {
        let v = cert.nearest_integer(x, &u, 0).or_else(|e| match e {
            Error::HalfInteger { .. } => Ok(floor(
                &(BigRational::from_integer(u.clone()) * x.exact_value().unwrap()),
            )),
            e => Err(e),
        })?;
        if !v.is_negative() && v <= u && u.gcd(&v).is_one() {
            let w = CaseIWitness {
                u: u.clone(),
                v: v.clone(),
                bound_u: bound_u.clone(),
                bound_dist: params.bound_dist(&u),
                distance: Enclosure::exact(BigRational::zero()),
            };
            if check_case_i(x, params, &w, cert)? {
                return Ok(Some((u, v)));
            }
        }
        u += 1;
    }
    Ok(None)
}

/// Failures of the convergent identities up to `depth`: determinant, alternation
/// around `xi`, and `1/(q_k (q_k + q_{k+1})) < |xi - p_k/q_k| <= 1/(q_k q_{k+1})`.
pub fn cf_identity_failures(x: &RealOracle, depth: usize, cert: &Certifier) -> Result<Vec<String>> {
    let cf = expand(x, depth + 1, cert)?;
    let conv = convergents(&cf.quotients);
    let mut bad = Vec::new();
    for k in 1..conv.len() {
        let det = &conv[k].p * &conv[k - 1].q - &conv[k - 1].p * &conv[k].q;
        let want = if k % 2 == 1 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        if det != want {
            bad.push(format!("determinant at k = {k}"));
        }
    }
    for k in 0..conv.len().saturating_sub(1) {
        let c = &conv[k];
        let r = c.value();
        let sign = cert.compare(x, &r)?;
        let want = if k % 2 == 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        };
        if sign != want {
            bad.push(format!("alternation at k = {k}"));
        }
        let qn = &conv[k + 1].q;
        let upper = BigRational::new(BigInt::one(), &c.q * qn);
        let lower = BigRational::new(BigInt::one(), &c.q * (&c.q + qn));
        let last = cf.terminated && k + 2 == conv.len();
        let ok = cert.refine(x, &BigRational::one(), &r, |e| {
            let d = e.abs();
            let upper_ok = if last { d.hi <= upper } else { d.hi < upper };
            if d.lo > lower && upper_ok {
                Some(true)
            } else if d.hi <= lower || d.lo > upper {
                Some(false)
            } else {
                None
            }
        })?;
        if !ok {
            bad.push(format!("two-sided bound at k = {k}"));
        }
    }
    Ok(bad)
}

/// Enclosures at the given precisions all meet their widths and pairwise intersect.
pub fn enclosures_consistent(x: &RealOracle, ks: &[u64]) -> Result<bool> {
    let es = ks
        .iter()
        .map(|&k| x.enclose(k))
        .collect::<Result<Vec<_>>>()?;
    let widths = es.iter().zip(ks).all(|(e, &k)| e.width_within(k));
    let meets = es
        .iter()
        .enumerate()
        .all(|(i, a)| es[i + 1..].iter().all(|b| a.intersects(b)));
    Ok(widths && meets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farey::solve_disjunction;
    use crate::rational::ratio;

    fn o(s: &str) -> RealOracle {
        s.parse().unwrap()
    }

    #[test]
    fn brute_matches_examples() {
        let c = Certifier::default();
        let p = LemmaParams::new(ratio(3, 2), ratio(19, 10), ratio(1, 10), ratio(10, 1)).unwrap();
        let x = o("affine:1,-1:const:sqrt2");
        assert_eq!(
            brute_case_ii(&x, &p, &c).unwrap(),
            Some((BigInt::from(10), BigInt::from(4)))
        );
        let r = solve_disjunction(&x, &p).unwrap();
        assert!(check_result(&x, &p, &r, &c).unwrap());

        let p =
            LemmaParams::new(ratio(3, 2), ratio(19, 10), ratio(1, 2), ratio(1_000_000, 1)).unwrap();
        let y = o("cf:[0;3,1000000]");
        assert_eq!(
            brute_case_i(&y, &p, &BigInt::from(100), &c).unwrap(),
            Some((BigInt::from(3), BigInt::one()))
        );
    }

    #[test]
    fn rejects_forged_witnesses() {
        let c = Certifier::default();
        let p = LemmaParams::new(ratio(3, 2), ratio(19, 10), ratio(1, 10), ratio(10, 1)).unwrap();
        let x = o("affine:1,-1:const:sqrt2");
        let w = CaseIIWitness {
            p: 5.into(),
            q: 11.into(),
            value: Enclosure::exact(ratio(0, 1)),
        };
        assert!(!check_case_ii(&x, &p, &w, &c).unwrap());
        let mk = |u: i64, v: i64| CaseIWitness {
            u: u.into(),
            v: v.into(),
            bound_u: p.bound_u(),
            bound_dist: p.bound_dist(&u.into()),
            distance: Enclosure::exact(ratio(0, 1)),
        };
        assert!(check_case_i(&x, &p, &mk(2, 1), &c).unwrap());
        assert!(!check_case_i(&x, &p, &mk(4, 2), &c).unwrap());
        assert!(!check_case_i(&x, &p, &mk(300, 1), &c).unwrap());
    }

    #[test]
    fn identities_hold() {
        let c = Certifier::default();
        for s in [
            "const:sqrt2",
            "const:golden",
            "const:e",
            "const:zeta3",
            "cf:liouville:2:4",
            "rat:355/113",
        ] {
            assert!(
                cf_identity_failures(&o(s), 30, &c).unwrap().is_empty(),
                "{s}"
            );
        }
        assert!(enclosures_consistent(&o("const:log2"), &[8, 64, 300]).unwrap());
    }
}
