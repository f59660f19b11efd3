//! Constructive form of the two-case approximation lemma: for `0 < xi < 1`
//! and `1 < c < c' < 2`, `0 < eps < 1`, `Q > 1`, either a rational `v/u`
//! with small `u` approximates `xi` well (case I), or some `q` in `[Q, cQ]`
//! has `eps <= q*xi - p <= c'*eps` (case II).

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::certify::Certifier;
use crate::contfrac::{convergents, expand};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::oracle::RealOracle;
use crate::orbit::first_in_window;
use crate::rational::{ceil, floor, fmt_rational, magnitude_bits, pow2};

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaParams {
    pub c: BigRational,
    pub c_prime: BigRational,
    pub eps: BigRational,
    pub q: BigRational,
}

impl LemmaParams {
    pub fn new(
        c: BigRational,
        c_prime: BigRational,
        eps: BigRational,
        q: BigRational,
    ) -> Result<Self> {
        let p = LemmaParams { c, c_prime, eps, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let one = BigRational::one();
        let two = BigRational::from_integer(2.into());
        if !(one < self.c && self.c < self.c_prime && self.c_prime < two) {
            return Err(Error::pre("need 1 < c < c' < 2"));
        }
        if !(self.eps.is_positive() && self.eps < one) {
            return Err(Error::pre("need 0 < eps < 1"));
        }
        if self.q <= one {
            return Err(Error::pre("need Q > 1"));
        }
        Ok(())
    }

    /// `2c^2 / ((c - 1)(c' - c)) / eps`.
    pub fn bound_u(&self) -> BigRational {
        let two = BigRational::from_integer(2.into());
        &two * &self.c * &self.c
            / ((&self.c - BigRational::one()) * (&self.c_prime - &self.c))
            / &self.eps
    }

    /// `(2/(c - 1)) (1 + c^2/(c' - c))`, so that `bound_dist(u) = dist_constant / (u Q)`.
    pub fn dist_constant(&self) -> BigRational {
        let two = BigRational::from_integer(2.into());
        two / (&self.c - BigRational::one())
            * (BigRational::one() + &self.c * &self.c / (&self.c_prime - &self.c))
    }

    pub fn bound_dist(&self, u: &BigInt) -> BigRational {
        self.dist_constant() / (BigRational::from_integer(u.clone()) * &self.q)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "c": fmt_rational(&self.c),
            "c_prime": fmt_rational(&self.c_prime),
            "eps": fmt_rational(&self.eps),
            "Q": fmt_rational(&self.q),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseIWitness {
    pub u: BigInt,
    pub v: BigInt,
    pub bound_u: BigRational,
    pub bound_dist: BigRational,
    /// Enclosure of `|xi - v/u|`.
    pub distance: Enclosure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseIIWitness {
    pub p: BigInt,
    pub q: BigInt,
    /// Enclosure of `q*xi - p`.
    pub value: Enclosure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    CaseI(CaseIWitness),
    CaseII(CaseIIWitness),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub candidates: u64,
    pub bits: u64,
    pub structured: bool,
}

impl SearchStats {
    fn absorb(&mut self, o: SearchStats) {
        self.candidates += o.candidates;
        self.bits = self.bits.max(o.bits);
        self.structured |= o.structured;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjunctionResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl DisjunctionResult {
    pub fn is_case_ii(&self) -> bool {
        matches!(self.outcome, Outcome::CaseII(_))
    }

    pub fn to_json(&self, params: &LemmaParams) -> Value {
        let (case, witness, lhs, rhs) = match &self.outcome {
            Outcome::CaseI(w) => (
                "I",
                json!({"u": w.u.to_string(), "v": w.v.to_string(),
                       "bound_u": fmt_rational(&w.bound_u), "bound_dist": fmt_rational(&w.bound_dist)}),
                w.distance.to_json(),
                json!({"lo": "0/1", "hi": fmt_rational(&w.bound_dist)}),
            ),
            Outcome::CaseII(w) => (
                "II",
                json!({"p": w.p.to_string(), "q": w.q.to_string()}),
                w.value.to_json(),
                json!({"lo": fmt_rational(&params.eps), "hi": fmt_rational(&(&params.c_prime * &params.eps))}),
            ),
        };
        json!({
            "case": case,
            "witness": witness,
            "certificates": {"lhs": lhs, "rhs": rhs},
            "search_stats": {"candidates": self.stats.candidates, "bits": self.stats.bits, "structured": self.stats.structured},
        })
    }
}

/// How the case II window is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Ranges up to this many integers are enumerated directly.
    pub budget: u64,
    /// Allow the orbit-jumping search above the budget.
    pub structured: bool,
    /// Use the orbit-jumping search even below the budget.
    pub force_structured: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: DEFAULT_ENUMERATION_BUDGET,
            structured: true,
            force_structured: false,
        }
    }
}

/// Smallest integer `q` in `[q_lo, q_hi]` with `q*xi - p` in `[t_lo, t_hi]`
/// for some integer `p`, returned as `(q, p)`.
pub fn find_fractional_hit(
    x: &RealOracle,
    q_lo: &BigRational,
    q_hi: &BigRational,
    t_lo: &BigRational,
    t_hi: &BigRational,
) -> Result<Option<(BigInt, BigInt)>> {
    find_fractional_hit_with(
        x,
        q_lo,
        q_hi,
        t_lo,
        t_hi,
        &SearchConfig::default(),
        &Certifier::default(),
    )
    .map(|(h, _)| h)
}

pub fn find_fractional_hit_with(
    x: &RealOracle,
    q_lo: &BigRational,
    q_hi: &BigRational,
    t_lo: &BigRational,
    t_hi: &BigRational,
    cfg: &SearchConfig,
    cert: &Certifier,
) -> Result<(Option<(BigInt, BigInt)>, SearchStats)> {
    if !(t_lo.is_positive() && t_lo < t_hi && t_hi < &BigRational::one()) {
        return Err(Error::pre("need 0 < t_lo < t_hi < 1"));
    }
    if q_lo >= q_hi {
        return Err(Error::pre("need q_lo < q_hi"));
    }
    if !q_lo.is_positive() {
        return Err(Error::pre("need q_lo > 0"));
    }
    first_hit(x, &ceil(q_lo), &floor(q_hi), t_lo, t_hi, cfg, cert)
}

/// Certified `p` with `t_lo <= q*xi - p <= t_hi`, if the fractional part of
/// `q*xi` lies in the window.
fn frac_in_window(
    x: &RealOracle,
    q: &BigInt,
    t_lo: &BigRational,
    t_hi: &BigRational,
    cert: &Certifier,
) -> Result<Option<BigInt>> {
    let qr = BigRational::from_integer(q.clone());
    let p = cert.floor_of(x, &qr, &BigRational::zero())?;
    let pr = BigRational::from_integer(p.clone());
    if cert.sign_of_rational_form(x, &qr, &(&pr + t_lo))? == Ordering::Less {
        return Ok(None);
    }
    if cert.sign_of_rational_form(x, &qr, &(&pr + t_hi))? == Ordering::Greater {
        return Ok(None);
    }
    Ok(Some(p))
}

/// Smallest `q` in `[qa, qb]` whose fractional part `{q*xi}` lies in the
/// closed window `[t_lo, t_hi]` with `0 < t_lo`, `t_hi <= 1`.
fn first_hit(
    x: &RealOracle,
    qa: &BigInt,
    qb: &BigInt,
    t_lo: &BigRational,
    t_hi: &BigRational,
    cfg: &SearchConfig,
    cert: &Certifier,
) -> Result<(Option<(BigInt, BigInt)>, SearchStats)> {
    if qa > qb {
        return Ok((None, SearchStats::default()));
    }
    let len = qb - qa + 1u32;
    let small = len <= BigInt::from(cfg.budget);
    if small && !cfg.force_structured {
        return enumerate(x, qa, qb, t_lo, t_hi, cert);
    }
    if !cfg.structured {
        return Err(Error::RangeTooLarge {
            len: len.to_string(),
            budget: cfg.budget,
        });
    }
    structured(x, qa, qb, t_lo, t_hi, cert)
}

/// Dyadic bracket `L/2^K <= xi <= (L + 2)/2^K`.
fn dyadic_xi(x: &RealOracle, kbits: u64) -> Result<(BigInt, BigInt)> {
    let e = x.enclose(kbits + 2)?;
    let m = BigRational::from_integer(pow2(kbits));
    let l = floor(&(&e.lo * &m));
    let h = ceil(&(&e.hi * &m));
    Ok((l, h))
}

fn enumerate(
    x: &RealOracle,
    qa: &BigInt,
    qb: &BigInt,
    t_lo: &BigRational,
    t_hi: &BigRational,
    cert: &Certifier,
) -> Result<(Option<(BigInt, BigInt)>, SearchStats)> {
    let kbits = qb.bits() + 64;
    let (l, h) = dyadic_xi(x, kbits)?;
    let m = pow2(kbits);
    let mr = BigRational::from_integer(m.clone());
    let tl_floor = floor(&(t_lo * &mr));
    let tl_ceil = ceil(&(t_lo * &mr));
    let th_floor = floor(&(t_hi * &mr));
    let th_ceil = ceil(&(t_hi * &mr));
    let mut stats = SearchStats {
        bits: kbits,
        ..Default::default()
    };
    let mut q = qa.clone();
    let mut a = &l * qa;
    let mut b = &h * qa;
    while &q <= qb {
        stats.candidates += 1;
        let (pa, fa) = a.div_mod_floor(&m);
        let (pb, fb) = b.div_mod_floor(&m);
        let settled_out = pa == pb && (fb < tl_floor || fa > th_ceil);
        if !settled_out {
            let settled_in = pa == pb && fa >= tl_ceil && fb <= th_floor;
            if settled_in {
                return Ok((Some((q.clone(), pa)), stats));
            }
            if let Some(p) = frac_in_window(x, &q, t_lo, t_hi, cert)? {
                return Ok((Some((q, p)), stats));
            }
        }
        q += 1u32;
        a += &l;
        b += &h;
    }
    Ok((None, stats))
}

fn structured(
    x: &RealOracle,
    qa: &BigInt,
    qb: &BigInt,
    t_lo: &BigRational,
    t_hi: &BigRational,
    cert: &Certifier,
) -> Result<(Option<(BigInt, BigInt)>, SearchStats)> {
    // xi*M lies in [L, L + 2], so q*xi*M drifts at most 2q from q*L. The
    // window is widened by that drift; every candidate is then checked exactly.
    let t_bits = magnitude_bits(&t_lo.recip());
    let kbits = 2 * qb.bits() + t_bits + 64;
    let (l, _) = dyadic_xi(x, kbits)?;
    let m = pow2(kbits);
    let mr = BigRational::from_integer(m.clone());
    let drift: BigInt = qb * 2u32 + 1u32;
    let wl = (floor(&(t_lo * &mr)) - &drift).max(BigInt::zero());
    let wr = ceil(&(t_hi * &mr)).min(&m - 1u32);
    let mut stats = SearchStats {
        bits: kbits,
        structured: true,
        ..Default::default()
    };
    let mut start = qa.clone();
    while &start <= qb {
        let b = &l * &start;
        let Some(dx) = first_in_window(&l, &b, &m, &wl, &wr) else {
            break;
        };
        let q = &start + dx;
        if &q > qb {
            break;
        }
        stats.candidates += 1;
        if let Some(p) = frac_in_window(x, &q, t_lo, t_hi, cert)? {
            return Ok((Some((q, p)), stats));
        }
        start = q + 1u32;
    }
    Ok((None, stats))
}

/// Case II search: `q` in `[Q, cQ]` with `eps <= q*xi - p <= c'*eps`.
pub fn find_case_ii(
    x: &RealOracle,
    params: &LemmaParams,
    cfg: &SearchConfig,
    cert: &Certifier,
) -> Result<(Option<CaseIIWitness>, SearchStats)> {
    let qa = ceil(&params.q);
    let qb = floor(&(&params.c * &params.q));
    let hi = &params.c_prime * &params.eps;
    let one = BigRational::one();
    let (mut best, mut stats) = first_hit(
        x,
        &qa,
        &qb,
        &params.eps,
        &hi.clone().min(one.clone()),
        cfg,
        cert,
    )?;
    if hi > one {
        // q*xi - p in (1, c' eps] means {q xi} in (0, c' eps - 1], which is
        // {q (-xi)} in [2 - c' eps, 1).
        let neg = RealOracle::affine(-one.clone(), BigRational::zero(), x.clone())?;
        let (h, s) = first_hit(
            &neg,
            &qa,
            &qb,
            &(BigRational::from_integer(2.into()) - &hi),
            &one,
            cfg,
            cert,
        )?;
        stats.absorb(s);
        if let Some((q, p)) = h {
            best = keep_smaller(best, (q, -p - 2u32));
        }
        // q*xi - p = 1 exactly, possible only when q*xi is an integer.
        if let Some(v) = x.exact_value() {
            let d = v.denom();
            let q0 = qa.div_ceil(d) * d;
            if q0 <= qb {
                let p = (&q0 / d) * v.numer() - 1u32;
                best = keep_smaller(best, (q0, p));
            }
        }
    }
    let Some((q, p)) = best else {
        return Ok((None, stats));
    };
    let w = certify_case_ii(x, params, q, p, cert)?;
    Ok((Some(w), stats))
}

fn keep_smaller(cur: Option<(BigInt, BigInt)>, cand: (BigInt, BigInt)) -> Option<(BigInt, BigInt)> {
    match cur {
        Some(c) if c.0 <= cand.0 => Some(c),
        _ => Some(cand),
    }
}

fn certify_case_ii(
    x: &RealOracle,
    params: &LemmaParams,
    q: BigInt,
    p: BigInt,
    cert: &Certifier,
) -> Result<CaseIIWitness> {
    let qr = BigRational::from_integer(q.clone());
    if qr < params.q || qr > &params.c * &params.q {
        return Err(Error::Certificate(format!("q = {q} outside [Q, cQ]")));
    }
    let pr = BigRational::from_integer(p.clone());
    let lo_ok = cert.sign_of_rational_form(x, &qr, &(&pr + &params.eps))? != Ordering::Less;
    let hi_ok = cert.sign_of_rational_form(x, &qr, &(&pr + &params.c_prime * &params.eps))?
        != Ordering::Greater;
    if !(lo_ok && hi_ok) {
        return Err(Error::Certificate(format!(
            "q*xi - p outside [eps, c' eps] for (q, p) = ({q}, {p})"
        )));
    }
    let value = cert.refine(x, &qr, &pr, |e| Some(e.clone()))?;
    Ok(CaseIIWitness { p, q, value })
}

/// Case I search over convergents of `xi` with denominator below `bound_u`.
///
/// The inequality `|xi - v/u| <= C/(uQ)` is `|u xi - v| <= C/Q`, independent
/// of `u`, and the smallest `u` achieving a given `|u xi - v|` bound is always
/// a convergent denominator; so the scan returns the least such `u`.
pub fn find_case_i(
    x: &RealOracle,
    params: &LemmaParams,
    cert: &Certifier,
) -> Result<Option<CaseIWitness>> {
    let bound_u = params.bound_u();
    let tol = params.dist_constant() / &params.q;
    let mut depth = 32;
    let mut seen = 0usize;
    let mut last_u = BigInt::zero();
    loop {
        let cf = expand(x, depth, cert)?;
        let conv = convergents(&cf.quotients);
        for c in &conv[seen..] {
            let u = c.q.clone();
            if BigRational::from_integer(u.clone()) >= bound_u {
                return Ok(None);
            }
            if u == last_u {
                continue;
            }
            last_u = u.clone();
            let v = if u.is_one() {
                cert.nearest_integer(x, &u, 0)
                    .or_else(|_| Ok::<_, Error>(c.p.clone()))?
            } else {
                c.p.clone()
            };
            let ur = BigRational::from_integer(u.clone());
            let vr = BigRational::from_integer(v.clone());
            let above = cert.sign_of_rational_form(x, &ur, &(&vr + &tol))?;
            let below = cert.sign_of_rational_form(x, &ur, &(&vr - &tol))?;
            if above != Ordering::Greater && below != Ordering::Less {
                return certify_case_i(x, params, u, v, cert).map(Some);
            }
        }
        if cf.terminated {
            return Ok(None);
        }
        seen = conv.len();
        depth *= 2;
    }
}

fn certify_case_i(
    x: &RealOracle,
    params: &LemmaParams,
    u: BigInt,
    v: BigInt,
    cert: &Certifier,
) -> Result<CaseIWitness> {
    let bound_u = params.bound_u();
    let bound_dist = params.bound_dist(&u);
    if !u.is_positive() || BigRational::from_integer(u.clone()) >= bound_u {
        return Err(Error::Certificate(format!("u = {u} not below bound_u")));
    }
    if v.is_negative() || v > u || !u.gcd(&v).is_one() {
        return Err(Error::Certificate(format!(
            "(u, v) = ({u}, {v}) not coprime with 0 <= v <= u"
        )));
    }
    let target = BigRational::new(v.clone(), u.clone());
    let above = cert.sign_of_rational_form(x, &BigRational::one(), &(&target + &bound_dist))?;
    let below = cert.sign_of_rational_form(x, &BigRational::one(), &(&target - &bound_dist))?;
    if above == Ordering::Greater || below == Ordering::Less {
        return Err(Error::Certificate(format!(
            "|xi - {v}/{u}| exceeds bound_dist"
        )));
    }
    let distance = cert.refine(x, &BigRational::one(), &target, |e| Some(e.abs()))?;
    Ok(CaseIWitness {
        u,
        v,
        bound_u,
        bound_dist,
        distance,
    })
}

/// Case II is tried first; case I only when no case II witness exists.
pub fn solve_disjunction(x: &RealOracle, params: &LemmaParams) -> Result<DisjunctionResult> {
    solve_disjunction_with(x, params, &SearchConfig::default(), &Certifier::default())
}

pub fn solve_disjunction_with(
    x: &RealOracle,
    params: &LemmaParams,
    cfg: &SearchConfig,
    cert: &Certifier,
) -> Result<DisjunctionResult> {
    params.validate()?;
    if cert.compare(x, &BigRational::zero())? != Ordering::Greater
        || cert.compare(x, &BigRational::one())? != Ordering::Less
    {
        return Err(Error::pre("need 0 < xi < 1"));
    }
    let (ii, stats) = find_case_ii(x, params, cfg, cert)?;
    if let Some(w) = ii {
        return Ok(DisjunctionResult {
            outcome: Outcome::CaseII(w),
            stats,
        });
    }
    if let Some(w) = find_case_i(x, params, cert)? {
        return Ok(DisjunctionResult {
            outcome: Outcome::CaseI(w),
            stats,
        });
    }
    Err(Error::NeitherCaseCertified)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_rational, ratio};
    use proptest::prelude::*;

    fn o(s: &str) -> RealOracle {
        s.parse().unwrap()
    }

    fn r(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn pair(h: Option<(BigInt, BigInt)>) -> Option<(i64, i64)> {
        h.map(|(q, p)| (i64::try_from(q).unwrap(), i64::try_from(p).unwrap()))
    }

    #[test]
    fn hit_examples() {
        let x = o("affine:1,-1:const:sqrt2");
        assert_eq!(
            pair(find_fractional_hit(&x, &r("10"), &r("15"), &r("0.10"), &r("0.19")).unwrap()),
            Some((10, 4))
        );
        let h = o("rat:1/2");
        assert_eq!(
            pair(find_fractional_hit(&h, &r("2"), &r("4"), &r("0.1"), &r("0.4")).unwrap()),
            None
        );
        let g = o("affine:1,-1:const:golden");
        assert_eq!(
            pair(find_fractional_hit(&g, &r("5"), &r("8"), &r("0.05"), &r("0.10")).unwrap()),
            Some((5, 3))
        );
        assert!(find_fractional_hit(&g, &r("5"), &r("8"), &r("0"), &r("0.10")).is_err());
        assert!(find_fractional_hit(&g, &r("8"), &r("5"), &r("0.1"), &r("0.2")).is_err());
    }

    #[test]
    fn budget_enforced() {
        let g = o("affine:1,-1:const:golden");
        let cfg = SearchConfig {
            budget: 10,
            structured: false,
            force_structured: false,
        };
        let res = find_fractional_hit_with(
            &g,
            &r("1"),
            &r("100"),
            &r("0.5"),
            &r("0.51"),
            &cfg,
            &Certifier::default(),
        );
        assert!(matches!(res, Err(Error::RangeTooLarge { .. })));
    }

    #[test]
    fn lemma_case_ii_example() {
        let x = o("affine:1,-1:const:sqrt2");
        let p = LemmaParams::new(r("3/2"), r("19/10"), r("1/10"), r("10")).unwrap();
        let res = solve_disjunction(&x, &p).unwrap();
        let Outcome::CaseII(w) = &res.outcome else {
            panic!("expected case II")
        };
        assert_eq!(
            (w.q.clone(), w.p.clone()),
            (BigInt::from(10), BigInt::from(4))
        );
        assert!(w.value.lo >= r("1/10") && w.value.hi <= r("19/100"));
        assert_eq!(res.to_json(&p)["case"], "II");
    }

    #[test]
    fn lemma_near_third() {
        let x = o("cf:[0;3,1000000]");
        let p = LemmaParams::new(r("3/2"), r("19/10"), r("1/2"), r("1000000")).unwrap();
        assert_eq!(p.bound_u(), ratio(45, 1));
        // Case I holds with (3, 1) ...
        let w = find_case_i(&x, &p, &Certifier::default()).unwrap().unwrap();
        assert_eq!(
            (w.u.clone(), w.v.clone()),
            (BigInt::from(3), BigInt::from(1))
        );
        assert!(w.distance.hi <= w.bound_dist);
        // ... but case II holds as well and is searched first.
        let res = solve_disjunction(&x, &p).unwrap();
        let Outcome::CaseII(w) = res.outcome else {
            panic!()
        };
        assert_eq!(w.q, BigInt::from(1_000_001));
        assert_eq!(w.p, BigInt::from(333_333));
    }

    #[test]
    fn case_i_only() {
        // xi = 1/3 exactly: q*xi - p lies in {0, 1/3, 2/3}; window [0.4, 0.6] is never hit.
        let x = o("rat:1/3");
        let p = LemmaParams::new(r("3/2"), r("3/2") + r("1/10"), r("2/5"), r("1000")).unwrap();
        let res = solve_disjunction(&x, &p).unwrap();
        let Outcome::CaseI(w) = res.outcome else {
            panic!()
        };
        assert_eq!((w.u, w.v), (BigInt::from(3), BigInt::from(1)));
    }

    #[test]
    fn preconditions() {
        let bad = [
            ("1", "3/2", "1/2", "10"),
            ("3/2", "3/2", "1/2", "10"),
            ("3/2", "2", "1/2", "10"),
            ("3/2", "19/10", "1", "10"),
            ("3/2", "19/10", "1/2", "1"),
        ];
        for (c, cp, e, q) in bad {
            assert!(matches!(
                LemmaParams::new(r(c), r(cp), r(e), r(q)),
                Err(Error::Precondition(_))
            ));
        }
        let p = LemmaParams::new(r("3/2"), r("19/10"), r("1/10"), r("10")).unwrap();
        assert!(matches!(
            solve_disjunction(&o("const:sqrt2"), &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn wide_window_wraps() {
        // c' eps > 1: q xi - p may exceed 1.
        let x = o("affine:1,-1:const:sqrt2");
        let p = LemmaParams::new(r("3/2"), r("19/10"), r("9/10"), r("10")).unwrap();
        let res = solve_disjunction(&x, &p).unwrap();
        let Outcome::CaseII(w) = res.outcome else {
            panic!()
        };
        assert!(w.value.lo >= r("9/10") && w.value.hi <= r("171/100"));
    }

    #[test]
    fn structured_agrees_on_large_range() {
        let x = o("affine:1,-1:const:e");
        let cert = Certifier::default();
        let forced = SearchConfig {
            force_structured: true,
            ..Default::default()
        };
        let (a, _) = find_fractional_hit_with(
            &x,
            &r("1000"),
            &r("300000"),
            &r("0.123456"),
            &r("0.1234567"),
            &SearchConfig::default(),
            &cert,
        )
        .unwrap();
        let (b, s) = find_fractional_hit_with(
            &x,
            &r("1000"),
            &r("300000"),
            &r("0.123456"),
            &r("0.1234567"),
            &forced,
            &cert,
        )
        .unwrap();
        assert!(s.structured);
        assert_eq!(a, b);
        assert!(a.is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn structured_matches_enumeration(
            qs in proptest::collection::vec(1i64..9, 8..20),
            qa in 1i64..5000, len in 1i64..3000, tl in 1i64..900, tw in 1i64..100,
        ) {
            let spec = format!("cf:[0;{}]+periodic:[1,2]", qs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","));
            let x = o(&spec);
            let cert = Certifier::default();
            let t_lo = ratio(tl, 1000);
            let t_hi = ratio(tl + tw, 1000);
            let forced = SearchConfig { force_structured: true, ..Default::default() };
            let q_lo = ratio(qa, 1);
            let q_hi = ratio(qa + len, 1);
            let (a, _) = find_fractional_hit_with(&x, &q_lo, &q_hi, &t_lo, &t_hi, &SearchConfig::default(), &cert).unwrap();
            let (b, _) = find_fractional_hit_with(&x, &q_lo, &q_hi, &t_lo, &t_hi, &forced, &cert).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
