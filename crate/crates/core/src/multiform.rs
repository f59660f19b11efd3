//! Linear forms in several reals, simultaneous approximation witnesses and
//! empirical decay exponents.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::certify::Certifier;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::log::{ln, ln_approx, ln_int};
use crate::oracle::RealOracle;
use crate::rational::{
    dyadic_floor, floor, fmt_rational, magnitude_bits, pow2, to_decimal_floor, to_f64,
};
use crate::seq::{fit_slope, ln_lcm_table, Normalization};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub coeffs: Vec<BigInt>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::pre("a linear form needs at least 2 coefficients"));
        }
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::pre("linear form is identically zero"));
        }
        Ok(LinearForm { coeffs })
    }

    pub fn from_i64(c: &[i64]) -> Result<Self> {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Index of the last coordinate.
    pub fn r(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn height(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct PointVec {
    pub coords: Vec<RealOracle>,
    /// Declared dimension of the rational span, minus one.
    pub s_hint: Option<usize>,
}

impl PointVec {
    pub fn new(coords: Vec<RealOracle>, s_hint: Option<usize>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::pre("a point needs at least 2 coordinates"));
        }
        if let Some(s) = s_hint {
            if s < 1 || s > coords.len() - 1 {
                return Err(Error::pre(format!(
                    "s_hint must lie in 1..={}",
                    coords.len() - 1
                )));
            }
        }
        Ok(PointVec { coords, s_hint })
    }

    /// Parses oracle specs, one per coordinate.
    pub fn parse(specs: &[&str], s_hint: Option<usize>) -> Result<Self> {
        Self::new(
            specs.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            s_hint,
        )
    }

    pub fn r(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn s(&self) -> usize {
        self.s_hint.unwrap_or(self.r())
    }

    /// Moves the first coordinate that certifiably differs from zero to the
    /// front. Returns the reordered point and `perm`, where new index `i`
    /// holds old coordinate `perm[i]`.
    pub fn renumbered(&self, cert: &Certifier) -> Result<(PointVec, Vec<usize>)> {
        for (i, c) in self.coords.iter().enumerate() {
            match cert.compare(c, &BigRational::zero()) {
                Ok(Ordering::Equal) => continue,
                Ok(_) => {
                    let mut perm: Vec<usize> = (0..self.coords.len()).collect();
                    perm.remove(i);
                    perm.insert(0, i);
                    let coords = perm.iter().map(|&j| self.coords[j].clone()).collect();
                    return Ok((
                        PointVec {
                            coords,
                            s_hint: self.s_hint,
                        },
                        perm,
                    ));
                }
                Err(Error::Inconclusive { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Degenerate(
            "no coordinate is certifiably nonzero".into(),
        ))
    }
}

/// Enclosure of `L(xi)` with width at most `2^-k`.
pub fn evaluate_form(form: &LinearForm, point: &PointVec, k: u64) -> Result<Enclosure> {
    if form.coeffs.len() != point.coords.len() {
        return Err(Error::pre(format!(
            "form has {} coefficients, point has {} coordinates",
            form.coeffs.len(),
            point.coords.len()
        )));
    }
    let spread = 64 - (form.coeffs.len() as u64).leading_zeros() as u64 + 1;
    let mut acc = Enclosure::exact(BigRational::zero());
    for (l, x) in form.coeffs.iter().zip(&point.coords) {
        if l.is_zero() {
            continue;
        }
        let term = match x.exact_value() {
            Some(v) => Enclosure::exact(v * BigRational::from_integer(l.clone())),
            None => {
                let lr = BigRational::from_integer(l.clone());
                x.enclose(k + spread + magnitude_bits(&lr) + 1)?
                    .scale_int(l)
            }
        };
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Enclosure of `L(xi)` with relative width at most `2^-64`.
pub fn form_value(
    form: &LinearForm,
    point: &PointVec,
    index: u64,
    cert: &Certifier,
) -> Result<Enclosure> {
    if point.coords.iter().all(|c| c.exact_value().is_some()) {
        let e = evaluate_form(form, point, 1)?;
        if e.lo.is_zero() {
            return Err(Error::ZeroFormValue { index });
        }
        return Ok(e);
    }
    let mut k = cert.start_bits;
    loop {
        let e = evaluate_form(form, point, k)?;
        let mut next = k * 2;
        if e.excludes_zero() {
            let mag = e.lo.abs().min(e.hi.abs());
            let w = e.width();
            if &w * BigRational::from_integer(pow2(64)) <= mag {
                return Ok(e);
            }
            let deficit = (ln_approx(&w) - ln_approx(&mag)) / std::f64::consts::LN_2;
            next = k + deficit.max(0.0) as u64 + 68;
        }
        if k >= cert.cap_bits {
            return Err(Error::Inconclusive { cap: cert.cap_bits });
        }
        k = next.min(cert.cap_bits);
    }
}

/// `num / den` for a certified nonzero `den`.
struct Ratio<'a> {
    num: &'a RealOracle,
    den: &'a RealOracle,
    exact: Option<BigRational>,
    /// `floor(frac(ratio) * 2^64)`, for fast screening.
    frac64: u64,
}

impl<'a> Ratio<'a> {
    fn new(num: &'a RealOracle, den: &'a RealOracle) -> Result<Self> {
        let exact = match (num.exact_value(), den.exact_value()) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        };
        let mut r = Ratio {
            num,
            den,
            exact,
            frac64: 0,
        };
        let e = r.enclose(96)?;
        let m = e.mid();
        let f = (&m - BigRational::from_integer(floor(&m))) * BigRational::from_integer(pow2(64));
        r.frac64 = floor(&f).to_u64().unwrap_or(u64::MAX);
        Ok(r)
    }

    fn enclose(&self, k: u64) -> Result<Enclosure> {
        if let Some(v) = &self.exact {
            return Ok(Enclosure::exact(v.clone()));
        }
        let mut p = k + 8;
        loop {
            let d = self.den.enclose(p)?;
            if d.excludes_zero() {
                let e = self.num.enclose(p)?.div(&d)?;
                if e.width_within(k) {
                    return Ok(e);
                }
            }
            if p > (1 << 22) {
                return Err(Error::Inconclusive { cap: p });
            }
            p *= 2;
        }
    }

    /// Enclosures of `q*ratio - p` at doubling precision until `decide` answers.
    fn refine<T>(
        &self,
        q: &BigInt,
        p: &BigInt,
        cert: &Certifier,
        mut decide: impl FnMut(&Enclosure) -> Option<T>,
    ) -> Result<T> {
        let qr = BigRational::from_integer(q.clone());
        let pr = BigRational::from_integer(p.clone());
        if let Some(v) = &self.exact {
            let e = Enclosure::exact(&qr * v - pr);
            return decide(&e).ok_or_else(|| Error::Certificate("undecidable exact value".into()));
        }
        let extra = magnitude_bits(&qr) + 1;
        let mut k = cert.start_bits;
        loop {
            let e = self.enclose(k + extra)?.scale(&qr).shift(&-&pr);
            if let Some(t) = decide(&e) {
                return Ok(t);
            }
            if k >= cert.cap_bits {
                return Err(Error::Inconclusive { cap: cert.cap_bits });
            }
            k = (k * 2).min(cert.cap_bits);
        }
    }

    fn nearest(&self, q: &BigInt, cert: &Certifier) -> Result<BigInt> {
        let half = BigRational::new(1.into(), 2.into());
        self.refine(q, &BigInt::zero(), cert, |e| {
            let a = floor(&(&e.lo + &half));
            (a == floor(&(&e.hi + &half))).then_some(a)
        })
    }

    /// Enclosure of `|q*ratio - p|`, relative width `2^-40` unless exactly zero.
    fn distance(&self, q: &BigInt, p: &BigInt, cert: &Certifier) -> Result<Enclosure> {
        let tol = BigRational::new(1.into(), pow2(40));
        self.refine(q, p, cert, |e| {
            if e.is_exact() {
                return Some(e.abs());
            }
            if e.excludes_zero() {
                let mag = e.lo.abs().min(e.hi.abs());
                if e.width() <= &tol * mag {
                    return Some(e.abs());
                }
            }
            None
        })
    }

    /// Screening value of `||q*ratio||`.
    fn approx_dist(&self, q: u64) -> f64 {
        let x = self.frac64.wrapping_mul(q);
        let d = x.min(x.wrapping_neg());
        d as f64 / 18446744073709551616.0
    }
}

fn ratios<'a>(point: &'a PointVec) -> Result<Vec<Ratio<'a>>> {
    point.coords[1..]
        .iter()
        .map(|c| Ratio::new(c, &point.coords[0]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Omega {
    Finite(BigRational),
    /// Every `q0*xi_j/xi_0` is an integer.
    Infinite,
}

impl Omega {
    pub fn to_json(&self) -> Value {
        match self {
            Omega::Finite(w) => json!(to_decimal_floor(w, 9)),
            Omega::Infinite => json!("infinite"),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Omega::Finite(w) => to_f64(w),
            Omega::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for Omega {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(match (self, o) {
            (Omega::Infinite, Omega::Infinite) => Ordering::Equal,
            (Omega::Infinite, _) => Ordering::Greater,
            (_, Omega::Infinite) => Ordering::Less,
            (Omega::Finite(a), Omega::Finite(b)) => a.cmp(b),
        })
    }
}

/// `q = (q0, ..., q_r)` with `|q0 xi_j/xi_0 - q_j| <= q0^(-omega)` for every `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimultaneousWitness {
    pub q: Vec<BigInt>,
    pub omega: Omega,
}

impl SimultaneousWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "omega": self.omega.to_json(),
        })
    }

    /// Exact check against a point whose first coordinate is nonzero.
    pub fn verify(&self, point: &PointVec, cert: &Certifier) -> Result<bool> {
        if self.q.len() != point.coords.len() || !self.q[0].is_positive() {
            return Ok(false);
        }
        let rs = ratios(point)?;
        for (j, r) in rs.iter().enumerate() {
            let qj = &self.q[j + 1];
            let ok = match &self.omega {
                Omega::Infinite => r.refine(&self.q[0], qj, cert, |e| {
                    if e.is_exact() {
                        Some(e.lo.is_zero())
                    } else {
                        e.excludes_zero().then_some(false)
                    }
                })?,
                Omega::Finite(w) => {
                    // -log(dist) >= omega * log(q0)
                    let lq = ln_int(&self.q[0], 96);
                    let (need_lo, need_hi) = if w.is_negative() {
                        (w * &lq.hi, w * &lq.lo)
                    } else {
                        (w * &lq.lo, w * &lq.hi)
                    };
                    let mut failure = None;
                    let r = r.refine(&self.q[0], qj, cert, |e| {
                        let d = e.abs();
                        if d.hi.is_zero() {
                            return Some(true);
                        }
                        let at_least = match ln(&d.hi, 96) {
                            Ok(l) => -l.hi,
                            Err(err) => {
                                failure = Some(err);
                                return Some(false);
                            }
                        };
                        if at_least >= need_hi {
                            return Some(true);
                        }
                        if d.lo.is_positive() {
                            let at_most = -ln(&d.lo, 96).ok()?.lo;
                            if at_most < need_lo {
                                return Some(false);
                            }
                        }
                        None
                    })?;
                    if let Some(err) = failure {
                        return Err(err);
                    }
                    r
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DirichletMode {
    /// Smallest `q0` meeting the bound.
    #[default]
    Direct,
    /// Box principle over the points `q0 * xi`, `q0 = 0..=Q^s`.
    Pigeonhole,
}

#[derive(Clone, Debug)]
pub struct DirichletResult {
    pub witness: SimultaneousWitness,
    pub permutation: Vec<usize>,
    pub s_used: usize,
    pub s_from_hint: bool,
    /// Enclosures of `|q0 xi_j/xi_0 - q_j|`.
    pub distances: Vec<Enclosure>,
}

impl DirichletResult {
    pub fn to_json(&self) -> Value {
        json!({
            "witness": self.witness.to_json(),
            "permutation": self.permutation,
            "s": self.s_used,
            "s_source": if self.s_from_hint { "hint" } else { "assumed" },
            "distances": self.distances.iter().map(|d| d.round_out(64).to_json()).collect::<Vec<_>>(),
        })
    }
}

const DIRICHLET_BUDGET: u64 = 1 << 32;

/// `q0 <= Q^s` with `||q0 xi_j/xi_0|| <= 1/Q` for `j = 1..=s`; coordinates past
/// `s` get their nearest integers.
pub fn dirichlet_witness(
    point: &PointVec,
    big_q: u64,
    mode: DirichletMode,
    cert: &Certifier,
) -> Result<DirichletResult> {
    if big_q < 1 {
        return Err(Error::pre("Q must be positive"));
    }
    let (pt, perm) = point.renumbered(cert)?;
    let s = pt.s();
    let limit = (big_q as u128)
        .checked_pow(s as u32)
        .filter(|&l| l <= DIRICHLET_BUDGET as u128);
    let Some(limit) = limit else {
        return Err(Error::RangeTooLarge {
            len: format!("{big_q}^{s}"),
            budget: DIRICHLET_BUDGET,
        });
    };
    let limit = limit as u64;
    let rs = ratios(&pt)?;
    let inv_q = BigRational::new(1.into(), big_q.into());
    let slack = 1e-9 + 1.0 / big_q as f64;
    let meets = |q0: u64| -> Result<bool> {
        let q = BigInt::from(q0);
        for r in &rs[..s] {
            let p = r.nearest(&q, cert)?;
            let ok = r.refine(&q, &p, cert, |e| {
                let d = e.abs();
                if d.hi <= inv_q {
                    Some(true)
                } else if d.lo > inv_q {
                    Some(false)
                } else {
                    None
                }
            })?;
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let q0 = match mode {
        DirichletMode::Direct => {
            let mut found = None;
            for q0 in 1..=limit {
                if rs[..s].iter().all(|r| r.approx_dist(q0) <= slack) && meets(q0)? {
                    found = Some(q0);
                    break;
                }
            }
            found
        }
        DirichletMode::Pigeonhole => pigeonhole(&rs[..s], big_q, limit, cert)?,
    };
    let q0 = q0.ok_or_else(|| Error::Certificate("no Dirichlet witness found below Q^s".into()))?;
    let q = BigInt::from(q0);
    if !meets(q0)? {
        return Err(Error::Certificate(format!(
            "Dirichlet candidate q0 = {q0} fails the bound"
        )));
    }
    let mut qs = vec![q.clone()];
    let mut distances = Vec::new();
    for r in &rs {
        let p = r.nearest(&q, cert)?;
        distances.push(r.distance(&q, &p, cert)?);
        qs.push(p);
    }
    Ok(DirichletResult {
        witness: SimultaneousWitness {
            q: qs,
            omega: Omega::Finite(BigRational::new(1.into(), s.into())),
        },
        permutation: perm,
        s_used: s,
        s_from_hint: point.s_hint.is_some(),
        distances,
    })
}

/// Cells `floor(Q * frac(q0 * ratio_j))`; two equal cells give a witness by subtraction.
fn pigeonhole(rs: &[Ratio], big_q: u64, limit: u64, cert: &Certifier) -> Result<Option<u64>> {
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    for q0 in 0..=limit {
        let mut cell = Vec::with_capacity(rs.len());
        for r in rs {
            let x = r.frac64.wrapping_mul(q0) as u128 * big_q as u128;
            let c = (x >> 64) as u64;
            let rem = x as u64 as u128;
            // Screening error is at most (q0 + 2) units of 2^-64 before scaling by Q.
            let margin = (q0 as u128 + 2) * big_q as u128;
            let c = if rem > margin && (1u128 << 64) - rem > margin {
                c
            } else {
                let q = BigInt::from(q0);
                let bq = BigRational::from_integer(big_q.into());
                r.refine(&q, &BigInt::zero(), cert, |e| {
                    let lo = floor(&e.lo);
                    if lo != floor(&e.hi) {
                        return None;
                    }
                    let flo = (&e.lo - BigRational::from_integer(lo.clone())) * &bq;
                    let fhi = (&e.hi - BigRational::from_integer(lo)) * &bq;
                    let a = floor(&flo);
                    (a == floor(&fhi)).then_some(a)
                })?
                .to_u64()
                .unwrap()
            };
            cell.push(c);
        }
        if let Some(&prev) = seen.get(&cell) {
            return Ok(Some(q0 - prev));
        }
        seen.insert(cell, q0);
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct OmegaReport {
    /// Best certified exponent over `2 <= q0 <= q0_bound`.
    pub omega_best: Omega,
    /// Best certified exponent over the top decade `[q0_bound/10, q0_bound]`.
    pub omega_tail: Option<Omega>,
    pub tail_window: (u64, u64),
    pub records: Vec<SimultaneousWitness>,
    pub tail_witness: Option<SimultaneousWitness>,
    pub permutation: Vec<usize>,
}

impl OmegaReport {
    pub fn to_json(&self) -> Value {
        json!({
            "omega_best": self.omega_best.to_json(),
            "omega_tail": self.omega_tail.as_ref().map(Omega::to_json),
            "tail_window": [self.tail_window.0, self.tail_window.1],
            "records": self.records.iter().map(SimultaneousWitness::to_json).collect::<Vec<_>>(),
            "tail_witness": self.tail_witness.as_ref().map(SimultaneousWitness::to_json),
            "permutation": self.permutation,
        })
    }

    /// The exponent used in consistency checks: the tail value when present.
    pub fn omega_for_checks(&self) -> &Omega {
        self.omega_tail.as_ref().unwrap_or(&self.omega_best)
    }
}

/// Certified witness at `q0` with `omega = -log(max_j dist_j) / log q0`, rounded down.
fn certify_omega(rs: &[Ratio], q0: u64, cert: &Certifier) -> Result<SimultaneousWitness> {
    let q = BigInt::from(q0);
    let mut qs = vec![q.clone()];
    let mut worst = BigRational::zero();
    for r in rs {
        let p = r.nearest(&q, cert)?;
        let d = r.distance(&q, &p, cert)?;
        worst = worst.max(d.hi);
        qs.push(p);
    }
    if worst.is_zero() {
        return Ok(SimultaneousWitness {
            q: qs,
            omega: Omega::Infinite,
        });
    }
    let num = -ln(&worst, 64)?.hi;
    let lq = ln_int(&q, 64);
    let den = if num.is_negative() { lq.lo } else { lq.hi };
    Ok(SimultaneousWitness {
        q: qs,
        omega: Omega::Finite(dyadic_floor(&(num / den), 32)),
    })
}

pub fn omega0_search(point: &PointVec, q0_bound: u64, cert: &Certifier) -> Result<OmegaReport> {
    if q0_bound < 2 {
        return Err(Error::pre("q0_bound must be at least 2"));
    }
    let (pt, perm) = point.renumbered(cert)?;
    let rs = ratios(&pt)?;
    let tail_window = ((q0_bound / 10).max(2), q0_bound);

    if rs.iter().all(|r| r.exact.is_some()) {
        let l = rs.iter().fold(BigInt::one(), |acc, r| {
            acc.lcm(r.exact.as_ref().unwrap().denom())
        });
        if l <= BigInt::from(q0_bound) {
            let w = certify_omega(&rs, l.to_u64().unwrap().max(1), cert)?;
            return Ok(OmegaReport {
                omega_best: Omega::Infinite,
                omega_tail: Some(Omega::Infinite),
                tail_window,
                records: vec![w.clone()],
                tail_witness: Some(w),
                permutation: perm,
            });
        }
    }

    let screen: Vec<f64> = (2..=q0_bound)
        .into_par_iter()
        .map(|q0| {
            let d = rs.iter().map(|r| r.approx_dist(q0)).fold(0.0, f64::max);
            if d == 0.0 {
                f64::INFINITY
            } else {
                -d.ln() / (q0 as f64).ln()
            }
        })
        .collect();
    let mut records = Vec::new();
    let mut best = Omega::Finite(BigRational::zero());
    let mut running = f64::NEG_INFINITY;
    for (i, &w) in screen.iter().enumerate() {
        if w > running {
            running = w;
            let wit = certify_omega(&rs, i as u64 + 2, cert)?;
            if wit.omega > best {
                best = wit.omega.clone();
            }
            records.push(wit);
        }
    }
    let (lo, hi) = tail_window;
    let mut arg = lo;
    for q0 in lo..=hi {
        if screen[(q0 - 2) as usize] > screen[(arg - 2) as usize] {
            arg = q0;
        }
    }
    let tail = certify_omega(&rs, arg, cert)?;
    Ok(OmegaReport {
        omega_best: best,
        omega_tail: Some(tail.omega.clone()),
        tail_window,
        records,
        tail_witness: Some(tail),
        permutation: perm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    User,
    Apery2,
    Apery3,
    Constructed,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::User => "user",
            Provenance::Apery2 => "apery2",
            Provenance::Apery3 => "apery3",
            Provenance::Constructed => "constructed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSequence {
    pub forms: Vec<(u64, LinearForm)>,
    pub provenance: Provenance,
}

impl FormSequence {
    pub fn new(mut forms: Vec<(u64, LinearForm)>, provenance: Provenance) -> Self {
        forms.sort_by_key(|f| f.0);
        FormSequence { forms, provenance }
    }

    /// Forms `(-v_n, u_n)` on `(1, xi)`.
    pub fn from_pairs(pairs: &[(u64, BigInt, BigInt)], provenance: Provenance) -> Result<Self> {
        let forms = pairs
            .iter()
            .map(|(n, u, v)| Ok((*n, LinearForm::new(vec![-v, u.clone()])?)))
            .collect::<Result<_>>()?;
        Ok(Self::new(forms, provenance))
    }

    /// `(n, l_1, -l_0)` for two-coefficient forms.
    pub fn to_pairs(&self) -> Result<Vec<(u64, BigInt, BigInt)>> {
        self.forms
            .iter()
            .map(|(n, f)| {
                if f.coeffs.len() != 2 {
                    return Err(Error::pre(
                        "only two-coefficient forms convert to (u, v) pairs",
                    ));
                }
                Ok((*n, f.coeffs[1].clone(), -&f.coeffs[0]))
            })
            .collect()
    }

    /// Apéry forms carry a `d_n^s` factor that fits should remove.
    pub fn default_normalization(&self) -> Normalization {
        match self.provenance {
            Provenance::Apery2 => Normalization::LcmPower(2),
            Provenance::Apery3 => Normalization::LcmPower(3),
            _ => Normalization::None,
        }
    }

    pub fn window(&self, window: Option<(u64, u64)>) -> Vec<&(u64, LinearForm)> {
        self.forms
            .iter()
            .filter(|(n, _)| window.map_or(true, |(a, b)| *n >= a && *n <= b))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TauPoint {
    pub n: u64,
    pub height: BigInt,
    pub value: Enclosure,
    pub ln_abs: f64,
    pub ln_height: f64,
    /// `-log|L_n| / log H_n`, rounded down.
    pub tau_lower: BigRational,
}

#[derive(Clone, Debug)]
pub struct TauReport {
    pub points: Vec<TauPoint>,
    /// Smallest pointwise exponent, rounded down.
    pub tau_hat: BigRational,
    /// `-log(max |L_{n+1}|/|L_n|) / log(max H_{n+1}/H_n)` over consecutive indices, rounded down.
    pub tau_rate: Option<BigRational>,
    /// Ratio of fitted log-slopes of `|L_n|` and `H_n`.
    pub tau_fit: Option<f64>,
    pub decay_ratio_max: Option<f64>,
    /// Largest `|log|L_{n+1}| / log|L_n| - 1|`.
    pub decay_irregularity: Option<f64>,
    pub no_decay: bool,
}

impl TauReport {
    pub fn to_json(&self) -> Value {
        json!({
            "tau_hat": to_decimal_floor(&self.tau_hat, 9),
            "tau_rate": self.tau_rate.as_ref().map(|t| to_decimal_floor(t, 9)),
            "tau_fit": self.tau_fit,
            "decay_ratio_max": self.decay_ratio_max,
            "decay_irregularity": self.decay_irregularity,
            "no_decay": self.no_decay,
            "window": [self.points.first().map(|p| p.n), self.points.last().map(|p| p.n)],
            "count": self.points.len(),
        })
    }
}

fn ln_lower_upper(e: &Enclosure) -> Result<(BigRational, BigRational)> {
    let a = e.abs();
    Ok((ln(&a.lo, 64)?.lo, ln(&a.hi, 64)?.hi))
}

pub fn tau_empirical(
    seq: &FormSequence,
    point: &PointVec,
    window: Option<(u64, u64)>,
    cert: &Certifier,
) -> Result<TauReport> {
    tau_empirical_with(seq, point, window, seq.default_normalization(), cert)
}

/// As [`tau_empirical`], with `d_n^k` removed from both fitted log-slopes and `k` added back.
pub fn tau_empirical_with(
    seq: &FormSequence,
    point: &PointVec,
    window: Option<(u64, u64)>,
    normalization: Normalization,
    cert: &Certifier,
) -> Result<TauReport> {
    let forms = seq.window(window);
    if forms.len() < 2 {
        return Err(Error::pre("need at least 2 forms in the window"));
    }
    if let Some((n, _)) = forms.iter().find(|(_, f)| f.height() < BigInt::from(2)) {
        return Err(Error::pre(format!("height of L_{n} is below 2")));
    }
    let points: Vec<TauPoint> = forms
        .par_iter()
        .map(|(n, f)| {
            let value = form_value(f, point, *n, cert)?;
            let h = f.height();
            let (_, l_hi) = ln_lower_upper(&value)?;
            let lh = ln_int(&h, 64);
            let num = -l_hi;
            let den = if num.is_negative() { &lh.lo } else { &lh.hi };
            let tau_lower = dyadic_floor(&(&num / den), 64);
            Ok(TauPoint {
                n: *n,
                ln_abs: ln_approx(&value.abs().mid()),
                ln_height: lh.to_f64_mid(),
                height: h,
                value,
                tau_lower,
            })
        })
        .collect::<Result<_>>()?;
    let tau_hat = points.iter().map(|p| p.tau_lower.clone()).min().unwrap();

    let mut max_val: Option<BigRational> = None;
    let mut max_h: Option<BigRational> = None;
    let mut ratio_f: Option<f64> = None;
    let mut irregular: Option<f64> = None;
    for w in points.windows(2) {
        if w[1].n != w[0].n + 1 {
            continue;
        }
        let rv = w[1].value.abs().hi.clone() / w[0].value.abs().lo.clone();
        let rh = BigRational::new(w[1].height.clone(), w[0].height.clone());
        max_val = Some(max_val.map_or(rv.clone(), |m| m.max(rv)));
        max_h = Some(max_h.map_or(rh.clone(), |m| m.max(rh)));
        let rf = (w[1].ln_abs - w[0].ln_abs).exp();
        ratio_f = Some(ratio_f.map_or(rf, |m| m.max(rf)));
        if w[0].ln_abs != 0.0 {
            let g = (w[1].ln_abs / w[0].ln_abs - 1.0).abs();
            irregular = Some(irregular.map_or(g, |m| m.max(g)));
        }
    }
    let tau_rate = match (max_val, max_h) {
        (Some(v), Some(h)) if v < BigRational::one() && h > BigRational::one() => {
            let num = -ln(&v, 64)?.hi;
            let den = ln(&h, 64)?.hi;
            Some(dyadic_floor(&(num / den), 64))
        }
        _ => None,
    };

    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let fit_ok = points.len() >= 3 && points.iter().all(|p| p.n >= 1);
    let (tau_fit, slope_l) = if fit_ok {
        let k = match normalization {
            Normalization::None => 0.0,
            Normalization::LcmPower(k) => k as f64,
        };
        let lcm = if k > 0.0 {
            ln_lcm_table(points.last().unwrap().n)
        } else {
            Vec::new()
        };
        let psi = |n: u64| if k > 0.0 { k * lcm[n as usize] } else { 0.0 };
        let yl: Vec<f64> = points.iter().map(|p| p.ln_abs - psi(p.n)).collect();
        let yh: Vec<f64> = points.iter().map(|p| p.ln_height - psi(p.n)).collect();
        match (
            fit_slope(&ns, &yl).map(|a| a + k),
            fit_slope(&ns, &yh).map(|a| a + k),
        ) {
            (Some(a), Some(b)) if b > 0.0 => (Some(-a / b), Some(a)),
            (a, _) => (None, a),
        }
    } else {
        (None, None)
    };
    let first = points.first().unwrap().ln_abs;
    let last = points.last().unwrap().ln_abs;
    let no_decay = match slope_l {
        Some(a) => a >= -1e-12,
        None => last >= first,
    };
    Ok(TauReport {
        points,
        tau_hat,
        tau_rate,
        tau_fit,
        decay_ratio_max: ratio_f,
        decay_irregularity: irregular,
        no_decay,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TauChoice {
    Pointwise,
    Rate,
    #[default]
    Fit,
}

#[derive(Clone, Debug)]
pub struct NesterenkoReport {
    pub tau: TauReport,
    pub choice: TauChoice,
    pub tau_used: Option<f64>,
    /// `tau_used + 1`; absent when the forms do not decay.
    pub dim_lower_bound: Option<f64>,
    pub s_used: usize,
    pub s_from_hint: bool,
    pub omega: Option<Omega>,
    /// `tau_used <= 1/omega + slack`.
    pub tau_omega_consistent: Option<bool>,
    /// `omega >= 1/s - slack`.
    pub omega_s_consistent: Option<bool>,
}

impl NesterenkoReport {
    pub fn to_json(&self) -> Value {
        json!({
            "tau": self.tau.to_json(),
            "estimator": format!("{:?}", self.choice).to_lowercase(),
            "tau_used": self.tau_used,
            "dim_lower_bound": self.dim_lower_bound,
            "s": self.s_used,
            "s_source": if self.s_from_hint { "hint" } else { "assumed" },
            "omega": self.omega.as_ref().map(Omega::to_json),
            "tau_omega_consistent": self.tau_omega_consistent,
            "omega_s_consistent": self.omega_s_consistent,
        })
    }
}

pub fn nesterenko_report(
    seq: &FormSequence,
    point: &PointVec,
    window: Option<(u64, u64)>,
    omega: Option<&OmegaReport>,
    slack: f64,
    choice: TauChoice,
    cert: &Certifier,
) -> Result<NesterenkoReport> {
    let tau = tau_empirical(seq, point, window, cert)?;
    let tau_used = if tau.no_decay {
        None
    } else {
        match choice {
            TauChoice::Pointwise => Some(to_f64(&tau.tau_hat)),
            TauChoice::Rate => tau.tau_rate.as_ref().map(to_f64),
            TauChoice::Fit => tau.tau_fit,
        }
    };
    let s = point.s();
    let om = omega.map(|o| o.omega_for_checks().clone());
    let tau_omega_consistent = match (&om, tau_used) {
        (Some(w), Some(t)) => Some(t <= 1.0 / w.as_f64() + slack),
        _ => None,
    };
    let omega_s_consistent = om.as_ref().map(|w| w.as_f64() >= 1.0 / s as f64 - slack);
    Ok(NesterenkoReport {
        dim_lower_bound: tau_used.map(|t| t + 1.0),
        tau,
        choice,
        tau_used,
        s_used: s,
        s_from_hint: point.s_hint.is_some(),
        omega: om,
        tau_omega_consistent,
        omega_s_consistent,
    })
}

/// Decimal strings for a form.
pub fn form_json(n: u64, f: &LinearForm) -> Value {
    json!({"n": n, "coeffs": f.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(), "height": f.height().to_string()})
}

pub fn omega_rational(o: &Omega) -> Option<String> {
    match o {
        Omega::Finite(w) => Some(fmt_rational(w)),
        Omega::Infinite => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apery::apery_forms;
    use crate::contfrac::convergents;
    use crate::rational::parse_rational;
    use proptest::prelude::*;

    fn pt(specs: &[&str]) -> PointVec {
        PointVec::parse(specs, None).unwrap()
    }

    fn fib_forms(lo: usize, hi: usize) -> FormSequence {
        let c = convergents(&vec![BigInt::one(); hi + 2]);
        let pairs: Vec<_> = (lo..=hi)
            .map(|k| (k as u64, c[k].q.clone(), c[k].p.clone()))
            .collect();
        FormSequence::from_pairs(&pairs, Provenance::Constructed).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let z = evaluate_form(
            &LinearForm::from_i64(&[-6, 5]).unwrap(),
            &pt(&["rat:1", "const:zeta3"]),
            80,
        )
        .unwrap();
        assert!(z.width_within(80));
        assert!((z.to_f64_mid() - 0.0102845157979714).abs() < 1e-15);
        let e = evaluate_form(
            &LinearForm::from_i64(&[1, -1]).unwrap(),
            &pt(&["rat:1", "affine:1,0:rat:1"]),
            10,
        )
        .unwrap();
        assert_eq!(e, Enclosure::exact(BigRational::zero()));
        let s = evaluate_form(
            &LinearForm::from_i64(&[0, 1]).unwrap(),
            &pt(&["rat:1", "const:sqrt2"]),
            64,
        )
        .unwrap();
        let r = parse_rational("1.41421356237309504880168872").unwrap();
        let tol = parse_rational("1/1000000000000000000000").unwrap();
        assert!(s.intersects(&Enclosure::new(&r - &tol, &r + &tol)));
        assert!(evaluate_form(
            &LinearForm::from_i64(&[1, 2, 3]).unwrap(),
            &pt(&["rat:1", "const:e"]),
            10
        )
        .is_err());
        assert!(LinearForm::from_i64(&[0, 0]).is_err());
    }

    #[test]
    fn dirichlet_examples() {
        let c = Certifier::default();
        for mode in [DirichletMode::Direct, DirichletMode::Pigeonhole] {
            let w = dirichlet_witness(&pt(&["rat:1", "const:golden"]), 3, mode, &c).unwrap();
            assert!(w
                .witness
                .verify(&pt(&["rat:1", "const:golden"]), &c)
                .unwrap());
            if mode == DirichletMode::Direct {
                assert_eq!(w.witness.q, [BigInt::from(2), BigInt::from(3)]);
            }
        }
        let p = pt(&["rat:1", "const:sqrt2", "const:sqrt3"]);
        let w = dirichlet_witness(&p, 10, DirichletMode::Direct, &c).unwrap();
        assert!(w.witness.q[0] <= BigInt::from(100));
        assert!(w
            .distances
            .iter()
            .all(|d| d.hi <= BigRational::new(1.into(), 10.into())));
        let h =
            dirichlet_witness(&pt(&["rat:1", "rat:1/2"]), 5, DirichletMode::Direct, &c).unwrap();
        assert_eq!(h.witness.q, [BigInt::from(2), BigInt::from(1)]);
        assert!(h.distances[0].is_exact() && h.distances[0].lo.is_zero());
    }

    #[test]
    fn renumbering() {
        let c = Certifier::default();
        let p = pt(&["rat:0", "const:sqrt2", "rat:1"]);
        let w = dirichlet_witness(&p, 4, DirichletMode::Direct, &c).unwrap();
        assert_eq!(w.permutation, [1, 0, 2]);
        assert!(matches!(
            pt(&["rat:0", "rat:0"]).renumbered(&c),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn omega_examples() {
        let c = Certifier::default();
        let g = omega0_search(&pt(&["rat:1", "const:golden"]), 100_000, &c).unwrap();
        let tail = g.omega_tail.clone().unwrap().as_f64();
        assert!(tail > 0.98 && tail < 1.1, "{tail}");
        for r in &g.records {
            assert!(r.verify(&pt(&["rat:1", "const:golden"]), &c).unwrap());
        }
        let p = pt(&["rat:1", "const:sqrt2", "const:sqrt3"]);
        let o = omega0_search(&p, 100_000, &c).unwrap();
        assert!(o.omega_best.as_f64() >= 0.45);
        let small = omega0_search(&p, 1000, &c).unwrap();
        assert!(small.omega_best <= o.omega_best);
        let h = omega0_search(&pt(&["rat:1", "rat:1/2"]), 10, &c).unwrap();
        assert_eq!(h.omega_best, Omega::Infinite);
        assert_eq!(h.records[0].q, [BigInt::from(2), BigInt::from(1)]);
    }

    #[test]
    fn tau_fibonacci() {
        let c = Certifier::default();
        let t = tau_empirical(
            &fib_forms(20, 40),
            &pt(&["rat:1", "const:golden"]),
            None,
            &c,
        )
        .unwrap();
        let hat = to_f64(&t.tau_hat);
        assert!(hat > 1.0 && hat < 1.06, "{hat}");
        let rate = to_f64(t.tau_rate.as_ref().unwrap());
        assert!(rate > 0.95 && rate <= 1.0, "{rate}");
        assert!(!t.no_decay);
        let r = nesterenko_report(
            &fib_forms(20, 40),
            &pt(&["rat:1", "const:golden"]),
            None,
            None,
            0.1,
            TauChoice::Fit,
            &c,
        )
        .unwrap();
        assert!((r.dim_lower_bound.unwrap() - 2.0).abs() < 0.01);
    }

    #[test]
    fn tau_no_decay() {
        // 2*l0 + 3*l1 = 1 gives L = 1/2 on (1, 3/2).
        let forms = (1..=10u64)
            .map(|k| {
                (
                    k,
                    LinearForm::new(vec![
                        BigInt::from(-3 * k as i64 - 1),
                        BigInt::from(2 * k + 1),
                    ])
                    .unwrap(),
                )
            })
            .collect();
        let seq = FormSequence::new(forms, Provenance::User);
        let t = tau_empirical(
            &seq,
            &pt(&["rat:1", "rat:3/2"]),
            None,
            &Certifier::default(),
        )
        .unwrap();
        assert!(t.no_decay);
        assert!(to_f64(&t.tau_hat) < 0.3);
        let r = nesterenko_report(
            &seq,
            &pt(&["rat:1", "rat:3/2"]),
            None,
            None,
            0.1,
            TauChoice::Fit,
            &Certifier::default(),
        )
        .unwrap();
        assert!(r.dim_lower_bound.is_none());
    }

    #[test]
    fn zero_form_value() {
        let forms = (1..=4u64)
            .map(|k| {
                (
                    k,
                    LinearForm::new(vec![BigInt::from(-2 * k as i64), BigInt::from(k)]).unwrap(),
                )
            })
            .collect();
        let seq = FormSequence::new(forms, Provenance::User);
        assert!(matches!(
            tau_empirical(&seq, &pt(&["rat:1", "rat:2"]), None, &Certifier::default()),
            Err(Error::ZeroFormValue { index: 1 })
        ));
    }

    #[test]
    fn apery_tau() {
        let seq = apery_forms(3, 200).unwrap();
        let t = tau_empirical(
            &seq,
            &pt(&["rat:1", "const:zeta3"]),
            Some((100, 200)),
            &Certifier::default(),
        )
        .unwrap();
        let fit = t.tau_fit.unwrap();
        assert!(fit > 0.075 && fit < 0.085, "{fit}");
        let one = apery_forms(3, 1).unwrap();
        let v = form_value(
            &one.forms[1].1,
            &pt(&["rat:1", "const:zeta3"]),
            1,
            &Certifier::default(),
        )
        .unwrap();
        assert!((v.to_f64_mid() - 0.0205690315959428).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn dirichlet_always_certified(a in 1u32..6, b in 1u32..6, q in 2u64..40, two in any::<bool>()) {
            let c = Certifier::default();
            let x = format!("cf:[0;{a},{b}]+periodic:[{b},{a},1]");
            let p = if two {
                PointVec::parse(&["rat:1", &x, "const:sqrt3"], None).unwrap()
            } else {
                PointVec::parse(&["rat:1", &x], None).unwrap()
            };
            let mode = if q % 2 == 0 { DirichletMode::Direct } else { DirichletMode::Pigeonhole };
            let bq = if two { q.min(12) } else { q };
            let w = dirichlet_witness(&p, bq, mode, &c).unwrap();
            prop_assert!(w.witness.verify(&p, &c).unwrap());
            prop_assert!(w.witness.q[0] <= BigInt::from(bq).pow(p.s() as u32));
            let inv = BigRational::new(1.into(), bq.into());
            prop_assert!(w.distances.iter().all(|d| d.hi <= inv));
        }
    }
}
