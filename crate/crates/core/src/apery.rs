//! Apéry's sequences for `zeta(2)` and `zeta(3)`, scaled to integer linear forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::multiform::{FormSequence, LinearForm, Provenance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AperyRow {
    pub n: u64,
    pub a: BigInt,
    pub b: BigRational,
    /// `lcm(1..n)`.
    pub d: BigInt,
    /// `2 d^3` for `zeta(3)`, `d^2` for `zeta(2)`.
    pub scale: BigInt,
    /// `(-scale*b, scale*a)` on `(1, zeta(s))`.
    pub form: LinearForm,
}

impl AperyRow {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "a": self.a.to_string(),
            "b": crate::rational::fmt_rational(&self.b),
            "d": self.d.to_string(),
            "form": self.form.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

fn check_s(s: u32) -> Result<()> {
    if s == 2 || s == 3 {
        Ok(())
    } else {
        Err(Error::pre(format!("s must be 2 or 3, got {s}")))
    }
}

/// Rows `0..=n_max`. Integrality of the scaled `b_n` is asserted on every row.
pub fn apery_rows(s: u32, n_max: u64) -> Result<Vec<AperyRow>> {
    check_s(s)?;
    let (a0, a1, b0, b1) = if s == 3 { (1, 5, 0, 6) } else { (1, 3, 0, 5) };
    let mut a = vec![
        BigRational::from_integer(a0.into()),
        BigRational::from_integer(a1.into()),
    ];
    let mut b = vec![
        BigRational::from_integer(b0.into()),
        BigRational::from_integer(b1.into()),
    ];
    for n in 1..n_max.max(1) {
        let nn = BigInt::from(n);
        let (p, q, sign, lead) = if s == 3 {
            let p: BigInt = BigInt::from(34) * nn.pow(3)
                + BigInt::from(51) * nn.pow(2)
                + BigInt::from(27) * &nn
                + 5u32;
            (p, nn.pow(3), -1i32, (&nn + 1u32).pow(3))
        } else {
            let p: BigInt = BigInt::from(11) * nn.pow(2) + BigInt::from(11) * &nn + 3u32;
            (p, nn.pow(2), 1i32, (&nn + 1u32).pow(2))
        };
        let n = n as usize;
        let step = |x: &[BigRational]| {
            let t = BigRational::from_integer(p.clone()) * &x[n]
                + BigRational::from_integer(&q * sign) * &x[n - 1];
            t / BigRational::from_integer(lead.clone())
        };
        let an = step(&a);
        let bn = step(&b);
        a.push(an);
        b.push(bn);
    }
    let mut rows = Vec::with_capacity(n_max as usize + 1);
    let mut d = BigInt::one();
    for n in 0..=n_max {
        if n > 0 {
            d = d.lcm(&BigInt::from(n));
        }
        let an = &a[n as usize];
        if !an.is_integer() {
            return Err(Error::Certificate(format!("a_{n} is not an integer")));
        }
        let scale = if s == 3 {
            BigInt::from(2) * d.pow(3)
        } else {
            d.pow(2)
        };
        let sb = BigRational::from_integer(scale.clone()) * &b[n as usize];
        if !sb.is_integer() {
            return Err(Error::Certificate(format!(
                "scaled b_{n} is not an integer"
            )));
        }
        let form = LinearForm::new(vec![-sb.to_integer(), &scale * an.to_integer()])?;
        rows.push(AperyRow {
            n,
            a: an.to_integer(),
            b: b[n as usize].clone(),
            d: d.clone(),
            scale,
            form,
        });
    }
    Ok(rows)
}

pub fn apery_forms(s: u32, n_max: u64) -> Result<FormSequence> {
    if n_max < 1 {
        return Err(Error::pre("n_max must be at least 1"));
    }
    let rows = apery_rows(s, n_max)?;
    let prov = if s == 3 {
        Provenance::Apery3
    } else {
        Provenance::Apery2
    };
    Ok(FormSequence::new(
        rows.into_iter().map(|r| (r.n, r.form)).collect(),
        prov,
    ))
}

/// `sum_k C(n,k)^2 C(n+k,k)^(s-1)`.
pub fn apery_binomial(s: u32, n: u64) -> Result<BigInt> {
    check_s(s)?;
    let mut total = BigInt::zero();
    let mut c_nk = BigInt::one();
    let mut c_npk = BigInt::one();
    for k in 0..=n {
        if k > 0 {
            c_nk = c_nk * (n - k + 1) / k;
            c_npk = c_npk * (n + k) / k;
        }
        total += &c_nk * &c_nk * c_npk.pow(s - 1);
    }
    Ok(total)
}
