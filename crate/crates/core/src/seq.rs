//! Integer sequences `(u_n, v_n)` with `u_n ~ Q_n` and `u_n xi - v_n ~ eps_n`
//! for prescribed rates, plus exponent bounds and rate estimators for any
//! such sequence.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::certify::Certifier;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::farey::{solve_disjunction_with, LemmaParams, Outcome, SearchConfig};
use crate::log::{ln, ln_int, ln_int_approx, log_ratio};
use crate::oracle::RealOracle;
use crate::rational::{
    dyadic_ceil, dyadic_floor, fmt_rational, from_f64, sqrt_bounds, to_decimal_ceil,
    to_decimal_floor, to_f64,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateRow {
    pub n: u64,
    pub q: BigRational,
    pub eps: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RateSpec {
    /// `Q_n = beta^n`, `eps_n = alpha^n`.
    Geometric {
        alpha: BigRational,
        beta: BigRational,
    },
    Table(Vec<RateRow>),
}

impl RateSpec {
    pub fn geometric(alpha: BigRational, beta: BigRational) -> Result<Self> {
        if !(alpha.is_positive() && alpha < BigRational::one() && beta > BigRational::one()) {
            return Err(Error::pre("need 0 < alpha < 1 < beta"));
        }
        Ok(RateSpec::Geometric { alpha, beta })
    }

    /// Rows sorted by `n`, with `Q_n` increasing and `eps_n` decreasing.
    pub fn table(mut rows: Vec<RateRow>) -> Result<Self> {
        rows.sort_by_key(|r| r.n);
        if rows.is_empty() {
            return Err(Error::pre("empty rate table"));
        }
        for w in rows.windows(2) {
            if w[0].n == w[1].n {
                return Err(Error::pre(format!(
                    "duplicate n = {} in rate table",
                    w[0].n
                )));
            }
            if w[1].q <= w[0].q || w[1].eps >= w[0].eps {
                return Err(Error::pre(format!(
                    "rate table must have Q increasing and eps decreasing (n = {})",
                    w[1].n
                )));
            }
        }
        if rows
            .iter()
            .any(|r| !r.q.is_positive() || !r.eps.is_positive())
        {
            return Err(Error::pre("rate table entries must be positive"));
        }
        Ok(RateSpec::Table(rows))
    }

    pub fn at(&self, n: u64) -> Result<(BigRational, BigRational)> {
        match self {
            RateSpec::Geometric { alpha, beta } => {
                let e = i32::try_from(n).map_err(|_| Error::pre("index too large"))?;
                Ok((beta.pow(e), alpha.pow(e)))
            }
            RateSpec::Table(rows) => rows
                .binary_search_by_key(&n, |r| r.n)
                .map(|i| (rows[i].q.clone(), rows[i].eps.clone()))
                .map_err(|_| Error::pre(format!("rate table has no row for n = {n}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EtaSchedule {
    /// `eta_n = scale / ln(n + 3)`, rounded down to a multiple of `2^-40`.
    Log {
        scale: BigRational,
    },
    Table(BTreeMap<u64, BigRational>),
}

impl Default for EtaSchedule {
    fn default() -> Self {
        EtaSchedule::Log {
            scale: BigRational::one(),
        }
    }
}

impl EtaSchedule {
    pub fn scaled(scale: BigRational) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::pre("eta scale must be positive"));
        }
        Ok(EtaSchedule::Log { scale })
    }

    pub fn table(rows: BTreeMap<u64, BigRational>) -> Result<Self> {
        let mut prev: Option<&BigRational> = None;
        for (n, e) in &rows {
            if !e.is_positive() {
                return Err(Error::pre(format!("eta_{n} must be positive")));
            }
            if prev.is_some_and(|p| e > p) {
                return Err(Error::pre(format!("eta must be nonincreasing (n = {n})")));
            }
            prev = Some(e);
        }
        Ok(EtaSchedule::Table(rows))
    }

    pub fn at(&self, n: u64) -> Result<BigRational> {
        match self {
            EtaSchedule::Log { scale } => {
                let l = ln_int(&BigInt::from(n + 3), 96);
                let eta = dyadic_floor(&(scale / l.hi), 40);
                if !eta.is_positive() {
                    return Err(Error::pre(format!("eta_{n} underflows")));
                }
                Ok(eta)
            }
            EtaSchedule::Table(rows) => rows
                .get(&n)
                .cloned()
                .ok_or_else(|| Error::pre(format!("eta table has no row for n = {n}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTaken {
    I,
    II,
}

impl CaseTaken {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTaken::I => "I",
            CaseTaken::II => "II",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxSequenceEntry {
    pub n: u64,
    pub u: BigInt,
    pub v: BigInt,
    /// Enclosure of `u xi - v`.
    pub residual: Enclosure,
    /// `u / Q_n`.
    pub ratio_u: BigRational,
    /// Enclosure of `(u xi - v) / eps_n`.
    pub ratio_res: Enclosure,
    pub case_taken: CaseTaken,
    pub eta: BigRational,
    /// Both ratios lie in their bands `[lambda^(-1/2), lambda^(1/2)]`, `[mu^(-1/2), mu^(1/2)]`.
    pub in_band: bool,
}

impl ApproxSequenceEntry {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "u": self.u.to_string(),
            "v": self.v.to_string(),
            "case": self.case_taken.as_str(),
            "residual": self.residual.round_out(128).to_json(),
            "ratio_u": fmt_rational(&self.ratio_u),
            "ratio_res": self.ratio_res.round_out(64).to_json(),
            "eta": fmt_rational(&self.eta),
            "in_band": self.in_band,
        })
    }
}

/// `ratio_u^2` in `[1/lambda, lambda]` and `ratio_res` within `[mu^(-1/2), mu^(1/2)]`,
/// both decided exactly through squares.
pub fn in_bands(ratio_u: &BigRational, ratio_res: &Enclosure, eta: &BigRational) -> bool {
    let one = BigRational::one();
    let lambda = &one + eta;
    let mu = &one + eta * BigRational::from_integer(2.into());
    let u2 = ratio_u * ratio_u;
    let u_ok = ratio_u.is_positive() && u2 >= lambda.recip() && u2 <= lambda;
    let r_ok = ratio_res.lo.is_positive()
        && &ratio_res.lo * &ratio_res.lo >= mu.recip()
        && &ratio_res.hi * &ratio_res.hi <= mu;
    u_ok && r_ok
}

#[derive(Clone, Debug)]
pub struct BuildConfig {
    /// Allowed excess of `-log eps_n / log Q_n` over `1/(mu_upper - 1)`.
    pub rate_slack: BigRational,
    /// Largest tolerated share of case I entries in the upper half of the range.
    pub case_i_fraction: BigRational,
    pub search: SearchConfig,
    pub cert: Certifier,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            rate_slack: BigRational::new(1.into(), 20.into()),
            case_i_fraction: BigRational::new(1.into(), 5.into()),
            search: SearchConfig::default(),
            cert: Certifier::default(),
        }
    }
}

/// Checks `-log eps_n / log Q_n <= 1/(mu_upper - 1) + slack` on every index.
pub fn check_rates(
    mu_upper: &BigRational,
    rates: &RateSpec,
    range: (u64, u64),
    slack: &BigRational,
) -> Result<()> {
    let one = BigRational::one();
    if mu_upper <= &one {
        return Err(Error::pre("mu_upper must exceed 1"));
    }
    let bound = (mu_upper - &one).recip() + slack;
    for n in range.0..=range.1 {
        let (q, eps) = rates.at(n)?;
        if q <= one || eps >= one || !eps.is_positive() {
            return Err(Error::pre(format!(
                "need Q_n > 1 and 0 < eps_n < 1 (n = {n})"
            )));
        }
        let r = log_ratio(&eps.recip(), &q, 64)?;
        if r.lo > bound {
            return Err(Error::RateViolation {
                n,
                ratio: to_decimal_floor(&r.lo, 6),
                bound: to_decimal_ceil(&bound, 6),
            });
        }
    }
    Ok(())
}

/// Runs the two-case lemma at every `n` with `c = s^2`, `c' = r^2`,
/// `eps = eps_n / r`, `Q = Q_n / s`, where `s <= sqrt(1 + eta_n)` and
/// `r <= sqrt(1 + 2 eta_n)` are rational lower bounds of the square roots.
pub fn build_sequence(
    x: &RealOracle,
    mu_upper: &BigRational,
    rates: &RateSpec,
    range: (u64, u64),
    eta: &EtaSchedule,
    cfg: &BuildConfig,
) -> Result<Vec<ApproxSequenceEntry>> {
    if range.0 > range.1 {
        return Err(Error::pre("empty index range"));
    }
    check_rates(mu_upper, rates, range, &cfg.rate_slack)?;
    let cert = &cfg.cert;
    let m = cert.floor_of(x, &BigRational::one(), &BigRational::zero())?;
    let frac = x.shifted(&-BigRational::from_integer(m.clone()));
    if cert.compare(&frac, &BigRational::zero())? != Ordering::Greater {
        return Err(Error::pre("xi is an integer"));
    }
    let entries: Vec<ApproxSequenceEntry> = (range.0..=range.1)
        .into_par_iter()
        .map(|n| build_entry(x, &frac, &m, rates, eta, n, cfg))
        .collect::<Result<_>>()?;
    let top = &entries[entries.len() / 2..];
    let count = top.iter().filter(|e| e.case_taken == CaseTaken::I).count();
    if BigRational::from_integer(count.into())
        > &cfg.case_i_fraction * BigRational::from_integer(top.len().into())
    {
        return Err(Error::CaseIPersists {
            count,
            total: top.len(),
        });
    }
    Ok(entries)
}

fn build_entry(
    x: &RealOracle,
    frac: &RealOracle,
    m: &BigInt,
    rates: &RateSpec,
    eta: &EtaSchedule,
    n: u64,
    cfg: &BuildConfig,
) -> Result<ApproxSequenceEntry> {
    let one = BigRational::one();
    let (qn, epsn) = rates.at(n)?;
    let eta_n = eta.at(n)?;
    let lambda = &one + &eta_n;
    let mu = &one + &eta_n * BigRational::from_integer(2.into());
    if mu >= BigRational::from_integer(2.into()) {
        return Err(Error::pre(format!("eta_{n} must be below 1/2")));
    }
    let (s_lo, _) = sqrt_bounds(&lambda, 64);
    let (r_lo, _) = sqrt_bounds(&mu, 64);
    let params = LemmaParams::new(&s_lo * &s_lo, &r_lo * &r_lo, &epsn / &r_lo, &qn / &s_lo)?;
    let res = solve_disjunction_with(frac, &params, &cfg.search, &cfg.cert)?;
    let (u, v, case_taken) = match res.outcome {
        Outcome::CaseII(w) => (w.q.clone(), w.p + m * &w.q, CaseTaken::II),
        Outcome::CaseI(w) => (w.u.clone(), w.v + m * &w.u, CaseTaken::I),
    };
    let residual = match cfg.cert.relative(x, &u, &v, 64, n) {
        Ok(e) => e,
        Err(Error::ZeroResidual { .. }) => Enclosure::exact(BigRational::zero()),
        Err(e) => return Err(e),
    };
    let ratio_u = BigRational::from_integer(u.clone()) / &qn;
    let ratio_res = residual.scale(&epsn.recip());
    let in_band = in_bands(&ratio_u, &ratio_res, &eta_n);
    if case_taken == CaseTaken::II && !in_band {
        return Err(Error::Certificate(format!(
            "case II entry at n = {n} outside its bands"
        )));
    }
    Ok(ApproxSequenceEntry {
        n,
        u,
        v,
        residual,
        ratio_u,
        ratio_res,
        case_taken,
        eta: eta_n,
        in_band,
    })
}

/// `1 - log(beta)/log(alpha)`, rounded up; exact when `beta^a = alpha^(-b)`
/// for small integers `a`, `b`.
pub fn lemma1_bound(alpha: &BigRational, beta: &BigRational) -> Result<BigRational> {
    let one = BigRational::one();
    if !(alpha.is_positive() && alpha < &one && beta > &one) {
        return Err(Error::pre("need 0 < alpha < 1 < beta"));
    }
    let y = alpha.recip();
    if let Some(r) = exact_log_ratio(beta, &y) {
        return Ok(one + r);
    }
    let r = log_ratio(beta, &y, 96)?;
    Ok(dyadic_ceil(&(one + r.hi), 64))
}

/// `log x / log y` when it is a rational `b/a` with `a <= 64`.
fn exact_log_ratio(x: &BigRational, y: &BigRational) -> Option<BigRational> {
    let f = crate::log::ln_approx(x) / crate::log::ln_approx(y);
    if !f.is_finite() || f <= 0.0 {
        return None;
    }
    let bits = x
        .numer()
        .bits()
        .max(x.denom().bits())
        .max(y.numer().bits())
        .max(y.denom().bits());
    for a in 1u32..=64 {
        let b = (f * a as f64).round();
        if b < 1.0 || (b - f * a as f64).abs() > 1e-6 || (b as u64) * bits > 1 << 16 {
            continue;
        }
        let b = b as u32;
        if x.pow(a as i32) == y.pow(b as i32) {
            return Some(BigRational::new(b.into(), a.into()));
        }
    }
    None
}

/// Divide residuals and denominators by `d_n^k`, `d_n = lcm(1..n)`, before fitting,
/// and add `k` back to the fitted log-rates (using `log d_n ~ n`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    None,
    LcmPower(u32),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Estimator {
    /// Largest `|r_n|^(1/n)` and `u_n^(1/n)` over the window.
    #[default]
    Root,
    /// Largest consecutive ratios.
    Ratio,
    /// Least-squares fit of `log x_n = A n + B log n + C`.
    Fit,
}

#[derive(Clone, Debug, Default)]
pub struct MeasureOptions {
    pub window: Option<(u64, u64)>,
    pub normalization: Normalization,
    pub estimator: Estimator,
}

#[derive(Clone, Debug)]
pub struct RatePoint {
    pub n: u64,
    pub ln_residual: f64,
    pub ln_u: f64,
    pub tau_lower: BigRational,
}

#[derive(Clone, Debug)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    pub alpha_root: f64,
    pub beta_root: f64,
    pub alpha_ratio: Option<f64>,
    pub beta_ratio: Option<f64>,
    pub alpha_fit: Option<f64>,
    pub beta_fit: Option<f64>,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Smallest `-log|r_n| / log|u_n|` over the window, rounded down.
    pub tau_hat: BigRational,
    pub estimator: Estimator,
    pub normalization: Normalization,
}

impl RateReport {
    pub fn alpha_rational(&self) -> BigRational {
        from_f64(self.alpha_hat)
    }

    pub fn beta_rational(&self) -> BigRational {
        from_f64(self.beta_hat)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "tau_hat": to_decimal_floor(&self.tau_hat, 9),
            "estimator": format!("{:?}", self.estimator).to_lowercase(),
            "normalization": match self.normalization {
                Normalization::None => "none".to_string(),
                Normalization::LcmPower(k) => format!("lcm^{k}"),
            },
            "root": {"alpha": self.alpha_root, "beta": self.beta_root},
            "ratio": {"alpha": self.alpha_ratio, "beta": self.beta_ratio},
            "fit": {"alpha": self.alpha_fit, "beta": self.beta_fit},
            "window": [self.points.first().map(|p| p.n), self.points.last().map(|p| p.n)],
        })
    }
}

/// `ln lcm(1..n)` for `n` in `0..=n_max`.
pub fn ln_lcm_table(n_max: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let mut d = BigInt::one();
    out.push(0.0);
    for n in 1..=n_max {
        d = num_integer::lcm(d, BigInt::from(n));
        out.push(ln_int_approx(&d));
    }
    out
}

/// Least-squares slope `A` of `y = A n + B ln n + C`.
pub(crate) fn fit_slope(ns: &[f64], ys: &[f64]) -> Option<f64> {
    let rows: Vec<[f64; 3]> = ns.iter().map(|&n| [n, n.ln(), 1.0]).collect();
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (r, y) in rows.iter().zip(ys) {
        for i in 0..3 {
            aty[i] += r[i] * y;
            for j in 0..3 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 normal equations.
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&ata[i]);
        m[i][3] = aty[i];
    }
    for c in 0..3 {
        let p = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        m.swap(c, p);
        if m[c][c].abs() < 1e-300 {
            return None;
        }
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                let pivot = m[c];
                for (x, y) in m[r][c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * y;
                }
            }
        }
    }
    Some(m[0][3] / m[0][0])
}

/// Rate estimates for a sequence of `(n, u_n, v_n)`.
pub fn measure_rates(
    entries: &[(u64, BigInt, BigInt)],
    x: &RealOracle,
    opts: &MeasureOptions,
    cert: &Certifier,
) -> Result<RateReport> {
    let rows: Vec<&(u64, BigInt, BigInt)> = entries
        .iter()
        .filter(|(n, _, _)| opts.window.map_or(true, |(a, b)| *n >= a && *n <= b))
        .collect();
    if rows.len() < 3 {
        return Err(Error::pre("need at least 3 entries in the window"));
    }
    if let Some((n, _, _)) = rows.iter().find(|(_, u, _)| u.is_zero()) {
        return Err(Error::pre(format!("u_{n} = 0")));
    }
    if rows.iter().any(|(_, u, _)| u.abs() < BigInt::from(2)) {
        return Err(Error::Degenerate("no growth: some |u_n| < 2".into()));
    }
    let points: Vec<RatePoint> = rows
        .par_iter()
        .map(|(n, u, v)| {
            let r = cert.relative(x, u, v, 64, *n)?.abs();
            let lr = ln(&r.lo, 96)?
                .add(&ln(&r.hi, 96)?)
                .scale(&BigRational::new(1.into(), 2.into()));
            let lr_hi = ln(&r.hi, 96)?.hi;
            let lu = ln_int(&u.abs(), 96);
            let num = -lr_hi;
            let den = if num.is_negative() { &lu.lo } else { &lu.hi };
            let tau = dyadic_floor(&(&num / den), 64);
            Ok(RatePoint {
                n: *n,
                ln_residual: lr.to_f64_mid(),
                ln_u: lu.to_f64_mid(),
                tau_lower: tau,
            })
        })
        .collect::<Result<_>>()?;

    let roots: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.n > 0)
        .map(|p| {
            (
                (p.ln_residual / p.n as f64).exp(),
                (p.ln_u / p.n as f64).exp(),
            )
        })
        .collect();
    let alpha_root = roots.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let beta_root = roots.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);

    let mut alpha_ratio: Option<f64> = None;
    let mut beta_ratio: Option<f64> = None;
    for w in points.windows(2) {
        if w[1].n == w[0].n + 1 {
            let a = (w[1].ln_residual - w[0].ln_residual).exp();
            let b = (w[1].ln_u - w[0].ln_u).exp();
            alpha_ratio = Some(alpha_ratio.map_or(a, |c| c.max(a)));
            beta_ratio = Some(beta_ratio.map_or(b, |c| c.max(b)));
        }
    }

    let k = match opts.normalization {
        Normalization::None => 0.0,
        Normalization::LcmPower(k) => k as f64,
    };
    let fit_pts: Vec<&RatePoint> = points.iter().filter(|p| p.n >= 1).collect();
    let (alpha_fit, beta_fit) = if fit_pts.len() >= 3 {
        let lcm = ln_lcm_table(fit_pts.last().unwrap().n);
        let ns: Vec<f64> = fit_pts.iter().map(|p| p.n as f64).collect();
        let yr: Vec<f64> = fit_pts
            .iter()
            .map(|p| p.ln_residual - k * lcm[p.n as usize])
            .collect();
        let yu: Vec<f64> = fit_pts
            .iter()
            .map(|p| p.ln_u - k * lcm[p.n as usize])
            .collect();
        (
            fit_slope(&ns, &yr).map(|a| (a + k).exp()),
            fit_slope(&ns, &yu).map(|a| (a + k).exp()),
        )
    } else {
        (None, None)
    };

    let (alpha_hat, beta_hat) = match opts.estimator {
        Estimator::Root => (alpha_root, beta_root),
        Estimator::Ratio => match (alpha_ratio, beta_ratio) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::pre("ratio estimator needs consecutive indices")),
        },
        Estimator::Fit => match (alpha_fit, beta_fit) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::pre("fit needs at least 3 indices n >= 1")),
        },
    };
    let tau_hat = points.iter().map(|p| p.tau_lower.clone()).min().unwrap();
    Ok(RateReport {
        points,
        alpha_root,
        beta_root,
        alpha_ratio,
        beta_ratio,
        alpha_fit,
        beta_fit,
        alpha_hat,
        beta_hat,
        tau_hat,
        estimator: opts.estimator,
        normalization: opts.normalization,
    })
}

#[derive(Clone, Debug)]
pub struct DensityData {
    pub v: Vec<BigInt>,
    /// Largest `|r_{n+1}| / |r_n|`, rounded to a multiple of `2^-64` (exact when the ratio is).
    pub alpha_xi: BigRational,
    pub alpha_xi_enclosure: Enclosure,
    /// Largest `u_{n+1} / u_n`.
    pub beta_u: BigRational,
    /// Enclosure of `log sqrt(alpha_xi * beta_u)`.
    pub nu: Enclosure,
    pub nu_estimate: BigRational,
}

impl DensityData {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha_xi": to_f64(&self.alpha_xi),
            "alpha_xi_enclosure": self.alpha_xi_enclosure.round_out(64).to_json(),
            "beta_u": fmt_rational(&self.beta_u),
            "nu_estimate": to_decimal_floor(&self.nu_estimate, 9),
            "nu": self.nu.round_out(64).to_json(),
            "v": self.v.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Finite-range density data for a nondecreasing sequence of positive `u_n`,
/// with `v_n` the certified nearest integer to `u_n xi`.
pub fn density_data(u: &[BigInt], x: &RealOracle, cert: &Certifier) -> Result<DensityData> {
    if u.len() < 2 {
        return Err(Error::pre("need at least 2 terms"));
    }
    if u.iter().any(|a| !a.is_positive()) || u.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::pre("u must be positive and nondecreasing"));
    }
    let v: Vec<BigInt> = u
        .par_iter()
        .enumerate()
        .map(|(i, ui)| cert.nearest_integer(x, ui, i as u64))
        .collect::<Result<_>>()?;
    let res: Vec<Enclosure> = u
        .par_iter()
        .zip(v.par_iter())
        .enumerate()
        .map(|(i, (ui, vi))| cert.relative(x, ui, vi, 64, i as u64).map(|e| e.abs()))
        .collect::<Result<_>>()?;
    let mut best: Option<Enclosure> = None;
    let mut beta = BigRational::zero();
    for i in 0..u.len() - 1 {
        let r = if u[i] == u[i + 1] {
            Enclosure::exact(BigRational::one())
        } else {
            res[i + 1].div(&res[i])?
        };
        best = Some(match best {
            None => r,
            Some(b) => Enclosure::new(
                b.lo.clone().max(r.lo.clone()),
                b.hi.clone().max(r.hi.clone()),
            ),
        });
        let q = BigRational::new(u[i + 1].clone(), u[i].clone());
        if q > beta {
            beta = q;
        }
    }
    let a_enc = best.unwrap();
    let alpha_xi = if a_enc.is_exact() {
        a_enc.lo.clone()
    } else {
        dyadic_floor(&a_enc.mid(), 64)
    };
    let half = BigRational::new(1.into(), 2.into());
    let l_beta = ln(&beta, 96)?;
    let l_alpha = if a_enc.is_exact() {
        ln(&a_enc.lo, 96)?
    } else {
        Enclosure::new(ln(&a_enc.lo, 96)?.lo, ln(&a_enc.hi, 96)?.hi)
    };
    let nu = l_alpha.add(&l_beta).scale(&half);
    let nu_estimate = if nu.is_exact() {
        nu.lo.clone()
    } else {
        dyadic_floor(&nu.mid(), 64)
    };
    Ok(DensityData {
        v,
        alpha_xi,
        alpha_xi_enclosure: a_enc,
        beta_u: beta,
        nu,
        nu_estimate,
    })
}

/// Decimal helper for reports.
pub fn f64_of(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
