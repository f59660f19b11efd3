use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use dioph::apery::apery_rows;
use dioph::contfrac::{convergents, expand, expansion_json, mu_estimate};
use dioph::csvio::{read_forms, read_int_column, read_rate_table, write_entries, write_forms};
use dioph::farey::{solve_disjunction_with, LemmaParams, SearchConfig};
use dioph::multiform::{
    dirichlet_witness, evaluate_form, form_json, nesterenko_report, omega0_search,
    tau_empirical_with, DirichletMode, FormSequence, LinearForm, PointVec, Provenance, TauChoice,
};
use dioph::rational::{fmt_rational, parse_int, parse_rational, to_decimal_ceil, to_f64};
use dioph::seq::{
    build_sequence, density_data, lemma1_bound, measure_rates, BuildConfig, Estimator, EtaSchedule,
    MeasureOptions, Normalization, RateSpec,
};
use dioph::suite::run_criterion;
use dioph::{Certifier, Error, ErrorClass, RealOracle, Result};

/// Exact Diophantine approximation: continued fractions, approximation
/// sequences, linear forms and simultaneous approximation.
#[derive(Parser)]
#[command(name = "dioph", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Largest precision, in bits, any single decision may use.
    #[arg(long, env = "DIOPH_PRECISION_CAP", default_value_t = 1 << 20, global = true)]
    precision_cap: u64,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Continued fraction quotients and convergents.
    Cf {
        #[arg(long)]
        oracle: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Lower estimate of the irrationality exponent from convergent growth.
    Mu {
        #[arg(long)]
        oracle: String,
        #[arg(long, default_value_t = 200)]
        depth: usize,
    },
    /// Certified witness for the two-case approximation lemma.
    Lemma {
        #[arg(long)]
        oracle: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        c_prime: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        q: String,
        /// Fail on large ranges instead of using the orbit-jumping search.
        #[arg(long)]
        no_structured: bool,
    },
    /// Integer sequences with prescribed growth and residual decay.
    Build(BuildArgs),
    /// Rate estimates for a sequence of (n, u, v), plus the implied exponent bound.
    Rates {
        #[arg(long)]
        oracle: String,
        /// CSV with columns n,u,v.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_range)]
        window: Option<(u64, u64)>,
        /// Remove lcm(1..n)^k before fitting.
        #[arg(long)]
        lcm_power: Option<u32>,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Root)]
        estimator: EstimatorArg,
    },
    /// Exponent bound 1 - log(beta)/log(alpha), rounded up.
    Bound {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// Density data for a nondecreasing sequence of denominators.
    Density {
        #[arg(long)]
        oracle: String,
        /// Comma-separated positive integers.
        #[arg(long, conflicts_with = "input")]
        u: Option<String>,
        /// CSV with a u column.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Linear forms and simultaneous approximation.
    #[command(subcommand)]
    Multi(MultiCmd),
    /// Apéry's integer sequences for zeta(2) or zeta(3).
    Apery {
        #[arg(long, default_value_t = 3)]
        s: u32,
        #[arg(long, default_value_t = 10)]
        n_max: u64,
    },
    /// Runs the acceptance battery.
    Suite {
        #[arg(long)]
        seed: u64,
        /// Run a single criterion.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=8))]
        only: Option<u32>,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    oracle: String,
    /// Upper bound for the irrationality exponent of the oracle.
    #[arg(long)]
    mu: String,
    /// Geometric rates: eps_n = alpha^n.
    #[arg(long, requires = "beta", conflicts_with = "rates")]
    alpha: Option<String>,
    /// Geometric rates: Q_n = beta^n.
    #[arg(long, requires = "alpha")]
    beta: Option<String>,
    /// Rate table CSV with header n,Q,eps.
    #[arg(long)]
    rates: Option<PathBuf>,
    /// Index range a:b.
    #[arg(long, value_parser = parse_range)]
    n: (u64, u64),
    /// eta_n = scale / ln(n + 3).
    #[arg(long, default_value = "1")]
    eta_scale: String,
    #[arg(long, default_value = "1/20")]
    rate_slack: String,
    #[arg(long, default_value = "1/5")]
    case_i_fraction: String,
}

#[derive(Args)]
struct PointArgs {
    /// Oracle spec for one coordinate; repeat in order xi_0, xi_1, ...
    #[arg(long = "coord", required = true, num_args = 1)]
    coords: Vec<String>,
    /// Dimension of the rational span minus one, when known.
    #[arg(long)]
    s: Option<usize>,
}

impl PointArgs {
    fn point(&self) -> Result<PointVec> {
        PointVec::new(
            self.coords
                .iter()
                .map(|c| c.parse())
                .collect::<Result<_>>()?,
            self.s,
        )
    }
}

#[derive(Args)]
struct FormArgs {
    /// Form CSV (n,l0,...,lr or n,u,v).
    #[arg(long, conflicts_with = "apery")]
    forms: Option<PathBuf>,
    /// Use Apéry forms for zeta(S) instead of a file.
    #[arg(long)]
    apery: Option<u32>,
    #[arg(long, default_value_t = 200)]
    n_max: u64,
    #[arg(long, value_parser = parse_range)]
    window: Option<(u64, u64)>,
    /// Remove lcm(1..n)^k before fitting; defaults to s for Apéry forms.
    #[arg(long)]
    lcm_power: Option<u32>,
}

impl FormArgs {
    fn sequence(&self) -> Result<FormSequence> {
        match (&self.forms, self.apery) {
            (Some(p), _) => read_forms(open(p)?, Provenance::User),
            (None, Some(s)) => dioph::apery::apery_forms(s, self.n_max),
            (None, None) => Err(pre("give --forms or --apery")),
        }
    }

    fn normalization(&self, seq: &FormSequence) -> Normalization {
        match self.lcm_power {
            Some(0) => Normalization::None,
            Some(k) => Normalization::LcmPower(k),
            None => seq.default_normalization(),
        }
    }
}

#[derive(Subcommand)]
enum MultiCmd {
    /// Common denominator with all scaled distances at most 1/Q.
    Dirichlet {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        q: u64,
        /// Use the box-principle construction instead of the smallest witness.
        #[arg(long)]
        pigeonhole: bool,
    },
    /// Best simultaneous-approximation exponents up to a denominator bound.
    Omega0 {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// Enclosure of a linear form at the point.
    Eval {
        #[command(flatten)]
        point: PointArgs,
        /// Comma-separated integer coefficients l0,...,lr.
        #[arg(long)]
        form: String,
        #[arg(long, default_value_t = 64)]
        bits: u64,
    },
    /// Empirical decay exponent of a form sequence.
    Tau {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        forms: FormArgs,
    },
    /// Decay exponent, implied dimension bound and consistency checks.
    Nesterenko {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        forms: FormArgs,
        /// Also search simultaneous approximations up to this bound.
        #[arg(long)]
        omega_bound: Option<u64>,
        #[arg(long, default_value = "1/10")]
        omega_slack: String,
        #[arg(long, value_enum, default_value_t = TauArg::Fit)]
        estimator: TauArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Root,
    Ratio,
    Fit,
}

#[derive(Clone, Copy, ValueEnum)]
enum TauArg {
    Pointwise,
    Rate,
    Fit,
}

fn parse_range(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or("expected a:b")?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad start {a:?}"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad end {b:?}"))?;
    if a > b {
        return Err("empty range".into());
    }
    Ok((a, b))
}

fn pre(msg: &str) -> Error {
    Error::Precondition(msg.into())
}

fn open(p: &PathBuf) -> Result<File> {
    File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn oracle(s: &str) -> Result<RealOracle> {
    s.parse()
}

fn rat(s: &str) -> Result<BigRational> {
    parse_rational(s)
}

enum Output {
    Json(Value),
    Csv(Vec<u8>),
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Output> {
    let mut buf = Vec::new();
    {
        let mut w = io::BufWriter::new(&mut buf);
        writeln!(w, "{}", header.join(","))?;
        for r in rows {
            writeln!(w, "{}", r.join(","))?;
        }
    }
    Ok(Output::Csv(buf))
}

fn no_csv(name: &str) -> Error {
    Error::Precondition(format!("`{name}` has no CSV output; use --format json"))
}

fn run(cli: &Cli) -> Result<Output> {
    let cert = Certifier::with_cap(cli.precision_cap);
    let csv = cli.format == Format::Csv;
    match &cli.cmd {
        Cmd::Cf { oracle: o, depth } => {
            let cf = expand(&oracle(o)?, *depth, &cert)?;
            if csv {
                let conv = convergents(&cf.quotients);
                return csv_rows(
                    &["k", "a", "p", "q"],
                    cf.quotients
                        .iter()
                        .zip(&conv)
                        .enumerate()
                        .map(|(k, (a, c))| {
                            vec![
                                k.to_string(),
                                a.to_string(),
                                c.p.to_string(),
                                c.q.to_string(),
                            ]
                        }),
                );
            }
            Ok(Output::Json(expansion_json(&cf, None)))
        }
        Cmd::Mu { oracle: o, depth } => {
            if csv {
                return Err(no_csv("mu"));
            }
            Ok(Output::Json(
                mu_estimate(&oracle(o)?, *depth, &cert)?.to_json(),
            ))
        }
        Cmd::Lemma {
            oracle: o,
            c,
            c_prime,
            eps,
            q,
            no_structured,
        } => {
            if csv {
                return Err(no_csv("lemma"));
            }
            let params = LemmaParams::new(rat(c)?, rat(c_prime)?, rat(eps)?, rat(q)?)?;
            let cfg = SearchConfig {
                structured: !no_structured,
                ..SearchConfig::default()
            };
            let res = solve_disjunction_with(&oracle(o)?, &params, &cfg, &cert)?;
            let mut v = res.to_json(&params);
            v["params"] = params.to_json();
            Ok(Output::Json(v))
        }
        Cmd::Build(b) => {
            let rates = match (&b.alpha, &b.beta, &b.rates) {
                (Some(a), Some(be), None) => RateSpec::geometric(rat(a)?, rat(be)?)?,
                (None, None, Some(p)) => RateSpec::table(read_rate_table(open(p)?)?)?,
                _ => return Err(pre("give either --alpha and --beta, or --rates")),
            };
            let cfg = BuildConfig {
                rate_slack: rat(&b.rate_slack)?,
                case_i_fraction: rat(&b.case_i_fraction)?,
                cert,
                ..BuildConfig::default()
            };
            let eta = EtaSchedule::scaled(rat(&b.eta_scale)?)?;
            let es = build_sequence(&oracle(&b.oracle)?, &rat(&b.mu)?, &rates, b.n, &eta, &cfg)?;
            if csv {
                let mut buf = Vec::new();
                write_entries(&mut buf, &es)?;
                return Ok(Output::Csv(buf));
            }
            Ok(Output::Json(Value::Array(
                es.iter().map(|e| e.to_json()).collect(),
            )))
        }
        Cmd::Rates {
            oracle: o,
            input,
            window,
            lcm_power,
            estimator,
        } => {
            if csv {
                return Err(no_csv("rates"));
            }
            let pairs = read_forms(open(input)?, Provenance::User)?.to_pairs()?;
            let opts = MeasureOptions {
                window: *window,
                normalization: lcm_power
                    .filter(|&k| k > 0)
                    .map_or(Normalization::None, Normalization::LcmPower),
                estimator: match estimator {
                    EstimatorArg::Root => Estimator::Root,
                    EstimatorArg::Ratio => Estimator::Ratio,
                    EstimatorArg::Fit => Estimator::Fit,
                },
            };
            let rep = measure_rates(&pairs, &oracle(o)?, &opts, &cert)?;
            let mut v = rep.to_json();
            v["mu_upper"] = match lemma1_bound(&rep.alpha_rational(), &rep.beta_rational()) {
                Ok(m) => json!(to_decimal_ceil(&m, 6)),
                Err(_) => Value::Null,
            };
            Ok(Output::Json(v))
        }
        Cmd::Bound { alpha, beta } => {
            let m = lemma1_bound(&rat(alpha)?, &rat(beta)?)?;
            if csv {
                return csv_rows(&["mu_upper"], [vec![fmt_rational(&m)]]);
            }
            Ok(Output::Json(
                json!({"mu_upper": fmt_rational(&m), "decimal": to_decimal_ceil(&m, 12)}),
            ))
        }
        Cmd::Density {
            oracle: o,
            u,
            input,
        } => {
            let us: Vec<BigInt> = match (u, input) {
                (Some(list), None) => list.split(',').map(parse_int).collect::<Result<_>>()?,
                (None, Some(p)) => read_int_column(open(p)?, "u")?,
                _ => return Err(pre("give --u or --input")),
            };
            let x = oracle(o)?;
            let d = density_data(&us, &x, &cert)?;
            if csv {
                return csv_rows(
                    &["n", "u", "v"],
                    us.iter()
                        .zip(&d.v)
                        .enumerate()
                        .map(|(i, (u, v))| vec![i.to_string(), u.to_string(), v.to_string()]),
                );
            }
            Ok(Output::Json(d.to_json()))
        }
        Cmd::Multi(m) => run_multi(m, csv, &cert),
        Cmd::Apery { s, n_max } => {
            let rows = apery_rows(*s, *n_max)?;
            if csv {
                let seq = FormSequence::new(
                    rows.into_iter().map(|r| (r.n, r.form)).collect(),
                    Provenance::User,
                );
                let mut buf = Vec::new();
                write_forms(&mut buf, &seq)?;
                return Ok(Output::Csv(buf));
            }
            Ok(Output::Json(Value::Array(
                rows.iter().map(|r| r.to_json()).collect(),
            )))
        }
        Cmd::Suite { seed, only } => {
            let ids: Vec<u32> = match only {
                Some(i) => vec![*i],
                None => (1..=8).collect(),
            };
            let results: Vec<_> = ids.iter().map(|&i| run_criterion(i, *seed)).collect();
            for r in &results {
                eprintln!("{}", r.line());
            }
            if csv {
                return Err(no_csv("suite"));
            }
            let v = Value::Array(results.iter().map(|r| r.to_json()).collect());
            if results.iter().any(|r| !r.pass) {
                println!("{}", serde_json::to_string_pretty(&v).unwrap());
                return Err(Error::Certificate("acceptance criteria failed".into()));
            }
            Ok(Output::Json(v))
        }
    }
}

fn run_multi(m: &MultiCmd, csv: bool, cert: &Certifier) -> Result<Output> {
    match m {
        MultiCmd::Dirichlet {
            point,
            q,
            pigeonhole,
        } => {
            let mode = if *pigeonhole {
                DirichletMode::Pigeonhole
            } else {
                DirichletMode::Direct
            };
            let r = dirichlet_witness(&point.point()?, *q, mode, cert)?;
            if csv {
                return csv_rows(
                    &["j", "q"],
                    r.witness
                        .q
                        .iter()
                        .enumerate()
                        .map(|(j, q)| vec![j.to_string(), q.to_string()]),
                );
            }
            Ok(Output::Json(r.to_json()))
        }
        MultiCmd::Omega0 { point, bound } => {
            let r = omega0_search(&point.point()?, *bound, cert)?;
            if csv {
                return csv_rows(
                    &["q0", "omega"],
                    r.records.iter().map(|w| {
                        let om = match &w.omega {
                            dioph::multiform::Omega::Finite(x) => format!("{:.9}", to_f64(x)),
                            dioph::multiform::Omega::Infinite => "inf".into(),
                        };
                        vec![w.q[0].to_string(), om]
                    }),
                );
            }
            Ok(Output::Json(r.to_json()))
        }
        MultiCmd::Eval { point, form, bits } => {
            if csv {
                return Err(no_csv("multi eval"));
            }
            let coeffs = form.split(',').map(parse_int).collect::<Result<Vec<_>>>()?;
            let f = LinearForm::new(coeffs)?;
            let e = evaluate_form(&f, &point.point()?, *bits)?;
            Ok(Output::Json(
                json!({"form": form_json(0, &f)["coeffs"], "value": e.round_out(*bits + 2).to_json()}),
            ))
        }
        MultiCmd::Tau { point, forms } => {
            if csv {
                return Err(no_csv("multi tau"));
            }
            let seq = forms.sequence()?;
            let t = tau_empirical_with(
                &seq,
                &point.point()?,
                forms.window,
                forms.normalization(&seq),
                cert,
            )?;
            Ok(Output::Json(t.to_json()))
        }
        MultiCmd::Nesterenko {
            point,
            forms,
            omega_bound,
            omega_slack,
            estimator,
        } => {
            if csv {
                return Err(no_csv("multi nesterenko"));
            }
            let seq = forms.sequence()?;
            let p = point.point()?;
            let om = omega_bound
                .map(|b| omega0_search(&p, b, cert))
                .transpose()?;
            let choice = match estimator {
                TauArg::Pointwise => TauChoice::Pointwise,
                TauArg::Rate => TauChoice::Rate,
                TauArg::Fit => TauChoice::Fit,
            };
            let mut seq = seq;
            if forms.lcm_power.is_some() {
                // An explicit normalization overrides the one implied by provenance.
                seq.provenance = match forms.normalization(&seq) {
                    Normalization::LcmPower(2) => Provenance::Apery2,
                    Normalization::LcmPower(3) => Provenance::Apery3,
                    _ => Provenance::User,
                };
            }
            let slack = to_f64(&rat(omega_slack)?);
            let r = nesterenko_report(&seq, &p, forms.window, om.as_ref(), slack, choice, cert)?;
            Ok(Output::Json(r.to_json()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let res = match out {
                Output::Json(v) => {
                    writeln!(stdout, "{}", serde_json::to_string_pretty(&v).unwrap())
                }
                Output::Csv(b) => stdout.write_all(&b),
            };
            if res.is_err() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Precondition => 2,
                ErrorClass::Precision => 3,
                ErrorClass::Internal => 4,
            })
        }
    }
}
