//! Cross-module properties through the public API.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

use dioph::apery::{apery_binomial, apery_rows};
use dioph::contfrac::{convergents, expand};
use dioph::csvio::{read_forms, write_entries};
use dioph::farey::{solve_disjunction, LemmaParams};
use dioph::multiform::{tau_empirical, PointVec, Provenance};
use dioph::rational::ratio;
use dioph::seq::{build_sequence, BuildConfig, CaseTaken, EtaSchedule, RateSpec};
use dioph::verify::{brute_case_ii, check_result};
use dioph::{Certifier, RealOracle};

fn o(s: &str) -> RealOracle {
    s.parse().unwrap()
}

fn frac_oracles() -> impl Strategy<Value = RealOracle> {
    prop::sample::select(vec![
        "affine:1,-1:const:sqrt2",
        "affine:1,-1:const:golden",
        "affine:1,-2:const:e",
        "affine:1,-1:const:zeta3",
        "cf:[0;1,4,1,7]+periodic:[3,2]",
    ])
    .prop_map(o)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lemma_outcomes_check_independently(
        x in frac_oracles(),
        c in 11i64..19,
        dc in 1i64..5,
        eps_den in 4i64..200,
        q in 2i64..5000,
    ) {
        let cp = (c + dc).min(19);
        prop_assume!(cp > c);
        let params = LemmaParams::new(ratio(c, 10), ratio(cp, 10), ratio(1, eps_den), ratio(q, 1)).unwrap();
        let cert = Certifier::default();
        let res = solve_disjunction(&x, &params).unwrap();
        prop_assert!(check_result(&x, &params, &res, &cert).unwrap());
        if res.is_case_ii() {
            // The search is exhaustive over [Q, cQ], so brute force finds a hit too.
            prop_assert!(brute_case_ii(&x, &params, &cert).unwrap().is_some());
        }
    }

    #[test]
    fn oracle_specs_round_trip(
        prefix in prop::collection::vec(1u32..50, 0..4),
        period in prop::collection::vec(1u32..9, 1..4),
        a0 in 0u32..5,
    ) {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        let spec = if prefix.is_empty() {
            format!("cf:[{a0}]+periodic:[{}]", join(&period))
        } else {
            format!("cf:[{a0};{}]+periodic:[{}]", join(&prefix), join(&period))
        };
        let x = o(&spec);
        let again: RealOracle = x.to_string().parse().unwrap();
        prop_assert_eq!(x.enclose(80).unwrap(), again.enclose(80).unwrap());

        let cf = expand(&x, prefix.len() + 2 * period.len(), &Certifier::default()).unwrap();
        prop_assert_eq!(&cf.quotients[0], &BigInt::from(a0));
        for (j, a) in prefix.iter().enumerate() {
            prop_assert_eq!(&cf.quotients[j + 1], &BigInt::from(*a));
        }
    }

    #[test]
    fn convergent_determinants(qs in prop::collection::vec(1u32..1000, 2..30)) {
        let qs: Vec<BigInt> = qs.into_iter().map(BigInt::from).collect();
        let c = convergents(&qs);
        for k in 1..c.len() {
            let det = &c[k].p * &c[k - 1].q - &c[k - 1].p * &c[k].q;
            prop_assert_eq!(det.abs(), BigInt::one());
        }
    }
}

#[test]
fn built_entries_stay_in_band() {
    let cfg = BuildConfig::default();
    let rates = RateSpec::geometric(ratio(2, 3), ratio(2, 1)).unwrap();
    let x = o("const:golden");
    let es = build_sequence(
        &x,
        &ratio(21, 10),
        &rates,
        (40, 70),
        &EtaSchedule::default(),
        &cfg,
    )
    .unwrap();
    assert_eq!(es.len(), 31);
    for e in &es {
        assert!(e.in_band, "n = {}", e.n);
        assert_eq!(e.case_taken, CaseTaken::II);
        assert!(e.residual.lo.is_positive());
        let (q, _) = rates.at(e.n).unwrap();
        let ratio_u = BigRational::from_integer(e.u.clone()) / q;
        assert_eq!(ratio_u, e.ratio_u);
    }

    let mut buf = Vec::new();
    write_entries(&mut buf, &es).unwrap();
    let forms = read_forms(&buf[..], Provenance::Constructed).unwrap();
    let point = PointVec::new(vec![o("rat:1"), x], Some(1)).unwrap();
    let t = tau_empirical(&forms, &point, None, &Certifier::default()).unwrap();
    // |L| ~ (2/3)^n against H ~ 2^n.
    let expect = 1.5f64.ln() / 2f64.ln();
    let tau = dioph::rational::to_f64(&t.tau_hat);
    assert!((tau - expect).abs() < 0.1, "{tau}");
}

#[test]
fn apery_recurrence_matches_binomial_sums() {
    for s in [2, 3] {
        for r in apery_rows(s, 40).unwrap() {
            assert_eq!(r.a, apery_binomial(s, r.n).unwrap(), "s = {s}, n = {}", r.n);
        }
    }
}
