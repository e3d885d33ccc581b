use proptest::prelude::*;
use wfcheck::checks::{
    cpl_probability_check, epr_correlation_check, ghz_check, parity_search, CheckError, Literal, ParityConstraint,
    Verdict, VERDICT_TOL,
};
use wfcheck::interpret::FactHolderPolicy;
use wfcheck::qcore::C64;

fn amplitudes() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=8)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            v.into_iter().map(|(a, b)| C64::new(a / n, b / n)).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cpl_born_value_is_the_complementary_mass(c in amplitudes(), pick in any::<prop::sample::Index>()) {
        let ra = pick.index(c.len());
        let r = cpl_probability_check(&c, ra).unwrap();
        let f = r.finding("P(r_b != r_a)").unwrap();
        let closed: f64 = c.iter().enumerate().filter(|(j, _)| *j != ra).map(|(_, z)| z.norm_sqr()).sum();
        prop_assert!((f.prediction("born").unwrap() - closed).abs() < 1e-12);
        prop_assert_eq!(f.prediction("cpl").unwrap(), 0.0);
        let expect = if closed > VERDICT_TOL { Verdict::Contradiction } else { Verdict::Consistent };
        prop_assert_eq!(r.verdict, expect);
        prop_assert!(r.is_well_formed());
    }

    #[test]
    fn epr_separate_partition_gives_fourth_powers(ps in prop::collection::vec(0.05f64..1.0, 2..=4)) {
        let total: f64 = ps.iter().sum();
        let c: Vec<f64> = ps.iter().map(|p| (p / total).sqrt()).collect();
        prop_assume!(c.iter().enumerate().all(|(i, a)| c[i + 1..].iter().all(|b| (a - b).abs() > 1e-6)));
        let r = epr_correlation_check(&c).unwrap();
        let f = r.finding("P(r_a = r_b)").unwrap();
        let fourth: f64 = c.iter().map(|x| x.powi(4)).sum();
        prop_assert!((f.prediction("orthodox").unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((f.prediction("rqm5_separate").unwrap() - fourth).abs() < 1e-12);
        prop_assert!((f.prediction("rqm5_joint").unwrap() - 1.0).abs() < 1e-12);
        prop_assert_eq!(r.verdict, Verdict::Ambiguity);
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(matches!(epr_correlation_check(&[h, h]), Err(CheckError::Degenerate(_))));
    assert!(matches!(epr_correlation_check(&[1.0, 0.0]), Err(CheckError::Degenerate(_))));
    assert!(matches!(cpl_probability_check(&[C64::new(1.0, 0.0)], 0), Err(CheckError::TooFewCoefficients(1))));
    assert!(matches!(
        cpl_probability_check(&[C64::new(0.6, 0.0), C64::new(0.6, 0.0)], 0),
        Err(CheckError::Unnormalized(_))
    ));
    assert!(matches!(
        cpl_probability_check(&[C64::new(0.6, 0.0), C64::new(0.8, 0.0)], 2),
        Err(CheckError::IndexOutOfRange { index: 2, dim: 2 })
    ));
    let r = cpl_probability_check(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 0).unwrap();
    assert_eq!(r.verdict, Verdict::Consistent);
}

/// Number of solutions of the system over GF(2), by Gaussian elimination.
/// A value `-1` is the bit 1; a negated literal flips the right-hand side.
fn gf2_count(constraints: &[ParityConstraint], vars: &[String]) -> u64 {
    let n = vars.len();
    let mut rows: Vec<(u64, bool)> = constraints
        .iter()
        .map(|c| {
            let mut mask = 0u64;
            let mut rhs = c.required == -1;
            for l in &c.literals {
                mask ^= 1 << vars.iter().position(|v| *v == l.name).unwrap();
                rhs ^= l.negated;
            }
            (mask, rhs)
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].0 >> col & 1 == 1) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.0 >> col & 1 == 1 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|(m, rhs)| *m == 0 && *rhs) {
        0
    } else {
        1 << (n - rank)
    }
}

fn system(n: usize) -> impl Strategy<Value = Vec<ParityConstraint>> {
    let lit = (0..n, any::<bool>()).prop_map(|(k, neg)| Literal { name: format!("x{k}"), negated: neg });
    let constraint = (prop::collection::vec(lit, 1..=4), any::<bool>())
        .prop_map(|(lits, minus)| ParityConstraint::new(lits, if minus { -1 } else { 1 }, "random").unwrap());
    prop::collection::vec(constraint, 0..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parity_search_matches_gf2_rank((n, cs) in (1usize..=10).prop_flat_map(|n| (Just(n), system(n)))) {
        let names: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
        let order: Vec<&str> = names.iter().map(String::as_str).collect();
        let r = parity_search(&cs, &order).unwrap();
        prop_assert_eq!(&r.variables, &names);
        prop_assert_eq!(r.domain_size, 1u64 << n);
        prop_assert_eq!(r.satisfying.len() as u64, gf2_count(&cs, &names));
        for a in &r.satisfying {
            let value = |v: &str| a[names.iter().position(|x| x == v).unwrap()];
            prop_assert!(cs.iter().all(|c| c.holds(value)));
        }
    }
}

#[test]
fn ghz_verdict_ignores_the_fact_holder_policy() {
    let a = ghz_check(FactHolderPolicy::InteractingOnly).unwrap();
    let b = ghz_check(FactHolderPolicy::BothParties).unwrap();
    assert_eq!(a.verdict, Verdict::Contradiction);
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.search, b.search);
    for (x, y) in a.findings.iter().zip(&b.findings) {
        assert_eq!(x.claim, y.claim);
        for (p, q) in x.predictions.iter().zip(&y.predictions) {
            assert!((p.value - q.value).abs() < 1e-12, "{}: {} vs {}", x.claim, p.value, q.value);
        }
    }
}

#[test]
fn mermin_system_has_no_solution_and_gf2_agrees() {
    let rel = [
        ParityConstraint::product(&["B1", "B2", "B3"], 1, "all pairs").unwrap(),
        ParityConstraint::product(&["B1", "A2", "A3"], -1, "pair 1").unwrap(),
        ParityConstraint::product(&["B2", "A1", "A3"], -1, "pair 2").unwrap(),
        ParityConstraint::product(&["B3", "A1", "A2"], -1, "pair 3").unwrap(),
    ];
    let vars: Vec<String> = ["A1", "A2", "A3", "B1", "B2", "B3"].iter().map(|s| s.to_string()).collect();
    let order: Vec<&str> = vars.iter().map(String::as_str).collect();
    let r = parity_search(&rel, &order).unwrap();
    assert!(r.is_empty());
    assert_eq!(gf2_count(&rel, &vars), 0);
}
