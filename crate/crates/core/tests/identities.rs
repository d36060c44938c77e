use num_bigint::BigInt;
use num_rational::BigRational;

use padic_lab::cyclo::CycloNum;
use padic_lab::digamma::{euler_gamma_limit, euler_gamma_p, verify_diamond, verify_gauss};
use padic_lab::independence::{
    oracle_bounded, oracle_rank, p4_numbers, relation_order, unit_system, Verdict,
};
use padic_lab::linear_form::{digamma_value, evaluate_form, reduce_difference, verify_reduction};
use padic_lab::report::DEFAULT_GUARD;

#[test]
fn euler_constant_from_its_limit() {
    for p in [2, 3, 5, 7] {
        let g = euler_gamma_p(p, 8).unwrap();
        let lim = euler_gamma_limit(p, 8).unwrap().value;
        // (p - 1)·γ_p + p·lim = 0
        let lhs = &g.mul_int(p as i64 - 1) + &lim.mul_int(p as i64);
        assert!(lhs.valuation().at_least(8 - DEFAULT_GUARD), "p = {p}");
    }
}

#[test]
fn gauss_at_boundary_conductors() {
    for (p, f) in [(2, 4), (2, 8), (3, 4), (5, 3)] {
        for r in 1..f as i64 {
            if num_integer::gcd(r as u64, f) == 1 {
                let rep = verify_gauss(p, r, f, 5).unwrap();
                assert!(rep.pass, "{}", rep.line());
            }
        }
    }
}

#[test]
fn diamond_full_range() {
    for (p, q) in [(5, 3), (7, 4), (2, 3)] {
        for r in 0..q {
            let rep = verify_diamond(p, r, q, 5).unwrap();
            assert!(rep.pass, "{}", rep.line());
        }
    }
}

#[test]
fn perturbed_forms_are_rejected() {
    let p = 3;
    let n = 5;
    let (a, b) = ((1, 15), (2, 15));
    assert!(verify_reduction(p, a, b, n).unwrap().check.pass);
    let diff = {
        let (v1, _) = digamma_value(p, a.0, a.1, n).unwrap();
        let (v2, _) = digamma_value(p, b.0, b.1, n).unwrap();
        (&v1 - &v2).truncate(n)
    };
    let need = n - DEFAULT_GUARD;

    let mut shifted = reduce_difference(p, a, b).unwrap();
    shifted.constant += BigRational::from_integer(BigInt::from(p));
    let v = evaluate_form(&shifted, p, n).unwrap();
    assert!(!diff.distance(&v).unwrap().at_least(need));

    let mut doubled = reduce_difference(p, a, b).unwrap();
    doubled.terms[0].coefficient = doubled.terms[0]
        .coefficient
        .mul(&CycloNum::from_int(doubled.modulus, 2));
    if let Ok(v) = evaluate_form(&doubled, p, n) {
        assert!(!diff.distance(&v).unwrap().at_least(need))
    }

    let wrong = reduce_difference(p, a, (4, 15)).unwrap();
    if let Ok(v) = evaluate_form(&wrong, p, n) {
        assert!(!diff.distance(&v).unwrap().at_least(need))
    }
}

#[test]
fn list_for_fifteen_has_an_exact_relation() {
    let nums: Vec<CycloNum> = p4_numbers(&[15])
        .unwrap()
        .into_iter()
        .map(|(_, x)| x)
        .collect();
    assert_eq!(nums.len(), 6);
    assert_eq!(
        relation_order(&nums, &[0, 0, 1, -1, 1, -2]).unwrap(),
        Some(15)
    );
    assert_eq!(relation_order(&nums, &[0, 0, 1, -1, 1, -1]).unwrap(), None);
}

#[test]
fn oracles_agree_on_small_systems() {
    for q in [12, 15, 20, 21, 24, 28, 35, 39, 40] {
        let nums: Vec<CycloNum> = unit_system(q).into_iter().map(|(_, x)| x).collect();
        let rank = oracle_rank(&nums, 40).unwrap();
        let bounded = oracle_bounded(&nums, 1).unwrap();
        assert_ne!(rank.verdict, Verdict::Undecided, "q = {q}");
        if bounded.is_dependent() {
            assert!(rank.is_dependent(), "q = {q}");
        }
        if let Some(w) = &rank.witness {
            assert_eq!(
                relation_order(&nums, &w.exponents).unwrap(),
                Some(w.root_order)
            );
        }
    }
}

#[test]
fn thirty_nine_is_dependent() {
    let nums: Vec<CycloNum> = unit_system(39).into_iter().map(|(_, x)| x).collect();
    let rep = oracle_rank(&nums, 40).unwrap();
    assert_eq!(rep.verdict, Verdict::DependentWithWitness);
}
