use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use padic_lab::cyclo::CycloNum;
use padic_lab::independence::{classify_root, Classification};
use padic_lab::linear_form::reduce_difference;
use padic_lab::local::{build_field, LocalElement};
use padic_lab::log::log;
use padic_lab::{PadicApprox, Valuation};

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn padic(p: u64, n: i64, d: i64) -> PadicApprox {
    PadicApprox::from_rational(&BigInt::from(n), &BigInt::from(d), p, 20).unwrap()
}

fn vmin(v: Valuation) -> Option<num_rational::Ratio<i64>> {
    match v {
        Valuation::Finite(r) => Some(r),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn rational_round_trip(pi in 0usize..4, n in -10_000i64..10_000, d in 1i64..10_000) {
        let p = PRIMES[pi];
        let x = padic(p, n, d);
        // x·d recovers n to the carried precision
        let back = x.mul_int(d);
        let target = PadicApprox::from_i64(n, p, 40).unwrap();
        let dist = back.distance(&target).unwrap();
        let prec = back.precision().unwrap_or(i64::MAX);
        prop_assert!(dist.at_least(prec.min(20)));
    }
}

/// Equal to the smaller of the two carried precisions.
fn agree(a: &PadicApprox, b: &PadicApprox) -> bool {
    let prec = a
        .precision()
        .unwrap_or(i64::MAX)
        .min(b.precision().unwrap_or(i64::MAX));
    prec == i64::MAX && a.is_exact_zero() == b.is_exact_zero()
        || a.distance(b).unwrap().at_least(prec.min(1 << 20))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn ultrametric(pi in 0usize..4, a in -5000i64..5000, b in 1i64..500, c in -5000i64..5000, d in 1i64..500) {
        let p = PRIMES[pi];
        let (x, y) = (padic(p, a, b), padic(p, c, d));
        let s = &x + &y;
        if let (Some(vx), Some(vy), Some(vs)) = (vmin(x.valuation()), vmin(y.valuation()), vmin(s.valuation())) {
            prop_assert!(vs >= vx.min(vy));
            if vx != vy {
                prop_assert_eq!(vs, vx.min(vy));
            }
        }
    }

    #[test]
    fn ring_laws(pi in 0usize..4, v in proptest::collection::vec((-999i64..999, 1i64..99), 3)) {
        let p = PRIMES[pi];
        let (x, y, z) = (padic(p, v[0].0, v[0].1), padic(p, v[1].0, v[1].1), padic(p, v[2].0, v[2].1));
        let l = &(&x + &y) + &z;
        let r = &x + &(&y + &z);
        prop_assert!(agree(&l, &r));
        let l = &(&x * &y) * &z;
        let r = &x * &(&y * &z);
        prop_assert!(agree(&l, &r));
        let l = &x * &(&y + &z);
        let r = &(&x * &y) + &(&x * &z);
        prop_assert!(agree(&l, &r));
    }

    #[test]
    fn classification_depends_on_residue(g in 1u64..200, m in 3u64..200, k in 1u64..4) {
        let a = classify_root(g, m);
        let b = classify_root(g + k * m, m);
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one side errored"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 60, ..ProptestConfig::default() })]

    #[test]
    fn local_valuation_multiplicative(case in 0usize..3, a in proptest::collection::vec(-30i64..30, 8), b in proptest::collection::vec(-30i64..30, 8)) {
        let (p, f) = [(3, 9), (5, 7), (3, 15)][case];
        let field = build_field(p, f, 8).unwrap();
        let n = field.degree();
        let x = LocalElement::from_coords(&field, &a[..n.min(8)]);
        let y = LocalElement::from_coords(&field, &b[..n.min(8)]);
        if let (Some(vx), Some(vy)) = (vmin(x.valuation()), vmin(y.valuation())) {
            prop_assert_eq!(vmin(x.mul(&y).valuation()), Some(vx + vy));
        }
    }

    #[test]
    fn log_is_a_homomorphism(case in 0usize..2, a in proptest::collection::vec(-9i64..9, 6), b in proptest::collection::vec(-9i64..9, 6)) {
        let (p, f) = [(3, 9), (5, 5)][case];
        let field = build_field(p, f, 8).unwrap();
        let n = field.degree();
        let x = LocalElement::from_coords(&field, &a[..n]);
        let y = LocalElement::from_coords(&field, &b[..n]);
        prop_assume!(vmin(x.valuation()).is_some() && vmin(y.valuation()).is_some());
        let lhs = log(&x.mul(&y)).unwrap();
        let rhs = log(&x).unwrap().add(&log(&y).unwrap());
        prop_assert!(lhs.sub(&rhs).valuation().at_least(6));
    }

    #[test]
    fn cyclotomic_norm_multiplicative(m in prop::sample::select(vec![5u64, 7, 8, 9, 12, 15]), a in proptest::collection::vec(-6i64..6, 6), b in proptest::collection::vec(-6i64..6, 6)) {
        let x = CycloNum::new(m, a.iter().map(|&c| BigInt::from(c)).collect(), BigInt::from(1)).unwrap();
        let y = CycloNum::new(m, b.iter().map(|&c| BigInt::from(c)).collect(), BigInt::from(3)).unwrap();
        prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
    }

    #[test]
    fn reduction_is_antisymmetric(p in prop::sample::select(vec![3u64, 7]), f in prop::sample::select(vec![5u64, 8, 9, 15, 25]), r1 in 1i64..25, r2 in 1i64..25) {
        let (r1, r2) = (r1 % f as i64, r2 % f as i64);
        prop_assume!(r1 > 0 && r2 > 0 && num_integer::gcd(r1 as u64, f) == 1 && num_integer::gcd(r2 as u64, f) == 1);
        let ab = reduce_difference(p, (r1, f), (r2, f)).unwrap();
        let ba = reduce_difference(p, (r2, f), (r1, f)).unwrap();
        let sum = ab.add(&ba);
        prop_assert!(sum.terms.iter().all(|t| t.coefficient.is_zero()));
        prop_assert_eq!(sum.constant, BigRational::from_integer(0.into()));
    }
}

#[test]
fn semi_primitive_examples() {
    assert_eq!(classify_root(2, 7).unwrap(), Classification::SemiPrimitive);
    assert_eq!(classify_root(3, 7).unwrap(), Classification::Primitive);
    assert_eq!(classify_root(2, 31).unwrap(), Classification::Neither);
}
