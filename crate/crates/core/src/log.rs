//! The Iwasawa logarithm (`log p = 0`, zero on roots of unity) on `Q_p^×`
//! and on the cyclotomic towers.

use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::ceil_log;
use crate::error::{Error, Result};
use crate::local::{CyclotomicLocalField, LocalElement};
use crate::padic::{PadicApprox, Valuation};

const SERIES_CAP: usize = 20_000;
const RAISE_CAP: u32 = 8;

/// Iwasawa logarithm of a nonzero element of `Q_p`. The result is correct to
/// the relative precision of the input (one digit less when `p = 2`).
pub fn log_qp(x: &PadicApprox) -> Result<PadicApprox> {
    let p = x.prime();
    let v = x
        .finite_valuation()
        .ok_or_else(|| Error::Domain("log of zero".into()))?;
    let u = x.shift(-v);
    let rel = u.precision().unwrap();
    let (w, denom) = if p == 2 {
        (u.pow(2), 2)
    } else {
        (u.pow(p - 1), p as i64 - 1)
    };
    let y = &w - &PadicApprox::from_i64(1, p, rel as u32 + 2)?;
    let t = match y.finite_valuation() {
        None => return Ok(PadicApprox::zero_at(p, rel - if p == 2 { 1 } else { 0 })),
        Some(t) => t,
    };
    let mut sum = PadicApprox::exact_zero(p);
    let mut power = y.clone();
    let mut n: i64 = 1;
    loop {
        let term = power.checked_div(&PadicApprox::from_i64(n, p, rel as u32 + 8)?)?;
        sum = if n % 2 == 1 {
            &sum + &term
        } else {
            &sum - &term
        };
        n += 1;
        if n * t - ceil_log(n as u64, p) as i64 >= rel + 2 {
            break;
        }
        if n as usize > SERIES_CAP {
            return Err(Error::SeriesCap(SERIES_CAP));
        }
        power = &power * &y;
    }
    let out = sum.checked_div(&PadicApprox::from_i64(denom, p, rel as u32 + 8)?)?;
    Ok(out.truncate(rel - if p == 2 { 1 } else { 0 }))
}

/// `Σ (−1)^{n+1} (u − 1)^n / n` for `ν(u − 1) ≥ 1`.
fn series(u: &LocalElement) -> Result<LocalElement> {
    let field = u.field().clone();
    let y = u.sub(&LocalElement::one(&field));
    let target = y.precision().unwrap_or(field.digits as i64);
    let t = match y.valuation() {
        Valuation::Finite(t) => t,
        _ => return Ok(LocalElement::zero_at(&field, target)),
    };
    let p = field.p;
    let mut sum = LocalElement::zero(&field);
    let mut power = y.clone();
    let mut n: i64 = 1;
    loop {
        let term = power.div_int(n)?;
        sum = if n % 2 == 1 {
            sum.add(&term)
        } else {
            sum.sub(&term)
        };
        n += 1;
        let bound = t * Ratio::from_integer(n) - Ratio::from_integer(ceil_log(n as u64, p) as i64);
        if bound >= Ratio::from_integer(target + 1) {
            break;
        }
        if n as usize > SERIES_CAP {
            return Err(Error::SeriesCap(SERIES_CAP));
        }
        power = power.mul(&y);
    }
    Ok(sum)
}

/// Logarithm of a principal unit: raises to `p^s` until `ν(u − 1) ≥ 1`.
pub fn log_principal(u: &LocalElement) -> Result<LocalElement> {
    let field = u.field().clone();
    let one = LocalElement::one(&field);
    let mut w = u.clone();
    let mut s = 0;
    loop {
        match w.sub(&one).valuation() {
            Valuation::Finite(t) if t >= Ratio::from_integer(1) => break,
            Valuation::Finite(t) if t > Ratio::from_integer(0) => {}
            Valuation::Finite(_) => return Err(Error::Domain("not a principal unit".into())),
            Valuation::Infinite { .. } => break,
        }
        if s == RAISE_CAP {
            return Err(Error::StabilizationCap { cap: RAISE_CAP });
        }
        w = w.pow(field.p as u128);
        s += 1;
    }
    let mut out = series(&w)?;
    for _ in 0..s {
        out = out.div_int(field.p as i64)?;
    }
    Ok(out)
}

/// Iwasawa logarithm in the tower: `log β = log((β^e / p^{eν(β)})^{p^d − 1}) / (e(p^d − 1))`.
pub fn log(beta: &LocalElement) -> Result<LocalElement> {
    let field = beta.field().clone();
    let v = match beta.valuation() {
        Valuation::Finite(v) => v,
        _ => return Err(Error::Domain("log of zero".into())),
    };
    let e = field.e as i64;
    let re = (v * Ratio::from_integer(e)).to_integer();
    let q1 = (field.p as u128).pow(field.d as u32) - 1;
    let unit = beta.pow(e as u128).shift(-re);
    let u = unit.pow(q1);
    let l = log_principal(&u)?;
    l.div_int(e)?.div_int(q1 as i64)
}

/// `log(1 − ζ_f^a)`.
pub fn log_one_minus_zeta(field: &Arc<CyclotomicLocalField>, a: i64) -> Result<LocalElement> {
    if a.rem_euclid(field.f as i64) == 0 {
        return Err(Error::Domain(format!("1 - zeta^{a} vanishes")));
    }
    let z = LocalElement::one(field).sub(&LocalElement::zeta(field, a));
    log(&z)
}

/// `β = p^a · π^j · ω · x` with `π = 1 − ζ_{p^k}`, `ω` a Teichmüller root of unity and `x ∈ U_1`.
#[derive(Clone, Debug)]
pub struct LogDecomposition {
    /// `ν(β) = a + j/e`.
    pub r: Ratio<i64>,
    pub p_power: i64,
    pub pi_power: i64,
    pub omega: LocalElement,
    pub principal: LocalElement,
}

#[derive(Serialize)]
pub struct DecompositionSummary {
    pub r: String,
    pub p_power: i64,
    pub pi_power: i64,
}

impl LogDecomposition {
    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            r: self.r.to_string(),
            p_power: self.p_power,
            pi_power: self.pi_power,
        }
    }

    pub fn reassemble(&self) -> LocalElement {
        let field = self.omega.field();
        let pi = LocalElement::uniformizer(field);
        pi.pow(self.pi_power as u128)
            .mul(&self.omega)
            .mul(&self.principal)
            .shift(self.p_power)
    }
}

pub fn decompose(beta: &LocalElement) -> Result<LogDecomposition> {
    let field = beta.field().clone();
    let r = match beta.valuation() {
        Valuation::Finite(v) => v,
        _ => return Err(Error::Domain("decomposition of zero".into())),
    };
    let e = field.e as i64;
    let steps = (r * Ratio::from_integer(e)).to_integer();
    let (a, j) = (steps.div_euclid(e), steps.rem_euclid(e));
    let pi = LocalElement::uniformizer(&field);
    let rest = beta.shift(-a).mul(&pi.pow(j as u128).inverse()?);
    let omega = rest.teichmuller()?;
    let q1 = (field.p as u128).pow(field.d as u32) - 1;
    let principal = rest.mul(&omega.pow(q1 - 1));
    Ok(LogDecomposition {
        r,
        p_power: a,
        pi_power: j,
        omega,
        principal,
    })
}

/// The same logarithm through the decomposition, `j·log π + log x`.
pub fn log_via_decomposition(beta: &LocalElement) -> Result<LocalElement> {
    let dec = decompose(beta)?;
    let field = beta.field().clone();
    let mut out = log_principal(&dec.principal)?;
    if dec.pi_power != 0 {
        let pi = LocalElement::uniformizer(&field);
        let pe = decompose(&pi.pow(field.e as u128).shift(-1))?;
        let log_pi = log_principal(&pe.principal)?.div_int(field.e as i64)?;
        out = out.add(&log_pi.mul_int(dec.pi_power));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::build_field;
    use num_bigint::BigInt;

    fn qp(a: i64, p: u64, n: u32) -> PadicApprox {
        PadicApprox::from_i64(a, p, n).unwrap()
    }

    #[test]
    fn qp_log_basics() {
        assert!(log_qp(&qp(1, 5, 10)).unwrap().is_zero());
        assert!(log_qp(&qp(-1, 7, 10)).unwrap().is_zero());
        assert!(log_qp(&qp(49, 7, 10)).unwrap().is_zero());
        assert!(log_qp(&PadicApprox::exact_zero(3)).is_err());
    }

    #[test]
    fn log5_of_6_matches_partial_sums() {
        // Σ (−1)^{n+1} 5^n / n with exact rationals, reduced mod 5^12
        let mut num = BigInt::from(0);
        let mut den = BigInt::from(1);
        for n in 1..=40i64 {
            let t_num = BigInt::from(5).pow(n as u32) * if n % 2 == 1 { 1 } else { -1 };
            num = &num * n + &t_num * &den;
            den *= n;
        }
        let oracle = PadicApprox::from_rational(&num, &den, 5, 20)
            .unwrap()
            .truncate(12);
        let got = log_qp(&qp(6, 5, 12)).unwrap();
        assert!(got.distance(&oracle).unwrap().at_least(12));
    }

    #[test]
    fn qp_log_is_a_homomorphism() {
        for p in [2u64, 3, 5, 7] {
            for (a, b) in [(2i64, 3i64), (10, 11), (-4, 13), (17, 18)] {
                let la = log_qp(&qp(a, p, 15)).unwrap();
                let lb = log_qp(&qp(b, p, 15)).unwrap();
                let lab = log_qp(&qp(a * b, p, 15)).unwrap();
                assert!(
                    (&lab - &(&la + &lb)).valuation().at_least(13),
                    "p={p} a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn tower_log_agrees_with_qp_log() {
        let fl = build_field(3, 15, 8).unwrap();
        for a in [2i64, 5, 10, 28] {
            let x = qp(a, 3, 30);
            let l1 = log(&LocalElement::from_padic(&fl, &x).unwrap()).unwrap();
            let l2 = LocalElement::from_padic(&fl, &log_qp(&x).unwrap()).unwrap();
            assert!(l1.sub(&l2).valuation().at_least(20), "a={a}");
        }
    }

    #[test]
    fn log_of_roots_of_unity_vanishes() {
        for (p, f) in [(3u64, 9u64), (3, 15), (7, 5), (5, 25)] {
            let fl = build_field(p, f, 8).unwrap();
            for j in 0..f as i64 {
                let l = log(&LocalElement::zeta(&fl, j)).unwrap();
                assert!(l.valuation().at_least(12), "p={p} f={f} j={j}");
            }
        }
    }

    #[test]
    fn symmetry_of_one_minus_zeta() {
        let fl = build_field(3, 9, 8).unwrap();
        for t in 1..9 {
            let a = log_one_minus_zeta(&fl, -t).unwrap();
            let b = log_one_minus_zeta(&fl, t).unwrap();
            assert!(a.sub(&b).valuation().at_least(12), "t={t}");
        }
        let fl2 = build_field(3, 2, 8).unwrap();
        let l = log_one_minus_zeta(&fl2, 1).unwrap();
        let l2 = LocalElement::from_padic(&fl2, &log_qp(&qp(2, 3, 30)).unwrap()).unwrap();
        assert!(l.sub(&l2).valuation().at_least(20));
        assert!(log_one_minus_zeta(&fl, 9).is_err());
    }

    #[test]
    fn norm_identity_for_five_over_seven() {
        let fl = build_field(7, 5, 8).unwrap();
        let mut s = LocalElement::zero(&fl);
        for a in 1..5 {
            s = s.add(&log_one_minus_zeta(&fl, a).unwrap());
        }
        let l5 = LocalElement::from_padic(&fl, &log_qp(&qp(5, 7, 20)).unwrap()).unwrap();
        assert!(s.sub(&l5).valuation().at_least(15));
    }

    #[test]
    fn decomposition_examples() {
        let fl = build_field(5, 1, 8).unwrap();
        let b = LocalElement::from_int(&fl, 50);
        let dec = decompose(&b).unwrap();
        assert_eq!(dec.r, Ratio::from_integer(2));
        let w2 = LocalElement::from_int(&fl, 2).teichmuller().unwrap();
        assert!(dec.omega.sub(&w2).valuation().at_least(20));
        assert!(dec.reassemble().sub(&b).valuation().at_least(15));
        let one = decompose(&LocalElement::one(&fl)).unwrap();
        assert_eq!(one.r, Ratio::from_integer(0));
        assert_eq!(one.omega, LocalElement::one(&fl));

        let fl = build_field(3, 9, 8).unwrap();
        let t = LocalElement::one(&fl).sub(&LocalElement::zeta(&fl, 1));
        let dec = decompose(&t).unwrap();
        assert_eq!(dec.r, Ratio::new(1, 6));
        assert!(dec.reassemble().sub(&t).valuation().at_least(12));
    }

    #[test]
    fn both_log_routes_agree() {
        for (p, f) in [(3u64, 9u64), (3, 15), (5, 25), (7, 5)] {
            let fl = build_field(p, f, 8).unwrap();
            for a in 1..f.min(10) as i64 {
                let t = LocalElement::one(&fl).sub(&LocalElement::zeta(&fl, a));
                let l1 = log(&t).unwrap();
                let l2 = log_via_decomposition(&t).unwrap();
                assert!(l1.sub(&l2).valuation().at_least(10), "p={p} f={f} a={a}");
            }
        }
    }
}
