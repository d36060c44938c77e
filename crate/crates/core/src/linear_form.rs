//! Differences of digamma-type values rewritten as linear forms in `log_p` of
//! cyclotomic numbers, with exact coefficients in `Q(ζ_L)`.
//!
//! The value attached to `(r, f)` is `−log_p f + Σ_{a=1}^{f−1} ζ_f^{−ar} log_p(1 − ζ_f^a)`,
//! which is `ψ_p(r/f) + γ_p` on the ramified route and the scaled `H'_μ` plus
//! `γ_p` on the unramified one.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, gcd, lcm};
use crate::cyclo::CycloNum;
use crate::digamma::{euler_gamma_p, gauss_lhs, project_rational};
use crate::error::{Error, Result};
use crate::local::{build_field, CyclotomicLocalField, LocalElement};
use crate::log::log_one_minus_zeta;
use crate::padic::PadicApprox;
use crate::report::{VerificationReport, DEFAULT_GUARD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisAtom {
    /// `1 − ζ_c`.
    OneMinusZeta { conductor: u64 },
    /// `(1 − ζ_c^a)/(1 − ζ_c)` with `1 < a < c/2`, `gcd(a, c) = 1`.
    UnitRatio { conductor: u64, exponent: u64 },
}

impl BasisAtom {
    pub fn unit_ratio(conductor: u64, exponent: u64) -> Result<Self> {
        if !(exponent > 1 && 2 * exponent < conductor && gcd(exponent, conductor) == 1) {
            return Err(Error::Domain(format!(
                "no unit ratio atom ({conductor}, {exponent})"
            )));
        }
        Ok(BasisAtom::UnitRatio {
            conductor,
            exponent,
        })
    }

    pub fn conductor(&self) -> u64 {
        match *self {
            BasisAtom::OneMinusZeta { conductor } | BasisAtom::UnitRatio { conductor, .. } => {
                conductor
            }
        }
    }

    pub fn is_unit_ratio(&self) -> bool {
        matches!(self, BasisAtom::UnitRatio { .. })
    }

    /// The atom as an element of `Q(ζ_c)`.
    pub fn value(&self) -> CycloNum {
        match *self {
            BasisAtom::OneMinusZeta { conductor } => CycloNum::one_minus_zeta(conductor, 1),
            BasisAtom::UnitRatio {
                conductor,
                exponent,
            } => CycloNum::unit_ratio(conductor, exponent),
        }
    }
}

impl fmt::Display for BasisAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisAtom::OneMinusZeta { conductor } => write!(f, "1-z{conductor}"),
            BasisAtom::UnitRatio {
                conductor,
                exponent,
            } => write!(f, "(1-z{conductor}^{exponent})/(1-z{conductor})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Term {
    pub coefficient: CycloNum,
    #[serde(flatten)]
    pub atom: BasisAtom,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearForm {
    /// Modulus of the coefficient field.
    pub modulus: u64,
    pub terms: Vec<Term>,
    /// Atoms whose coefficient cancelled to zero.
    pub dropped: Vec<BasisAtom>,
    #[serde(serialize_with = "ser_ratio")]
    pub constant: BigRational,
}

fn ser_ratio<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

struct Builder {
    m: u64,
    map: BTreeMap<BasisAtom, CycloNum>,
}

impl Builder {
    fn new(m: u64) -> Self {
        Builder {
            m,
            map: BTreeMap::new(),
        }
    }

    fn add(&mut self, atom: BasisAtom, c: &CycloNum) {
        let c = c
            .coerce(self.m)
            .expect("coefficient field divides the modulus");
        let e = self
            .map
            .entry(atom)
            .or_insert_with(|| CycloNum::zero(self.m));
        *e = e.add(&c);
    }

    /// `log(1 − ζ_c^a)` for `c ∤ a`, folded with `log(1 − ζ^{−t}) = log(1 − ζ^t)`.
    fn log_one_minus(&mut self, c: u64, a: u64, coeff: &CycloNum) {
        let g = gcd(a, c);
        let (c, a) = (c / g, (a / g) % (c / g));
        let a = a.min(c - a);
        self.add(BasisAtom::OneMinusZeta { conductor: c }, coeff);
        if a > 1 {
            self.add(
                BasisAtom::UnitRatio {
                    conductor: c,
                    exponent: a,
                },
                coeff,
            );
        }
    }

    /// `log ℓ = Σ_{b=1}^{ℓ−1} log(1 − ζ_ℓ^b)`, and `log_p p = 0`.
    fn log_prime(&mut self, l: u64, p: u64, coeff: &CycloNum) {
        if l == p {
            return;
        }
        for b in 1..l {
            self.log_one_minus(l, b, coeff);
        }
    }

    fn finish(self) -> LinearForm {
        let mut terms = Vec::new();
        let mut dropped = Vec::new();
        for (atom, c) in self.map {
            if c.is_zero() {
                dropped.push(atom);
            } else {
                terms.push(Term {
                    coefficient: c,
                    atom,
                });
            }
        }
        LinearForm {
            modulus: self.m,
            terms,
            dropped,
            constant: BigRational::zero(),
        }
    }
}

fn check_shape(r: i64, f: u64) -> Result<()> {
    if f < 2 || r < 1 || r as u64 >= f || gcd(r as u64, f) != 1 {
        return Err(Error::Precondition(format!(
            "need 1 <= r < f with gcd(r, f) = 1, got r={r}, f={f}"
        )));
    }
    let fac = factorize(f);
    let odd = fac.iter().filter(|&&(l, _)| l != 2).count();
    let two = fac
        .iter()
        .find(|&&(l, _)| l == 2)
        .map(|&(_, k)| k)
        .unwrap_or(0);
    // prime powers, two-prime products, and twice those
    if fac.len() > 2 && !(fac.len() == 3 && two == 1 && odd == 2) {
        return Err(Error::UnsupportedConductor(f));
    }
    Ok(())
}

fn value_into(b: &mut Builder, p: u64, r: i64, f: u64, sign: i64) {
    for (l, k) in factorize(f) {
        b.log_prime(l, p, &CycloNum::from_int(1, -sign * k as i64));
    }
    for a in 1..f {
        let c = CycloNum::zeta(f, -(a as i64) * r).scale(&BigRational::from_integer(sign.into()));
        b.log_one_minus(f, a, &c);
    }
}

/// The form for `−log_p f + Σ_a ζ_f^{−ar} log_p(1 − ζ_f^a)`.
pub fn value_form(p: u64, r: i64, f: u64) -> Result<LinearForm> {
    check_shape(r, f)?;
    let mut b = Builder::new(f);
    value_into(&mut b, p, r, f, 1);
    Ok(b.finish())
}

/// The difference of the values at `r₁/f₁` and `r₂/f₂`; `γ_p` cancels.
pub fn reduce_difference(p: u64, (r1, f1): (i64, u64), (r2, f2): (i64, u64)) -> Result<LinearForm> {
    check_shape(r1, f1)?;
    check_shape(r2, f2)?;
    let mut b = Builder::new(lcm(f1, f2));
    value_into(&mut b, p, r1, f1, 1);
    value_into(&mut b, p, r2, f2, -1);
    Ok(b.finish())
}

impl LinearForm {
    pub fn empty(modulus: u64) -> Self {
        Builder::new(modulus).finish()
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for t in out.terms.iter_mut() {
            t.coefficient = t.coefficient.neg();
        }
        out.constant = -&out.constant;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut b = Builder::new(lcm(self.modulus, other.modulus));
        for t in self.terms.iter().chain(&other.terms) {
            b.add(t.atom, &t.coefficient);
        }
        let mut out = b.finish();
        out.constant = &self.constant + &other.constant;
        out
    }

    pub fn coefficient(&self, atom: &BasisAtom) -> Option<&CycloNum> {
        self.terms
            .iter()
            .find(|t| &t.atom == atom)
            .map(|t| &t.coefficient)
    }

    /// Least common multiple of every conductor and the coefficient modulus.
    pub fn tower_conductor(&self) -> u64 {
        self.terms
            .iter()
            .fold(self.modulus, |acc, t| lcm(acc, t.atom.conductor()))
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("[{}]·log({})", t.coefficient, t.atom))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The image of `c ∈ Q(ζ_M)` in the tower for `Q_p(ζ_L)`, `M | L`.
fn cyclo_to_local(field: &Arc<CyclotomicLocalField>, c: &CycloNum) -> Result<LocalElement> {
    let c = c.coerce(field.f)?;
    let mut acc = LocalElement::zero(field);
    for (i, a) in c.numerator().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let a = a
            .to_i64()
            .ok_or_else(|| Error::Domain("coefficient too large".into()))?;
        acc = acc.add(&LocalElement::zeta(field, i as i64).mul_int(a));
    }
    let den = c
        .denominator()
        .to_i64()
        .ok_or_else(|| Error::Domain("denominator too large".into()))?;
    if den != 1 {
        acc = acc.div_int(den)?;
    }
    Ok(acc)
}

fn atom_log(field: &Arc<CyclotomicLocalField>, atom: &BasisAtom) -> Result<LocalElement> {
    let step = (field.f / atom.conductor()) as i64;
    let base = log_one_minus_zeta(field, step)?;
    match *atom {
        BasisAtom::OneMinusZeta { .. } => Ok(base),
        BasisAtom::UnitRatio { exponent, .. } => {
            Ok(log_one_minus_zeta(field, step * exponent as i64)?.sub(&base))
        }
    }
}

/// `Σ c_i log_p(atom_i)` in the tower for the common conductor.
pub fn evaluate_form_local(form: &LinearForm, p: u64, n: i64) -> Result<LocalElement> {
    let field = build_field(p, form.tower_conductor(), n.max(1) as u32)?;
    let parts: Vec<LocalElement> = form
        .terms
        .par_iter()
        .map(|t| Ok(cyclo_to_local(&field, &t.coefficient)?.mul(&atom_log(&field, &t.atom)?)))
        .collect::<Result<_>>()?;
    let mut acc = LocalElement::zero(&field);
    for x in &parts {
        acc = acc.add(x);
    }
    Ok(acc)
}

/// The evaluated form projected to `Q_p`, which requires the value to be rational.
pub fn evaluate_form(form: &LinearForm, p: u64, n: i64) -> Result<PadicApprox> {
    if form.terms.is_empty() {
        return PadicApprox::from_ratio(&form.constant, p, n.max(1) as u32);
    }
    let value = project_rational(&evaluate_form_local(form, p, n)?, n - DEFAULT_GUARD)?;
    let c = PadicApprox::from_ratio(&form.constant, p, n.max(1) as u32)?;
    Ok((&value + &c).truncate(n))
}

/// `ψ_p(r/f) + γ_p` or its unramified counterpart, with the route label.
pub fn digamma_value(p: u64, r: i64, f: u64, n: i64) -> Result<(PadicApprox, String)> {
    let (lhs, route) = gauss_lhs(p, r, f, n)?;
    Ok(((&lhs.value + &euler_gamma_p(p, n)?).truncate(n), route))
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub pair1: (i64, u64),
    pub pair2: (i64, u64),
    pub routes: (String, String),
    pub form: LinearForm,
    pub check: VerificationReport,
}

impl ReductionReport {
    pub fn line(&self) -> String {
        format!(
            "reduction p={} {}/{} - {}/{} ({} atoms): valuation {} (need {}) {}",
            self.check.p,
            self.pair1.0,
            self.pair1.1,
            self.pair2.0,
            self.pair2.1,
            self.form.terms.len(),
            self.check.achieved_valuation,
            self.check.required_valuation,
            if self.check.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares the difference of the two values against the evaluated form.
pub fn verify_reduction(
    p: u64,
    pair1: (i64, u64),
    pair2: (i64, u64),
    n: i64,
) -> Result<ReductionReport> {
    let form = reduce_difference(p, pair1, pair2)?;
    let (v1, route1) = digamma_value(p, pair1.0, pair1.1, n)?;
    let (v2, route2) = digamma_value(p, pair2.0, pair2.1, n)?;
    let lhs = (&v1 - &v2).truncate(n);
    let rhs = evaluate_form(&form, p, n)?;
    let mut check =
        VerificationReport::new("reduction", p, n, n - DEFAULT_GUARD, lhs.distance(&rhs)?);
    check.lhs = Some(lhs);
    check.rhs = Some(rhs);
    Ok(ReductionReport {
        pair1,
        pair2,
        routes: (route1, route2),
        form,
        check,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonvanishingReport {
    pub zero_atoms: Vec<BasisAtom>,
    pub nonzero_atoms: Vec<BasisAtom>,
    /// Some unit-ratio coefficient is nonzero.
    pub unit_ratio_not_all_zero: bool,
    pub all_zero: bool,
}

/// Exact audit of which coefficients vanish.
pub fn nonvanishing_check(form: &LinearForm) -> NonvanishingReport {
    let mut zero_atoms = form.dropped.clone();
    let mut nonzero_atoms = Vec::new();
    for t in &form.terms {
        if t.coefficient.is_zero() {
            zero_atoms.push(t.atom);
        } else {
            nonzero_atoms.push(t.atom);
        }
    }
    zero_atoms.sort();
    NonvanishingReport {
        unit_ratio_not_all_zero: nonzero_atoms.iter().any(|a| a.is_unit_ratio()),
        all_zero: nonzero_atoms.is_empty() && form.constant.is_zero(),
        zero_atoms,
        nonzero_atoms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta_sum(m: u64, exps: &[(i64, i64)]) -> CycloNum {
        exps.iter().fold(CycloNum::zero(m), |acc, &(c, e)| {
            acc.add(&CycloNum::zeta(m, e).scale(&BigRational::from_integer(c.into())))
        })
    }

    #[test]
    fn same_prime_conductor() {
        let form = reduce_difference(7, (1, 5), (2, 5)).unwrap();
        let atom = BasisAtom::unit_ratio(5, 2).unwrap();
        assert_eq!(form.terms.len(), 1);
        // ζ^{−2}+ζ^{−3} − ζ^{−4}−ζ^{−6}
        let expected = zeta_sum(5, &[(1, -2), (1, -3), (-1, -4), (-1, -6)]);
        assert_eq!(form.coefficient(&atom), Some(&expected));
        assert!(form
            .dropped
            .contains(&BasisAtom::OneMinusZeta { conductor: 5 }));
    }

    #[test]
    fn prime_power_conductor_keeps_unit_ratios() {
        let form = reduce_difference(3, (1, 9), (2, 9)).unwrap();
        assert!(!form.terms.is_empty());
        assert!(form
            .terms
            .iter()
            .all(|t| t.atom.is_unit_ratio() && t.atom.conductor() == 9));
    }

    #[test]
    fn composite_conductor_splits_by_gcd() {
        let form = reduce_difference(3, (1, 15), (2, 15)).unwrap();
        for t in &form.terms {
            assert!(t.atom.is_unit_ratio());
            assert!([15, 5].contains(&t.atom.conductor()));
        }
        // the (a, 15) = 1 pairing a ↔ 15 − a
        let a = 2i64;
        let expected = zeta_sum(15, &[(1, -a), (1, a), (-1, -2 * a), (-1, 2 * a)]);
        let atom = BasisAtom::unit_ratio(15, 2).unwrap();
        assert_eq!(form.coefficient(&atom), Some(&expected));
    }

    #[test]
    fn antisymmetry_and_cancellation() {
        let a = reduce_difference(3, (1, 15), (4, 15)).unwrap();
        let b = reduce_difference(3, (4, 15), (1, 15)).unwrap();
        assert_eq!(a.terms.len(), b.terms.len());
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert_eq!(x.atom, y.atom);
            assert_eq!(x.coefficient, y.coefficient.neg());
        }
        assert!(a.add(&a.neg()).terms.is_empty());
        assert!(reduce_difference(3, (2, 9), (2, 9))
            .unwrap()
            .terms
            .is_empty());
    }

    #[test]
    fn shapes() {
        assert!(matches!(
            reduce_difference(3, (1, 105), (2, 105)),
            Err(Error::UnsupportedConductor(105))
        ));
        assert!(reduce_difference(3, (1, 30), (7, 30)).is_ok());
        assert!(reduce_difference(3, (3, 9), (1, 9)).is_err());
        assert!(BasisAtom::unit_ratio(9, 3).is_err());
    }

    #[test]
    fn log_prime_identity() {
        // log 5 − Σ_b log(1 − ζ_5^b) evaluated directly
        let mut b = Builder::new(5);
        b.log_prime(5, 7, &CycloNum::one(1));
        let form = b.finish();
        let v = evaluate_form(&form, 7, 6).unwrap();
        let log5 = crate::log::log_qp(&PadicApprox::from_i64(5, 7, 10).unwrap()).unwrap();
        assert!(v.distance(&log5).unwrap().at_least(4));
    }

    #[test]
    fn evaluation_basics() {
        assert!(evaluate_form(&LinearForm::empty(1), 7, 6)
            .unwrap()
            .is_zero());
        let mut b = Builder::new(5);
        b.add(BasisAtom::unit_ratio(5, 2).unwrap(), &CycloNum::one(5));
        let form = b.finish();
        // log_7(1 + ζ_5) is not in Q_7, so projection refuses it
        assert!(evaluate_form(&form, 7, 6).is_err());
        assert!(!evaluate_form_local(&form, 7, 6).unwrap().is_zero());
        let twice = form.add(&form).add(&form.neg());
        assert_eq!(twice.terms.len(), 1);
        let diff = evaluate_form_local(&form.add(&form.neg()), 7, 6);
        assert!(form.add(&form.neg()).terms.is_empty() && diff.is_ok());
        let v = evaluate_form(&reduce_difference(7, (1, 5), (2, 5)).unwrap(), 7, 6).unwrap();
        assert!(!v.is_zero());
    }

    #[test]
    fn nonvanishing() {
        let r = nonvanishing_check(&reduce_difference(7, (1, 5), (2, 5)).unwrap());
        assert!(r.unit_ratio_not_all_zero && !r.all_zero);
        let r = nonvanishing_check(&reduce_difference(7, (1, 5), (4, 5)).unwrap());
        assert!(r.all_zero);
        let r = nonvanishing_check(&reduce_difference(7, (1, 5), (1, 5)).unwrap());
        assert!(r.all_zero);
    }

    #[test]
    fn reduction_prime_conductor() {
        let rep = verify_reduction(7, (1, 5), (2, 5), 5).unwrap();
        assert!(rep.check.pass, "{}", rep.line());
        let rep = verify_reduction(3, (1, 9), (2, 9), 6).unwrap();
        assert!(rep.check.pass, "{}", rep.line());
    }
}
