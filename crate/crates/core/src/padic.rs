//! Elements of Q_p known to a finite absolute precision.
//!
//! A nonzero approximation is `p^valuation * unit` where `unit` is a residue
//! modulo `p^(precision - valuation)` coprime to `p`; the value is known
//! modulo `p^precision`. Exact zero is a separate variant from "zero at
//! precision", which carries only the bound it is known to.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith::is_prime;
use crate::error::{Error, Result};

/// A valuation in `Q ∪ {∞}`, distinguishing exact zero from zero at a precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(Ratio<i64>),
    /// `precision == None` is exact zero; otherwise the element vanishes
    /// modulo the given power of `p` and nothing more is known.
    Infinite {
        precision: Option<Ratio<i64>>,
    },
}

impl Valuation {
    pub fn finite(v: i64) -> Self {
        Valuation::Finite(Ratio::from_integer(v))
    }

    /// True when the valuation provably satisfies `≥ bound`.
    pub fn at_least(&self, bound: i64) -> bool {
        match self {
            Valuation::Finite(v) => *v >= Ratio::from_integer(bound),
            Valuation::Infinite { precision: None } => true,
            Valuation::Infinite {
                precision: Some(pr),
            } => *pr >= Ratio::from_integer(bound),
        }
    }

    /// The best proven lower bound, `None` for exact zero.
    pub fn lower_bound(&self) -> Option<Ratio<i64>> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite { precision } => *precision,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite { precision: None } => write!(f, "inf"),
            Valuation::Infinite { precision: Some(p) } => write!(f, ">={p}"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Kind {
    ExactZero,
    /// `unit == 0` encodes zero modulo `p^precision`, with `valuation == precision`.
    Approx {
        valuation: i64,
        unit: BigUint,
        precision: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicApprox {
    prime: u64,
    kind: Kind,
}

pub(crate) fn big_pow(p: u64, e: i64) -> BigUint {
    BigUint::from(p).pow(e.max(0) as u32)
}

/// `p`-adic valuation of a nonzero big integer and its cofactor.
pub(crate) fn strip_prime(n: &BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    (v, m)
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from(a % m);
    let m = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    ext.x.mod_floor(&m).to_biguint()
}

fn signed_residue(n: &BigInt, m: &BigUint) -> BigUint {
    let mb = BigInt::from(m.clone());
    n.mod_floor(&mb).to_biguint().expect("non-negative residue")
}

impl PadicApprox {
    fn build(prime: u64, valuation: i64, unit: BigUint, precision: i64) -> Self {
        if precision <= valuation {
            return Self::zero_at(prime, precision);
        }
        let pb = BigUint::from(prime);
        let mut unit = unit % big_pow(prime, precision - valuation);
        if unit.is_zero() {
            return Self::zero_at(prime, precision);
        }
        let mut valuation = valuation;
        while (&unit % &pb).is_zero() {
            unit /= &pb;
            valuation += 1;
        }
        let unit = unit % big_pow(prime, precision - valuation);
        PadicApprox {
            prime,
            kind: Kind::Approx {
                valuation,
                unit,
                precision,
            },
        }
    }

    pub fn exact_zero(prime: u64) -> Self {
        PadicApprox {
            prime,
            kind: Kind::ExactZero,
        }
    }

    pub fn zero_at(prime: u64, precision: i64) -> Self {
        PadicApprox {
            prime,
            kind: Kind::Approx {
                valuation: precision,
                unit: BigUint::zero(),
                precision,
            },
        }
    }

    /// Image of `num/den` in Q_p, correct modulo `p^(ν + rel_precision)`.
    pub fn from_rational(
        num: &BigInt,
        den: &BigInt,
        prime: u64,
        rel_precision: u32,
    ) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        if rel_precision == 0 {
            return Err(Error::Domain("precision must be positive".into()));
        }
        if num.is_zero() {
            return Ok(Self::exact_zero(prime));
        }
        let (va, a) = strip_prime(num, prime);
        let (vb, b) = strip_prime(den, prime);
        let m = big_pow(prime, rel_precision as i64);
        let a = signed_residue(&a, &m);
        let b = signed_residue(&b, &m);
        let binv = mod_inverse(&b, &m).expect("cofactor is a unit");
        let v = va - vb;
        Ok(Self::build(prime, v, a * binv, v + rel_precision as i64))
    }

    pub fn from_i64(n: i64, prime: u64, rel_precision: u32) -> Result<Self> {
        Self::from_rational(&BigInt::from(n), &BigInt::one(), prime, rel_precision)
    }

    pub fn from_ratio(q: &BigRational, prime: u64, rel_precision: u32) -> Result<Self> {
        Self::from_rational(q.numer(), q.denom(), prime, rel_precision)
    }

    /// An integer known modulo `p^abs_precision`.
    pub fn from_integer_mod(n: &BigInt, prime: u64, abs_precision: i64) -> Self {
        if abs_precision <= 0 {
            return Self::zero_at(prime, abs_precision);
        }
        let m = big_pow(prime, abs_precision);
        Self::build(prime, 0, signed_residue(n, &m), abs_precision)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> Valuation {
        match &self.kind {
            Kind::ExactZero => Valuation::Infinite { precision: None },
            Kind::Approx {
                unit, precision, ..
            } if unit.is_zero() => Valuation::Infinite {
                precision: Some(Ratio::from_integer(*precision)),
            },
            Kind::Approx { valuation, .. } => Valuation::finite(*valuation),
        }
    }

    /// Integer valuation of a nonzero approximation.
    pub fn finite_valuation(&self) -> Option<i64> {
        match &self.kind {
            Kind::Approx {
                valuation, unit, ..
            } if !unit.is_zero() => Some(*valuation),
            _ => None,
        }
    }

    /// Absolute precision; `None` for exact zero.
    pub fn precision(&self) -> Option<i64> {
        match &self.kind {
            Kind::ExactZero => None,
            Kind::Approx { precision, .. } => Some(*precision),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.kind {
            Kind::Approx { unit, .. } if !unit.is_zero() => Some(unit),
            _ => None,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::ExactZero)
    }

    /// Zero either exactly or at the carried precision.
    pub fn is_zero(&self) -> bool {
        self.unit().is_none()
    }

    fn parts(&self) -> Option<(i64, BigUint, i64)> {
        match &self.kind {
            Kind::ExactZero => None,
            Kind::Approx {
                valuation,
                unit,
                precision,
            } => Some((*valuation, unit.clone(), *precision)),
        }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let (Some((v1, u1, p1)), Some((v2, u2, p2))) = (self.parts(), other.parts()) else {
            return Ok(if self.is_exact_zero() {
                other.clone()
            } else {
                self.clone()
            });
        };
        let prec = p1.min(p2);
        let v = v1.min(v2);
        if prec <= v {
            return Ok(Self::zero_at(self.prime, prec));
        }
        let s = u1 * big_pow(self.prime, v1 - v) + u2 * big_pow(self.prime, v2 - v);
        Ok(Self::build(self.prime, v, s, prec))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let (Some((v1, u1, p1)), Some((v2, u2, p2))) = (self.parts(), other.parts()) else {
            return Ok(Self::exact_zero(self.prime));
        };
        let v = v1 + v2;
        let rel = (p1 - v1).min(p2 - v2);
        Ok(Self::build(self.prime, v, u1 * u2, v + rel))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let Some((v2, u2, p2)) = other.parts().filter(|(_, u, _)| !u.is_zero()) else {
            return Err(Error::DivisionByZero);
        };
        let Some((v1, u1, p1)) = self.parts() else {
            return Ok(Self::exact_zero(self.prime));
        };
        let v = v1 - v2;
        let rel = (p1 - v1).min(p2 - v2);
        if rel <= 0 {
            return Ok(Self::zero_at(self.prime, v + rel));
        }
        let m = big_pow(self.prime, rel);
        let inv = mod_inverse(&u2, &m).expect("unit");
        Ok(Self::build(self.prime, v, u1 * inv, v + rel))
    }

    fn neg_ref(&self) -> Self {
        match self.parts() {
            None => self.clone(),
            Some((v, u, p)) => {
                if u.is_zero() {
                    return self.clone();
                }
                let m = big_pow(self.prime, p - v);
                Self::build(self.prime, v, &m - u, p)
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc.unwrap_or_else(|| {
            let rel = self
                .precision()
                .map(|p| p - self.finite_valuation().unwrap_or(p))
                .unwrap_or(64)
                .max(1);
            Self::build(self.prime, 0, BigUint::one(), rel)
        })
    }

    /// Multiplies by `p^k` exactly.
    pub fn shift(&self, k: i64) -> Self {
        match &self.kind {
            Kind::ExactZero => self.clone(),
            Kind::Approx {
                valuation,
                unit,
                precision,
            } => PadicApprox {
                prime: self.prime,
                kind: Kind::Approx {
                    valuation: valuation + k,
                    unit: unit.clone(),
                    precision: precision + k,
                },
            },
        }
    }

    /// Forgets digits beyond `p^abs_precision`.
    pub fn truncate(&self, abs_precision: i64) -> Self {
        match self.parts() {
            None => self.clone(),
            Some((v, u, p)) => Self::build(self.prime, v, u, p.min(abs_precision)),
        }
    }

    /// Multiplication by a small integer, cheaper than building it first.
    pub fn mul_int(&self, n: i64) -> Self {
        if n == 0 {
            return Self::exact_zero(self.prime);
        }
        let rel = self.relative_precision().unwrap_or(64).max(1) as u32;
        let c = Self::from_i64(n, self.prime, rel + 64).expect("prime checked at construction");
        self * &c
    }

    pub fn relative_precision(&self) -> Option<i64> {
        self.parts().map(|(v, _, p)| p - v)
    }

    /// Residue of a value with non-negative valuation modulo `p^abs`.
    pub fn residue(&self, abs: i64) -> Option<BigUint> {
        match self.parts() {
            None => Some(BigUint::zero()),
            Some((v, u, p)) => {
                if v < 0 && !u.is_zero() {
                    return None;
                }
                if abs > p {
                    return None;
                }
                if u.is_zero() {
                    return Some(BigUint::zero());
                }
                Some((u * big_pow(self.prime, v)) % big_pow(self.prime, abs))
            }
        }
    }

    /// Signed representative of a `Z_p` value in `(-p^abs/2, p^abs/2]`.
    pub fn signed_residue(&self, abs: i64) -> Option<BigInt> {
        let r = BigInt::from(self.residue(abs)?);
        let m = BigInt::from(big_pow(self.prime, abs));
        Some(if &r * 2 > m { r - m } else { r })
    }

    /// Base-`p` digits of the unit, least significant first.
    pub fn unit_digits(&self) -> Vec<u64> {
        let Some((v, u, p)) = self.parts() else {
            return Vec::new();
        };
        let pb = BigUint::from(self.prime);
        let mut u = u;
        (0..(p - v).max(0))
            .map(|_| {
                let (q, r) = u.div_rem(&pb);
                u = q;
                r.to_u64().unwrap_or(0)
            })
            .collect()
    }

    /// The difference valuation `ν(self - other)`.
    pub fn distance(&self, other: &Self) -> Result<Valuation> {
        Ok(self.checked_sub(other)?.valuation())
    }

    /// Reconstructs a small rational from the digits, used only for display and tests.
    pub fn to_i128_exact(&self) -> Option<i128> {
        let p = self.precision()?;
        let r = self.signed_residue(p)?;
        r.to_i128()
    }
}

impl Add for &PadicApprox {
    type Output = PadicApprox;
    fn add(self, rhs: Self) -> PadicApprox {
        self.checked_add(rhs).expect("p-adic prime mismatch")
    }
}

impl Sub for &PadicApprox {
    type Output = PadicApprox;
    fn sub(self, rhs: Self) -> PadicApprox {
        self.checked_sub(rhs).expect("p-adic prime mismatch")
    }
}

impl Mul for &PadicApprox {
    type Output = PadicApprox;
    fn mul(self, rhs: Self) -> PadicApprox {
        self.checked_mul(rhs).expect("p-adic prime mismatch")
    }
}

impl Neg for &PadicApprox {
    type Output = PadicApprox;
    fn neg(self) -> PadicApprox {
        self.neg_ref()
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::ExactZero => write!(f, "0"),
            Kind::Approx {
                unit, precision, ..
            } if unit.is_zero() => write!(f, "O({}^{})", self.prime, precision),
            Kind::Approx {
                valuation,
                precision,
                ..
            } => {
                let digits: Vec<String> =
                    self.unit_digits().iter().map(|d| d.to_string()).collect();
                write!(
                    f,
                    "{}^{} ·({}) + O({}^{})",
                    self.prime,
                    valuation,
                    digits.join(" "),
                    self.prime,
                    precision
                )
            }
        }
    }
}

#[derive(Serialize)]
struct PadicJson<'a> {
    prime: u64,
    valuation: Option<i64>,
    unit: String,
    precision: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    digits: Option<&'a str>,
}

impl Serialize for PadicApprox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (valuation, unit) = match &self.kind {
            Kind::ExactZero => (None, "0".to_string()),
            Kind::Approx {
                valuation, unit, ..
            } => (Some(*valuation), unit.to_str_radix(10)),
        };
        PadicJson {
            prime: self.prime,
            valuation,
            unit,
            precision: self.precision(),
            digits: None,
        }
        .serialize(s)
    }
}

/// `ν_p` of a nonzero rational.
pub fn rational_valuation(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let (a, _) = strip_prime(q.numer(), p);
    let (b, _) = strip_prime(q.denom(), p);
    Some(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, p: u64, n: u32) -> PadicApprox {
        PadicApprox::from_rational(&BigInt::from(a), &BigInt::from(b), p, n).unwrap()
    }

    #[test]
    fn valuations() {
        assert_eq!(q(50, 1, 5, 4).valuation(), Valuation::finite(2));
        assert_eq!(q(8, 9, 3, 4).valuation(), Valuation::finite(-2));
        assert_eq!(
            q(0, 1, 7, 4).valuation(),
            Valuation::Infinite { precision: None }
        );
        assert_eq!(q(5, 1, 5, 3).valuation(), Valuation::finite(1));
    }

    #[test]
    fn from_rational_examples() {
        let h = q(1, 2, 3, 3);
        assert_eq!(h.finite_valuation(), Some(0));
        assert_eq!(h.unit().unwrap(), &BigUint::from(14u32));
        let one = q(1, 1, 11, 5);
        assert_eq!(one.unit().unwrap(), &BigUint::one());
        let x = q(9, 5, 3, 2);
        assert_eq!(x.finite_valuation(), Some(2));
        assert_eq!(x.unit().unwrap(), &BigUint::from(2u32));
        assert!(PadicApprox::from_rational(&BigInt::one(), &BigInt::zero(), 3, 3).is_err());
        assert!(PadicApprox::from_rational(&BigInt::one(), &BigInt::one(), 4, 3).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let x = q(7, 3, 5, 6);
        assert_eq!(&x + &PadicApprox::exact_zero(5), x);
        let six = &q(2, 1, 5, 6) * &q(3, 1, 5, 6);
        assert_eq!(six, q(6, 1, 5, 6));
        let s = &q(1, 2, 3, 3) + &q(1, 2, 3, 3);
        assert_eq!(s.unit().unwrap(), &BigUint::one());
        assert_eq!(s.finite_valuation(), Some(0));
        assert!(q(1, 1, 3, 3).checked_add(&q(1, 1, 5, 3)).is_err());
        assert_eq!(
            q(1, 1, 3, 3).checked_div(&PadicApprox::zero_at(3, 4)),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn cancellation_gives_zero_at_precision() {
        let a = q(1, 3, 3, 4);
        let d = &a - &a;
        assert!(!d.is_exact_zero());
        assert!(d.is_zero());
        assert_eq!(d.precision(), Some(3));
    }

    #[test]
    fn precision_propagates_through_division() {
        let a = q(1, 1, 3, 5);
        let b = q(9, 1, 3, 5);
        let c = a.checked_div(&b).unwrap();
        assert_eq!(c.finite_valuation(), Some(-2));
        assert_eq!(c.precision(), Some(3));
    }
}
