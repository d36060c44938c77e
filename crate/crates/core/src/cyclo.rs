//! Exact arithmetic in `Q(ζ_m)`: integer numerators in the power basis of
//! `ζ_m` reduced modulo `Φ_m`, over one shared positive denominator.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{cyclotomic_poly, divisors, euler_phi, gcd, lcm};
use crate::error::{Error, Result};
use crate::real::{cis_fraction, Fixed};

fn phi_poly(m: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    cache
        .lock()
        .unwrap()
        .entry(m)
        .or_insert_with(|| Arc::new(cyclotomic_poly(m).into_iter().map(BigInt::from).collect()))
        .clone()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloNum {
    m: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

/// Reduces an integer polynomial modulo the monic `Φ_m`.
fn reduce(mut a: Vec<BigInt>, m: u64) -> Vec<BigInt> {
    let phi = phi_poly(m);
    let n = phi.len() - 1;
    for i in (n..a.len()).rev() {
        let c = std::mem::take(&mut a[i]);
        if c.is_zero() {
            continue;
        }
        for (t, pc) in phi.iter().enumerate().take(n) {
            if !pc.is_zero() {
                a[i - n + t] -= &c * pc;
            }
        }
    }
    a.resize(n, BigInt::zero());
    a
}

impl CycloNum {
    pub fn new(m: u64, num: Vec<BigInt>, den: BigInt) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut x = CycloNum {
            m,
            num: reduce(num, m),
            den,
        };
        x.canonicalize();
        Ok(x)
    }

    fn canonicalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in self.num.iter_mut() {
                *c = &*c / &g;
            }
            self.den = &self.den / &g;
        }
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
        }
    }

    pub fn from_int(m: u64, n: i64) -> Self {
        Self::from_rational(m, &BigRational::from_integer(n.into()))
    }

    pub fn from_rational(m: u64, q: &BigRational) -> Self {
        let mut num = vec![BigInt::zero(); euler_phi(m) as usize];
        num[0] = q.numer().clone();
        Self::new(m, num, q.denom().clone()).expect("nonzero denominator")
    }

    pub fn zero(m: u64) -> Self {
        Self::from_int(m, 0)
    }

    pub fn one(m: u64) -> Self {
        Self::from_int(m, 1)
    }

    /// `ζ_m^j`.
    pub fn zeta(m: u64, j: i64) -> Self {
        let e = j.rem_euclid(m as i64) as usize;
        let mut num = vec![BigInt::zero(); e + 1];
        num[e] = BigInt::one();
        Self::new(m, num, BigInt::one()).expect("valid")
    }

    /// `(1 − ζ_m^a) / (1 − ζ_m) = 1 + ζ + … + ζ^{a−1}` for `a ≥ 1`.
    pub fn unit_ratio(m: u64, a: u64) -> Self {
        let num = vec![BigInt::one(); a as usize];
        Self::new(m, num, BigInt::one()).expect("valid")
    }

    /// `1 − ζ_m^a`.
    pub fn one_minus_zeta(m: u64, a: i64) -> Self {
        Self::one(m).sub(&Self::zeta(m, a))
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn numerator(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    /// Rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.num[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| BigRational::new(self.num[0].clone(), self.den.clone()))
    }

    /// Rewrites the element in `Q(ζ_M)` for a multiple `M` of `m`.
    pub fn coerce(&self, big: u64) -> Result<Self> {
        if !big.is_multiple_of(self.m) {
            return Err(Error::Domain(format!("{} does not divide {big}", self.m)));
        }
        if big == self.m {
            return Ok(self.clone());
        }
        let step = (big / self.m) as usize;
        let mut num = vec![BigInt::zero(); (self.num.len().max(1) - 1) * step + 1];
        for (i, c) in self.num.iter().enumerate() {
            num[i * step] = c.clone();
        }
        Self::new(big, num, self.den.clone())
    }

    fn common(&self, other: &Self) -> (Self, Self) {
        if self.m == other.m {
            return (self.clone(), other.clone());
        }
        let l = lcm(self.m, other.m);
        (self.coerce(l).unwrap(), other.coerce(l).unwrap())
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.common(other);
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| x * &b.den + y * &a.den)
            .collect();
        Self::new(a.m, num, &a.den * &b.den).unwrap()
    }

    pub fn neg(&self) -> Self {
        CycloNum {
            m: self.m,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.common(other);
        let mut prod = vec![BigInt::zero(); a.num.len() + b.num.len()];
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.num.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        Self::new(a.m, prod, &a.den * &b.den).unwrap()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let num = self.num.iter().map(|c| c * q.numer()).collect();
        Self::new(self.m, num, &self.den * q.denom()).unwrap()
    }

    /// `σ_j : ζ ↦ ζ^j`.
    pub fn conjugate(&self, j: i64) -> Result<Self> {
        let jm = j.rem_euclid(self.m as i64) as u64;
        if gcd(jm, self.m) != 1 {
            return Err(Error::Domain(format!(
                "conjugation index {j} not coprime to {}",
                self.m
            )));
        }
        let mut num = vec![BigInt::zero(); self.m as usize];
        for (i, c) in self.num.iter().enumerate() {
            let t = (i as u64 * jm % self.m) as usize;
            num[t] += c;
        }
        Self::new(self.m, num, self.den.clone())
    }

    /// Exponents `j` of the primitive `m`-th roots, i.e. the Galois group.
    pub fn galois_indices(m: u64) -> Vec<u64> {
        (1..=m).filter(|&j| gcd(j, m) == 1).collect()
    }

    /// `N(α)` as `Res(Φ_m, numerator) / den^{φ(m)}`, the determinant of multiplication by the numerator.
    pub fn norm(&self) -> BigRational {
        let n = self.num.len();
        let mut mat: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut shifted = vec![BigInt::zero(); i];
                shifted.extend(self.num.iter().cloned());
                reduce(shifted, self.m)
            })
            .collect();
        let det = bareiss(&mut mat);
        BigRational::new(det, self.den.pow(n as u32))
    }

    /// Norm as the product of all conjugates, an independent check of `norm`.
    pub fn norm_by_conjugates(&self) -> BigRational {
        let mut acc = CycloNum::one(self.m);
        for j in Self::galois_indices(self.m) {
            acc = acc.mul(&self.conjugate(j as i64).unwrap());
        }
        acc.as_rational().expect("norm is rational")
    }

    /// `α^{-1} = Π_{σ ≠ 1} σ(α) / N(α)`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut acc = CycloNum::one(self.m);
        for j in Self::galois_indices(self.m).into_iter().filter(|&j| j != 1) {
            acc = acc.mul(&self.conjugate(j as i64)?);
        }
        let n = self.norm();
        Ok(acc.scale(&n.recip()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut b = base;
        let mut acc = CycloNum::one(self.m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        Ok(acc)
    }

    /// Exact order when the element is a root of unity. The torsion of
    /// `Q(ζ_m)` is `±ζ_m^j`, so it suffices to test `α^{lcm(2, m)} = 1`.
    pub fn root_of_unity_order(&self) -> Option<u64> {
        if self.is_zero() || !self.den.is_one() {
            return None;
        }
        let l = lcm(2, self.m);
        if !self.pow(l as i64).ok()?.is_one() {
            return None;
        }
        divisors(l)
            .into_iter()
            .find(|&t| self.pow(t as i64).map(|x| x.is_one()).unwrap_or(false))
    }

    pub fn is_root_of_unity(&self) -> bool {
        self.root_of_unity_order().is_some()
    }

    /// Largest absolute value among numerator coefficients over the denominator, rounded up.
    pub fn height(&self) -> BigInt {
        let top = self.num.iter().map(|c| c.abs()).max().unwrap_or_default();
        top.div_ceil(&self.den)
    }

    /// Values at every primitive `m`-th root `e^{2πij/m}`, `j` coprime to `m`,
    /// with an a priori error bound.
    pub fn complex_embeddings(&self, digits: u32) -> Result<Vec<Embedding>> {
        if digits < 15 {
            return Err(Error::Domain("at least 15 digits are needed".into()));
        }
        let bits = (digits as f64 * 3.33).ceil() as u32 + 32;
        let out = Self::galois_indices(self.m)
            .into_iter()
            .map(|j| {
                let mut re = Fixed::zero(bits);
                let mut im = Fixed::zero(bits);
                let mut weight = BigInt::zero();
                for (i, c) in self.num.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let (co, si) = cis_fraction(i as i64 * j as i64, self.m as i64, bits);
                    re = re.add(&Fixed { v: &co.v * c, bits });
                    im = im.add(&Fixed { v: &si.v * c, bits });
                    weight += c.abs();
                }
                let re = Fixed {
                    v: re.v.div_floor(&self.den),
                    bits,
                };
                let im = Fixed {
                    v: im.v.div_floor(&self.den),
                    bits,
                };
                // each trig value is off by a few ulps; the floor divisions add one each
                let err = Fixed {
                    v: (weight.div_ceil(&self.den) + 1) * 16 + 2,
                    bits,
                };
                Embedding {
                    index: j,
                    re,
                    im,
                    err,
                }
            })
            .collect();
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Embedding {
    pub index: u64,
    pub re: Fixed,
    pub im: Fixed,
    /// Bound on the error of each of `re` and `im`.
    pub err: Fixed,
}

impl Embedding {
    /// `|z|^2`.
    pub fn abs2(&self) -> Fixed {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }
}

/// Fraction-free determinant; destroys the input.
fn bareiss(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("{c}*z"),
                _ => format!("{c}*z^{i}"),
            })
            .collect();
        let body = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        if self.den.is_one() {
            write!(f, "{body}")
        } else {
            write!(f, "({body})/{}", self.den)
        }
    }
}

impl Serialize for CycloNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            modulus: u64,
            numerator: Vec<String>,
            denominator: String,
        }
        Repr {
            modulus: self.m,
            numerator: self.num.iter().map(|c| c.to_string()).collect(),
            denominator: self.den.to_string(),
        }
        .serialize(s)
    }
}
