//! The local cyclotomic field `Q_p(ζ_f)` as the tower
//! `Q_p(ζ_{f*})(ζ_{p^k})`, `f = p^k f*`, `p ∤ f*`.
//!
//! Elements are coordinate vectors over the integral basis `x^i y^j`
//! (`i < d`, `j < e`), where `x` is a root of the canonical factor `g` of
//! `Φ_{f*}` and `y` a root of `Φ_{p^k}`. Coordinates live in `Z/p^W` with
//! `p^W ≤ 2^62`, scaled by a power of `p`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Ratio;
use serde::Serialize;

use crate::arith::{euler_phi, factorize, is_prime, mult_order, split_prime_part};
use crate::error::{Error, Result};
use crate::padic::{PadicApprox, Valuation};
use crate::zpoly::{self, addm, mulm, subm};

/// Largest `W` with `p^W ≤ 2^62`.
pub fn max_digits(p: u64) -> u32 {
    let mut w = 0;
    let mut acc: u128 = 1;
    while acc * p as u128 <= 1u128 << 62 {
        acc *= p as u128;
        w += 1;
    }
    w
}

#[derive(Debug, Serialize)]
pub struct CyclotomicLocalField {
    pub p: u64,
    pub f: u64,
    pub k: u32,
    pub f_star: u64,
    pub pk: u64,
    pub d: usize,
    pub e: usize,
    /// Coordinates are stored modulo `p^digits`.
    pub digits: u32,
    #[serde(skip)]
    pub modulus: u64,
    /// Monic lift of the canonical factor of `Φ_{f*}`, low degree first.
    #[serde(serialize_with = "ser_decimal")]
    pub g: Vec<u64>,
    /// Defining polynomial of the residue field `F_{p^d}` over `F_p`.
    pub residue_poly: Vec<u64>,
    /// Base-`p` encoding of the chosen generator of `F_{p^d}^×`.
    pub generator: u64,
    #[serde(skip)]
    phi_pk: Vec<u64>,
}

fn ser_decimal<S: serde::Serializer>(v: &[u64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&c.to_string())?;
    }
    seq.end()
}

fn decode(mut n: u64, p: u64, d: usize) -> Vec<u64> {
    let mut v = Vec::with_capacity(d);
    for _ in 0..d {
        v.push(n % p);
        n /= p;
    }
    zpoly::trim(&mut v);
    v
}

/// Least monic irreducible polynomial of degree `d` over `F_p`, ordering the
/// lower coefficients as a base-`p` integer.
fn least_irreducible(p: u64, d: usize) -> Vec<u64> {
    let mut n = 0u64;
    loop {
        let mut f = decode(n, p, d);
        f.resize(d, 0);
        f.push(1);
        if zpoly::is_irreducible(&f, p) {
            return f;
        }
        n += 1;
    }
}

fn least_generator(p: u64, d: usize, modp: &[u64]) -> u64 {
    let order = (p as u128).pow(d as u32) - 1;
    let qs: Vec<u64> = factorize(order as u64)
        .into_iter()
        .map(|(q, _)| q)
        .collect();
    (1..)
        .find(|&t| {
            let a = decode(t, p, d);
            !a.is_empty()
                && qs
                    .iter()
                    .all(|&q| zpoly::powmod(&a, order / q as u128, modp, p) != vec![1])
        })
        .expect("the multiplicative group is cyclic")
}

/// `Π_i (Y − β^{p^i})` over `F_{p^d}`, which has coefficients in `F_p`.
fn conjugate_product(beta: &[u64], p: u64, d: usize, modp: &[u64]) -> Vec<u64> {
    let mut prod: Vec<Vec<u64>> = vec![vec![1]];
    let mut root = beta.to_vec();
    for _ in 0..d {
        let neg = zpoly::sub(&[], &root, p);
        let mut next = vec![Vec::new(); prod.len() + 1];
        for (i, c) in prod.iter().enumerate() {
            next[i + 1] = zpoly::add(&next[i + 1], c, p);
            next[i] = zpoly::add(&next[i], &zpoly::mulmod(c, &neg, modp, p), p);
        }
        prod = next;
        root = zpoly::powmod(&root, p as u128, modp, p);
    }
    prod.into_iter()
        .map(|c| {
            assert!(c.len() <= 1, "conjugate product must be F_p-rational");
            c.first().copied().unwrap_or(0)
        })
        .collect()
}

/// Lifts a coprime factorization `phi ≡ g·h (mod p)` to `mod p^w`, one digit per step.
fn hensel_lift(phi: &[u64], g: &[u64], h: &[u64], p: u64, w: u32) -> Vec<u64> {
    let (a, b) = zpoly::xgcd(g, h, p).expect("factors are coprime mod p");
    let mut g = g.to_vec();
    let mut h = h.to_vec();
    let mut pj: u64 = 1;
    let full = p.pow(w);
    for _ in 1..w {
        pj *= p;
        let err = zpoly::sub(phi, &zpoly::mul(&g, &h, full), full);
        let err: Vec<u64> = err
            .iter()
            .map(|&c| {
                debug_assert_eq!(c % pj, 0);
                (c / pj) % p
            })
            .collect();
        let dg = zpoly::rem(
            &zpoly::mul(&b, &err, p),
            &g.iter().map(|c| c % p).collect::<Vec<_>>(),
            p,
        );
        let dh = zpoly::rem(
            &zpoly::mul(&a, &err, p),
            &h.iter().map(|c| c % p).collect::<Vec<_>>(),
            p,
        );
        g = zpoly::add(&g, &zpoly::scale(&dg, pj, full), full);
        h = zpoly::add(&h, &zpoly::scale(&dh, pj, full), full);
    }
    g
}

fn field_cache() -> &'static Mutex<HashMap<(u64, u64), Arc<CyclotomicLocalField>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Arc<CyclotomicLocalField>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches) the tower for `Q_p(ζ_f)`. The requested precision `n`
/// only has to fit in the fixed coordinate width.
pub fn build_field(p: u64, f: u64, n: u32) -> Result<Arc<CyclotomicLocalField>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if f == 0 {
        return Err(Error::Domain("conductor must be positive".into()));
    }
    let w = max_digits(p);
    if n > w {
        return Err(Error::PrecisionOverflow(n));
    }
    if let Some(field) = field_cache().lock().unwrap().get(&(p, f)) {
        return Ok(field.clone());
    }
    let field = Arc::new(CyclotomicLocalField::new(p, f)?);
    Ok(field_cache()
        .lock()
        .unwrap()
        .entry((p, f))
        .or_insert(field)
        .clone())
}

impl CyclotomicLocalField {
    fn new(p: u64, f: u64) -> Result<Self> {
        let (k, f_star) = split_prime_part(f, p);
        let pk = p.pow(k);
        let d = mult_order(p % f_star.max(1), f_star)? as usize;
        let e = euler_phi(pk) as usize;
        let digits = max_digits(p);
        let modulus = p.pow(digits);
        let residue_poly = least_irreducible(p, d);
        let generator = least_generator(p, d, &residue_poly);
        let order = (p as u128).pow(d as u32) - 1;
        let beta = zpoly::powmod(
            &decode(generator, p, d),
            order / f_star as u128,
            &residue_poly,
            p,
        );
        let g_bar = conjugate_product(&beta, p, d, &residue_poly);
        let phi_star = zpoly::cyclotomic_mod(f_star, modulus);
        let phi_bar: Vec<u64> = phi_star.iter().map(|c| c % p).collect();
        let (h_bar, r) = zpoly::divrem(&phi_bar, &g_bar, p);
        assert!(
            r.is_empty(),
            "canonical factor must divide the cyclotomic polynomial"
        );
        let g = if h_bar.len() == 1 {
            phi_star
        } else {
            hensel_lift(&phi_star, &g_bar, &h_bar, p, digits)
        };
        Ok(CyclotomicLocalField {
            p,
            f,
            k,
            f_star,
            pk,
            d,
            e,
            digits,
            modulus,
            g,
            residue_poly,
            generator,
            phi_pk: zpoly::cyclotomic_mod(pk, modulus),
        })
    }

    pub fn degree(&self) -> usize {
        self.d * self.e
    }

    /// Multiplies coordinate vectors modulo `p^digits` and reduces by `g(x)` and `Φ_{p^k}(y)`.
    fn mul_coords(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (d, e, m) = (self.d, self.e, self.modulus);
        let (dd, ee) = (2 * d - 1, 2 * e - 1);
        let mut acc = vec![0u128; dd * ee];
        let mm = m as u128;
        for j1 in 0..e {
            for i1 in 0..d {
                let x = a[j1 * d + i1];
                if x == 0 {
                    continue;
                }
                for j2 in 0..e {
                    let row = (j1 + j2) * dd + i1;
                    for i2 in 0..d {
                        let y = b[j2 * d + i2];
                        if y != 0 {
                            acc[row + i2] += (x as u128 * y as u128) % mm;
                        }
                    }
                }
            }
        }
        let mut c: Vec<u64> = acc.into_iter().map(|v| (v % mm) as u64).collect();
        for jj in (e..ee).rev() {
            for ii in 0..dd {
                let top = c[jj * dd + ii];
                if top == 0 {
                    continue;
                }
                for t in 0..e {
                    let coef = self.phi_pk[t];
                    if coef != 0 {
                        let idx = (jj - e + t) * dd + ii;
                        c[idx] = subm(c[idx], mulm(top, coef, m), m);
                    }
                }
                c[jj * dd + ii] = 0;
            }
        }
        let mut out = vec![0u64; d * e];
        for j in 0..e {
            let row = &mut c[j * dd..(j + 1) * dd];
            for ii in (d..dd).rev() {
                let top = row[ii];
                if top == 0 {
                    continue;
                }
                for t in 0..d {
                    row[ii - d + t] = subm(row[ii - d + t], mulm(top, self.g[t], m), m);
                }
                row[ii] = 0;
            }
            out[j * d..(j + 1) * d].copy_from_slice(&row[..d]);
        }
        out
    }

    /// JSON descriptor for reports.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("field descriptor serializes")
    }
}

/// An element `p^scale · Σ c_ij x^i y^j` with coordinates known modulo
/// `p^rel`, so the element is known modulo `p^(scale + rel)`.
#[derive(Clone, Debug)]
pub struct LocalElement {
    field: Arc<CyclotomicLocalField>,
    scale: i64,
    rel: u32,
    coords: Vec<u64>,
    exact_zero: bool,
}

impl PartialEq for LocalElement {
    fn eq(&self, other: &Self) -> bool {
        same_field(&self.field, &other.field)
            && self.exact_zero == other.exact_zero
            && self.scale == other.scale
            && self.rel == other.rel
            && self.coords == other.coords
    }
}

fn same_field(a: &Arc<CyclotomicLocalField>, b: &Arc<CyclotomicLocalField>) -> bool {
    Arc::ptr_eq(a, b) || (a.p == b.p && a.f == b.f)
}

fn pow_u64(p: u64, e: u32) -> u64 {
    p.pow(e)
}

fn val_u64(mut c: u64, p: u64) -> u32 {
    let mut v = 0;
    while c.is_multiple_of(p) {
        c /= p;
        v += 1;
    }
    v
}

impl LocalElement {
    fn from_parts(
        field: &Arc<CyclotomicLocalField>,
        scale: i64,
        rel: i64,
        coords: Vec<u64>,
    ) -> Self {
        let rel = rel.clamp(0, field.digits as i64) as u32;
        let mut el = LocalElement {
            field: field.clone(),
            scale,
            rel,
            coords,
            exact_zero: false,
        };
        el.normalize();
        el
    }

    fn normalize(&mut self) {
        let p = self.field.p;
        let m = pow_u64(p, self.rel);
        for c in self.coords.iter_mut() {
            *c %= m;
        }
        let v = self
            .coords
            .iter()
            .filter(|&&c| c != 0)
            .map(|&c| val_u64(c, p))
            .min();
        match v {
            None => {
                self.scale += self.rel as i64;
                self.rel = 0;
            }
            Some(0) => {}
            Some(v) => {
                let pv = pow_u64(p, v);
                for c in self.coords.iter_mut() {
                    *c /= pv;
                }
                self.scale += v as i64;
                self.rel -= v;
            }
        }
    }

    pub fn zero(field: &Arc<CyclotomicLocalField>) -> Self {
        LocalElement {
            field: field.clone(),
            scale: 0,
            rel: 0,
            coords: vec![0; field.degree()],
            exact_zero: true,
        }
    }

    pub fn zero_at(field: &Arc<CyclotomicLocalField>, abs: i64) -> Self {
        Self::from_parts(field, abs, 0, vec![0; field.degree()])
    }

    pub fn one(field: &Arc<CyclotomicLocalField>) -> Self {
        Self::from_int(field, 1)
    }

    pub fn from_int(field: &Arc<CyclotomicLocalField>, n: i64) -> Self {
        if n == 0 {
            return Self::zero(field);
        }
        let mut coords = vec![0; field.degree()];
        coords[0] = (n as i128).rem_euclid(field.modulus as i128) as u64;
        Self::from_parts(field, 0, field.digits as i64, coords)
    }

    pub fn from_padic(field: &Arc<CyclotomicLocalField>, x: &PadicApprox) -> Result<Self> {
        if x.prime() != field.p {
            return Err(Error::PrimeMismatch(x.prime(), field.p));
        }
        if x.is_exact_zero() {
            return Ok(Self::zero(field));
        }
        let prec = x.precision().expect("not exact zero");
        match x.finite_valuation() {
            None => Ok(Self::zero_at(field, prec)),
            Some(v) => {
                let rel = (prec - v).min(field.digits as i64);
                let mut coords = vec![0; field.degree()];
                coords[0] = (x.unit().unwrap() % pow_u64(field.p, rel as u32))
                    .try_into()
                    .unwrap();
                Ok(Self::from_parts(field, v, rel, coords))
            }
        }
    }

    /// Builds `Σ c_ij x^i y^j` from coordinates indexed `j·d + i`, known to full width.
    pub fn from_coords(field: &Arc<CyclotomicLocalField>, coords: &[i64]) -> Self {
        assert_eq!(coords.len(), field.degree());
        let c = coords
            .iter()
            .map(|&v| (v as i128).rem_euclid(field.modulus as i128) as u64)
            .collect();
        Self::from_parts(field, 0, field.digits as i64, c)
    }

    pub fn field(&self) -> &Arc<CyclotomicLocalField> {
        &self.field
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact_zero
    }

    /// Zero exactly or at the carried precision.
    pub fn is_zero(&self) -> bool {
        self.exact_zero || self.rel == 0
    }

    /// Absolute precision `N` such that the element is known modulo `p^N O_K`.
    pub fn precision(&self) -> Option<i64> {
        (!self.exact_zero).then_some(self.scale + self.rel as i64)
    }

    fn check(&self, other: &Self) {
        assert!(
            same_field(&self.field, &other.field),
            "elements of different fields"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        if self.exact_zero {
            return other.clone();
        }
        if other.exact_zero {
            return self.clone();
        }
        let s = self.scale.min(other.scale);
        let abs = self.precision().unwrap().min(other.precision().unwrap());
        let rel = abs - s;
        if rel <= 0 {
            return Self::zero_at(&self.field, abs);
        }
        let m = pow_u64(self.field.p, rel as u32);
        let lift = |x: &Self| -> Vec<u64> {
            let sh = x.scale - s;
            if sh >= rel {
                return vec![0; x.coords.len()];
            }
            let f = pow_u64(self.field.p, sh as u32);
            x.coords.iter().map(|&c| mulm(c, f, m)).collect()
        };
        let a = lift(self);
        let b = lift(other);
        let c = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| addm(x % m, y % m, m))
            .collect();
        Self::from_parts(&self.field, s, rel, c)
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let m = pow_u64(self.field.p, self.rel);
        let c = self.coords.iter().map(|&c| (m - c) % m).collect();
        Self::from_parts(&self.field, self.scale, self.rel as i64, c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        if self.exact_zero || other.exact_zero {
            return Self::zero(&self.field);
        }
        let scale = self.scale + other.scale;
        let rel = self.rel.min(other.rel);
        if rel == 0 {
            return Self::zero_at(&self.field, scale);
        }
        let c = self.field.mul_coords(&self.coords, &other.coords);
        Self::from_parts(&self.field, scale, rel as i64, c)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut r = self.clone();
        if !r.exact_zero {
            r.scale += k;
        }
        r
    }

    pub fn mul_padic(&self, x: &PadicApprox) -> Result<Self> {
        Ok(self.mul(&Self::from_padic(&self.field, x)?))
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.mul(&Self::from_int(&self.field, n))
    }

    /// Division by a nonzero integer; a factor `p^a` of `n` lowers the scale.
    pub fn div_int(&self, n: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DivisionByZero);
        }
        if self.exact_zero {
            return Ok(self.clone());
        }
        let p = self.field.p;
        let (a, rest) = split_prime_part(n.unsigned_abs(), p);
        let inv = zpoly::invm(rest % self.field.modulus, self.field.modulus).expect("coprime to p");
        let inv = if n < 0 { self.field.modulus - inv } else { inv };
        let r = self.mul(&Self::from_parts(
            &self.field,
            0,
            self.field.digits as i64,
            {
                let mut c = vec![0; self.field.degree()];
                c[0] = inv;
                c
            },
        ));
        Ok(r.shift(-(a as i64)))
    }

    /// Forgets everything beyond `p^abs`.
    pub fn truncate(&self, abs: i64) -> Self {
        if self.exact_zero || self.precision().unwrap() <= abs {
            return self.clone();
        }
        Self::from_parts(
            &self.field,
            self.scale,
            abs - self.scale,
            self.coords.clone(),
        )
    }

    /// Coordinate of `x^i y^j` as a p-adic number.
    pub fn coordinate(&self, i: usize, j: usize) -> PadicApprox {
        let p = self.field.p;
        if self.exact_zero {
            return PadicApprox::exact_zero(p);
        }
        let c = self.coords[j * self.field.d + i];
        PadicApprox::from_integer_mod(&c.into(), p, self.rel as i64).shift(self.scale)
    }

    pub fn constant_part(&self) -> PadicApprox {
        self.coordinate(0, 0)
    }

    /// Smallest valuation among the coordinates other than the constant one.
    pub fn nonconstant_valuation(&self) -> Valuation {
        if self.exact_zero {
            return Valuation::Infinite { precision: None };
        }
        let p = self.field.p;
        let v = self.coords[1..]
            .iter()
            .filter(|&&c| c != 0)
            .map(|&c| val_u64(c, p))
            .min();
        match v {
            Some(v) => Valuation::finite(self.scale + v as i64),
            None => Valuation::Infinite {
                precision: Some(Ratio::from_integer(self.precision().unwrap())),
            },
        }
    }
}

impl LocalElement {
    /// `ζ_f^j = x^(j mod f*) · y^(j mod p^k)`.
    pub fn zeta(field: &Arc<CyclotomicLocalField>, j: i64) -> Self {
        let fl = field;
        let jm = j.rem_euclid(fl.f as i64) as u64;
        let m = fl.modulus;
        let xa = zpoly::powmod(&[0, 1], (jm % fl.f_star) as u128, &fl.g, m);
        let yb = zpoly::powmod(&[0, 1], (jm % fl.pk) as u128, &fl.phi_pk, m);
        let mut coords = vec![0u64; fl.degree()];
        for (j, &b) in yb.iter().enumerate() {
            for (i, &a) in xa.iter().enumerate() {
                coords[j * fl.d + i] = mulm(a, b, m);
            }
        }
        Self::from_parts(fl, 0, fl.digits as i64, coords)
    }

    /// Coordinates in the basis `x^i z^j`, `z = y − 1`, modulo `p^rel`.
    fn z_coords(&self) -> Vec<u64> {
        let (d, e) = (self.field.d, self.field.e);
        let m = pow_u64(self.field.p, self.rel);
        if m == 1 {
            return vec![0; d * e];
        }
        let mut binom = vec![vec![0u64; e]; e];
        for j in 0..e {
            binom[j][0] = 1 % m;
            for i in 1..=j {
                binom[j][i] = addm(
                    binom[j - 1][i - 1],
                    if i < j { binom[j - 1][i] } else { 0 },
                    m,
                );
            }
        }
        let mut w = vec![0u64; d * e];
        for i in 0..e {
            for j in i..e {
                let b = binom[j][i];
                for x in 0..d {
                    w[i * d + x] = addm(w[i * d + x], mulm(b, self.coords[j * d + x] % m, m), m);
                }
            }
        }
        w
    }

    /// `ν_p` of the element, in `(1/e)Z`; an element whose coordinates all
    /// vanish at precision reports its precision as an unknown zero.
    pub fn valuation(&self) -> Valuation {
        if self.exact_zero {
            return Valuation::Infinite { precision: None };
        }
        let (d, e, p) = (self.field.d, self.field.e, self.field.p);
        let w = self.z_coords();
        let best = (0..e)
            .filter_map(|i| {
                w[i * d..(i + 1) * d]
                    .iter()
                    .filter(|&&c| c != 0)
                    .map(|&c| val_u64(c, p))
                    .min()
                    .map(|v| Ratio::new(v as i64 * e as i64 + i as i64, e as i64))
            })
            .min();
        match best {
            Some(v) => Valuation::Finite(v + Ratio::from_integer(self.scale)),
            None => Valuation::Infinite {
                precision: Some(Ratio::from_integer(self.precision().unwrap())),
            },
        }
    }

    /// Norm to `Q_p` as the determinant of multiplication by the element.
    pub fn norm(&self) -> PadicApprox {
        let p = self.field.p;
        if self.exact_zero {
            return PadicApprox::exact_zero(p);
        }
        let n = self.field.degree();
        if self.rel == 0 {
            return PadicApprox::zero_at(p, self.scale * n as i64);
        }
        let m = pow_u64(p, self.rel);
        let mut rows: Vec<Vec<u64>> = (0..n)
            .map(|b| {
                let mut basis = vec![0u64; n];
                basis[b] = 1;
                self.field
                    .mul_coords(&self.coords, &basis)
                    .into_iter()
                    .map(|c| c % m)
                    .collect()
            })
            .collect();
        let mut val = 0i64;
        let mut unit = 1u64;
        let mut worst = 0u32;
        let mut sign_flip = false;
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| rows[r][col] != 0)
                .min_by_key(|&r| val_u64(rows[r][col], p));
            let Some(pr) = pivot else {
                return PadicApprox::zero_at(p, self.scale * n as i64 + val + self.rel as i64);
            };
            if pr != col {
                rows.swap(pr, col);
                sign_flip = !sign_flip;
            }
            let pv = val_u64(rows[col][col], p);
            if pv >= self.rel {
                return PadicApprox::zero_at(p, self.scale * n as i64 + val + self.rel as i64);
            }
            worst = worst.max(pv);
            let pu = rows[col][col] / pow_u64(p, pv);
            let pu_inv = zpoly::invm(pu % m, m).expect("unit");
            val += pv as i64;
            unit = mulm(unit, pu % m, m);
            for r in col + 1..n {
                let c = rows[r][col];
                if c == 0 {
                    continue;
                }
                // c is divisible by p^pv by the choice of pivot
                let factor = mulm(c / pow_u64(p, pv), pu_inv, m);
                for k in col..n {
                    rows[r][k] = subm(rows[r][k], mulm(factor, rows[col][k], m), m);
                }
            }
        }
        if sign_flip {
            unit = (m - unit) % m;
        }
        let rel = (self.rel - worst) as i64;
        PadicApprox::from_integer_mod(&unit.into(), p, rel).shift(self.scale * n as i64 + val)
    }

    /// Frobenius `x ↦ x^p`, fixing `y`.
    pub fn frobenius(&self) -> Self {
        let fl = &self.field;
        let xp = {
            let c = zpoly::powmod(&[0, 1], fl.p as u128, &fl.g, fl.modulus);
            let mut coords = vec![0u64; fl.degree()];
            coords[..c.len()].copy_from_slice(&c);
            Self::from_parts(fl, 0, fl.digits as i64, coords)
        };
        let mut acc = Self::zero(fl);
        let mut xpow = Self::one(fl);
        for i in 0..fl.d {
            let mut slice = vec![0u64; fl.degree()];
            for j in 0..fl.e {
                slice[j * fl.d] = self.coords[j * fl.d + i];
            }
            let part = Self::from_parts(fl, self.scale, self.rel as i64, slice);
            acc = acc.add(&part.mul(&xpow));
            xpow = xpow.mul(&xp);
        }
        acc
    }

    /// The image `y` of `ζ_{p^k}`.
    pub fn y_gen(field: &Arc<CyclotomicLocalField>) -> Self {
        let mut c = vec![0i64; field.degree()];
        if field.e > 1 {
            c[field.d] = 1;
        } else {
            c[0] = 1;
        }
        Self::from_coords(field, &c)
    }

    /// The uniformizer `π = 1 − y` of the ramified step.
    pub fn uniformizer(field: &Arc<CyclotomicLocalField>) -> Self {
        Self::one(field).sub(&Self::y_gen(field))
    }

    /// Teichmüller representative of a unit, by iterating `v ↦ v^{p^d}`.
    pub fn teichmuller(&self) -> Result<Self> {
        if self.valuation() != Valuation::finite(0) {
            return Err(Error::Domain(
                "Teichmuller representative needs a unit".into(),
            ));
        }
        let q = (self.field.p as u128).pow(self.field.d as u32);
        let cap = 4 * self.field.digits as usize * self.field.e + 16;
        let mut v = self.clone();
        for _ in 0..cap {
            let next = v.pow(q);
            if next == v {
                return Ok(v);
            }
            v = next;
        }
        Err(Error::StabilizationCap { cap: cap as u32 })
    }

    /// Inverse of a nonzero element.
    pub fn inverse(&self) -> Result<Self> {
        let v = match self.valuation() {
            Valuation::Finite(v) => v,
            _ => return Err(Error::DivisionByZero),
        };
        let fl = &self.field;
        let e = fl.e as i64;
        let steps = (v * e).to_integer();
        let (a, j) = (steps.div_euclid(e), steps.rem_euclid(e));
        let pi_inv = Self::pi_inverse(fl);
        let unit = self.mul(&pi_inv.pow(j as u128)).shift(-a);
        let unit_inv = unit.unit_inverse();
        Ok(unit_inv.mul(&pi_inv.pow(j as u128)).shift(-a))
    }

    /// `π^{-1} = p^{-1} Π_{a ≠ 1} (1 − y^a)` over the units `a` mod `p^k`.
    fn pi_inverse(field: &Arc<CyclotomicLocalField>) -> Self {
        if field.pk == 1 {
            return Self::one(field);
        }
        let y = Self::y_gen(field);
        let one = Self::one(field);
        let mut acc = one.clone();
        for a in 2..field.pk {
            if a % field.p != 0 {
                acc = acc.mul(&one.sub(&y.pow(a as u128)));
            }
        }
        acc.shift(-1)
    }

    /// Inverse of a valuation-zero element by Newton iteration from `u^{p^d − 2}`.
    fn unit_inverse(&self) -> Self {
        let q = (self.field.p as u128).pow(self.field.d as u32);
        let mut y = self.pow(q - 2);
        let two = Self::from_int(&self.field, 2);
        let target = self.precision().unwrap();
        for _ in 0..64 {
            let err = Self::one(&self.field).sub(&self.mul(&y));
            if err.is_zero() && err.precision().unwrap() >= target {
                break;
            }
            y = y.mul(&two.sub(&self.mul(&y)));
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn fin(a: i64, b: i64) -> Valuation {
        Valuation::Finite(Ratio::new(a, b))
    }

    #[test]
    fn field_degrees() {
        let f = build_field(7, 5, 6).unwrap();
        assert_eq!((f.d, f.e), (4, 1));
        let f = build_field(3, 9, 6).unwrap();
        assert_eq!((f.d, f.e), (1, 6));
        let f = build_field(3, 15, 6).unwrap();
        assert_eq!((f.d, f.e), (4, 2));
        let f = build_field(3, 225, 6).unwrap();
        assert_eq!((f.d, f.e), (20, 6));
    }

    #[test]
    fn canonical_factor_divides_cyclotomic() {
        for (p, fs) in [(3u64, 5u64), (7, 5), (3, 25), (5, 3), (7, 3), (2, 7)] {
            let fl = build_field(p, fs, 4).unwrap();
            let phi = zpoly::cyclotomic_mod(fs, fl.modulus);
            let (_, r) = zpoly::divrem(&phi, &fl.g, fl.modulus);
            assert!(r.is_empty(), "p={p} f*={fs}");
            let gbar: Vec<u64> = fl.g.iter().map(|c| c % p).collect();
            assert!(zpoly::is_irreducible(&gbar, p));
        }
    }

    #[test]
    fn zeta_orders() {
        for (p, f) in [(3u64, 5u64), (3, 9), (3, 15), (5, 25), (7, 6), (2, 12)] {
            let fl = build_field(p, f, 6).unwrap();
            let z = LocalElement::zeta(&fl, 1);
            assert_eq!(z.pow(f as u128), LocalElement::one(&fl), "p={p} f={f}");
            for j in 1..f {
                let d = LocalElement::zeta(&fl, j as i64).sub(&LocalElement::one(&fl));
                assert!(!d.is_zero(), "zeta^{j} == 1 for p={p} f={f}");
                assert_eq!(LocalElement::zeta(&fl, j as i64), z.pow(j as u128));
            }
            assert_eq!(LocalElement::zeta(&fl, 0), LocalElement::one(&fl));
        }
    }

    #[test]
    fn valuation_examples() {
        let fl = build_field(7, 5, 6).unwrap();
        assert_eq!(LocalElement::from_int(&fl, 7).valuation(), fin(1, 1));
        let one = LocalElement::one(&fl);
        assert_eq!(one.sub(&LocalElement::zeta(&fl, 1)).valuation(), fin(0, 1));
        let fl = build_field(3, 9, 6).unwrap();
        let one = LocalElement::one(&fl);
        assert_eq!(one.sub(&LocalElement::zeta(&fl, 1)).valuation(), fin(1, 6));
        assert_eq!(one.sub(&LocalElement::zeta(&fl, 3)).valuation(), fin(1, 2));
        assert_eq!(
            LocalElement::zero(&fl).valuation(),
            Valuation::Infinite { precision: None }
        );
    }

    #[test]
    fn norm_agrees_with_valuation() {
        let fl = build_field(3, 15, 6).unwrap();
        let one = LocalElement::one(&fl);
        for a in 1..15 {
            let t = one.sub(&LocalElement::zeta(&fl, a));
            let n = t.norm();
            let v = n.finite_valuation().unwrap();
            assert_eq!(t.valuation(), fin(v, fl.degree() as i64), "a={a}");
        }
        let fl = build_field(3, 9, 8).unwrap();
        let t = LocalElement::one(&fl).sub(&LocalElement::zeta(&fl, 1));
        let n = t.norm();
        assert_eq!(n.finite_valuation(), Some(1));
        assert_eq!(n.signed_residue(n.precision().unwrap()), Some(3.into()));
    }

    #[test]
    fn teichmuller_examples() {
        let fl = build_field(5, 1, 2).unwrap();
        let w = LocalElement::from_int(&fl, 2).teichmuller().unwrap();
        let c = w.constant_part();
        assert_eq!(c.residue(2), Some(BigUint::from(7u32)));
        assert_eq!(w.pow(4), LocalElement::one(&fl));
        assert_eq!(w.teichmuller().unwrap(), w);
        let fl = build_field(3, 9, 4).unwrap();
        let u = LocalElement::one(&fl).add(&LocalElement::uniformizer(&fl));
        assert_eq!(u.teichmuller().unwrap(), LocalElement::one(&fl));
        assert!(LocalElement::uniformizer(&fl).teichmuller().is_err());
    }

    #[test]
    fn inverse_round_trip() {
        for (p, f) in [(3u64, 9u64), (3, 15), (7, 5), (5, 25)] {
            let fl = build_field(p, f, 6).unwrap();
            let one = LocalElement::one(&fl);
            for a in 1..f.min(12) {
                let t = one
                    .sub(&LocalElement::zeta(&fl, a as i64))
                    .add(&LocalElement::from_int(&fl, 3 * p as i64));
                let prod = t.mul(&t.inverse().unwrap()).sub(&one);
                assert!(
                    prod.valuation()
                        .at_least(fl.digits as i64 - fl.e as i64 - 2),
                    "p={p} f={f} a={a}"
                );
            }
        }
    }

    #[test]
    fn frobenius_permutes_roots() {
        let fl = build_field(3, 15, 6).unwrap();
        for j in 0..15 {
            let z = LocalElement::zeta(&fl, j);
            // σ fixes ζ_{p^k} and raises ζ_{f*} to the p-th power
            let expect = {
                let u = j.rem_euclid(5);
                let r = j.rem_euclid(3);
                let target = (0..15)
                    .find(|t| t % 5 == (3 * u) % 5 && t % 3 == r)
                    .unwrap();
                LocalElement::zeta(&fl, target)
            };
            assert_eq!(z.frobenius(), expect, "j={j}");
        }
        let c = LocalElement::from_int(&fl, 11);
        assert_eq!(c.frobenius(), c);
    }

    #[test]
    fn descriptor_is_json() {
        let fl = build_field(3, 5, 6).unwrap();
        let v = fl.descriptor();
        assert_eq!(v["d"], 4);
        assert_eq!(v["g"].as_array().unwrap().len(), 5);
    }
}
