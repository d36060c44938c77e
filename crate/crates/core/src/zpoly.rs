//! Dense polynomials with `u64` coefficients modulo an integer `m < 2^63`,
//! stored low degree first. The field routines assume `m` is prime.

use crate::arith::inv_mod;

#[inline]
pub fn mulm(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn addm(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub fn subm(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

pub fn powm(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, m);
        }
        a = mulm(a, a, m);
        e >>= 1;
    }
    r
}

pub fn invm(a: u64, m: u64) -> Option<u64> {
    inv_mod(a % m, m)
}

pub fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub fn add(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut r: Vec<u64> = (0..n)
        .map(|i| addm(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), m))
        .collect();
    trim(&mut r);
    r
}

pub fn sub(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut r: Vec<u64> = (0..n)
        .map(|i| subm(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0), m))
        .collect();
    trim(&mut r);
    r
}

pub fn scale(a: &[u64], c: u64, m: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.iter().map(|&x| mulm(x, c, m)).collect();
    trim(&mut r);
    r
}

pub fn mul(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] += (x as u128 * y as u128) % m as u128;
        }
    }
    let mut r: Vec<u64> = acc.into_iter().map(|v| (v % m as u128) as u64).collect();
    trim(&mut r);
    r
}

/// Division by a divisor whose leading coefficient is invertible mod `m`.
pub fn divrem(a: &[u64], b: &[u64], m: u64) -> (Vec<u64>, Vec<u64>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = invm(b[db], m).expect("leading coefficient must be a unit");
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = mulm(r[i], lead_inv, m);
        if c == 0 {
            continue;
        }
        q[i - db] = c;
        for j in 0..=db {
            r[i - db + j] = subm(r[i - db + j], mulm(c, b[j], m), m);
        }
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

pub fn rem(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    divrem(a, b, m).1
}

pub fn mulmod(a: &[u64], b: &[u64], g: &[u64], m: u64) -> Vec<u64> {
    rem(&mul(a, b, m), g, m)
}

pub fn powmod(a: &[u64], mut e: u128, g: &[u64], m: u64) -> Vec<u64> {
    let mut base = rem(a, g, m);
    let mut r = rem(&[1], g, m);
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(&r, &base, g, m);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(&base, &base, g, m);
        }
    }
    r
}

pub fn make_monic(a: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    trim(&mut a);
    match a.last() {
        None => a,
        Some(&l) => scale(&a, invm(l, p).expect("nonzero"), p),
    }
}

/// Monic gcd over F_p.
pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(&a, p)
}

/// Returns `(s, t)` with `s·a + t·b = 1` over F_p for coprime `a`, `b`.
pub fn xgcd(a: &[u64], b: &[u64], p: u64) -> Option<(Vec<u64>, Vec<u64>)> {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s2 = sub(&s0, &mul(&q, &s1, p), p);
        let t2 = sub(&t0, &mul(&q, &t1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = invm(r0[0], p)?;
    Some((scale(&s0, c, p), scale(&t0, c, p)))
}

/// Rabin's irreducibility test for a monic polynomial over F_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let Some(n) = degree(f) else { return false };
    if n == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    let frob = |k: usize| -> Vec<u64> {
        let mut r = rem(&x, f, p);
        for _ in 0..k {
            r = powmod(&r, p as u128, f, p);
        }
        r
    };
    if sub(&frob(n), &rem(&x, f, p), p) != Vec::<u64>::new() {
        return false;
    }
    for q in crate::arith::prime_factors(n as u64) {
        let h = sub(&frob(n / q as usize), &x, p);
        if degree(&gcd(f, &h, p)).unwrap_or(0) != 0 || h.is_empty() {
            return false;
        }
    }
    true
}

/// Evaluates the integer polynomial `Φ_n` modulo `m`.
pub fn cyclotomic_mod(n: u64, m: u64) -> Vec<u64> {
    crate::arith::cyclotomic_poly(n)
        .into_iter()
        .map(|c| c.rem_euclid(m as i64) as u64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_round_trip() {
        let a = vec![3, 1, 4, 1, 5];
        let b = vec![2, 7, 1];
        let (q, r) = divrem(&a, &b, 11);
        assert_eq!(add(&mul(&q, &b, 11), &r, 11), a);
    }

    #[test]
    fn xgcd_identity() {
        let a = vec![1, 0, 1];
        let b = vec![2, 1];
        let (s, t) = xgcd(&a, &b, 3).unwrap();
        assert_eq!(add(&mul(&s, &a, 3), &mul(&t, &b, 3), 3), vec![1]);
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        assert!(!is_irreducible(&[0, 0, 1], 7));
    }
}
