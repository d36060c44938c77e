//! Machine-integer number theory: factoring, totients, orders.

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(q, _)| acc / q * (q - 1))
}

pub fn mobius(n: u64) -> i32 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n)
        .take_while(|d| d * d <= n)
        .filter(|d| n.is_multiple_of(*d))
        .flat_map(|d| [d, n / d])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Exponent of `p` in `n` (n > 0).
pub fn valuation_u64(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Splits `n = p^k * rest` with `p ∤ rest`.
pub fn split_prime_part(n: u64, p: u64) -> (u32, u64) {
    let k = valuation_u64(n, p);
    (k, n / p.pow(k))
}

/// Least `t ≥ 1` with `g^t ≡ 1 (mod m)`, by descent through the divisors of φ(m).
pub fn mult_order(g: u64, m: u64) -> Result<u64> {
    if m == 1 {
        return Ok(1);
    }
    if m == 0 || gcd(g % m, m) != 1 {
        return Err(Error::Precondition(format!("gcd({g}, {m}) != 1")));
    }
    let mut t = euler_phi(m);
    for (q, _) in factorize(t) {
        while t.is_multiple_of(q) && pow_mod(g, t / q, m) == 1 {
            t /= q;
        }
    }
    Ok(t)
}

/// The base-`p` integer logarithm ceiling: least `j` with `p^j ≥ n`.
pub fn ceil_log(n: u64, p: u64) -> u32 {
    let mut j = 0;
    let mut acc = 1u128;
    while acc < n as u128 {
        acc *= p as u128;
        j += 1;
    }
    j
}

/// Distinct prime factors.
pub fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(q, _)| q).collect()
}

/// Integer coefficients of the `n`-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    let mut num = vec![1i64];
    let mut den: Vec<u64> = Vec::new();
    for d in divisors(n) {
        match mobius(n / d) {
            1 => {
                let mut next = vec![0i64; num.len() + d as usize];
                for (i, &c) in num.iter().enumerate() {
                    next[i + d as usize] += c;
                    next[i] -= c;
                }
                num = next;
            }
            -1 => den.push(d),
            _ => {}
        }
    }
    for d in den {
        // exact division by x^d - 1
        let d = d as usize;
        let mut q = vec![0i64; num.len() - d];
        let mut r = num.clone();
        for i in (d..r.len()).rev() {
            let c = r[i];
            q[i - d] = c;
            r[i] -= c;
            r[i - d] += c;
        }
        num = q;
    }
    num
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_order(g: u64, m: u64) -> u64 {
        let mut x = g % m;
        let mut t = 1;
        while x != 1 % m {
            x = x * g % m;
            t += 1;
        }
        t
    }

    #[test]
    fn orders_match_direct_powering() {
        assert_eq!(mult_order(2, 5).unwrap(), 4);
        assert_eq!(mult_order(7, 3).unwrap(), 1);
        assert_eq!(mult_order(3, 7).unwrap(), 6);
        for m in 2..200u64 {
            for g in 1..m {
                if gcd(g, m) == 1 {
                    assert_eq!(mult_order(g, m).unwrap(), brute_order(g, m), "g={g} m={m}");
                }
            }
        }
    }

    #[test]
    fn order_rejects_non_coprime() {
        assert!(mult_order(6, 9).is_err());
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(2, 27), Some(14));
        assert_eq!(inv_mod(5, 9), Some(2));
        assert_eq!(inv_mod(3, 9), None);
    }

    #[test]
    fn totient_and_mobius() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(225), 120);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(9), 0);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_486_784_401));
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(5), vec![1, 1, 1, 1, 1]);
        assert_eq!(cyclotomic_poly(9), vec![1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(15), vec![1, -1, 0, 1, -1, 1, 0, -1, 1]);
        assert_eq!(cyclotomic_poly(225).len() as u64, euler_phi(225) + 1);
    }
}
