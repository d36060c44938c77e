//! Fixed-point reals `v / 2^bits` over big integers, enough for certified
//! complex embeddings and logarithms of their absolute values. Each routine
//! is accurate to a few units in the last place.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    pub v: BigInt,
    pub bits: u32,
}

fn one(bits: u32) -> BigInt {
    BigInt::one() << bits
}

impl Fixed {
    pub fn zero(bits: u32) -> Self {
        Fixed {
            v: BigInt::zero(),
            bits,
        }
    }

    pub fn from_int(n: &BigInt, bits: u32) -> Self {
        Fixed { v: n << bits, bits }
    }

    /// `a / b` rounded toward negative infinity.
    pub fn from_ratio(a: &BigInt, b: &BigInt, bits: u32) -> Self {
        Fixed {
            v: (a << bits).div_floor(b),
            bits,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Fixed {
            v: &self.v + &o.v,
            bits: self.bits,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Fixed {
            v: &self.v - &o.v,
            bits: self.bits,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Fixed {
            v: (&self.v * &o.v) >> self.bits,
            bits: self.bits,
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        Fixed {
            v: (&self.v << self.bits).div_floor(&o.v),
            bits: self.bits,
        }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Fixed {
            v: &self.v * n,
            bits: self.bits,
        }
    }

    pub fn div_int(&self, n: i64) -> Self {
        Fixed {
            v: self.v.div_floor(&BigInt::from(n)),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        Fixed {
            v: self.v.abs(),
            bits: self.bits,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative()
    }

    /// Magnitude comparison helper: `|self| ≤ other`.
    pub fn abs_le(&self, other: &Self) -> bool {
        self.v.abs() <= other.v
    }

    /// `2^{-e}` in this scale.
    pub fn ulp_power(bits: u32, e: i64) -> Self {
        let shift = bits as i64 - e;
        Fixed {
            v: if shift >= 0 {
                BigInt::one() << shift as u32
            } else {
                BigInt::zero()
            },
            bits,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.bits.saturating_sub(60);
        let top: f64 = (&self.v >> shift).to_string().parse().unwrap_or(f64::NAN);
        top / 2f64.powi((self.bits - shift) as i32)
    }

    /// Decimal string with `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scaled = (&self.v * BigInt::from(10).pow(digits as u32)) >> self.bits;
        let neg = scaled.is_negative();
        let s = scaled.abs().to_string();
        let s = format!("{:0>width$}", s, width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
    }
}

/// `atan(1/x)` by its alternating series.
fn atan_inv(x: i64, bits: u32) -> BigInt {
    let x2 = BigInt::from(x * x);
    let mut term = one(bits) / x;
    let mut sum = term.clone();
    let mut n = 1i64;
    while !term.is_zero() {
        term = -term / &x2;
        n += 2;
        sum += &term / n;
    }
    sum
}

/// `π` by Machin's formula.
pub fn pi(bits: u32) -> Fixed {
    let g = bits + 16;
    let v = atan_inv(5, g) * 16 - atan_inv(239, g) * 4;
    Fixed { v: v >> 16, bits }
}

/// `(cos θ, sin θ)` for `θ = 2π·num/den`.
pub fn cis_fraction(num: i64, den: i64, bits: u32) -> (Fixed, Fixed) {
    let g = bits + 32;
    let r = num.rem_euclid(den);
    // reduce to |θ| ≤ π
    let (r, negative) = if 2 * r > den {
        (den - r, true)
    } else {
        (r, false)
    };
    let theta = Fixed {
        v: (pi(g).v * BigInt::from(2 * r)).div_floor(&BigInt::from(den)),
        bits: g,
    };
    let t2 = theta.mul(&theta);
    let mut c = Fixed { v: one(g), bits: g };
    let mut s = theta.clone();
    let mut tc = c.clone();
    let mut ts = s.clone();
    let mut k = 1i64;
    loop {
        tc = tc.mul(&t2).div_int((2 * k - 1) * (2 * k));
        ts = ts.mul(&t2).div_int((2 * k) * (2 * k + 1));
        if tc.v.is_zero() && ts.v.is_zero() {
            break;
        }
        if k % 2 == 1 {
            c = c.sub(&tc);
            s = s.sub(&ts);
        } else {
            c = c.add(&tc);
            s = s.add(&ts);
        }
        k += 1;
    }
    let s = Fixed { v: s.v >> 32, bits };
    (
        Fixed { v: c.v >> 32, bits },
        if negative { Fixed { v: -s.v, bits } } else { s },
    )
}

/// `2·atanh(t)` for `|t| < 1/2`.
fn two_atanh(t: &Fixed) -> Fixed {
    let t2 = t.mul(t);
    let mut term = t.clone();
    let mut sum = t.clone();
    let mut n = 1i64;
    loop {
        term = term.mul(&t2);
        n += 2;
        let add = term.div_int(n);
        if add.v.is_zero() {
            break;
        }
        sum = sum.add(&add);
    }
    sum.mul_int(2)
}

/// Natural logarithm of a positive fixed-point number.
pub fn ln(x: &Fixed) -> Fixed {
    assert!(x.v.is_positive(), "ln of a non-positive number");
    let bits = x.bits;
    let g = bits + 32;
    let xv: BigInt = &x.v << 32u32;
    // x = 2^k · y with y ∈ [1, 2)
    let k = xv.bits() as i64 - 1 - g as i64;
    let y = if k >= 0 {
        &xv >> k as u32
    } else {
        &xv << (-k) as u32
    };
    let y = Fixed { v: y, bits: g };
    let onef = Fixed { v: one(g), bits: g };
    let t = y.sub(&onef).div(&y.add(&onef));
    let ln2 = two_atanh(&Fixed::from_ratio(&BigInt::one(), &BigInt::from(3), g));
    let v = two_atanh(&t).add(&ln2.mul_int(k));
    Fixed { v: v.v >> 32, bits }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        assert_eq!(pi(200).to_decimal(30), "3.141592653589793238462643383279");
    }

    #[test]
    fn trig_identities() {
        let bits = 160;
        for (a, b) in [(1i64, 5i64), (3, 7), (2, 12), (11, 30)] {
            let (c, s) = cis_fraction(a, b, bits);
            let unit = c.mul(&c).add(&s.mul(&s));
            let err = unit.sub(&Fixed::from_int(&BigInt::one(), bits));
            assert!(err.abs_le(&Fixed::ulp_power(bits, 150)));
            assert!(
                (c.to_f64() - (2.0 * std::f64::consts::PI * a as f64 / b as f64).cos()).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn logarithms() {
        let bits = 200;
        let l5 = ln(&Fixed::from_int(&5.into(), bits));
        assert_eq!(l5.to_decimal(25), "1.6094379124341003746007593");
        let l = ln(&Fixed::from_ratio(&1.into(), &7.into(), bits));
        assert!((l.to_f64() + 7f64.ln()).abs() < 1e-14);
    }
}
