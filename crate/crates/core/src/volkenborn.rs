//! Limits of averages `p^{-k} Σ_{j<p^k} log(a + b·j)` over initial
//! segments, optionally dropping terms with `ν(a + b·j) ≥ μ`.
//!
//! The sum over `j` is split into residue classes `j ≡ j0 (mod p^s)`. A class
//! `c + d·i` with `ν(c) < ν(d)` has constant valuation, and its sum over
//! `i < p^e` expands as `p^e log c + Σ_m (−1)^{m+1} (d/c)^m / m · Q_m(e)`
//! with `Q_m(e) = Σ_{i<p^e} i^m`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::ceil_log;
use crate::error::{Error, Result};
use crate::log::log_qp;
use crate::padic::{big_pow, rational_valuation, PadicApprox};

/// Extra digits carried on top of `N + k`.
pub const GUARD: i64 = 4;
/// Maximum number of increments of `k` past the starting index.
pub const STABILIZATION_STEPS: u32 = 8;

#[derive(Clone, Debug)]
pub struct RiemannSum {
    pub p: u64,
    pub a: BigRational,
    pub b: BigRational,
    /// Terms with `ν ≥ cutoff` are dropped.
    pub cutoff: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitResult {
    pub value: PadicApprox,
    pub k_used: u32,
    pub stabilization_evidence: Vec<(u32, PadicApprox)>,
}

#[derive(Clone, Debug)]
struct Leaf {
    c: BigRational,
    d: BigRational,
    /// `j` runs over a class modulo `p^s`.
    s: u32,
}

/// Power sums `Q_m(e) = Σ_{i<p^e} i^m` modulo `p^w`.
struct PowerSums {
    q: Vec<Vec<BigUint>>,
}

impl PowerSums {
    fn build(p: u64, w: i64, e_max: u32, m_max: usize) -> Self {
        let modulus = big_pow(p, w);
        let mut binom = vec![vec![BigUint::one()]];
        for m in 1..=m_max {
            let prev = &binom[m - 1];
            let mut row = vec![BigUint::one(); m + 1];
            for l in 1..m {
                row[l] = &prev[l - 1] + &prev[l];
            }
            binom.push(row);
        }
        // P_l = Σ_{t<p} t^l
        let small: Vec<BigUint> = (0..=m_max)
            .map(|l| (0..p).map(|t| BigUint::from(t).pow(l as u32)).sum())
            .collect();
        let mut q = Vec::with_capacity(e_max as usize + 1);
        let mut level: Vec<BigUint> = (0..=m_max)
            .map(|m| {
                if m == 0 {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            })
            .collect();
        q.push(level.clone());
        for e in 0..e_max {
            let pe = BigUint::from(p).pow(e);
            let mut pel = vec![BigUint::one()];
            for l in 1..=m_max {
                let next = &pel[l - 1] * &pe;
                if next.is_zero() || (e > 0 && l as i64 * e as i64 >= w) {
                    pel.push(BigUint::zero());
                } else {
                    pel.push(next % &modulus);
                }
            }
            let next: Vec<BigUint> = (0..=m_max)
                .map(|m| {
                    let mut acc = BigUint::zero();
                    for l in 0..=m {
                        if pel[l].is_zero() || level[m - l].is_zero() {
                            continue;
                        }
                        acc += &binom[m][l] * &pel[l] % &modulus * &small[l] % &modulus
                            * &level[m - l];
                    }
                    acc % &modulus
                })
                .collect();
            level = next;
            q.push(level.clone());
        }
        PowerSums { q }
    }
}

type TableKey = (u64, i64, u32, usize);

fn power_sums(p: u64, w: i64, e_max: u32, m_max: usize) -> Arc<PowerSums> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<PowerSums>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (p, w, e_max, m_max);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let t = Arc::new(PowerSums::build(p, w, e_max, m_max));
    cache.lock().unwrap().entry(key).or_insert(t).clone()
}

fn val(q: &BigRational, p: u64) -> Option<i64> {
    rational_valuation(q, p)
}

fn series_len(w: i64, p: u64) -> usize {
    (1..)
        .find(|&m: &i64| m - ceil_log(m as u64, p) as i64 > w)
        .unwrap() as usize
}

impl RiemannSum {
    pub fn new(p: u64, a: BigRational, b: BigRational, cutoff: Option<u32>) -> Self {
        RiemannSum { p, a, b, cutoff }
    }

    fn excluded(&self, v: Option<i64>) -> bool {
        match (self.cutoff, v) {
            (Some(mu), Some(v)) => v >= mu as i64,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }

    /// Class decomposition for `k` digits: leaves with constant valuation, and
    /// single terms (leaves with `e = 0`).
    fn leaves(&self, k: u32) -> Result<Vec<Leaf>> {
        let p = self.p;
        let pb = BigRational::from_integer(BigInt::from(p));
        let mut out = Vec::new();
        let mut stack = vec![Leaf {
            c: self.a.clone(),
            d: self.b.clone(),
            s: 0,
        }];
        while let Some(Leaf { c, d, s }) = stack.pop() {
            let vc = val(&c, p);
            let vd = val(&d, p);
            let lower = match (vc, vd) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            };
            if self.cutoff.is_some() && self.excluded(lower) {
                continue;
            }
            let constant = match (vc, vd) {
                (Some(x), Some(y)) => x < y,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if constant || s == k {
                if self.excluded(vc) {
                    continue;
                }
                if vc.is_none() {
                    return Err(Error::Domain("log of zero in Riemann sum".into()));
                }
                out.push(Leaf { c, d, s });
                continue;
            }
            for t in (0..p).rev() {
                let c2 = &c + &d * BigRational::from_integer(BigInt::from(t));
                stack.push(Leaf {
                    c: c2,
                    d: &d * &pb,
                    s: s + 1,
                });
            }
        }
        Ok(out)
    }

    /// `T_k = Σ_{j<p^k} log(a + b·j)` over the kept terms, modulo `p^w`.
    pub fn partial_sum(&self, k: u32, w: i64) -> Result<PadicApprox> {
        let p = self.p;
        let leaves = self.leaves(k)?;
        let m_max = series_len(w, p);
        let table = power_sums(p, w, k, m_max);
        let values: Vec<PadicApprox> = leaves
            .par_iter()
            .map(|leaf| self.leaf_value(leaf, k - leaf.s, w, &table, m_max))
            .collect::<Result<_>>()?;
        let mut total = PadicApprox::zero_at(p, w);
        for v in &values {
            total = &total + v;
        }
        Ok(total)
    }

    fn leaf_value(
        &self,
        leaf: &Leaf,
        e: u32,
        w: i64,
        table: &PowerSums,
        m_max: usize,
    ) -> Result<PadicApprox> {
        let p = self.p;
        let rel = (w + 4).max(4) as u32;
        let c = PadicApprox::from_ratio(&leaf.c, p, rel)?;
        let mut total = log_qp(&c)?.shift(e as i64);
        if e == 0 {
            return Ok(total.truncate(w));
        }
        let x = PadicApprox::from_ratio(&(&leaf.d / &leaf.c), p, rel)?;
        let mut power = x.clone();
        for m in 1..=m_max {
            let q = &table.q[e as usize][m];
            if !q.is_zero() {
                let qm = PadicApprox::from_integer_mod(&BigInt::from(q.clone()), p, w);
                let term = (&power * &qm).checked_div(&PadicApprox::from_i64(m as i64, p, rel)?)?;
                total = if m % 2 == 1 {
                    &total + &term
                } else {
                    &total - &term
                };
            }
            power = &power * &x;
        }
        Ok(total.truncate(w))
    }

    /// Starting index: the leading error term of `S_k` with a cutoff `μ` has
    /// valuation about `k − 2μ + 1`.
    pub fn start_index(&self, n: i64) -> u32 {
        let base = match self.cutoff {
            None => n,
            Some(mu) => n + 2 * mu as i64 - 1,
        };
        let shift = val(&self.b, self.p).map(|v| -v).unwrap_or(0).max(0);
        (base + shift).max(1) as u32
    }

    /// `S_k = T_k / p^k` carried to about `n + GUARD` digits.
    pub fn average(&self, k: u32, n: i64) -> Result<PadicApprox> {
        let shift = val(&self.a, self.p).map(|v| (-v).max(0)).unwrap_or(0);
        let w = n + k as i64 + GUARD + shift;
        Ok(self.partial_sum(k, w)?.shift(-(k as i64)))
    }

    /// Increases `k` from the start index until two successive averages agree to
    /// valuation `≥ n`, capped at `STABILIZATION_STEPS` increments.
    pub fn limit(&self, n: i64) -> Result<LimitResult> {
        let k0 = self.start_index(n);
        let cap = k0 + STABILIZATION_STEPS;
        let mut evidence = vec![(k0, self.average(k0, n)?)];
        for k in k0 + 1..=cap {
            let cur = self.average(k, n)?;
            let prev = &evidence.last().unwrap().1;
            let agree = prev.distance(&cur)?.at_least(n);
            evidence.push((k, cur.clone()));
            if agree {
                return Ok(LimitResult {
                    value: cur.truncate(n),
                    k_used: k,
                    stabilization_evidence: evidence,
                });
            }
        }
        Err(Error::StabilizationCap { cap })
    }

    /// The limit computed in closed form: `p^{-k} Q_m(k − s) → p^{-s} B_m`.
    pub fn exact_limit(&self, n: i64) -> Result<PadicApprox> {
        let p = self.p;
        // deep enough that every surviving class is a constant-valuation leaf
        let depth =
            self.cutoff.unwrap_or(0) + 2 + val(&self.b, p).map(|v| (-v).max(0) as u32).unwrap_or(0);
        let leaves = self.leaves(depth + 64)?;
        let w = n + GUARD + depth as i64 + 4;
        let m_max = series_len(w + 2, p);
        let bern = bernoulli(m_max);
        let rel = (w + 8) as u32;
        let mut total = PadicApprox::zero_at(p, n + GUARD);
        for leaf in &leaves {
            let c = PadicApprox::from_ratio(&leaf.c, p, rel)?;
            let mut v = log_qp(&c)?;
            let x = &leaf.d / &leaf.c;
            let mut power = x.clone();
            for (m, b) in bern.iter().enumerate().skip(1) {
                if !b.is_zero() {
                    let coef = &power * b / BigRational::from_integer(BigInt::from(m as i64));
                    let t = PadicApprox::from_ratio(&coef, p, rel)?;
                    v = if m % 2 == 1 { &v + &t } else { &v - &t };
                }
                power = &power * &x;
            }
            total = &total + &v.shift(-(leaf.s as i64));
        }
        Ok(total.truncate(n))
    }
}

/// Bernoulli numbers with `B_1 = −1/2`, so that `Σ_{i<n} i^m` has leading
/// coefficients `B_m`.
pub fn bernoulli(m_max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    let mut binom: Vec<BigInt> = vec![BigInt::one(), BigInt::one()];
    for m in 1..=m_max {
        // row m+1 of Pascal's triangle
        let mut row = vec![BigInt::one(); m + 2];
        for l in 1..=m {
            row[l] = &binom[l - 1] + &binom[l];
        }
        let s: BigRational = (0..m)
            .map(|j| BigRational::from_integer(row[j].clone()) * &b[j])
            .sum();
        b.push(-s / BigRational::from_integer(BigInt::from(m as i64 + 1)));
        binom = row;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli(8);
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], rat(0, 1));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[8], rat(-1, 30));
    }

    #[test]
    fn power_sums_match_direct() {
        let p = 3;
        let t = PowerSums::build(p, 20, 4, 6);
        let m = big_pow(p, 20);
        for e in 0..=4u32 {
            for mm in 0..=6usize {
                let direct: BigUint = (0..p.pow(e))
                    .map(|i| BigUint::from(i).pow(mm as u32))
                    .sum::<BigUint>()
                    % &m;
                assert_eq!(t.q[e as usize][mm], direct, "e={e} m={mm}");
            }
        }
    }

    #[test]
    fn partial_sum_matches_brute_force() {
        for (p, a, b, cutoff) in [
            (3u64, rat(1, 3), rat(1, 1), None),
            (3, rat(2, 5), rat(1, 1), Some(2)),
            (5, rat(0, 1), rat(1, 1), Some(1)),
            (7, rat(1, 7), rat(2, 1), None),
        ] {
            let s = RiemannSum::new(p, a.clone(), b.clone(), cutoff);
            for k in 1..=3u32 {
                let w = 12;
                let fast = s.partial_sum(k, w).unwrap();
                let mut brute = PadicApprox::zero_at(p, w);
                for j in 0..p.pow(k) {
                    let x = &a + &b * rat(j as i64, 1);
                    let v = rational_valuation(&x, p);
                    if let (Some(mu), Some(v)) = (cutoff, v) {
                        if v >= mu as i64 {
                            continue;
                        }
                    }
                    if v.is_none() {
                        continue;
                    }
                    brute = &brute + &log_qp(&PadicApprox::from_ratio(&x, p, 20).unwrap()).unwrap();
                }
                assert!(fast.distance(&brute).unwrap().at_least(w), "p={p} k={k}");
            }
        }
    }

    #[test]
    fn stabilized_limit_matches_closed_form() {
        for (p, a, cutoff) in [
            (3u64, rat(1, 3), None),
            (5, rat(2, 5), None),
            (3, rat(1, 5), Some(4)),
            (5, rat(0, 1), Some(1)),
        ] {
            let s = RiemannSum::new(p, a, rat(1, 1), cutoff);
            let lim = s.limit(6).unwrap();
            let exact = s.exact_limit(6).unwrap();
            assert!(lim.value.distance(&exact).unwrap().at_least(6), "p={p}");
            let ev = &lim.stabilization_evidence;
            assert!(ev[ev.len() - 2]
                .1
                .distance(&ev[ev.len() - 1].1)
                .unwrap()
                .at_least(6));
        }
    }
}
