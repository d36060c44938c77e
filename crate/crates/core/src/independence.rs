//! Multiplicative independence of cyclotomic numbers: the primitive-root
//! criteria for unit systems, and two brute-force oracles (bounded exponent
//! search, numerical rank of logarithmic embeddings with exact confirmation).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use crate::arith::mult_order;
use crate::arith::{divisors, euler_phi, factorize, gcd, is_prime, lcm};
use crate::cyclo::CycloNum;
use crate::error::{Error, Result};
use crate::real::{ln, Fixed};

/// Largest search space `oracle_bounded` will enumerate.
pub const SEARCH_CAP: u128 = 1_000_000;
/// Largest denominator accepted when rationalizing a kernel vector.
pub const MAX_KERNEL_DEN: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Primitive,
    SemiPrimitive,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvidenceRecord {
    pub base: u64,
    pub modulus: u64,
    pub order: u64,
    pub phi: u64,
    pub classification: Classification,
}

impl EvidenceRecord {
    /// Re-derives the record by direct powering.
    pub fn recheck(&self) -> bool {
        let m = self.modulus;
        let g = self.base % m;
        let mut x = 1 % m;
        let mut order = 0;
        for t in 1..=m {
            x = (x as u128 * g as u128 % m as u128) as u64;
            if x == 1 % m {
                order = t;
                break;
            }
        }
        order == self.order
            && euler_phi(m) == self.phi
            && classify_order(order, self.phi) == self.classification
    }
}

fn classify_order(order: u64, phi: u64) -> Classification {
    if order == phi {
        Classification::Primitive
    } else if 2 * order == phi {
        Classification::SemiPrimitive
    } else {
        Classification::Neither
    }
}

/// Primitive means order `φ(m)`, semi-primitive means order exactly `φ(m)/2`.
pub fn classify_root(g: u64, m: u64) -> Result<Classification> {
    Ok(evidence(g, m)?.classification)
}

pub fn evidence(g: u64, m: u64) -> Result<EvidenceRecord> {
    let order = mult_order(g, m)?;
    let phi = euler_phi(m);
    Ok(EvidenceRecord {
        base: g,
        modulus: m,
        order,
        phi,
        classification: classify_order(order, phi),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Subject {
    Integer(u64),
    Set(Vec<u64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub subject: Subject,
    pub verdict: bool,
    pub case_tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub evidence: Vec<EvidenceRecord>,
    /// Prime factors of the members, for set subjects.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<u64>>,
}

impl PropertyReport {
    fn new(subject: Subject) -> Self {
        PropertyReport {
            subject,
            verdict: false,
            case_tag: "none".into(),
            reason: None,
            evidence: Vec::new(),
            primes: None,
        }
    }

    fn cls(&mut self, g: u64, m: u64) -> Classification {
        let e = evidence(g, m).expect("coprime by construction");
        let c = e.classification;
        if !self.evidence.contains(&e) {
            self.evidence.push(e);
        }
        c
    }

    fn accept(mut self, tag: &str) -> Self {
        self.verdict = true;
        self.case_tag = tag.into();
        self.reason = None;
        self
    }

    fn reject(mut self, reason: impl Into<String>) -> Self {
        self.verdict = false;
        self.reason = Some(reason.into());
        self
    }

    pub fn line(&self) -> String {
        let subject = match &self.subject {
            Subject::Integer(m) => m.to_string(),
            Subject::Set(s) => format!(
                "{{{}}}",
                s.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        };
        let mut s = format!("{subject}: {} [{}]", self.verdict, self.case_tag);
        if let Some(r) = &self.reason {
            s += &format!(" ({r})");
        }
        s
    }
}

fn prime_powers(n: u64) -> Vec<(u64, u64)> {
    factorize(n)
        .into_iter()
        .map(|(p, a)| (p, p.pow(a)))
        .collect()
}

/// `m = p₁^{α₁}p₂^{α₂}` with odd primes, `(α₁, φ(p₂^{α₂})) = 1 = (α₂, φ(p₁^{α₁}))`,
/// and either both `≡ 3 mod 4` with mutual semi-primitivity or mutual primitivity.
pub fn check_property_i(m: u64) -> PropertyReport {
    let rep = PropertyReport::new(Subject::Integer(m));
    let fac = factorize(m);
    if fac.len() != 2 || fac.iter().any(|&(p, _)| p == 2) {
        return rep.reject("not a product of powers of two distinct odd primes");
    }
    let (p1, a1) = fac[0];
    let (p2, a2) = fac[1];
    let (m1, m2) = (p1.pow(a1), p2.pow(a2));
    let mut rep = rep;
    let c12 = rep.cls(p1, m2);
    let c21 = rep.cls(p2, m1);
    if gcd(a1 as u64, euler_phi(m2)) != 1 || gcd(a2 as u64, euler_phi(m1)) != 1 {
        return rep.reject("exponent gcd condition fails");
    }
    use Classification::*;
    if p1 % 4 == 3 && p2 % 4 == 3 && c12 == SemiPrimitive && c21 == SemiPrimitive {
        return rep.accept("property-I-case1");
    }
    if c12 == Primitive && c21 == Primitive {
        return rep.accept("property-I-case2");
    }
    rep.reject(format!(
        "{p1} is {c12:?} mod {m2}, {p2} is {c21:?} mod {m1}"
    ))
}

/// Pairwise coprime members each satisfying property I; `primes` lists their prime factors.
pub fn check_property_ii(set: &[u64]) -> PropertyReport {
    let mut rep = PropertyReport::new(Subject::Set(set.to_vec()));
    let primes: BTreeSet<u64> = set
        .iter()
        .flat_map(|&m| factorize(m).into_iter().map(|(p, _)| p))
        .collect();
    rep.primes = Some(primes.into_iter().collect());
    if set.is_empty() {
        return rep.reject("empty set");
    }
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            if gcd(a, b) != 1 {
                return rep.reject(format!("gcd({a}, {b}) = {}", gcd(a, b)));
            }
        }
    }
    let mut failed = None;
    for &m in set {
        let sub = check_property_i(m);
        rep.evidence.extend(sub.evidence.iter().cloned());
        if !sub.verdict && failed.is_none() {
            failed = Some(format!(
                "{m} fails property I: {}",
                sub.reason.unwrap_or_default()
            ));
        }
    }
    match failed {
        Some(r) => rep.reject(r),
        None => rep.accept("property-II"),
    }
}

fn is_prime_power(q: u64) -> bool {
    q > 1 && factorize(q).len() == 1
}

fn is_composite(q: u64) -> bool {
    q > 3 && !is_prime(q)
}

/// For a prime power `q` the system is always independent (it is a basis of
/// the cyclotomic units modulo torsion).
pub fn prime_power_system(q: u64) -> Result<PropertyReport> {
    if !is_prime_power(q) {
        return Err(Error::Precondition(format!("{q} is not a prime power")));
    }
    Ok(PropertyReport::new(Subject::Integer(q)).accept("prime-power"))
}

/// How clause 3(a) (both primes `≡ 3 mod 4`) is read.
///
/// Taken literally it asks both primes to be semi-primitive modulo each other,
/// which quadratic reciprocity rules out: for `p₁ ≡ p₂ ≡ 3 mod 4` exactly one of
/// them is a square modulo the other. `Mixed` asks one to be primitive and the
/// other semi-primitive, in either order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause3Reading {
    #[default]
    Verbatim,
    Mixed,
}

/// Clause-by-clause test for composite `q ≢ 2 mod 4` that is not a prime power.
pub fn pei_feng_composite(q: u64) -> Result<PropertyReport> {
    pei_feng_composite_with(q, Clause3Reading::Verbatim)
}

pub fn pei_feng_composite_with(q: u64, reading: Clause3Reading) -> Result<PropertyReport> {
    if !is_composite(q) {
        return Err(Error::Precondition(format!("{q} is not composite")));
    }
    if q % 4 == 2 {
        return Err(Error::Precondition(format!(
            "{q} ≡ 2 mod 4: use pei_feng_two_mod_four"
        )));
    }
    if is_prime_power(q) {
        return Err(Error::Precondition(format!(
            "{q} is a prime power: use prime_power_system"
        )));
    }
    use Classification::*;
    let mut rep = PropertyReport::new(Subject::Integer(q));
    let two = q.trailing_zeros();
    let odd: Vec<(u64, u64)> = prime_powers(q >> two);
    match (two, odd.len()) {
        (2, 1) => {
            let (p1, m1) = odd[0];
            match rep.cls(2, m1) {
                Primitive => Ok(rep.accept("clause-1a")),
                SemiPrimitive if p1 % 4 == 3 => Ok(rep.accept("clause-1b")),
                c => Ok(rep.reject(format!("2 is {c:?} mod {m1}"))),
            }
        }
        (a0, 1) if a0 >= 3 => {
            let (p1, m1) = odd[0];
            let m0 = 1u64 << a0;
            rep.cls(p1, m0);
            let order = mult_order(p1, m0)?;
            if order != 1 << (a0 - 2) {
                return Ok(rep.reject(format!("{p1} has order {order} mod {m0}")));
            }
            if ((1u64 << (a0 - 3)) * p1) % m0 == m0 - 1 {
                return Ok(rep.reject(format!("2^{}·{p1} ≡ −1 mod {m0}", a0 - 3)));
            }
            match rep.cls(2, m1) {
                Primitive => Ok(rep.accept("clause-2a")),
                SemiPrimitive if p1 % 4 == 3 => Ok(rep.accept("clause-2b")),
                c => Ok(rep.reject(format!("2 is {c:?} mod {m1}"))),
            }
        }
        (0, 2) => Ok(clause_three(rep, odd[0], odd[1], reading)),
        (2, 2) => Ok(clause_four(rep, odd[0], odd[1])),
        (0, 3) => Ok(clause_five(rep, &odd)),
        _ => Ok(rep.reject("shape matches no clause")),
    }
}

fn clause_three(
    mut rep: PropertyReport,
    (p1, m1): (u64, u64),
    (p2, m2): (u64, u64),
    reading: Clause3Reading,
) -> PropertyReport {
    use Classification::*;
    let c12 = rep.cls(p1, m2);
    let c21 = rep.cls(p2, m1);
    if p1 % 4 == 3 && p2 % 4 == 3 {
        let ok = match reading {
            // "or vice versa" of a symmetric statement: both orders coincide
            Clause3Reading::Verbatim => c12 == SemiPrimitive && c21 == SemiPrimitive,
            Clause3Reading::Mixed => {
                (c12 == Primitive && c21 == SemiPrimitive)
                    || (c12 == SemiPrimitive && c21 == Primitive)
            }
        };
        if ok {
            return rep.accept("clause-3a");
        }
        return rep.reject(format!(
            "{p1} is {c12:?} mod {m2}, {p2} is {c21:?} mod {m1}"
        ));
    }
    if c12 == Primitive && c21 == Primitive {
        return rep.accept("clause-3b");
    }
    rep.reject(format!(
        "{p1} is {c12:?} mod {m2}, {p2} is {c21:?} mod {m1}"
    ))
}

fn clause_four(mut rep: PropertyReport, a: (u64, u64), b: (u64, u64)) -> PropertyReport {
    use Classification::*;
    if gcd(a.0 - 1, b.0 - 1) != 2 {
        return rep.reject(format!("gcd({}, {}) != 2", a.0 - 1, b.0 - 1));
    }
    match (a.0 % 4, b.0 % 4) {
        (3, 3) => {
            let two_a = rep.cls(2, a.1);
            let two_b = rep.cls(2, b.1);
            let twos = (two_a == Primitive && two_b == SemiPrimitive)
                || (two_a == SemiPrimitive && two_b == Primitive);
            let ab = rep.cls(a.0, 2 * b.1);
            let ba = rep.cls(b.0, 2 * a.1);
            let mutual = (ab == Primitive && ba == SemiPrimitive)
                || (ab == SemiPrimitive && ba == Primitive);
            if twos && mutual {
                rep.accept("clause-4a")
            } else {
                rep.reject("clause 4a conditions fail")
            }
        }
        (1, 3) | (3, 1) => {
            let ((p1, m1), (p2, m2)) = if a.0 % 4 == 1 { (a, b) } else { (b, a) };
            let two = rep.cls(2, m2);
            let c12 = rep.cls(p1, m2);
            let c21 = rep.cls(p2, m1);
            if two == Primitive && c12 == Primitive && c21 == Primitive {
                rep.accept("clause-4b")
            } else {
                rep.reject("clause 4b conditions fail")
            }
        }
        _ => rep.reject("both primes ≡ 1 mod 4"),
    }
}

fn clause_five(mut rep: PropertyReport, odd: &[(u64, u64)]) -> PropertyReport {
    use Classification::*;
    if odd.iter().any(|&(p, _)| p % 4 != 3) {
        return rep.reject("some prime ≢ 3 mod 4");
    }
    let halves: Vec<u64> = odd.iter().map(|&(p, _)| (p - 1) / 2).collect();
    if gcd(halves[0], halves[1]) != 1
        || gcd(halves[0], halves[2]) != 1
        || gcd(halves[1], halves[2]) != 1
    {
        return rep.reject("(p_i − 1)/2 not pairwise coprime");
    }
    // the labelling of the primes is free: try both cyclic orientations
    for perm in [[0, 1, 2], [0, 2, 1]] {
        let ok = (0..3).all(|i| {
            let (p, _) = odd[perm[i]];
            let next = odd[perm[(i + 1) % 3]].1;
            let prev = odd[perm[(i + 2) % 3]].1;
            rep.cls(p, next) == Primitive && rep.cls(p, prev) == SemiPrimitive
        });
        if ok {
            return rep.accept("clause-5");
        }
    }
    rep.reject("no cyclic labelling satisfies clause 5")
}

/// Composite `q ≡ 2 mod 4`: independent iff `q = 2p^n`, or `q = 2m` with `m`
/// passing clause 3 or clause 5 of the odd criterion.
pub fn pei_feng_two_mod_four(q: u64) -> Result<PropertyReport> {
    pei_feng_two_mod_four_with(q, Clause3Reading::Verbatim)
}

pub fn pei_feng_two_mod_four_with(q: u64, reading: Clause3Reading) -> Result<PropertyReport> {
    if q % 4 != 2 || !is_composite(q) {
        return Err(Error::Precondition(format!(
            "{q} is not a composite ≡ 2 mod 4"
        )));
    }
    let m = q / 2;
    if is_prime_power(m) {
        return Ok(PropertyReport::new(Subject::Integer(q)).accept("twice-odd-prime-power"));
    }
    let sub = pei_feng_composite_with(m, reading)?;
    let mut rep = PropertyReport::new(Subject::Integer(q));
    rep.evidence = sub.evidence.clone();
    if sub.verdict && (sub.case_tag.starts_with("clause-3") || sub.case_tag == "clause-5") {
        Ok(rep.accept(&format!("twice-{}", sub.case_tag)))
    } else {
        Ok(rep.reject(format!(
            "{m} fails clauses 3 and 5: {}",
            sub.reason.unwrap_or_default()
        )))
    }
}

/// Dispatches a composite `q` to the applicable criterion.
pub fn unit_system_criterion(q: u64, reading: Clause3Reading) -> Result<PropertyReport> {
    if !is_composite(q) {
        return Err(Error::Precondition(format!("{q} is not composite")));
    }
    if is_prime_power(q) {
        prime_power_system(q)
    } else if q % 4 == 2 {
        pei_feng_two_mod_four_with(q, reading)
    } else {
        pei_feng_composite_with(q, reading)
    }
}

/// `{(1 − ζ_q^h)/(1 − ζ_q) : (h, q) = 1, 2 ≤ h < q/2}` with labels.
pub fn unit_system(q: u64) -> Vec<(String, CycloNum)> {
    (2..q)
        .filter(|&h| 2 * h < q && gcd(h, q) == 1)
        .map(|h| (format!("(1-z{q}^{h})/(1-z{q})"), CycloNum::unit_ratio(q, h)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Criterion,
    BoundedSearch,
    Rank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Independent,
    DependentWithWitness,
    IndependentUpToBound,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub exponents: Vec<i64>,
    /// Order of the root of unity `Π α_i^{e_i}`.
    pub root_order: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub numbers: Vec<String>,
    pub method: Method,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<Box<IndependenceReport>>,
}

impl IndependenceReport {
    fn new(nums: &[CycloNum], method: Method) -> Self {
        IndependenceReport {
            numbers: nums.iter().map(|x| x.to_string()).collect(),
            method,
            verdict: Verdict::Undecided,
            witness: None,
            bound: None,
            digits: None,
            rank: None,
            tolerance: None,
            note: None,
            cross_check: None,
        }
    }

    pub fn is_dependent(&self) -> bool {
        self.verdict == Verdict::DependentWithWitness
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{:?} over {} numbers: {:?}",
            self.method,
            self.numbers.len(),
            self.verdict
        );
        if let Some(r) = self.rank {
            s += &format!(" (rank {r})");
        }
        if let Some(w) = &self.witness {
            s += &format!(
                " witness {:?} -> root of unity of order {}",
                w.exponents, w.root_order
            );
        }
        s
    }
}

fn common_field(nums: &[CycloNum]) -> Result<Vec<CycloNum>> {
    let m = nums.iter().fold(1, |acc, x| lcm(acc, x.modulus()));
    nums.iter().map(|x| x.coerce(m)).collect()
}

/// Order of `Π α_i^{e_i}` as a root of unity, computed without inverses by
/// comparing the positive and negative parts raised to `lcm(2, m)`.
pub fn relation_order(nums: &[CycloNum], e: &[i64]) -> Result<Option<u64>> {
    let nums = common_field(nums)?;
    let m = nums.first().map(|x| x.modulus()).unwrap_or(1);
    let mut pos = CycloNum::one(m);
    let mut neg = CycloNum::one(m);
    for (x, &k) in nums.iter().zip(e) {
        if k > 0 {
            pos = pos.mul(&x.pow(k)?);
        } else if k < 0 {
            neg = neg.mul(&x.pow(-k)?);
        }
    }
    let l = lcm(2, m);
    if pos.pow(l as i64)? != neg.pow(l as i64)? {
        return Ok(None);
    }
    for t in divisors(l) {
        if pos.pow(t as i64)? == neg.pow(t as i64)? {
            return Ok(Some(t));
        }
    }
    unreachable!("t = l already matched")
}

/// Float image used to discard most candidates before the exact test.
fn float_logs(nums: &[CycloNum]) -> Result<Vec<Vec<f64>>> {
    let primes = norm_primes(nums);
    nums.iter()
        .map(|x| {
            let mut row: Vec<f64> = x
                .complex_embeddings(20)?
                .iter()
                .map(|e| 0.5 * (e.re.to_f64().powi(2) + e.im.to_f64().powi(2)).ln())
                .collect();
            let n = x.norm();
            row.extend(primes.iter().map(|&l| rat_valuation(&n, l) as f64));
            Ok(row)
        })
        .collect()
}

fn norm_primes(nums: &[CycloNum]) -> Vec<u64> {
    let mut out = BTreeSet::new();
    for x in nums {
        let n = x.norm();
        for part in [n.numer(), n.denom()] {
            let v = part.abs().to_u64().expect("norm fits in u64");
            out.extend(factorize(v).into_iter().map(|(p, _)| p));
        }
    }
    out.into_iter().collect()
}

fn rat_valuation(x: &BigRational, l: u64) -> i64 {
    let l = BigInt::from(l);
    let count = |v: &BigInt| {
        let mut v = v.abs();
        let mut k = 0;
        while !v.is_zero() && (&v % &l).is_zero() {
            v /= &l;
            k += 1;
        }
        k
    };
    count(x.numer()) - count(x.denom())
}

fn index_to_vector(mut idx: u128, n: usize, b: i64) -> Vec<i64> {
    let base = (2 * b + 1) as u128;
    let mut e = vec![0i64; n];
    for slot in e.iter_mut().rev() {
        *slot = (idx % base) as i64 - b;
        idx /= base;
    }
    e
}

/// Searches `e ∈ [−B, B]^n \ {0}` (first nonzero entry positive) in
/// lexicographic order for `Π α_i^{e_i}` a root of unity.
pub fn oracle_bounded(nums: &[CycloNum], b: i64) -> Result<IndependenceReport> {
    if nums.is_empty() || b < 1 {
        return Err(Error::Precondition(
            "need a nonempty list and B >= 1".into(),
        ));
    }
    if nums.iter().any(|x| x.is_zero()) {
        return Err(Error::Precondition("zero is not allowed".into()));
    }
    let n = nums.len();
    let total = ((2 * b + 1) as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if total > SEARCH_CAP {
        return Err(Error::SearchCap(total));
    }
    let logs = float_logs(nums)?;
    let scale: f64 = logs.iter().flatten().fold(1.0, |a, x| a.max(x.abs()));
    let tol = 1e-9 * scale * (n as f64) * (b as f64);
    let cols = logs[0].len();
    let hit = (0..total).into_par_iter().find_first(|&idx| {
        let e = index_to_vector(idx, n, b);
        match e.iter().find(|&&x| x != 0) {
            Some(&x) if x > 0 => {}
            _ => return false,
        }
        let small = (0..cols).all(|j| {
            e.iter()
                .zip(&logs)
                .map(|(&k, row)| k as f64 * row[j])
                .sum::<f64>()
                .abs()
                <= tol
        });
        small && matches!(relation_order(nums, &e), Ok(Some(_)))
    });
    let mut rep = IndependenceReport::new(nums, Method::BoundedSearch);
    rep.bound = Some(b);
    match hit {
        Some(idx) => {
            let e = index_to_vector(idx, n, b);
            let order = relation_order(nums, &e)?.expect("checked in the search");
            rep.verdict = Verdict::DependentWithWitness;
            rep.witness = Some(Witness {
                exponents: e,
                root_order: order,
            });
        }
        None => rep.verdict = Verdict::IndependentUpToBound,
    }
    Ok(rep)
}

struct LogMatrix {
    rows: Vec<Vec<Fixed>>,
    /// Bound on the error of any entry.
    err: Fixed,
}

fn log_matrix(nums: &[CycloNum], digits: u32) -> Result<LogMatrix> {
    let primes = norm_primes(nums);
    let bits = (digits as f64 * 3.33).ceil() as u32 + 32;
    let ulps = Fixed {
        v: BigInt::from(64),
        bits,
    };
    let ln_primes: Vec<Fixed> = primes
        .iter()
        .map(|&l| ln(&Fixed::from_int(&BigInt::from(l), bits)))
        .collect();
    let rows: Vec<(Vec<Fixed>, Fixed)> = nums
        .par_iter()
        .map(|x| {
            let mut err = ulps.clone();
            let mut row = Vec::new();
            for e in x.complex_embeddings(digits)? {
                let a2 = e.abs2();
                // |Δ(re² + im²)| ≤ 2(|re| + |im| + ε)ε
                let d =
                    e.re.abs()
                        .add(&e.im.abs())
                        .add(&e.err)
                        .mul(&e.err)
                        .mul_int(2);
                let margin = a2.sub(&d.mul_int(2));
                if margin.v.is_positive() {
                    let bound = d.div(&a2.sub(&d)).div_int(2).add(&ulps);
                    if bound.v > err.v {
                        err = bound;
                    }
                    row.push(ln(&a2).div_int(2));
                } else {
                    return Err(Error::Precondition(
                        "embedding too close to zero for the requested digits".into(),
                    ));
                }
            }
            let n = x.norm();
            for (l, lnl) in primes.iter().zip(&ln_primes) {
                row.push(lnl.mul_int(rat_valuation(&n, *l)));
            }
            Ok((row, err))
        })
        .collect::<Result<_>>()?;
    let mut err = ulps;
    for (_, e) in &rows {
        if e.v > err.v {
            err = e.clone();
        }
    }
    Ok(LogMatrix {
        rows: rows.into_iter().map(|(r, _)| r).collect(),
        err,
    })
}

enum Elimination {
    Rank(usize, Option<Vec<Fixed>>),
    Gray,
}

/// Full-pivot elimination on the transpose; returns the rank and, when
/// deficient, one kernel vector `e` with `Σ e_i row_i ≈ 0`.
fn eliminate(rows: &[Vec<Fixed>], tol: &Fixed, gray: &Fixed) -> Elimination {
    let n = rows.len();
    let cols = rows[0].len();
    let bits = tol.bits;
    // a[j][i] = rows[i][j]
    let mut a: Vec<Vec<Fixed>> = (0..cols)
        .map(|j| (0..n).map(|i| rows[i][j].clone()).collect())
        .collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    while rank < n.min(cols) {
        let mut best = (rank, rank);
        for r in rank..cols {
            for c in rank..n {
                if a[r][c].v.abs() > a[best.0][best.1].v.abs() {
                    best = (r, c);
                }
            }
        }
        let pivot = a[best.0][best.1].abs();
        if pivot.v <= tol.v {
            break;
        }
        if pivot.v <= gray.v {
            return Elimination::Gray;
        }
        a.swap(rank, best.0);
        for row in a.iter_mut() {
            row.swap(rank, best.1);
        }
        perm.swap(rank, best.1);
        let inv = Fixed::from_int(&BigInt::one(), bits).div(&a[rank][rank]);
        let pr: Vec<Fixed> = a[rank].iter().map(|x| x.mul(&inv)).collect();
        a[rank] = pr;
        for r in 0..cols {
            if r != rank && !a[r][rank].v.is_zero() {
                let f = a[r][rank].clone();
                for c in rank..n {
                    let t = a[rank][c].mul(&f);
                    a[r][c] = a[r][c].sub(&t);
                }
            }
        }
        rank += 1;
    }
    if rank == n {
        return Elimination::Rank(rank, None);
    }
    // free variable at permuted column `rank` set to 1
    let mut e = vec![Fixed::zero(bits); n];
    e[perm[rank]] = Fixed::from_int(&BigInt::one(), bits);
    for i in 0..rank {
        e[perm[i]] = a[i][rank].mul_int(-1);
    }
    Elimination::Rank(rank, Some(e))
}

/// Best continued-fraction convergent with denominator at most `max_den`
/// within `tol` of `x`.
fn rationalize(x: &BigRational, max_den: u64, tol: &BigRational) -> Option<BigRational> {
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    let max = BigInt::from(max_den);
    let mut best = None;
    for _ in 0..64 {
        let a = r.floor().to_integer();
        let h = &a * &h1 + &h0;
        let k = &a * &k1 + &k0;
        if k > max {
            break;
        }
        let c = BigRational::new(h.clone(), k.clone());
        if (&c - x).abs() <= *tol {
            best = Some(c);
            break;
        }
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = &r - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    best
}

fn integer_direction(e: &[Fixed], digits: u32) -> Option<Vec<i64>> {
    let tol = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits / 2));
    let mut fracs = Vec::new();
    for x in e {
        let q = BigRational::new(x.v.clone(), BigInt::one() << x.bits);
        fracs.push(rationalize(&q, MAX_KERNEL_DEN, &tol)?);
    }
    let den = fracs
        .iter()
        .fold(BigInt::one(), |acc, f| acc.lcm(f.denom()));
    let mut ints: Vec<BigInt> = fracs
        .iter()
        .map(|f| (f * BigRational::from_integer(den.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    for x in ints.iter_mut() {
        *x = &*x / &g;
    }
    if ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        for x in ints.iter_mut() {
            *x = -&*x;
        }
    }
    ints.iter().map(|x| x.to_i64()).collect()
}

/// Numerical rank of `[log|σ_j(α_i)| | ν_ℓ(N α_i) log ℓ]` with certified entry
/// errors; a rank deficiency is confirmed exactly or reported as undecided.
pub fn oracle_rank(nums: &[CycloNum], digits: u32) -> Result<IndependenceReport> {
    if nums.iter().any(|x| x.is_zero()) {
        return Err(Error::Precondition("zero is not allowed".into()));
    }
    let mut rep = IndependenceReport::new(nums, Method::Rank);
    rep.digits = Some(digits);
    if nums.is_empty() {
        rep.verdict = Verdict::Independent;
        rep.rank = Some(0);
        return Ok(rep);
    }
    let nums = common_field(nums)?;
    let lm = log_matrix(&nums, digits)?;
    let dim = nums.len().max(lm.rows[0].len()) as i64;
    let tol = lm.err.mul_int(dim * 8);
    let gray = Fixed {
        v: &tol.v * BigInt::from(10).pow(digits / 2),
        bits: tol.bits,
    };
    rep.tolerance = Some(format!("{:.3e}", tol.to_f64()));
    match eliminate(&lm.rows, &tol, &gray) {
        Elimination::Gray => {
            rep.note = Some("a pivot fell between the tolerance and the decision threshold".into());
        }
        Elimination::Rank(r, None) => {
            rep.rank = Some(r);
            rep.verdict = Verdict::Independent;
        }
        Elimination::Rank(r, Some(e)) => {
            rep.rank = Some(r);
            match integer_direction(&e, digits) {
                None => {
                    rep.note = Some("kernel vector has no small-denominator rational form".into())
                }
                Some(ints) => match relation_order(&nums, &ints)? {
                    Some(order) => {
                        rep.verdict = Verdict::DependentWithWitness;
                        rep.witness = Some(Witness {
                            exponents: ints,
                            root_order: order,
                        });
                    }
                    None => {
                        rep.note = Some(format!("candidate relation {ints:?} is not exact"));
                    }
                },
            }
        }
    }
    Ok(rep)
}

/// The independent list attached to a property-II set: for each `m = pq`,
/// `1 − ζ_p`, `1 − ζ_q`, and the unit ratios for `m`, `p` and `q`.
pub fn p4_numbers(set: &[u64]) -> Result<Vec<(String, CycloNum)>> {
    let rep = check_property_ii(set);
    if !rep.verdict {
        return Err(Error::Precondition(format!(
            "property II fails: {}",
            rep.reason.unwrap_or_default()
        )));
    }
    let theta: u64 = set.iter().product();
    let mut out = Vec::new();
    for &m in set {
        let primes: Vec<u64> = factorize(m).into_iter().map(|(p, _)| p).collect();
        for &p in &primes {
            out.push((format!("1-z{p}"), CycloNum::one_minus_zeta(p, 1)));
        }
        for a in (2..m).filter(|&a| 2 * a < m && gcd(a, m) == 1) {
            out.push((format!("(1-z{m}^{a})/(1-z{m})"), CycloNum::unit_ratio(m, a)));
        }
        for &p in &primes {
            for b in (2..p).filter(|&b| 2 * b < p) {
                out.push((format!("(1-z{p}^{b})/(1-z{p})"), CycloNum::unit_ratio(p, b)));
            }
        }
    }
    out.into_iter()
        .map(|(l, x)| Ok((l, x.coerce(theta)?)))
        .collect()
}

/// Runs both oracles on the list for `set`, with `extra` numbers appended.
pub fn verify_p4_with(
    set: &[u64],
    extra: &[(String, CycloNum)],
    b: i64,
    digits: u32,
) -> Result<IndependenceReport> {
    let mut list = p4_numbers(set)?;
    list.extend(extra.iter().cloned());
    let labels: Vec<String> = list.iter().map(|(l, _)| l.clone()).collect();
    let nums: Vec<CycloNum> = list.into_iter().map(|(_, x)| x).collect();
    let mut bounded = oracle_bounded(&nums, b)?;
    bounded.numbers = labels.clone();
    let mut rank = oracle_rank(&nums, digits)?;
    rank.numbers = labels;
    if bounded.is_dependent() && !rank.is_dependent() {
        rank.verdict = Verdict::DependentWithWitness;
        rank.witness = bounded.witness.clone();
        rank.note = Some("witness found by the bounded search".into());
    } else if rank.verdict == Verdict::Undecided {
        rank.verdict = bounded.verdict;
    }
    rank.cross_check = Some(Box::new(bounded));
    Ok(rank)
}

pub fn verify_p4_instance(set: &[u64], b: i64, digits: u32) -> Result<IndependenceReport> {
    verify_p4_with(set, &[], b, digits)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcordanceRow {
    pub q: u64,
    pub criterion: bool,
    pub case_tag: String,
    pub oracle: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub agree: bool,
}

/// Criterion against the rank oracle for every composite `q ≤ q_max`.
pub fn concordance(
    q_max: u64,
    digits: u32,
    reading: Clause3Reading,
) -> Result<Vec<ConcordanceRow>> {
    (4..=q_max)
        .filter(|&q| is_composite(q))
        .map(|q| {
            let crit = unit_system_criterion(q, reading)?;
            let nums: Vec<CycloNum> = unit_system(q).into_iter().map(|(_, x)| x).collect();
            let orc = oracle_rank(&nums, digits)?;
            let agree = match orc.verdict {
                Verdict::Independent => crit.verdict,
                Verdict::DependentWithWitness => !crit.verdict,
                _ => false,
            };
            Ok(ConcordanceRow {
                q,
                criterion: crit.verdict,
                case_tag: crit.case_tag,
                oracle: orc.verdict,
                witness: orc.witness,
                agree,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_and_classes() {
        assert_eq!(mult_order(2, 5).unwrap(), 4);
        assert_eq!(mult_order(7, 3).unwrap(), 1);
        assert_eq!(mult_order(3, 7).unwrap(), 6);
        assert!(mult_order(3, 6).is_err());
        assert_eq!(classify_root(2, 3).unwrap(), Classification::Primitive);
        assert_eq!(classify_root(2, 7).unwrap(), Classification::SemiPrimitive);
        assert_eq!(classify_root(1, 5).unwrap(), Classification::Neither);
        assert_eq!(
            classify_root(2 + 7, 7).unwrap(),
            classify_root(2, 7).unwrap()
        );
    }

    #[test]
    fn property_one() {
        let r = check_property_i(15);
        assert!(r.verdict);
        assert_eq!(r.case_tag, "property-I-case2");
        assert!(r.evidence.iter().all(|e| e.recheck()));
        assert!(!check_property_i(21).verdict);
        assert!(!check_property_i(12).verdict);
        assert!(!check_property_i(77).verdict);
    }

    #[test]
    fn property_two() {
        let r = check_property_ii(&[15]);
        assert!(r.verdict);
        assert_eq!(r.primes, Some(vec![3, 5]));
        assert!(!check_property_ii(&[15, 77]).verdict);
        let r = check_property_ii(&[15, 25]);
        assert!(!r.verdict);
        assert!(r.reason.unwrap().contains("gcd"));
    }

    #[test]
    fn odd_criterion() {
        assert_eq!(pei_feng_composite(12).unwrap().case_tag, "clause-1a");
        assert_eq!(pei_feng_composite(20).unwrap().case_tag, "clause-1a");
        assert_eq!(pei_feng_composite(28).unwrap().case_tag, "clause-1b");
        assert_eq!(pei_feng_composite(24).unwrap().case_tag, "clause-2a");
        assert_eq!(pei_feng_composite(15).unwrap().case_tag, "clause-3b");
        assert!(!pei_feng_composite(21).unwrap().verdict);
        assert!(pei_feng_composite(30).is_err());
        assert!(pei_feng_composite(9).is_err());
    }

    #[test]
    fn clause_predicates() {
        // 33 = 3·11: 3 has order 5 mod 11 and 11 ≡ 2 mod 3, so clause 3a fails
        assert!(!pei_feng_composite(33).unwrap().verdict);
        // 4·3·7: 2 is primitive mod 3 and semi-primitive mod 7; 3 is primitive
        // mod 14 and 7 ≡ 1 has order 1 = φ(6)/2 mod 6
        let r = pei_feng_composite(84).unwrap();
        assert_eq!(r.case_tag, "clause-4a");
        assert!(r.evidence.iter().any(|e| e.base == 7 && e.modulus == 6));
        // 4·5·3: 2 primitive mod 3, 5 primitive mod 3, 3 primitive mod 5
        assert_eq!(pei_feng_composite(60).unwrap().case_tag, "clause-4b");
        // 3·7·11: (p − 1)/2 = 1, 3, 5; 3 → 7 → 11 → 3 is primitive forward and
        // semi-primitive backward (7 ≡ 1 has order 1 = φ(3)/2)
        assert_eq!(pei_feng_composite(231).unwrap().case_tag, "clause-5");
        // 3·7·19: (7 − 1)/2 and (19 − 1)/2 share 3
        assert!(pei_feng_composite(399)
            .unwrap()
            .reason
            .unwrap()
            .contains("coprime"));
        // 8·5: 5 has order 2 mod 8 and 5 ≢ −1 mod 8; 2 is primitive mod 5
        assert_eq!(pei_feng_composite(40).unwrap().case_tag, "clause-2a");
        // 8·7: 7 ≡ −1 mod 8 has order 2 but 2^0·7 ≡ −1
        assert!(!pei_feng_composite(56).unwrap().verdict);
    }

    #[test]
    fn mixed_reading() {
        // verbatim clause 3(a) is never met: exactly one of p₁, p₂ is a square mod the other
        for q in [21u64, 33, 57, 77, 133, 209] {
            let v = pei_feng_composite(q).unwrap();
            assert!(!v.verdict, "{q}");
        }
        assert_eq!(
            pei_feng_composite_with(21, Clause3Reading::Mixed)
                .unwrap()
                .case_tag,
            "clause-3a"
        );
        assert!(
            pei_feng_composite_with(33, Clause3Reading::Mixed)
                .unwrap()
                .verdict
        );
        assert!(
            pei_feng_two_mod_four_with(42, Clause3Reading::Mixed)
                .unwrap()
                .verdict
        );
        // 39 = 3·13 has 13 ≡ 1 mod 4, so the reading does not matter
        assert!(
            !pei_feng_composite_with(39, Clause3Reading::Mixed)
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn even_criterion() {
        assert_eq!(
            pei_feng_two_mod_four(18).unwrap().case_tag,
            "twice-odd-prime-power"
        );
        assert!(pei_feng_two_mod_four(30).unwrap().verdict);
        assert!(!pei_feng_two_mod_four(42).unwrap().verdict);
        assert!(pei_feng_two_mod_four(20).is_err());
    }

    #[test]
    fn bounded_oracle() {
        let r = oracle_bounded(&[CycloNum::zeta(5, 1)], 2).unwrap();
        assert_eq!(r.witness.unwrap().exponents, vec![1]);
        let r = oracle_bounded(
            &[
                CycloNum::one_minus_zeta(3, 1),
                CycloNum::one_minus_zeta(5, 1),
            ],
            3,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::IndependentUpToBound);
        let a = CycloNum::unit_ratio(7, 2);
        let r = oracle_bounded(&[a.clone(), a.mul(&a)], 2).unwrap();
        assert_eq!(r.witness.unwrap().exponents, vec![2, -1]);
        assert!(matches!(
            oracle_bounded(&vec![a; 8], 3),
            Err(Error::SearchCap(_))
        ));
    }

    #[test]
    fn rank_oracle() {
        let nums: Vec<CycloNum> = [3, 7, 9]
            .iter()
            .map(|&h| CycloNum::unit_ratio(20, h))
            .collect();
        let r = oracle_rank(&nums, 40).unwrap();
        assert_eq!((r.verdict, r.rank), (Verdict::Independent, Some(3)));
        let r = oracle_rank(&[CycloNum::from_int(1, 2), CycloNum::from_int(1, 3)], 40).unwrap();
        assert_eq!(r.verdict, Verdict::Independent);
        let a = CycloNum::unit_ratio(7, 2);
        let r = oracle_rank(&[a.clone(), a.mul(&a).mul(&CycloNum::zeta(7, 3))], 40).unwrap();
        assert_eq!(
            r.witness.unwrap(),
            Witness {
                exponents: vec![2, -1],
                root_order: 7
            }
        );
        let r = oracle_rank(&[CycloNum::zeta(5, 1)], 40).unwrap();
        assert_eq!(r.witness.unwrap().root_order, 5);
    }

    #[test]
    fn dependent_system() {
        // 39 = 3·13: 3 has order 3 mod 13
        assert!(!pei_feng_composite(39).unwrap().verdict);
        let nums: Vec<CycloNum> = unit_system(39).into_iter().map(|(_, x)| x).collect();
        let r = oracle_rank(&nums, 40).unwrap();
        assert_eq!(r.verdict, Verdict::DependentWithWitness);
        let w = r.witness.unwrap();
        assert_eq!(
            relation_order(&nums, &w.exponents).unwrap(),
            Some(w.root_order)
        );
    }

    #[test]
    fn p4_list() {
        let list = p4_numbers(&[15]).unwrap();
        let labels: Vec<&str> = list.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(
            labels,
            [
                "1-z3",
                "1-z5",
                "(1-z15^2)/(1-z15)",
                "(1-z15^4)/(1-z15)",
                "(1-z15^7)/(1-z15)",
                "(1-z5^2)/(1-z5)"
            ]
        );
        assert!(p4_numbers(&[21]).is_err());
    }
}
