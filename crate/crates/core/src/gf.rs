//! Arithmetic in GF(p^r).
//!
//! Elements are dense integer codes: the polynomial `c_0 + c_1 t + ... +
//! c_{r-1} t^{r-1}` reduced modulo the field's defining polynomial is stored as
//! `c_0 + c_1 p + ... + c_{r-1} p^{r-1}`. Codes 0 and 1 are always the additive
//! and multiplicative identities.
//!
//! Multiplication goes through log/antilog tables built from the smallest
//! primitive element. Addition uses a full table when `q <= 256` and digit-wise
//! arithmetic otherwise.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Largest field order accepted by [`FieldCtx::new`].
pub const DEFAULT_MAX_ORDER: u64 = 1 << 16;

const ADD_TABLE_MAX: u32 = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An immutable description of GF(p^r) together with its arithmetic tables.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Elem,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add_table: Option<Vec<u32>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.r == other.r && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// Builds GF(p^r) using the monic irreducible polynomial of degree `r`
    /// whose lower coefficients, read as base-`p` digits, form the smallest
    /// integer.
    pub fn new(p: u32, r: u32) -> Result<Self> {
        Self::with_limit(p, r, DEFAULT_MAX_ORDER)
    }

    pub fn with_limit(p: u32, r: u32, max_order: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::ZeroDegree);
        }
        let order = (p as u64).checked_pow(r).filter(|&q| q <= max_order);
        let q = match order {
            Some(q) if q <= u32::MAX as u64 => q as u32,
            _ => {
                return Err(Error::FieldTooLarge {
                    p,
                    r,
                    max: max_order,
                })
            }
        };
        let modulus = least_irreducible(p, r);
        let generator = find_generator(p, r, q, &modulus);

        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n.max(1)];
        let mut log = vec![0u32; q as usize];
        let g = digits(generator.0, p, r);
        let mut acc = digits(1, p, r);
        for i in 0..n {
            let code = undigits(&acc, p);
            exp[i] = code;
            exp[i + n] = code;
            log[code as usize] = i as u32;
            acc = poly_mulmod(&acc, &g, &modulus, p);
        }

        let neg = (0..q)
            .map(|x| {
                undigits(
                    &digits(x, p, r)
                        .iter()
                        .map(|&c| (p - c) % p)
                        .collect::<Vec<_>>(),
                    p,
                )
            })
            .collect();

        let mut ctx = FieldCtx {
            p,
            r,
            q,
            modulus,
            generator,
            exp,
            log,
            neg,
            add_table: None,
        };
        if q <= ADD_TABLE_MAX {
            let mut table = vec![0u32; (q * q) as usize];
            for x in 0..q {
                for y in 0..q {
                    table[(x * q + y) as usize] = ctx.add_digits(x, y);
                }
            }
            ctx.add_table = Some(table);
        }
        Ok(ctx)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Coefficients of the defining polynomial, constant term first; the last
    /// entry is the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The smallest code generating the multiplicative group.
    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.q).map(Elem)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (1..self.q).map(Elem)
    }

    pub fn elem(&self, code: u64) -> Result<Elem> {
        if code < self.q as u64 {
            Ok(Elem(code as u32))
        } else {
            Err(Error::ElemOutOfRange { code, q: self.q })
        }
    }

    /// Image of the integer `n` under the prime-field embedding.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    fn add_digits(&self, x: u32, y: u32) -> u32 {
        if self.p == 2 {
            return x ^ y;
        }
        if self.r == 1 {
            return (x + y) % self.p;
        }
        let (mut x, mut y) = (x, y);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        match &self.add_table {
            Some(t) => Elem(t[(x.0 * self.q + y.0) as usize]),
            None => Elem(self.add_digits(x.0, y.0)),
        }
    }

    #[inline]
    pub fn neg(&self, x: Elem) -> Elem {
        Elem(self.neg[x.0 as usize])
    }

    #[inline]
    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        if x.0 == 0 || y.0 == 0 {
            return Elem::ZERO;
        }
        let i = self.log[x.0 as usize] + self.log[y.0 as usize];
        Elem(self.exp[i as usize])
    }

    pub fn inv(&self, x: Elem) -> Result<Elem> {
        if x.is_zero() {
            Err(Error::ZeroInverse)
        } else {
            Ok(self.recip(x))
        }
    }

    /// Multiplicative inverse of a value known to be nonzero.
    ///
    /// Panics on zero.
    #[inline]
    pub fn recip(&self, x: Elem) -> Elem {
        assert!(!x.is_zero(), "inverse of zero");
        let n = self.q - 1;
        let l = self.log[x.0 as usize];
        Elem(self.exp[((n - l) % n) as usize])
    }

    pub fn div(&self, x: Elem, y: Elem) -> Result<Elem> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if x.is_zero() {
            return Elem::ZERO;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[x.0 as usize] as u64;
        Elem(self.exp[((l * (e % n)) % n) as usize])
    }

    /// `x^(p^k)`, the k-th power of the Frobenius map.
    pub fn frobenius(&self, x: Elem, k: u32) -> Elem {
        let mut y = x;
        for _ in 0..k {
            y = self.pow(y, self.p as u64);
        }
        y
    }

    /// The unique copy of GF(p^sub_r) inside this field.
    pub fn subfield_elements(&self, sub_r: u32) -> Result<ElemSet> {
        if sub_r == 0 || !self.r.is_multiple_of(sub_r) {
            return Err(Error::NotDivisor {
                divisor: sub_r as u64,
                value: self.r as u64,
            });
        }
        let members = self
            .elements()
            .filter(|&x| self.frobenius(x, sub_r) == x)
            .collect();
        Ok(ElemSet {
            members,
            role: ElemSetRole::Subfield { degree: sub_r },
        })
    }

    /// The subgroup of index `c` in the multiplicative group, generated by
    /// `g^c` for the field's primitive element `g`.
    pub fn mult_subgroup(&self, c: u32) -> Result<ElemSet> {
        let n = self.q - 1;
        if c == 0 || !n.is_multiple_of(c) {
            return Err(Error::NotDivisor {
                divisor: c as u64,
                value: n as u64,
            });
        }
        let mut members: Vec<Elem> = (0..n / c)
            .map(|k| Elem(self.exp[(c * k) as usize]))
            .collect();
        members.sort();
        Ok(ElemSet {
            members,
            role: ElemSetRole::MultSubgroup { index: c },
        })
    }

    /// Exhaustively checks inverses and checks the ring axioms on all triples
    /// when `q <= 64`, or on `samples` seeded random triples otherwise.
    pub fn self_test(&self, samples: usize, seed: u64) -> SelfTestReport {
        let mut report = SelfTestReport::default();
        for x in self.nonzero_elements() {
            report.inverses_checked += 1;
            if self.mul(x, self.recip(x)) != Elem::ONE || self.mul(self.recip(x), x) != Elem::ONE {
                report.failures.push(format!("inverse of {x}"));
            }
        }
        let check = |x: Elem, y: Elem, z: Elem, report: &mut SelfTestReport| {
            report.triples_checked += 1;
            let ok = self.add(self.add(x, y), z) == self.add(x, self.add(y, z))
                && self.mul(self.mul(x, y), z) == self.mul(x, self.mul(y, z))
                && self.add(x, y) == self.add(y, x)
                && self.mul(x, y) == self.mul(y, x)
                && self.mul(x, self.add(y, z)) == self.add(self.mul(x, y), self.mul(x, z))
                && self.sub(self.add(x, y), y) == x;
            if !ok && report.failures.len() < 16 {
                report.failures.push(format!("axioms at ({x},{y},{z})"));
            }
        };
        if self.q <= 64 {
            for x in self.elements() {
                for y in self.elements() {
                    for z in self.elements() {
                        check(x, y, z, &mut report);
                    }
                }
            }
        } else {
            let mut rng = SplitMix64::new(seed);
            let q = self.q as u64;
            for _ in 0..samples {
                let x = Elem(rng.below(q) as u32);
                let y = Elem(rng.below(q) as u32);
                let z = Elem(rng.below(q) as u32);
                check(x, y, z, &mut report);
            }
        }
        report
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SelfTestReport {
    pub inverses_checked: u64,
    pub triples_checked: u64,
    pub failures: Vec<String>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElemSetRole {
    Subfield { degree: u32 },
    MultSubgroup { index: u32 },
    Generic,
}

/// A sorted set of field elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElemSet {
    pub members: Vec<Elem>,
    pub role: ElemSetRole,
}

impl ElemSet {
    pub fn generic(mut members: Vec<Elem>) -> Self {
        members.sort();
        members.dedup();
        ElemSet {
            members,
            role: ElemSetRole::Generic,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.members.iter().copied()
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let n = n as u64;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn digits(mut code: u32, p: u32, r: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(r as usize);
    for _ in 0..r {
        out.push(code % p);
        code /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat; p is prime.
    let (mut base, mut e, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Remainder of `a` divided by `b` over F_p. `b` must be nonzero.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = trim(b.to_vec());
    let mut a = trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p) as u64;
    while a.len() > db {
        let da = a.len() - 1;
        let factor = (a[da] as u64 * lead_inv % p as u64) as u32;
        for (i, &bi) in b.iter().enumerate() {
            let idx = da - db + i;
            let sub = (factor as u64 * bi as u64 % p as u64) as u32;
            a[idx] = (a[idx] + p - sub) % p;
        }
        a = trim(a);
    }
    a
}

/// Product of two residues modulo the monic `modulus`, padded to its degree.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let r = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|x| x as u32).collect();
    let mut rem = poly_rem(&prod, modulus, p);
    rem.resize(r, 0);
    rem
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let r = f.len() - 1;
    for d in 1..=r / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut g = digits(low as u32, p, d as u32);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn least_irreducible(p: u32, r: u32) -> Vec<u32> {
    let count = (p as u64).pow(r);
    for low in 0..count {
        let mut f = digits(low as u32, p, r);
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn poly_pow(x: &[u32], mut e: u64, modulus: &[u32], p: u32) -> Vec<u32> {
    let r = modulus.len() - 1;
    let mut base = x.to_vec();
    let mut acc = digits(1, p, r as u32);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, modulus, p);
        }
        base = poly_mulmod(&base, &base, modulus, p);
        e >>= 1;
    }
    acc
}

fn find_generator(p: u32, r: u32, q: u32, modulus: &[u32]) -> Elem {
    let n = (q - 1) as u64;
    let one = digits(1, p, r);
    let factors = prime_factors(n);
    (1..q)
        .find(|&code| {
            let x = digits(code, p, r);
            factors
                .iter()
                .all(|&l| poly_pow(&x, n / l, modulus, p) != one)
        })
        .map(Elem)
        .expect("multiplicative group is cyclic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_modulus() {
        let f = FieldCtx::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.mul(Elem(2), Elem(2)), Elem(3));
    }

    #[test]
    fn gf9_modulus() {
        let f = FieldCtx::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        // t^2 = -1 = 2
        assert_eq!(f.mul(Elem(3), Elem(3)), Elem(2));
    }

    #[test]
    fn prime_field_modulus_is_t() {
        let f = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.mul(Elem(3), Elem(5)), Elem(1));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldCtx::new(4, 1), Err(Error::NotPrime(4)));
        assert_eq!(FieldCtx::new(1, 1), Err(Error::NotPrime(1)));
        assert_eq!(FieldCtx::new(5, 0), Err(Error::ZeroDegree));
        assert!(matches!(
            FieldCtx::new(2, 17),
            Err(Error::FieldTooLarge { .. })
        ));
        assert!(matches!(
            FieldCtx::with_limit(7, 2, 48),
            Err(Error::FieldTooLarge { .. })
        ));
    }

    #[test]
    fn small_arithmetic() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        assert_eq!(f5.inv(Elem(2)), Ok(Elem(3)));
        assert_eq!(f5.inv(Elem::ZERO), Err(Error::ZeroInverse));
        let f7 = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f7.pow(Elem(3), 6), Elem(1));
        assert_eq!(f7.pow(Elem(0), 0), Elem(1));
        assert_eq!(f7.sub(Elem(2), Elem(5)), Elem(4));
        assert_eq!(f7.from_int(-1), Elem(6));
    }

    #[test]
    fn generator_is_smallest_primitive() {
        assert_eq!(FieldCtx::new(7, 1).unwrap().generator(), Elem(3));
        assert_eq!(FieldCtx::new(13, 1).unwrap().generator(), Elem(2));
        assert_eq!(FieldCtx::new(2, 1).unwrap().generator(), Elem(1));
    }

    #[test]
    fn subfields() {
        let f4 = FieldCtx::new(2, 2).unwrap();
        assert_eq!(
            f4.subfield_elements(1).unwrap().members,
            vec![Elem(0), Elem(1)]
        );
        assert_eq!(f4.subfield_elements(2).unwrap().len(), 4);
        assert!(f4.subfield_elements(3).is_err());

        let f16 = FieldCtx::new(2, 4).unwrap();
        let sub = f16.subfield_elements(2).unwrap();
        assert_eq!(sub.len(), 4);
        for x in sub.iter() {
            assert_eq!(f16.pow(x, 4), x);
            for y in sub.iter() {
                assert!(sub.contains(f16.mul(x, y)));
                assert!(sub.contains(f16.add(x, y)));
            }
        }
    }

    #[test]
    fn multiplicative_subgroups() {
        let f7 = FieldCtx::new(7, 1).unwrap();
        assert_eq!(
            f7.mult_subgroup(2).unwrap().members,
            vec![Elem(1), Elem(2), Elem(4)]
        );
        assert_eq!(f7.mult_subgroup(1).unwrap().len(), 6);
        assert!(f7.mult_subgroup(4).is_err());

        let f13 = FieldCtx::new(13, 1).unwrap();
        let brute: Vec<Elem> = f13
            .nonzero_elements()
            .filter(|&x| f13.pow(x, 4) == Elem::ONE)
            .collect();
        assert_eq!(brute, vec![Elem(1), Elem(5), Elem(8), Elem(12)]);
        assert_eq!(f13.mult_subgroup(3).unwrap().members, brute);
    }

    #[test]
    fn self_test_small_fields() {
        for (p, r) in [(2, 1), (2, 3), (3, 3), (5, 2), (2, 6), (7, 2), (3, 5)] {
            let f = FieldCtx::new(p, r).unwrap();
            let rep = f.self_test(20_000, 7);
            assert!(rep.passed(), "GF({p}^{r}): {:?}", rep.failures);
        }
    }

    #[test]
    fn deterministic_construction() {
        for (p, r) in [(2, 8), (3, 4), (5, 3), (17, 2)] {
            assert_eq!(
                FieldCtx::new(p, r).unwrap().modulus(),
                FieldCtx::new(p, r).unwrap().modulus()
            );
        }
    }
}
