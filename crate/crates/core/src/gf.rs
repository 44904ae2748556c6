//! Exact arithmetic over finite fields GF(p^m) with q = p^m <= 2^16.
//!
//! Elements are stored as integers in `[0, q)`. For extension fields an
//! element is the base-p digit vector of its polynomial representative,
//! `value = sum d_j p^j` where `d_j` is the coefficient of `x^j`.
//!
//! The reduction polynomial is the lexicographically smallest monic
//! irreducible of degree `m` (coefficients compared from the constant term
//! upward) and the designated primitive element is the smallest integer of
//! multiplicative order `q - 1`. Prime fields use modular arithmetic;
//! extension fields use log/antilog tables.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum of 65536")]
    TooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {value} does not belong to GF({q})")]
    FieldMismatch { value: u32, q: u32 },
    #[error("{r} does not divide q - 1 = {order}")]
    OrderNotDivisible { r: u64, order: u32 },
}

/// A field element, the canonical integer representative in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Inner {
    p: u32,
    m: u32,
    q: u32,
    /// Coefficients `c_0..c_{m-1}` of the monic reduction polynomial
    /// (the leading coefficient is implicit). Empty for prime fields.
    poly: Vec<u32>,
    primitive: Fe,
    /// `exp[e] = c^e` for `e` in `[0, 2(q-1))`.
    exp: Vec<u16>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
}

/// A finite field. Cheap to clone; all clones share the same tables.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.m == other.0.m && self.0.poly == other.0.poly)
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.m == 1 {
            write!(f, "GF({})", self.0.q)
        } else {
            write!(f, "GF({}^{}; poly={:?})", self.0.p, self.0.m, self.0.poly)
        }
    }
}

/// Returns `(p, m)` with `q = p^m` when `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = smallest_prime_factor(q);
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p as u32, m))
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 1 {
        let p = smallest_prime_factor(n);
        out.push(p);
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    out
}

/// Smallest prime power strictly greater than `bound` that satisfies `accept`.
pub fn smallest_prime_power_above(bound: u64, accept: impl Fn(u64) -> bool) -> Option<u64> {
    (bound + 1..=MAX_ORDER as u64).find(|&q| prime_power(q).is_some() && accept(q))
}

// Polynomials over GF(p), coefficient vectors from the constant term upward.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = poly_trim(b.to_vec());
    let mut r = poly_trim(a.to_vec());
    let lead_inv = mod_pow(*b.last().expect("nonzero divisor") as u64, p as u64 - 2, p as u64) as u32;
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        for (k, &bk) in b.iter().enumerate() {
            let sub = (factor as u64 * bk as u64 % p as u64) as u32;
            r[shift + k] = (r[shift + k] + p - sub) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn mod_pow(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc
}

fn digits_of(mut v: u64, base: u32, len: u32) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (v % base as u64) as u32;
            v /= base as u64;
            d
        })
        .collect()
}

/// Monic polynomials of degree `deg` in the canonical order: the constant
/// term is the most significant comparison key.
fn monic_polys(p: u32, deg: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(deg);
    (0..count).map(move |idx| {
        let mut coeffs = digits_of(idx, p, deg);
        coeffs.reverse();
        coeffs.push(1);
        coeffs
    })
}

/// Irreducibility over GF(p) by trial division with every monic polynomial
/// of degree at most `deg / 2`.
pub(crate) fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() as u32 - 1;
    if deg == 0 {
        return false;
    }
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|g| !poly_rem(poly, &g, p).is_empty()))
}

fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    monic_polys(p, m).find(|f| is_irreducible(f, p)).expect("an irreducible polynomial exists for every degree")
}

/// Multiplication of packed elements modulo the reduction polynomial,
/// used only while the tables are being built.
fn slow_mul(a: u32, b: u32, p: u32, m: u32, poly: &[u32]) -> u32 {
    let da = digits_of(a as u64, p, m);
    let db = digits_of(b as u64, p, m);
    let mut prod = vec![0u32; (2 * m) as usize];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let rem = poly_rem(&prod, poly, p);
    rem.iter().rev().fold(0u32, |acc, &d| acc * p + d)
}

impl Field {
    /// The field of order `q` with canonical reduction polynomial and
    /// primitive element.
    pub fn new(q: u64) -> Result<Field, GfError> {
        let (p, m) = prime_power(q).ok_or(GfError::NotPrimePower(q))?;
        if q > MAX_ORDER as u64 {
            return Err(GfError::TooLarge(q));
        }
        let q = q as u32;
        let mut full_poly = Vec::new();
        let mul = |a: u32, b: u32, poly: &[u32]| -> u32 {
            if m == 1 {
                (a as u64 * b as u64 % p as u64) as u32
            } else {
                slow_mul(a, b, p, m, poly)
            }
        };
        if m > 1 {
            full_poly = smallest_irreducible(p, m);
        }
        let order = q - 1;
        let factors = distinct_prime_factors(order as u64);
        let pow_slow = |a: u32, mut e: u64, poly: &[u32]| -> u32 {
            let mut acc = 1u32;
            let mut base = a;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul(acc, base, poly);
                }
                base = mul(base, base, poly);
                e >>= 1;
            }
            acc
        };
        let primitive = (1..q)
            .find(|&g| factors.iter().all(|&f| pow_slow(g, order as u64 / f, &full_poly) != 1))
            .expect("the multiplicative group is cyclic");

        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = 1u32;
        for e in 0..order {
            exp[e as usize] = cur as u16;
            log[cur as usize] = e;
            cur = mul(cur, primitive, &full_poly);
        }
        for e in order..2 * order {
            exp[e as usize] = exp[(e - order) as usize];
        }
        let poly = if m > 1 { full_poly[..m as usize].to_vec() } else { Vec::new() };
        Ok(Field(Arc::new(Inner { p, m, q, poly, primitive: Fe(primitive as u16), exp, log })))
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.0.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.m
    }

    /// Reduction polynomial coefficients `c_0..c_m` (monic). `[0, 1]`
    /// stands in for prime fields.
    pub fn reduction_polynomial(&self) -> Vec<u32> {
        if self.0.m == 1 {
            vec![0, 1]
        } else {
            let mut v = self.0.poly.clone();
            v.push(1);
            v
        }
    }

    #[inline]
    pub fn primitive(&self) -> Fe {
        self.0.primitive
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// Checked conversion from an integer representative.
    pub fn elem(&self, value: u32) -> Result<Fe, GfError> {
        if value < self.0.q {
            Ok(Fe(value as u16))
        } else {
            Err(GfError::FieldMismatch { value, q: self.0.q })
        }
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.value() < self.0.q
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.q).map(|v| Fe(v as u16))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> {
        (1..self.0.q).map(|v| Fe(v as u16))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.p;
        if self.0.m == 1 {
            let s = a.value() + b.value();
            Fe(if s >= p { s - p } else { s } as u16)
        } else if p == 2 {
            Fe(a.0 ^ b.0)
        } else {
            self.digitwise(a, b, |x, y| (x + y) % p)
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.0.p;
        if self.0.m == 1 {
            Fe(if a.0 == 0 { 0 } else { (p - a.value()) as u16 })
        } else if p == 2 {
            a
        } else {
            self.digitwise(a, Fe::ZERO, |x, _| (p - x) % p)
        }
    }

    fn digitwise(&self, a: Fe, b: Fe, op: impl Fn(u32, u32) -> u32) -> Fe {
        let p = self.0.p;
        let (mut x, mut y) = (a.value(), b.value());
        let mut out = 0u32;
        let mut scale = 1u32;
        for _ in 0..self.0.m {
            out += op(x % p, y % p) * scale;
            x /= p;
            y /= p;
            scale *= p;
        }
        Fe(out as u16)
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        if self.0.m == 1 {
            Fe((a.value() * b.value() % self.0.p) as u16)
        } else {
            let e = self.0.log[a.0 as usize] + self.0.log[b.0 as usize];
            Fe(self.0.exp[e as usize])
        }
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.0 == 0 {
            return Err(GfError::DivisionByZero);
        }
        let order = self.0.q - 1;
        let e = (order - self.0.log[a.0 as usize]) % order;
        Ok(Fe(self.0.exp[e as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`; negative exponents are allowed for nonzero `a`.
    pub fn pow(&self, a: Fe, e: i64) -> Result<Fe, GfError> {
        if a.0 == 0 {
            return match e.signum() {
                0 => Ok(Fe::ONE),
                1 => Ok(Fe::ZERO),
                _ => Err(GfError::DivisionByZero),
            };
        }
        let order = (self.0.q - 1) as i64;
        let l = self.0.log[a.0 as usize] as i64;
        let idx = (l * e.rem_euclid(order)).rem_euclid(order);
        Ok(Fe(self.0.exp[idx as usize]))
    }

    /// `c^e` for the designated primitive element; defined for every integer `e`.
    #[inline]
    pub fn exp(&self, e: i64) -> Fe {
        let order = (self.0.q - 1) as i64;
        Fe(self.0.exp[e.rem_euclid(order) as usize])
    }

    /// Discrete logarithm to the base of the primitive element.
    pub fn log(&self, a: Fe) -> Result<u32, GfError> {
        if a.0 == 0 {
            Err(GfError::DivisionByZero)
        } else {
            Ok(self.0.log[a.0 as usize])
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: Fe) -> Result<u32, GfError> {
        let l = self.log(a)?;
        let order = self.0.q - 1;
        Ok(order / gcd(l, order))
    }

    /// `delta = c^((q-1)/r)`, a primitive r-th root of unity.
    pub fn rth_root_of_unity(&self, r: u64) -> Result<Fe, GfError> {
        let order = self.0.q - 1;
        if r == 0 || !(order as u64).is_multiple_of(r) {
            return Err(GfError::OrderNotDivisible { r, order });
        }
        Ok(self.exp((order as u64 / r) as i64))
    }

    /// Sum of a sequence of elements.
    pub fn sum(&self, items: impl IntoIterator<Item = Fe>) -> Fe {
        items.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_primitive_elements() {
        assert_eq!(Field::new(13).unwrap().primitive(), Fe(2));
        assert_eq!(Field::new(17).unwrap().primitive(), Fe(3));
        assert_eq!(Field::new(3).unwrap().primitive(), Fe(2));
        // 2 has order 3 in GF(7); the smallest generator is 3.
        let f7 = Field::new(7).unwrap();
        assert_eq!(f7.primitive(), Fe(3));
        assert_eq!(f7.multiplicative_order(Fe(2)).unwrap(), 3);
    }

    #[test]
    fn not_prime_power() {
        assert_eq!(Field::new(12).unwrap_err(), GfError::NotPrimePower(12));
        assert_eq!(Field::new(1).unwrap_err(), GfError::NotPrimePower(1));
        assert_eq!(Field::new(100).unwrap_err(), GfError::NotPrimePower(100));
        assert!(matches!(Field::new(1 << 17), Err(GfError::TooLarge(_))));
    }

    #[test]
    fn delta_in_gf13() {
        let f = Field::new(13).unwrap();
        assert_eq!(f.pow(Fe(2), 6).unwrap(), Fe(12));
        assert_eq!(f.rth_root_of_unity(2).unwrap(), Fe(12));
        assert_eq!(f.rth_root_of_unity(1).unwrap(), Fe(1));
        assert_eq!(f.rth_root_of_unity(5).unwrap_err(), GfError::OrderNotDivisible { r: 5, order: 12 });
    }

    #[test]
    fn pow_edge_cases() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.pow(Fe(2), 0).unwrap(), Fe(1));
        assert_eq!(f.pow(Fe(0), 0).unwrap(), Fe(1));
        assert_eq!(f.pow(Fe(0), 3).unwrap(), Fe(0));
        assert_eq!(f.pow(Fe(0), -1).unwrap_err(), GfError::DivisionByZero);
        assert_eq!(f.pow(Fe(3), -1).unwrap(), Fe(5));
        assert_eq!(f.inv(Fe(0)).unwrap_err(), GfError::DivisionByZero);
        assert_eq!(f.div(Fe(1), Fe(0)).unwrap_err(), GfError::DivisionByZero);
    }

    #[test]
    fn canonical_polynomials() {
        // x^2 + 1 over GF(3), x^3 + x^2 + 1 over GF(2), x^2 + x + 1 over GF(2)
        assert_eq!(Field::new(9).unwrap().reduction_polynomial(), vec![1, 0, 1]);
        assert_eq!(Field::new(8).unwrap().reduction_polynomial(), vec![1, 0, 1, 1]);
        assert_eq!(Field::new(4).unwrap().reduction_polynomial(), vec![1, 1, 1]);
        for q in [4u64, 8, 9, 16, 25, 27, 32, 49, 64, 81, 128, 243, 256] {
            let f = Field::new(q).unwrap();
            assert!(is_irreducible(&f.reduction_polynomial(), f.characteristic()), "q={q}");
        }
    }

    #[test]
    fn gf9_cyclic_group() {
        let f = Field::new(9).unwrap();
        let c = f.primitive();
        // Enumerate the cyclic group by repeated multiplication.
        let mut seen = std::collections::BTreeSet::new();
        let mut x = Fe::ONE;
        for _ in 0..8 {
            seen.insert(x);
            x = f.mul(x, c);
        }
        assert_eq!(x, Fe::ONE);
        assert_eq!(seen.len(), 8);
        assert_eq!(f.pow(c, 8).unwrap(), Fe::ONE);
        assert_ne!(f.pow(c, 4).unwrap(), Fe::ONE);
        // x + 1 is the smallest generator under x^2 + 1.
        assert_eq!(c, Fe(4));
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE, "q={q} a={a}");
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.sub(f.add(a, b), b), a);
                    for c in f.elements() {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn primitivity_exhaustive() {
        for q in (2u64..=256).filter(|&q| prime_power(q).is_some()) {
            let f = Field::new(q).unwrap();
            let c = f.primitive();
            let mut seen = std::collections::HashSet::new();
            let mut x = Fe::ONE;
            for _ in 0..q - 1 {
                seen.insert(x);
                x = f.mul(x, c);
            }
            assert_eq!(seen.len() as u64, q - 1, "q={q}");
            // smallest element of full order
            for g in 1..c.value() {
                assert!(f.multiplicative_order(Fe(g as u16)).unwrap() < (q - 1) as u32);
            }
        }
    }

    #[test]
    fn roots_of_unity_have_exact_order() {
        let f = Field::new(37).unwrap();
        for r in [1u64, 2, 3, 4, 6, 9, 12, 18, 36] {
            let d = f.rth_root_of_unity(r).unwrap();
            assert_eq!(f.pow(d, r as i64).unwrap(), Fe::ONE);
            for t in 1..r {
                assert_ne!(f.pow(d, t as i64).unwrap(), Fe::ONE);
            }
        }
    }

    #[test]
    fn smallest_prime_power_scan() {
        assert_eq!(smallest_prime_power_above(12, |_| true), Some(13));
        assert_eq!(smallest_prime_power_above(41, |_| true), Some(43));
        assert_eq!(smallest_prime_power_above(8, |_| true), Some(9));
        assert_eq!(smallest_prime_power_above(14, |q| q % 2 == 1), Some(17));
    }
}
