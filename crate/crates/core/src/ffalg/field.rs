//! Finite fields GF(p^m).
//!
//! Elements are plain `u64` values in `[0, q)`. For extension fields an element
//! packs its polynomial coefficients base `p`, lowest degree first:
//! `value = c_0 + c_1 p + ... + c_{m-1} p^{m-1}`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element, packed as described in the module docs.
pub type FieldElem = u64;

/// Fields up to this order get precomputed inverse tables.
const INV_TABLE_MAX: u64 = 1 << 16;
/// Extension fields up to this order get a full multiplication table.
const MUL_TABLE_MAX: u64 = 256;

#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

struct FieldInner {
    p: u64,
    m: u32,
    /// Ascending coefficients of the monic reduction polynomial (length m + 1).
    reduction: Option<Vec<u64>>,
    q: u64,
    inv: Option<Vec<u64>>,
    mul: Option<Vec<u64>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p
                && self.inner.m == other.inner.m
                && self.inner.reduction == other.inner.reduction)
    }
}

impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.p.hash(state);
        self.inner.m.hash(state);
        self.inner.reduction.hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inner.m == 1 {
            write!(f, "GF({})", self.inner.p)
        } else {
            write!(f, "GF({}^{})", self.inner.p, self.inner.m)
        }
    }
}

impl Field {
    /// Builds GF(p^m). `reduction` lists the coefficients of a monic
    /// irreducible polynomial of degree `m`, constant term first, and must be
    /// given exactly when `m > 1`.
    pub fn new(p: u64, m: u32, reduction: Option<&[u64]>) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        if m == 0 {
            return Err(Error::InvalidReduction("extension degree must be at least 1".into()));
        }
        let q = (0..m)
            .try_fold(1u64, |acc, _| acc.checked_mul(p))
            .ok_or(Error::FieldTooLarge { p, m })?;
        let reduction = match (m, reduction) {
            (1, None) => None,
            (1, Some(_)) => {
                return Err(Error::InvalidReduction(
                    "prime fields take no reduction polynomial".into(),
                ))
            }
            (_, None) => return Err(Error::MissingReduction { m }),
            (_, Some(poly)) => {
                if poly.len() != m as usize + 1 {
                    return Err(Error::InvalidReduction(format!(
                        "expected {} coefficients, got {}",
                        m + 1,
                        poly.len()
                    )));
                }
                if let Some(&c) = poly.iter().find(|&&c| c >= p) {
                    return Err(Error::InvalidReduction(format!("coefficient {c} is not below {p}")));
                }
                if poly[m as usize] != 1 {
                    return Err(Error::InvalidReduction("polynomial is not monic".into()));
                }
                if !poly::is_irreducible(poly, p) {
                    return Err(Error::ReduciblePolynomial { p });
                }
                Some(poly.to_vec())
            }
        };
        let mut inner = FieldInner {
            p,
            m,
            reduction,
            q,
            inv: None,
            mul: None,
        };
        if m > 1 && q <= MUL_TABLE_MAX {
            let mut table = vec![0u64; (q * q) as usize];
            for a in 0..q {
                for b in a..q {
                    let c = inner.poly_mul(a, b);
                    table[(a * q + b) as usize] = c;
                    table[(b * q + a) as usize] = c;
                }
            }
            inner.mul = Some(table);
        }
        if q <= INV_TABLE_MAX {
            let mut table = vec![0u64; q as usize];
            for a in 1..q {
                if table[a as usize] == 0 {
                    let b = inner.pow(a, q - 2);
                    table[a as usize] = b;
                    table[b as usize] = a;
                }
            }
            inner.inv = Some(table);
        }
        Ok(Field { inner: Arc::new(inner) })
    }

    /// The prime field GF(p).
    pub fn prime(p: u64) -> Result<Field> {
        Field::new(p, 1, None)
    }

    pub fn characteristic(&self) -> u64 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.m
    }

    pub fn reduction(&self) -> Option<&[u64]> {
        self.inner.reduction.as_deref()
    }

    /// Field order q = p^m.
    pub fn order(&self) -> u64 {
        self.inner.q
    }

    pub fn check(&self, value: u64) -> Result<FieldElem> {
        if value < self.inner.q {
            Ok(value)
        } else {
            Err(Error::InvalidElement { value, q: self.inner.q })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let p = self.inner.p;
        if self.inner.m == 1 {
            let (s, overflow) = a.overflowing_add(b);
            if overflow || s >= p {
                s.wrapping_sub(p)
            } else {
                s
            }
        } else if p == 2 {
            a ^ b
        } else {
            self.inner.digitwise(a, b, |x, y| (x + y) % p)
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let p = self.inner.p;
        if self.inner.m == 1 {
            if a == 0 {
                0
            } else {
                p - a
            }
        } else if p == 2 {
            a
        } else {
            self.inner.digitwise(a, 0, |x, _| (p - x) % p)
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.inner.mul(a, b)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        if a == 0 {
            return None;
        }
        match &self.inner.inv {
            Some(table) => Some(table[a as usize]),
            None => Some(self.inner.pow(a, self.inner.q - 2)),
        }
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        self.inner.pow(a, e)
    }

    /// All field elements in increasing packed order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        0..self.inner.q
    }
}

impl FieldInner {
    fn digitwise(&self, mut a: u64, mut b: u64, op: impl Fn(u64, u64) -> u64) -> u64 {
        let p = self.p;
        let mut out = 0u64;
        let mut scale = 1u64;
        for i in 0..self.m {
            out += op(a % p, b % p) * scale;
            a /= p;
            b /= p;
            if i + 1 < self.m {
                scale *= p;
            }
        }
        out
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        if self.m == 1 {
            if self.p <= u32::MAX as u64 {
                a * b % self.p
            } else {
                ((a as u128 * b as u128) % self.p as u128) as u64
            }
        } else if let Some(table) = &self.mul {
            table[(a * self.q + b) as usize]
        } else {
            self.poly_mul(a, b)
        }
    }

    fn poly_mul(&self, a: u64, b: u64) -> u64 {
        let p = self.p;
        let da = poly::unpack(a, p, self.m);
        let db = poly::unpack(b, p, self.m);
        let prod = poly::mul(&da, &db, p);
        let red = self.reduction.as_ref().expect("extension field has reduction");
        let rem = poly::rem(&prod, red, p);
        poly::pack(&rem, p)
    }

    fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for b in BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Dense polynomials over GF(p), ascending coefficients, no trailing zeros.
mod poly {
    pub fn unpack(mut v: u64, p: u64, m: u32) -> Vec<u64> {
        let mut out = Vec::with_capacity(m as usize);
        for _ in 0..m {
            out.push(v % p);
            v /= p;
        }
        trim(out)
    }

    pub fn pack(c: &[u64], p: u64) -> u64 {
        c.iter().rev().fold(0u64, |acc, &x| acc * p + x)
    }

    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn mulmod(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    fn inv(a: u64, p: u64) -> u64 {
        let mut acc = 1u64;
        let mut base = a;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, base, p);
            }
            base = mulmod(base, base, p);
            e >>= 1;
        }
        acc
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
            }
        }
        trim(out)
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let m = trim(m.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv(m[dm], p);
        let mut r = trim(a.to_vec());
        while r.len() > dm {
            let shift = r.len() - 1 - dm;
            let coef = mulmod(r[r.len() - 1], lead_inv, p);
            for (i, &c) in m.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - mulmod(coef, c, p)) % p;
            }
            r = trim(r);
        }
        r
    }

    fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        acc
    }

    fn prime_divisors(mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                out.push(d);
                while n % d == 0 {
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

    /// Rabin's test: f of degree m is irreducible iff x^(p^m) = x mod f and
    /// gcd(x^(p^(m/d)) - x, f) = 1 for every prime d | m.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let f = trim(f.to_vec());
        if f.len() < 2 {
            return false;
        }
        let m = (f.len() - 1) as u64;
        let x = vec![0u64, 1];
        // frob[i] = x^(p^i) mod f
        let mut frob = vec![rem(&x, &f, p)];
        for i in 0..m as usize {
            let next = powmod(&frob[i], p, &f, p);
            frob.push(next);
        }
        if !rem(&sub(&frob[m as usize], &x, p), &f, p).is_empty() {
            return false;
        }
        for d in prime_divisors(m) {
            let h = sub(&frob[(m / d) as usize], &x, p);
            let g = gcd(&f, &h, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_composites() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(18446744073709551557));
        assert!(!is_prime(3215031751));
    }

    #[test]
    fn field_construction_errors() {
        assert!(matches!(Field::prime(4), Err(Error::NonPrimeCharacteristic(4))));
        assert!(matches!(Field::new(2, 2, None), Err(Error::MissingReduction { m: 2 })));
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert!(matches!(
            Field::new(2, 2, Some(&[1, 0, 1])),
            Err(Error::ReduciblePolynomial { p: 2 })
        ));
        assert!(matches!(Field::new(2, 2, Some(&[1, 1, 0])), Err(Error::InvalidReduction(_))));
        assert!(matches!(Field::new(2, 1, Some(&[1, 1])), Err(Error::InvalidReduction(_))));
        assert!(matches!(Field::new(2, 64, Some(&[0; 65])), Err(Error::FieldTooLarge { .. })));
    }

    #[test]
    fn gf4_inverse_of_x() {
        let f = Field::new(2, 2, Some(&[1, 1, 1])).unwrap();
        // x is packed as 2, x + 1 as 3
        assert_eq!(f.inv(2), Some(3));
        // brute-force multiplication table: every nonzero element has exactly one inverse
        for a in 1..4 {
            let invs: Vec<u64> = (1..4).filter(|&b| f.mul(a, b) == 1).collect();
            assert_eq!(invs, vec![f.inv(a).unwrap()]);
        }
    }

    #[test]
    fn gf9_axioms() {
        // x^2 + 1 is irreducible over GF(3)
        let f = Field::new(3, 2, Some(&[1, 0, 1])).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a)), 0);
            for b in f.elements() {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in f.elements() {
                    assert_eq!(
                        f.mul(a, f.add(b, c)),
                        f.add(f.mul(a, b), f.mul(a, c))
                    );
                }
            }
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn large_extension_without_tables() {
        // x^3 + x + 1 over GF(1009) is irreducible iff it has no root
        let p = 1009;
        let has_root = (0..p).any(|x: u64| (x * x % p * x + x + 1) % p == 0);
        let res = Field::new(p, 3, Some(&[1, 1, 0, 1]));
        assert_eq!(res.is_ok(), !has_root);
        if let Ok(f) = res {
            let a = 12345;
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::prime(7).unwrap();
        assert_eq!(f.add(5, 4), 2);
        assert_eq!(f.sub(2, 5), 4);
        assert_eq!(f.mul(3, 5), 1);
        assert_eq!(f.inv(3), Some(5));
        assert_eq!(f.inv(0), None);
        let big = Field::prime(18446744073709551557).unwrap();
        let a = 18446744073709551000;
        assert_eq!(big.mul(a, big.inv(a).unwrap()), 1);
        assert_eq!(big.add(a, big.neg(a)), 0);
    }
}
