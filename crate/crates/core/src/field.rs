//! Arithmetic in a prime field GF(q).
//!
//! Every encoder, decoder and oracle in the crate works over a single
//! [`PrimeField`]. Elements carry their modulus so mixing two fields is caught
//! instead of silently producing garbage.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default modulus, the Fermat prime 2^16 + 1. Two data bytes fit in one symbol.
pub const DEFAULT_MODULUS: u64 = 65_537;

/// A prime modulus, checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q })
    }

    /// GF(65537).
    pub fn default_field() -> Self {
        PrimeField { q: DEFAULT_MODULUS }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Element for `value mod q`.
    #[inline]
    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            q: self.q,
        }
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, q: self.q }
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        let q = self.q as u128;
        (if s >= q { s - q } else { s }) as u64
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            (a as u128 + self.q as u128 - b as u128) as u64
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub(crate) fn pow_raw(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    pub(crate) fn inv_raw(&self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.q) {
            return Err(Error::DivisionByZero);
        }
        // Fermat: a^(q-2) = a^-1 for prime q.
        Ok(self.pow_raw(a, self.q - 2))
    }

    /// `sum a[i] * b[i]` on reduced raw values.
    #[inline]
    pub(crate) fn dot_raw(&self, a: &[u64], b: &[u64]) -> u64 {
        if self.q <= u32::MAX as u64 {
            // Each reduced product is < 2^32, so the sum cannot overflow for
            // fewer than 2^32 terms.
            let q = self.q;
            a.iter().zip(b).map(|(x, y)| x * y % q).sum::<u64>() % q
        } else {
            a.iter()
                .zip(b)
                .fold(0, |acc, (&x, &y)| self.add_raw(acc, self.mul_raw(x, y)))
        }
    }

    /// Horner evaluation of `coeffs[0] + coeffs[1] x + ...`.
    pub fn eval_poly(&self, coeffs: &[FieldElement], x: FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        let mut acc = 0u64;
        for c in coeffs.iter().rev() {
            self.check(*c)?;
            acc = self.add_raw(self.mul_raw(acc, x.value), c.value);
        }
        Ok(FieldElement { value: acc, q: self.q })
    }

    #[inline]
    pub(crate) fn check(&self, a: FieldElement) -> Result<()> {
        if a.q != self.q {
            return Err(Error::FieldMismatch {
                left: self.q,
                right: a.q,
            });
        }
        Ok(())
    }

    /// Number of whole bits that always fit below `q`, i.e. floor(log2 q).
    pub fn bits_floor(&self) -> u32 {
        63 - self.q.leading_zeros()
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self::default_field()
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// An element of some [`PrimeField`].
///
/// The operator impls panic when the operands live in different fields; use
/// the `try_*` methods where the operands come from untrusted input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    q: u64,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        PrimeField { q: self.q }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<PrimeField> {
        if self.q != other.q {
            return Err(Error::FieldMismatch {
                left: self.q,
                right: other.q,
            });
        }
        Ok(self.field())
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        let f = self.same_field(&other)?;
        Ok(FieldElement {
            value: f.add_raw(self.value, other.value),
            q: self.q,
        })
    }

    pub fn try_sub(self, other: Self) -> Result<Self> {
        let f = self.same_field(&other)?;
        Ok(FieldElement {
            value: f.sub_raw(self.value, other.value),
            q: self.q,
        })
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        let f = self.same_field(&other)?;
        Ok(FieldElement {
            value: f.mul_raw(self.value, other.value),
            q: self.q,
        })
    }

    pub fn inv(self) -> Result<Self> {
        let value = self.field().inv_raw(self.value)?;
        Ok(FieldElement { value, q: self.q })
    }

    pub fn pow(self, exp: u64) -> Self {
        FieldElement {
            value: self.field().pow_raw(self.value, exp),
            q: self.q,
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        FieldElement {
            value: if self.value == 0 { 0 } else { self.q - self.value },
            q: self.q,
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
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

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
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
