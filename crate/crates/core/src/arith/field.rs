use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::Rational;

/// A field given as a context object; elements are plain values.
pub trait Field: Clone + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of a rational number; `None` when its denominator is not invertible.
    fn from_rational(&self, q: &Rational) -> Option<Self::Elem>;
    fn from_i64(&self, v: i64) -> Self::Elem;
    /// The prime p when this is a residue ring Z/p^K rather than a field.
    fn uniformizer(&self) -> Option<u64> {
        None
    }

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }
    /// a += b * c
    fn add_mul_assign(&self, a: &mut Self::Elem, b: &Self::Elem, c: &Self::Elem) {
        *a = self.add(a, &self.mul(b, c));
    }
    /// a -= b * c
    fn sub_mul_assign(&self, a: &mut Self::Elem, b: &Self::Elem, c: &Self::Elem) {
        *a = self.sub(a, &self.mul(b, c));
    }
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }
    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// The rational numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn inv(&self, a: &Rational) -> Option<Rational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn from_rational(&self, q: &Rational) -> Option<Rational> {
        Some(q.clone())
    }
    fn from_i64(&self, v: i64) -> Rational {
        Rational::from_integer(BigInt::from(v))
    }
    fn add_assign(&self, a: &mut Rational, b: &Rational) {
        *a += b;
    }
    fn add_mul_assign(&self, a: &mut Rational, b: &Rational, c: &Rational) {
        if !b.is_zero() && !c.is_zero() {
            *a += b * c;
        }
    }
    fn sub_mul_assign(&self, a: &mut Rational, b: &Rational, c: &Rational) {
        if !b.is_zero() && !c.is_zero() {
            *a -= b * c;
        }
    }
}

/// F_p for a prime p < 2^31, elements stored as reduced `u64` residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 31), "prime field modulus out of range");
        PrimeField { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce_bigint(&self, v: &BigInt) -> u64 {
        let m = v.mod_floor(&BigInt::from(self.p));
        m.to_u64().expect("residue fits")
    }
}

impl Field for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1 % self.p
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        let (mut t, mut new_t) = (0i64, 1i64);
        let (mut r, mut new_r) = (self.p as i64, *a as i64);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        if r != 1 {
            return None;
        }
        Some(t.rem_euclid(self.p as i64) as u64)
    }
    fn from_rational(&self, q: &Rational) -> Option<u64> {
        let d = self.reduce_bigint(q.denom());
        let n = self.reduce_bigint(q.numer());
        self.inv(&d).map(|di| self.mul(&n, &di))
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    #[inline]
    fn add_assign(&self, a: &mut u64, b: &u64) {
        *a = self.add(a, b);
    }
    #[inline]
    fn add_mul_assign(&self, a: &mut u64, b: &u64, c: &u64) {
        *a = (*a + b * c) % self.p;
    }
    #[inline]
    fn sub_mul_assign(&self, a: &mut u64, b: &u64, c: &u64) {
        *a = (*a + self.p * self.p - b * c) % self.p;
    }
}

/// The ring Z/p^K of p-adic integers at fixed precision, with p^K < 2^62.
///
/// Only units are invertible; `from_rational` fails when p divides the denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicRing {
    p: u64,
    precision: u32,
    m: u64,
}

impl PadicRing {
    /// The largest precision with p^K < 2^62.
    pub fn new(p: u64) -> Self {
        assert!(p >= 2);
        let (mut m, mut k) = (1u64, 0u32);
        while let Some(next) = m.checked_mul(p).filter(|&x| x < (1 << 62)) {
            m = next;
            k += 1;
        }
        PadicRing { p, precision: k, m }
    }

    pub fn with_precision(p: u64, precision: u32) -> Self {
        let m = p.checked_pow(precision).filter(|&x| x < (1 << 62)).expect("p^K below 2^62");
        PadicRing { p, precision, m }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    fn reduce_bigint(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.m)).to_u64().expect("residue fits")
    }
}

impl Field for PadicRing {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1 % self.m
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (*a as u128 * *b as u128 % self.m as u128) as u64
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.m - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a % self.p == 0 {
            return None;
        }
        let e = (*a as i128).extended_gcd(&(self.m as i128));
        Some(e.x.rem_euclid(self.m as i128) as u64)
    }
    fn from_rational(&self, q: &Rational) -> Option<u64> {
        let d = self.reduce_bigint(q.denom());
        let n = self.reduce_bigint(q.numer());
        self.inv(&d).map(|di| self.mul(&n, &di))
    }
    fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.m as i128) as u64
    }
    fn uniformizer(&self) -> Option<u64> {
        Some(self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn padic_ring_ops() {
        let r = PadicRing::new(5);
        assert_eq!(r.precision(), 26);
        let x = r.from_rational(&rat(25, 126)).unwrap();
        assert_eq!(r.mul(&x, &r.from_i64(126)), 25);
        assert!(r.inv(&r.from_i64(10)).is_none());
        assert!(r.from_rational(&rat(1, 5)).is_none());
        assert_eq!(r.add(&r.from_i64(-1), &1), 0);
    }

    #[test]
    fn prime_field_ops() {
        let k = PrimeField::new(2147483647);
        let a = 123456789u64;
        let ai = k.inv(&a).unwrap();
        assert_eq!(k.mul(&a, &ai), 1);
        let mut acc = 5u64;
        k.sub_mul_assign(&mut acc, &a, &ai);
        assert_eq!(acc, 4);
        assert_eq!(k.from_rational(&rat(1, 2)).unwrap(), 1073741824);
        assert_eq!(k.from_i64(-1), 2147483646);
        assert_eq!(PrimeField::new(7).from_rational(&rat(1, 14)), None);
    }

    #[test]
    fn pow_default() {
        let k = PrimeField::new(13);
        assert_eq!(k.pow(&2, 12), 1);
        assert_eq!(Rationals.pow(&rat(2, 3), 3), rat(8, 27));
    }
}
