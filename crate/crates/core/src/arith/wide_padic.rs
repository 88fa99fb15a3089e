use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{Field, Rational};

/// ℤ/p^K with K up to the largest value such that p^K < 2^126, p odd.
///
/// Elements are stored in Montgomery form with R = 2^128; use [`WidePadicRing::residue`]
/// to read the ordinary residue back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WidePadicRing {
    p: u64,
    precision: u32,
    m: u128,
    // −m^(−1) mod 2^128
    minv: u128,
    // R mod m and R² mod m
    r1: u128,
    r2: u128,
}

#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let ll = a0 * b0;
    let lh = a0 * b1;
    let hl = a1 * b0;
    let hh = a1 * b1;
    let mid = (ll >> 64) + (lh as u64 as u128) + (hl as u64 as u128);
    let lo = (ll as u64 as u128) | (mid << 64);
    let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (lo, hi)
}

#[inline]
fn mul_hi(a: u128, b: u128) -> u128 {
    mul_wide(a, b).1
}

impl WidePadicRing {
    /// `None` for p = 2.
    pub fn new(p: u64) -> Option<Self> {
        let mut k = 0;
        let mut m = 1u128;
        while let Some(next) = m.checked_mul(p as u128).filter(|&x| x < (1u128 << 126)) {
            m = next;
            k += 1;
        }
        Self::with_precision(p, k)
    }

    pub fn with_precision(p: u64, precision: u32) -> Option<Self> {
        if p % 2 == 0 || p < 3 {
            return None;
        }
        let m = (p as u128).checked_pow(precision).filter(|&x| x < (1u128 << 126))?;
        // Newton iteration for m^(−1) mod 2^128.
        let mut inv: u128 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(m.wrapping_mul(inv)));
        }
        let big_m = BigInt::from(m);
        let r: BigInt = BigInt::from(1) << 128usize;
        let r1 = (&r).mod_floor(&big_m).to_u128().unwrap();
        let r2 = (&r * &r).mod_floor(&big_m).to_u128().unwrap();
        Some(WidePadicRing { p, precision, m, minv: inv.wrapping_neg(), r1, r2 })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u128 {
        self.m
    }

    #[inline]
    fn redc(&self, lo: u128, hi: u128) -> u128 {
        let u = lo.wrapping_mul(self.minv);
        let t = hi + mul_hi(u, self.m) + (lo != 0) as u128;
        if t >= self.m {
            t - self.m
        } else {
            t
        }
    }

    /// The ordinary residue in [0, p^K).
    pub fn residue(&self, a: &u128) -> u128 {
        self.redc(*a, 0)
    }

    fn from_residue(&self, x: u128) -> u128 {
        let (lo, hi) = mul_wide(x, self.r2);
        self.redc(lo, hi)
    }

    fn reduce_bigint(&self, v: &BigInt) -> u128 {
        v.mod_floor(&BigInt::from(self.m)).to_u128().expect("residue fits")
    }
}

impl Field for WidePadicRing {
    type Elem = u128;

    #[inline]
    fn zero(&self) -> u128 {
        0
    }
    #[inline]
    fn one(&self) -> u128 {
        self.r1
    }
    #[inline]
    fn is_zero(&self, a: &u128) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u128, b: &u128) -> u128 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u128, b: &u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }
    #[inline]
    fn mul(&self, a: &u128, b: &u128) -> u128 {
        let (lo, hi) = mul_wide(*a, *b);
        self.redc(lo, hi)
    }
    #[inline]
    fn neg(&self, a: &u128) -> u128 {
        if *a == 0 {
            0
        } else {
            self.m - a
        }
    }
    fn inv(&self, a: &u128) -> Option<u128> {
        let x = self.residue(a);
        if x % self.p as u128 == 0 {
            return None;
        }
        let e = BigInt::from(x).extended_gcd(&BigInt::from(self.m));
        Some(self.from_residue(self.reduce_bigint(&e.x)))
    }
    fn from_rational(&self, q: &Rational) -> Option<u128> {
        let d = self.reduce_bigint(q.denom());
        if d % self.p as u128 == 0 {
            return None;
        }
        let n = self.from_residue(self.reduce_bigint(q.numer()));
        let d = self.from_residue(d);
        self.inv(&d).map(|di| self.mul(&n, &di))
    }
    fn from_i64(&self, v: i64) -> u128 {
        let r = if v < 0 {
            self.m - (v.unsigned_abs() as u128 % self.m)
        } else {
            v as u128 % self.m
        };
        self.from_residue(if r == self.m { 0 } else { r })
    }
    fn uniformizer(&self) -> Option<u64> {
        Some(self.p)
    }
}

impl WidePadicRing {
    /// Signed representative of the residue, as an integer in (−p^K/2, p^K/2].
    pub fn signed(&self, a: &u128) -> BigInt {
        let x = self.residue(a);
        if x > self.m / 2 {
            BigInt::from(x) - BigInt::from(self.m)
        } else if x.is_zero() {
            BigInt::zero()
        } else {
            BigInt::from(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn wide_ring_ops() {
        let r = WidePadicRing::new(5).unwrap();
        assert_eq!(r.precision(), 54);
        let x = r.from_rational(&rat(25, 126)).unwrap();
        assert_eq!(r.residue(&r.mul(&x, &r.from_i64(126))), 25);
        assert!(r.inv(&r.from_i64(10)).is_none());
        assert!(r.from_rational(&rat(1, 5)).is_none());
        assert!(r.is_zero(&r.add(&r.from_i64(-1), &r.one())));
        assert_eq!(r.signed(&r.from_i64(-7)), BigInt::from(-7));
        assert_eq!(WidePadicRing::new(7).unwrap().precision(), 44);
        assert!(WidePadicRing::new(2).is_none());
    }

    #[test]
    fn wide_mul_matches_bigint() {
        let r = WidePadicRing::new(7).unwrap();
        let m = BigInt::from(r.modulus());
        let a = r.modulus() - 12345678901234567;
        let b = r.modulus() / 3 + 17;
        let prod = r.residue(&r.mul(&r.from_residue(a), &r.from_residue(b)));
        assert_eq!(BigInt::from(prod), (BigInt::from(a) * BigInt::from(b)).mod_floor(&m));
    }
}
