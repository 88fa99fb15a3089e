use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// An integer residue mod p^D: a p-adic integer known to precision D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPadic {
    residue: BigUint,
    p: u64,
    precision: u32,
}

fn modulus(p: u64, d: u32) -> BigUint {
    BigUint::from(p).pow(d)
}

impl TruncatedPadic {
    pub fn new(value: &BigInt, p: u64, precision: u32) -> Self {
        let m = BigInt::from(modulus(p, precision));
        let r = value.mod_floor(&m);
        TruncatedPadic {
            residue: r.to_biguint().expect("nonnegative"),
            p,
            precision,
        }
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }
    pub fn prime(&self) -> u64 {
        self.p
    }
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn modulus(&self) -> BigUint {
        modulus(self.p, self.precision)
    }

    /// Base-p digits, least significant first, always `precision` long.
    pub fn digits(&self) -> Vec<u64> {
        let p = BigUint::from(self.p);
        let mut r = self.residue.clone();
        (0..self.precision)
            .map(|_| {
                let (q, d) = r.div_rem(&p);
                r = q;
                d.iter_u64_digits().next().unwrap_or(0)
            })
            .collect()
    }

    /// p-adic valuation, capped at the precision (zero has valuation D).
    pub fn valuation(&self) -> u32 {
        self.digits()
            .iter()
            .position(|&d| d != 0)
            .map_or(self.precision, |v| v as u32)
    }

    fn compatible(&self, o: &Self) {
        assert!(self.p == o.p && self.precision == o.precision, "mixed p-adic rings");
    }

    fn wrap(&self, r: BigUint) -> Self {
        TruncatedPadic {
            residue: r % self.modulus(),
            p: self.p,
            precision: self.precision,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.compatible(o);
        self.wrap(&self.residue + &o.residue)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.compatible(o);
        self.wrap(&self.residue + self.modulus() - &o.residue)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.compatible(o);
        self.wrap(&self.residue * &o.residue)
    }

    /// Division by a unit keeps the precision.
    pub fn div_unit(&self, o: &Self) -> Result<Self> {
        self.compatible(o);
        let inv = inverse_mod(&BigInt::from(o.residue.clone()), &BigInt::from(self.modulus()))
            .ok_or(Error::PDivides { p: self.p })?;
        Ok(self.wrap(&self.residue * inv.to_biguint().expect("nonnegative")))
    }

    /// Exact division by p; the result is known to one digit less.
    pub fn div_p(&self) -> Result<Self> {
        if self.precision <= 1 {
            return Err(Error::AmbiguousLift("p-adic precision exhausted".into()));
        }
        let (q, r) = self.residue.div_rem(&BigUint::from(self.p));
        if !r.is_zero() {
            return Err(Error::PDivides { p: self.p });
        }
        Ok(TruncatedPadic {
            residue: q,
            p: self.p,
            precision: self.precision - 1,
        })
    }
}

impl fmt::Display for TruncatedPadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .digits()
            .iter()
            .enumerate()
            .map(|(i, d)| match i {
                0 => format!("{d}"),
                1 => format!("{d}*{}", self.p),
                _ => format!("{d}*{}^{i}", self.p),
            })
            .collect();
        write!(f, "{} + O({}^{})", terms.join(" + "), self.p, self.precision)
    }
}

pub(crate) fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.mod_floor(m).extended_gcd(m);
    g.gcd.is_one().then(|| g.x.mod_floor(m))
}

/// Image of a p-integral rational in Z/p^D.
pub fn padic_embed(x: &Rational, p: u64, precision: u32) -> Result<TruncatedPadic> {
    let pb = BigInt::from(p);
    if x.denom().is_multiple_of(&pb) {
        return Err(Error::PDivides { p });
    }
    let m = BigInt::from(modulus(p, precision));
    let inv = inverse_mod(x.denom(), &m).ok_or(Error::PDivides { p })?;
    Ok(TruncatedPadic::new(&(x.numer() * inv), p, precision))
}

/// The unique integer c with |c| <= bound congruent to x.
pub fn padic_to_integer(x: &TruncatedPadic, bound: &BigUint) -> Result<BigInt> {
    let m = x.modulus();
    if bound * 2u32 + 1u32 > m {
        return Err(Error::AmbiguousLift(format!(
            "bound {bound} needs more than {}^{} for a unique lift",
            x.p, x.precision
        )));
    }
    let r = BigInt::from_biguint(Sign::Plus, x.residue.clone());
    let half = BigInt::from(&m >> 1);
    let c = if r > half { r - BigInt::from(m) } else { r };
    if c.abs() > BigInt::from(bound.clone()) {
        return Err(Error::AmbiguousLift(format!(
            "residue lifts to {c}, outside the bound {bound}"
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn embed_first_reduction_coordinate() {
        let x = padic_embed(&rat(25, 126), 5, 8).unwrap();
        assert_eq!(x.digits(), vec![0, 0, 1, 0, 0, 4, 4, 4]);
        assert_eq!(x.valuation(), 2);
    }

    #[test]
    fn embed_minus_one() {
        assert_eq!(padic_embed(&rat(-1, 1), 7, 4).unwrap().digits(), vec![6; 4]);
        assert_eq!(padic_embed(&rat(0, 1), 7, 4).unwrap().valuation(), 4);
    }

    #[test]
    fn embed_rejects_p_in_denominator() {
        assert_eq!(padic_embed(&rat(1, 10), 5, 3), Err(Error::PDivides { p: 5 }));
    }

    #[test]
    fn lift_integers() {
        let x = padic_embed(&rat(25, 1), 5, 8).unwrap();
        assert_eq!(padic_to_integer(&x, &BigUint::from(50u32)).unwrap(), BigInt::from(25));
        let digits = [3u64, 5, 6, 6, 6, 6, 5, 0, 5];
        let mut v = BigInt::zero();
        for d in digits.iter().rev() {
            v = v * 7 + d;
        }
        let x = TruncatedPadic::new(&v, 7, 9);
        let c = padic_to_integer(&x, &BigUint::from(20_000_000u32)).unwrap();
        assert_eq!(c, BigInt::from(-10823719));
        assert!(padic_to_integer(&x, &BigUint::from(30_000_000u64)).is_err());
    }

    #[test]
    fn ring_operations() {
        let (a, b) = (rat(3, 7), rat(-11, 4));
        let (pa, pb) = (padic_embed(&a, 5, 6).unwrap(), padic_embed(&b, 5, 6).unwrap());
        assert_eq!(pa.mul(&pb), padic_embed(&(&a * &b), 5, 6).unwrap());
        assert_eq!(pa.sub(&pb), padic_embed(&(&a - &b), 5, 6).unwrap());
        assert_eq!(pa.div_unit(&pb).unwrap(), padic_embed(&(&a / &b), 5, 6).unwrap());
        let ten = padic_embed(&rat(10, 1), 5, 6).unwrap();
        let two = ten.div_p().unwrap();
        assert_eq!(two.precision(), 5);
        assert_eq!(two, padic_embed(&rat(2, 1), 5, 5).unwrap());
    }
}
