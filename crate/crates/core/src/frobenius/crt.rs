//! Chinese remaindering over word-size primes and rational reconstruction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{is_prime, Rational};

/// Primes below 2^31 in decreasing order.
pub fn primes_below_2_31() -> impl Iterator<Item = u64> {
    (3..(1u64 << 31)).rev().step_by(2).filter(|&x| is_prime(x))
}

/// Residues of a vector of rationals modulo a growing product of primes.
#[derive(Clone, Debug)]
pub struct CrtAccumulator {
    modulus: BigInt,
    residues: Vec<BigInt>,
}

impl CrtAccumulator {
    pub fn new(len: usize) -> Self {
        CrtAccumulator {
            modulus: BigInt::one(),
            residues: vec![BigInt::zero(); len],
        }
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn add(&mut self, prime: u64, values: &[u64]) {
        assert_eq!(values.len(), self.residues.len());
        let l = BigInt::from(prime);
        let m_mod_l = (&self.modulus % &l).to_u64_digits().1.first().copied().unwrap_or(0);
        let inv = mod_inverse(m_mod_l, prime).expect("moduli coprime");
        for (r, &v) in self.residues.iter_mut().zip(values) {
            let r_mod_l = (&*r % &l).to_u64_digits().1.first().copied().unwrap_or(0);
            let diff = (v + prime - r_mod_l) % prime;
            let t = (diff as u128 * inv as u128 % prime as u128) as u64;
            *r += &self.modulus * BigInt::from(t);
        }
        self.modulus *= l;
    }

    /// Rational reconstruction of every residue, if all succeed.
    pub fn reconstruct(&self) -> Option<Vec<Rational>> {
        self.residues
            .iter()
            .map(|r| rational_reconstruction(r, &self.modulus))
            .collect()
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// The fraction n/d with |n|, d ≤ sqrt(m/2) congruent to a modulo m, if any.
pub fn rational_reconstruction(a: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Rational::new(r1, t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn reconstructs_small_fractions() {
        let mut acc = CrtAccumulator::new(3);
        let targets = [rat(25, 126), rat(-2087 * 390625, 1185579252), rat(0, 1)];
        for p in primes_below_2_31().take(4) {
            let vals: Vec<u64> = targets
                .iter()
                .map(|q| {
                    let pf = crate::arith::PrimeField::new(p);
                    crate::arith::Field::from_rational(&pf, q).unwrap()
                })
                .collect();
            acc.add(p, &vals);
        }
        assert_eq!(acc.reconstruct().unwrap(), targets.to_vec());
    }

    #[test]
    fn first_primes() {
        let v: Vec<u64> = primes_below_2_31().take(2).collect();
        assert_eq!(v, vec![2147483647, 2147483629]);
    }
}
