use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Deterministic primality for 64-bit inputs (Miller-Rabin with a fixed witness set).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

/// Element of F_p carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeFieldElement {
    residue: u64,
    modulus: u64,
}

impl PrimeFieldElement {
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(is_prime(modulus), "modulus {modulus} is not prime");
        PrimeFieldElement {
            residue: value.rem_euclid(modulus as i64) as u64,
            modulus,
        }
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn with(&self, residue: u64) -> Self {
        PrimeFieldElement {
            residue,
            modulus: self.modulus,
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let m = self.modulus as u128;
        let (mut b, mut r) = (self.residue as u128, 1u128 % m);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        self.with(r as u64)
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    /// Multiplicative inverse via Fermat; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.pow(self.modulus - 2))
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.modulus, other.modulus, "mixed prime fields");
    }
}

impl Add for PrimeFieldElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.check(&o);
        self.with(((self.residue as u128 + o.residue as u128) % self.modulus as u128) as u64)
    }
}

impl Sub for PrimeFieldElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for PrimeFieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.with((self.modulus - self.residue) % self.modulus)
    }
}

impl Mul for PrimeFieldElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.check(&o);
        self.with(((self.residue as u128 * o.residue as u128) % self.modulus as u128) as u64)
    }
}

impl fmt::Display for PrimeFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.residue, self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime(2147483647));
        assert!(!is_prime(3215031751));
        assert!(is_prime(18446744073709551557));
    }

    #[test]
    fn arithmetic() {
        let a = PrimeFieldElement::new(3, 7);
        let b = PrimeFieldElement::new(-1, 7);
        assert_eq!((a + b).residue(), 2);
        assert_eq!((a * b).residue(), 4);
        assert_eq!((a - b).residue(), 4);
        assert_eq!((a * a.inv().unwrap()).residue(), 1);
        assert!(PrimeFieldElement::new(14, 7).inv().is_none());
    }
}
