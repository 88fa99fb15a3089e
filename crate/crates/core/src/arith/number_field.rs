use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linalg::{self, Matrix};
use super::{Field, Rational};
use crate::error::{Error, Result};

/// The field Q[t]/(m(t)) for a monic integer polynomial m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    /// Coefficients of m, constant term first; the last one is 1.
    modulus: Arc<Vec<BigInt>>,
}

/// Outcome of the cheap irreducibility screen on m(t).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    /// m is irreducible modulo some small prime, hence over Q.
    Proven,
    /// No certificate found; the caller's assertion is trusted.
    Unknown,
}

impl NumberField {
    pub fn new(modulus: Vec<BigInt>) -> Result<Self> {
        if modulus.len() < 2 || !modulus.last().unwrap().is_one() {
            return Err(Error::Invalid(
                "number field modulus must be monic of degree at least 1".into(),
            ));
        }
        let nf = NumberField {
            modulus: Arc::new(modulus),
        };
        if nf.degree() > 1 {
            if let Some(r) = nf.integer_root() {
                return Err(Error::Invalid(format!(
                    "number field modulus {} has the rational root {r}",
                    nf.modulus_string()
                )));
            }
        }
        Ok(nf)
    }

    /// Q itself, presented as Q[t]/(t).
    pub fn rationals() -> Self {
        NumberField {
            modulus: Arc::new(vec![BigInt::zero(), BigInt::one()]),
        }
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    pub fn modulus_string(&self) -> String {
        let c: Vec<Rational> = self.modulus.iter().map(|x| Rational::from_integer(x.clone())).collect();
        format_univariate(&c, "t")
    }

    pub fn element(&self, coords: &[Rational]) -> NumberFieldElement {
        NumberFieldElement {
            coords: reduce_mod(coords.to_vec(), &self.modulus),
            field: self.clone(),
        }
    }

    pub fn from_rational(&self, q: Rational) -> NumberFieldElement {
        let mut coords = vec![Rational::zero(); self.degree()];
        coords[0] = q;
        NumberFieldElement {
            coords,
            field: self.clone(),
        }
    }

    pub fn generator(&self) -> NumberFieldElement {
        self.element(&[Rational::zero(), Rational::one()])
    }

    fn integer_root(&self) -> Option<BigInt> {
        let c0 = self.modulus[0].abs();
        if c0.is_zero() {
            return Some(BigInt::zero());
        }
        let limit = c0.to_u64().unwrap_or(u64::MAX).min(1_000_000);
        for d in 1..=limit {
            let d = BigInt::from(d);
            if !c0.is_multiple_of(&d) {
                continue;
            }
            for r in [d.clone(), -d] {
                let v = self
                    .modulus
                    .iter()
                    .rev()
                    .fold(BigInt::zero(), |acc, c| acc * &r + c);
                if v.is_zero() {
                    return Some(r);
                }
            }
        }
        None
    }

    /// Irreducibility screen: looks for a small prime modulo which m stays irreducible.
    pub fn irreducibility(&self) -> Irreducibility {
        if self.degree() == 1 {
            return Irreducibility::Proven;
        }
        for l in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71] {
            let m: Vec<u64> = self
                .modulus
                .iter()
                .map(|c| c.mod_floor(&BigInt::from(l)).to_u64().unwrap())
                .collect();
            if modp::is_irreducible(&m, l) {
                return Irreducibility::Proven;
            }
        }
        Irreducibility::Unknown
    }
}

/// Element of Q[t]/(m(t)), stored by its coordinates in the basis 1, t, …, t^{d−1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberFieldElement {
    coords: Vec<Rational>,
    field: NumberField,
}

impl NumberFieldElement {
    pub fn coordinates(&self) -> &[Rational] {
        &self.coords
    }

    pub fn field(&self) -> &NumberField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coords[0].clone())
    }

    fn check(&self, o: &Self) {
        assert!(self.field == o.field, "mixed number fields");
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m: Vec<Rational> = self
            .field
            .modulus
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let (g, s) = univariate_inverse_gcd(&self.coords, &m);
        // s·a ≡ g (mod m) with g a nonzero constant when m is irreducible
        if g.len() != 1 || g[0].is_zero() {
            return None;
        }
        let inv_g = g[0].recip();
        let coords: Vec<Rational> = s.iter().map(|c| c * &inv_g).collect();
        Some(self.field.element(&coords))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.from_rational(Rational::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Field norm down to Q (determinant of multiplication by self).
    pub fn norm(&self) -> Rational {
        let d = self.field.degree();
        let t = self.field.generator();
        let mut basis_image = self.clone();
        let mut cols = Vec::with_capacity(d);
        for _ in 0..d {
            cols.push(basis_image.coords.clone());
            basis_image = &basis_image * &t;
        }
        let m: Matrix<Rational> = (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect();
        linalg::determinant(&super::Rationals, &m)
    }
}

impl Add for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn add(self, o: &NumberFieldElement) -> NumberFieldElement {
        self.check(o);
        NumberFieldElement {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
            field: self.field.clone(),
        }
    }
}

impl Sub for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn sub(self, o: &NumberFieldElement) -> NumberFieldElement {
        self.check(o);
        NumberFieldElement {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect(),
            field: self.field.clone(),
        }
    }
}

impl Neg for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn neg(self) -> NumberFieldElement {
        NumberFieldElement {
            coords: self.coords.iter().map(|a| -a).collect(),
            field: self.field.clone(),
        }
    }
}

impl Mul for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn mul(self, o: &NumberFieldElement) -> NumberFieldElement {
        self.check(o);
        let d = self.coords.len();
        if d == 1 {
            return NumberFieldElement {
                coords: vec![&self.coords[0] * &o.coords[0]],
                field: self.field.clone(),
            };
        }
        let mut prod = vec![Rational::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        NumberFieldElement {
            coords: reduce_mod(prod, &self.field.modulus),
            field: self.field.clone(),
        }
    }
}

impl fmt::Display for NumberFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_univariate(&self.coords, "t"))
    }
}

impl Field for NumberField {
    type Elem = NumberFieldElement;

    fn zero(&self) -> NumberFieldElement {
        self.from_rational(Rational::zero())
    }
    fn one(&self) -> NumberFieldElement {
        self.from_rational(Rational::one())
    }
    fn is_zero(&self, a: &NumberFieldElement) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &NumberFieldElement, b: &NumberFieldElement) -> NumberFieldElement {
        a + b
    }
    fn sub(&self, a: &NumberFieldElement, b: &NumberFieldElement) -> NumberFieldElement {
        a - b
    }
    fn mul(&self, a: &NumberFieldElement, b: &NumberFieldElement) -> NumberFieldElement {
        a * b
    }
    fn neg(&self, a: &NumberFieldElement) -> NumberFieldElement {
        -a
    }
    fn inv(&self, a: &NumberFieldElement) -> Option<NumberFieldElement> {
        a.inv()
    }
    fn from_rational(&self, q: &Rational) -> Option<NumberFieldElement> {
        Some(NumberField::from_rational(self, q.clone()))
    }
    fn from_i64(&self, v: i64) -> NumberFieldElement {
        NumberField::from_rational(self, Rational::from_integer(v.into()))
    }
}

/// Exact solution of A c = b over the number field of the entries.
pub fn nf_solve_linear(
    a: &Matrix<NumberFieldElement>,
    b: &[NumberFieldElement],
) -> Result<Vec<NumberFieldElement>> {
    let Some(k) = b.first().map(|x| x.field.clone()) else {
        return Ok(Vec::new());
    };
    linalg::solve(&k, a, b)
}

fn reduce_mod(mut p: Vec<Rational>, m: &[BigInt]) -> Vec<Rational> {
    let d = m.len() - 1;
    while p.len() > d {
        let lead = p.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = p.len() - d;
        for (i, c) in m[..d].iter().enumerate() {
            if !c.is_zero() {
                p[shift + i] -= &lead * Rational::from_integer(c.clone());
            }
        }
    }
    p.resize(d, Rational::zero());
    p
}

fn trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Rational::zero());
    }
}

fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lb = b[db].clone();
    if r.len() <= db {
        return (vec![Rational::zero()], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / &lb;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        q[shift] = c;
        r.pop();
        trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    (q, r)
}

fn poly_sub_mul(a: &[Rational], q: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = a.to_vec();
    let need = q.len() + b.len() - 1;
    if out.len() < need {
        out.resize(need, Rational::zero());
    }
    for (i, x) in q.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] -= x * y;
        }
    }
    trim(&mut out);
    out
}

/// Returns (g, s) with s·a ≡ g (mod m) and g = gcd(a, m).
fn univariate_inverse_gcd(a: &[Rational], m: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut s0, mut s1) = (vec![Rational::zero()], vec![Rational::one()]);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_sub_mul(&s0, &q, &s1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    (r0, s0)
}

pub(crate) fn format_univariate(c: &[Rational], var: &str) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (i, x) in c.iter().enumerate().rev() {
        if x.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        let mag = x.abs();
        let body = if mono.is_empty() {
            mag.to_string()
        } else if mag.is_one() {
            mono
        } else {
            format!("{mag}*{mono}")
        };
        let sign = if x.is_negative() { "-" } else { "+" };
        if parts.is_empty() {
            parts.push(if x.is_negative() { format!("-{body}") } else { body });
        } else {
            parts.push(format!("{sign} {body}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

mod modp {
    //! Dense univariate polynomials over F_l for the irreducibility screen.

    fn trim(p: &mut Vec<u64>) {
        while p.len() > 1 && *p.last().unwrap() == 0 {
            p.pop();
        }
    }

    fn inv(a: u64, l: u64) -> u64 {
        let mut r = 1;
        let (mut b, mut e) = (a % l, l - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % l;
            }
            b = b * b % l;
            e >>= 1;
        }
        r
    }

    fn rem(a: &[u64], m: &[u64], l: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let li = inv(m[dm], l);
        while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
            let c = r.last().unwrap() * li % l;
            let shift = r.len() - 1 - dm;
            for (i, mc) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + l * l - c * mc % l) % l;
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    fn mulmod(a: &[u64], b: &[u64], m: &[u64], l: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % l;
            }
        }
        rem(&out, m, l)
    }

    fn frobenius_iterate(times: usize, m: &[u64], l: u64) -> Vec<u64> {
        let mut x = rem(&[0, 1], m, l);
        for _ in 0..times {
            // x <- x^l mod m, composed as a polynomial power
            let mut acc = vec![1u64];
            let mut base = x.clone();
            let mut e = l;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(&acc, &base, m, l);
                }
                base = mulmod(&base, &base, m, l);
                e >>= 1;
            }
            x = acc;
        }
        x
    }

    fn gcd(a: &[u64], b: &[u64], l: u64) -> Vec<u64> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        trim(&mut a);
        trim(&mut b);
        while !(b.len() == 1 && b[0] == 0) {
            let r = rem(&a, &b, l);
            a = std::mem::replace(&mut b, r);
        }
        a
    }

    fn sub_x(p: &[u64], l: u64) -> Vec<u64> {
        let mut p = p.to_vec();
        if p.len() < 2 {
            p.resize(2, 0);
        }
        p[1] = (p[1] + l - 1) % l;
        trim(&mut p);
        p
    }

    /// Rabin's test for a monic polynomial whose degree is preserved mod l.
    pub fn is_irreducible(m: &[u64], l: u64) -> bool {
        let d = m.len() - 1;
        if *m.last().unwrap() % l == 0 {
            return false;
        }
        if !(frobenius_iterate(d, m, l) == rem(&[0, 1], m, l)) {
            return false;
        }
        let prime_divisors: Vec<usize> = (2..=d).filter(|q| d % q == 0 && (2..*q).all(|r| q % r != 0)).collect();
        prime_divisors.iter().all(|q| {
            let h = sub_x(&frobenius_iterate(d / q, m, l), l);
            gcd(m, &h, l).len() == 1
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn field(m: &[i64]) -> NumberField {
        NumberField::new(m.iter().map(|&c| BigInt::from(c)).collect()).unwrap()
    }

    #[test]
    fn sqrt_two_arithmetic() {
        let k = field(&[-2, 0, 1]);
        let t = k.generator();
        assert_eq!(&t * &t, k.from_rational(rat(2, 1)));
        let inv = t.inv().unwrap();
        assert_eq!(inv.coordinates(), &[rat(0, 1), rat(1, 2)]);
        assert_eq!(t.norm(), rat(-2, 1));
        assert_eq!(k.irreducibility(), Irreducibility::Proven);
    }

    #[test]
    fn biquadratic_identities() {
        let k = field(&[1, 0, -10, 0, 1]);
        let t = k.generator();
        let t3 = t.pow(3);
        let sqrt3 = &(&(&t * &k.from_rational(rat(11, 1))) - &t3) * &k.from_rational(rat(1, 2));
        assert_eq!(&sqrt3 * &sqrt3, k.from_rational(rat(3, 1)));
        let two_sqrt2 = &t3 - &(&t * &k.from_rational(rat(9, 1)));
        assert_eq!(&two_sqrt2 * &two_sqrt2, k.from_rational(rat(8, 1)));
        assert_eq!(k.irreducibility(), Irreducibility::Unknown);
        assert_eq!((&t * &t.inv().unwrap()), k.from_rational(rat(1, 1)));
    }

    #[test]
    fn rejects_rational_roots() {
        assert!(NumberField::new(vec![BigInt::from(-4), BigInt::from(0), BigInt::from(1)]).is_err());
        assert!(NumberField::new(vec![BigInt::from(2), BigInt::from(3)]).is_err());
    }

    #[test]
    fn solve_identity_and_scalar() {
        let k = field(&[-2, 0, 1]);
        let t = k.generator();
        let c = nf_solve_linear(&vec![vec![t.clone()]], &[k.from_rational(rat(2, 1))]).unwrap();
        assert_eq!(c[0], t);
        let one = k.from_rational(rat(1, 1));
        let zero = k.from_rational(rat(0, 1));
        let id = vec![vec![one.clone(), zero.clone()], vec![zero, one]];
        let b = vec![t.clone(), k.from_rational(rat(5, 3))];
        assert_eq!(nf_solve_linear(&id, &b).unwrap(), b);
    }

    #[test]
    fn conjugate_system_has_rational_solution() {
        // rows evaluate (1, x) at the conjugates ±√3; right side x² + 1 sampled there
        let k = field(&[-3, 0, 1]);
        let s = k.generator();
        let one = k.from_rational(rat(1, 1));
        let a = vec![vec![one.clone(), s.clone()], vec![one.clone(), -&s]];
        let b = vec![&(&s * &s) + &(&s * &k.from_rational(rat(2, 1))), &(&s * &s) - &(&s * &k.from_rational(rat(2, 1)))];
        let c = nf_solve_linear(&a, &b).unwrap();
        assert!(c.iter().all(NumberFieldElement::is_rational));
        assert_eq!(c[0].to_rational(), Some(rat(3, 1)));
        assert_eq!(c[1].to_rational(), Some(rat(2, 1)));
    }
}
