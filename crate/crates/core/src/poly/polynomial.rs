use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Monomial;
use crate::arith::{Field, NumberFieldElement, Rational};

/// Exact coefficient ring usable in [`HomogeneousPolynomial`].
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(v: i64) -> Self;
    fn is_negative_coeff(&self) -> bool;
}

impl Coefficient for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn is_negative_coeff(&self) -> bool {
        self.is_negative()
    }
}

impl Coefficient for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_negative_coeff(&self) -> bool {
        self.is_negative()
    }
}

/// Homogeneous polynomial of a fixed degree in `nvars` variables.
///
/// Negative degrees are allowed and only hold the zero polynomial; they arise as
/// derivatives of constants and keep graded bookkeeping uniform.
#[derive(Clone, PartialEq)]
pub struct HomogeneousPolynomial<C: Coefficient = Rational> {
    nvars: usize,
    degree: i32,
    terms: BTreeMap<Monomial, C>,
}

pub type Poly = HomogeneousPolynomial<Rational>;

impl<C: Coefficient> HomogeneousPolynomial<C> {
    pub fn zero(nvars: usize, degree: i32) -> Self {
        HomogeneousPolynomial {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut p = Self::zero(m.nvars(), m.degree() as i32);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::variable(nvars, i), C::one())
    }

    /// Builds a polynomial, rejecting terms of the wrong degree.
    pub fn from_terms(
        nvars: usize,
        degree: i32,
        terms: impl IntoIterator<Item = (Monomial, C)>,
    ) -> Option<Self> {
        let mut p = Self::zero(nvars, degree);
        for (m, c) in terms {
            if m.nvars() != nvars || m.degree() as i32 != degree {
                return None;
            }
            p.add_term(m, c);
        }
        Some(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, C> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Adds c·m in place; the monomial must have the polynomial's degree.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        debug_assert_eq!(m.degree() as i32, self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    fn check_compatible(&self, o: &Self) {
        assert_eq!(self.nvars, o.nvars, "variable count mismatch");
        assert!(
            self.degree == o.degree || self.is_zero() || o.is_zero(),
            "adding polynomials of degrees {} and {}",
            self.degree,
            o.degree
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_compatible(o);
        let mut r = if self.is_zero() { o.clone() } else { self.clone() };
        if !self.is_zero() {
            for (m, c) in &o.terms {
                r.add_term(m.clone(), c.clone());
            }
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars, self.degree);
        }
        self.map(|c| c.clone() * s.clone())
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Self {
        HomogeneousPolynomial {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &C) -> Self {
        let mut r = Self::zero(self.nvars, self.degree + m.degree() as i32);
        if c.is_zero() {
            return r;
        }
        r.terms = self
            .terms
            .iter()
            .map(|(t, x)| (t.mul(m), x.clone() * c.clone()))
            .collect();
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut r = Self::zero(self.nvars, self.degree + o.degree);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                r.add_term(a.mul(b), x.clone() * y.clone());
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, C::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut r = Self::zero(self.nvars, self.degree - 1);
        for (m, c) in &self.terms {
            let e = m.exps()[i];
            if e > 0 {
                r.add_term(m.lower(i).unwrap(), c.clone() * C::from_i64(e as i64));
            }
        }
        r
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// x_i ↦ x_i^p on every monomial (coefficients untouched).
    pub fn frobenius_substitute(&self, p: u32) -> Self {
        HomogeneousPolynomial {
            nvars: self.nvars,
            degree: self.degree * p as i32,
            terms: self.terms.iter().map(|(m, c)| (m.scale(p), c.clone())).collect(),
        }
    }

    /// Value at a point of some field, given a coefficient embedding.
    pub fn evaluate_in<K: Field>(
        &self,
        k: &K,
        point: &[K::Elem],
        embed: impl Fn(&C) -> K::Elem,
    ) -> K::Elem {
        let maxe = self.terms.keys().flat_map(|m| m.exps().iter().copied()).max().unwrap_or(0);
        let powers: Vec<Vec<K::Elem>> = point
            .iter()
            .map(|x| {
                let mut v = vec![k.one()];
                for e in 1..=maxe as usize {
                    v.push(k.mul(&v[e - 1], x));
                }
                v
            })
            .collect();
        let mut acc = k.zero();
        for (m, c) in &self.terms {
            let mut t = embed(c);
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = k.mul(&t, &powers[i][e as usize]);
                }
            }
            k.add_assign(&mut acc, &t);
        }
        acc
    }

    /// Linear change of variables x_i ↦ Σ_j a[i][j] x_j.
    pub fn substitute_linear(&self, a: &[Vec<C>]) -> Self {
        let images: Vec<Self> = a
            .iter()
            .map(|row| {
                let mut p = Self::zero(self.nvars, 1);
                for (j, c) in row.iter().enumerate() {
                    p.add_term(Monomial::variable(self.nvars, j), c.clone());
                }
                p
            })
            .collect();
        let mut r = Self::zero(self.nvars, self.degree);
        for (m, c) in &self.terms {
            let mut t = Self::constant(self.nvars, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&images[i].pow(e));
                }
            }
            r = r.add(&t);
        }
        r
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> HomogeneousPolynomial<D> {
        HomogeneousPolynomial {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }
}

impl Poly {
    pub fn evaluate(&self, point: &[NumberFieldElement]) -> NumberFieldElement {
        let k = point[0].field().clone();
        self.evaluate_in(&k, point, |c| k.from_rational(c.clone()))
    }

    pub fn from_integer_poly(p: &HomogeneousPolynomial<BigInt>) -> Self {
        p.map_coefficients(|c| Rational::from_integer(c.clone()))
    }

    /// The integer polynomial, if every coefficient is integral.
    pub fn to_integer_poly(&self) -> Option<HomogeneousPolynomial<BigInt>> {
        if self.terms.values().any(|c| !c.is_integer()) {
            return None;
        }
        Some(self.map_coefficients(|c| c.to_integer()))
    }
}

impl<C: Coefficient> fmt::Display for HomogeneousPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative_coeff();
            let mag = if neg { -c.clone() } else { c.clone() };
            let is_one = mag.is_one();
            let mono = m.to_string();
            let body = match (is_one, mono.as_str()) {
                (_, "1") => mag.to_string(),
                (true, _) => mono,
                (false, _) => format!("{mag}*{mono}"),
            };
            match (k, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Debug for HomogeneousPolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[deg {}] {}", self.degree, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, NumberField};
    use crate::poly::parse_expression;

    fn p(s: &str) -> Poly {
        parse_expression(s, 4).unwrap().homogeneous().unwrap()
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        assert_eq!(f.to_string(), "x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        assert_eq!(p(&f.to_string()), f);
        let g = p("-3/2*x0^2 + x1*x3");
        assert_eq!(g.to_string(), "-3/2*x0^2 + x1*x3");
    }

    #[test]
    fn derivative_and_euler() {
        let f = p("x0^3 + 2*x0*x1*x3 - x2^2*x3");
        let mut euler = Poly::zero(4, 3);
        for i in 0..4 {
            euler = euler.add(&f.derivative(i).mul(&Poly::variable(4, i)));
        }
        assert_eq!(euler, f.scale(&rat(3, 1)));
        assert_eq!(Poly::constant(4, rat(2, 1)).derivative(0).degree(), -1);
    }

    #[test]
    fn frobenius_substitution() {
        assert_eq!(p("x0*x1").frobenius_substitute(5), p("x0^5*x1^5"));
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let g = p("x0 - 2*x3");
        assert_eq!(
            f.mul(&g).frobenius_substitute(3),
            f.frobenius_substitute(3).mul(&g.frobenius_substitute(3))
        );
    }

    #[test]
    fn frobenius_difference_is_divisible_by_p() {
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let d = f.pow(5).sub(&f.frobenius_substitute(5));
        assert!(d.terms().values().all(|c| (c / rat(5, 1)).is_integer()));
    }

    #[test]
    fn evaluation() {
        let k = NumberField::new(vec![(-3).into(), 0.into(), 1.into()]).unwrap();
        let f = p("x0^4 + x1^4 + 12*x2^4 + 27*x3^4 + x0^2*(46*x1^2 - 20*x2^2 - 44*x2*x3 - 30*x3^2) - x1^2*(20*x2^2 - 44*x2*x3 + 30*x3^2) - 30*x2^2*x3^2");
        let c = |v: i64| k.from_rational(rat(v, 1));
        let pt = vec![k.generator(), c(0), c(-1), c(1)];
        assert!(f.evaluate(&pt).is_zero());
        let cay = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let q = NumberField::rationals();
        let e = |v: i64| q.from_rational(rat(v, 1));
        assert!(cay.evaluate(&[e(1), e(0), e(0), e(0)]).is_zero());
        let v1 = cay.evaluate(&[e(1), e(2), e(3), e(4)]);
        let v2 = cay.evaluate(&[e(3), e(6), e(9), e(12)]);
        assert_eq!(&v1 * &e(27), v2);
    }

    #[test]
    fn linear_substitution() {
        let f = p("x0*x1");
        let a = vec![
            vec![rat(1, 1), rat(1, 1)],
            vec![rat(0, 1), rat(1, 1)],
        ];
        let f2 = HomogeneousPolynomial::from_terms(2, 2, [(Monomial::new(&[1, 1]), rat(1, 1))]).unwrap();
        assert_eq!(f2.substitute_linear(&a).to_string(), "x0*x1 + x1^2");
        assert_eq!(f.degree(), 2);
    }
}
