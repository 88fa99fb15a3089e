//! Polynomial differential forms on affine (n+1)-space and the operators d, df∧, Δ, d_f.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::arith::Rational;
use crate::poly::{Monomial, Poly};

/// Strictly increasing list of variable indices i_1 < … < i_l.
pub type IndexTuple = Vec<usize>;

/// A level-l form Σ_I c_I dx_I whose coefficients all have degree m − l.
#[derive(Clone, PartialEq)]
pub struct DifferentialForm {
    nvars: usize,
    level: usize,
    degree: i32,
    components: BTreeMap<IndexTuple, Poly>,
}

/// Sorts `idx` into increasing order, returning the permutation sign, or `None`
/// when an index repeats.
fn sort_with_sign(mut idx: Vec<usize>) -> Option<(IndexTuple, i64)> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((idx, sign))
}

impl DifferentialForm {
    pub fn zero(nvars: usize, level: usize, degree: i32) -> Self {
        DifferentialForm {
            nvars,
            level,
            degree,
            components: BTreeMap::new(),
        }
    }

    /// c · dx_I.
    pub fn term(index: IndexTuple, c: Poly) -> Self {
        let nvars = c.nvars();
        let level = index.len();
        let degree = c.degree() + level as i32;
        let (index, sign) = sort_with_sign(index).expect("repeated index");
        let mut f = Self::zero(nvars, level, degree);
        f.add_component(index, if sign < 0 { c.neg() } else { c });
        f
    }

    /// A level-0 form.
    pub fn function(p: Poly) -> Self {
        Self::term(Vec::new(), p)
    }

    /// dx_0 ∧ … ∧ dx_n.
    pub fn volume(nvars: usize) -> Self {
        Self::term((0..nvars).collect(), Poly::constant(nvars, Rational::one()))
    }

    /// Ω = Δ(dx_0 ∧ … ∧ dx_n).
    pub fn omega(nvars: usize) -> Self {
        Self::volume(nvars).euler_contract()
    }

    /// Level-(n+1) form g·dx_0∧…∧dx_n.
    pub fn top(g: Poly) -> Self {
        let nvars = g.nvars();
        Self::term((0..nvars).collect(), g)
    }

    /// Σ_i (−1)^i c_i dx_{0..î..n}; then df∧ω = (Σ c_i f_i) dV and dω = (Σ ∂_i c_i) dV.
    pub fn from_hat_components(c: &[Poly]) -> Self {
        let nvars = c.len();
        let degree = c[0].degree() + nvars as i32 - 1;
        let mut f = Self::zero(nvars, nvars - 1, degree);
        for (i, ci) in c.iter().enumerate() {
            let idx: IndexTuple = (0..nvars).filter(|&j| j != i).collect();
            f.add_component(idx, if i % 2 == 1 { ci.neg() } else { ci.clone() });
        }
        f
    }

    /// Inverse of [`from_hat_components`] for level-n forms.
    pub fn hat_components(&self) -> Vec<Poly> {
        assert_eq!(self.level + 1, self.nvars);
        (0..self.nvars)
            .map(|i| {
                let idx: IndexTuple = (0..self.nvars).filter(|&j| j != i).collect();
                let c = self.component(&idx);
                if i % 2 == 1 {
                    c.neg()
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn level(&self) -> usize {
        self.level
    }
    /// Total degree: coefficient degree plus level.
    pub fn degree(&self) -> i32 {
        self.degree
    }
    pub fn coefficient_degree(&self) -> i32 {
        self.degree - self.level as i32
    }
    pub fn components(&self) -> &BTreeMap<IndexTuple, Poly> {
        &self.components
    }
    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, idx: &IndexTuple) -> Poly {
        self.components
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.nvars, self.coefficient_degree()))
    }

    /// Coefficient of dx_0∧…∧dx_n for a top-level form.
    pub fn top_coefficient(&self) -> Poly {
        assert_eq!(self.level, self.nvars);
        self.component(&(0..self.nvars).collect())
    }

    fn add_component(&mut self, idx: IndexTuple, c: Poly) {
        if c.is_zero() {
            return;
        }
        assert_eq!(idx.len(), self.level);
        assert_eq!(c.degree(), self.coefficient_degree(), "coefficient degree mismatch");
        let merged = match self.components.remove(&idx) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.components.insert(idx, merged);
        }
    }

    fn check(&self, o: &Self) {
        assert!(
            self.is_zero() || o.is_zero() || (self.level == o.level && self.degree == o.degree),
            "incompatible forms"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut r = if self.is_zero() { o.clone() } else { self.clone() };
        if !self.is_zero() {
            for (i, c) in &o.components {
                r.add_component(i.clone(), c.clone());
            }
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut r = Self::zero(self.nvars, self.level, self.degree);
        if s.is_zero() {
            return r;
        }
        for (i, c) in &self.components {
            r.add_component(i.clone(), c.scale(s));
        }
        r
    }

    /// Multiplication by a polynomial (a level-0 form).
    pub fn mul_poly(&self, p: &Poly) -> Self {
        let mut r = Self::zero(self.nvars, self.level, self.degree + p.degree());
        for (i, c) in &self.components {
            r.add_component(i.clone(), c.mul(p));
        }
        r
    }

    pub fn wedge(&self, o: &Self) -> Self {
        let level = self.level + o.level;
        let mut r = Self::zero(self.nvars, level, self.degree + o.degree);
        if level > self.nvars {
            return r;
        }
        for (i, a) in &self.components {
            for (j, b) in &o.components {
                let mut idx = i.clone();
                idx.extend(j.iter().copied());
                if let Some((idx, sign)) = sort_with_sign(idx) {
                    let prod = a.mul(b);
                    r.add_component(idx, if sign < 0 { prod.neg() } else { prod });
                }
            }
        }
        r
    }

    /// Exterior derivative.
    pub fn de_rham_d(&self) -> Self {
        let mut r = Self::zero(self.nvars, self.level + 1, self.degree);
        if self.level >= self.nvars {
            return r;
        }
        for (idx, c) in &self.components {
            for v in 0..self.nvars {
                if idx.contains(&v) {
                    continue;
                }
                let dc = c.derivative(v);
                if dc.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|&&j| j < v).count();
                let mut new_idx = idx.clone();
                new_idx.insert(pos, v);
                r.add_component(new_idx, if pos % 2 == 1 { dc.neg() } else { dc });
            }
        }
        r
    }

    /// Contraction with the Euler field Σ x_i ∂/∂x_i.
    pub fn euler_contract(&self) -> Self {
        let mut r = Self::zero(self.nvars, self.level.saturating_sub(1), self.degree);
        if self.level == 0 {
            return r;
        }
        for (idx, c) in &self.components {
            for (k, &v) in idx.iter().enumerate() {
                let mut new_idx = idx.clone();
                new_idx.remove(k);
                let t = c.mul_monomial(&Monomial::variable(self.nvars, v), &Rational::one());
                r.add_component(new_idx, if k % 2 == 1 { t.neg() } else { t });
            }
        }
        r
    }

    /// df ∧ ω.
    pub fn koszul(&self, f: &Poly) -> Self {
        Self::function(f.clone()).de_rham_d().wedge(self)
    }

    /// d_f(γ) = f dγ − (|γ|/N) df∧γ.
    pub fn deformed_d(&self, f: &Poly) -> Self {
        let s = Rational::new(self.degree.into(), f.degree().into());
        self.de_rham_d().mul_poly(f).sub(&self.koszul(f).scale(&s))
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(idx, c)| {
                let d: Vec<String> = idx.iter().map(|i| format!("dx{i}")).collect();
                if d.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", d.join("^"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[level {}, degree {}] {}", self.level, self.degree, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::poly::parse_expression;

    fn p(s: &str) -> Poly {
        parse_expression(s, 4).unwrap().homogeneous().unwrap()
    }

    fn one() -> Poly {
        p("1")
    }

    #[test]
    fn wedge_basics() {
        let dx0 = DifferentialForm::term(vec![0], one());
        let dx1 = DifferentialForm::term(vec![1], one());
        assert_eq!(dx0.wedge(&dx1), DifferentialForm::term(vec![0, 1], one()));
        assert_eq!(dx1.wedge(&dx0), DifferentialForm::term(vec![0, 1], one().neg()));
        let a = DifferentialForm::term(vec![2], p("x0")).add(&DifferentialForm::term(vec![1], p("x3")));
        assert!(a.wedge(&a).is_zero());
    }

    #[test]
    fn d_of_simple_form() {
        let w = DifferentialForm::term(vec![1], p("x0"));
        assert_eq!(w.de_rham_d(), DifferentialForm::term(vec![0, 1], one()));
    }

    #[test]
    fn omega_expansion() {
        let o = DifferentialForm::omega(4);
        let expect = DifferentialForm::term(vec![1, 2, 3], p("x0"))
            .sub(&DifferentialForm::term(vec![0, 2, 3], p("x1")))
            .add(&DifferentialForm::term(vec![0, 1, 3], p("x2")))
            .sub(&DifferentialForm::term(vec![0, 1, 2], p("x3")));
        assert_eq!(o, expect);
    }

    #[test]
    fn delta_of_df() {
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let df = DifferentialForm::function(f.clone()).de_rham_d();
        assert_eq!(df.euler_contract(), DifferentialForm::function(f.scale(&rat(3, 1))));
    }

    #[test]
    fn hat_components_identities() {
        let f = p("x0^3 + x1*x2*x3 - 2*x0*x3^2");
        let c = vec![p("x1"), p("x0 + x2"), p("3*x3"), p("-x2")];
        let w = DifferentialForm::from_hat_components(&c);
        assert_eq!(w.hat_components(), c);
        let mut expect_koszul = Poly::zero(4, 3);
        let mut expect_d = Poly::zero(4, 0);
        for (i, ci) in c.iter().enumerate() {
            expect_koszul = expect_koszul.add(&ci.mul(&f.derivative(i)));
            expect_d = expect_d.add(&ci.derivative(i));
        }
        assert_eq!(w.koszul(&f).top_coefficient(), expect_koszul);
        assert_eq!(w.de_rham_d().top_coefficient(), expect_d);
    }

    fn cayley_n1() -> DifferentialForm {
        DifferentialForm::term(vec![0, 1, 2], p("2*x0*x2 + 3*x2*x3 - 2*x3^2"))
            .sub(&DifferentialForm::term(vec![0, 1, 3], p("2*x0*x3 - 2*x2^2 + 3*x2*x3")))
            .sub(&DifferentialForm::term(vec![0, 2, 3], p("6*x0*x1 + 2*x0*x2 + 2*x0*x3 - x2*x3")))
            .sub(&DifferentialForm::term(vec![1, 2, 3], p("4*x0^2 - x2*x3")))
    }

    #[test]
    fn cayley_exact_correction() {
        let f = p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3");
        let n1 = cayley_n1();
        assert!(n1.koszul(&f).is_zero());
        let corr = DifferentialForm::term(vec![0, 2], p("x3")).koszul(&f);
        assert_eq!(corr.degree(), 6);
        let x0n1 = n1.mul_poly(&p("x0"));
        let form = x0n1.scale(&rat(-1, 1)).add(&corr).scale(&rat(1, 6));
        assert_eq!(form.de_rham_d(), DifferentialForm::top(p("x0^2")));
        let x2n1 = n1.mul_poly(&p("x2"));
        let form = x2n1.add(&corr.scale(&rat(2, 1))).scale(&rat(1, 3));
        assert_eq!(form.de_rham_d(), DifferentialForm::top(p("x2^2")));
    }
}
