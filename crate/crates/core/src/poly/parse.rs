//! Expression grammar: sums of products of rational numbers and variables, with
//! `+ - * / ^` and parentheses. Division is allowed by constants only.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{HomogeneousPolynomial, Monomial, Poly};
use crate::arith::Rational;
use crate::error::{Error, Result};

/// A not necessarily homogeneous polynomial, as produced by the parser.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl SparsePoly {
    fn constant(nvars: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(nvars), c);
        }
        SparsePoly { nvars, terms }
    }

    fn add(mut self, o: &SparsePoly, sign: i64) -> Self {
        for (m, c) in &o.terms {
            let e = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
            *e += c * Rational::from_integer(sign.into());
            if e.is_zero() {
                self.terms.remove(m);
            }
        }
        self
    }

    fn mul(&self, o: &SparsePoly) -> Self {
        let mut r = SparsePoly::constant(self.nvars, Rational::zero());
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let m = a.mul(b);
                let e = r.terms.entry(m.clone()).or_insert_with(Rational::zero);
                *e += x * y;
                if e.is_zero() {
                    r.terms.remove(&m);
                }
            }
        }
        r
    }

    fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .get(&Monomial::one(self.nvars))
                .cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    /// Total degree of the highest term (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Homogeneous view; fails when terms of several degrees occur.
    pub fn homogeneous(&self) -> Result<Poly> {
        let degree = self.degree();
        if let Some(m) = self.terms.keys().find(|m| m.degree() != degree) {
            return Err(Error::Invalid(format!(
                "polynomial is not homogeneous: term {m} has degree {} but the leading degree is {degree}",
                m.degree()
            )));
        }
        Ok(HomogeneousPolynomial::from_terms(self.nvars, degree as i32, self.terms.clone())
            .expect("degrees checked"))
    }

    /// Coefficients of a univariate polynomial, constant term first.
    pub fn univariate(&self) -> Vec<Rational> {
        assert_eq!(self.nvars, 1);
        let mut out = vec![Rational::zero(); self.degree() as usize + 1];
        for (m, c) in &self.terms {
            out[m.exps()[0] as usize] = c.clone();
        }
        out
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    names: &'a dyn Fn(&str) -> Option<usize>,
    nvars: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: 1,
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<SparsePoly> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = acc.add(&t, if c == '+' { 1 } else { -1 });
        }
        Ok(acc)
    }

    fn starts_factor(c: char) -> bool {
        c.is_ascii_alphanumeric() || c == '(' || c == '_'
    }

    fn term(&mut self) -> Result<SparsePoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let f = self.unary()?;
                    acc = acc.mul(&f);
                }
                Some('/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let f = self.unary()?;
                    match f.as_constant() {
                        Some(c) if !c.is_zero() => {
                            acc = acc.mul(&SparsePoly::constant(self.nvars, c.recip()));
                        }
                        _ => {
                            self.pos = at;
                            return self.err("division only by nonzero constants");
                        }
                    }
                }
                Some(c) if Self::starts_factor(c) => {
                    let f = self.power()?;
                    acc = acc.mul(&f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<SparsePoly> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let u = self.unary()?;
                Ok(SparsePoly::constant(self.nvars, Rational::zero()).add(&u, -1))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<SparsePoly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let Ok(e) = digits.parse::<u32>() else {
                self.pos = start;
                return self.err("expected a non-negative integer exponent");
            };
            let mut acc = SparsePoly::constant(self.nvars, Rational::one());
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SparsePoly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let v: BigInt = digits.parse().expect("digits");
                Ok(SparsePoly::constant(self.nvars, Rational::from_integer(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match (self.names)(&name) {
                    Some(i) => {
                        let mut terms = BTreeMap::new();
                        terms.insert(Monomial::variable(self.nvars, i), Rational::one());
                        Ok(SparsePoly {
                            nvars: self.nvars,
                            terms,
                        })
                    }
                    None => {
                        self.pos = start;
                        self.err(format!("unknown variable {name:?}"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected character {c:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression in the given variable names.
pub fn parse_in_variables(text: &str, names: &[&str]) -> Result<SparsePoly> {
    let lookup = |s: &str| names.iter().position(|n| *n == s);
    run(text, names.len(), &lookup)
}

/// Parses an expression in x0, …, x_{nvars−1}.
pub fn parse_expression(text: &str, nvars: usize) -> Result<SparsePoly> {
    let lookup = |s: &str| {
        s.strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i < nvars && !s[1..].starts_with('+'))
    };
    run(text, nvars, &lookup)
}

fn run(text: &str, nvars: usize, names: &dyn Fn(&str) -> Option<usize>) -> Result<SparsePoly> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        names,
        nvars,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn precedence_and_powers() {
        let e = parse_expression("2*x0^2 - (x1 + x2)^2 / 4 + 3 x3*x0", 4).unwrap();
        let h = e.homogeneous().unwrap();
        assert_eq!(h.coeff(&Monomial::new(&[2, 0, 0, 0])), rat(2, 1));
        assert_eq!(h.coeff(&Monomial::new(&[0, 1, 1, 0])), rat(-1, 2));
        assert_eq!(h.coeff(&Monomial::new(&[1, 0, 0, 1])), rat(3, 1));
    }

    #[test]
    fn univariate_in_t() {
        let e = parse_in_variables("(t^3 - 9*t)/2", &["t"]).unwrap();
        assert_eq!(e.univariate(), vec![rat(0, 1), rat(-9, 2), rat(0, 1), rat(1, 2)]);
        assert_eq!(parse_in_variables("-1/2", &["t"]).unwrap().univariate(), vec![rat(-1, 2)]);
    }

    #[test]
    fn errors_carry_columns() {
        match parse_expression("x0 + y1", 4) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse_expression("x0 / x1", 4).is_err());
        assert!(parse_expression("x4", 4).is_err());
        assert!(parse_expression("(x0", 4).is_err());
        assert!(parse_expression("x0 + x1^2", 4).unwrap().homogeneous().is_err());
    }
}
