//! Brute-force point counts over F_{p^r} and consistency checks of zeta functions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::zeta::ZetaFunction;

/// Default cap on p^{rn}.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

const TABLE_LIMIT: u64 = 2048;

/// F_{p^r} = F_p[z]/(g) with g the least monic irreducible of degree r, ordering
/// candidates by their coefficient vectors read from the constant term upward.
///
/// Elements are integers in [0, p^r) whose base-p digits are the coefficients.
#[derive(Clone, Debug)]
pub struct ExtensionField {
    p: u64,
    r: u32,
    size: u64,
    // g = z^r + Σ modulus[i] z^i
    modulus: Vec<u64>,
    add: Vec<u32>,
    mul: Vec<u32>,
}

fn poly_mod_p(a: &mut Vec<u64>, g: &[u64], p: u64) {
    // g monic
    let dg = g.len() - 1;
    while a.len() > dg {
        let lead = a.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = a.len() - dg;
        for (j, &c) in g.iter().take(dg).enumerate() {
            a[shift + j] = (a[shift + j] + p - lead * c % p) % p;
        }
    }
}

fn has_factor_of_degree(g: &[u64], d: u32, p: u64) -> bool {
    let count = p.pow(d);
    (0..count).any(|code| {
        let mut h: Vec<u64> = (0..d).map(|i| code / p.pow(i) % p).collect();
        h.push(1);
        let mut rem = g.to_vec();
        poly_mod_p(&mut rem, &h, p);
        rem.iter().all(|&c| c == 0)
    })
}

impl ExtensionField {
    pub fn new(p: u64, r: u32) -> Result<Self> {
        if r == 0 || !crate::arith::is_prime(p) {
            return Err(Error::Invalid(format!("no field of order {p}^{r}")));
        }
        let size = p
            .checked_pow(r)
            .filter(|&s| s <= u32::MAX as u64)
            .ok_or_else(|| Error::Invalid(format!("{p}^{r} is too large")))?;
        let modulus = if r == 1 {
            vec![0]
        } else {
            (0..size)
                .map(|code| (0..r).map(|i| code / p.pow(i) % p).collect::<Vec<u64>>())
                .find(|low| {
                    let mut g = low.clone();
                    g.push(1);
                    low[0] != 0 && (1..=r / 2).all(|d| !has_factor_of_degree(&g, d, p))
                })
                .ok_or_else(|| Error::Internal("no irreducible polynomial found".into()))?
        };
        let mut k = ExtensionField {
            p,
            r,
            size,
            modulus,
            add: Vec::new(),
            mul: Vec::new(),
        };
        if r > 1 && size <= TABLE_LIMIT {
            let q = size as usize;
            let mut add = vec![0u32; q * q];
            let mut mul = vec![0u32; q * q];
            for a in 0..size {
                for b in 0..size {
                    add[a as usize * q + b as usize] = k.add_slow(a, b) as u32;
                    mul[a as usize * q + b as usize] = k.mul_slow(a, b) as u32;
                }
            }
            k.add = add;
            k.mul = mul;
        }
        Ok(k)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Coefficients of the defining polynomial, constant term first, monic.
    pub fn modulus(&self) -> Vec<u64> {
        let mut g = self.modulus.clone();
        g.push(1);
        g
    }

    fn digits(&self, a: u64) -> Vec<u64> {
        (0..self.r).map(|i| a / self.p.pow(i) % self.p).collect()
    }

    fn encode(&self, v: &[u64]) -> u64 {
        v.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add_slow(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.digits(a), self.digits(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&s)
    }

    fn mul_slow(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.r as usize - 1];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        let mut g = self.modulus.clone();
        g.push(1);
        poly_mod_p(&mut prod, &g, self.p);
        self.encode(&prod)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.r == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else if !self.add.is_empty() {
            self.add[(a * self.size + b) as usize] as u64
        } else {
            self.add_slow(a, b)
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.r == 1 {
            a * b % self.p
        } else if !self.mul.is_empty() {
            self.mul[(a * self.size + b) as usize] as u64
        } else {
            self.mul_slow(a, b)
        }
    }

    /// The image of an integer.
    pub fn from_integer(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }
}

/// Affine polynomial in k variables with coefficients in F_{p^r}, grouped by the
/// exponent of the last variable.
struct Restricted {
    k: usize,
    degree: usize,
    // layers[e] = terms (exponents of the first k−1 variables, coefficient) of y_k^e
    layers: Vec<Vec<(Vec<u32>, u64)>>,
    constant_only: u64,
}

fn reduce_coefficients(f: &Poly, field: &ExtensionField) -> Result<Vec<(Vec<u32>, u64)>> {
    let p = BigInt::from(field.p);
    f.terms()
        .iter()
        .map(|(m, c)| {
            if c.denom().is_multiple_of(&p) {
                return Err(Error::PDivides { p: field.p });
            }
            let inv = field.from_integer(&c.denom().modinv(&p).unwrap());
            let v = field.mul(field.from_integer(c.numer()), inv);
            Ok((m.exps().to_vec(), v))
        })
        .collect()
}

/// f restricted to the points whose coordinates in `order` read (0, …, 0, 1, *, …, *),
/// with the 1 at position `lead`.
fn restrict(terms: &[(Vec<u32>, u64)], order: &[usize], lead: usize, degree: usize, field: &ExtensionField) -> Restricted {
    let k = order.len() - lead - 1;
    let mut layers: Vec<Vec<(Vec<u32>, u64)>> = vec![Vec::new(); degree + 1];
    let mut constant_only = 0;
    for (e, c) in terms {
        if order[..lead].iter().any(|&v| e[v] > 0) || *c == 0 {
            continue;
        }
        let free: Vec<u32> = order[lead + 1..].iter().map(|&v| e[v]).collect();
        if k == 0 {
            constant_only = field.add(constant_only, *c);
            continue;
        }
        let last = free[k - 1] as usize;
        let outer = free[..k - 1].to_vec();
        match layers[last].iter_mut().find(|(x, _)| *x == outer) {
            Some(slot) => slot.1 = field.add(slot.1, *c),
            None => layers[last].push((outer, *c)),
        }
    }
    Restricted {
        k,
        degree,
        layers,
        constant_only,
    }
}

fn count_chart(g: &Restricted, field: &ExtensionField) -> u64 {
    if g.k == 0 {
        return (g.constant_only == 0) as u64;
    }
    let q = field.size();
    let outer = g.k - 1;
    let top = g.layers.iter().rposition(|l| !l.is_empty());
    let Some(top) = top else {
        return q.pow(g.k as u32);
    };
    let count_from = |prefix: &[u64]| -> u64 {
        // odometer over the remaining outer variables
        let mut vals: Vec<u64> = prefix.to_vec();
        vals.resize(outer, 0);
        let mut pows: Vec<Vec<u64>> = vec![vec![1; g.degree + 1]; outer];
        let refresh = |pows: &mut Vec<Vec<u64>>, i: usize, x: u64| {
            for e in 1..=g.degree {
                pows[i][e] = field.mul(pows[i][e - 1], x);
            }
        };
        for i in 0..outer {
            refresh(&mut pows, i, vals[i]);
        }
        let mut total = 0u64;
        let mut coeffs = vec![0u64; top + 1];
        loop {
            for (e, layer) in g.layers.iter().enumerate().take(top + 1) {
                let mut s = 0;
                for (ex, c) in layer {
                    let mut t = *c;
                    for (i, &a) in ex.iter().enumerate() {
                        if a > 0 {
                            t = field.mul(t, pows[i][a as usize]);
                        }
                    }
                    s = field.add(s, t);
                }
                coeffs[e] = s;
            }
            for y in 0..q {
                let mut v = coeffs[top];
                for e in (0..top).rev() {
                    v = field.add(field.mul(v, y), coeffs[e]);
                }
                total += (v == 0) as u64;
            }
            // advance
            let mut i = outer;
            loop {
                if i == prefix.len() {
                    return total;
                }
                i -= 1;
                vals[i] += 1;
                if vals[i] < q {
                    refresh(&mut pows, i, vals[i]);
                    break;
                }
                vals[i] = 0;
                refresh(&mut pows, i, 0);
            }
        }
    };
    if outer == 0 {
        count_from(&[])
    } else {
        (0..q).into_par_iter().map(|x| count_from(&[x])).sum()
    }
}

fn count_with_order(f: &Poly, field: &ExtensionField, order: &[usize]) -> Result<u64> {
    let terms = reduce_coefficients(f, field)?;
    let degree = f.degree().max(0) as usize;
    Ok((0..order.len())
        .map(|lead| count_chart(&restrict(&terms, order, lead, degree, field), field))
        .sum())
}

fn check_budget(nvars: usize, p: u64, r: u32, budget: u128) -> Result<()> {
    let n = nvars.saturating_sub(1) as u32;
    let required = (p as u128)
        .checked_pow(r * n)
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// #Z(f)(F_{p^r}), counted over the charts [1:*:…:*], [0:1:*:…], ….
pub fn count_points(f: &Poly, p: u64, r: u32, budget: u128) -> Result<u64> {
    check_budget(f.nvars(), p, r, budget)?;
    let field = ExtensionField::new(p, r)?;
    let order: Vec<usize> = (0..f.nvars()).collect();
    count_with_order(f, &field, &order)
}

/// The same count, normalizing the last nonzero coordinate instead.
pub fn count_points_last_coordinate(f: &Poly, p: u64, r: u32, budget: u128) -> Result<u64> {
    check_budget(f.nvars(), p, r, budget)?;
    let field = ExtensionField::new(p, r)?;
    let order: Vec<usize> = (0..f.nvars()).rev().collect();
    count_with_order(f, &field, &order)
}

/// One compared extension degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountCheck {
    pub r: u32,
    pub predicted: BigInt,
    pub counted: u64,
}

/// Compares the point counts predicted by ζ with brute force for r = 1..=max_r.
pub fn verify_zeta(zeta: &ZetaFunction, f: &Poly, max_r: u32, budget: u128) -> Result<Vec<CountCheck>> {
    for r in 1..=max_r {
        check_budget(f.nvars(), zeta.q, r, budget)?;
    }
    let predicted = zeta.point_counts(max_r as usize);
    let mut out = Vec::new();
    for (r, pred) in (1..=max_r).zip(predicted) {
        let counted = count_points(f, zeta.q, r, budget)?;
        if pred != BigInt::from(counted) {
            return Err(Error::Mismatch {
                r,
                predicted: pred.to_string(),
                counted: counted.to_string(),
            });
        }
        out.push(CountCheck {
            r,
            predicted: pred,
            counted,
        });
    }
    Ok(out)
}

/// #P^m(F_{q}) = (q^{m+1} − 1)/(q − 1).
pub fn projective_space_count(m: usize, q: u64) -> BigInt {
    let q = BigInt::from(q);
    (q.pow(m as u32 + 1) - 1u32) / (q - 1u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_expression;

    fn poly(s: &str) -> Poly {
        parse_expression(s, 4).unwrap().homogeneous().unwrap()
    }

    #[test]
    fn extension_fields() {
        let k = ExtensionField::new(3, 2).unwrap();
        // z^2 + 1 is the least irreducible quadratic over F_3
        assert_eq!(k.modulus(), vec![1, 0, 1]);
        let z = 3;
        assert_eq!(k.mul(z, z), 2);
        let k = ExtensionField::new(2, 3).unwrap();
        assert_eq!(k.modulus(), vec![1, 1, 0, 1]);
        // multiplicative group is cyclic of order 7
        let z = 2;
        let mut x = 1;
        for _ in 0..7 {
            x = k.mul(x, z);
        }
        assert_eq!(x, 1);
        assert!(ExtensionField::new(4, 1).is_err());
    }

    #[test]
    fn cayley_counts() {
        let f = poly("x1*x2*x3+x0*x2*x3+x0*x1*x3+x0*x1*x2");
        assert_eq!(count_points(&f, 5, 1, DEFAULT_BUDGET).unwrap(), 41);
        assert_eq!(count_points(&f, 5, 2, DEFAULT_BUDGET).unwrap(), 1 + 3 * 25 + 625);
        assert_eq!(count_points_last_coordinate(&f, 5, 2, DEFAULT_BUDGET).unwrap(), 701);
    }

    #[test]
    fn hyperplane_and_budget() {
        let f = poly("x0");
        for (p, r) in [(3, 1), (3, 2), (5, 1), (2, 3)] {
            let q = (p as u64).pow(r);
            assert_eq!(BigInt::from(count_points(&f, p, r, DEFAULT_BUDGET).unwrap()), projective_space_count(2, q));
        }
        assert!(matches!(count_points(&f, 1009, 3, DEFAULT_BUDGET), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn verify_detects_perturbation() {
        let f = poly("x1*x2*x3+x0*x2*x3+x0*x1*x3+x0*x1*x2");
        let good = ZetaFunction::new(vec![1.into(), (-10).into(), 25.into()], 5, 3);
        assert_eq!(verify_zeta(&good, &f, 3, DEFAULT_BUDGET).unwrap().len(), 3);
        let bad = ZetaFunction::new(vec![1.into(), (-9).into(), 25.into()], 5, 3);
        assert!(matches!(verify_zeta(&bad, &f, 3, DEFAULT_BUDGET), Err(Error::Mismatch { r: 1, .. })));
    }
}
