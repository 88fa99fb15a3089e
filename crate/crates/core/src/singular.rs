//! The singular locus: verification of user-supplied nodes, Hessian tests, τ counts over
//! Q and F_p, and the equisingularity gate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::linalg::{rank, Matrix, SparseEchelon};
use crate::arith::{Field, NumberField, NumberFieldElement, PrimeField, Rational, Rationals};
use crate::error::{Error, Result};
use crate::poly::{groebner_with_cofactors, monomial_basis, GroebnerBasis, MonomialIndexer, Poly};

/// Verified singular points over a number field K = Q[t]/(m).
#[derive(Clone, Debug)]
pub struct SingularPointSet {
    pub points: Vec<Vec<NumberFieldElement>>,
    pub tau: usize,
    pub field: NumberField,
}

/// Rank of the (n+1)×(n+1) homogeneous Hessian at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HessianCertificate {
    pub rank: usize,
    pub size: usize,
}

impl HessianCertificate {
    pub fn is_odp(&self) -> bool {
        self.rank + 1 == self.size
    }
}

/// Checks that each point kills f and every partial derivative, and scales it so that its
/// last nonzero coordinate is 1.
pub fn verify_singular_points(
    f: &Poly,
    points: &[Vec<NumberFieldElement>],
    field: &NumberField,
) -> Result<SingularPointSet> {
    let grad = f.gradient();
    let mut out: Vec<Vec<NumberFieldElement>> = Vec::with_capacity(points.len());
    for (index, pt) in points.iter().enumerate() {
        if pt.len() != f.nvars() {
            return Err(Error::NotSingular {
                index,
                reason: format!("expected {} coordinates, got {}", f.nvars(), pt.len()),
            });
        }
        let Some(pivot) = pt.iter().rposition(|x| !x.is_zero()) else {
            return Err(Error::NotSingular {
                index,
                reason: "all coordinates vanish".into(),
            });
        };
        let inv = pt[pivot].inv().expect("nonzero element of a field");
        let pt: Vec<NumberFieldElement> = pt.iter().map(|x| x * &inv).collect();
        if !f.evaluate(&pt).is_zero() {
            return Err(Error::NotSingular {
                index,
                reason: "f does not vanish".into(),
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.evaluate(&pt).is_zero()) {
            return Err(Error::NotSingular {
                index,
                reason: format!("partial derivative {i} does not vanish"),
            });
        }
        if let Some(j) = out.iter().position(|q| *q == pt) {
            return Err(Error::NotSingular {
                index,
                reason: format!("coincides with point {j}"),
            });
        }
        out.push(pt);
    }
    Ok(SingularPointSet {
        tau: out.len(),
        points: out,
        field: field.clone(),
    })
}

fn hessian(f: &Poly) -> Vec<Vec<Poly>> {
    f.gradient().iter().map(|g| g.gradient()).collect()
}

/// Hessian rank at a point given over any field `k`.
pub fn hessian_rank<K: Field>(k: &K, f: &Poly, point: &[K::Elem]) -> Option<HessianCertificate> {
    let h = hessian(f);
    let mut m: Matrix<K::Elem> = Vec::new();
    for row in &h {
        let mut r = Vec::new();
        for e in row {
            let bad = std::cell::Cell::new(false);
            let v = e.evaluate_in(k, point, |c| {
                k.from_rational(c).unwrap_or_else(|| {
                    bad.set(true);
                    k.zero()
                })
            });
            if bad.get() {
                return None;
            }
            r.push(v);
        }
        m.push(r);
    }
    Some(HessianCertificate {
        rank: rank(k, &m),
        size: f.nvars(),
    })
}

/// True iff the homogeneous Hessian at the (singular) point has rank exactly n.
pub fn is_odp(f: &Poly, point: &[NumberFieldElement]) -> bool {
    let Some(k) = point.first().map(|x| x.field().clone()) else {
        return false;
    };
    hessian_rank(&k, f, point).is_some_and(|c| c.is_odp())
}

/// Determinant of the n×n affine Hessian in the chart x_pivot = 1, where pivot is the
/// last nonzero coordinate of the point.
pub fn affine_hessian_determinant(f: &Poly, point: &[NumberFieldElement]) -> NumberFieldElement {
    let k = point[0].field().clone();
    let pivot = point.iter().rposition(|x| !x.is_zero()).expect("nonzero point");
    let inv = point[pivot].inv().unwrap();
    let pt: Vec<NumberFieldElement> = point.iter().map(|x| x * &inv).collect();
    let h = hessian(f);
    let idx: Vec<usize> = (0..f.nvars()).filter(|&i| i != pivot).collect();
    let m: Matrix<NumberFieldElement> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| h[i][j].evaluate(&pt)).collect())
        .collect();
    crate::arith::linalg::determinant(&k, &m)
}

fn jacobian_degree(f: &Poly) -> u32 {
    (f.nvars() as u32) * (f.degree() as u32 - 1)
}

/// dim (S/J)_d over F_p, by rank of (g_0..g_n) ↦ Σ g_i ∂_i f.
pub fn jacobian_quotient_dim_mod_p(f: &Poly, p: u64, d: u32) -> Result<usize> {
    let k = PrimeField::new(p);
    let nv = f.nvars();
    let grad: Vec<Vec<(Vec<u32>, u64)>> = f
        .gradient()
        .iter()
        .map(|g| {
            g.terms()
                .iter()
                .map(|(m, c)| {
                    k.from_rational(c)
                        .map(|x| (m.exps().to_vec(), x))
                        .ok_or(Error::PDivides { p })
                })
                .filter(|r| !matches!(r, Ok((_, 0))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let gdeg = f.degree() as u32 - 1;
    let target = MonomialIndexer::new(nv, d);
    let total = target.dim(d);
    if d < gdeg {
        return Ok(total);
    }
    let mut ech = SparseEchelon::new(k);
    let mut e = vec![0u32; nv];
    for u in monomial_basis(nv, d - gdeg) {
        for g in &grad {
            let mut row: Vec<(usize, u64)> = g
                .iter()
                .map(|(m, c)| {
                    for i in 0..nv {
                        e[i] = m[i] + u.exps()[i];
                    }
                    (target.index(&e), *c)
                })
                .collect();
            row.sort_unstable_by_key(|x| x.0);
            ech.insert(row);
            if ech.rank() == total {
                return Ok(0);
            }
        }
    }
    Ok(total - ech.rank())
}

/// τ from the Hilbert function of S/J in degrees m = (n+1)(N−1) and m+1.
pub fn tau_count_rational(f: &Poly) -> Result<usize> {
    let gb = groebner_with_cofactors(&f.gradient());
    tau_from_groebner(&gb, f)
}

pub fn tau_from_groebner(gb: &GroebnerBasis, f: &Poly) -> Result<usize> {
    let m = jacobian_degree(f);
    let a = gb.quotient_dim(m);
    let b = gb.quotient_dim(m + 1);
    if a != b {
        return Err(Error::NotIsolated { field: "Q".into() });
    }
    Ok(a)
}

/// τ over F_p.
pub fn tau_count_mod_p(f: &Poly, p: u64) -> Result<usize> {
    let m = jacobian_degree(f);
    let a = jacobian_quotient_dim_mod_p(f, p, m)?;
    let b = jacobian_quotient_dim_mod_p(f, p, m + 1)?;
    if a != b {
        return Err(Error::NotIsolated {
            field: format!("F_{p}"),
        });
    }
    Ok(a)
}

/// Where τ is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountField {
    Rationals,
    Prime(u64),
}

pub fn tau_count(f: &Poly, field: CountField) -> Result<usize> {
    match field {
        CountField::Rationals => tau_count_rational(f),
        CountField::Prime(p) => tau_count_mod_p(f, p),
    }
}

/// Mod-p data for one node.
#[derive(Clone, Debug)]
pub struct NodeReduction {
    pub index: usize,
    pub hessian_determinant: NumberFieldElement,
    pub norm: Rational,
    /// p divides no coordinate denominator.
    pub p_integral: bool,
    /// The affine Hessian determinant is a unit at every prime above p.
    pub hessian_unit: bool,
}

#[derive(Clone, Debug)]
pub struct EquisingularityReport {
    pub p: u64,
    pub tau_rational: Result<usize>,
    pub tau_mod_p: Result<usize>,
    pub nonzero_mod_p: bool,
    pub nodes: Vec<NodeReduction>,
    pub passed: bool,
    pub reasons: Vec<String>,
}

fn valuation(x: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(&p) {
        x /= &p;
        v += 1;
    }
    v
}

/// Examines how a node reduces modulo p.
pub fn node_reduction(f: &Poly, index: usize, point: &[NumberFieldElement], p: u64) -> NodeReduction {
    let det = affine_hessian_determinant(f, point);
    let norm = det.norm();
    let pb = BigInt::from(p);
    let p_integral = point
        .iter()
        .flat_map(|x| x.coordinates().iter())
        .all(|c| !c.denom().is_multiple_of(&pb));
    let hessian_unit = !norm.is_zero() && valuation(norm.numer(), p) == 0;
    NodeReduction {
        index,
        hessian_determinant: det,
        norm,
        p_integral,
        hessian_unit,
    }
}

/// The equisingularity gate: equal τ over Q and F_p, every node stays an ODP mod p, and
/// f does not vanish mod p.
pub fn equisingularity_check(f: &Poly, nodes: Option<&SingularPointSet>, p: u64) -> EquisingularityReport {
    let mut reasons = Vec::new();
    let k = PrimeField::new(p);
    let nonzero_mod_p = f
        .terms()
        .values()
        .any(|c| k.from_rational(c).is_some_and(|x| x != 0));
    if !nonzero_mod_p {
        reasons.push(format!("f vanishes modulo {p}"));
    }
    if f.terms().values().any(|c| c.denom().is_multiple_of(&BigInt::from(p))) {
        reasons.push(format!("a coefficient has {p} in its denominator"));
    }
    let (tau_rational, tau_mod_p) = rayon::join(|| tau_count_rational(f), || tau_count_mod_p(f, p));
    match (&tau_rational, &tau_mod_p) {
        (Ok(a), Ok(b)) if a != b => reasons.push(format!("tau over Q is {a} but over F_{p} it is {b}")),
        (Err(e), _) | (_, Err(e)) => reasons.push(e.to_string()),
        _ => {}
    }
    let nodes: Vec<NodeReduction> = match nodes {
        Some(set) => set
            .points
            .par_iter()
            .enumerate()
            .map(|(i, pt)| node_reduction(f, i, pt, p))
            .collect(),
        None => Vec::new(),
    };
    for nr in &nodes {
        if !nr.p_integral {
            reasons.push(format!("node {} has {p} in a coordinate denominator", nr.index));
        }
        if !nr.hessian_unit {
            reasons.push(format!(
                "node {}: Hessian determinant norm {} is divisible by {p}",
                nr.index, nr.norm
            ));
        }
    }
    EquisingularityReport {
        p,
        tau_rational,
        tau_mod_p,
        nonzero_mod_p,
        nodes,
        passed: reasons.is_empty(),
        reasons,
    }
}

/// The point (1:0:…:0) type unit vectors, handy for coordinate nodes.
pub fn unit_point(field: &NumberField, nvars: usize, i: usize) -> Vec<NumberFieldElement> {
    (0..nvars)
        .map(|j| field.from_rational(if i == j { Rational::one() } else { Rational::zero() }))
        .collect()
}

/// Hessian rank of a rational point over F_p (None if a coordinate is not p-integral).
pub fn hessian_rank_mod_p(f: &Poly, point: &[Rational], p: u64) -> Option<HessianCertificate> {
    let k = PrimeField::new(p);
    let pt: Option<Vec<u64>> = point.iter().map(|x| k.from_rational(x)).collect();
    hessian_rank(&k, f, &pt?)
}

/// Hessian rank of a rational point over Q.
pub fn hessian_rank_rational(f: &Poly, point: &[Rational]) -> HessianCertificate {
    hessian_rank(&Rationals, f, point).expect("rational evaluation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::poly::parse_expression;

    fn poly(s: &str) -> Poly {
        parse_expression(s, 4).unwrap().homogeneous().unwrap()
    }

    fn cayley() -> Poly {
        poly("x1*x2*x3+x0*x2*x3+x0*x1*x3+x0*x1*x2")
    }

    #[test]
    fn cayley_nodes() {
        let q = NumberField::rationals();
        let f = cayley();
        let pts: Vec<_> = (0..4).map(|i| unit_point(&q, 4, i)).collect();
        let set = verify_singular_points(&f, &pts, &q).unwrap();
        assert_eq!(set.tau, 4);
        assert!(set.points.iter().all(|p| is_odp(&f, p)));
        let bad = vec![q.from_rational(rat(1, 1)), q.from_rational(rat(1, 1)), q.from_rational(rat(1, 1)), q.from_rational(rat(3, 1))];
        assert!(matches!(verify_singular_points(&f, &[bad], &q), Err(Error::NotSingular { .. })));
    }

    #[test]
    fn quadric_cone_and_plane_pair() {
        let origin = [rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 1)];
        let cone = poly("x0*x1-x2^2");
        assert!(hessian_rank_rational(&cone, &origin).is_odp());
        assert_eq!(tau_count_rational(&cone).unwrap(), 1);
        let planes = poly("x0*x1");
        let c = hessian_rank_rational(&planes, &origin);
        assert_eq!(c.rank, 2);
        assert!(!c.is_odp());
        assert!(matches!(tau_count_rational(&planes), Err(Error::NotIsolated { .. })));
        assert!(matches!(tau_count_mod_p(&planes, 5), Err(Error::NotIsolated { .. })));
    }

    #[test]
    fn taus() {
        assert_eq!(tau_count_rational(&cayley()).unwrap(), 4);
        assert_eq!(tau_count_mod_p(&cayley(), 5).unwrap(), 4);
        assert_eq!(tau_count_rational(&poly("x0^3+x1^3+x2^3+x3^3")).unwrap(), 0);
        assert_eq!(tau_count_mod_p(&poly("x0^3+x1^3+x2^3+x3^3"), 7).unwrap(), 0);
    }

    #[test]
    fn quartic_two_nodes_mod_five() {
        let f = poly("x0*x1*(x0^2+x1^2+x2^2+x3^2)+x2*x3*(x0^2+x1^2-x2^2-x3^2)-2*x2^2*x3^2+2*x0^2*x1^2+2*x0*x1*x2*x3");
        assert_eq!(tau_count_rational(&f).unwrap(), 2);
        assert_eq!(tau_count_mod_p(&f, 5).unwrap(), 4);
        let q = NumberField::rationals();
        let c = |x: i64| q.from_rational(rat(x, 1));
        let nodes = verify_singular_points(&f, &[vec![c(1), c(-1), c(0), c(0)], vec![c(0), c(0), c(-1), c(1)]], &q).unwrap();
        let report = equisingularity_check(&f, Some(&nodes), 5);
        assert!(!report.passed);
        assert!(equisingularity_check(&cayley(), None, 5).passed);
    }
}
