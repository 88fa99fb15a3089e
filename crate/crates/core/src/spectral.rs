//! E1 and E2 pages of the pole-order spectral sequence: Koszul cohomology of df∧,
//! the induced de Rham differential, and monomial bases of the E2 page.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::linalg::{self, Matrix, SparseEchelon, SparseVec};
use crate::arith::{Rational, Rationals};
use crate::error::{Error, Result};
use crate::forms::{DifferentialForm, IndexTuple};
use crate::poly::{monomial_basis, GroebnerBasis, Monomial, MonomialIndexer, Poly};

/// b(n, N) = ((N−1)^{n+1} + (−1)^{n+1}(N−1)) / N, the middle Betti number of a smooth
/// degree-N hypersurface in P^n (primitive part).
pub fn b_formula(n: usize, big_n: u32) -> usize {
    let m = big_n as i128 - 1;
    let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
    let v = (m.pow(n as u32 + 1) + sign * m) / big_n as i128;
    v as usize
}

/// Coordinates on the graded piece S_j Ω^l: index tuples in lexicographic order,
/// monomials in descending lex order within each tuple.
#[derive(Clone, Debug)]
pub struct FormSpace {
    nvars: usize,
    level: usize,
    coef_degree: i32,
    tuples: Vec<IndexTuple>,
    tuple_pos: HashMap<IndexTuple, usize>,
    monomials: Vec<Monomial>,
    indexer: MonomialIndexer,
}

fn combinations(nvars: usize, level: usize) -> Vec<IndexTuple> {
    fn rec(start: usize, nvars: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexTuple>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in start..nvars {
            cur.push(v);
            rec(v + 1, nvars, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, nvars, level, &mut Vec::new(), &mut out);
    out
}

impl FormSpace {
    pub fn new(nvars: usize, level: usize, coef_degree: i32) -> Self {
        let tuples = combinations(nvars, level);
        let tuple_pos = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let monomials = if coef_degree >= 0 {
            monomial_basis(nvars, coef_degree as u32)
        } else {
            Vec::new()
        };
        FormSpace {
            nvars,
            level,
            coef_degree,
            tuples,
            tuple_pos,
            monomials,
            indexer: MonomialIndexer::new(nvars, coef_degree.max(0) as u32),
        }
    }

    pub fn dim(&self) -> usize {
        self.tuples.len() * self.monomials.len()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coef_degree(&self) -> i32 {
        self.coef_degree
    }

    fn coord(&self, tuple: usize, m: &Monomial) -> usize {
        tuple * self.monomials.len() + self.indexer.index(m.exps())
    }

    fn basis_element(&self, c: usize) -> (usize, &Monomial) {
        let d = self.monomials.len();
        (c / d, &self.monomials[c % d])
    }

    pub fn to_vector(&self, w: &DifferentialForm) -> SparseVec<Rational> {
        let mut v: SparseVec<Rational> = Vec::new();
        for (idx, c) in w.components() {
            let t = self.tuple_pos[idx];
            for (m, x) in c.terms() {
                v.push((self.coord(t, m), x.clone()));
            }
        }
        v.sort_by_key(|(c, _)| *c);
        v
    }

    pub fn from_vector(&self, v: &[(usize, Rational)]) -> DifferentialForm {
        let mut w = DifferentialForm::zero(self.nvars, self.level, self.coef_degree + self.level as i32);
        for (c, x) in v {
            let (t, m) = self.basis_element(*c);
            w = w.add(&DifferentialForm::term(
                self.tuples[t].clone(),
                Poly::monomial(m.clone(), x.clone()),
            ));
        }
        w
    }
}

/// Matrix of a linear map between graded pieces of forms, in [`FormSpace`] coordinates.
#[derive(Clone, Debug)]
pub struct GradedLinearMap {
    pub source: (usize, i32),
    pub target: (usize, i32),
    pub rows: usize,
    pub cols: usize,
    /// Sparse columns: images of the source basis vectors.
    pub columns: Vec<SparseVec<Rational>>,
}

impl GradedLinearMap {
    pub fn to_dense(&self) -> Matrix<Rational> {
        let mut m = vec![vec![Rational::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col {
                m[*i][j] = x.clone();
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        let mut e = SparseEchelon::new(Rationals);
        for c in &self.columns {
            e.insert(c.clone());
        }
        e.rank()
    }

    /// Kernel basis as sparse source vectors.
    pub fn kernel(&self) -> Vec<SparseVec<Rational>> {
        // rows of the matrix, built from the columns
        let mut rows: Vec<SparseVec<Rational>> = vec![Vec::new(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col {
                rows[*i].push((j, x.clone()));
            }
        }
        let mut e = SparseEchelon::new(Rationals);
        for r in rows {
            if !r.is_empty() {
                e.insert(r);
            }
        }
        e.kernel(self.cols)
    }
}

/// df∧ : S_j Ω^l → S_{j+N−1} Ω^{l+1} for j = `coef_degree`.
pub fn koszul_map(f: &Poly, level: usize, coef_degree: i32) -> GradedLinearMap {
    let nvars = f.nvars();
    let big_n = f.degree();
    let src = FormSpace::new(nvars, level, coef_degree);
    let tgt = FormSpace::new(nvars, level + 1, coef_degree + big_n - 1);
    let grads = f.gradient();
    let columns = (0..src.dim())
        .into_par_iter()
        .map(|c| {
            let (t, u) = src.basis_element(c);
            let idx = &src.tuples[t];
            let mut v: SparseVec<Rational> = Vec::new();
            if level + 1 > nvars {
                return v;
            }
            for (var, g) in grads.iter().enumerate() {
                if idx.contains(&var) || g.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|&&j| j < var).count();
                let mut new_idx = idx.clone();
                new_idx.insert(pos, var);
                let tt = tgt.tuple_pos[&new_idx];
                let neg = pos % 2 == 1;
                for (m, x) in g.terms() {
                    let val = if neg { -x } else { x.clone() };
                    v.push((tgt.coord(tt, &m.mul(u)), val));
                }
            }
            v.sort_by_key(|(c, _)| *c);
            v
        })
        .collect();
    GradedLinearMap {
        source: (level, coef_degree),
        target: (level + 1, coef_degree + big_n - 1),
        rows: tgt.dim(),
        cols: src.dim(),
        columns,
    }
}

/// dim H^l(K_f)_j computed by rank-nullity.
pub fn koszul_dim(f: &Poly, level: usize, j: i32) -> usize {
    let big_n = f.degree();
    let space = FormSpace::new(f.nvars(), level, j);
    if space.dim() == 0 {
        return 0;
    }
    let out_rank = if level < f.nvars() {
        koszul_map(f, level, j).rank()
    } else {
        0
    };
    let in_rank = if level > 0 && j - big_n + 1 >= 0 {
        koszul_map(f, level - 1, j - big_n + 1).rank()
    } else {
        0
    };
    space.dim() - out_rank - in_rank
}

/// Representatives of a Koszul cohomology group.
#[derive(Clone, Debug)]
pub struct KoszulCohomologySlice {
    pub level: usize,
    pub degree: i32,
    pub dimension: usize,
    pub basis: Vec<DifferentialForm>,
}

/// Basis of H^l(K_f)_j: kernel vectors of df∧ independent modulo its image.
pub fn koszul_basis(f: &Poly, level: usize, j: i32) -> KoszulCohomologySlice {
    let big_n = f.degree();
    let space = FormSpace::new(f.nvars(), level, j);
    let mut image = SparseEchelon::new(Rationals);
    if level > 0 && j - big_n + 1 >= 0 {
        for c in koszul_map(f, level - 1, j - big_n + 1).columns {
            image.insert(c);
        }
    }
    let kernel: Vec<SparseVec<Rational>> = if level < f.nvars() {
        koszul_map(f, level, j).kernel()
    } else {
        (0..space.dim()).map(|c| vec![(c, Rational::one())]).collect()
    };
    let mut basis = Vec::new();
    for v in kernel {
        if image.insert(v.clone()) {
            basis.push(space.from_vector(&v));
        }
    }
    KoszulCohomologySlice {
        level,
        degree: j,
        dimension: basis.len(),
        basis,
    }
}

/// Normal-form coordinates of polynomials of one degree on the standard monomials.
#[derive(Clone, Debug)]
pub struct QuotientCoordinates {
    pub degree: i32,
    pub standard: Vec<Monomial>,
    position: HashMap<Monomial, usize>,
}

impl QuotientCoordinates {
    pub fn new(gb: &GroebnerBasis, degree: i32) -> Self {
        let standard = if degree >= 0 {
            gb.standard_monomials(degree as u32)
        } else {
            Vec::new()
        };
        let position = standard.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        QuotientCoordinates {
            degree,
            standard,
            position,
        }
    }

    pub fn dim(&self) -> usize {
        self.standard.len()
    }

    /// Coordinates of a reduced polynomial.
    pub fn coords_of_reduced(&self, r: &Poly) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        for (m, c) in r.terms() {
            v[self.position[m]] = c.clone();
        }
        v
    }

    pub fn coords(&self, gb: &GroebnerBasis, g: &Poly) -> Vec<Rational> {
        self.coords_of_reduced(&gb.normal_form(g))
    }
}

/// Matrix of the E1 differential d : H^n(K_f)_{sN−n} → H^{n+1}(K_f)_{sN−n−1}, with the
/// target in standard-monomial coordinates; columns follow `source.basis`.
pub fn e1_differential(
    gb: &GroebnerBasis,
    source: &KoszulCohomologySlice,
    target: &QuotientCoordinates,
) -> Matrix<Rational> {
    let cols: Vec<Vec<Rational>> = source
        .basis
        .par_iter()
        .map(|k| target.coords(gb, &k.de_rham_d().top_coefficient()))
        .collect();
    (0..target.dim())
        .map(|i| cols.iter().map(|c| c[i].clone()).collect())
        .collect()
}

/// Data for one pole order s ≤ n of the E2 page.
#[derive(Clone, Debug)]
pub struct PoleSlice {
    pub s: usize,
    pub quotient: QuotientCoordinates,
    /// E2 representatives h_i (monomials of degree sN − n − 1).
    pub representatives: Vec<Monomial>,
    /// Level-n forms κ_j in ker df∧ whose d-images span the E1 image.
    pub exact_sources: Vec<DifferentialForm>,
    /// Top coefficients of dκ_j.
    pub exact: Vec<Poly>,
    /// Inverse of the matrix [NF(h_i) | NF(dκ_j)] in standard coordinates.
    pub projection: Matrix<Rational>,
}

/// Monomial basis of the E2 page with its per-pole-order projection data.
#[derive(Clone, Debug)]
pub struct E2Basis {
    pub entries: Vec<(Monomial, usize)>,
    pub slices: Vec<PoleSlice>,
}

impl E2Basis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn slice(&self, s: usize) -> Option<&PoleSlice> {
        self.slices.iter().find(|p| p.s == s)
    }

    /// Offset of the first entry with pole order s inside `entries`.
    pub fn offset(&self, s: usize) -> usize {
        self.entries.iter().take_while(|(_, t)| *t < s).count()
    }
}

/// E2 basis by greedy monomial selection (descending lex) modulo the E1 image.
pub fn e2_basis(f: &Poly, gb: &GroebnerBasis, tau: usize) -> Result<E2Basis> {
    let nvars = f.nvars();
    let n = nvars - 1;
    let big_n = f.degree();
    let mut entries = Vec::new();
    let mut slices = Vec::new();
    for s in 1..=n {
        let m = s as i32 * big_n - nvars as i32;
        let quotient = QuotientCoordinates::new(gb, m);
        if quotient.dim() == 0 {
            continue;
        }
        let h_n = koszul_basis(f, n, m + 1);
        let images: Vec<(DifferentialForm, Poly, Vec<Rational>)> = h_n
            .basis
            .into_par_iter()
            .map(|k| {
                let e = k.de_rham_d().top_coefficient();
                let c = quotient.coords(gb, &e);
                (k, e, c)
            })
            .collect();
        let mut ech = SparseEchelon::new(Rationals);
        let mut exact_sources = Vec::new();
        let mut exact = Vec::new();
        let mut columns: Vec<Vec<Rational>> = Vec::new();
        for (k, e, c) in images {
            if ech.insert_dense(&c) {
                exact_sources.push(k);
                exact.push(e);
                columns.push(c);
            }
        }
        let mut reps = Vec::new();
        let mut rep_cols = Vec::new();
        for mono in monomial_basis(nvars, m as u32) {
            if ech.rank() == quotient.dim() {
                break;
            }
            let c = quotient.coords(gb, &Poly::monomial(mono.clone(), Rational::one()));
            if ech.insert_dense(&c) {
                reps.push(mono);
                rep_cols.push(c);
            }
        }
        let all: Vec<Vec<Rational>> = rep_cols.into_iter().chain(columns).collect();
        let d = quotient.dim();
        let b: Matrix<Rational> = (0..d).map(|i| all.iter().map(|c| c[i].clone()).collect()).collect();
        let projection = linalg::inverse(&Rationals, &b).map_err(|_| {
            Error::Internal(format!("E2 projection at pole order {s} is singular"))
        })?;
        entries.extend(reps.iter().map(|h| (h.clone(), s)));
        slices.push(PoleSlice {
            s,
            quotient,
            representatives: reps,
            exact_sources,
            exact,
            projection,
        });
    }
    let expected = b_formula(n, big_n as u32).checked_sub(tau).ok_or(Error::DimensionMismatch {
        expected: 0,
        found: tau,
    })?;
    if n % 2 == 1 && entries.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: entries.len(),
        });
    }
    Ok(E2Basis { entries, slices })
}

/// τ forms spanning H^n(K_f) at coefficient degree (n+1)N − n.
///
/// Representatives are computed one period lower, at degree nN − n, and multiplied by
/// ℓ^N; if that slice does not have dimension τ the target degree is computed directly.
pub fn subdiagonal_generators(f: &Poly, transversal: &Poly, tau: usize) -> Result<Vec<DifferentialForm>> {
    if tau == 0 {
        return Ok(Vec::new());
    }
    let n = f.nvars() as i32 - 1;
    let big_n = f.degree();
    let low = koszul_basis(f, n as usize, n * big_n - n);
    if low.dimension == tau {
        let lift = transversal.pow(big_n as u32);
        return Ok(low.basis.iter().map(|k| k.mul_poly(&lift)).collect());
    }
    let high = koszul_basis(f, n as usize, (n + 1) * big_n - n);
    if high.dimension != tau {
        return Err(Error::DimensionMismatch {
            expected: tau,
            found: high.dimension,
        });
    }
    Ok(high.basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{groebner_with_cofactors, parse_expression};

    fn p(s: &str) -> Poly {
        parse_expression(s, 4).unwrap().homogeneous().unwrap()
    }

    fn cayley() -> Poly {
        p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3")
    }

    #[test]
    fn betti_formula() {
        assert_eq!(b_formula(3, 3), 6);
        assert_eq!(b_formula(3, 4), 21);
        assert_eq!(b_formula(3, 5), 52);
        assert_eq!(b_formula(1, 3), 2);
    }

    #[test]
    fn cayley_table() {
        let f = cayley();
        let top: Vec<usize> = (0..7).map(|j| koszul_dim(&f, 4, j)).collect();
        assert_eq!(top, vec![1, 4, 6, 4, 4, 4, 4]);
        let mid: Vec<usize> = (0..7).map(|j| koszul_dim(&f, 3, j)).collect();
        assert_eq!(mid, vec![0, 0, 3, 4, 4, 4, 4]);
    }

    #[test]
    fn cayley_slices() {
        let f = cayley();
        let h3 = koszul_basis(&f, 3, 2);
        assert_eq!(h3.dimension, 3);
        assert!(h3.basis.iter().all(|w| w.koszul(&f).is_zero()));
        assert_eq!(koszul_basis(&f, 4, 2).dimension, 6);
    }

    #[test]
    fn cayley_e2() {
        let f = cayley();
        let gb = groebner_with_cofactors(&f.gradient());
        let e2 = e2_basis(&f, &gb, 4).unwrap();
        let names: Vec<String> = e2.entries.iter().map(|(m, s)| format!("{m}@{s}")).collect();
        assert_eq!(names, vec!["x0*x1@2", "x0*x2@2"]);
        let slice = e2.slice(2).unwrap();
        assert_eq!(slice.exact.len(), 4);
    }

    #[test]
    fn fermat_has_no_middle_cohomology() {
        let f = p("x0^3 + x1^3 + x2^3 + x3^3");
        for j in 0..=8 {
            assert_eq!(koszul_dim(&f, 3, j), 0, "degree {j}");
        }
    }

    #[test]
    fn e1_bijective_past_plateau() {
        let f = cayley();
        let gb = groebner_with_cofactors(&f.gradient());
        for s in 4..=5 {
            let src = koszul_basis(&f, 3, 3 * s - 3);
            let tgt = QuotientCoordinates::new(&gb, 3 * s - 4);
            let m = e1_differential(&gb, &src, &tgt);
            assert_eq!(m.len(), 4);
            assert_eq!(m[0].len(), 4);
            assert_eq!(linalg::rank(&Rationals, &m), 4);
        }
    }

    #[test]
    fn kummer_e2() {
        let f = p("x0^4 + x1^4 + 12*x2^4 + 27*x3^4 + x0^2*(46*x1^2 - 20*x2^2 - 44*x2*x3 - 30*x3^2) - x1^2*(20*x2^2 - 44*x2*x3 + 30*x3^2) - 30*x2^2*x3^2");
        let gb = groebner_with_cofactors(&f.gradient());
        let e2 = e2_basis(&f, &gb, 16).unwrap();
        let names: Vec<String> = e2.entries.iter().map(|(m, s)| format!("{m}@{s}")).collect();
        assert_eq!(names, vec!["1@1", "x0^4@2", "x0^2*x1^2@2", "x0^2*x2^2@2", "x0*x1*x2^2@2"]);
    }
}
