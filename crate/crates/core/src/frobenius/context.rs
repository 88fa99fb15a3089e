//! Field-independent data for pole-order reduction: Gröbner data with cofactor
//! divergences, a basis of ker df∧ modulo im df∧ in the stable range, E2 slices, and per
//! degree the rational matrix turning a normal form into an exact correction.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::linalg::{self, Matrix, SparseEchelon};
use crate::arith::{Field, NumberField, NumberFieldElement, Rational};
use crate::error::{Error, Result};
use crate::poly::{groebner_with_cofactors, grevlex_cmp, GroebnerBasis, Monomial, Poly};
use crate::spectral::{e2_basis, koszul_basis, E2Basis};

pub(crate) struct GbTables {
    /// Terms of each basis element, leading (monic) term first.
    pub terms: Vec<Vec<(Monomial, Rational)>>,
    pub cofactors: Vec<Vec<Poly>>,
    /// Σ_i ∂_i M_ji for each basis element j.
    pub divergence: Vec<Poly>,
}

/// A form κ = Σ_l (−1)^l c_l dx_l̂ in ker df∧, stored as its c_l and Σ_l ∂_l c_l.
#[derive(Clone, Debug)]
pub struct KappaForm {
    pub hat: Vec<Poly>,
    pub divergence: Poly,
}

#[derive(Clone, Debug)]
pub struct LowSlice {
    pub s: usize,
    pub degree: i32,
    pub standard: Vec<Monomial>,
    pub representatives: Vec<Poly>,
    pub exact: Vec<Poly>,
    pub offset: usize,
    pub projection: Matrix<Rational>,
}

/// Reduction data for one pole order above n.
#[derive(Clone, Debug)]
pub struct HighSlice {
    pub s: usize,
    pub degree: u32,
    /// Standard monomials of degree `degree`, in grevlex-descending order.
    pub standard: Vec<Monomial>,
    /// Selected multipliers (x^a, κ index) whose exact forms x^a κ_i span the residues.
    pub columns: Vec<(Monomial, usize)>,
    /// c = solve · (normal form coordinates).
    pub solve: Matrix<Rational>,
}

pub struct ReductionContext {
    /// Variable i of the input is variable permutation[i] here.
    permutation: Vec<usize>,
    f: Poly,
    n: usize,
    big_n: u32,
    tau: usize,
    gb: GroebnerBasis,
    tables: GbTables,
    kappa: Vec<KappaForm>,
    kappa_total_degree: u32,
    e2: E2Basis,
    low: Vec<LowSlice>,
    nodes: Vec<Vec<NumberFieldElement>>,
    field: NumberField,
    /// Standard monomials per degree, up to the largest degree prepared.
    standard: Vec<Vec<Monomial>>,
    high: BTreeMap<usize, HighSlice>,
}

/// Renames x_i to x_perm[i].
pub fn permute_monomial(m: &Monomial, perm: &[usize]) -> Monomial {
    let mut e = vec![0; m.nvars()];
    for (i, &x) in m.exps().iter().enumerate() {
        e[perm[i]] = x;
    }
    Monomial::new(&e)
}

pub fn permute_poly(f: &Poly, perm: &[usize]) -> Poly {
    let mut g = Poly::zero(f.nvars(), f.degree());
    for (m, c) in f.terms() {
        g.add_term(permute_monomial(m, perm), c.clone());
    }
    g
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn p_integral(q: &Rational, p: &num_bigint::BigInt) -> bool {
    !(q.denom() % p).is_zero()
}

fn groebner_is_p_integral(gb: &GroebnerBasis, p: u64) -> bool {
    let pb = num_bigint::BigInt::from(p);
    (0..gb.len()).all(|j| {
        gb.element_terms(j).iter().all(|(_, c)| p_integral(c, &pb))
            && gb
                .cofactors(j)
                .iter()
                .all(|q| q.terms().values().all(|c| p_integral(c, &pb)))
    })
}

/// Scales a list of polynomials by a rational so that together they are integral with
/// coprime coefficients.
fn make_primitive(ps: &mut [Poly]) {
    use num_integer::Integer;
    let mut den = num_bigint::BigInt::one();
    let mut num = num_bigint::BigInt::zero();
    for p in ps.iter() {
        for c in p.terms().values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
    }
    if num.is_zero() {
        return;
    }
    let s = Rational::new(den, num);
    for p in ps.iter_mut() {
        *p = p.scale(&s);
    }
}

fn divergence(ps: &[Poly], nvars: usize, degree: i32) -> Poly {
    let mut acc = Poly::zero(nvars, degree);
    for (i, p) in ps.iter().enumerate() {
        if !p.is_zero() {
            acc = acc.add(&p.derivative(i));
        }
    }
    acc
}

impl ReductionContext {
    /// Builds everything that does not depend on the pole orders reached.
    pub fn new(f: &Poly, nodes: &[Vec<NumberFieldElement>], field: &NumberField) -> Result<Self> {
        let gb = groebner_with_cofactors(&f.gradient());
        let identity: Vec<usize> = (0..f.nvars()).collect();
        Self::build(f, nodes, field, gb, identity)
    }

    /// Like [`ReductionContext::new`], but renames the variables if that makes the
    /// Gröbner data p-integral, so reductions can run in Z/p^K.
    pub fn for_prime(f: &Poly, nodes: &[Vec<NumberFieldElement>], field: &NumberField, p: u64) -> Result<Self> {
        let nvars = f.nvars();
        for perm in permutations(nvars) {
            let g = permute_poly(f, &perm);
            let gb = groebner_with_cofactors(&g.gradient());
            if groebner_is_p_integral(&gb, p) {
                let pts: Vec<Vec<NumberFieldElement>> = nodes
                    .iter()
                    .map(|pt| {
                        let mut q = pt.clone();
                        for (i, x) in pt.iter().enumerate() {
                            q[perm[i]] = x.clone();
                        }
                        q
                    })
                    .collect();
                return Self::build(&g, &pts, field, gb, perm);
            }
        }
        Self::new(f, nodes, field)
    }

    fn build(
        f: &Poly,
        nodes: &[Vec<NumberFieldElement>],
        field: &NumberField,
        gb: GroebnerBasis,
        permutation: Vec<usize>,
    ) -> Result<Self> {
        let nvars = f.nvars();
        if nvars > super::engine::MAX_VARS {
            return Err(Error::Invalid(format!("at most {} variables", super::engine::MAX_VARS)));
        }
        let n = nvars - 1;
        let big_n = f.degree() as u32;
        let tau = nodes.len();
        let mut tables = GbTables {
            terms: Vec::new(),
            cofactors: Vec::new(),
            divergence: Vec::new(),
        };
        for j in 0..gb.len() {
            let terms = gb.element_terms(j).to_vec();
            let cof = gb.cofactors(j).to_vec();
            let deg = terms[0].0.degree() as i32 - (big_n as i32 - 1) - 1;
            tables.divergence.push(divergence(&cof, nvars, deg));
            tables.terms.push(terms);
            tables.cofactors.push(cof);
        }
        let e2 = e2_basis(f, &gb, tau)?;
        let low = e2
            .slices
            .iter()
            .map(|sl| LowSlice {
                s: sl.s,
                degree: sl.quotient.degree,
                standard: sl.quotient.standard.clone(),
                representatives: sl
                    .representatives
                    .iter()
                    .map(|m| Poly::monomial(m.clone(), Rational::one()))
                    .collect(),
                exact: sl.exact.clone(),
                offset: e2.offset(sl.s),
                projection: sl.projection.clone(),
            })
            .collect();
        let (kappa, kappa_total_degree) = if tau == 0 {
            (Vec::new(), n as u32 * big_n)
        } else {
            let mut found = None;
            for t in [n as u32 * big_n, (n as u32 + 1) * big_n] {
                let sl = koszul_basis(f, n, t as i32 - n as i32);
                if sl.dimension == tau {
                    found = Some((sl.basis, t));
                    break;
                }
            }
            let (basis, t) = found.ok_or(Error::DimensionMismatch {
                expected: tau,
                found: koszul_basis(f, n, (n as u32 * big_n) as i32 - n as i32).dimension,
            })?;
            let forms = basis
                .iter()
                .map(|k| {
                    let mut hat = k.hat_components();
                    make_primitive(&mut hat);
                    let d = divergence(&hat, nvars, t as i32 - n as i32 - 1);
                    KappaForm { hat, divergence: d }
                })
                .collect();
            (forms, t)
        };
        Ok(ReductionContext {
            permutation,
            f: f.clone(),
            n,
            big_n,
            tau,
            gb,
            tables,
            kappa,
            kappa_total_degree,
            e2,
            low,
            nodes: nodes.to_vec(),
            field: field.clone(),
            standard: vec![vec![Monomial::one(nvars)]],
            high: BTreeMap::new(),
        })
    }

    /// Variable i of the input polynomial is variable permutation()[i] of the context.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// The E2 basis written in the input variables.
    pub fn input_basis(&self) -> Vec<(Monomial, usize)> {
        let mut inv = vec![0; self.permutation.len()];
        for (i, &j) in self.permutation.iter().enumerate() {
            inv[j] = i;
        }
        self.e2
            .entries
            .iter()
            .map(|(m, s)| (permute_monomial(m, &inv), *s))
            .collect()
    }

    pub fn polynomial(&self) -> &Poly {
        &self.f
    }

    pub fn nvars(&self) -> usize {
        self.n + 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.big_n
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub(crate) fn gb_data(&self) -> &GbTables {
        &self.tables
    }

    pub fn kappa(&self) -> &[KappaForm] {
        &self.kappa
    }

    pub fn e2(&self) -> &E2Basis {
        &self.e2
    }

    pub fn basis_len(&self) -> usize {
        self.e2.len()
    }

    pub fn low_slices(&self) -> &[LowSlice] {
        &self.low
    }

    pub fn high_slice(&self, s: usize) -> Option<&HighSlice> {
        self.high.get(&s)
    }

    /// Largest power of p in a denominator, per table of precomputed data.
    pub fn denominator_valuations(&self, p: u64) -> Vec<(&'static str, u32)> {
        let pb = num_bigint::BigInt::from(p);
        let val = |q: &Rational| {
            let mut d = q.denom().clone();
            let mut v = 0;
            while (&d % &pb).is_zero() {
                d /= &pb;
                v += 1;
            }
            v
        };
        let polys = |ps: &mut dyn Iterator<Item = &Poly>| {
            ps.flat_map(|p| p.terms().values().map(val).collect::<Vec<_>>()).max().unwrap_or(0)
        };
        let tails = self.tables.terms.iter().flatten().map(|t| val(&t.1)).max().unwrap_or(0);
        vec![
            ("groebner", tails),
            ("cofactors", polys(&mut self.tables.cofactors.iter().flatten())),
            ("divergence", polys(&mut self.tables.divergence.iter())),
            ("kappa", polys(&mut self.kappa.iter().flat_map(|k| k.hat.iter()))),
            (
                "projection",
                self.low.iter().flat_map(|l| l.projection.iter().flatten()).map(val).max().unwrap_or(0),
            ),
            ("exact", polys(&mut self.low.iter().flat_map(|l| l.exact.iter()))),
            (
                "solve",
                self.high.values().flat_map(|h| h.solve.iter().flatten()).map(val).max().unwrap_or(0),
            ),
        ]
    }

    fn extend_standard(&mut self, d: u32) {
        let nvars = self.nvars();
        let leads = self.gb.leading_monomials();
        while self.standard.len() <= d as usize {
            let prev = self.standard.last().unwrap();
            let mut next: BTreeSet<Monomial> = BTreeSet::new();
            for m in prev {
                for i in 0..nvars {
                    let c = m.raise(i);
                    if !leads.iter().any(|l| l.divides(&c)) {
                        next.insert(c);
                    }
                }
            }
            let mut v: Vec<Monomial> = next.into_iter().collect();
            v.sort_by(|a, b| grevlex_cmp(b, a));
            self.standard.push(v);
        }
    }

    /// Standard monomials of degree d in grevlex-descending order.
    pub fn standard_monomials(&mut self, d: u32) -> &[Monomial] {
        self.extend_standard(d);
        &self.standard[d as usize]
    }

    /// Prepares reduction data for every pole order n < s ≤ max_pole.
    pub fn prepare(&mut self, max_pole: usize) -> Result<()> {
        let nvars = self.nvars();
        let todo: Vec<usize> = ((self.n + 1)..=max_pole)
            .filter(|s| !self.high.contains_key(s))
            .collect();
        if todo.is_empty() {
            return Ok(());
        }
        let top = max_pole as u32 * self.big_n - nvars as u32;
        self.extend_standard(top);
        let evals = NodeValues::new(self);
        let this = &*self;
        let built: Vec<Result<HighSlice>> = todo
            .par_iter()
            .map(|&s| this.build_high(s, &evals))
            .collect();
        for h in built {
            let h = h?;
            self.high.insert(h.s, h);
        }
        Ok(())
    }

    fn build_high(&self, s: usize, ev: &NodeValues) -> Result<HighSlice> {
        let nvars = self.nvars();
        let degree = s as u32 * self.big_n - nvars as u32;
        let standard = self.standard[degree as usize].clone();
        if standard.len() != self.tau {
            return Err(Error::NotIsolated {
                field: format!(
                    "Q (quotient dimension {} in degree {degree}, expected {})",
                    standard.len(),
                    self.tau
                ),
            });
        }
        if self.tau == 0 {
            return Ok(HighSlice {
                s,
                degree,
                standard,
                columns: Vec::new(),
                solve: Vec::new(),
            });
        }
        let k = (s as u32 * self.big_n)
            .checked_sub(self.kappa_total_degree)
            .ok_or_else(|| {
                Error::TransversalityFailure(format!("no exact multiples at pole order {s}"))
            })?;
        let nf = &self.field;
        let mut candidates: Vec<Monomial> = Vec::new();
        for l in 0..nvars {
            let mut e = vec![0; nvars];
            e[l] = k;
            candidates.push(Monomial::new(&e));
        }
        if k >= 1 {
            for l in 0..nvars {
                for m in 0..nvars {
                    if m != l {
                        let mut e = vec![0; nvars];
                        e[l] = k - 1;
                        e[m] += 1;
                        candidates.push(Monomial::new(&e));
                    }
                }
            }
        }
        candidates.dedup();
        let mut ech = SparseEchelon::new(nf.clone());
        let mut columns = Vec::new();
        let mut cols: Vec<Vec<NumberFieldElement>> = Vec::new();
        'outer: for a in &candidates {
            for i in 0..self.tau {
                let col = ev.exact_column(nf, a, i);
                if ech.insert_dense(&col) {
                    columns.push((a.clone(), i));
                    cols.push(col);
                    if columns.len() == self.tau {
                        break 'outer;
                    }
                }
            }
        }
        if columns.len() < self.tau {
            return Err(Error::TransversalityFailure(format!(
                "exact multiples at pole order {s} span only {} of {} residue directions",
                columns.len(),
                self.tau
            )));
        }
        let a: Matrix<NumberFieldElement> = (0..self.tau)
            .map(|j| cols.iter().map(|c| c[j].clone()).collect())
            .collect();
        let rhs: Vec<Vec<NumberFieldElement>> = standard
            .iter()
            .map(|m| (0..self.tau).map(|j| ev.monomial(nf, j, m)).collect())
            .collect();
        let sol = linalg::solve_many(nf, &a, &rhs).map_err(|_| Error::SingularSolRed {
            degree: degree as usize,
        })?;
        let mut solve = vec![vec![Rational::zero(); self.tau]; self.tau];
        for (t, col) in sol.iter().enumerate() {
            for (c, x) in col.iter().enumerate() {
                solve[c][t] = x.to_rational().ok_or_else(|| {
                    Error::Internal(format!(
                        "exact correction at pole order {s} is not rational; node set not Galois stable"
                    ))
                })?;
            }
        }
        Ok(HighSlice {
            s,
            degree,
            standard,
            columns,
            solve,
        })
    }
}

/// Values of the κ data at the nodes, plus cached coordinate powers.
struct NodeValues {
    nodes: Vec<Vec<NumberFieldElement>>,
    /// u[j][i] = Σ_l ∂_l c_il at node j
    u: Vec<Vec<NumberFieldElement>>,
    /// c[j][i][l]
    c: Vec<Vec<Vec<NumberFieldElement>>>,
}

impl NodeValues {
    fn new(ctx: &ReductionContext) -> Self {
        let nf = &ctx.field;
        let embed = |q: &Rational| nf.from_rational(q.clone());
        let mut u = Vec::new();
        let mut c = Vec::new();
        for p in &ctx.nodes {
            u.push(
                ctx.kappa
                    .iter()
                    .map(|k| k.divergence.evaluate_in(nf, p, embed))
                    .collect(),
            );
            c.push(
                ctx.kappa
                    .iter()
                    .map(|k| k.hat.iter().map(|h| h.evaluate_in(nf, p, embed)).collect())
                    .collect(),
            );
        }
        NodeValues {
            nodes: ctx.nodes.clone(),
            u,
            c,
        }
    }

    fn monomial(&self, nf: &NumberField, j: usize, m: &Monomial) -> NumberFieldElement {
        let mut acc = Field::one(nf);
        for (l, &e) in m.exps().iter().enumerate() {
            if e > 0 {
                acc = &acc * &self.nodes[j][l].pow(e as u64);
            }
        }
        acc
    }

    /// Top coefficient of d(x^a κ_i) at every node.
    fn exact_column(&self, nf: &NumberField, a: &Monomial, i: usize) -> Vec<NumberFieldElement> {
        (0..self.nodes.len())
            .map(|j| {
                let mut v = &self.monomial(nf, j, a) * &self.u[j][i];
                for l in 0..a.nvars() {
                    if let Some(b) = a.lower(l) {
                        let coef = nf.from_rational(Rational::from_integer(a.exps()[l].into()));
                        let t = &(&self.monomial(nf, j, &b) * &self.c[j][i][l]) * &coef;
                        v = &v + &t;
                    }
                }
                v
            })
            .collect()
    }
}
