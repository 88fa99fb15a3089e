//! Randomized identities for the differential-form operators.

use nodal_zeta::arith::linalg::SparseEchelon;
use nodal_zeta::arith::{Rational, Rationals};
use nodal_zeta::forms::DifferentialForm;
use nodal_zeta::poly::{monomial_basis, Poly};
use nodal_zeta::spectral::FormSpace;
use proptest::prelude::*;

const NVARS: usize = 4;

fn tuples(level: usize) -> Vec<Vec<usize>> {
    (0u32..1 << NVARS)
        .filter(|m| m.count_ones() as usize == level)
        .map(|m| (0..NVARS).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn build_poly(degree: u32, terms: &[(usize, i64)]) -> Poly {
    let basis = monomial_basis(NVARS, degree);
    Poly::from_terms(
        NVARS,
        degree as i32,
        terms
            .iter()
            .map(|&(m, c)| (basis[m % basis.len()].clone(), Rational::from_integer(c.into()))),
    )
    .unwrap()
}

fn build_form(level: usize, degree: u32, terms: &[(usize, usize, i64)]) -> DifferentialForm {
    let ts = tuples(level);
    let mut w = DifferentialForm::zero(NVARS, level, degree as i32 + level as i32);
    for &(t, m, c) in terms {
        let piece = DifferentialForm::term(ts[t % ts.len()].clone(), build_poly(degree, &[(m, c)]));
        w = w.add(&piece);
    }
    w
}

fn form() -> impl Strategy<Value = DifferentialForm> {
    (0..=NVARS, 0u32..=3, prop::collection::vec((0usize..64, 0usize..64, -6i64..=6), 1..5))
        .prop_map(|(l, d, t)| build_form(l, d, &t))
}

fn form_at(level: usize, degree: u32) -> impl Strategy<Value = DifferentialForm> {
    prop::collection::vec((0usize..64, 0usize..64, -6i64..=6), 1..5).prop_map(move |t| build_form(level, degree, &t))
}

fn polynomial(degree: u32) -> impl Strategy<Value = Poly> {
    prop::collection::vec((0usize..64, -6i64..=6), 1..6).prop_map(move |t| build_poly(degree, &t))
}

fn same(a: &DifferentialForm, b: &DifferentialForm) -> bool {
    a.sub(b).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn homotopy_formula(w in form()) {
        let m = Rational::from_integer(w.degree().into());
        let lhs = w.de_rham_d().euler_contract().add(&w.euler_contract().de_rham_d());
        prop_assert!(same(&lhs, &w.scale(&m)));
    }

    #[test]
    fn contraction_is_a_derivation(a in form(), b in form()) {
        let sign = if a.level() % 2 == 0 { Rational::from_integer(1.into()) } else { Rational::from_integer((-1).into()) };
        let lhs = a.wedge(&b).euler_contract();
        let rhs = a.euler_contract().wedge(&b).add(&a.wedge(&b.euler_contract()).scale(&sign));
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn contraction_squares_to_zero(w in form()) {
        prop_assert!(w.euler_contract().euler_contract().is_zero());
    }

    #[test]
    fn contraction_of_df(f in polynomial(3)) {
        let df = DifferentialForm::function(f.clone()).de_rham_d();
        let nf = DifferentialForm::function(f.scale(&Rational::from_integer(3.into())));
        prop_assert!(same(&df.euler_contract(), &nf));
    }

    #[test]
    fn d_squares_to_zero(w in form()) {
        prop_assert!(w.de_rham_d().de_rham_d().is_zero());
    }

    #[test]
    fn koszul_squares_to_zero(w in form(), f in polynomial(3)) {
        prop_assert!(w.koszul(&f).koszul(&f).is_zero());
    }

    #[test]
    fn d_and_koszul_anticommute(w in form(), f in polynomial(3)) {
        let lhs = w.koszul(&f).de_rham_d().add(&w.de_rham_d().koszul(&f));
        prop_assert!(lhs.is_zero());
    }

    #[test]
    fn deformed_differential_identity(level in 1usize..=NVARS, s in 2u32..=3, f in polynomial(3), seed in prop::collection::vec((0usize..64, 0usize..64, -6i64..=6), 1..5)) {
        // γ ∈ Ω^{level}_{sN}: f·dΔγ − s·df∧Δγ = −Δ(d_f γ)
        let n = 3u32;
        let gamma = build_form(level, s * n - level as u32, &seed);
        let dg = gamma.euler_contract();
        let s_r = Rational::from_integer(s.into());
        let lhs = dg.de_rham_d().mul_poly(&f).sub(&dg.koszul(&f).scale(&s_r));
        let rhs = gamma.deformed_d(&f).euler_contract().scale(&Rational::from_integer((-1).into()));
        prop_assert!(same(&lhs, &rhs));
    }

    #[test]
    fn odd_forms_square_to_zero(w in form_at(1, 2)) {
        prop_assert!(w.wedge(&w).is_zero());
    }
}

/// Rank of Δ on forms of level `level` and total degree `m`; also returns the source dimension.
fn contraction_rank(level: usize, m: i32) -> (usize, usize) {
    let space = FormSpace::new(NVARS, level, m - level as i32);
    let target = FormSpace::new(NVARS, level - 1, m - level as i32 + 1);
    let mut e = SparseEchelon::new(Rationals);
    for c in 0..space.dim() {
        let w = space.from_vector(&[(c, Rational::from_integer(1.into()))]);
        let v = target.to_vector(&w.euler_contract());
        if !v.is_empty() {
            e.insert(v);
        }
    }
    (space.dim(), e.rank())
}

#[test]
fn contraction_complex_is_exact() {
    for m in 1..=8 {
        let ranks: Vec<(usize, usize)> = (1..=NVARS).map(|l| contraction_rank(l, m)).collect();
        // onto the degree m part of the maximal ideal
        assert_eq!(ranks[0].1, monomial_basis(NVARS, m as u32).len(), "degree {m}");
        for l in 1..=NVARS {
            let (dim, rank) = ranks[l - 1];
            let incoming = if l < NVARS { ranks[l].1 } else { 0 };
            assert_eq!(dim - rank, incoming, "level {l}, degree {m}");
        }
    }
}
