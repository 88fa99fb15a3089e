//! Buchberger's algorithm under grevlex, carrying each basis element's expression in
//! terms of the original generators.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{grevlex_cmp, monomial_basis, HomogeneousPolynomial, Monomial, Poly};
use crate::arith::Rational;

#[derive(Clone, PartialEq, Eq)]
struct Grevlex(Monomial);

impl PartialOrd for Grevlex {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Grevlex {
    fn cmp(&self, o: &Self) -> Ordering {
        grevlex_cmp(&self.0, &o.0)
    }
}

/// Terms sorted by decreasing grevlex order; the first is the leading term.
type Terms = Vec<(Monomial, Rational)>;

#[derive(Clone, Debug)]
struct Element {
    terms: Terms,
    cofactors: Vec<Poly>,
}

impl Element {
    fn lead(&self) -> &Monomial {
        &self.terms[0].0
    }
}

/// Auto-reduced Gröbner basis with cofactors over the original generators.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    nvars: usize,
    generators: Vec<Poly>,
    elements: Vec<Element>,
}

type Quotients = Vec<BTreeMap<Monomial, Rational>>;

fn reduce(
    elements: &[Element],
    active: &[usize],
    input: impl IntoIterator<Item = (Monomial, Rational)>,
) -> (Quotients, Terms) {
    let mut work: BTreeMap<Grevlex, Rational> = BTreeMap::new();
    for (m, c) in input {
        if !c.is_zero() {
            *work.entry(Grevlex(m)).or_insert_with(Rational::zero) += c;
        }
    }
    work.retain(|_, c| !c.is_zero());
    let mut quotients: Quotients = vec![BTreeMap::new(); elements.len()];
    let mut remainder = Terms::new();
    while let Some((Grevlex(m), c)) = work.pop_last() {
        match active.iter().find(|&&j| elements[j].lead().divides(&m)) {
            Some(&j) => {
                let u = m.div(elements[j].lead());
                for (t, d) in &elements[j].terms[1..] {
                    let key = Grevlex(u.mul(t));
                    let e = work.entry(key.clone()).or_insert_with(Rational::zero);
                    *e -= &c * d;
                    if e.is_zero() {
                        work.remove(&key);
                    }
                }
                *quotients[j].entry(u).or_insert_with(Rational::zero) += c;
            }
            None => remainder.push((m, c)),
        }
    }
    (quotients, remainder)
}

fn combine_cofactors(
    nvars: usize,
    ngens: usize,
    degree: i32,
    elements: &[Element],
    quotients: &Quotients,
) -> Vec<Poly> {
    let mut out = vec![Poly::zero(nvars, degree); ngens];
    for (j, q) in quotients.iter().enumerate() {
        for (u, c) in q {
            if c.is_zero() {
                continue;
            }
            for (i, cof) in elements[j].cofactors.iter().enumerate() {
                if !cof.is_zero() {
                    out[i] = out[i].add(&cof.mul_monomial(u, c));
                }
            }
        }
    }
    out
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Gebauer–Möller pair update after adding element `h`.
fn update(elements: &[Element], active: &mut Vec<usize>, pairs: &mut Vec<Pair>, h: usize) {
    let lh = elements[h].lead().clone();
    let mut candidates: Vec<Pair> = active
        .iter()
        .map(|&g| Pair {
            i: g,
            j: h,
            lcm: lh.lcm(elements[g].lead()),
        })
        .collect();
    let mut kept: Vec<Pair> = Vec::new();
    while let Some(c) = candidates.pop() {
        let coprime = lh.is_coprime(elements[c.i].lead());
        let dominated = candidates
            .iter()
            .chain(kept.iter())
            .any(|o| o.lcm.divides(&c.lcm));
        if coprime || !dominated {
            kept.push(c);
        }
    }
    kept.retain(|c| !lh.is_coprime(elements[c.i].lead()));
    pairs.retain(|p| {
        !(lh.divides(&p.lcm)
            && lh.lcm(elements[p.i].lead()) != p.lcm
            && lh.lcm(elements[p.j].lead()) != p.lcm)
    });
    pairs.extend(kept);
    active.retain(|&g| !lh.divides(elements[g].lead()));
    active.push(h);
}

fn to_terms(p: &Poly) -> Terms {
    let mut t: Terms = p.terms().iter().map(|(m, c)| (m.clone(), c.clone())).collect();
    t.sort_by(|a, b| grevlex_cmp(&b.0, &a.0));
    t
}

fn terms_to_poly(nvars: usize, degree: i32, terms: &Terms) -> Poly {
    HomogeneousPolynomial::from_terms(nvars, degree, terms.iter().cloned()).expect("homogeneous")
}

/// Grevlex Gröbner basis of the ideal generated by `generators`, with cofactors.
pub fn groebner_with_cofactors(generators: &[Poly]) -> GroebnerBasis {
    let nvars = generators.first().map_or(0, Poly::nvars);
    let ngens = generators.len();
    // all generators share one degree (partial derivatives of a form)
    let gen_deg = generators.iter().find(|g| !g.is_zero()).map_or(0, Poly::degree);
    let mut elements: Vec<Element> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();

    let add = |elements: &mut Vec<Element>,
                   active: &mut Vec<usize>,
                   pairs: &mut Vec<Pair>,
                   mut terms: Terms,
                   mut cofactors: Vec<Poly>| {
        let inv = terms[0].1.recip();
        for t in terms.iter_mut() {
            t.1 *= &inv;
        }
        for c in cofactors.iter_mut() {
            *c = c.scale(&inv);
        }
        elements.push(Element { terms, cofactors });
        let h = elements.len() - 1;
        update(elements, active, pairs, h);
    };

    for (i, g) in generators.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let (q, rem) = reduce(&elements, &active, to_terms(g));
        if rem.is_empty() {
            continue;
        }
        let mut cof = combine_cofactors(nvars, ngens, 0, &elements, &q);
        // remainder = g − Σ q_j b_j
        let mut own = vec![Poly::zero(nvars, 0); ngens];
        own[i] = Poly::constant(nvars, Rational::one());
        for (k, c) in cof.iter_mut().enumerate() {
            *c = own[k].sub(c);
        }
        add(&mut elements, &mut active, &mut pairs, rem, cof);
    }

    while !pairs.is_empty() {
        let pos = (0..pairs.len())
            .min_by(|&a, &b| grevlex_cmp(&pairs[a].lcm, &pairs[b].lcm))
            .unwrap();
        let Pair { i, j, lcm } = pairs.swap_remove(pos);
        let ui = lcm.div(elements[i].lead());
        let uj = lcm.div(elements[j].lead());
        let spoly = elements[i].terms[1..]
            .iter()
            .map(|(m, c)| (m.mul(&ui), c.clone()))
            .chain(elements[j].terms[1..].iter().map(|(m, c)| (m.mul(&uj), -c)));
        let (q, rem) = reduce(&elements, &active, spoly);
        if rem.is_empty() {
            continue;
        }
        let reduced = combine_cofactors(nvars, ngens, lcm.degree() as i32 - gen_deg, &elements, &q);
        let cof: Vec<Poly> = (0..ngens)
            .map(|k| {
                let a = elements[i].cofactors[k].mul_monomial(&ui, &Rational::one());
                let b = elements[j].cofactors[k].mul_monomial(&uj, &Rational::one());
                a.sub(&b).sub(&reduced[k])
            })
            .collect();
        add(&mut elements, &mut active, &mut pairs, rem, cof);
    }

    // final auto-reduction of the active elements
    active.sort_by(|&a, &b| grevlex_cmp(elements[a].lead(), elements[b].lead()));
    let mut final_elems: Vec<Element> = active.iter().map(|&a| elements[a].clone()).collect();
    let idx: Vec<usize> = (0..final_elems.len()).collect();
    for k in 0..final_elems.len() {
        let lead = final_elems[k].terms[0].clone();
        let tail = final_elems[k].terms[1..].to_vec();
        let others: Vec<usize> = idx.iter().copied().filter(|&o| o != k).collect();
        let (q, rem) = reduce(&final_elems, &others, tail);
        let sub = combine_cofactors(nvars, ngens, lead.0.degree() as i32 - gen_deg, &final_elems, &q);
        let mut terms = vec![lead];
        terms.extend(rem);
        let cofactors = final_elems[k]
            .cofactors
            .iter()
            .zip(&sub)
            .map(|(c, s)| c.sub(s))
            .collect();
        final_elems[k] = Element { terms, cofactors };
    }

    GroebnerBasis {
        nvars,
        generators: generators.to_vec(),
        elements: final_elems,
    }
}

impl GroebnerBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Basis elements, monic, in increasing order of leading monomial.
    pub fn basis(&self) -> Vec<Poly> {
        self.elements
            .iter()
            .map(|e| terms_to_poly(self.nvars, e.lead().degree() as i32, &e.terms))
            .collect()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements.iter().map(|e| e.lead().clone()).collect()
    }

    /// Terms of element j, leading term first (leading coefficient 1).
    pub fn element_terms(&self, j: usize) -> &[(Monomial, Rational)] {
        &self.elements[j].terms
    }

    /// Cofactors of element j over the original generators.
    pub fn cofactors(&self, j: usize) -> &[Poly] {
        &self.elements[j].cofactors
    }

    /// g = Σ cofactor_i · generator_i + remainder with the remainder fully reduced.
    pub fn divide_with_cofactors(&self, g: &Poly) -> (Vec<Poly>, Poly) {
        let all: Vec<usize> = (0..self.elements.len()).collect();
        let (q, rem) = reduce(&self.elements, &all, to_terms(g));
        let gen_deg = self.generators.iter().find(|g| !g.is_zero()).map_or(0, Poly::degree);
        let cof = combine_cofactors(
            self.nvars,
            self.generators.len(),
            g.degree() - gen_deg,
            &self.elements,
            &q,
        );
        (cof, terms_to_poly(self.nvars, g.degree(), &rem))
    }

    pub fn normal_form(&self, g: &Poly) -> Poly {
        let all: Vec<usize> = (0..self.elements.len()).collect();
        let (_, rem) = reduce(&self.elements, &all, to_terms(g));
        terms_to_poly(self.nvars, g.degree(), &rem)
    }

    pub fn contains(&self, g: &Poly) -> bool {
        self.normal_form(g).is_zero()
    }

    pub fn is_standard(&self, m: &Monomial) -> bool {
        !self.elements.iter().any(|e| e.lead().divides(m))
    }

    /// Monomials of degree d outside the leading ideal, in [`monomial_basis`] order.
    pub fn standard_monomials(&self, d: u32) -> Vec<Monomial> {
        monomial_basis(self.nvars, d)
            .into_iter()
            .filter(|m| self.is_standard(m))
            .collect()
    }

    /// dim (S/I)_d.
    pub fn quotient_dim(&self, d: u32) -> usize {
        self.standard_monomials(d).len()
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

    fn cayley() -> Poly {
        p("x0*x1*x2 + x0*x1*x3 + x0*x2*x3 + x1*x2*x3")
    }

    fn check_cofactors(gb: &GroebnerBasis) {
        for (j, b) in gb.basis().iter().enumerate() {
            let mut acc = Poly::zero(b.nvars(), b.degree());
            for (c, g) in gb.cofactors(j).iter().zip(gb.generators()) {
                acc = acc.add(&c.mul(g));
            }
            assert_eq!(&acc, b, "cofactors of element {j}");
        }
    }

    fn check_spolys(gb: &GroebnerBasis) {
        let basis = gb.basis();
        let leads = gb.leading_monomials();
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let l = leads[i].lcm(&leads[j]);
                let s = basis[i]
                    .mul_monomial(&l.div(&leads[i]), &rat(1, 1))
                    .sub(&basis[j].mul_monomial(&l.div(&leads[j]), &rat(1, 1)));
                assert!(gb.contains(&s));
            }
        }
    }

    #[test]
    fn single_generator() {
        let gb = groebner_with_cofactors(&[p("x0")]);
        assert_eq!(gb.basis(), vec![p("x0")]);
        assert_eq!(gb.cofactors(0), &[p("1")]);
    }

    #[test]
    fn cayley_jacobian() {
        let f = cayley();
        let gb = groebner_with_cofactors(&f.gradient());
        check_cofactors(&gb);
        check_spolys(&gb);
        let dims: Vec<usize> = (0..7).map(|d| gb.quotient_dim(d)).collect();
        assert_eq!(dims, vec![1, 4, 6, 4, 4, 4, 4]);
    }

    #[test]
    fn fermat_is_its_own_basis() {
        let f = p("x0^3 + x1^3 + x2^3 + x3^3");
        let gb = groebner_with_cofactors(&f.gradient());
        assert_eq!(gb.basis(), vec![p("x3^2"), p("x2^2"), p("x1^2"), p("x0^2")]);
    }

    #[test]
    fn euler_division() {
        let f = cayley();
        let gb = groebner_with_cofactors(&f.gradient());
        let (cof, rem) = gb.divide_with_cofactors(&f);
        assert!(rem.is_zero());
        let mut acc = Poly::zero(4, 3);
        for (c, g) in cof.iter().zip(gb.generators()) {
            acc = acc.add(&c.mul(g));
        }
        assert_eq!(acc, f);
        let m = p("x0^9*x1^9*x2^4*x3^4");
        let (cof, rem) = gb.divide_with_cofactors(&m);
        assert!(rem.is_zero());
        assert!(cof.iter().all(|c| c.degree() == 24));
        assert!(!gb.divide_with_cofactors(&p("x0*x1")).1.is_zero());
    }

    #[test]
    fn kummer_jacobian() {
        let f = p("x0^4 + x1^4 + 12*x2^4 + 27*x3^4 + x0^2*(46*x1^2 - 20*x2^2 - 44*x2*x3 - 30*x3^2) - x1^2*(20*x2^2 - 44*x2*x3 + 30*x3^2) - 30*x2^2*x3^2");
        let gb = groebner_with_cofactors(&f.gradient());
        check_cofactors(&gb);
        check_spolys(&gb);
        assert_eq!(gb.quotient_dim(12), 16);
        assert_eq!(gb.quotient_dim(13), 16);
    }
}
