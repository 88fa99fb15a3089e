//! Homogeneous polynomials, monomial enumeration and Jacobian-ideal division.

mod groebner;
mod monomial;
mod parse;
mod polynomial;

pub use groebner::{groebner_with_cofactors, GroebnerBasis};
pub use monomial::{binomial, grevlex_cmp, monomial_basis, Monomial, MonomialIndexer};
pub use parse::{parse_expression, parse_in_variables, SparsePoly};
pub use polynomial::{Coefficient, HomogeneousPolynomial, Poly};
