//! Exact coefficient domains.

mod field;
pub mod linalg;
mod number_field;
mod padic;
mod prime_field;
mod rational;
mod wide_padic;

pub use field::{Field, PadicRing, PrimeField, Rationals};
pub use number_field::{nf_solve_linear, Irreducibility, NumberField, NumberFieldElement};
pub use padic::{padic_embed, padic_to_integer, TruncatedPadic};
pub use prime_field::{is_prime, PrimeFieldElement};
pub use rational::{parse_rational, rat, Rational};
pub use wide_padic::WidePadicRing;
