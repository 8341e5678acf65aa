//! Phase-space function algebra: polynomials times complex Gaussians.

mod exponent;
mod function;
pub(crate) mod integrate;
mod monomial;
mod polynomial;
mod serial;

pub use exponent::{QuadExponent, EXPONENT_TOL};
pub use function::{QGFunction, QGTerm, VarSpace, PRUNE_REL_TOL};
pub use monomial::Monomial;
pub(crate) use monomial::for_each_divisor as monomial_divisors;
pub use polynomial::Polynomial;
