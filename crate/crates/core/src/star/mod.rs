//! Moyal star product on the Gaussian-polynomial class.

mod compose;
mod exponential;
mod oracle;
mod series;

pub use exponential::{evolve, star_exp_closed, star_exp_series, MAX_SERIES_ORDER};
pub use oracle::{quadrature_star_oracle, StarConfig};

use crate::algebra::QGFunction;
use crate::error::{Error, Result};

/// `f ⋆ g`.
///
/// A polynomial factor uses the terminating bidifferential series; two
/// Gaussian factors use the closed-form composition.
pub fn star(f: &QGFunction, g: &QGFunction) -> Result<QGFunction> {
    if f.space() != g.space() {
        return Err(Error::SpaceMismatch);
    }
    if f.is_zero() || g.is_zero() {
        return Ok(QGFunction::zero(f.space()));
    }
    if let Some(p) = f.as_polynomial() {
        return Ok(series::poly_left(&p, g));
    }
    if let Some(q) = g.as_polynomial() {
        return Ok(series::poly_right(f, &q));
    }
    compose::gaussian_star(f, g)
}

/// `f ⋆ g` through the closed-form composition even for polynomial factors.
pub fn star_closed_form(f: &QGFunction, g: &QGFunction) -> Result<QGFunction> {
    if f.space() != g.space() {
        return Err(Error::SpaceMismatch);
    }
    compose::gaussian_star(f, g)
}

/// `{f, g}_M = f⋆g − g⋆f`.
pub fn moyal_bracket(f: &QGFunction, g: &QGFunction) -> Result<QGFunction> {
    star(f, g)?.sub(&star(g, f)?)
}

/// `f ⋆ f ⋆ … ⋆ f` (`k` factors); `k = 0` gives the constant 1.
pub fn star_power(f: &QGFunction, k: u32) -> Result<QGFunction> {
    let mut acc = QGFunction::constant(f.space(), num_complex::Complex64::new(1.0, 0.0));
    for _ in 0..k {
        acc = star(&acc, f)?;
    }
    Ok(acc)
}
