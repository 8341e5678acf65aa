//! Moyal star product engine on polynomial × complex-Gaussian phase-space
//! functions, with Wigner-type eigenfunction families for the harmonic
//! oscillator and two damped systems.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod models;
pub mod star;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
