use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::families::{dho_f, dho_g, oscillator_wigner, toy_resonant, Sign};
use super::model::ModelId;
use crate::algebra::{QGFunction, VarSpace};
use crate::error::{Error, Result};

/// Quantum numbers of a family member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Quanta {
    /// Oscillator `W_n` or toy-model `F±_n`.
    Single { n: usize },
    /// Damped-oscillator resonant family `F±_nm`.
    F { n: usize, m: usize },
    /// Damped-oscillator family `G_nm`.
    G { n: usize, m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub model: ModelId,
    pub quanta: Quanta,
    pub sign: Option<Sign>,
    pub eigenvalue: C64,
}

fn mismatch(model: &ModelId, quanta: Quanta, sign: Option<Sign>) -> Error {
    Error::InvalidIndex(format!(
        "{quanta:?} with sign {:?} is not a level of {}",
        sign.map(Sign::symbol),
        model.name()
    ))
}

/// Eigenvalue attached to a family member.
pub fn spectrum(model: &ModelId, hbar: f64, quanta: Quanta, sign: Option<Sign>) -> Result<SpectrumEntry> {
    let half = |n: usize| n as f64 + 0.5;
    let eigenvalue = match (*model, quanta, sign) {
        (ModelId::HarmonicOscillator { omega }, Quanta::Single { n }, None) => C64::new(hbar * omega * half(n), 0.0),
        (ModelId::DampedToy { gamma }, Quanta::Single { n }, Some(s)) => {
            let e = C64::new(0.0, hbar * gamma * half(n));
            match s {
                Sign::Plus => e,
                Sign::Minus => e.conj(),
            }
        }
        (ModelId::DampedHo { omega, gamma }, Quanta::F { n, m }, Some(s)) => {
            let e = C64::new(
                hbar * omega * (m as f64 - n as f64),
                -hbar * gamma * (n + m + 1) as f64,
            );
            match s {
                Sign::Plus => e,
                Sign::Minus => e.conj(),
            }
        }
        (ModelId::DampedHo { omega, gamma }, Quanta::G { n, m }, None) => C64::new(
            hbar * omega * (n + m + 1) as f64,
            -hbar * gamma * (n as f64 - m as f64),
        ),
        _ => return Err(mismatch(model, quanta, sign)),
    };
    Ok(SpectrumEntry {
        model: *model,
        quanta,
        sign,
        eigenvalue,
    })
}

/// The family member labelled by `(quanta, sign)`.
pub fn eigenfunction(model: &ModelId, space: VarSpace, quanta: Quanta, sign: Option<Sign>) -> Result<QGFunction> {
    model.check_space(space)?;
    match (*model, quanta, sign) {
        (ModelId::HarmonicOscillator { .. }, Quanta::Single { n }, None) => oscillator_wigner(n, space),
        (ModelId::DampedToy { .. }, Quanta::Single { n }, Some(s)) => toy_resonant(n, s, space),
        (ModelId::DampedHo { .. }, Quanta::F { n, m }, Some(s)) => dho_f(n, m, s, space),
        (ModelId::DampedHo { .. }, Quanta::G { n, m }, None) => dho_g(n, m, space),
        _ => Err(mismatch(model, quanta, sign)),
    }
}
