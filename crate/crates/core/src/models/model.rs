use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Monomial, Polynomial, QGFunction, VarSpace};
use crate::error::{Error, Result};

/// The three model systems with their (positive) parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelId {
    HarmonicOscillator { omega: f64 },
    DampedToy { gamma: f64 },
    DampedHo { omega: f64, gamma: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl ModelId {
    pub fn harmonic_oscillator(omega: f64) -> Result<Self> {
        Ok(ModelId::HarmonicOscillator {
            omega: positive("omega", omega)?,
        })
    }

    pub fn damped_toy(gamma: f64) -> Result<Self> {
        Ok(ModelId::DampedToy {
            gamma: positive("gamma", gamma)?,
        })
    }

    pub fn damped_ho(omega: f64, gamma: f64) -> Result<Self> {
        Ok(ModelId::DampedHo {
            omega: positive("omega", omega)?,
            gamma: positive("gamma", gamma)?,
        })
    }

    /// Degrees of freedom of the model's phase space.
    pub fn dof(&self) -> usize {
        match self {
            ModelId::DampedHo { .. } => 2,
            _ => 1,
        }
    }

    /// `α = ω − iγ` of the damped oscillator.
    pub fn alpha(&self) -> Option<C64> {
        match *self {
            ModelId::DampedHo { omega, gamma } => Some(C64::new(omega, -gamma)),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelId::HarmonicOscillator { .. } => "harmonic_oscillator",
            ModelId::DampedToy { .. } => "damped_toy",
            ModelId::DampedHo { .. } => "damped_ho",
        }
    }

    pub(crate) fn check_space(&self, space: VarSpace) -> Result<()> {
        if space.dof() == self.dof() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: 2 * self.dof(),
                got: space.dim(),
            })
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::HarmonicOscillator { omega } => write!(f, "harmonic_oscillator(omega={omega})"),
            ModelId::DampedToy { gamma } => write!(f, "damped_toy(gamma={gamma})"),
            ModelId::DampedHo { omega, gamma } => write!(f, "damped_ho(omega={omega}, gamma={gamma})"),
        }
    }
}

fn r(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Phase-space Hamiltonian of `model` as a polynomial.
pub fn hamiltonian(model: &ModelId, space: VarSpace) -> Result<QGFunction> {
    model.check_space(space)?;
    let d = space.dim();
    let poly = match *model {
        ModelId::HarmonicOscillator { omega } => Polynomial::from_terms(
            d,
            [
                (Monomial::new(&[2, 0]), r(omega / 2.0)),
                (Monomial::new(&[0, 2]), r(omega / 2.0)),
            ],
        ),
        ModelId::DampedToy { gamma } => Polynomial::monomial(&[1, 1], r(-gamma)),
        ModelId::DampedHo { omega, gamma } => {
            // variables (x1, x2, p1, p2)
            Polynomial::from_terms(
                d,
                [
                    (Monomial::new(&[0, 1, 1, 0]), r(omega)),
                    (Monomial::new(&[1, 0, 0, 1]), r(-omega)),
                    (Monomial::new(&[1, 0, 1, 0]), r(-gamma)),
                    (Monomial::new(&[0, 1, 0, 1]), r(-gamma)),
                ],
            )
        }
    };
    Ok(QGFunction::from_poly(space, poly))
}

/// `H(x, p) = Σ_k p_k X_k(x)` for a polynomial vector field on the
/// configuration variables. Each component is a polynomial in `N` variables.
pub fn lift_dynamics(field: &[Polynomial], space: VarSpace) -> Result<QGFunction> {
    let n = space.dof();
    if field.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: field.len(),
        });
    }
    let d = space.dim();
    let xs: Vec<usize> = (0..n).collect();
    let mut acc = Polynomial::zero(d);
    for (k, comp) in field.iter().enumerate() {
        if comp.nvars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: comp.nvars(),
            });
        }
        let lifted = comp.embed(d, &xs);
        acc.add_assign(&(&Polynomial::var(d, space.p_index(k)) * &lifted));
    }
    Ok(QGFunction::from_poly(space, acc))
}

/// Koopman generator `L_H f = i{f, H}`.
pub fn koopman_apply(h: &QGFunction, f: &QGFunction) -> Result<QGFunction> {
    Ok(f.poisson_bracket(h)?.scale(C64::new(0.0, 1.0)))
}
