use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{QGFunction, VarSpace};
use crate::error::{Error, Result};

fn one_dof(space: VarSpace) -> Result<()> {
    if space.dof() == 1 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2,
            got: space.dim(),
        })
    }
}

/// `V_λ ⋆ f ⋆ V_{−λ}` with `V_λ = Exp(λXP/ħ)`, realized as the substitution
/// `(X, P) → (e^{−iλ}X, e^{iλ}P)`.
pub fn conjugation_by_v(f: &QGFunction, lambda: f64) -> Result<QGFunction> {
    one_dof(f.space())?;
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
        C64::from_polar(1.0, -lambda),
        C64::from_polar(1.0, lambda),
    ]));
    f.substitute_linear(&m, &DVector::zeros(2))
}

/// Pulls a function of `(X, P)` back to `(x, p)` through
/// `X = (x + p)/√2`, `P = (x − p)/√2`.
pub fn light_cone_pullback(f: &QGFunction) -> Result<QGFunction> {
    one_dof(f.space())?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
    );
    f.substitute_linear(&m, &DVector::zeros(2))
}
