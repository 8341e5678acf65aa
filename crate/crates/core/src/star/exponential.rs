use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::star;
use crate::algebra::{QGFunction, QuadExponent, VarSpace};
use crate::error::{Error, Result};
use crate::models::ModelId;

/// Largest supported order of the ⋆-exponential series.
pub const MAX_SERIES_ORDER: usize = 16;

/// Distance kept from the first singularity of the closed forms.
const SINGULAR_MARGIN: f64 = 1e-6;

/// Taylor coefficients `(−i/ħ)^k/k! · H^{⋆k}`, `k = 0..=order`, of `Exp(−itH/ħ)`.
pub fn star_exp_series(h: &QGFunction, order: usize) -> Result<Vec<QGFunction>> {
    if !h.is_polynomial() {
        return Err(Error::InvalidParameter("series exponential needs a polynomial generator".into()));
    }
    if order > MAX_SERIES_ORDER {
        return Err(Error::InvalidParameter(format!(
            "series order {order} exceeds {MAX_SERIES_ORDER}"
        )));
    }
    let space = h.space();
    let step = C64::new(0.0, -1.0 / space.hbar());
    let mut out = vec![QGFunction::constant(space, C64::new(1.0, 0.0))];
    let mut power = out[0].clone();
    for k in 1..=order {
        power = star(h, &power)?;
        let coeff = step.powu(k as u32) / (1..=k).map(|j| j as f64).product::<f64>();
        out.push(power.scale(coeff));
    }
    Ok(out)
}

/// Closed form of `Exp(−itH/ħ)` for the oscillator and the damped toy model.
pub fn star_exp_closed(model: &ModelId, space: VarSpace, t: f64) -> Result<QGFunction> {
    model.check_space(space)?;
    let hbar = space.hbar();
    let (a_xx, a_xp, c) = match *model {
        ModelId::HarmonicOscillator { omega } => {
            let theta = omega * t / 2.0;
            if theta.abs() >= std::f64::consts::FRAC_PI_2 - SINGULAR_MARGIN {
                return Err(Error::EvolutionSingular(t));
            }
            // exp[−(i/ħ) tan θ (x² + p²)] / cos θ
            (C64::new(0.0, 2.0 * theta.tan() / hbar), C64::new(0.0, 0.0), -theta.cos().ln())
        }
        ModelId::DampedToy { gamma } => {
            let theta = gamma * t / 2.0;
            // exp[(2i/ħ) tanh θ · xp] / cosh θ
            (C64::new(0.0, 0.0), C64::new(0.0, -2.0 * theta.tanh() / hbar), -theta.cosh().ln())
        }
        ModelId::DampedHo { .. } => {
            return Err(Error::InvalidParameter(
                "closed-form star exponential is available for the oscillator and the damped toy model".into(),
            ))
        }
    };
    let a = DMatrix::from_row_slice(2, 2, &[a_xx, a_xp, a_xp, a_xx]);
    let expo = QuadExponent::new(a, DVector::zeros(2), C64::new(c, 0.0));
    Ok(QGFunction::gaussian(
        space,
        crate::algebra::Polynomial::one(2),
        expo,
    ))
}

/// `U(t) ⋆ f ⋆ U(−t)`.
pub fn evolve(f: &QGFunction, model: &ModelId, t: f64) -> Result<QGFunction> {
    let space = f.space();
    let forward = star_exp_closed(model, space, t)?;
    let backward = star_exp_closed(model, space, -t)?;
    star(&star(&forward, f)?, &backward)
}
