//! Eigenfunction families: oscillator Wigner functions, resonant states of
//! the damped toy model and both families of the damped oscillator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::laguerre::laguerre_coeffs;
use crate::algebra::{Monomial, Polynomial, QGFunction, QuadExponent, VarSpace};
use crate::error::{Error, Result};
use crate::star::star;

/// Largest index accepted by the one-dimensional families.
pub const MAX_INDEX_1D: usize = 12;
/// Largest index accepted by the damped-oscillator families.
pub const MAX_INDEX_2D: usize = 6;

/// Branch of a resonant pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_dof(space: VarSpace, dof: usize) -> Result<()> {
    if space.dof() == dof {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2 * dof,
            got: space.dim(),
        })
    }
}

fn check_index(n: usize, max: usize) -> Result<()> {
    if n <= max {
        Ok(())
    } else {
        Err(Error::InvalidIndex(format!("index {n} exceeds the supported maximum {max}")))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Ladder generators of the oscillator and of the damped oscillator.
#[derive(Clone, Debug)]
pub struct LadderSet {
    pub space: VarSpace,
    /// `(name, generator)` pairs, e.g. `("a", …)`, `("a*", …)`.
    pub generators: Vec<(&'static str, QGFunction)>,
}

impl LadderSet {
    pub fn get(&self, name: &str) -> Option<&QGFunction> {
        self.generators.iter().find(|(n, _)| *n == name).map(|(_, g)| g)
    }

    /// `a = (x + ip)/√(2ħ)`, `a* = (x − ip)/√(2ħ)`.
    pub fn oscillator(space: VarSpace) -> Result<Self> {
        check_dof(space, 1)?;
        let s = 1.0 / (2.0 * space.hbar()).sqrt();
        let a = Polynomial::linear(c(0.0, 0.0), &[c(s, 0.0), c(0.0, s)]);
        let a_star = a.conj();
        Ok(LadderSet {
            space,
            generators: vec![
                ("a", QGFunction::from_poly(space, a)),
                ("a*", QGFunction::from_poly(space, a_star)),
            ],
        })
    }

    /// `a₁ = (x₁ + ix₂)/√(2ħ)`, `a₂ = (ip₁ − p₂)/√(2ħ)` and their conjugates.
    pub fn damped_ho(space: VarSpace) -> Result<Self> {
        check_dof(space, 2)?;
        let s = 1.0 / (2.0 * space.hbar()).sqrt();
        let z = c(0.0, 0.0);
        let a1 = Polynomial::linear(z, &[c(s, 0.0), c(0.0, s), z, z]);
        let a2 = Polynomial::linear(z, &[z, z, c(0.0, s), c(-s, 0.0)]);
        Ok(LadderSet {
            space,
            generators: vec![
                ("a1", QGFunction::from_poly(space, a1.clone())),
                ("a2", QGFunction::from_poly(space, a2.clone())),
                ("a1*", QGFunction::from_poly(space, a1.conj())),
                ("a2*", QGFunction::from_poly(space, a2.conj())),
            ],
        })
    }

    fn gen(&self, name: &str) -> &QGFunction {
        self.get(name).expect("generator is part of the set")
    }
}

/// `g ⋆ g ⋆ … ⋆ f` (`k` factors of `g` on the left).
fn left_power(g: &QGFunction, k: usize, f: QGFunction) -> Result<QGFunction> {
    (0..k).try_fold(f, |acc, _| star(g, &acc))
}

/// `f ⋆ g ⋆ … ⋆ g` (`k` factors of `g` on the right).
fn right_power(f: QGFunction, g: &QGFunction, k: usize) -> Result<QGFunction> {
    (0..k).try_fold(f, |acc, _| star(&acc, g))
}

/// `((−1)ⁿ/πħ) e^{−ξ/2} L_n(ξ)`, `ξ = 2(x² + p²)/ħ`.
pub fn oscillator_wigner(n: usize, space: VarSpace) -> Result<QGFunction> {
    check_dof(space, 1)?;
    check_index(n, MAX_INDEX_1D)?;
    let h = space.hbar();
    let xi = Polynomial::from_terms(
        2,
        [
            (Monomial::new(&[2, 0]), c(2.0 / h, 0.0)),
            (Monomial::new(&[0, 2]), c(2.0 / h, 0.0)),
        ],
    );
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let coeffs: Vec<C64> = laguerre_coeffs(n).iter().map(|&v| c(v * sign / (PI * h), 0.0)).collect();
    let poly = Polynomial::compose_univariate(&coeffs, &xi);
    let a = DMatrix::from_diagonal_element(2, 2, c(2.0 / h, 0.0));
    Ok(QGFunction::gaussian(space, poly, QuadExponent::quadratic(a)))
}

/// `(1/n!) a*ⁿ ⋆ W₀ ⋆ aⁿ`.
pub fn oscillator_wigner_ladder(n: usize, space: VarSpace) -> Result<QGFunction> {
    check_index(n, MAX_INDEX_1D)?;
    let ladders = LadderSet::oscillator(space)?;
    let w0 = oscillator_wigner(0, space)?;
    let left = left_power(ladders.gen("a*"), n, w0)?;
    Ok(right_power(left, ladders.gen("a"), n)?.scale_real(1.0 / factorial(n)))
}

/// `(1/πħ) e^{∓2ixp/ħ}`.
fn toy_ground(sign: Sign, space: VarSpace) -> QGFunction {
    let h = space.hbar();
    let k = match sign {
        Sign::Plus => 2.0 / h,
        Sign::Minus => -2.0 / h,
    };
    let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, k), c(0.0, k), c(0.0, 0.0)]);
    QGFunction::gaussian(
        space,
        Polynomial::constant(2, c(1.0 / (PI * h), 0.0)),
        QuadExponent::quadratic(a),
    )
}

/// Closed form `C_n e^{−η/2} L_n(η)`, `C_n = (−1)ⁿ/πħ`, with `η = 4ixp/ħ`
/// for the `+` branch and its conjugate for `−`.
pub fn toy_resonant(n: usize, sign: Sign, space: VarSpace) -> Result<QGFunction> {
    check_dof(space, 1)?;
    check_index(n, MAX_INDEX_1D)?;
    let h = space.hbar();
    let eta_coeff = match sign {
        Sign::Plus => c(0.0, 4.0 / h),
        Sign::Minus => c(0.0, -4.0 / h),
    };
    let eta = Polynomial::monomial(&[1, 1], eta_coeff);
    let s = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let coeffs: Vec<C64> = laguerre_coeffs(n).iter().map(|&v| c(v * s / (PI * h), 0.0)).collect();
    let poly = Polynomial::compose_univariate(&coeffs, &eta);
    let ground = toy_ground(sign, space);
    let expo = ground.terms()[0].expo.clone();
    Ok(QGFunction::gaussian(space, poly, expo))
}

/// `((i/ħ)ⁿ/n!) xⁿ ⋆ F⁺₀ ⋆ pⁿ` and, for `−`, `((−i/ħ)ⁿ/n!) pⁿ ⋆ F⁻₀ ⋆ xⁿ`.
pub fn toy_resonant_ladder(n: usize, sign: Sign, space: VarSpace) -> Result<QGFunction> {
    check_dof(space, 1)?;
    check_index(n, MAX_INDEX_1D)?;
    let (x, p) = (QGFunction::x(space, 0), QGFunction::p(space, 0));
    let (left, right, unit) = match sign {
        Sign::Plus => (x, p, c(0.0, 1.0 / space.hbar())),
        Sign::Minus => (p, x, c(0.0, -1.0 / space.hbar())),
    };
    let built = right_power(left_power(&left, n, toy_ground(sign, space))?, &right, n)?;
    Ok(built.scale(unit.powu(n as u32) / factorial(n)))
}

/// Unnormalized ground state `e^{(2i/ħ)(x₁p₁ + x₂p₂)}` (conjugate for `−`).
fn dho_ground(sign: Sign, space: VarSpace) -> QGFunction {
    let h = space.hbar();
    let k = match sign {
        Sign::Plus => -2.0 / h,
        Sign::Minus => 2.0 / h,
    };
    let mut a = DMatrix::zeros(4, 4);
    for j in 0..2 {
        a[(j, 2 + j)] = c(0.0, k);
        a[(2 + j, j)] = c(0.0, k);
    }
    QGFunction::gaussian(space, Polynomial::one(4), QuadExponent::quadratic(a))
}

/// `F±_nm`: `a₂ⁿ ⋆ (a₂*)^m ⋆ F⁺₀₀ ⋆ a₁^m ⋆ (a₁*)ⁿ` for `+`, the conjugate
/// for `−`, scaled to unit integral.
pub fn dho_f(n: usize, m: usize, sign: Sign, space: VarSpace) -> Result<QGFunction> {
    check_dof(space, 2)?;
    check_index(n, MAX_INDEX_2D)?;
    check_index(m, MAX_INDEX_2D)?;
    let l = LadderSet::damped_ho(space)?;
    let mut f = dho_ground(Sign::Plus, space);
    f = left_power(l.gen("a2*"), m, f)?;
    f = left_power(l.gen("a2"), n, f)?;
    f = right_power(f, l.gen("a1"), m)?;
    f = right_power(f, l.gen("a1*"), n)?;
    let total = f.gaussian_integral()?;
    if total.norm() == 0.0 {
        return Err(Error::NonIntegrable("ladder state has zero integral".into()));
    }
    let plus = f.scale(total.inv());
    Ok(match sign {
        Sign::Plus => plus,
        Sign::Minus => plus.conjugate(),
    })
}

/// `G₀₀ = e^{(2/ħ)(x₁p₂ − x₂p₁)}`.
fn dho_g_ground(space: VarSpace) -> QGFunction {
    let k = 2.0 / space.hbar();
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 3)] = c(-k, 0.0);
    a[(3, 0)] = c(-k, 0.0);
    a[(1, 2)] = c(k, 0.0);
    a[(2, 1)] = c(k, 0.0);
    QGFunction::gaussian(
        space,
        Polynomial::one(4),
        QuadExponent::new(a, DVector::zeros(4), c(0.0, 0.0)),
    )
}

/// `G_nm = (a₂*)ⁿ ⋆ (a₁*)^m ⋆ G₀₀ ⋆ a₂^m ⋆ a₁ⁿ` (unnormalized; not integrable).
pub fn dho_g(n: usize, m: usize, space: VarSpace) -> Result<QGFunction> {
    check_dof(space, 2)?;
    check_index(n, MAX_INDEX_2D)?;
    check_index(m, MAX_INDEX_2D)?;
    let l = LadderSet::damped_ho(space)?;
    let mut f = dho_g_ground(space);
    f = left_power(l.gen("a1*"), m, f)?;
    f = left_power(l.gen("a2*"), n, f)?;
    f = right_power(f, l.gen("a2"), m)?;
    right_power(f, l.gen("a1"), n)
}
