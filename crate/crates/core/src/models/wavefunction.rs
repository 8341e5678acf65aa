//! Configuration-space functions and the two-state Wigner transform.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::integrate::{integrate_out, Branch};
use crate::algebra::{Polynomial, QGFunction, QGTerm, QuadExponent, VarSpace};
use crate::error::{Error, Result};

/// Smooth part `Σ P_k(x) e^{q_k(x)}` plus derivatives of `δ(x)` at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    dof: usize,
    smooth: Vec<(Polynomial, QuadExponent)>,
    /// `(multi-index k, coefficient c)` for `c·∂^k δ(x)`.
    atoms: Vec<(Vec<u16>, C64)>,
}

impl WaveFunction {
    pub fn zero(dof: usize) -> Self {
        WaveFunction {
            dof,
            smooth: vec![],
            atoms: vec![],
        }
    }

    pub fn smooth(poly: Polynomial, expo: QuadExponent) -> Result<Self> {
        if poly.nvars() != expo.dim() {
            return Err(Error::DimensionMismatch {
                expected: expo.dim(),
                got: poly.nvars(),
            });
        }
        Ok(WaveFunction {
            dof: expo.dim(),
            smooth: vec![(poly, expo)],
            atoms: vec![],
        })
    }

    pub fn polynomial(poly: Polynomial) -> Self {
        let n = poly.nvars();
        WaveFunction {
            dof: n,
            smooth: vec![(poly, QuadExponent::zero(n))],
            atoms: vec![],
        }
    }

    pub fn constant(dof: usize, c: C64) -> Self {
        Self::polynomial(Polynomial::constant(dof, c))
    }

    /// `c·∂^order δ(x)`.
    pub fn delta(order: &[u16], c: C64) -> Self {
        WaveFunction {
            dof: order.len(),
            smooth: vec![],
            atoms: vec![(order.to_vec(), c)],
        }
    }

    /// Normalized oscillator ground state `(πħ)^{−N/4} e^{−|x|²/2ħ}`.
    pub fn oscillator_ground(dof: usize, hbar: f64) -> Self {
        let a = DMatrix::from_diagonal_element(dof, dof, C64::new(1.0 / hbar, 0.0));
        let norm = (PI * hbar).powf(-(dof as f64) / 4.0);
        WaveFunction {
            dof,
            smooth: vec![(Polynomial::constant(dof, C64::new(norm, 0.0)), QuadExponent::quadratic(a))],
            atoms: vec![],
        }
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn add(mut self, other: WaveFunction) -> Result<Self> {
        if other.dof != self.dof {
            return Err(Error::DimensionMismatch {
                expected: self.dof,
                got: other.dof,
            });
        }
        self.smooth.extend(other.smooth);
        self.atoms.extend(other.atoms);
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.smooth.is_empty() && self.atoms.is_empty()
    }
}

/// Output scaling of [`wigner_pair_transform`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PairNormalization {
    /// `∫ dy e^{−ip·y} conj ψ₂(x − ħy/2) ψ₁(x + ħy/2)`.
    Raw,
    /// Raw times `(2π)^{−N}`; gives the Wigner function for `ψ₁ = ψ₂`.
    Wigner,
    /// Scaled so that the phase-space integral is 1.
    UnitIntegral,
    /// Raw times a fixed constant.
    Constant(C64),
}

/// Layout of the auxiliary variables `(x, p, y)`, each block of length N.
struct Layout {
    n: usize,
    hbar: f64,
}

impl Layout {
    fn total(&self) -> usize {
        3 * self.n
    }

    /// `ψ(x + s·ħy/2)` on `(x, p, y)`.
    fn shifted(&self, poly: &Polynomial, expo: &QuadExponent, s: f64) -> (Polynomial, QuadExponent) {
        let n = self.n;
        let mut map = DMatrix::zeros(n, self.total());
        for i in 0..n {
            map[(i, i)] = C64::new(1.0, 0.0);
            map[(i, 2 * n + i)] = C64::new(s * self.hbar / 2.0, 0.0);
        }
        let shift = DVector::zeros(n);
        (poly.compose_affine(&map, &shift), expo.compose_affine(&map, &shift))
    }

    /// `e^{−ip·y}`.
    fn fourier(&self) -> QuadExponent {
        let n = self.n;
        let mut a = DMatrix::zeros(self.total(), self.total());
        for i in 0..n {
            a[(n + i, 2 * n + i)] = C64::new(0.0, 1.0);
            a[(2 * n + i, n + i)] = C64::new(0.0, 1.0);
        }
        QuadExponent::quadratic(a)
    }

    /// Restriction `y = s·(2/ħ)x`, onto `(x, p)`.
    fn restrict(&self, s: f64) -> DMatrix<C64> {
        let n = self.n;
        let mut map = DMatrix::zeros(self.total(), 2 * n);
        for i in 0..2 * n {
            map[(i, i)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            map[(2 * n + i, i)] = C64::new(s * 2.0 / self.hbar, 0.0);
        }
        map
    }
}

fn smooth_smooth(
    lay: &Layout,
    ket: &(Polynomial, QuadExponent),
    bra: &(Polynomial, QuadExponent),
) -> Result<QGTerm> {
    let n = lay.n;
    let (p1, q1) = lay.shifted(&ket.0, &ket.1, 1.0);
    let (p2, q2) = lay.shifted(&bra.0.conj(), &bra.1.conj(), -1.0);
    let poly = &p1 * &p2;
    let expo = q1.add(&q2).add(&lay.fourier());
    let yy = expo.a().view((2 * n, 2 * n), (n, n)).into_owned();
    let herm = (&yy + yy.adjoint()).scale(0.5);
    let min = SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonIntegrable(
            "smooth pair does not decay along the difference variable".into(),
        ));
    }
    let mut mask = vec![false; 2 * n];
    mask.extend(std::iter::repeat_n(true, n));
    let (poly, expo) = integrate_out(&poly, &expo, &mask, &Branch::Principal)?;
    Ok(QGTerm { poly, expo })
}

/// Sifts `h(y)` against `c·∂^k δ` placed on the ket (`s = −1`) or bra
/// (`s = +1`) side.
fn sift(lay: &Layout, h: QGTerm, order: &[u16], c: C64, s: f64) -> QGTerm {
    let mut t = h;
    for (i, &k) in order.iter().enumerate() {
        for _ in 0..k {
            t = t.derivative(2 * lay.n + i);
        }
    }
    let k: u32 = order.iter().map(|&v| v as u32).sum();
    let mut factor = (2.0 / lay.hbar).powi((lay.n as u32 + k) as i32);
    if s < 0.0 && k % 2 == 1 {
        factor = -factor;
    }
    let map = lay.restrict(s);
    let shift = DVector::zeros(lay.total());
    QGTerm {
        poly: t.poly.compose_affine(&map, &shift).scale(c * factor),
        expo: t.expo.compose_affine(&map, &shift),
    }
}

/// `∫ dy e^{−ip·y} conj ψ₂(x − ħy/2) ψ₁(x + ħy/2)`, the phase-space symbol of
/// `|ψ₁⟩⟨ψ₂|` up to the chosen normalization.
pub fn wigner_pair_transform(
    psi1: &WaveFunction,
    psi2: &WaveFunction,
    space: VarSpace,
    norm: PairNormalization,
) -> Result<QGFunction> {
    let n = space.dof();
    if psi1.dof != n || psi2.dof != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if psi1.dof != n { psi1.dof } else { psi2.dof },
        });
    }
    if n > 2 {
        return Err(Error::InvalidParameter("pair transform supports at most two degrees of freedom".into()));
    }
    let lay = Layout { n, hbar: space.hbar() };
    let mut terms = Vec::new();
    for ket in &psi1.smooth {
        for bra in &psi2.smooth {
            terms.push(smooth_smooth(&lay, ket, bra)?);
        }
        for (order, c) in &psi2.atoms {
            let (p, q) = lay.shifted(&ket.0, &ket.1, 1.0);
            let h = QGTerm {
                poly: p,
                expo: q.add(&lay.fourier()),
            };
            terms.push(sift(&lay, h, order, c.conj(), 1.0));
        }
    }
    for (order, c) in &psi1.atoms {
        for bra in &psi2.smooth {
            let (p, q) = lay.shifted(&bra.0.conj(), &bra.1.conj(), -1.0);
            let h = QGTerm {
                poly: p,
                expo: q.add(&lay.fourier()),
            };
            terms.push(sift(&lay, h, order, *c, -1.0));
        }
        if !psi2.atoms.is_empty() {
            return Err(Error::UnsupportedPair(
                "both states carry delta atoms at the origin".into(),
            ));
        }
    }
    let raw = QGFunction::new(space, terms)?;
    match norm {
        PairNormalization::Raw => Ok(raw),
        PairNormalization::Wigner => Ok(raw.scale_real((2.0 * PI).powi(-(n as i32)))),
        PairNormalization::Constant(c) => Ok(raw.scale(c)),
        PairNormalization::UnitIntegral => {
            let total = raw.gaussian_integral()?;
            if total.norm() == 0.0 {
                return Err(Error::NonIntegrable("transform has zero integral".into()));
            }
            Ok(raw.scale(total.inv()))
        }
    }
}
