//! Closed-form star product of two Gaussian-polynomial functions.
//!
//! Uses the integral form
//! `(f⋆g)(z) = (πħ)^{−2N} ∫∫ f(a) g(b) exp[(2i/ħ)(a−z)ᵀΩ(b−z)] da db`
//! and integrates `(a, b)` out in closed form, keeping `z` symbolic.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::algebra::integrate::{integrate_product, Branch};
use crate::algebra::{QGFunction, QGTerm, QuadExponent, VarSpace};
use crate::error::Result;

/// Standard symplectic matrix `[[0, I], [−I, 0]]`.
pub(crate) fn symplectic(dof: usize) -> DMatrix<C64> {
    let d = 2 * dof;
    let mut om = DMatrix::zeros(d, d);
    for k in 0..dof {
        om[(k, dof + k)] = C64::new(1.0, 0.0);
        om[(dof + k, k)] = C64::new(-1.0, 0.0);
    }
    om
}

/// Kernel exponent on `(z, a, b)` and the `(a, b)` block at zero data.
fn kernel(space: VarSpace) -> (QuadExponent, DMatrix<C64>) {
    let d = space.dim();
    let om = symplectic(space.dof());
    let k = C64::new(0.0, 2.0 / space.hbar());
    let mut m = DMatrix::zeros(3 * d, 3 * d);
    let (z, a, b) = (0, d, 2 * d);
    let put = |m: &mut DMatrix<C64>, r: usize, c: usize, blk: &DMatrix<C64>| {
        m.view_mut((r, c), (d, d)).copy_from(blk);
        m.view_mut((c, r), (d, d)).copy_from(&blk.transpose());
    };
    put(&mut m, a, b, &scaled(&om, -k));
    put(&mut m, a, z, &scaled(&om, k));
    put(&mut m, b, z, &scaled(&om.transpose(), k));
    let start = m.view((d, d), (2 * d, 2 * d)).into_owned();
    (QuadExponent::quadratic(m), start)
}

fn scaled(m: &DMatrix<C64>, k: C64) -> DMatrix<C64> {
    m.map(|v| v * k)
}

fn accretive(a: &DMatrix<C64>) -> bool {
    let herm = (a + a.adjoint()).scale(0.5);
    let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .all(|&l| l >= -1e-12 * scale)
}

/// `f ⋆ g` for arbitrary terms; fails if the composed form is singular.
pub(crate) fn gaussian_star(f: &QGFunction, g: &QGFunction) -> Result<QGFunction> {
    let space = f.space();
    let d = space.dim();
    let (kern, start) = kernel(space);
    let a_pos: Vec<usize> = (d..2 * d).collect();
    let b_pos: Vec<usize> = (2 * d..3 * d).collect();
    let norm = C64::new((std::f64::consts::PI * space.hbar()).powi(-(d as i32)), 0.0);
    let start_sqrt = C64::new((2.0 / space.hbar()).powi(d as i32), 0.0);

    let mut terms = Vec::with_capacity(f.terms().len() * g.terms().len());
    for tf in f.terms() {
        for tg in g.terms() {
            let expo = tf
                .expo
                .embed(3 * d, &a_pos)
                .add(&tg.expo.embed(3 * d, &b_pos))
                .add(&kern);
            let branch = if accretive(tf.expo.a()) && accretive(tg.expo.a()) {
                Branch::Principal
            } else {
                Branch::Continued {
                    start: start.clone(),
                    start_sqrt,
                }
            };
            let (p, q) = integrate_product(&tf.poly, &tg.poly, &expo, &branch)?;
            terms.push(QGTerm {
                poly: p.scale(norm),
                expo: q,
            });
        }
    }
    Ok(QGFunction::canonical(space, terms))
}
