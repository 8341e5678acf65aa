//! Numerical star product by quadrature of the twisted-convolution integral
//! `(f⋆g)(z) = (πħ)^{−2N} ∫∫ f(z+u) g(z+v) exp[(2i/ħ) uᵀΩv] du dv`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::QGFunction;
use crate::error::{Error, Result};

/// Grid controls for [`quadrature_star_oracle`] and related settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarConfig {
    /// Reserved for truncated series evaluation.
    pub series_tolerance: f64,
    /// Half-width `L` of the offset box `[−L, L]^{2N}` at the coarsest level.
    pub oracle_grid_halfwidth: f64,
    /// Midpoint nodes per axis at the coarsest level.
    pub oracle_points_per_axis: usize,
}

impl Default for StarConfig {
    fn default() -> Self {
        StarConfig {
            series_tolerance: 1e-14,
            oracle_grid_halfwidth: 7.0,
            oracle_points_per_axis: 64,
        }
    }
}

impl StarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tolerance > 0.0) {
            return Err(Error::InvalidParameter("series_tolerance must be positive".into()));
        }
        if !(self.oracle_grid_halfwidth > 0.0) {
            return Err(Error::InvalidParameter("oracle_grid_halfwidth must be positive".into()));
        }
        if self.oracle_points_per_axis < 32 || !self.oracle_points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "oracle_points_per_axis must be even and at least 32".into(),
            ));
        }
        Ok(())
    }
}

/// Relative disagreement between refinement levels that counts as converged.
const REFINE_TOL: f64 = 1e-5;
const REFINE_LEVELS: usize = 3;

fn nodes(halfwidth: f64, n: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * halfwidth / n as f64;
    ((0..n).map(|i| -halfwidth + (i as f64 + 0.5) * h).collect(), h)
}

/// Row-major index into an `n^d` tensor.
fn flat(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

fn next_index(idx: &mut [usize], n: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < n {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Midpoint-rule value on one grid, with the same rule applied to
/// `|f(z+u)||g(z+v)|` (the size of the integral without cancellation).
fn oracle_level(f: &QGFunction, g: &QGFunction, z: &[f64], halfwidth: f64, n: usize) -> Result<(C64, f64)> {
    let space = f.space();
    let (dof, d, hbar) = (space.dof(), space.dim(), space.hbar());
    let (t, h) = nodes(halfwidth, n);
    let total = n.pow(d as u32);

    // g(z + v) on the v grid
    let mut data = vec![C64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let (mut abs_f, mut abs_g) = (0.0, 0.0);
    loop {
        for j in 0..d {
            point[j] = z[j] + t[idx[j]];
        }
        let gv = g.evaluate_real(&point)?;
        abs_g += gv.norm();
        data[flat(&idx, n)] = gv;
        if !next_index(&mut idx, n) {
            break;
        }
    }

    // Transform axis j of v into its partner axis of u:
    // uᵀΩv = Σ_k u_{x_k} v_{p_k} − u_{p_k} v_{x_k}.
    let k = 2.0 / hbar;
    for axis in 0..d {
        let sign = if axis < dof { -1.0 } else { 1.0 };
        let phase: Vec<C64> = (0..n * n)
            .map(|ij| {
                let (iu, iv) = (ij / n, ij % n);
                C64::from_polar(1.0, sign * k * t[iu] * t[iv])
            })
            .collect();
        let stride = n.pow((d - 1 - axis) as u32);
        let outer = total / (stride * n);
        let mut next = vec![C64::new(0.0, 0.0); total];
        let mut line = vec![C64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * stride * n + s;
                for (iv, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + iv * stride];
                }
                for iu in 0..n {
                    let row = &phase[iu * n..(iu + 1) * n];
                    let acc: C64 = row.iter().zip(&line).map(|(p, v)| p * v).sum();
                    next[base + iu * stride] = acc;
                }
            }
        }
        data = next;
    }

    // Axis j now carries u at the partner of j (x_k ↔ p_k).
    let mut sum = C64::new(0.0, 0.0);
    let mut idx = vec![0usize; d];
    let mut u_idx = vec![0usize; d];
    loop {
        for j in 0..d {
            let partner = if j < dof { j + dof } else { j - dof };
            u_idx[partner] = idx[j];
        }
        for j in 0..d {
            point[j] = z[j] + t[u_idx[j]];
        }
        let fv = f.evaluate_real(&point)?;
        abs_f += fv.norm();
        sum += fv * data[flat(&idx, n)];
        if !next_index(&mut idx, n) {
            break;
        }
    }
    let weight = h.powi(2 * d as i32) / (std::f64::consts::PI * hbar).powi(d as i32);
    Ok((sum * weight, abs_f * abs_g * weight))
}

/// Hermitian part of `A` positive definite, so `|e^{−½zᵀAz}|` decays in
/// every direction and the truncated box captures the integral.
fn decaying(a: &nalgebra::DMatrix<C64>) -> bool {
    let herm = (a + a.adjoint()).scale(0.5);
    let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
    nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .all(|&l| l > 1e-12 * scale)
}

/// `(f⋆g)(z)` by quadrature, refined until two successive levels agree.
///
/// Each level widens the box by 1.25 and refines the spacing by 1.2.
/// Agreement is measured against `max(|value|, ∫|f||g|)`, so values that
/// vanish by cancellation (orthogonal pairs) converge in absolute terms.
pub fn quadrature_star_oracle(f: &QGFunction, g: &QGFunction, z: &[f64], cfg: &StarConfig) -> Result<C64> {
    cfg.validate()?;
    if f.space() != g.space() {
        return Err(Error::SpaceMismatch);
    }
    let space = f.space();
    if space.dof() > 2 {
        return Err(Error::InvalidParameter("quadrature oracle supports at most two degrees of freedom".into()));
    }
    if z.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: z.len(),
        });
    }
    for term in f.terms().iter().chain(g.terms()) {
        if !decaying(term.expo.a()) {
            return Err(Error::OracleNotConverged(
                "a factor does not decay in every direction (polynomial or oscillatory term); the quadrature domain cannot be truncated".into(),
            ));
        }
    }
    let mut halfwidth = cfg.oracle_grid_halfwidth;
    let mut n = cfg.oracle_points_per_axis;
    let (mut prev, _) = oracle_level(f, g, z, halfwidth, n)?;
    let mut last_gap = f64::INFINITY;
    for _ in 1..REFINE_LEVELS {
        halfwidth *= 1.25;
        n = ((n as f64 * 1.5).round() as usize + 1) & !1;
        let (value, size) = oracle_level(f, g, z, halfwidth, n)?;
        let gap = (value - prev).norm() / value.norm().max(size).max(1e-300);
        if gap <= REFINE_TOL && value.norm().is_finite() {
            return Ok(value);
        }
        last_gap = gap;
        prev = value;
    }
    Err(Error::OracleNotConverged(format!(
        "successive grids differ by {last_gap:.3e} relative at z = {z:?}"
    )))
}
