use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::polynomial::Polynomial;

/// Absolute tolerance for treating two exponents as the same.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Quadratic exponent `q(z) = −½ zᵀAz + bᵀz + c` with complex symmetric `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadExponent {
    a: DMatrix<C64>,
    b: DVector<C64>,
    c: C64,
}

impl QuadExponent {
    /// Builds an exponent; `a` is symmetrized.
    pub fn new(a: DMatrix<C64>, b: DVector<C64>, c: C64) -> Self {
        assert!(a.is_square(), "quadratic form must be square");
        assert_eq!(a.nrows(), b.len(), "linear part has the wrong length");
        let a = (&a + a.transpose()).scale(0.5);
        QuadExponent { a, b, c }
    }

    pub fn zero(dim: usize) -> Self {
        QuadExponent {
            a: DMatrix::zeros(dim, dim),
            b: DVector::zeros(dim),
            c: C64::new(0.0, 0.0),
        }
    }

    /// Pure quadratic part `−½ zᵀAz`.
    pub fn quadratic(a: DMatrix<C64>) -> Self {
        let n = a.nrows();
        Self::new(a, DVector::zeros(n), C64::new(0.0, 0.0))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<C64> {
        &self.b
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    /// `A` and `b` vanish: the exponential is the constant `e^c`.
    pub fn is_constant(&self) -> bool {
        self.a.iter().all(|v| v.norm() <= EXPONENT_TOL) && self.b.iter().all(|v| v.norm() <= EXPONENT_TOL)
    }

    /// `A` and `b` agree within [`EXPONENT_TOL`]; `c` may differ.
    pub fn same_shape(&self, other: &QuadExponent) -> bool {
        self.dim() == other.dim()
            && self
                .a
                .iter()
                .zip(other.a.iter())
                .all(|(x, y)| (x - y).norm() <= EXPONENT_TOL)
            && self
                .b
                .iter()
                .zip(other.b.iter())
                .all(|(x, y)| (x - y).norm() <= EXPONENT_TOL)
    }

    /// Entrywise agreement of `(A, b, c)` within `tol`.
    pub fn approx_eq(&self, other: &QuadExponent, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.a.iter().zip(other.a.iter()).all(|(x, y)| (x - y).norm() <= tol)
            && self.b.iter().zip(other.b.iter()).all(|(x, y)| (x - y).norm() <= tol)
            && (self.c - other.c).norm() <= tol
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let zv = DVector::from_column_slice(z);
        let az = &self.a * &zv;
        let quad: C64 = zv.iter().zip(az.iter()).map(|(x, y)| x * y).sum();
        let lin: C64 = self.b.iter().zip(z).map(|(x, y)| x * y).sum();
        -0.5 * quad + lin + self.c
    }

    /// `∂q/∂z_i = b_i − (Az)_i` as an affine polynomial.
    pub fn gradient(&self, index: usize) -> Polynomial {
        let coeffs: Vec<C64> = (0..self.dim()).map(|j| -self.a[(index, j)]).collect();
        Polynomial::linear(self.b[index], &coeffs)
    }

    /// Exponent of the pointwise product of two exponentials.
    pub fn add(&self, other: &QuadExponent) -> QuadExponent {
        QuadExponent {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            c: self.c + other.c,
        }
    }

    pub fn conj(&self) -> QuadExponent {
        QuadExponent {
            a: self.a.map(|v| v.conj()),
            b: self.b.map(|v| v.conj()),
            c: self.c.conj(),
        }
    }

    /// `q(Mw + s)`; `map` has `self.dim()` rows.
    pub fn compose_affine(&self, map: &DMatrix<C64>, shift: &DVector<C64>) -> QuadExponent {
        let a_s = &self.a * shift;
        let a = map.transpose() * &self.a * map;
        let b = map.transpose() * (&self.b - &a_s);
        let s_a_s: C64 = shift.iter().zip(a_s.iter()).map(|(x, y)| x * y).sum();
        let b_s: C64 = self.b.iter().zip(shift.iter()).map(|(x, y)| x * y).sum();
        QuadExponent::new(a, b, self.c - 0.5 * s_a_s + b_s)
    }

    /// Re-indexes into `dim` variables, sending variable `i` to `positions[i]`.
    pub fn embed(&self, dim: usize, positions: &[usize]) -> QuadExponent {
        let mut a = DMatrix::zeros(dim, dim);
        let mut b = DVector::zeros(dim);
        for (i, &pi) in positions.iter().enumerate() {
            b[pi] = self.b[i];
            for (j, &pj) in positions.iter().enumerate() {
                a[(pi, pj)] = self.a[(i, j)];
            }
        }
        QuadExponent { a, b, c: self.c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn symmetrizes_on_construction() {
        let a = DMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(0.0), r(1.0)]);
        let q = QuadExponent::quadratic(a);
        assert_eq!(q.a()[(0, 1)], q.a()[(1, 0)]);
        assert_eq!(q.a()[(0, 1)], r(1.0));
    }

    #[test]
    fn composition_matches_pointwise() {
        let a = DMatrix::from_row_slice(2, 2, &[r(1.0), C64::new(0.0, 0.5), C64::new(0.0, 0.5), r(2.0)]);
        let q = QuadExponent::new(a, DVector::from_vec(vec![r(0.3), C64::new(0.1, -0.2)]), r(0.7));
        let m = DMatrix::from_row_slice(2, 2, &[r(0.5), r(1.0), r(-1.0), r(2.0)]);
        let s = DVector::from_vec(vec![r(0.25), C64::new(0.0, 1.0)]);
        let g = q.compose_affine(&m, &s);
        let w = [C64::new(0.3, 0.1), r(-0.8)];
        let inner = &m * DVector::from_column_slice(&w) + &s;
        let lhs = g.eval(&w);
        let rhs = q.eval(inner.as_slice());
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
