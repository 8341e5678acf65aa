use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::exponent::QuadExponent;
use super::integrate::{integrate_out, Branch};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest weighted coefficient of a
/// function are dropped.
pub const PRUNE_REL_TOL: f64 = 1e-13;

/// Regularization ladder for oscillatory integrals, largest first.
const FRESNEL_EPSILONS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const FRESNEL_CONVERGENCE: f64 = 1e-8;

/// Phase space `R^{2N}` with coordinates ordered `(x_1..x_N, p_1..p_N)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarSpace {
    dof: usize,
    hbar: f64,
}

impl VarSpace {
    pub fn new(dof: usize, hbar: f64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::InvalidParameter("at least one degree of freedom is required".into()));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(VarSpace { dof, hbar })
    }

    #[inline]
    pub fn dof(&self) -> usize {
        self.dof
    }

    #[inline]
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Number of phase-space coordinates, `2N`.
    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.dof
    }

    pub fn x_index(&self, k: usize) -> usize {
        assert!(k < self.dof);
        k
    }

    pub fn p_index(&self, k: usize) -> usize {
        assert!(k < self.dof);
        self.dof + k
    }

    fn same_as(&self, other: &VarSpace) -> bool {
        self.dof == other.dof && (self.hbar - other.hbar).abs() <= 1e-15 * self.hbar.max(other.hbar)
    }
}

/// One summand `P(z)·exp(q(z))`.
#[derive(Clone, Debug, PartialEq)]
pub struct QGTerm {
    pub poly: Polynomial,
    pub expo: QuadExponent,
}

impl QGTerm {
    pub fn eval(&self, z: &[C64]) -> C64 {
        self.poly.eval(z) * self.expo.eval(z).exp()
    }

    fn weight(&self) -> f64 {
        self.expo.c().re.exp()
    }

    pub fn derivative(&self, index: usize) -> QGTerm {
        let dp = self.poly.derivative(index);
        let chain = &self.poly * &self.expo.gradient(index);
        QGTerm {
            poly: &dp + &chain,
            expo: self.expo.clone(),
        }
    }
}

/// Finite sum of polynomial × Gaussian-exponential terms on a [`VarSpace`].
///
/// Kept canonical: terms with the same `(A, b)` are merged, coefficients
/// below the relative pruning threshold are dropped and empty terms removed.
#[derive(Clone, Debug, PartialEq)]
pub struct QGFunction {
    space: VarSpace,
    terms: Vec<QGTerm>,
}

impl QGFunction {
    pub fn new(space: VarSpace, terms: Vec<QGTerm>) -> Result<Self> {
        for t in &terms {
            if t.poly.nvars() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: t.poly.nvars(),
                });
            }
            if t.expo.dim() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: t.expo.dim(),
                });
            }
        }
        Ok(Self::canonical(space, terms))
    }

    pub(crate) fn canonical(space: VarSpace, terms: Vec<QGTerm>) -> Self {
        let mut merged: Vec<QGTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.poly.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|m| m.expo.same_shape(&t.expo)) {
                Some(m) => {
                    let rescale = (t.expo.c() - m.expo.c()).exp();
                    m.poly = &m.poly + &t.poly.scale(rescale);
                }
                None => merged.push(t),
            }
        }
        let largest = merged
            .iter()
            .map(|t| t.poly.max_abs() * t.weight())
            .fold(0.0, f64::max);
        if largest > 0.0 {
            for t in merged.iter_mut() {
                let w = t.weight();
                t.poly.prune(PRUNE_REL_TOL * largest / w);
            }
        }
        merged.retain(|t| !t.poly.is_zero());
        QGFunction { space, terms: merged }
    }

    pub fn zero(space: VarSpace) -> Self {
        QGFunction { space, terms: vec![] }
    }

    pub fn constant(space: VarSpace, c: C64) -> Self {
        Self::from_poly(space, Polynomial::constant(space.dim(), c))
    }

    pub fn from_poly(space: VarSpace, poly: Polynomial) -> Self {
        assert_eq!(poly.nvars(), space.dim());
        Self::canonical(
            space,
            vec![QGTerm {
                poly,
                expo: QuadExponent::zero(space.dim()),
            }],
        )
    }

    pub fn gaussian(space: VarSpace, poly: Polynomial, expo: QuadExponent) -> Self {
        assert_eq!(poly.nvars(), space.dim());
        assert_eq!(expo.dim(), space.dim());
        Self::canonical(space, vec![QGTerm { poly, expo }])
    }

    /// Coordinate function `z_index`.
    pub fn coordinate(space: VarSpace, index: usize) -> Self {
        Self::from_poly(space, Polynomial::var(space.dim(), index))
    }

    pub fn x(space: VarSpace, k: usize) -> Self {
        Self::coordinate(space, space.x_index(k))
    }

    pub fn p(space: VarSpace, k: usize) -> Self {
        Self::coordinate(space, space.p_index(k))
    }

    #[inline]
    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn terms(&self) -> &[QGTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every term has a constant exponential factor.
    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|t| t.expo.is_constant())
    }

    /// The function as a plain polynomial, if it is one.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        if !self.is_polynomial() {
            return None;
        }
        let mut acc = Polynomial::zero(self.space.dim());
        for t in &self.terms {
            acc = &acc + &t.poly.scale(t.expo.c().exp());
        }
        Some(acc)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0)
    }

    fn check_space(&self, other: &QGFunction) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn evaluate(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                got: z.len(),
            });
        }
        Ok(self.terms.iter().map(|t| t.eval(z)).sum())
    }

    /// Evaluation at a real phase-space point.
    pub fn evaluate_real(&self, z: &[f64]) -> Result<C64> {
        let zc: Vec<C64> = z.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.evaluate(&zc)
    }

    pub fn differentiate(&self, index: usize) -> Result<Self> {
        if index >= self.space.dim() {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.space.dim(),
            });
        }
        Ok(Self::canonical(
            self.space,
            self.terms.iter().map(|t| t.derivative(index)).collect(),
        ))
    }

    pub fn add(&self, other: &QGFunction) -> Result<Self> {
        self.check_space(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::canonical(self.space, terms))
    }

    pub fn sub(&self, other: &QGFunction) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::canonical(
            self.space,
            self.terms
                .iter()
                .map(|t| QGTerm {
                    poly: t.poly.scale(c),
                    expo: t.expo.clone(),
                })
                .collect(),
        )
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &QGFunction) -> Result<Self> {
        self.check_space(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for o in &other.terms {
                terms.push(QGTerm {
                    poly: &s.poly * &o.poly,
                    expo: s.expo.add(&o.expo),
                });
            }
        }
        Ok(Self::canonical(self.space, terms))
    }

    pub fn conjugate(&self) -> Self {
        QGFunction {
            space: self.space,
            terms: self
                .terms
                .iter()
                .map(|t| QGTerm {
                    poly: t.poly.conj(),
                    expo: t.expo.conj(),
                })
                .collect(),
        }
    }

    /// `Σ_terms e^{Re c} Σ |coefficients|`.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.poly.l1_norm() * t.weight()).sum()
    }

    /// `coeff_norm(self − other)`.
    pub fn distance(&self, other: &QGFunction) -> Result<f64> {
        Ok(self.sub(other)?.coeff_norm())
    }

    /// `Σ_k ∂f/∂x_k ∂g/∂p_k − ∂g/∂x_k ∂f/∂p_k`.
    pub fn poisson_bracket(&self, other: &QGFunction) -> Result<Self> {
        self.check_space(other)?;
        let n = self.space.dof();
        let mut acc = QGFunction::zero(self.space);
        for k in 0..n {
            let (xi, pi) = (self.space.x_index(k), self.space.p_index(k));
            let left = self.differentiate(xi)?.multiply(&other.differentiate(pi)?)?;
            let right = other.differentiate(xi)?.multiply(&self.differentiate(pi)?)?;
            acc = acc.add(&left.sub(&right)?)?;
        }
        Ok(acc)
    }

    /// `f ∘ (z ↦ Mz + shift)` for invertible `M`.
    pub fn substitute_linear(&self, map: &DMatrix<C64>, shift: &DVector<C64>) -> Result<Self> {
        let d = self.space.dim();
        if map.nrows() != d || map.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: map.nrows().max(map.ncols()),
            });
        }
        if shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: shift.len(),
            });
        }
        let det = map.determinant().norm();
        let scale = map.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(det > 1e-12 * scale.powi(d as i32)) {
            return Err(Error::SingularMap(det));
        }
        Ok(Self::canonical(
            self.space,
            self.terms
                .iter()
                .map(|t| QGTerm {
                    poly: t.poly.compose_affine(map, shift),
                    expo: t.expo.compose_affine(map, shift),
                })
                .collect(),
        ))
    }

    /// `∫ f dz` over `R^{2N}`; oscillatory terms via the ε → 0⁺ limit of the
    /// `A + εI` integral.
    pub fn gaussian_integral(&self) -> Result<C64> {
        self.terms.iter().map(term_integral).sum()
    }

    /// `∫ f·test dz`.
    pub fn pair(&self, test: &QGFunction) -> Result<C64> {
        if test.is_zero() || self.is_zero() {
            self.check_space(test)?;
            return Ok(C64::new(0.0, 0.0));
        }
        self.multiply(test)?.gaussian_integral()
    }
}

fn hermitian_min_eigen(a: &DMatrix<C64>) -> f64 {
    let herm = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn integral_at(term: &QGTerm, eps: f64) -> Result<C64> {
    let d = term.expo.dim();
    let a = term.expo.a() + DMatrix::<C64>::identity(d, d).scale(eps);
    let expo = QuadExponent::new(a, term.expo.b().clone(), term.expo.c());
    let (poly, rest) = integrate_out(&term.poly, &expo, &vec![true; d], &Branch::Principal)?;
    Ok(poly.eval(&[]) * rest.c().exp())
}

/// Neville extrapolation of `values(eps)` to `eps = 0`; returns the diagonal.
fn richardson_diagonal(eps: &[f64], values: &[C64]) -> Vec<C64> {
    let n = eps.len();
    let mut diag = vec![values[0]];
    // rows[k][i] interpolates the points i..=i+k
    let mut rows: Vec<Vec<C64>> = vec![values.to_vec()];
    for k in 1..n {
        let prev = rows.last().unwrap();
        let mut next = Vec::with_capacity(n - k);
        for i in 0..n - k {
            let (e_lo, e_hi) = (eps[i], eps[i + k]);
            let v = (prev[i + 1] * e_lo - prev[i] * e_hi) / (e_lo - e_hi);
            next.push(v);
        }
        diag.push(next[next.len() - 1]);
        rows.push(next);
    }
    diag
}

fn term_integral(term: &QGTerm) -> Result<C64> {
    let d = term.expo.dim();
    let a = term.expo.a();
    let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let min_herm = hermitian_min_eigen(a);
    if min_herm < -1e-12 * scale {
        return Err(Error::NonIntegrable(format!(
            "real part of the quadratic form has a negative direction (eigenvalue {min_herm:.3e})"
        )));
    }
    if min_herm > 1e-8 * scale {
        return integral_at(term, 0.0).map_err(|_| Error::NonIntegrable("singular quadratic form".into()));
    }
    let mut values = Vec::with_capacity(FRESNEL_EPSILONS.len());
    for &eps in &FRESNEL_EPSILONS {
        let v = integral_at(term, eps)
            .map_err(|_| Error::NonIntegrable(format!("regularized form singular at eps = {eps:e}")))?;
        values.push(v);
    }
    let diag = richardson_diagonal(&FRESNEL_EPSILONS, &values);
    let last = diag[diag.len() - 1];
    let prev = diag[diag.len() - 2];
    let tol = FRESNEL_CONVERGENCE * last.norm().max(1.0);
    if !last.norm().is_finite() || (last - prev).norm() > tol {
        return Err(Error::NonIntegrable(format!(
            "eps -> 0 extrapolation did not settle in {d} dimensions (last two extrapolants differ by {:.3e})",
            (last - prev).norm()
        )));
    }
    Ok(last)
}

impl fmt::Display for QGFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[")?;
            for (j, (m, c)) in t.poly.terms().enumerate() {
                if j > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "({:.6}{:+.6}i){:?}", c.re, c.im, m)?;
            }
            write!(f, "]")?;
            if !t.expo.is_constant() || t.expo.c() != C64::new(0.0, 0.0) {
                write!(f, "·exp(q)")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn space() -> VarSpace {
        VarSpace::new(1, 0.5).unwrap()
    }

    fn bump(s: VarSpace, width: f64) -> QGFunction {
        let a = DMatrix::from_diagonal_element(2, 2, c(width, 0.0));
        QGFunction::gaussian(s, Polynomial::one(2), QuadExponent::quadratic(a))
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(VarSpace::new(0, 1.0).is_err());
        assert!(VarSpace::new(1, 0.0).is_err());
        assert!(VarSpace::new(1, f64::NAN).is_err());
        let s = space();
        let bad = QGTerm {
            poly: Polynomial::one(3),
            expo: QuadExponent::zero(2),
        };
        assert!(matches!(QGFunction::new(s, vec![bad]), Err(Error::DimensionMismatch { .. })));
        let other = VarSpace::new(1, 1.0).unwrap();
        assert!(matches!(
            QGFunction::x(s, 0).add(&QGFunction::x(other, 0)),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn merges_terms_with_equal_shape() {
        let s = space();
        let g = bump(s, 1.0);
        let shifted = QGFunction::gaussian(
            s,
            Polynomial::one(2),
            QuadExponent::new(g.terms()[0].expo.a().clone(), DVector::zeros(2), c(2.0_f64.ln(), 0.0)),
        );
        let sum = g.add(&shifted).unwrap();
        assert_eq!(sum.terms().len(), 1);
        assert!((sum.evaluate_real(&[0.3, -0.1]).unwrap() - g.evaluate_real(&[0.3, -0.1]).unwrap() * 3.0).norm() < 1e-14);
        assert!(g.sub(&g).unwrap().is_zero());
    }

    #[test]
    fn prunes_negligible_coefficients() {
        let s = space();
        let p = Polynomial::linear(c(1.0, 0.0), &[c(1e-16, 0.0), c(0.0, 0.0)]);
        let f = QGFunction::from_poly(s, p);
        assert_eq!(f.degree(), 0);
    }

    #[test]
    fn derivative_of_gaussian() {
        let s = space();
        let g = bump(s, 2.0);
        let d = g.differentiate(0).unwrap();
        let z = [0.4, 0.7];
        let want = -2.0 * 0.4 * g.evaluate_real(&z).unwrap();
        assert!((d.evaluate_real(&z).unwrap() - want).norm() < 1e-14);
        assert!(g.differentiate(2).is_err());
    }

    #[test]
    fn poisson_bracket_of_coordinates() {
        let s = space();
        let pb = QGFunction::x(s, 0).poisson_bracket(&QGFunction::p(s, 0)).unwrap();
        assert!(pb.distance(&QGFunction::constant(s, c(1.0, 0.0))).unwrap() < 1e-15);
    }

    #[test]
    fn gaussian_integrals() {
        let s = space();
        // ∫ e^{−(x²+p²)} = π
        let v = bump(s, 2.0).gaussian_integral().unwrap();
        assert!((v - c(PI, 0.0)).norm() < 1e-13);
        // second moment: ∫ x² e^{−(x²+p²)} = π/2
        let x2 = QGFunction::from_poly(s, Polynomial::monomial(&[2, 0], c(1.0, 0.0)));
        let v = x2.pair(&bump(s, 2.0)).unwrap();
        assert!((v - c(PI / 2.0, 0.0)).norm() < 1e-13);
        // pure phase e^{2ixp/ħ}: ∫ = πħ by the oscillatory limit
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -4.0), c(0.0, -4.0), c(0.0, 0.0)]);
        let phase = QGFunction::gaussian(s, Polynomial::one(2), QuadExponent::quadratic(a));
        let v = phase.gaussian_integral().unwrap();
        assert!((v - c(PI * s.hbar(), 0.0)).norm() < 1e-8, "{v}");
    }

    #[test]
    fn constant_integral_diverges() {
        let one = QGFunction::constant(space(), c(1.0, 0.0));
        assert!(matches!(one.gaussian_integral(), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn substitution_shifts_and_scales() {
        let s = space();
        let g = bump(s, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let shift = DVector::from_vec(vec![c(0.5, 0.0), c(-0.25, 0.0)]);
        let h = g.substitute_linear(&m, &shift).unwrap();
        let w = [0.3, -0.6];
        let inner = [2.0 * 0.3 + 0.5, 0.3 - 0.6 - 0.25];
        assert!((h.evaluate_real(&w).unwrap() - g.evaluate_real(&inner).unwrap()).norm() < 1e-14);
        let singular = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(g.substitute_linear(&singular, &shift), Err(Error::SingularMap(_))));
    }

    #[test]
    fn conjugate_evaluates_to_conjugate() {
        let s = space();
        let f = QGFunction::gaussian(
            s,
            Polynomial::linear(c(0.2, 0.7), &[c(0.0, 1.0), c(1.0, -1.0)]),
            QuadExponent::new(
                DMatrix::from_row_slice(2, 2, &[c(1.0, 0.3), c(0.0, 0.2), c(0.0, 0.2), c(1.0, -0.1)]),
                DVector::from_vec(vec![c(0.1, 0.4), c(0.0, -0.3)]),
                c(0.1, 0.2),
            ),
        );
        let z = [0.25, -1.5];
        assert!((f.conjugate().evaluate_real(&z).unwrap() - f.evaluate_real(&z).unwrap().conj()).norm() < 1e-14);
    }
}
