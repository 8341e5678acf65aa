//! Closed-form Gaussian integration of `P(u, y) exp(q(u, y))` over a subset
//! `y` of the variables.
//!
//! Completing the square gives the remaining quadratic form in `u` together
//! with the mean `μ(u) = A_yy⁻¹(b_y − A_yu u)`. The polynomial factor becomes
//! `E[P(u, μ(u) + s)]` with `s` distributed with covariance `A_yy⁻¹`; the
//! moments follow from the Isserlis recursion and the substitution `y = μ(u)`
//! is carried out with a Horner scheme on dense coefficient arrays.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::exponent::QuadExponent;
use super::monomial::{for_each_divisor, Monomial, MonoMap};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// How the square root of `det A_yy` is continued off the positive reals.
#[derive(Clone, Debug)]
pub(crate) enum Branch {
    /// Product of principal square roots of the eigenvalues. Correct whenever
    /// the Hermitian part of `A_yy` is positive semidefinite.
    Principal,
    /// Continuation along the straight segment from `start` (whose square-root
    /// determinant is `start_sqrt`) to the actual matrix.
    Continued { start: DMatrix<C64>, start_sqrt: C64 },
}

/// Product of principal square roots of the eigenvalues of `m`.
pub(crate) fn sqrt_det_principal(m: &DMatrix<C64>) -> Option<C64> {
    if m.nrows() == 0 {
        return Some(ONE);
    }
    let eig = m.clone().eigenvalues()?;
    Some(eig.iter().map(|l| l.sqrt()).product())
}

/// Follows `sqrt(det((1−t)·start + t·end))` continuously from `t = 0`.
pub(crate) fn sqrt_det_continued(start: &DMatrix<C64>, start_sqrt: C64, end: &DMatrix<C64>) -> Option<C64> {
    let delta = end - start;
    let det_at = |t: f64| (start + &delta * C64::new(t, 0.0)).determinant();
    let mut t: f64 = 0.0;
    let mut current = start_sqrt;
    let mut dt: f64 = 1.0 / 32.0;
    while t < 1.0 {
        let next_t = (t + dt).min(1.0);
        let d = det_at(next_t);
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return None;
        }
        let mut cand = d.sqrt();
        if (cand - current).norm() > (cand + current).norm() {
            cand = -cand;
        }
        let phase_jump = (cand / current).arg().abs();
        if phase_jump > 0.25 {
            dt *= 0.5;
            if dt < 1e-12 {
                return None;
            }
            continue;
        }
        current = cand;
        t = next_t;
        dt = (dt * 2.0).min(1.0 / 8.0);
    }
    Some(current)
}

/// Gaussian moments `E[s^δ]` for a (complex) covariance.
pub(crate) struct Moments<'a> {
    cov: &'a DMatrix<C64>,
    memo: MonoMap<C64>,
}

impl<'a> Moments<'a> {
    pub(crate) fn new(cov: &'a DMatrix<C64>) -> Self {
        Moments {
            cov,
            memo: MonoMap::default(),
        }
    }

    pub(crate) fn get(&mut self, delta: &Monomial) -> C64 {
        let deg = delta.degree();
        if deg == 0 {
            return ONE;
        }
        if deg % 2 == 1 {
            return ZERO;
        }
        if let Some(v) = self.memo.get(delta) {
            return *v;
        }
        let i = delta.exps().iter().position(|&e| e > 0).unwrap();
        let mut reduced = delta.clone();
        reduced.exps_mut()[i] -= 1;
        let mut acc = ZERO;
        for j in 0..reduced.nvars() {
            let e = reduced.exps()[j];
            if e == 0 {
                continue;
            }
            let c = self.cov[(i, j)];
            if c == ZERO {
                continue;
            }
            let mut r2 = reduced.clone();
            r2.exps_mut()[j] -= 1;
            acc += c * e as f64 * self.get(&r2);
        }
        self.memo.insert(delta.clone(), acc);
        acc
    }
}

fn binomial(n: u16, k: u16) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dense coefficient array for polynomials in `k` variables of total degree
/// at most `deg`.
struct Dense {
    k: usize,
    side: usize,
    data: Vec<C64>,
}

impl Dense {
    fn zeros(k: usize, deg: usize) -> Self {
        let side = deg + 1;
        Dense {
            k,
            side,
            data: vec![ZERO; side.pow(k as u32)],
        }
    }

    fn stride(&self, j: usize) -> usize {
        self.side.pow(j as u32)
    }

    /// `self ← self · (c0 + Σ lin_j u_j)`.
    fn mul_affine(&mut self, c0: C64, lin: &[C64]) {
        let len = self.data.len();
        let old = std::mem::replace(&mut self.data, vec![ZERO; len]);
        for (idx, &v) in old.iter().enumerate() {
            if v == ZERO {
                continue;
            }
            self.data[idx] += v * c0;
            for (j, &l) in lin.iter().enumerate() {
                if l == ZERO {
                    continue;
                }
                let s = self.stride(j);
                // exponent of variable j must stay below `side`
                if (idx / s) % self.side + 1 < self.side {
                    self.data[idx + s] += v * l;
                }
            }
        }
    }

    fn add_const(&mut self, c: C64) {
        self.data[0] += c;
    }

    fn into_terms(self, alpha: &[u16], out: &mut MonoMap<C64>) {
        for (idx, v) in self.data.into_iter().enumerate() {
            if v == ZERO {
                continue;
            }
            let mut m = Monomial::one(self.k);
            let mut rest = idx;
            for j in 0..self.k {
                m.exps_mut()[j] = (rest % self.side) as u16 + alpha[j];
                rest /= self.side;
            }
            *out.entry(m).or_insert(ZERO) += v;
        }
    }
}

/// Horner evaluation of `Σ_γ c_γ μ(u)^γ`, entries sorted by `γ`.
fn horner(
    entries: &[(Monomial, C64)],
    level: usize,
    mean_const: &DVector<C64>,
    mean_lin: &DMatrix<C64>,
    k: usize,
    deg: usize,
) -> Dense {
    let mut out = Dense::zeros(k, deg);
    if level == mean_const.len() {
        let total: C64 = entries.iter().map(|(_, c)| *c).sum();
        out.add_const(total);
        return out;
    }
    let mut groups: BTreeMap<u16, Vec<(Monomial, C64)>> = BTreeMap::new();
    for (g, c) in entries {
        groups.entry(g.exps()[level]).or_default().push((g.clone(), *c));
    }
    let top = *groups.keys().next_back().unwrap();
    let lin: Vec<C64> = (0..k).map(|j| mean_lin[(level, j)]).collect();
    for power in (0..=top).rev() {
        if power != top {
            out.mul_affine(mean_const[level], &lin);
        }
        if let Some(group) = groups.get(&power) {
            let inner = horner(group, level + 1, mean_const, mean_lin, k, deg);
            for (o, i) in out.data.iter_mut().zip(inner.data) {
                *o += i;
            }
        }
    }
    out
}

/// Result of completing the square in the integrated variables `y`:
/// `y = mean_const + mean_lin·u + s` with `s` of covariance `cov`.
struct Completed {
    cov: DMatrix<C64>,
    mean_const: DVector<C64>,
    mean_lin: DMatrix<C64>,
    expo: QuadExponent,
    prefactor: C64,
}

fn complete_square(expo: &QuadExponent, keep: &[usize], take: &[usize], branch: &Branch) -> Result<Completed> {
    let (k, m) = (keep.len(), take.len());
    let a = expo.a();
    let b = expo.b();
    let a_uu = DMatrix::from_fn(k, k, |i, j| a[(keep[i], keep[j])]);
    let a_uy = DMatrix::from_fn(k, m, |i, j| a[(keep[i], take[j])]);
    let a_yy = DMatrix::from_fn(m, m, |i, j| a[(take[i], take[j])]);
    let b_u = DVector::from_fn(k, |i, _| b[keep[i]]);
    let b_y = DVector::from_fn(m, |i, _| b[take[i]]);

    let scale = a_yy.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let det = a_yy.determinant();
    if m > 0 && (scale == 0.0 || det.norm() <= 1e-13 * scale.powi(m as i32)) {
        return Err(Error::GaussianCompositionSingular);
    }
    let cov = a_yy
        .clone()
        .try_inverse()
        .ok_or(Error::GaussianCompositionSingular)?;
    let sqrt_det = match branch {
        Branch::Principal => sqrt_det_principal(&a_yy),
        Branch::Continued { start, start_sqrt } => {
            sqrt_det_continued(start, *start_sqrt, &a_yy).or_else(|| sqrt_det_principal(&a_yy))
        }
    }
    .ok_or(Error::GaussianCompositionSingular)?;

    let cov_b = &cov * &b_y;
    let a_new = &a_uu - &a_uy * &cov * a_uy.transpose();
    let b_new = &b_u - &a_uy * &cov_b;
    let c_new = expo.c() + 0.5 * b_y.iter().zip(cov_b.iter()).map(|(x, y)| x * y).sum::<C64>();
    let mean_lin = -(&cov * a_uy.transpose());
    Ok(Completed {
        cov,
        mean_const: cov_b,
        mean_lin,
        expo: QuadExponent::new(a_new, b_new, c_new),
        prefactor: C64::new((2.0 * PI).powf(m as f64 / 2.0), 0.0) / sqrt_det,
    })
}

/// Integrates out the variables flagged in `mask`, returning the polynomial and
/// exponent over the remaining variables (in their original order).
pub(crate) fn integrate_out(
    poly: &Polynomial,
    expo: &QuadExponent,
    mask: &[bool],
    branch: &Branch,
) -> Result<(Polynomial, QuadExponent)> {
    let n = expo.dim();
    assert_eq!(mask.len(), n);
    assert_eq!(poly.nvars(), n);
    let keep: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    let take: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let k = keep.len();
    let done = complete_square(expo, &keep, &take, branch)?;

    // c_{αγ} = Σ_{β ≥ γ} r_{αβ} binom(β, γ) E[s^{β−γ}]
    let mut moments = Moments::new(&done.cov);
    let mut grouped: MonoMap<MonoMap<C64>> = MonoMap::default();
    for (mono, r) in poly.terms() {
        let (alpha, beta) = mono.split(mask);
        let slot = grouped.entry(alpha).or_default();
        let bexp = beta.exps().to_vec();
        for_each_divisor(&bexp, |gamma| {
            let rest: Vec<u16> = bexp.iter().zip(gamma).map(|(b, g)| b - g).collect();
            let rest_deg: u32 = rest.iter().map(|&v| v as u32).sum();
            if rest_deg % 2 == 1 {
                return;
            }
            let mom = moments.get(&Monomial::new(&rest));
            if mom == ZERO {
                return;
            }
            let binom: f64 = bexp.iter().zip(gamma).map(|(&b, &g)| binomial(b, g)).product();
            *slot.entry(Monomial::new(gamma)).or_insert(ZERO) += r * mom * binom;
        });
    }

    let mut out: MonoMap<C64> = MonoMap::default();
    for (alpha, coeffs) in grouped {
        let mut entries: Vec<(Monomial, C64)> = coeffs.into_iter().filter(|(_, c)| *c != ZERO).collect();
        if entries.is_empty() {
            continue;
        }
        entries.sort_by(|x, y| x.0.exps().cmp(y.0.exps()));
        let deg = entries.iter().map(|(g, _)| g.degree()).max().unwrap() as usize;
        let dense = horner(&entries, 0, &done.mean_const, &done.mean_lin, k, deg);
        dense.into_terms(alpha.exps(), &mut out);
    }
    let poly_out = Polynomial::from_hash(k, out).scale(done.prefactor);
    Ok((poly_out, done.expo))
}

/// `exp(½ Σ cov_ij ∂_{s_i} ∂_{s_j}) P`, with `s_i` the variable `offset + i`.
fn heat_flow(p: &Polynomial, cov: &DMatrix<C64>, offset: usize) -> Polynomial {
    let m = cov.nrows();
    let mut acc = p.clone();
    let mut term = p.clone();
    let mut t = 1.0;
    while !term.is_zero() {
        let mut next = Polynomial::zero(p.nvars());
        for i in 0..m {
            let di = term.derivative(offset + i);
            if di.is_zero() {
                continue;
            }
            for j in 0..m {
                let c = cov[(i, j)];
                if c != ZERO {
                    next.add_assign(&di.derivative(offset + j).scale(c));
                }
            }
        }
        term = next.scale(C64::new(0.5 / t, 0.0));
        acc.add_assign(&term);
        t += 1.0;
    }
    acc
}

/// Coefficients of `P(u, s)` grouped by the exponent of `s` (variables from `offset`).
fn by_tail(p: &Polynomial, offset: usize) -> MonoMap<Polynomial> {
    let mask: Vec<bool> = (0..p.nvars()).map(|i| i >= offset).collect();
    let mut out: MonoMap<Polynomial> = MonoMap::default();
    for (mono, c) in p.terms() {
        let (head, tail) = mono.split(&mask);
        out.entry(tail)
            .or_insert_with(|| Polynomial::zero(offset))
            .add_term(head, *c);
    }
    out
}

/// Integrates `P(y_a)·Q(y_b)·exp(q(u, y_a, y_b))` over `(y_a, y_b)`, with the
/// variables of `expo` ordered `(u, y_a, y_b)`.
///
/// Equivalent to [`integrate_out`] on the product polynomial, but the Wick
/// contractions are split into self-contractions of each factor and a cross
/// series `Σ_α α!·[s_a^α]P̃·[w^α]Q̃`, which avoids expanding `P·Q`.
pub(crate) fn integrate_product(
    p: &Polynomial,
    q: &Polynomial,
    expo: &QuadExponent,
    branch: &Branch,
) -> Result<(Polynomial, QuadExponent)> {
    let (ma, mb) = (p.nvars(), q.nvars());
    let n = expo.dim();
    let k = n - ma - mb;
    let keep: Vec<usize> = (0..k).collect();
    let take: Vec<usize> = (k..n).collect();
    let done = complete_square(expo, &keep, &take, branch)?;
    let cov = &done.cov;

    // y_a = μ_a(u) + s_a, as a polynomial in (u, s_a)
    let mut map_a = DMatrix::zeros(ma, k + ma);
    for i in 0..ma {
        for j in 0..k {
            map_a[(i, j)] = done.mean_lin[(i, j)];
        }
        map_a[(i, k + i)] = ONE;
    }
    let shift_a = DVector::from_fn(ma, |i, _| done.mean_const[i]);
    let pa = heat_flow(
        &p.compose_affine(&map_a, &shift_a),
        &cov.view((0, 0), (ma, ma)).into_owned(),
        k,
    );

    let mut map_b = DMatrix::zeros(mb, k + mb);
    for i in 0..mb {
        for j in 0..k {
            map_b[(i, j)] = done.mean_lin[(ma + i, j)];
        }
        map_b[(i, k + i)] = ONE;
    }
    let shift_b = DVector::from_fn(mb, |i, _| done.mean_const[ma + i]);
    let qb = heat_flow(
        &q.compose_affine(&map_b, &shift_b),
        &cov.view((ma, ma), (mb, mb)).into_owned(),
        k,
    );
    // s_b = C_abᵀ w turns the cross operator ∂_aᵀ C_ab ∂_b into ∂_aᵀ ∂_w
    let mut map_w = DMatrix::zeros(k + mb, k + ma);
    for j in 0..k {
        map_w[(j, j)] = ONE;
    }
    for i in 0..mb {
        for j in 0..ma {
            map_w[(k + i, k + j)] = cov[(j, ma + i)];
        }
    }
    let qw = qb.compose_affine(&map_w, &DVector::zeros(k + mb));

    let left = by_tail(&pa, k);
    let right = by_tail(&qw, k);
    let mut out = Polynomial::zero(k);
    for (alpha, a_coef) in &left {
        if let Some(b_coef) = right.get(alpha) {
            let fact: f64 = alpha
                .exps()
                .iter()
                .map(|&e| (1..=e).map(|v| v as f64).product::<f64>())
                .product();
            out.add_assign(&(a_coef * b_coef).scale(C64::new(fact, 0.0)));
        }
    }
    Ok((out.scale(done.prefactor), done.expo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn moments_match_isserlis() {
        let cov = DMatrix::from_row_slice(2, 2, &[r(2.0), r(0.5), r(0.5), r(1.0)]);
        let mut mo = Moments::new(&cov);
        assert!((mo.get(&Monomial::new(&[2, 0])) - r(2.0)).norm() < 1e-15);
        assert!((mo.get(&Monomial::new(&[4, 0])) - r(12.0)).norm() < 1e-14);
        // E[s1² s2²] = C11 C22 + 2 C12²
        assert!((mo.get(&Monomial::new(&[2, 2])) - r(2.5)).norm() < 1e-14);
        assert_eq!(mo.get(&Monomial::new(&[1, 0])), ZERO);
    }

    #[test]
    fn one_dimensional_moment() {
        // ∫ x² e^{−x²/2 + x} dx = (1 + 1)·√(2π)·e^{1/2}
        let q = QuadExponent::new(DMatrix::from_element(1, 1, r(1.0)), DVector::from_element(1, r(1.0)), r(0.0));
        let p = Polynomial::monomial(&[2], r(1.0));
        let (poly, expo) = integrate_out(&p, &q, &[true], &Branch::Principal).unwrap();
        let value = poly.eval(&[]) * expo.c().exp();
        let expect = 2.0 * (2.0 * PI).sqrt() * 0.5f64.exp();
        assert!((value - r(expect)).norm() < 1e-12);
    }

    #[test]
    fn partial_integration_keeps_remaining_quadratic() {
        // ∫ e^{−(x² + y² + x y)} dy  = √(π) e^{−3x²/4}
        let a = DMatrix::from_row_slice(2, 2, &[r(2.0), r(1.0), r(1.0), r(2.0)]);
        let q = QuadExponent::quadratic(a);
        let (poly, expo) = integrate_out(&Polynomial::one(2), &q, &[false, true], &Branch::Principal).unwrap();
        assert!((expo.a()[(0, 0)] - r(1.5)).norm() < 1e-14);
        assert!((poly.eval(&[]) - r(PI.sqrt())).norm() < 1e-13);
    }

    #[test]
    fn continued_branch_agrees_with_principal_on_accretive_matrices() {
        // Hermitian part diag(1, 0) is positive semidefinite along the segment.
        let start = DMatrix::<C64>::identity(2, 2);
        let i2 = C64::new(0.0, 2.0);
        let end = DMatrix::from_row_slice(2, 2, &[r(1.0), i2, i2, r(0.0)]);
        let cont = sqrt_det_continued(&start, r(1.0), &end).unwrap();
        let princ = sqrt_det_principal(&end).unwrap();
        assert!((cont - princ).norm() < 1e-12, "{cont} vs {princ}");
        assert!((cont * cont - end.determinant()).norm() < 1e-12);
    }

    #[test]
    fn product_form_matches_expanded_form() {
        // two integrated blocks of size 2, one kept variable
        let c = |re: f64, im: f64| C64::new(re, im);
        let a = DMatrix::from_row_slice(
            5,
            5,
            &[
                c(1.0, 0.0), c(0.1, 0.2), c(0.0, 0.3), c(0.2, 0.0), c(0.0, -0.1),
                c(0.1, 0.2), c(2.0, 0.5), c(0.3, 0.0), c(0.0, 0.4), c(0.1, 0.0),
                c(0.0, 0.3), c(0.3, 0.0), c(1.5, -0.2), c(0.2, 0.1), c(0.0, 0.2),
                c(0.2, 0.0), c(0.0, 0.4), c(0.2, 0.1), c(1.8, 0.0), c(0.3, 0.0),
                c(0.0, -0.1), c(0.1, 0.0), c(0.0, 0.2), c(0.3, 0.0), c(1.2, 0.3),
            ],
        );
        let b = DVector::from_vec(vec![c(0.1, 0.0), c(0.0, 0.2), c(-0.3, 0.0), c(0.2, 0.1), c(0.0, 0.0)]);
        let q = QuadExponent::new(a, b, c(0.0, 0.0));
        let p = Polynomial::from_terms(
            2,
            [(Monomial::new(&[2, 1]), c(1.0, 0.5)), (Monomial::new(&[0, 1]), c(-0.5, 0.0)), (Monomial::new(&[1, 0]), c(0.0, 2.0))],
        );
        let r = Polynomial::from_terms(
            2,
            [(Monomial::new(&[1, 2]), c(0.3, 0.0)), (Monomial::new(&[0, 0]), c(1.0, 0.0)), (Monomial::new(&[3, 0]), c(0.0, -1.0))],
        );
        let expanded = &p.embed(5, &[1, 2]) * &r.embed(5, &[3, 4]);
        let mask = [false, true, true, true, true];
        let (p1, q1) = integrate_out(&expanded, &q, &mask, &Branch::Principal).unwrap();
        let (p2, q2) = integrate_product(&p, &r, &q, &Branch::Principal).unwrap();
        assert!(q1.approx_eq(&q2, 1e-14));
        let diff = &p1 - &p2;
        assert!(diff.max_abs() < 1e-12 * p1.max_abs(), "{diff:?}");
    }

    #[test]
    fn singular_block_is_rejected() {
        let q = QuadExponent::quadratic(DMatrix::from_row_slice(2, 2, &[r(1.0), r(1.0), r(1.0), r(1.0)]));
        let res = integrate_out(&Polynomial::one(2), &q, &[true, true], &Branch::Principal);
        assert_eq!(res.unwrap_err(), Error::GaussianCompositionSingular);
    }
}
