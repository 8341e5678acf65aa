use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::monomial::{MonoMap, Monomial};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Polynomial with complex coefficients in a fixed number of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C64::new(1.0, 0.0))
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable {index} out of range");
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, index), C64::new(1.0, 0.0));
        p
    }

    pub fn monomial(exps: &[u16], c: C64) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(Monomial::new(exps), c);
        p
    }

    /// Affine form `c0 + Σ_j coeffs[j] z_j`.
    pub fn linear(c0: C64, coeffs: &[C64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (j, &c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(n, j), c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn from_hash(nvars: usize, map: MonoMap<C64>) -> Self {
        Polynomial {
            nvars,
            terms: map.into_iter().filter(|(_, c)| *c != ZERO).collect(),
        }
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u16]) -> C64 {
        self.terms
            .get(&Monomial::new(exps))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Adds `c·m`, dropping the entry if it cancels exactly.
    pub fn add_term(&mut self, m: Monomial, c: C64) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c == ZERO {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// `self += other` in place.
    pub fn add_assign(&mut self, other: &Polynomial) {
        assert_eq!(self.nvars, other.nvars);
        for (m, c) in &other.terms {
            self.add_term(m.clone(), *c);
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.conj())).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Removes coefficients with magnitude `<= tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms.iter().map(|(m, c)| c * m.eval(z)).sum()
    }

    pub fn derivative(&self, index: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exps()[index];
            if e == 0 {
                continue;
            }
            let mut d = m.clone();
            d.exps_mut()[index] -= 1;
            out.add_term(d, c * e as f64);
        }
        out
    }

    /// Mixed derivative `∂^alpha`.
    pub fn derivative_multi(&self, alpha: &[u16]) -> Self {
        let mut out = Self::zero(self.nvars);
        'terms: for (m, c) in &self.terms {
            let mut d = m.clone();
            let mut factor = 1.0;
            for (i, &a) in alpha.iter().enumerate() {
                let e = m.exps()[i];
                if a > e {
                    continue 'terms;
                }
                for k in 0..a {
                    factor *= (e - k) as f64;
                }
                d.exps_mut()[i] = e - a;
            }
            out.add_term(d, c * factor);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Composition with the affine map `z_i ↦ Σ_j map[(i,j)] w_j + shift[i]`.
    /// `map` has `self.nvars()` rows; the result lives in `map.ncols()` variables.
    pub fn compose_affine(&self, map: &DMatrix<C64>, shift: &DVector<C64>) -> Self {
        assert_eq!(map.nrows(), self.nvars);
        let new_n = map.ncols();
        let forms: Vec<Polynomial> = (0..self.nvars)
            .map(|i| {
                let coeffs: Vec<C64> = (0..new_n).map(|j| map[(i, j)]).collect();
                Polynomial::linear(shift[i], &coeffs)
            })
            .collect();
        let mut powers: Vec<Vec<Polynomial>> = vec![vec![Polynomial::one(new_n)]; self.nvars];
        let mut acc: MonoMap<C64> = MonoMap::default();
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(new_n, *c);
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &forms[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][e as usize];
            }
            for (tm, tc) in term.terms {
                *acc.entry(tm).or_insert(ZERO) += tc;
            }
        }
        Self::from_hash(new_n, acc)
    }

    /// Re-indexes into a polynomial in `nvars` variables, sending variable `i`
    /// to `positions[i]`.
    pub fn embed(&self, nvars: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.nvars);
        Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.embed(nvars, positions), *c))
                .collect(),
        }
    }

    /// Substitutes a univariate polynomial's variable by `inner`.
    pub fn compose_univariate(coeffs: &[C64], inner: &Polynomial) -> Self {
        let n = inner.nvars();
        let mut acc = Polynomial::zero(n);
        for &c in coeffs.iter().rev() {
            acc = &(&acc * inner) + &Polynomial::constant(n, c);
        }
        acc
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut acc: MonoMap<C64> = MonoMap::with_capacity_and_hasher(self.len() * rhs.len(), Default::default());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_insert(ZERO) += ca * cb;
            }
        }
        Polynomial::from_hash(self.nvars, acc)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(C64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn derivative_monomial_rule() {
        // ∂_x (x² p) = 2 x p
        let p = Polynomial::monomial(&[2, 1], c(1.0));
        let d = p.derivative(0);
        assert_eq!(d, Polynomial::monomial(&[1, 1], c(2.0)));
        assert_eq!(p.derivative_multi(&[2, 1]), Polynomial::constant(2, c(2.0)));
        assert!(p.derivative_multi(&[3, 0]).is_zero());
    }

    #[test]
    fn product_and_cancellation() {
        let x = Polynomial::var(2, 0);
        let p = Polynomial::var(2, 1);
        let s = &x + &p;
        let d = &x - &p;
        let prod = &s * &d;
        let expect = &x.pow(2) - &p.pow(2);
        assert_eq!(prod, expect);
        assert!((&prod - &expect).is_zero());
    }

    #[test]
    fn affine_composition() {
        // (x + 2p)² with x -> w + 1, p -> w
        let x = Polynomial::var(2, 0);
        let p = Polynomial::var(2, 1);
        let f = (&x + &p.scale(c(2.0))).pow(2);
        let map = DMatrix::from_row_slice(2, 1, &[c(1.0), c(1.0)]);
        let shift = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let g = f.compose_affine(&map, &shift);
        // (3w + 1)² = 9w² + 6w + 1
        assert_eq!(g.coeff(&[2]), c(9.0));
        assert_eq!(g.coeff(&[1]), c(6.0));
        assert_eq!(g.coeff(&[0]), c(1.0));
    }

    #[test]
    fn univariate_composition() {
        let x = Polynomial::var(1, 0);
        let inner = &x + &Polynomial::one(1);
        let g = Polynomial::compose_univariate(&[c(0.0), c(0.0), c(1.0)], &inner);
        assert_eq!(g, inner.pow(2));
    }
}
