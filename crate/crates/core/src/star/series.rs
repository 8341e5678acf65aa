//! Terminating bidifferential expansion of the star product when one factor
//! is a polynomial.

use std::collections::HashMap;

use num_complex::Complex64 as C64;

use crate::algebra::{monomial_divisors, Polynomial, QGFunction, QGTerm};

/// Mixed derivatives of one term, memoized by multi-index.
struct DerivativeCache {
    memo: HashMap<Vec<u16>, QGTerm>,
}

impl DerivativeCache {
    fn new(term: &QGTerm) -> Self {
        let mut memo = HashMap::new();
        memo.insert(vec![0; term.poly.nvars()], term.clone());
        DerivativeCache { memo }
    }

    fn get(&mut self, alpha: &[u16]) -> QGTerm {
        if let Some(t) = self.memo.get(alpha) {
            return t.clone();
        }
        let i = alpha.iter().position(|&a| a > 0).expect("zero index is seeded");
        let mut lower = alpha.to_vec();
        lower[i] -= 1;
        let d = self.get(&lower).derivative(i);
        self.memo.insert(alpha.to_vec(), d.clone());
        d
    }
}

fn factorial(n: u16) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Exponent-wise maximum over the monomials of `p`.
fn exponent_box(p: &Polynomial) -> Vec<u16> {
    let mut bound = vec![0u16; p.nvars()];
    for (m, _) in p.terms() {
        for (b, &e) in bound.iter_mut().zip(m.exps()) {
            *b = (*b).max(e);
        }
    }
    bound
}

/// Swaps the x and p halves of a multi-index.
fn swap_halves(alpha: &[u16], dof: usize) -> Vec<u16> {
    let mut out = alpha[dof..].to_vec();
    out.extend_from_slice(&alpha[..dof]);
    out
}

/// `(iħ/2)^{|α|} / α! · (−1)^{|α_p|}`.
fn weight(alpha: &[u16], dof: usize, hbar: f64) -> C64 {
    let order: u32 = alpha.iter().map(|&a| a as u32).sum();
    let p_order: u32 = alpha[dof..].iter().map(|&a| a as u32).sum();
    let denom: f64 = alpha.iter().map(|&a| factorial(a)).product();
    let sign = if p_order.is_multiple_of(2) { 1.0 } else { -1.0 };
    C64::new(0.0, hbar / 2.0).powu(order) * (sign / denom)
}

/// `f ⋆ g` with `f` a polynomial.
pub(crate) fn poly_left(f: &Polynomial, g: &QGFunction) -> QGFunction {
    let space = g.space();
    let (dof, hbar) = (space.dof(), space.hbar());
    let bound = exponent_box(f);
    let mut alphas: Vec<(Vec<u16>, Polynomial)> = Vec::new();
    monomial_divisors(&bound, |alpha| {
        let d = f.derivative_multi(alpha);
        if !d.is_zero() {
            alphas.push((alpha.to_vec(), d.scale(weight(alpha, dof, hbar))));
        }
    });
    let mut terms = Vec::with_capacity(g.terms().len());
    for t in g.terms() {
        let mut cache = DerivativeCache::new(t);
        let mut acc = Polynomial::zero(space.dim());
        for (alpha, df) in &alphas {
            let dg = cache.get(&swap_halves(alpha, dof));
            acc.add_assign(&(df * &dg.poly));
        }
        terms.push(QGTerm {
            poly: acc,
            expo: t.expo.clone(),
        });
    }
    QGFunction::canonical(space, terms)
}

/// `f ⋆ g` with `g` a polynomial.
pub(crate) fn poly_right(f: &QGFunction, g: &Polynomial) -> QGFunction {
    let space = f.space();
    let (dof, hbar) = (space.dof(), space.hbar());
    // derivatives β = σα land on g
    let bound = exponent_box(g);
    let mut alphas: Vec<(Vec<u16>, Polynomial)> = Vec::new();
    monomial_divisors(&bound, |beta| {
        let d = g.derivative_multi(beta);
        if !d.is_zero() {
            let alpha = swap_halves(beta, dof);
            let w = weight(&alpha, dof, hbar);
            alphas.push((alpha, d.scale(w)));
        }
    });
    let mut terms = Vec::with_capacity(f.terms().len());
    for t in f.terms() {
        let mut cache = DerivativeCache::new(t);
        let mut acc = Polynomial::zero(space.dim());
        for (alpha, dg) in &alphas {
            let df = cache.get(alpha);
            acc.add_assign(&(&df.poly * dg));
        }
        terms.push(QGTerm {
            poly: acc,
            expo: t.expo.clone(),
        });
    }
    QGFunction::canonical(space, terms)
}
