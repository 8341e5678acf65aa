//! Independent references used by the checks: power-series Taylor
//! coefficients of the closed-form star exponentials and seeded random
//! instances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Monomial, Polynomial, QGFunction, QuadExponent, VarSpace};
use crate::error::{Error, Result};
use crate::models::{hamiltonian, ModelId};

fn mul_series(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    (0..=order)
        .map(|k| (0..=k).map(|j| a.get(j).unwrap_or(&0.0) * b.get(k - j).unwrap_or(&0.0)).sum())
        .collect()
}

fn inv_series(a: &[f64], order: usize) -> Vec<f64> {
    let mut b = vec![0.0; order + 1];
    b[0] = 1.0 / a[0];
    for k in 1..=order {
        let s: f64 = (1..=k).map(|j| a.get(j).unwrap_or(&0.0) * b[k - j]).sum();
        b[k] = -s / a[0];
    }
    b
}

/// Taylor coefficients in `t` of `cos(ct)`/`sin(ct)` (or `cosh`/`sinh`).
fn trig_series(c: f64, hyperbolic: bool, order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut even = vec![0.0; order + 1];
    let mut odd = vec![0.0; order + 1];
    let mut term = 1.0;
    for k in 0..=order {
        if k > 0 {
            term *= c / k as f64;
        }
        let sign = if hyperbolic || (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even[k] = sign * term;
        } else {
            odd[k] = sign * term;
        }
    }
    (even, odd)
}

/// Taylor coefficients of `sec θ · exp[−(2i/(ħν)) tan θ · H]`, `θ = νt/2`
/// (hyperbolic functions for the damped toy model), as pointwise
/// polynomials in `H`.
pub fn closed_form_taylor(model: &ModelId, space: VarSpace, order: usize) -> Result<Vec<QGFunction>> {
    let (nu, hyperbolic) = match *model {
        ModelId::HarmonicOscillator { omega } => (omega, false),
        ModelId::DampedToy { gamma } => (gamma, true),
        ModelId::DampedHo { .. } => {
            return Err(Error::InvalidParameter("no closed form for the damped oscillator".into()))
        }
    };
    let h = hamiltonian(model, space)?.as_polynomial().expect("hamiltonians are polynomial");
    let (cos, sin) = trig_series(nu / 2.0, hyperbolic, order);
    let sec = inv_series(&cos, order);
    let tan = mul_series(&sin, &sec, order);
    let k = C64::new(0.0, -2.0 / (space.hbar() * nu));
    // weights[j] = series of sec · tan^j
    let mut weights = vec![sec.clone()];
    for j in 1..=order {
        weights.push(mul_series(&weights[j - 1], &tan, order));
    }
    let mut hpow = vec![Polynomial::one(space.dim())];
    for j in 1..=order {
        hpow.push(&hpow[j - 1] * &h);
    }
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    let mut scal = Vec::with_capacity(order + 1);
    for j in 0..=order {
        if j > 0 {
            fact *= j as f64;
        }
        scal.push(k.powu(j as u32) / fact);
    }
    for t in 0..=order {
        let mut acc = Polynomial::zero(space.dim());
        for j in 0..=t {
            let w = weights[j][t];
            if w != 0.0 {
                acc.add_assign(&hpow[j].scale(scal[j] * w));
            }
        }
        out.push(QGFunction::from_poly(space, acc));
    }
    Ok(out)
}

fn uniform_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random polynomial of total degree `<= degree`.
pub fn random_polynomial(rng: &mut ChaCha8Rng, nvars: usize, degree: u16) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    let mut exps = vec![0u16; nvars];
    loop {
        let d: u16 = exps.iter().sum();
        if d <= degree {
            p.add_term(Monomial::new(&exps), uniform_c(rng));
        }
        let mut i = 0;
        loop {
            if i == nvars {
                return p;
            }
            if exps[i] < degree {
                exps[i] += 1;
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

/// Random polynomial times a complex Gaussian whose real part is positive
/// definite.
pub fn random_gaussian(rng: &mut ChaCha8Rng, space: VarSpace, degree: u16) -> QGFunction {
    let d = space.dim();
    let b = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-0.5..0.5));
    let re = &b * b.transpose() + DMatrix::identity(d, d) * 0.6;
    let im = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-0.5..0.5));
    let a = DMatrix::from_fn(d, d, |i, j| C64::new(re[(i, j)], 0.5 * (im[(i, j)] + im[(j, i)])));
    let lin = DVector::from_fn(d, |_, _| uniform_c(rng) * 0.3);
    let expo = QuadExponent::new(a, lin, C64::new(0.0, 0.0));
    QGFunction::gaussian(space, random_polynomial(rng, d, degree), expo)
}
