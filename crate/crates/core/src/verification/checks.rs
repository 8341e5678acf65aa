use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::oracles::{closed_form_taylor, random_gaussian, random_polynomial};
use super::report::{CheckEntry, CheckId, VerificationReport};
use super::VerifyConfig;
use crate::algebra::{Monomial, Polynomial, QGFunction, QuadExponent, VarSpace};
use crate::error::Result;
use crate::models::{
    conjugation_by_v, dho_f, dho_g, eigenfunction, hamiltonian, koopman_apply, light_cone_pullback,
    oscillator_wigner, oscillator_wigner_ladder, spectrum, toy_resonant, toy_resonant_ladder, wigner_pair_transform,
    LadderSet, ModelId, PairNormalization, Quanta, Sign, WaveFunction,
};
use crate::star::{evolve, moyal_bracket, quadrature_star_oracle, star, star_exp_closed, star_exp_series};

/// Eigenfunction family selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Oscillator Wigner functions.
    W,
    /// Resonant family of the damped toy model or the damped oscillator.
    F,
    /// Second damped-oscillator family.
    G,
}

type Params = BTreeMap<String, Value>;

macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = Params::new();
        $( m.insert($k.to_string(), json!($v)); )*
        m
    }};
}

/// Runs `body`, timing it and turning errors into failed entries.
fn timed(name: CheckId, params: Params, tol: f64, body: impl FnOnce() -> Result<f64>) -> CheckEntry {
    let start = Instant::now();
    let mut entry = match body() {
        Ok(res) => CheckEntry::new(name, params, res, tol),
        Err(e) => CheckEntry::failed(name, params, tol, e.to_string()),
    };
    entry.wall_time = start.elapsed().as_secs_f64();
    entry
}

/// `coeff_norm(a − b) / coeff_norm(b)`, or the absolute norm if `b = 0`.
pub fn relative_distance(a: &QGFunction, b: &QGFunction) -> Result<f64> {
    let d = a.distance(b)?;
    let scale = b.coeff_norm();
    Ok(if scale > 0.0 { d / scale } else { d })
}

/// `[‖H⋆F − EF‖ + ‖F⋆H − EF‖] / (|E|·‖F‖)` in `coeff_norm`.
pub fn eigen_residual(h: &QGFunction, f: &QGFunction, e: C64) -> Result<f64> {
    let ef = f.scale(e);
    let left = star(h, f)?.distance(&ef)?;
    let right = star(f, h)?.distance(&ef)?;
    Ok((left + right) / (e.norm() * f.coeff_norm()))
}

fn space(cfg: &VerifyConfig, dof: usize) -> Result<VarSpace> {
    VarSpace::new(dof, cfg.hbar)
}

fn signs() -> [Sign; 2] {
    [Sign::Plus, Sign::Minus]
}

fn members(model: &ModelId, family: Family, max_index: usize) -> Vec<(Quanta, Option<Sign>)> {
    let mut out = Vec::new();
    match (model, family) {
        (ModelId::HarmonicOscillator { .. }, Family::W) => {
            for n in 0..=max_index {
                out.push((Quanta::Single { n }, None));
            }
        }
        (ModelId::DampedToy { .. }, Family::F) => {
            for n in 0..=max_index {
                for s in signs() {
                    out.push((Quanta::Single { n }, Some(s)));
                }
            }
        }
        (ModelId::DampedHo { .. }, Family::F) => {
            for n in 0..=max_index {
                for m in 0..=max_index {
                    for s in signs() {
                        out.push((Quanta::F { n, m }, Some(s)));
                    }
                }
            }
        }
        (ModelId::DampedHo { .. }, Family::G) => {
            for n in 0..=max_index {
                for m in 0..=max_index {
                    out.push((Quanta::G { n, m }, None));
                }
            }
        }
        _ => {}
    }
    out
}

fn member_params(model: &ModelId, quanta: Quanta, sign: Option<Sign>) -> Params {
    let mut p = params! { "model" => model.name() };
    match quanta {
        Quanta::Single { n } => {
            p.insert("n".into(), json!(n));
        }
        Quanta::F { n, m } => {
            p.insert("family".into(), json!("F"));
            p.insert("n".into(), json!(n));
            p.insert("m".into(), json!(m));
        }
        Quanta::G { n, m } => {
            p.insert("family".into(), json!("G"));
            p.insert("n".into(), json!(n));
            p.insert("m".into(), json!(m));
        }
    }
    if let Some(s) = sign {
        p.insert("sign".into(), json!(s.symbol()));
    }
    p
}

/// Two-sided eigen-equations for every member of a family.
pub fn check_eigen(cfg: &VerifyConfig, model: &ModelId, family: Family, max_index: usize) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::EigenResidual);
    let mut entries = Vec::new();
    let sp = match space(cfg, model.dof()) {
        Ok(s) => s,
        Err(e) => {
            return VerificationReport::from_entries(vec![CheckEntry::failed(
                CheckId::EigenResidual,
                params! {"model" => model.name()},
                tol,
                e.to_string(),
            )])
        }
    };
    let h = hamiltonian(model, sp);
    for (quanta, sign) in members(model, family, max_index) {
        let p = member_params(model, quanta, sign);
        entries.push(timed(CheckId::EigenResidual, p, tol, || {
            let h = h.clone()?;
            let f = eigenfunction(model, sp, quanta, sign)?;
            let e = spectrum(model, sp.hbar(), quanta, sign)?.eigenvalue;
            eigen_residual(&h, &f, e)
        }));
    }
    VerificationReport::from_entries(entries)
}

/// Ladder constructions against closed forms, vacuum conditions and CCRs.
pub fn check_structure(cfg: &VerifyConfig) -> VerificationReport {
    let eigen_tol = cfg.tolerance(CheckId::EigenResidual);
    let ccr_tol = cfg.tolerance_or(CheckId::EigenResidual, 1e-12);
    let mut entries = Vec::new();
    let s1 = space(cfg, 1);
    let s2 = space(cfg, 2);

    for n in 0..=8 {
        entries.push(timed(
            CheckId::EigenResidual,
            params! {"identity" => "ladder_equivalence", "family" => "W", "n" => n},
            eigen_tol,
            || {
                let s = s1.clone()?;
                relative_distance(&oscillator_wigner_ladder(n, s)?, &oscillator_wigner(n, s)?)
            },
        ));
        for sign in signs() {
            entries.push(timed(
                CheckId::EigenResidual,
                params! {"identity" => "ladder_equivalence", "family" => "F", "n" => n, "sign" => sign.symbol()},
                eigen_tol,
                || {
                    let s = s1.clone()?;
                    relative_distance(&toy_resonant_ladder(n, sign, s)?, &toy_resonant(n, sign, s)?)
                },
            ));
        }
    }

    // ⋆-vacuum conditions: each product must vanish.
    let vacua: Vec<(&str, Box<dyn Fn() -> Result<f64>>)> = vec![
        (
            "a*W0",
            Box::new(|| {
                let s = s1.clone()?;
                let l = LadderSet::oscillator(s)?;
                let w0 = oscillator_wigner(0, s)?;
                Ok(star(l.get("a").unwrap(), &w0)?.coeff_norm() / w0.coeff_norm())
            }),
        ),
        (
            "W0*a^",
            Box::new(|| {
                let s = s1.clone()?;
                let l = LadderSet::oscillator(s)?;
                let w0 = oscillator_wigner(0, s)?;
                Ok(star(&w0, l.get("a*").unwrap())?.coeff_norm() / w0.coeff_norm())
            }),
        ),
        (
            "p*F0+",
            Box::new(|| {
                let s = s1.clone()?;
                let f0 = toy_resonant(0, Sign::Plus, s)?;
                Ok(star(&QGFunction::p(s, 0), &f0)?.coeff_norm() / f0.coeff_norm())
            }),
        ),
        (
            "F0+*x",
            Box::new(|| {
                let s = s1.clone()?;
                let f0 = toy_resonant(0, Sign::Plus, s)?;
                Ok(star(&f0, &QGFunction::x(s, 0))?.coeff_norm() / f0.coeff_norm())
            }),
        ),
        (
            "a1*F00+",
            Box::new(|| {
                let s = s2.clone()?;
                let l = LadderSet::damped_ho(s)?;
                let f = dho_f(0, 0, Sign::Plus, s)?;
                Ok(star(l.get("a1").unwrap(), &f)?.coeff_norm() / f.coeff_norm())
            }),
        ),
        (
            "F00+*a2^",
            Box::new(|| {
                let s = s2.clone()?;
                let l = LadderSet::damped_ho(s)?;
                let f = dho_f(0, 0, Sign::Plus, s)?;
                Ok(star(&f, l.get("a2*").unwrap())?.coeff_norm() / f.coeff_norm())
            }),
        ),
        (
            "ak*G00,G00*ak^",
            Box::new(|| {
                let s = s2.clone()?;
                let l = LadderSet::damped_ho(s)?;
                let g = dho_g(0, 0, s)?;
                let mut worst: f64 = 0.0;
                for (left, right) in [("a1", "a1*"), ("a2", "a2*")] {
                    worst = worst.max(star(l.get(left).unwrap(), &g)?.coeff_norm());
                    worst = worst.max(star(&g, l.get(right).unwrap())?.coeff_norm());
                }
                Ok(worst / g.coeff_norm())
            }),
        ),
    ];
    for (label, body) in vacua {
        let label = label.replace('^', "*");
        entries.push(timed(
            CheckId::EigenResidual,
            params! {"identity" => "vacuum", "product" => label},
            ccr_tol,
            body,
        ));
    }

    // Canonical commutation relations.
    entries.push(timed(
        CheckId::EigenResidual,
        params! {"identity" => "ccr", "pair" => "x,p", "expected" => "i*hbar"},
        ccr_tol,
        || {
            let s = s1.clone()?;
            let br = moyal_bracket(&QGFunction::x(s, 0), &QGFunction::p(s, 0))?;
            relative_distance(&br, &QGFunction::constant(s, C64::new(0.0, s.hbar())))
        },
    ));
    entries.push(timed(
        CheckId::EigenResidual,
        params! {"identity" => "ccr", "pair" => "a,a*", "expected" => 1},
        ccr_tol,
        || {
            let s = s1.clone()?;
            let l = LadderSet::oscillator(s)?;
            let br = moyal_bracket(l.get("a").unwrap(), l.get("a*").unwrap())?;
            br.distance(&QGFunction::constant(s, C64::new(1.0, 0.0)))
        },
    ));
    let dho_pairs = [
        ("a1", "a2", 0.0),
        ("a1", "a1*", 0.0),
        ("a2", "a2*", 0.0),
        ("a1*", "a2*", 0.0),
        ("a1", "a2*", 1.0),
        ("a2", "a1*", 1.0),
    ];
    for (a, b, want) in dho_pairs {
        entries.push(timed(
            CheckId::EigenResidual,
            params! {"identity" => "ccr", "pair" => format!("{a},{b}"), "expected" => want},
            ccr_tol,
            || {
                let s = s2.clone()?;
                let l = LadderSet::damped_ho(s)?;
                let br = moyal_bracket(l.get(a).unwrap(), l.get(b).unwrap())?;
                br.distance(&QGFunction::constant(s, C64::new(want, 0.0)))
            },
        ));
    }
    VerificationReport::from_entries(entries)
}

/// Regularizing factor `e^{−δ(|x|² + |p|²)}`.
fn damping(space: VarSpace, delta: f64) -> QGFunction {
    let d = space.dim();
    let a = DMatrix::from_diagonal_element(d, d, C64::new(2.0 * delta, 0.0));
    QGFunction::gaussian(space, Polynomial::one(d), QuadExponent::quadratic(a))
}

/// `(2πħ)^N Fₙ⋆Fₘ = δₙₘFₙ` across a family, plus quadrature-oracle samples.
pub fn check_star_orthogonality(
    cfg: &VerifyConfig,
    model: &ModelId,
    family: Family,
    max_index: usize,
) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::StarOrthogonality);
    let mut entries = Vec::new();
    let sp = match space(cfg, model.dof()) {
        Ok(s) => s,
        Err(e) => {
            return VerificationReport::from_entries(vec![CheckEntry::failed(
                CheckId::StarOrthogonality,
                params! {"model" => model.name()},
                tol,
                e.to_string(),
            )])
        }
    };
    let scale = (2.0 * PI * sp.hbar()).powi(sp.dof() as i32);
    let all = members(model, family, max_index);
    let sign_groups: Vec<Option<Sign>> = if family == Family::W {
        vec![None]
    } else {
        vec![Some(Sign::Plus), Some(Sign::Minus)]
    };
    for sign in sign_groups {
        let group: Vec<Quanta> = all.iter().filter(|(_, s)| *s == sign).map(|(q, _)| *q).collect();
        let built: Vec<Result<QGFunction>> = group.iter().map(|&q| eigenfunction(model, sp, q, sign)).collect();
        for (i, qi) in group.iter().enumerate() {
            for (j, qj) in group.iter().enumerate() {
                let mut p = member_params(model, *qi, sign);
                let (li, lj) = (label(qi), label(qj));
                p.insert("left".into(), json!(li));
                p.insert("right".into(), json!(lj));
                p.remove("n");
                p.remove("m");
                entries.push(timed(CheckId::StarOrthogonality, p, tol, || {
                    let fi = built[i].clone()?;
                    let fj = built[j].clone()?;
                    let prod = star(&fi, &fj)?.scale_real(scale);
                    let norm = fi.coeff_norm();
                    if i == j {
                        Ok(prod.distance(&fi)? / norm)
                    } else {
                        Ok(prod.coeff_norm() / norm)
                    }
                }));
            }
        }
    }
    VerificationReport::from_entries(entries)
}

fn label(q: &Quanta) -> String {
    match q {
        Quanta::Single { n } => format!("{n}"),
        Quanta::F { n, m } | Quanta::G { n, m } => format!("{n}{m}"),
    }
}

/// Closed-form star products of one-dimensional family members against the
/// quadrature oracle at seeded random points, relative to the larger of
/// the product and the peak values of the factors. Resonant members are damped
/// by `e^{−δ(x²+p²)}` to make the oracle integrals absolutely convergent.
pub fn check_oracle_samples(cfg: &VerifyConfig, samples: usize) -> VerificationReport {
    let tol = cfg.tolerance_or(CheckId::StarOrthogonality, 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6f72_6163);
    let mut entries = Vec::new();
    let sp = match space(cfg, 1) {
        Ok(s) => s,
        Err(_) => return VerificationReport::default(),
    };
    for k in 0..samples {
        use rand::Rng;
        let n = rng.gen_range(0..=3usize);
        let m = rng.gen_range(0..=3usize);
        let z = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let resonant = k % 2 == 1;
        let p = params! {
            "family" => if resonant { "F+ damped" } else { "W" },
            "left" => n, "right" => m, "x" => z[0], "p" => z[1],
        };
        entries.push(timed(CheckId::StarOrthogonality, p, tol, || {
            let (f, g) = if resonant {
                let d = damping(sp, cfg.oracle_damping);
                (
                    toy_resonant(n, Sign::Plus, sp)?.multiply(&d)?,
                    toy_resonant(m, Sign::Plus, sp)?.multiply(&d)?,
                )
            } else {
                (oscillator_wigner(n, sp)?, oscillator_wigner(m, sp)?)
            };
            // (2πħ)·f⋆g is of the size of the factors, so peak values set the scale
            let k = 2.0 * PI * sp.hbar();
            let closed = star(&f, &g)?.evaluate_real(&z)? * k;
            let quad = quadrature_star_oracle(&f, &g, &z, &cfg.oracle)? * k;
            let origin = [0.0, 0.0];
            let scale = closed
                .norm()
                .max(f.evaluate_real(&origin)?.norm())
                .max(g.evaluate_real(&origin)?.norm());
            Ok((closed - quad).norm() / scale)
        }));
    }
    VerificationReport::from_entries(entries)
}

/// Test functions `mono · e^{−|x|²/(2s²)}` on configuration variables,
/// widths `s ∈ {0.5, 1, 2}`.
pub fn marginal_tests(dof: usize) -> Vec<(String, Polynomial, f64, f64)> {
    let monos: Vec<(String, Vec<u16>)> = if dof == 1 {
        vec![("1".into(), vec![0]), ("x".into(), vec![1]), ("x^2".into(), vec![2])]
    } else {
        vec![
            ("1".into(), vec![0, 0]),
            ("x1".into(), vec![1, 0]),
            ("x1*x2".into(), vec![1, 1]),
        ]
    };
    let mut out = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        for (name, e) in &monos {
            let value_at_zero = if e.iter().all(|&v| v == 0) { 1.0 } else { 0.0 };
            out.push((name.clone(), Polynomial::monomial(e, C64::new(1.0, 0.0)), s, value_at_zero));
        }
    }
    out
}

/// `φ` on the position block (`on_momentum = false`) or the momentum block.
fn embed_test(space: VarSpace, mono: &Polynomial, width: f64, on_momentum: bool) -> QGFunction {
    let n = space.dof();
    let offset = if on_momentum { n } else { 0 };
    let positions: Vec<usize> = (offset..offset + n).collect();
    let d = space.dim();
    let mut a = DMatrix::zeros(d, d);
    for &i in &positions {
        a[(i, i)] = C64::new(1.0 / (width * width), 0.0);
    }
    QGFunction::gaussian(space, mono.embed(d, &positions), QuadExponent::quadratic(a))
}

/// Weak-form delta marginals: `pair(F, φ⊗1) = φ(0)` over the test family.
pub fn check_marginals(cfg: &VerifyConfig, model: &ModelId, quanta: Quanta, sign: Sign) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::MarginalDelta);
    let mut entries = Vec::new();
    let sp = match space(cfg, model.dof()) {
        Ok(s) => s,
        Err(_) => return VerificationReport::default(),
    };
    let f = eigenfunction(model, sp, quanta, Some(sign));
    for (marginal, on_momentum) in [("x", false), ("p", true)] {
        let mut p = member_params(model, quanta, Some(sign));
        p.insert("marginal".into(), json!(marginal));
        let tests = marginal_tests(sp.dof());
        p.insert("tests".into(), json!(tests.len()));
        entries.push(timed(CheckId::MarginalDelta, p, tol, || {
            let f = f.clone()?;
            let mut worst: f64 = 0.0;
            for (_, mono, width, at_zero) in &tests {
                let phi = embed_test(sp, mono, *width, on_momentum);
                let v = f.pair(&phi)?;
                worst = worst.max((v - C64::new(*at_zero, 0.0)).norm() / at_zero.max(1.0));
            }
            Ok(worst)
        }));
    }
    VerificationReport::from_entries(entries)
}

/// `∫F = 1` for normalized family members.
pub fn check_normalization(cfg: &VerifyConfig, model: &ModelId, family: Family, max_index: usize) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::Normalization);
    let sp = match space(cfg, model.dof()) {
        Ok(s) => s,
        Err(_) => return VerificationReport::default(),
    };
    let entries = members(model, family, max_index)
        .into_iter()
        .map(|(q, s)| {
            timed(CheckId::Normalization, member_params(model, q, s), tol, || {
                let f = eigenfunction(model, sp, q, s)?;
                Ok((f.gaussian_integral()? - C64::new(1.0, 0.0)).norm())
            })
        })
        .collect();
    VerificationReport::from_entries(entries)
}

/// `e^{−(|x|²+|p|²)/(κħ)}`.
pub fn isotropic_gaussian(space: VarSpace, kappa: f64) -> QGFunction {
    let d = space.dim();
    let a = DMatrix::from_diagonal_element(d, d, C64::new(2.0 / (kappa * space.hbar()), 0.0));
    QGFunction::gaussian(space, Polynomial::one(d), QuadExponent::quadratic(a))
}

/// Phase-space symbol of the operator kernel `e^{−(a x² + b y²)/ħ}`:
/// `e^{−c₁x² − c₂p² + ic₃xp}`. Complex unless `a = b`.
pub fn kernel_gaussian(space: VarSpace, a: f64, b: f64) -> QGFunction {
    let h = space.hbar();
    let (al, be) = (a / h, b / h);
    let c1 = 4.0 * al * be / (al + be);
    let c2 = 1.0 / (h * h * (al + be));
    let c3 = 2.0 * (al - be) / (h * (al + be));
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(2.0 * c1, 0.0), C64::new(0.0, -c3), C64::new(0.0, -c3), C64::new(2.0 * c2, 0.0)],
    );
    QGFunction::gaussian(space, Polynomial::one(2), QuadExponent::quadratic(m))
}

/// Partial sums of a one-dimensional family paired with `test`, against
/// `(2πħ)^{−1} ∫ test`. The residual is the ratio of the error at
/// `N = n_max` to the error at `N = 2` over even `N`; a sequence that is
/// not strictly decreasing fails.
pub fn check_identity_resolution(
    cfg: &VerifyConfig,
    which: &str,
    n_max: usize,
    test: &QGFunction,
    test_label: &str,
) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::IdentityResolution);
    let p = params! {"family" => which, "n_max" => n_max, "test" => test_label};
    let start = Instant::now();
    let mut seq: Vec<f64> = Vec::new();
    let result = (|| -> Result<f64> {
        let sp = test.space();
        let target = test.gaussian_integral()? / (2.0 * PI * sp.hbar());
        let mut sum = C64::new(0.0, 0.0);
        let mut residuals = Vec::new();
        for n in 0..=n_max {
            let term = match which {
                "W" => oscillator_wigner(n, sp)?.pair(test)?,
                "F+" => toy_resonant(n, Sign::Plus, sp)?.pair(test)?,
                "F-" => toy_resonant(n, Sign::Minus, sp)?.pair(test)?,
                "ReF+" => {
                    let f = toy_resonant(n, Sign::Plus, sp)?;
                    let re = f.add(&f.conjugate())?.scale_real(0.5);
                    re.pair(test)?
                }
                other => {
                    return Err(crate::error::Error::InvalidParameter(format!("unknown family {other}")))
                }
            };
            sum += term;
            residuals.push((sum - target).norm());
        }
        seq = residuals.iter().copied().skip(2).step_by(2).collect();
        let monotone = seq.windows(2).all(|w| w[1] < w[0]);
        if !monotone {
            return Ok(f64::INFINITY);
        }
        Ok(seq[seq.len() - 1] / seq[0])
    })();
    let mut p = p;
    p.insert("residuals_even_n_from_2".into(), json!(seq));
    let mut entry = match result {
        Ok(r) => CheckEntry::new(CheckId::IdentityResolution, p, r, tol),
        Err(e) => CheckEntry::failed(CheckId::IdentityResolution, p, tol, e.to_string()),
    };
    if entry.residual == super::report::FAILED_RESIDUAL && entry.diagnostic.is_none() {
        entry.diagnostic = Some("partial-sum residuals are not strictly decreasing".into());
        entry.passed = false;
    }
    entry.wall_time = start.elapsed().as_secs_f64();
    VerificationReport::from_entries(vec![entry])
}

/// Normalized ground state `W₀` centred at `(x0, p0)`.
fn displaced_ground(sp: VarSpace, x0: f64, p0: f64) -> Result<QGFunction> {
    let id = DMatrix::identity(2, 2);
    oscillator_wigner(0, sp)?.substitute_linear(&id, &DVector::from_vec(vec![C64::new(-x0, 0.0), C64::new(-p0, 0.0)]))
}

/// Series/closed-form agreement, the Moyal evolution equation and
/// classical transport of a displaced Gaussian.
pub fn check_evolution(cfg: &VerifyConfig, model: &ModelId, order: usize) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::EvolutionMatch);
    let transport_tol = cfg.tolerance_or(CheckId::EvolutionMatch, 1e-9);
    let mut entries = Vec::new();
    let sp = match space(cfg, 1) {
        Ok(s) => s,
        Err(_) => return VerificationReport::default(),
    };
    let name = model.name();
    let series = hamiltonian(model, sp).and_then(|h| star_exp_series(&h, order));
    let closed = closed_form_taylor(model, sp, order);
    for k in 0..=order {
        entries.push(timed(
            CheckId::EvolutionMatch,
            params! {"model" => name, "identity" => "series_vs_closed_form", "order" => k},
            tol,
            || {
                let s = series.clone()?;
                let c = closed.clone()?;
                relative_distance(&s[k], &c[k])
            },
        ));
    }
    for k in 0..order {
        entries.push(timed(
            CheckId::EvolutionMatch,
            params! {"model" => name, "identity" => "i hbar dU/dt = H*U", "order" => k},
            tol,
            || {
                let c = closed.clone()?;
                let h = hamiltonian(model, sp)?;
                let lhs = c[k + 1].scale(C64::new(0.0, sp.hbar() * (k + 1) as f64));
                relative_distance(&lhs, &star(&h, &c[k])?)
            },
        ));
    }
    // The closed-form function itself against its truncated Taylor sum.
    let t_small = 0.05;
    entries.push(timed(
        CheckId::EvolutionMatch,
        params! {"model" => name, "identity" => "closed_form_vs_taylor_sum", "t" => t_small},
        tol,
        || {
            let c = closed.clone()?;
            let u = star_exp_closed(model, sp, t_small)?;
            let mut worst: f64 = 0.0;
            for z in [[0.0, 0.0], [0.7, -0.4], [-1.2, 0.9]] {
                let exact = u.evaluate_real(&z)?;
                let mut approx = C64::new(0.0, 0.0);
                for (k, ck) in c.iter().enumerate() {
                    approx += ck.evaluate_real(&z)? * t_small.powi(k as i32);
                }
                worst = worst.max((exact - approx).norm() / exact.norm());
            }
            Ok(worst)
        },
    ));
    entries.push(timed(
        CheckId::EvolutionMatch,
        params! {"model" => name, "identity" => "evolve_at_zero"},
        tol,
        || {
            let f = displaced_ground(sp, 0.3, -0.2)?;
            relative_distance(&evolve(&f, model, 0.0)?, &f)
        },
    ));
    let (x0, p0) = (0.8, -0.5);
    for t in [0.1, 0.5] {
        entries.push(timed(
            CheckId::EvolutionMatch,
            params! {"model" => name, "identity" => "classical_transport", "t" => t, "x0" => x0, "p0" => p0},
            transport_tol,
            || {
                let f = displaced_ground(sp, x0, p0)?;
                let evolved = evolve(&f, model, t)?;
                // f(Φ_{−t}(z)): the point that flows to z in time t
                let back = match *model {
                    ModelId::HarmonicOscillator { omega } => {
                        let (s, c) = (omega * t).sin_cos();
                        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
                    }
                    ModelId::DampedToy { gamma } => {
                        DMatrix::from_row_slice(2, 2, &[(gamma * t).exp(), 0.0, 0.0, (-gamma * t).exp()])
                    }
                    ModelId::DampedHo { .. } => unreachable!("only one-dimensional models are evolved"),
                };
                let back = back.map(|v| C64::new(v, 0.0));
                let expected = f.substitute_linear(&back, &DVector::zeros(2))?;
                relative_distance(&evolved, &expected)
            },
        ));
    }
    // Quadratic Hamiltonians: the Moyal bracket is iħ times the Poisson bracket.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6576_6f6c);
    for k in 0..4 {
        let f = if k % 2 == 0 {
            QGFunction::from_poly(sp, random_polynomial(&mut rng, 2, 4))
        } else {
            random_gaussian(&mut rng, sp, 2)
        };
        entries.push(timed(
            CheckId::EvolutionMatch,
            params! {"model" => name, "identity" => "moyal_equals_i_hbar_poisson", "instance" => k},
            cfg.tolerance_or(CheckId::EvolutionMatch, 1e-12),
            || {
                let h = hamiltonian(model, sp)?;
                let m = moyal_bracket(&h, &f)?;
                let pb = h.poisson_bracket(&f)?.scale(C64::new(0.0, sp.hbar()));
                relative_distance(&m, &pb)
            },
        ));
    }
    VerificationReport::from_entries(entries)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `D f = i(P∂_P − X∂_X) f`.
fn scaling_generator(f: &QGFunction) -> Result<QGFunction> {
    let sp = f.space();
    let px = QGFunction::p(sp, 0).multiply(&f.differentiate(1)?)?;
    let xx = QGFunction::x(sp, 0).multiply(&f.differentiate(0)?)?;
    Ok(px.sub(&xx)?.scale(C64::new(0.0, 1.0)))
}

/// Complex scaling: images of `Wₙ` and generator relations.
pub fn check_complex_scaling(cfg: &VerifyConfig, max_index: usize, max_order: usize) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::ComplexScalingMatch);
    let mut entries = Vec::new();
    let sp = match space(cfg, 1) {
        Ok(s) => s,
        Err(_) => return VerificationReport::default(),
    };
    for n in 0..=max_index {
        for (lambda, sign) in [(-FRAC_PI_4, Sign::Plus), (FRAC_PI_4, Sign::Minus)] {
            entries.push(timed(
                CheckId::ComplexScalingMatch,
                params! {"identity" => "scaled_wigner", "n" => n, "lambda" => lambda, "sign" => sign.symbol()},
                tol,
                || {
                    let w = oscillator_wigner(n, sp)?;
                    let mapped = light_cone_pullback(&conjugation_by_v(&w, lambda)?)?;
                    relative_distance(&mapped, &toy_resonant(n, sign, sp)?)
                },
            ));
        }
    }
    let gamma = cfg.gamma;
    for (lambda, factor) in [(FRAC_PI_4, 1.0), (-FRAC_PI_4, -1.0)] {
        entries.push(timed(
            CheckId::ComplexScalingMatch,
            params! {"identity" => "inverted_oscillator", "lambda" => lambda},
            tol,
            || {
                let g2 = C64::new(gamma / 2.0, 0.0);
                let f = QGFunction::from_poly(
                    sp,
                    Polynomial::from_terms(2, [(Monomial::new(&[0, 2]), g2), (Monomial::new(&[2, 0]), -g2)]),
                );
                let want = QGFunction::from_poly(
                    sp,
                    Polynomial::from_terms(
                        2,
                        [
                            (Monomial::new(&[0, 2]), C64::new(0.0, factor * gamma / 2.0)),
                            (Monomial::new(&[2, 0]), C64::new(0.0, factor * gamma / 2.0)),
                        ],
                    ),
                );
                relative_distance(&conjugation_by_v(&f, lambda)?, &want)
            },
        ));
    }
    // λ^k coefficient of V_λ ⋆ f ⋆ V_{−λ} from the ⋆-exponential series of
    // XP/ħ, against D^k f / k! (the λ-derivatives of the substitution).
    let probes: Vec<(&str, Result<QGFunction>)> = vec![
        ("X", Ok(QGFunction::x(sp, 0))),
        ("P", Ok(QGFunction::p(sp, 0))),
        ("X^2+P^2", Ok(QGFunction::from_poly(sp, Polynomial::from_terms(2, [(Monomial::new(&[2, 0]), C64::new(1.0, 0.0)), (Monomial::new(&[0, 2]), C64::new(1.0, 0.0))])))),
        ("W_0", oscillator_wigner(0, sp)),
        ("W_1", oscillator_wigner(1, sp)),
    ];
    for (label, f) in probes {
        entries.push(timed(
            CheckId::ComplexScalingMatch,
            params! {"identity" => "generator_series", "function" => label, "max_order" => max_order},
            tol,
            || {
                let f = f?;
                let xp = QGFunction::from_poly(sp, Polynomial::monomial(&[1, 1], C64::new(1.0, 0.0)));
                let mut left = vec![f.clone()];
                for j in 1..=max_order {
                    left.push(star(&xp, &left[j - 1])?);
                }
                let mut worst: f64 = 0.0;
                let mut dk = f.clone();
                for k in 0..=max_order {
                    if k > 0 {
                        dk = scaling_generator(&dk)?;
                    }
                    let want = dk.scale_real(1.0 / factorial(k));
                    let mut acc = QGFunction::zero(sp);
                    for j in 0..=k {
                        let mut term = left[j].clone();
                        for _ in 0..(k - j) {
                            term = star(&term, &xp)?;
                        }
                        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                        let w = sign / (factorial(j) * factorial(k - j) * sp.hbar().powi(k as i32));
                        acc = acc.add(&term.scale_real(w))?;
                    }
                    let scale = f.coeff_norm().max(want.coeff_norm());
                    worst = worst.max(acc.distance(&want)? / scale);
                }
                Ok(worst)
            },
        ));
    }
    VerificationReport::from_entries(entries)
}

/// Stationary functions annihilated by the Koopman generator.
pub fn check_koopman(cfg: &VerifyConfig) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::KoopmanZeroMode);
    let mut entries = Vec::new();
    let osc = ModelId::HarmonicOscillator { omega: cfg.omega };
    let toy = ModelId::DampedToy { gamma: cfg.gamma };
    let dho = ModelId::DampedHo {
        omega: cfg.omega,
        gamma: cfg.gamma,
    };
    let mut cases: Vec<(ModelId, Quanta, Option<Sign>)> = Vec::new();
    for n in 0..=4 {
        cases.push((osc, Quanta::Single { n }, None));
        for s in signs() {
            cases.push((toy, Quanta::Single { n }, Some(s)));
        }
    }
    for n in 0..=2 {
        for m in 0..=2 {
            cases.push((dho, Quanta::F { n, m }, Some(Sign::Plus)));
            cases.push((dho, Quanta::G { n, m }, None));
        }
    }
    for (model, q, s) in cases {
        entries.push(timed(CheckId::KoopmanZeroMode, member_params(&model, q, s), tol, || {
            let sp = space(cfg, model.dof())?;
            let h = hamiltonian(&model, sp)?;
            let f = eigenfunction(&model, sp, q, s)?;
            Ok(koopman_apply(&h, &f)?.coeff_norm() / f.coeff_norm())
        }));
    }
    entries.push(timed(
        CheckId::KoopmanZeroMode,
        params! {"model" => "damped_toy", "function" => "x*p"},
        tol,
        || {
            let sp = space(cfg, 1)?;
            let h = hamiltonian(&toy, sp)?;
            let xp = QGFunction::from_poly(sp, Polynomial::monomial(&[1, 1], C64::new(1.0, 0.0)));
            Ok(koopman_apply(&h, &xp)?.coeff_norm())
        },
    ));
    VerificationReport::from_entries(entries)
}

/// Pair conjugation of families and the anti-homomorphism of conjugation.
pub fn check_conjugation(cfg: &VerifyConfig, random_instances: usize) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::ConjugationSymmetry);
    let mut entries = Vec::new();
    for n in 0..=8 {
        entries.push(timed(
            CheckId::ConjugationSymmetry,
            params! {"identity" => "F- = conj F+", "model" => "damped_toy", "n" => n},
            tol,
            || {
                let sp = space(cfg, 1)?;
                let a = relative_distance(&toy_resonant(n, Sign::Minus, sp)?, &toy_resonant(n, Sign::Plus, sp)?.conjugate())?;
                let b = relative_distance(
                    &toy_resonant_ladder(n, Sign::Minus, sp)?,
                    &toy_resonant_ladder(n, Sign::Plus, sp)?.conjugate(),
                )?;
                Ok(a.max(b))
            },
        ));
    }
    let dho = ModelId::DampedHo {
        omega: cfg.omega,
        gamma: cfg.gamma,
    };
    entries.push(timed(
        CheckId::ConjugationSymmetry,
        params! {"identity" => "F-_nm eigenvalue is conj E_nm", "model" => "damped_ho", "n" => 1, "m" => 2},
        cfg.tolerance_or(CheckId::ConjugationSymmetry, 1e-10),
        || {
            let sp = space(cfg, 2)?;
            let q = Quanta::F { n: 1, m: 2 };
            let plus = spectrum(&dho, sp.hbar(), q, Some(Sign::Plus))?.eigenvalue;
            let minus = spectrum(&dho, sp.hbar(), q, Some(Sign::Minus))?.eigenvalue;
            let f = dho_f(1, 2, Sign::Minus, sp)?;
            let h = hamiltonian(&dho, sp)?;
            Ok(eigen_residual(&h, &f, minus)? + (minus - plus.conj()).norm())
        },
    ));
    for n in 0..=2 {
        for m in 0..=2 {
            entries.push(timed(
                CheckId::ConjugationSymmetry,
                params! {"identity" => "G_nm = conj G_mn", "n" => n, "m" => m},
                tol,
                || {
                    let sp = space(cfg, 2)?;
                    relative_distance(&dho_g(n, m, sp)?.conjugate(), &dho_g(m, n, sp)?)
                },
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x636f_6e6a);
    for k in 0..random_instances {
        let sp = match space(cfg, 1) {
            Ok(s) => s,
            Err(_) => break,
        };
        let kind = k % 3;
        let f = if kind == 0 {
            QGFunction::from_poly(sp, random_polynomial(&mut rng, 2, 3))
        } else {
            random_gaussian(&mut rng, sp, 2)
        };
        let g = if kind == 2 {
            random_gaussian(&mut rng, sp, 2)
        } else {
            QGFunction::from_poly(sp, random_polynomial(&mut rng, 2, 3))
        };
        let kind_name = ["poly*poly", "gauss*poly", "gauss*gauss"][kind];
        entries.push(timed(
            CheckId::ConjugationSymmetry,
            params! {"identity" => "conj(f*g) = conj(g)*conj(f)", "instance" => k, "kind" => kind_name},
            tol,
            || {
                let lhs = star(&f, &g)?.conjugate();
                let rhs = star(&g.conjugate(), &f.conjugate())?;
                relative_distance(&lhs, &rhs)
            },
        ));
    }
    VerificationReport::from_entries(entries)
}

/// Resonant pairs and the Gaussian pair through the two-state transform.
pub fn check_pair_transform(cfg: &VerifyConfig) -> VerificationReport {
    let tol = cfg.tolerance(CheckId::PairTransformMatch);
    let one = |n: usize| WaveFunction::constant(n, C64::new(1.0, 0.0));
    let mut entries = vec![
        timed(
            CheckId::PairTransformMatch,
            params! {"ket" => "1", "bra" => "delta", "expected" => "F+_0", "normalization" => "wigner"},
            tol,
            || {
                let sp = space(cfg, 1)?;
                let f = wigner_pair_transform(&one(1), &WaveFunction::delta(&[0], C64::new(1.0, 0.0)), sp, PairNormalization::Wigner)?;
                relative_distance(&f, &toy_resonant(0, Sign::Plus, sp)?)
            },
        ),
        timed(
            CheckId::PairTransformMatch,
            params! {"ket" => "delta", "bra" => "1", "expected" => "F-_0", "normalization" => "wigner"},
            tol,
            || {
                let sp = space(cfg, 1)?;
                let f = wigner_pair_transform(&WaveFunction::delta(&[0], C64::new(1.0, 0.0)), &one(1), sp, PairNormalization::Wigner)?;
                relative_distance(&f, &toy_resonant(0, Sign::Minus, sp)?)
            },
        ),
        timed(
            CheckId::PairTransformMatch,
            params! {"ket" => "delta(x1)delta(x2)", "bra" => "1", "expected" => "F+_00", "normalization" => "wigner"},
            tol,
            || {
                let sp = space(cfg, 2)?;
                let f = wigner_pair_transform(&WaveFunction::delta(&[0, 0], C64::new(1.0, 0.0)), &one(2), sp, PairNormalization::Wigner)?;
                relative_distance(&f, &dho_f(0, 0, Sign::Plus, sp)?)
            },
        ),
        timed(
            CheckId::PairTransformMatch,
            params! {"ket" => "gaussian", "bra" => "gaussian", "expected" => "W_0", "normalization" => "wigner"},
            tol,
            || {
                let sp = space(cfg, 1)?;
                let g = WaveFunction::oscillator_ground(1, sp.hbar());
                let f = wigner_pair_transform(&g, &g, sp, PairNormalization::Wigner)?;
                relative_distance(&f, &oscillator_wigner(0, sp)?)
            },
        ),
    ];
    // Excited resonant pairs: ket xⁿ, bra (−iħ)ⁿ δ⁽ⁿ⁾, normalized to unit integral.
    for n in 1..=3usize {
        entries.push(timed(
            CheckId::PairTransformMatch,
            params! {"ket" => format!("x^{n}"), "bra" => format!("(-i hbar)^{n} delta^({n})"), "expected" => format!("F+_{n}"), "normalization" => "unit_integral"},
            tol,
            || {
                let sp = space(cfg, 1)?;
                let ket = WaveFunction::polynomial(Polynomial::monomial(&[n as u16], C64::new(1.0, 0.0)));
                let bra = WaveFunction::delta(&[n as u16], C64::new(0.0, -sp.hbar()).powu(n as u32));
                let f = wigner_pair_transform(&ket, &bra, sp, PairNormalization::UnitIntegral)?;
                relative_distance(&f, &toy_resonant(n, Sign::Plus, sp)?)
            },
        ));
    }
    VerificationReport::from_entries(entries)
}

/// Concentration of `W₀^{(ħ)}` and `F⁺₀^{(ħ)}` as `ħ → 0`.
pub fn check_classical_limit(cfg: &VerifyConfig, hbars: &[f64]) -> VerificationReport {
    let tol = cfg.tolerance_or(CheckId::ClassicalLimit, 1e-12);
    let mut entries = Vec::new();
    for which in ["W_0", "F+_0"] {
        let mut seq = Vec::new();
        let start = Instant::now();
        let result = (|| -> Result<f64> {
            for &h in hbars {
                let sp = VarSpace::new(1, h)?;
                let f = if which == "W_0" {
                    oscillator_wigner(0, sp)?
                } else {
                    toy_resonant(0, Sign::Plus, sp)?
                };
                let a = DMatrix::from_diagonal_element(2, 2, C64::new(1.0, 0.0));
                let phi = QGFunction::gaussian(sp, Polynomial::one(2), QuadExponent::quadratic(a));
                seq.push((f.pair(&phi)? - C64::new(1.0, 0.0)).norm());
            }
            // worst relative increase; zero for a strictly decreasing sequence
            let mut worst: f64 = 0.0;
            for w in seq.windows(2) {
                if w[1] >= w[0] {
                    worst = worst.max((w[1] - w[0]) / w[0].max(1e-300) + f64::EPSILON);
                }
            }
            Ok(worst)
        })();
        let p = params! {"function" => which, "test" => "exp(-(x^2+p^2)/2)", "hbar" => hbars, "residuals" => seq};
        let mut e = match result {
            Ok(r) => CheckEntry::new(CheckId::ClassicalLimit, p, r, tol),
            Err(err) => CheckEntry::failed(CheckId::ClassicalLimit, p, tol, err.to_string()),
        };
        e.wall_time = start.elapsed().as_secs_f64();
        entries.push(e);
    }
    entries.push(timed(
        CheckId::ClassicalLimit,
        params! {"function" => "W_0", "test" => "x*exp(-(x^2+p^2)/2)", "hbar" => hbars},
        tol,
        || {
            let mut worst: f64 = 0.0;
            for &h in hbars {
                let sp = VarSpace::new(1, h)?;
                let a = DMatrix::from_diagonal_element(2, 2, C64::new(1.0, 0.0));
                let phi = QGFunction::gaussian(sp, Polynomial::monomial(&[1, 0], C64::new(1.0, 0.0)), QuadExponent::quadratic(a));
                worst = worst.max(oscillator_wigner(0, sp)?.pair(&phi)?.norm());
            }
            Ok(worst)
        },
    ));
    VerificationReport::from_entries(entries)
}
