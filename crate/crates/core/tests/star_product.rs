use mqds::algebra::{Polynomial, QGFunction, QuadExponent, VarSpace};
use mqds::star::{quadrature_star_oracle, star, star_closed_form, StarConfig};
use mqds::C64;
use nalgebra::{DMatrix, DVector};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ground(space: VarSpace) -> QGFunction {
    let h = space.hbar();
    let a = DMatrix::from_diagonal_element(2, 2, c(2.0 / h, 0.0));
    QGFunction::gaussian(
        space,
        Polynomial::constant(2, c(1.0 / (std::f64::consts::PI * h), 0.0)),
        QuadExponent::quadratic(a),
    )
}

#[test]
fn position_star_momentum() {
    let s = VarSpace::new(1, 1.0).unwrap();
    let xp = star(&QGFunction::x(s, 0), &QGFunction::p(s, 0)).unwrap();
    let want = QGFunction::from_poly(s, Polynomial::monomial(&[1, 1], c(1.0, 0.0)))
        .add(&QGFunction::constant(s, c(0.0, 0.5)))
        .unwrap();
    assert!(xp.distance(&want).unwrap() < 1e-15);
}

#[test]
fn ground_state_is_idempotent() {
    for &h in &[1.0, 0.5] {
        let s = VarSpace::new(1, h).unwrap();
        let w = ground(s);
        let ww = star(&w, &w).unwrap();
        let want = w.scale_real(1.0 / (2.0 * std::f64::consts::PI * h));
        assert!(ww.distance(&want).unwrap() < 1e-12, "{}", ww);
    }
}

#[test]
fn closed_form_matches_series_on_polynomial_factor() {
    let s = VarSpace::new(1, 0.7).unwrap();
    let w = ground(s);
    let f = QGFunction::from_poly(s, Polynomial::monomial(&[2, 1], c(1.0, 0.3)));
    let a = star(&f, &w).unwrap();
    let b = star_closed_form(&f, &w).unwrap();
    assert!(a.distance(&b).unwrap() < 1e-11 * a.coeff_norm(), "{} vs {}", a, b);
    let a = star(&w, &f).unwrap();
    let b = star_closed_form(&w, &f).unwrap();
    assert!(a.distance(&b).unwrap() < 1e-11 * a.coeff_norm());
}

#[test]
fn oracle_matches_closed_form() {
    let s = VarSpace::new(1, 1.0).unwrap();
    let w = ground(s);
    let cfg = StarConfig::default();
    let v = quadrature_star_oracle(&w, &w, &[0.0, 0.0], &cfg).unwrap();
    let want = 1.0 / (2.0 * std::f64::consts::PI.powi(2));
    assert!((v - c(want, 0.0)).norm() < 1e-9);
    let g = QGFunction::gaussian(
        s,
        Polynomial::linear(c(1.0, 0.0), &[c(0.5, 0.0), c(0.0, -1.0)]),
        QuadExponent::new(
            DMatrix::from_row_slice(2, 2, &[c(1.5, 0.2), c(0.3, 0.1), c(0.3, 0.1), c(0.8, -0.4)]),
            DVector::from_vec(vec![c(0.2, 0.1), c(-0.3, 0.0)]),
            c(0.0, 0.0),
        ),
    );
    let fg = star(&w, &g).unwrap();
    let z = [0.4, -0.3];
    let v = quadrature_star_oracle(&w, &g, &z, &cfg).unwrap();
    let e = fg.evaluate_real(&z).unwrap();
    assert!((v - e).norm() < 1e-8 * e.norm(), "{v} vs {e}");
}
