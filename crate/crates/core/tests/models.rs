use mqds::algebra::{QGFunction, VarSpace};
use mqds::models::*;
use mqds::star::{moyal_bracket, star};
use mqds::C64;

fn eigen_residual(h: &QGFunction, f: &QGFunction, e: C64) -> f64 {
    let ef = f.scale(e);
    let l = star(h, f).unwrap().distance(&ef).unwrap();
    let r = star(f, h).unwrap().distance(&ef).unwrap();
    (l + r) / (e.norm() * f.coeff_norm())
}

#[test]
fn oscillator_family() {
    let s = VarSpace::new(1, 0.8).unwrap();
    let model = ModelId::harmonic_oscillator(1.3).unwrap();
    let h = hamiltonian(&model, s).unwrap();
    for n in 0..=8 {
        let w = oscillator_wigner(n, s).unwrap();
        let e = spectrum(&model, s.hbar(), Quanta::Single { n }, None).unwrap().eigenvalue;
        let res = eigen_residual(&h, &w, e);
        assert!(res < 1e-10, "n={n} residual {res:e}");
        let lad = oscillator_wigner_ladder(n, s).unwrap();
        let d = lad.distance(&w).unwrap() / w.coeff_norm();
        assert!(d < 1e-10, "ladder n={n} {d:e}");
    }
}

#[test]
fn toy_family() {
    let s = VarSpace::new(1, 0.9).unwrap();
    let model = ModelId::damped_toy(0.7).unwrap();
    let h = hamiltonian(&model, s).unwrap();
    for n in 0..=8 {
        for sign in [Sign::Plus, Sign::Minus] {
            let f = toy_resonant(n, sign, s).unwrap();
            let e = spectrum(&model, s.hbar(), Quanta::Single { n }, Some(sign)).unwrap().eigenvalue;
            let res = eigen_residual(&h, &f, e);
            assert!(res < 1e-10, "n={n} {sign:?} residual {res:e}");
            let lad = toy_resonant_ladder(n, sign, s).unwrap();
            let d = lad.distance(&f).unwrap() / f.coeff_norm();
            assert!(d < 1e-10, "ladder n={n} {sign:?} {d:e}");
        }
        let total = toy_resonant(n, Sign::Plus, s).unwrap().gaussian_integral().unwrap();
        assert!((total - C64::new(1.0, 0.0)).norm() < 1e-8, "n={n} integral {total}");
    }
}

#[test]
fn damped_oscillator_families() {
    let s = VarSpace::new(2, 1.1).unwrap();
    let model = ModelId::damped_ho(1.4, 0.6).unwrap();
    let h = hamiltonian(&model, s).unwrap();
    for n in 0..=4 {
        for m in 0..=4 {
            for sign in [Sign::Plus, Sign::Minus] {
                let f = dho_f(n, m, sign, s).unwrap();
                let e = spectrum(&model, s.hbar(), Quanta::F { n, m }, Some(sign)).unwrap().eigenvalue;
                let res = eigen_residual(&h, &f, e);
                assert!(res < 1e-10, "F n={n} m={m} {sign:?} residual {res:e}");
            }
            let g = dho_g(n, m, s).unwrap();
            let e = spectrum(&model, s.hbar(), Quanta::G { n, m }, None).unwrap().eigenvalue;
            let res = eigen_residual(&h, &g, e);
            assert!(res < 1e-10, "G n={n} m={m} residual {res:e}");
        }
    }
    let f00 = dho_f(0, 0, Sign::Plus, s).unwrap();
    let l = LadderSet::damped_ho(s).unwrap();
    assert!(star(l.get("a1").unwrap(), &f00).unwrap().coeff_norm() < 1e-14);
    assert!(star(&f00, l.get("a2*").unwrap()).unwrap().coeff_norm() < 1e-14);
    let one = QGFunction::constant(s, C64::new(1.0, 0.0));
    for (a, b, want) in [("a1", "a2*", 1.0), ("a2", "a1*", 1.0), ("a1", "a1*", 0.0), ("a1", "a2", 0.0)] {
        let br = moyal_bracket(l.get(a).unwrap(), l.get(b).unwrap()).unwrap();
        assert!(br.distance(&one.scale_real(want)).unwrap() < 1e-12, "{a},{b}");
    }
}

#[test]
fn complex_scaling_maps_wigner_to_resonant() {
    let s = VarSpace::new(1, 1.0).unwrap();
    for n in 0..=6 {
        let w = oscillator_wigner(n, s).unwrap();
        for (lambda, sign) in [(-std::f64::consts::FRAC_PI_4, Sign::Plus), (std::f64::consts::FRAC_PI_4, Sign::Minus)] {
            let mapped = light_cone_pullback(&conjugation_by_v(&w, lambda).unwrap()).unwrap();
            let f = toy_resonant(n, sign, s).unwrap();
            let d = mapped.distance(&f).unwrap() / f.coeff_norm();
            assert!(d < 1e-10, "n={n} {sign:?} {d:e}");
        }
    }
}

#[test]
fn pair_transform_reproduces_ground_states() {
    let s = VarSpace::new(1, 0.6).unwrap();
    let g = WaveFunction::oscillator_ground(1, s.hbar());
    let w = wigner_pair_transform(&g, &g, s, PairNormalization::Wigner).unwrap();
    let w0 = oscillator_wigner(0, s).unwrap();
    assert!(w.distance(&w0).unwrap() < 1e-10 * w0.coeff_norm());

    let one = WaveFunction::constant(1, C64::new(1.0, 0.0));
    let delta = WaveFunction::delta(&[0], C64::new(1.0, 0.0));
    let f = wigner_pair_transform(&one, &delta, s, PairNormalization::Wigner).unwrap();
    let f0 = toy_resonant(0, Sign::Plus, s).unwrap();
    assert!(f.distance(&f0).unwrap() < 1e-10 * f0.coeff_norm(), "{f}");

    let s2 = VarSpace::new(2, 0.6).unwrap();
    let dd = WaveFunction::delta(&[0, 0], C64::new(1.0, 0.0));
    let one2 = WaveFunction::constant(2, C64::new(1.0, 0.0));
    let f = wigner_pair_transform(&dd, &one2, s2, PairNormalization::Wigner).unwrap();
    let f00 = dho_f(0, 0, Sign::Plus, s2).unwrap();
    assert!(f.distance(&f00).unwrap() < 1e-10 * f00.coeff_norm(), "{f}");
}
