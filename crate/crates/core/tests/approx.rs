use std::f64::consts::PI;

use cavres::approx::{
    approx_enhancement, approx_field, c0_constant, single_mode_solve, single_mode_solve_with_c0,
    DEFAULT_C0_POINTS,
};
use cavres::bie::{EnhancementRecord, SolverOptions};
use cavres::cavity::{Bottom, CavityGeometry, IncidentWave, Point};
use cavres::Error;
use num_complex::Complex64;

const GAMMA: f64 = 0.577_215_664_901_532_9;

fn setup(eps: f64, d: f64, k: f64, bottom: Bottom) -> (IncidentWave, CavityGeometry) {
    (IncidentWave::new(k, PI / 3.0).unwrap(), CavityGeometry::new(eps, d, bottom).unwrap())
}

/// `a int_0^1 (1 - u) H0(a u) du` from the ascending series of `J0` and `Y0`,
/// integrated term by term with
/// `int (1-u) u^n du = 1/((n+1)(n+2))` and
/// `int (1-u) u^n ln u du = 1/(n+2)^2 - 1/(n+1)^2`.
fn c0_series(a: f64) -> Complex64 {
    let plain = |n: f64| 1.0 / ((n + 1.0) * (n + 2.0));
    let logged = |n: f64| 1.0 / ((n + 2.0) * (n + 2.0)) - 1.0 / ((n + 1.0) * (n + 1.0));
    let mut j_part = 0.0;
    let mut y_part = 0.0;
    let mut coefficient = 1.0;
    let mut harmonic = 0.0;
    for j in 0..60 {
        if j > 0 {
            coefficient *= -(0.5 * a).powi(2) / (j * j) as f64;
            harmonic += 1.0 / j as f64;
        }
        let n = 2.0 * j as f64;
        j_part += coefficient * plain(n);
        y_part += (2.0 / PI)
            * coefficient
            * (((0.5 * a).ln() + GAMMA) * plain(n) + logged(n) - harmonic * plain(n));
    }
    a * Complex64::new(j_part, y_part)
}

#[test]
fn c0_matches_series_oracle() {
    for (eps, k) in [(1e-4, 1.0), (0.005, 3.0), (0.01, 10.0), (0.1, 5.0)] {
        let (w, g) = setup(eps, 1.0, k, Bottom::Pmc);
        let value = c0_constant(&w, &g, DEFAULT_C0_POINTS).unwrap();
        let oracle = c0_series(k * eps);
        assert!((value - oracle).norm() <= 1e-10 * oracle.norm(), "eps={eps} k={k}: {value} vs {oracle}");
    }
}

#[test]
fn c0_asymptote() {
    let eps: f64 = 1e-4;
    let (w, g) = setup(eps, 1.0, 1.0, Bottom::Pmc);
    let c0 = c0_constant(&w, &g, DEFAULT_C0_POINTS).unwrap();
    let target = Complex64::new(0.0, 1.0 / PI);
    assert!((c0 / (eps * eps.ln()) - target).norm() <= 0.25 * target.norm());
}

#[test]
fn c0_vanishes_monotonically() {
    let magnitudes: Vec<f64> = [1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&eps| {
            let (w, g) = setup(eps, 1.0, 1.0, Bottom::Pmc);
            c0_constant(&w, &g, DEFAULT_C0_POINTS).unwrap().norm()
        })
        .collect();
    assert!(magnitudes[0] > magnitudes[1] && magnitudes[1] > magnitudes[2]);
    assert!(magnitudes[2] < 1e-4);
}

#[test]
fn c0_quadrature_self_convergence() {
    let (w, g) = setup(0.005, 1.0, 3.0, Bottom::Pec);
    let a = c0_constant(&w, &g, 128).unwrap();
    let b = c0_constant(&w, &g, 256).unwrap();
    assert!((a - b).norm() <= 1e-10 * b.norm());
    assert!(matches!(c0_constant(&w, &g, 31), Err(Error::InvalidArgument { .. })));
}

#[test]
fn pmc_low_frequency_amplitude_band() {
    let (eps, d, k) = (1e-4, 1.0, 0.01);
    let (w, g) = setup(eps, d, k, Bottom::Pmc);
    let s = single_mode_solve(&w, &g).unwrap();
    let scale = eps.sqrt() / (k * d);
    let amplitude = s.alpha0_plus.norm();
    assert!(amplitude >= 0.25 * scale && amplitude <= 4.0 * scale, "{}", amplitude / scale);
}

#[test]
fn linkage_and_bottom_conditions() {
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let (w, g) = setup(0.005, 1.0, 0.7, bottom);
        let s = single_mode_solve(&w, &g).unwrap();
        assert_eq!(s.bottom(), bottom);
        let phase = Complex64::new(0.0, 0.7).exp();
        let expected = match bottom {
            Bottom::Pmc => -s.alpha0_plus * phase,
            Bottom::Pec => s.alpha0_plus * phase,
        };
        assert!((s.alpha0_minus - expected).norm() <= 1e-12 * expected.norm());
        let modes = s.modes();
        for x1 in [0.0, 0.002, 0.005] {
            match bottom {
                Bottom::Pmc => assert!(approx_field(&s, Point::new(x1, -1.0)).unwrap().norm() <= 1e-15),
                Bottom::Pec => assert!(modes.profile_slope(0, -1.0, &w, &g).unwrap().norm() <= 1e-15),
            }
        }
    }
}

#[test]
fn field_matches_closed_form_and_its_derivative() {
    let (w, g) = setup(0.005, 1.0, 0.8, Bottom::Pmc);
    let s = single_mode_solve(&w, &g).unwrap();
    let i = Complex64::new(0.0, 1.0);
    let root = 0.005f64.sqrt();
    let closed = |x2: f64| (s.alpha0_plus * (-i * 0.8 * x2).exp() + s.alpha0_minus * (i * 0.8 * (x2 + 1.0)).exp()) / root;
    let h = 1e-5;
    for x2 in [-0.9, -0.5, -0.1] {
        let value = approx_field(&s, Point::new(0.001, x2)).unwrap();
        assert!((value - closed(x2)).norm() <= 1e-13 * value.norm().max(1e-300));
        let fd = (approx_field(&s, Point::new(0.001, x2 + h)).unwrap()
            - approx_field(&s, Point::new(0.001, x2 - h)).unwrap())
            / (2.0 * h);
        // the PMC field is a pure sine in depth, so its slope is a cosine
        let analytic = -2.0 * i * 0.8 * (i * 0.8).exp() * s.alpha0_plus * (0.8 * (x2 + 1.0)).cos() / root;
        assert!((fd - analytic).norm() <= 1e-8 * analytic.norm(), "{fd} vs {analytic}");
        let slope = s.modes().profile_slope(0, x2, &w, &g).unwrap();
        assert!((slope * (1.0 / root) - analytic).norm() <= 1e-12 * analytic.norm());
    }
}

#[test]
fn zero_coupling_pec_resonance_is_flagged() {
    let (_, g) = setup(0.005, 1.0, 1.0, Bottom::Pec);
    let w = IncidentWave::new(PI / 2.0, 0.0).unwrap();
    let result = single_mode_solve_with_c0(&w, &g, Complex64::new(0.0, 0.0));
    assert!(matches!(result, Err(Error::Pole { .. })));
}

/// Gradient and value norms of the single-mode field over a decade of depths.
fn norm_profile(bottom: Bottom) -> Vec<(f64, f64, f64)> {
    let (eps, k) = (1e-5, 0.1);
    [0.01, 0.02, 0.05, 0.1]
        .iter()
        .map(|&d| {
            let (w, g) = setup(eps, d, k, bottom);
            let e = approx_enhancement(&single_mode_solve(&w, &g).unwrap()).unwrap();
            let area = (eps * d).sqrt();
            (d, e.electric * k * area, e.magnetic * area)
        })
        .collect()
}

fn band_ratio(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

#[test]
fn pmc_norm_orders() {
    let eps: f64 = 1e-5;
    let profile = norm_profile(Bottom::Pmc);
    let gradient: Vec<f64> = profile.iter().map(|(d, g, _)| g / (eps / d).sqrt()).collect();
    let value: Vec<f64> = profile.iter().map(|(d, _, v)| v / (eps * d).sqrt()).collect();
    assert!(band_ratio(&gradient) <= 10.0, "{gradient:?}");
    assert!(band_ratio(&value) <= 10.0, "{value:?}");
    assert!(gradient.iter().chain(&value).all(|x| *x > 0.1 && *x < 10.0));
}

#[test]
fn pec_gradient_order() {
    let (eps, k): (f64, f64) = (1e-5, 0.1);
    let profile = norm_profile(Bottom::Pec);
    let gradient: Vec<f64> = profile
        .iter()
        .map(|(d, g, _)| g / (k * k * eps.sqrt() * d.powf(1.5)))
        .collect();
    assert!(band_ratio(&gradient) <= 10.0, "{gradient:?}");
}

#[test]
fn single_mode_model_is_close_to_full_solution() {
    // C is fitted at eps = 0.005 and must hold within a factor two at eps/2
    let mut constants = Vec::new();
    for eps in [0.005f64, 0.0025] {
        let (w, g) = setup(eps, 1.0, 0.1, Bottom::Pmc);
        let full = EnhancementRecord::compute(&w, &g, SolverOptions::default()).unwrap();
        let single = single_mode_solve(&w, &g).unwrap();
        let diff = full.modes.difference(&single.modes()).norms(&w, &g).unwrap();
        constants.push((
            diff.gradient / eps,
            diff.value / (eps * (eps * eps.ln().abs()).sqrt()),
        ));
    }
    let (g0, v0) = constants[0];
    let (g1, v1) = constants[1];
    assert!(g1 <= 2.0 * g0 && g0 <= 2.0 * g1, "{constants:?}");
    assert!(v1 <= 2.0 * v0 && v0 <= 2.0 * v1, "{constants:?}");
}
