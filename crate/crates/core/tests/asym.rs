use std::f64::consts::PI;

use cavres::asym::{
    fabry_perot_wavenumber, lambda_full, p1_derivative, p1_function, q0_constant, q0_on_grid,
    resonance_asymptotic, resonance_newton, singular_kernel_k, KernelDecomposition, P1Model, ResonanceMethod,
};
use cavres::cavity::{Bottom, CavityGeometry, IncidentWave};
use cavres::green::{kernel_exterior, InteriorKernel};
use cavres::Error;
use num_complex::Complex64;

const GAMMA: f64 = 0.577_215_664_901_532_9;

fn geometry(eps: f64, bottom: Bottom) -> CavityGeometry {
    CavityGeometry::new(eps, 1.0, bottom).unwrap()
}

/// First index of each bottom type.
fn first(bottom: Bottom) -> usize {
    match bottom {
        Bottom::Pmc => 1,
        Bottom::Pec => 0,
    }
}

#[test]
fn k_kernel_example_and_symmetry() {
    let value = singular_kernel_k(0.25, 0.75).unwrap();
    let expected = (0.5f64.ln() + (0.5f64.sqrt()).ln()) / PI;
    assert!((value - expected).abs() < 1e-15);
    for (x, y) in [(0.1, 0.2), (0.01, 0.99), (0.5, 0.7)] {
        assert_eq!(singular_kernel_k(x, y).unwrap(), singular_kernel_k(y, x).unwrap());
    }
}

#[test]
fn k_kernel_merges_two_logarithms_on_the_diagonal() {
    let x: f64 = 0.4;
    let mut previous = None;
    for j in 4..30 {
        let y = x + 2f64.powi(-j);
        let rest = singular_kernel_k(x, y).unwrap()
            - (2.0 / PI) * (y - x).ln()
            - (0.5 * PI * (x + y)).sin().ln() / PI;
        assert!(rest.abs() < 1.0);
        if let Some(p) = previous {
            let change: f64 = rest - p;
            assert!(change.abs() < 2f64.powi(-j + 1));
        }
        previous = Some(rest);
    }
    // the bounded remainder tends to (1/pi) ln(pi/2)
    let limit = (0.5 * PI).ln() / PI;
    assert!((previous.unwrap() - limit).abs() < 1e-6);
}

#[test]
fn q0_is_nonzero_and_converged() {
    let q0 = q0_constant().unwrap();
    assert!(q0.abs() > 0.5);
    for n in [64, 128] {
        let change = (q0_on_grid(2 * n).unwrap() - q0_on_grid(n).unwrap()).abs();
        assert!(change <= 1e-10, "N = {n}: {change}");
    }
    assert!((q0 - q0_on_grid(256).unwrap()).abs() <= 1e-10);
}

#[test]
fn q0_cache_is_bitwise_stable() {
    let first = q0_constant().unwrap();
    for (eps, bottom) in [(0.01, Bottom::Pmc), (0.001, Bottom::Pec)] {
        let g = geometry(eps, bottom);
        assert_eq!(P1Model::new(&g).unwrap().q0().to_bits(), first.to_bits());
    }
    assert_eq!(q0_constant().unwrap().to_bits(), first.to_bits());
}

#[test]
fn gamma_constants_and_additivity() {
    let eps = 0.005;
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let g = geometry(eps, bottom);
        let w = IncidentWave::new(1.3, 0.2).unwrap();
        let dec = KernelDecomposition::new(&w, &g).unwrap();
        let gamma1 = Complex64::new((1.3f64.ln() + GAMMA - 2f64.ln() + eps.ln()) / PI, -0.5);
        assert!((dec.gamma1() - gamma1).norm() < 1e-14);
        let depth = match bottom {
            Bottom::Pmc => -(1.3f64).tan() / (eps * 1.3),
            Bottom::Pec => 1.0 / ((1.3f64).tan() * eps * 1.3),
        };
        assert!((dec.gamma2() - depth - 2.0 * 2f64.ln() / PI).abs() < 1e-10);
        assert_eq!(dec.gamma(), dec.gamma1() + dec.gamma2());
        assert_eq!(dec.bottom(), bottom);
        // the constant left after removing the log terms of both kernels at a
        // probe pair is Gamma, up to the kernel remainders
        let (x, y) = (0.3, 0.6);
        let exterior = kernel_exterior(x, y, &w, &g).unwrap().value;
        let interior = InteriorKernel::new(&w, &g).unwrap().evaluate(x, y).unwrap().value;
        let logs = singular_kernel_k(x, y).unwrap();
        let extracted = exterior + interior - logs;
        assert!((extracted - dec.gamma()).norm() <= eps * eps * eps.ln().abs());
    }
}

#[test]
fn p1_at_fabry_perot_wavenumbers() {
    let eps = 0.005;
    let q0 = q0_constant().unwrap();
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let g = geometry(eps, bottom);
        for n in first(bottom)..first(bottom) + 3 {
            let k = fabry_perot_wavenumber(n, &g).unwrap();
            let rho = Complex64::new((2.0 * 2f64.ln() + k.ln() + GAMMA - 2f64.ln()) / PI, -0.5);
            let expected = eps + (eps * rho + eps * eps.ln() / PI) * q0;
            let value = p1_function(Complex64::new(k, 0.0), &g).unwrap();
            assert!((value - expected).norm() <= 1e-12, "{bottom:?} n={n}");
        }
    }
}

#[test]
fn p1_at_real_part_of_resonance() {
    let q0 = q0_constant().unwrap();
    for eps in [0.01f64, 0.005] {
        let scale = (eps * eps.ln()).powi(2);
        for bottom in [Bottom::Pmc, Bottom::Pec] {
            let g = geometry(eps, bottom);
            for n in first(bottom)..first(bottom) + 3 {
                let root = resonance_newton(n, &g, 1e-13).unwrap().k_complex;
                let value = p1_function(Complex64::new(root.re, 0.0), &g).unwrap();
                let gap = (value + Complex64::new(0.0, 0.5 * q0 * eps)).norm();
                assert!(gap <= scale, "{bottom:?} eps={eps} n={n}: {gap}");
            }
        }
    }
}

#[test]
fn p1_derivative_matches_complex_difference() {
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let g = geometry(0.005, bottom);
        for k in [Complex64::new(0.7, -0.01), Complex64::new(2.9, 0.02), Complex64::new(5.0, -0.3)] {
            let h = 1e-5;
            let fd = (p1_function(k + h, &g).unwrap() - p1_function(k - h, &g).unwrap()) / (2.0 * h);
            let fdi = (p1_function(k + Complex64::new(0.0, h), &g).unwrap()
                - p1_function(k - Complex64::new(0.0, h), &g).unwrap())
                / Complex64::new(0.0, 2.0 * h);
            let exact = p1_derivative(k, &g).unwrap();
            assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0));
            // analyticity: the derivative is direction independent
            assert!((fdi - exact).norm() <= 1e-6 * exact.norm().max(1.0));
        }
    }
}

#[test]
fn p1_rejects_poles_and_branch_cut() {
    let pmc = geometry(0.005, Bottom::Pmc);
    let pec = geometry(0.005, Bottom::Pec);
    assert!(matches!(p1_function(Complex64::new(1.5 * PI, 0.0), &pmc), Err(Error::Pole { .. })));
    assert!(matches!(p1_function(Complex64::new(PI, 1e-9), &pec), Err(Error::Pole { .. })));
    assert!(matches!(p1_function(Complex64::new(-2.0, 0.1), &pmc), Err(Error::Branch { .. })));
    assert!(p1_function(Complex64::new(1e-9, 0.0), &pmc).is_err());
    assert!(resonance_asymptotic(0, &pmc).is_err());
}

#[test]
fn lambda_tracks_p1_on_the_real_axis() {
    // C is fitted at eps = 0.01 and must still hold, within 50%, at eps = 0.005
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let mut fitted = None;
        for eps in [0.01f64, 0.005] {
            let g = geometry(eps, bottom);
            let model = P1Model::new(&g).unwrap();
            let small = eps * eps.ln().abs();
            let mut worst = 0.0f64;
            for i in 0..=20 {
                let k = 1.0 + 0.1 * i as f64;
                if bottom == Bottom::Pec && (k - PI).abs() < 0.05 {
                    continue;
                }
                let p = eps * lambda_full(k, &g, 64).unwrap();
                let p1 = model.value(Complex64::new(k, 0.0)).unwrap();
                let weight = (k.tan().abs() / k + small) * small;
                worst = worst.max((p - p1).norm() / weight);
            }
            match fitted {
                None => fitted = Some(worst),
                Some(c) => assert!(worst <= 1.5 * c, "{bottom:?}: C = {c} at 0.01, {worst} at 0.005"),
            }
        }
    }
}

#[test]
fn lambda_is_stable_under_grid_doubling() {
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let g = geometry(0.005, bottom);
        for k in [0.3, 1.0, 2.0, 2.9] {
            let a = lambda_full(k, &g, 64).unwrap();
            let b = lambda_full(k, &g, 128).unwrap();
            assert!((a - b).norm() <= 1e-9 * a.norm(), "{bottom:?} k={k}");
        }
    }
    assert!(lambda_full(1.0, &geometry(0.005, Bottom::Pmc), 8).is_err());
}

#[test]
fn lambda_is_continuous_between_poles() {
    let g = geometry(0.005, Bottom::Pmc);
    let jump = |samples: usize| {
        let values: Vec<Complex64> = (0..=samples)
            .map(|i| lambda_full(2.0 + 0.5 * i as f64 / samples as f64, &g, 32).unwrap())
            .collect();
        values.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    };
    let coarse = jump(10);
    let fine = jump(40);
    assert!(fine < 0.3 * coarse);
}

#[test]
fn asymptotic_imaginary_part() {
    let eps = 0.005;
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let g = geometry(eps, bottom);
        for n in first(bottom)..first(bottom) + 3 {
            let k0 = fabry_perot_wavenumber(n, &g).unwrap();
            let r = resonance_asymptotic(n, &g).unwrap();
            assert_eq!(r.method, ResonanceMethod::AsymptoticFormula);
            assert!((r.k_complex.im + k0 * eps / 2.0).abs() < 1e-15);
        }
    }
    let g = geometry(0.005, Bottom::Pmc);
    assert!((resonance_asymptotic(1, &g).unwrap().k_complex.im + 7.853_981_633_974_483e-3).abs() < 1e-15);
}

#[test]
fn asymptotic_resonances_approach_fabry_perot() {
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let n = first(bottom);
        let mut previous = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let g = geometry(eps, bottom);
            let gap = (resonance_asymptotic(n, &g).unwrap().k_complex - fabry_perot_wavenumber(n, &g).unwrap()).norm();
            assert!(gap < previous);
            previous = gap;
        }
        assert!(previous < 1e-3);
    }
}

#[test]
fn pec_fundamental_resonance_regression() {
    let r = resonance_asymptotic(0, &geometry(0.005, Bottom::Pec)).unwrap();
    assert!((r.k_complex.re - 1.554_760_704_589_380_5).abs() < 1e-10);
}

#[test]
fn newton_agrees_with_asymptotics() {
    for eps in [0.01f64, 0.005, 0.0025] {
        let bound = 10.0 * eps * eps * eps.ln().abs();
        for bottom in [Bottom::Pmc, Bottom::Pec] {
            let g = geometry(eps, bottom);
            for n in first(bottom)..first(bottom) + 3 {
                let newton = resonance_newton(n, &g, 1e-12).unwrap();
                let asymptotic = resonance_asymptotic(n, &g).unwrap();
                assert_eq!(newton.method, ResonanceMethod::NewtonOnP1);
                assert!(newton.residual <= 1e-12);
                assert!(newton.iterations >= 1 && newton.iterations <= 50);
                assert!(newton.k_complex.im < 0.0);
                let gap = (newton.k_complex - asymptotic.k_complex).norm();
                assert!(gap <= bound, "{bottom:?} eps={eps} n={n}: {gap} > {bound}");
            }
        }
    }
}

#[test]
fn newton_imaginary_part_matches_width_estimate() {
    let eps = 0.005;
    let g = geometry(eps, Bottom::Pmc);
    let root = resonance_newton(1, &g, 1e-12).unwrap().k_complex;
    let expected = PI * eps / 2.0;
    assert!(root.im < 0.0);
    assert!((root.im + expected).abs() <= 0.2 * expected, "{}", root.im);
}

#[test]
fn resonances_are_ordered() {
    let g = geometry(0.005, Bottom::Pmc);
    let roots: Vec<f64> = (1..=3).map(|n| resonance_newton(n, &g, 1e-12).unwrap().k_complex.re).collect();
    assert!(roots[0] < roots[1] && roots[1] < roots[2]);
    // the first-order shift below n pi grows linearly with n
    let offsets: Vec<f64> = roots.iter().enumerate().map(|(i, r)| (i + 1) as f64 * PI - r).collect();
    assert!(offsets[0] > 0.0 && offsets[0] < offsets[1] && offsets[1] < offsets[2]);
    assert!(offsets[0] < 0.05);
}

#[test]
fn newton_tolerance_is_validated() {
    let g = geometry(0.005, Bottom::Pmc);
    assert!(resonance_newton(1, &g, 1e-15).is_err());
    assert!(resonance_newton(1, &g, f64::NAN).is_err());
}
