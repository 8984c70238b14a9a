use std::f64::consts::PI;

use cavres::specfun::{bessel_j, bessel_y, hankel1, MathConstants, EULER_GAMMA};

/// Gauss-Legendre nodes and weights on [a, b], built independently of the crate.
fn gauss(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 1..n {
                    let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            (0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w)
        })
        .collect()
}

/// `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt`; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
fn j_integral(n: u32, x: f64) -> f64 {
    let m = 2000;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        sum += f(k as f64 * h);
    }
    sum * h / PI
}

/// `Y_n(x) = (1/pi) int_0^pi sin(x sin t - n t) dt
///          - (1/pi) int_0^inf (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} dt`.
fn y_integral(n: u32, x: f64) -> f64 {
    let mut first = 0.0;
    for piece in 0..40 {
        let a = PI * piece as f64 / 40.0;
        let b = PI * (piece + 1) as f64 / 40.0;
        for (t, w) in gauss(30, a, b) {
            first += w * (x * t.sin() - n as f64 * t).sin();
        }
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let upper = (800.0 / x).asinh();
    let mut second = 0.0;
    for piece in 0..80 {
        let a = upper * piece as f64 / 80.0;
        let b = upper * (piece + 1) as f64 / 80.0;
        for (t, w) in gauss(30, a, b) {
            let nt = n as f64 * t;
            second += w * (nt.exp() + sign * (-nt).exp()) * (-x * t.sinh()).exp();
        }
    }
    (first - second) / PI
}

/// Ascending series for `J_n`.
fn j_series(n: u32, x: f64) -> f64 {
    let mut term = 1.0;
    for k in 1..=n {
        term *= 0.5 * x / k as f64;
    }
    let mut sum = term;
    for k in 1..300 {
        term *= -0.25 * x * x / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

/// Ascending series for `Y_0` and `Y_1`.
fn y01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let mut y0 = (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA) * j_series(0, x);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    for k in 1..300 {
        term *= -q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        y0 -= (2.0 / PI) * term * harmonic;
    }
    let mut y1 = (2.0 / PI) * (0.5 * x).ln() * j_series(1, x) - 2.0 / (PI * x);
    let mut term = 0.5 * x;
    let mut harmonic = 0.0;
    for k in 0..300 {
        if k > 0 {
            term *= -q / (k * (k + 1)) as f64;
            harmonic += 1.0 / k as f64;
        }
        let psi = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1) as f64;
        y1 -= psi * term / PI;
    }
    (y0, y1)
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn envelope(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt().min(1.0)
}

#[test]
fn first_zero_of_j0() {
    assert!(bessel_j(0, 2.404_825_557_695_773).unwrap().abs() < 1e-10);
}

#[test]
fn j_agrees_with_integral_representation() {
    for x in log_grid(1.0, 100.0, 120) {
        for n in 0..=8 {
            let oracle = j_integral(n, x);
            let value = bessel_j(n, x).unwrap();
            let scale = oracle.abs().max(envelope(x));
            assert!((value - oracle).abs() <= 1e-10 * scale, "J{n}({x}) = {value}, oracle {oracle}");
        }
    }
}

#[test]
fn j_agrees_with_series_at_small_arguments() {
    for x in log_grid(1e-8, 1.0, 60) {
        for n in 0..=8 {
            let oracle = j_series(n, x);
            let value = bessel_j(n, x).unwrap();
            assert!((value - oracle).abs() <= 1e-12 * oracle.abs(), "J{n}({x})");
        }
    }
}

#[test]
fn y_agrees_with_integral_representation() {
    for x in log_grid(0.1, 100.0, 80) {
        for n in 0..=6 {
            let oracle = y_integral(n, x);
            let value = bessel_y(n, x).unwrap();
            let scale = oracle.abs().max(envelope(x));
            assert!((value - oracle).abs() <= 1e-10 * scale, "Y{n}({x}) = {value}, oracle {oracle}");
        }
    }
}

#[test]
fn y_small_argument_forms() {
    let x: f64 = 1e-6;
    let expected = (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA);
    assert!((bessel_y(0, x).unwrap() - expected).abs() < 1e-9);
    assert!(bessel_y(1, 1e-8).unwrap() < -1e7);
    let (y0, y1) = y01_series(2.0);
    assert!((bessel_y(0, 2.0).unwrap() - y0).abs() < 1e-10);
    assert!((bessel_y(1, 2.0).unwrap() - y1).abs() < 1e-10);
}

#[test]
fn hankel_examples() {
    let x: f64 = 1e-6;
    let h = hankel1(0, x).unwrap();
    assert!((h.re - 1.0).abs() < 1e-11);
    assert!((h.im - (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA)).abs() < 1e-9);
    let far = hankel1(0, 50.0).unwrap().norm();
    assert!((far / (2.0 / (50.0 * PI)).sqrt() - 1.0).abs() < 0.01);
    let h1 = hankel1(1, 2.0).unwrap();
    assert!((h1.re - j_series(1, 2.0)).abs() < 1e-10);
    assert!((h1.im - y01_series(2.0).1).abs() < 1e-10);
}

#[test]
fn small_argument_hankel_error_is_second_order() {
    let leading = |x: f64| {
        let h = hankel1(0, x).unwrap();
        let approx = num_complex::Complex64::new(1.0, (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA));
        (h - approx).norm()
    };
    let mut x = 1e-3;
    for _ in 0..4 {
        let ratio = leading(x) / leading(0.5 * x);
        assert!(ratio >= 3.5, "ratio {ratio} at x = {x}");
        x *= 0.5;
    }
}

#[test]
fn wronskian_identity() {
    for x in log_grid(0.1, 50.0, 200) {
        let j: Vec<f64> = (0..=6).map(|n| bessel_j(n, x).unwrap()).collect();
        let y: Vec<f64> = (0..=6).map(|n| bessel_y(n, x).unwrap()).collect();
        for n in 0..=5usize {
            let derivative = |f: &[f64]| {
                if n == 0 {
                    -f[1]
                } else {
                    f[n - 1] - n as f64 / x * f[n]
                }
            };
            let w = j[n] * derivative(&y) - y[n] * derivative(&j);
            let expected = 2.0 / (PI * x);
            assert!((w - expected).abs() <= 1e-9 * expected, "n={n} x={x}: {w}");
        }
    }
}

#[test]
fn three_term_recurrence() {
    for x in log_grid(0.1, 50.0, 200) {
        for f in [bessel_j, bessel_y] {
            for n in 1..=10u32 {
                let (a, b, c) = (f(n - 1, x).unwrap(), f(n, x).unwrap(), f(n + 1, x).unwrap());
                let middle = 2.0 * n as f64 / x * b;
                let scale = a.abs().max(middle.abs()).max(c.abs());
                assert!((c - middle + a).abs() <= 1e-9 * scale, "n={n} x={x}");
            }
        }
    }
}

#[test]
fn constants() {
    let c = MathConstants::default();
    assert!((c.gamma0 - 0.577_215_664_901_532_9).abs() < 1e-15);
    assert_eq!(c.gamma1.im, -PI / 2.0);
}
