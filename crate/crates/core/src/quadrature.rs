//! Gauss-Legendre rules, Legendre-series utilities and the graded product
//! rule used for logarithmic kernels on the aperture.
//!
//! The aperture coordinate `X` in `[0, 1]` is parametrized as `X = nu(t)` with
//! `nu(t) = t^3 / (t^3 + (1 - t)^3)`, which clusters nodes at both edges. A
//! density behaving like `X^(-1/3)` near an edge becomes a smooth function of
//! `t` once multiplied by `nu'(t)`, so a polynomial interpolant in `t` is
//! spectrally accurate.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Smallest grid accepted by the graded rule.
pub const MIN_GRID: usize = 8;

/// Largest grid accepted by the graded rule.
pub const MAX_GRID: usize = 1024;

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(invalid("n", 0.0, "rule needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut derivative = 0.0;
        for iteration in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-16 {
                derivative = legendre_with_derivative(n, x).1;
                break;
            }
            if iteration == 99 {
                return Err(Error::NoConvergence {
                    what: "Gauss-Legendre node",
                    iterations: 100,
                    last_change: step.abs(),
                });
            }
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    let derivative = n as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, derivative)
}

/// `P_0(x), ..., P_lmax(x)`.
pub fn legendre_values(lmax: usize, x: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(lmax + 1);
    values.push(1.0);
    if lmax >= 1 {
        values.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * values[l] - lf * values[l - 1]) / (lf + 1.0);
        values.push(next);
    }
    values
}

/// Sum of a Legendre series at `x` in `[-1, 1]` by Clenshaw's recurrence.
pub fn legendre_series(coefficients: &[Complex64], x: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let (mut b1, mut b2) = (zero, zero);
    for l in (1..coefficients.len()).rev() {
        let lf = l as f64;
        let alpha = (2.0 * lf + 1.0) / (lf + 1.0) * x;
        let beta = (lf + 1.0) / (lf + 2.0);
        let b0 = coefficients[l] + alpha * b1 - beta * b2;
        b2 = b1;
        b1 = b0;
    }
    match coefficients.first() {
        Some(&c0) => c0 + x * b1 - 0.5 * b2,
        None => zero,
    }
}

/// `I_l(x) = int_{-1}^{1} ln|x - y| P_l(y) dy` for `l <= lmax` and `|x| < 1`.
pub fn log_legendre_integrals(lmax: usize, x: f64) -> Vec<f64> {
    // Legendre functions of the second kind on the cut
    let mut q = Vec::with_capacity(lmax + 2);
    q.push(0.5 * ((1.0 + x) / (1.0 - x)).ln());
    q.push(x * q[0] - 1.0);
    for n in 1..=lmax {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * q[n] - nf * q[n - 1]) / (nf + 1.0);
        q.push(next);
    }
    let mut integrals = Vec::with_capacity(lmax + 1);
    integrals.push((1.0 + x) * (1.0 + x).ln() + (1.0 - x) * (1.0 - x).ln() - 2.0);
    for n in 1..=lmax {
        integrals.push(2.0 * (q[n + 1] - q[n - 1]) / (2.0 * n as f64 + 1.0));
    }
    integrals
}

/// `int_0^1 ln(s) P_l(2s - 1) ds` for `l <= lmax`.
pub fn log_moments(lmax: usize) -> Vec<f64> {
    (0..=lmax)
        .map(|l| {
            if l == 0 {
                -1.0
            } else {
                let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
                sign / (l as f64 * (l as f64 + 1.0))
            }
        })
        .collect()
}

/// Nodes and weights on `[0, 1]` integrating `ln(s) g(s)` exactly for
/// polynomials `g` of degree below `n`.
pub fn log_weighted_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (y, w) = gauss_legendre(n)?;
    let moments = log_moments(n - 1);
    let nodes = y.iter().map(|&yk| 0.5 * (yk + 1.0)).collect();
    let weights = y
        .iter()
        .zip(&w)
        .map(|(&yk, &wk)| {
            let p = legendre_values(n - 1, yk);
            let sum: f64 = (0..n)
                .map(|l| moments[l] * (2.0 * l as f64 + 1.0) / 2.0 * p[l])
                .sum();
            wk * sum
        })
        .collect();
    Ok((nodes, weights))
}

/// Edge-grading map `nu(t) = t^3 / (t^3 + (1 - t)^3)`.
pub fn graded_map(t: f64) -> f64 {
    let a = t * t * t;
    let b = (1.0 - t).powi(3);
    a / (a + b)
}

/// Derivative of the grading map.
pub fn graded_map_derivative(t: f64) -> f64 {
    let q = t * t * t + (1.0 - t).powi(3);
    3.0 * t * t * (1.0 - t) * (1.0 - t) / (q * q)
}

/// Inverse of the grading map.
pub fn graded_map_inverse(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let r = (x / (1.0 - x)).cbrt();
    r / (1.0 + r)
}

/// Divided difference `(nu(s) - nu(t)) / (s - t)`, free of cancellation.
pub fn graded_divided_difference(s: f64, t: f64) -> f64 {
    // nu(1 - t) = 1 - nu(t), so the quotient is even under reflection; the
    // polynomial form below is accurate only on the half nearer zero
    if s + t > 1.0 {
        return graded_divided_difference(1.0 - s, 1.0 - t);
    }
    let qs = s * s * s + (1.0 - s).powi(3);
    let qt = t * t * t + (1.0 - t).powi(3);
    let numerator = s * s + s * t + t * t - 3.0 * s * t * (s + t) + 3.0 * s * s * t * t;
    numerator / (qs * qt)
}

/// Graded Gauss-Legendre rule with product weights for `ln|X - Y|`.
#[derive(Debug)]
pub struct GradedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    points: Vec<f64>,
    jacobian: Vec<f64>,
    /// Legendre values `P_l(2 t_k - 1)`, row `l`, column `k`.
    legendre: DMatrix<f64>,
    /// Row `i`: weights integrating `ln|t_i - t| g(t)` over `[0, 1]`.
    log_weights: DMatrix<f64>,
    /// `ln((nu(t_i) - nu(t_k)) / (t_i - t_k))`.
    log_distortion: DMatrix<f64>,
}

impl GradedRule {
    /// Shared rule of the given size, built once per process.
    pub fn shared(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GradedRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().map_err(|_| poisoned())?.get(&n) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::new(n)?);
        let mut guard = cache.lock().map_err(|_| poisoned())?;
        Ok(Arc::clone(guard.entry(n).or_insert(rule)))
    }

    pub fn new(n: usize) -> Result<Self> {
        if !(MIN_GRID..=MAX_GRID).contains(&n) {
            return Err(invalid("grid_size", n as f64, "must lie in [8, 1024]"));
        }
        let (y, w) = gauss_legendre(n)?;
        let nodes: Vec<f64> = y.iter().map(|&yk| 0.5 * (yk + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|&wk| 0.5 * wk).collect();
        let points = nodes.iter().map(|&t| graded_map(t)).collect();
        let jacobian = nodes.iter().map(|&t| graded_map_derivative(t)).collect();
        let mut legendre = DMatrix::zeros(n, n);
        for (k, &yk) in y.iter().enumerate() {
            for (l, p) in legendre_values(n - 1, yk).into_iter().enumerate() {
                legendre[(l, k)] = p;
            }
        }
        let projector = projector(&legendre, &w);
        let mut log_weights = DMatrix::zeros(n, n);
        for (i, &yi) in y.iter().enumerate() {
            let row = product_row(&projector, &log_legendre_integrals(n - 1, yi), &weights);
            for (k, value) in row.into_iter().enumerate() {
                log_weights[(i, k)] = value;
            }
        }
        let log_distortion =
            DMatrix::from_fn(n, n, |i, k| graded_divided_difference(nodes[i], nodes[k]).ln());
        Ok(Self {
            nodes,
            weights,
            points,
            jacobian,
            legendre,
            log_weights,
            log_distortion,
        })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Parameter nodes `t_k` in `(0, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Gauss weights on `[0, 1]`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Aperture points `X_k = nu(t_k)`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `nu'(t_k)`.
    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }

    pub fn log_weights(&self) -> &DMatrix<f64> {
        &self.log_weights
    }

    pub fn log_distortion(&self) -> &DMatrix<f64> {
        &self.log_distortion
    }

    /// Legendre coefficients (in `2t - 1`) of the interpolant through `values`.
    pub fn legendre_coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        (0..n)
            .map(|l| {
                let scale = (2.0 * l as f64 + 1.0) / 2.0;
                let sum: Complex64 = (0..n)
                    .map(|k| 2.0 * self.weights[k] * self.legendre[(l, k)] * values[k])
                    .sum();
                scale * sum
            })
            .collect()
    }

    /// Weights integrating `ln|nu(s) - nu(t)| g(t)` over `[0, 1]` for a target
    /// parameter `s` in `(0, 1)`.
    pub fn log_weights_at(&self, s: f64) -> Result<Vec<f64>> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", s, "target must lie in (0, 1)"));
        }
        let n = self.size();
        let w: Vec<f64> = self.weights.iter().map(|&wk| 2.0 * wk).collect();
        let projector = projector(&self.legendre, &w);
        let row = product_row(&projector, &log_legendre_integrals(n - 1, 2.0 * s - 1.0), &self.weights);
        Ok(row
            .into_iter()
            .enumerate()
            .map(|(k, value)| {
                let distortion = graded_divided_difference(s, self.nodes[k]).ln();
                value + distortion * self.weights[k]
            })
            .collect())
    }
}

fn poisoned() -> Error {
    Error::SingularPoint {
        reason: "quadrature cache lock poisoned",
    }
}

/// Maps nodal values to Legendre coefficients: `c_l = (2l+1)/2 sum_k w_k P_l(y_k) g_k`.
fn projector(legendre: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let n = weights.len();
    DMatrix::from_fn(n, n, |l, k| {
        (2.0 * l as f64 + 1.0) / 2.0 * weights[k] * legendre[(l, k)]
    })
}

/// `int_0^1 ln|s - t| g(t) dt = (1/2) sum_l I_l(x) c_l - ln 2 int_0^1 g`.
fn product_row(projector: &DMatrix<f64>, integrals: &[f64], unit_weights: &[f64]) -> Vec<f64> {
    let n = unit_weights.len();
    (0..n)
        .map(|k| {
            let spectral: f64 = (0..n).map(|l| integrals[l] * projector[(l, k)]).sum();
            0.5 * spectral - LN_2 * unit_weights[k]
        })
        .collect()
}
