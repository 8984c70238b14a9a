//! Real-argument Bessel and Hankel functions of integer order, plus the
//! constants that appear in the small-argument expansion of the Hankel
//! function.
//!
//! Orders 0 to 5 use the ascending series for `x <= 12` and the Hankel
//! asymptotic expansion beyond. Higher orders use forward recurrence for `Y`
//! and Miller's backward recurrence for `J`.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and the asymptotic expansion.
const SERIES_LIMIT: f64 = 12.0;

/// Highest order evaluated directly rather than by recurrence.
const DIRECT_ORDER_MAX: u32 = 5;

/// Constants of the small-argument expansion
/// `-(i/2) H0(t) = (ln t + gamma1)/pi + gamma2 t^2 - t^2 ln t / (4 pi) + ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathConstants {
    pub gamma0: f64,
    pub gamma1: Complex64,
    pub gamma2: Complex64,
}

impl MathConstants {
    pub fn new() -> Self {
        let gamma0 = EULER_GAMMA;
        Self {
            gamma0,
            gamma1: Complex64::new(gamma0 - LN_2, -PI / 2.0),
            gamma2: Complex64::new((LN_2 - gamma0) / (4.0 * PI), 1.0 / 8.0 - 1.0 / (4.0 * PI)),
        }
    }
}

impl Default for MathConstants {
    fn default() -> Self {
        Self::new()
    }
}

fn check_nonnegative(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(invalid("x", x, "argument must be finite"));
    }
    if x < 0.0 {
        return Err(invalid("x", x, "argument must be nonnegative"));
    }
    Ok(())
}

fn check_positive(x: f64) -> Result<()> {
    check_nonnegative(x)?;
    if x == 0.0 {
        return Err(invalid("x", x, "Y and H1 are singular at the origin"));
    }
    Ok(())
}

/// Bessel function of the first kind `J_order(x)` for `x >= 0`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if order > DIRECT_ORDER_MAX {
        return Ok(j_miller(order, x));
    }
    if x <= SERIES_LIMIT {
        return Ok(j_series(order, x));
    }
    let (j0, j1, _, _) = asymptotic01(x);
    Ok(forward(order, x, j0, j1))
}

/// Bessel function of the second kind `Y_order(x)` for `x > 0`.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    check_positive(x)?;
    let (y0, y1) = if x <= SERIES_LIMIT {
        (y0_series(x), y1_series(x))
    } else {
        let (_, _, y0, y1) = asymptotic01(x);
        (y0, y1)
    };
    Ok(forward(order, x, y0, y1))
}

/// Hankel function of the first kind `H_order^(1)(x) = J + iY` for `x > 0`.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    check_positive(x)?;
    Ok(Complex64::new(bessel_j(order, x)?, bessel_y(order, x)?))
}

/// `J0(x)` for `x >= 0` without argument checks; used inside kernels.
pub(crate) fn j0(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        j_series(0, x)
    } else {
        asymptotic01(x).0
    }
}

/// Smooth part `Y0(x) - (2/pi) J0(x) ln(x/2)` of `Y0`, an entire function of `x^2`.
pub(crate) fn y0_regular(x: f64) -> f64 {
    if x > SERIES_LIMIT {
        let (j0, _, y0, _) = asymptotic01(x);
        return y0 - FRAC_2_PI * j0 * (x / 2.0).ln();
    }
    FRAC_2_PI * (EULER_GAMMA * j_series(0, x) + y0_log_free_sum(x))
}

/// Ascending series for `J_n`.
fn j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let mut sum = term;
    let nf = f64::from(n);
    for k in 1..200 {
        let kf = f64::from(k);
        term *= q / (kf * (kf + nf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2`.
fn y0_log_free_sum(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut power = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = f64::from(k);
        power *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        let term = -power * harmonic;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sum
}

fn y0_series(x: f64) -> f64 {
    FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j_series(0, x) + y0_log_free_sum(x))
}

fn y1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    // digamma(k+1) + digamma(k+2) at k = 0
    let mut psi_sum = -2.0 * EULER_GAMMA + 1.0;
    let mut term = half;
    let mut sum = psi_sum * term;
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = f64::from(k);
        term *= q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        psi_sum = -2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0);
        let t = psi_sum * term;
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() && k > 2 {
            break;
        }
    }
    FRAC_2_PI * half.ln() * j_series(1, x) - 2.0 / (PI * x) - sum / PI
}

/// Hankel asymptotic expansion of `(J0, J1, Y0, Y1)` for large `x`.
fn asymptotic01(x: f64) -> (f64, f64, f64, f64) {
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(4.0, x);
    let amp = (2.0 / (PI * x)).sqrt();
    let chi0 = x - 0.25 * PI;
    let chi1 = x - 0.75 * PI;
    let (s0, c0) = chi0.sin_cos();
    let (s1, c1) = chi1.sin_cos();
    (
        amp * (p0 * c0 - q0 * s0),
        amp * (p1 * c1 - q1 * s1),
        amp * (p0 * s0 + q0 * c0),
        amp * (p1 * s1 + q1 * c1),
    )
}

/// Asymptotic sums `P` and `Q` for `mu = 4 nu^2`, truncated at the smallest term.
fn asymptotic_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut previous = f64::INFINITY;
    for k in 1..80 {
        let odd = f64::from(2 * k - 1);
        term *= (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        let size = term.abs();
        if size >= previous || size == 0.0 {
            break;
        }
        previous = size;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if size < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// Forward recurrence `f_{k+1} = (2k/x) f_k - f_{k-1}` from `f_0, f_1`.
fn forward(order: u32, x: f64, f0: f64, f1: f64) -> f64 {
    match order {
        0 => f0,
        1 => f1,
        _ => {
            let (mut prev, mut cur) = (f0, f1);
            for k in 1..order {
                let next = 2.0 * f64::from(k) / x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Miller's backward recurrence normalized by `J0 + 2 sum J_2k = 1`.
fn j_miller(order: u32, x: f64) -> f64 {
    let top = f64::from(order).max(x.ceil());
    let start = 2 * ((top as u32 + 30 + (50.0 * top).sqrt() as u32) / 2);
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut result = 0.0;
    let mut even_sum = 0.0;
    for j in (1..=start).rev() {
        let prev = 2.0 * f64::from(j) / x * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds f_{j-1}
        if (j - 1) == order {
            result = cur;
        }
        if (j - 1) % 2 == 0 && j > 1 {
            even_sum += cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            result *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    let norm = cur + 2.0 * even_sum;
    result / norm
}
