//! Single-mode model of the cavity field, valid away from resonance.
//!
//! Inside the cavity only the fundamental mode is kept,
//! `v = (a e^{-i k x2} + b e^{i k (x2 + d)}) / sqrt(width)`, and the exterior
//! coupling is reduced to the self-interaction constant
//! `c0 = (k / (2 width)) int_0^width int_0^width H0(k |x1 - y1|) dy1 dx1`.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use crate::bie::{enhancement_factors, Enhancement};
use crate::cavity::{
    guard, incident_mode_overlap, Bottom, CavityGeometry, IncidentWave, ModeCoefficients, Point,
};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_legendre, log_weighted_rule};
use crate::specfun::{j0, y0_regular};

/// Default quadrature size for `c0`.
pub const DEFAULT_C0_POINTS: usize = 64;

/// Relative change under doubling above which `c0` counts as unconverged.
const C0_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `c0 = k width int_0^1 (1 - u) H0(k width u) du`, with the logarithm of
/// `Y0` integrated by a log-weighted rule. The value at `2 * points` is
/// returned after checking it against the value at `points`.
pub fn c0_constant(wave: &IncidentWave, geometry: &CavityGeometry, points: usize) -> Result<Complex64> {
    if points < 32 {
        return Err(invalid("quadrature_points", points as f64, "must be at least 32"));
    }
    let coarse = c0_with(wave, geometry, points)?;
    let fine = c0_with(wave, geometry, 2 * points)?;
    let change = (fine - coarse).norm() / fine.norm();
    if change > C0_TOLERANCE {
        return Err(Error::NoConvergence {
            what: "c0 quadrature",
            iterations: 2,
            last_change: change,
        });
    }
    Ok(fine)
}

fn c0_with(wave: &IncidentWave, geometry: &CavityGeometry, points: usize) -> Result<Complex64> {
    let scale = wave.wavenumber() * geometry.width();
    let log_half_scale = (0.5 * scale).ln();
    let (y, w) = gauss_legendre(points)?;
    let mut smooth = Complex64::new(0.0, 0.0);
    for (yk, wk) in y.iter().zip(&w) {
        let u = 0.5 * (yk + 1.0);
        let z = scale * u;
        let bessel = j0(z);
        let regular = FRAC_2_PI * bessel * log_half_scale + y0_regular(z);
        smooth += 0.5 * wk * (1.0 - u) * Complex64::new(bessel, regular);
    }
    let (nodes, weights) = log_weighted_rule(points)?;
    let logarithmic: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&u, &v)| v * (1.0 - u) * j0(scale * u))
        .sum();
    Ok(scale * (smooth + I * FRAC_2_PI * logarithmic))
}

/// Fundamental-mode amplitudes of the single-mode model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeSolution {
    pub alpha0_plus: Complex64,
    pub alpha0_minus: Complex64,
    pub c0: Complex64,
    pub wave: IncidentWave,
    pub geometry: CavityGeometry,
}

impl SingleModeSolution {
    pub fn bottom(&self) -> Bottom {
        self.geometry.bottom()
    }

    /// The solution as a one-mode coefficient table.
    pub fn modes(&self) -> ModeCoefficients {
        ModeCoefficients::new(vec![self.alpha0_plus], vec![self.alpha0_minus])
            .expect("one downward and one upward amplitude")
    }
}

/// Single-mode solution with `c0` from quadrature.
pub fn single_mode_solve(wave: &IncidentWave, geometry: &CavityGeometry) -> Result<SingleModeSolution> {
    let c0 = c0_constant(wave, geometry, DEFAULT_C0_POINTS)?;
    single_mode_solve_with_c0(wave, geometry, c0)
}

/// Single-mode solution for a given coupling constant `c0`.
pub fn single_mode_solve_with_c0(
    wave: &IncidentWave,
    geometry: &CavityGeometry,
    c0: Complex64,
) -> Result<SingleModeSolution> {
    geometry.check_narrow(wave.wavenumber())?;
    let phase = (I * wave.wavenumber() * geometry.depth()).exp();
    let reflect = phase * phase;
    let (denominator, link, what) = match geometry.bottom() {
        Bottom::Pmc => ((1.0 + c0) - (1.0 - c0) * reflect, -phase, "PMC single-mode resonance"),
        Bottom::Pec => ((1.0 + c0) + (1.0 - c0) * reflect, phase, "PEC single-mode resonance"),
    };
    guard(what, denominator.norm())?;
    let alpha0_plus = 2.0 * incident_mode_overlap(wave, geometry) / denominator;
    Ok(SingleModeSolution {
        alpha0_plus,
        alpha0_minus: alpha0_plus * link,
        c0,
        wave: *wave,
        geometry: *geometry,
    })
}

/// Single-mode field at a point of the closed cavity.
pub fn approx_field(solution: &SingleModeSolution, x: Point) -> Result<Complex64> {
    solution.modes().evaluate(x, &solution.wave, &solution.geometry)
}

/// Enhancement factors of the single-mode field from exact depth integrals.
pub fn approx_enhancement(solution: &SingleModeSolution) -> Result<Enhancement> {
    enhancement_factors(&solution.modes(), &solution.wave, &solution.geometry)
}
