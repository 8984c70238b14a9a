//! Boundary integral solver for the aperture density.
//!
//! The density `phi(X) = -du/dx2 (width X, 0)` solves
//! `int_0^1 (G_e + G_i)(X, Y) phi(Y) dY = f(X) / width`. The kernel is split
//! as `a(X, Y) ln|X - Y| + b(X, Y)` with `a, b` smooth away from the corners,
//! and discretized by Nystrom collocation on the graded rule of
//! [`crate::quadrature`]. The unknown is `chi(t) = phi(nu(t)) nu'(t)`.
//!
//! The constant part `Gamma` of the kernel, which carries the cavity
//! resonances, is removed before factorization and restored by a rank-one
//! update, so the factorized matrix stays well conditioned at resonance.

use std::f64::consts::{FRAC_1_PI, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::asym::KernelDecomposition;
use crate::cavity::{
    forcing_unchecked, CavityGeometry, FieldNorms, IncidentWave, ModeCoefficients, Point,
};
use crate::error::{invalid, Error, Result};
use crate::green::{exterior_constant, InteriorKernel};
use crate::quadrature::{
    gauss_legendre, graded_map, graded_map_inverse, legendre_series, GradedRule, MAX_GRID,
};
use crate::specfun::{hankel1, j0, y0_regular};

/// Default collocation grid.
pub const DEFAULT_GRID: usize = 64;

/// Default number of higher modes kept in modal expansions.
pub const DEFAULT_MODES: usize = 32;

/// Largest condition estimate accepted from the factorization.
pub const CONDITION_LIMIT: f64 = 1e13;

/// Largest accepted ratio of the Legendre tail of the density to its peak.
pub const TAIL_TOLERANCE: f64 = 1e-5;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Grid and mode truncation of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub grid_size: usize,
    pub modes: usize,
    /// Double the grid while the density is unresolved.
    pub refine: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID,
            modes: DEFAULT_MODES,
            refine: true,
        }
    }
}

impl SolverOptions {
    pub fn with_grid(grid_size: usize) -> Self {
        Self {
            grid_size,
            ..Self::default()
        }
    }
}

/// Discretized aperture operator `M_local + Gamma 1 w^T` with the inverse of
/// the local part.
struct Discretization {
    rule: Arc<GradedRule>,
    inverse: DMatrix<Complex64>,
    gamma: Complex64,
    condition: f64,
}

impl Discretization {
    fn new(wave: &IncidentWave, geometry: &CavityGeometry, grid_size: usize) -> Result<Self> {
        let rule = GradedRule::shared(grid_size)?;
        let decomposition = KernelDecomposition::new(wave, geometry)?;
        let interior = InteriorKernel::new(wave, geometry)?;
        let matrix = assemble_local(&rule, wave, geometry, &decomposition, &interior);
        let (inverse, condition) = invert(matrix)?;
        Ok(Self {
            rule,
            inverse,
            gamma: decomposition.gamma(),
            condition,
        })
    }

    /// `Sum_k w_k (M_local^-1 1)_k`.
    fn unit_response(&self) -> Complex64 {
        let n = self.rule.size();
        let ones = DVector::from_element(n, Complex64::new(1.0, 0.0));
        let v = &self.inverse * ones;
        weighted_sum(self.rule.weights(), v.as_slice())
    }
}

fn weighted_sum(weights: &[f64], values: &[Complex64]) -> Complex64 {
    weights.iter().zip(values).map(|(w, v)| *w * v).sum()
}

/// Local part of the full kernel: exterior plus interior with `Gamma` removed.
fn assemble_local(
    rule: &GradedRule,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
    decomposition: &KernelDecomposition,
    interior: &InteriorKernel,
) -> DMatrix<Complex64> {
    let n = rule.size();
    let x = rule.points();
    let w = rule.weights();
    let scale = geometry.width() * wave.wavenumber();
    let log_half_scale = (0.5 * scale).ln();
    let gamma1 = decomposition.gamma1();
    let cosines = cosine_table(x, interior.correction().len());
    let correction = correction_matrix(&cosines, interior.correction());
    DMatrix::from_fn(n, n, |i, k| {
        let separation = (x[i] - x[k]).abs();
        let z = scale * separation;
        let bessel = j0(z);
        let exterior_smooth = if i == k {
            gamma1
        } else {
            Complex64::new(
                FRAC_1_PI * bessel * log_half_scale + 0.5 * y0_regular(z),
                -0.5 * bessel,
            )
        };
        let a = (bessel + 1.0) * FRAC_1_PI;
        let b = exterior_smooth - gamma1
            + FRAC_1_PI * (sine_log_ratio(x[i] - x[k]) + sum_sine_log(x[i], x[k]))
            + correction[(i, k)];
        a * (rule.log_weights()[(i, k)] + rule.log_distortion()[(i, k)] * w[k]) + b * w[k]
    })
}

/// Rows `cos(m pi x_i)` for `m = 1..=count`.
fn cosine_table(points: &[f64], count: usize) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), count, |i, m| ((m + 1) as f64 * PI * points[i]).cos())
}

fn correction_matrix(cosines: &DMatrix<f64>, coefficients: &[f64]) -> DMatrix<f64> {
    let mut scaled = cosines.clone();
    for (m, c) in coefficients.iter().enumerate() {
        scaled.column_mut(m).scale_mut(*c);
    }
    &scaled * cosines.transpose()
}

/// `ln|sin(pi u / 2) / u|`, smooth near `u = 0`.
fn sine_log_ratio(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let v = 0.5 * PI * u;
        (0.5 * PI).ln() - v * v / 6.0
    } else {
        ((0.5 * PI * u).sin() / u).abs().ln()
    }
}

fn sum_sine_log(x: f64, y: f64) -> f64 {
    (0.5 * PI * (x + y)).sin().abs().ln()
}

fn invert(matrix: DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, f64)> {
    let n = matrix.nrows();
    let norm = one_norm(&matrix);
    let inverse = matrix.lu().try_inverse().ok_or(Error::SingularSystem {
        condition: f64::INFINITY,
        grid_size: n,
    })?;
    let condition = norm * one_norm(&inverse);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::SingularSystem {
            condition,
            grid_size: n,
        });
    }
    Ok((inverse, condition))
}

fn one_norm(matrix: &DMatrix<Complex64>) -> f64 {
    matrix
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `<K^-1 1, 1>` for the parameter-free kernel
/// `(1/pi)(ln|X - Y| + ln|sin pi(X+Y)/2| + ln|sin pi(X-Y)/2|)`.
pub(crate) fn singular_kernel_unit_response(grid_size: usize) -> Result<f64> {
    let rule = GradedRule::shared(grid_size)?;
    let n = rule.size();
    let x = rule.points();
    let w = rule.weights();
    let matrix = DMatrix::from_fn(n, n, |i, k| {
        let a = 2.0 * FRAC_1_PI;
        let b = FRAC_1_PI * (sine_log_ratio(x[i] - x[k]) + sum_sine_log(x[i], x[k]));
        Complex64::new(
            a * (rule.log_weights()[(i, k)] + rule.log_distortion()[(i, k)] * w[k]) + b * w[k],
            0.0,
        )
    });
    let (inverse, _) = invert(matrix)?;
    let ones = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let v = inverse * ones;
    Ok(weighted_sum(w, v.as_slice()).re)
}

/// `lambda = 1 + Gamma <L^-1 1, 1>` for the discretized full kernel.
pub(crate) fn characteristic_value(
    wave: &IncidentWave,
    geometry: &CavityGeometry,
    grid_size: usize,
) -> Result<(Complex64, Complex64)> {
    let system = Discretization::new(wave, geometry, grid_size)?;
    let response = system.unit_response();
    Ok((1.0 + system.gamma * response, response))
}

/// Solution of the aperture equation on a graded grid.
#[derive(Debug, Clone)]
pub struct ApertureDensity {
    rule: Arc<GradedRule>,
    values: Vec<Complex64>,
    coefficients: Vec<Complex64>,
    wave: IncidentWave,
    geometry: CavityGeometry,
    condition: f64,
    characteristic: Complex64,
    /// `<phi, 1>` without the cancellation in the rank-one correction.
    moment0: Complex64,
}

impl ApertureDensity {
    /// Density excited by the incident plane wave.
    pub fn solve(wave: &IncidentWave, geometry: &CavityGeometry, options: SolverOptions) -> Result<Self> {
        Self::solve_with_forcing(wave, geometry, options, |x| forcing_unchecked(x, wave, geometry))
    }

    /// Density for an arbitrary aperture forcing `f(X)`; the right-hand side
    /// is `f / width`.
    pub fn solve_with_forcing<F>(
        wave: &IncidentWave,
        geometry: &CavityGeometry,
        options: SolverOptions,
        forcing: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        geometry.check_narrow(wave.wavenumber())?;
        if options.grid_size < 16 {
            return Err(invalid("grid_size", options.grid_size as f64, "must be at least 16"));
        }
        let mut grid = options.grid_size;
        loop {
            let density = Self::solve_once(wave, geometry, grid, &forcing)?;
            let tail = density.tail_ratio();
            if tail <= TAIL_TOLERANCE {
                return Ok(density);
            }
            if !options.refine || 2 * grid > MAX_GRID.min(512) {
                return Err(Error::Unresolved {
                    grid_size: grid,
                    tail_ratio: tail,
                });
            }
            grid *= 2;
        }
    }

    fn solve_once<F>(
        wave: &IncidentWave,
        geometry: &CavityGeometry,
        grid_size: usize,
        forcing: &F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let system = Discretization::new(wave, geometry, grid_size)?;
        let rule = Arc::clone(&system.rule);
        let n = rule.size();
        let width = geometry.width();
        let rhs = DVector::from_iterator(n, rule.points().iter().map(|&x| forcing(x) / width));
        let ones = DVector::from_element(n, Complex64::new(1.0, 0.0));
        let u = &system.inverse * rhs;
        let v = &system.inverse * ones;
        let w = rule.weights();
        let response = weighted_sum(w, v.as_slice());
        let characteristic = 1.0 + system.gamma * response;
        let forced = weighted_sum(w, u.as_slice());
        let shift = system.gamma * forced / characteristic;
        let values: Vec<Complex64> = u.iter().zip(v.iter()).map(|(a, b)| a - b * shift).collect();
        let coefficients = rule.legendre_coefficients(&values);
        Ok(Self {
            rule,
            values,
            coefficients,
            wave: *wave,
            geometry: *geometry,
            condition: system.condition,
            characteristic,
            moment0: forced / characteristic,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.rule.size()
    }

    pub fn wave(&self) -> &IncidentWave {
        &self.wave
    }

    pub fn geometry(&self) -> &CavityGeometry {
        &self.geometry
    }

    /// One-norm condition estimate of the factorized local operator.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `1 + Gamma <L^-1 1, 1>` at the solve's wavenumber.
    pub fn characteristic(&self) -> Complex64 {
        self.characteristic
    }

    /// Nodal values of `chi(t) = phi(nu(t)) nu'(t)`.
    pub fn nodal_values(&self) -> &[Complex64] {
        &self.values
    }

    /// Legendre coefficients of `chi` in `2t - 1`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Peak magnitude of the last tenth of the Legendre coefficients relative
    /// to the overall peak.
    pub fn tail_ratio(&self) -> f64 {
        let peak = self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let start = self.coefficients.len() - self.coefficients.len().div_ceil(10);
        let tail = self.coefficients[start..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        tail / peak
    }

    /// `phi(X)` at an interior aperture point.
    pub fn value_at(&self, x: f64) -> Result<Complex64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(invalid("X", x, "must lie in (0, 1)"));
        }
        let t = graded_map_inverse(x);
        let chi = legendre_series(&self.coefficients, 2.0 * t - 1.0);
        Ok(chi / crate::quadrature::graded_map_derivative(t))
    }

    /// `<phi, 1> = int_0^1 phi(X) dX`.
    pub fn aperture_moment(&self) -> Complex64 {
        self.moment0
    }

    /// `int_0^1 phi(X) cos(m pi X) dX`.
    pub fn moment(&self, m: usize) -> Result<Complex64> {
        Ok(self.moments(m + 1)?[m])
    }

    /// Moments `0..count`, evaluated on a refined Gauss grid through the
    /// Legendre interpolant of `chi`.
    pub fn moments(&self, count: usize) -> Result<Vec<Complex64>> {
        let limit = self.grid_size() / 2;
        if count > limit + 1 {
            return Err(invalid(
                "m",
                (count - 1) as f64,
                "moment index exceeds half the grid size",
            ));
        }
        let fine = 4 * self.grid_size() + 64;
        let (y, w) = gauss_legendre(fine)?;
        let samples: Vec<(f64, Complex64)> = y
            .iter()
            .zip(&w)
            .map(|(&yk, &wk)| {
                let x = graded_map(0.5 * (yk + 1.0));
                (x, 0.5 * wk * legendre_series(&self.coefficients, yk))
            })
            .collect();
        Ok((0..count)
            .map(|m| {
                if m == 0 {
                    return self.moment0;
                }
                let freq = m as f64 * PI;
                samples.iter().map(|(x, v)| v * (freq * x).cos()).sum()
            })
            .collect())
    }

    /// Cavity mode amplitudes `n = 0..=modes` implied by the aperture flux.
    pub fn mode_coefficients(&self, modes: usize) -> Result<ModeCoefficients> {
        let moments = self.moments(modes + 1)?;
        let width = self.geometry.width();
        let flux: Vec<Complex64> = moments
            .iter()
            .enumerate()
            .map(|(n, mu)| {
                let factor = if n == 0 { width.sqrt() } else { (2.0 * width).sqrt() };
                -factor * mu
            })
            .collect();
        ModeCoefficients::from_aperture_flux(&flux, &self.wave, &self.geometry)
    }

    /// Scattered field `u_sc(x)` in the upper half plane from the single-layer
    /// potential of the density.
    pub fn far_field_scattered(&self, x: Point) -> Result<Complex64> {
        let width = self.geometry.width();
        let k = self.wave.wavenumber();
        let reach = 10.0 * width.max(1.0 / k);
        if x.x2 < 0.0 || x.x1.hypot(x.x2) < reach {
            return Err(invalid(
                "x",
                x.x1.hypot(x.x2),
                "observation point must lie in the upper half plane at distance >= 10 max(width, 1/k)",
            ));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for ((&t, &wk), &chi) in self.rule.nodes().iter().zip(self.rule.weights()).zip(&self.values) {
            let source = Point::new(width * graded_map(t), 0.0);
            sum += wk * chi * hankel1(0, k * x.distance(source))?;
        }
        Ok(0.5 * I * width * sum)
    }

    /// Leading-order far field `-width G(x, 0) <phi, 1>`.
    pub fn far_field_leading_order(&self, x: Point) -> Result<Complex64> {
        let width = self.geometry.width();
        let h = hankel1(0, self.wave.wavenumber() * x.x1.hypot(x.x2))?;
        Ok(0.5 * I * width * h * self.aperture_moment())
    }

    /// Scattered field on the aperture at `x1` in `(0, width)`.
    pub fn aperture_scattered(&self, x1: f64) -> Result<Complex64> {
        let width = self.geometry.width();
        if !(x1 > 0.0 && x1 < width) {
            return Err(invalid("x1", x1, "must lie strictly inside the aperture"));
        }
        let x = x1 / width;
        let s = graded_map_inverse(x);
        let log_row = self.rule.log_weights_at(s)?;
        let scale = width * self.wave.wavenumber();
        let log_half_scale = (0.5 * scale).ln();
        let gamma1 = exterior_constant(&self.wave, &self.geometry);
        let mut sum = Complex64::new(0.0, 0.0);
        let nodes = self.rule.points().iter().zip(self.rule.weights());
        for (((&y, &w), &log_weight), &value) in nodes.zip(&log_row).zip(&self.values) {
            let z = scale * (x - y).abs();
            let bessel = j0(z);
            let smooth = if z == 0.0 {
                gamma1
            } else {
                Complex64::new(FRAC_1_PI * bessel * log_half_scale + 0.5 * y0_regular(z), -0.5 * bessel)
            };
            let weight = FRAC_1_PI * bessel * log_weight + smooth * w;
            sum += weight * value;
        }
        Ok(-width * sum)
    }
}

/// Total cavity field at a point strictly inside the cavity.
pub fn field_in_cavity(
    modes: &ModeCoefficients,
    x: Point,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> Result<Complex64> {
    let inside = x.x1 > 0.0 && x.x1 < geometry.width() && x.x2 < 0.0 && x.x2 > -geometry.depth();
    if !inside {
        return Err(invalid("x", x.x2, "point must lie strictly inside the cavity"));
    }
    modes.evaluate(x, wave, geometry)
}

/// Electric and magnetic field enhancement factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enhancement {
    /// `||grad u|| / (k sqrt(width depth))`.
    pub electric: f64,
    /// `||u|| / sqrt(width depth)`.
    pub magnetic: f64,
}

impl Enhancement {
    pub fn from_norms(norms: FieldNorms, wave: &IncidentWave, geometry: &CavityGeometry) -> Self {
        let area = (geometry.width() * geometry.depth()).sqrt();
        Self {
            electric: norms.gradient / (wave.wavenumber() * area),
            magnetic: norms.value / area,
        }
    }
}

/// Enhancement factors of a modal cavity field.
pub fn enhancement_factors(
    modes: &ModeCoefficients,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> Result<Enhancement> {
    Ok(Enhancement::from_norms(modes.norms(wave, geometry)?, wave, geometry))
}

/// One solved wavenumber: enhancement factors, modes and solver metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementRecord {
    pub kappa: f64,
    pub q_e: f64,
    pub q_h: f64,
    pub modes: ModeCoefficients,
    pub aperture_moment: Complex64,
    pub solver_grid: usize,
}

impl EnhancementRecord {
    pub fn from_density(density: &ApertureDensity, modes: usize) -> Result<Self> {
        let coefficients = density.mode_coefficients(modes)?;
        let factors = enhancement_factors(&coefficients, density.wave(), density.geometry())?;
        Ok(Self {
            kappa: density.wave().wavenumber(),
            q_e: factors.electric,
            q_h: factors.magnetic,
            modes: coefficients,
            aperture_moment: density.aperture_moment(),
            solver_grid: density.grid_size(),
        })
    }

    /// Solves the aperture equation and builds the record.
    pub fn compute(wave: &IncidentWave, geometry: &CavityGeometry, options: SolverOptions) -> Result<Self> {
        let density = ApertureDensity::solve(wave, geometry, options)?;
        Self::from_density(&density, options.modes)
    }

    /// Relative mismatch between the aperture moment and the one implied by
    /// the fundamental mode amplitudes.
    pub fn moment_mismatch(&self, geometry: &CavityGeometry) -> f64 {
        let k = self.kappa;
        let d = geometry.depth();
        let root = geometry.width().sqrt();
        let implied = match geometry.bottom() {
            crate::cavity::Bottom::Pmc => {
                -self.modes.upward()[0] / root * 2.0 * I * k * (k * d).cos()
            }
            crate::cavity::Bottom::Pec => {
                -self.modes.downward()[0] / root * I * k * ((2.0 * I * k * d).exp() - 1.0)
            }
        };
        (implied - self.aperture_moment).norm() / self.aperture_moment.norm().max(f64::MIN_POSITIVE)
    }
}
