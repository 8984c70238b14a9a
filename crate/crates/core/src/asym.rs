//! Small-width asymptotics: the constant part of the aperture kernel, the
//! universal constant `q0`, the characteristic function `p1` whose roots are
//! the scattering resonances, and resonance formulas and root finding.

use std::f64::consts::{FRAC_1_PI, LN_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::bie::{characteristic_value, singular_kernel_unit_response};
use crate::cavity::{Bottom, CavityGeometry, IncidentWave};
use crate::error::{invalid, Error, Result};
use crate::green::exterior_constant;
use crate::specfun::MathConstants;

/// Guard radius around the trigonometric poles of `p1`.
pub const P1_POLE_GUARD: f64 = 1e-8;

/// Grid at which the `q0` refinement starts.
const Q0_START_GRID: usize = 32;

/// Doublings allowed before `q0` is declared unconverged.
const Q0_DOUBLINGS: usize = 6;

/// Change between doublings at which `q0` counts as converged.
const Q0_TOLERANCE: f64 = 1e-11;

/// Newton iteration cap for resonances.
const NEWTON_MAX_ITERATIONS: usize = 50;

/// Constant part `Gamma = Gamma1 + Gamma2` of the full aperture kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDecomposition {
    gamma1: Complex64,
    gamma2: f64,
    bottom: Bottom,
}

impl KernelDecomposition {
    pub fn new(wave: &IncidentWave, geometry: &CavityGeometry) -> Result<Self> {
        let k = wave.wavenumber();
        let kd = k * geometry.depth();
        let (s, c) = kd.sin_cos();
        let cavity_term = match geometry.bottom() {
            Bottom::Pmc => {
                pole("PMC constant kernel term", c.abs(), crate::cavity::POLE_GUARD)?;
                -s / (c * geometry.width() * k)
            }
            Bottom::Pec => {
                pole("PEC constant kernel term", s.abs(), crate::cavity::POLE_GUARD)?;
                c / (s * geometry.width() * k)
            }
        };
        Ok(Self {
            gamma1: exterior_constant(wave, geometry),
            gamma2: cavity_term + 2.0 * LN_2 / PI,
            bottom: geometry.bottom(),
        })
    }

    /// Constant of the exterior kernel, `(ln k + gamma1 + ln width)/pi`.
    pub fn gamma1(&self) -> Complex64 {
        self.gamma1
    }

    /// Constant of the interior kernel.
    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn gamma(&self) -> Complex64 {
        self.gamma1 + self.gamma2
    }

    pub fn bottom(&self) -> Bottom {
        self.bottom
    }
}

fn pole(what: &'static str, magnitude: f64, guard: f64) -> Result<()> {
    if magnitude < guard {
        return Err(Error::Pole {
            what,
            magnitude,
            guard,
        });
    }
    Ok(())
}

/// `k(X, Y) = (1/pi)(ln|X - Y| + ln|sin pi(X+Y)/2| + ln|sin pi(X-Y)/2|)`.
pub fn singular_kernel_k(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(invalid("X", x, "arguments must lie in [0, 1]"));
    }
    if x == y {
        return Err(Error::SingularPoint { reason: "k at X = Y" });
    }
    if x + y == 0.0 || x + y == 2.0 {
        return Err(Error::SingularPoint { reason: "k at a corner" });
    }
    let u = (x - y).abs();
    Ok(FRAC_1_PI * (u.ln() + (0.5 * PI * (x + y)).sin().abs().ln() + (0.5 * PI * u).sin().ln()))
}

/// `<K^-1 1, 1>` for the kernel `k` on a graded grid of the given size.
pub fn q0_on_grid(grid_size: usize) -> Result<f64> {
    singular_kernel_unit_response(grid_size)
}

/// The constant `q0 = <K^-1 1, 1>`, converged by grid doubling and cached.
pub fn q0_constant() -> Result<f64> {
    static Q0: OnceLock<Result<f64>> = OnceLock::new();
    Q0.get_or_init(converge_q0).clone()
}

fn converge_q0() -> Result<f64> {
    let mut grid = Q0_START_GRID;
    let mut previous = q0_on_grid(grid)?;
    let mut change = f64::INFINITY;
    for _ in 0..Q0_DOUBLINGS {
        grid *= 2;
        let current = q0_on_grid(grid)?;
        change = (current - previous).abs();
        if change <= Q0_TOLERANCE {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NoConvergence {
        what: "q0 grid refinement",
        iterations: Q0_DOUBLINGS,
        last_change: change,
    })
}

/// How a resonance was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceMethod {
    AsymptoticFormula,
    NewtonOnP1,
    SweepPeak,
}

/// A scattering resonance near the `n`-th Fabry-Perot wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceResult {
    pub n: usize,
    pub k_complex: Complex64,
    pub method: ResonanceMethod,
    pub residual: f64,
    pub iterations: usize,
}

/// Leading-order resonance `n pi / d` (PMC bottom) or `(n + 1/2) pi / d` (PEC bottom).
pub fn fabry_perot_wavenumber(n: usize, geometry: &CavityGeometry) -> Result<f64> {
    let d = geometry.depth();
    match geometry.bottom() {
        Bottom::Pmc if n == 0 => Err(invalid("n", 0.0, "PMC resonances start at n = 1")),
        Bottom::Pmc => Ok(n as f64 * PI / d),
        Bottom::Pec => Ok((n as f64 + 0.5) * PI / d),
    }
}

/// Characteristic function `p1` with a fixed value of `q0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Model {
    geometry: CavityGeometry,
    q0: f64,
}

impl P1Model {
    pub fn new(geometry: &CavityGeometry) -> Result<Self> {
        Ok(Self::with_q0(geometry, q0_constant()?))
    }

    /// Model with an explicit `q0`, e.g. to probe sensitivity.
    pub fn with_q0(geometry: &CavityGeometry, q0: f64) -> Self {
        Self {
            geometry: *geometry,
            q0,
        }
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn geometry(&self) -> &CavityGeometry {
        &self.geometry
    }

    fn check(&self, kappa: Complex64) -> Result<()> {
        if !(kappa.re.is_finite() && kappa.im.is_finite()) {
            return Err(invalid("kappa", kappa.re, "must be finite"));
        }
        if kappa.re <= 0.0 {
            return Err(Error::Branch { re: kappa.re });
        }
        if kappa.norm() < 1e-8 {
            return Err(invalid("kappa", kappa.norm(), "too close to zero"));
        }
        let d = self.geometry.depth();
        let offset = match self.geometry.bottom() {
            Bottom::Pmc => 0.5,
            Bottom::Pec => 0.0,
        };
        let index = (kappa.re * d / PI - offset).round();
        let nearest = Complex64::new((index + offset) * PI / d, 0.0);
        let distance = (kappa - nearest).norm();
        let what = match self.geometry.bottom() {
            Bottom::Pmc => "p1 tangent",
            Bottom::Pec => "p1 cotangent",
        };
        pole(what, distance, P1_POLE_GUARD)
    }

    /// `rho(k) = (2 ln 2 + ln k + gamma1)/pi` on the principal branch.
    fn rho(kappa: Complex64) -> Complex64 {
        (2.0 * LN_2 + kappa.ln() + MathConstants::new().gamma1) * FRAC_1_PI
    }

    fn depth_term(&self, kappa: Complex64) -> Complex64 {
        let kd = kappa * self.geometry.depth();
        match self.geometry.bottom() {
            Bottom::Pmc => -kd.tan() / kappa,
            Bottom::Pec => kd.cos() / (kd.sin() * kappa),
        }
    }

    /// `p1(k) = width + (depth term + width rho(k) + (width/pi) ln width) q0`.
    pub fn value(&self, kappa: Complex64) -> Result<Complex64> {
        self.check(kappa)?;
        let eps = self.geometry.width();
        let bracket = self.depth_term(kappa) + eps * Self::rho(kappa) + eps * FRAC_1_PI * eps.ln();
        Ok(eps + bracket * self.q0)
    }

    /// Analytic derivative of `p1` in `k`.
    pub fn derivative(&self, kappa: Complex64) -> Result<Complex64> {
        self.check(kappa)?;
        let d = self.geometry.depth();
        let eps = self.geometry.width();
        let kd = kappa * d;
        let depth = match self.geometry.bottom() {
            Bottom::Pmc => {
                let sec2 = 1.0 / (kd.cos() * kd.cos());
                -(d * kappa * sec2 - kd.tan()) / (kappa * kappa)
            }
            Bottom::Pec => {
                let csc2 = 1.0 / (kd.sin() * kd.sin());
                (-d * kappa * csc2 - kd.cos() / kd.sin()) / (kappa * kappa)
            }
        };
        Ok((depth + eps * FRAC_1_PI / kappa) * self.q0)
    }

    /// Resonance from the first-order asymptotic formula.
    pub fn asymptotic_resonance(&self, n: usize) -> Result<ResonanceResult> {
        let k0 = fabry_perot_wavenumber(n, &self.geometry)?;
        let eps = self.geometry.width();
        let d = self.geometry.depth();
        let bracket = FRAC_1_PI * eps * eps.ln()
            + (1.0 / self.q0 + Self::rho(Complex64::new(k0, 0.0))) * eps;
        let correction = k0 / d * bracket;
        if correction.norm() >= 0.2 * k0 {
            return Err(invalid(
                "width",
                eps,
                "asymptotic correction exceeds 20% of the leading resonance",
            ));
        }
        let k = k0 + correction;
        Ok(ResonanceResult {
            n,
            k_complex: k,
            method: ResonanceMethod::AsymptoticFormula,
            residual: self.value(k).map(|v| v.norm()).unwrap_or(f64::NAN),
            iterations: 0,
        })
    }

    /// Root of `p1` by Newton's method seeded at the asymptotic resonance.
    pub fn newton_resonance(&self, n: usize, tolerance: f64) -> Result<ResonanceResult> {
        if tolerance.is_nan() || tolerance < 1e-13 {
            return Err(invalid("tolerance", tolerance, "must be at least 1e-13"));
        }
        let k0 = fabry_perot_wavenumber(n, &self.geometry)?;
        let sector = 0.5 * PI / self.geometry.depth();
        let mut k = self.asymptotic_resonance(n)?.k_complex;
        let mut step_size = f64::INFINITY;
        for iteration in 1..=NEWTON_MAX_ITERATIONS {
            let step = self.value(k)? / self.derivative(k)?;
            k -= step;
            step_size = step.norm();
            if (k.re - k0).abs() > sector {
                return Err(Error::NoConvergence {
                    what: "resonance Newton iteration (root left its sector)",
                    iterations: iteration,
                    last_change: step_size,
                });
            }
            let residual = self.value(k)?.norm();
            if residual <= tolerance {
                return Ok(ResonanceResult {
                    n,
                    k_complex: k,
                    method: ResonanceMethod::NewtonOnP1,
                    residual,
                    iterations: iteration,
                });
            }
        }
        Err(Error::NoConvergence {
            what: "resonance Newton iteration",
            iterations: NEWTON_MAX_ITERATIONS,
            last_change: step_size,
        })
    }
}

/// `p1(k)` with the cached `q0`.
pub fn p1_function(kappa: Complex64, geometry: &CavityGeometry) -> Result<Complex64> {
    P1Model::new(geometry)?.value(kappa)
}

/// Derivative of `p1` with the cached `q0`.
pub fn p1_derivative(kappa: Complex64, geometry: &CavityGeometry) -> Result<Complex64> {
    P1Model::new(geometry)?.derivative(kappa)
}

/// `lambda(k) = 1 + Gamma <L^-1 1, 1>` from the discretized full kernel.
pub fn lambda_full(kappa: f64, geometry: &CavityGeometry, grid_size: usize) -> Result<Complex64> {
    if grid_size < 16 {
        return Err(invalid("grid_size", grid_size as f64, "must be at least 16"));
    }
    let wave = IncidentWave::new(kappa, 0.0)?;
    Ok(characteristic_value(&wave, geometry, grid_size)?.0)
}

/// Resonance `n` from the asymptotic formula.
pub fn resonance_asymptotic(n: usize, geometry: &CavityGeometry) -> Result<ResonanceResult> {
    P1Model::new(geometry)?.asymptotic_resonance(n)
}

/// Resonance `n` as a Newton root of `p1`.
pub fn resonance_newton(n: usize, geometry: &CavityGeometry, tolerance: f64) -> Result<ResonanceResult> {
    P1Model::new(geometry)?.newton_resonance(n, tolerance)
}
