//! Cavity geometry, the incident plane wave and the waveguide modes of the
//! cavity interior.
//!
//! Inside the cavity `0 < x1 < width`, `-depth < x2 < 0` the field is a sum of
//! modes `phi_n(x1) (a_n e^{-i beta_n x2} + b_n e^{i beta_n (x2 + depth)})`
//! with `phi_0 = 1/sqrt(width)` and `phi_n = sqrt(2/width) cos(n pi x1/width)`.
//! Evanescent modes are always evaluated through decaying exponentials.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Guard on the `n = 0` denominators of the DtN symbols and mode inversions.
pub const POLE_GUARD: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Boundary condition on the cavity bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bottom {
    /// Magnetic conductor: the field vanishes on the bottom.
    Pmc,
    /// Electric conductor: the normal derivative vanishes on the bottom.
    Pec,
}

/// Width, depth and bottom condition of the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    width: f64,
    depth: f64,
    bottom: Bottom,
}

impl CavityGeometry {
    pub fn new(width: f64, depth: f64, bottom: Bottom) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", width, "must be positive and finite"));
        }
        if !(depth.is_finite() && depth > 0.0) {
            return Err(invalid("depth", depth, "must be positive and finite"));
        }
        Ok(Self {
            width,
            depth,
            bottom,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn bottom(&self) -> Bottom {
        self.bottom
    }

    /// Same cavity with another width.
    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::new(width, self.depth, self.bottom)
    }

    /// Rejects wavenumbers for which the first higher mode propagates.
    pub fn check_narrow(&self, wavenumber: f64) -> Result<()> {
        let kw = wavenumber * self.width;
        if kw >= PI {
            return Err(Error::PropagatingMode {
                mode: 1,
                kappa_width: kw,
            });
        }
        Ok(())
    }

    /// Whether `x` lies in the closed cavity.
    pub fn contains(&self, x: Point) -> bool {
        (0.0..=self.width).contains(&x.x1) && (-self.depth..=0.0).contains(&x.x2)
    }
}

/// Plane wave `exp(i k (x1 sin(theta) - x2 cos(theta)))` incident from above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    wavenumber: f64,
    angle: f64,
}

impl IncidentWave {
    pub fn new(wavenumber: f64, angle: f64) -> Result<Self> {
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(invalid("wavenumber", wavenumber, "must be positive and finite"));
        }
        if !(angle.is_finite() && angle.abs() < PI / 2.0) {
            return Err(invalid("angle", angle, "must lie in (-pi/2, pi/2)"));
        }
        Ok(Self { wavenumber, angle })
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wavenumber
    }

    /// Same angle at another wavenumber.
    pub fn with_wavenumber(&self, wavenumber: f64) -> Result<Self> {
        Self::new(wavenumber, self.angle)
    }

    /// Incident field at `x`.
    pub fn incident(&self, x: Point) -> Complex64 {
        let (s, c) = self.angle.sin_cos();
        (I * self.wavenumber * (x.x1 * s - x.x2 * c)).exp()
    }

    /// Field reflected by the ground plane without a cavity.
    pub fn reflected(&self, x: Point) -> Complex64 {
        let (s, c) = self.angle.sin_cos();
        (I * self.wavenumber * (x.x1 * s + x.x2 * c)).exp()
    }
}

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }
}

/// Decay rate `sqrt((n pi/width)^2 - k^2)` of mode `n >= 1`.
pub fn decay_rate(n: usize, wave: &IncidentWave, geometry: &CavityGeometry) -> Result<f64> {
    let cutoff = n as f64 * PI / geometry.width;
    let k = wave.wavenumber;
    if cutoff <= k {
        return Err(Error::PropagatingMode {
            mode: n,
            kappa_width: k * geometry.width,
        });
    }
    Ok(((cutoff - k) * (cutoff + k)).sqrt())
}

/// Propagation constant of mode `n`: `k` for `n = 0`, `i s_n` otherwise.
pub fn beta(n: usize, wave: &IncidentWave, geometry: &CavityGeometry) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(wave.wavenumber, 0.0));
    }
    Ok(Complex64::new(0.0, decay_rate(n, wave, geometry)?))
}

/// Orthonormal cross-section basis function `phi_n(x1)`.
pub fn basis_value(n: usize, x1: f64, geometry: &CavityGeometry) -> Result<f64> {
    if !(0.0..=geometry.width).contains(&x1) {
        return Err(invalid("x1", x1, "must lie in [0, width]"));
    }
    Ok(basis_unchecked(n, x1, geometry.width))
}

pub(crate) fn basis_unchecked(n: usize, x1: f64, width: f64) -> f64 {
    if n == 0 {
        1.0 / width.sqrt()
    } else {
        (2.0 / width).sqrt() * (n as f64 * PI * x1 / width).cos()
    }
}

/// Total field of the incident and reflected waves on the aperture, in the
/// rescaled coordinate `x1 = width * X`.
pub fn aperture_forcing(
    scaled_x: f64,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&scaled_x) {
        return Err(invalid("X", scaled_x, "must lie in [0, 1]"));
    }
    Ok(forcing_unchecked(scaled_x, wave, geometry))
}

pub(crate) fn forcing_unchecked(
    scaled_x: f64,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> Complex64 {
    2.0 * (I * wave.wavenumber * wave.angle.sin() * geometry.width * scaled_x).exp()
}

/// Projection `<u_inc, phi_0>` of the incident wave on the fundamental mode.
pub fn incident_mode_overlap(wave: &IncidentWave, geometry: &CavityGeometry) -> Complex64 {
    let half = 0.5 * wave.wavenumber * wave.angle.sin() * geometry.width;
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    geometry.width.sqrt() * (I * half).exp() * sinc
}

/// Which modes a DtN operator keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtnVariant {
    /// Every mode.
    Full,
    /// Only the fundamental mode.
    SingleMode,
}

/// Multiplier taking the aperture trace coefficient of mode `n` to its
/// `x2`-derivative coefficient.
pub fn dtn_symbol(n: usize, wave: &IncidentWave, geometry: &CavityGeometry) -> Result<Complex64> {
    let k = wave.wavenumber;
    let kd = k * geometry.depth;
    if n == 0 {
        let (s, c) = kd.sin_cos();
        return match geometry.bottom {
            Bottom::Pmc => {
                guard("PMC DtN symbol", 2.0 * s.abs())?;
                Ok(Complex64::new(k * c / s, 0.0))
            }
            Bottom::Pec => {
                guard("PEC DtN symbol", 2.0 * c.abs())?;
                Ok(Complex64::new(-k * s / c, 0.0))
            }
        };
    }
    let rate = decay_rate(n, wave, geometry)?;
    let q = (-2.0 * rate * geometry.depth).exp();
    let value = match geometry.bottom {
        Bottom::Pmc => rate * (1.0 + q) / (1.0 - q),
        Bottom::Pec => rate * (1.0 - q) / (1.0 + q),
    };
    Ok(Complex64::new(value, 0.0))
}

/// Applies the DtN map to a list of aperture trace coefficients.
pub fn dtn_apply(
    coefficients: &[Complex64],
    wave: &IncidentWave,
    geometry: &CavityGeometry,
    variant: DtnVariant,
) -> Result<Vec<Complex64>> {
    if let Some(bad) = coefficients.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(invalid("coefficient", bad.re + bad.im, "must be finite"));
    }
    let symbol0 = dtn_symbol(0, wave, geometry)?;
    coefficients
        .iter()
        .enumerate()
        .map(|(n, &c)| match (n, variant) {
            (0, _) => Ok(symbol0 * c),
            (_, DtnVariant::SingleMode) => Ok(Complex64::new(0.0, 0.0)),
            (_, DtnVariant::Full) => Ok(dtn_symbol(n, wave, geometry)? * c),
        })
        .collect()
}

pub(crate) fn guard(what: &'static str, magnitude: f64) -> Result<()> {
    if magnitude < POLE_GUARD {
        return Err(Error::Pole {
            what,
            magnitude,
            guard: POLE_GUARD,
        });
    }
    Ok(())
}

/// `L2(D)` norms of a field and of its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldNorms {
    pub value: f64,
    pub gradient: f64,
}

/// Amplitudes of the downward (`a_n`) and upward (`b_n`) parts of each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    downward: Vec<Complex64>,
    upward: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn new(downward: Vec<Complex64>, upward: Vec<Complex64>) -> Result<Self> {
        if downward.len() != upward.len() || downward.is_empty() {
            return Err(invalid(
                "modes",
                downward.len() as f64,
                "downward and upward lists must be nonempty and of equal length",
            ));
        }
        Ok(Self { downward, upward })
    }

    /// Mode amplitudes reproducing the given aperture fluxes `d/dx2 u_n(0)`
    /// under the bottom condition of `geometry`.
    pub fn from_aperture_flux(
        flux: &[Complex64],
        wave: &IncidentWave,
        geometry: &CavityGeometry,
    ) -> Result<Self> {
        let mut downward = Vec::with_capacity(flux.len());
        let mut upward = Vec::with_capacity(flux.len());
        let d = geometry.depth;
        for (n, &f) in flux.iter().enumerate() {
            let b = beta(n, wave, geometry)?;
            // e^{i beta d} is bounded by one in both regimes
            let phase = (I * b * d).exp();
            let reflect = phase * phase;
            let (denominator, link) = match geometry.bottom {
                Bottom::Pmc => (1.0 + reflect, -phase),
                Bottom::Pec => (1.0 - reflect, phase),
            };
            if n == 0 {
                let what = match geometry.bottom {
                    Bottom::Pmc => "PMC mode inversion",
                    Bottom::Pec => "PEC mode inversion",
                };
                guard(what, denominator.norm())?;
            }
            let a = -f / (I * b * denominator);
            downward.push(a);
            upward.push(a * link);
        }
        Self::new(downward, upward)
    }

    pub fn downward(&self) -> &[Complex64] {
        &self.downward
    }

    pub fn upward(&self) -> &[Complex64] {
        &self.upward
    }

    /// Highest mode index kept.
    pub fn truncation(&self) -> usize {
        self.downward.len() - 1
    }

    /// Mode-by-mode difference `self - other`, padding the shorter list with zeros.
    pub fn difference(&self, other: &Self) -> Self {
        let len = self.downward.len().max(other.downward.len());
        let zero = Complex64::new(0.0, 0.0);
        let at = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or(zero);
        Self {
            downward: (0..len)
                .map(|i| at(&self.downward, i) - at(&other.downward, i))
                .collect(),
            upward: (0..len)
                .map(|i| at(&self.upward, i) - at(&other.upward, i))
                .collect(),
        }
    }

    /// Vertical profile of mode `n` at depth `x2`.
    pub fn profile(
        &self,
        n: usize,
        x2: f64,
        wave: &IncidentWave,
        geometry: &CavityGeometry,
    ) -> Result<Complex64> {
        let (a, b) = (self.downward[n], self.upward[n]);
        let d = geometry.depth;
        if n == 0 {
            let k = wave.wavenumber;
            return Ok(a * (-I * k * x2).exp() + b * (I * k * (x2 + d)).exp());
        }
        let s = decay_rate(n, wave, geometry)?;
        Ok(a * (s * x2).exp() + b * (-s * (x2 + d)).exp())
    }

    /// Vertical derivative of the profile of mode `n` at depth `x2`.
    pub fn profile_slope(
        &self,
        n: usize,
        x2: f64,
        wave: &IncidentWave,
        geometry: &CavityGeometry,
    ) -> Result<Complex64> {
        let (a, b) = (self.downward[n], self.upward[n]);
        let d = geometry.depth;
        if n == 0 {
            let k = wave.wavenumber;
            return Ok(I * k * (-a * (-I * k * x2).exp() + b * (I * k * (x2 + d)).exp()));
        }
        let s = decay_rate(n, wave, geometry)?;
        Ok(s * (a * (s * x2).exp() - b * (-s * (x2 + d)).exp()))
    }

    /// Modal sum at a point of the closed cavity.
    pub fn evaluate(
        &self,
        x: Point,
        wave: &IncidentWave,
        geometry: &CavityGeometry,
    ) -> Result<Complex64> {
        if !geometry.contains(x) {
            return Err(invalid("x", x.x1, "point lies outside the cavity"));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..self.downward.len() {
            let weight = basis_unchecked(n, x.x1, geometry.width);
            sum += weight * self.profile(n, x.x2, wave, geometry)?;
        }
        Ok(sum)
    }

    /// `L2(D)` norms of the modal field and its gradient, by orthogonality of
    /// the cross-section basis and closed-form depth integrals.
    pub fn norms(&self, wave: &IncidentWave, geometry: &CavityGeometry) -> Result<FieldNorms> {
        let d = geometry.depth;
        let k = wave.wavenumber;
        let mut value = 0.0;
        let mut gradient = 0.0;
        for n in 0..self.downward.len() {
            if n == 0 {
                let a = self.downward[0];
                let b = self.upward[0] * (I * k * d).exp();
                let diagonal = (a.norm_sqr() + b.norm_sqr()) * d;
                let oscillating = (I * 2.0 * k * d).exp_m1() / (2.0 * I * k);
                let cross = 2.0 * (a * b.conj() * oscillating).re;
                value += diagonal + cross;
                gradient += k * k * (diagonal - cross);
                continue;
            }
            let s = decay_rate(n, wave, geometry)?;
            let (a, b) = (self.downward[n], self.upward[n]);
            let decay = -(-2.0 * s * d).exp_m1() / (2.0 * s);
            let diagonal = (a.norm_sqr() + b.norm_sqr()) * decay;
            let cross = 2.0 * (a * b.conj()).re * (-s * d).exp() * d;
            let squared = diagonal + cross;
            let transverse = (n as f64 * PI / geometry.width).powi(2);
            value += squared;
            gradient += s * s * (diagonal - cross) + transverse * squared;
        }
        Ok(FieldNorms {
            value: value.max(0.0).sqrt(),
            gradient: gradient.max(0.0).sqrt(),
        })
    }
}

trait ExpM1 {
    fn exp_m1(self) -> Self;
}

impl ExpM1 for Complex64 {
    /// `exp(z) - 1` without cancellation for small `|z|`.
    fn exp_m1(self) -> Self {
        if self.norm() < 1e-3 {
            let mut term = self;
            let mut sum = self;
            for k in 2..12 {
                term *= self / k as f64;
                sum += term;
            }
            sum
        } else {
            self.exp() - 1.0
        }
    }
}
