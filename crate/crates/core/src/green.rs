//! Green functions of the half space and of the cavity, and the rescaled
//! aperture kernels.
//!
//! On the aperture, written in the rescaled coordinate `x1 = width * X`, the
//! exterior kernel is `-(i/2) H0(width k |X - Y|)`. The interior kernel is
//! `C_0/(width depth) + sum_{m>=1} C_m/(width depth) cos(m pi X) cos(m pi Y)`;
//! its slowly decaying part `-2 width depth/(m pi)` is summed in closed form
//! into `(1/pi)(2 ln 2 + ln|sin pi(X+Y)/2| + ln|sin pi(X-Y)/2|)`, leaving a
//! rapidly convergent correction series.

use std::f64::consts::{FRAC_1_PI, LN_2, PI};

use num_complex::Complex64;

use crate::cavity::{decay_rate, Bottom, CavityGeometry, IncidentWave, Point, POLE_GUARD};
use crate::error::{invalid, Error, Result};
use crate::specfun::{hankel1, MathConstants};

/// Terms of the correction series below this magnitude count as negligible.
pub const SERIES_TOLERANCE: f64 = 1e-14;

/// Hard cap on correction-series terms.
pub const SERIES_CAP: usize = 10_000;

/// How a modal sum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModalForm {
    ClosedForm,
    DirectSeries,
}

/// Depth-direction modal sum `C_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalSum {
    pub m: usize,
    pub value: f64,
    pub form: ModalForm,
}

/// A kernel value split into its leading closed form and a small remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvaluation {
    pub value: Complex64,
    pub singular_part: Complex64,
    pub smooth_part: Complex64,
    pub truncation_terms: usize,
}

/// Half-space Neumann Green function `-(i/4)(H0(k|x - y|) + H0(k|x' - y|))`.
pub fn halfspace_green(x: Point, y: Point, wavenumber: f64) -> Result<Complex64> {
    if x.x2 < 0.0 || y.x2 < 0.0 {
        return Err(invalid("x2", x.x2.min(y.x2), "points must lie in the closed upper half plane"));
    }
    if x == y {
        return Err(Error::SingularPoint {
            reason: "coincident source and target",
        });
    }
    let image = Point::new(x.x1, -x.x2);
    let direct = hankel1(0, wavenumber * x.distance(y))?;
    let reflected = hankel1(0, wavenumber * image.distance(y))?;
    Ok(Complex64::new(0.0, -0.25) * (direct + reflected))
}

/// Closed-form modal sum `C_m`; evanescent terms use decaying exponentials.
pub fn modal_sum_c(m: usize, wave: &IncidentWave, geometry: &CavityGeometry) -> Result<ModalSum> {
    let d = geometry.depth();
    let value = if m == 0 {
        let k = wave.wavenumber();
        let (s, c) = (k * d).sin_cos();
        match geometry.bottom() {
            Bottom::Pmc => {
                pole_check("PMC modal sum", c.abs())?;
                -d * s / (c * k)
            }
            Bottom::Pec => {
                pole_check("PEC modal sum", s.abs())?;
                d * c / (s * k)
            }
        }
    } else {
        let s = decay_rate(m, wave, geometry)?;
        let q = (-2.0 * s * d).exp();
        let ratio = match geometry.bottom() {
            Bottom::Pmc => (1.0 - q) / (1.0 + q),
            Bottom::Pec => (1.0 + q) / (1.0 - q),
        };
        -(2.0 * d / s) * ratio
    };
    Ok(ModalSum {
        m,
        value,
        form: ModalForm::ClosedForm,
    })
}

/// `C_m` by direct summation of the depth-mode series over `terms` terms,
/// plus an integral estimate of the remaining tail.
pub fn modal_sum_series(
    m: usize,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
    terms: usize,
) -> Result<ModalSum> {
    if terms == 0 {
        return Err(invalid("terms", 0.0, "need at least one term"));
    }
    let k = wave.wavenumber();
    let d = geometry.depth();
    let shift = k * k - (m as f64 * PI / geometry.width()).powi(2);
    let step = PI / d;
    let weight_m = if m == 0 { 1.0 } else { 2.0 };
    let (offset, first_weight) = match geometry.bottom() {
        Bottom::Pmc => (0.5, 2.0),
        Bottom::Pec => (0.0, 1.0),
    };
    let term = |n: usize| {
        let weight = if n == 0 { first_weight } else { 2.0 };
        let mode = step * (n as f64 + offset);
        weight / (shift - mode * mode)
    };
    // smallest terms first
    let mut sum = 0.0;
    for n in (0..terms).rev() {
        sum += term(n);
    }
    // midpoint estimate of sum_{n >= terms} 2 / (shift - step^2 (n + offset)^2)
    let lower = step * (terms as f64 + offset - 0.5);
    let tail = if shift < 0.0 {
        let s = (-shift).sqrt();
        -2.0 / (step * s) * (0.5 * PI - (lower / s).atan())
    } else {
        let r = shift.sqrt();
        if lower <= r {
            return Err(invalid("terms", terms as f64, "too few terms to pass the modal pole"));
        }
        -1.0 / (step * r) * ((lower + r) / (lower - r)).ln()
    };
    Ok(ModalSum {
        m,
        value: weight_m * (sum + tail),
        form: ModalForm::DirectSeries,
    })
}

fn pole_check(what: &'static str, magnitude: f64) -> Result<()> {
    if magnitude < POLE_GUARD {
        return Err(Error::Pole {
            what,
            magnitude,
            guard: POLE_GUARD,
        });
    }
    Ok(())
}

/// Leading constant `(ln k + gamma1 + ln width)/pi` of the exterior kernel.
pub fn exterior_constant(wave: &IncidentWave, geometry: &CavityGeometry) -> Complex64 {
    let constants = MathConstants::new();
    (wave.wavenumber().ln() + constants.gamma1 + geometry.width().ln()) * FRAC_1_PI
}

/// Exterior aperture kernel `-(i/2) H0(width k |X - Y|)`.
pub fn kernel_exterior(
    x: f64,
    y: f64,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> Result<KernelEvaluation> {
    check_unit("X", x)?;
    check_unit("Y", y)?;
    if x == y {
        return Err(Error::SingularPoint {
            reason: "exterior kernel at X = Y",
        });
    }
    let separation = (x - y).abs();
    let h = hankel1(0, geometry.width() * wave.wavenumber() * separation)?;
    let value = Complex64::new(0.0, -0.5) * h;
    let singular = exterior_constant(wave, geometry) + FRAC_1_PI * separation.ln();
    Ok(KernelEvaluation {
        value,
        singular_part: singular,
        smooth_part: value - singular,
        truncation_terms: 1,
    })
}

/// Interior aperture kernel with its correction-series coefficients
/// precomputed for one wavenumber and cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorKernel {
    constant: f64,
    correction: Vec<f64>,
}

impl InteriorKernel {
    pub fn new(wave: &IncidentWave, geometry: &CavityGeometry) -> Result<Self> {
        geometry.check_narrow(wave.wavenumber())?;
        let scale = geometry.width() * geometry.depth();
        let c0 = modal_sum_c(0, wave, geometry)?.value;
        let constant = c0 / scale + 2.0 * LN_2 / PI;
        let mut correction = Vec::new();
        let mut small_run = 0;
        for m in 1..=SERIES_CAP {
            let cm = modal_sum_c(m, wave, geometry)?.value;
            let leading = 2.0 * scale / (m as f64 * PI);
            let c = (cm + leading) / scale;
            correction.push(c);
            if c.abs() < SERIES_TOLERANCE {
                small_run += 1;
                if small_run == 3 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        Ok(Self {
            constant,
            correction,
        })
    }

    /// `Gamma2`: the constant of the interior kernel.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Coefficients of `cos(m pi X) cos(m pi Y)` for `m = 1, 2, ...`.
    pub fn correction(&self) -> &[f64] {
        &self.correction
    }

    pub fn correction_at(&self, x: f64, y: f64) -> f64 {
        self.correction
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let m = (i + 1) as f64 * PI;
                c * (m * x).cos() * (m * y).cos()
            })
            .sum()
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<KernelEvaluation> {
        check_unit("X", x)?;
        check_unit("Y", y)?;
        if x == y {
            return Err(Error::SingularPoint {
                reason: "interior kernel at X = Y",
            });
        }
        if x + y == 0.0 || x + y == 2.0 {
            return Err(Error::SingularPoint {
                reason: "interior kernel at a corner",
            });
        }
        let logs = (0.5 * PI * (x + y)).sin().abs().ln() + (0.5 * PI * (x - y)).sin().abs().ln();
        let singular = self.constant + FRAC_1_PI * logs;
        let smooth = self.correction_at(x, y);
        Ok(KernelEvaluation {
            value: Complex64::new(singular + smooth, 0.0),
            singular_part: Complex64::new(singular, 0.0),
            smooth_part: Complex64::new(smooth, 0.0),
            truncation_terms: self.correction.len(),
        })
    }
}

/// Interior aperture kernel at one pair of points.
pub fn kernel_interior(
    x: f64,
    y: f64,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> Result<KernelEvaluation> {
    InteriorKernel::new(wave, geometry)?.evaluate(x, y)
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(invalid(name, value, "must lie in [0, 1]"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(k: f64) -> IncidentWave {
        IncidentWave::new(k, 0.0).unwrap()
    }

    #[test]
    fn closed_form_modal_sums() {
        let k = PI / 4.0;
        let pmc = CavityGeometry::new(0.01, 1.0, Bottom::Pmc).unwrap();
        let pec = CavityGeometry::new(0.01, 1.0, Bottom::Pec).unwrap();
        assert!((modal_sum_c(0, &wave(k), &pmc).unwrap().value + 4.0 / PI).abs() < 1e-14);
        assert!((modal_sum_c(0, &wave(k), &pec).unwrap().value - 4.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn modal_sum_poles() {
        let pmc = CavityGeometry::new(0.01, 1.0, Bottom::Pmc).unwrap();
        let pec = CavityGeometry::new(0.01, 1.0, Bottom::Pec).unwrap();
        assert!(matches!(modal_sum_c(0, &wave(PI / 2.0), &pmc), Err(Error::Pole { .. })));
        assert!(matches!(modal_sum_c(0, &wave(PI), &pec), Err(Error::Pole { .. })));
    }

    #[test]
    fn series_and_closed_form_agree() {
        for bottom in [Bottom::Pmc, Bottom::Pec] {
            let g = CavityGeometry::new(0.01, 1.0, bottom).unwrap();
            for m in [0, 1, 3] {
                let closed = modal_sum_c(m, &wave(1.0), &g).unwrap().value;
                let series = modal_sum_series(m, &wave(1.0), &g, 200_000).unwrap().value;
                assert!((closed - series).abs() < 1e-8 * closed.abs(), "{bottom:?} m={m}: {closed} vs {series}");
            }
        }
    }

    #[test]
    fn exterior_kernel_is_symmetric() {
        let g = CavityGeometry::new(0.005, 1.0, Bottom::Pmc).unwrap();
        let w = wave(PI);
        let a = kernel_exterior(0.2, 0.9, &w, &g).unwrap();
        let b = kernel_exterior(0.9, 0.2, &w, &g).unwrap();
        assert_eq!(a.value, b.value);
        assert!((a.value - (a.singular_part + a.smooth_part)).norm() < 1e-13 * a.value.norm());
        assert!(kernel_exterior(0.4, 0.4, &w, &g).is_err());
    }

    #[test]
    fn interior_kernel_is_symmetric_and_guarded() {
        let g = CavityGeometry::new(0.005, 1.0, Bottom::Pmc).unwrap();
        let kernel = InteriorKernel::new(&wave(1.0), &g).unwrap();
        let a = kernel.evaluate(0.3, 0.7).unwrap();
        let b = kernel.evaluate(0.7, 0.3).unwrap();
        assert!((a.value - b.value).norm() < 1e-13 * a.value.norm());
        assert!(a.truncation_terms >= 1 && a.truncation_terms < SERIES_CAP);
        assert!(kernel.evaluate(0.0, 0.0).is_err());
        assert!(kernel.evaluate(1.0, 1.0).is_err());
        assert!(kernel.evaluate(0.5, 0.5).is_err());
    }

    #[test]
    fn halfspace_green_reflection() {
        let x = Point::new(0.3, 0.0);
        let y = Point::new(0.9, 0.0);
        let value = halfspace_green(x, y, 2.0).unwrap();
        let expected = Complex64::new(0.0, -0.5) * hankel1(0, 1.2).unwrap();
        assert!((value - expected).norm() < 1e-15);
        assert!(halfspace_green(Point::new(0.0, 1.0), Point::new(0.0, 1.0), 1.0).is_err());
        assert!(halfspace_green(Point::new(0.0, -1.0), y, 1.0).is_err());
    }
}
