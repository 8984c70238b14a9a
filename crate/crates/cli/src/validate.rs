//! Self-checks of the solver stack with a pass/fail report.

use std::f64::consts::PI;
use std::fmt;

use cavres::approx::single_mode_solve;
use cavres::asym::{q0_constant, q0_on_grid, P1Model};
use cavres::bie::{EnhancementRecord, SolverOptions};
use cavres::cavity::{basis_value, Bottom, CavityGeometry, IncidentWave, ModeCoefficients};
use cavres::green::{kernel_exterior, InteriorKernel};
use cavres::quadrature::gauss_legendre;
use clap::ValueEnum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BottomKind, SolverKind, SweepConfig};
use crate::error::Result;
use crate::resonances::agreement_bound;
use crate::sweep::{refine_peak, solve_sample, Quantity, NEWTON_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

/// Knobs of the suite; `q0_scale` perturbs the resonance model on purpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub level: Level,
    pub q0_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            level: Level::Quick,
            q0_scale: 1.0,
        }
    }
}

/// A measured constant kept for regression tracking.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub constants: Vec<Constant>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            let status = if check.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {}: {}", check.name, check.detail)?;
            for constant in &check.constants {
                writeln!(f, "    {} = {:.6e}", constant.name, constant.value)?;
            }
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn constant(name: impl Into<String>, value: f64) -> Constant {
    Constant {
        name: name.into(),
        value,
    }
}

fn check(name: &'static str, outcome: Result<Check>) -> Check {
    outcome.unwrap_or_else(|error| Check {
        name,
        pass: false,
        detail: format!("error: {error}"),
        constants: Vec::new(),
    })
}

pub const KERNEL_REMAINDERS: &str = "kernel-remainders";
pub const Q0_CONVERGENCE: &str = "q0-convergence";
pub const RESONANCE_AGREEMENT: &str = "resonance-agreement";
pub const APPROX_PROXIMITY: &str = "approx-proximity";
pub const PARSEVAL: &str = "parseval-quadrature";
pub const GRID_CONVERGENCE: &str = "grid-convergence";

type Task = Box<dyn Fn() -> Result<Check> + Send + Sync>;

/// Runs the suite. Checks are independent and run in parallel.
pub fn run_validate(options: ValidateOptions) -> Report {
    let full = options.level == Level::Full;
    let mut tasks: Vec<(&'static str, Task)> = vec![
        (KERNEL_REMAINDERS, Box::new(move || kernel_remainders(full))),
        (Q0_CONVERGENCE, Box::new(q0_convergence)),
        (RESONANCE_AGREEMENT, Box::new(move || resonance_agreement(options.q0_scale))),
        (APPROX_PROXIMITY, Box::new(move || approx_proximity(full))),
        (PARSEVAL, Box::new(parseval_quadrature)),
    ];
    if full {
        tasks.push((GRID_CONVERGENCE, Box::new(grid_convergence)));
    }
    let checks = tasks.par_iter().map(|(name, task)| check(name, task())).collect();
    Report {
        level: options.level,
        checks,
    }
}

/// Largest off-diagonal smooth remainders of the exterior and interior kernels.
fn max_remainders(width: f64, bottom: Bottom) -> Result<(f64, f64)> {
    let g = CavityGeometry::new(width, 1.0, bottom)?;
    let w = IncidentWave::new(1.0, 0.0)?;
    let kernel = InteriorKernel::new(&w, &g)?;
    let (mut exterior, mut interior) = (0.0f64, 0.0f64);
    let nodes = 50;
    for i in 0..nodes {
        for j in 0..nodes {
            if i == j {
                continue;
            }
            let x = (i as f64 + 0.5) / nodes as f64;
            let y = (j as f64 + 0.5) / nodes as f64;
            exterior = exterior.max(kernel_exterior(x, y, &w, &g)?.smooth_part.norm());
            interior = interior.max(kernel.evaluate(x, y)?.smooth_part.norm());
        }
    }
    Ok((exterior, interior))
}

/// Kernel remainders shrink by a factor in `[3, 5]` when the width halves.
fn kernel_remainders(full: bool) -> Result<Check> {
    let mut pass = true;
    let mut detail = Vec::new();
    let mut constants = Vec::new();
    for (bottom, label) in [(Bottom::Pmc, "pmc"), (Bottom::Pec, "pec")] {
        let (e1, i1) = max_remainders(0.01, bottom)?;
        let (e2, i2) = max_remainders(0.005, bottom)?;
        let (exterior, interior) = (e1 / e2, i1 / i2);
        pass &= (3.0..=5.0).contains(&exterior) && (3.0..=5.0).contains(&interior);
        detail.push(format!("{label} ratios {exterior:.3}/{interior:.3}"));
        if full {
            for (width, e, i) in [(0.01f64, e1, i1), (0.005, e2, i2)] {
                let scale = width * width * width.ln().abs();
                constants.push(constant(format!("{label} exterior C at {width}"), e / scale));
                constants.push(constant(format!("{label} interior C at {width}"), i / scale));
            }
        }
    }
    Ok(Check {
        name: KERNEL_REMAINDERS,
        pass,
        detail: format!("{} (band [3, 5])", detail.join(", ")),
        constants,
    })
}

fn q0_convergence() -> Result<Check> {
    let q0 = q0_constant()?;
    let change = (q0_on_grid(256)? - q0).abs();
    Ok(Check {
        name: Q0_CONVERGENCE,
        pass: change <= 1e-10,
        detail: format!("q0 = {q0:.15}, change at grid 256 = {change:.3e} (bound 1e-10)"),
        constants: vec![constant("q0", q0)],
    })
}

/// Peak of the full solve near the `n`-th Fabry-Perot wavenumber, located
/// without any use of `q0`: a coarse scan below `n pi / d` then golden
/// section.
fn bie_peak(config: &SweepConfig, geometry: &CavityGeometry, n: usize) -> Result<f64> {
    let top = n as f64 * PI / geometry.depth();
    let (span, steps) = (0.15, 60);
    let scan: Vec<(f64, f64)> = (0..=steps)
        .into_par_iter()
        .map(|j| {
            let k = top - span + span * j as f64 / steps as f64;
            let q = solve_sample(config, geometry, k).map(|s| s.q_e).unwrap_or(f64::NEG_INFINITY);
            (k, q)
        })
        .collect();
    let best = (1..steps)
        .max_by(|&a, &b| scan[a].1.total_cmp(&scan[b].1))
        .unwrap_or(1);
    let (kappa, _) = refine_peak(config, geometry, Quantity::Electric, scan[best - 1].0, scan[best + 1].0)?;
    Ok(kappa)
}

/// Full-solve peaks against Newton roots of `p1` with `q0` scaled.
fn resonance_agreement(q0_scale: f64) -> Result<Check> {
    let config = SweepConfig::default();
    let geometry = config.geometry()?;
    let model = P1Model::with_q0(&geometry, q0_constant()? * q0_scale);
    let bound = agreement_bound(geometry.width());
    let mut pass = true;
    let mut detail = Vec::new();
    let mut constants = Vec::new();
    for n in 1..=3 {
        let root = model.newton_resonance(n, NEWTON_TOLERANCE)?.k_complex;
        let peak = bie_peak(&config, &geometry, n)?;
        let gap = (peak - root.re).abs();
        pass &= gap <= bound;
        detail.push(format!("n={n} gap {gap:.3e}"));
        constants.push(constant(format!("peak {n}"), peak));
        constants.push(constant(format!("newton {n}"), root.re));
    }
    Ok(Check {
        name: RESONANCE_AGREEMENT,
        pass,
        detail: format!("{} (bound {bound:.3e})", detail.join(", ")),
        constants,
    })
}

/// Constants of the single-mode gradient error, `||grad(u - v)|| / eps`.
fn proximity_constant(width: f64) -> Result<f64> {
    let w = IncidentWave::new(0.1, PI / 3.0)?;
    let g = CavityGeometry::new(width, 1.0, Bottom::Pmc)?;
    let full = EnhancementRecord::compute(&w, &g, SolverOptions::default())?;
    let single = single_mode_solve(&w, &g)?;
    Ok(full.modes.difference(&single.modes()).norms(&w, &g)?.gradient / width)
}

fn approx_proximity(full: bool) -> Result<Check> {
    let (c1, c2) = (proximity_constant(0.005)?, proximity_constant(0.0025)?);
    let ratio = c1.max(c2) / c1.min(c2);
    let mut constants = Vec::new();
    if full {
        constants.push(constant("C at 0.005", c1));
        constants.push(constant("C at 0.0025", c2));
    }
    Ok(Check {
        name: APPROX_PROXIMITY,
        pass: ratio <= 2.0,
        detail: format!("C = {c1:.4} and {c2:.4}, ratio {ratio:.3} (bound 2)"),
        constants,
    })
}

/// Gauss rule mapped to `[a, b]`.
fn gauss(n: usize, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    let (x, w) = gauss_legendre(n)?;
    Ok(x.iter()
        .zip(&w)
        .map(|(xi, wi)| (0.5 * (b - a) * xi + 0.5 * (a + b), 0.5 * (b - a) * wi))
        .collect())
}

/// Modal Parseval norms against tensor quadrature of the summed field.
fn parseval_quadrature() -> Result<Check> {
    let mut worst = 0.0f64;
    for bottom in [Bottom::Pmc, Bottom::Pec] {
        let g = CavityGeometry::new(0.02, 0.6, bottom)?;
        let w = IncidentWave::new(1.3, 0.5)?;
        let flux: Vec<Complex64> = (0..6)
            .map(|n| Complex64::new(1.0 / (n + 1) as f64, 0.5 - 0.1 * n as f64))
            .collect();
        let modes = ModeCoefficients::from_aperture_flux(&flux, &w, &g)?;
        let norms = modes.norms(&w, &g)?;
        let xs = gauss(64, 0.0, g.width())?;
        // evanescent layers are thin, so the depth grid is split near both ends
        let mut ys = gauss(100, -g.depth(), -g.depth() + 0.05)?;
        ys.extend(gauss(100, -g.depth() + 0.05, -0.05)?);
        ys.extend(gauss(100, -0.05, 0.0)?);
        let (mut value, mut gradient) = (0.0, 0.0);
        for &(x1, wx) in &xs {
            for &(x2, wy) in &ys {
                let (mut u, mut du1, mut du2) = (Complex64::default(), Complex64::default(), Complex64::default());
                for n in 0..=modes.truncation() {
                    let amplitude = basis_value(n, 0.0, &g)?;
                    let arg = n as f64 * PI * x1 / g.width();
                    let profile = modes.profile(n, x2, &w, &g)?;
                    u += amplitude * arg.cos() * profile;
                    du1 -= amplitude * (n as f64 * PI / g.width()) * arg.sin() * profile;
                    du2 += amplitude * arg.cos() * modes.profile_slope(n, x2, &w, &g)?;
                }
                value += wx * wy * u.norm_sqr();
                gradient += wx * wy * (du1.norm_sqr() + du2.norm_sqr());
            }
        }
        worst = worst
            .max((value.sqrt() - norms.value).abs() / norms.value)
            .max((gradient.sqrt() - norms.gradient).abs() / norms.gradient);
    }
    Ok(Check {
        name: PARSEVAL,
        pass: worst <= 1e-6,
        detail: format!("largest relative mismatch {worst:.3e} (bound 1e-6)"),
        constants: Vec::new(),
    })
}

/// Enhancement factors change by at most 1e-6 relative from grid 64 to 128.
fn grid_convergence() -> Result<Check> {
    let mut worst = 0.0f64;
    for bottom in [BottomKind::Pmc, BottomKind::Pec] {
        for kappa in [0.1, 1.0, 3.1, 4.7] {
            let base = SweepConfig {
                bottom,
                solver: SolverKind::Bie,
                ..SweepConfig::default()
            };
            let geometry = base.geometry()?;
            let wave = base.wave(kappa)?;
            let coarse = EnhancementRecord::compute(&wave, &geometry, SolverOptions { refine: false, ..SolverOptions::with_grid(64) })?;
            let fine = EnhancementRecord::compute(&wave, &geometry, SolverOptions { refine: false, ..SolverOptions::with_grid(128) })?;
            worst = worst
                .max((coarse.q_e - fine.q_e).abs() / fine.q_e)
                .max((coarse.q_h - fine.q_h).abs() / fine.q_h);
        }
    }
    Ok(Check {
        name: GRID_CONVERGENCE,
        pass: worst <= 1e-6,
        detail: format!("largest relative change {worst:.3e} (bound 1e-6)"),
        constants: vec![constant("grid change", worst)],
    })
}

