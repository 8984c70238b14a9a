//! Wavenumber sweeps: per-sample solves on a worker pool, skipped-sample
//! accounting and refined peak locations.

use cavres::approx::{approx_enhancement, single_mode_solve};
use cavres::asym::{fabry_perot_wavenumber, P1Model, ResonanceResult};
use cavres::bie::EnhancementRecord;
use cavres::cavity::{Bottom, CavityGeometry};
use cavres::Error;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{SolverKind, SweepConfig};
use crate::error::Result;

/// Golden-section tolerance on the peak wavenumber.
pub const PEAK_TOLERANCE: f64 = 1e-6;

/// Tolerance of the Newton resonance used to annotate peaks.
pub const NEWTON_TOLERANCE: f64 = 1e-12;

const STATUS_OK: &str = "ok";

/// Enhancement factors at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub kappa: f64,
    pub q_e: f64,
    pub q_h: f64,
    pub moment: Complex64,
    /// Final collocation grid, zero for the single-mode model.
    pub grid_size: usize,
}

/// One emitted row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub kappa: f64,
    #[serde(rename = "Q_E")]
    pub q_e: f64,
    #[serde(rename = "Q_H")]
    pub q_h: f64,
    pub re_moment: f64,
    pub im_moment: f64,
    pub grid_size: usize,
    pub status: String,
}

impl SweepRecord {
    fn ok(sample: Sample) -> Self {
        Self {
            kappa: sample.kappa,
            q_e: sample.q_e,
            q_h: sample.q_h,
            re_moment: sample.moment.re,
            im_moment: sample.moment.im,
            grid_size: sample.grid_size,
            status: STATUS_OK.to_string(),
        }
    }

    fn failed(kappa: f64, error: &Error) -> Self {
        Self {
            kappa,
            q_e: f64::NAN,
            q_h: f64::NAN,
            re_moment: f64::NAN,
            im_moment: f64::NAN,
            grid_size: 0,
            status: format!("error: {error}"),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

/// A sample dropped because it sits on a trigonometric pole.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedSample {
    pub index: usize,
    pub kappa: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    #[serde(rename = "Q_E")]
    Electric,
    #[serde(rename = "Q_H")]
    Magnetic,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Electric => "Q_E",
            Quantity::Magnetic => "Q_H",
        }
    }

    fn of(self, sample: &Sample) -> f64 {
        match self {
            Quantity::Electric => sample.q_e,
            Quantity::Magnetic => sample.q_h,
        }
    }

    fn of_record(self, record: &SweepRecord) -> f64 {
        match self {
            Quantity::Electric => record.q_e,
            Quantity::Magnetic => record.q_h,
        }
    }
}

/// A refined local maximum with the nearest predicted resonance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub quantity: Quantity,
    pub kappa: f64,
    pub value: f64,
    pub n: usize,
    pub fabry_perot: f64,
    pub re_resonance: f64,
    pub im_resonance: f64,
    /// `newton` or `asymptotic`, whichever produced the resonance.
    pub method: &'static str,
    pub offset: f64,
}

/// Everything a sweep produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub skipped: Vec<SkippedSample>,
    pub peaks: Vec<Peak>,
}

/// Solves one wavenumber with the configured solver.
pub fn solve_sample(config: &SweepConfig, geometry: &CavityGeometry, kappa: f64) -> cavres::Result<Sample> {
    let wave = cavres::cavity::IncidentWave::new(kappa, config.theta)?;
    match config.solver {
        SolverKind::Bie => {
            let record = EnhancementRecord::compute(&wave, geometry, config.solver_options())?;
            Ok(Sample {
                kappa,
                q_e: record.q_e,
                q_h: record.q_h,
                moment: record.aperture_moment,
                grid_size: record.solver_grid,
            })
        }
        SolverKind::SingleMode => {
            let solution = single_mode_solve(&wave, geometry)?;
            let factors = approx_enhancement(&solution)?;
            Ok(Sample {
                kappa,
                q_e: factors.electric,
                q_h: factors.magnetic,
                moment: fundamental_moment(
                    solution.alpha0_plus,
                    solution.alpha0_minus,
                    kappa,
                    geometry,
                ),
                grid_size: 0,
            })
        }
    }
}

/// Aperture moment implied by the fundamental mode alone.
fn fundamental_moment(down: Complex64, up: Complex64, kappa: f64, geometry: &CavityGeometry) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let root = geometry.width().sqrt();
    let kd = kappa * geometry.depth();
    match geometry.bottom() {
        Bottom::Pmc => -up / root * 2.0 * i * kappa * kd.cos(),
        Bottom::Pec => -down / root * i * kappa * ((2.0 * i * kd).exp() - 1.0),
    }
}

enum Outcome {
    Record(SweepRecord),
    Skipped(SkippedSample),
}

/// Runs the sweep on a pool of `jobs` workers. Records come back in
/// wavenumber order whatever the scheduling.
pub fn run_sweep(config: &SweepConfig, jobs: usize) -> Result<SweepOutcome> {
    config.validate()?;
    let geometry = config.geometry()?;
    let kappas = config.kappas();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        kappas
            .par_iter()
            .enumerate()
            .map(|(index, &kappa)| match solve_sample(config, &geometry, kappa) {
                Ok(sample) => Outcome::Record(SweepRecord::ok(sample)),
                Err(error @ (Error::Pole { .. } | Error::SingularSystem { .. })) => {
                    Outcome::Skipped(SkippedSample {
                        index,
                        kappa,
                        reason: error.to_string(),
                    })
                }
                Err(error) => Outcome::Record(SweepRecord::failed(kappa, &error)),
            })
            .collect()
    });
    let mut records = Vec::with_capacity(outcomes.len());
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Record(record) => records.push(record),
            Outcome::Skipped(sample) => skipped.push(sample),
        }
    }
    let peaks = pool.install(|| find_peaks(config, &geometry, &records));
    Ok(SweepOutcome {
        config: config.clone(),
        records,
        skipped,
        peaks,
    })
}

/// Local maxima of both factors, refined on the solver and annotated.
pub fn find_peaks(config: &SweepConfig, geometry: &CavityGeometry, records: &[SweepRecord]) -> Vec<Peak> {
    let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let model = P1Model::new(geometry).ok();
    let mut brackets = Vec::new();
    for quantity in [Quantity::Electric, Quantity::Magnetic] {
        for window in ok.windows(3) {
            let [left, mid, right] = [window[0], window[1], window[2]];
            let value = quantity.of_record(mid);
            if value > quantity.of_record(left) && value >= quantity.of_record(right) {
                brackets.push((quantity, left.kappa, mid.kappa, value, right.kappa));
            }
        }
    }
    brackets
        .into_par_iter()
        .map(|(quantity, lo, mid, value, hi)| {
            let (kappa, value) = refine_peak(config, geometry, quantity, lo, hi).unwrap_or((mid, value));
            annotate(quantity, kappa, value, geometry, model.as_ref())
        })
        .collect()
}

/// Golden-section maximization of `quantity` on `[lo, hi]`.
pub fn refine_peak(
    config: &SweepConfig,
    geometry: &CavityGeometry,
    quantity: Quantity,
    lo: f64,
    hi: f64,
) -> cavres::Result<(f64, f64)> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let f = |k: f64| solve_sample(config, geometry, k).map(|s| quantity.of(&s));
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > PEAK_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Index of the Fabry-Perot wavenumber nearest to `kappa`.
pub fn nearest_index(kappa: f64, geometry: &CavityGeometry) -> usize {
    let scaled = kappa * geometry.depth() / std::f64::consts::PI;
    match geometry.bottom() {
        Bottom::Pmc => scaled.round().max(1.0) as usize,
        Bottom::Pec => (scaled - 0.5).round().max(0.0) as usize,
    }
}

/// Newton resonance `n`, falling back on the asymptotic formula.
pub fn predicted_resonance(model: &P1Model, n: usize) -> Option<(ResonanceResult, &'static str)> {
    match model.newton_resonance(n, NEWTON_TOLERANCE) {
        Ok(result) => Some((result, "newton")),
        Err(_) => model.asymptotic_resonance(n).ok().map(|r| (r, "asymptotic")),
    }
}

fn annotate(
    quantity: Quantity,
    kappa: f64,
    value: f64,
    geometry: &CavityGeometry,
    model: Option<&P1Model>,
) -> Peak {
    let n = nearest_index(kappa, geometry);
    let fabry_perot = fabry_perot_wavenumber(n, geometry).unwrap_or(f64::NAN);
    let (resonance, method) = match model.and_then(|m| predicted_resonance(m, n)) {
        Some((r, method)) => (r.k_complex, method),
        None => (Complex64::new(f64::NAN, f64::NAN), "none"),
    };
    Peak {
        quantity,
        kappa,
        value,
        n,
        fabry_perot,
        re_resonance: resonance.re,
        im_resonance: resonance.im,
        method,
        offset: kappa - resonance.re,
    }
}
