//! Run configuration: command-line flags layered over an optional TOML file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cavres::bie::{SolverOptions, DEFAULT_GRID, DEFAULT_MODES};
use cavres::cavity::{Bottom, CavityGeometry, IncidentWave};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{config_error, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BottomKind {
    Pmc,
    Pec,
}

impl From<BottomKind> for Bottom {
    fn from(kind: BottomKind) -> Self {
        match kind {
            BottomKind::Pmc => Bottom::Pmc,
            BottomKind::Pec => Bottom::Pec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Full boundary-integral solve.
    Bie,
    /// Fundamental-mode model.
    SingleMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Every tunable setting, each optional so that flags can override a file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Cavity width.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Cavity depth.
    #[arg(long)]
    pub depth: Option<f64>,
    /// Angle of incidence from the normal, in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, value_enum)]
    pub bottom: Option<BottomKind>,
    /// Smallest wavenumber of a sweep.
    #[arg(long)]
    pub kmin: Option<f64>,
    /// Largest wavenumber of a sweep.
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Number of equally spaced sweep samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Collocation grid of the boundary-integral solver.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of higher cavity modes kept.
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

impl Settings {
    /// Reads settings from a TOML file with the same keys as the flags.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// `self` with every unset field taken from `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            epsilon: self.epsilon.or(base.epsilon),
            depth: self.depth.or(base.depth),
            theta: self.theta.or(base.theta),
            bottom: self.bottom.or(base.bottom),
            kmin: self.kmin.or(base.kmin),
            kmax: self.kmax.or(base.kmax),
            samples: self.samples.or(base.samples),
            grid: self.grid.or(base.grid),
            modes: self.modes.or(base.modes),
            solver: self.solver.or(base.solver),
            jobs: self.jobs.or(base.jobs),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    /// Flags layered over the optional config file.
    pub fn resolve(self, file: Option<&Path>) -> Result<Settings> {
        match file {
            Some(path) => Ok(self.over(Settings::from_file(path)?)),
            None => Ok(self),
        }
    }

    pub fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
            .max(1)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Csv)
    }
}

/// A validated sweep over equally spaced wavenumbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub epsilon: f64,
    pub depth: f64,
    pub theta: f64,
    pub bottom: BottomKind,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub samples: usize,
    pub grid_size: usize,
    pub n_modes: usize,
    pub solver: SolverKind,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.005,
            depth: 1.0,
            theta: PI / 3.0,
            bottom: BottomKind::Pmc,
            kappa_min: 0.5,
            kappa_max: 10.0,
            samples: 500,
            grid_size: DEFAULT_GRID,
            n_modes: DEFAULT_MODES,
            solver: SolverKind::Bie,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let d = Self::default();
        let config = Self {
            epsilon: settings.epsilon.unwrap_or(d.epsilon),
            depth: settings.depth.unwrap_or(d.depth),
            theta: settings.theta.unwrap_or(d.theta),
            bottom: settings.bottom.unwrap_or(d.bottom),
            kappa_min: settings.kmin.unwrap_or(d.kappa_min),
            kappa_max: settings.kmax.unwrap_or(d.kappa_max),
            samples: settings.samples.unwrap_or(d.samples),
            grid_size: settings.grid.unwrap_or(d.grid_size),
            n_modes: settings.modes.unwrap_or(d.n_modes),
            solver: settings.solver.unwrap_or(d.solver),
            output_path: settings.out.clone(),
            output_format: settings.format(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_min > 0.0 && self.kappa_min.is_finite()) {
            return Err(config_error(format!("kmin = {} must be positive", self.kappa_min)));
        }
        if !(self.kappa_max > self.kappa_min && self.kappa_max.is_finite()) {
            return Err(config_error(format!(
                "kmax = {} must exceed kmin = {}",
                self.kappa_max, self.kappa_min
            )));
        }
        if self.samples < 2 {
            return Err(config_error(format!("samples = {} must be at least 2", self.samples)));
        }
        if self.grid_size < 16 {
            return Err(config_error(format!("grid = {} must be at least 16", self.grid_size)));
        }
        if self.n_modes < 1 || self.n_modes > self.grid_size / 2 {
            return Err(config_error(format!(
                "modes = {} must lie in [1, grid/2 = {}]",
                self.n_modes,
                self.grid_size / 2
            )));
        }
        self.geometry()?;
        IncidentWave::new(self.kappa_min, self.theta)?;
        self.geometry()?.check_narrow(self.kappa_max)?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<CavityGeometry> {
        Ok(CavityGeometry::new(self.epsilon, self.depth, self.bottom.into())?)
    }

    pub fn wave(&self, kappa: f64) -> Result<IncidentWave> {
        Ok(IncidentWave::new(kappa, self.theta)?)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            grid_size: self.grid_size,
            modes: self.n_modes,
            refine: true,
        }
    }

    /// Sample wavenumbers, endpoints included.
    pub fn kappas(&self) -> Vec<f64> {
        let span = self.kappa_max - self.kappa_min;
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.kappa_max
                } else {
                    self.kappa_min + span * i as f64 / last
                }
            })
            .collect()
    }
}
