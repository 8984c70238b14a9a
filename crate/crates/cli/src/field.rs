//! Total field at points read from a coordinate file.

use std::io::Write;
use std::path::Path;

use cavres::approx::single_mode_solve;
use cavres::bie::ApertureDensity;
use cavres::cavity::{aperture_forcing, CavityGeometry, IncidentWave, ModeCoefficients, Point};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{SolverKind, SweepConfig};
use crate::error::{CliError, Result};
use crate::output::{format_float, write_rows};

/// Where a point sits relative to the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Cavity,
    Aperture,
    Exterior,
    Unsupported,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Cavity => "cavity",
            Region::Aperture => "aperture",
            Region::Exterior => "exterior",
            Region::Unsupported => "unsupported",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldRow {
    pub x1: f64,
    pub x2: f64,
    pub re_u: f64,
    pub im_u: f64,
    pub region: Region,
    pub status: String,
}

/// Parses `x1 x2` pairs, separated by commas or whitespace. Blank lines and
/// text after `#` are ignored.
pub fn parse_points(text: &str, origin: &str) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |reason: String| CliError::Points {
            path: origin.to_string(),
            line: index + 1,
            reason,
        };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(fail(format!("expected two coordinates, found {}", fields.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| fail(format!("`{s}`: {e}")));
        let (x1, x2) = (parse(fields[0])?, parse(fields[1])?);
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(fail("coordinates must be finite".to_string()));
        }
        points.push(Point::new(x1, x2));
    }
    Ok(points)
}

pub fn read_points(path: &Path) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_points(&text, &path.display().to_string())
}

/// The solved problem at one wavenumber.
enum Solution {
    Full(ApertureDensity, ModeCoefficients),
    Single(ModeCoefficients),
}

/// Evaluates the total field at every point for a single wavenumber.
pub fn run_field(config: &SweepConfig, kappa: f64, points: &[Point]) -> Result<Vec<FieldRow>> {
    let geometry = config.geometry()?;
    let wave = config.wave(kappa)?;
    geometry.check_narrow(kappa)?;
    let solution = match config.solver {
        SolverKind::Bie => {
            let density = ApertureDensity::solve(&wave, &geometry, config.solver_options())?;
            let modes = density.mode_coefficients(config.n_modes)?;
            Solution::Full(density, modes)
        }
        SolverKind::SingleMode => Solution::Single(single_mode_solve(&wave, &geometry)?.modes()),
    };
    Ok(points
        .iter()
        .map(|&x| {
            let (region, value) = evaluate(&solution, x, &wave, &geometry);
            let (value, status) = match value {
                Ok(u) => (u, "ok".to_string()),
                Err(error) => (Complex64::new(f64::NAN, f64::NAN), format!("error: {error}")),
            };
            FieldRow {
                x1: x.x1,
                x2: x.x2,
                re_u: value.re,
                im_u: value.im,
                region,
                status,
            }
        })
        .collect())
}

fn evaluate(
    solution: &Solution,
    x: Point,
    wave: &IncidentWave,
    geometry: &CavityGeometry,
) -> (Region, cavres::Result<Complex64>) {
    let width = geometry.width();
    let on_opening = x.x2 == 0.0 && x.x1 > 0.0 && x.x1 < width;
    match solution {
        _ if x.x2 < 0.0 && geometry.contains(x) => {
            let modes = match solution {
                Solution::Full(_, modes) | Solution::Single(modes) => modes,
            };
            (Region::Cavity, modes.evaluate(x, wave, geometry))
        }
        Solution::Full(density, _) if on_opening => {
            let value = aperture_forcing(x.x1 / width, wave, geometry)
                .and_then(|forcing| Ok(forcing + density.aperture_scattered(x.x1)?));
            (Region::Aperture, value)
        }
        Solution::Single(modes) if on_opening => (Region::Aperture, modes.evaluate(x, wave, geometry)),
        Solution::Full(density, _) if x.x2 >= 0.0 => {
            let value = density
                .far_field_scattered(x)
                .map(|scattered| wave.incident(x) + wave.reflected(x) + scattered);
            (Region::Exterior, value)
        }
        _ => (
            Region::Unsupported,
            Err(cavres::Error::InvalidArgument {
                name: "x",
                value: x.x2,
                reason: "point is neither in the cavity, on its opening nor in the far exterior",
            }),
        ),
    }
}

const HEADER: [&str; 6] = ["x1", "x2", "re_u", "im_u", "region", "status"];

pub fn write_field<W: Write>(sink: W, rows: &[FieldRow]) -> Result<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format_float(r.x1),
                format_float(r.x2),
                format_float(r.re_u),
                format_float(r.im_u),
                r.region.label().to_string(),
                r.status.clone(),
            ]
        })
        .collect();
    write_rows(sink, &HEADER, &body)
}
