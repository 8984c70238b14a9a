//! Resonance tables: asymptotic formula against Newton roots of `p1`.

use std::io::Write;

use cavres::asym::{fabry_perot_wavenumber, P1Model};
use cavres::cavity::{Bottom, CavityGeometry};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{config_error, Result};
use crate::output::{format_float, write_rows};
use crate::sweep::NEWTON_TOLERANCE;

/// One resonance computed both ways.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRow {
    pub n: usize,
    pub fabry_perot: f64,
    pub re_asymptotic: f64,
    pub im_asymptotic: f64,
    pub re_newton: f64,
    pub im_newton: f64,
    pub newton_iterations: usize,
    pub difference: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Agreement bound `10 eps^2 |ln eps|` between the two methods.
pub fn agreement_bound(width: f64) -> f64 {
    10.0 * width * width * width.ln().abs()
}

/// Smallest resonance index for the bottom type.
pub fn first_index(bottom: Bottom) -> usize {
    match bottom {
        Bottom::Pmc => 1,
        Bottom::Pec => 0,
    }
}

/// The first `n_max` resonances, starting at the lowest index of the bottom.
pub fn run_resonances(geometry: &CavityGeometry, n_max: usize) -> Result<Vec<ResonanceRow>> {
    run_resonances_with(&P1Model::new(geometry)?, n_max)
}

/// As [`run_resonances`] with an explicit model, so `q0` can be perturbed.
pub fn run_resonances_with(model: &P1Model, n_max: usize) -> Result<Vec<ResonanceRow>> {
    if n_max < 1 {
        return Err(config_error("n_max must be at least 1"));
    }
    let geometry = model.geometry();
    let bound = agreement_bound(geometry.width());
    let first = first_index(geometry.bottom());
    (first..first + n_max)
        .map(|n| {
            let asymptotic = model.asymptotic_resonance(n)?;
            let newton = model.newton_resonance(n, NEWTON_TOLERANCE)?;
            let difference = (asymptotic.k_complex - newton.k_complex).norm();
            Ok(ResonanceRow {
                n,
                fabry_perot: fabry_perot_wavenumber(n, geometry)?,
                re_asymptotic: asymptotic.k_complex.re,
                im_asymptotic: asymptotic.k_complex.im,
                re_newton: newton.k_complex.re,
                im_newton: newton.k_complex.im,
                newton_iterations: newton.iterations,
                difference,
                bound,
                pass: difference <= bound,
            })
        })
        .collect()
}

impl ResonanceRow {
    pub fn newton(&self) -> Complex64 {
        Complex64::new(self.re_newton, self.im_newton)
    }
}

const HEADER: [&str; 10] = [
    "n",
    "fabry_perot",
    "re_asymptotic",
    "im_asymptotic",
    "re_newton",
    "im_newton",
    "newton_iterations",
    "difference",
    "bound",
    "status",
];

/// The table as CSV.
pub fn write_resonances<W: Write>(sink: W, rows: &[ResonanceRow]) -> Result<()> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format_float(r.fabry_perot),
                format_float(r.re_asymptotic),
                format_float(r.im_asymptotic),
                format_float(r.re_newton),
                format_float(r.im_newton),
                r.newton_iterations.to_string(),
                format_float(r.difference),
                format_float(r.bound),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    write_rows(sink, &HEADER, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pec_table_starts_at_zero() {
        let g = CavityGeometry::new(0.005, 1.0, Bottom::Pec).unwrap();
        let rows = run_resonances(&g, 2).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![0, 1]);
        assert!(rows.iter().all(|r| r.im_newton < 0.0));
    }

    #[test]
    fn zero_rows_rejected() {
        let g = CavityGeometry::new(0.005, 1.0, Bottom::Pmc).unwrap();
        assert!(run_resonances(&g, 0).is_err());
    }
}
