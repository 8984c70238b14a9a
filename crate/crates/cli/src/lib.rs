//! Driver for cavity field-enhancement studies: sweeps over the wavenumber,
//! resonance tables, field evaluation and a self-validation report.

pub mod config;
pub mod error;
pub mod field;
pub mod output;
pub mod resonances;
pub mod sweep;
pub mod validate;

pub use error::{CliError, Result};
