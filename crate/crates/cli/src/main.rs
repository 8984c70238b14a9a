use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cavres_cli::config::{OutputFormat, Settings, SweepConfig};
use cavres_cli::error::{CliError, Result};
use cavres_cli::field::{read_points, run_field, write_field};
use cavres_cli::output::{emit_sweep, open_sink};
use cavres_cli::resonances::{run_resonances, write_resonances};
use cavres_cli::sweep::run_sweep;
use cavres_cli::validate::{run_validate, Level, ValidateOptions};
use clap::{Parser, Subcommand};
use serde::Serialize;

/// Scattering by a narrow open cavity: enhancement sweeps, resonances,
/// field evaluation and self-validation.
#[derive(Debug, Parser)]
#[command(name = "cavres", version)]
struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhancement factors over equally spaced wavenumbers.
    Sweep {
        #[command(flatten)]
        settings: Settings,
    },
    /// Resonances from the asymptotic formula and from Newton's method.
    Resonances {
        #[command(flatten)]
        settings: Settings,
        /// Number of resonances, counted from the lowest.
        #[arg(long, default_value_t = 3)]
        n_max: usize,
    },
    /// Total field at the points of a coordinate file.
    Field {
        #[command(flatten)]
        settings: Settings,
        /// Wavenumber of the incident wave.
        #[arg(long)]
        kappa: f64,
        /// File of `x1 x2` pairs, one per line.
        #[arg(long)]
        points: PathBuf,
    },
    /// Runs the self-check suite; the exit status is nonzero on failure.
    Validate {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Scales q0 in the resonance model, to exercise the checks.
        #[arg(long, default_value_t = 1.0, hide = true)]
        q0_scale: f64,
    },
}

fn write_json<T: Serialize>(settings: &Settings, value: &T) -> Result<()> {
    let mut sink = open_sink(settings.out.as_deref())?;
    serde_json::to_writer_pretty(&mut sink, value)?;
    writeln!(sink).and_then(|_| sink.flush()).map_err(|source| CliError::Io {
        path: "<output>".to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config_file = cli.config.as_deref();
    match cli.command {
        Command::Sweep { settings } => {
            let settings = settings.resolve(config_file)?;
            let config = SweepConfig::from_settings(&settings)?;
            let outcome = run_sweep(&config, settings.jobs())?;
            emit_sweep(&outcome, config.output_format, config.output_path.as_deref())?;
            eprintln!(
                "{} samples: {} records, {} skipped",
                config.samples,
                outcome.records.len(),
                outcome.skipped.len()
            );
            for skipped in &outcome.skipped {
                eprintln!("skipped kappa = {:.12}: {}", skipped.kappa, skipped.reason);
            }
            for peak in &outcome.peaks {
                eprintln!(
                    "peak {} = {:.6e} at kappa = {:.9} (n = {}, {} resonance {:.9}{:+.3e}i, offset {:+.3e})",
                    peak.quantity.label(),
                    peak.value,
                    peak.kappa,
                    peak.n,
                    peak.method,
                    peak.re_resonance,
                    peak.im_resonance,
                    peak.offset
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Resonances { settings, n_max } => {
            let settings = settings.resolve(config_file)?;
            let config = SweepConfig::from_settings(&settings)?;
            let rows = run_resonances(&config.geometry()?, n_max)?;
            match settings.format() {
                OutputFormat::Csv => write_resonances(open_sink(settings.out.as_deref())?, &rows)?,
                OutputFormat::Json => write_json(&settings, &rows)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Field { settings, kappa, points } => {
            let settings = settings.resolve(config_file)?;
            let config = SweepConfig::from_settings(&settings)?;
            let rows = run_field(&config, kappa, &read_points(&points)?)?;
            match settings.format() {
                OutputFormat::Csv => write_field(open_sink(settings.out.as_deref())?, &rows)?,
                OutputFormat::Json => write_json(&settings, &rows)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { level, format, q0_scale } => {
            let report = run_validate(ValidateOptions { level, q0_scale });
            match format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Json => write_json(&Settings::default(), &report)?,
                OutputFormat::Csv => println!("{report}"),
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("cavres: {error}");
            ExitCode::from(2)
        }
    }
}
