//! Command-line surface.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 data or
//! artifact error, 4 numerical failure. Thread count follows
//! `RAYON_NUM_THREADS`.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod data;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use artifacts::{FitDir, Manifest};
pub use config::RunConfig;

use crate::error::{PtmError, Result};
use crate::posterior::{IntervalKind, Quantity};
use crate::simlab::{Scenario, Surface};
use commands::{CalibrateOptions, FitOverrides, PredictOptions, SimulateOptions};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub fn exit_code(e: &PtmError) -> i32 {
    match e {
        PtmError::Config { .. } | PtmError::Json(_) | PtmError::InvalidGeometry(_) => EXIT_CONFIG,
        PtmError::Data { .. }
        | PtmError::Csv(_)
        | PtmError::Io(_)
        | PtmError::NonFinite { .. }
        | PtmError::DegenerateCovariate(_)
        | PtmError::ShapeMismatch { .. } => EXIT_DATA,
        PtmError::Domain { .. }
        | PtmError::NullSpace { .. }
        | PtmError::NonPositiveVariance(_)
        | PtmError::Quadrature(_)
        | PtmError::Convergence(_)
        | PtmError::ZeroVariance
        | PtmError::Numeric(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ptm",
    version,
    about = "Bayesian penalized transformation models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Cdf,
    Pdf,
    Quantile,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IntervalArg {
    Quantile,
    Hpd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScenarioArg {
    Gaussian,
    Ptm,
    Skewnorm,
    Mixture,
    Ushaped,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write draws, diagnostics and a manifest.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        chains: Option<usize>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the posterior predictive distribution at request rows.
    Predict {
        /// Fit directory.
        #[arg(long)]
        fit: PathBuf,
        /// CSV with covariate columns and `y` (cdf, pdf) or `u` (quantile).
        #[arg(long)]
        request: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 0.9)]
        mass: f64,
        #[arg(long, value_enum, default_value = "quantile")]
        interval: IntervalArg,
        /// Output CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a standardized scenario dataset with its true densities.
    Simulate {
        #[arg(long, value_enum, default_value = "gaussian")]
        scenario: ScenarioArg,
        /// JSON scenario object, e.g. {"kind": "ptm", "tau_delta": 0.3}; replaces --scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        /// Covariate surface s1..s4 for the location and scale.
        #[arg(long)]
        surface: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving data.csv and truth.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Prior-predictive TV quantiles for candidate hyperprior scales.
    CalibratePsi {
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        psi: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        n_tau: usize,
        #[arg(long, default_value_t = 100)]
        n_delta: usize,
        #[arg(long, default_value_t = 30)]
        n_params: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence table of a fit directory.
    Diagnose {
        #[arg(long)]
        fit: PathBuf,
        /// JSON report path; the fit directory's diagnostics.json when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(std::io::BufWriter::new(std::fs::File::create(p)?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            config,
            seed,
            chains,
            out,
        } => {
            let (dir, report) = commands::fit(&config, &FitOverrides { seed, chains, out })?;
            let max_rhat = report
                .max_rhat(|_| true)
                .map_or("NA".into(), |r| format!("{r:.3}"));
            println!(
                "wrote {} ({} chains, {} draws, max rhat {max_rhat}, {} divergences)",
                dir.display(),
                report.n_chains,
                report.n_draws,
                report.divergences
            );
        }
        Command::Predict {
            fit,
            request,
            kind,
            mass,
            interval,
            out,
        } => {
            let quantity = match kind {
                KindArg::Cdf => Quantity::Cdf,
                KindArg::Pdf => Quantity::Pdf,
                KindArg::Quantile => Quantity::Quantile,
            };
            let interval = match interval {
                IntervalArg::Quantile => IntervalKind::Quantile,
                IntervalArg::Hpd => IntervalKind::Hpd,
            };
            let rows = commands::predict(
                &fit,
                &request,
                &PredictOptions {
                    quantity,
                    mass,
                    interval,
                },
            )?;
            commands::write_rows(sink(&out)?, &rows)?;
        }
        Command::Simulate {
            scenario,
            config,
            n,
            surface,
            seed,
            out,
        } => {
            let scenario = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| PtmError::config("<file>", format!("{}: {e}", p.display())))?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    serde_path_to_error::deserialize::<_, Scenario>(de).map_err(|e| {
                        PtmError::config(e.path().to_string(), e.inner().to_string())
                    })?
                }
                None => match scenario {
                    ScenarioArg::Gaussian => Scenario::Gaussian,
                    ScenarioArg::Ptm => Scenario::ptm(),
                    ScenarioArg::Skewnorm => Scenario::skewnorm(),
                    ScenarioArg::Mixture => Scenario::Mixture,
                    ScenarioArg::Ushaped => Scenario::Ushaped,
                    ScenarioArg::Uniform => Scenario::Uniform,
                },
            };
            let surface = surface.map(|s| s.parse::<Surface>()).transpose()?;
            let rows = commands::simulate_rows(&SimulateOptions {
                scenario,
                n,
                surface,
                seed,
            })?;
            commands::write_simulation(&out, &rows, surface.is_some())?;
        }
        Command::CalibratePsi {
            psi,
            n_tau,
            n_delta,
            n_params,
            levels,
            seed,
            out,
        } => {
            let rows = commands::calibrate_psi(&CalibrateOptions {
                psi,
                n_tau,
                n_delta,
                n_params,
                levels,
                seed,
            })?;
            let mut w = csv::Writer::from_writer(sink(&out)?);
            w.write_record(["psi", "level", "tv_quantile"])?;
            for (p, l, q) in rows {
                w.write_record([p.to_string(), l.to_string(), q.to_string()])?;
            }
            w.flush()?;
        }
        Command::Diagnose { fit, out } => {
            let report = commands::diagnose_dir(&fit)?;
            println!("{report}");
            let path = out.unwrap_or_else(|| fit.join(artifacts::DIAGNOSTICS));
            artifacts::write_json(&path, &report)?;
        }
    }
    Ok(())
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
