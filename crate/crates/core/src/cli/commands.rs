//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::artifacts::{write_fit, write_json, FitDir, Manifest, DIAGNOSTICS};
use super::config::RunConfig;
use super::data::{load_model_data, Table};
use crate::error::{PtmError, Result};
use crate::mcmc::run_chains;
use crate::model::PtmModel;
use crate::posterior::{
    diagnose, summarize, DiagnosticsReport, IntervalKind, Predictive, PredictiveRow, Quantity,
};
use crate::priors::prior_predictive_tv;
use crate::simlab::{simulate, Scenario, SimRow, Surface};
use crate::transform::{Extrapolation, TransformConfig};

/// Overrides given on the command line.
#[derive(Debug, Clone, Default)]
pub struct FitOverrides {
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn fit(config: &Path, ov: &FitOverrides) -> Result<(PathBuf, DiagnosticsReport)> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = ov.seed {
        cfg.mcmc.seed = s;
    }
    if let Some(c) = ov.chains {
        cfg.mcmc.chains = c;
    }
    if let Some(o) = &ov.out {
        cfg.output = o.clone();
    }
    cfg.validate()?;
    fit_config(cfg)
}

pub fn fit_config(mut cfg: RunConfig) -> Result<(PathBuf, DiagnosticsReport)> {
    cfg.data.path = std::path::absolute(&cfg.data.path)?;
    let data = load_model_data(&cfg)?;
    let model = PtmModel::new(&cfg.model_spec(), &data)?;
    log::info!(
        "{} observations, {} parameters",
        model.n_obs(),
        model.layout().len()
    );
    let (chains, init) = run_chains(&model, &cfg.mcmc)?;
    let report = diagnose(&chains);
    let out = cfg.output.clone();
    let manifest = Manifest::new(cfg, model.layout(), init);
    write_fit(&out, &manifest, &chains)?;
    write_json(&out.join(DIAGNOSTICS), &report)?;
    Ok((out, report))
}

/// Rebuild the fitted model from its manifest and training data.
pub fn load_model(fit: &FitDir) -> Result<PtmModel> {
    let cfg = &fit.manifest.config;
    let data = load_model_data(cfg)?;
    PtmModel::new(&cfg.model_spec(), &data)
}

pub struct PredictOptions {
    pub quantity: Quantity,
    pub mass: f64,
    pub interval: IntervalKind,
}

/// Column of the request file holding evaluation points.
pub fn point_column(q: Quantity) -> &'static str {
    match q {
        Quantity::Quantile => "u",
        _ => "y",
    }
}

pub fn predict(
    fit_dir: &Path,
    request: &Path,
    opts: &PredictOptions,
) -> Result<Vec<PredictiveRow>> {
    let fit = FitDir::open(fit_dir)?;
    let model = load_model(&fit)?;
    let table = Table::read(request)?;
    let cov = table.covariates(&fit.manifest.config.covariate_names())?;
    let points = table.numeric(point_column(opts.quantity))?;
    if !(opts.mass > 0.0 && opts.mass < 1.0) {
        return Err(PtmError::config("mass", "must lie in (0, 1)"));
    }
    if opts.quantity == Quantity::Quantile {
        if let Some(&u) = points.iter().find(|&&u| !(u > 0.0 && u < 1.0)) {
            return Err(PtmError::data(
                None,
                format!("probability level {u} outside (0, 1)"),
            ));
        }
    }
    let pred = Predictive::from_chains(&model, &fit.chains, &cov)?;
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let draws = match opts.quantity {
                Quantity::Cdf => pred.cdf_draws(i, p),
                Quantity::Pdf => pred.pdf_draws(i, p),
                Quantity::Quantile => pred.quantile_draws(i, p)?,
            };
            let s = summarize(&draws, opts.mass, opts.interval);
            Ok(PredictiveRow {
                row_id: i,
                y_or_u: p,
                mean: s.mean,
                lo: s.lo,
                hi: s.hi,
            })
        })
        .collect()
}

pub fn write_rows<W: Write>(out: W, rows: &[PredictiveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["row_id", "y_or_u", "mean", "lo", "hi"])?;
    }
    w.flush()?;
    Ok(())
}

pub struct SimulateOptions {
    pub scenario: Scenario,
    pub n: usize,
    pub surface: Option<Surface>,
    pub seed: u64,
}

pub fn simulate_rows(opts: &SimulateOptions) -> Result<Vec<SimRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let law = opts.scenario.instantiate(&mut rng)?;
    simulate(&law, opts.n, opts.surface, &mut rng)
}

/// Write `data.csv` and `truth.csv` into `dir`.
pub fn write_simulation(dir: &Path, rows: &[SimRow], with_x: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut data = csv::Writer::from_path(dir.join("data.csv"))?;
    let mut truth = csv::Writer::from_path(dir.join("truth.csv"))?;
    let mut head = vec!["y"];
    let mut thead = vec!["row", "y", "mu", "sigma", "r", "true_log_pdf", "true_cdf"];
    if with_x {
        head.insert(0, "x");
        thead.insert(1, "x");
    }
    data.write_record(&head)?;
    truth.write_record(&thead)?;
    for (i, r) in rows.iter().enumerate() {
        let mut d = vec![r.y.to_string()];
        let mut t: Vec<String> = [r.y, r.mu, r.sigma, r.r, r.true_log_pdf, r.true_cdf]
            .iter()
            .map(f64::to_string)
            .collect();
        t.insert(0, i.to_string());
        if with_x {
            let x = r.x.map_or(String::new(), |x| x.to_string());
            d.insert(0, x.clone());
            t.insert(1, x);
        }
        data.write_record(&d)?;
        truth.write_record(&t)?;
    }
    data.flush()?;
    truth.flush()?;
    Ok(())
}

pub struct CalibrateOptions {
    pub psi: Vec<f64>,
    pub n_tau: usize,
    pub n_delta: usize,
    pub n_params: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
}

/// `(psi, level, tv_quantile)` rows.
pub fn calibrate_psi(opts: &CalibrateOptions) -> Result<Vec<(f64, f64, f64)>> {
    if opts.psi.is_empty() {
        return Err(PtmError::config("psi", "give at least one value"));
    }
    if opts.n_tau == 0 || opts.n_delta == 0 {
        return Err(PtmError::config("n_tau", "draw counts must be positive"));
    }
    if let Some(l) = opts.levels.iter().find(|&&l| !(0.0..=1.0).contains(&l)) {
        return Err(PtmError::config(
            "levels",
            format!("level {l} outside [0, 1]"),
        ));
    }
    let cfg = TransformConfig::new(
        -4.0,
        4.0,
        opts.n_params,
        Extrapolation::Transition { lambda: 0.8 },
    )
    .map_err(|e| PtmError::config("n_params", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for &psi in &opts.psi {
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(PtmError::config(
                "psi",
                format!("must be positive, got {psi}"),
            ));
        }
        let s = prior_predictive_tv(psi, opts.n_tau, opts.n_delta, &cfg, &mut rng)?;
        if s.rejected > 0 {
            log::warn!(
                "psi = {psi}: {} draws failed the mass check and were redrawn",
                s.rejected
            );
        }
        out.extend(opts.levels.iter().map(|&l| (psi, l, s.quantile(l))));
    }
    Ok(out)
}

pub fn diagnose_dir(fit_dir: &Path) -> Result<DiagnosticsReport> {
    let fit = FitDir::open(fit_dir)?;
    Ok(diagnose(&fit.chains))
}
