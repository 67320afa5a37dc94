//! Metropolis-within-Gibbs driver.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adapt::DualAveraging;
use super::gibbs::gibbs_tau2;
use super::init::{initialize, AscentReport};
use super::iwls::iwls_step;
use super::nuts::{NutsKernel, NutsSettings};
use crate::error::{PtmError, Result};
use crate::model::{ModelState, PtmModel, Side, VarianceLink};

const MAX_NOTES: usize = 50;

fn default_thin() -> usize {
    1
}
fn default_chains() -> usize {
    4
}
fn default_iwls_target() -> f64 {
    0.5
}
fn default_nuts_target() -> f64 {
    0.9
}
fn default_depth() -> usize {
    10
}

/// Sampler settings shared by all chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub warmup: usize,
    pub samples: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iwls_target")]
    pub iwls_target_accept: f64,
    #[serde(default = "default_nuts_target")]
    pub nuts_target_accept: f64,
    #[serde(default = "default_depth")]
    pub max_tree_depth: usize,
    /// Use static HMC with this many leapfrog steps instead of NUTS.
    #[serde(default)]
    pub fixed_leapfrog: Option<usize>,
}

impl KernelConfig {
    pub fn new(warmup: usize, samples: usize) -> Self {
        Self {
            warmup,
            samples,
            thin: 1,
            chains: 4,
            seed: 0,
            iwls_target_accept: 0.5,
            nuts_target_accept: 0.9,
            max_tree_depth: 10,
            fixed_leapfrog: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: &str| Err(PtmError::config(path, message));
        if !(self.iwls_target_accept > 0.0 && self.iwls_target_accept < 1.0) {
            return bad("mcmc.iwls_target_accept", "must lie in (0, 1)");
        }
        if !(self.nuts_target_accept > 0.0 && self.nuts_target_accept < 1.0) {
            return bad("mcmc.nuts_target_accept", "must lie in (0, 1)");
        }
        if self.warmup == 0 {
            return bad("mcmc.warmup", "must be positive");
        }
        if self.samples == 0 {
            return bad("mcmc.samples", "must be positive");
        }
        if self.thin == 0 || self.thin > self.samples {
            return bad("mcmc.thin", "must be between 1 and samples");
        }
        if self.chains == 0 {
            return bad("mcmc.chains", "must be positive");
        }
        if self.max_tree_depth == 0 {
            return bad("mcmc.max_tree_depth", "must be positive");
        }
        if self.fixed_leapfrog == Some(0) {
            return bad("mcmc.fixed_leapfrog", "must be positive");
        }
        Ok(())
    }

    pub fn n_retained(&self) -> usize {
        self.samples / self.thin
    }

    fn nuts_settings(&self) -> NutsSettings {
        NutsSettings {
            max_depth: self.max_tree_depth,
            target_accept: self.nuts_target_accept,
            fixed_leapfrog: self.fixed_leapfrog,
        }
    }
}

/// Retained draws and sampler records of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub chain: usize,
    pub names: Vec<String>,
    /// `draws[p][k]`: parameter `p` at retained iteration `k`.
    pub draws: Vec<Vec<f64>>,
    /// Mean acceptance probability per kernel after warmup.
    pub accept_rates: BTreeMap<String, f64>,
    pub step_sizes: BTreeMap<String, f64>,
    pub divergences: usize,
    pub max_depth_hits: usize,
    pub nan_accept_probs: usize,
    /// Largest deviation of the standardized-residual mean from 0 or
    /// variance from 1 over retained iterations.
    pub intercept_check: f64,
    pub notes: Vec<String>,
}

impl ChainOutput {
    pub fn n_draws(&self) -> usize {
        self.draws.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.draws[i].as_slice())
    }

    pub fn flat_at(&self, k: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[k]).collect()
    }

    pub fn state_at(&self, model: &PtmModel, k: usize) -> Result<ModelState> {
        model.unflatten(&self.flat_at(k))
    }
}

#[derive(Default)]
struct Tally {
    sum: f64,
    n: usize,
}

fn kernel_name(model: &PtmModel, side: Side, j: usize) -> String {
    let label = match side {
        Side::Location => "location",
        Side::Scale => "scale",
    };
    format!("iwls.{label}.{}", model.terms(side)[j].name)
}

fn intercept_deviation(model: &PtmModel, state: &ModelState) -> f64 {
    let (mu, ls) = model.predictors(state);
    let r: Vec<f64> = model
        .y_representative()
        .iter()
        .zip(mu.iter().zip(&ls))
        .map(|(y, (m, l))| (y - m) * (-l).exp())
        .collect();
    let m = crate::stats::mean(&r);
    let v = crate::stats::variance(&r, 0);
    m.abs().max((v - 1.0).abs())
}

/// Run one chain from `start`.
pub fn run_chain(
    model: &PtmModel,
    cfg: &KernelConfig,
    start: &ModelState,
    chain: usize,
) -> Result<ChainOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ chain as u64);
    let mut state = start.clone();
    let names = model.layout().names;
    let n_keep = cfg.n_retained();
    let mut draws = vec![Vec::with_capacity(n_keep); names.len()];
    let sides = [Side::Location, Side::Scale];
    let mut iwls_da: Vec<Vec<DualAveraging>> = sides
        .iter()
        .map(|&s| {
            model
                .terms(s)
                .iter()
                .map(|_| DualAveraging::new(cfg.iwls_target_accept, 1.0))
                .collect()
        })
        .collect();
    let mut iwls_eps: Vec<Vec<f64>> = sides
        .iter()
        .map(|&s| vec![1.0; model.terms(s).len()])
        .collect();
    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut nuts = NutsKernel::new(model.delta_block_dim(), cfg.warmup, cfg.nuts_settings());
    let (mut divergences, mut max_depth_hits, mut nan_accept_probs) = (0, 0, 0);
    let mut notes = Vec::new();
    let note = |notes: &mut Vec<String>, msg: String| {
        log::debug!("chain {chain}: {msg}");
        if notes.len() < MAX_NOTES {
            notes.push(msg);
        }
    };
    let mut intercept_check: f64 = 0.0;
    let k = model.reparam.reduced_dim();
    let total = cfg.warmup + cfg.samples;
    for it in 0..total {
        let warm = it < cfg.warmup;
        if it == cfg.warmup {
            nuts.end_warmup();
            for (s, das) in iwls_da.iter().enumerate() {
                for (j, da) in das.iter().enumerate() {
                    iwls_eps[s][j] = da.final_step();
                }
            }
        }
        let params = model.transform_params(&state)?;
        let (mut mu, mut ls) = model.predictors(&state);
        for (s, &side) in sides.iter().enumerate() {
            for j in 0..model.terms(side).len() {
                let tau2 = state.tau2(side)[j];
                let mut coef = state.terms(side)[j].clone();
                let eps = iwls_eps[s][j];
                match iwls_step(
                    model, side, j, &params, &mut coef, tau2, &mut mu, &mut ls, eps, &mut rng,
                ) {
                    Ok(out) => {
                        if out.accept_prob.is_nan() {
                            nan_accept_probs += 1;
                            note(
                                &mut notes,
                                format!(
                                    "iteration {it}: NaN acceptance probability in {}",
                                    kernel_name(model, side, j)
                                ),
                            );
                        }
                        if warm {
                            iwls_eps[s][j] = iwls_da[s][j].update(out.accept_prob);
                        } else {
                            let t = tallies.entry(kernel_name(model, side, j)).or_default();
                            t.sum += if out.accept_prob.is_nan() {
                                0.0
                            } else {
                                out.accept_prob
                            };
                            t.n += 1;
                        }
                        state.terms_mut(side)[j] = coef;
                    }
                    Err(e) => note(
                        &mut notes,
                        format!(
                            "iteration {it}: {} failed: {e}",
                            kernel_name(model, side, j)
                        ),
                    ),
                }
                if let (Some(pen), Some(_)) = (&model.terms(side)[j].penalty, tau2) {
                    let (a, b) = match model.term_prior {
                        crate::priors::VariancePrior::InverseGamma { shape, scale } => {
                            (shape, scale)
                        }
                        _ => (1.0, 0.001),
                    };
                    match gibbs_tau2(&state.terms(side)[j], pen, a, b, &mut rng) {
                        Ok(t2) if t2.is_finite() && t2 > 0.0 => state.tau2_mut(side)[j] = Some(t2),
                        Ok(t2) => note(
                            &mut notes,
                            format!("iteration {it}: rejected variance draw {t2}"),
                        ),
                        Err(e) => note(
                            &mut notes,
                            format!("iteration {it}: variance update failed: {e}"),
                        ),
                    }
                }
            }
        }
        model.update_intercepts(&mut state)?;

        let target = model.delta_target(&state, VarianceLink::Log);
        let mut q = state.delta_tilde.clone();
        q.push(state.log_tau2_delta);
        let (next, stats) = nuts.step(&target, &q, warm, &mut rng);
        state.delta_tilde.copy_from_slice(&next[..k]);
        state.log_tau2_delta = next[k];
        if !warm {
            let t = tallies.entry("nuts".into()).or_default();
            t.sum += stats.accept_stat;
            t.n += 1;
            if stats.divergent {
                divergences += 1;
            }
            if stats.max_depth_hit {
                max_depth_hits += 1;
            }
            let i = it - cfg.warmup;
            if (i + 1) % cfg.thin == 0 && i / cfg.thin < n_keep {
                intercept_check = intercept_check.max(intercept_deviation(model, &state));
                for (d, v) in draws.iter_mut().zip(model.flatten(&state)) {
                    d.push(v);
                }
            }
        }
    }
    let mut step_sizes = BTreeMap::new();
    step_sizes.insert("nuts".to_string(), nuts.eps);
    for (s, &side) in sides.iter().enumerate() {
        for j in 0..model.terms(side).len() {
            step_sizes.insert(kernel_name(model, side, j), iwls_eps[s][j]);
        }
    }
    let accept_rates = tallies
        .into_iter()
        .map(|(k, t)| (k, t.sum / t.n.max(1) as f64))
        .collect();
    log::info!("chain {chain} done: {divergences} divergences, {max_depth_hits} max-depth hits");
    Ok(ChainOutput {
        chain,
        names,
        draws,
        accept_rates,
        step_sizes,
        divergences,
        max_depth_hits,
        nan_accept_probs,
        intercept_check,
        notes,
    })
}

/// Initialize and run all chains in parallel.
pub fn run_chains(
    model: &PtmModel,
    cfg: &KernelConfig,
) -> Result<(Vec<ChainOutput>, [AscentReport; 2])> {
    cfg.validate()?;
    let (start, reports) = initialize(model)?;
    log::info!(
        "initialized after {} + {} ascent iterations",
        reports[0].iterations,
        reports[1].iterations
    );
    let chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(model, cfg, &start, c))
        .collect::<Result<Vec<_>>>()?;
    Ok((chains, reports))
}

/// Names of the parameters sampled by NUTS.
pub fn delta_block_names(model: &PtmModel) -> Vec<String> {
    model
        .layout()
        .names
        .into_iter()
        .filter(|n| n.starts_with("delta_tilde") || n == "log_tau2_delta")
        .collect()
}

/// Whether any term of the model needs the IWLS kernel.
pub fn has_predictors(model: &PtmModel) -> bool {
    !model.location.is_empty() || !model.scale.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelData, ModelSpec, PriorConfig, LOG_TAU2_DELTA_MIN};
    use crate::predictor::{Covariates, TermSpec};
    use crate::transform::TransformSpec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn linear_model(n: usize, seed: u64) -> PtmModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 1.0 + 2.0 * v + 0.7 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let spec = ModelSpec {
            transform: TransformSpec::default_spec(),
            location: vec![TermSpec::Linear { var: "x".into() }],
            scale: vec![TermSpec::Linear { var: "x".into() }],
            prior: PriorConfig::default(),
        };
        PtmModel::new(
            &spec,
            &ModelData::exact(y, Covariates::new(n).with_numeric("x", x).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::new(100, 100).validate().is_ok());
        let mut c = KernelConfig::new(100, 100);
        c.nuts_target_accept = 1.0;
        assert!(c.validate().is_err());
        assert!(KernelConfig::new(0, 100).validate().is_err());
        let mut c = KernelConfig::new(100, 100);
        c.thin = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_and_well_shaped() {
        let model = linear_model(150, 1);
        let mut cfg = KernelConfig::new(150, 100);
        cfg.chains = 2;
        cfg.thin = 3;
        cfg.seed = 42;
        let (a, _) = run_chains(&model, &cfg).unwrap();
        let (b, _) = run_chains(&model, &cfg).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].draws, a[1].draws);
        for ch in &a {
            assert_eq!(ch.n_draws(), 33);
            assert_eq!(ch.names.len(), model.layout().len());
            assert!(ch
                .column("log_tau2_delta")
                .unwrap()
                .iter()
                .all(|&v| v >= LOG_TAU2_DELTA_MIN));
            assert_eq!(
                ch.state_at(&model, 0).unwrap().delta_tilde.len(),
                model.transform.n_params() - 1
            );
            assert!(ch.intercept_check < 1e-12);
        }
    }

    #[test]
    fn kernels_hit_their_targets() {
        let model = linear_model(300, 2);
        let mut cfg = KernelConfig::new(1000, 1500);
        cfg.chains = 1;
        cfg.seed = 7;
        let (out, _) = run_chains(&model, &cfg).unwrap();
        let rates = &out[0].accept_rates;
        for (k, v) in rates {
            if k.starts_with("iwls") {
                assert!((v - 0.5).abs() < 0.1, "{k}: {v}");
            }
        }
        assert!(
            (rates["nuts"] - 0.9).abs() < 0.05,
            "nuts: {}",
            rates["nuts"]
        );
    }
}
