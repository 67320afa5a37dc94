//! Posterior predictive CDF, density and quantiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};
use crate::mcmc::ChainOutput;
use crate::model::{ModelState, PtmModel, Side};
use crate::predictor::{Covariates, SparseDesign};
use crate::stats;
use crate::transform::TransformParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    #[default]
    Quantile,
    Hpd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Cdf,
    Pdf,
    Quantile,
}

impl std::str::FromStr for Quantity {
    type Err = PtmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cdf" => Ok(Self::Cdf),
            "pdf" => Ok(Self::Pdf),
            "quantile" => Ok(Self::Quantile),
            other => Err(PtmError::config(
                "kind",
                format!("unknown quantity `{other}`"),
            )),
        }
    }
}

/// Posterior mean and credible interval of a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn summarize(draws: &[f64], mass: f64, kind: IntervalKind) -> Summary {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = match kind {
        IntervalKind::Quantile => {
            let tail = 0.5 * (1.0 - mass);
            (
                stats::quantile_sorted(&sorted, tail),
                stats::quantile_sorted(&sorted, 1.0 - tail),
            )
        }
        IntervalKind::Hpd => stats::hpd_sorted(&sorted, mass),
    };
    Summary {
        mean: stats::mean(draws),
        lo,
        hi,
    }
}

/// Points at which the predictive distribution is evaluated: response
/// values for CDF and density, probability levels for quantiles.
#[derive(Debug, Clone)]
pub struct PredictiveRequest {
    pub covariates: Covariates,
    pub points: Vec<f64>,
    pub mass: f64,
    pub interval: IntervalKind,
}

impl PredictiveRequest {
    pub fn new(covariates: Covariates, points: Vec<f64>) -> Self {
        Self {
            covariates,
            points,
            mass: 0.9,
            interval: IntervalKind::Quantile,
        }
    }

    fn validate(&self, quantity: Quantity) -> Result<()> {
        if !(self.mass > 0.0 && self.mass < 1.0) {
            return Err(PtmError::config("mass", "must lie in (0, 1)"));
        }
        for &p in &self.points {
            let ok = match quantity {
                Quantity::Quantile => p > 0.0 && p < 1.0,
                _ => p.is_finite(),
            };
            if !ok {
                return Err(PtmError::Domain {
                    value: p,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveRow {
    pub row_id: usize,
    pub y_or_u: f64,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

struct Draw {
    params: TransformParams,
    mu: Vec<f64>,
    log_sigma: Vec<f64>,
}

/// Posterior draws of the conditional response distribution at a fixed
/// set of covariate rows.
pub struct Predictive<'a> {
    model: &'a PtmModel,
    draws: Vec<Draw>,
    n_rows: usize,
}

impl<'a> Predictive<'a> {
    pub fn from_states(
        model: &'a PtmModel,
        states: &[ModelState],
        covariates: &Covariates,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(PtmError::data(None, "no posterior draws"));
        }
        let design = |side: Side| -> Result<Vec<SparseDesign>> {
            model
                .terms(side)
                .iter()
                .map(|t| t.basis.design(covariates))
                .collect()
        };
        let (dl, ds) = (design(Side::Location)?, design(Side::Scale)?);
        let n = covariates.n_rows();
        let eta = |ds: &[SparseDesign], coefs: &[Vec<f64>], intercept: f64| {
            let mut out = vec![intercept; n];
            for (d, c) in ds.iter().zip(coefs) {
                d.add_mul(c, &mut out);
            }
            out
        };
        let draws = states
            .par_iter()
            .map(|s| {
                Ok(Draw {
                    params: model.transform_params(s)?,
                    mu: eta(&dl, &s.beta, s.beta0),
                    log_sigma: eta(&ds, &s.gamma, s.gamma0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            draws,
            n_rows: n,
        })
    }

    pub fn from_chains(
        model: &'a PtmModel,
        chains: &[ChainOutput],
        covariates: &Covariates,
    ) -> Result<Self> {
        let mut states = Vec::new();
        for ch in chains {
            for k in 0..ch.n_draws() {
                states.push(ch.state_at(model, k)?);
            }
        }
        Self::from_states(model, &states, covariates)
    }

    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn resid(d: &Draw, row: usize, y: f64) -> f64 {
        (y - d.mu[row]) * (-d.log_sigma[row]).exp()
    }

    pub fn cdf_draws(&self, row: usize, y: f64) -> Vec<f64> {
        let cfg = &self.model.transform;
        self.draws
            .iter()
            .map(|d| d.params.cdf(cfg, Self::resid(d, row, y)))
            .collect()
    }

    pub fn pdf_draws(&self, row: usize, y: f64) -> Vec<f64> {
        let cfg = &self.model.transform;
        self.draws
            .iter()
            .map(|d| (d.params.log_density(cfg, Self::resid(d, row, y)) - d.log_sigma[row]).exp())
            .collect()
    }

    pub fn quantile_draws(&self, row: usize, u: f64) -> Result<Vec<f64>> {
        let cfg = &self.model.transform;
        let z = cfg.reference().quantile(u);
        self.draws
            .iter()
            .map(|d| Ok(d.log_sigma[row].exp() * d.params.inverse(cfg, z)? + d.mu[row]))
            .collect()
    }

    /// Quantile of a single posterior draw.
    pub fn quantile_at(&self, draw: usize, row: usize, u: f64) -> Result<f64> {
        let cfg = &self.model.transform;
        let d = &self.draws[draw];
        Ok(
            d.log_sigma[row].exp() * d.params.inverse(cfg, cfg.reference().quantile(u))?
                + d.mu[row],
        )
    }

    /// Summaries for every (row, point) pair, rows outermost.
    pub fn summarize(
        &self,
        quantity: Quantity,
        request: &PredictiveRequest,
    ) -> Result<Vec<PredictiveRow>> {
        request.validate(quantity)?;
        if request.covariates.n_rows() != self.n_rows {
            return Err(PtmError::ShapeMismatch {
                expected: self.n_rows,
                got: request.covariates.n_rows(),
            });
        }
        let rows: Vec<Vec<PredictiveRow>> = (0..self.n_rows)
            .into_par_iter()
            .map(|row| {
                request
                    .points
                    .iter()
                    .map(|&p| {
                        let draws = match quantity {
                            Quantity::Cdf => self.cdf_draws(row, p),
                            Quantity::Pdf => self.pdf_draws(row, p),
                            Quantity::Quantile => self.quantile_draws(row, p)?,
                        };
                        let s = summarize(&draws, request.mass, request.interval);
                        Ok(PredictiveRow {
                            row_id: row,
                            y_or_u: p,
                            mean: s.mean,
                            lo: s.lo,
                            hi: s.hi,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().flatten().collect())
    }

    /// Log of the posterior-mean density at `y`.
    pub fn mean_log_pdf(&self, row: usize, y: f64) -> f64 {
        stats::mean(&self.pdf_draws(row, y)).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelData, ModelSpec, PriorConfig};
    use crate::normal;
    use crate::predictor::TermSpec;
    use crate::transform::TransformSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn model() -> PtmModel {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| v + rng.sample::<f64, _>(StandardNormal))
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

    fn random_states(m: &PtmModel, n: usize, seed: u64, scale: f64) -> Vec<ModelState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut s = m.initial_state().unwrap();
                s.beta[0][0] = rng.sample::<f64, _>(StandardNormal);
                s.gamma[0][0] = 0.3 * rng.sample::<f64, _>(StandardNormal);
                s.delta_tilde
                    .iter_mut()
                    .for_each(|d| *d = scale * rng.sample::<f64, _>(StandardNormal));
                s
            })
            .collect()
    }

    #[test]
    fn identity_draws_are_gaussian() {
        let m = model();
        let states = random_states(&m, 5, 1, 0.0);
        let cov = Covariates::new(2)
            .with_numeric("x", vec![0.2, 0.9])
            .unwrap();
        let p = Predictive::from_states(&m, &states, &cov).unwrap();
        for (k, s) in states.iter().enumerate() {
            for (row, x) in [0.2, 0.9].into_iter().enumerate() {
                let mu = s.beta0 + s.beta[0][0] * x;
                let sigma = (s.gamma0 + s.gamma[0][0] * x).exp();
                for y in [-2.0, 0.3, 1.7] {
                    let want = normal::cdf((y - mu) / sigma);
                    assert!((p.cdf_draws(row, y)[k] - want).abs() < 1e-12);
                }
                assert!((p.quantile_draws(row, 0.5).unwrap()[k] - mu).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn anchored_at_the_interval_ends() {
        let m = model();
        let states = random_states(&m, 20, 2, 1.0);
        let cov = Covariates::new(1).with_numeric("x", vec![0.5]).unwrap();
        let p = Predictive::from_states(&m, &states, &cov).unwrap();
        for (k, d) in p.draws.iter().enumerate() {
            let (mu, sigma) = (d.mu[0], d.log_sigma[0].exp());
            for a in [m.transform.a(), m.transform.b()] {
                let f = p.cdf_draws(0, mu + sigma * a)[k];
                assert!((f - normal::cdf(a)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn monotone_and_roundtrip() {
        let m = model();
        let states = random_states(&m, 30, 4, 1.5);
        let cov = Covariates::new(1).with_numeric("x", vec![0.1]).unwrap();
        let p = Predictive::from_states(&m, &states, &cov).unwrap();
        let grid = stats::linspace(-40.0, 40.0, 801);
        let curves: Vec<Vec<f64>> = grid.iter().map(|&y| p.cdf_draws(0, y)).collect();
        for k in 0..p.n_draws() {
            for w in curves.windows(2) {
                assert!(w[1][k] >= w[0][k]);
            }
            assert!(curves[0][k] < 1e-6 && curves[800][k] > 1.0 - 1e-6);
        }
        for u in [0.005, 0.1, 0.5, 0.9, 0.995] {
            let q = p.quantile_draws(0, u).unwrap();
            for (k, &qk) in q.iter().enumerate() {
                assert!(qk.is_finite());
                assert!((p.cdf_draws(0, qk)[k] - u).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn summaries_and_validation() {
        let m = model();
        let states = random_states(&m, 50, 5, 0.5);
        let cov = Covariates::new(2)
            .with_numeric("x", vec![0.0, 1.0])
            .unwrap();
        let p = Predictive::from_states(&m, &states, &cov).unwrap();
        let mut req = PredictiveRequest::new(cov.clone(), vec![0.25, 0.75]);
        let rows = p.summarize(Quantity::Quantile, &req).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.lo <= r.mean && r.mean <= r.hi));
        req.interval = IntervalKind::Hpd;
        assert!(p
            .summarize(Quantity::Pdf, &req)
            .unwrap()
            .iter()
            .all(|r| r.lo >= 0.0));
        req.points = vec![1.0];
        assert!(p.summarize(Quantity::Quantile, &req).is_err());
        assert!("survival".parse::<Quantity>().is_err());
    }

    #[test]
    fn interval_coverage_is_calibrated() {
        // draws of F at y from a known posterior: the 90% interval should
        // cover the truth at about 90% of points
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n_pts = 2000;
        let mut hits = 0;
        for _ in 0..n_pts {
            let truth: f64 = rng.sample(StandardNormal);
            let center = truth + rng.sample::<f64, _>(StandardNormal);
            let draws: Vec<f64> = (0..2000)
                .map(|_| center + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let s = summarize(&draws, 0.9, IntervalKind::Quantile);
            if s.lo <= truth && truth <= s.hi {
                hits += 1;
            }
        }
        let cov = hits as f64 / n_pts as f64;
        let se = (0.9f64 * 0.1 / n_pts as f64).sqrt();
        assert!((cov - 0.9).abs() < 3.0 * se, "{cov}");
    }
}
