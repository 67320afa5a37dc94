//! Residual distributions and covariate surfaces for simulations.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};
use crate::normal;
use crate::priors::{density_moments, PenaltySpec, ReparamBasis, TvQuadrature};
use crate::transform::{BasisPath, Extrapolation, TransformConfig, TransformParams};

const MIX_MEANS: [f64; 2] = [-2.0, 1.0];
const MIX_SDS: [f64; 2] = [1.0, 0.5];
const MIX_WEIGHT: f64 = 0.5;
const UNIFORM_WIDTH: f64 = 0.1;
const PTM_REDRAWS: usize = 100;

fn d_tau() -> f64 {
    0.2
}
fn d_ptm_params() -> usize {
    15
}
fn d_ptm_a() -> f64 {
    -3.0
}
fn d_ptm_b() -> f64 {
    3.0
}
fn d_ptm_lambda() -> f64 {
    0.6
}
fn d_alpha() -> f64 {
    5.0
}

/// Data-generating residual distribution. Every scenario is standardized
/// to mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    Gaussian,
    /// A random transformation model drawn from the random-walk prior.
    Ptm {
        #[serde(default = "d_tau")]
        tau_delta: f64,
        #[serde(default = "d_ptm_params")]
        n_params: usize,
        #[serde(default = "d_ptm_a")]
        a: f64,
        #[serde(default = "d_ptm_b")]
        b: f64,
        #[serde(default = "d_ptm_lambda")]
        lambda: f64,
    },
    Skewnorm {
        #[serde(default = "d_alpha")]
        alpha: f64,
    },
    Mixture,
    Ushaped,
    Uniform,
}

impl Scenario {
    pub fn ptm() -> Self {
        Scenario::Ptm {
            tau_delta: d_tau(),
            n_params: d_ptm_params(),
            a: d_ptm_a(),
            b: d_ptm_b(),
            lambda: d_ptm_lambda(),
        }
    }

    pub fn skewnorm() -> Self {
        Scenario::Skewnorm { alpha: d_alpha() }
    }

    pub fn all() -> [Scenario; 6] {
        [
            Scenario::Gaussian,
            Scenario::ptm(),
            Scenario::skewnorm(),
            Scenario::Mixture,
            Scenario::Ushaped,
            Scenario::Uniform,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Gaussian => "gaussian",
            Scenario::Ptm { .. } => "ptm",
            Scenario::Skewnorm { .. } => "skewnorm",
            Scenario::Mixture => "mixture",
            Scenario::Ushaped => "ushaped",
            Scenario::Uniform => "uniform",
        }
    }

    /// Mean and variance of the raw draws before standardization; `None`
    /// for the PTM scenario, whose moments depend on the drawn δ.
    pub fn raw_moments(&self) -> Option<(f64, f64)> {
        match *self {
            Scenario::Gaussian => Some((0.0, 1.0)),
            Scenario::Ptm { .. } => None,
            Scenario::Skewnorm { alpha } => {
                let d = alpha / (1.0 + alpha * alpha).sqrt();
                let e = d * (2.0 / PI).sqrt();
                Some((e, 1.0 - e * e))
            }
            Scenario::Mixture => {
                let w = [MIX_WEIGHT, 1.0 - MIX_WEIGHT];
                let e = w[0] * MIX_MEANS[0] + w[1] * MIX_MEANS[1];
                let v = w[0] * MIX_SDS[0].powi(2)
                    + w[1] * MIX_SDS[1].powi(2)
                    + w[0] * w[1] * (MIX_MEANS[0] - MIX_MEANS[1]).powi(2);
                Some((e, v))
            }
            Scenario::Ushaped => Some((0.5, 0.125)),
            Scenario::Uniform => Some((0.5 * UNIFORM_WIDTH, UNIFORM_WIDTH * UNIFORM_WIDTH / 12.0)),
        }
    }

    /// Fix the random parts of the scenario (only δ for the PTM kind).
    pub fn instantiate<R: Rng>(&self, rng: &mut R) -> Result<ResidualLaw> {
        if let Scenario::Ptm {
            tau_delta,
            n_params,
            a,
            b,
            lambda,
        } = *self
        {
            let cfg = TransformConfig::new(a, b, n_params, Extrapolation::Transition { lambda })?
                .with_path(BasisPath::Exact);
            let basis = ReparamBasis::new(&PenaltySpec::random_walk(n_params)?)?;
            let quad = TvQuadrature {
                lo: -12.0,
                hi: 12.0,
                n: 8001,
                mass_tol: 1e-4,
            };
            for _ in 0..PTM_REDRAWS {
                let z: Vec<f64> = (0..basis.reduced_dim())
                    .map(|_| tau_delta * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let params = cfg.params(&basis.map(&z))?;
                match density_moments(&params, &cfg, &quad) {
                    Ok((m, s)) => {
                        return Ok(ResidualLaw::Ptm(Box::new(PtmLaw { cfg, params, m, s })))
                    }
                    Err(PtmError::Quadrature(_)) | Err(PtmError::ZeroVariance) => continue,
                    Err(e) => return Err(e),
                }
            }
            return Err(PtmError::Quadrature(
                "no admissible transformation drawn".into(),
            ));
        }
        let (e, v) = self.raw_moments().expect("analytic scenario");
        Ok(ResidualLaw::Analytic {
            scenario: *self,
            mean: e,
            sd: v.sqrt(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct PtmLaw {
    pub cfg: TransformConfig,
    pub params: TransformParams,
    /// Mean and standard deviation of `h⁻¹(Z)`.
    pub m: f64,
    pub s: f64,
}

/// A fully specified standardized residual distribution.
#[derive(Debug, Clone)]
pub enum ResidualLaw {
    Analytic {
        scenario: Scenario,
        mean: f64,
        sd: f64,
    },
    Ptm(Box<PtmLaw>),
}

/// Owen's T function by adaptive Simpson quadrature.
pub fn owens_t(h: f64, a: f64) -> f64 {
    let f = |x: f64| (-0.5 * h * h * (1.0 + x * x)).exp() / (1.0 + x * x);
    fn simpson(
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        flo: f64,
        fmid: f64,
        fhi: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
        let (flm, frm) = (f(lm), f(rm));
        let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1)
            + simpson(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1)
    }
    let (flo, fmid, fhi) = (f(0.0), f(0.5 * a), f(a));
    let whole = a / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson(&f, 0.0, a, flo, fmid, fhi, whole, 1e-14, 40) / (2.0 * PI)
}

fn skewnorm_cdf(z: f64, alpha: f64) -> f64 {
    (normal::cdf(z) - 2.0 * owens_t(z, alpha)).clamp(0.0, 1.0)
}

impl ResidualLaw {
    fn raw(&self, r: f64) -> (f64, f64) {
        match self {
            ResidualLaw::Analytic { mean, sd, .. } => (mean + sd * r, *sd),
            ResidualLaw::Ptm(p) => (p.m + p.s * r, p.s),
        }
    }

    pub fn ln_pdf(&self, r: f64) -> f64 {
        let (z, sd) = self.raw(r);
        let ln_raw = match self {
            ResidualLaw::Ptm(p) => p.params.log_density(&p.cfg, z),
            ResidualLaw::Analytic { scenario, .. } => match *scenario {
                Scenario::Gaussian => normal::ln_pdf(z),
                Scenario::Skewnorm { alpha } => {
                    2f64.ln() + normal::ln_pdf(z) + normal::ln_cdf(alpha * z)
                }
                Scenario::Mixture => {
                    let w = [MIX_WEIGHT, 1.0 - MIX_WEIGHT];
                    let d: f64 = (0..2)
                        .map(|k| w[k] * normal::pdf((z - MIX_MEANS[k]) / MIX_SDS[k]) / MIX_SDS[k])
                        .sum();
                    d.ln()
                }
                Scenario::Ushaped => {
                    if z > 0.0 && z < 1.0 {
                        -(PI * (z * (1.0 - z)).sqrt()).ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                }
                Scenario::Uniform => {
                    if (0.0..=UNIFORM_WIDTH).contains(&z) {
                        -UNIFORM_WIDTH.ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                }
                Scenario::Ptm { .. } => unreachable!(),
            },
        };
        ln_raw + sd.ln()
    }

    pub fn pdf(&self, r: f64) -> f64 {
        self.ln_pdf(r).exp()
    }

    pub fn cdf(&self, r: f64) -> f64 {
        let (z, _) = self.raw(r);
        match self {
            ResidualLaw::Ptm(p) => p.params.cdf(&p.cfg, z),
            ResidualLaw::Analytic { scenario, .. } => match *scenario {
                Scenario::Gaussian => normal::cdf(z),
                Scenario::Skewnorm { alpha } => skewnorm_cdf(z, alpha),
                Scenario::Mixture => {
                    let w = [MIX_WEIGHT, 1.0 - MIX_WEIGHT];
                    (0..2)
                        .map(|k| w[k] * normal::cdf((z - MIX_MEANS[k]) / MIX_SDS[k]))
                        .sum()
                }
                Scenario::Ushaped => 2.0 / PI * z.clamp(0.0, 1.0).sqrt().asin(),
                Scenario::Uniform => (z / UNIFORM_WIDTH).clamp(0.0, 1.0),
                Scenario::Ptm { .. } => unreachable!(),
            },
        }
    }

    /// Draw `n` standardized residuals.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        let (mean, sd) = match self {
            ResidualLaw::Analytic { mean, sd, .. } => (*mean, *sd),
            ResidualLaw::Ptm(p) => (p.m, p.s),
        };
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let z = match self {
                ResidualLaw::Ptm(p) => p.params.inverse(&p.cfg, rng.sample(StandardNormal))?,
                ResidualLaw::Analytic { scenario, .. } => match *scenario {
                    Scenario::Gaussian => rng.sample(StandardNormal),
                    Scenario::Skewnorm { alpha } => {
                        let d = alpha / (1.0 + alpha * alpha).sqrt();
                        let (u1, u2): (f64, f64) =
                            (rng.sample(StandardNormal), rng.sample(StandardNormal));
                        d * u1.abs() + (1.0 - d * d).sqrt() * u2
                    }
                    Scenario::Mixture => {
                        let k = usize::from(rng.random::<f64>() >= MIX_WEIGHT);
                        MIX_MEANS[k] + MIX_SDS[k] * rng.sample::<f64, _>(StandardNormal)
                    }
                    Scenario::Ushaped => Beta::new(0.5, 0.5).expect("valid shape").sample(rng),
                    Scenario::Uniform => UNIFORM_WIDTH * rng.random::<f64>(),
                    Scenario::Ptm { .. } => unreachable!(),
                },
            };
            out.push((z - mean) / sd);
        }
        Ok(out)
    }
}

/// Covariate effect surfaces on `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    S1,
    S2,
    S3,
    S4,
}

impl Surface {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Surface::S1 => x,
            Surface::S2 => x + (2.0 * x).powi(2) / 5.5,
            Surface::S3 => -x + PI * (PI * x).sin(),
            Surface::S4 => 0.5 * x + 15.0 * normal::pdf(2.0 * (x - 0.2)) - normal::pdf(x + 0.4),
        }
    }

    /// `ln σ(x) = 0.1 μ(x)`.
    pub fn log_sigma(&self, x: f64) -> f64 {
        0.1 * self.eval(x)
    }
}

impl std::str::FromStr for Surface {
    type Err = PtmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" => Ok(Surface::S1),
            "s2" => Ok(Surface::S2),
            "s3" => Ok(Surface::S3),
            "s4" => Ok(Surface::S4),
            other => Err(PtmError::config(
                "surface",
                format!("unknown surface `{other}`"),
            )),
        }
    }
}

pub fn covariate_surface(x: &[f64], which: Surface) -> Vec<f64> {
    x.iter().map(|&v| which.eval(v)).collect()
}

/// One simulated observation together with its true distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub x: Option<f64>,
    pub y: f64,
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    pub true_log_pdf: f64,
    pub true_cdf: f64,
}

/// Draw `n` responses `y = μ(x) + σ(x) r` with `x ~ U(-2, 2)` when a
/// surface is given, otherwise `y = r`.
pub fn simulate<R: Rng>(
    law: &ResidualLaw,
    n: usize,
    surface: Option<Surface>,
    rng: &mut R,
) -> Result<Vec<SimRow>> {
    let xs: Vec<Option<f64>> = (0..n)
        .map(|_| surface.map(|_| rng.random::<f64>() * 4.0 - 2.0))
        .collect();
    let rs = law.sample(n, rng)?;
    Ok(xs
        .into_iter()
        .zip(rs)
        .map(|(x, r)| {
            let (mu, ls) = match (x, surface) {
                (Some(x), Some(s)) => (s.eval(x), s.log_sigma(x)),
                _ => (0.0, 0.0),
            };
            let sigma = ls.exp();
            SimRow {
                x,
                y: mu + sigma * r,
                mu,
                sigma,
                r,
                true_log_pdf: law.ln_pdf(r) - ls,
                true_cdf: law.cdf(r),
            }
        })
        .collect())
}
