//! Priors for the transformation and predictor coefficients.
//!
//! δ receives a first-order random-walk prior `δ ~ N(0, τ² K⁻)`. Sampling
//! happens in the reduced coordinates `δ̃ = Ω₂^{1/2} Γ₂ᵀ δ` where the prior is
//! an isotropic normal, so the rank deficiency of `K` never enters the
//! sampler. The scale `τ²` is calibrated through the total-variation distance
//! between the implied residual density and the reference.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{PtmError, Result};
use crate::normal;
use crate::stats::{linspace, quantile, trapezoid};
use crate::transform::{BasisPath, TransformConfig, TransformParams};

const NULL_TOL: f64 = 1e-9;
const LN_2PI: f64 = 1.837_877_066_409_345_5;
const MAX_TV_RETRIES: usize = 100;

/// Difference-penalty precision structure `K = DᵀD`.
#[derive(Debug, Clone)]
pub struct PenaltySpec {
    k: DMatrix<f64>,
    rank: usize,
}

impl PenaltySpec {
    /// First-order random walk on `dim` coefficients.
    pub fn random_walk(dim: usize) -> Result<Self> {
        Self::difference(dim, 1)
    }

    /// Penalty from `order`-th differences on `dim` coefficients.
    pub fn difference(dim: usize, order: usize) -> Result<Self> {
        if dim <= order {
            return Err(PtmError::InvalidGeometry(format!(
                "difference penalty of order {order} needs more than {order} coefficients, got {dim}"
            )));
        }
        let mut d = DMatrix::<f64>::identity(dim, dim);
        for _ in 0..order {
            let rows = d.nrows() - 1;
            d = DMatrix::from_fn(rows, dim, |i, j| d[(i + 1, j)] - d[(i, j)]);
        }
        Ok(Self {
            k: d.transpose() * &d,
            rank: dim - order,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            k: DMatrix::identity(dim, dim),
            rank: dim,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// `xᵀ K x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (v.transpose() * &self.k * &v)[(0, 0)]
    }
}

/// Map between reduced coordinates and the full coefficient vector.
#[derive(Debug, Clone)]
pub struct ReparamBasis {
    // dim × rank matrix Γ₂ Ω₂^{-1/2}
    map: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl ReparamBasis {
    pub fn new(penalty: &PenaltySpec) -> Result<Self> {
        let eig = SymmetricEigen::new(penalty.matrix().clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let null = order
            .iter()
            .filter(|&&i| eig.eigenvalues[i].abs() < NULL_TOL)
            .count();
        let expected = penalty.dim() - penalty.rank();
        if null != expected {
            return Err(PtmError::NullSpace {
                expected,
                found: null,
            });
        }
        let kept: Vec<usize> = order[null..].to_vec();
        let dim = penalty.dim();
        let map = DMatrix::from_fn(dim, kept.len(), |i, c| {
            let k = kept[c];
            eig.eigenvectors[(i, k)] / eig.eigenvalues[k].sqrt()
        });
        let eigenvalues = kept.iter().map(|&k| eig.eigenvalues[k]).collect();
        Ok(Self { map, eigenvalues })
    }

    /// Dimension of the reduced coordinates.
    pub fn reduced_dim(&self) -> usize {
        self.map.ncols()
    }

    pub fn full_dim(&self) -> usize {
        self.map.nrows()
    }

    /// Positive eigenvalues of the penalty, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// δ = Γ₂ Ω₂^{-1/2} δ̃.
    pub fn map(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.full_dim()];
        for (c, &x) in reduced.iter().enumerate() {
            if x != 0.0 {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += self.map[(i, c)] * x;
                }
            }
        }
        out
    }

    /// Pull a gradient with respect to δ back to the reduced coordinates.
    pub fn pullback(&self, grad_full: &[f64]) -> Vec<f64> {
        (0..self.reduced_dim())
            .map(|c| {
                (0..self.full_dim())
                    .map(|i| self.map[(i, c)] * grad_full[i])
                    .sum()
            })
            .collect()
    }
}

/// log N(δ̃ | 0, τ² I), including the normalizing constant.
pub fn log_prior_delta_tilde(reduced: &[f64], tau2: f64) -> Result<f64> {
    if !(tau2 > 0.0) {
        return Err(PtmError::NonPositiveVariance(tau2));
    }
    let n = reduced.len() as f64;
    let ss: f64 = reduced.iter().map(|x| x * x).sum();
    Ok(-0.5 * n * (LN_2PI + tau2.ln()) - 0.5 * ss / tau2)
}

/// Hyperprior on a variance parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum VariancePrior {
    Weibull { shape: f64, scale: f64 },
    InverseGamma { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl VariancePrior {
    /// Weibull with shape 0.5 and scale ψ, the default for `τ²_δ`.
    pub fn weibull_half(psi: f64) -> Self {
        VariancePrior::Weibull {
            shape: 0.5,
            scale: psi,
        }
    }

    pub fn log_density(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) {
            return Err(PtmError::NonPositiveVariance(v));
        }
        Ok(match *self {
            VariancePrior::Weibull { shape, scale } => {
                shape.ln() - scale.ln() + (shape - 1.0) * (v / scale).ln() - (v / scale).powf(shape)
            }
            VariancePrior::InverseGamma { shape, scale } => {
                shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * v.ln() - scale / v
            }
            VariancePrior::Uniform { lo, hi } => {
                if v > lo && v < hi {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        })
    }

    /// Log density of `ln v`, i.e. including the `+ ln v` Jacobian.
    pub fn log_density_log_scale(&self, ln_v: f64) -> Result<f64> {
        Ok(self.log_density(ln_v.exp())? + ln_v)
    }

    /// Derivative of [`Self::log_density_log_scale`] in `ln v`.
    pub fn d_log_density_log_scale(&self, ln_v: f64) -> f64 {
        let v = ln_v.exp();
        match *self {
            VariancePrior::Weibull { shape, scale } => shape - shape * (v / scale).powf(shape),
            VariancePrior::InverseGamma { shape, scale } => -shape + scale / v,
            VariancePrior::Uniform { .. } => 1.0,
        }
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn softplus_inv(y: f64) -> f64 {
    y + (-(-y).exp_m1()).ln()
}

#[inline]
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Smooth bijection between the real line and `(lo, hi)`, built from a
/// softplus lower clip followed by a softplus upper clip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Softclip {
    pub lo: f64,
    pub hi: f64,
}

impl Softclip {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    fn lower(&self, x: f64) -> f64 {
        softplus(x - self.lo) + self.lo
    }

    /// Unconstrained value to a variance in `(lo, hi)`.
    pub fn to_variance(&self, x: f64) -> f64 {
        let y = self.lower(x);
        y - softplus(y - self.hi)
    }

    /// Variance in `(lo, hi)` to the unconstrained value.
    pub fn from_variance(&self, v: f64) -> f64 {
        let y = v - (-(v - self.hi).exp_m1()).ln();
        softplus_inv(y - self.lo) + self.lo
    }

    /// `ln |d to_variance / dx|`.
    pub fn ln_jacobian(&self, x: f64) -> f64 {
        let y = self.lower(x);
        -softplus(self.lo - x) - softplus(y - self.hi)
    }

    pub fn d_ln_jacobian(&self, x: f64) -> f64 {
        let y = self.lower(x);
        let sl = logistic(x - self.lo);
        (1.0 - sl) - logistic(y - self.hi) * sl
    }

    /// Derivative of [`Self::to_variance`].
    pub fn d_to_variance(&self, x: f64) -> f64 {
        self.ln_jacobian(x).exp()
    }
}

/// Quadrature grid used for the total-variation calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvQuadrature {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub mass_tol: f64,
}

impl Default for TvQuadrature {
    fn default() -> Self {
        Self {
            lo: -9.0,
            hi: 9.0,
            n: 4001,
            mass_tol: 1e-4,
        }
    }
}

/// Half the L1 distance between two densities on the quadrature grid.
pub fn tv_between(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, quad: &TvQuadrature) -> f64 {
    let xs = linspace(quad.lo, quad.hi, quad.n);
    let step = (quad.hi - quad.lo) / (quad.n - 1) as f64;
    let diff: Vec<f64> = xs.iter().map(|&x| (f(x) - g(x)).abs()).collect();
    0.5 * trapezoid(&diff, step)
}

/// TV distance between the standardized density of `R = h⁻¹(Z)` and the
/// standard normal.
pub fn tv_distance(delta: &[f64], cfg: &TransformConfig) -> Result<f64> {
    tv_distance_with(delta, cfg, &TvQuadrature::default())
}

pub fn tv_distance_with(delta: &[f64], cfg: &TransformConfig, quad: &TvQuadrature) -> Result<f64> {
    let p = cfg.params(delta)?;
    let (m, s) = density_moments(&p, cfg, quad)?;
    Ok(tv_between(
        |z| s * p.log_density(cfg, m + s * z).exp(),
        normal::pdf,
        quad,
    ))
}

/// Mean and standard deviation of the residual density `f_R` by trapezoid
/// quadrature. Fails when the grid holds less than `1 - mass_tol` of the
/// mass.
pub fn density_moments(
    p: &TransformParams,
    cfg: &TransformConfig,
    quad: &TvQuadrature,
) -> Result<(f64, f64)> {
    let xs = linspace(quad.lo, quad.hi, quad.n);
    let step = (quad.hi - quad.lo) / (quad.n - 1) as f64;
    let f: Vec<f64> = xs.iter().map(|&r| p.log_density(cfg, r).exp()).collect();
    let mass = trapezoid(&f, step);
    if !((mass - 1.0).abs() <= quad.mass_tol) {
        return Err(PtmError::Quadrature(format!(
            "density mass {mass} not within {} of 1",
            quad.mass_tol
        )));
    }
    let m = trapezoid(
        &xs.iter().zip(&f).map(|(x, d)| x * d).collect::<Vec<_>>(),
        step,
    );
    let var = trapezoid(
        &xs.iter()
            .zip(&f)
            .map(|(x, d)| (x - m) * (x - m) * d)
            .collect::<Vec<_>>(),
        step,
    );
    if !(var > 0.0) {
        return Err(PtmError::ZeroVariance);
    }
    Ok((m, var.sqrt()))
}

/// Prior-predictive TV sample for a hyperprior scale.
#[derive(Debug, Clone)]
pub struct TvSample {
    pub psi: f64,
    pub values: Vec<f64>,
    /// Draws rejected by the mass check and redrawn.
    pub rejected: usize,
}

impl TvSample {
    pub fn quantile(&self, level: f64) -> f64 {
        quantile(&self.values, level)
    }
}

/// Draw `n_tau` values of `τ² ~ Weibull(0.5, ψ)` and, for each, `n_delta`
/// values of δ̃; report the TV distance of every implied residual density.
pub fn prior_predictive_tv<R: Rng>(
    psi: f64,
    n_tau: usize,
    n_delta: usize,
    cfg: &TransformConfig,
    rng: &mut R,
) -> Result<TvSample> {
    if !(psi > 0.0) {
        return Err(PtmError::NonPositiveVariance(psi));
    }
    let cfg = cfg.clone().with_path(BasisPath::Exact);
    let basis = ReparamBasis::new(&PenaltySpec::random_walk(cfg.n_params())?)?;
    let weibull = Weibull::new(psi, 0.5).map_err(|e| PtmError::Numeric(e.to_string()))?;
    let dim = basis.reduced_dim();
    let draw = |rng: &mut R, tau2: f64| -> Vec<f64> {
        let sd = tau2.sqrt();
        let z: Vec<f64> = (0..dim)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        basis.map(&z)
    };
    let mut jobs = Vec::with_capacity(n_tau * n_delta);
    for _ in 0..n_tau {
        let tau2 = weibull.sample(rng);
        for _ in 0..n_delta {
            jobs.push((tau2, draw(rng, tau2)));
        }
    }
    let mut results: Vec<Option<f64>> = jobs
        .par_iter()
        .map(|(_, delta)| match tv_distance(delta, &cfg) {
            Ok(v) => Ok(Some(v)),
            Err(PtmError::Quadrature(_)) | Err(PtmError::ZeroVariance) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut rejected = 0;
    for (slot, (tau2, _)) in results.iter_mut().zip(&jobs) {
        let mut tries = 0;
        while slot.is_none() {
            rejected += 1;
            tries += 1;
            if tries > MAX_TV_RETRIES {
                return Err(PtmError::Quadrature(format!(
                    "no admissible draw for tau2 = {tau2}"
                )));
            }
            match tv_distance(&draw(rng, *tau2), &cfg) {
                Ok(v) => *slot = Some(v),
                Err(PtmError::Quadrature(_)) | Err(PtmError::ZeroVariance) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(TvSample {
        psi,
        values: results.into_iter().map(|v| v.unwrap()).collect(),
        rejected,
    })
}
