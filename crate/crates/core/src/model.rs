//! Likelihood and posterior of the location-scale transformation model.
//!
//! For a point observation the log-likelihood contribution is
//! `ln f_Z(h(r)) + ln h'(r) - ln σ` with `r = (y - μ)/σ`; censored
//! observations contribute the log of the matching CDF difference.

use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};
use crate::mcmc::nuts::LogDensity;
use crate::predictor::{build_terms, update_intercepts, Covariates, Term, TermSpec};
use crate::priors::{log_prior_delta_tilde, PenaltySpec, ReparamBasis, Softclip, VariancePrior};
use crate::transform::{DeltaAdjoint, TransformConfig, TransformParams, TransformSpec};

/// Lower clip on `ln τ²_δ`.
pub const LOG_TAU2_DELTA_MIN: f64 = -11.0;

/// Observed response, possibly censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Response {
    Exact {
        y: f64,
    },
    /// Only `y <= upper` is known.
    Left {
        upper: f64,
    },
    /// Only `y > lower` is known.
    Right {
        lower: f64,
    },
    Interval {
        lower: f64,
        upper: f64,
    },
}

impl Response {
    /// Single value used for intercept identification.
    pub fn representative(&self) -> f64 {
        match *self {
            Response::Exact { y } => y,
            Response::Left { upper } => upper,
            Response::Right { lower } => lower,
            Response::Interval { lower, upper } => 0.5 * (lower + upper),
        }
    }

    fn validate(&self, row: usize) -> Result<()> {
        let ok = match *self {
            Response::Exact { y } => y.is_finite(),
            Response::Left { upper } => upper.is_finite(),
            Response::Right { lower } => lower.is_finite(),
            Response::Interval { lower, upper } => {
                lower.is_finite() && upper.is_finite() && lower < upper
            }
        };
        if ok {
            Ok(())
        } else {
            Err(PtmError::NonFinite {
                row,
                what: format!("response {self:?}"),
            })
        }
    }
}

/// Response standardized by the current location and scale.
#[derive(Debug, Clone, Copy)]
pub enum Resid {
    Exact(f64),
    Left(f64),
    Right(f64),
    Interval(f64, f64),
}

/// Prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    /// Scale of the Weibull(0.5, ψ) prior on `τ²_δ`.
    #[serde(default = "default_psi")]
    pub psi: f64,
    /// Inverse-gamma shape for predictor variances.
    #[serde(default = "default_ig_shape")]
    pub ig_shape: f64,
    /// Inverse-gamma scale for predictor variances.
    #[serde(default = "default_ig_scale")]
    pub ig_scale: f64,
}

fn default_psi() -> f64 {
    0.5
}
fn default_ig_shape() -> f64 {
    1.0
}
fn default_ig_scale() -> f64 {
    0.001
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            psi: default_psi(),
            ig_shape: default_ig_shape(),
            ig_scale: default_ig_scale(),
        }
    }
}

/// Model structure before it meets data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub transform: TransformSpec,
    #[serde(default)]
    pub location: Vec<TermSpec>,
    #[serde(default)]
    pub scale: Vec<TermSpec>,
    #[serde(default)]
    pub prior: PriorConfig,
}

/// Training data.
#[derive(Debug, Clone)]
pub struct ModelData {
    pub response: Vec<Response>,
    pub covariates: Covariates,
}

impl ModelData {
    pub fn exact(y: Vec<f64>, covariates: Covariates) -> Self {
        Self {
            response: y.into_iter().map(|y| Response::Exact { y }).collect(),
            covariates,
        }
    }

    pub fn unconditional(y: Vec<f64>) -> Self {
        let n = y.len();
        Self::exact(y, Covariates::new(n))
    }
}

/// Which predictor a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Location,
    Scale,
}

#[derive(Debug, Clone)]
pub struct PtmModel {
    pub transform: TransformConfig,
    pub location: Vec<Term>,
    pub scale: Vec<Term>,
    pub response: Vec<Response>,
    pub reparam: ReparamBasis,
    pub delta_prior: VariancePrior,
    pub term_prior: VariancePrior,
    pub spec: ModelSpec,
    y_repr: Vec<f64>,
}

/// Full parameter state of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub tau2_location: Vec<Option<f64>>,
    pub tau2_scale: Vec<Option<f64>>,
    pub delta_tilde: Vec<f64>,
    pub log_tau2_delta: f64,
    pub beta0: f64,
    pub gamma0: f64,
}

impl ModelState {
    pub fn terms(&self, side: Side) -> &[Vec<f64>] {
        match side {
            Side::Location => &self.beta,
            Side::Scale => &self.gamma,
        }
    }

    pub fn terms_mut(&mut self, side: Side) -> &mut Vec<Vec<f64>> {
        match side {
            Side::Location => &mut self.beta,
            Side::Scale => &mut self.gamma,
        }
    }

    pub fn tau2(&self, side: Side) -> &[Option<f64>] {
        match side {
            Side::Location => &self.tau2_location,
            Side::Scale => &self.tau2_scale,
        }
    }

    pub fn tau2_mut(&mut self, side: Side) -> &mut Vec<Option<f64>> {
        match side {
            Side::Location => &mut self.tau2_location,
            Side::Scale => &mut self.tau2_scale,
        }
    }
}

/// Per-observation gradients of the log-likelihood with respect to the
/// location and log-scale predictors.
#[derive(Debug, Clone)]
pub struct EtaGradients {
    pub log_lik: f64,
    pub d_mu: Vec<f64>,
    pub d_log_sigma: Vec<f64>,
}

/// Names and offsets of the flattened parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub names: Vec<String>,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl ParamLayout {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }
}

impl PtmModel {
    pub fn new(spec: &ModelSpec, data: &ModelData) -> Result<Self> {
        let n = data.response.len();
        if n == 0 {
            return Err(PtmError::data(None, "no observations"));
        }
        if data.covariates.n_rows() != n {
            return Err(PtmError::ShapeMismatch {
                expected: n,
                got: data.covariates.n_rows(),
            });
        }
        for (i, r) in data.response.iter().enumerate() {
            r.validate(i)?;
        }
        let transform = TransformConfig::from_spec(&spec.transform)?;
        let reparam = ReparamBasis::new(&PenaltySpec::random_walk(transform.n_params())?)?;
        let location = build_terms(&spec.location, &data.covariates)?;
        let scale = build_terms(&spec.scale, &data.covariates)?;
        let p = spec.prior;
        if !(p.psi > 0.0 && p.ig_shape > 0.0 && p.ig_scale > 0.0) {
            return Err(PtmError::config(
                "prior",
                "hyperparameters must be positive",
            ));
        }
        Ok(Self {
            transform,
            location,
            scale,
            y_repr: data.response.iter().map(|r| r.representative()).collect(),
            response: data.response.clone(),
            reparam,
            delta_prior: VariancePrior::weibull_half(p.psi),
            term_prior: VariancePrior::InverseGamma {
                shape: p.ig_shape,
                scale: p.ig_scale,
            },
            spec: spec.clone(),
        })
    }

    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    pub fn terms(&self, side: Side) -> &[Term] {
        match side {
            Side::Location => &self.location,
            Side::Scale => &self.scale,
        }
    }

    /// Dimension of the NUTS block: reduced δ̃ plus the log variance.
    pub fn delta_block_dim(&self) -> usize {
        self.reparam.reduced_dim() + 1
    }

    /// Starting state: zero coefficients, term variances 10, `τ²_δ = 1`,
    /// intercepts identified from the data.
    pub fn initial_state(&self) -> Result<ModelState> {
        let zeros = |ts: &[Term]| ts.iter().map(|t| vec![0.0; t.n_coef()]).collect::<Vec<_>>();
        let taus = |ts: &[Term]| {
            ts.iter()
                .map(|t| t.is_penalized().then_some(10.0))
                .collect::<Vec<_>>()
        };
        let mut s = ModelState {
            beta: zeros(&self.location),
            gamma: zeros(&self.scale),
            tau2_location: taus(&self.location),
            tau2_scale: taus(&self.scale),
            delta_tilde: vec![0.0; self.reparam.reduced_dim()],
            log_tau2_delta: 0.0,
            beta0: 0.0,
            gamma0: 0.0,
        };
        self.update_intercepts(&mut s)?;
        Ok(s)
    }

    /// Predictor without intercept.
    pub fn eta_without_intercept(&self, side: Side, state: &ModelState) -> Vec<f64> {
        let mut out = vec![0.0; self.n_obs()];
        for (t, c) in self.terms(side).iter().zip(state.terms(side)) {
            t.design.add_mul(c, &mut out);
        }
        out
    }

    /// `(μ, ln σ)` for every observation.
    pub fn predictors(&self, state: &ModelState) -> (Vec<f64>, Vec<f64>) {
        let mut mu = self.eta_without_intercept(Side::Location, state);
        let mut ls = self.eta_without_intercept(Side::Scale, state);
        mu.iter_mut().for_each(|m| *m += state.beta0);
        ls.iter_mut().for_each(|l| *l += state.gamma0);
        (mu, ls)
    }

    pub fn update_intercepts(&self, state: &mut ModelState) -> Result<()> {
        let mu = self.eta_without_intercept(Side::Location, state);
        let ls = self.eta_without_intercept(Side::Scale, state);
        let (b0, g0) = update_intercepts(&self.y_repr, &mu, &ls)?;
        state.beta0 = b0;
        state.gamma0 = g0;
        Ok(())
    }

    /// Representative responses used for the intercepts.
    pub fn y_representative(&self) -> &[f64] {
        &self.y_repr
    }

    pub fn delta(&self, state: &ModelState) -> Vec<f64> {
        self.reparam.map(&state.delta_tilde)
    }

    pub fn transform_params(&self, state: &ModelState) -> Result<TransformParams> {
        self.transform.params(&self.delta(state))
    }

    pub fn residuals(&self, mu: &[f64], log_sigma: &[f64]) -> Vec<Resid> {
        self.response
            .iter()
            .zip(mu.iter().zip(log_sigma))
            .map(|(r, (&m, &ls))| {
                let inv = (-ls).exp();
                match *r {
                    Response::Exact { y } => Resid::Exact((y - m) * inv),
                    Response::Left { upper } => Resid::Left((upper - m) * inv),
                    Response::Right { lower } => Resid::Right((lower - m) * inv),
                    Response::Interval { lower, upper } => {
                        Resid::Interval((lower - m) * inv, (upper - m) * inv)
                    }
                }
            })
            .collect()
    }

    /// Log-likelihood of the full data.
    pub fn log_likelihood(&self, state: &ModelState) -> Result<f64> {
        let params = self.transform_params(state)?;
        let (mu, ls) = self.predictors(state);
        let ll = self.log_lik_resid(&params, &self.residuals(&mu, &ls), &ls);
        if ll.is_nan() {
            return Err(PtmError::Numeric("log-likelihood is NaN".into()));
        }
        Ok(ll)
    }

    fn log_lik_resid(&self, params: &TransformParams, resid: &[Resid], log_sigma: &[f64]) -> f64 {
        let cfg = &self.transform;
        let rf = cfg.reference();
        let mut ll = 0.0;
        for (res, &ls) in resid.iter().zip(log_sigma) {
            ll += match *res {
                Resid::Exact(r) => {
                    let ev = params.eval(cfg, r);
                    rf.ln_pdf(ev.h) + ev.ln_dh - ls
                }
                Resid::Left(r) => rf.ln_cdf(params.forward(cfg, r)),
                Resid::Right(r) => rf.ln_sf(params.forward(cfg, r)),
                Resid::Interval(lo, hi) => {
                    rf.ln_interval(params.forward(cfg, lo), params.forward(cfg, hi))
                }
            };
        }
        ll
    }

    /// Log-likelihood together with its gradient in the predictors.
    pub fn eta_gradients(
        &self,
        params: &TransformParams,
        mu: &[f64],
        log_sigma: &[f64],
    ) -> EtaGradients {
        let cfg = &self.transform;
        let rf = cfg.reference();
        let n = self.n_obs();
        let mut out = EtaGradients {
            log_lik: 0.0,
            d_mu: vec![0.0; n],
            d_log_sigma: vec![0.0; n],
        };
        let resid = self.residuals(mu, log_sigma);
        for (i, res) in resid.iter().enumerate() {
            let inv_sigma = (-log_sigma[i]).exp();
            // Σ over evaluation points of (dℓ/dr, r)
            let (ll, pts): (f64, [(f64, f64); 2]) = match *res {
                Resid::Exact(r) => {
                    let ev = params.eval(cfg, r);
                    let dr = rf.d_ln_pdf(ev.h) * ev.dh + ev.d_ln_dh;
                    out.d_log_sigma[i] -= 1.0;
                    (
                        rf.ln_pdf(ev.h) + ev.ln_dh - log_sigma[i],
                        [(dr, r), (0.0, 0.0)],
                    )
                }
                Resid::Left(r) => {
                    let ev = params.eval(cfg, r);
                    (
                        rf.ln_cdf(ev.h),
                        [(rf.d_ln_cdf(ev.h) * ev.dh, r), (0.0, 0.0)],
                    )
                }
                Resid::Right(r) => {
                    let ev = params.eval(cfg, r);
                    (rf.ln_sf(ev.h), [(rf.d_ln_sf(ev.h) * ev.dh, r), (0.0, 0.0)])
                }
                Resid::Interval(lo, hi) => {
                    let (el, eh) = (params.eval(cfg, lo), params.eval(cfg, hi));
                    let ll = rf.ln_interval(el.h, eh.h);
                    let gl = -(rf.ln_pdf(el.h) - ll).exp() * el.dh;
                    let gh = (rf.ln_pdf(eh.h) - ll).exp() * eh.dh;
                    (ll, [(gl, lo), (gh, hi)])
                }
            };
            out.log_lik += ll;
            for (dr, r) in pts {
                out.d_mu[i] -= dr * inv_sigma;
                out.d_log_sigma[i] -= dr * r;
            }
        }
        out
    }

    /// Log prior of one term block given its variance.
    pub fn term_log_prior(&self, term: &Term, coef: &[f64], tau2: Option<f64>) -> f64 {
        match (&term.penalty, tau2) {
            (Some(k), Some(t2)) => {
                -0.5 * k.rank() as f64 * (std::f64::consts::TAU * t2).ln()
                    - 0.5 * k.quad_form(coef) / t2
            }
            _ => 0.0,
        }
    }

    /// Unnormalized log posterior with `τ²_δ` on the log scale and predictor
    /// variances on their natural scale.
    pub fn log_posterior(&self, state: &ModelState) -> Result<f64> {
        let mut lp = self.log_likelihood(state)?;
        for side in [Side::Location, Side::Scale] {
            for ((t, c), tau2) in self
                .terms(side)
                .iter()
                .zip(state.terms(side))
                .zip(state.tau2(side))
            {
                lp += self.term_log_prior(t, c, *tau2);
                if let Some(t2) = tau2 {
                    lp += self.term_prior.log_density(*t2)?;
                }
            }
        }
        if state.log_tau2_delta < LOG_TAU2_DELTA_MIN {
            return Ok(f64::NEG_INFINITY);
        }
        lp += log_prior_delta_tilde(&state.delta_tilde, state.log_tau2_delta.exp())?;
        lp += self
            .delta_prior
            .log_density_log_scale(state.log_tau2_delta)?;
        Ok(lp)
    }

    /// Target for the joint update of `(δ̃, ln τ²_δ)` with location and
    /// scale held fixed.
    pub fn delta_target(&self, state: &ModelState, link: VarianceLink) -> DeltaTarget<'_> {
        let (mu, ls) = self.predictors(state);
        let resid = self.residuals(&mu, &ls);
        let offset = resid
            .iter()
            .zip(&ls)
            .filter(|(r, _)| matches!(r, Resid::Exact(_)))
            .map(|(_, l)| -l)
            .sum();
        DeltaTarget {
            model: self,
            resid,
            offset,
            link,
        }
    }

    pub fn layout(&self) -> ParamLayout {
        let mut names = Vec::new();
        let mut blocks = Vec::new();
        let mut push = |block: String, items: Vec<String>| {
            blocks.push(Block {
                name: block,
                start: names.len(),
                len: items.len(),
            });
            names.extend(items);
        };
        for (side, label) in [(Side::Location, "location"), (Side::Scale, "scale")] {
            for t in self.terms(side) {
                let b = format!("{label}.{}", t.name);
                push(
                    b.clone(),
                    (0..t.n_coef()).map(|k| format!("{b}[{k}]")).collect(),
                );
                if t.is_penalized() {
                    push(format!("{b}.tau2"), vec![format!("{b}.tau2")]);
                }
            }
        }
        push(
            "delta_tilde".into(),
            (0..self.reparam.reduced_dim())
                .map(|k| format!("delta_tilde[{k}]"))
                .collect(),
        );
        push("log_tau2_delta".into(), vec!["log_tau2_delta".into()]);
        push("intercepts".into(), vec!["beta0".into(), "gamma0".into()]);
        ParamLayout { names, blocks }
    }

    pub fn flatten(&self, state: &ModelState) -> Vec<f64> {
        let mut v = Vec::new();
        for side in [Side::Location, Side::Scale] {
            for (c, t2) in state.terms(side).iter().zip(state.tau2(side)) {
                v.extend_from_slice(c);
                if let Some(t) = t2 {
                    v.push(*t);
                }
            }
        }
        v.extend_from_slice(&state.delta_tilde);
        v.push(state.log_tau2_delta);
        v.push(state.beta0);
        v.push(state.gamma0);
        v
    }

    pub fn unflatten(&self, flat: &[f64]) -> Result<ModelState> {
        let layout_len = self.layout().len();
        if flat.len() != layout_len {
            return Err(PtmError::ShapeMismatch {
                expected: layout_len,
                got: flat.len(),
            });
        }
        let mut pos = 0;
        let mut take = |n: usize| {
            let s = flat[pos..pos + n].to_vec();
            pos += n;
            s
        };
        let mut coefs = [Vec::new(), Vec::new()];
        let mut taus = [Vec::new(), Vec::new()];
        for (k, side) in [Side::Location, Side::Scale].into_iter().enumerate() {
            for t in self.terms(side) {
                coefs[k].push(take(t.n_coef()));
                taus[k].push(if t.is_penalized() {
                    Some(take(1)[0])
                } else {
                    None
                });
            }
        }
        let delta_tilde = take(self.reparam.reduced_dim());
        let rest = take(3);
        let [beta, gamma] = coefs;
        let [tau2_location, tau2_scale] = taus;
        Ok(ModelState {
            beta,
            gamma,
            tau2_location,
            tau2_scale,
            delta_tilde,
            log_tau2_delta: rest[0],
            beta0: rest[1],
            gamma0: rest[2],
        })
    }
}

/// Parameterization of `τ²_δ` inside the NUTS block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceLink {
    /// `θ = ln τ²` with the model's hyperprior and the lower clip.
    Log,
    /// Softclip link with a uniform prior on `(lo, hi)`, used during
    /// initialization.
    Softclip(Softclip),
}

/// Log density of `(δ̃, θ_τ)` with location and scale held fixed.
pub struct DeltaTarget<'a> {
    model: &'a PtmModel,
    resid: Vec<Resid>,
    // Σ -ln σ_i over point observations
    offset: f64,
    link: VarianceLink,
}

impl DeltaTarget<'_> {
    /// Variance `τ²_δ` and `d ln τ² / dθ` for the link value `θ`.
    fn variance(&self, theta: f64) -> (f64, f64) {
        match self.link {
            VarianceLink::Log => (theta.exp(), 1.0),
            VarianceLink::Softclip(sc) => {
                let v = sc.to_variance(theta);
                (v, sc.d_to_variance(theta) / v)
            }
        }
    }

    fn log_hyper(&self, theta: f64) -> Result<(f64, f64)> {
        match self.link {
            VarianceLink::Log => Ok((
                self.model.delta_prior.log_density_log_scale(theta)?,
                self.model.delta_prior.d_log_density_log_scale(theta),
            )),
            VarianceLink::Softclip(sc) => Ok((
                -(sc.hi - sc.lo).ln() + sc.ln_jacobian(theta),
                sc.d_ln_jacobian(theta),
            )),
        }
    }

    /// Log density and gradient; `Err` for non-finite intermediate values.
    pub fn evaluate(&self, q: &[f64], grad: &mut [f64]) -> Result<f64> {
        let m = self.model;
        let k = m.reparam.reduced_dim();
        let theta = q[k];
        if self.link == VarianceLink::Log && theta < LOG_TAU2_DELTA_MIN {
            return Ok(f64::NEG_INFINITY);
        }
        let reduced = &q[..k];
        let cfg = &m.transform;
        let rf = cfg.reference();
        let params = cfg.params(&m.reparam.map(reduced))?;
        let mut acc = DeltaAdjoint::new(cfg);
        let mut ll = self.offset;
        for res in &self.resid {
            match *res {
                Resid::Exact(r) => {
                    let ev = params.eval(cfg, r);
                    ll += rf.ln_pdf(ev.h) + ev.ln_dh;
                    params.accumulate(&ev, rf.d_ln_pdf(ev.h), 1.0, &mut acc);
                }
                Resid::Left(r) => {
                    let ev = params.eval(cfg, r);
                    ll += rf.ln_cdf(ev.h);
                    params.accumulate(&ev, rf.d_ln_cdf(ev.h), 0.0, &mut acc);
                }
                Resid::Right(r) => {
                    let ev = params.eval(cfg, r);
                    ll += rf.ln_sf(ev.h);
                    params.accumulate(&ev, rf.d_ln_sf(ev.h), 0.0, &mut acc);
                }
                Resid::Interval(lo, hi) => {
                    let (el, eh) = (params.eval(cfg, lo), params.eval(cfg, hi));
                    let v = rf.ln_interval(el.h, eh.h);
                    ll += v;
                    params.accumulate(&el, -(rf.ln_pdf(el.h) - v).exp(), 0.0, &mut acc);
                    params.accumulate(&eh, (rf.ln_pdf(eh.h) - v).exp(), 0.0, &mut acc);
                }
            }
        }
        let g_delta = params.finish(cfg, acc);
        let g_reduced = m.reparam.pullback(&g_delta);
        let (tau2, dlog_tau2) = self.variance(theta);
        let ss: f64 = reduced.iter().map(|x| x * x).sum();
        let prior = log_prior_delta_tilde(reduced, tau2)?;
        let (hyper, d_hyper) = self.log_hyper(theta)?;
        for j in 0..k {
            grad[j] = g_reduced[j] - reduced[j] / tau2;
        }
        grad[k] = (-0.5 * k as f64 + 0.5 * ss / tau2) * dlog_tau2 + d_hyper;
        let lp = ll + prior + hyper;
        if lp.is_nan() || grad.iter().any(|g| g.is_nan()) {
            return Err(PtmError::Numeric("NaN in delta block".into()));
        }
        Ok(lp)
    }

    pub fn log_density(&self, q: &[f64]) -> Result<f64> {
        let mut g = vec![0.0; q.len()];
        self.evaluate(q, &mut g)
    }
}

impl LogDensity for DeltaTarget<'_> {
    fn dim(&self) -> usize {
        self.model.delta_block_dim()
    }

    fn logp_grad(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(q, grad).unwrap_or(f64::NEG_INFINITY)
    }
}
