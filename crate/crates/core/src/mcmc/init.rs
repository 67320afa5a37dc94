//! Starting values by two-stage gradient ascent.
//!
//! Stage one fits the Gaussian special case (δ̃ = 0) for all predictor
//! coefficients and variances; stage two fits δ̃ and `τ²_δ` with the
//! predictors frozen. Variances are optimized through a softclip link
//! under uniform priors on `(0.025, 10000)`.

use crate::error::{PtmError, Result};
use crate::model::{ModelState, PtmModel, Side, VarianceLink, LOG_TAU2_DELTA_MIN};
use crate::priors::Softclip;
use serde::{Deserialize, Serialize};

pub const INIT_MAX_ITER: usize = 5000;
pub const INIT_GRAD_TOL: f64 = 1e-6;
pub const VARIANCE_BOUNDS: (f64, f64) = (0.025, 10000.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentReport {
    pub iterations: usize,
    pub grad_norm: f64,
    pub objective: f64,
}

/// Gradient ascent with Barzilai-Borwein step lengths and Armijo
/// backtracking.
pub fn gradient_ascent<F>(f: F, x0: Vec<f64>, max_iter: usize, tol: f64) -> (Vec<f64>, AscentReport)
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = x0;
    let Some((mut fx, mut g)) = f(&x) else {
        return (
            x,
            AscentReport {
                iterations: 0,
                grad_norm: f64::NAN,
                objective: f64::NAN,
            },
        );
    };
    let mut alpha = 1e-3 / norm(&g).max(1.0);
    let mut it = 0;
    while it < max_iter && norm(&g) > tol {
        let g2 = g.iter().map(|v| v * v).sum::<f64>();
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + step * gi).collect();
            if let Some((fn_, gn)) = f(&xn) {
                if fn_.is_finite() && fn_ >= fx + 1e-4 * step * g2 {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else { break };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        alpha = if sy.abs() > 1e-300 {
            (ss / sy.abs()).clamp(1e-12, 1e6)
        } else {
            step * 2.0
        };
        x = xn;
        fx = fn_;
        g = gn;
        it += 1;
    }
    let grad_norm = norm(&g);
    (
        x,
        AscentReport {
            iterations: it,
            grad_norm,
            objective: fx,
        },
    )
}

/// Run both stages from the default state and return the initialized state.
pub fn initialize(model: &PtmModel) -> Result<(ModelState, [AscentReport; 2])> {
    let mut state = model.initial_state()?;
    let sc = Softclip::new(VARIANCE_BOUNDS.0, VARIANCE_BOUNDS.1);
    let params0 = model
        .transform
        .params(&vec![0.0; model.transform.n_params()])?;

    // stage one: predictors under the Gaussian special case
    let sides = [Side::Location, Side::Scale];
    let mut x0 = Vec::new();
    for side in sides {
        for c in state.terms(side) {
            x0.extend_from_slice(c);
        }
    }
    for side in sides {
        for t2 in state.tau2(side).iter().flatten() {
            x0.push(sc.from_variance(*t2));
        }
    }
    x0.push(state.beta0);
    x0.push(state.gamma0);
    let unpack = |x: &[f64], st: &mut ModelState| {
        let mut pos = 0;
        for side in sides {
            for (c, t) in st.terms_mut(side).iter_mut().zip(model.terms(side)) {
                c.copy_from_slice(&x[pos..pos + t.n_coef()]);
                pos += t.n_coef();
            }
        }
        for side in sides {
            for t2 in st.tau2_mut(side).iter_mut().flatten() {
                *t2 = sc.to_variance(x[pos]);
                pos += 1;
            }
        }
        st.beta0 = x[pos];
        st.gamma0 = x[pos + 1];
    };
    let objective = |x: &[f64]| -> Option<(f64, Vec<f64>)> {
        let mut st = state.clone();
        unpack(x, &mut st);
        let (mu, ls) = model.predictors(&st);
        let g = model.eta_gradients(&params0, &mu, &ls);
        let mut lp = g.log_lik;
        let mut grad = Vec::with_capacity(x.len());
        let mut var_grads = Vec::new();
        let mut pos_var = x.len()
            - 2
            - st.tau2_location
                .iter()
                .chain(&st.tau2_scale)
                .flatten()
                .count();
        for side in sides {
            let d_eta = match side {
                Side::Location => &g.d_mu,
                Side::Scale => &g.d_log_sigma,
            };
            for ((t, c), t2) in model
                .terms(side)
                .iter()
                .zip(st.terms(side))
                .zip(st.tau2(side))
            {
                let mut gc = t.design.tmul(d_eta);
                if let (Some(k), Some(t2)) = (&t.penalty, t2) {
                    let kc = k.matrix() * nalgebra::DVector::from_column_slice(c);
                    let q = c.iter().zip(kc.iter()).map(|(a, b)| a * b).sum::<f64>();
                    let rank = k.rank() as f64;
                    lp += -0.5 * rank * t2.ln() - 0.5 * q / t2;
                    gc.iter_mut().zip(kc.iter()).for_each(|(g, k)| *g -= k / t2);
                    let xv = x[pos_var];
                    lp += sc.ln_jacobian(xv);
                    let d_t2 = -0.5 * rank / t2 + 0.5 * q / (t2 * t2);
                    var_grads.push(d_t2 * sc.d_to_variance(xv) + sc.d_ln_jacobian(xv));
                    pos_var += 1;
                }
                grad.extend(gc);
            }
        }
        grad.extend(var_grads);
        grad.push(g.d_mu.iter().sum());
        grad.push(g.d_log_sigma.iter().sum());
        if !lp.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((lp, grad))
    };
    let (x1, rep1) = gradient_ascent(objective, x0, INIT_MAX_ITER, INIT_GRAD_TOL);
    if !rep1.objective.is_finite() {
        return Err(PtmError::Convergence(rep1.grad_norm));
    }
    unpack(&x1, &mut state);
    model.update_intercepts(&mut state)?;

    // stage two: transformation parameters
    let target = model.delta_target(&state, VarianceLink::Softclip(sc));
    let k = model.reparam.reduced_dim();
    let mut x0 = vec![0.0; k + 1];
    x0[k] = sc.from_variance(1.0);
    let objective = |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        target
            .evaluate(x, &mut g)
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| (v, g))
    };
    let (x2, rep2) = gradient_ascent(objective, x0, INIT_MAX_ITER, INIT_GRAD_TOL);
    if !rep2.objective.is_finite() {
        return Err(PtmError::Convergence(rep2.grad_norm));
    }
    state.delta_tilde.copy_from_slice(&x2[..k]);
    state.log_tau2_delta = sc.to_variance(x2[k]).ln().max(LOG_TAU2_DELTA_MIN);
    Ok((state, [rep1, rep2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelData, ModelSpec, PriorConfig};
    use crate::predictor::{Covariates, TermSpec};
    use crate::transform::TransformSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn ascent_on_quadratic() {
        let f = |x: &[f64]| {
            Some((
                -(x[0] - 1.0).powi(2) - 10.0 * (x[1] + 2.0).powi(2),
                vec![-2.0 * (x[0] - 1.0), -20.0 * (x[1] + 2.0)],
            ))
        };
        let (x, rep) = gradient_ascent(f, vec![0.0, 0.0], 5000, 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] + 2.0).abs() < 1e-9);
        assert!(rep.iterations < 200);
    }

    #[test]
    fn gaussian_location_scale_recovers_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 300;
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 1.0 + 3.0 * v + 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let spec = ModelSpec {
            transform: TransformSpec::default_spec(),
            location: vec![TermSpec::Linear { var: "x".into() }],
            scale: vec![],
            prior: PriorConfig::default(),
        };
        let model = PtmModel::new(
            &spec,
            &ModelData::exact(
                y.clone(),
                Covariates::new(n).with_numeric("x", x.clone()).unwrap(),
            ),
        )
        .unwrap();
        let (state, reps) = initialize(&model).unwrap();
        let (mx, my) = (crate::stats::mean(&x), crate::stats::mean(&y));
        let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let resid_sd = (y
            .iter()
            .zip(&x)
            .map(|(b, a)| (b - my - slope * (a - mx)).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        let se = resid_sd / sxx.sqrt();
        assert!(
            (state.beta[0][0] - slope).abs() < 3.0 * se,
            "{} vs {slope}",
            state.beta[0][0]
        );
        assert!(reps[0].grad_norm < 1e-3);
        assert!(state.log_tau2_delta >= LOG_TAU2_DELTA_MIN);
    }
}
