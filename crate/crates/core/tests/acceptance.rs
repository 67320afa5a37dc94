//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so criteria execute in order and a
//! failing one does not hide the rest. `PTM_ACCEPTANCE=1,4,11` restricts
//! the run to the listed criteria.

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, InverseGamma, Normal};

use ptm::mcmc::gibbs::gibbs_tau2;
use ptm::mcmc::nuts::{LogDensity, NutsKernel, NutsSettings};
use ptm::mcmc::{run_chains, KernelConfig};
use ptm::model::{
    ModelData, ModelSpec, PriorConfig, PtmModel, Response, VarianceLink, LOG_TAU2_DELTA_MIN,
};
use ptm::posterior::{diagnose, Predictive};
use ptm::predictor::{Covariates, TermSpec};
use ptm::priors::{prior_predictive_tv, PenaltySpec, ReparamBasis};
use ptm::simlab::{
    crps_sample, kld, score_fit, simulate, waic, Scenario, ScoreOptions, SimRow, Surface,
};
use ptm::stats;
use ptm::transform::{BasisPath, Extrapolation, TransformConfig, TransformSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn configs() -> Vec<(usize, Extrapolation)> {
    let mut out = Vec::new();
    for j in [15, 30] {
        for e in [
            Extrapolation::Transition { lambda: 0.8 },
            Extrapolation::Identity,
            Extrapolation::Linear,
        ] {
            out.push((j, e));
        }
    }
    out
}

fn random_delta(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let scale = rng.random_range(0.05..1.5);
    (0..n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Composite Simpson rule on `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

fn transformation_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_anchor, mut worst_id, mut worst_slope, mut non_monotone) =
        (0f64, 0f64, 0f64, 0usize);
    for (j, ext) in configs() {
        for path in [BasisPath::Exact, BasisPath::Grid] {
            let cfg = TransformConfig::new(-4.0, 4.0, j, ext)
                .unwrap()
                .with_path(path);
            let lam = cfg.lambda().unwrap_or(0.8);
            let grid = stats::linspace(-4.0 - 2.0 * lam, 4.0 + 2.0 * lam, 2001);
            for _ in 0..1000 {
                let p = cfg.params(&random_delta(&mut rng, j)).unwrap();
                let h = p.forward_batch(&cfg, &grid);
                non_monotone += h.windows(2).filter(|w| !(w[1] > w[0])).count();
                worst_anchor = worst_anchor
                    .max((p.forward(&cfg, -4.0) + 4.0).abs())
                    .max((p.forward(&cfg, 4.0) - 4.0).abs());
                if path == BasisPath::Exact {
                    let slope = simpson(|r| p.deriv(&cfg, r), -4.0, 4.0, 4000) / 8.0;
                    worst_slope = worst_slope.max((slope - 1.0).abs());
                }
            }
            let c = rng.random_range(-3.0..3.0);
            let p = cfg.params(&vec![c; j]).unwrap();
            for &r in &grid {
                worst_id = worst_id.max((p.forward(&cfg, r) - r).abs());
            }
        }
    }
    outcome(
        non_monotone == 0 && worst_anchor <= 1e-8 && worst_id <= 1e-8 && worst_slope <= 1e-6,
        format!(
            "non-monotone steps {non_monotone}, anchor err {worst_anchor:.1e}, |h - id| {worst_id:.1e}, slope err {worst_slope:.1e}"
        ),
    )
}

fn derivative_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0f64;
    for (j, ext) in configs() {
        let cfg = TransformConfig::new(-4.0, 4.0, j, ext)
            .unwrap()
            .with_path(BasisPath::Exact);
        let p = cfg.params(&random_delta(&mut rng, j)).unwrap();
        for _ in 0..1000 {
            let r = rng.random_range(-3.999..3.999);
            let h = 1e-5;
            let fd = (p.forward(&cfg, r + h) - p.forward(&cfg, r - h)) / (2.0 * h);
            worst = worst.max((p.deriv(&cfg, r) - fd).abs() / fd.abs());
        }
    }
    outcome(worst <= 1e-6, format!("max relative error {worst:.2e}"))
}

fn density_coherence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg =
        TransformConfig::new(-4.0, 4.0, 30, Extrapolation::Transition { lambda: 0.8 }).unwrap();
    let std_normal = Normal::standard();
    let (mut mass_err, mut cdf_err) = (0f64, 0f64);
    for _ in 0..100 {
        let p = cfg.params(&random_delta(&mut rng, 30)).unwrap();
        let mass = simpson(|r| p.log_density(&cfg, r).exp(), -12.0, 12.0, 24000);
        mass_err = mass_err.max((mass - 1.0).abs());
        cdf_err = cdf_err.max((p.cdf(&cfg, -4.0) - std_normal.cdf(-4.0)).abs());
    }
    outcome(
        mass_err <= 1e-4 && cdf_err <= 1e-10,
        format!("mass err {mass_err:.1e}, |F(a) - Phi(a)| {cdf_err:.1e}"),
    )
}

fn reparameterization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut quad_err, mut shift_err) = (0f64, 0f64);
    for n in [15, 30] {
        let basis = ReparamBasis::new(&PenaltySpec::random_walk(n).unwrap()).unwrap();
        let cfg =
            TransformConfig::new(-4.0, 4.0, n, Extrapolation::Transition { lambda: 0.8 }).unwrap();
        for _ in 0..200 {
            let z: Vec<f64> = (0..basis.reduced_dim())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let d = basis.map(&z);
            let rw: f64 = d.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            let norm: f64 = z.iter().map(|v| v * v).sum();
            quad_err = quad_err.max((rw - norm).abs());
            let eta = rng.random_range(-5.0..5.0);
            let shifted: Vec<f64> = d.iter().map(|v| v + eta).collect();
            let (p, q) = (cfg.params(&d).unwrap(), cfg.params(&shifted).unwrap());
            for r in stats::linspace(-6.0, 6.0, 101) {
                shift_err = shift_err.max((p.forward(&cfg, r) - q.forward(&cfg, r)).abs());
            }
        }
    }
    outcome(
        quad_err <= 1e-10 && shift_err <= 1e-10,
        format!("quadratic form err {quad_err:.1e}, shift err {shift_err:.1e}"),
    )
}

fn gradient_model() -> PtmModel {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let response = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let y = 0.5 * v + (0.3 * v).exp() * rng.sample::<f64, _>(StandardNormal);
            match i % 4 {
                0 => Response::Exact { y },
                1 => Response::Left { upper: y },
                2 => Response::Right { lower: y },
                _ => Response::Interval {
                    lower: y - 0.4,
                    upper: y + 0.3,
                },
            }
        })
        .collect();
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![TermSpec::Linear { var: "x".into() }],
        scale: vec![TermSpec::Linear { var: "x".into() }],
        prior: PriorConfig::default(),
    };
    let data = ModelData {
        response,
        covariates: Covariates::new(n).with_numeric("x", x).unwrap(),
    };
    PtmModel::new(&spec, &data).unwrap()
}

fn gradient_contract() -> Outcome {
    let model = gradient_model();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0f64;
    let k = model.reparam.reduced_dim();
    for s in 0..50 {
        let mut state = model.initial_state().unwrap();
        state.beta[0] = vec![rng.random_range(-1.0..1.0)];
        state.gamma[0] = vec![rng.random_range(-0.5..0.5)];
        model.update_intercepts(&mut state).unwrap();
        let at_clip = s % 5 == 0;
        let mut q: Vec<f64> = (0..k)
            .map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        q.push(if at_clip {
            LOG_TAU2_DELTA_MIN
        } else {
            rng.random_range(-10.0..3.0)
        });
        let target = model.delta_target(&state, VarianceLink::Log);
        let mut g = vec![0.0; k + 1];
        target.logp_grad(&q, &mut g);
        let f = |q: &[f64]| {
            let mut scratch = vec![0.0; k + 1];
            target.logp_grad(q, &mut scratch)
        };
        let h = 1e-5;
        for i in 0..=k {
            let at = |t: f64| {
                let mut p = q.clone();
                p[i] += t;
                f(&p)
            };
            let fd = if at_clip && i == k {
                // the clip forbids stepping below, so use a one-sided second-order stencil
                (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h)
            } else {
                (at(h) - at(-h)) / (2.0 * h)
            };
            worst = worst.max((g[i] - fd).abs() / fd.abs().max(1.0));
        }
    }
    outcome(
        worst <= 1e-5,
        format!("max relative error {worst:.2e} over 50 states (10 at the clip)"),
    )
}

fn ks_pvalue(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lam).powi(2)).exp())
        .sum();
    (d, p.clamp(0.0, 1.0))
}

struct StdNormal(usize);

impl LogDensity for StdNormal {
    fn dim(&self) -> usize {
        self.0
    }
    fn logp_grad(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        for (g, x) in grad.iter_mut().zip(q) {
            *g = -x;
        }
        -0.5 * q.iter().map(|x| x * x).sum::<f64>()
    }
}

fn sampler_kernels() -> Outcome {
    // Gibbs against the inverse gamma full conditional
    let pen = PenaltySpec::difference(12, 2).unwrap();
    let coef: Vec<f64> = (0..12).map(|i| (0.7 * i as f64).cos()).collect();
    let ig = InverseGamma::new(
        1.0 + 0.5 * pen.rank() as f64,
        0.001 + 0.5 * pen.quad_form(&coef),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| gibbs_tau2(&coef, &pen, 1.0, 0.001, &mut rng).unwrap())
        .collect();
    let (d, p) = ks_pvalue(draws, |x| ig.cdf(x));

    // NUTS on a 10-d standard normal
    let target = StdNormal(10);
    let mut all: Vec<Vec<f64>> = Vec::new();
    for c in 0..4u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + c);
        let mut kernel = NutsKernel::new(10, 1000, NutsSettings::default());
        let mut q: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
        for _ in 0..1000 {
            q = kernel.step(&target, &q, true, &mut rng).0;
        }
        kernel.end_warmup();
        for _ in 0..10_000 {
            q = kernel.step(&target, &q, false, &mut rng).0;
            all.push(q.clone());
        }
    }
    let (mut mean_err, mut var_err) = (0f64, 0f64);
    for i in 0..10 {
        let col: Vec<f64> = all.iter().map(|q| q[i]).collect();
        mean_err = mean_err.max(stats::mean(&col).abs());
        var_err = var_err.max((stats::variance(&col, 1) - 1.0).abs());
    }

    // acceptance targets on a Gaussian linear model
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 300;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
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
    let model = PtmModel::new(
        &spec,
        &ModelData::exact(y, Covariates::new(n).with_numeric("x", x).unwrap()),
    )
    .unwrap();
    let mut cfg = KernelConfig::new(1000, 2000);
    cfg.seed = 9;
    let (chains, _) = run_chains(&model, &cfg).unwrap();
    let rate =
        |key: &str| chains.iter().map(|c| c.accept_rates[key]).sum::<f64>() / chains.len() as f64;
    let iwls: Vec<f64> = ["iwls.location.linear", "iwls.scale.linear"]
        .iter()
        .map(|k| rate(k))
        .collect();
    let nuts = rate("nuts");
    let pass = p > 0.01
        && mean_err <= 0.05
        && var_err <= 0.1
        && iwls.iter().all(|r| (r - 0.5).abs() <= 0.1)
        && (nuts - 0.9).abs() <= 0.05;
    outcome(
        pass,
        format!(
            "Gibbs KS D {d:.4} p {p:.3}; NUTS max |mean| {mean_err:.3}, max |var - 1| {var_err:.3}; acceptance IWLS {:.3}/{:.3}, NUTS {nuts:.3}",
            iwls[0], iwls[1]
        ),
    )
}

fn prior_calibration() -> Outcome {
    // pooled over three extrapolation settings, each 100 x 100 draws
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut values = Vec::new();
    let mut redraws = 0;
    for ext in [
        Extrapolation::Identity,
        Extrapolation::Transition { lambda: 1.0 },
        Extrapolation::Linear,
    ] {
        let cfg = TransformConfig::new(-4.0, 4.0, 30, ext).unwrap();
        let s = prior_predictive_tv(0.5, 100, 100, &cfg, &mut rng).unwrap();
        redraws += s.rejected;
        values.extend(s.values);
    }
    let (q90, q99) = (
        stats::quantile(&values, 0.9),
        stats::quantile(&values, 0.99),
    );
    outcome(
        (q90 - 0.30).abs() <= 0.05 && (q99 - 0.60).abs() <= 0.05,
        format!("TV q90 {q90:.3} (target 0.30 +- 0.05), q99 {q99:.3} (target 0.60 +- 0.05), {redraws} redraws"),
    )
}

fn unconditional_model(rows: &[SimRow]) -> PtmModel {
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![],
        scale: vec![],
        prior: PriorConfig::default(),
    };
    PtmModel::new(
        &spec,
        &ModelData::unconditional(rows.iter().map(|r| r.y).collect()),
    )
    .unwrap()
}

fn is_delta_block(name: &str) -> bool {
    name.starts_with("delta_tilde") || name == "log_tau2_delta"
}

fn unconditional_end_to_end() -> Outcome {
    let (mut klds, mut covs, mut max_rhat) = (Vec::new(), Vec::new(), 0f64);
    for rep in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + rep);
        let law = Scenario::skewnorm().instantiate(&mut rng).unwrap();
        let train = simulate(&law, 500, None, &mut rng).unwrap();
        let test = simulate(&law, 1000, None, &mut rng).unwrap();
        let model = unconditional_model(&train);
        let mut cfg = KernelConfig::new(2500, 5000);
        cfg.seed = rep;
        let (chains, _) = run_chains(&model, &cfg).unwrap();
        max_rhat = max_rhat.max(
            diagnose(&chains)
                .max_rhat(is_delta_block)
                .unwrap_or(f64::INFINITY),
        );
        let pred = Predictive::from_chains(&model, &chains, &Covariates::new(1)).unwrap();
        let panel = score_fit(&pred, &test, None, ScoreOptions::default(), &mut rng).unwrap();
        klds.push(panel.kld);
        covs.push(panel.coverage);
    }
    let worst_kld = klds.iter().copied().fold(0.0, f64::max);
    let cov = stats::mean(&covs);
    outcome(
        worst_kld <= 0.05 && cov >= 0.85 && max_rhat <= 1.02,
        format!(
            "KLD mean {:.4} max {worst_kld:.4}; 90% coverage mean {cov:.3}; max rhat {max_rhat:.4} over 20 replications",
            stats::mean(&klds)
        ),
    )
}

fn gaussian_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2000);
    let law = Scenario::Gaussian.instantiate(&mut rng).unwrap();
    let train = simulate(&law, 500, None, &mut rng).unwrap();
    let test = simulate(&law, 5000, None, &mut rng).unwrap();
    let model = unconditional_model(&train);
    let mut cfg = KernelConfig::new(2500, 5000);
    cfg.seed = 21;
    let (chains, _) = run_chains(&model, &cfg).unwrap();
    let pred = Predictive::from_chains(&model, &chains, &Covariates::new(1)).unwrap();
    let true_lp: Vec<f64> = test.iter().map(|r| r.true_log_pdf).collect();
    let ptm_kld = {
        let per_point: Vec<Vec<f64>> = test.iter().map(|r| pred.pdf_draws(0, r.y)).collect();
        let est: Vec<Vec<f64>> = (0..pred.n_draws())
            .map(|t| per_point.iter().map(|p| p[t].ln()).collect())
            .collect();
        kld(&true_lp, &est)
    };
    // conjugate posterior of the Gaussian model under p(μ, σ²) ∝ 1/σ²
    let y: Vec<f64> = train.iter().map(|r| r.y).collect();
    let n = y.len() as f64;
    let (ybar, s2) = (stats::mean(&y), stats::variance(&y, 1));
    let chi = ChiSquared::new(n - 1.0).unwrap();
    let est: Vec<Vec<f64>> = (0..pred.n_draws())
        .map(|_| {
            let var = (n - 1.0) * s2 / chi.sample(&mut rng);
            let mu = ybar + (var / n).sqrt() * rng.sample::<f64, _>(StandardNormal);
            test.iter()
                .map(|r| {
                    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * (r.y - mu).powi(2) / var
                })
                .collect()
        })
        .collect();
    let gauss_kld = kld(&true_lp, &est);
    let ratio = ptm_kld / gauss_kld;
    outcome(
        ratio <= 2.0,
        format!("KLD PTM {ptm_kld:.5}, Gaussian {gauss_kld:.5}, ratio {ratio:.2}"),
    )
}

fn conditional_smoke() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3000);
    let law = Scenario::skewnorm().instantiate(&mut rng).unwrap();
    let train = simulate(&law, 1000, Some(Surface::S3), &mut rng).unwrap();
    let x: Vec<f64> = train.iter().map(|r| r.x.unwrap()).collect();
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![TermSpec::Pspline {
            var: "x".into(),
            n_bases: 20,
        }],
        scale: vec![TermSpec::Pspline {
            var: "x".into(),
            n_bases: 20,
        }],
        prior: PriorConfig::default(),
    };
    let data = ModelData::exact(
        train.iter().map(|r| r.y).collect(),
        Covariates::new(x.len()).with_numeric("x", x).unwrap(),
    );
    let model = PtmModel::new(&spec, &data).unwrap();
    let mut cfg = KernelConfig::new(1000, 1000);
    cfg.seed = 31;
    let (chains, _) = run_chains(&model, &cfg).unwrap();
    let mut mu_hat = vec![0.0; train.len()];
    let mut count = 0.0;
    for c in &chains {
        for k in 0..c.n_draws() {
            let state = c.state_at(&model, k).unwrap();
            let (mu, _) = model.predictors(&state);
            for (m, v) in mu_hat.iter_mut().zip(mu) {
                *m += v;
            }
            count += 1.0;
        }
    }
    mu_hat.iter_mut().for_each(|m| *m /= count);
    let truth: Vec<f64> = train.iter().map(|r| r.mu).collect();
    let (cm, ct) = (stats::mean(&mu_hat), stats::mean(&truth));
    let mse = mu_hat
        .iter()
        .zip(&truth)
        .map(|(m, t)| ((m - cm) - (t - ct)).powi(2))
        .sum::<f64>()
        / truth.len() as f64;
    let check = chains.iter().map(|c| c.intercept_check).fold(0.0, f64::max);
    outcome(
        mse <= 0.05 && check <= 1e-12,
        format!("centered location MSE {mse:.4}; intercept deviation {check:.1e}"),
    )
}

fn metric_oracles() -> Outcome {
    let point_exact = [(2.5, 1.0), (-1.0, 3.0), (0.3, 0.3)]
        .iter()
        .all(|&(x, y)| crps_sample(&[x], y) == (y - x).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xs: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
    let want = (2f64.sqrt() - 1.0) / std::f64::consts::PI.sqrt();
    let crps_rel = (crps_sample(&xs, 0.0) / want - 1.0).abs();
    let same = vec![vec![-1.2, -0.4, -2.0]; 50];
    let p_waic = waic(&same).unwrap().p_waic;
    // a PTM with δ = 0 fitted to exactly standardized data is N(0, 1)
    let mut y: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
    let (m, s) = (stats::mean(&y), stats::variance(&y, 0).sqrt());
    y.iter_mut().for_each(|v| *v = (*v - m) / s);
    let model = PtmModel::new(
        &ModelSpec {
            transform: TransformSpec::default_spec(),
            location: vec![],
            scale: vec![],
            prior: PriorConfig::default(),
        },
        &ModelData::unconditional(y),
    )
    .unwrap();
    let pred = Predictive::from_states(
        &model,
        &[model.initial_state().unwrap()],
        &Covariates::new(1),
    )
    .unwrap();
    let pts: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
    let truth: Vec<f64> = pts
        .iter()
        .map(|&z| -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z)
        .collect();
    let est = vec![pts
        .iter()
        .map(|&z| pred.pdf_draws(0, z)[0].ln())
        .collect::<Vec<f64>>()];
    let self_kld = kld(&truth, &est);
    outcome(
        point_exact && crps_rel <= 0.01 && p_waic == 0.0 && self_kld.abs() <= 1e-6,
        format!(
            "point CRPS exact {point_exact}; Gaussian CRPS rel err {crps_rel:.4}; p_WAIC {p_waic}; KLD(f, f) {self_kld:.1e}"
        ),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "transformation invariants", transformation_invariants),
        (2, "derivative correctness", derivative_correctness),
        (3, "density coherence", density_coherence),
        (4, "reparameterization", reparameterization),
        (5, "gradient contract", gradient_contract),
        (6, "sampler kernel oracles", sampler_kernels),
        (7, "prior-predictive calibration", prior_calibration),
        (8, "unconditional end-to-end", unconditional_end_to_end),
        (9, "Gaussian equivalence", gaussian_equivalence),
        (10, "conditional smoke", conditional_smoke),
        (11, "metric oracles", metric_oracles),
    ];
    let only: Option<Vec<usize>> = std::env::var("PTM_ACCEPTANCE")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let out = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {name}: {} ({}; {:.1}s)",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
        std::io::stdout().flush().ok();
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
