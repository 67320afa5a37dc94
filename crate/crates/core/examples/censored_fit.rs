//! Right-censored survival-style responses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ptm::mcmc::{run_chains, KernelConfig};
use ptm::model::{ModelData, ModelSpec, PriorConfig, PtmModel, Response};
use ptm::posterior::Predictive;
use ptm::predictor::{Covariates, TermSpec};
use ptm::transform::TransformSpec;
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 300;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut censored = 0;
    let response: Vec<Response> = x
        .iter()
        .map(|&v| {
            let t = 1.0 + 0.8 * v + 0.5 * rng.sample::<f64, _>(StandardNormal);
            let c = rng.random_range(0.5..3.0);
            if t > c {
                censored += 1;
                Response::Right { lower: c }
            } else {
                Response::Exact { y: t }
            }
        })
        .collect();
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![TermSpec::Linear { var: "x".into() }],
        scale: vec![],
        prior: PriorConfig::default(),
    };
    let model = PtmModel::new(
        &spec,
        &ModelData {
            response,
            covariates: Covariates::new(n).with_numeric("x", x)?,
        },
    )?;
    let mut cfg = KernelConfig::new(400, 400);
    cfg.chains = 2;
    let (chains, _) = run_chains(&model, &cfg)?;
    let slope = chains
        .iter()
        .flat_map(|c| c.column("location.linear[0]").unwrap().to_vec())
        .collect::<Vec<_>>();
    println!(
        "{censored} of {n} right-censored; posterior mean slope {:.3} (true 0.8)",
        ptm::stats::mean(&slope)
    );
    let grid = Covariates::new(3).with_numeric("x", vec![-0.5, 0.0, 0.5])?;
    let pred = Predictive::from_chains(&model, &chains, &grid)?;
    for (i, xv) in [-0.5, 0.0, 0.5].iter().enumerate() {
        let med = ptm::stats::mean(&pred.quantile_draws(i, 0.5)?);
        println!(
            "x = {xv:>4}: posterior median response {med:.3} (true {:.3})",
            1.0 + 0.8 * xv
        );
    }
    Ok(())
}
