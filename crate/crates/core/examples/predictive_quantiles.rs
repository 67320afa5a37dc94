//! Conditional quantile curves with credible bands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptm::mcmc::{run_chains, KernelConfig};
use ptm::model::{ModelData, ModelSpec, PriorConfig, PtmModel};
use ptm::posterior::{IntervalKind, Predictive, PredictiveRequest, Quantity};
use ptm::predictor::{Covariates, TermSpec};
use ptm::transform::TransformSpec;
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 300;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    // gamma-like skew with a growing scale
    let y: Vec<f64> = x
        .iter()
        .map(|&v| v + (0.2 + 0.3 * v) * (-(rng.random::<f64>()).ln()))
        .collect();
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![TermSpec::Linear { var: "x".into() }],
        scale: vec![TermSpec::Linear { var: "x".into() }],
        prior: PriorConfig::default(),
    };
    let model = PtmModel::new(
        &spec,
        &ModelData::exact(y, Covariates::new(n).with_numeric("x", x)?),
    )?;
    let mut cfg = KernelConfig::new(400, 400);
    cfg.chains = 2;
    let (chains, _) = run_chains(&model, &cfg)?;
    let xs = vec![0.25, 1.0, 1.75];
    let cov = Covariates::new(xs.len()).with_numeric("x", xs.clone())?;
    let pred = Predictive::from_chains(&model, &chains, &cov)?;
    let mut req = PredictiveRequest::new(cov, vec![0.1, 0.5, 0.9]);
    req.interval = IntervalKind::Hpd;
    println!("x,u,mean,lo,hi");
    for row in pred.summarize(Quantity::Quantile, &req)? {
        println!(
            "{},{},{:.3},{:.3},{:.3}",
            xs[row.row_id], row.y_or_u, row.mean, row.lo, row.hi
        );
    }
    Ok(())
}
