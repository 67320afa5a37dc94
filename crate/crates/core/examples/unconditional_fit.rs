//! Density estimation without covariates on skewed data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptm::mcmc::{run_chains, KernelConfig};
use ptm::model::{ModelData, ModelSpec, PriorConfig, PtmModel};
use ptm::posterior::Predictive;
use ptm::predictor::Covariates;
use ptm::simlab::{score_fit, simulate, Scenario, ScoreOptions};
use ptm::transform::TransformSpec;
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let law = Scenario::skewnorm().instantiate(&mut rng)?;
    let train = simulate(&law, 300, None, &mut rng)?;
    let test = simulate(&law, 500, None, &mut rng)?;
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![],
        scale: vec![],
        prior: PriorConfig::default(),
    };
    let model = PtmModel::new(
        &spec,
        &ModelData::unconditional(train.iter().map(|r| r.y).collect()),
    )?;
    let mut cfg = KernelConfig::new(500, 500);
    cfg.chains = 2;
    let (chains, _) = run_chains(&model, &cfg)?;
    let pred = Predictive::from_chains(&model, &chains, &Covariates::new(1))?;
    let panel = score_fit(&pred, &test, None, ScoreOptions::default(), &mut rng)?;
    println!(
        "KLD {:.4}  MAD {:.4}  CRPS {:.4}  90% coverage {:.3}",
        panel.kld, panel.mad, panel.crps, panel.coverage
    );
    for y in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let lp = pred.mean_log_pdf(0, y);
        println!(
            "y = {y:>4}: posterior mean density {:.4}, truth {:.4}",
            lp.exp(),
            law.pdf(y)
        );
    }
    Ok(())
}
