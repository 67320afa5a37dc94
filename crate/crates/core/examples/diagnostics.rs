//! Convergence diagnostics of a short multi-chain run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptm::mcmc::{run_chains, KernelConfig};
use ptm::model::{ModelData, ModelSpec, PriorConfig, PtmModel};
use ptm::posterior::diagnose;
use ptm::simlab::{simulate, Scenario};
use ptm::transform::TransformSpec;
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let law = Scenario::Mixture.instantiate(&mut rng)?;
    let rows = simulate(&law, 300, None, &mut rng)?;
    let mut transform = TransformSpec::default_spec();
    transform.n_params = 10;
    let spec = ModelSpec {
        transform,
        location: vec![],
        scale: vec![],
        prior: PriorConfig::default(),
    };
    let model = PtmModel::new(
        &spec,
        &ModelData::unconditional(rows.iter().map(|r| r.y).collect()),
    )?;
    let (chains, init) = run_chains(&model, &KernelConfig::new(300, 300))?;
    println!(
        "initialization: {} + {} ascent iterations",
        init[0].iterations, init[1].iterations
    );
    let report = diagnose(&chains);
    println!("{report}");
    let worst = report.max_rhat(|n| n.starts_with("delta_tilde") || n == "log_tau2_delta");
    println!("max rhat over the transformation block: {worst:?}");
    Ok(())
}
