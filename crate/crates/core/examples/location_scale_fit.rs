//! P-spline location and scale on an oscillating covariate effect.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptm::mcmc::{run_chains, KernelConfig};
use ptm::model::{ModelData, ModelSpec, PriorConfig, PtmModel};
use ptm::predictor::{Covariates, TermSpec};
use ptm::simlab::{simulate, Scenario, Surface};
use ptm::transform::TransformSpec;
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let law = Scenario::skewnorm().instantiate(&mut rng)?;
    let rows = simulate(&law, 400, Some(Surface::S3), &mut rng)?;
    let x: Vec<f64> = rows.iter().map(|r| r.x.unwrap()).collect();
    let spec = ModelSpec {
        transform: TransformSpec::default_spec(),
        location: vec![TermSpec::Pspline {
            var: "x".into(),
            n_bases: 20,
        }],
        scale: vec![TermSpec::Pspline {
            var: "x".into(),
            n_bases: 10,
        }],
        prior: PriorConfig::default(),
    };
    let data = ModelData::exact(
        rows.iter().map(|r| r.y).collect(),
        Covariates::new(x.len()).with_numeric("x", x.clone())?,
    );
    let model = PtmModel::new(&spec, &data)?;
    let mut cfg = KernelConfig::new(300, 300);
    cfg.chains = 2;
    let (chains, _) = run_chains(&model, &cfg)?;
    let mut mu = vec![0.0; rows.len()];
    let mut n = 0.0;
    for c in &chains {
        for k in 0..c.n_draws() {
            let (m, _) = model.predictors(&c.state_at(&model, k)?);
            mu.iter_mut().zip(m).for_each(|(a, b)| *a += b);
            n += 1.0;
        }
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    println!("x,mu_hat,mu_true");
    for &i in order.iter().step_by(20) {
        println!("{:.3},{:.3},{:.3}", x[i], mu[i] / n, rows[i].mu);
    }
    println!(
        "# max intercept deviation {:.1e}",
        chains.iter().map(|c| c.intercept_check).fold(0.0, f64::max)
    );
    Ok(())
}
