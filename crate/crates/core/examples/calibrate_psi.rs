//! Prior-predictive total variation distances for a grid of ψ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptm::priors::prior_predictive_tv;
use ptm::transform::TransformConfig;
use ptm::Result;

fn main() -> Result<()> {
    let cfg = TransformConfig::with_default_lambda(-4.0, 4.0, 30)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("psi,q50,q90,q99");
    for k in -6..=2 {
        let psi = 2f64.powi(k);
        let s = prior_predictive_tv(psi, 40, 25, &cfg, &mut rng)?;
        println!(
            "{psi},{:.3},{:.3},{:.3}",
            s.quantile(0.5),
            s.quantile(0.9),
            s.quantile(0.99)
        );
    }
    Ok(())
}
