//! Draw every residual scenario and check its standardization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptm::simlab::{simulate, Scenario, Surface};
use ptm::stats;
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    println!("scenario,mean,var,mean_true_log_pdf");
    for scenario in Scenario::all() {
        let law = scenario.instantiate(&mut rng)?;
        let rows = simulate(&law, 20_000, None, &mut rng)?;
        let r: Vec<f64> = rows.iter().map(|s| s.r).collect();
        let lp: Vec<f64> = rows.iter().map(|s| s.true_log_pdf).collect();
        println!(
            "{},{:.3},{:.3},{:.3}",
            scenario.name(),
            stats::mean(&r),
            stats::variance(&r, 1),
            stats::mean(&lp)
        );
    }
    let law = Scenario::Gaussian.instantiate(&mut rng)?;
    for s in simulate(&law, 5, Some(Surface::S4), &mut rng)? {
        println!(
            "x = {:.3}: mu = {:.3}, sigma = {:.3}, y = {:.3}",
            s.x.unwrap(),
            s.mu,
            s.sigma,
            s.y
        );
    }
    Ok(())
}
