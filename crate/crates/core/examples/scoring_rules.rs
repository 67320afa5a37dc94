//! Proper scoring rules against known forecasts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ptm::normal;
use ptm::simlab::{coverage, crps_levels, crps_quantile, crps_sample, kld, mad, waic};
use ptm::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ens: Vec<f64> = (0..20_000).map(|_| rng.sample(StandardNormal)).collect();
    let q: Vec<f64> = crps_levels().iter().map(|&u| normal::quantile(u)).collect();
    for y in [0.0, 1.0, 2.5] {
        println!(
            "y = {y}: CRPS ensemble {:.4}, quantile grid {:.4}",
            crps_sample(&ens, y),
            crps_quantile(&q, y)
        );
    }
    // a forecast shifted by 0.3 against the truth
    let ys: Vec<f64> = (0..5000).map(|_| rng.sample(StandardNormal)).collect();
    let truth_lp: Vec<f64> = ys.iter().map(|&y| normal::ln_pdf(y)).collect();
    let truth_cdf: Vec<f64> = ys.iter().map(|&y| normal::cdf(y)).collect();
    let est_lp = vec![ys
        .iter()
        .map(|&y| normal::ln_pdf(y - 0.3))
        .collect::<Vec<_>>()];
    let est_cdf = vec![ys.iter().map(|&y| normal::cdf(y - 0.3)).collect::<Vec<_>>()];
    println!(
        "KLD {:.4} (population value 0.045), MAD {:.4}",
        kld(&truth_lp, &est_lp),
        mad(&truth_cdf, &est_cdf)
    );
    let ld: Vec<Vec<f64>> = (0..500)
        .map(|_| {
            ys[..100]
                .iter()
                .map(|&y| normal::ln_pdf(y - 0.05 * rng.sample::<f64, _>(StandardNormal)))
                .collect()
        })
        .collect();
    let w = waic(&ld)?;
    println!(
        "WAIC {:.2} (lppd {:.2}, p_waic {:.3})",
        w.waic, w.lppd, w.p_waic
    );
    let c = coverage(&[0.2, 0.5, 0.95], &[(0.1, 0.3), (0.4, 0.45), (0.9, 1.0)]);
    println!("coverage {:.3}, mean width {:.3}", c.coverage, c.width);
    Ok(())
}
