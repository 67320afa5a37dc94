//! Conjugate update of predictor variances.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{PtmError, Result};
use crate::priors::PenaltySpec;

/// Draw `τ² ~ IG(a + rank/2, b + θᵀKθ/2)`.
pub fn gibbs_tau2<R: Rng>(
    coef: &[f64],
    penalty: &PenaltySpec,
    shape: f64,
    scale: f64,
    rng: &mut R,
) -> Result<f64> {
    let a = shape + 0.5 * penalty.rank() as f64;
    let b = scale + 0.5 * penalty.quad_form(coef);
    let g = Gamma::new(a, 1.0 / b).map_err(|e| PtmError::Numeric(e.to_string()))?;
    Ok(1.0 / g.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, InverseGamma};

    #[test]
    fn ks_against_inverse_gamma() {
        let k = PenaltySpec::difference(10, 2).unwrap();
        let coef: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let (a, b) = (1.0 + 4.0, 0.001 + 0.5 * k.quad_form(&coef));
        let ig = InverseGamma::new(a, b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| gibbs_tau2(&coef, &k, 1.0, 0.001, &mut rng).unwrap())
            .collect();
        xs.sort_by(|a, b| a.total_cmp(b));
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = ig.cdf(x);
                (c - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - c).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        assert!(d < 1.63 / (n as f64).sqrt(), "D = {d}");
    }
}
