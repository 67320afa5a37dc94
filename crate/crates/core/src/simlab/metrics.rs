//! Scoring rules and calibration measures.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenarios::SimRow;
use crate::error::{PtmError, Result};
use crate::posterior::Predictive;
use crate::stats;
use crate::transform::log_sum_exp;

/// Number of probability levels of the quantile-score CRPS.
pub const CRPS_LEVELS: usize = 25;

/// Mean over draws and points of `ln f - ln f̂`; `est[t][i]` is draw `t`
/// at point `i`.
pub fn kld(true_log_pdf: &[f64], est: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    for d in est {
        sum += true_log_pdf.iter().zip(d).map(|(t, e)| t - e).sum::<f64>();
    }
    sum / (est.len() * true_log_pdf.len()) as f64
}

/// Mean over draws and points of `|F - F̂|`.
pub fn mad(true_cdf: &[f64], est: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    for d in est {
        sum += true_cdf
            .iter()
            .zip(d)
            .map(|(t, e)| (t - e).abs())
            .sum::<f64>();
    }
    sum / (est.len() * true_cdf.len()) as f64
}

/// CRPS of an ensemble forecast, `E|X - y| - E|X - X'| / 2`.
pub fn crps_sample(forecast: &[f64], y: f64) -> f64 {
    let n = forecast.len() as f64;
    let mut sorted = forecast.to_vec();
    sorted.sort_by(f64::total_cmp);
    let abs_err = sorted.iter().map(|x| (x - y).abs()).sum::<f64>() / n;
    let spread: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * (i + 1) as f64 - n - 1.0) * x)
        .sum::<f64>()
        / (n * n);
    abs_err - spread
}

/// Probability levels of the quantile-score CRPS.
pub fn crps_levels() -> Vec<f64> {
    stats::linspace(0.005, 0.995, CRPS_LEVELS)
}

/// CRPS as the trapezoid integral of quantile scores over
/// [`crps_levels`]; `quantiles[k]` is the forecast quantile at level `k`.
pub fn crps_quantile(quantiles: &[f64], y: f64) -> f64 {
    let levels = crps_levels();
    let qs: Vec<f64> = levels
        .iter()
        .zip(quantiles)
        .map(|(&a, &q)| 2.0 * (if y < q { 1.0 } else { 0.0 } - a) * (q - y))
        .collect();
    stats::trapezoid(&qs, levels[1] - levels[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waic {
    pub lppd: f64,
    pub p_waic: f64,
    pub waic: f64,
}

/// Deviance-scale WAIC from pointwise log densities `ld[t][i]`.
pub fn waic(ld: &[Vec<f64>]) -> Result<Waic> {
    if ld.len() < 2 {
        return Err(PtmError::data(None, "WAIC needs at least two draws"));
    }
    let n_pts = ld[0].len();
    let t = ld.len() as f64;
    let (mut lppd, mut p) = (0.0, 0.0);
    let mut col = vec![0.0; ld.len()];
    for i in 0..n_pts {
        for (c, d) in col.iter_mut().zip(ld) {
            *c = d[i];
        }
        lppd += log_sum_exp(&col) - t.ln();
        p += stats::variance(&col, 1);
    }
    Ok(Waic {
        lppd,
        p_waic: p,
        waic: -2.0 * (lppd - p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub coverage: f64,
    pub width: f64,
}

/// Fraction of truths inside their interval and the mean width.
pub fn coverage(truth: &[f64], intervals: &[(f64, f64)]) -> Coverage {
    let n = truth.len() as f64;
    let hits = truth
        .iter()
        .zip(intervals)
        .filter(|&(&t, &(lo, hi))| lo <= t && t <= hi)
        .count();
    let width = intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / n;
    Coverage {
        coverage: hits as f64 / n,
        width,
    }
}

/// Equal-tailed pointwise intervals from `draws[t][i]`.
pub fn pointwise_intervals(draws: &[Vec<f64>], level: f64) -> Vec<(f64, f64)> {
    let n_pts = draws.first().map_or(0, Vec::len);
    let tail = 0.5 * (1.0 - level);
    (0..n_pts)
        .map(|i| {
            let mut col: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            col.sort_by(f64::total_cmp);
            (
                stats::quantile_sorted(&col, tail),
                stats::quantile_sorted(&col, 1.0 - tail),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePanel {
    pub kld: f64,
    pub mad: f64,
    pub crps: f64,
    pub waic: Option<f64>,
    pub coverage: f64,
    pub interval_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    pub level: f64,
    /// Posterior draws used for the ensemble CRPS.
    pub crps_draws: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            level: 0.9,
            crps_draws: 200,
        }
    }
}

fn row_of(pred: &Predictive, i: usize) -> usize {
    if pred.n_rows() == 1 {
        0
    } else {
        i
    }
}

/// Transpose per-point draw vectors into per-draw vectors.
fn by_draw(per_point: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let t = per_point.first().map_or(0, Vec::len);
    (0..t)
        .map(|k| per_point.iter().map(|p| p[k]).collect())
        .collect()
}

/// Score a fit on held-out rows; `pred` has one row per test point or a
/// single shared row. WAIC is computed on `train` when given.
pub fn score_fit<R: Rng>(
    pred: &Predictive,
    test: &[SimRow],
    train: Option<(&Predictive, &[SimRow])>,
    opts: ScoreOptions,
    rng: &mut R,
) -> Result<ScorePanel> {
    let log_pdf = by_draw(
        test.iter()
            .enumerate()
            .map(|(i, r)| {
                pred.pdf_draws(row_of(pred, i), r.y)
                    .into_iter()
                    .map(f64::ln)
                    .collect()
            })
            .collect(),
    );
    let cdf = by_draw(
        test.iter()
            .enumerate()
            .map(|(i, r)| pred.cdf_draws(row_of(pred, i), r.y))
            .collect(),
    );
    let true_lp: Vec<f64> = test.iter().map(|r| r.true_log_pdf).collect();
    let true_cdf: Vec<f64> = test.iter().map(|r| r.true_cdf).collect();
    let cov = coverage(&true_cdf, &pointwise_intervals(&cdf, opts.level));
    let n_draws = pred.n_draws();
    let stride = (n_draws / opts.crps_draws.max(1)).max(1);
    let picks: Vec<usize> = (0..n_draws).step_by(stride).collect();
    let mut crps = 0.0;
    for (i, r) in test.iter().enumerate() {
        let ens = picks
            .iter()
            .map(|&k| pred.quantile_at(k, row_of(pred, i), rng.random_range(1e-12..1.0 - 1e-12)))
            .collect::<Result<Vec<_>>>()?;
        crps += crps_sample(&ens, r.y);
    }
    let waic = match train {
        Some((p, rows)) => Some(
            waic(&by_draw(
                rows.iter()
                    .enumerate()
                    .map(|(i, r)| {
                        p.pdf_draws(row_of(p, i), r.y)
                            .into_iter()
                            .map(f64::ln)
                            .collect()
                    })
                    .collect(),
            ))?
            .waic,
        ),
        None => None,
    };
    Ok(ScorePanel {
        kld: kld(&true_lp, &log_pdf),
        mad: mad(&true_cdf, &cdf),
        crps: crps / test.len() as f64,
        waic,
        coverage: cov.coverage,
        interval_width: cov.width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn crps_point_and_gaussian() {
        assert_eq!(crps_sample(&[2.5], 1.0), 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
        let want = (2f64.sqrt() - 1.0) / std::f64::consts::PI.sqrt();
        let got = crps_sample(&xs, 0.0);
        assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
        // naive double sum on a small ensemble
        let small = &xs[..50];
        let n = small.len() as f64;
        let a: f64 = small.iter().map(|x| (x - 0.3).abs()).sum::<f64>() / n;
        let b: f64 = small
            .iter()
            .flat_map(|x| small.iter().map(move |z| (x - z).abs()))
            .sum::<f64>()
            / (n * n);
        assert!((crps_sample(small, 0.3) - (a - 0.5 * b)).abs() < 1e-12);
    }

    #[test]
    fn crps_estimators_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| 1.0 + 2.0 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let q: Vec<f64> = crps_levels()
            .iter()
            .map(|&u| 1.0 + 2.0 * normal::quantile(u))
            .collect();
        for y in [-1.0, 0.5, 1.0, 3.0] {
            let (a, b) = (crps_sample(&xs, y), crps_quantile(&q, y));
            assert!((a / b - 1.0).abs() < 0.05, "y = {y}: {a} vs {b}");
        }
    }

    #[test]
    fn waic_properties() {
        let same = vec![vec![-1.0, -2.0, -0.5]; 10];
        let w = waic(&same).unwrap();
        assert_eq!(w.p_waic, 0.0);
        assert!((w.lppd - (-3.5)).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ld: Vec<Vec<f64>> = (0..2000)
            .map(|_| {
                (0..5)
                    .map(|_| -1.0 + 0.2 * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let direct: f64 = (0..5)
            .map(|i| (ld.iter().map(|d| d[i].exp()).sum::<f64>() / 2000.0).ln())
            .sum();
        let w = waic(&ld).unwrap();
        assert!((w.lppd - direct).abs() < 1e-10);
        let doubled: Vec<Vec<f64>> = ld.iter().chain(&ld).cloned().collect();
        let w2 = waic(&doubled).unwrap();
        assert!((w2.waic - w.waic).abs() < 1e-3 * w.waic.abs());
        assert!(waic(&ld[..1]).is_err());
    }

    #[test]
    fn kld_mad_coverage() {
        let t = vec![-1.0, -2.0];
        assert_eq!(kld(&t, &[t.clone(), t.clone()]), 0.0);
        let f = vec![0.2, 0.5, 0.9];
        assert!((mad(&f, &[f.iter().map(|v| v + 0.01).collect()]) - 0.01).abs() < 1e-12);
        // N(0,1) against N(0.1,1): KLD = 0.005
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..200_000).map(|_| rng.sample(StandardNormal)).collect();
        let truth: Vec<f64> = xs.iter().map(|&x| normal::ln_pdf(x)).collect();
        let est = vec![xs
            .iter()
            .map(|&x| normal::ln_pdf(x - 0.1))
            .collect::<Vec<_>>()];
        assert!((kld(&truth, &est) - 0.005).abs() < 0.001);
        let c = coverage(&[0.0, 1.0], &[(f64::NEG_INFINITY, f64::INFINITY); 2]);
        assert_eq!(c.coverage, 1.0);
        let c = coverage(&[0.3, 0.7], &[(0.3, 0.3), (0.7, 0.7)]);
        assert_eq!((c.coverage, c.width), (1.0, 0.0));
    }
}
