//! Rank-normalized split R̂ and bulk/tail effective sample sizes.

use std::collections::BTreeMap;
use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::mcmc::ChainOutput;
use crate::normal;
use crate::stats;

/// Split every chain into halves, dropping the middle draw of odd lengths.
fn split(chains: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * chains.len());
    for c in chains {
        let half = c.len() / 2;
        out.push(c[..half].to_vec());
        out.push(c[c.len() - half..].to_vec());
    }
    out
}

/// Normal scores of pooled ranks, average ranks for ties.
fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pooled: Vec<(f64, usize, usize)> = chains
        .iter()
        .enumerate()
        .flat_map(|(c, xs)| xs.iter().enumerate().map(move |(i, &x)| (x, c, i)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s = pooled.len() as f64;
    let mut out: Vec<Vec<f64>> = chains.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        let z = normal::quantile((rank - 0.375) / (s + 0.25));
        for p in &pooled[i..=j] {
            out[p.1][p.2] = z;
        }
        i = j + 1;
    }
    out
}

fn degenerate(chains: &[Vec<f64>]) -> bool {
    let first = chains[0][0];
    chains.iter().flatten().all(|&x| x == first) || chains.iter().flatten().any(|x| !x.is_finite())
}

fn basic_rhat(chains: &[Vec<f64>]) -> f64 {
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| stats::mean(c)).collect();
    let w = stats::mean(
        &chains
            .iter()
            .map(|c| stats::variance(c, 1))
            .collect::<Vec<_>>(),
    );
    let b = n * stats::variance(&means, 1);
    (((n - 1.0) / n * w + b / n) / w).sqrt()
}

/// Biased autocovariance by FFT.
fn autocov(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = stats::mean(x);
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    buf.iter_mut()
        .for_each(|c| *c = Complex::new(c.norm_sqr(), 0.0));
    planner.plan_fft_inverse(len).process(&mut buf);
    buf[..n]
        .iter()
        .map(|c| c.re / (len as f64 * n as f64))
        .collect()
}

/// Multi-chain ESS with Geyer's initial monotone sequence.
fn ess_raw(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains[0].len();
    let acov: Vec<Vec<f64>> = chains.iter().map(|c| autocov(c)).collect();
    let means: Vec<f64> = chains.iter().map(|c| stats::mean(c)).collect();
    let nf = n as f64;
    let mean_var = acov.iter().map(|a| a[0]).sum::<f64>() / m as f64 * nf / (nf - 1.0);
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        var_plus += stats::variance(&means, 1);
    }
    let rho =
        |t: usize| 1.0 - (mean_var - acov.iter().map(|a| a[t]).sum::<f64>() / m as f64) / var_plus;
    let mut rho_hat = vec![0.0; n];
    rho_hat[0] = 1.0;
    let (mut even, mut odd) = (1.0, rho(1));
    rho_hat[1] = odd;
    let mut t = 1;
    while t + 3 < n && even + odd > 0.0 {
        even = rho(t + 1);
        odd = rho(t + 2);
        if even + odd >= 0.0 {
            rho_hat[t + 1] = even;
            rho_hat[t + 2] = odd;
        }
        t += 2;
    }
    let max_t = if t >= 3 { t - 2 } else { 1 };
    if even > 0.0 && max_t + 1 < n {
        rho_hat[max_t + 1] = even;
    }
    let mut t = 1;
    while t + 2 <= max_t {
        if rho_hat[t + 1] + rho_hat[t + 2] > rho_hat[t - 1] + rho_hat[t] {
            rho_hat[t + 1] = 0.5 * (rho_hat[t - 1] + rho_hat[t]);
            rho_hat[t + 2] = rho_hat[t + 1];
        }
        t += 2;
    }
    let total = (m * n) as f64;
    let tail = if max_t + 1 < n {
        rho_hat[max_t + 1]
    } else {
        0.0
    };
    let tau = (-1.0 + 2.0 * rho_hat[..=max_t].iter().sum::<f64>() + tail).max(1.0 / total.log10());
    total / tau
}

fn prepare(chains: &[&[f64]]) -> Option<Vec<Vec<f64>>> {
    if chains.is_empty()
        || chains.iter().any(|c| c.len() < 8)
        || chains.iter().any(|c| c.len() != chains[0].len())
    {
        return None;
    }
    let s = split(chains);
    (!degenerate(&s)).then_some(s)
}

/// Rank-normalized split R̂: the larger of the bulk and folded values.
/// `None` for constant, non-finite or too short chains.
pub fn rhat(chains: &[&[f64]]) -> Option<f64> {
    let s = prepare(chains)?;
    let bulk = basic_rhat(&rank_normalize(&s));
    let med = stats::quantile(&s.concat(), 0.5);
    let folded: Vec<Vec<f64>> = s
        .iter()
        .map(|c| c.iter().map(|x| (x - med).abs()).collect())
        .collect();
    let tail = if degenerate(&folded) {
        bulk
    } else {
        basic_rhat(&rank_normalize(&folded))
    };
    Some(bulk.max(tail))
}

pub fn ess_bulk(chains: &[&[f64]]) -> Option<f64> {
    let s = prepare(chains)?;
    Some(ess_raw(&rank_normalize(&s)))
}

/// Minimum ESS of the 5% and 95% quantile indicators.
pub fn ess_tail(chains: &[&[f64]]) -> Option<f64> {
    let s = prepare(chains)?;
    let pooled = s.concat();
    let mut out = f64::INFINITY;
    for p in [0.05, 0.95] {
        let q = stats::quantile(&pooled, p);
        let ind: Vec<Vec<f64>> = s
            .iter()
            .map(|c| c.iter().map(|&x| if x <= q { 1.0 } else { 0.0 }).collect())
            .collect();
        if degenerate(&ind) {
            return None;
        }
        out = out.min(ess_raw(&ind));
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub ess_bulk: Option<f64>,
    pub ess_tail: Option<f64>,
    pub rhat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub n_chains: usize,
    pub n_draws: usize,
    pub params: Vec<ParamDiagnostics>,
    /// Acceptance rates averaged over chains.
    pub accept_rates: BTreeMap<String, f64>,
    pub divergences: usize,
    pub max_depth_hits: usize,
    pub nan_accept_probs: usize,
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    pub fn param(&self, name: &str) -> Option<&ParamDiagnostics> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Largest R̂ over parameters whose name satisfies `filter`.
    pub fn max_rhat(&self, filter: impl Fn(&str) -> bool) -> Option<f64> {
        self.params
            .iter()
            .filter(|p| filter(&p.name))
            .filter_map(|p| p.rhat)
            .reduce(f64::max)
    }
}

pub fn diagnose(chains: &[ChainOutput]) -> DiagnosticsReport {
    let names = chains.first().map(|c| c.names.clone()).unwrap_or_default();
    let params = names
        .iter()
        .enumerate()
        .map(|(p, name)| {
            let cols: Vec<&[f64]> = chains.iter().map(|c| c.draws[p].as_slice()).collect();
            let all = cols.concat();
            ParamDiagnostics {
                name: name.clone(),
                mean: stats::mean(&all),
                sd: stats::variance(&all, 1).sqrt(),
                ess_bulk: ess_bulk(&cols),
                ess_tail: ess_tail(&cols),
                rhat: rhat(&cols),
            }
        })
        .collect();
    let mut accept_rates: BTreeMap<String, f64> = BTreeMap::new();
    for c in chains {
        for (k, v) in &c.accept_rates {
            *accept_rates.entry(k.clone()).or_default() += v / chains.len() as f64;
        }
    }
    DiagnosticsReport {
        n_chains: chains.len(),
        n_draws: chains.iter().map(|c| c.n_draws()).sum(),
        params,
        accept_rates,
        divergences: chains.iter().map(|c| c.divergences).sum(),
        max_depth_hits: chains.iter().map(|c| c.max_depth_hits).sum(),
        nan_accept_probs: chains.iter().map(|c| c.nan_accept_probs).sum(),
        notes: chains
            .iter()
            .flat_map(|c| {
                c.notes
                    .iter()
                    .map(move |n| format!("chain {}: {n}", c.chain))
            })
            .collect(),
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.digits$}"))
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} chains, {} draws", self.n_chains, self.n_draws)?;
        writeln!(
            f,
            "{:<32} {:>10} {:>10} {:>9} {:>9} {:>7}",
            "parameter", "mean", "sd", "ess_bulk", "ess_tail", "rhat"
        )?;
        for p in &self.params {
            writeln!(
                f,
                "{:<32} {:>10.4} {:>10.4} {:>9} {:>9} {:>7}",
                p.name,
                p.mean,
                p.sd,
                opt(p.ess_bulk, 0),
                opt(p.ess_tail, 0),
                opt(p.rhat, 3)
            )?;
        }
        for (k, v) in &self.accept_rates {
            writeln!(f, "acceptance {k}: {v:.3}")?;
        }
        write!(
            f,
            "divergences: {}, max-depth hits: {}, NaN acceptance probabilities: {}",
            self.divergences, self.max_depth_hits, self.nan_accept_probs
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn iid(m: usize, n: usize, seed: u64, shift: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|c| {
                (0..n)
                    .map(|_| shift(c) + rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect()
    }

    fn refs(c: &[Vec<f64>]) -> Vec<&[f64]> {
        c.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn autocov_matches_direct_sum() {
        let x = [1.0, 3.0, -2.0, 0.5, 4.0, 2.2, -1.0];
        let m = stats::mean(&x);
        let a = autocov(&x);
        for t in 0..x.len() {
            let direct: f64 = (0..x.len() - t)
                .map(|i| (x[i] - m) * (x[i + t] - m))
                .sum::<f64>()
                / x.len() as f64;
            assert!((a[t] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_chains() {
        let c = iid(4, 2000, 1, |_| 0.0);
        let total = 8000.0;
        for ess in [ess_bulk(&refs(&c)).unwrap(), ess_tail(&refs(&c)).unwrap()] {
            assert!(ess > 0.8 * total && ess < 1.2 * total, "{ess}");
        }
        assert!(rhat(&refs(&c)).unwrap() < 1.01);
    }

    #[test]
    fn ar1_chain() {
        let rho: f64 = 0.9;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let mut x = rng.sample::<f64, _>(StandardNormal) / (1.0 - rho * rho).sqrt();
                (0..5000)
                    .map(|_| {
                        x = rho * x + rng.sample::<f64, _>(StandardNormal);
                        x
                    })
                    .collect()
            })
            .collect();
        let want = 20000.0 * (1.0 - rho) / (1.0 + rho);
        let got = ess_bulk(&refs(&chains)).unwrap();
        assert!((got / want - 1.0).abs() < 0.25, "{got} vs {want}");
    }

    #[test]
    fn separated_chains_and_degenerate_input() {
        let c = iid(2, 1000, 3, |c| 3.0 * c as f64);
        assert!(rhat(&refs(&c)).unwrap() > 1.5);
        let constant = vec![vec![2.0; 100]; 2];
        assert!(rhat(&refs(&constant)).is_none() && ess_bulk(&refs(&constant)).is_none());
        assert!(ess_tail(&refs(&constant)).is_none());
        // a single chain is split into two halves
        let one = iid(1, 1000, 4, |_| 0.0);
        assert!(rhat(&refs(&one)).unwrap() < 1.02);
        let drift: Vec<f64> = (0..1000).map(|i| i as f64 / 100.0 + one[0][i]).collect();
        assert!(rhat(&[&drift]).unwrap() > 1.5);
    }
}
