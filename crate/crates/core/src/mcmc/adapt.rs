//! Step-size and metric adaptation during warmup.

/// Nesterov dual averaging of the log step size toward a target acceptance.
#[derive(Debug, Clone)]
pub struct DualAveraging {
    target: f64,
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    counter: f64,
    gamma: f64,
    t0: f64,
    kappa: f64,
}

impl DualAveraging {
    pub fn new(target: f64, eps0: f64) -> Self {
        Self {
            target,
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            counter: 0.0,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
        }
    }

    pub fn restart(&mut self, eps0: f64) {
        *self = Self::new(self.target, eps0);
    }

    /// Feed one acceptance statistic, returning the next step size.
    pub fn update(&mut self, accept: f64) -> f64 {
        let accept = if accept.is_nan() {
            0.0
        } else {
            accept.min(1.0)
        };
        self.counter += 1.0;
        let eta = 1.0 / (self.counter + self.t0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept);
        self.log_eps = self.mu - self.counter.sqrt() / self.gamma * self.h_bar;
        let w = self.counter.powf(-self.kappa);
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar;
        self.log_eps.exp()
    }

    /// Averaged step size used after warmup.
    pub fn final_step(&self) -> f64 {
        if self.counter == 0.0 {
            self.log_eps.exp()
        } else {
            self.log_eps_bar.exp()
        }
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone)]
pub struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn add(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for i in 0..x.len() {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn variance(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.m2.iter().map(|m| m / (n - 1.0)).collect()
    }

    pub fn reset(&mut self) {
        let d = self.mean.len();
        *self = Self::new(d);
    }
}

/// Warmup schedule: a fast initial buffer, doubling slow windows in which
/// the diagonal metric is estimated, and a fast terminal buffer.
#[derive(Debug, Clone)]
pub struct WindowedAdaptation {
    n_warmup: usize,
    init_buffer: usize,
    term_buffer: usize,
    window_size: usize,
    next_window: usize,
    counter: usize,
    enabled: bool,
    estimator: Welford,
}

impl WindowedAdaptation {
    pub fn new(dim: usize, n_warmup: usize) -> Self {
        let (mut init, mut term, mut base) = (75, 50, 25);
        let enabled = n_warmup >= 20;
        if enabled && init + term + base > n_warmup {
            init = (0.15 * n_warmup as f64) as usize;
            term = (0.1 * n_warmup as f64) as usize;
            base = n_warmup - init - term;
        }
        Self {
            n_warmup,
            init_buffer: init,
            term_buffer: term,
            window_size: base,
            next_window: init + base - 1,
            counter: 0,
            enabled,
            estimator: Welford::new(dim),
        }
    }

    fn in_window(&self) -> bool {
        self.counter >= self.init_buffer
            && self.counter < self.n_warmup - self.term_buffer
            && self.counter != self.n_warmup
    }

    fn at_window_end(&self) -> bool {
        self.counter == self.next_window && self.counter != self.n_warmup
    }

    fn compute_next_window(&mut self) {
        let last = self.n_warmup - self.term_buffer - 1;
        if self.next_window == last {
            return;
        }
        self.window_size *= 2;
        self.next_window = self.counter + self.window_size;
        if self.next_window != last
            && self.next_window + 2 * self.window_size >= self.n_warmup - self.term_buffer
        {
            self.next_window = last;
        }
    }

    /// Record a warmup draw. Returns a new inverse metric at window ends.
    pub fn observe(&mut self, q: &[f64]) -> Option<Vec<f64>> {
        if !self.enabled {
            self.counter += 1;
            return None;
        }
        if self.in_window() {
            self.estimator.add(q);
        }
        if self.at_window_end() {
            self.compute_next_window();
            let n = self.estimator.count() as f64;
            let var = self
                .estimator
                .variance()
                .into_iter()
                .map(|v| (n / (n + 5.0)) * v + 1e-3 * (5.0 / (n + 5.0)))
                .collect();
            self.estimator.reset();
            self.counter += 1;
            return Some(var);
        }
        self.counter += 1;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_averaging_converges() {
        // acceptance falls off with step size as exp(-eps)
        let mut da = DualAveraging::new(0.6, 1.0);
        let mut eps = 1.0;
        for _ in 0..3000 {
            let accept = (-eps as f64).exp();
            eps = da.update(accept);
        }
        let target = -(0.6f64).ln();
        assert!(
            (da.final_step() - target).abs() < 0.02,
            "{}",
            da.final_step()
        );
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -1.0, 3.0];
        let mut w = Welford::new(1);
        for x in xs {
            w.add(&[x]);
        }
        assert!((w.variance()[0] - crate::stats::variance(&xs, 1)).abs() < 1e-12);
    }

    #[test]
    fn windows_update_metric() {
        let mut w = WindowedAdaptation::new(1, 1000);
        let mut ends = Vec::new();
        for i in 0..1000 {
            if w.observe(&[i as f64 % 7.0]).is_some() {
                ends.push(i);
            }
        }
        assert_eq!(ends, vec![99, 149, 249, 449, 949]);
        let mut small = WindowedAdaptation::new(1, 10);
        assert!((0..10).all(|_| small.observe(&[0.0]).is_none()));
    }
}
