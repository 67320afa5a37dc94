//! No-U-turn sampler with multinomial trajectory sampling and a diagonal
//! metric.

use rand::Rng;
use rand_distr::StandardNormal;

use super::adapt::{DualAveraging, WindowedAdaptation};

/// Energy error above which a trajectory is flagged divergent.
pub const MAX_DELTA_H: f64 = 1000.0;

/// Differentiable log density. Returning `-inf` marks a point as outside
/// the support; the sampler treats it as a divergence.
pub trait LogDensity {
    fn dim(&self) -> usize;
    fn logp_grad(&self, q: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NutsSettings {
    pub max_depth: usize,
    pub target_accept: f64,
    /// Replace NUTS by HMC with this many leapfrog steps.
    pub fixed_leapfrog: Option<usize>,
}

impl Default for NutsSettings {
    fn default() -> Self {
        Self {
            max_depth: 10,
            target_accept: 0.9,
            fixed_leapfrog: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransitionStats {
    pub accept_stat: f64,
    pub n_leapfrog: usize,
    pub depth: usize,
    pub divergent: bool,
    pub max_depth_hit: bool,
}

#[derive(Debug, Clone)]
struct Point {
    q: Vec<f64>,
    p: Vec<f64>,
    grad: Vec<f64>,
    logp: f64,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

struct Trajectory<'a, T: LogDensity, R: Rng> {
    target: &'a T,
    inv_mass: &'a [f64],
    eps: f64,
    h0: f64,
    n_leapfrog: usize,
    sum_metro: f64,
    divergent: bool,
    rng: &'a mut R,
}

impl<T: LogDensity, R: Rng> Trajectory<'_, T, R> {
    fn hamiltonian(&self, z: &Point) -> f64 {
        let k: f64 = z.p.iter().zip(self.inv_mass).map(|(p, m)| p * p * m).sum();
        let h = -z.logp + 0.5 * k;
        if h.is_nan() {
            f64::INFINITY
        } else {
            h
        }
    }

    fn p_sharp(&self, z: &Point) -> Vec<f64> {
        z.p.iter().zip(self.inv_mass).map(|(p, m)| p * m).collect()
    }

    fn leapfrog(&mut self, z: &mut Point, eps: f64) {
        let d = z.q.len();
        for i in 0..d {
            z.p[i] += 0.5 * eps * z.grad[i];
        }
        for i in 0..d {
            z.q[i] += eps * self.inv_mass[i] * z.p[i];
        }
        z.logp = self.target.logp_grad(&z.q, &mut z.grad);
        if z.logp.is_finite() {
            for i in 0..d {
                z.p[i] += 0.5 * eps * z.grad[i];
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        &mut self,
        depth: usize,
        z: &mut Point,
        z_propose: &mut Point,
        p_sharp_beg: &mut Vec<f64>,
        p_sharp_end: &mut Vec<f64>,
        rho: &mut Vec<f64>,
        p_beg: &mut Vec<f64>,
        p_end: &mut Vec<f64>,
        sign: f64,
        log_sum_weight: &mut f64,
    ) -> bool {
        if depth == 0 {
            self.leapfrog(z, sign * self.eps);
            self.n_leapfrog += 1;
            let h = self.hamiltonian(z);
            if h - self.h0 > MAX_DELTA_H {
                self.divergent = true;
            }
            *log_sum_weight = log_add(*log_sum_weight, self.h0 - h);
            self.sum_metro += if self.h0 - h > 0.0 {
                1.0
            } else {
                (self.h0 - h).exp()
            };
            *z_propose = z.clone();
            *p_sharp_beg = self.p_sharp(z);
            *p_sharp_end = p_sharp_beg.clone();
            *rho = add(rho, &z.p);
            *p_beg = z.p.clone();
            *p_end = p_beg.clone();
            return !self.divergent;
        }
        let dim = z.q.len();
        let mut lsw_init = f64::NEG_INFINITY;
        let mut p_init_end = vec![0.0; dim];
        let mut p_sharp_init_end = vec![0.0; dim];
        let mut rho_init = vec![0.0; dim];
        if !self.build(
            depth - 1,
            z,
            z_propose,
            p_sharp_beg,
            &mut p_sharp_init_end,
            &mut rho_init,
            p_beg,
            &mut p_init_end,
            sign,
            &mut lsw_init,
        ) {
            return false;
        }
        let mut z_propose_final = z.clone();
        let mut lsw_final = f64::NEG_INFINITY;
        let mut p_final_beg = vec![0.0; dim];
        let mut p_sharp_final_beg = vec![0.0; dim];
        let mut rho_final = vec![0.0; dim];
        if !self.build(
            depth - 1,
            z,
            &mut z_propose_final,
            &mut p_sharp_final_beg,
            p_sharp_end,
            &mut rho_final,
            &mut p_final_beg,
            p_end,
            sign,
            &mut lsw_final,
        ) {
            return false;
        }
        let lsw_subtree = log_add(lsw_init, lsw_final);
        *log_sum_weight = log_add(*log_sum_weight, lsw_subtree);
        if lsw_final > lsw_subtree || self.rng.random::<f64>() < (lsw_final - lsw_subtree).exp() {
            *z_propose = z_propose_final;
        }
        let rho_subtree = add(&rho_init, &rho_final);
        *rho = add(rho, &rho_subtree);
        let mut persist = uturn_ok(p_sharp_beg, p_sharp_end, &rho_subtree);
        persist &= uturn_ok(
            p_sharp_beg,
            &p_sharp_final_beg,
            &add(&rho_init, &p_final_beg),
        );
        persist &= uturn_ok(
            &p_sharp_init_end,
            p_sharp_end,
            &add(&rho_final, &p_init_end),
        );
        persist
    }
}

fn uturn_ok(p_sharp_minus: &[f64], p_sharp_plus: &[f64], rho: &[f64]) -> bool {
    dot(p_sharp_plus, rho) > 0.0 && dot(p_sharp_minus, rho) > 0.0
}

/// One NUTS transition from `q`. Returns the new position and its log density.
pub fn transition<T: LogDensity, R: Rng>(
    target: &T,
    q: &[f64],
    eps: f64,
    inv_mass: &[f64],
    max_depth: usize,
    rng: &mut R,
) -> (Vec<f64>, f64, TransitionStats) {
    let dim = q.len();
    let mut grad = vec![0.0; dim];
    let logp = target.logp_grad(q, &mut grad);
    let p: Vec<f64> = inv_mass
        .iter()
        .map(|m| rng.sample::<f64, _>(StandardNormal) / m.sqrt())
        .collect();
    let z0 = Point {
        q: q.to_vec(),
        p: p.clone(),
        grad,
        logp,
    };
    let mut tr = Trajectory {
        target,
        inv_mass,
        eps,
        h0: 0.0,
        n_leapfrog: 0,
        sum_metro: 0.0,
        divergent: false,
        rng,
    };
    tr.h0 = tr.hamiltonian(&z0);
    if !tr.h0.is_finite() {
        return (
            q.to_vec(),
            logp,
            TransitionStats {
                divergent: true,
                ..Default::default()
            },
        );
    }
    let p_sharp = tr.p_sharp(&z0);
    let (mut z_fwd, mut z_bck) = (z0.clone(), z0.clone());
    let mut z_sample = z0.clone();
    let mut z_propose = z0.clone();
    let (mut p_fwd_fwd, mut p_fwd_bck, mut p_bck_fwd, mut p_bck_bck) =
        (p.clone(), p.clone(), p.clone(), p.clone());
    let (mut ps_fwd_fwd, mut ps_fwd_bck, mut ps_bck_fwd, mut ps_bck_bck) =
        (p_sharp.clone(), p_sharp.clone(), p_sharp.clone(), p_sharp);
    let mut rho = p;
    let mut log_sum_weight = 0.0;
    let mut depth = 0;
    while depth < max_depth {
        let mut rho_fwd = vec![0.0; dim];
        let mut rho_bck = vec![0.0; dim];
        let mut lsw_subtree = f64::NEG_INFINITY;
        let valid = if tr.rng.random::<f64>() < 0.5 {
            rho_bck = rho.clone();
            p_bck_fwd = p_fwd_bck.clone();
            ps_bck_fwd = ps_fwd_bck.clone();
            let mut z = z_fwd.clone();
            let ok = tr.build(
                depth,
                &mut z,
                &mut z_propose,
                &mut ps_fwd_bck,
                &mut ps_fwd_fwd,
                &mut rho_fwd,
                &mut p_fwd_bck,
                &mut p_fwd_fwd,
                1.0,
                &mut lsw_subtree,
            );
            z_fwd = z;
            ok
        } else {
            rho_fwd = rho.clone();
            p_fwd_bck = p_bck_fwd.clone();
            ps_fwd_bck = ps_bck_fwd.clone();
            let mut z = z_bck.clone();
            let ok = tr.build(
                depth,
                &mut z,
                &mut z_propose,
                &mut ps_bck_fwd,
                &mut ps_bck_bck,
                &mut rho_bck,
                &mut p_bck_fwd,
                &mut p_bck_bck,
                -1.0,
                &mut lsw_subtree,
            );
            z_bck = z;
            ok
        };
        if !valid {
            break;
        }
        depth += 1;
        if lsw_subtree > log_sum_weight
            || tr.rng.random::<f64>() < (lsw_subtree - log_sum_weight).exp()
        {
            z_sample = z_propose.clone();
        }
        log_sum_weight = log_add(log_sum_weight, lsw_subtree);
        rho = add(&rho_bck, &rho_fwd);
        let mut persist = uturn_ok(&ps_bck_bck, &ps_fwd_fwd, &rho);
        persist &= uturn_ok(&ps_bck_bck, &ps_fwd_bck, &add(&rho_bck, &p_fwd_bck));
        persist &= uturn_ok(&ps_bck_fwd, &ps_fwd_fwd, &add(&rho_fwd, &p_bck_fwd));
        if !persist {
            break;
        }
    }
    let stats = TransitionStats {
        accept_stat: if tr.n_leapfrog > 0 {
            tr.sum_metro / tr.n_leapfrog as f64
        } else {
            0.0
        },
        n_leapfrog: tr.n_leapfrog,
        depth,
        divergent: tr.divergent,
        max_depth_hit: depth >= max_depth,
    };
    (z_sample.q, z_sample.logp, stats)
}

/// `n_steps` leapfrog steps from `(q, p)` under a diagonal inverse metric.
pub fn leapfrog<T: LogDensity>(
    target: &T,
    q: &[f64],
    p: &[f64],
    eps: f64,
    n_steps: usize,
    inv_mass: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let (mut q, mut p) = (q.to_vec(), p.to_vec());
    let mut grad = vec![0.0; q.len()];
    target.logp_grad(&q, &mut grad);
    for _ in 0..n_steps {
        for i in 0..q.len() {
            p[i] += 0.5 * eps * grad[i];
            q[i] += eps * inv_mass[i] * p[i];
        }
        target.logp_grad(&q, &mut grad);
        for i in 0..q.len() {
            p[i] += 0.5 * eps * grad[i];
        }
    }
    (q, p)
}

/// Static HMC transition with `n_steps` leapfrog steps.
pub fn hmc_transition<T: LogDensity, R: Rng>(
    target: &T,
    q: &[f64],
    eps: f64,
    inv_mass: &[f64],
    n_steps: usize,
    rng: &mut R,
) -> (Vec<f64>, f64, TransitionStats) {
    let dim = q.len();
    let mut grad = vec![0.0; dim];
    let logp = target.logp_grad(q, &mut grad);
    let p: Vec<f64> = inv_mass
        .iter()
        .map(|m| rng.sample::<f64, _>(StandardNormal) / m.sqrt())
        .collect();
    let mut z = Point {
        q: q.to_vec(),
        p,
        grad,
        logp,
    };
    let mut tr = Trajectory {
        target,
        inv_mass,
        eps,
        h0: 0.0,
        n_leapfrog: 0,
        sum_metro: 0.0,
        divergent: false,
        rng,
    };
    tr.h0 = tr.hamiltonian(&z);
    for _ in 0..n_steps {
        tr.leapfrog(&mut z, eps);
        if !z.logp.is_finite() {
            break;
        }
    }
    let dh = tr.h0 - tr.hamiltonian(&z);
    let accept = if dh.is_nan() { 0.0 } else { dh.exp().min(1.0) };
    let stats = TransitionStats {
        accept_stat: accept,
        n_leapfrog: n_steps,
        depth: 0,
        divergent: -dh > MAX_DELTA_H,
        max_depth_hit: false,
    };
    if tr.rng.random::<f64>() < accept {
        (z.q, z.logp, stats)
    } else {
        (q.to_vec(), logp, stats)
    }
}

/// Initial step size by repeated halving or doubling until the one-step
/// acceptance crosses one half.
pub fn find_initial_step<T: LogDensity, R: Rng>(
    target: &T,
    q: &[f64],
    inv_mass: &[f64],
    rng: &mut R,
) -> f64 {
    let dim = q.len();
    let mut grad = vec![0.0; dim];
    let logp = target.logp_grad(q, &mut grad);
    if !logp.is_finite() {
        return 0.1;
    }
    let p: Vec<f64> = inv_mass
        .iter()
        .map(|m| rng.sample::<f64, _>(StandardNormal) / m.sqrt())
        .collect();
    let z0 = Point {
        q: q.to_vec(),
        p,
        grad,
        logp,
    };
    let mut tr = Trajectory {
        target,
        inv_mass,
        eps: 1.0,
        h0: 0.0,
        n_leapfrog: 0,
        sum_metro: 0.0,
        divergent: false,
        rng,
    };
    let h0 = tr.hamiltonian(&z0);
    let one_step = |tr: &mut Trajectory<'_, T, R>, eps: f64| {
        let mut z = z0.clone();
        tr.leapfrog(&mut z, eps);
        let dh = h0 - tr.hamiltonian(&z);
        if dh.is_nan() {
            f64::NEG_INFINITY
        } else {
            dh
        }
    };
    let mut eps = 1.0;
    let mut dh = one_step(&mut tr, eps);
    let direction = if dh > (0.5f64).ln() { 1.0 } else { -1.0 };
    for _ in 0..100 {
        if direction * dh <= direction * (0.5f64).ln() {
            break;
        }
        eps *= 2f64.powf(direction);
        if !(1e-10..=1e7).contains(&eps) {
            break;
        }
        dh = one_step(&mut tr, eps);
    }
    eps
}

/// Stateful NUTS kernel with warmup adaptation of step size and diagonal
/// inverse metric.
#[derive(Debug, Clone)]
pub struct NutsKernel {
    pub settings: NutsSettings,
    pub eps: f64,
    pub inv_mass: Vec<f64>,
    dual: DualAveraging,
    windows: WindowedAdaptation,
    initialized: bool,
}

impl NutsKernel {
    pub fn new(dim: usize, n_warmup: usize, settings: NutsSettings) -> Self {
        Self {
            settings,
            eps: 1.0,
            inv_mass: vec![1.0; dim],
            dual: DualAveraging::new(settings.target_accept, 1.0),
            windows: WindowedAdaptation::new(dim, n_warmup),
            initialized: false,
        }
    }

    fn init<T: LogDensity, R: Rng>(&mut self, target: &T, q: &[f64], rng: &mut R) {
        self.eps = find_initial_step(target, q, &self.inv_mass, rng);
        self.dual.restart(self.eps);
        self.initialized = true;
    }

    /// One transition; adapts when `adapt` is set.
    pub fn step<T: LogDensity, R: Rng>(
        &mut self,
        target: &T,
        q: &[f64],
        adapt: bool,
        rng: &mut R,
    ) -> (Vec<f64>, TransitionStats) {
        if !self.initialized {
            self.init(target, q, rng);
        }
        let (next, _, stats) = match self.settings.fixed_leapfrog {
            Some(l) => hmc_transition(target, q, self.eps, &self.inv_mass, l, rng),
            None => transition(
                target,
                q,
                self.eps,
                &self.inv_mass,
                self.settings.max_depth,
                rng,
            ),
        };
        if adapt {
            self.eps = self.dual.update(stats.accept_stat);
            if let Some(var) = self.windows.observe(&next) {
                self.inv_mass = var;
                self.init(target, &next, rng);
            }
        }
        (next, stats)
    }

    /// Freeze the step size at its averaged value.
    pub fn end_warmup(&mut self) {
        if self.initialized {
            self.eps = self.dual.final_step();
        }
    }
}
