//! Monotone spline transformation `h(r | δ)`.
//!
//! On the core `[a, b]` the transformation is an integrated cubic B-spline
//! with cumulative-exponential coefficients, rescaled so its average slope is
//! one and anchored so that `h(a) = a` and `h(b) = b`. Outside the core it
//! continues through quadratic transition segments of width `λ` into
//! unit-slope tails, or through one of the two limiting tail modes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};
use crate::normal::Reference;
use crate::splinecore::{
    cubic_unchecked, quadratic_unchecked, BasisRow, GridBasis, InterpRow, KnotGrid, RowOps,
};

const BISECT_WIDTH: f64 = 1e-6;
const NEWTON_TOL: f64 = 1e-10;
const MAX_ROOT_ITERS: usize = 200;

/// Behaviour of `h` outside `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Extrapolation {
    /// Quadratic transitions of width `lambda` into unit-slope linear tails.
    Transition { lambda: f64 },
    /// Limit `λ → 0`: identity outside the core.
    Identity,
    /// Limit `λ → ∞`: linear continuation with the boundary slopes.
    Linear,
}

/// How basis rows are produced when evaluating `h`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisPath {
    /// Cox-de Boor evaluation at every point.
    Exact,
    /// Linear interpolation in a precomputed grid of rows.
    #[default]
    Grid,
}

/// Serializable description of a transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub a: f64,
    pub b: f64,
    /// Length of δ, i.e. `J - 1`.
    pub n_params: usize,
    pub extrapolation: Extrapolation,
    #[serde(default)]
    pub path: BasisPath,
}

impl TransformSpec {
    /// Core `[-4, 4]`, 30 parameters, transition width `0.1 (b - a)`.
    pub fn default_spec() -> Self {
        Self {
            a: -4.0,
            b: 4.0,
            n_params: 30,
            extrapolation: Extrapolation::Transition { lambda: 0.8 },
            path: BasisPath::Grid,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransformConfig {
    grid: KnotGrid,
    extrapolation: Extrapolation,
    path: BasisPath,
    basis: Arc<GridBasis>,
    // coefficients of e^δ in the average slope
    slope_weights: Vec<f64>,
    reference: Reference,
}

impl TransformConfig {
    pub fn new(a: f64, b: f64, n_params: usize, extrapolation: Extrapolation) -> Result<Self> {
        let grid = KnotGrid::new(a, b, n_params + 1)?;
        if let Extrapolation::Transition { lambda } = extrapolation {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(PtmError::InvalidGeometry(format!(
                    "transition width must be positive, got {lambda}"
                )));
            }
        }
        let j = grid.n_bases();
        let mut slope_weights = vec![0.0; j - 1];
        let norm = 1.0 / (6.0 * (b - a));
        for seg in 0..grid.n_segments() {
            slope_weights[seg] += norm;
            slope_weights[seg + 1] += 4.0 * norm;
            slope_weights[seg + 2] += norm;
        }
        let basis = Arc::new(GridBasis::new(&grid));
        Ok(Self {
            grid,
            extrapolation,
            path: BasisPath::Grid,
            basis,
            slope_weights,
            reference: Reference::StandardNormal,
        })
    }

    /// Transition mode with the default width `0.1 (b - a)`.
    pub fn with_default_lambda(a: f64, b: f64, n_params: usize) -> Result<Self> {
        Self::new(
            a,
            b,
            n_params,
            Extrapolation::Transition {
                lambda: 0.1 * (b - a),
            },
        )
    }

    pub fn from_spec(spec: &TransformSpec) -> Result<Self> {
        Ok(Self::new(spec.a, spec.b, spec.n_params, spec.extrapolation)?.with_path(spec.path))
    }

    pub fn spec(&self) -> TransformSpec {
        TransformSpec {
            a: self.a(),
            b: self.b(),
            n_params: self.n_params(),
            extrapolation: self.extrapolation,
            path: self.path,
        }
    }

    pub fn with_path(mut self, path: BasisPath) -> Self {
        self.path = path;
        self
    }

    pub fn grid(&self) -> &KnotGrid {
        &self.grid
    }

    pub fn path(&self) -> BasisPath {
        self.path
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }

    pub fn a(&self) -> f64 {
        self.grid.a()
    }

    pub fn b(&self) -> f64 {
        self.grid.b()
    }

    /// Number of δ parameters (`J - 1`).
    pub fn n_params(&self) -> usize {
        self.grid.n_bases() - 1
    }

    /// Transition width, `None` for the limiting modes.
    pub fn lambda(&self) -> Option<f64> {
        match self.extrapolation {
            Extrapolation::Transition { lambda } => Some(lambda),
            _ => None,
        }
    }

    /// Interval outside of which `h` is exactly linear.
    pub fn support_of_curvature(&self) -> (f64, f64) {
        let l = self.lambda().unwrap_or(0.0);
        (self.a() - l, self.b() + l)
    }

    pub fn params(&self, delta: &[f64]) -> Result<TransformParams> {
        TransformParams::new(delta, self)
    }

    #[inline]
    fn cubic(&self, r: f64) -> CubicAt {
        match self.path {
            BasisPath::Exact => CubicAt::Exact(cubic_unchecked(r, &self.grid)),
            BasisPath::Grid => CubicAt::Grid(self.basis.cubic_at(r)),
        }
    }

    #[inline]
    fn quadratic(&self, r: f64) -> QuadAt {
        match self.path {
            BasisPath::Exact => QuadAt::Exact(quadratic_unchecked(r, &self.grid)),
            BasisPath::Grid => QuadAt::Grid(self.basis.quadratic_at(r)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum CubicAt {
    Exact(BasisRow<4>),
    Grid(InterpRow<4>),
}

#[derive(Debug, Clone, Copy)]
enum QuadAt {
    Exact(BasisRow<3>),
    Grid(InterpRow<3>),
}

macro_rules! row_ops_enum {
    ($t:ty) => {
        impl RowOps for $t {
            #[inline]
            fn dot(&self, coef: &[f64]) -> f64 {
                match self {
                    Self::Exact(r) => r.dot(coef),
                    Self::Grid(r) => r.dot(coef),
                }
            }
            #[inline]
            fn scatter(&self, acc: &mut [f64], scale: f64) {
                match self {
                    Self::Exact(r) => r.scatter(acc, scale),
                    Self::Grid(r) => r.scatter(acc, scale),
                }
            }
        }
    };
}
row_ops_enum!(CubicAt);
row_ops_enum!(QuadAt);

/// Where a point falls relative to the core, with the rows needed later.
#[derive(Debug, Clone, Copy)]
enum Region {
    LeftTail,
    LeftTransition,
    Core {
        cubic: CubicAt,
        quad: QuadAt,
        v: f64,
    },
    RightTransition,
    RightTail,
}

/// Value, slope and log-slope of `h` at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointEval {
    pub r: f64,
    pub h: f64,
    pub dh: f64,
    pub ln_dh: f64,
    /// `h''(r) / h'(r)`, the derivative of `ln h'` in `r`.
    pub d_ln_dh: f64,
    region: Region,
}

/// Transformation for one parameter vector δ, with all δ-dependent
/// constants cached. Internally `e^δ` is stored relative to `max δ`, which
/// the transformation is invariant to.
#[derive(Debug, Clone)]
pub struct TransformParams {
    delta: Vec<f64>,
    shift: f64,
    // e_pad[0] = 0, e_pad[k + 1] = exp(δ_k - shift)
    e_pad: Vec<f64>,
    // cumulative sums: omega[j] = Σ_{q ≤ j} e_pad[q]
    omega: Vec<f64>,
    s: f64,
    ln_s: f64,
    ln_d: f64,
    alpha: f64,
    spline_a: f64,
    spline_b: f64,
    slope_a: f64,
    slope_b: f64,
    left_shift: f64,
    left_tail: f64,
    right_shift: f64,
    right_tail: f64,
    a: f64,
    b: f64,
    d: f64,
    extrapolation: Extrapolation,
}

impl TransformParams {
    pub fn new(delta: &[f64], cfg: &TransformConfig) -> Result<Self> {
        let n = cfg.n_params();
        if delta.len() != n {
            return Err(PtmError::ShapeMismatch {
                expected: n,
                got: delta.len(),
            });
        }
        if let Some(row) = delta.iter().position(|x| !x.is_finite()) {
            return Err(PtmError::NonFinite {
                row,
                what: "delta".into(),
            });
        }
        let shift = delta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut e_pad = Vec::with_capacity(n + 1);
        e_pad.push(0.0);
        e_pad.extend(delta.iter().map(|&x| (x - shift).exp()));
        let mut omega = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        for &e in &e_pad {
            acc += e;
            omega.push(acc);
        }
        let s: f64 = cfg
            .slope_weights
            .iter()
            .zip(&e_pad[1..])
            .map(|(w, e)| w * e)
            .sum();
        let (a, b) = (cfg.a(), cfg.b());
        let d = cfg.grid.spacing();
        let u_a = cfg.cubic(a).dot(&omega);
        let alpha = a - u_a / s;
        let spline_a = alpha + u_a / s;
        let spline_b = alpha + cfg.cubic(b).dot(&omega) / s;
        let slope_a = cfg.quadratic(a).dot(&e_pad) / (d * s);
        let slope_b = cfg.quadratic(b).dot(&e_pad) / (d * s);
        let mut p = Self {
            delta: delta.to_vec(),
            shift,
            e_pad,
            omega,
            s,
            ln_s: s.ln(),
            ln_d: d.ln(),
            alpha,
            spline_a,
            spline_b,
            slope_a,
            slope_b,
            left_shift: 0.0,
            left_tail: 0.0,
            right_shift: 0.0,
            right_tail: 0.0,
            a,
            b,
            d,
            extrapolation: cfg.extrapolation,
        };
        if let Extrapolation::Transition { lambda } = cfg.extrapolation {
            p.left_shift = spline_a - p.left(a, lambda);
            p.left_tail = p.left(a - lambda, lambda) - (a - lambda) + p.left_shift;
            p.right_shift = spline_b - p.right(b, lambda);
            p.right_tail = p.right(b + lambda, lambda) - (b + lambda) + p.right_shift;
        }
        Ok(p)
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Average slope `s(δ)` of the un-normalized core spline.
    pub fn average_slope(&self) -> f64 {
        self.s * self.shift.exp()
    }

    /// `h'(a)`.
    pub fn slope_a(&self) -> f64 {
        self.slope_a
    }

    /// `h'(b)`.
    pub fn slope_b(&self) -> f64 {
        self.slope_b
    }

    /// Intercept `α = a - g(a)` of the core spline.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    fn left(&self, r: f64, lambda: f64) -> f64 {
        let w = (self.a - 0.5 * r) / lambda;
        r * w + r * (1.0 - w) * self.slope_a
    }

    #[inline]
    fn right(&self, r: f64, lambda: f64) -> f64 {
        let w = (0.5 * r - self.b) / lambda;
        r * w + r * (1.0 - w) * self.slope_b
    }

    // coefficient of slope_a in the left transition, net of the constant shift
    #[inline]
    fn left_sensitivity(&self, r: f64, lambda: f64) -> f64 {
        let a = self.a;
        r * (1.0 - (a - 0.5 * r) / lambda) - a * (1.0 - 0.5 * a / lambda)
    }

    #[inline]
    fn right_sensitivity(&self, r: f64, lambda: f64) -> f64 {
        let b = self.b;
        r * (1.0 - (0.5 * r - b) / lambda) - b * (1.0 + 0.5 * b / lambda)
    }

    #[inline]
    fn core_second(&self, r: f64) -> f64 {
        // exact quadratic-basis derivative, used only for the r-gradient
        let u = (r - self.a) / self.d;
        let last = self.e_pad.len() - 4;
        let seg = (u.floor().max(0.0) as usize).min(last);
        let t = u - seg as f64;
        let e = &self.e_pad[seg + 1..seg + 4];
        (-(1.0 - t) * e[0] + (1.0 - 2.0 * t) * e[1] + t * e[2]) / (self.d * self.d * self.s)
    }

    /// Evaluate `h`, `h'`, `ln h'` and `h''/h'` at `r`.
    pub fn eval(&self, cfg: &TransformConfig, r: f64) -> PointEval {
        let (a, b) = (self.a, self.b);
        if r < a {
            return match self.extrapolation {
                Extrapolation::Transition { lambda } => {
                    if r < a - lambda {
                        self.linear_point(r, r + self.left_tail, 1.0, Region::LeftTail)
                    } else {
                        let h = self.left(r, lambda) + self.left_shift;
                        let w = (a - r) / lambda;
                        let dh = w + self.slope_a * (1.0 - w);
                        PointEval {
                            r,
                            h,
                            dh,
                            ln_dh: dh.ln(),
                            d_ln_dh: (self.slope_a - 1.0) / lambda / dh,
                            region: Region::LeftTransition,
                        }
                    }
                }
                Extrapolation::Identity => self.linear_point(r, r, 1.0, Region::LeftTail),
                Extrapolation::Linear => self.linear_point(
                    r,
                    self.spline_a + self.slope_a * (r - a),
                    self.slope_a,
                    Region::LeftTail,
                ),
            };
        }
        if r > b {
            return match self.extrapolation {
                Extrapolation::Transition { lambda } => {
                    if r > b + lambda {
                        self.linear_point(r, r + self.right_tail, 1.0, Region::RightTail)
                    } else {
                        let h = self.right(r, lambda) + self.right_shift;
                        let w = (r - b) / lambda;
                        let dh = w + self.slope_b * (1.0 - w);
                        PointEval {
                            r,
                            h,
                            dh,
                            ln_dh: dh.ln(),
                            d_ln_dh: (1.0 - self.slope_b) / lambda / dh,
                            region: Region::RightTransition,
                        }
                    }
                }
                Extrapolation::Identity => self.linear_point(r, r, 1.0, Region::RightTail),
                Extrapolation::Linear => self.linear_point(
                    r,
                    self.spline_b + self.slope_b * (r - b),
                    self.slope_b,
                    Region::RightTail,
                ),
            };
        }
        let cubic = cfg.cubic(r);
        let quad = cfg.quadratic(r);
        let h = self.alpha + cubic.dot(&self.omega) / self.s;
        let v = quad.dot(&self.e_pad);
        let ln_v = if v > 1e-300 {
            v.ln()
        } else {
            self.ln_quad_dot(&quad)
        };
        let ln_dh = ln_v - self.ln_d - self.ln_s;
        let dh = ln_dh.exp();
        PointEval {
            r,
            h,
            dh,
            ln_dh,
            d_ln_dh: self.core_second(r) / dh,
            region: Region::Core { cubic, quad, v },
        }
    }

    fn linear_point(&self, r: f64, h: f64, dh: f64, region: Region) -> PointEval {
        PointEval {
            r,
            h,
            dh,
            ln_dh: dh.ln(),
            d_ln_dh: 0.0,
            region,
        }
    }

    // log of the quadratic-row dot product when it underflows
    fn ln_quad_dot(&self, quad: &QuadAt) -> f64 {
        let mut terms = Vec::with_capacity(6);
        let mut push = |row: &BasisRow<3>, scale: f64| {
            for k in 0..3 {
                let w = row.weights[k] * scale;
                let q = row.offset + k;
                if w > 0.0 && q >= 1 {
                    terms.push(w.ln() + self.delta[q - 1] - self.shift);
                }
            }
        };
        match quad {
            QuadAt::Exact(row) => push(row, 1.0),
            QuadAt::Grid(ir) => {
                push(&ir.lo, 1.0 - ir.t);
                push(&ir.hi, ir.t);
            }
        }
        log_sum_exp(&terms)
    }

    pub fn forward(&self, cfg: &TransformConfig, r: f64) -> f64 {
        self.eval(cfg, r).h
    }

    pub fn deriv(&self, cfg: &TransformConfig, r: f64) -> f64 {
        self.eval(cfg, r).dh
    }

    pub fn log_deriv(&self, cfg: &TransformConfig, r: f64) -> f64 {
        self.eval(cfg, r).ln_dh
    }

    pub fn forward_batch(&self, cfg: &TransformConfig, rs: &[f64]) -> Vec<f64> {
        rs.iter().map(|&r| self.forward(cfg, r)).collect()
    }

    pub fn deriv_batch(&self, cfg: &TransformConfig, rs: &[f64]) -> Vec<f64> {
        rs.iter().map(|&r| self.deriv(cfg, r)).collect()
    }

    /// Log density of `R` under the reference: `ln f_Z(h(r)) + ln h'(r)`.
    pub fn log_density(&self, cfg: &TransformConfig, r: f64) -> f64 {
        let ev = self.eval(cfg, r);
        cfg.reference.ln_pdf(ev.h) + ev.ln_dh
    }

    pub fn cdf(&self, cfg: &TransformConfig, r: f64) -> f64 {
        cfg.reference.cdf(self.forward(cfg, r))
    }

    /// Solve `h(r) = z`: closed form on the linear tails, otherwise
    /// bisection followed by a safeguarded Newton polish.
    pub fn inverse(&self, cfg: &TransformConfig, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return if z.is_nan() {
                Err(PtmError::Convergence(z))
            } else {
                Ok(z)
            };
        }
        let (a, b) = (self.a, self.b);
        let (mut lo, mut hi) = match self.extrapolation {
            Extrapolation::Transition { lambda } => {
                if z < a - lambda + self.left_tail {
                    return Ok(z - self.left_tail);
                }
                if z > b + lambda + self.right_tail {
                    return Ok(z - self.right_tail);
                }
                (a - lambda, b + lambda)
            }
            Extrapolation::Identity => {
                if z < a || z > b {
                    return Ok(z);
                }
                (a, b)
            }
            Extrapolation::Linear => {
                if z < self.spline_a {
                    return Ok(a + (z - self.spline_a) / self.slope_a);
                }
                if z > self.spline_b {
                    return Ok(b + (z - self.spline_b) / self.slope_b);
                }
                (a, b)
            }
        };
        let mut iters = 0;
        while hi - lo > BISECT_WIDTH {
            let mid = 0.5 * (lo + hi);
            if self.forward(cfg, mid) < z {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
        }
        let mut r = 0.5 * (lo + hi);
        while iters < MAX_ROOT_ITERS {
            let ev = self.eval(cfg, r);
            let f = ev.h - z;
            if f.abs() <= NEWTON_TOL {
                return Ok(r);
            }
            if f < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            if hi - lo <= 4.0 * f64::EPSILON * r.abs().max(1.0) {
                return Ok(r);
            }
            let step = r - f / ev.dh;
            r = if step > lo && step < hi {
                step
            } else {
                0.5 * (lo + hi)
            };
            iters += 1;
        }
        Err(PtmError::Convergence(z))
    }

    /// Add the δ-adjoint of one evaluated point, given the adjoints of the
    /// loss with respect to `h` and `ln h'` at that point.
    pub fn accumulate(&self, ev: &PointEval, g_h: f64, g_ln_dh: f64, acc: &mut DeltaAdjoint) {
        let r = ev.r;
        match (ev.region, self.extrapolation) {
            (Region::Core { cubic, quad, v }, _) => {
                let du = g_h / self.s;
                cubic.scatter(&mut acc.cubic, du);
                acc.u_sum += du;
                acc.s -= g_h * (ev.h - self.spline_a) / self.s;
                if g_ln_dh != 0.0 {
                    quad.scatter(&mut acc.quad, g_ln_dh / v);
                    acc.s -= g_ln_dh / self.s;
                }
            }
            (Region::LeftTransition, Extrapolation::Transition { lambda }) => {
                let w = (self.a - r) / lambda;
                acc.slope_a += g_h * self.left_sensitivity(r, lambda) + g_ln_dh * (1.0 - w) / ev.dh;
            }
            (Region::LeftTail, Extrapolation::Transition { lambda }) => {
                acc.slope_a += g_h * self.left_sensitivity(self.a - lambda, lambda);
            }
            (Region::RightTransition, Extrapolation::Transition { lambda }) => {
                let w = (r - self.b) / lambda;
                acc.spline_b += g_h;
                acc.slope_b +=
                    g_h * self.right_sensitivity(r, lambda) + g_ln_dh * (1.0 - w) / ev.dh;
            }
            (Region::RightTail, Extrapolation::Transition { lambda }) => {
                acc.spline_b += g_h;
                acc.slope_b += g_h * self.right_sensitivity(self.b + lambda, lambda);
            }
            (Region::LeftTail, Extrapolation::Linear) => {
                acc.slope_a += g_h * (r - self.a) + g_ln_dh / self.slope_a;
            }
            (Region::RightTail, Extrapolation::Linear) => {
                acc.spline_b += g_h;
                acc.slope_b += g_h * (r - self.b) + g_ln_dh / self.slope_b;
            }
            _ => {}
        }
    }

    /// Turn an accumulated adjoint into the gradient with respect to δ.
    pub fn finish(&self, cfg: &TransformConfig, mut acc: DeltaAdjoint) -> Vec<f64> {
        let ds = self.d * self.s;
        if acc.slope_a != 0.0 {
            cfg.quadratic(self.a)
                .scatter(&mut acc.quad, acc.slope_a / ds);
            acc.s -= acc.slope_a * self.slope_a / self.s;
        }
        if acc.slope_b != 0.0 {
            cfg.quadratic(self.b)
                .scatter(&mut acc.quad, acc.slope_b / ds);
            acc.s -= acc.slope_b * self.slope_b / self.s;
        }
        if acc.spline_b != 0.0 {
            let du = acc.spline_b / self.s;
            cfg.cubic(self.b).scatter(&mut acc.cubic, du);
            acc.u_sum += du;
            acc.s -= acc.spline_b * (self.spline_b - self.spline_a) / self.s;
        }
        cfg.cubic(self.a).scatter(&mut acc.cubic, -acc.u_sum);
        let n = self.delta.len();
        let mut grad = vec![0.0; n];
        let mut suffix = 0.0;
        for q in (1..=n).rev() {
            suffix += acc.cubic[q];
            let g_e = suffix + acc.quad[q] + acc.s * cfg.slope_weights[q - 1];
            grad[q - 1] = self.e_pad[q] * g_e;
        }
        grad
    }
}

/// Accumulator for reverse-mode gradients with respect to δ.
#[derive(Debug, Clone)]
pub struct DeltaAdjoint {
    cubic: Vec<f64>,
    quad: Vec<f64>,
    u_sum: f64,
    s: f64,
    slope_a: f64,
    slope_b: f64,
    spline_b: f64,
}

impl DeltaAdjoint {
    pub fn new(cfg: &TransformConfig) -> Self {
        let j = cfg.grid.n_bases();
        Self {
            cubic: vec![0.0; j],
            quad: vec![0.0; j],
            u_sum: 0.0,
            s: 0.0,
            slope_a: 0.0,
            slope_b: 0.0,
            spline_b: 0.0,
        }
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Average slope `s(δ)` of the un-normalized core spline on `[a, b]`.
pub fn average_slope(delta: &[f64], cfg: &TransformConfig) -> Result<f64> {
    Ok(cfg.params(delta)?.average_slope())
}

pub fn forward(r: f64, delta: &[f64], cfg: &TransformConfig) -> Result<f64> {
    Ok(cfg.params(delta)?.forward(cfg, r))
}

pub fn deriv(r: f64, delta: &[f64], cfg: &TransformConfig) -> Result<f64> {
    Ok(cfg.params(delta)?.deriv(cfg, r))
}

pub fn inverse(z: f64, delta: &[f64], cfg: &TransformConfig) -> Result<f64> {
    cfg.params(delta)?.inverse(cfg, z)
}
