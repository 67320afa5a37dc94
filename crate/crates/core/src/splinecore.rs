//! Equidistant B-spline bases on a bounded core interval.
//!
//! Knots `k_{-2}, ..., k_{J+1}` are placed with `k_1 = a` and `k_{J-2} = b`,
//! so `J` cubic bases are active on `[a, b]`, which is split into `J - 3`
//! segments. Quadratic bases use the index of their parent cubic basis, which
//! leaves quadratic basis 0 identically zero on the core.

use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};

/// Number of points in the precomputed basis grid.
pub const GRID_POINTS: usize = 1000;

/// Knot geometry of an equidistant cubic B-spline basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotGrid {
    a: f64,
    b: f64,
    n_bases: usize,
    spacing: f64,
}

impl KnotGrid {
    /// Knot grid for the transformation core: needs at least 5 bases.
    pub fn new(a: f64, b: f64, n_bases: usize) -> Result<Self> {
        if n_bases < 5 {
            return Err(PtmError::InvalidGeometry(format!(
                "need at least 5 bases, got {n_bases}"
            )));
        }
        Self::build(a, b, n_bases)
    }

    /// Knot grid for a covariate P-spline, where 4 bases (one segment) suffice.
    pub fn for_covariate(lo: f64, hi: f64, n_bases: usize) -> Result<Self> {
        if n_bases < 4 {
            return Err(PtmError::InvalidGeometry(format!(
                "need at least 4 bases, got {n_bases}"
            )));
        }
        Self::build(lo, hi, n_bases)
    }

    fn build(a: f64, b: f64, n_bases: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(PtmError::InvalidGeometry(format!(
                "require a < b, got a={a}, b={b}"
            )));
        }
        let spacing = (b - a) / (n_bases - 3) as f64;
        Ok(Self {
            a,
            b,
            n_bases,
            spacing,
        })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cubic bases `J`.
    #[inline]
    pub fn n_bases(&self) -> usize {
        self.n_bases
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn n_segments(&self) -> usize {
        self.n_bases - 3
    }

    /// Knot `k_j` for `j` in `-2..=J+1`.
    #[inline]
    pub fn knot(&self, j: i64) -> f64 {
        self.a + (j - 1) as f64 * self.spacing
    }

    /// All `J + 4` knots, ascending.
    pub fn knots(&self) -> Vec<f64> {
        (-2..=self.n_bases as i64 + 1)
            .map(|j| self.knot(j))
            .collect()
    }

    /// Segment index (0-based) and local coordinate `t` in `[0, 1]`.
    /// The right end `b` belongs to the last segment.
    #[inline]
    pub fn locate(&self, r: f64) -> (usize, f64) {
        let u = (r - self.a) / self.spacing;
        let last = self.n_segments() - 1;
        let seg = (u.floor().max(0.0) as usize).min(last);
        (seg, u - seg as f64)
    }

    fn check(&self, r: f64) -> Result<()> {
        if r.is_nan() || r < self.a || r > self.b {
            Err(PtmError::Domain {
                value: r,
                lo: self.a,
                hi: self.b,
            })
        } else {
            Ok(())
        }
    }

    /// Cox-de Boor recursion on the segment containing `r`.
    /// Returns the `ORDER + 1` non-zero weights `B_{i}..B_{i+ORDER}` of the
    /// given order, where `i` is the 1-based left knot of the segment.
    fn recursion<const N: usize>(&self, seg: usize, r: f64) -> [f64; N] {
        let i = seg as i64 + 1;
        let d = self.spacing;
        let mut w = [0.0; N];
        w[0] = 1.0;
        for p in 1..N {
            let pd = p as f64 * d;
            for m in (0..=p).rev() {
                let j = i + m as i64;
                let left = if m >= 1 {
                    (r - self.knot(j - p as i64)) / pd * w[m - 1]
                } else {
                    0.0
                };
                let right = if m < p {
                    (self.knot(j + 1) - r) / pd * w[m]
                } else {
                    0.0
                };
                w[m] = left + right;
            }
        }
        w
    }
}

/// Sparse row of a basis matrix: `N` consecutive weights starting at `offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisRow<const N: usize> {
    pub offset: usize,
    pub weights: [f64; N],
}

pub type CubicRow = BasisRow<4>;
pub type QuadraticRow = BasisRow<3>;

impl<const N: usize> BasisRow<N> {
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        self.scatter(&mut out, 1.0);
        out
    }
}

/// Anything that behaves like a linear functional over basis coefficients.
pub trait RowOps {
    fn dot(&self, coef: &[f64]) -> f64;
    fn scatter(&self, acc: &mut [f64], scale: f64);
}

impl<const N: usize> RowOps for BasisRow<N> {
    #[inline]
    fn dot(&self, coef: &[f64]) -> f64 {
        let c = &coef[self.offset..self.offset + N];
        let mut s = 0.0;
        for k in 0..N {
            s += self.weights[k] * c[k];
        }
        s
    }

    #[inline]
    fn scatter(&self, acc: &mut [f64], scale: f64) {
        let a = &mut acc[self.offset..self.offset + N];
        for k in 0..N {
            a[k] += scale * self.weights[k];
        }
    }
}

/// Cubic basis row at `r` in `[a, b]`.
pub fn eval_cubic(r: f64, grid: &KnotGrid) -> Result<CubicRow> {
    grid.check(r)?;
    Ok(cubic_unchecked(r, grid))
}

/// Quadratic basis row at `r` in `[a, b]`, indexed on the parent cubic knots.
pub fn eval_quadratic(r: f64, grid: &KnotGrid) -> Result<QuadraticRow> {
    grid.check(r)?;
    Ok(quadratic_unchecked(r, grid))
}

#[inline]
pub(crate) fn cubic_unchecked(r: f64, grid: &KnotGrid) -> CubicRow {
    let (seg, _) = grid.locate(r);
    BasisRow {
        offset: seg,
        weights: grid.recursion::<4>(seg, r),
    }
}

#[inline]
pub(crate) fn quadratic_unchecked(r: f64, grid: &KnotGrid) -> QuadraticRow {
    let (seg, _) = grid.locate(r);
    BasisRow {
        offset: seg + 1,
        weights: grid.recursion::<3>(seg, r),
    }
}

/// Precomputed cubic and quadratic rows on `GRID_POINTS` equidistant points
/// spanning `[a, b]` including both ends.
#[derive(Debug, Clone)]
pub struct GridBasis {
    a: f64,
    b: f64,
    step: f64,
    cubic: Vec<CubicRow>,
    quadratic: Vec<QuadraticRow>,
}

impl GridBasis {
    pub fn new(grid: &KnotGrid) -> Self {
        Self::with_points(grid, GRID_POINTS)
    }

    pub fn with_points(grid: &KnotGrid, n: usize) -> Self {
        assert!(n >= 2);
        let (a, b) = (grid.a(), grid.b());
        let step = (b - a) / (n - 1) as f64;
        let point = |i: usize| if i == n - 1 { b } else { a + i as f64 * step };
        let cubic = (0..n).map(|i| cubic_unchecked(point(i), grid)).collect();
        let quadratic = (0..n)
            .map(|i| quadratic_unchecked(point(i), grid))
            .collect();
        Self {
            a,
            b,
            step,
            cubic,
            quadratic,
        }
    }

    pub fn len(&self) -> usize {
        self.cubic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubic.is_empty()
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.len() - 1 {
            self.b
        } else {
            self.a + i as f64 * self.step
        }
    }

    #[inline]
    fn bracket(&self, r: f64) -> (usize, f64) {
        let u = (r - self.a) / self.step;
        let lo = (u.floor().max(0.0) as usize).min(self.len() - 2);
        (lo, (u - lo as f64).clamp(0.0, 1.0))
    }

    #[inline]
    pub(crate) fn cubic_at(&self, r: f64) -> InterpRow<4> {
        let (lo, t) = self.bracket(r);
        InterpRow {
            lo: self.cubic[lo],
            hi: self.cubic[lo + 1],
            t,
        }
    }

    #[inline]
    pub(crate) fn quadratic_at(&self, r: f64) -> InterpRow<3> {
        let (lo, t) = self.bracket(r);
        InterpRow {
            lo: self.quadratic[lo],
            hi: self.quadratic[lo + 1],
            t,
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        if r.is_nan() || r < self.a || r > self.b {
            Err(PtmError::Domain {
                value: r,
                lo: self.a,
                hi: self.b,
            })
        } else {
            Ok(())
        }
    }
}

/// Linear interpolation between two precomputed rows. The bracketing rows can
/// sit on different segments, so the combination is kept as a pair rather
/// than collapsed into a single fixed-width row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpRow<const N: usize> {
    pub lo: BasisRow<N>,
    pub hi: BasisRow<N>,
    pub t: f64,
}

impl<const N: usize> InterpRow<N> {
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        self.scatter(&mut out, 1.0);
        out
    }
}

impl<const N: usize> RowOps for InterpRow<N> {
    #[inline]
    fn dot(&self, coef: &[f64]) -> f64 {
        (1.0 - self.t) * self.lo.dot(coef) + self.t * self.hi.dot(coef)
    }

    #[inline]
    fn scatter(&self, acc: &mut [f64], scale: f64) {
        self.lo.scatter(acc, scale * (1.0 - self.t));
        self.hi.scatter(acc, scale * self.t);
    }
}

/// Interpolated cubic row at `r` from the precomputed grid.
pub fn interp_basis(r: f64, gb: &GridBasis) -> Result<InterpRow<4>> {
    gb.check(r)?;
    Ok(gb.cubic_at(r))
}

/// Interpolated quadratic row at `r` from the precomputed grid.
pub fn interp_quadratic(r: f64, gb: &GridBasis) -> Result<InterpRow<3>> {
    gb.check(r)?;
    Ok(gb.quadratic_at(r))
}

/// Dense cubic design matrix (rows = points) for covariate splines.
pub fn dense_cubic_rows(xs: &[f64], grid: &KnotGrid) -> Result<Vec<CubicRow>> {
    xs.iter().map(|&x| eval_cubic(x, grid)).collect()
}
