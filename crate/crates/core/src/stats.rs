//! Small numeric helpers shared across modules.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Variance with denominator `n - ddof`; shifted by the first value so
/// constant input gives exactly zero.
pub fn variance(xs: &[f64], ddof: usize) -> f64 {
    let Some(&x0) = xs.first() else {
        return f64::NAN;
    };
    let d: Vec<f64> = xs.iter().map(|x| x - x0).collect();
    let m = mean(&d);
    d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - ddof) as f64
}

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, p)
}

/// Shortest interval holding a `level` share of the sorted draws.
pub fn hpd_sorted(sorted: &[f64], level: f64) -> (f64, f64) {
    let n = sorted.len();
    let k = ((level * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[n - 1]);
    let mut width = f64::INFINITY;
    for i in 0..=(n - k) {
        let w = sorted[i + k - 1] - sorted[i];
        if w < width {
            width = w;
            best = (sorted[i], sorted[i + k - 1]);
        }
    }
    best
}

/// Composite trapezoid rule on an equidistant grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    step * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Equidistant grid of `n` points over `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert!((quantile(&v, 0.9) - 4.6).abs() < 1e-12);
    }

    #[test]
    fn hpd_of_skewed_sample() {
        let v: Vec<f64> = (0..100).map(|i| (i as f64 / 10.0).powi(2)).collect();
        let (lo, hi) = hpd_sorted(&v, 0.5);
        assert_eq!(lo, 0.0);
        assert!(hi < quantile_sorted(&v, 0.75));
    }

    #[test]
    fn variance_of_constant_is_zero() {
        assert_eq!(variance(&[-1.2; 50], 1), 0.0);
        assert!((variance(&[1.0, 2.0, 3.0, 4.0], 1) - 5.0 / 3.0).abs() < 1e-15);
        assert!((variance(&[1e9 + 1.0, 1e9 + 2.0, 1e9 + 3.0], 0) - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let xs = linspace(0.0, 2.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&ys, 0.2) - 8.0).abs() < 1e-12);
    }
}
