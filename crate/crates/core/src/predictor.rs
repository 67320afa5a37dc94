//! Structured additive predictors for location and log-scale.
//!
//! Each predictor is an intercept plus a sum of terms, where a term is a
//! basis matrix times a coefficient block. Intercepts are not sampled: they
//! are set so that the standardized residuals have mean 0 and variance 1.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};
use crate::priors::PenaltySpec;
use crate::splinecore::{cubic_unchecked, KnotGrid};

/// One covariate column.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Labels(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Labels(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named covariate columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Covariates {
    n_rows: usize,
    columns: BTreeMap<String, Column>,
}

impl Covariates {
    pub fn new(n_rows: usize) -> Self {
        Self {
            n_rows,
            columns: BTreeMap::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn insert(&mut self, name: impl Into<String>, col: Column) -> Result<()> {
        if col.len() != self.n_rows {
            return Err(PtmError::ShapeMismatch {
                expected: self.n_rows,
                got: col.len(),
            });
        }
        self.columns.insert(name.into(), col);
        Ok(())
    }

    pub fn with_numeric(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.insert(name, Column::Numeric(values))?;
        Ok(self)
    }

    pub fn with_labels(mut self, name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        self.insert(name, Column::Labels(values))?;
        Ok(self)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(|s| s.as_str())
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.columns.get(name) {
            Some(Column::Numeric(v)) => Ok(v),
            Some(Column::Labels(_)) => Err(PtmError::data(
                None,
                format!("column '{name}' is not numeric"),
            )),
            None => Err(PtmError::data(
                None,
                format!("missing covariate column '{name}'"),
            )),
        }
    }

    /// Column as group labels; numeric columns are formatted.
    pub fn labels(&self, name: &str) -> Result<Vec<String>> {
        match self.columns.get(name) {
            Some(Column::Labels(v)) => Ok(v.clone()),
            Some(Column::Numeric(v)) => Ok(v.iter().map(|x| x.to_string()).collect()),
            None => Err(PtmError::data(
                None,
                format!("missing covariate column '{name}'"),
            )),
        }
    }

    /// Rows selected by index.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|(k, c)| {
                let c = match c {
                    Column::Numeric(v) => Column::Numeric(rows.iter().map(|&i| v[i]).collect()),
                    Column::Labels(v) => {
                        Column::Labels(rows.iter().map(|&i| v[i].clone()).collect())
                    }
                };
                (k.clone(), c)
            })
            .collect();
        Self {
            n_rows: rows.len(),
            columns,
        }
    }
}

/// Row-compressed sparse basis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesign {
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseDesign {
    fn new(n_cols: usize) -> Self {
        Self {
            n_cols,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push_row(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        for (c, v) in entries {
            self.cols.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[s..e]
            .iter()
            .cloned()
            .zip(self.vals[s..e].iter().cloned())
    }

    /// `out += B θ`.
    pub fn add_mul(&self, coef: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.row(i).map(|(c, v)| v * coef[c]).sum::<f64>();
        }
    }

    pub fn mul(&self, coef: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows()];
        self.add_mul(coef, &mut out);
        out
    }

    /// `Bᵀ w`.
    pub fn tmul(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (i, &wi) in w.iter().enumerate() {
            for (c, v) in self.row(i) {
                out[c] += v * wi;
            }
        }
        out
    }

    /// `Bᵀ diag(w) B`.
    pub fn gram(&self, w: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.n_cols, self.n_cols);
        for (i, &wi) in w.iter().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for p in s..e {
                let vp = self.vals[p] * wi;
                for q in s..e {
                    g[(self.cols[p], self.cols[q])] += vp * self.vals[q];
                }
            }
        }
        g
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols);
        for i in 0..self.n_rows() {
            for (c, v) in self.row(i) {
                m[(i, c)] += v;
            }
        }
        m
    }
}

/// Term as written in a model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TermSpec {
    Pspline {
        var: String,
        #[serde(default = "default_n_bases")]
        n_bases: usize,
    },
    Linear {
        var: String,
    },
    RandomIntercept {
        var: String,
    },
}

fn default_n_bases() -> usize {
    20
}

/// Everything needed to rebuild a term's basis for new covariate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TermBasis {
    Pspline { var: String, grid: KnotGrid },
    Linear { vars: Vec<String> },
    RandomIntercept { var: String, levels: Vec<String> },
}

impl TermBasis {
    pub fn n_coef(&self) -> usize {
        match self {
            TermBasis::Pspline { grid, .. } => grid.n_bases(),
            TermBasis::Linear { vars } => vars.len(),
            TermBasis::RandomIntercept { levels, .. } => levels.len(),
        }
    }

    /// Structure matrix of the Gaussian prior; `None` for flat priors.
    pub fn penalty(&self) -> Result<Option<PenaltySpec>> {
        Ok(match self {
            TermBasis::Pspline { grid, .. } => Some(PenaltySpec::difference(grid.n_bases(), 2)?),
            TermBasis::Linear { .. } => None,
            TermBasis::RandomIntercept { levels, .. } => Some(PenaltySpec::identity(levels.len())),
        })
    }

    pub fn design(&self, cov: &Covariates) -> Result<SparseDesign> {
        let n = cov.n_rows();
        let mut d = SparseDesign::new(self.n_coef());
        match self {
            TermBasis::Pspline { var, grid } => {
                let x = cov.numeric(var)?;
                let mut clamped = 0usize;
                for (i, &xi) in x.iter().enumerate() {
                    if !xi.is_finite() {
                        return Err(PtmError::NonFinite {
                            row: i,
                            what: format!("covariate '{var}'"),
                        });
                    }
                    let xc = xi.clamp(grid.a(), grid.b());
                    if xc != xi {
                        clamped += 1;
                    }
                    let row = cubic_unchecked(xc, grid);
                    d.push_row((0..4).map(|k| (row.offset + k, row.weights[k])));
                }
                if clamped > 0 {
                    log::warn!("{clamped} values of '{var}' outside the fitted range were clamped");
                }
            }
            TermBasis::Linear { vars } => {
                let cols: Vec<&[f64]> =
                    vars.iter().map(|v| cov.numeric(v)).collect::<Result<_>>()?;
                for i in 0..n {
                    d.push_row(cols.iter().enumerate().map(|(c, x)| (c, x[i])));
                }
            }
            TermBasis::RandomIntercept { var, levels } => {
                let labels = cov.labels(var)?;
                let mut unseen = 0usize;
                for l in &labels {
                    match levels.binary_search(l) {
                        Ok(k) => d.push_row([(k, 1.0)]),
                        Err(_) => {
                            unseen += 1;
                            d.push_row([]);
                        }
                    }
                }
                if unseen > 0 {
                    log::warn!(
                        "{unseen} rows of '{var}' have unseen levels; their group effect is zero"
                    );
                }
            }
        }
        Ok(d)
    }
}

/// A term with its training design.
#[derive(Debug, Clone)]
pub struct Term {
    pub name: String,
    pub basis: TermBasis,
    pub design: SparseDesign,
    pub penalty: Option<PenaltySpec>,
}

impl Term {
    pub fn from_basis(name: impl Into<String>, basis: TermBasis, cov: &Covariates) -> Result<Self> {
        let design = basis.design(cov)?;
        let penalty = basis.penalty()?;
        Ok(Self {
            name: name.into(),
            basis,
            design,
            penalty,
        })
    }

    pub fn n_coef(&self) -> usize {
        self.basis.n_coef()
    }

    /// Whether the term carries a variance parameter.
    pub fn is_penalized(&self) -> bool {
        self.penalty.is_some()
    }
}

/// Cubic P-spline with equidistant knots over the observed covariate range
/// and a second-order difference penalty.
pub fn build_pspline_term(name: &str, var: &str, cov: &Covariates, n_bases: usize) -> Result<Term> {
    let x = cov.numeric(var)?;
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    if !(hi > lo) {
        return Err(PtmError::DegenerateCovariate(var.to_string()));
    }
    let grid = KnotGrid::for_covariate(lo, hi, n_bases)?;
    Term::from_basis(
        name,
        TermBasis::Pspline {
            var: var.to_string(),
            grid,
        },
        cov,
    )
}

/// Build the terms of one predictor. Linear terms are grouped into a
/// single flat-prior block named `linear`.
pub fn build_terms(specs: &[TermSpec], cov: &Covariates) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    let mut linear = Vec::new();
    for spec in specs {
        match spec {
            TermSpec::Pspline { var, n_bases } => {
                terms.push(build_pspline_term(var, var, cov, *n_bases)?)
            }
            TermSpec::Linear { var } => linear.push(var.clone()),
            TermSpec::RandomIntercept { var } => {
                let mut levels = cov.labels(var)?;
                levels.sort();
                levels.dedup();
                let name = format!("re_{var}");
                terms.push(Term::from_basis(
                    name,
                    TermBasis::RandomIntercept {
                        var: var.clone(),
                        levels,
                    },
                    cov,
                )?);
            }
        }
    }
    if !linear.is_empty() {
        terms.push(Term::from_basis(
            "linear",
            TermBasis::Linear { vars: linear },
            cov,
        )?);
    }
    Ok(terms)
}

/// Sum of term contributions, excluding the intercept.
pub fn eval_terms(designs: &[&SparseDesign], coefs: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (d, c) in designs.iter().zip(coefs) {
        d.add_mul(c, &mut out);
    }
    out
}

/// Intercepts `(β₀, γ₀)` making the standardized residuals
/// `(y - β₀ - μ̃) / (exp(γ₀) σ̃)` have mean 0 and population variance 1.
pub fn update_intercepts(y: &[f64], mu_wo: &[f64], log_sigma_wo: &[f64]) -> Result<(f64, f64)> {
    let n = y.len();
    if mu_wo.len() != n || log_sigma_wo.len() != n {
        return Err(PtmError::ShapeMismatch {
            expected: n,
            got: mu_wo.len().min(log_sigma_wo.len()),
        });
    }
    let mut sum_inv = 0.0;
    let mut sum_z = 0.0;
    for i in 0..n {
        let inv = (-log_sigma_wo[i]).exp();
        let z = (y[i] - mu_wo[i]) * inv;
        if !(inv.is_finite() && z.is_finite()) {
            return Err(PtmError::NonFinite {
                row: i,
                what: "standardized residual".into(),
            });
        }
        sum_inv += inv;
        sum_z += z;
    }
    let beta0 = sum_z / sum_inv;
    let w: Vec<f64> = (0..n)
        .map(|i| (y[i] - beta0 - mu_wo[i]) * (-log_sigma_wo[i]).exp())
        .collect();
    let m = w.iter().sum::<f64>() / n as f64;
    let var = w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(PtmError::ZeroVariance);
    }
    Ok((beta0, 0.5 * var.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cov(x: Vec<f64>) -> Covariates {
        let n = x.len();
        Covariates::new(n).with_numeric("x", x).unwrap()
    }

    #[test]
    fn pspline_design_rows_sum_to_one() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let t = build_pspline_term("f", "x", &cov(x), 20).unwrap();
        assert_eq!(t.design.n_cols(), 20);
        for i in 0..50 {
            let s: f64 = t.design.row(i).map(|(_, v)| v).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert_eq!(t.penalty.as_ref().unwrap().rank(), 18);
    }

    #[test]
    fn degenerate_covariate() {
        assert!(matches!(
            build_pspline_term("f", "x", &cov(vec![1.0; 10]), 10),
            Err(PtmError::DegenerateCovariate(_))
        ));
    }

    #[test]
    fn clamping_outside_range() {
        let t = build_pspline_term("f", "x", &cov(vec![0.0, 0.5, 1.0]), 6).unwrap();
        let at_edge = t.basis.design(&cov(vec![1.0])).unwrap().to_dense();
        let beyond = t.basis.design(&cov(vec![3.0])).unwrap().to_dense();
        assert_eq!(at_edge, beyond);
    }

    #[test]
    fn random_intercept_and_linear() {
        let c = Covariates::new(4)
            .with_labels("g", vec!["b".into(), "a".into(), "b".into(), "c".into()])
            .unwrap()
            .with_numeric("z", vec![1.0, 2.0, 3.0, 4.0])
            .unwrap();
        let specs = vec![
            TermSpec::RandomIntercept { var: "g".into() },
            TermSpec::Linear { var: "z".into() },
        ];
        let terms = build_terms(&specs, &c).unwrap();
        assert_eq!(terms.len(), 2);
        let re = &terms[0];
        assert_eq!(re.n_coef(), 3);
        assert_eq!(
            re.design.mul(&[10.0, 20.0, 30.0]),
            vec![20.0, 10.0, 20.0, 30.0]
        );
        assert!(!terms[1].is_penalized());
        assert_eq!(terms[1].design.mul(&[2.0]), vec![2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn gram_matches_dense() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
        let t = build_pspline_term("f", "x", &cov(x), 8).unwrap();
        let w: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.1).collect();
        let b = t.design.to_dense();
        let dense =
            b.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w.clone())) * &b;
        assert!((t.design.gram(&w) - dense).abs().max() < 1e-12);
        let tm = t.design.tmul(&w);
        let want = b.transpose() * nalgebra::DVector::from_vec(w);
        for k in 0..8 {
            assert!((tm[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_intercepts() {
        assert!(matches!(
            update_intercepts(&[2.0; 5], &[0.0; 5], &[0.0; 5]),
            Err(PtmError::ZeroVariance)
        ));
    }

    proptest! {
        #[test]
        fn intercepts_standardize(
            y in proptest::collection::vec(-50.0f64..50.0, 3..60),
            seed in 0u64..1000,
        ) {
            let n = y.len();
            let mu: Vec<f64> = (0..n).map(|i| ((i as u64 * 7 + seed) % 13) as f64 * 0.3).collect();
            let ls: Vec<f64> = (0..n).map(|i| ((i as u64 * 5 + seed) % 7) as f64 * 0.2 - 0.5).collect();
            prop_assume!(y.iter().any(|v| (v - y[0]).abs() > 1e-3));
            if let Ok((b0, g0)) = update_intercepts(&y, &mu, &ls) {
                let r: Vec<f64> = (0..n).map(|i| (y[i] - b0 - mu[i]) / (g0 + ls[i]).exp()).collect();
                let m = r.iter().sum::<f64>() / n as f64;
                let v = r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
                prop_assert!(m.abs() < 1e-12 * (1.0 + r.iter().map(|x| x.abs()).fold(0.0, f64::max)));
                prop_assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }
}
