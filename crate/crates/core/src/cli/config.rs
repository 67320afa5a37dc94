//! Run configuration: a single JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PtmError, Result};
use crate::mcmc::KernelConfig;
use crate::model::{ModelSpec, PriorConfig};
use crate::predictor::TermSpec;
use crate::transform::{BasisPath, Extrapolation, TransformSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub location: Vec<TermSpec>,
    #[serde(default)]
    pub scale: Vec<TermSpec>,
    #[serde(default)]
    pub transform: TransformBlock,
    #[serde(default)]
    pub prior: PriorBlock,
    pub mcmc: KernelConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("ptm_out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    /// Column of exactly observed responses.
    #[serde(default)]
    pub response: Option<String>,
    /// Bound columns for censored responses; replaces `response`.
    #[serde(default)]
    pub censoring: Option<CensoringColumns>,
}

/// An empty or infinite lower bound means left censoring, an empty or
/// infinite upper bound right censoring, equal bounds an exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensoringColumns {
    pub lower: String,
    pub upper: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    #[default]
    Transition,
    Identity,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformBlock {
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    /// Length of δ, i.e. `J - 1`.
    #[serde(default = "default_n_params")]
    pub n_params: usize,
    #[serde(default)]
    pub lambda_mode: LambdaMode,
    /// Transition width; `0.1 (b - a)` when absent.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub path: BasisPath,
}

fn default_a() -> f64 {
    -4.0
}
fn default_b() -> f64 {
    4.0
}
fn default_n_params() -> usize {
    30
}

impl Default for TransformBlock {
    fn default() -> Self {
        Self {
            a: default_a(),
            b: default_b(),
            n_params: default_n_params(),
            lambda_mode: LambdaMode::Transition,
            lambda: None,
            path: BasisPath::Grid,
        }
    }
}

impl TransformBlock {
    pub fn to_spec(&self) -> TransformSpec {
        let extrapolation = match self.lambda_mode {
            LambdaMode::Transition => Extrapolation::Transition {
                lambda: self.lambda.unwrap_or(0.1 * (self.b - self.a)),
            },
            LambdaMode::Identity => Extrapolation::Identity,
            LambdaMode::Linear => Extrapolation::Linear,
        };
        TransformSpec {
            a: self.a,
            b: self.b,
            n_params: self.n_params,
            extrapolation,
            path: self.path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorBlock {
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default = "default_ig_a")]
    pub ig_a: f64,
    #[serde(default = "default_ig_b")]
    pub ig_b: f64,
}

fn default_psi() -> f64 {
    0.5
}
fn default_ig_a() -> f64 {
    1.0
}
fn default_ig_b() -> f64 {
    0.001
}

impl Default for PriorBlock {
    fn default() -> Self {
        Self {
            psi: default_psi(),
            ig_a: default_ig_a(),
            ig_b: default_ig_b(),
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PtmError::config(
            path,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl RunConfig {
    /// Parse a run configuration, or the manifest of an earlier fit.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PtmError::config("<root>", e.to_string()))?;
        let (value, prefix) = match value.get("config") {
            Some(inner) if value.get("version").is_some() => (inner.clone(), "config."),
            _ => (value, ""),
        };
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." {
                "<root>".to_string()
            } else {
                format!("{prefix}{path}")
            };
            PtmError::config(path, e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read from disk; relative data and output paths are resolved against
    /// the directory of the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PtmError::config("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.data.path.is_relative() {
            cfg.data.path = base.join(&cfg.data.path);
        }
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.data.response, &self.data.censoring) {
            (None, None) => {
                return Err(PtmError::config(
                    "data.response",
                    "give a response column or censoring columns",
                ))
            }
            (Some(_), Some(_)) => {
                return Err(PtmError::config(
                    "data.censoring",
                    "response and censoring columns are exclusive",
                ))
            }
            _ => {}
        }
        let t = &self.transform;
        if !(t.a.is_finite() && t.b.is_finite() && t.a < t.b) {
            return Err(PtmError::config(
                "transform.b",
                format!("need finite a < b, got [{}, {}]", t.a, t.b),
            ));
        }
        if t.n_params < 3 {
            return Err(PtmError::config(
                "transform.n_params",
                "at least 3 parameters required",
            ));
        }
        if let Some(l) = t.lambda {
            positive("transform.lambda", l)?;
        }
        positive("prior.psi", self.prior.psi)?;
        positive("prior.ig_a", self.prior.ig_a)?;
        positive("prior.ig_b", self.prior.ig_b)?;
        for (side, terms) in [("location", &self.location), ("scale", &self.scale)] {
            for (i, term) in terms.iter().enumerate() {
                if let TermSpec::Pspline { n_bases, .. } = term {
                    if *n_bases < 4 {
                        return Err(PtmError::config(
                            format!("{side}[{i}].n_bases"),
                            "at least 4 bases required",
                        ));
                    }
                }
            }
        }
        self.mcmc.validate()
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            transform: self.transform.to_spec(),
            location: self.location.clone(),
            scale: self.scale.clone(),
            prior: PriorConfig {
                psi: self.prior.psi,
                ig_shape: self.prior.ig_a,
                ig_scale: self.prior.ig_b,
            },
        }
    }

    /// Covariate columns referenced by the terms.
    pub fn covariate_names(&self) -> Vec<(String, bool)> {
        let mut out: Vec<(String, bool)> = Vec::new();
        for term in self.location.iter().chain(&self.scale) {
            let (var, numeric) = match term {
                TermSpec::Pspline { var, .. } | TermSpec::Linear { var } => (var, true),
                TermSpec::RandomIntercept { var } => (var, false),
            };
            if let Some(slot) = out.iter_mut().find(|(n, _)| n == var) {
                slot.1 |= numeric;
            } else {
                out.push((var.clone(), numeric));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"data": {"path": "d.csv", "response": "y"}, "mcmc": {"warmup": 10, "samples": 10}}"#;

    #[test]
    fn defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let spec = cfg.model_spec();
        assert_eq!(
            (spec.transform.a, spec.transform.b, spec.transform.n_params),
            (-4.0, 4.0, 30)
        );
        assert_eq!(
            spec.transform.extrapolation,
            Extrapolation::Transition { lambda: 0.8 }
        );
        assert_eq!(spec.prior, PriorConfig::default());
        assert_eq!(cfg.mcmc.chains, 4);
    }

    #[test]
    fn field_paths_in_errors() {
        let bad = r#"{"data": {"path": "d.csv", "response": "y"}, "mcmc": {"warmup": "ten", "samples": 10}}"#;
        match RunConfig::from_json(bad) {
            Err(PtmError::Config { path, .. }) => assert_eq!(path, "mcmc.warmup"),
            other => panic!("{other:?}"),
        }
        let bad = r#"{"data": {"path": "d.csv", "response": "y"}, "location": [{"type": "pspline", "var": "x", "n_bases": 2}], "mcmc": {"warmup": 10, "samples": 10}}"#;
        match RunConfig::from_json(bad) {
            Err(PtmError::Config { path, .. }) => assert_eq!(path, "location[0].n_bases"),
            other => panic!("{other:?}"),
        }
        let bad = r#"{"data": {"path": "d.csv"}, "mcmc": {"warmup": 10, "samples": 10}}"#;
        assert!(
            matches!(RunConfig::from_json(bad), Err(PtmError::Config { path, .. }) if path == "data.response")
        );
        let bad = r#"{"data": {"path": "d.csv", "response": "y"}, "mcmc": {"warmup": 10, "samples": 10, "typo": 1}}"#;
        assert!(
            matches!(RunConfig::from_json(bad), Err(PtmError::Config { path, .. }) if path.starts_with("mcmc"))
        );
    }

    #[test]
    fn manifest_is_accepted() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let manifest = serde_json::json!({"version": "0.1.0", "config": cfg});
        assert_eq!(RunConfig::from_json(&manifest.to_string()).unwrap(), cfg);
    }

    #[test]
    fn limiting_modes() {
        let mut t = TransformBlock {
            lambda_mode: LambdaMode::Identity,
            ..Default::default()
        };
        assert_eq!(t.to_spec().extrapolation, Extrapolation::Identity);
        t.lambda_mode = LambdaMode::Linear;
        assert_eq!(t.to_spec().extrapolation, Extrapolation::Linear);
    }
}
