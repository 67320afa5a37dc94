//! Simulation scenarios and scoring rules.

pub mod metrics;
pub mod scenarios;

pub use metrics::{
    coverage, crps_levels, crps_quantile, crps_sample, kld, mad, score_fit, waic, ScoreOptions,
    ScorePanel,
};
pub use scenarios::{covariate_surface, simulate, ResidualLaw, Scenario, SimRow, Surface};
