//! Posterior summaries: predictive distributions and convergence checks.

pub mod diagnostics;
pub mod predictive;

pub use diagnostics::{diagnose, ess_bulk, ess_tail, rhat, DiagnosticsReport};
pub use predictive::{
    summarize, IntervalKind, Predictive, PredictiveRequest, PredictiveRow, Quantity, Summary,
};
