pub mod cli;
pub mod error;
pub mod mcmc;
pub mod model;
pub mod normal;
pub mod posterior;
pub mod predictor;
pub mod priors;
pub mod simlab;
pub mod splinecore;
pub mod stats;
pub mod transform;

pub use error::{PtmError, Result};
