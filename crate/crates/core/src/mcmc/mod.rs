//! Posterior sampling: IWLS and Gibbs kernels for the predictors, NUTS for
//! the transformation block.

pub mod adapt;
pub mod chain;
pub mod gibbs;
pub mod init;
pub mod iwls;
pub mod nuts;

pub use chain::{run_chain, run_chains, ChainOutput, KernelConfig};
pub use init::initialize;
