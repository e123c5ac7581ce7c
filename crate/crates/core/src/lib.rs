//! Monte Carlo laboratory for the magnetization field of the critical
//! two-dimensional Ising model.
//!
//! Chains of Swendsen–Wang or Wolff updates produce spin configurations
//! together with their coupled FK bond configurations. From these the crate
//! builds the renormalized field on the unit square, its negative Sobolev
//! norms, the cluster decomposition of the magnetization and a set of
//! scaling estimators. Small graphs can be enumerated exactly for checks.

pub mod cli;
pub mod clusters;
pub mod error;
pub mod estimators;
pub mod field;
pub mod lattice;
pub mod oracle;
pub mod rng;
pub mod sampler;

pub use error::{CritError, Result};
