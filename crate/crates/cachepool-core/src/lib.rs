//! Simulation and analytic prediction of LRU miss ratios for multiple
//! competing request flows.
//!
//! The crate answers one question: given several flows of requests with
//! heavy-tailed popularities, possibly different item sizes and possibly
//! overlapped data, should a cache of size `x` be pooled or partitioned?
//!
//! It is organized around five pieces:
//!
//! * [`workload`] builds finite item catalogs from flow specifications and
//!   samples reproducible request streams under the independent reference
//!   model.
//! * [`cache_sim`] runs the move-to-front form of LRU (miss iff the total
//!   size of strictly more recently used items exceeds the capacity) and
//!   collects per-flow miss counts for many capacities in a single pass.
//! * [`analytic`] computes the characteristic-time machinery: `m(z)`, its
//!   inverse, per-flow tail interpolants, and the Che / asymptotic /
//!   closed-form miss predictors.
//! * [`planner`] turns predictions into pooling-versus-separation answers:
//!   optimal static splits, pooled/separated miss ratios and the good
//!   region for two overlapping flows.
//! * [`oracle`] computes exact miss probabilities for tiny instances by
//!   solving the stationary distribution of the list-order Markov chain,
//!   used as ground truth in tests.

pub mod analytic;
pub mod cache_sim;
pub mod error;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod workload;

pub use error::{Error, Result};
