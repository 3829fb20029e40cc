//! Interventional boundary discovery for control environments.
//!
//! The crate recovers which observation dimensions an agent causally
//! influences. It randomizes the agent's own actions (a `do(a = noise)`
//! intervention), compares per-trajectory summary statistics between
//! baseline and intervened rollouts with two-sample tests, and applies
//! Benjamini-Hochberg correction to produce a binary mask.
//!
//! Modules:
//!
//! - [`env`]: synthetic environments with labeled causal and distractor dimensions.
//! - [`probe`]: probe policies and two-phase trajectory collection.
//! - [`stats`]: summary statistics, Welch and permutation tests, BH, mask assembly.
//! - [`baselines`]: observational selection (MI, residual variance, conditional MI,
//!   gradient attribution).
//! - [`metrics`]: precision, recall and F1 of masks.
//! - [`downstream`]: cross-entropy-method policy search over linear policies.
//! - [`experiments`]: partial-controllability and probe-policy sweeps.

pub mod baselines;
pub mod downstream;
pub mod env;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod plot;
pub mod probe;
pub mod seed;
pub mod stats;

mod par;

pub use error::{Error, Result};
