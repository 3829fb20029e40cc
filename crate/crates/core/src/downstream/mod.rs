//! Desk-scale control harness: cross-entropy-method search over linear
//! policies that read a masked observation, and the distractor-scaling
//! sweep built on it.

mod cem;
mod policy;
mod sweep;

pub use cem::{cem_train, evaluate_policy, CEMConfig, CemOutcome};
pub use policy::LinearPolicy;
pub use sweep::{method_mask, scaling_sweep, MaskMethod, ScalingReport, ScalingRow, SweepSettings};
