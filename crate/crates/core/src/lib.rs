//! Concavification solver and robustness auditor for finite Bayesian
//! persuasion instances.
//!
//! The optimum is found by pooling the vertices of the receiver's best-reply
//! polytopes and enumerating basic splits of the prior over them. The
//! robustness side decides whether that optimum survives small errors in the
//! receiver's utilities, and builds a concrete nearby type when it does not.

pub mod curve;
pub mod error;
pub mod fixtures;
pub mod genericity;
pub mod geometry;
pub mod instance_file;
pub mod linalg;
pub mod model;
pub mod robustness;
pub mod solver;
pub mod tolerance;

pub use error::{Error, Result};
pub use model::{Belief, CornerMode, PersuasionInstance, ReceiverType, SignalPolicy, UtilityBox, UtilityMatrix};
pub use tolerance::Tolerances;
