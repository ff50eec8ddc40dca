//! Norms, exact solutions, convergence rates and the level experiments.

pub mod exact;
pub mod norms;
pub mod report;

pub use norms::{weighted_norm, DiscreteField, FieldSource, Order};
pub use report::{eoc, ExperimentReport};
pub mod experiments;

pub use experiments::{condition_s_gate, LevelPlan};
