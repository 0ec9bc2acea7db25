//! Plan execution over in-memory relations.

mod exec;
mod relation;
mod stats;

pub use exec::{execute, execute_observed, Binding, ExecConfig, ExecError, LoopObserver};
pub use relation::{pick_any_aggregate, MatrixRelation, Tuple};
pub use stats::ExecStats;
