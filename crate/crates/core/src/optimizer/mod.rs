//! Optimization passes: sparsity analysis on Core, then loop-invariant code
//! motion and in-place aggregation on plans.

mod inplace;
mod licm;
mod sparsity;

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::core_ir::CoreFunction;
use crate::plan::{compile, Plan};
pub use inplace::inplace_pass;
pub use licm::{bound_inside, check_hoisted, licm_pass};
pub use sparsity::{annotate, describe, sparsity_pass, Sparsity, SparsityConfig};

/// Sizes of dimension symbols.
pub type Dims = BTreeMap<String, u64>;

pub const DEFAULT_DENSE_LIMIT: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub enum OptLevel {
    /// Sparsity analysis only.
    O0,
    /// Adds loop-invariant code motion.
    O1,
    /// Adds in-place aggregation and the fixpoint check.
    #[default]
    O2,
}

impl OptLevel {
    pub fn from_number(n: u8) -> Option<OptLevel> {
        match n {
            0 => Some(OptLevel::O0),
            1 => Some(OptLevel::O1),
            2 => Some(OptLevel::O2),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OptError {
    #[error("densifying `{expr}` needs {rows} x {cols} positions, over the dense limit of {limit}")]
    DenseLimit {
        expr: String,
        rows: u64,
        cols: u64,
        limit: u64,
    },
}

#[derive(Clone, Debug)]
pub struct OptConfig<'a> {
    pub level: OptLevel,
    pub dense_limit: u64,
    pub densify_all: bool,
    pub dims: Option<&'a Dims>,
}

impl Default for OptConfig<'_> {
    fn default() -> Self {
        OptConfig {
            level: OptLevel::O2,
            dense_limit: DEFAULT_DENSE_LIMIT,
            densify_all: false,
            dims: None,
        }
    }
}

/// Sparsity pass and compilation, without plan rewrites. Callers that add
/// plan fragments of their own do so before [`optimize`].
pub fn prepare(f: &CoreFunction, cfg: &OptConfig) -> Result<Plan, OptError> {
    let sc = SparsityConfig {
        dense_limit: cfg.dense_limit,
        densify_all: cfg.densify_all,
        dims: cfg.dims,
    };
    let f = sparsity_pass(f.clone(), &sc)?;
    Ok(compile(&f))
}

/// The plan rewrites enabled at `level`.
pub fn optimize(plan: Plan, level: OptLevel) -> Plan {
    let plan = if level >= OptLevel::O1 { licm_pass(plan) } else { plan };
    if level >= OptLevel::O2 {
        inplace_pass(plan)
    } else {
        plan
    }
}

pub fn pipeline(f: &CoreFunction, cfg: &OptConfig) -> Result<Plan, OptError> {
    Ok(optimize(prepare(f, cfg)?, cfg.level))
}
