//! The compile and run pipeline shared by the command line and the tests.

use std::collections::{BTreeMap, BTreeSet};

use graphalg_core::core_ir::{lower_function, CoreFunction};
use graphalg_core::engine::{execute_observed, Binding, ExecConfig, ExecStats, LoopObserver, MatrixRelation};
use graphalg_core::frontend::parse;
use graphalg_core::optimizer::{optimize, prepare, Dims, OptConfig, OptLevel, DEFAULT_DENSE_LIMIT};
use graphalg_core::plan::Plan;
use graphalg_core::semiring::{SemiringTag, Value};
use graphalg_core::typecheck::{check_program, TypedProgram};
use graphalg_core::types::Dim;

use crate::graph_io::GraphInput;
use crate::preprocess::{preprocess_fragment, Preprocess};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Compile(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl DriverError {
    /// 1 usage, 2 compile error, 3 runtime error.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Usage(_) => 1,
            DriverError::Compile(_) => 2,
            DriverError::Runtime(_) => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub level: OptLevel,
    pub dense_limit: u64,
    pub preprocess: Preprocess,
    /// Baseline that materializes every matrix densely.
    pub densify_all: bool,
    pub check_invariants: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            level: OptLevel::O2,
            dense_limit: DEFAULT_DENSE_LIMIT,
            preprocess: Preprocess::default(),
            densify_all: false,
            check_invariants: false,
        }
    }
}

pub fn check_source(src: &str) -> Result<TypedProgram, DriverError> {
    let ast = parse(src).map_err(|d| DriverError::Compile(d.to_string()))?;
    check_program(&ast).map_err(|d| DriverError::Compile(d.to_string()))
}

pub fn lower_named(tp: &TypedProgram, name: &str) -> Result<CoreFunction, DriverError> {
    lower_function(tp, name).ok_or_else(|| DriverError::Usage(format!("no function `{name}` in the program")))
}

pub fn compile_source(src: &str, name: &str) -> Result<CoreFunction, DriverError> {
    lower_named(&check_source(src)?, name)
}

/// Sparsity pass, compilation, preprocessing of the `graphs` arguments and
/// the plan rewrites of the chosen level. With `dims` the dense limit is
/// enforced at compile time.
pub fn build_plan(
    f: &CoreFunction,
    graphs: &BTreeSet<String>,
    dims: Option<&Dims>,
    opts: &Options,
) -> Result<Plan, DriverError> {
    let cfg = OptConfig {
        level: opts.level,
        dense_limit: opts.dense_limit,
        densify_all: opts.densify_all,
        dims,
    };
    let plan = prepare(f, &cfg).map_err(|e| DriverError::Compile(format!("optimizer error: {e}")))?;
    let plan = preprocess_fragment(plan, graphs, opts.preprocess);
    Ok(optimize(plan, opts.level))
}

pub struct Output {
    pub result: MatrixRelation,
    pub stats: ExecStats,
    pub plan: Plan,
}

struct Quiet;

impl LoopObserver for Quiet {
    fn after_iteration(&mut self, _: u32, _: u64, _: &[&MatrixRelation]) {}
}

pub fn run(
    f: &CoreFunction,
    args: BTreeMap<String, MatrixRelation>,
    graphs: &BTreeSet<String>,
    opts: &Options,
) -> Result<Output, DriverError> {
    run_observed(f, args, graphs, opts, &mut Quiet)
}

pub fn run_observed(
    f: &CoreFunction,
    args: BTreeMap<String, MatrixRelation>,
    graphs: &BTreeSet<String>,
    opts: &Options,
    observer: &mut dyn LoopObserver,
) -> Result<Output, DriverError> {
    let binding = Binding::bind(&f.params, args).map_err(|e| DriverError::Usage(e.to_string()))?;
    let plan = build_plan(f, graphs, Some(&binding.dims), opts)?;
    let cfg = ExecConfig {
        dense_limit: opts.dense_limit,
        check_invariants: opts.check_invariants,
    };
    let (result, stats) =
        execute_observed(&plan, &binding, &cfg, observer).map_err(|e| DriverError::Runtime(e.to_string()))?;
    Ok(Output { result, stats, plan })
}

/// Scalar and source arguments for graph algorithms.
#[derive(Clone, Debug)]
pub struct AlgoArgs {
    /// Internal index of the source vertex.
    pub source: Option<u32>,
    pub damping: f64,
    pub iters: i64,
}

impl Default for AlgoArgs {
    fn default() -> Self {
        AlgoArgs {
            source: None,
            damping: crate::stdlib::DEFAULT_DAMPING,
            iters: crate::stdlib::DEFAULT_ITERS,
        }
    }
}

/// Binds the parameters of an algorithm by shape: a square matrix is the
/// graph, a boolean vector the source set, a `real` scalar the damping
/// factor and an `int` scalar the iteration count. Returns the arguments
/// and the names bound to the graph.
pub fn bind_graph_args(
    f: &CoreFunction,
    g: &GraphInput,
    a: &AlgoArgs,
) -> Result<(BTreeMap<String, MatrixRelation>, BTreeSet<String>), DriverError> {
    let n = g.vertex_count() as u64;
    let mut args = BTreeMap::new();
    let mut graphs = BTreeSet::new();
    let mut used_source = false;
    for (name, ty) in &f.params {
        let square = !ty.rows.is_one() && ty.rows == ty.cols;
        let value = if square {
            if ty.sr != g.adjacency.sr {
                return Err(DriverError::Usage(format!(
                    "`{name}` is {ty} but the graph was loaded as {}",
                    g.adjacency.sr
                )));
            }
            graphs.insert(name.clone());
            g.adjacency.clone()
        } else if ty.cols == Dim::ONE && !ty.rows.is_one() && ty.sr == SemiringTag::Bool {
            let s = a
                .source
                .ok_or_else(|| DriverError::Usage(format!("`{}` needs a source vertex (--source)", f.name)))?;
            used_source = true;
            MatrixRelation::from_tuples(n, 1, SemiringTag::Bool, vec![(s, 0, Value::Bool(true))])
                .map_err(|e| DriverError::Usage(e.to_string()))?
        } else if ty.is_scalar() && ty.sr == SemiringTag::Real {
            MatrixRelation::scalar(Value::Real(a.damping))
        } else if ty.is_scalar() && ty.sr == SemiringTag::Int {
            MatrixRelation::scalar(Value::Int(a.iters))
        } else {
            return Err(DriverError::Usage(format!(
                "cannot bind parameter `{name}: {ty}` from a graph"
            )));
        };
        args.insert(name.clone(), value);
    }
    if a.source.is_some() && !used_source {
        return Err(DriverError::Usage(format!("`{}` takes no source vertex", f.name)));
    }
    Ok((args, graphs))
}
