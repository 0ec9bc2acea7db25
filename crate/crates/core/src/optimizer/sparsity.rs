//! Sparsity analysis: decides which values must be materialized densely.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Dims, OptError};
use crate::core_ir::{write_core, CoreExpr, CoreFunction, CoreKind};
use crate::types::Dim;

/// Per-node sparsity annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sparsity {
    MayOmitZeros,
    MustBeDense,
}

/// An `Apply` must see every position when its function maps identities
/// to a non-identity. 1x1 arguments are runtime scalars and stay as they
/// are. Every other node keeps its zeros implicit.
pub fn annotate(e: &CoreExpr) -> Sparsity {
    match &e.kind {
        CoreKind::Apply(f, args) if !e.ty.is_scalar() => {
            let broadcast: Vec<bool> = args.iter().map(|a| a.ty.is_scalar()).collect();
            if f.preserves_zero(&broadcast) {
                Sparsity::MayOmitZeros
            } else {
                Sparsity::MustBeDense
            }
        }
        _ => Sparsity::MayOmitZeros,
    }
}

pub struct SparsityConfig<'a> {
    pub dense_limit: u64,
    /// Baseline mode: materialize every non-scalar value densely.
    pub densify_all: bool,
    /// Known dimension sizes. With them the dense limit is checked here
    /// instead of at run time.
    pub dims: Option<&'a Dims>,
}

/// Wraps the inputs of every dense-requiring node in `Densify`.
pub fn sparsity_pass(f: CoreFunction, cfg: &SparsityConfig) -> Result<CoreFunction, OptError> {
    let mut err = None;
    let body = f.body.rewrite(&mut |e| {
        if err.is_some() {
            return e;
        }
        match densify_node(e, cfg) {
            Ok(e) => e,
            Err(b) => {
                let (e, msg) = *b;
                err = Some(msg);
                e
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(CoreFunction { body, ..f }),
    }
}

type NodeResult = Result<CoreExpr, Box<(CoreExpr, OptError)>>;

fn densify_node(e: CoreExpr, cfg: &SparsityConfig) -> NodeResult {
    let e = if annotate(&e) == Sparsity::MustBeDense {
        let CoreExpr { kind, ty } = e;
        let CoreKind::Apply(f, args) = kind else { unreachable!() };
        let mut wrapped = Vec::new();
        for a in args {
            if a.ty.is_scalar() || matches!(a.kind, CoreKind::Densify(_)) {
                wrapped.push(a);
            } else {
                wrapped.push(wrap(a, cfg)?);
            }
        }
        CoreExpr::new(CoreKind::Apply(f, wrapped), ty)
    } else {
        e
    };
    if cfg.densify_all && !e.ty.is_scalar() && !matches!(e.kind, CoreKind::Densify(_)) {
        return wrap(e, cfg);
    }
    Ok(e)
}

fn wrap(e: CoreExpr, cfg: &SparsityConfig) -> NodeResult {
    if let Some(dims) = cfg.dims {
        let size = |d: &Dim| match d {
            Dim::Literal(n) => Some(*n),
            Dim::Symbol(s) => dims.get(s).copied(),
        };
        if let (Some(r), Some(c)) = (size(&e.ty.rows), size(&e.ty.cols)) {
            let positions = r.saturating_mul(c);
            if positions > cfg.dense_limit {
                let msg = OptError::DenseLimit {
                    expr: describe(&e),
                    rows: r,
                    cols: c,
                    limit: cfg.dense_limit,
                };
                return Err(Box::new((e, msg)));
            }
        }
    }
    let ty = e.ty.clone();
    Ok(CoreExpr::new(CoreKind::Densify(Box::new(e)), ty))
}

/// A one-line rendering of an expression, cut short if long.
pub fn describe(e: &CoreExpr) -> String {
    let mut s = String::new();
    write_core(&mut s, e, 0);
    let mut flat = String::new();
    for part in s.split_whitespace() {
        if !flat.is_empty() {
            flat.push(' ');
        }
        flat.push_str(part);
    }
    if flat.chars().count() > 80 {
        flat = flat.chars().take(77).collect();
        flat.push_str("...");
    }
    alloc::format!("{flat} : {}", e.ty)
}
