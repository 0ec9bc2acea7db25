//! GraphAlg Core: the small expression language every surface program is
//! lowered to, and the substrate for analysis and plan compilation.

mod lower;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::scalar::{PointwiseFn, ScalarExpr};
use crate::semiring::{SemiringTag, Value};
use crate::types::{Dim, MatrixType};
pub use lower::{lower, lower_function};

#[derive(Clone, Debug, PartialEq)]
pub enum LoopBound {
    /// Iterate as many times as the dimension's size.
    Dim(Dim),
    /// Iterate as many times as the value of an `int` scalar, computed once
    /// before the loop. Absent or negative values mean zero iterations.
    Scalar(Box<CoreExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopState {
    pub name: String,
    pub init: CoreExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopUpdate {
    pub name: String,
    pub update: CoreExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoreKind {
    Var(String),
    Transpose(Box<CoreExpr>),
    /// Vector to diagonal matrix.
    Diag(Box<CoreExpr>),
    /// Elementwise function. Each argument has the result's shape or is 1x1
    /// and broadcast.
    Apply(PointwiseFn, Vec<CoreExpr>),
    MatMul(Box<CoreExpr>, Box<CoreExpr>),
    /// All-ones column vector; shape and semiring come from the type.
    OneVector,
    /// Matrix without entries; shape and semiring come from the type.
    ZeroMatrix,
    /// Bounded loop. Updates are simultaneous: they read the state values
    /// from the start of the iteration. The result is the final value of
    /// the first state.
    ForLoop {
        bound: LoopBound,
        index: String,
        states: Vec<LoopState>,
        body: Vec<LoopUpdate>,
    },
    /// Keeps the nonzero with the smallest column index in every row.
    PickAny(Box<CoreExpr>),
    /// Materializes every position, zeros included. Inserted by the
    /// sparsity pass only.
    Densify(Box<CoreExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreExpr {
    pub kind: CoreKind,
    pub ty: MatrixType,
}

impl CoreExpr {
    pub fn new(kind: CoreKind, ty: MatrixType) -> CoreExpr {
        CoreExpr { kind, ty }
    }

    pub fn var(name: &str, ty: MatrixType) -> CoreExpr {
        CoreExpr::new(CoreKind::Var(name.into()), ty)
    }

    pub fn constant(v: Value) -> CoreExpr {
        CoreExpr::new(
            CoreKind::Apply(PointwiseFn::constant(v), Vec::new()),
            MatrixType::scalar(v.tag()),
        )
    }

    /// The literal of a nullary `Apply`.
    pub fn as_constant(&self) -> Option<Value> {
        match &self.kind {
            CoreKind::Apply(f, args) if args.is_empty() => match f.body {
                ScalarExpr::Lit(v) => Some(v),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn transpose(e: CoreExpr) -> CoreExpr {
        let ty = e.ty.transposed();
        CoreExpr::new(CoreKind::Transpose(Box::new(e)), ty)
    }

    pub fn matmul(a: CoreExpr, b: CoreExpr) -> CoreExpr {
        let ty = MatrixType::new(a.ty.rows.clone(), b.ty.cols.clone(), a.ty.sr);
        CoreExpr::new(CoreKind::MatMul(Box::new(a), Box::new(b)), ty)
    }

    pub fn ones(dim: Dim, sr: SemiringTag) -> CoreExpr {
        CoreExpr::new(CoreKind::OneVector, MatrixType::vector(dim, sr))
    }

    /// Builds an `Apply`, folding constant 1x1 arguments into `f`.
    pub fn apply(f: PointwiseFn, args: Vec<CoreExpr>, ty: MatrixType) -> CoreExpr {
        let mut params = Vec::new();
        let mut kept = Vec::new();
        let mut map = Vec::new();
        let mut lits: Vec<Option<Value>> = Vec::new();
        for (p, a) in f.params.iter().zip(args) {
            match a.as_constant() {
                Some(v) if a.ty.is_scalar() => {
                    map.push(usize::MAX);
                    lits.push(Some(v));
                }
                _ => {
                    map.push(params.len());
                    lits.push(None);
                    params.push(p.clone());
                    kept.push(a);
                }
            }
        }
        let body = if lits.iter().any(|l| l.is_some()) {
            substitute_params(&f.body, &lits, &map)
        } else {
            f.body
        };
        CoreExpr::new(
            CoreKind::Apply(
                PointwiseFn {
                    params,
                    body,
                    result: f.result,
                },
                kept,
            ),
            ty,
        )
    }

    pub fn children(&self) -> Vec<&CoreExpr> {
        match &self.kind {
            CoreKind::Var(_) | CoreKind::OneVector | CoreKind::ZeroMatrix => Vec::new(),
            CoreKind::Transpose(a) | CoreKind::Diag(a) | CoreKind::PickAny(a) | CoreKind::Densify(a) => {
                alloc::vec![&**a]
            }
            CoreKind::Apply(_, args) => args.iter().collect(),
            CoreKind::MatMul(a, b) => alloc::vec![&**a, &**b],
            CoreKind::ForLoop {
                bound, states, body, ..
            } => {
                let mut out = Vec::new();
                if let LoopBound::Scalar(b) = bound {
                    out.push(&**b);
                }
                out.extend(states.iter().map(|s| &s.init));
                out.extend(body.iter().map(|u| &u.update));
                out
            }
        }
    }

    /// Rebuilds the tree bottom-up, passing every rebuilt node through `f`.
    pub fn rewrite(self, f: &mut dyn FnMut(CoreExpr) -> CoreExpr) -> CoreExpr {
        let CoreExpr { kind, ty } = self;
        let kind = match kind {
            k @ (CoreKind::Var(_) | CoreKind::OneVector | CoreKind::ZeroMatrix) => k,
            CoreKind::Transpose(a) => CoreKind::Transpose(Box::new(a.rewrite(f))),
            CoreKind::Diag(a) => CoreKind::Diag(Box::new(a.rewrite(f))),
            CoreKind::PickAny(a) => CoreKind::PickAny(Box::new(a.rewrite(f))),
            CoreKind::Densify(a) => CoreKind::Densify(Box::new(a.rewrite(f))),
            CoreKind::Apply(g, args) => CoreKind::Apply(g, args.into_iter().map(|a| a.rewrite(f)).collect()),
            CoreKind::MatMul(a, b) => CoreKind::MatMul(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            CoreKind::ForLoop {
                bound,
                index,
                states,
                body,
            } => CoreKind::ForLoop {
                bound: match bound {
                    LoopBound::Scalar(b) => LoopBound::Scalar(Box::new(b.rewrite(f))),
                    d => d,
                },
                index,
                states: states
                    .into_iter()
                    .map(|s| LoopState {
                        name: s.name,
                        init: s.init.rewrite(f),
                    })
                    .collect(),
                body: body
                    .into_iter()
                    .map(|u| LoopUpdate {
                        name: u.name,
                        update: u.update.rewrite(f),
                    })
                    .collect(),
            },
        };
        f(CoreExpr { kind, ty })
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }
}

fn substitute_params(e: &ScalarExpr, lits: &[Option<Value>], map: &[usize]) -> ScalarExpr {
    let sub = |x: &ScalarExpr| Box::new(substitute_params(x, lits, map));
    match e {
        ScalarExpr::Param(i) => match lits[*i] {
            Some(v) => ScalarExpr::Lit(v),
            None => ScalarExpr::Param(map[*i]),
        },
        ScalarExpr::Lit(v) => ScalarExpr::Lit(*v),
        ScalarExpr::Bin(op, a, b) => ScalarExpr::Bin(*op, sub(a), sub(b)),
        ScalarExpr::Cast(t, a) => ScalarExpr::Cast(*t, sub(a)),
        ScalarExpr::Select(c, t, x) => ScalarExpr::Select(sub(c), sub(t), sub(x)),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreFunction {
    pub name: String,
    pub params: Vec<(String, MatrixType)>,
    pub body: CoreExpr,
}

/// Lowered functions by name. Calls between functions are inlined, so each
/// entry is self-contained.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoreProgram {
    pub functions: BTreeMap<String, CoreFunction>,
}

/// Checks structural invariants of lowered Core. Returns the violations
/// found, empty if none.
pub fn validate_core(cp: &CoreProgram) -> Vec<String> {
    let mut out = Vec::new();
    for f in cp.functions.values() {
        let mut scope: BTreeMap<String, MatrixType> = f.params.iter().cloned().collect();
        validate(&f.body, &mut scope, &f.name, &mut out);
    }
    out
}

fn validate(e: &CoreExpr, scope: &mut BTreeMap<String, MatrixType>, fname: &str, out: &mut Vec<String>) {
    let mut bad = |msg: String| out.push(format!("in `{fname}`: {msg}"));
    let t = &e.ty;
    match &e.kind {
        CoreKind::Var(n) => match scope.get(n) {
            None => bad(format!("free variable `{n}`")),
            Some(bound) if bound != t => bad(format!("variable `{n}` used at {t} but bound at {bound}")),
            _ => {}
        },
        CoreKind::Transpose(a) => {
            if a.ty.transposed() != *t {
                bad(format!("transpose of {} typed {t}", a.ty));
            }
        }
        CoreKind::Diag(a) => {
            if !a.ty.cols.is_one() || *t != MatrixType::new(a.ty.rows.clone(), a.ty.rows.clone(), a.ty.sr) {
                bad(format!("diag of {} typed {t}", a.ty));
            }
        }
        CoreKind::PickAny(a) | CoreKind::Densify(a) => {
            if a.ty != *t {
                bad(format!("shape-preserving node changes {} to {t}", a.ty));
            }
        }
        CoreKind::Apply(f, args) => {
            if f.arity() != args.len() {
                bad(format!("apply of arity {} to {} arguments", f.arity(), args.len()));
            }
            if f.result != t.sr {
                bad(format!("apply result {} typed {t}", f.result));
            }
            if args.is_empty() && !t.is_scalar() {
                bad(format!("nullary apply typed {t}"));
            }
            for ((_, psr), a) in f.params.iter().zip(args) {
                if a.ty.sr != *psr {
                    bad(format!("apply argument {} for parameter of {psr}", a.ty));
                }
                if !a.ty.same_shape(t) && !a.ty.is_scalar() {
                    bad(format!("apply argument {} neither matches {t} nor broadcasts", a.ty));
                }
            }
            if f.body.result_tag(&f.param_tags()) != Some(f.result) {
                bad(format!("ill-typed scalar function {f}"));
            }
        }
        CoreKind::MatMul(a, b) => {
            if a.ty.cols != b.ty.rows || a.ty.sr != b.ty.sr {
                bad(format!("product of {} and {}", a.ty, b.ty));
            }
            if *t != MatrixType::new(a.ty.rows.clone(), b.ty.cols.clone(), a.ty.sr) {
                bad(format!("product of {} and {} typed {t}", a.ty, b.ty));
            }
        }
        CoreKind::OneVector => {
            if !t.cols.is_one() {
                bad(format!("one-vector typed {t}"));
            }
        }
        CoreKind::ZeroMatrix => {}
        CoreKind::ForLoop {
            bound,
            index,
            states,
            body,
        } => {
            if let LoopBound::Scalar(b) = bound {
                if b.ty != MatrixType::scalar(SemiringTag::Int) {
                    bad(format!("loop bound typed {}", b.ty));
                }
                validate(b, scope, fname, out);
            }
            let mut bad = |msg: String| out.push(format!("in `{fname}`: {msg}"));
            if states.is_empty() {
                bad(String::from("loop without state"));
            } else if states[0].init.ty != *t {
                bad(format!(
                    "loop result typed {t} but first state is {}",
                    states[0].init.ty
                ));
            }
            if states.len() != body.len() {
                bad(format!("{} states but {} updates", states.len(), body.len()));
            }
            for (s, u) in states.iter().zip(body) {
                if s.name != u.name {
                    bad(format!("update `{}` does not match state `{}`", u.name, s.name));
                }
                if s.init.ty != u.update.ty {
                    bad(format!(
                        "state `{}` changes type from {} to {}",
                        s.name, s.init.ty, u.update.ty
                    ));
                }
            }
            for s in states {
                validate(&s.init, scope, fname, out);
            }
            let saved = scope.clone();
            scope.insert(index.clone(), MatrixType::scalar(SemiringTag::Int));
            for s in states {
                scope.insert(s.name.clone(), s.init.ty.clone());
            }
            for u in body {
                validate(&u.update, scope, fname, out);
            }
            *scope = saved;
            return;
        }
    }
    for c in e.children() {
        validate(c, scope, fname, out);
    }
}

/// Writes `e` as an indented s-expression.
pub fn write_core(out: &mut String, e: &CoreExpr, depth: usize) {
    let pad = |out: &mut String, d: usize| {
        for _ in 0..d {
            out.push_str("  ");
        }
    };
    pad(out, depth);
    let _ = match &e.kind {
        CoreKind::Var(n) => write!(out, "{n}"),
        CoreKind::OneVector => write!(out, "(ones {} {})", e.ty.sr, e.ty.rows),
        CoreKind::ZeroMatrix => write!(out, "(zero {} {} {})", e.ty.sr, e.ty.rows, e.ty.cols),
        CoreKind::Apply(f, args) if args.is_empty() => match e.as_constant() {
            Some(v) => write!(out, "{}", LitDisplay(v)),
            None => write!(out, "(apply {f})"),
        },
        _ => {
            let (head, extra) = match &e.kind {
                CoreKind::Transpose(_) => (String::from("transpose"), None),
                CoreKind::Diag(_) => (String::from("diag"), None),
                CoreKind::PickAny(_) => (String::from("pick-any"), None),
                CoreKind::Densify(_) => (String::from("densify"), None),
                CoreKind::MatMul(..) => (String::from("matmul"), None),
                CoreKind::Apply(f, _) => (format!("apply {f}"), None),
                CoreKind::ForLoop { bound, index, .. } => {
                    let b = match bound {
                        LoopBound::Dim(d) => format!("{d}"),
                        LoopBound::Scalar(_) => String::from("scalar"),
                    };
                    (format!("for {index} {b}"), Some(()))
                }
                _ => unreachable!(),
            };
            out.push('(');
            out.push_str(&head);
            if extra.is_some() {
                let CoreKind::ForLoop {
                    bound, states, body, ..
                } = &e.kind
                else {
                    unreachable!()
                };
                if let LoopBound::Scalar(b) = bound {
                    out.push('\n');
                    pad(out, depth + 1);
                    out.push_str("(bound\n");
                    write_core(out, b, depth + 2);
                    out.push(')');
                }
                for s in states {
                    out.push('\n');
                    pad(out, depth + 1);
                    let _ = writeln!(out, "(state {}", s.name);
                    write_core(out, &s.init, depth + 2);
                    out.push(')');
                }
                for u in body {
                    out.push('\n');
                    pad(out, depth + 1);
                    let _ = writeln!(out, "(update {}", u.name);
                    write_core(out, &u.update, depth + 2);
                    out.push(')');
                }
            } else {
                for c in e.children() {
                    out.push('\n');
                    write_core(out, c, depth + 1);
                }
            }
            out.push(')');
            Ok(())
        }
    };
}

struct LitDisplay(Value);

impl fmt::Display for LitDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::scalar::write_literal(f, &self.0)
    }
}

/// The `--dump-core` text: one s-expression per function.
pub fn dump_core(cp: &CoreProgram) -> String {
    let mut out = String::new();
    for f in cp.functions.values() {
        let _ = write!(out, "(func {} (", f.name);
        for (i, (n, t)) in f.params.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({n} {t})");
        }
        out.push_str(")\n");
        write_core(&mut out, &f.body, 1);
        out.push_str(")\n");
    }
    out
}
