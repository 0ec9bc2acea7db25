//! Surface to Core lowering: desugaring, substitution of local variables,
//! inlining of user calls, and loop state discovery.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::*;
use crate::frontend::ast::{self, ArithOp, BoundAnn, Call, Expr, ExprKind, FuncDecl, PwOp, Stmt, StmtKind};
use crate::scalar::{PointwiseFn, ScalarExpr, ScalarOp};
use crate::semiring::{SemiringTag, Value};
use crate::typecheck::TypedProgram;
use crate::types::{Dim, MatrixType};

type DimSubst = BTreeMap<String, Dim>;

struct Lowerer<'t> {
    tp: &'t TypedProgram,
    fresh: u32,
}

fn subst_dim(d: &Dim, s: &DimSubst) -> Dim {
    match d {
        Dim::Symbol(n) => s.get(n).cloned().unwrap_or_else(|| d.clone()),
        lit => lit.clone(),
    }
}

fn subst_ty(t: &MatrixType, s: &DimSubst) -> MatrixType {
    MatrixType::new(subst_dim(&t.rows, s), subst_dim(&t.cols, s), t.sr)
}

fn pw_scalar_op(op: PwOp) -> ScalarOp {
    match op {
        PwOp::Mul => ScalarOp::Mul,
        PwOp::Div => ScalarOp::Div,
        PwOp::Add => ScalarOp::Add,
        PwOp::Sub => ScalarOp::Sub,
        PwOp::Eq => ScalarOp::Eq,
    }
}

fn literal_value(l: &ast::Literal) -> Value {
    match l {
        ast::Literal::Bool(b) => Value::Bool(*b),
        ast::Literal::Int(i) => Value::Int(*i),
        ast::Literal::Real(x) => Value::Real(*x),
    }
}

/// Names assigned anywhere in `body`, nested loops included, in order of
/// first assignment.
fn assigned_names(body: &[Stmt], out: &mut Vec<String>) {
    for s in body {
        let target = match &s.kind {
            StmtKind::Assign { target, .. }
            | StmtKind::PlusAssign { target, .. }
            | StmtKind::MaskedAssign { target, .. }
            | StmtKind::FillAssign { target, .. } => target,
            StmtKind::For { body, .. } => {
                assigned_names(body, out);
                continue;
            }
            StmtKind::Return(_) => continue,
        };
        if !out.contains(target) {
            out.push(target.clone());
        }
    }
}

type Env = BTreeMap<String, CoreExpr>;

impl Lowerer<'_> {
    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}@{}", self.fresh)
    }

    fn ty(&self, e: &Expr, s: &DimSubst) -> MatrixType {
        subst_ty(self.tp.type_of(e), s)
    }

    fn lambda(&self, l: &ast::Lambda, result: SemiringTag) -> PointwiseFn {
        fn conv(e: &Expr, names: &[(String, SemiringTag)]) -> ScalarExpr {
            match &e.kind {
                ExprKind::Var(n) => ScalarExpr::Param(names.iter().position(|(p, _)| p == n).expect("checked lambda")),
                ExprKind::Lit(l) => ScalarExpr::Lit(literal_value(l)),
                ExprKind::MatMul(a, b) => ScalarExpr::bin(ScalarOp::Mul, conv(a, names), conv(b, names)),
                ExprKind::Pointwise(op, a, b) => ScalarExpr::bin(pw_scalar_op(*op), conv(a, names), conv(b, names)),
                ExprKind::Arith(op, a, b) => {
                    let op = match op {
                        ArithOp::Add => ScalarOp::Add,
                        ArithOp::Sub => ScalarOp::Sub,
                    };
                    ScalarExpr::bin(op, conv(a, names), conv(b, names))
                }
                ExprKind::Transpose(a) => conv(a, names),
                ExprKind::Call(Call::Cast(t, a)) => ScalarExpr::Cast(*t, Box::new(conv(a, names))),
                ExprKind::Call(_) => unreachable!("rejected by the type checker"),
            }
        }
        PointwiseFn {
            params: l.params.clone(),
            body: conv(&l.body, &l.params),
            result,
        }
    }

    fn expr(&mut self, e: &Expr, env: &Env, s: &DimSubst) -> CoreExpr {
        let ty = self.ty(e, s);
        match &e.kind {
            ExprKind::Var(n) => env[n].clone(),
            ExprKind::Lit(l) => CoreExpr::constant(literal_value(l)),
            ExprKind::MatMul(a, b) => {
                let (la, lb) = (self.expr(a, env, s), self.expr(b, env, s));
                if self.tp.vecmat.contains(&e.id.0) {
                    CoreExpr::matmul(CoreExpr::transpose(lb), la)
                } else {
                    CoreExpr::matmul(la, lb)
                }
            }
            ExprKind::Pointwise(op, a, b) => {
                let (la, lb) = (self.expr(a, env, s), self.expr(b, env, s));
                let f = PointwiseFn::binary(la.ty.sr, pw_scalar_op(*op));
                CoreExpr::apply(f, alloc::vec![la, lb], ty)
            }
            ExprKind::Transpose(a) => CoreExpr::transpose(self.expr(a, env, s)),
            ExprKind::Arith(op, a, b) => {
                let (la, lb) = (self.expr(a, env, s), self.expr(b, env, s));
                let op = match op {
                    ArithOp::Add => ScalarOp::Add,
                    ArithOp::Sub => ScalarOp::Sub,
                };
                CoreExpr::apply(PointwiseFn::binary(ty.sr, op), alloc::vec![la, lb], ty)
            }
            ExprKind::Call(call) => match call {
                Call::Apply { func, args } => {
                    let f = self.lambda(func, ty.sr);
                    let args = args.iter().map(|a| self.expr(a, env, s)).collect();
                    CoreExpr::apply(f, args, ty)
                }
                Call::Reduce(a) => {
                    let la = self.expr(a, env, s);
                    let (rows, cols, sr) = (la.ty.rows.clone(), la.ty.cols.clone(), la.ty.sr);
                    let row_sums = CoreExpr::matmul(la, CoreExpr::ones(cols, sr));
                    CoreExpr::matmul(CoreExpr::transpose(CoreExpr::ones(rows, sr)), row_sums)
                }
                Call::ReduceRows(a) => {
                    let la = self.expr(a, env, s);
                    let (cols, sr) = (la.ty.cols.clone(), la.ty.sr);
                    CoreExpr::matmul(la, CoreExpr::ones(cols, sr))
                }
                Call::Diag(a) => CoreExpr::new(CoreKind::Diag(Box::new(self.expr(a, env, s))), ty),
                Call::PickAny(a) => CoreExpr::new(CoreKind::PickAny(Box::new(self.expr(a, env, s))), ty),
                Call::Cast(target, a) => {
                    let la = self.expr(a, env, s);
                    if la.ty.sr == *target {
                        return la;
                    }
                    let f = PointwiseFn {
                        params: alloc::vec![(String::from("x"), la.ty.sr)],
                        body: ScalarExpr::Cast(*target, Box::new(ScalarExpr::Param(0))),
                        result: *target,
                    };
                    CoreExpr::apply(f, alloc::vec![la], ty)
                }
                Call::ZeroVector(..) => CoreExpr::new(CoreKind::ZeroMatrix, ty),
                Call::User { name, args } => {
                    let args: Vec<CoreExpr> = args.iter().map(|a| self.expr(a, env, s)).collect();
                    let callee_subst: DimSubst = self.tp.call_dims[&e.id.0]
                        .iter()
                        .map(|(k, d)| (k.clone(), subst_dim(d, s)))
                        .collect();
                    let callee = self.tp.ast.function(name).expect("checked call");
                    self.inline(callee, args, &callee_subst)
                }
            },
        }
    }

    fn inline(&mut self, f: &FuncDecl, args: Vec<CoreExpr>, s: &DimSubst) -> CoreExpr {
        let mut env: Env = f.params.iter().map(|p| p.name.clone()).zip(args).collect();
        self.block(&f.body, &mut env, s).expect("checked function returns")
    }

    /// Lowers statements, updating `env`. Returns the lowered return value
    /// if the block ends with one.
    fn block(&mut self, body: &[Stmt], env: &mut Env, s: &DimSubst) -> Option<CoreExpr> {
        for st in body {
            match &st.kind {
                StmtKind::Assign { target, value } => {
                    let v = self.expr(value, env, s);
                    env.insert(target.clone(), v);
                }
                StmtKind::PlusAssign { target, value } => {
                    let old = env[target].clone();
                    let v = self.expr(value, env, s);
                    let ty = old.ty.clone();
                    let sum = CoreExpr::apply(PointwiseFn::add(ty.sr), alloc::vec![old, v], ty);
                    env.insert(target.clone(), sum);
                }
                StmtKind::MaskedAssign { target, mask, value } => {
                    let old = env[target].clone();
                    let m = env[mask].clone();
                    let v = self.expr(value, env, s);
                    let ty = old.ty.clone();
                    let f = PointwiseFn {
                        params: alloc::vec![
                            (String::from("m"), m.ty.sr),
                            (String::from("b"), ty.sr),
                            (String::from("a"), ty.sr),
                        ],
                        body: ScalarExpr::Select(
                            Box::new(ScalarExpr::Param(0)),
                            Box::new(ScalarExpr::Param(1)),
                            Box::new(ScalarExpr::Param(2)),
                        ),
                        result: ty.sr,
                    };
                    env.insert(target.clone(), CoreExpr::apply(f, alloc::vec![m, v, old], ty));
                }
                StmtKind::FillAssign { target, value } => {
                    let old = env[target].clone();
                    let v = self.expr(value, env, s);
                    let ty = old.ty.clone();
                    let f = PointwiseFn {
                        params: alloc::vec![(String::from("x"), ty.sr), (String::from("c"), ty.sr)],
                        body: ScalarExpr::Param(1),
                        result: ty.sr,
                    };
                    env.insert(target.clone(), CoreExpr::apply(f, alloc::vec![old, v], ty));
                }
                StmtKind::For { index, bound, body } => self.for_loop(index, bound, body, env, s),
                StmtKind::Return(value) => return Some(self.expr(value, env, s)),
            }
        }
        None
    }

    fn for_loop(&mut self, index: &str, bound: &BoundAnn, body: &[Stmt], env: &mut Env, s: &DimSubst) {
        let bound = match bound {
            BoundAnn::Name(n) => match env.get(n) {
                Some(v) => LoopBound::Scalar(Box::new(v.clone())),
                None => LoopBound::Dim(subst_dim(&Dim::sym(n), s)),
            },
            BoundAnn::Literal(n) => LoopBound::Dim(Dim::Literal(*n)),
        };
        let mut names = Vec::new();
        assigned_names(body, &mut names);
        let state_names: Vec<String> = names.into_iter().filter(|n| env.contains_key(n)).collect();
        if state_names.is_empty() {
            return;
        }
        let index_var = self.fresh(index);
        let fresh: Vec<String> = state_names.iter().map(|n| self.fresh(n)).collect();
        let mut body_env = env.clone();
        body_env.insert(
            index.into(),
            CoreExpr::var(&index_var, MatrixType::scalar(SemiringTag::Int)),
        );
        for (n, f) in state_names.iter().zip(&fresh) {
            let ty = env[n].ty.clone();
            body_env.insert(n.clone(), CoreExpr::var(f, ty));
        }
        self.block(body, &mut body_env, s);
        let states: Vec<LoopState> = state_names
            .iter()
            .zip(&fresh)
            .map(|(n, f)| LoopState {
                name: f.clone(),
                init: env[n].clone(),
            })
            .collect();
        let updates: Vec<LoopUpdate> = state_names
            .iter()
            .zip(&fresh)
            .map(|(n, f)| LoopUpdate {
                name: f.clone(),
                update: body_env[n].clone(),
            })
            .collect();
        for (k, n) in state_names.iter().enumerate() {
            // Each state's value after the loop is a loop with that state first.
            let mut st = states.clone();
            let mut up = updates.clone();
            st[..=k].rotate_right(1);
            up[..=k].rotate_right(1);
            let ty = st[0].init.ty.clone();
            let lp = CoreExpr::new(
                CoreKind::ForLoop {
                    bound: bound.clone(),
                    index: index_var.clone(),
                    states: st,
                    body: up,
                },
                ty,
            );
            env.insert(n.clone(), lp);
        }
    }
}

/// Lowers one function of a checked program, inlining its calls.
pub fn lower_function(tp: &TypedProgram, name: &str) -> Option<CoreFunction> {
    let f = tp.ast.function(name)?;
    let sig = &tp.signatures[name];
    let mut lw = Lowerer { tp, fresh: 0 };
    let args = sig.params.iter().map(|(n, t)| CoreExpr::var(n, t.clone())).collect();
    let body = lw.inline(f, args, &DimSubst::new());
    Some(CoreFunction {
        name: name.into(),
        params: sig.params.clone(),
        body,
    })
}

/// Lowers every function of a checked program.
pub fn lower(tp: &TypedProgram) -> CoreProgram {
    let mut cp = CoreProgram::default();
    for f in &tp.ast.functions {
        if let Some(cf) = lower_function(tp, &f.name) {
            cp.functions.insert(f.name.clone(), cf);
        }
    }
    cp
}
