//! Type checking: shapes, dimension symbols and semirings.
//!
//! Functions are checked independently against the declared signatures of
//! their callees, so declaration order never matters.

pub mod dims;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diag::{Diagnostic, Span, Stage};
use crate::frontend::ast::*;
use crate::frontend::parser::check_no_recursion;
use crate::semiring::{cast_supported, SemiringTag};
use crate::types::{Dim, MatrixType};
pub use dims::{unify_dims, DimEnv, DimError};

#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    pub params: Vec<(String, MatrixType)>,
    pub ret: MatrixType,
}

impl Signature {
    /// Dimension symbols appearing in parameter types, in order of first use.
    pub fn symbols(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (_, t) in &self.params {
            for d in [&t.rows, &t.cols] {
                if let Dim::Symbol(s) = d {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
            }
        }
        out
    }
}

/// The checked program: the syntax tree plus side tables keyed by
/// [`ExprId`] value.
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub ast: Ast,
    pub signatures: BTreeMap<String, Signature>,
    /// Resolved type of every expression, lambda bodies included.
    pub types: BTreeMap<u32, MatrixType>,
    /// For each user call: callee dimension symbol to caller dimension.
    pub call_dims: BTreeMap<u32, BTreeMap<String, Dim>>,
    /// Statement-level `v * G` products with a column vector on the left,
    /// to be read as `G.T * v`.
    pub vecmat: BTreeSet<u32>,
}

impl TypedProgram {
    pub fn type_of(&self, e: &Expr) -> &MatrixType {
        &self.types[&e.id.0]
    }
}

fn err(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(Stage::Typecheck, span, msg)
}

fn signature(f: &FuncDecl) -> Result<Signature, Diagnostic> {
    let mut params = Vec::new();
    let mut seen = BTreeSet::new();
    for p in &f.params {
        if !seen.insert(p.name.as_str()) {
            return Err(err(p.span, format!("duplicate parameter `{}`", p.name)));
        }
        params.push((p.name.clone(), p.ty.matrix_type()));
    }
    let sig = Signature {
        params,
        ret: f.ret.matrix_type(),
    };
    let syms = sig.symbols();
    for d in f.ret.dims() {
        if let Dim::Symbol(s) = d {
            if !syms.contains(s) {
                return Err(err(
                    f.ret.span,
                    format!(
                        "dimension `{s}` in the return type of `{}` does not appear in any parameter",
                        f.name
                    ),
                ));
            }
        }
    }
    Ok(sig)
}

/// Type checks every function of `ast`.
pub fn check_program(ast: &Ast) -> Result<TypedProgram, Diagnostic> {
    check_no_recursion(ast)?;
    let mut signatures = BTreeMap::new();
    for f in &ast.functions {
        if BUILTINS.contains(&f.name.as_str()) {
            return Err(err(
                f.span,
                format!("`{}` is a builtin and cannot be redefined", f.name),
            ));
        }
        if signatures.insert(f.name.clone(), signature(f)?).is_some() {
            return Err(err(f.span, format!("function `{}` is defined twice", f.name)));
        }
    }
    let mut tp = TypedProgram {
        ast: ast.clone(),
        signatures: BTreeMap::new(),
        types: BTreeMap::new(),
        call_dims: BTreeMap::new(),
        vecmat: BTreeSet::new(),
    };
    for f in &ast.functions {
        let mut c = FnChecker::new(&signatures, f);
        c.function(f)?;
        c.finish(&mut tp)?;
    }
    tp.signatures = signatures;
    Ok(tp)
}

struct Scope {
    vars: BTreeMap<String, MatrixType>,
    index: Option<String>,
}

struct FnChecker<'p> {
    sigs: &'p BTreeMap<String, Signature>,
    dims: DimEnv,
    rigid_spans: BTreeMap<String, Span>,
    scopes: Vec<Scope>,
    types: Vec<(u32, MatrixType, Span)>,
    calls: Vec<(u32, BTreeMap<String, Dim>)>,
    vecmat: BTreeSet<u32>,
    fresh: u32,
}

type TResult<T> = Result<T, Diagnostic>;

impl<'p> FnChecker<'p> {
    fn new(sigs: &'p BTreeMap<String, Signature>, f: &FuncDecl) -> Self {
        let mut dims = DimEnv::new();
        let mut rigid_spans = BTreeMap::new();
        let mut vars = BTreeMap::new();
        for p in &f.params {
            for d in p.ty.dims() {
                if let Dim::Symbol(s) = d {
                    dims.declare_rigid(s);
                    rigid_spans.entry(s.clone()).or_insert(p.span);
                }
            }
            vars.insert(p.name.clone(), p.ty.matrix_type());
        }
        FnChecker {
            sigs,
            dims,
            rigid_spans,
            scopes: alloc::vec![Scope { vars, index: None }],
            types: Vec::new(),
            calls: Vec::new(),
            vecmat: BTreeSet::new(),
            fresh: 0,
        }
    }

    fn show(&mut self, t: &MatrixType) -> String {
        let r = self.dims.resolve(&t.rows);
        let c = self.dims.resolve(&t.cols);
        MatrixType::new(r, c, t.sr).to_string()
    }

    fn dim_error(&self, e: DimError, span: Span, what: &str) -> Diagnostic {
        let mut msg = format!("{what}: {e}");
        let names: Vec<&String> = match &e {
            DimError::Rigid(a, b) => alloc::vec![a, b],
            DimError::RigidLiteral(a, _) => alloc::vec![a],
            DimError::Literals(..) => Vec::new(),
        };
        for n in names {
            if let Some(s) = self.rigid_spans.get(n) {
                msg.push_str(&format!("; `{n}` comes from the parameter at {s}"));
            }
        }
        err(span, msg)
    }

    fn unify_shape(&mut self, a: &MatrixType, b: &MatrixType, span: Span, what: &str) -> TResult<()> {
        if let Err(e) = self
            .dims
            .unify(&a.rows, &b.rows)
            .and_then(|_| self.dims.unify(&a.cols, &b.cols))
        {
            let (sa, sb) = (self.show(a), self.show(b));
            return Err(self.dim_error(e, span, &format!("{what} ({sa} vs {sb})")));
        }
        Ok(())
    }

    fn same_sr(&self, a: SemiringTag, b: SemiringTag, span: Span, what: &str) -> TResult<()> {
        if a != b {
            return Err(err(span, format!("semiring mismatch in {what}: {a} vs {b}")));
        }
        Ok(())
    }

    fn unify_ty(&mut self, a: &MatrixType, b: &MatrixType, span: Span, what: &str) -> TResult<()> {
        self.same_sr(a.sr, b.sr, span, what)?;
        self.unify_shape(a, b, span, what)
    }

    fn is_scalar(&mut self, t: &MatrixType) -> bool {
        self.dims.resolve(&t.rows).is_one() && self.dims.resolve(&t.cols).is_one()
    }

    fn require_scalar(&mut self, t: &MatrixType, span: Span, what: &str) -> TResult<()> {
        if self.dims.unify(&t.rows, &Dim::ONE).is_err() || self.dims.unify(&t.cols, &Dim::ONE).is_err() {
            let s = self.show(t);
            return Err(err(span, format!("{what} must be a scalar, found {s}")));
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<(usize, &MatrixType)> {
        self.scopes
            .iter()
            .enumerate()
            .rev()
            .find_map(|(i, s)| s.vars.get(name).map(|t| (i, t)))
    }

    fn var(&self, name: &str, span: Span) -> TResult<MatrixType> {
        self.lookup(name)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| err(span, format!("unknown variable `{name}`")))
    }

    fn record(&mut self, e: &Expr, t: MatrixType) -> MatrixType {
        self.types.push((e.id.0, t.clone(), e.span));
        t
    }

    fn check_pw_op(&self, op: PwOp, sr: SemiringTag, span: Span) -> TResult<()> {
        match op {
            PwOp::Div if sr != SemiringTag::Real => {
                Err(err(span, format!("pointwise `/` requires real operands, found {sr}")))
            }
            PwOp::Sub if !matches!(sr, SemiringTag::Int | SemiringTag::Real) => Err(err(
                span,
                format!("subtraction requires int or real operands, found {sr}"),
            )),
            _ => Ok(()),
        }
    }

    fn matmul(&mut self, e: &Expr, a: &Expr, b: &Expr, allow_vecmat: bool) -> TResult<MatrixType> {
        let ta = self.expr(a)?;
        let tb = self.expr(b)?;
        self.same_sr(ta.sr, tb.sr, e.span, "matrix product")?;
        let t = match self.dims.unify(&ta.cols, &tb.rows) {
            Ok(()) => MatrixType::new(ta.rows.clone(), tb.cols.clone(), ta.sr),
            Err(first) => {
                let left_is_column = self.dims.resolve(&ta.cols).is_one();
                if allow_vecmat && left_is_column && self.dims.unify(&ta.rows, &tb.rows).is_ok() {
                    self.vecmat.insert(e.id.0);
                    MatrixType::vector(tb.cols.clone(), ta.sr)
                } else {
                    let (sa, sb) = (self.show(&ta), self.show(&tb));
                    return Err(self.dim_error(
                        first,
                        e.span,
                        &format!("matrix product needs left columns to match right rows ({sa} * {sb})"),
                    ));
                }
            }
        };
        Ok(self.record(e, t))
    }

    /// Right-hand side of `=` or `+=`: like [`Self::expr`] but admits the
    /// vector-times-matrix reading of a top-level product.
    fn rhs(&mut self, e: &Expr) -> TResult<MatrixType> {
        match &e.kind {
            ExprKind::MatMul(a, b) => self.matmul(e, a, b, true),
            _ => self.expr(e),
        }
    }

    fn expr(&mut self, e: &Expr) -> TResult<MatrixType> {
        let t = match &e.kind {
            ExprKind::Var(n) => self.var(n, e.span)?,
            ExprKind::Lit(l) => MatrixType::scalar(l.semiring()),
            ExprKind::MatMul(a, b) => return self.matmul(e, a, b, false),
            ExprKind::Pointwise(op, a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                let what = format!("pointwise `(.{})`", op.symbol());
                self.same_sr(ta.sr, tb.sr, e.span, &what)?;
                self.unify_shape(&ta, &tb, e.span, &what)?;
                self.check_pw_op(*op, ta.sr, e.span)?;
                ta
            }
            ExprKind::Transpose(a) => self.expr(a)?.transposed(),
            ExprKind::Arith(op, a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                self.require_scalar(&ta, a.span, "operand of scalar arithmetic")?;
                self.require_scalar(&tb, b.span, "operand of scalar arithmetic")?;
                self.same_sr(ta.sr, tb.sr, e.span, "scalar arithmetic")?;
                if *op == ArithOp::Sub {
                    self.check_pw_op(PwOp::Sub, ta.sr, e.span)?;
                }
                MatrixType::scalar(ta.sr)
            }
            ExprKind::Call(call) => self.call(e, call)?,
        };
        Ok(self.record(e, t))
    }

    fn call(&mut self, e: &Expr, call: &Call) -> TResult<MatrixType> {
        Ok(match call {
            Call::Apply { func, args } => {
                if args.is_empty() {
                    return Err(err(e.span, "apply needs at least one matrix argument"));
                }
                if func.params.len() != args.len() {
                    return Err(err(
                        func.span,
                        format!(
                            "function takes {} parameters but apply passes {} arguments",
                            func.params.len(),
                            args.len()
                        ),
                    ));
                }
                let mut lambda_scope = BTreeMap::new();
                for (n, sr) in &func.params {
                    if lambda_scope.insert(n.clone(), *sr).is_some() {
                        return Err(err(func.span, format!("duplicate parameter `{n}`")));
                    }
                }
                let result = self.lambda_body(&func.body, &lambda_scope)?;
                let first = self.expr(&args[0])?;
                for (i, a) in args.iter().enumerate() {
                    let ta = if i == 0 { first.clone() } else { self.expr(a)? };
                    let (pname, psr) = &func.params[i];
                    if ta.sr != *psr {
                        return Err(err(
                            a.span,
                            format!("argument for `{pname}` has semiring {}, expected {psr}", ta.sr),
                        ));
                    }
                    if i > 0 && !self.is_scalar(&ta) {
                        self.unify_shape(
                            &first,
                            &ta,
                            a.span,
                            "apply arguments must be scalars or match the first argument",
                        )?;
                    }
                }
                first.with_sr(result)
            }
            Call::Reduce(a) => MatrixType::scalar(self.expr(a)?.sr),
            Call::ReduceRows(a) => {
                let t = self.expr(a)?;
                MatrixType::vector(t.rows, t.sr)
            }
            Call::Diag(a) => {
                let t = self.expr(a)?;
                if self.dims.unify(&t.cols, &Dim::ONE).is_err() {
                    let s = self.show(&t);
                    return Err(err(a.span, format!("diag expects a vector, found {s}")));
                }
                MatrixType::new(t.rows.clone(), t.rows, t.sr)
            }
            Call::PickAny(a) => self.expr(a)?,
            Call::Cast(target, a) => {
                let t = self.expr(a)?;
                if !cast_supported(t.sr, *target) {
                    return Err(err(e.span, format!("unsupported cast pair: {} to {target}", t.sr)));
                }
                t.with_sr(*target)
            }
            Call::ZeroVector(sr, d) => {
                if let Dim::Symbol(s) = d {
                    if !self.dims.is_rigid(s) {
                        return Err(err(e.span, format!("unknown dimension symbol `{s}`")));
                    }
                }
                MatrixType::vector(d.clone(), *sr)
            }
            Call::User { name, args } => {
                let sig = self
                    .sigs
                    .get(name)
                    .ok_or_else(|| err(e.span, format!("unknown function `{name}`")))?;
                if sig.params.len() != args.len() {
                    return Err(err(
                        e.span,
                        format!("`{name}` takes {} arguments, got {}", sig.params.len(), args.len()),
                    ));
                }
                let mut subst = BTreeMap::new();
                for s in sig.symbols() {
                    self.fresh += 1;
                    subst.insert(s.clone(), Dim::Symbol(format!("{name}.{s}#{}", self.fresh)));
                }
                let inst = |t: &MatrixType| {
                    let d = |d: &Dim| match d {
                        Dim::Symbol(s) => subst[s].clone(),
                        lit => lit.clone(),
                    };
                    MatrixType::new(d(&t.rows), d(&t.cols), t.sr)
                };
                let params: Vec<(String, MatrixType)> = sig.params.iter().map(|(n, t)| (n.clone(), inst(t))).collect();
                let ret = inst(&sig.ret);
                for (a, (pname, pt)) in args.iter().zip(&params) {
                    let ta = self.expr(a)?;
                    self.unify_ty(pt, &ta, a.span, &format!("argument `{pname}` of `{name}`"))?;
                }
                self.calls.push((e.id.0, subst));
                ret
            }
        })
    }

    /// Checks a lambda body, which may only use its own parameters.
    fn lambda_body(&mut self, e: &Expr, scope: &BTreeMap<String, SemiringTag>) -> TResult<SemiringTag> {
        let sr = match &e.kind {
            ExprKind::Var(n) => *scope.get(n).ok_or_else(|| {
                err(
                    e.span,
                    format!("unknown variable `{n}` (a lambda body may only use its own parameters)"),
                )
            })?,
            ExprKind::Lit(l) => l.semiring(),
            ExprKind::MatMul(a, b) => {
                let (x, y) = (self.lambda_body(a, scope)?, self.lambda_body(b, scope)?);
                self.same_sr(x, y, e.span, "multiplication")?;
                x
            }
            ExprKind::Pointwise(op, a, b) => {
                let (x, y) = (self.lambda_body(a, scope)?, self.lambda_body(b, scope)?);
                self.same_sr(x, y, e.span, &format!("`(.{})`", op.symbol()))?;
                self.check_pw_op(*op, x, e.span)?;
                x
            }
            ExprKind::Arith(op, a, b) => {
                let (x, y) = (self.lambda_body(a, scope)?, self.lambda_body(b, scope)?);
                self.same_sr(x, y, e.span, "scalar arithmetic")?;
                if *op == ArithOp::Sub {
                    self.check_pw_op(PwOp::Sub, x, e.span)?;
                }
                x
            }
            ExprKind::Transpose(a) => self.lambda_body(a, scope)?,
            ExprKind::Call(Call::Cast(target, a)) => {
                let from = self.lambda_body(a, scope)?;
                if !cast_supported(from, *target) {
                    return Err(err(e.span, format!("unsupported cast pair: {from} to {target}")));
                }
                *target
            }
            ExprKind::Call(_) => {
                return Err(err(
                    e.span,
                    "only scalar operations and casts are allowed in a lambda body",
                ))
            }
        };
        self.types.push((e.id.0, MatrixType::scalar(sr), e.span));
        Ok(sr)
    }

    fn assign(&mut self, target: &str, t: MatrixType, span: Span) -> TResult<()> {
        let current = self.scopes.len() - 1;
        if self.scopes.iter().any(|s| s.index.as_deref() == Some(target)) {
            return Err(err(span, format!("cannot assign to loop index `{target}`")));
        }
        match self.lookup(target).map(|(d, t)| (d, t.clone())) {
            Some((depth, old)) if depth < current => {
                let stable = old.sr == t.sr && self.unify_shape(&old, &t, span, "").is_ok();
                if !stable {
                    let (so, sn) = (self.show(&old), self.show(&t));
                    return Err(err(
                        span,
                        format!("assignment changes the type of loop variable `{target}` from {so} to {sn}"),
                    ));
                }
            }
            _ => {
                self.scopes[current].vars.insert(target.into(), t);
            }
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, ret: &MatrixType) -> TResult<()> {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let t = self.rhs(value)?;
                self.assign(target, t, s.span)
            }
            StmtKind::PlusAssign { target, value } => {
                let old = self.var(target, s.span)?;
                let t = self.rhs(value)?;
                self.unify_ty(&old, &t, s.span, &format!("`{target} +=`"))
            }
            StmtKind::MaskedAssign { target, mask, value } => {
                let old = self.var(target, s.span)?;
                let m = self.var(mask, s.span)?;
                self.unify_shape(&old, &m, s.span, &format!("mask `{mask}` of `{target}`"))?;
                let t = self.expr(value)?;
                self.unify_ty(&old, &t, value.span, "masked assignment")
            }
            StmtKind::FillAssign { target, value } => {
                let old = self.var(target, s.span)?;
                let t = self.expr(value)?;
                self.require_scalar(&t, value.span, "fill value")?;
                self.same_sr(old.sr, t.sr, value.span, "fill")
            }
            StmtKind::For { index, bound, body } => {
                if let BoundAnn::Name(n) = bound {
                    match self.lookup(n).map(|(_, t)| t.clone()) {
                        Some(t) => {
                            if t.sr != SemiringTag::Int || !self.is_scalar(&t) {
                                let st = self.show(&t);
                                return Err(err(
                                    s.span,
                                    format!("loop bound `{n}` must be an int scalar or a dimension, found {st}"),
                                ));
                            }
                        }
                        None if self.dims.is_rigid(n) => {}
                        None => return Err(err(s.span, format!("unknown loop bound `{n}`"))),
                    }
                }
                if self.lookup(index).is_some() {
                    return Err(err(s.span, format!("loop index `{index}` shadows a variable")));
                }
                let mut vars = BTreeMap::new();
                vars.insert(index.clone(), MatrixType::scalar(SemiringTag::Int));
                self.scopes.push(Scope {
                    vars,
                    index: Some(index.clone()),
                });
                for b in body {
                    if matches!(b.kind, StmtKind::Return(_)) {
                        return Err(err(b.span, "return is not allowed inside a loop"));
                    }
                    self.stmt(b, ret)?;
                }
                self.scopes.pop();
                Ok(())
            }
            StmtKind::Return(value) => {
                let t = self.expr(value)?;
                self.unify_ty(ret, &t, value.span, "return value")
            }
        }
    }

    fn function(&mut self, f: &FuncDecl) -> TResult<()> {
        let ret = f.ret.matrix_type();
        match f.body.last() {
            Some(Stmt {
                kind: StmtKind::Return(_),
                ..
            }) => {}
            _ => {
                return Err(err(
                    f.span,
                    format!("function `{}` must end with a return statement", f.name),
                ))
            }
        }
        for (i, s) in f.body.iter().enumerate() {
            if matches!(s.kind, StmtKind::Return(_)) && i + 1 != f.body.len() {
                return Err(err(s.span, "return must be the last statement of a function"));
            }
            self.stmt(s, &ret)?;
        }
        Ok(())
    }

    fn finish(mut self, tp: &mut TypedProgram) -> TResult<()> {
        let types = core::mem::take(&mut self.types);
        for (id, t, span) in types {
            let rows = self.dims.resolve(&t.rows);
            let cols = self.dims.resolve(&t.cols);
            for d in [&rows, &cols] {
                if !self.dims.is_determined(d) {
                    return Err(err(span, format!("cannot determine dimension `{d}`")));
                }
            }
            tp.types.insert(id, MatrixType::new(rows, cols, t.sr));
        }
        for (id, subst) in core::mem::take(&mut self.calls) {
            let resolved = subst
                .into_iter()
                .map(|(k, v)| {
                    let r = self.dims.resolve(&v);
                    (k, r)
                })
                .collect();
            tp.call_dims.insert(id, resolved);
        }
        tp.vecmat.extend(core::mem::take(&mut self.vecmat));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn check(src: &str) -> Result<TypedProgram, Diagnostic> {
        check_program(&parse(src).unwrap())
    }

    fn check_err(src: &str) -> String {
        let e = check(src).unwrap_err();
        assert_eq!(e.stage, Stage::Typecheck);
        e.message
    }

    const REACH: &str = "
func reach(graph: Matrix<s, s, bool>, source: Vector<s, bool>) -> Vector<s, bool> {
    v = source;
    for i in 0..s {
        v += v * graph;
    }
    return v;
}";

    #[test]
    fn reach_types() {
        let tp = check(REACH).unwrap();
        let f = tp.ast.function("reach").unwrap();
        let StmtKind::For { body, .. } = &f.body[1].kind else {
            panic!()
        };
        let StmtKind::PlusAssign { value, .. } = &body[0].kind else {
            panic!()
        };
        assert_eq!(tp.type_of(value), &MatrixType::vector(Dim::sym("s"), SemiringTag::Bool));
        let ExprKind::MatMul(v, g) = &value.kind else { panic!() };
        assert_eq!(tp.type_of(v), &MatrixType::vector(Dim::sym("s"), SemiringTag::Bool));
        assert_eq!(
            tp.type_of(g),
            &MatrixType::new(Dim::sym("s"), Dim::sym("s"), SemiringTag::Bool)
        );
        assert!(tp.vecmat.contains(&value.id.0));
    }

    #[test]
    fn vecmat_only_at_statement_level() {
        let msg = check_err(
            "func f(g: Matrix<s, s, bool>, v: Vector<s, bool>) -> Vector<s, bool> {
                return v * g;
            }",
        );
        assert!(msg.contains("matrix product"), "{msg}");
        let msg = check_err(
            "func f(g: Matrix<s, s, bool>, v: Vector<s, bool>) -> Vector<s, bool> {
                w = (v * g) (.+) v;
                return w;
            }",
        );
        assert!(msg.contains("matrix product"), "{msg}");
        assert!(check(
            "func f(g: Matrix<s, s, bool>, v: Vector<s, bool>) -> Vector<s, bool> {
                w = g.T * v;
                return w;
            }"
        )
        .is_ok());
    }

    #[test]
    fn unsupported_cast() {
        let msg = check_err("func f(m: Matrix<s, s, trop>) -> Matrix<s, s, bool> { return cast<bool>(m); }");
        assert!(msg.contains("unsupported cast pair"), "{msg}");
    }

    #[test]
    fn dimension_mismatch_names_both_symbols() {
        let msg = check_err(
            "func f(a: Vector<s, int>, b: Vector<t, int>) -> Vector<s, int> {
                return a (.+) b;
            }",
        );
        assert!(msg.contains("`s`") && msg.contains("`t`"), "{msg}");
        assert!(msg.contains("parameter at 1:8"), "{msg}");
    }

    #[test]
    fn semiring_mismatch() {
        let msg = check_err("func f(a: Vector<s, int>, b: Vector<s, real>) -> Vector<s, int> { return a (.*) b; }");
        assert!(msg.contains("semiring mismatch"), "{msg}");
    }

    #[test]
    fn unknown_variable() {
        let msg = check_err("func f(a: int) -> int { return b; }");
        assert!(msg.contains("unknown variable `b`"));
    }

    #[test]
    fn loop_variable_type_must_be_stable() {
        let msg = check_err(
            "func f(a: Vector<s, int>, g: Matrix<s, s, int>) -> Vector<s, int> {
                x = a;
                for i in 0..s { x = g; }
                return a;
            }",
        );
        assert!(msg.contains("changes the type of loop variable `x`"), "{msg}");
        // Body-local variables may take any type and vanish after the loop.
        let msg = check_err(
            "func f(a: Vector<s, int>) -> Vector<s, int> {
                for i in 0..s { y = a; }
                return y;
            }",
        );
        assert!(msg.contains("unknown variable `y`"));
    }

    #[test]
    fn division_and_subtraction_restrictions() {
        assert!(check("func f(a: Vector<s, real>) -> Vector<s, real> { return a (./) a; }").is_ok());
        let msg = check_err("func f(a: Vector<s, int>) -> Vector<s, int> { return a (./) a; }");
        assert!(msg.contains("`/` requires real"));
        let msg = check_err("func f(a: Vector<s, trop>) -> Vector<s, trop> { return a (./) a; }");
        assert!(msg.contains("`/` requires real"));
        let msg = check_err("func f(a: trop) -> trop { return a - a; }");
        assert!(msg.contains("subtraction"));
    }

    #[test]
    fn declaration_order_does_not_matter() {
        let a = "func g(x: Vector<n, int>) -> Vector<n, int> { return x (.+) x; }
                 func f(y: Vector<m, int>) -> Vector<m, int> { return g(y); }";
        let b = "func f(y: Vector<m, int>) -> Vector<m, int> { return g(y); }
                 func g(x: Vector<n, int>) -> Vector<n, int> { return x (.+) x; }";
        let (ta, tb) = (check(a).unwrap(), check(b).unwrap());
        assert_eq!(ta.types.len(), tb.types.len());
        let call_dims: Vec<_> = ta.call_dims.values().collect();
        assert_eq!(call_dims[0]["n"], Dim::sym("m"));
        assert_eq!(
            ta.call_dims.values().collect::<Vec<_>>(),
            tb.call_dims.values().collect::<Vec<_>>()
        );
    }

    #[test]
    fn call_argument_mismatch() {
        let msg = check_err(
            "func g(x: Vector<n, int>, y: Vector<n, int>) -> Vector<n, int> { return x; }
             func f(a: Vector<s, int>, b: Vector<t, int>) -> Vector<s, int> { return g(a, b); }",
        );
        assert!(msg.contains("argument `y` of `g`"), "{msg}");
    }

    #[test]
    fn return_dims_must_come_from_params() {
        let msg = check_err("func f(a: int) -> Vector<k, int> { return a; }");
        assert!(msg.contains("dimension `k`"));
    }

    #[test]
    fn apply_lambda_is_closed() {
        assert!(check(
            "func f(a: Vector<s, real>, c: real) -> Vector<s, real> {
                return apply(|x: real, k: real| x * k + 1.0, a, c);
            }"
        )
        .is_ok());
        let msg = check_err(
            "func f(a: Vector<s, real>, c: real) -> Vector<s, real> {
                return apply(|x: real| x * c, a);
            }",
        );
        assert!(msg.contains("unknown variable `c`"), "{msg}");
    }

    #[test]
    fn loop_bounds() {
        assert!(check("func f(a: int, n: int) -> int { for i in 0..n { a = a + i; } return a; }").is_ok());
        let msg = check_err("func f(a: int, n: real) -> int { for i in 0..n { } return a; }");
        assert!(msg.contains("loop bound"));
        let msg = check_err("func f(a: int) -> int { for i in 0..q { } return a; }");
        assert!(msg.contains("unknown loop bound"));
    }

    #[test]
    fn zero_vector_needs_known_dimension() {
        assert!(check("func f(a: Vector<s, int>) -> Vector<s, int> { return Vector<int>(s); }").is_ok());
        let msg = check_err("func f(a: Vector<s, int>) -> Vector<s, int> { return Vector<int>(q); }");
        assert!(msg.contains("unknown dimension symbol"));
    }

    #[test]
    fn masked_and_fill() {
        assert!(check(
            "func f(a: Vector<s, real>, m: Vector<s, bool>) -> Vector<s, real> {
                a<m> = a (.*) a;
                a[:] = 1.0;
                return a;
            }"
        )
        .is_ok());
        let msg = check_err("func f(a: Vector<s, real>) -> Vector<s, real> { a[:] = 1; return a; }");
        assert!(msg.contains("semiring mismatch"));
    }

    #[test]
    fn structural_errors() {
        assert!(check_err("func f(a: int) -> int { a = a; }").contains("must end with a return"));
        assert!(check_err("func f(a: int) -> int { return a; return a; }").contains("last statement"));
        assert!(
            check_err("func f(a: int) -> int { return a; }\nfunc f(a: int) -> int { return a; }")
                .contains("defined twice")
        );
        assert!(check_err("func f(a: int, a: int) -> int { return a; }").contains("duplicate parameter"));
    }
}
