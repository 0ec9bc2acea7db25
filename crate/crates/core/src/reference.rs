//! Dense reference evaluators for surface programs and for Core.
//!
//! Every position of every matrix is materialized, so these are only fit for
//! small inputs. They exist to check lowering and the relational engine.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::core_ir::{CoreExpr, CoreKind, LoopBound};
use crate::frontend::ast::{self, ArithOp, BoundAnn, Call, Expr, ExprKind, PwOp, Stmt, StmtKind};
use crate::scalar::{eval_op, ScalarOp};
use crate::semiring::{cast_scalar, sr_add, sr_mul, ArithError, SemiringTag, Value};
use crate::typecheck::TypedProgram;
use crate::types::{Dim, MatrixType};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub sr: SemiringTag,
    /// Row-major entries.
    pub data: Vec<Value>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, sr: SemiringTag) -> DenseMatrix {
        DenseMatrix {
            rows,
            cols,
            sr,
            data: vec![sr.zero(); rows * cols],
        }
    }

    pub fn scalar(v: Value) -> DenseMatrix {
        DenseMatrix {
            rows: 1,
            cols: 1,
            sr: v.tag(),
            data: vec![v],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Value {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Value) {
        self.data[r * self.cols + c] = v;
    }

    /// Value at `(r, c)`, reading a 1x1 matrix as a broadcast scalar.
    fn at(&self, r: usize, c: usize) -> Value {
        if self.rows == 1 && self.cols == 1 {
            self.data[0]
        } else {
            self.get(r, c)
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows, self.sr);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn nonzeros(&self) -> Vec<(usize, usize, Value)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() {
                    out.push((r, c, v));
                }
            }
        }
        out
    }

    fn map(
        &self,
        sr: SemiringTag,
        mut f: impl FnMut(usize, usize, Value) -> Result<Value, ArithError>,
    ) -> Result<DenseMatrix, ArithError> {
        let mut out = DenseMatrix::zeros(self.rows, self.cols, sr);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, f(r, c, self.get(r, c))?);
            }
        }
        Ok(out)
    }
}

pub fn dense_matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, ArithError> {
    let sr = a.sr;
    let mut out = DenseMatrix::zeros(a.rows, b.cols, sr);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = sr.zero();
            for k in 0..a.cols {
                acc = sr_add(sr, acc, sr_mul(sr, a.get(i, k), b.get(k, j))?)?;
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

fn pick_any(m: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.rows, m.cols, m.sr);
    for r in 0..m.rows {
        if let Some(c) = (0..m.cols).find(|&c| !m.get(r, c).is_zero()) {
            out.set(r, c, m.get(r, c));
        }
    }
    out
}

fn diag(v: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(v.rows, v.rows, v.sr);
    for r in 0..v.rows {
        out.set(r, r, v.get(r, 0));
    }
    out
}

fn scalar_count(m: &DenseMatrix) -> usize {
    match m.data[0] {
        Value::Int(n) if n > 0 => n as usize,
        _ => 0,
    }
}

pub type Dims = BTreeMap<String, usize>;

fn dim_size(d: &Dim, dims: &Dims) -> usize {
    match d {
        Dim::Literal(n) => *n as usize,
        Dim::Symbol(s) => dims[s],
    }
}

/// Binds dimension symbols of `params` to the shapes of `args`.
pub fn bind_dims(params: &[(String, MatrixType)], args: &[DenseMatrix]) -> Dims {
    let mut dims = Dims::new();
    for ((_, t), a) in params.iter().zip(args) {
        for (d, n) in [(&t.rows, a.rows), (&t.cols, a.cols)] {
            if let Dim::Symbol(s) = d {
                dims.insert(s.clone(), n);
            }
        }
    }
    dims
}

/// Direct interpreter for checked surface programs.
pub struct SurfaceEval<'t> {
    pub tp: &'t TypedProgram,
}

type Env = BTreeMap<String, DenseMatrix>;

impl SurfaceEval<'_> {
    pub fn call(&self, name: &str, args: Vec<DenseMatrix>) -> Result<DenseMatrix, ArithError> {
        let f = self.tp.ast.function(name).expect("known function");
        let sig = &self.tp.signatures[name];
        let dims = bind_dims(&sig.params, &args);
        let mut env: Env = f.params.iter().map(|p| p.name.clone()).zip(args).collect();
        Ok(self.block(&f.body, &mut env, &dims)?.expect("function returns"))
    }

    fn block(&self, body: &[Stmt], env: &mut Env, dims: &Dims) -> Result<Option<DenseMatrix>, ArithError> {
        for s in body {
            match &s.kind {
                StmtKind::Assign { target, value } => {
                    let v = self.expr(value, env, dims)?;
                    env.insert(target.clone(), v);
                }
                StmtKind::PlusAssign { target, value } => {
                    let v = self.expr(value, env, dims)?;
                    let old = &env[target];
                    let sum = old.map(old.sr, |r, c, x| sr_add(old.sr, x, v.get(r, c)))?;
                    env.insert(target.clone(), sum);
                }
                StmtKind::MaskedAssign { target, mask, value } => {
                    let v = self.expr(value, env, dims)?;
                    let m = &env[mask];
                    let old = &env[target];
                    let out = old.map(old.sr, |r, c, x| {
                        Ok(if m.get(r, c).is_zero() { x } else { v.get(r, c) })
                    })?;
                    env.insert(target.clone(), out);
                }
                StmtKind::FillAssign { target, value } => {
                    let v = self.expr(value, env, dims)?.data[0];
                    let old = &env[target];
                    let out = old.map(old.sr, |_, _, _| Ok(v))?;
                    env.insert(target.clone(), out);
                }
                StmtKind::For { index, bound, body } => {
                    let n = match bound {
                        BoundAnn::Literal(n) => *n as usize,
                        BoundAnn::Name(name) => match env.get(name) {
                            Some(m) => scalar_count(m),
                            None => dims[name],
                        },
                    };
                    let outer: Vec<String> = env.keys().cloned().collect();
                    for i in 0..n {
                        env.insert(index.clone(), DenseMatrix::scalar(Value::Int(i as i64)));
                        self.block(body, env, dims)?;
                        env.remove(index);
                        // Variables first assigned in the body are local to one iteration.
                        env.retain(|k, _| outer.contains(k));
                    }
                }
                StmtKind::Return(e) => return Ok(Some(self.expr(e, env, dims)?)),
            }
        }
        Ok(None)
    }

    fn lambda(&self, e: &Expr, vals: &BTreeMap<&str, Value>) -> Result<Value, ArithError> {
        Ok(match &e.kind {
            ExprKind::Var(n) => vals[n.as_str()],
            ExprKind::Lit(l) => lit(l),
            ExprKind::MatMul(a, b) => {
                let (x, y) = (self.lambda(a, vals)?, self.lambda(b, vals)?);
                sr_mul(x.tag(), x, y)?
            }
            ExprKind::Pointwise(op, a, b) => eval_op(pw(*op), self.lambda(a, vals)?, self.lambda(b, vals)?)?,
            ExprKind::Arith(op, a, b) => eval_op(arith(*op), self.lambda(a, vals)?, self.lambda(b, vals)?)?,
            ExprKind::Transpose(a) => self.lambda(a, vals)?,
            ExprKind::Call(Call::Cast(t, a)) => cast_scalar(*t, self.lambda(a, vals)?)?,
            ExprKind::Call(_) => unreachable!("rejected by the type checker"),
        })
    }

    fn expr(&self, e: &Expr, env: &Env, dims: &Dims) -> Result<DenseMatrix, ArithError> {
        Ok(match &e.kind {
            ExprKind::Var(n) => env[n].clone(),
            ExprKind::Lit(l) => DenseMatrix::scalar(lit(l)),
            ExprKind::MatMul(a, b) => {
                let (x, y) = (self.expr(a, env, dims)?, self.expr(b, env, dims)?);
                if self.tp.vecmat.contains(&e.id.0) {
                    // Row-vector reading: out[j] = sum_i x[i] * y[i][j].
                    let sr = x.sr;
                    let mut out = DenseMatrix::zeros(y.cols, 1, sr);
                    for j in 0..y.cols {
                        let mut acc = sr.zero();
                        for i in 0..x.rows {
                            acc = sr_add(sr, acc, sr_mul(sr, x.get(i, 0), y.get(i, j))?)?;
                        }
                        out.set(j, 0, acc);
                    }
                    out
                } else {
                    dense_matmul(&x, &y)?
                }
            }
            ExprKind::Pointwise(op, a, b) => {
                let (x, y) = (self.expr(a, env, dims)?, self.expr(b, env, dims)?);
                x.map(x.sr, |r, c, v| eval_op(pw(*op), v, y.get(r, c)))?
            }
            ExprKind::Arith(op, a, b) => {
                let (x, y) = (self.expr(a, env, dims)?, self.expr(b, env, dims)?);
                DenseMatrix::scalar(eval_op(arith(*op), x.data[0], y.data[0])?)
            }
            ExprKind::Transpose(a) => self.expr(a, env, dims)?.transpose(),
            ExprKind::Call(call) => match call {
                Call::Apply { func, args } => {
                    let vals: Vec<DenseMatrix> =
                        args.iter().map(|a| self.expr(a, env, dims)).collect::<Result<_, _>>()?;
                    let result = self.tp.type_of(e).sr;
                    vals[0].map(result, |r, c, _| {
                        let scope: BTreeMap<&str, Value> = func
                            .params
                            .iter()
                            .zip(&vals)
                            .map(|((n, _), m)| (n.as_str(), m.at(r, c)))
                            .collect();
                        self.lambda(&func.body, &scope)
                    })?
                }
                Call::Reduce(a) => {
                    let m = self.expr(a, env, dims)?;
                    let mut acc = m.sr.zero();
                    for v in &m.data {
                        acc = sr_add(m.sr, acc, *v)?;
                    }
                    DenseMatrix::scalar(acc)
                }
                Call::ReduceRows(a) => {
                    let m = self.expr(a, env, dims)?;
                    let mut out = DenseMatrix::zeros(m.rows, 1, m.sr);
                    for r in 0..m.rows {
                        let mut acc = m.sr.zero();
                        for c in 0..m.cols {
                            acc = sr_add(m.sr, acc, m.get(r, c))?;
                        }
                        out.set(r, 0, acc);
                    }
                    out
                }
                Call::Diag(a) => diag(&self.expr(a, env, dims)?),
                Call::PickAny(a) => pick_any(&self.expr(a, env, dims)?),
                Call::Cast(t, a) => {
                    let m = self.expr(a, env, dims)?;
                    m.map(*t, |_, _, v| cast_scalar(*t, v))?
                }
                Call::ZeroVector(sr, d) => DenseMatrix::zeros(dim_size(d, dims), 1, *sr),
                Call::User { name, args } => {
                    let vals = args.iter().map(|a| self.expr(a, env, dims)).collect::<Result<_, _>>()?;
                    self.call(name, vals)?
                }
            },
        })
    }
}

fn lit(l: &ast::Literal) -> Value {
    match l {
        ast::Literal::Bool(b) => Value::Bool(*b),
        ast::Literal::Int(i) => Value::Int(*i),
        ast::Literal::Real(x) => Value::Real(*x),
    }
}

fn pw(op: PwOp) -> ScalarOp {
    match op {
        PwOp::Mul => ScalarOp::Mul,
        PwOp::Div => ScalarOp::Div,
        PwOp::Add => ScalarOp::Add,
        PwOp::Sub => ScalarOp::Sub,
        PwOp::Eq => ScalarOp::Eq,
    }
}

fn arith(op: ArithOp) -> ScalarOp {
    match op {
        ArithOp::Add => ScalarOp::Add,
        ArithOp::Sub => ScalarOp::Sub,
    }
}

/// Dense interpreter for Core expressions.
pub fn eval_core(e: &CoreExpr, env: &mut Env, dims: &Dims) -> Result<DenseMatrix, ArithError> {
    let shape = |t: &MatrixType| (dim_size(&t.rows, dims), dim_size(&t.cols, dims));
    Ok(match &e.kind {
        CoreKind::Var(n) => env[n].clone(),
        CoreKind::Transpose(a) => eval_core(a, env, dims)?.transpose(),
        CoreKind::Diag(a) => diag(&eval_core(a, env, dims)?),
        CoreKind::PickAny(a) => pick_any(&eval_core(a, env, dims)?),
        CoreKind::Densify(a) => eval_core(a, env, dims)?,
        CoreKind::MatMul(a, b) => {
            let x = eval_core(a, env, dims)?;
            let y = eval_core(b, env, dims)?;
            dense_matmul(&x, &y)?
        }
        CoreKind::OneVector => {
            let (r, _) = shape(&e.ty);
            DenseMatrix {
                rows: r,
                cols: 1,
                sr: e.ty.sr,
                data: vec![e.ty.sr.one(); r],
            }
        }
        CoreKind::ZeroMatrix => {
            let (r, c) = shape(&e.ty);
            DenseMatrix::zeros(r, c, e.ty.sr)
        }
        CoreKind::Apply(f, args) => {
            let vals: Vec<DenseMatrix> = args.iter().map(|a| eval_core(a, env, dims)).collect::<Result<_, _>>()?;
            let (r, c) = shape(&e.ty);
            let mut out = DenseMatrix::zeros(r, c, e.ty.sr);
            let mut buf = Vec::with_capacity(vals.len());
            for i in 0..r {
                for j in 0..c {
                    buf.clear();
                    buf.extend(vals.iter().map(|m| m.at(i, j)));
                    out.set(i, j, f.body.eval(&buf)?);
                }
            }
            out
        }
        CoreKind::ForLoop {
            bound,
            index,
            states,
            body,
        } => {
            let n = match bound {
                LoopBound::Dim(d) => dim_size(d, dims),
                LoopBound::Scalar(b) => scalar_count(&eval_core(b, env, dims)?),
            };
            let mut cur: Vec<DenseMatrix> = states
                .iter()
                .map(|s| eval_core(&s.init, env, dims))
                .collect::<Result<_, _>>()?;
            let saved = env.clone();
            for i in 0..n {
                env.insert(index.clone(), DenseMatrix::scalar(Value::Int(i as i64)));
                for (s, v) in states.iter().zip(&cur) {
                    env.insert(s.name.clone(), v.clone());
                }
                cur = body
                    .iter()
                    .map(|u| eval_core(&u.update, env, dims))
                    .collect::<Result<_, _>>()?;
            }
            *env = saved;
            cur.swap_remove(0)
        }
    })
}

/// Evaluates a lowered function on dense arguments.
pub fn eval_core_function(f: &crate::core_ir::CoreFunction, args: Vec<DenseMatrix>) -> Result<DenseMatrix, ArithError> {
    let dims = bind_dims(&f.params, &args);
    let mut env: Env = f.params.iter().map(|(n, _)| n.clone()).zip(args).collect();
    eval_core(&f.body, &mut env, &dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_ir::lower;
    use crate::frontend::parse;
    use crate::typecheck::check_program;

    fn path_graph(n: usize) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(n, n, SemiringTag::Bool);
        for i in 0..n - 1 {
            g.set(i, i + 1, Value::Bool(true));
        }
        g
    }

    #[test]
    fn reach_on_path_both_evaluators() {
        let src = "func reach(graph: Matrix<s, s, bool>, source: Vector<s, bool>) -> Vector<s, bool> {
            v = source;
            for i in 0..s { v += v * graph; }
            return v;
        }";
        let tp = check_program(&parse(src).unwrap()).unwrap();
        let mut src_vec = DenseMatrix::zeros(3, 1, SemiringTag::Bool);
        src_vec.set(0, 0, Value::Bool(true));
        let args = vec![path_graph(3), src_vec];
        let surface = SurfaceEval { tp: &tp }.call("reach", args.clone()).unwrap();
        assert_eq!(surface.data, vec![Value::Bool(true); 3]);
        let cp = lower(&tp);
        let core = eval_core_function(&cp.functions["reach"], args).unwrap();
        assert_eq!(surface, core);
    }

    #[test]
    fn masked_assign_with_empty_mask_is_identity() {
        let src = "func f(a: Vector<s, int>, m: Vector<s, bool>) -> Vector<s, int> {
            a<m> = a (.+) a;
            return a;
        }";
        let tp = check_program(&parse(src).unwrap()).unwrap();
        let a = DenseMatrix {
            rows: 2,
            cols: 1,
            sr: SemiringTag::Int,
            data: vec![Value::Int(4), Value::Int(0)],
        };
        let m = DenseMatrix::zeros(2, 1, SemiringTag::Bool);
        let out = SurfaceEval { tp: &tp }.call("f", vec![a.clone(), m.clone()]).unwrap();
        assert_eq!(out, a);
        let cp = lower(&tp);
        assert_eq!(eval_core_function(&cp.functions["f"], vec![a.clone(), m]).unwrap(), a);
    }
}
