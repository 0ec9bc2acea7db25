use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::relation::{argmin_rows, MatrixRelation, Tuple};
use super::stats::ExecStats;
use crate::optimizer::DEFAULT_DENSE_LIMIT;
use crate::plan::{Combine, Group, JoinKind, JoinOn, MapIndex, Plan, PlanBound, PlanKind, PlanNode, PlanRef};
use crate::scalar::PointwiseFn;
use crate::semiring::{sr_add, ArithError, Value};
use crate::types::{Dim, MatrixType};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("node #{node}: {source}")]
    Arith { node: u32, source: ArithError },
    #[error("node #{node}: densifying {rows} x {cols} positions exceeds the dense limit of {limit}")]
    DenseLimit {
        node: u32,
        rows: u64,
        cols: u64,
        limit: u64,
    },
    #[error("missing argument `{0}`")]
    MissingArg(String),
    #[error("argument `{name}`: {msg}")]
    BadArg { name: String, msg: String },
    #[error("no size for dimension `{0}`")]
    UnknownDim(String),
    #[error("node #{node}: unbound name `{name}`")]
    Unbound { node: u32, name: String },
    #[error("node #{node}: loop bound is not an int")]
    BoundType { node: u32 },
    #[error("node #{node}: {msg}")]
    Invariant { node: u32, msg: String },
}

/// Arguments of one call and the sizes of its dimension symbols.
#[derive(Clone, Debug, Default)]
pub struct Binding {
    pub args: BTreeMap<String, MatrixRelation>,
    pub dims: BTreeMap<String, u64>,
}

impl Binding {
    /// Binds `args` to `params`, inferring dimension sizes from the
    /// argument shapes and checking that they agree.
    pub fn bind(params: &[(String, MatrixType)], args: BTreeMap<String, MatrixRelation>) -> Result<Binding, ExecError> {
        let mut dims = BTreeMap::new();
        for (name, ty) in params {
            let arg = args.get(name).ok_or_else(|| ExecError::MissingArg(name.clone()))?;
            let bad = |msg: String| ExecError::BadArg {
                name: name.clone(),
                msg,
            };
            if arg.sr != ty.sr {
                return Err(bad(alloc::format!("expected {}, got {}", ty.sr, arg.sr)));
            }
            for (d, n) in [(&ty.rows, arg.rows), (&ty.cols, arg.cols)] {
                match d {
                    Dim::Literal(l) if *l != n => {
                        return Err(bad(alloc::format!("dimension {n} where {l} is required")))
                    }
                    Dim::Literal(_) => {}
                    Dim::Symbol(s) => match dims.get(s) {
                        Some(&m) if m != n => {
                            return Err(bad(alloc::format!("`{s}` is {n} here but {m} elsewhere")));
                        }
                        _ => {
                            dims.insert(s.clone(), n);
                        }
                    },
                }
            }
            arg.check().map_err(bad)?;
        }
        Ok(Binding { args, dims })
    }
}

#[derive(Clone, Debug)]
pub struct ExecConfig {
    pub dense_limit: u64,
    /// Check relation invariants after every operator.
    pub check_invariants: bool,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            dense_limit: DEFAULT_DENSE_LIMIT,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

/// Sees loop states after every iteration.
pub trait LoopObserver {
    fn after_iteration(&mut self, loop_id: u32, iteration: u64, states: &[&MatrixRelation]);
}

struct NoObserver;

impl LoopObserver for NoObserver {
    fn after_iteration(&mut self, _: u32, _: u64, _: &[&MatrixRelation]) {}
}

pub fn execute(plan: &Plan, binding: &Binding, cfg: &ExecConfig) -> Result<(MatrixRelation, ExecStats), ExecError> {
    execute_observed(plan, binding, cfg, &mut NoObserver)
}

pub fn execute_observed(
    plan: &Plan,
    binding: &Binding,
    cfg: &ExecConfig,
    observer: &mut dyn LoopObserver,
) -> Result<(MatrixRelation, ExecStats), ExecError> {
    let mut ex = Exec {
        dims: &binding.dims,
        args: binding
            .args
            .iter()
            .map(|(k, v)| (k.clone(), Rc::new(v.clone())))
            .collect(),
        env: Vec::new(),
        frames: vec![BTreeMap::new()],
        stats: ExecStats {
            labels: plan.labels.clone(),
            ..ExecStats::default()
        },
        cfg,
        observer,
    };
    let out = ex.eval(&plan.root)?;
    let out = ex.rel(&plan.root, out)?;
    let out = Rc::try_unwrap(out).unwrap_or_else(|rc| (*rc).clone());
    Ok((out, ex.stats))
}

/// A node's output: a keyed relation, or a bag that may repeat keys and
/// is only ever consumed by an aggregation, a union or a merge.
#[derive(Clone)]
enum Val {
    Rel(Rc<MatrixRelation>),
    Bag(Rc<Vec<Tuple>>),
}

impl Val {
    fn tuples(&self) -> &[Tuple] {
        match self {
            Val::Rel(r) => &r.tuples,
            Val::Bag(b) => b,
        }
    }
}

struct Exec<'a> {
    dims: &'a BTreeMap<String, u64>,
    args: BTreeMap<String, Rc<MatrixRelation>>,
    /// Loop states, indices and cached fragments, innermost last.
    env: Vec<(String, Rc<MatrixRelation>)>,
    /// Results already computed, one frame per active loop iteration. A
    /// node is computed at most once per frame.
    frames: Vec<BTreeMap<u32, Val>>,
    stats: ExecStats,
    cfg: &'a ExecConfig,
    observer: &'a mut dyn LoopObserver,
}

enum Update {
    Replace(Rc<MatrixRelation>),
    Merge(Val, Combine),
}

impl Exec<'_> {
    fn size(&self, d: &Dim) -> Result<u64, ExecError> {
        match d {
            Dim::Literal(n) => Ok(*n),
            Dim::Symbol(s) => self
                .dims
                .get(s)
                .copied()
                .ok_or_else(|| ExecError::UnknownDim(s.clone())),
        }
    }

    fn shape(&self, n: &PlanNode) -> Result<(u64, u64), ExecError> {
        Ok((self.size(&n.ty.rows)?, self.size(&n.ty.cols)?))
    }

    fn new_rel(&self, n: &PlanNode, tuples: Vec<Tuple>) -> Result<MatrixRelation, ExecError> {
        let (rows, cols) = self.shape(n)?;
        Ok(MatrixRelation {
            rows,
            cols,
            sr: n.ty.sr,
            dense: false,
            tuples,
        })
    }

    fn lookup(&self, node: u32, name: &str) -> Result<Rc<MatrixRelation>, ExecError> {
        if let Some((_, v)) = self.env.iter().rev().find(|(n, _)| n == name) {
            return Ok(v.clone());
        }
        self.args.get(name).cloned().ok_or_else(|| ExecError::Unbound {
            node,
            name: name.into(),
        })
    }

    /// Turns a bag into a relation by adding up repeated keys.
    fn rel(&self, n: &PlanNode, v: Val) -> Result<Rc<MatrixRelation>, ExecError> {
        match v {
            Val::Rel(r) => Ok(r),
            Val::Bag(b) => {
                let (rows, cols) = self.shape(n)?;
                let r = MatrixRelation::from_tuples(rows, cols, n.ty.sr, (*b).clone())
                    .map_err(|source| ExecError::Arith { node: n.id, source })?;
                Ok(Rc::new(r))
            }
        }
    }

    fn eval_rel(&mut self, n: &PlanRef) -> Result<Rc<MatrixRelation>, ExecError> {
        let v = self.eval(n)?;
        self.rel(n, v)
    }

    fn eval(&mut self, n: &PlanRef) -> Result<Val, ExecError> {
        if let Some(v) = self.frames.last().and_then(|f| f.get(&n.id)) {
            return Ok(v.clone());
        }
        let v = self.compute(n)?;
        let count = v.tuples().len();
        self.stats.produced(n.id, count);
        if self.cfg.check_invariants {
            if let Val::Rel(r) = &v {
                r.check().map_err(|msg| ExecError::Invariant { node: n.id, msg })?;
            }
        }
        self.frames.last_mut().unwrap().insert(n.id, v.clone());
        Ok(v)
    }

    fn arith<T>(node: u32, r: Result<T, ArithError>) -> Result<T, ExecError> {
        r.map_err(|source| ExecError::Arith { node, source })
    }

    fn compute(&mut self, n: &PlanRef) -> Result<Val, ExecError> {
        let id = n.id;
        Ok(match &n.kind {
            PlanKind::ScanArg(name) | PlanKind::CachedScan(name) => Val::Rel(self.lookup(id, name)?),
            PlanKind::ScanDomain(d) => {
                let size = self.size(d)?;
                let tuples = (0..size as u32).map(|i| (i, 0, Value::Bool(true))).collect();
                Val::Rel(Rc::new(self.new_rel(n, tuples)?))
            }
            PlanKind::Constant(t) => Val::Rel(Rc::new(self.new_rel(n, t.clone())?)),
            PlanKind::Join { .. } => {
                return Err(ExecError::Invariant {
                    node: id,
                    msg: "join outside a map".into(),
                })
            }
            PlanKind::Map {
                input,
                f,
                index,
                drop_diagonal,
            } => {
                if let PlanKind::Join {
                    inputs,
                    on,
                    kind,
                    broadcast,
                } = &input.kind
                {
                    let rels = inputs.iter().map(|i| self.eval_rel(i)).collect::<Result<Vec<_>, _>>()?;
                    let (out, joined) = match on {
                        JoinOn::RowCol => join_rowcol(id, &rels, broadcast, *kind, f)?,
                        JoinOn::ColRow => join_colrow(id, &rels, f)?,
                    };
                    self.stats.produced(input.id, joined);
                    match on {
                        JoinOn::RowCol => Val::Rel(Rc::new(self.new_rel(n, out)?)),
                        JoinOn::ColRow => Val::Bag(Rc::new(out)),
                    }
                } else {
                    let v = self.eval(input)?;
                    let mut out = Vec::new();
                    let mut arg = [Value::Bool(false)];
                    for &(r, c, x) in v.tuples() {
                        let (r, c) = match index {
                            MapIndex::Keep => (r, c),
                            MapIndex::Diag => (r, r),
                        };
                        if *drop_diagonal && r == c {
                            continue;
                        }
                        arg[0] = x;
                        let y = Self::arith(id, f.body.eval(&arg))?;
                        if !y.is_zero() {
                            out.push((r, c, y));
                        }
                    }
                    match v {
                        Val::Rel(_) => Val::Rel(Rc::new(self.new_rel(n, out)?)),
                        Val::Bag(_) => Val::Bag(Rc::new(out)),
                    }
                }
            }
            PlanKind::Aggregate { input, group, combine } => {
                let v = self.eval(input)?;
                *self.stats.aggregations_executed.entry(id).or_default() += 1;
                let out = aggregate(id, &v, *group, *combine, n.ty.sr)?;
                Val::Rel(Rc::new(self.new_rel(n, out)?))
            }
            PlanKind::Union(inputs) => {
                let mut out = Vec::new();
                for i in inputs {
                    out.extend_from_slice(self.eval(i)?.tuples());
                }
                Val::Bag(Rc::new(out))
            }
            PlanKind::Transpose(a) => {
                let a = self.eval_rel(a)?;
                let mut t: Vec<Tuple> = a.tuples.iter().map(|&(r, c, v)| (c, r, v)).collect();
                t.sort_unstable_by_key(|t| (t.0, t.1));
                let mut rel = self.new_rel(n, t)?;
                rel.dense = a.dense;
                Val::Rel(Rc::new(rel))
            }
            PlanKind::Densify(a) => {
                let (rows, cols) = self.shape(n)?;
                let limit = self.cfg.dense_limit;
                if rows.saturating_mul(cols) > limit {
                    return Err(ExecError::DenseLimit {
                        node: id,
                        rows,
                        cols,
                        limit,
                    });
                }
                let a = self.eval_rel(a)?;
                if a.dense {
                    return Ok(Val::Rel(a));
                }
                let zero = n.ty.sr.zero();
                let mut out = Vec::with_capacity((rows * cols) as usize);
                let mut it = a.tuples.iter().peekable();
                for r in 0..rows as u32 {
                    for c in 0..cols as u32 {
                        match it.peek() {
                            Some(&&(tr, tc, v)) if tr == r && tc == c => {
                                out.push((r, c, v));
                                it.next();
                            }
                            _ => out.push((r, c, zero)),
                        }
                    }
                }
                let mut rel = self.new_rel(n, out)?;
                rel.dense = true;
                Val::Rel(Rc::new(rel))
            }
            PlanKind::Accumulate { .. } => {
                return Err(ExecError::Invariant {
                    node: id,
                    msg: "accumulation outside a loop body".into(),
                })
            }
            PlanKind::Loop(l) => {
                let iterations = match &l.bound {
                    PlanBound::Dim(d) => self.size(d)?,
                    PlanBound::Scalar(b) => {
                        let r = self.eval_rel(b)?;
                        match r.get(0, 0) {
                            Value::Int(k) => k.max(0) as u64,
                            _ => return Err(ExecError::BoundType { node: id }),
                        }
                    }
                };
                let outer_env = self.env.len();
                for (name, frag) in &l.hoisted {
                    let v = self.eval_rel(frag)?;
                    self.env.push((name.clone(), v));
                }
                let mut states = Vec::new();
                for (_, init) in &l.states {
                    states.push(self.eval_rel(init)?);
                }
                self.stats.loop_iterations.entry(id).or_default();
                for it in 0..iterations {
                    let mark = self.env.len();
                    for ((name, _), s) in l.states.iter().zip(&states) {
                        self.env.push((name.clone(), s.clone()));
                    }
                    let index = MatrixRelation::scalar(Value::Int(it as i64));
                    self.env.push((l.index.clone(), Rc::new(index)));
                    self.frames.push(BTreeMap::new());
                    let mut updates = Vec::new();
                    let mut failure = None;
                    for body in &l.bodies {
                        let r = match &body.kind {
                            PlanKind::Accumulate { delta, combine } => {
                                self.eval(delta).map(|d| Update::Merge(d, *combine))
                            }
                            _ => self.eval_rel(body).map(Update::Replace),
                        };
                        match r {
                            Ok(u) => updates.push(u),
                            Err(e) => {
                                failure = Some(e);
                                break;
                            }
                        }
                    }
                    self.frames.pop();
                    self.env.truncate(mark);
                    if let Some(e) = failure {
                        return Err(e);
                    }
                    let mut changed = false;
                    for ((k, u), body) in updates.into_iter().enumerate().zip(&l.bodies) {
                        match u {
                            Update::Replace(new) => {
                                changed |= *new != *states[k];
                                states[k] = new;
                            }
                            Update::Merge(delta, combine) => {
                                let s = Rc::make_mut(&mut states[k]);
                                let c = s.merge_in_place(delta.tuples(), combine);
                                changed |= Self::arith(body.id, c)?;
                                self.stats.produced(body.id, delta.tuples().len());
                                *self.stats.aggregations_executed.entry(body.id).or_default() += 1;
                            }
                        }
                    }
                    *self.stats.loop_iterations.entry(id).or_default() += 1;
                    let view: Vec<&MatrixRelation> = states.iter().map(|s| &**s).collect();
                    self.observer.after_iteration(id, it + 1, &view);
                    if l.fixpoint && !changed {
                        self.stats.fixpoint_exits += 1;
                        break;
                    }
                }
                self.env.truncate(outer_env);
                Val::Rel(states.swap_remove(0))
            }
        })
    }
}

fn eval_fn(node: u32, f: &PointwiseFn, args: &[Value]) -> Result<Value, ExecError> {
    f.body.eval(args).map_err(|source| ExecError::Arith { node, source })
}

/// Joins on equal `(row, col)` and applies `f`. Returns the nonzero
/// results, sorted, and the number of joined tuples.
fn join_rowcol(
    node: u32,
    rels: &[Rc<MatrixRelation>],
    broadcast: &[bool],
    kind: JoinKind,
    f: &PointwiseFn,
) -> Result<(Vec<Tuple>, usize), ExecError> {
    let mut args: Vec<Value> = rels
        .iter()
        .zip(broadcast)
        .map(|(r, b)| if *b { r.get(0, 0) } else { r.sr.zero() })
        .collect();
    let keyed: Vec<usize> = (0..rels.len()).filter(|&i| !broadcast[i]).collect();
    let mut out = Vec::new();
    if keyed.is_empty() {
        let v = eval_fn(node, f, &args)?;
        if !v.is_zero() {
            out.push((0, 0, v));
        }
        return Ok((out, 1));
    }
    let mut cursor = vec![0usize; rels.len()];
    let mut joined = 0;
    loop {
        let mut min: Option<(u32, u32)> = None;
        for &i in &keyed {
            if let Some(t) = rels[i].tuples.get(cursor[i]) {
                let k = (t.0, t.1);
                if min.is_none_or(|m| k < m) {
                    min = Some(k);
                }
            }
        }
        let Some(key) = min else { break };
        let mut present = 0;
        for &i in &keyed {
            match rels[i].tuples.get(cursor[i]) {
                Some(t) if (t.0, t.1) == key => {
                    args[i] = t.2;
                    cursor[i] += 1;
                    present += 1;
                }
                _ => args[i] = rels[i].sr.zero(),
            }
        }
        if kind == JoinKind::Inner && present < keyed.len() {
            continue;
        }
        joined += 1;
        let v = eval_fn(node, f, &args)?;
        if !v.is_zero() {
            out.push((key.0, key.1, v));
        }
    }
    Ok((out, joined))
}

/// Joins left columns with right rows and applies `f` to each pair. The
/// output is a bag in left-major order.
fn join_colrow(node: u32, rels: &[Rc<MatrixRelation>], f: &PointwiseFn) -> Result<(Vec<Tuple>, usize), ExecError> {
    let (a, b) = (&rels[0], &rels[1]);
    let mut out = Vec::new();
    let mut joined = 0;
    let mut args = [a.sr.zero(), b.sr.zero()];
    for &(r, k, x) in &a.tuples {
        for &(_, c, y) in b.row(k) {
            joined += 1;
            args[0] = x;
            args[1] = y;
            let v = eval_fn(node, f, &args)?;
            if !v.is_zero() {
                out.push((r, c, v));
            }
        }
    }
    Ok((out, joined))
}

fn aggregate(
    node: u32,
    v: &Val,
    group: Group,
    combine: Combine,
    sr: crate::semiring::SemiringTag,
) -> Result<Vec<Tuple>, ExecError> {
    let tuples = v.tuples();
    let mut out = Vec::new();
    match combine {
        Combine::ArgminCol => match group {
            Group::Row => argmin_rows(tuples, &mut out),
            Group::RowCol => {
                let rel = MatrixRelation::from_tuples(u64::MAX, u64::MAX, sr, tuples.to_vec())
                    .map_err(|source| ExecError::Arith { node, source })?;
                out = rel.tuples;
            }
            Group::All => {
                if let Some(t) = tuples.iter().filter(|t| !t.2.is_zero()).min_by_key(|t| (t.0, t.1)) {
                    out.push(*t);
                }
            }
        },
        Combine::Add => {
            if let (Val::Rel(_), Group::RowCol) = (v, group) {
                out.extend(tuples.iter().filter(|t| !t.2.is_zero()));
                return Ok(out);
            }
            let key = |t: &Tuple| match group {
                Group::RowCol => (t.0, t.1),
                Group::Row => (t.0, 0),
                Group::All => (0, 0),
            };
            let mut keyed: Vec<Tuple> = tuples
                .iter()
                .map(|t| {
                    let (r, c) = key(t);
                    (r, c, t.2)
                })
                .collect();
            // Stable: members of a group keep their production order.
            keyed.sort_by_key(|t| (t.0, t.1));
            for (r, c, x) in keyed {
                match out.last_mut() {
                    Some(last) if last.0 == r && last.1 == c => {
                        last.2 = sr_add(sr, last.2, x).map_err(|source| ExecError::Arith { node, source })?;
                    }
                    _ => out.push((r, c, x)),
                }
            }
            out.retain(|t| !t.2.is_zero());
        }
    }
    Ok(out)
}
