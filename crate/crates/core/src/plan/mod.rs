//! Relational plans over `(row, col, value)` relations.

mod compile;
mod print;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;

use crate::scalar::PointwiseFn;
use crate::semiring::Value;
use crate::types::{Dim, MatrixType};
pub use compile::compile;
pub use print::pretty_plan;

pub type PlanRef = Rc<PlanNode>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinOn {
    /// Equal `(row, col)`; pointwise operations.
    RowCol,
    /// Left column equals right row; matrix products.
    ColRow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinKind {
    Inner,
    /// Full outer join; a side without a tuple at some key contributes the
    /// additive identity.
    OuterPadded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapIndex {
    Keep,
    /// `(r, 0) -> (r, r)`.
    Diag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    RowCol,
    Row,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    /// Semiring addition.
    Add,
    /// Per group, the nonzero tuple with the smallest column.
    ArgminCol,
}

#[derive(Clone, Debug)]
pub enum PlanBound {
    Dim(Dim),
    /// A 1x1 `int` relation evaluated before the loop starts.
    Scalar(PlanRef),
}

#[derive(Clone, Debug)]
pub struct LoopNode {
    pub bound: PlanBound,
    pub index: String,
    /// State names and initial values.
    pub states: Vec<(String, PlanRef)>,
    /// One body per state, reading states and the index through `ScanArg`.
    pub bodies: Vec<PlanRef>,
    /// Loop-invariant fragments evaluated once before the first iteration
    /// and read in bodies through `CachedScan`.
    pub hoisted: Vec<(String, PlanRef)>,
    pub fixpoint: bool,
}

#[derive(Clone, Debug)]
pub enum PlanKind {
    /// A function argument, loop state or loop index.
    ScanArg(String),
    /// A hoisted fragment.
    CachedScan(String),
    /// `(i, 0, true)` for every `i` below the dimension.
    ScanDomain(Dim),
    Constant(Vec<(u32, u32, Value)>),
    /// Joins its inputs. Only ever the direct input of a [`PlanKind::Map`],
    /// whose function receives one attribute per input. Broadcast inputs
    /// are 1x1 and contribute their single value (or the identity) to every
    /// output tuple.
    Join {
        inputs: Vec<PlanRef>,
        on: JoinOn,
        kind: JoinKind,
        broadcast: Vec<bool>,
    },
    Map {
        input: PlanRef,
        f: PointwiseFn,
        index: MapIndex,
        /// Keep only tuples with `row != col`.
        drop_diagonal: bool,
    },
    Aggregate {
        input: PlanRef,
        group: Group,
        combine: Combine,
    },
    /// Bag union.
    Union(Vec<PlanRef>),
    Transpose(PlanRef),
    /// All positions of the shape, identities included.
    Densify(PlanRef),
    Loop(Box<LoopNode>),
    /// Loop body root merging `delta` into the state table in place.
    Accumulate {
        delta: PlanRef,
        combine: Combine,
    },
}

#[derive(Clone, Debug)]
pub struct PlanNode {
    pub id: u32,
    pub kind: PlanKind,
    pub ty: MatrixType,
}

impl PlanNode {
    pub fn children(&self) -> Vec<&PlanRef> {
        match &self.kind {
            PlanKind::ScanArg(_) | PlanKind::CachedScan(_) | PlanKind::ScanDomain(_) | PlanKind::Constant(_) => {
                Vec::new()
            }
            PlanKind::Join { inputs, .. } | PlanKind::Union(inputs) => inputs.iter().collect(),
            PlanKind::Map { input, .. } | PlanKind::Aggregate { input, .. } => alloc::vec![input],
            PlanKind::Transpose(a) | PlanKind::Densify(a) => alloc::vec![a],
            PlanKind::Accumulate { delta, .. } => alloc::vec![delta],
            PlanKind::Loop(l) => {
                let mut out = Vec::new();
                if let PlanBound::Scalar(b) = &l.bound {
                    out.push(b);
                }
                out.extend(l.hoisted.iter().map(|(_, p)| p));
                out.extend(l.states.iter().map(|(_, p)| p));
                out.extend(l.bodies.iter());
                out
            }
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, PlanKind::Densify(_))
    }

    /// A scan, possibly transposed: cheap to recompute.
    pub fn is_bare_scan(&self) -> bool {
        match &self.kind {
            PlanKind::ScanArg(_) | PlanKind::CachedScan(_) | PlanKind::ScanDomain(_) | PlanKind::Constant(_) => true,
            PlanKind::Transpose(a) => matches!(
                a.kind,
                PlanKind::ScanArg(_) | PlanKind::CachedScan(_) | PlanKind::Constant(_)
            ),
            _ => false,
        }
    }
}

/// A compiled function.
#[derive(Clone, Debug)]
pub struct Plan {
    pub root: PlanRef,
    pub params: Vec<(String, MatrixType)>,
    /// Display labels for selected nodes; statistics are also reported per
    /// label.
    pub labels: BTreeMap<u32, String>,
    pub next_id: u32,
}

impl Plan {
    pub fn fresh_id(&mut self) -> u32 {
        self.next_id += 1;
        self.next_id
    }

    pub fn node(&mut self, kind: PlanKind, ty: MatrixType) -> PlanRef {
        Rc::new(PlanNode {
            id: self.fresh_id(),
            kind,
            ty,
        })
    }

    /// Every distinct node reachable from the root, children before parents.
    pub fn nodes(&self) -> Vec<PlanRef> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        fn walk(n: &PlanRef, seen: &mut BTreeSet<u32>, out: &mut Vec<PlanRef>) {
            if !seen.insert(n.id) {
                return;
            }
            for c in n.children() {
                walk(c, seen, out);
            }
            out.push(n.clone());
        }
        walk(&self.root, &mut seen, &mut out);
        out
    }

    pub fn loops(&self) -> Vec<PlanRef> {
        self.nodes()
            .into_iter()
            .filter(|n| matches!(n.kind, PlanKind::Loop(_)))
            .collect()
    }
}

/// Rebuilds `node` with `f` applied to each direct child, keeping its id.
/// Returns the original when no child changed.
pub fn map_children(node: &PlanRef, f: &mut dyn FnMut(&PlanRef) -> PlanRef) -> PlanRef {
    let kind = match &node.kind {
        PlanKind::ScanArg(_) | PlanKind::CachedScan(_) | PlanKind::ScanDomain(_) | PlanKind::Constant(_) => {
            return node.clone()
        }
        PlanKind::Join {
            inputs,
            on,
            kind,
            broadcast,
        } => PlanKind::Join {
            inputs: inputs.iter().map(&mut *f).collect(),
            on: *on,
            kind: *kind,
            broadcast: broadcast.clone(),
        },
        PlanKind::Union(inputs) => PlanKind::Union(inputs.iter().map(&mut *f).collect()),
        PlanKind::Map {
            input,
            f: g,
            index,
            drop_diagonal,
        } => PlanKind::Map {
            input: f(input),
            f: g.clone(),
            index: *index,
            drop_diagonal: *drop_diagonal,
        },
        PlanKind::Aggregate { input, group, combine } => PlanKind::Aggregate {
            input: f(input),
            group: *group,
            combine: *combine,
        },
        PlanKind::Transpose(a) => PlanKind::Transpose(f(a)),
        PlanKind::Densify(a) => PlanKind::Densify(f(a)),
        PlanKind::Accumulate { delta, combine } => PlanKind::Accumulate {
            delta: f(delta),
            combine: *combine,
        },
        PlanKind::Loop(l) => PlanKind::Loop(Box::new(LoopNode {
            bound: match &l.bound {
                PlanBound::Scalar(b) => PlanBound::Scalar(f(b)),
                d => d.clone(),
            },
            index: l.index.clone(),
            hoisted: l.hoisted.iter().map(|(n, p)| (n.clone(), f(p))).collect(),
            states: l.states.iter().map(|(n, p)| (n.clone(), f(p))).collect(),
            bodies: l.bodies.iter().map(&mut *f).collect(),
            fixpoint: l.fixpoint,
        })),
    };
    let old: Vec<u32> = node.children().iter().map(|c| c.id).collect();
    let rebuilt = PlanNode {
        id: node.id,
        kind,
        ty: node.ty.clone(),
    };
    let same = rebuilt.children().iter().map(|c| c.id).eq(old.iter().copied())
        && rebuilt
            .children()
            .iter()
            .zip(node.children())
            .all(|(a, b)| Rc::ptr_eq(a, b));
    if same {
        node.clone()
    } else {
        Rc::new(rebuilt)
    }
}

/// Bottom-up rewrite of a DAG, memoized by node id so that shared nodes stay
/// shared. `f` sees each node after its children were rewritten.
pub fn rewrite_dag(root: &PlanRef, f: &mut dyn FnMut(PlanRef) -> PlanRef) -> PlanRef {
    fn go(n: &PlanRef, memo: &mut BTreeMap<u32, PlanRef>, f: &mut dyn FnMut(PlanRef) -> PlanRef) -> PlanRef {
        if let Some(done) = memo.get(&n.id) {
            return done.clone();
        }
        let rebuilt = map_children(n, &mut |c| go(c, memo, f));
        let out = f(rebuilt);
        memo.insert(n.id, out.clone());
        out
    }
    go(root, &mut BTreeMap::new(), f)
}

/// Names a subplan reads without binding them itself: arguments, states
/// and indices of enclosing loops, and cached fragments of enclosing loops.
pub fn free_names(n: &PlanRef, memo: &mut BTreeMap<u32, BTreeSet<String>>) -> BTreeSet<String> {
    if let Some(s) = memo.get(&n.id) {
        return s.clone();
    }
    let out = match &n.kind {
        PlanKind::ScanArg(name) | PlanKind::CachedScan(name) => {
            let mut s = BTreeSet::new();
            s.insert(name.clone());
            s
        }
        PlanKind::Loop(l) => {
            let mut outer = BTreeSet::new();
            if let PlanBound::Scalar(b) = &l.bound {
                outer.extend(free_names(b, memo));
            }
            for (_, p) in &l.states {
                outer.extend(free_names(p, memo));
            }
            for (_, p) in &l.hoisted {
                outer.extend(free_names(p, memo));
            }
            let mut inner = BTreeSet::new();
            for b in &l.bodies {
                inner.extend(free_names(b, memo));
            }
            for (name, _) in l.states.iter().chain(&l.hoisted) {
                inner.remove(name);
            }
            inner.remove(&l.index);
            outer.extend(inner);
            outer
        }
        _ => {
            let mut s = BTreeSet::new();
            for c in n.children() {
                s.extend(free_names(c, memo));
            }
            s
        }
    };
    memo.insert(n.id, out.clone());
    out
}
