//! In-place aggregation of loop states and fixpoint enabling.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use crate::plan::{
    free_names, rewrite_dag, Combine, Group, JoinKind, JoinOn, LoopNode, MapIndex, Plan, PlanKind, PlanNode, PlanRef,
};
use crate::semiring::SemiringTag;
use crate::types::Dim;

/// Rewrites loop bodies of the form `Aggregate(Union(state, delta))` into
/// `Accumulate(delta)`, which merges into the state table instead of
/// rebuilding it. Loops with at least one such body and no use of the loop
/// index get the fixpoint check.
pub fn inplace_pass(mut plan: Plan) -> Plan {
    let root = plan.root.clone();
    let mut next_id = plan.next_id;
    let root = rewrite_dag(&root, &mut |n| match &n.kind {
        PlanKind::Loop(l) => rewrite_loop(&n, l, &mut next_id),
        _ => n,
    });
    plan.root = root;
    plan.next_id = next_id;
    plan
}

struct Ids<'a>(&'a mut u32);

impl Ids<'_> {
    fn node(&mut self, kind: PlanKind, ty: &crate::types::MatrixType) -> PlanRef {
        *self.0 += 1;
        Rc::new(PlanNode {
            id: *self.0,
            kind,
            ty: ty.clone(),
        })
    }
}

fn rewrite_loop(n: &PlanRef, l: &LoopNode, next_id: &mut u32) -> PlanRef {
    let mut ids = Ids(next_id);
    let mut bodies = Vec::new();
    let mut any = false;
    for ((state, init), body) in l.states.iter().zip(&l.bodies) {
        match accumulate(body, state, init, &mut ids) {
            Some(acc) => {
                any = true;
                bodies.push(acc);
            }
            None => bodies.push(body.clone()),
        }
    }
    if !any {
        return n.clone();
    }
    let mut memo = BTreeMap::new();
    let uses_index = l.bodies.iter().any(|b| free_names(b, &mut memo).contains(&l.index));
    Rc::new(PlanNode {
        id: n.id,
        kind: PlanKind::Loop(Box::new(LoopNode {
            bound: l.bound.clone(),
            index: l.index.clone(),
            states: l.states.clone(),
            bodies,
            hoisted: l.hoisted.clone(),
            fixpoint: !uses_index,
        })),
        ty: n.ty.clone(),
    })
}

fn accumulate(body: &PlanRef, state: &str, init: &PlanRef, ids: &mut Ids) -> Option<PlanRef> {
    let norm = normalize(body, ids);
    let PlanKind::Aggregate { input, group, combine } = &norm.kind else {
        return None;
    };
    let PlanKind::Union(members) = &input.kind else {
        return None;
    };
    let is_state = |m: &PlanRef| matches!(&m.kind, PlanKind::ScanArg(s) if s == state);
    if members.iter().filter(|m| is_state(m)).count() != 1 {
        return None;
    }
    match (group, combine) {
        (Group::RowCol, Combine::Add) => {}
        // Merging by smallest column keeps one entry per row, which matches
        // the rebuilt state only if the initial state already has that form.
        (Group::Row, Combine::ArgminCol) if row_unique(init) => {}
        _ => return None,
    }
    let rest: Vec<PlanRef> = members.iter().filter(|m| !is_state(m)).cloned().collect();
    let delta = if rest.len() == 1 {
        rest[0].clone()
    } else {
        ids.node(PlanKind::Union(rest), &norm.ty)
    };
    Some(ids.node(
        PlanKind::Accumulate {
            delta,
            combine: *combine,
        },
        &norm.ty,
    ))
}

/// At most one nonzero per row, by construction.
fn row_unique(p: &PlanRef) -> bool {
    p.ty.cols == Dim::ONE
        || matches!(
            p.kind,
            PlanKind::Aggregate {
                group: Group::Row | Group::All,
                ..
            } | PlanKind::Map {
                index: MapIndex::Diag,
                ..
            }
        )
}

/// Regrouping additions is exact on these semirings only; on `real` it
/// could change rounding.
fn can_flatten(sr: SemiringTag) -> bool {
    sr != SemiringTag::Real
}

/// Brings a body into `Aggregate(Union(..))` form where possible:
/// pointwise addition over a padded join becomes an aggregation over a
/// union, nested additive aggregations are flattened, and on `bool` a
/// smallest-column selection absorbs the addition beneath it.
fn normalize(n: &PlanRef, ids: &mut Ids) -> PlanRef {
    if let Some(members) = add_operands(n) {
        let mut flat = Vec::new();
        for m in members {
            let m = if can_flatten(n.ty.sr) { normalize(&m, ids) } else { m };
            splice(&m, n.ty.sr, &mut flat);
        }
        let union = ids.node(PlanKind::Union(flat), &n.ty);
        return ids.node(
            PlanKind::Aggregate {
                input: union,
                group: Group::RowCol,
                combine: Combine::Add,
            },
            &n.ty,
        );
    }
    if let PlanKind::Aggregate {
        input,
        group: Group::Row,
        combine: Combine::ArgminCol,
    } = &n.kind
    {
        if n.ty.sr == SemiringTag::Bool {
            let inner = normalize(input, ids);
            if let PlanKind::Aggregate {
                input: u,
                group: Group::RowCol,
                combine: Combine::Add,
            } = &inner.kind
            {
                return ids.node(
                    PlanKind::Aggregate {
                        input: u.clone(),
                        group: Group::Row,
                        combine: Combine::ArgminCol,
                    },
                    &n.ty,
                );
            }
        }
    }
    n.clone()
}

/// The operands of a semiring addition: a pointwise add over a padded
/// join, or an additive aggregation over a union.
fn add_operands(n: &PlanRef) -> Option<Vec<PlanRef>> {
    match &n.kind {
        PlanKind::Map {
            input,
            f,
            index: MapIndex::Keep,
            drop_diagonal: false,
        } if f.is_semiring_add() && f.result == n.ty.sr => match &input.kind {
            PlanKind::Join {
                inputs,
                on: JoinOn::RowCol,
                kind: JoinKind::OuterPadded,
                broadcast,
            } if inputs.len() == 2 && broadcast.iter().all(|b| !b) => Some(vec![inputs[0].clone(), inputs[1].clone()]),
            _ => None,
        },
        _ => None,
    }
}

fn splice(m: &PlanRef, sr: SemiringTag, out: &mut Vec<PlanRef>) {
    if can_flatten(sr) {
        if let PlanKind::Aggregate {
            input,
            group: Group::RowCol,
            combine: Combine::Add,
        } = &m.kind
        {
            match &input.kind {
                PlanKind::Union(inner) => {
                    for i in inner {
                        splice(i, sr, out);
                    }
                }
                _ => out.push(input.clone()),
            }
            return;
        }
    }
    out.push(m.clone());
}
