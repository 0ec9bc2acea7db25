//! Loop-invariant code motion.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;

use crate::plan::{free_names, map_children, rewrite_dag, LoopNode, Plan, PlanKind, PlanNode, PlanRef};

/// Hoists loop-invariant fragments in front of their loop. A fragment is
/// hoisted when it reads nothing bound inside the loop and its root is an
/// aggregation or a join input other than a plain scan. The largest such
/// fragments are taken first; inner loops are processed before outer ones,
/// so a fragment invariant in both ends up in front of the outer loop.
pub fn licm_pass(mut plan: Plan) -> Plan {
    let root = plan.root.clone();
    let mut next_id = plan.next_id;
    let root = rewrite_dag(&root, &mut |n| match &n.kind {
        PlanKind::Loop(l) => hoist(&n, l, &mut next_id),
        _ => n,
    });
    plan.root = root;
    plan.next_id = next_id;
    plan
}

/// Every name bound somewhere inside the loop: its states and index, and
/// the states, indices and cached fragments of nested loops.
pub fn bound_inside(l: &LoopNode) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    out.insert(l.index.clone());
    out.extend(l.states.iter().map(|(n, _)| n.clone()));
    let mut seen = BTreeSet::new();
    let mut stack: Vec<PlanRef> = l.bodies.clone();
    while let Some(n) = stack.pop() {
        if !seen.insert(n.id) {
            continue;
        }
        if let PlanKind::Loop(inner) = &n.kind {
            out.insert(inner.index.clone());
            out.extend(inner.states.iter().map(|(n, _)| n.clone()));
            out.extend(inner.hoisted.iter().map(|(n, _)| n.clone()));
        }
        stack.extend(n.children().into_iter().cloned());
    }
    out
}

struct Hoister<'a> {
    bound: BTreeSet<String>,
    free: BTreeMap<u32, BTreeSet<String>>,
    hoisted: Vec<(String, PlanRef)>,
    by_id: BTreeMap<u32, PlanRef>,
    memo: BTreeMap<(u32, bool), PlanRef>,
    next_id: &'a mut u32,
}

impl Hoister<'_> {
    fn invariant(&mut self, n: &PlanRef) -> bool {
        let free = free_names(n, &mut self.free);
        free.is_disjoint(&self.bound)
    }

    fn visit(&mut self, n: &PlanRef, join_input: bool) -> PlanRef {
        if let Some(c) = self.by_id.get(&n.id) {
            return c.clone();
        }
        if let Some(c) = self.memo.get(&(n.id, join_input)) {
            return c.clone();
        }
        let worth = match &n.kind {
            PlanKind::Aggregate { .. } => true,
            PlanKind::Accumulate { .. } => false,
            _ => join_input && !n.is_bare_scan(),
        };
        let out = if worth && self.invariant(n) {
            *self.next_id += 1;
            let name = format!("cache@{}", *self.next_id);
            let scan = Rc::new(PlanNode {
                id: *self.next_id,
                kind: PlanKind::CachedScan(name.clone()),
                ty: n.ty.clone(),
            });
            self.hoisted.push((name, n.clone()));
            self.by_id.insert(n.id, scan.clone());
            scan
        } else {
            let is_join = matches!(n.kind, PlanKind::Join { .. });
            map_children(n, &mut |c| self.visit(c, is_join))
        };
        self.memo.insert((n.id, join_input), out.clone());
        out
    }
}

fn hoist(n: &PlanRef, l: &LoopNode, next_id: &mut u32) -> PlanRef {
    let mut h = Hoister {
        bound: bound_inside(l),
        free: BTreeMap::new(),
        hoisted: Vec::new(),
        by_id: BTreeMap::new(),
        memo: BTreeMap::new(),
        next_id,
    };
    let bodies: Vec<PlanRef> = l.bodies.iter().map(|b| h.visit(b, false)).collect();
    if h.hoisted.is_empty() {
        return n.clone();
    }
    let mut hoisted = l.hoisted.clone();
    hoisted.extend(h.hoisted);
    Rc::new(PlanNode {
        id: n.id,
        kind: PlanKind::Loop(alloc::boxed::Box::new(LoopNode {
            bound: l.bound.clone(),
            index: l.index.clone(),
            states: l.states.clone(),
            bodies,
            hoisted,
            fixpoint: l.fixpoint,
        })),
        ty: n.ty.clone(),
    })
}

/// Structural check that no hoisted fragment reads a name bound inside
/// its loop. Returns the offending cache names.
pub fn check_hoisted(plan: &Plan) -> Vec<String> {
    let mut bad = Vec::new();
    let mut memo = BTreeMap::new();
    for n in plan.loops() {
        let PlanKind::Loop(l) = &n.kind else { continue };
        let bound = bound_inside(l);
        for (name, frag) in &l.hoisted {
            if !free_names(frag, &mut memo).is_disjoint(&bound) {
                bad.push(name.clone());
            }
        }
    }
    bad
}
