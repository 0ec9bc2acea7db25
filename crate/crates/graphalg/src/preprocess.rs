//! Plan fragments applied to graph arguments before the algorithm sees
//! them.

use std::collections::BTreeSet;

use graphalg_core::plan::{rewrite_dag, Combine, Group, MapIndex, Plan, PlanKind, PlanNode, PlanRef};
use graphalg_core::scalar::{PointwiseFn, ScalarExpr};
use std::rc::Rc;

pub const DEDUP_LABEL: &str = "dedup";
pub const SELF_LOOP_LABEL: &str = "drop-self-loops";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Preprocess {
    pub drop_self_loops: bool,
    pub dedup_edges: bool,
}

/// Wraps every scan of a graph argument: first a filter dropping `(v, v)`
/// entries, then an aggregation combining duplicate keys. Scans in
/// different loop scopes get separate wrappers, so the wrappers run as
/// often as the scans they replace until the optimizer hoists them.
pub fn preprocess_fragment(mut plan: Plan, graphs: &BTreeSet<String>, flags: Preprocess) -> Plan {
    if !flags.drop_self_loops && !flags.dedup_edges {
        return plan;
    }
    let root = plan.root.clone();
    let mut next_id = plan.next_id;
    let mut labels = Vec::new();
    let root = rewrite_dag(&root, &mut |n| {
        let PlanKind::ScanArg(name) = &n.kind else { return n };
        if !graphs.contains(name) {
            return n;
        }
        let mut node = |kind: PlanKind, label: &str| {
            next_id += 1;
            labels.push((next_id, label.to_string()));
            Rc::new(PlanNode {
                id: next_id,
                kind,
                ty: n.ty.clone(),
            })
        };
        let mut out: PlanRef = n.clone();
        if flags.drop_self_loops {
            let sr = n.ty.sr;
            let identity = PointwiseFn {
                params: vec![("x".into(), sr)],
                body: ScalarExpr::Param(0),
                result: sr,
            };
            out = node(
                PlanKind::Map {
                    input: out,
                    f: identity,
                    index: MapIndex::Keep,
                    drop_diagonal: true,
                },
                SELF_LOOP_LABEL,
            );
        }
        if flags.dedup_edges {
            out = node(
                PlanKind::Aggregate {
                    input: out,
                    group: Group::RowCol,
                    combine: Combine::Add,
                },
                DEDUP_LABEL,
            );
        }
        out
    });
    plan.root = root;
    plan.next_id = next_id;
    plan.labels.extend(labels);
    plan
}
