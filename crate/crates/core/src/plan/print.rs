use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::*;

/// Renders a plan as an indented tree, one node per line:
/// `#id Kind[details, RxC, SPARSE]`. A node reachable along several paths is
/// printed in full once and as `#id (shared)` afterwards.
pub fn pretty_plan(plan: &Plan) -> String {
    let mut out = String::new();
    let mut seen = BTreeSet::new();
    node(&mut out, plan, &plan.root, 0, &mut seen);
    out
}

fn shape(n: &PlanNode) -> String {
    format!(
        "{}x{}, {}",
        n.ty.rows,
        n.ty.cols,
        if n.is_dense() { "DENSE" } else { "SPARSE" }
    )
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn node(out: &mut String, plan: &Plan, n: &PlanRef, depth: usize, seen: &mut BTreeSet<u32>) {
    indent(out, depth);
    if !seen.insert(n.id) {
        let _ = writeln!(out, "#{} (shared)", n.id);
        return;
    }
    let label = match plan.labels.get(&n.id) {
        Some(l) => format!(" <{l}>"),
        None => String::new(),
    };
    let sr = n.ty.sr;
    let head = match &n.kind {
        PlanKind::ScanArg(name) => format!("ScanArg[{name}, {}]", shape(n)),
        PlanKind::CachedScan(name) => format!("CachedScan[{name}, {}]", shape(n)),
        PlanKind::ScanDomain(d) => format!("ScanDomain[{d}, {}]", shape(n)),
        PlanKind::Constant(t) => format!("Constant[{} tuples, {}]", t.len(), shape(n)),
        PlanKind::Join {
            on, kind, broadcast, ..
        } => {
            let on = match on {
                JoinOn::RowCol => "row=row,col=col",
                JoinOn::ColRow => "col=row",
            };
            let kind = match kind {
                JoinKind::Inner => "inner",
                JoinKind::OuterPadded => "outer",
            };
            let mut b = String::new();
            if broadcast.iter().any(|x| *x) {
                b.push_str(", broadcast=");
                for x in broadcast {
                    b.push(if *x { 'b' } else { '-' });
                }
            }
            format!("Join[{on}, {kind}{b}, {}]", shape(n))
        }
        PlanKind::Map {
            f,
            index,
            drop_diagonal,
            ..
        } => {
            let mut extra = String::new();
            if *index == MapIndex::Diag {
                extra.push_str(", diag");
            }
            if *drop_diagonal {
                extra.push_str(", row!=col");
            }
            format!("Map[{f}{extra}, {}]", shape(n))
        }
        PlanKind::Aggregate { group, combine, .. } => {
            let g = match group {
                Group::RowCol => "row,col",
                Group::Row => "row",
                Group::All => "all",
            };
            format!("Aggregate[by {g}, {}:{sr}, {}]", combine_name(*combine), shape(n))
        }
        PlanKind::Union(_) => format!("Union[{}]", shape(n)),
        PlanKind::Transpose(_) => format!("Transpose[{}]", shape(n)),
        PlanKind::Densify(_) => format!("Densify[{}]", shape(n)),
        PlanKind::Accumulate { combine, .. } => {
            format!("Accumulate[{}:{sr}, in place, {}]", combine_name(*combine), shape(n))
        }
        PlanKind::Loop(l) => {
            let bound = match &l.bound {
                PlanBound::Dim(d) => format!("{d}"),
                PlanBound::Scalar(b) => format!("#{}", b.id),
            };
            let states: Vec<&str> = l.states.iter().map(|(s, _)| s.as_str()).collect();
            format!(
                "Loop[bound={bound}, index={}, states=({}), fixpoint={}, {}]",
                l.index,
                states.join(" "),
                if l.fixpoint { "on" } else { "off" },
                shape(n)
            )
        }
    };
    let _ = writeln!(out, "#{} {head}{label}", n.id);
    if let PlanKind::Loop(l) = &n.kind {
        let section = |out: &mut String, title: String| {
            indent(out, depth + 1);
            let _ = writeln!(out, "{title}:");
        };
        if let PlanBound::Scalar(b) = &l.bound {
            section(out, String::from("bound"));
            node(out, plan, b, depth + 2, seen);
        }
        for (name, h) in &l.hoisted {
            section(out, format!("hoisted {name}"));
            node(out, plan, h, depth + 2, seen);
        }
        for (name, init) in &l.states {
            section(out, format!("init {name}"));
            node(out, plan, init, depth + 2, seen);
        }
        for ((name, _), body) in l.states.iter().zip(&l.bodies) {
            section(out, format!("body {name}"));
            node(out, plan, body, depth + 2, seen);
        }
        return;
    }
    for c in n.children() {
        node(out, plan, c, depth + 1, seen);
    }
}

fn combine_name(c: Combine) -> &'static str {
    match c {
        Combine::Add => "add",
        Combine::ArgminCol => "argmin-col",
    }
}
