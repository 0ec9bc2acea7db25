use std::collections::BTreeMap;

use graphalg::driver::{bind_graph_args, build_plan, compile_source, run, AlgoArgs, Options};
use graphalg::graph_io::{load_graph, parse_graph, write_result, GraphInput, Mode};
use graphalg::preprocess::{Preprocess, DEDUP_LABEL, SELF_LOOP_LABEL};
use graphalg_core::optimizer::OptLevel;
use graphalg_core::plan::{rewrite_dag, PlanKind, PlanRef};
use graphalg_core::semiring::Value;

const IDENTITY: &str = "func id(graph: Matrix<s, s, real>) -> Matrix<s, s, real> {\n    return graph;\n}\n";

const BOTH: Preprocess = Preprocess {
    drop_self_loops: true,
    dedup_edges: true,
};

fn edge_map(text: &str) -> BTreeMap<(u64, u64), String> {
    text.lines()
        .map(|l| {
            let p: Vec<&str> = l.split('\t').collect();
            ((p[0].parse().unwrap(), p[1].parse().unwrap()), p[2].to_string())
        })
        .collect()
}

#[test]
fn load_then_write_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (vp, ep) = (dir.path().join("v"), dir.path().join("e"));
    std::fs::write(&vp, "# ids\n700\n5\n42\n\n").unwrap();
    std::fs::write(&ep, "5 42 1.5\n42 700 2\n700 5 0.25\n").unwrap();
    let g = load_graph(&vp, &ep, Mode::Real).unwrap();
    assert_eq!(g.ids, vec![5, 42, 700]);
    let back = edge_map(&write_result(&g.adjacency, &g.ids));
    let want: BTreeMap<(u64, u64), String> = [((5, 42), "1.5"), ((42, 700), "2"), ((700, 5), "0.25")]
        .into_iter()
        .map(|(k, v)| (k, v.to_string()))
        .collect();
    assert_eq!(back, want);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_graph(&dir.path().join("nope"), &dir.path().join("nope"), Mode::Bool).unwrap_err();
    assert!(err.to_string().contains("nope"), "{err}");
}

#[test]
fn monotone_relabeling_gives_the_same_matrix() {
    let edges = [(0u64, 1u64), (1, 2), (2, 0), (3, 1), (0, 3)];
    let render = |f: &dyn Fn(u64) -> u64| {
        let v: String = (0..5).map(|i| format!("{}\n", f(i))).collect();
        let e: String = edges.iter().map(|&(a, b)| format!("{} {}\n", f(a), f(b))).collect();
        parse_graph(&v, &e, Mode::Bool).unwrap()
    };
    let a = render(&|i| i);
    let b = render(&|i| 1_000_000 + 37 * i);
    assert_eq!(a.adjacency.tuples, b.adjacency.tuples);
    assert_eq!(b.index[&1_000_037], 1);
}

#[test]
fn malformed_lines_are_reported_with_line_numbers() {
    let err = parse_graph("1\n2\n", "1 2\n1 9\n", Mode::Bool).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let err = parse_graph("1\n2\n", "1 2\n", Mode::Trop).unwrap_err();
    assert!(err.to_string().contains("missing weight"), "{err}");
}

fn through_identity(g: &GraphInput, pre: Preprocess) -> Vec<(u32, u32, Value)> {
    let f = compile_source(IDENTITY, "id").unwrap();
    let (args, graphs) = bind_graph_args(&f, g, &AlgoArgs::default()).unwrap();
    let opts = Options {
        preprocess: pre,
        ..Options::default()
    };
    run(&f, args, &graphs, &opts).unwrap().result.tuples
}

#[test]
fn drop_self_loops_removes_the_diagonal() {
    let g = parse_graph("0\n1\n", "0 0 1\n0 1 1\n", Mode::Real).unwrap();
    let pre = Preprocess {
        drop_self_loops: true,
        dedup_edges: false,
    };
    assert_eq!(through_identity(&g, pre), vec![(0, 1, Value::Real(1.0))]);
}

#[test]
fn both_flags_filter_then_combine() {
    let g = parse_graph("0\n1\n", "0 0 1\n0 1 2\n0 1 3\n1 1 4\n", Mode::Real).unwrap();
    assert_eq!(through_identity(&g, BOTH), vec![(0, 1, Value::Real(5.0))]);

    // The filter sits below the aggregation on every graph scan.
    let f = compile_source(IDENTITY, "id").unwrap();
    let (_, graphs) = bind_graph_args(&f, &g, &AlgoArgs::default()).unwrap();
    let opts = Options {
        preprocess: BOTH,
        level: OptLevel::O0,
        ..Options::default()
    };
    let plan = build_plan(&f, &graphs, None, &opts).unwrap();
    let label = |n: &PlanRef| plan.labels.get(&n.id).map(String::as_str);
    let mut seen = 0;
    rewrite_dag(&plan.root, &mut |n| {
        if label(&n) == Some(DEDUP_LABEL) {
            let PlanKind::Aggregate { input, .. } = &n.kind else {
                panic!("dedup is not an aggregation")
            };
            assert_eq!(label(input), Some(SELF_LOOP_LABEL));
            seen += 1;
        }
        n
    });
    assert_eq!(seen, 1);
}

#[test]
fn no_flags_leave_the_graph_alone() {
    let g = parse_graph("0\n1\n", "0 0 1\n0 1 2\n", Mode::Real).unwrap();
    assert_eq!(through_identity(&g, Preprocess::default()), g.adjacency.tuples);
}
