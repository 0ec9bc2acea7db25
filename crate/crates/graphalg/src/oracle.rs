//! Reference implementations of the stdlib algorithms, written directly
//! over edge lists, and the harness comparing them with engine output.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use graphalg_core::engine::MatrixRelation;
use graphalg_core::semiring::Value;

use crate::driver::{bind_graph_args, compile_source, run, AlgoArgs, DriverError, Options};
use crate::graph_io::GraphInput;
use crate::stdlib;

pub const PR_TOLERANCE: f64 = 1e-9;
const REPORTED: usize = 10;

fn out_lists(n: usize, edges: &[(u32, u32, f64)]) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        adj[u as usize].push((v as usize, w));
    }
    adj
}

/// Vertices reachable from `source`, by depth-first search.
pub fn reach(n: usize, edges: &[(u32, u32, f64)], source: u32) -> Vec<bool> {
    let adj = out_lists(n, edges);
    let mut seen = vec![false; n];
    let mut stack = vec![source as usize];
    seen[source as usize] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Hop counts from `source` by breadth-first search; `None` if unreachable.
pub fn bfs(n: usize, edges: &[(u32, u32, f64)], source: u32) -> Vec<Option<u64>> {
    let adj = out_lists(n, edges);
    let mut dist = vec![None; n];
    dist[source as usize] = Some(0);
    let mut queue = VecDeque::from([source as usize]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap_or(0);
        for &(v, _) in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Shortest path weights by Bellman-Ford; infinity if unreachable.
pub fn sssp(n: usize, edges: &[(u32, u32, f64)], source: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    dist[source as usize] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in edges {
            let cand = dist[u as usize] + w;
            if cand < dist[v as usize] {
                dist[v as usize] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// PageRank by dense power iteration. The rank held by vertices without
/// out-edges is spread evenly over all vertices. Calls `each` with the
/// scores after every iteration.
pub fn pagerank_with(
    n: usize,
    edges: &[(u32, u32, f64)],
    damping: f64,
    iters: u64,
    mut each: impl FnMut(&[f64]),
) -> Vec<f64> {
    let nf = n as f64;
    let mut out_deg = vec![0usize; n];
    for &(u, _, _) in edges {
        out_deg[u as usize] += 1;
    }
    let mut rank = vec![1.0 / nf; n];
    for _ in 0..iters {
        let sink_mass: f64 = (0..n).filter(|&u| out_deg[u] == 0).map(|u| rank[u]).sum();
        let base = (1.0 - damping) / nf + damping * sink_mass / nf;
        let mut next = vec![base; n];
        for &(u, v, _) in edges {
            next[v as usize] += damping * rank[u as usize] / out_deg[u as usize] as f64;
        }
        rank = next;
        each(&rank);
    }
    rank
}

pub fn pagerank(n: usize, edges: &[(u32, u32, f64)], damping: f64, iters: u64) -> Vec<f64> {
    pagerank_with(n, edges, damping, iters, |_| {})
}

/// Component representative of every vertex, edges taken as undirected.
/// The representative is the smallest vertex of the component.
pub fn wcc(n: usize, edges: &[(u32, u32, f64)]) -> Vec<u32> {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for &(u, v, _) in edges {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        parent[hi] = lo;
    }
    (0..n).map(|v| find(&mut parent, v) as u32).collect()
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub program: String,
    pub mismatch_count: usize,
    /// The first few mismatches, one line per vertex.
    pub mismatches: Vec<String>,
}

impl Report {
    fn new(program: &str) -> Report {
        Report {
            program: program.into(),
            ..Report::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatch_count == 0
    }

    fn mismatch(&mut self, line: String) {
        self.mismatch_count += 1;
        if self.mismatches.len() < REPORTED {
            self.mismatches.push(line);
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "{}: ok", self.program);
        }
        write!(f, "{}: {} mismatching vertices", self.program, self.mismatch_count)?;
        for m in &self.mismatches {
            write!(f, "\n  {m}")?;
        }
        Ok(())
    }
}

/// Vector entries by row; the value of an absent row is the zero.
fn by_row(rel: &MatrixRelation) -> BTreeMap<u32, Value> {
    rel.tuples
        .iter()
        .filter(|t| !t.2.is_zero())
        .map(|&(r, _, v)| (r, v))
        .collect()
}

fn compare<T: fmt::Debug>(
    report: &mut Report,
    n: usize,
    got: &BTreeMap<u32, Value>,
    want: impl Fn(usize) -> Option<T>,
    same: impl Fn(&T, Value) -> bool,
) {
    for v in 0..n {
        let g = got.get(&(v as u32)).copied();
        let w = want(v);
        let ok = match (&w, g) {
            (None, None) => true,
            (Some(w), Some(g)) => same(w, g),
            _ => false,
        };
        if !ok {
            report.mismatch(format!("vertex {v}: engine {g:?}, oracle {w:?}"));
        }
    }
}

/// Runs a stdlib program through the engine and compares its output with
/// the reference implementation.
pub fn oracle_check(name: &str, graph: &GraphInput, args: &AlgoArgs, opts: &Options) -> Result<Report, DriverError> {
    let src = stdlib::source(name).ok_or_else(|| DriverError::Usage(format!("no stdlib program `{name}`")))?;
    let f = compile_source(src, name)?;
    let (bound, graphs) = bind_graph_args(&f, graph, args)?;
    let out = run(&f, bound, &graphs, opts)?.result;
    Ok(compare_output(name, graph, args, &out))
}

/// Compares an engine result for `name` with the reference.
pub fn compare_output(name: &str, graph: &GraphInput, args: &AlgoArgs, out: &MatrixRelation) -> Report {
    let n = graph.vertex_count();
    let edges = graph.edges();
    let src = args.source.unwrap_or(0);
    let mut report = Report::new(name);
    match name {
        "reach" => {
            let want = reach(n, &edges, src);
            compare(
                &mut report,
                n,
                &by_row(out),
                |v| want[v].then_some(true),
                |_, g| g == Value::Bool(true),
            );
        }
        "bfs" => {
            let want = bfs(n, &edges, src);
            compare(
                &mut report,
                n,
                &by_row(out),
                |v| want[v],
                |&w, g| g == Value::Trop(w as f64),
            );
        }
        "sssp" => {
            let want = sssp(n, &edges, src);
            compare(
                &mut report,
                n,
                &by_row(out),
                |v| want[v].is_finite().then_some(want[v]),
                |&w, g| g == Value::Trop(w),
            );
        }
        "pr" => {
            let want = pagerank(n, &edges, args.damping, args.iters.max(0) as u64);
            compare(
                &mut report,
                n,
                &by_row(out),
                |v| (want[v] != 0.0).then_some(want[v]),
                |&w, g| (g.as_f64() - w).abs() <= PR_TOLERANCE,
            );
        }
        "wcc" => {
            let want = wcc(n, &edges);
            // Rows of the label matrix, one label per vertex.
            let mut label: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for &(r, c, v) in &out.tuples {
                if !v.is_zero() {
                    label.entry(r).or_default().push(c);
                }
            }
            // Partitions match iff the engine label and the oracle
            // representative determine each other.
            let mut fwd: BTreeMap<u32, u32> = BTreeMap::new();
            let mut back: BTreeMap<u32, u32> = BTreeMap::new();
            for v in 0..n as u32 {
                let l = match label.get(&v).map(Vec::as_slice) {
                    Some([l]) => *l,
                    other => {
                        report.mismatch(format!("vertex {v}: engine labels {other:?}, expected exactly one"));
                        continue;
                    }
                };
                let r = want[v as usize];
                let a = *fwd.entry(l).or_insert(r);
                let b = *back.entry(r).or_insert(l);
                if a != r || b != l {
                    report.mismatch(format!("vertex {v}: engine label {l}, oracle component {r}"));
                }
            }
        }
        other => report.mismatch(format!("no oracle for `{other}`")),
    }
    report
}
