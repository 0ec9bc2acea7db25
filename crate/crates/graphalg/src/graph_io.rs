//! Vertex and edge files.
//!
//! A vertex file lists one unsigned decimal id per line. An edge file has
//! `src dst [weight]` per line. Blank lines and lines starting with `#` are
//! skipped in both. Vertices are numbered by ascending external id.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use graphalg_core::engine::MatrixRelation;
use graphalg_core::semiring::{SemiringTag, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Bool,
    Trop,
    Real,
}

impl Mode {
    pub fn semiring(self) -> SemiringTag {
        match self {
            Mode::Bool => SemiringTag::Bool,
            Mode::Trop => SemiringTag::Trop,
            Mode::Real => SemiringTag::Real,
        }
    }

    pub fn weighted(self) -> bool {
        self != Mode::Bool
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{file} line {line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    /// Edges repeated in the file and combined with semiring addition.
    pub duplicate_edges: u64,
    /// Weights present in unweighted mode.
    pub ignored_weights: u64,
}

#[derive(Clone, Debug)]
pub struct GraphInput {
    /// External ids in ascending order; position is the internal index.
    pub ids: Vec<u64>,
    pub index: BTreeMap<u64, u32>,
    pub adjacency: MatrixRelation,
    pub weighted: bool,
    pub warnings: LoadWarnings,
}

impl GraphInput {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    /// Edges as `(src, dst, weight)` over internal indices.
    pub fn edges(&self) -> Vec<(u32, u32, f64)> {
        self.adjacency
            .tuples
            .iter()
            .map(|&(r, c, v)| {
                let w = match v {
                    Value::Bool(_) => 1.0,
                    other => other.as_f64(),
                };
                (r, c, w)
            })
            .collect()
    }

    /// Builds a graph over internal ids `0..n` from an edge list.
    /// Duplicates are combined as when loading.
    pub fn from_edges(n: usize, edges: &[(u32, u32, f64)], mode: Mode) -> GraphInput {
        let mut text = String::new();
        for &(u, v, w) in edges {
            if mode.weighted() {
                let _ = writeln!(text, "{u} {v} {w:?}");
            } else {
                let _ = writeln!(text, "{u} {v}");
            }
        }
        let vertices: String = (0..n).map(|i| format!("{i}\n")).collect();
        parse_graph(&vertices, &text, mode).expect("generated edge list is well formed")
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses vertex and edge file contents.
pub fn parse_graph(vertices: &str, edges: &str, mode: Mode) -> Result<GraphInput, LoadError> {
    let perr = |file: &str, line, msg: String| LoadError::Parse {
        file: file.into(),
        line,
        msg,
    };
    let mut ids = Vec::new();
    for (line, l) in lines(vertices) {
        let mut parts = l.split_whitespace();
        let tok = parts.next().unwrap_or_default();
        let id: u64 = tok
            .parse()
            .map_err(|_| perr("vertices", line, format!("`{tok}` is not a vertex id")))?;
        ids.push(id);
    }
    ids.sort_unstable();
    ids.dedup();
    let index: BTreeMap<u64, u32> = ids.iter().enumerate().map(|(i, &id)| (id, i as u32)).collect();
    let sr = mode.semiring();
    let mut warnings = LoadWarnings::default();
    let mut tuples = Vec::new();
    for (line, l) in lines(edges) {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(perr("edges", line, format!("expected `src dst [weight]`, got `{l}`")));
        }
        let endpoint = |tok: &str| -> Result<u32, LoadError> {
            let id: u64 = tok
                .parse()
                .map_err(|_| perr("edges", line, format!("`{tok}` is not a vertex id")))?;
            index
                .get(&id)
                .copied()
                .ok_or_else(|| perr("edges", line, format!("unknown vertex {id}")))
        };
        let (u, v) = (endpoint(parts[0])?, endpoint(parts[1])?);
        let value = match (mode, parts.get(2)) {
            (Mode::Bool, w) => {
                if w.is_some() {
                    warnings.ignored_weights += 1;
                }
                Value::Bool(true)
            }
            (_, None) => return Err(perr("edges", line, "missing weight".into())),
            (m, Some(w)) => {
                let x: f64 = w
                    .parse()
                    .map_err(|_| perr("edges", line, format!("`{w}` is not a weight")))?;
                if !x.is_finite() {
                    return Err(perr("edges", line, format!("weight `{w}` is not finite")));
                }
                if m == Mode::Trop {
                    Value::Trop(x)
                } else {
                    Value::Real(x)
                }
            }
        };
        tuples.push((u, v, value));
    }
    let before = tuples.len();
    let mut keys: Vec<(u32, u32)> = tuples.iter().map(|t| (t.0, t.1)).collect();
    keys.sort_unstable();
    keys.dedup();
    warnings.duplicate_edges = (before - keys.len()) as u64;
    let n = ids.len() as u64;
    let adjacency = MatrixRelation::from_tuples(n, n, sr, tuples).map_err(|e| perr("edges", 0, e.to_string()))?;
    Ok(GraphInput {
        ids,
        index,
        adjacency,
        weighted: mode.weighted(),
        warnings,
    })
}

pub fn load_graph(vertex_file: &Path, edge_file: &Path, mode: Mode) -> Result<GraphInput, LoadError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| LoadError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    parse_graph(&read(vertex_file)?, &read(edge_file)?, mode)
}

fn format_value(v: Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Real(x) | Value::Trop(x) => x.to_string(),
    }
}

/// Result rows as TSV, `id<TAB>value` for vectors and
/// `row<TAB>col<TAB>value` otherwise, sorted by position. Indices without an
/// external id (a dimension that is not the vertex set) print as is.
pub fn write_result(rel: &MatrixRelation, ids: &[u64]) -> String {
    let ext = |i: u32| ids.get(i as usize).copied().unwrap_or(u64::from(i));
    let mut out = String::new();
    for &(r, c, v) in &rel.tuples {
        if v.is_zero() {
            continue;
        }
        if rel.cols == 1 {
            let _ = writeln!(out, "{}\t{}", ext(r), format_value(v));
        } else {
            let _ = writeln!(out, "{}\t{}\t{}", ext(r), ext(c), format_value(v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remaps_ids() {
        let g = parse_graph("10\n20\n30\n", "10 20\n20 30\n", Mode::Bool).unwrap();
        assert_eq!(
            g.adjacency.tuples,
            vec![(0, 1, Value::Bool(true)), (1, 2, Value::Bool(true))]
        );
    }

    #[test]
    fn weighted_edge() {
        let g = parse_graph("10\n20\n", "10 20 2.5\n", Mode::Trop).unwrap();
        assert_eq!(g.adjacency.tuples, vec![(0, 1, Value::Trop(2.5))]);
    }

    #[test]
    fn duplicates_are_combined() {
        let g = parse_graph("10\n20\n", "10 20\n10 20\n", Mode::Bool).unwrap();
        assert_eq!(g.adjacency.len(), 1);
        assert_eq!(g.warnings.duplicate_edges, 1);
        let g = parse_graph("10\n20\n", "10 20 4\n10 20 3\n", Mode::Trop).unwrap();
        assert_eq!(g.adjacency.tuples, vec![(0, 1, Value::Trop(3.0))]);
        let g = parse_graph("10\n20\n", "10 20 4\n10 20 3\n", Mode::Real).unwrap();
        assert_eq!(g.adjacency.tuples, vec![(0, 1, Value::Real(7.0))]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_graph("1\n2\n", "# header\n1 2\n1 7\n", Mode::Bool).unwrap_err();
        assert_eq!(e.to_string(), "edges line 3: unknown vertex 7");
        let e = parse_graph("1\nx\n", "", Mode::Bool).unwrap_err();
        assert_eq!(e.to_string(), "vertices line 2: `x` is not a vertex id");
        let e = parse_graph("1\n", "1\n", Mode::Bool).unwrap_err();
        assert!(e.to_string().starts_with("edges line 1: expected"));
        let e = parse_graph("1\n", "1 1\n", Mode::Trop).unwrap_err();
        assert_eq!(e.to_string(), "edges line 1: missing weight");
    }

    #[test]
    fn weight_in_bool_mode_is_ignored() {
        let g = parse_graph("1\n2\n", "1 2 9.0\n", Mode::Bool).unwrap();
        assert_eq!(g.warnings.ignored_weights, 1);
    }

    #[test]
    fn empty_vertex_file() {
        let g = parse_graph("", "", Mode::Bool).unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert!(g.adjacency.is_empty());
    }

    #[test]
    fn result_formatting() {
        let rel = MatrixRelation::from_tuples(
            2,
            1,
            SemiringTag::Trop,
            vec![(0, 0, Value::Trop(0.0)), (1, 0, Value::Trop(2.0))],
        )
        .unwrap();
        assert_eq!(write_result(&rel, &[10, 20]), "10\t0\n20\t2\n");
        assert_eq!(
            write_result(&MatrixRelation::empty(2, 1, SemiringTag::Trop), &[10, 20]),
            ""
        );
        let b = MatrixRelation::from_tuples(2, 1, SemiringTag::Bool, vec![(1, 0, Value::Bool(true))]).unwrap();
        assert_eq!(write_result(&b, &[10, 20]), "20\ttrue\n");
    }
}
