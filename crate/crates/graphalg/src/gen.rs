//! Seeded graph generators for tests and the oracle harness.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph_io::{GraphInput, Mode};

pub type Edge = (u32, u32, f64);

/// Weights for weighted modes: multiples of 0.25 in `[0.25, 10]`, exact in
/// binary so sums do not depend on evaluation order.
fn weight(rng: &mut ChaCha8Rng) -> f64 {
    f64::from(rng.gen_range(1..=40u32)) * 0.25
}

/// Directed G(n, p). Self-loops are allowed.
pub fn erdos_renyi(n: u32, p: f64, seed: u64, mode: Mode) -> GraphInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(p) {
                edges.push((u, v, weight(&mut rng)));
            }
        }
    }
    GraphInput::from_edges(n as usize, &edges, mode)
}

/// Parameters of the `i`th random graph of a seeded family: `n` in 5..=200
/// and edge probability in 0.05..=0.3.
pub fn random_params(seed: u64) -> (u32, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (rng.gen_range(5..=200), rng.gen_range(0.05..=0.3))
}

pub fn random_graph(seed: u64, mode: Mode) -> GraphInput {
    let (n, p) = random_params(seed);
    erdos_renyi(n, p, seed, mode)
}

fn build(n: u32, edges: impl IntoIterator<Item = (u32, u32)>, mode: Mode, seed: u64) -> GraphInput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<Edge> = edges.into_iter().map(|(u, v)| (u, v, weight(&mut rng))).collect();
    GraphInput::from_edges(n as usize, &edges, mode)
}

pub fn path(n: u32, mode: Mode) -> GraphInput {
    build(n, (1..n).map(|i| (i - 1, i)), mode, 1)
}

pub fn cycle(n: u32, mode: Mode) -> GraphInput {
    build(n, (0..n).map(|i| (i, (i + 1) % n)), mode, 2)
}

/// Edges from the hub 0 to every leaf.
pub fn star(n: u32, mode: Mode) -> GraphInput {
    build(n, (1..n).map(|i| (0, i)), mode, 3)
}

/// Two disjoint directed triangles.
pub fn two_components(mode: Mode) -> GraphInput {
    build(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], mode, 4)
}

pub fn complete(n: u32, mode: Mode) -> GraphInput {
    let edges = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)));
    build(n, edges, mode, 5)
}

/// The structured graphs of the oracle suite, by name.
pub fn structured(mode: Mode) -> Vec<(&'static str, GraphInput)> {
    vec![
        ("path", path(12, mode)),
        ("cycle", cycle(9, mode)),
        ("star", star(10, mode)),
        ("two-components", two_components(mode)),
        ("k8", complete(8, mode)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_graph(7, Mode::Trop);
        let b = random_graph(7, Mode::Trop);
        assert_eq!(a.adjacency, b.adjacency);
        let (n, p) = random_params(7);
        assert!((5..=200).contains(&n) && (0.05..=0.3).contains(&p));
    }

    #[test]
    fn structured_shapes() {
        assert_eq!(complete(8, Mode::Bool).adjacency.len(), 56);
        assert_eq!(cycle(9, Mode::Bool).adjacency.len(), 9);
        assert_eq!(two_components(Mode::Bool).adjacency.len(), 6);
    }
}
