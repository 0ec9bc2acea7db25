//! Algorithms shipped with the driver.

use crate::graph_io::Mode;

pub const REACH: &str = include_str!("../stdlib/reach.gr");
pub const BFS: &str = include_str!("../stdlib/bfs.gr");
pub const SSSP: &str = include_str!("../stdlib/sssp.gr");
pub const PR: &str = include_str!("../stdlib/pr.gr");
pub const WCC: &str = include_str!("../stdlib/wcc.gr");

pub const NAMES: [&str; 5] = ["reach", "bfs", "sssp", "pr", "wcc"];

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_ITERS: i64 = 50;

/// Source text of a stdlib program; its entry function has the same name.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "reach" => REACH,
        "bfs" => BFS,
        "sssp" => SSSP,
        "pr" => PR,
        "wcc" => WCC,
        _ => return None,
    })
}

/// The graph mode the program expects.
pub fn mode(name: &str) -> Option<Mode> {
    Some(match name {
        "reach" | "bfs" | "pr" | "wcc" => Mode::Bool,
        "sssp" => Mode::Trop,
        _ => return None,
    })
}

/// Whether the program takes a source vertex.
pub fn needs_source(name: &str) -> bool {
    matches!(name, "reach" | "bfs" | "sssp")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::compile_source;

    #[test]
    fn every_program_compiles() {
        for name in NAMES {
            if let Err(e) = compile_source(source(name).unwrap(), name) {
                panic!("{name}: {e}");
            }
        }
    }
}
