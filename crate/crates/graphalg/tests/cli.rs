use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_graphalg");

fn stdlib_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("stdlib")
        .join(format!("{name}.gr"))
}

struct Files {
    dir: tempfile::TempDir,
}

impl Files {
    fn new(vertices: &str, edges: &str) -> Files {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("v"), vertices).unwrap();
        std::fs::write(dir.path().join("e"), edges).unwrap();
        Files { dir }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, program: &Path, func: &str, mode: &str, extra: &[&str]) -> Output {
        Command::new(BIN)
            .arg("run")
            .arg(program)
            .args(["--func", func, "--mode", mode])
            .arg("--vertices")
            .arg(self.dir.path().join("v"))
            .arg("--edges")
            .arg(self.dir.path().join("e"))
            .args(extra)
            .output()
            .unwrap()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn reach_on_a_path() {
    let f = Files::new("10\n20\n30\n", "10 20\n20 30\n");
    let o = f.run(&stdlib_file("reach"), "reach", "bool", &["--source", "10"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert_eq!(stdout(&o), "10\ttrue\n20\ttrue\n30\ttrue\n");
    let o = f.run(&stdlib_file("reach"), "reach", "bool", &["--source", "20"]);
    assert_eq!(stdout(&o), "20\ttrue\n30\ttrue\n");
}

#[test]
fn pagerank_with_a_sink_sums_to_one() {
    let f = Files::new("1\n2\n3\n4\n", "1 2\n2 3\n3 1\n1 4\n");
    let o = f.run(
        &stdlib_file("pr"),
        "pr",
        "bool",
        &["--iters", "20", "--damping", "0.85"],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    let text = stdout(&o);
    let ranks: Vec<f64> = text
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ranks.len(), 4);
    assert!((ranks.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "{text}");
}

#[test]
fn output_file_and_stats() {
    let f = Files::new("1\n2\n", "1 2 2.5\n");
    let out = f.dir.path().join("out.tsv");
    let o = f.run(
        &stdlib_file("sssp"),
        "sssp",
        "trop",
        &["--source", "1", "--stats", "--output", out.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "1\t0\n2\t2.5\n");
    assert!(!o.stderr.is_empty());
}

#[test]
fn dumps_stop_before_execution() {
    let f = Files::new("1\n2\n", "1 2\n");
    // Arguments are bound before dumping, so the source is still required.
    for flag in ["--dump-plan", "--dump-core"] {
        let o = f.run(&stdlib_file("reach"), "reach", "bool", &["--source", "1", flag]);
        assert_eq!(code(&o), 0, "{o:?}");
        let text = stdout(&o);
        assert!(!text.is_empty());
        assert!(!text.contains("\ttrue"), "{flag} executed the program:\n{text}");
    }
}

#[test]
fn usage_errors_exit_1() {
    let f = Files::new("1\n2\n", "1 2\n");
    let missing_source = f.run(&stdlib_file("reach"), "reach", "bool", &[]);
    assert_eq!(code(&missing_source), 1);
    let unknown_source = f.run(&stdlib_file("reach"), "reach", "bool", &["--source", "9"]);
    assert_eq!(code(&unknown_source), 1);
    let bad_edges = Files::new("1\n2\n", "1 3\n").run(&stdlib_file("reach"), "reach", "bool", &["--source", "1"]);
    assert_eq!(code(&bad_edges), 1);
    let no_args = Command::new(BIN).arg("run").output().unwrap();
    assert_eq!(code(&no_args), 1);
}

#[test]
fn compile_errors_exit_2() {
    let f = Files::new("1\n2\n", "1 2\n");
    let bad = f.write(
        "bad.gr",
        "func f(graph: Matrix<s, s, bool>) -> Matrix<s, s, bool> {\n    return graph +;\n}\n",
    );
    let o = f.run(&bad, "f", "bool", &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"), "{o:?}");
    let mistyped = f.write(
        "t.gr",
        "func f(graph: Matrix<s, s, bool>) -> Matrix<s, s, real> {\n    return graph;\n}\n",
    );
    assert_eq!(code(&f.run(&mistyped, "f", "bool", &[])), 2);
}

#[test]
fn runtime_errors_exit_3() {
    let f = Files::new("1\n2\n", "1 2\n");
    let prog = f.write(
        "boom.gr",
        "func f(graph: Matrix<s, s, bool>, k: int) -> int {\n    x = k;\n    for i in 0..80 {\n        x = x (.*) x;\n    }\n    return x;\n}\n",
    );
    let o = f.run(&prog, "f", "bool", &["--iters", "3"]);
    assert_eq!(code(&o), 3, "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("overflow"), "{o:?}");
}

#[test]
fn check_lists_functions() {
    let o = Command::new(BIN).arg("check").arg(stdlib_file("wcc")).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ok: wcc\n");
}

#[test]
fn oracle_subcommand_agrees() {
    for name in ["bfs", "pr"] {
        let o = Command::new(BIN)
            .args(["oracle", name, "--seed", "4"])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{o:?}");
        assert_eq!(stdout(&o).matches(": ok").count(), 3);
    }
    let o = Command::new(BIN).args(["oracle", "cdlp"]).output().unwrap();
    assert_eq!(code(&o), 1);
}
