//! Random well-typed programs for differential and round-trip testing.
//!
//! Programs share one signature shape: two square matrices, a vector and a
//! boolean mask over dimension `s`, plus an `int` scalar `k`. Bodies mix
//! every surface construct, loops included. Generation is typed, but a few
//! candidates still fail the checker (an operator the semiring lacks, say);
//! [`generate_checked`] retries until one passes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use graphalg_core::engine::MatrixRelation;
use graphalg_core::semiring::{SemiringTag, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Mat,
    Vec,
    Scalar,
}

struct Gen {
    rng: ChaCha8Rng,
    sr: SemiringTag,
    /// Visible variables of the program semiring.
    vars: Vec<(String, Shape)>,
    fresh: u32,
    out: String,
}

fn sr_name(sr: SemiringTag) -> &'static str {
    match sr {
        SemiringTag::Bool => "bool",
        SemiringTag::Int => "int",
        SemiringTag::Real => "real",
        SemiringTag::Trop => "trop",
    }
}

fn type_name(shape: Shape, sr: SemiringTag) -> String {
    let sr = sr_name(sr);
    match shape {
        Shape::Mat => format!("Matrix<s, s, {sr}>"),
        Shape::Vec => format!("Vector<s, {sr}>"),
        Shape::Scalar => sr.to_string(),
    }
}

impl Gen {
    fn literal(&mut self) -> String {
        match self.sr {
            SemiringTag::Bool => ["true", "false"].choose(&mut self.rng).unwrap().to_string(),
            SemiringTag::Int => self.rng.gen_range(0..4).to_string(),
            SemiringTag::Real => format!("{:.1}", f64::from(self.rng.gen_range(-4..=4)) * 0.5),
            SemiringTag::Trop => format!("cast<trop>({:.1})", f64::from(self.rng.gen_range(0..=8)) * 0.5),
        }
    }

    fn pw_op(&mut self) -> &'static str {
        let ops: &[&str] = match self.sr {
            SemiringTag::Real => &["*", "+", "-", "/", "=="],
            SemiringTag::Int => &["*", "+", "-", "=="],
            _ => &["*", "+", "=="],
        };
        ops.choose(&mut self.rng).unwrap()
    }

    fn var_of(&mut self, shape: Shape) -> Option<String> {
        let names: Vec<&String> = self.vars.iter().filter(|v| v.1 == shape).map(|v| &v.0).collect();
        names.choose(&mut self.rng).map(|s| s.to_string())
    }

    /// Body of a lambda over parameters `x` and `c`.
    fn lambda_body(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return match self.rng.gen_range(0..3) {
                0 => "x".into(),
                1 => "c".into(),
                _ => self.literal(),
            };
        }
        let a = self.lambda_body(depth - 1);
        let b = self.lambda_body(depth - 1);
        match self.rng.gen_range(0..3) {
            0 => format!("({a}) * ({b})"),
            1 if self.sr != SemiringTag::Bool => format!("({a}) (.{}) ({b})", self.pw_op()),
            _ => format!("({a}) + ({b})"),
        }
    }

    fn expr(&mut self, shape: Shape, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.25) {
            if let Some(v) = self.var_of(shape) {
                return v;
            }
            if shape == Shape::Scalar {
                return self.literal();
            }
        }
        let d = depth.saturating_sub(1);
        let sr = sr_name(self.sr);
        match shape {
            Shape::Mat => match self.rng.gen_range(0..7) {
                0 => format!("({}) * ({})", self.expr(Shape::Mat, d), self.expr(Shape::Mat, d)),
                1 => format!(
                    "({}) (.{}) ({})",
                    self.expr(Shape::Mat, d),
                    self.pw_op(),
                    self.expr(Shape::Mat, d)
                ),
                2 => format!("({}).T", self.expr(Shape::Mat, d)),
                3 => format!("diag({})", self.expr(Shape::Vec, d)),
                4 => format!("pickAny({})", self.expr(Shape::Mat, d)),
                5 => {
                    let body = self.lambda_body(2);
                    format!(
                        "apply(|x: {sr}, c: {sr}| {body}, {}, {})",
                        self.expr(Shape::Mat, d),
                        self.expr(Shape::Scalar, d)
                    )
                }
                _ => format!("cast<{sr}>(b)"),
            },
            Shape::Vec => match self.rng.gen_range(0..7) {
                0 => format!("({}) * ({})", self.expr(Shape::Mat, d), self.expr(Shape::Vec, d)),
                1 => format!(
                    "({}) (.{}) ({})",
                    self.expr(Shape::Vec, d),
                    self.pw_op(),
                    self.expr(Shape::Vec, d)
                ),
                2 => format!("reduceRows({})", self.expr(Shape::Mat, d)),
                3 => format!("pickAny({})", self.expr(Shape::Vec, d)),
                4 => format!("Vector<{sr}>(s)"),
                5 => {
                    let body = self.lambda_body(2);
                    format!(
                        "apply(|x: {sr}, c: {sr}| {body}, {}, {})",
                        self.expr(Shape::Vec, d),
                        self.expr(Shape::Scalar, d)
                    )
                }
                _ => format!("cast<{sr}>(m)"),
            },
            Shape::Scalar => match self.rng.gen_range(0..5) {
                0 => format!("reduce({})", self.expr(Shape::Vec, d)),
                1 => format!("reduce({})", self.expr(Shape::Mat, d)),
                2 => format!("({}) * ({})", self.expr(Shape::Scalar, d), self.expr(Shape::Scalar, d)),
                3 => format!("({}) + ({})", self.expr(Shape::Scalar, d), self.expr(Shape::Scalar, d)),
                _ => self.literal(),
            },
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn indent(&mut self, level: usize) {
        self.out.push_str(&"    ".repeat(level));
    }

    fn stmt(&mut self, level: usize, loops_left: u32) {
        let locals: Vec<(String, Shape)> = self.vars.iter().filter(|v| v.0.starts_with('x')).cloned().collect();
        // Inside loops favour updates of outer variables, which become loop
        // state.
        let choice = if level > 1 {
            self.rng.gen_range(2..10)
        } else {
            self.rng.gen_range(0..10)
        };
        self.indent(level);
        match choice {
            9 if !locals.is_empty() => {
                let (name, shape) = locals.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(shape, 3);
                let _ = writeln!(self.out, "{name} = {e};");
            }
            0..=2 | 9 => {
                let shape = *[Shape::Mat, Shape::Vec, Shape::Vec, Shape::Scalar]
                    .choose(&mut self.rng)
                    .unwrap();
                let e = self.expr(shape, 3);
                let name = self.fresh("x");
                let _ = writeln!(self.out, "{name} = {e};");
                self.vars.push((name, shape));
            }
            3 | 4 if !locals.is_empty() => {
                let (name, shape) = locals.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(shape, 3);
                let _ = writeln!(self.out, "{name} += {e};");
            }
            5 if locals.iter().any(|l| l.1 == Shape::Vec) => {
                let vecs: Vec<&(String, Shape)> = locals.iter().filter(|l| l.1 == Shape::Vec).collect();
                let name = vecs.choose(&mut self.rng).unwrap().0.clone();
                let e = self.expr(Shape::Vec, 2);
                let _ = writeln!(self.out, "{name}<m> = {e};");
            }
            6 if locals.iter().any(|l| l.1 != Shape::Scalar) => {
                let tgt: Vec<&(String, Shape)> = locals.iter().filter(|l| l.1 != Shape::Scalar).collect();
                let name = tgt.choose(&mut self.rng).unwrap().0.clone();
                let e = self.expr(Shape::Scalar, 1);
                let _ = writeln!(self.out, "{name}[:] = {e};");
            }
            7 | 8 if loops_left > 0 && !locals.is_empty() => {
                let bound = match self.rng.gen_range(0..3) {
                    0 => "s".to_string(),
                    1 => "k".to_string(),
                    _ => self.rng.gen_range(0..5).to_string(),
                };
                let index = self.fresh("i");
                let _ = writeln!(self.out, "for {index} in 0..{bound} {{");
                let scope = self.vars.len();
                for _ in 0..self.rng.gen_range(1..4) {
                    self.stmt(level + 1, loops_left - 1);
                }
                self.vars.truncate(scope);
                self.indent(level);
                self.out.push_str("}\n");
            }
            _ => {
                let e = self.expr(Shape::Vec, 3);
                let name = self.fresh("x");
                let _ = writeln!(self.out, "{name} = {e};");
                self.vars.push((name, Shape::Vec));
            }
        }
    }
}

/// A random program with entry function `f`. It may fail the type
/// checker; see [`generate_checked`].
pub fn generate(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = *[
        SemiringTag::Bool,
        SemiringTag::Int,
        SemiringTag::Real,
        SemiringTag::Trop,
    ]
    .choose(&mut rng)
    .unwrap();
    let mut g = Gen {
        rng,
        sr,
        vars: vec![("a".into(), Shape::Mat), ("v".into(), Shape::Vec)],
        fresh: 0,
        out: String::new(),
    };
    let statements = g.rng.gen_range(2..7);
    for _ in 0..statements {
        g.stmt(1, 2);
    }
    let shape = *[Shape::Mat, Shape::Vec, Shape::Scalar].choose(&mut g.rng).unwrap();
    let locals: Vec<String> = g
        .vars
        .iter()
        .filter(|v| v.1 == shape && v.0.starts_with('x'))
        .map(|v| v.0.clone())
        .collect();
    let ret = match locals.choose(&mut g.rng) {
        Some(x) => x.clone(),
        None => g.expr(shape, 2),
    };
    let sr_s = sr_name(sr);
    format!(
        "func f(a: Matrix<s, s, {sr_s}>, b: Matrix<s, s, bool>, v: Vector<s, {sr_s}>, m: Vector<s, bool>, k: int) -> {} {{\n{}    return {ret};\n}}\n",
        type_name(shape, sr),
        g.out
    )
}

/// The first program from `seed`, `seed + 2^32`, ... that type-checks.
pub fn generate_checked(seed: u64) -> String {
    for attempt in 0u64.. {
        let src = generate(seed.wrapping_add(attempt << 32));
        if crate::driver::check_source(&src).is_ok() {
            return src;
        }
    }
    unreachable!()
}

fn random_value(rng: &mut ChaCha8Rng, sr: SemiringTag) -> Value {
    match sr {
        SemiringTag::Bool => Value::Bool(true),
        SemiringTag::Int => Value::Int(rng.gen_range(1..4)),
        SemiringTag::Real => Value::Real(f64::from(rng.gen_range(-4..=4)) * 0.5),
        SemiringTag::Trop => Value::Trop(f64::from(rng.gen_range(0..=8)) * 0.5),
    }
}

/// Random arguments for a generated program with dimension `s = n`.
pub fn random_args(
    seed: u64,
    params: &[(String, graphalg_core::types::MatrixType)],
    n: u64,
) -> BTreeMap<String, MatrixRelation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for (name, ty) in params {
        let rel = if ty.is_scalar() {
            MatrixRelation::scalar(Value::Int(rng.gen_range(0..5)))
        } else {
            let cols = if ty.cols.is_one() { 1 } else { n };
            let mut t = Vec::new();
            for r in 0..n as u32 {
                for c in 0..cols as u32 {
                    if rng.gen_bool(0.35) {
                        t.push((r, c, random_value(&mut rng, ty.sr)));
                    }
                }
            }
            MatrixRelation::from_tuples(n, cols, ty.sr, t).expect("in range")
        };
        out.insert(name.clone(), rel);
    }
    out
}

/// Relative tolerance for `real` results.
pub const REAL_TOLERANCE: f64 = 1e-12;

fn close(x: Value, y: Value) -> bool {
    match (x, y) {
        (Value::Real(a), Value::Real(b)) => {
            a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= REAL_TOLERANCE * a.abs().max(b.abs()).max(1.0)
        }
        _ => x == y,
    }
}

/// Equality of results: same shape and semiring, the same nonzero
/// positions, values exact except `real` within [`REAL_TOLERANCE`].
pub fn equivalent(a: &MatrixRelation, b: &MatrixRelation) -> bool {
    let (a, b) = (a.clone().into_sparse(), b.clone().into_sparse());
    (a.rows, a.cols, a.sr) == (b.rows, b.cols, b.sr)
        && a.tuples.len() == b.tuples.len()
        && a.tuples
            .iter()
            .zip(&b.tuples)
            .all(|(x, y)| (x.0, x.1) == (y.0, y.1) && close(x.2, y.2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate(3), generate(3));
    }

    #[test]
    fn most_candidates_check() {
        let ok = (0..100)
            .filter(|&s| crate::driver::check_source(&generate(s)).is_ok())
            .count();
        assert!(ok >= 40, "{ok} of 100");
    }
}
