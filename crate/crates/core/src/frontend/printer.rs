//! Pretty printer producing source that parses back to the same tree.

use alloc::string::String;
use core::fmt::Write;

use super::ast::*;
use crate::types::Dim;

const ARITH: u8 = 0;
const POINTWISE: u8 = 1;
const MATMUL: u8 = 2;
const POSTFIX: u8 = 3;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Arith(..) => ARITH,
        ExprKind::Pointwise(..) => POINTWISE,
        ExprKind::MatMul(..) => MATMUL,
        _ => POSTFIX,
    }
}

fn dim(out: &mut String, d: &Dim) {
    let _ = write!(out, "{d}");
}

fn type_ann(out: &mut String, t: &TypeAnnotation) {
    match &t.kind {
        TypeKind::Matrix(r, c, sr) => {
            out.push_str("Matrix<");
            dim(out, r);
            out.push_str(", ");
            dim(out, c);
            let _ = write!(out, ", {sr}>");
        }
        TypeKind::Vector(r, sr) => {
            out.push_str("Vector<");
            dim(out, r);
            let _ = write!(out, ", {sr}>");
        }
        TypeKind::Scalar(sr) => {
            let _ = write!(out, "{sr}");
        }
    }
}

fn literal(out: &mut String, l: &Literal) {
    let _ = match l {
        Literal::Bool(b) => write!(out, "{b}"),
        Literal::Int(i) => write!(out, "{i}"),
        Literal::Real(x) => write!(out, "{x:?}"),
    };
}

/// Prints `e`, parenthesized if its precedence is below `min`.
fn expr_at(out: &mut String, e: &Expr, min: u8) {
    let paren = prec(e) < min;
    if paren {
        out.push('(');
    }
    expr(out, e);
    if paren {
        out.push(')');
    }
}

fn args(out: &mut String, list: &[Expr]) {
    for (i, a) in list.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(out, a);
    }
}

fn expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Var(n) => out.push_str(n),
        ExprKind::Lit(l) => literal(out, l),
        ExprKind::Arith(op, a, b) => {
            expr_at(out, a, ARITH);
            out.push_str(match op {
                ArithOp::Add => " + ",
                ArithOp::Sub => " - ",
            });
            expr_at(out, b, POINTWISE);
        }
        ExprKind::Pointwise(op, a, b) => {
            expr_at(out, a, POINTWISE);
            let _ = write!(out, " (.{}) ", op.symbol());
            expr_at(out, b, MATMUL);
        }
        ExprKind::MatMul(a, b) => {
            expr_at(out, a, MATMUL);
            out.push_str(" * ");
            expr_at(out, b, POSTFIX);
        }
        ExprKind::Transpose(a) => {
            // `-1.T` parses as `(-1).T`: negative literals are primaries.
            expr_at(out, a, POSTFIX);
            out.push_str(".T");
        }
        ExprKind::Call(c) => match c {
            Call::Apply { func, args: rest } => {
                out.push_str("apply(|");
                for (i, (n, sr)) in func.params.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{n}: {sr}");
                }
                out.push_str("| ");
                expr(out, &func.body);
                for a in rest {
                    out.push_str(", ");
                    expr(out, a);
                }
                out.push(')');
            }
            Call::Reduce(a) => unary(out, "reduce", a),
            Call::ReduceRows(a) => unary(out, "reduceRows", a),
            Call::Diag(a) => unary(out, "diag", a),
            Call::PickAny(a) => unary(out, "pickAny", a),
            Call::Cast(sr, a) => {
                let _ = write!(out, "cast<{sr}>(");
                expr(out, a);
                out.push(')');
            }
            Call::ZeroVector(sr, d) => {
                let _ = write!(out, "Vector<{sr}>(");
                dim(out, d);
                out.push(')');
            }
            Call::User { name, args: list } => {
                out.push_str(name);
                out.push('(');
                args(out, list);
                out.push(')');
            }
        },
    }
}

fn unary(out: &mut String, name: &str, a: &Expr) {
    out.push_str(name);
    out.push('(');
    expr(out, a);
    out.push(')');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            let _ = write!(out, "{target} = ");
            expr(out, value);
        }
        StmtKind::PlusAssign { target, value } => {
            let _ = write!(out, "{target} += ");
            expr(out, value);
        }
        StmtKind::MaskedAssign { target, mask, value } => {
            let _ = write!(out, "{target}<{mask}> = ");
            expr(out, value);
        }
        StmtKind::FillAssign { target, value } => {
            let _ = write!(out, "{target}[:] = ");
            expr(out, value);
        }
        StmtKind::Return(value) => {
            out.push_str("return ");
            expr(out, value);
        }
        StmtKind::For { index, bound, body } => {
            let _ = write!(out, "for {index} in 0..");
            let _ = match bound {
                BoundAnn::Name(n) => write!(out, "{n}"),
                BoundAnn::Literal(n) => write!(out, "{n}"),
            };
            out.push_str(" {\n");
            for s in body {
                stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
            return;
        }
    }
    out.push_str(";\n");
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e);
    out
}

pub fn pretty_print(ast: &Ast) -> String {
    let mut out = String::new();
    for (i, f) in ast.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(out, "func {}(", f.name);
        for (j, p) in f.params.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}: ", p.name);
            type_ann(&mut out, &p.ty);
        }
        out.push_str(") -> ");
        type_ann(&mut out, &f.ret);
        out.push_str(" {\n");
        for s in &f.body {
            stmt(&mut out, s, 1);
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn round_trip(src: &str) {
        let ast = parse(src).unwrap();
        let printed = pretty_print(&ast);
        let again = parse(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(ast, again, "{printed}");
        assert_eq!(printed, pretty_print(&again));
    }

    #[test]
    fn parenthesizes_by_precedence() {
        let src = "func f(a: Matrix<n, n, int>) -> Matrix<n, n, int> {
            return (a (.+) a) * (a * a) (.*) (a + a).T;
        }";
        let ast = parse(src).unwrap();
        let StmtKind::Return(e) = &ast.functions[0].body[0].kind else {
            panic!()
        };
        assert_eq!(print_expr(e), "(a (.+) a) * (a * a) (.*) (a + a).T");
        round_trip(src);
    }

    #[test]
    fn left_associativity_is_kept() {
        let src = "func f(a: int, b: int, c: int) -> int { x = a - (b - c); y = (a - b) - c; return x; }";
        let ast = parse(src).unwrap();
        let printed = pretty_print(&ast);
        assert!(printed.contains("x = a - (b - c);"));
        assert!(printed.contains("y = a - b - c;"));
        round_trip(src);
    }

    #[test]
    fn all_statement_forms() {
        round_trip(
            "func g(x: int) -> int { return x; }
             func f(a: Vector<n, real>, m: Vector<n, bool>, k: int) -> Vector<n, real> {
                a<m> = a (./) a;
                a[:] = -2.5e-3;
                for i in 0..k { a += apply(|x: real, c: real| x * c + 1.0, a, 0.5); }
                for j in 0..7 { a = a; }
                z = Vector<real>(n);
                w = cast<real>(m) (.==) diag(a) * reduceRows(pickAny(diag(a)));
                q = g(reduce(a.T.T));
                return z;
            }",
        );
    }
}
