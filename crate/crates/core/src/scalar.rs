//! Scalar expressions and the pointwise functions built from them.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::semiring::{cast_scalar, sr_add, sr_mul, ArithError, SemiringTag, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarOp {
    /// Semiring addition.
    Add,
    /// Semiring multiplication.
    Mul,
    /// Ordinary subtraction (`int`, `real`).
    Sub,
    /// Division (`real`; `int` division is checked).
    Div,
    /// Equality, encoded as one/zero of the operand semiring.
    Eq,
}

impl ScalarOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ScalarOp::Add => "+",
            ScalarOp::Mul => "*",
            ScalarOp::Sub => "-",
            ScalarOp::Div => "/",
            ScalarOp::Eq => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScalarExpr {
    /// Positional reference to a function parameter.
    Param(usize),
    Lit(Value),
    Bin(ScalarOp, Box<ScalarExpr>, Box<ScalarExpr>),
    Cast(SemiringTag, Box<ScalarExpr>),
    /// `if cond != zero { then } else { otherwise }`. Only produced by
    /// lowering of masked assignment.
    Select(Box<ScalarExpr>, Box<ScalarExpr>, Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn bin(op: ScalarOp, a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        ScalarExpr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Result semiring, given the parameter semirings.
    pub fn result_tag(&self, params: &[SemiringTag]) -> Option<SemiringTag> {
        match self {
            ScalarExpr::Param(i) => params.get(*i).copied(),
            ScalarExpr::Lit(v) => Some(v.tag()),
            ScalarExpr::Bin(_, a, b) => {
                let ta = a.result_tag(params)?;
                let tb = b.result_tag(params)?;
                (ta == tb).then_some(ta)
            }
            ScalarExpr::Cast(t, _) => Some(*t),
            ScalarExpr::Select(_, t, e) => {
                let tt = t.result_tag(params)?;
                (e.result_tag(params)? == tt).then_some(tt)
            }
        }
    }

    pub fn eval(&self, args: &[Value]) -> Result<Value, ArithError> {
        match self {
            ScalarExpr::Param(i) => Ok(args[*i]),
            ScalarExpr::Lit(v) => Ok(*v),
            ScalarExpr::Bin(op, a, b) => {
                let x = a.eval(args)?;
                let y = b.eval(args)?;
                eval_op(*op, x, y)
            }
            ScalarExpr::Cast(t, a) => cast_scalar(*t, a.eval(args)?),
            ScalarExpr::Select(c, t, e) => {
                if c.eval(args)?.is_zero() {
                    e.eval(args)
                } else {
                    t.eval(args)
                }
            }
        }
    }

    pub fn uses_param(&self, i: usize) -> bool {
        match self {
            ScalarExpr::Param(j) => *j == i,
            ScalarExpr::Lit(_) => false,
            ScalarExpr::Bin(_, a, b) => a.uses_param(i) || b.uses_param(i),
            ScalarExpr::Cast(_, a) => a.uses_param(i),
            ScalarExpr::Select(c, t, e) => c.uses_param(i) || t.uses_param(i) || e.uses_param(i),
        }
    }

    /// Renumbers parameters through `map`.
    pub fn remap_params(&self, map: &[usize]) -> ScalarExpr {
        match self {
            ScalarExpr::Param(j) => ScalarExpr::Param(map[*j]),
            ScalarExpr::Lit(v) => ScalarExpr::Lit(*v),
            ScalarExpr::Bin(op, a, b) => ScalarExpr::bin(*op, a.remap_params(map), b.remap_params(map)),
            ScalarExpr::Cast(t, a) => ScalarExpr::Cast(*t, Box::new(a.remap_params(map))),
            ScalarExpr::Select(c, t, e) => ScalarExpr::Select(
                Box::new(c.remap_params(map)),
                Box::new(t.remap_params(map)),
                Box::new(e.remap_params(map)),
            ),
        }
    }

    /// Conservative symbolic test: true only if the expression evaluates to
    /// the additive identity whenever every parameter in `zeroed` does,
    /// regardless of the other parameters.
    pub fn is_zero_when(&self, zeroed: &[bool]) -> bool {
        match self {
            ScalarExpr::Param(i) => zeroed.get(*i).copied().unwrap_or(false),
            ScalarExpr::Lit(v) => v.is_zero(),
            ScalarExpr::Bin(op, a, b) => match op {
                ScalarOp::Add | ScalarOp::Sub => a.is_zero_when(zeroed) && b.is_zero_when(zeroed),
                ScalarOp::Mul => a.is_zero_when(zeroed) || b.is_zero_when(zeroed),
                ScalarOp::Div => a.is_zero_when(zeroed),
                ScalarOp::Eq => false,
            },
            ScalarExpr::Cast(_, a) => a.is_zero_when(zeroed),
            ScalarExpr::Select(c, t, e) => {
                (c.is_zero_when(zeroed) && e.is_zero_when(zeroed)) || (t.is_zero_when(zeroed) && e.is_zero_when(zeroed))
            }
        }
    }
}

pub fn eval_op(op: ScalarOp, x: Value, y: Value) -> Result<Value, ArithError> {
    let tag = x.tag();
    if y.tag() != tag {
        return Err(ArithError::TagMismatch {
            op: op.symbol(),
            lhs: x,
            rhs: y,
        });
    }
    match op {
        ScalarOp::Add => sr_add(tag, x, y),
        ScalarOp::Mul => sr_mul(tag, x, y),
        ScalarOp::Sub => match (x, y) {
            (Value::Int(a), Value::Int(b)) => a.checked_sub(b).map(Value::Int).ok_or(ArithError::Overflow {
                op: "sub",
                lhs: x,
                rhs: y,
            }),
            (Value::Real(a), Value::Real(b)) => Ok(Value::Real(a - b)),
            _ => Err(ArithError::Unsupported { op: "-", tag }),
        },
        ScalarOp::Div => match (x, y) {
            (Value::Int(_), Value::Int(0)) => Err(ArithError::DivisionByZero { lhs: x }),
            (Value::Int(a), Value::Int(b)) => a.checked_div(b).map(Value::Int).ok_or(ArithError::Overflow {
                op: "div",
                lhs: x,
                rhs: y,
            }),
            (Value::Real(a), Value::Real(b)) => Ok(Value::Real(a / b)),
            _ => Err(ArithError::Unsupported { op: "/", tag }),
        },
        ScalarOp::Eq => {
            let equal = match (x, y) {
                (Value::Real(a), Value::Real(b)) | (Value::Trop(a), Value::Trop(b)) => a == b,
                _ => x == y,
            };
            Ok(if equal { tag.one() } else { tag.zero() })
        }
    }
}

/// A closed scalar function `(C1, ..., Cn) e`, applied elementwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseFn {
    pub params: Vec<(String, SemiringTag)>,
    pub body: ScalarExpr,
    pub result: SemiringTag,
}

impl PointwiseFn {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn param_tags(&self) -> Vec<SemiringTag> {
        self.params.iter().map(|(_, t)| *t).collect()
    }

    /// Binary semiring addition over `sr`.
    pub fn add(sr: SemiringTag) -> PointwiseFn {
        Self::binary(sr, ScalarOp::Add)
    }

    pub fn binary(sr: SemiringTag, op: ScalarOp) -> PointwiseFn {
        PointwiseFn {
            params: alloc::vec![(String::from("a"), sr), (String::from("b"), sr)],
            body: ScalarExpr::bin(op, ScalarExpr::Param(0), ScalarExpr::Param(1)),
            result: sr,
        }
    }

    /// Nullary function returning a literal.
    pub fn constant(v: Value) -> PointwiseFn {
        PointwiseFn {
            params: Vec::new(),
            body: ScalarExpr::Lit(v),
            result: v.tag(),
        }
    }

    /// True if this is exactly `(a, b) a + b` for its semiring.
    pub fn is_semiring_add(&self) -> bool {
        self.params.len() == 2
            && self.params[0].1 == self.result
            && self.params[1].1 == self.result
            && self.body == ScalarExpr::bin(ScalarOp::Add, ScalarExpr::Param(0), ScalarExpr::Param(1))
    }

    /// Whether the function maps additive identities to the additive
    /// identity. Parameters flagged in `broadcast` hold runtime scalars and are
    /// not set to zero; when there are none the function is simply evaluated
    /// on the identities.
    pub fn preserves_zero(&self, broadcast: &[bool]) -> bool {
        if broadcast.iter().all(|b| !b) {
            let zeros: Vec<Value> = self.params.iter().map(|(_, t)| t.zero()).collect();
            return match self.body.eval(&zeros) {
                Ok(v) => v.tag() == self.result && v.is_zero(),
                Err(_) => false,
            };
        }
        let zeroed: Vec<bool> = (0..self.params.len())
            .map(|i| !broadcast.get(i).copied().unwrap_or(false))
            .collect();
        self.body.is_zero_when(&zeroed)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PointwiseError {
    #[error("pointwise function expects {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("argument {index} has semiring {got}, expected {expected}")]
    ArgTag {
        index: usize,
        expected: SemiringTag,
        got: SemiringTag,
    },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Evaluates `f` on one tuple of arguments.
pub fn eval_pointwise_fn(f: &PointwiseFn, args: &[Value]) -> Result<Value, PointwiseError> {
    if args.len() != f.arity() {
        return Err(PointwiseError::Arity {
            expected: f.arity(),
            got: args.len(),
        });
    }
    for (index, ((_, expected), v)) in f.params.iter().zip(args).enumerate() {
        if v.tag() != *expected {
            return Err(PointwiseError::ArgTag {
                index,
                expected: *expected,
                got: v.tag(),
            });
        }
    }
    Ok(f.body.eval(args)?)
}

/// Prints a scalar expression as an s-expression, naming parameters.
pub struct ScalarDisplay<'a> {
    pub expr: &'a ScalarExpr,
    pub names: &'a [String],
}

impl fmt::Display for ScalarDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e| ScalarDisplay {
            expr: e,
            names: self.names,
        };
        match self.expr {
            ScalarExpr::Param(i) => match self.names.get(*i) {
                Some(n) => f.write_str(n),
                None => write!(f, "#{i}"),
            },
            ScalarExpr::Lit(v) => write_literal(f, v),
            ScalarExpr::Bin(op, a, b) => write!(f, "({} {} {})", op.symbol(), sub(a), sub(b)),
            ScalarExpr::Cast(t, a) => write!(f, "(cast {} {})", t, sub(a)),
            ScalarExpr::Select(c, t, e) => write!(f, "(select {} {} {})", sub(c), sub(t), sub(e)),
        }
    }
}

pub(crate) fn write_literal(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Bool(b) => write!(f, "{b}"),
        Value::Int(i) => write!(f, "{i}"),
        Value::Real(x) => write!(f, "{x:?}"),
        Value::Trop(x) => write!(f, "trop:{x:?}"),
    }
}

impl fmt::Display for PointwiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(fn (")?;
        for (i, (n, t)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{n}:{t}")?;
        }
        let names: Vec<String> = self.params.iter().map(|(n, _)| n.clone()).collect();
        write!(
            f,
            ") {})",
            ScalarDisplay {
                expr: &self.body,
                names: &names
            }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use SemiringTag::*;

    fn f2(sr: SemiringTag, body: ScalarExpr) -> PointwiseFn {
        PointwiseFn {
            params: vec![("x".into(), sr), ("y".into(), sr)],
            body,
            result: sr,
        }
    }

    fn x() -> ScalarExpr {
        ScalarExpr::Param(0)
    }
    fn y() -> ScalarExpr {
        ScalarExpr::Param(1)
    }

    #[test]
    fn subtraction() {
        let f = f2(Int, ScalarExpr::bin(ScalarOp::Sub, x(), y()));
        assert_eq!(
            eval_pointwise_fn(&f, &[Value::Int(5), Value::Int(3)]),
            Ok(Value::Int(2))
        );
    }

    // Truth table for the one/zero equality encoding.
    #[test]
    fn equality_encoding_matches_truth_table() {
        let f = f2(Int, ScalarExpr::bin(ScalarOp::Eq, x(), y()));
        for a in -2..3 {
            for b in -2..3 {
                let expected = if a == b { 1 } else { 0 };
                assert_eq!(
                    eval_pointwise_fn(&f, &[Value::Int(a), Value::Int(b)]),
                    Ok(Value::Int(expected))
                );
            }
        }
        let g = f2(Bool, ScalarExpr::bin(ScalarOp::Eq, x(), y()));
        for a in [false, true] {
            for b in [false, true] {
                assert_eq!(
                    eval_pointwise_fn(&g, &[Value::Bool(a), Value::Bool(b)]),
                    Ok(Value::Bool(a == b))
                );
            }
        }
    }

    #[test]
    fn cast_then_divide() {
        let f = PointwiseFn {
            params: vec![("x".into(), Int)],
            body: ScalarExpr::bin(
                ScalarOp::Div,
                ScalarExpr::Cast(Real, Box::new(x())),
                ScalarExpr::Lit(Value::Real(2.0)),
            ),
            result: Real,
        };
        assert_eq!(eval_pointwise_fn(&f, &[Value::Int(5)]), Ok(Value::Real(2.5)));
    }

    #[test]
    fn int_division_by_zero_errors_real_does_not() {
        let f = f2(Int, ScalarExpr::bin(ScalarOp::Div, x(), y()));
        assert!(matches!(
            eval_pointwise_fn(&f, &[Value::Int(1), Value::Int(0)]),
            Err(PointwiseError::Arith(ArithError::DivisionByZero { .. }))
        ));
        let g = f2(Real, ScalarExpr::bin(ScalarOp::Div, x(), y()));
        assert_eq!(
            eval_pointwise_fn(&g, &[Value::Real(1.0), Value::Real(0.0)]),
            Ok(Value::Real(f64::INFINITY))
        );
    }

    #[test]
    fn arity_and_tags_checked() {
        let f = f2(Int, ScalarExpr::bin(ScalarOp::Add, x(), y()));
        assert!(matches!(
            eval_pointwise_fn(&f, &[Value::Int(1)]),
            Err(PointwiseError::Arity { .. })
        ));
        assert!(matches!(
            eval_pointwise_fn(&f, &[Value::Int(1), Value::Real(1.0)]),
            Err(PointwiseError::ArgTag { index: 1, .. })
        ));
    }

    #[test]
    fn zero_preservation() {
        for sr in SemiringTag::ALL {
            assert!(PointwiseFn::binary(sr, ScalarOp::Mul).preserves_zero(&[false, false]));
            assert!(PointwiseFn::add(sr).preserves_zero(&[false, false]));
            assert!(!PointwiseFn::binary(sr, ScalarOp::Eq).preserves_zero(&[false, false]));
        }
        // 0/0 is NaN, not zero.
        assert!(!PointwiseFn::binary(Real, ScalarOp::Div).preserves_zero(&[false, false]));
        // x * c with c a runtime scalar.
        let scale = f2(Real, ScalarExpr::bin(ScalarOp::Mul, x(), y()));
        assert!(scale.preserves_zero(&[false, true]));
        // const c
        let fill = f2(Real, y());
        assert!(!fill.preserves_zero(&[false, true]));
        let affine = f2(Real, ScalarExpr::bin(ScalarOp::Add, x(), y()));
        assert!(!affine.preserves_zero(&[false, true]));
    }

    #[test]
    fn select_picks_branch_on_nonzero() {
        let f = PointwiseFn {
            params: vec![("m".into(), Bool), ("b".into(), Int), ("a".into(), Int)],
            body: ScalarExpr::Select(
                Box::new(ScalarExpr::Param(0)),
                Box::new(ScalarExpr::Param(1)),
                Box::new(ScalarExpr::Param(2)),
            ),
            result: Int,
        };
        let t = eval_pointwise_fn(&f, &[Value::Bool(true), Value::Int(4), Value::Int(9)]);
        let e = eval_pointwise_fn(&f, &[Value::Bool(false), Value::Int(4), Value::Int(9)]);
        assert_eq!(t, Ok(Value::Int(4)));
        assert_eq!(e, Ok(Value::Int(9)));
        assert!(f.preserves_zero(&[false, false, false]));
    }
}
