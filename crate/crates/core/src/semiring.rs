//! Semirings, scalar values and the scalar arithmetic shared by every layer.
//!
//! Four semirings exist:
//!
//! | tag    | add   | mul   | zero   | one   |
//! |--------|-------|-------|--------|-------|
//! | `bool` | or    | and   | false  | true  |
//! | `int`  | +     | ×     | 0      | 1     |
//! | `real` | +     | ×     | 0.0    | 1.0   |
//! | `trop` | min   | +     | +inf   | 0.0   |
//!
//! Integer arithmetic is checked; overflow surfaces as [`ArithError::Overflow`].

use core::cmp::Ordering;
use core::fmt;

/// Identifies one of the four supported semirings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemiringTag {
    Bool,
    Int,
    Real,
    Trop,
}

impl SemiringTag {
    pub const ALL: [SemiringTag; 4] = [
        SemiringTag::Bool,
        SemiringTag::Int,
        SemiringTag::Real,
        SemiringTag::Trop,
    ];

    /// Additive identity.
    pub fn zero(self) -> Value {
        match self {
            SemiringTag::Bool => Value::Bool(false),
            SemiringTag::Int => Value::Int(0),
            SemiringTag::Real => Value::Real(0.0),
            SemiringTag::Trop => Value::Trop(f64::INFINITY),
        }
    }

    /// Multiplicative identity.
    pub fn one(self) -> Value {
        match self {
            SemiringTag::Bool => Value::Bool(true),
            SemiringTag::Int => Value::Int(1),
            SemiringTag::Real => Value::Real(1.0),
            SemiringTag::Trop => Value::Trop(0.0),
        }
    }

    /// Surface spelling (`bool`, `int`, `real`, `trop`).
    pub fn name(self) -> &'static str {
        match self {
            SemiringTag::Bool => "bool",
            SemiringTag::Int => "int",
            SemiringTag::Real => "real",
            SemiringTag::Trop => "trop",
        }
    }

    pub fn from_name(name: &str) -> Option<SemiringTag> {
        match name {
            "bool" => Some(SemiringTag::Bool),
            "int" => Some(SemiringTag::Int),
            "real" => Some(SemiringTag::Real),
            "trop" => Some(SemiringTag::Trop),
            _ => None,
        }
    }

    /// Whether `add(x, x) = x` for all x. Needed by rewrites that merge
    /// nested aggregations without changing floating point fold order.
    pub fn add_is_idempotent(self) -> bool {
        matches!(self, SemiringTag::Bool | SemiringTag::Trop)
    }

    pub fn def(self) -> SemiringDef {
        SemiringDef::of(self)
    }
}

impl fmt::Display for SemiringTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scalar tagged with its semiring. The payload kind always matches the tag;
/// `Trop` carries a float so that `+inf` is representable.
///
/// Equality is exact: floats compare by bit pattern, so `NaN == NaN` and
/// `0.0 != -0.0`. Use [`Value::is_zero`] for identity tests.
#[derive(Clone, Copy, Debug)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Trop(f64),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) | (Value::Trop(a), Value::Trop(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn tag(&self) -> SemiringTag {
        match self {
            Value::Bool(_) => SemiringTag::Bool,
            Value::Int(_) => SemiringTag::Int,
            Value::Real(_) => SemiringTag::Real,
            Value::Trop(_) => SemiringTag::Trop,
        }
    }

    /// Numeric test against the additive identity of the value's own semiring.
    pub fn is_zero(&self) -> bool {
        match *self {
            Value::Bool(b) => !b,
            Value::Int(i) => i == 0,
            Value::Real(x) => x == 0.0,
            Value::Trop(x) => x == f64::INFINITY,
        }
    }

    /// The float payload of `Real` and `Trop`, the integer widened for `Int`,
    /// 0/1 for `Bool`. Intended for output and comparisons in tests.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Bool(b) => {
                if b {
                    1.0
                } else {
                    0.0
                }
            }
            Value::Int(i) => i as f64,
            Value::Real(x) | Value::Trop(x) => x,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) | Value::Trop(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ArithError {
    #[error("integer overflow in {op}({lhs}, {rhs})")]
    Overflow { op: &'static str, lhs: Value, rhs: Value },
    #[error("integer division by zero: {lhs} / 0")]
    DivisionByZero { lhs: Value },
    #[error("operand semirings do not match for {op}: {lhs:?} and {rhs:?}")]
    TagMismatch { op: &'static str, lhs: Value, rhs: Value },
    #[error("operator {op} is not defined on {tag}")]
    Unsupported { op: &'static str, tag: SemiringTag },
    #[error("cast from {from} to {to} is not supported")]
    UnsupportedCast { from: SemiringTag, to: SemiringTag },
}

type BinFn = fn(Value, Value) -> Result<Value, ArithError>;

/// Operator table of one semiring.
#[derive(Clone, Copy)]
pub struct SemiringDef {
    pub tag: SemiringTag,
    pub zero: Value,
    pub one: Value,
    pub add: BinFn,
    pub mul: BinFn,
}

impl fmt::Debug for SemiringDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiringDef")
            .field("tag", &self.tag)
            .field("zero", &self.zero)
            .field("one", &self.one)
            .finish()
    }
}

impl SemiringDef {
    pub fn of(tag: SemiringTag) -> SemiringDef {
        let (add, mul): (BinFn, BinFn) = match tag {
            SemiringTag::Bool => (bool_add, bool_mul),
            SemiringTag::Int => (int_add, int_mul),
            SemiringTag::Real => (real_add, real_mul),
            SemiringTag::Trop => (trop_add, trop_mul),
        };
        SemiringDef {
            tag,
            zero: tag.zero(),
            one: tag.one(),
            add,
            mul,
        }
    }
}

fn mismatch(op: &'static str, lhs: Value, rhs: Value) -> ArithError {
    ArithError::TagMismatch { op, lhs, rhs }
}

fn bool_add(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x || y)),
        _ => Err(mismatch("add", a, b)),
    }
}

fn bool_mul(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x && y)),
        _ => Err(mismatch("mul", a, b)),
    }
}

fn int_add(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.checked_add(y).map(Value::Int).ok_or(ArithError::Overflow {
            op: "add",
            lhs: a,
            rhs: b,
        }),
        _ => Err(mismatch("add", a, b)),
    }
}

fn int_mul(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.checked_mul(y).map(Value::Int).ok_or(ArithError::Overflow {
            op: "mul",
            lhs: a,
            rhs: b,
        }),
        _ => Err(mismatch("mul", a, b)),
    }
}

fn real_add(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Real(x), Value::Real(y)) => Ok(Value::Real(x + y)),
        _ => Err(mismatch("add", a, b)),
    }
}

fn real_mul(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        // Zero is absorbing even against inf and NaN, as sparse execution
        // never evaluates products with an absent operand.
        (Value::Real(x), Value::Real(y)) if x == 0.0 || y == 0.0 => Ok(Value::Real(0.0)),
        (Value::Real(x), Value::Real(y)) => Ok(Value::Real(x * y)),
        _ => Err(mismatch("mul", a, b)),
    }
}

/// `min` where NaN orders above every number, so it only wins when both
/// operands are NaN.
pub fn trop_min(x: f64, y: f64) -> f64 {
    match (x.is_nan(), y.is_nan()) {
        (true, _) => y,
        (false, true) => x,
        _ => match x.partial_cmp(&y) {
            Some(Ordering::Greater) => y,
            _ => x,
        },
    }
}

fn trop_add(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Trop(x), Value::Trop(y)) => Ok(Value::Trop(trop_min(x, y))),
        _ => Err(mismatch("add", a, b)),
    }
}

fn trop_mul(a: Value, b: Value) -> Result<Value, ArithError> {
    match (a, b) {
        (Value::Trop(x), Value::Trop(y)) => {
            // inf is absorbing, even against -inf.
            if x == f64::INFINITY || y == f64::INFINITY {
                Ok(Value::Trop(f64::INFINITY))
            } else {
                Ok(Value::Trop(x + y))
            }
        }
        _ => Err(mismatch("mul", a, b)),
    }
}

fn check_tag(op: &'static str, sr: SemiringTag, a: Value, b: Value) -> Result<(), ArithError> {
    if a.tag() != sr || b.tag() != sr {
        return Err(mismatch(op, a, b));
    }
    Ok(())
}

/// Semiring addition.
pub fn sr_add(sr: SemiringTag, a: Value, b: Value) -> Result<Value, ArithError> {
    check_tag("add", sr, a, b)?;
    (sr.def().add)(a, b)
}

/// Semiring multiplication.
pub fn sr_mul(sr: SemiringTag, a: Value, b: Value) -> Result<Value, ArithError> {
    check_tag("mul", sr, a, b)?;
    (sr.def().mul)(a, b)
}

/// Whether `cast<to>` accepts a `from` operand.
pub fn cast_supported(from: SemiringTag, to: SemiringTag) -> bool {
    use SemiringTag::*;
    from == to
        || matches!(
            (from, to),
            (Bool, Int)
                | (Bool, Real)
                | (Bool, Trop)
                | (Int, Real)
                | (Real, Trop)
                | (Trop, Real)
                | (Int, Bool)
                | (Real, Bool)
        )
}

/// Largest magnitude below which every integer converts to `f64` exactly.
pub const EXACT_INT_IN_F64: i64 = 1 << 53;

/// Converts `v` into the `target` semiring. Additive identities always map to
/// additive identities, so casts never grow a sparse support.
pub fn cast_scalar(target: SemiringTag, v: Value) -> Result<Value, ArithError> {
    let unsupported = ArithError::UnsupportedCast {
        from: v.tag(),
        to: target,
    };
    if v.tag() == target {
        return Ok(v);
    }
    Ok(match (v, target) {
        (Value::Bool(b), t) => {
            if b {
                t.one()
            } else {
                t.zero()
            }
        }
        (Value::Int(i), SemiringTag::Real) => Value::Real(i as f64),
        (Value::Int(i), SemiringTag::Bool) => Value::Bool(i != 0),
        (Value::Real(x), SemiringTag::Bool) => Value::Bool(x != 0.0),
        (Value::Real(x), SemiringTag::Trop) => {
            if x == 0.0 {
                Value::Trop(f64::INFINITY)
            } else {
                Value::Trop(x)
            }
        }
        (Value::Trop(x), SemiringTag::Real) => {
            if x == f64::INFINITY {
                Value::Real(0.0)
            } else {
                Value::Real(x)
            }
        }
        _ => return Err(unsupported),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use SemiringTag::*;

    #[test]
    fn add_examples() {
        assert_eq!(
            sr_add(Bool, Value::Bool(true), Value::Bool(false)),
            Ok(Value::Bool(true))
        );
        assert_eq!(sr_add(Trop, Value::Trop(3.0), Value::Trop(5.0)), Ok(Value::Trop(3.0)));
        assert_eq!(sr_add(Int, Value::Int(2), Value::Int(3)), Ok(Value::Int(5)));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(sr_mul(Trop, Value::Trop(3.0), Value::Trop(5.0)), Ok(Value::Trop(8.0)));
        assert_eq!(
            sr_mul(Bool, Value::Bool(true), Value::Bool(false)),
            Ok(Value::Bool(false))
        );
        assert_eq!(sr_mul(Real, Value::Real(0.5), Value::Real(4.0)), Ok(Value::Real(2.0)));
    }

    #[test]
    fn int_overflow_is_reported() {
        let err = sr_add(Int, Value::Int(i64::MAX), Value::Int(1)).unwrap_err();
        assert!(matches!(err, ArithError::Overflow { op: "add", .. }));
        let err = sr_mul(Int, Value::Int(i64::MIN), Value::Int(-1)).unwrap_err();
        assert!(matches!(err, ArithError::Overflow { op: "mul", .. }));
    }

    #[test]
    fn mismatched_tags_are_rejected() {
        assert!(sr_add(Int, Value::Int(1), Value::Real(1.0)).is_err());
        assert!(sr_mul(Real, Value::Int(1), Value::Int(1)).is_err());
    }

    #[test]
    fn cast_examples() {
        assert_eq!(cast_scalar(Int, Value::Bool(true)), Ok(Value::Int(1)));
        assert_eq!(cast_scalar(Trop, Value::Bool(false)), Ok(Value::Trop(f64::INFINITY)));
        assert_eq!(cast_scalar(Real, Value::Int(7)), Ok(Value::Real(7.0)));
        assert_eq!(cast_scalar(Real, Value::Trop(f64::INFINITY)), Ok(Value::Real(0.0)));
        assert_eq!(cast_scalar(Trop, Value::Real(2.5)), Ok(Value::Trop(2.5)));
        assert!(cast_scalar(Bool, Value::Trop(1.0)).is_err());
        assert!(!cast_supported(Trop, Bool));
    }

    // Densify-then-cast oracle: casting every position of a dense vector and
    // dropping zeros afterwards must equal casting only the stored entries.
    #[test]
    fn cast_zero_to_zero_for_every_supported_pair() {
        for from in SemiringTag::ALL {
            for to in SemiringTag::ALL {
                if !cast_supported(from, to) {
                    continue;
                }
                let cast = cast_scalar(to, from.zero()).unwrap();
                assert!(cast.is_zero(), "{from} -> {to} gave {cast}");
                assert_eq!(cast, to.zero());
            }
        }
    }

    #[test]
    fn trop_min_orders_nan_last() {
        assert_eq!(trop_min(f64::NAN, 2.0), 2.0);
        assert_eq!(trop_min(2.0, f64::NAN), 2.0);
        assert!(trop_min(f64::NAN, f64::NAN).is_nan());
        assert_eq!(trop_min(f64::INFINITY, 4.0), 4.0);
    }

    #[test]
    fn value_equality_is_bitwise() {
        assert_eq!(Value::Real(f64::NAN), Value::Real(f64::NAN));
        assert_ne!(Value::Real(0.0), Value::Real(-0.0));
        assert!(Value::Real(-0.0).is_zero());
        assert_ne!(Value::Real(1.0), Value::Trop(1.0));
    }
}
