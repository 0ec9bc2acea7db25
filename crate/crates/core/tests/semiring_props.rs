use graphalg_core::scalar::{eval_pointwise_fn, PointwiseFn, ScalarExpr, ScalarOp};
use graphalg_core::semiring::{cast_scalar, cast_supported, sr_add, sr_mul, SemiringTag, Value};
use proptest::prelude::*;

fn value(sr: SemiringTag) -> BoxedStrategy<Value> {
    match sr {
        SemiringTag::Bool => any::<bool>().prop_map(Value::Bool).boxed(),
        SemiringTag::Int => (-1_000_000i64..1_000_000).prop_map(Value::Int).boxed(),
        SemiringTag::Real => (-1e3f64..1e3).prop_map(Value::Real).boxed(),
        SemiringTag::Trop => prop_oneof![
            1 => Just(Value::Trop(f64::INFINITY)),
            9 => (-1e3f64..1e3).prop_map(Value::Trop),
        ]
        .boxed(),
    }
}

fn triple() -> impl Strategy<Value = (SemiringTag, Value, Value, Value)> {
    prop::sample::select(SemiringTag::ALL.to_vec()).prop_flat_map(|sr| (Just(sr), value(sr), value(sr), value(sr)))
}

/// Relative closeness scaled by the operand magnitudes: the rounding error of
/// a float expression is bounded relative to its terms, not its result.
fn close(l: Value, r: Value, scale: f64) -> bool {
    match (l, r) {
        (Value::Real(x), Value::Real(y)) | (Value::Trop(x), Value::Trop(y)) => {
            x == y || (x - y).abs() <= 1e-12 * scale.max(1.0)
        }
        _ => l == r,
    }
}

fn mag(vs: &[Value]) -> f64 {
    vs.iter()
        .map(|v| v.as_f64().abs())
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn add_is_associative_and_commutative((sr, a, b, c) in triple()) {
        let add = |x, y| sr_add(sr, x, y).unwrap();
        let s = mag(&[a, b, c]);
        prop_assert!(close(add(add(a, b), c), add(a, add(b, c)), s));
        prop_assert_eq!(add(a, b), add(b, a));
    }

    #[test]
    fn mul_distributes_over_add((sr, a, b, c) in triple()) {
        // Keep int products away from overflow.
        let (a, b, c) = match (a, b, c) {
            (Value::Int(x), Value::Int(y), Value::Int(z)) => (Value::Int(x % 1000), Value::Int(y % 1000), Value::Int(z % 1000)),
            t => t,
        };
        let add = |x, y| sr_add(sr, x, y).unwrap();
        let mul = |x, y| sr_mul(sr, x, y).unwrap();
        let s = mag(&[a, b, c]).powi(2);
        prop_assert!(close(mul(a, add(b, c)), add(mul(a, b), mul(a, c)), s));
        prop_assert!(close(mul(add(a, b), c), add(mul(a, c), mul(b, c)), s));
    }

    #[test]
    fn identities_and_absorption((sr, a, _b, _c) in triple()) {
        prop_assert_eq!(sr_add(sr, a, sr.zero()).unwrap(), a);
        prop_assert_eq!(sr_mul(sr, a, sr.one()).unwrap(), a);
        prop_assert_eq!(sr_mul(sr, a, sr.zero()).unwrap(), sr.zero());
    }

    #[test]
    fn pointwise_evaluation_is_pure(x in -100i64..100, y in -100i64..100) {
        let f = PointwiseFn {
            params: vec![("x".into(), SemiringTag::Int), ("y".into(), SemiringTag::Int)],
            body: ScalarExpr::bin(ScalarOp::Sub, ScalarExpr::bin(ScalarOp::Mul, ScalarExpr::Param(0), ScalarExpr::Param(1)), ScalarExpr::Param(0)),
            result: SemiringTag::Int,
        };
        let args = [Value::Int(x), Value::Int(y)];
        let first = eval_pointwise_fn(&f, &args).unwrap();
        prop_assert_eq!(first, Value::Int(x * y - x));
        prop_assert_eq!(eval_pointwise_fn(&f, &args).unwrap(), first);
    }
}

#[test]
fn casts_map_zero_to_zero() {
    let mut pairs = 0;
    for from in SemiringTag::ALL {
        for to in SemiringTag::ALL {
            if cast_supported(from, to) {
                assert_eq!(cast_scalar(to, from.zero()).unwrap(), to.zero(), "{from} -> {to}");
                pairs += 1;
            } else {
                assert!(cast_scalar(to, from.zero()).is_err());
            }
        }
    }
    assert!(pairs >= 10);
}

#[test]
fn int_overflow_is_reported() {
    assert!(sr_add(SemiringTag::Int, Value::Int(i64::MAX), Value::Int(1)).is_err());
    assert!(sr_mul(SemiringTag::Int, Value::Int(i64::MAX), Value::Int(2)).is_err());
}
