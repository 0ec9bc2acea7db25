use graphalg_core::core_ir::{lower, validate_core};
use graphalg_core::frontend::{parse, pretty_print};
use graphalg_core::typecheck::check_program;
use proptest::prelude::*;

const PROGRAM: &[&str] = &[
    "func step(g: Matrix<s, s, bool>, v: Vector<s, bool>) -> Vector<s, bool> { return g.T * v; }",
    "func reach(g: Matrix<s, s, bool>, src: Vector<s, bool>) -> Vector<s, bool> {
    v = src;
    for i in 0..s { v += step(g, v); }
    return v;
}",
    "func deg(g: Matrix<s, s, bool>) -> Vector<s, int> { return reduceRows(cast<int>(g)); }",
    "func scale(v: Vector<s, real>, c: real) -> Vector<s, real> { return apply(|x: real, k: real| x * k, v, c); }",
];

const TOKENS: &[&str] = &[
    "func", "f", "(", ")", "{", "}", "<", ">", ",", ";", ":", "=", "+=", "[:]", "a", "b", "s", "1", "2.5", "true",
    "Matrix", "Vector", "int", "bool", "real", "trop", "*", "(.*)", "(.+)", "(.==)", ".T", "for", "in", "0..",
    "return", "apply", "|", "reduce", "pickAny", "diag", "cast", "->", "\n", " ", "#", "$",
];

proptest! {
    /// Any input either parses or yields a diagnostic positioned inside it.
    #[test]
    fn diagnostics_stay_in_the_source(toks in prop::collection::vec(prop::sample::select(TOKENS.to_vec()), 0..40)) {
        let src = toks.join(" ");
        match parse(&src) {
            Err(d) => prop_assert!(d.span.within(src.len()), "{d}"),
            Ok(ast) => {
                if let Err(d) = check_program(&ast) {
                    prop_assert!(d.span.within(src.len()), "{d}");
                }
                let printed = pretty_print(&ast);
                prop_assert_eq!(parse(&printed).unwrap(), ast);
            }
        }
    }

    /// Truncated programs never crash the frontend.
    #[test]
    fn truncations_are_diagnosed(cut in 0usize..400) {
        let src = PROGRAM.join("\n");
        let cut = cut.min(src.len());
        if let Err(d) = parse(&src[..cut]).and_then(|a| check_program(&a).map(|_| ())) {
            prop_assert!(d.span.within(cut), "{d}");
        }
    }

    /// Checking and lowering do not depend on declaration order.
    #[test]
    fn declaration_order_is_irrelevant(perm in Just((0..PROGRAM.len()).collect::<Vec<_>>()).prop_shuffle()) {
        let src: Vec<&str> = perm.iter().map(|&i| PROGRAM[i]).collect();
        let base = lower(&check_program(&parse(&PROGRAM.join("\n")).unwrap()).unwrap());
        let tp = check_program(&parse(&src.join("\n")).unwrap()).unwrap();
        prop_assert_eq!(lower(&tp), base);
    }
}

#[test]
fn lowered_core_is_well_formed() {
    let tp = check_program(&parse(&PROGRAM.join("\n")).unwrap()).unwrap();
    let cp = lower(&tp);
    assert_eq!(validate_core(&cp), Vec::<String>::new());
    assert_eq!(cp.functions.len(), PROGRAM.len());
}
