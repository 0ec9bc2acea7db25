//! Core to plan translation with structural sharing.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::core_ir::{CoreExpr, CoreFunction, CoreKind, LoopBound};
use crate::scalar::{ScalarExpr, ScalarOp};
use crate::semiring::SemiringTag;

/// Compiles a lowered function. Structurally equal subexpressions become
/// one node, except across loop boundaries: a loop body never shares nodes
/// with the code around it, so every body node runs once per iteration
/// unless the optimizer hoists it.
pub fn compile(f: &CoreFunction) -> Plan {
    let mut c = Compiler {
        next_id: 0,
        frames: vec![BTreeMap::new()],
    };
    let root = c.expr(&f.body);
    Plan {
        root,
        params: f.params.clone(),
        labels: BTreeMap::new(),
        next_id: c.next_id,
    }
}

struct Compiler {
    next_id: u32,
    frames: Vec<BTreeMap<String, PlanRef>>,
}

fn ids(nodes: &[&PlanRef]) -> String {
    let mut s = String::new();
    for n in nodes {
        s.push_str(&format!("{},", n.id));
    }
    s
}

impl Compiler {
    /// Returns the node for `key` in the current frame, building it if new.
    fn intern(&mut self, key: String, ty: &MatrixType, kind: impl FnOnce() -> PlanKind) -> PlanRef {
        let key = format!("{key}|{ty}");
        if let Some(n) = self.frames.last().and_then(|f| f.get(&key)) {
            return n.clone();
        }
        self.next_id += 1;
        let n = Rc::new(PlanNode {
            id: self.next_id,
            kind: kind(),
            ty: ty.clone(),
        });
        self.frames.last_mut().unwrap().insert(key, n.clone());
        n
    }

    fn map(&mut self, input: PlanRef, f: PointwiseFn, index: MapIndex, ty: &MatrixType) -> PlanRef {
        let key = format!("map|{f}|{index:?}|{}", input.id);
        self.intern(key, ty, || PlanKind::Map {
            input,
            f,
            index,
            drop_diagonal: false,
        })
    }

    fn expr(&mut self, e: &CoreExpr) -> PlanRef {
        let ty = &e.ty;
        match &e.kind {
            CoreKind::Var(name) => {
                let name = name.clone();
                self.intern(format!("scan|{name}"), ty, || PlanKind::ScanArg(name))
            }
            CoreKind::Transpose(a) => {
                if let CoreKind::Transpose(inner) = &a.kind {
                    return self.expr(inner);
                }
                let a = self.expr(a);
                self.intern(format!("tr|{}", a.id), ty, || PlanKind::Transpose(a))
            }
            CoreKind::Diag(a) => {
                let a = self.expr(a);
                let f = identity(ty.sr);
                self.map(a, f, MapIndex::Diag, ty)
            }
            CoreKind::Apply(f, args) => self.apply(f, args, ty),
            CoreKind::MatMul(a, b) => {
                let a = self.expr(a);
                let b = self.expr(b);
                let sr = ty.sr;
                let join_ty = MatrixType::new(a.ty.rows.clone(), b.ty.cols.clone(), sr);
                let key = format!("join|colrow|{}", ids(&[&a, &b]));
                let join = self.intern(key, &join_ty, || PlanKind::Join {
                    inputs: vec![a, b],
                    on: JoinOn::ColRow,
                    kind: JoinKind::Inner,
                    broadcast: vec![false, false],
                });
                let prod = self.map(join, PointwiseFn::binary(sr, ScalarOp::Mul), MapIndex::Keep, &join_ty);
                self.intern(format!("agg|rowcol|add|{}", prod.id), ty, || PlanKind::Aggregate {
                    input: prod,
                    group: Group::RowCol,
                    combine: Combine::Add,
                })
            }
            CoreKind::OneVector => {
                let dim = ty.rows.clone();
                let dom_ty = MatrixType::vector(dim.clone(), SemiringTag::Bool);
                let d = dim.clone();
                let dom = self.intern(format!("domain|{dim}"), &dom_ty, || PlanKind::ScanDomain(d));
                let f = PointwiseFn {
                    params: vec![(String::from("x"), SemiringTag::Bool)],
                    body: ScalarExpr::Lit(ty.sr.one()),
                    result: ty.sr,
                };
                self.map(dom, f, MapIndex::Keep, ty)
            }
            CoreKind::ZeroMatrix => self.intern(String::from("const|empty"), ty, || PlanKind::Constant(Vec::new())),
            CoreKind::PickAny(a) => {
                let a = self.expr(a);
                self.intern(format!("agg|row|argmin|{}", a.id), ty, || PlanKind::Aggregate {
                    input: a,
                    group: Group::Row,
                    combine: Combine::ArgminCol,
                })
            }
            CoreKind::Densify(a) => {
                let a = self.expr(a);
                self.intern(format!("dense|{}", a.id), ty, || PlanKind::Densify(a))
            }
            CoreKind::ForLoop {
                bound,
                index,
                states,
                body,
            } => {
                let bound = match bound {
                    LoopBound::Dim(d) => PlanBound::Dim(d.clone()),
                    LoopBound::Scalar(b) => PlanBound::Scalar(self.expr(b)),
                };
                let inits: Vec<(String, PlanRef)> =
                    states.iter().map(|s| (s.name.clone(), self.expr(&s.init))).collect();
                self.frames.push(BTreeMap::new());
                let bodies: Vec<PlanRef> = body.iter().map(|u| self.expr(&u.update)).collect();
                self.frames.pop();
                // Loops are never shared.
                self.next_id += 1;
                Rc::new(PlanNode {
                    id: self.next_id,
                    kind: PlanKind::Loop(Box::new(LoopNode {
                        bound,
                        index: index.clone(),
                        states: inits,
                        bodies,
                        hoisted: Vec::new(),
                        fixpoint: false,
                    })),
                    ty: ty.clone(),
                })
            }
        }
    }

    fn apply(&mut self, f: &PointwiseFn, args: &[CoreExpr], ty: &MatrixType) -> PlanRef {
        if args.is_empty() {
            if let ScalarExpr::Lit(v) = f.body {
                let tuples = if v.is_zero() { Vec::new() } else { vec![(0, 0, v)] };
                let key = format!("const|{v:?}");
                return self.intern(key, ty, || PlanKind::Constant(tuples));
            }
        }
        let inputs: Vec<PlanRef> = args.iter().map(|a| self.expr(a)).collect();
        let scalar_result = ty.is_scalar();
        let broadcast: Vec<bool> = args.iter().map(|a| scalar_result || a.ty.is_scalar()).collect();
        if inputs.len() == 1 && !broadcast[0] {
            return self.map(inputs[0].clone(), f.clone(), MapIndex::Keep, ty);
        }
        let kind = if !scalar_result
            && (0..inputs.len()).filter(|&i| !broadcast[i]).all(|i| {
                let mut zeroed = vec![false; inputs.len()];
                zeroed[i] = true;
                f.body.is_zero_when(&zeroed)
            }) {
            JoinKind::Inner
        } else {
            JoinKind::OuterPadded
        };
        let refs: Vec<&PlanRef> = inputs.iter().collect();
        let key = format!("join|rowcol|{kind:?}|{broadcast:?}|{}", ids(&refs));
        let join = self.intern(key, ty, || PlanKind::Join {
            inputs,
            on: JoinOn::RowCol,
            kind,
            broadcast,
        });
        self.map(join, f.clone(), MapIndex::Keep, ty)
    }
}

pub(crate) fn identity(sr: SemiringTag) -> PointwiseFn {
    PointwiseFn {
        params: vec![(String::from("x"), sr)],
        body: ScalarExpr::Param(0),
        result: sr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_ir::lower_function;
    use crate::frontend::parse;
    use crate::typecheck::check_program;

    fn plan_of(src: &str, name: &str) -> Plan {
        let tp = check_program(&parse(src).unwrap()).unwrap();
        compile(&lower_function(&tp, name).unwrap())
    }

    const REACH: &str = "func reach(graph: Matrix<s, s, bool>, source: Vector<s, bool>) -> Vector<s, bool> {
    v = source;
    for i in 0..s {
        v += graph.T * v;
    }
    return v;
}";

    #[test]
    fn reach_compiles_to_a_loop() {
        let p = plan_of(REACH, "reach");
        let PlanKind::Loop(l) = &p.root.kind else {
            panic!("{:?}", p.root.kind)
        };
        assert_eq!(l.states.len(), 1);
        assert!(matches!(l.states[0].1.kind, PlanKind::ScanArg(ref n) if n == "source"));
        // v + G.T * v: a padded join of v and the product, then add.
        let PlanKind::Map { input, f, .. } = &l.bodies[0].kind else {
            panic!()
        };
        assert!(f.is_semiring_add());
        let PlanKind::Join { kind, inputs, .. } = &input.kind else {
            panic!()
        };
        assert_eq!(*kind, JoinKind::OuterPadded);
        assert!(matches!(inputs[1].kind, PlanKind::Aggregate { .. }));
    }

    #[test]
    fn common_subexpressions_are_shared() {
        let src = "func f(a: Matrix<s, s, int>) -> Matrix<s, s, int> {
    x = a * a;
    y = a * a;
    return x (.+) y;
}";
        let p = plan_of(src, "f");
        let PlanKind::Map { input, .. } = &p.root.kind else {
            panic!()
        };
        let PlanKind::Join { inputs, .. } = &input.kind else {
            panic!()
        };
        assert!(Rc::ptr_eq(&inputs[0], &inputs[1]));
    }

    #[test]
    fn loop_bodies_do_not_share_with_outside() {
        let src = "func f(a: Matrix<s, s, int>) -> Matrix<s, s, int> {
    x = a * a;
    for i in 0..s {
        x = a * a;
    }
    return x;
}";
        let p = plan_of(src, "f");
        let PlanKind::Loop(l) = &p.root.kind else { panic!() };
        assert_ne!(l.states[0].1.id, l.bodies[0].id);
    }

    #[test]
    fn pointwise_multiply_is_an_inner_join() {
        let src = "func f(a: Matrix<s, s, int>, b: Matrix<s, s, int>) -> Matrix<s, s, int> {
    return a (.*) b;
}";
        let p = plan_of(src, "f");
        let PlanKind::Map { input, .. } = &p.root.kind else {
            panic!()
        };
        assert!(matches!(
            input.kind,
            PlanKind::Join {
                kind: JoinKind::Inner,
                ..
            }
        ));
    }
}
