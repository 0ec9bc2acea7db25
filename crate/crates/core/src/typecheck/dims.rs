//! Union-find over dimension symbols and literals.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::types::Dim;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DimError {
    #[error("dimension mismatch: {0} vs {1}")]
    Literals(u64, u64),
    /// Two parameter symbols are independent sizes and never equal.
    #[error("dimension mismatch: `{0}` vs `{1}`")]
    Rigid(String, String),
    #[error("dimension mismatch: `{0}` vs {1}")]
    RigidLiteral(String, u64),
}

#[derive(Clone, Debug, Default)]
struct Class {
    literal: Option<u64>,
    rigid: Option<String>,
    /// Smallest flexible symbol in the class, for deterministic resolution.
    flex: Option<String>,
}

/// Equivalence classes of dimensions. A class holds at most one literal and
/// at most one rigid symbol, and never both.
///
/// Symbols are flexible unless declared rigid. Rigid symbols stand for the
/// parameter sizes of the function being checked.
#[derive(Clone, Debug, Default)]
pub struct DimEnv {
    parent: Vec<usize>,
    classes: Vec<Class>,
    index: BTreeMap<Dim, usize>,
    rigid: BTreeSet<String>,
}

impl DimEnv {
    pub fn new() -> DimEnv {
        DimEnv::default()
    }

    pub fn declare_rigid(&mut self, name: &str) {
        self.rigid.insert(name.into());
        let n = self.node(&Dim::sym(name));
        let r = self.find(n);
        self.classes[r].rigid = Some(name.into());
        if self.classes[r].flex.as_deref() == Some(name) {
            self.classes[r].flex = None;
        }
    }

    pub fn is_rigid(&self, name: &str) -> bool {
        self.rigid.contains(name)
    }

    fn node(&mut self, d: &Dim) -> usize {
        if let Some(&i) = self.index.get(d) {
            return i;
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.classes.push(match d {
            Dim::Literal(n) => Class {
                literal: Some(*n),
                ..Class::default()
            },
            Dim::Symbol(s) if self.rigid.contains(s) => Class {
                rigid: Some(s.clone()),
                ..Class::default()
            },
            Dim::Symbol(s) => Class {
                flex: Some(s.clone()),
                ..Class::default()
            },
        });
        self.index.insert(d.clone(), i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[i] != root {
            let next = self.parent[i];
            self.parent[i] = root;
            i = next;
        }
        root
    }

    pub fn unify(&mut self, a: &Dim, b: &Dim) -> Result<(), DimError> {
        let ia = self.node(a);
        let ib = self.node(b);
        let ra = self.find(ia);
        let rb = self.find(ib);
        if ra == rb {
            return Ok(());
        }
        let (ca, cb) = (&self.classes[ra], &self.classes[rb]);
        let literal = match (ca.literal, cb.literal) {
            (Some(x), Some(y)) if x != y => return Err(DimError::Literals(x, y)),
            (x, y) => x.or(y),
        };
        let rigid = match (&ca.rigid, &cb.rigid) {
            (Some(x), Some(y)) => return Err(DimError::Rigid(x.clone(), y.clone())),
            (x, y) => x.clone().or_else(|| y.clone()),
        };
        if let (Some(r), Some(l)) = (&rigid, literal) {
            return Err(DimError::RigidLiteral(r.clone(), l));
        }
        let flex = match (&ca.flex, &cb.flex) {
            (Some(x), Some(y)) => Some(if x <= y { x.clone() } else { y.clone() }),
            (x, y) => x.clone().or_else(|| y.clone()),
        };
        self.parent[rb] = ra;
        self.classes[ra] = Class { literal, rigid, flex };
        Ok(())
    }

    /// The canonical form of `d`: its literal if known, else its rigid
    /// symbol, else the smallest flexible symbol of its class.
    pub fn resolve(&mut self, d: &Dim) -> Dim {
        let i = self.node(d);
        let r = self.find(i);
        let c = &self.classes[r];
        if let Some(n) = c.literal {
            Dim::Literal(n)
        } else if let Some(s) = &c.rigid {
            Dim::Symbol(s.clone())
        } else {
            Dim::Symbol(c.flex.clone().unwrap_or_default())
        }
    }

    /// True if `d` resolves to a literal or a rigid symbol.
    pub fn is_determined(&mut self, d: &Dim) -> bool {
        match self.resolve(d) {
            Dim::Literal(_) => true,
            Dim::Symbol(s) => self.rigid.contains(&s),
        }
    }

    pub fn same(&mut self, a: &Dim, b: &Dim) -> bool {
        let ia = self.node(a);
        let ib = self.node(b);
        self.find(ia) == self.find(ib)
    }
}

/// Merges the classes of `a` and `b`.
pub fn unify_dims(env: &mut DimEnv, a: &Dim, b: &Dim) -> Result<(), DimError> {
    env.unify(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflexive() {
        let mut env = DimEnv::new();
        unify_dims(&mut env, &Dim::sym("s"), &Dim::sym("s")).unwrap();
        assert_eq!(env.resolve(&Dim::sym("s")), Dim::sym("s"));
    }

    #[test]
    fn transitive_through_literal() {
        let mut env = DimEnv::new();
        unify_dims(&mut env, &Dim::sym("s"), &Dim::Literal(5)).unwrap();
        unify_dims(&mut env, &Dim::sym("s"), &Dim::sym("t")).unwrap();
        assert_eq!(env.resolve(&Dim::sym("t")), Dim::Literal(5));
    }

    #[test]
    fn literal_conflict() {
        let mut env = DimEnv::new();
        assert_eq!(
            unify_dims(&mut env, &Dim::Literal(2), &Dim::Literal(3)),
            Err(DimError::Literals(2, 3))
        );
        unify_dims(&mut env, &Dim::sym("a"), &Dim::Literal(2)).unwrap();
        unify_dims(&mut env, &Dim::sym("b"), &Dim::Literal(3)).unwrap();
        assert!(unify_dims(&mut env, &Dim::sym("a"), &Dim::sym("b")).is_err());
    }

    #[test]
    fn rigid_symbols_stay_apart() {
        let mut env = DimEnv::new();
        env.declare_rigid("s");
        env.declare_rigid("t");
        assert!(env.unify(&Dim::sym("s"), &Dim::sym("t")).is_err());
        assert!(env.unify(&Dim::sym("s"), &Dim::Literal(4)).is_err());
        env.unify(&Dim::sym("x"), &Dim::sym("s")).unwrap();
        assert_eq!(env.resolve(&Dim::sym("x")), Dim::sym("s"));
        assert!(env.is_determined(&Dim::sym("x")));
        assert!(env.unify(&Dim::sym("x"), &Dim::sym("t")).is_err());
    }

    #[test]
    fn flexible_classes_resolve_to_smallest_name() {
        let mut env = DimEnv::new();
        env.unify(&Dim::sym("q"), &Dim::sym("p")).unwrap();
        assert_eq!(env.resolve(&Dim::sym("q")), Dim::sym("p"));
        assert!(!env.is_determined(&Dim::sym("q")));
    }
}
