//! Untyped surface syntax tree.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::Span;
use crate::semiring::SemiringTag;
use crate::types::{Dim, MatrixType};

/// Per-node identity used by the type checker's side tables.
///
/// Like [`Span`], ids are ignored by structural equality.
#[derive(Clone, Copy, Debug, Default, PartialOrd, Ord)]
pub struct ExprId(pub u32);

impl PartialEq for ExprId {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for ExprId {}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ast {
    pub functions: Vec<FuncDecl>,
}

impl Ast {
    pub fn function(&self, name: &str) -> Option<&FuncDecl> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: TypeAnnotation,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeAnnotation,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeKind {
    Matrix(Dim, Dim, SemiringTag),
    Vector(Dim, SemiringTag),
    Scalar(SemiringTag),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeAnnotation {
    pub kind: TypeKind,
    pub span: Span,
}

impl TypeAnnotation {
    pub fn matrix_type(&self) -> MatrixType {
        match &self.kind {
            TypeKind::Matrix(r, c, sr) => MatrixType::new(r.clone(), c.clone(), *sr),
            TypeKind::Vector(r, sr) => MatrixType::vector(r.clone(), *sr),
            TypeKind::Scalar(sr) => MatrixType::scalar(*sr),
        }
    }

    pub fn dims(&self) -> Vec<&Dim> {
        match &self.kind {
            TypeKind::Matrix(r, c, _) => alloc::vec![r, c],
            TypeKind::Vector(r, _) => alloc::vec![r],
            TypeKind::Scalar(_) => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

/// Loop upper bound as written: a name (dimension symbol or `int` variable)
/// or a literal.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundAnn {
    Name(String),
    Literal(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    /// `x = e;`
    Assign {
        target: String,
        value: Expr,
    },
    /// `x += e;`
    PlusAssign {
        target: String,
        value: Expr,
    },
    /// `x<m> = e;`
    MaskedAssign {
        target: String,
        mask: String,
        value: Expr,
    },
    /// `x[:] = e;`
    FillAssign {
        target: String,
        value: Expr,
    },
    /// `for i in 0..n { ... }`
    For {
        index: String,
        bound: BoundAnn,
        body: Vec<Stmt>,
    },
    Return(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PwOp {
    Mul,
    Div,
    Add,
    Sub,
    Eq,
}

impl PwOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PwOp::Mul => "*",
            PwOp::Div => "/",
            PwOp::Add => "+",
            PwOp::Sub => "-",
            PwOp::Eq => "==",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl Literal {
    pub fn semiring(&self) -> SemiringTag {
        match self {
            Literal::Bool(_) => SemiringTag::Bool,
            Literal::Int(_) => SemiringTag::Int,
            Literal::Real(_) => SemiringTag::Real,
        }
    }
}

/// Inline scalar function `|x: real, c: real| body`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lambda {
    pub params: Vec<(String, SemiringTag)>,
    pub body: Box<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Call {
    /// `apply(f, M, c1, ..., ck)`: `f(M_ij, c1, ..., ck)` at every position.
    Apply {
        func: Lambda,
        args: Vec<Expr>,
    },
    Reduce(Box<Expr>),
    ReduceRows(Box<Expr>),
    Diag(Box<Expr>),
    PickAny(Box<Expr>),
    Cast(SemiringTag, Box<Expr>),
    /// `Vector<sr>(n)`: the all-zero vector of length `n`.
    ZeroVector(SemiringTag, Dim),
    /// Call of a function declared in the same program.
    User {
        name: String,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Var(String),
    Lit(Literal),
    MatMul(Box<Expr>, Box<Expr>),
    Pointwise(PwOp, Box<Expr>, Box<Expr>),
    Transpose(Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Call(Call),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    pub id: ExprId,
}

impl Expr {
    /// Visits this node and every sub-expression, lambda bodies included.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Lit(_) => {}
            ExprKind::MatMul(a, b) | ExprKind::Pointwise(_, a, b) | ExprKind::Arith(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Transpose(a) => a.walk(f),
            ExprKind::Call(call) => match call {
                Call::Apply { func, args } => {
                    func.body.walk(f);
                    for a in args {
                        a.walk(f);
                    }
                }
                Call::Reduce(a) | Call::ReduceRows(a) | Call::Diag(a) | Call::PickAny(a) | Call::Cast(_, a) => {
                    a.walk(f)
                }
                Call::ZeroVector(..) => {}
                Call::User { args, .. } => {
                    for a in args {
                        a.walk(f);
                    }
                }
            },
        }
    }
}

impl Stmt {
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match &self.kind {
            StmtKind::Assign { value, .. }
            | StmtKind::PlusAssign { value, .. }
            | StmtKind::MaskedAssign { value, .. }
            | StmtKind::FillAssign { value, .. }
            | StmtKind::Return(value) => value.walk(f),
            StmtKind::For { body, .. } => {
                for s in body {
                    s.walk_exprs(f);
                }
            }
        }
    }
}

/// Names of builtin call forms; user functions may not reuse them.
pub const BUILTINS: &[&str] = &[
    "apply",
    "reduce",
    "reduceRows",
    "diag",
    "pickAny",
    "cast",
    "Vector",
    "Matrix",
];
