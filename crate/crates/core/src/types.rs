//! Matrix types: two dimensions and a semiring.

use alloc::string::String;
use core::fmt;

use crate::semiring::SemiringTag;

/// A matrix dimension: an abstract symbol bound at call time, or a literal size.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dim {
    Symbol(String),
    Literal(u64),
}

impl Dim {
    pub const ONE: Dim = Dim::Literal(1);

    pub fn sym(name: &str) -> Dim {
        Dim::Symbol(name.into())
    }

    pub fn is_one(&self) -> bool {
        *self == Dim::Literal(1)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Symbol(s) => f.write_str(s),
            Dim::Literal(n) => write!(f, "{n}"),
        }
    }
}

/// Vectors are `n x 1` column matrices, scalars are `1 x 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixType {
    pub rows: Dim,
    pub cols: Dim,
    pub sr: SemiringTag,
}

impl MatrixType {
    pub fn new(rows: Dim, cols: Dim, sr: SemiringTag) -> MatrixType {
        MatrixType { rows, cols, sr }
    }

    pub fn scalar(sr: SemiringTag) -> MatrixType {
        MatrixType::new(Dim::ONE, Dim::ONE, sr)
    }

    pub fn vector(rows: Dim, sr: SemiringTag) -> MatrixType {
        MatrixType::new(rows, Dim::ONE, sr)
    }

    pub fn is_scalar(&self) -> bool {
        self.rows.is_one() && self.cols.is_one()
    }

    pub fn with_sr(&self, sr: SemiringTag) -> MatrixType {
        MatrixType::new(self.rows.clone(), self.cols.clone(), sr)
    }

    pub fn transposed(&self) -> MatrixType {
        MatrixType::new(self.cols.clone(), self.rows.clone(), self.sr)
    }

    pub fn same_shape(&self, other: &MatrixType) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

impl fmt::Display for MatrixType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_scalar() {
            write!(f, "{}", self.sr)
        } else if self.cols.is_one() {
            write!(f, "Vector<{}, {}>", self.rows, self.sr)
        } else {
            write!(f, "Matrix<{}, {}, {}>", self.rows, self.cols, self.sr)
        }
    }
}
