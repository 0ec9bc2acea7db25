//! Compiler and relational execution engine for GraphAlg, a linear-algebra
//! language for graph algorithms.
//!
//! Source text goes through [`frontend`], [`typecheck`] and [`core_ir`], is
//! compiled to a relational [`plan`], rewritten by the [`optimizer`] and run
//! by the [`engine`].

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod core_ir;
pub mod diag;
pub mod engine;
pub mod frontend;
pub mod optimizer;
pub mod plan;
pub mod reference;
pub mod scalar;
pub mod semiring;
pub mod typecheck;
pub mod types;
