//! Lexing, parsing and printing of GraphAlg source.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::Ast;
pub use lexer::tokenize;
pub use parser::parse;
pub use printer::pretty_print;
