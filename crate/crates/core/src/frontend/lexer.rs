use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::diag::{Diagnostic, Span, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Func,
    Return,
    For,
    In,
    Bool,
    Int,
    Real,
    Trop,
    True,
    False,
}

impl Keyword {
    fn from_ident(s: &str) -> Option<Keyword> {
        Some(match s {
            "func" => Keyword::Func,
            "return" => Keyword::Return,
            "for" => Keyword::For,
            "in" => Keyword::In,
            "bool" => Keyword::Bool,
            "int" => Keyword::Int,
            "real" => Keyword::Real,
            "trop" => Keyword::Trop,
            "true" => Keyword::True,
            "false" => Keyword::False,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Func => "func",
            Keyword::Return => "return",
            Keyword::For => "for",
            Keyword::In => "in",
            Keyword::Bool => "bool",
            Keyword::Int => "int",
            Keyword::Real => "real",
            Keyword::Trop => "trop",
            Keyword::True => "true",
            Keyword::False => "false",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Kw(Keyword),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    Colon,
    Arrow,
    Assign,
    PlusAssign,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    Pipe,
    /// `.T`
    DotT,
    /// `(.`
    PwOpen,
    /// `..`
    DotDot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Kw(k) => write!(f, "`{}`", k.as_str()),
            Tok::Int(i) => write!(f, "integer `{i}`"),
            Tok::Float(x) => write!(f, "number `{x:?}`"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Lt => "<",
                    Tok::Gt => ">",
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Colon => ":",
                    Tok::Arrow => "->",
                    Tok::Assign => "=",
                    Tok::PlusAssign => "+=",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::EqEq => "==",
                    Tok::Pipe => "|",
                    Tok::DotT => ".T",
                    Tok::PwOpen => "(.",
                    Tok::DotDot => "..",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) {
        if self.bytes[self.pos] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.pos += 1;
    }

    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek(0) {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'/' && self.peek(1) == Some(b'/') {
                while let Some(c) = self.peek(0) {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, start: Span) -> Result<Tok, Diagnostic> {
        while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let mut is_float = false;
        if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            self.bump();
            while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(0), Some(b'e' | b'E')) {
            let sign = usize::from(matches!(self.peek(1), Some(b'+' | b'-')));
            if self.peek(1 + sign).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                for _ in 0..=sign {
                    self.bump();
                }
                while self.peek(0).is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text = &self.src[start.start..self.pos];
        let span = Span { end: self.pos, ..start };
        if is_float {
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Tok::Float(x)),
                _ => Err(Diagnostic::new(Stage::Lex, span, "number literal out of range")),
            }
        } else {
            text.parse::<i64>()
                .map(Tok::Int)
                .map_err(|_| Diagnostic::new(Stage::Lex, span, "integer literal out of range"))
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, Diagnostic> {
        self.skip_trivia();
        let start = self.here();
        let Some(c) = self.peek(0) else {
            return Ok(None);
        };
        let two = |lx: &mut Lexer<'_>, tok: Tok| {
            lx.bump();
            lx.bump();
            tok
        };
        let tok = match c {
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    self.bump();
                }
                let text = &self.src[start.start..self.pos];
                match Keyword::from_ident(text) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(text.into()),
                }
            }
            b'0'..=b'9' => self.number(start)?,
            b'(' if self.peek(1) == Some(b'.') => two(self, Tok::PwOpen),
            b'.' if self.peek(1) == Some(b'.') => two(self, Tok::DotDot),
            b'.' if self.peek(1) == Some(b'T')
                && !self.peek(2).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') =>
            {
                two(self, Tok::DotT)
            }
            b'+' if self.peek(1) == Some(b'=') => two(self, Tok::PlusAssign),
            b'-' if self.peek(1) == Some(b'>') => two(self, Tok::Arrow),
            b'=' if self.peek(1) == Some(b'=') => two(self, Tok::EqEq),
            _ => {
                let tok = match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b'{' => Tok::LBrace,
                    b'}' => Tok::RBrace,
                    b'[' => Tok::LBracket,
                    b']' => Tok::RBracket,
                    b'<' => Tok::Lt,
                    b'>' => Tok::Gt,
                    b',' => Tok::Comma,
                    b';' => Tok::Semi,
                    b':' => Tok::Colon,
                    b'=' => Tok::Assign,
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'|' => Tok::Pipe,
                    _ => {
                        let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                        let span = Span {
                            end: self.pos + ch.len_utf8(),
                            ..start
                        };
                        return Err(Diagnostic::new(
                            Stage::Lex,
                            span,
                            alloc::format!("illegal character `{ch}`"),
                        ));
                    }
                };
                self.bump();
                tok
            }
        };
        Ok(Some(Token {
            tok,
            span: Span { end: self.pos, ..start },
        }))
    }
}

/// Splits source text into tokens. `//` starts a line comment.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t);
    }
    Ok(out)
}
