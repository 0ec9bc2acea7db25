//! Recursive-descent parser.
//!
//! Precedence, loosest first: scalar `+`/`-`, pointwise `(.op)`, matrix
//! product `*`, postfix `.T`. All binary operators associate to the left.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Keyword, Tok, Token};
use crate::diag::{Diagnostic, Span, Stage};
use crate::semiring::SemiringTag;
use crate::types::Dim;

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    next_id: u32,
    eof: Span,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span).unwrap_or(self.eof)
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.eof
        } else {
            self.toks[self.pos - 1].span
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => format!("{t}"),
            None => String::from("end of input"),
        };
        Err(Diagnostic::new(
            Stage::Parse,
            self.span(),
            format!("expected {expected}, found {found}"),
        ))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.eat(&tok) {
            Ok(self.prev_span())
        } else {
            self.error(&format!("{tok}"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, self.prev_span()))
            }
            _ => self.error("identifier"),
        }
    }

    fn fresh_id(&mut self) -> ExprId {
        self.next_id += 1;
        ExprId(self.next_id)
    }

    fn mk(&mut self, kind: ExprKind, span: Span) -> Expr {
        let id = self.fresh_id();
        Expr { kind, span, id }
    }

    fn semiring(&mut self) -> PResult<SemiringTag> {
        let sr = match self.peek() {
            Some(Tok::Kw(Keyword::Bool)) => SemiringTag::Bool,
            Some(Tok::Kw(Keyword::Int)) => SemiringTag::Int,
            Some(Tok::Kw(Keyword::Real)) => SemiringTag::Real,
            Some(Tok::Kw(Keyword::Trop)) => SemiringTag::Trop,
            _ => return self.error("semiring (`bool`, `int`, `real` or `trop`)"),
        };
        self.pos += 1;
        Ok(sr)
    }

    fn dim(&mut self) -> PResult<Dim> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let d = Dim::Symbol(s.clone());
                self.pos += 1;
                Ok(d)
            }
            Some(Tok::Int(n)) if *n > 0 => {
                let d = Dim::Literal(*n as u64);
                self.pos += 1;
                Ok(d)
            }
            _ => self.error("dimension (symbol or positive integer)"),
        }
    }

    fn type_ann(&mut self) -> PResult<TypeAnnotation> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Ident(s)) if s == "Matrix" => {
                self.pos += 1;
                self.expect(Tok::Lt)?;
                let r = self.dim()?;
                self.expect(Tok::Comma)?;
                let c = self.dim()?;
                self.expect(Tok::Comma)?;
                let sr = self.semiring()?;
                self.expect(Tok::Gt)?;
                TypeKind::Matrix(r, c, sr)
            }
            Some(Tok::Ident(s)) if s == "Vector" => {
                self.pos += 1;
                self.expect(Tok::Lt)?;
                let r = self.dim()?;
                self.expect(Tok::Comma)?;
                let sr = self.semiring()?;
                self.expect(Tok::Gt)?;
                TypeKind::Vector(r, sr)
            }
            Some(Tok::Kw(_)) => TypeKind::Scalar(self.semiring()?),
            _ => return self.error("type"),
        };
        Ok(TypeAnnotation {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn function(&mut self) -> PResult<FuncDecl> {
        let start = self.expect(Tok::Kw(Keyword::Func))?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let (pname, pspan) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.type_ann()?;
                params.push(Param {
                    name: pname,
                    span: pspan.to(ty.span),
                    ty,
                });
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        self.expect(Tok::Arrow)?;
        let ret = self.type_ann()?;
        let body = self.block()?;
        Ok(FuncDecl {
            name,
            params,
            ret,
            body,
            span: start.to(self.prev_span()),
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.peek().is_none() {
                return self.error("`}`");
            }
            body.push(self.stmt()?);
        }
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek() {
            Some(Tok::Kw(Keyword::Return)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Return(e)
            }
            Some(Tok::Kw(Keyword::For)) => {
                self.pos += 1;
                let (index, _) = self.ident()?;
                self.expect(Tok::Kw(Keyword::In))?;
                if self.peek() != Some(&Tok::Int(0)) {
                    return self.error("`0` (loops always start at zero)");
                }
                self.pos += 1;
                self.expect(Tok::DotDot)?;
                let bound = match self.peek() {
                    Some(Tok::Ident(s)) => BoundAnn::Name(s.clone()),
                    Some(Tok::Int(n)) if *n >= 0 => BoundAnn::Literal(*n as u64),
                    _ => return self.error("loop bound (name or integer)"),
                };
                self.pos += 1;
                let body = self.block()?;
                StmtKind::For { index, bound, body }
            }
            Some(Tok::Ident(_)) => {
                let (target, _) = self.ident()?;
                let kind = match self.peek() {
                    Some(Tok::Assign) => {
                        self.pos += 1;
                        StmtKind::Assign {
                            target,
                            value: self.expr()?,
                        }
                    }
                    Some(Tok::PlusAssign) => {
                        self.pos += 1;
                        StmtKind::PlusAssign {
                            target,
                            value: self.expr()?,
                        }
                    }
                    Some(Tok::Lt) => {
                        self.pos += 1;
                        let (mask, _) = self.ident()?;
                        self.expect(Tok::Gt)?;
                        self.expect(Tok::Assign)?;
                        StmtKind::MaskedAssign {
                            target,
                            mask,
                            value: self.expr()?,
                        }
                    }
                    Some(Tok::LBracket) => {
                        self.pos += 1;
                        self.expect(Tok::Colon)?;
                        self.expect(Tok::RBracket)?;
                        self.expect(Tok::Assign)?;
                        StmtKind::FillAssign {
                            target,
                            value: self.expr()?,
                        }
                    }
                    _ => return self.error("`=`, `+=`, `<mask>` or `[:]`"),
                };
                self.expect(Tok::Semi)?;
                kind
            }
            _ => return self.error("statement"),
        };
        Ok(Stmt {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.pointwise()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.pointwise()?;
            let span = lhs.span.to(rhs.span);
            lhs = self.mk(ExprKind::Arith(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn pointwise(&mut self) -> PResult<Expr> {
        let mut lhs = self.matmul()?;
        while self.eat(&Tok::PwOpen) {
            let op = match self.peek() {
                Some(Tok::Star) => PwOp::Mul,
                Some(Tok::Slash) => PwOp::Div,
                Some(Tok::Plus) => PwOp::Add,
                Some(Tok::Minus) => PwOp::Sub,
                Some(Tok::EqEq) => PwOp::Eq,
                _ => return self.error("pointwise operator (`*`, `/`, `+`, `-`, `==`)"),
            };
            self.pos += 1;
            self.expect(Tok::RParen)?;
            let rhs = self.matmul()?;
            let span = lhs.span.to(rhs.span);
            lhs = self.mk(ExprKind::Pointwise(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn matmul(&mut self) -> PResult<Expr> {
        let mut lhs = self.postfix()?;
        while self.eat(&Tok::Star) {
            let rhs = self.postfix()?;
            let span = lhs.span.to(rhs.span);
            lhs = self.mk(ExprKind::MatMul(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat(&Tok::DotT) {
            let span = e.span.to(self.prev_span());
            e = self.mk(ExprKind::Transpose(Box::new(e)), span);
        }
        Ok(e)
    }

    fn paren_arg(&mut self) -> PResult<Box<Expr>> {
        self.expect(Tok::LParen)?;
        let e = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(Box::new(e))
    }

    fn lambda(&mut self) -> PResult<Lambda> {
        let start = self.expect(Tok::Pipe)?;
        let mut params = Vec::new();
        loop {
            let (name, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            params.push((name, self.semiring()?));
            if self.eat(&Tok::Pipe) {
                break;
            }
            self.expect(Tok::Comma)?;
        }
        let body = self.expr()?;
        Ok(Lambda {
            params,
            span: start.to(body.span),
            body: Box::new(body),
        })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().cloned() {
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Lit(Literal::Int(i)), start))
            }
            Some(Tok::Float(x)) => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Lit(Literal::Real(x)), start))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                let lit = match self.peek() {
                    Some(Tok::Int(i)) => Literal::Int(-*i),
                    Some(Tok::Float(x)) => Literal::Real(-*x),
                    _ => return self.error("number after unary `-`"),
                };
                self.pos += 1;
                Ok(self.mk(ExprKind::Lit(lit), start.to(self.prev_span())))
            }
            Some(Tok::Kw(Keyword::True)) => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Lit(Literal::Bool(true)), start))
            }
            Some(Tok::Kw(Keyword::False)) => {
                self.pos += 1;
                Ok(self.mk(ExprKind::Lit(Literal::Bool(false)), start))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let call = match name.as_str() {
                    "cast" => {
                        self.expect(Tok::Lt)?;
                        let sr = self.semiring()?;
                        self.expect(Tok::Gt)?;
                        Call::Cast(sr, self.paren_arg()?)
                    }
                    "Vector" => {
                        self.expect(Tok::Lt)?;
                        let sr = self.semiring()?;
                        self.expect(Tok::Gt)?;
                        self.expect(Tok::LParen)?;
                        let d = self.dim()?;
                        self.expect(Tok::RParen)?;
                        Call::ZeroVector(sr, d)
                    }
                    "apply" => {
                        self.expect(Tok::LParen)?;
                        let func = self.lambda()?;
                        let mut args = Vec::new();
                        while self.eat(&Tok::Comma) {
                            args.push(self.expr()?);
                        }
                        self.expect(Tok::RParen)?;
                        Call::Apply { func, args }
                    }
                    "reduce" => Call::Reduce(self.paren_arg()?),
                    "reduceRows" => Call::ReduceRows(self.paren_arg()?),
                    "diag" => Call::Diag(self.paren_arg()?),
                    "pickAny" => Call::PickAny(self.paren_arg()?),
                    _ if self.peek() == Some(&Tok::LParen) => {
                        self.pos += 1;
                        let mut args = Vec::new();
                        if !self.eat(&Tok::RParen) {
                            loop {
                                args.push(self.expr()?);
                                if self.eat(&Tok::RParen) {
                                    break;
                                }
                                self.expect(Tok::Comma)?;
                            }
                        }
                        Call::User { name, args }
                    }
                    _ => return Ok(self.mk(ExprKind::Var(name), start)),
                };
                let span = start.to(self.prev_span());
                Ok(self.mk(ExprKind::Call(call), span))
            }
            _ => self.error("expression"),
        }
    }
}

/// Parses a token stream into an [`Ast`], then rejects recursive call graphs.
pub fn parse_tokens(tokens: &[Token], src_len: usize) -> Result<Ast, Diagnostic> {
    let eof = match tokens.last() {
        Some(t) => Span {
            start: src_len,
            end: src_len,
            line: t.span.line,
            col: t.span.col + (t.span.end - t.span.start) as u32,
        },
        None => Span {
            start: 0,
            end: 0,
            line: 1,
            col: 1,
        },
    };
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        next_id: 0,
        eof,
    };
    let mut functions = Vec::new();
    while p.peek().is_some() {
        functions.push(p.function()?);
    }
    let ast = Ast { functions };
    check_no_recursion(&ast)?;
    Ok(ast)
}

/// Tokenizes and parses GraphAlg source text.
pub fn parse(src: &str) -> Result<Ast, Diagnostic> {
    let tokens = tokenize(src)?;
    parse_tokens(&tokens, src.len())
}

fn user_calls(f: &FuncDecl) -> Vec<(String, Span)> {
    let mut out = Vec::new();
    for s in &f.body {
        s.walk_exprs(&mut |e| {
            if let ExprKind::Call(Call::User { name, .. }) = &e.kind {
                out.push((name.clone(), e.span));
            }
        });
    }
    out
}

/// Rejects any cycle in the call graph between declared functions.
pub fn check_no_recursion(ast: &Ast) -> Result<(), Diagnostic> {
    let calls: BTreeMap<&str, Vec<(String, Span)>> =
        ast.functions.iter().map(|f| (f.name.as_str(), user_calls(f))).collect();

    // Iterative DFS with colouring; reports the call that closes the cycle.
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        Grey,
        Black,
    }
    let mut colour: BTreeMap<&str, Colour> = BTreeMap::new();
    for f in &ast.functions {
        if colour.contains_key(f.name.as_str()) {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = alloc::vec![(f.name.as_str(), 0)];
        let mut path: BTreeSet<&str> = BTreeSet::new();
        colour.insert(f.name.as_str(), Colour::Grey);
        path.insert(f.name.as_str());
        while let Some((node, idx)) = stack.pop() {
            let edges = calls.get(node).map(|v| v.as_slice()).unwrap_or(&[]);
            if idx < edges.len() {
                stack.push((node, idx + 1));
                let (callee, span) = &edges[idx];
                let Some((callee_key, _)) = calls.get_key_value(callee.as_str()) else {
                    continue;
                };
                match colour.get(callee_key) {
                    Some(Colour::Grey) => {
                        let msg = if callee == node {
                            format!("recursion is forbidden: `{node}` calls itself")
                        } else {
                            format!("recursion is forbidden: `{node}` calls `{callee}`, which leads back to `{node}`")
                        };
                        return Err(Diagnostic::new(Stage::Parse, *span, msg));
                    }
                    Some(Colour::Black) => {}
                    None => {
                        colour.insert(callee_key, Colour::Grey);
                        path.insert(callee_key);
                        stack.push((callee_key, 0));
                    }
                }
            } else {
                colour.insert(node, Colour::Black);
                path.remove(node);
            }
        }
    }
    Ok(())
}
