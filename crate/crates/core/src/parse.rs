//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '_' letters | func '(' expr ')'
//!          | 'D' letters '(' expr ')' | '(' expr ')'
//! ```
//!
//! Binary `+ - * /` are left-associative; `^` is right-associative and
//! binds tighter than unary minus, so `-x^2` is `-(x^2)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::expr::{name, BinaryOp, DerivAtom, Expr, Name, UnaryOp};
use crate::Rational;

/// Decides how bare identifiers are classified.
#[derive(Clone, Debug)]
pub struct ParseContext {
    pub variables: Vec<Name>,
    pub unknown: Option<Name>,
}

impl Default for ParseContext {
    fn default() -> Self {
        ParseContext {
            variables: ["x", "y", "z", "t"].iter().map(|s| name(s)).collect(),
            unknown: None,
        }
    }
}

impl ParseContext {
    pub fn new(variables: Vec<Name>, unknown: Option<Name>) -> Self {
        ParseContext { variables, unknown }
    }

    fn classify(&self, ident: &str) -> Expr {
        if self.variables.iter().any(|v| &**v == ident) {
            Expr::Var(name(ident))
        } else if self.unknown.as_deref() == Some(ident) {
            Expr::Field(name(ident))
        } else {
            Expr::Param(name(ident))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    /// `name_letters`
    Deriv(String, String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Deriv(u, v) => write!(f, "derivative `{u}_{v}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut value = if int_part.is_empty() {
                Rational::zero()
            } else {
                Rational::from_integer(int_part.parse::<BigInt>().expect("digits"))
            };
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fstart = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let frac = &src[fstart..i];
                if !frac.is_empty() {
                    let num: BigInt = frac.parse().expect("digits");
                    let den = num_traits::pow(BigInt::from(10), frac.len());
                    value += Rational::new(num, den);
                }
            }
            out.push((start, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            let ident = src[start..i].to_string();
            if i + 1 < bytes.len() && bytes[i] == b'_' && bytes[i + 1].is_ascii_alphabetic() {
                i += 1;
                let vstart = i;
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                out.push((start, Tok::Deriv(ident, src[vstart..i].to_string())));
            } else {
                out.push((start, Tok::Ident(ident)));
            }
        } else if b"+-*/^(),".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(SyntaxError {
                offset: i,
                expected: vec!["expression".into()],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinaryOp::Add,
                Tok::Sym('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinaryOp::Mul,
                Tok::Sym('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn call_argument(&mut self) -> Result<Expr, SyntaxError> {
        self.expect_sym('(')?;
        let arg = self.expr()?;
        self.expect_sym(')')?;
        Ok(arg)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        const EXPECTED: &[&str] = &["number", "identifier", "`(`", "`-`"];
        let at = self.offset();
        let before = self.pos;
        match self.bump() {
            Tok::Num(n) => Ok(Expr::Const(n)),
            Tok::Deriv(u, vs) => {
                let vars = vs.chars().map(|c| name(&c.to_string())).collect();
                Ok(Expr::Deriv(DerivAtom::new(name(&u), vars)))
            }
            Tok::Ident(id) => {
                let is_call = *self.peek() == Tok::Sym('(');
                if !is_call {
                    return Ok(self.ctx.classify(&id));
                }
                if let Some(op) = UnaryOp::from_name(&id).filter(|op| *op != UnaryOp::Neg) {
                    return Ok(Expr::unary(op, self.call_argument()?));
                }
                if let Some(vs) = id.strip_prefix('D').filter(|v| !v.is_empty()) {
                    let vars = vs.chars().map(|c| name(&c.to_string())).collect();
                    let body = self.call_argument()?;
                    return Ok(Expr::Diff(vars, Arc::new(body)));
                }
                Err(SyntaxError {
                    offset: at,
                    expected: vec!["known function (exp, log, sin, cos, sqrt, D<vars>)".into()],
                    found: format!("call to `{id}`"),
                })
            }
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            _ => {
                self.pos = before;
                Err(self.error(EXPECTED))
            }
        }
    }
}

/// Parses `text` with the default context (`x y z t` are variables).
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    parse_expr_with(text, &ParseContext::default())
}

pub fn parse_expr_with(text: &str, ctx: &ParseContext) -> Result<Expr, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Parses a rational literal such as `1`, `-2`, `1/2` or `0.25`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, text),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Rational::new(n, d)
    } else {
        match parse_expr(body).ok()? {
            Expr::Const(c) => c,
            _ => return None,
        }
    };
    Some(if neg { -value } else { value })
}

/// Parses the prefix s-expression form produced by [`Expr::to_sexp`].
pub fn parse_sexp(text: &str, ctx: &ParseContext) -> Result<Expr, SyntaxError> {
    let mut toks: Vec<(usize, String)> = Vec::new();
    let mut i = 0;
    let bytes = text.as_bytes();
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'(' || c == b')' {
            toks.push((i, (c as char).to_string()));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                i += 1;
            }
            toks.push((start, text[start..i].to_string()));
        }
    }
    let mut pos = 0;
    let e = sexp_node(&toks, &mut pos, ctx, text.len())?;
    if pos != toks.len() {
        return Err(SyntaxError {
            offset: toks[pos].0,
            expected: vec!["end of input".into()],
            found: format!("`{}`", toks[pos].1),
        });
    }
    Ok(e)
}

fn sexp_node(
    toks: &[(usize, String)],
    pos: &mut usize,
    ctx: &ParseContext,
    end: usize,
) -> Result<Expr, SyntaxError> {
    let err = |offset: usize, expected: &str, found: &str| SyntaxError {
        offset,
        expected: vec![expected.to_string()],
        found: found.to_string(),
    };
    let Some((at, tok)) = toks.get(*pos) else {
        return Err(err(end, "s-expression", "end of input"));
    };
    *pos += 1;
    if tok == ")" {
        return Err(err(*at, "s-expression", "`)`"));
    }
    if tok != "(" {
        if let Some(c) = parse_rational(tok).filter(|_| {
            tok.starts_with(|ch: char| ch.is_ascii_digit() || ch == '-')
        }) {
            return Ok(Expr::Const(c));
        }
        return parse_expr_with(tok, ctx).map_err(|e| SyntaxError { offset: at + e.offset, ..e });
    }
    let Some((hat, head)) = toks.get(*pos).cloned() else {
        return Err(err(end, "operator", "end of input"));
    };
    *pos += 1;
    let expr = if head == "D" {
        if toks.get(*pos).map(|t| t.1.as_str()) != Some("(") {
            return Err(err(hat, "`(`", "variable list"));
        }
        *pos += 1;
        let mut vars = Vec::new();
        while let Some((_, t)) = toks.get(*pos) {
            if t == ")" {
                break;
            }
            vars.push(name(t));
            *pos += 1;
        }
        *pos += 1;
        let body = sexp_node(toks, pos, ctx, end)?;
        Expr::Diff(vars, Arc::new(body))
    } else if let Some(op) = UnaryOp::from_name(&head) {
        Expr::unary(op, sexp_node(toks, pos, ctx, end)?)
    } else if let Some(op) = BinaryOp::from_symbol(&head) {
        let l = sexp_node(toks, pos, ctx, end)?;
        let r = sexp_node(toks, pos, ctx, end)?;
        Expr::binary(op, l, r)
    } else {
        return Err(err(hat, "operator", &format!("`{head}`")));
    };
    match toks.get(*pos) {
        Some((_, t)) if t == ")" => {
            *pos += 1;
            Ok(expr)
        }
        Some((o, t)) => Err(err(*o, "`)`", &format!("`{t}`"))),
        None => Err(err(end, "`)`", "end of input")),
    }
}
