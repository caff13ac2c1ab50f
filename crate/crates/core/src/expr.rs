//! Arithmetic expression language for user-supplied metrics, immersions and
//! fields.
//!
//! Grammar: real literals, identifiers, `+ - * / ^`, unary minus, the
//! functions `sin cos tan exp log sqrt abs`, and parentheses. Precedence is
//! `^` above unary minus above `* /` above `+ -`, with `^` right-associative.
//! Parse and evaluation errors carry 1-based line/column positions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::dual::{Dual, Real, D1};

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Error)]
#[error("{span}: {message}")]
pub struct EvalError {
    pub span: Span,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a literal integer exponent, valid for any base.
    PowI(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Parsed expression with source position.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = *self.src.get(self.pos)?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Span)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
                self.bump();
            }
            let span = Span {
                line: self.line,
                col: self.col,
            };
            let Some(b) = self.peek() else {
                out.push((Tok::End, span));
                return Ok(out);
            };
            let tok = match b {
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'^' => {
                    self.bump();
                    Tok::Caret
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'0'..=b'9' => self.number(span)?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while matches!(
                        self.peek(),
                        Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_')
                    ) {
                        self.bump();
                    }
                    Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
                }
                other => {
                    return Err(ParseError {
                        span,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, span));
        }
    }

    fn number(&mut self, span: Span) -> Result<Tok, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.bump();
        }
        if self.peek() == Some(b'.') {
            self.bump();
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.bump();
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.bump();
            }
            if matches!(self.peek(), Some(b'0'..=b'9')) {
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.bump();
                }
            } else {
                // `e` belongs to a following identifier, not this number
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("digits are ascii");
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            span,
            message: format!("malformed number `{text}`"),
        })
    }
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, Span)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, Span) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let (tok, span) = self.peek();
        ParseError {
            span: *span,
            message: format!("unexpected {}; expected {expected}", tok.describe()),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let (_, span) = self.next();
            let rhs = self.term()?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().0 {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let (_, span) = self.next();
            let rhs = self.unary()?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().0 == Tok::Minus {
            let (_, span) = self.next();
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().0 != Tok::Caret {
            return Ok(base);
        }
        let (_, span) = self.next();
        // the exponent admits a leading unary minus and chains to the right
        let exponent = self.unary()?;
        Ok(fold_power(base, exponent, span))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().0.clone() {
            Tok::Num(v) => {
                let (_, span) = self.next();
                Ok(Expr {
                    kind: ExprKind::Num(v),
                    span,
                })
            }
            Tok::LParen => {
                self.next();
                let inner = self.expr()?;
                if self.peek().0 != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.next();
                Ok(inner)
            }
            Tok::Ident(name) => {
                let (_, span) = self.next();
                if self.peek().0 == Tok::LParen {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        span,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.next();
                    let mut args = vec![self.expr()?];
                    while self.peek().0 == Tok::Comma {
                        self.next();
                        args.push(self.expr()?);
                    }
                    if self.peek().0 != Tok::RParen {
                        return Err(self.unexpected("`)`"));
                    }
                    self.next();
                    if args.len() != 1 {
                        return Err(ParseError {
                            span,
                            message: format!(
                                "function `{name}` takes 1 argument, got {}",
                                args.len()
                            ),
                        });
                    }
                    Ok(Expr {
                        kind: ExprKind::Call(func, Box::new(args.pop().expect("one argument"))),
                        span,
                    })
                } else if Func::from_name(&name).is_some() {
                    Err(ParseError {
                        span,
                        message: format!("expected `(` after function name `{name}`"),
                    })
                } else {
                    Ok(Expr {
                        kind: ExprKind::Var(name),
                        span,
                    })
                }
            }
            _ => Err(self.unexpected("a number, identifier, `-`, or `(`")),
        }
    }
}

/// Fold literal-integer exponents into [`ExprKind::PowI`], which stays
/// differentiable for non-positive bases.
fn fold_power(base: Expr, exponent: Expr, span: Span) -> Expr {
    let literal = match &exponent.kind {
        ExprKind::Num(v) => Some(*v),
        ExprKind::Neg(inner) => match &inner.kind {
            ExprKind::Num(v) => Some(-*v),
            _ => None,
        },
        _ => None,
    };
    if let Some(v) = literal {
        if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 {
            return Expr {
                kind: ExprKind::PowI(Box::new(base), v as i32),
                span,
            };
        }
    }
    Expr {
        kind: ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
        span,
    }
}

/// Parse a source string into an expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if p.peek().0 != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

impl Expr {
    /// Evaluate over any [`Real`] scalar with named bindings.
    pub fn eval<T: Real>(&self, lookup: &dyn Fn(&str) -> Option<T>) -> Result<T, EvalError> {
        match &self.kind {
            ExprKind::Num(v) => Ok(T::from_f64(*v)),
            ExprKind::Var(name) => lookup(name).ok_or_else(|| EvalError {
                span: self.span,
                message: format!("unbound variable `{name}`"),
            }),
            ExprKind::Neg(inner) => Ok(-inner.eval(lookup)?),
            ExprKind::Binary(op, l, r) => {
                let a = l.eval(lookup)?;
                let b = r.eval(lookup)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(EvalError {
                                span: self.span,
                                message: "division by zero".into(),
                            });
                        }
                        Ok(a / b)
                    }
                    BinOp::Pow => {
                        if a.value() <= 0.0 {
                            return Err(EvalError {
                                span: self.span,
                                message: format!(
                                    "power with non-positive base {} and non-integer exponent",
                                    a.value()
                                ),
                            });
                        }
                        Ok(a.pow(b))
                    }
                }
            }
            ExprKind::PowI(base, k) => {
                let b = base.eval(lookup)?;
                if *k < 0 && b.value() == 0.0 {
                    return Err(EvalError {
                        span: self.span,
                        message: "zero raised to a negative power".into(),
                    });
                }
                Ok(b.powi(*k))
            }
            ExprKind::Call(func, arg) => {
                let v = arg.eval(lookup)?;
                match func {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Tan => Ok(v.tan()),
                    Func::Exp => Ok(v.exp()),
                    Func::Log => {
                        if v.value() <= 0.0 {
                            return Err(EvalError {
                                span: self.span,
                                message: format!("log of non-positive value {}", v.value()),
                            });
                        }
                        Ok(v.ln())
                    }
                    Func::Sqrt => {
                        if v.value() < 0.0 {
                            return Err(EvalError {
                                span: self.span,
                                message: format!("sqrt of negative value {}", v.value()),
                            });
                        }
                        Ok(v.sqrt())
                    }
                    Func::Abs => Ok(v.abs()),
                }
            }
        }
    }

    /// All variable names appearing in the expression.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            ExprKind::Num(_) => {}
            ExprKind::Var(name) => {
                out.insert(name.clone());
            }
            ExprKind::Neg(e) => e.collect_vars(out),
            ExprKind::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            ExprKind::PowI(b, _) => b.collect_vars(out),
            ExprKind::Call(_, a) => a.collect_vars(out),
        }
    }

    /// Resolve variable names against an ordered slot list for fast repeated
    /// evaluation; unknown names are rejected here.
    pub fn compile(&self, vars: &[String]) -> Result<CompiledExpr, EvalError> {
        let kind = match &self.kind {
            ExprKind::Num(v) => CKind::Num(*v),
            ExprKind::Var(name) => {
                let slot = vars.iter().position(|v| v == name).ok_or_else(|| EvalError {
                    span: self.span,
                    message: format!("unbound variable `{name}`"),
                })?;
                CKind::Var(slot)
            }
            ExprKind::Neg(e) => CKind::Neg(Box::new(e.compile(vars)?)),
            ExprKind::Binary(op, l, r) => CKind::Binary(
                *op,
                Box::new(l.compile(vars)?),
                Box::new(r.compile(vars)?),
            ),
            ExprKind::PowI(b, k) => CKind::PowI(Box::new(b.compile(vars)?), *k),
            ExprKind::Call(f, a) => CKind::Call(*f, Box::new(a.compile(vars)?)),
        };
        Ok(CompiledExpr { kind })
    }
}

/// Expression with variables resolved to slots.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    kind: CKind,
}

#[derive(Clone, Debug)]
enum CKind {
    Num(f64),
    Var(usize),
    Neg(Box<CompiledExpr>),
    Binary(BinOp, Box<CompiledExpr>, Box<CompiledExpr>),
    PowI(Box<CompiledExpr>, i32),
    Call(Func, Box<CompiledExpr>),
}

impl CompiledExpr {
    /// Unchecked fast path: domain violations surface as NaN/inf in the
    /// usual floating-point way.
    pub fn eval_slots<T: Real>(&self, slots: &[T]) -> T {
        match &self.kind {
            CKind::Num(v) => T::from_f64(*v),
            CKind::Var(i) => slots[*i],
            CKind::Neg(e) => -e.eval_slots(slots),
            CKind::Binary(op, l, r) => {
                let a = l.eval_slots(slots);
                let b = r.eval_slots(slots);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.pow(b),
                }
            }
            CKind::PowI(b, k) => b.eval_slots(slots).powi(*k),
            CKind::Call(f, a) => {
                let v = a.eval_slots(slots);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

/// Value and gradient of an expression at a point, by forward-mode duals:
/// one seeded evaluation per binding, in binding order.
pub fn eval_with_duals(
    expr: &Expr,
    bindings: &[(String, f64)],
) -> Result<(f64, Vec<f64>), EvalError> {
    let mut grad = Vec::with_capacity(bindings.len());
    let mut value = 0.0;
    for seed in 0..bindings.len() {
        let lookup = |name: &str| -> Option<D1> {
            bindings.iter().enumerate().find_map(|(i, (n, v))| {
                (n == name).then(|| Dual::new(*v, if i == seed { 1.0 } else { 0.0 }))
            })
        };
        let d = expr.eval::<D1>(&lookup)?;
        grad.push(d.eps);
        value = d.re;
    }
    if bindings.is_empty() {
        value = expr.eval::<f64>(&|_| None)?;
    }
    Ok((value, grad))
}

// ---------------------------------------------------------------------------
// pretty-printer
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Binary(BinOp::Pow, ..) | ExprKind::PowI(..) => 4,
        ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Call(..) => 5,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v}"),
            ExprKind::Var(name) => write!(f, "{name}"),
            ExprKind::Neg(inner) => {
                write!(f, "-")?;
                write_wrapped(f, inner, precedence(inner) < 3)
            }
            ExprKind::Binary(op, l, r) => {
                let (sym, prec, right_assoc) = match op {
                    BinOp::Add => ("+", 1, false),
                    BinOp::Sub => ("-", 1, false),
                    BinOp::Mul => ("*", 2, false),
                    BinOp::Div => ("/", 2, false),
                    BinOp::Pow => ("^", 4, true),
                };
                if right_assoc {
                    write_wrapped(f, l, precedence(l) <= prec)?;
                    write!(f, "{sym}")?;
                    write_wrapped(f, r, precedence(r) < prec)
                } else {
                    write_wrapped(f, l, precedence(l) < prec)?;
                    write!(f, "{sym}")?;
                    write_wrapped(f, r, precedence(r) <= prec)
                }
            }
            ExprKind::PowI(b, k) => {
                write_wrapped(f, b, precedence(b) <= 4)?;
                write!(f, "^{k}")
            }
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eval_f64(src: &str, binds: &[(&str, f64)]) -> f64 {
        let e = parse(src).unwrap();
        e.eval::<f64>(&|name| {
            binds
                .iter()
                .find_map(|(n, v)| (*n == name).then_some(*v))
        })
        .unwrap()
    }

    #[test]
    fn conformal_factor_example() {
        let v = eval_f64(
            "1/(1+(c/4)*(x1^2+x2^2))^2",
            &[("c", 1.0), ("x1", 2.0), ("x2", 0.0)],
        );
        assert_relative_eq!(v, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn cosine_squared_example() {
        let v = eval_f64("cos(u1)^2", &[("u1", std::f64::consts::FRAC_PI_4)]);
        assert_relative_eq!(v, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval_f64("2+3*4", &[]), 14.0);
        assert_eq!(eval_f64("2*3^2", &[]), 18.0);
        assert_eq!(eval_f64("-3^2", &[]), -9.0); // ^ binds above unary minus
        assert_eq!(eval_f64("(-3)^2", &[]), 9.0);
        assert_eq!(eval_f64("2^3^2", &[]), 512.0); // right-associative
        assert_eq!(eval_f64("2^-2", &[]), 0.25);
        assert_eq!(eval_f64("8/4/2", &[]), 1.0); // left-associative
        assert_eq!(eval_f64("1-2-3", &[]), -4.0);
        assert_eq!(eval_f64("  1 \n + 2\t*3 ", &[]), 7.0);
    }

    #[test]
    fn malformed_input_cites_position() {
        let err = parse("x1 + * 2").unwrap_err();
        assert_eq!(err.span, Span { line: 1, col: 6 });
        assert!(err.message.contains("unexpected `*`"));
        assert!(err.message.contains("expected"));

        let err = parse("sin(x,y)").unwrap_err();
        assert!(err.message.contains("takes 1 argument, got 2"));

        let err = parse("foo(3)").unwrap_err();
        assert!(err.message.contains("unknown function `foo`"));
        assert_eq!(err.span.col, 1);

        let err = parse("1 +\n* 2").unwrap_err();
        assert_eq!(err.span, Span { line: 2, col: 1 });
    }

    #[test]
    fn eval_with_duals_examples() {
        let e = parse("x1^2").unwrap();
        let (v, g) = eval_with_duals(&e, &[("x1".into(), 3.0)]).unwrap();
        assert_relative_eq!(v, 9.0);
        assert_relative_eq!(g[0], 6.0, epsilon = 1e-15);

        // gradient of the conformal factor at the origin is zero
        let e = parse("1/(1+(1/4)*(x1^2+x2^2))^2").unwrap();
        let (v, g) = eval_with_duals(&e, &[("x1".into(), 0.0), ("x2".into(), 0.0)]).unwrap();
        assert_relative_eq!(v, 1.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn dual_gradient_matches_finite_differences() {
        let srcs = [
            "sin(x1)*exp(x2) - x1/(1+x2^2)",
            "sqrt(x1^2 + 2) * log(3 + x2)",
            "tan(x1/4) + abs(x2)^3",
        ];
        for src in srcs {
            let e = parse(src).unwrap();
            let point = [("x1".to_string(), 0.7), ("x2".to_string(), -0.4)];
            let (_, grad) = eval_with_duals(&e, &point).unwrap();
            for (i, name) in ["x1", "x2"].iter().enumerate() {
                let h = 1e-6;
                let shifted = |delta: f64| {
                    e.eval::<f64>(&|n| {
                        point.iter().find_map(|(pn, pv)| {
                            (pn == n).then(|| if n == *name { *pv + delta } else { *pv })
                        })
                    })
                    .unwrap()
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                assert_relative_eq!(grad[i], fd, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn domain_errors_carry_location() {
        let e = parse("1/(x1 - 1)").unwrap();
        let err = e
            .eval::<f64>(&|n| (n == "x1").then_some(1.0))
            .unwrap_err();
        assert!(err.message.contains("division by zero"));
        assert_eq!(err.span.col, 2);

        let e = parse("log(x1)").unwrap();
        assert!(e
            .eval::<f64>(&|n| (n == "x1").then_some(-2.0))
            .unwrap_err()
            .message
            .contains("log of non-positive"));

        let e = parse("sqrt(-x1)").unwrap();
        assert!(e
            .eval::<f64>(&|n| (n == "x1").then_some(4.0))
            .unwrap_err()
            .message
            .contains("sqrt of negative"));
    }

    #[test]
    fn unbound_variable_is_reported() {
        let e = parse("x1 + y9").unwrap();
        let err = e.eval::<f64>(&|n| (n == "x1").then_some(1.0)).unwrap_err();
        assert!(err.message.contains("unbound variable `y9`"));
        assert_eq!(
            e.free_variables().into_iter().collect::<Vec<_>>(),
            vec!["x1".to_string(), "y9".to_string()]
        );
    }

    #[test]
    fn integer_exponents_work_on_negative_bases() {
        assert_eq!(eval_f64("(0 - 2)^3", &[]), -8.0);
        assert_eq!(eval_f64("x1^2", &[("x1", -3.0)]), 9.0);
        // non-integer exponent on a negative base is a domain error
        let e = parse("x1^0.5").unwrap();
        assert!(e.eval::<f64>(&|_| Some(-1.0)).is_err());
    }

    #[test]
    fn compiled_matches_checked_eval() {
        let e = parse("sin(u1)^2 + cos(u1)^2 * exp(u2/3)").unwrap();
        let vars = vec!["u1".to_string(), "u2".to_string()];
        let c = e.compile(&vars).unwrap();
        for (a, b) in [(0.3, 0.7), (-1.1, 0.0), (2.0, -0.5)] {
            let direct = e
                .eval::<f64>(&|n| match n {
                    "u1" => Some(a),
                    "u2" => Some(b),
                    _ => None,
                })
                .unwrap();
            assert_relative_eq!(c.eval_slots(&[a, b]), direct, epsilon = 1e-15);
        }
    }

    #[test]
    fn pretty_print_is_a_fixed_point() {
        let srcs = [
            "1/(1+(c/4)*(x1^2+x2^2))^2",
            "-x1^2 + (-x1)^2",
            "2^3^2 - (2^3)^2",
            "sin(x1)*cos(x2)/tan(x3+1)",
            "a-b-c*(d+e)",
            "-(a+b)",
            "a/(b*c)",
            "x1^-2",
            "abs(-x1)^3",
        ];
        for src in srcs {
            let once = parse(src).unwrap().to_string();
            let twice = parse(&once).unwrap().to_string();
            assert_eq!(once, twice, "not a fixed point for `{src}`");
            // printing must preserve the AST
            assert_eq!(parse(src).unwrap().to_string(), once);
        }
    }
}
