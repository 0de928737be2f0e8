//! Expression evaluator for the Temperley–Lieb calculator.
//!
//! Grammar: `E1..E7`, `jw(n)`, `rot(x)`, `star(x)`, `tr(x)`, `x*y`, `x∘y`,
//! `x/c`, `x+y`, `x-y`, `x^k`, `δ`, rational literals and diagram literals
//! such as `[(0,1),(2,3)]`. The box size is the smallest one every term fits in.

use std::fmt;

use crate::scalars::{quantum_integer, DeltaRational, QuadraticNumber};

use super::{jones_wenzl, PlanarDiagram, TLElement, TlError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Delta,
    Gen(usize),
    Ident(String),
    Diagram(PlanarDiagram),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, TlError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, m: &str| TlError::Parse { position: pos, message: m.to_string() };
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' => {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().map(|x| x.1).collect();
                let v = s.parse().map_err(|_| err(pos, "number too large"))?;
                out.push((pos, Tok::Num(v)));
                i = j;
            }
            'δ' => {
                out.push((pos, Tok::Delta));
                i += 1;
            }
            '[' => {
                let mut j = i;
                while j < chars.len() && chars[j].1 != ']' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(err(pos, "unterminated diagram literal"));
                }
                let s: String = chars[i..=j].iter().map(|x| x.1).collect();
                let d: PlanarDiagram = s.parse().map_err(|e| err(pos, &format!("{e}")))?;
                out.push((pos, Tok::Diagram(d)));
                i = j + 1;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_alphanumeric() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().map(|x| x.1).collect();
                let tok = if let Some(k) = s.strip_prefix('E').filter(|k| !k.is_empty()) {
                    let k: usize = k.parse().map_err(|_| err(pos, "bad generator index"))?;
                    if !(1..=7).contains(&k) {
                        return Err(err(pos, "generators are E1..E7"));
                    }
                    Tok::Gen(k)
                } else if s == "delta" || s == "d" {
                    Tok::Delta
                } else {
                    Tok::Ident(s)
                };
                out.push((pos, tok));
                i = j;
            }
            '+' | '-' | '*' | '/' | '^' | '∘' | '·' => {
                let op = if c == '·' { '*' } else { c };
                out.push((pos, Tok::Op(op)));
                i += 1;
            }
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            _ => return Err(err(pos, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Ast {
    Num(i64),
    Delta,
    Gen(usize),
    Diagram(PlanarDiagram),
    Jw(usize),
    Call(String, Box<Ast>, usize),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, u32),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn err(&self, m: &str) -> TlError {
        TlError::Parse { position: self.pos(), message: m.to_string() }
    }

    fn expect(&mut self, t: Tok) -> Result<(), TlError> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {t:?}")))
        }
    }

    fn expr(&mut self) -> Result<Ast, TlError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            let pos = self.pos();
            self.at += 1;
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast, TlError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/' | '∘'))) = self.peek().cloned() {
            let pos = self.pos();
            self.at += 1;
            let rhs = self.unary()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, TlError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.at += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.at += 1;
            match self.peek().cloned() {
                Some(Tok::Num(k)) if (0..=64).contains(&k) => {
                    self.at += 1;
                    return Ok(Ast::Pow(Box::new(base), k as u32));
                }
                _ => return Err(self.err("exponent must be an integer in 0..=64")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, TlError> {
        let pos = self.pos();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err("unexpected end of input"));
        };
        self.at += 1;
        match tok {
            Tok::Num(v) => Ok(Ast::Num(v)),
            Tok::Delta => Ok(Ast::Delta),
            Tok::Gen(k) => Ok(Ast::Gen(k)),
            Tok::Diagram(d) => Ok(Ast::Diagram(d)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.expect(Tok::LParen)?;
                if name == "jw" {
                    let n = match self.peek().cloned() {
                        Some(Tok::Num(n)) if n >= 1 => n as usize,
                        _ => return Err(self.err("jw takes a positive integer")),
                    };
                    self.at += 1;
                    self.expect(Tok::RParen)?;
                    return Ok(Ast::Jw(n));
                }
                if !matches!(name.as_str(), "rot" | "tr" | "star") {
                    return Err(TlError::Parse { position: pos, message: format!("unknown function `{name}`") });
                }
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Ast::Call(name, Box::new(arg), pos))
            }
            _ => Err(TlError::Parse { position: pos, message: format!("unexpected token {tok:?}") }),
        }
    }
}

fn required_size(a: &Ast) -> usize {
    match a {
        Ast::Num(_) | Ast::Delta => 0,
        Ast::Gen(k) => k + 1,
        Ast::Diagram(d) => d.box_size(),
        Ast::Jw(n) => *n,
        Ast::Call(_, x, _) | Ast::Neg(x) | Ast::Pow(x, _) => required_size(x),
        Ast::Bin(_, x, y, _) => required_size(x).max(required_size(y)),
    }
}

fn uses_rotation(a: &Ast) -> bool {
    match a {
        Ast::Call(name, x, _) => name == "rot" || uses_rotation(x),
        Ast::Bin(op, x, y, _) => *op == '∘' || uses_rotation(x) || uses_rotation(y),
        Ast::Neg(x) | Ast::Pow(x, _) => uses_rotation(x),
        _ => false,
    }
}

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum TlValue {
    Scalar(DeltaRational),
    Element(TLElement),
}

impl fmt::Display for TlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TlValue::Scalar(s) => write!(f, "{s}"),
            TlValue::Element(e) => write!(f, "{e}"),
        }
    }
}

struct Evaluator {
    n: usize,
}

impl Evaluator {
    fn promote(&self, v: TlValue) -> TLElement {
        match v {
            TlValue::Scalar(s) => TLElement::scalar(self.n, s),
            TlValue::Element(e) => e,
        }
    }

    fn eval(&self, a: &Ast) -> Result<TlValue, TlError> {
        use TlValue::*;
        Ok(match a {
            Ast::Num(v) => Scalar(DeltaRational::from_integer(*v)),
            Ast::Delta => Scalar(DeltaRational::delta()),
            Ast::Gen(k) => Element(TLElement::generator(self.n, *k)?),
            Ast::Diagram(d) => Element(TLElement::from_diagram(d.clone()).embed(self.n)?),
            Ast::Jw(k) => Element(jones_wenzl(*k)?.embed(self.n)?),
            Ast::Neg(x) => match self.eval(x)? {
                Scalar(s) => Scalar(-s),
                Element(e) => Element(e.scale(&DeltaRational::from_integer(-1))),
            },
            Ast::Pow(x, k) => match self.eval(x)? {
                Scalar(s) => Scalar(s.powi(*k)),
                Element(e) => {
                    let mut acc = TLElement::identity(self.n);
                    for _ in 0..*k {
                        acc = acc.compose(&e)?;
                    }
                    Element(acc)
                }
            },
            Ast::Call(name, x, pos) => {
                let v = self.eval(x)?;
                match name.as_str() {
                    "tr" => match v {
                        Scalar(s) => Scalar(&s * &TLElement::identity(self.n).markov_trace()),
                        Element(e) => Scalar(e.markov_trace()),
                    },
                    "rot" => Element(self.promote(v).rotate().map_err(|e| at(e, *pos))?),
                    _ => Element(self.promote(v).star()),
                }
            }
            Ast::Bin(op, x, y, pos) => {
                let (l, r) = (self.eval(x)?, self.eval(y)?);
                match (op, l, r) {
                    ('+', Scalar(a), Scalar(b)) => Scalar(&a + &b),
                    ('-', Scalar(a), Scalar(b)) => Scalar(&a - &b),
                    ('*', Scalar(a), Scalar(b)) => Scalar(&a * &b),
                    ('/', l, Scalar(b)) => {
                        let inv = b.inverse().map_err(|_| TlError::Parse {
                            position: *pos,
                            message: "division by zero".into(),
                        })?;
                        match l {
                            Scalar(a) => Scalar(&a * &inv),
                            Element(e) => Element(e.scale(&inv)),
                        }
                    }
                    ('/', _, Element(_)) => {
                        return Err(TlError::Parse { position: *pos, message: "cannot divide by a diagram".into() })
                    }
                    ('*', Scalar(a), Element(e)) | ('*', Element(e), Scalar(a)) => Element(e.scale(&a)),
                    ('*', Element(a), Element(b)) => Element(a.compose(&b)?),
                    ('+', l, r) => Element(self.promote(l).add(&self.promote(r))?),
                    ('-', l, r) => Element(self.promote(l).sub(&self.promote(r))?),
                    ('∘', l, r) => Element(self.promote(l).comultiply(&self.promote(r)).map_err(|e| at(e, *pos))?),
                    _ => unreachable!("operator set is closed"),
                }
            }
        })
    }
}

fn at(e: TlError, pos: usize) -> TlError {
    match e {
        TlError::BoxSize(m) => TlError::BoxSize(format!("{m} (at {pos})")),
        other => other,
    }
}

fn parse(src: &str) -> Result<(Ast, usize), TlError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.len() };
    let ast = p.expr()?;
    if p.at != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    let mut n = required_size(&ast).max(1);
    if uses_rotation(&ast) {
        if n > 2 {
            return Err(TlError::BoxSize(format!("rotation needs 2-boxes, expression needs {n}")));
        }
        n = 2;
    }
    Ok((ast, n))
}

fn max_jw(a: &Ast) -> usize {
    match a {
        Ast::Jw(n) => *n,
        Ast::Call(_, x, _) | Ast::Neg(x) | Ast::Pow(x, _) => max_jw(x),
        Ast::Bin(_, x, y, _) => max_jw(x).max(max_jw(y)),
        _ => 0,
    }
}

/// Parses and evaluates with symbolic δ.
pub fn tl_eval(src: &str) -> Result<TlValue, TlError> {
    let (ast, n) = parse(src)?;
    Evaluator { n }.eval(&ast)
}

/// Numeric value of δ for specialization.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaValue {
    Exact(QuadraticNumber),
    Float(f64),
}

impl std::str::FromStr for DeltaValue {
    type Err = TlError;

    fn from_str(s: &str) -> Result<Self, TlError> {
        if let Ok(q) = s.parse::<QuadraticNumber>() {
            return Ok(DeltaValue::Exact(q));
        }
        s.parse::<f64>()
            .map(DeltaValue::Float)
            .map_err(|_| TlError::Parse { position: 0, message: format!("bad δ value `{s}`") })
    }
}

/// Evaluates, then specializes δ; vanishing quantum integers are errors.
pub fn tl_eval_at(src: &str, delta: &DeltaValue) -> Result<String, TlError> {
    let (ast, n) = parse(src)?;
    for k in 1..=max_jw(&ast) {
        let zero = match delta {
            DeltaValue::Exact(q) => quantum_integer(k).eval_quadratic(q).is_zero(),
            DeltaValue::Float(x) => quantum_integer(k).eval_f64(*x).abs() < 1e-12,
        };
        if zero {
            return Err(TlError::Degenerate(format!("[{k}] vanishes at δ = {}", show(delta))));
        }
    }
    let v = Evaluator { n }.eval(&ast)?;
    let spec = |c: &DeltaRational| -> Result<String, TlError> {
        Ok(match delta {
            DeltaValue::Exact(q) => c.eval_quadratic(q).map_err(TlError::Scalar)?.to_string(),
            DeltaValue::Float(x) => format!("{}", c.eval_f64(*x)),
        })
    };
    match v {
        TlValue::Scalar(s) => spec(&s),
        TlValue::Element(e) => {
            let mut parts = Vec::new();
            for (d, c) in e.terms() {
                let name = if d.is_identity() {
                    "1".to_string()
                } else if let Some(i) = d.as_generator() {
                    format!("E{i}")
                } else {
                    d.to_string()
                };
                let cs = spec(c)?;
                if cs != "0" {
                    parts.push(format!("({cs})*{name}"));
                }
            }
            Ok(if parts.is_empty() { "0".into() } else { parts.join(" + ") })
        }
    }
}

fn show(d: &DeltaValue) -> String {
    match d {
        DeltaValue::Exact(q) => q.to_string(),
        DeltaValue::Float(x) => x.to_string(),
    }
}
