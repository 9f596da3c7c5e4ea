use thiserror::Error;

use super::CostExpr;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).map_or(false, |b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            let q = rational::parse_decimal(text)
                .ok_or_else(|| ParseError { pos: start, msg: format!("bad number `{}`", text) })?;
            out.push((start, Tok::Num(q)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else {
            let sym = match (c, bytes.get(i + 1).map(|b| *b as char)) {
                ('*', Some('*')) => "**",
                ('+', _) => "+",
                ('-', _) => "-",
                ('*', _) => "*",
                ('/', _) => "/",
                ('^', _) => "^",
                ('(', _) => "(",
                (')', _) => ")",
                (',', _) => ",",
                _ => return Err(ParseError { pos: i, msg: format!("unexpected character `{}`", c) }),
            };
            out.push((i, Tok::Sym(sym)));
            i += sym.len();
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

/// A parsed operand and whether it is a bare numeric literal.
type Operand = (CostExpr, bool);

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", sym))
        }
    }

    fn expr(&mut self) -> Result<CostExpr, ParseError> {
        let mut acc = self.term()?.0;
        loop {
            if self.eat("+") {
                acc = acc + self.term()?.0;
            } else if self.eat("-") {
                acc = acc - self.term()?.0;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Operand, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat("*") {
                let rhs = self.unary()?;
                acc = (acc.0 * rhs.0, false);
            } else if self.eat("/") {
                let rhs = self.unary()?;
                acc = match (acc, rhs) {
                    ((CostExpr::Const(a), true), (CostExpr::Const(b), true)) if b != Rational::from_integer(0.into()) => {
                        (CostExpr::Const(a / b), true)
                    }
                    (a, b) => (a.0 / b.0, false),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Operand, ParseError> {
        if self.eat("-") {
            return Ok(match self.unary()? {
                (CostExpr::Const(q), true) => (CostExpr::Const(-q), true),
                (e, _) => (CostExpr::int(-1) * e, false),
            });
        }
        if self.eat("+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Operand, ParseError> {
        let base = self.atom()?;
        if self.eat("**") || self.eat("^") {
            let exp = self.unary()?;
            return Ok((CostExpr::pow(base.0, exp.0), false));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<CostExpr>, ParseError> {
        let mut out = vec![self.expr()?];
        while self.eat(",") {
            out.push(self.expr()?);
        }
        self.expect(")")?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Operand, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.at += 1;
                Ok((CostExpr::Const(q), true))
            }
            Some(Tok::Sym("(")) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok((e, false))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if !self.eat("(") {
                    return Ok((if name == "euler" { CostExpr::Euler } else { CostExpr::Var(name) }, false));
                }
                let start = self.at;
                let e = self.call(&name, start)?;
                Ok((e, false))
            }
            _ => self.err("expected an expression"),
        }
    }

    fn binder(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(i)) => {
                self.at += 1;
                self.expect(",")?;
                Ok(i)
            }
            _ => self.err("expected an index identifier"),
        }
    }

    fn call(&mut self, name: &str, start: usize) -> Result<CostExpr, ParseError> {
        match name {
            "sum" | "prod" => {
                let index = self.binder()?;
                let a = self.args()?;
                if a.len() != 3 {
                    return self.err(format!("{} takes an index and three expressions", name));
                }
                let [lo, hi, body]: [CostExpr; 3] = a.try_into().unwrap();
                Ok(if name == "sum" { CostExpr::sum(&index, lo, hi, body) } else { CostExpr::prod(&index, lo, hi, body) })
            }
            "fall" => {
                let arg = self.expr()?;
                self.expect(",")?;
                let k = match self.peek().cloned() {
                    Some(Tok::Num(q)) if q.is_integer() => {
                        self.at += 1;
                        num_traits::ToPrimitive::to_u32(&q.to_integer())
                    }
                    _ => None,
                };
                let k = match k {
                    Some(k) => k,
                    None => return self.err("fall expects a natural exponent"),
                };
                self.expect(")")?;
                Ok(CostExpr::falling(arg, k))
            }
            _ => {
                // metric applications such as `length(A)` become size variables
                if let (Some(Tok::Ident(arg)), Some(Tok::Sym(")"))) =
                    (self.toks.get(self.at).map(|t| t.1.clone()), self.toks.get(self.at + 1).map(|t| t.1.clone()))
                {
                    if !matches!(name, "exp" | "power" | "log" | "ln" | "min" | "max") {
                        self.at += 2;
                        return Ok(CostExpr::Var(format!("{}({})", name, arg)));
                    }
                }
                let mut a = self.args()?;
                match (name, a.len()) {
                    ("exp" | "power", 2) => {
                        let e = a.pop().unwrap();
                        Ok(CostExpr::pow(a.pop().unwrap(), e))
                    }
                    ("exp", 1) => Ok(CostExpr::pow(CostExpr::Euler, a.pop().unwrap())),
                    ("log", 2) => {
                        let arg = a.pop().unwrap();
                        Ok(CostExpr::log(a.pop().unwrap(), arg))
                    }
                    ("ln" | "log", 1) => Ok(CostExpr::ln(a.pop().unwrap())),
                    ("min", _) => Ok(CostExpr::MinOf(a)),
                    ("max", _) => Ok(CostExpr::MaxOf(a)),
                    _ => Err(ParseError {
                        pos: self.toks.get(start).map_or(self.end, |t| t.0),
                        msg: format!("unknown function `{}`/{}", name, a.len()),
                    }),
                }
            }
        }
    }
}

/// Parses the surface expression syntax shared by both assertion languages.
pub fn parse_expr(src: &str) -> Result<CostExpr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.len() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}
