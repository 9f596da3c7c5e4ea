//! Cost expressions over size variables.

mod calculus;
mod eval;
mod fast;
mod normal;
mod parse;
mod print;

use std::collections::BTreeSet;

use crate::rational::{self, Rational};

pub use calculus::{as_polynomial, poly_of as poly_coeffs, differentiate, discrete_derivative, factorial, taylor_exponential, CalcError};
pub use eval::{eval_f64, evaluate, Env, EvalError, ExtReal};
pub use fast::{Compiled, Term};
pub use normal::{normalize, Monomial, NormalForm};
pub use parse::{parse_expr, ParseError};
pub use print::{render, Syntax};

/// Symbolic cost function. Constants are exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostExpr {
    Const(Rational),
    /// Euler's number, used as the base of natural exponentials and logarithms.
    Euler,
    Var(String),
    Add(Box<CostExpr>, Box<CostExpr>),
    Sub(Box<CostExpr>, Box<CostExpr>),
    Mul(Box<CostExpr>, Box<CostExpr>),
    Div(Box<CostExpr>, Box<CostExpr>),
    Power(Box<CostExpr>, Box<CostExpr>),
    /// `Log(base, arg)`.
    Log(Box<CostExpr>, Box<CostExpr>),
    Summation { index: String, lo: Box<CostExpr>, hi: Box<CostExpr>, body: Box<CostExpr> },
    Product { index: String, lo: Box<CostExpr>, hi: Box<CostExpr>, body: Box<CostExpr> },
    /// `x(x-1)...(x-k+1)`.
    FallingPower(Box<CostExpr>, u32),
    MinOf(Vec<CostExpr>),
    MaxOf(Vec<CostExpr>),
}

impl CostExpr {
    pub fn int(n: i64) -> Self {
        CostExpr::Const(rational::int(n))
    }

    pub fn rat(q: Rational) -> Self {
        CostExpr::Const(q)
    }

    pub fn var(name: &str) -> Self {
        CostExpr::Var(name.to_string())
    }

    pub fn zero() -> Self {
        CostExpr::int(0)
    }

    pub fn pow(base: CostExpr, exp: CostExpr) -> Self {
        CostExpr::Power(Box::new(base), Box::new(exp))
    }

    pub fn log(base: CostExpr, arg: CostExpr) -> Self {
        CostExpr::Log(Box::new(base), Box::new(arg))
    }

    pub fn ln(arg: CostExpr) -> Self {
        CostExpr::Log(Box::new(CostExpr::Euler), Box::new(arg))
    }

    pub fn falling(arg: CostExpr, k: u32) -> Self {
        CostExpr::FallingPower(Box::new(arg), k)
    }

    pub fn sum(index: &str, lo: CostExpr, hi: CostExpr, body: CostExpr) -> Self {
        CostExpr::Summation { index: index.to_string(), lo: Box::new(lo), hi: Box::new(hi), body: Box::new(body) }
            .rename_apart()
    }

    pub fn prod(index: &str, lo: CostExpr, hi: CostExpr, body: CostExpr) -> Self {
        CostExpr::Product { index: index.to_string(), lo: Box::new(lo), hi: Box::new(hi), body: Box::new(body) }
            .rename_apart()
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            CostExpr::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn has_var(&self, v: &str) -> bool {
        self.free_vars().contains(v)
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            CostExpr::Const(_) | CostExpr::Euler => {}
            CostExpr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            CostExpr::Add(a, b)
            | CostExpr::Sub(a, b)
            | CostExpr::Mul(a, b)
            | CostExpr::Div(a, b)
            | CostExpr::Power(a, b)
            | CostExpr::Log(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            CostExpr::Summation { index, lo, hi, body } | CostExpr::Product { index, lo, hi, body } => {
                lo.collect_free(bound, out);
                hi.collect_free(bound, out);
                bound.push(index.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            CostExpr::FallingPower(a, _) => a.collect_free(bound, out),
            CostExpr::MinOf(xs) | CostExpr::MaxOf(xs) => {
                for x in xs {
                    x.collect_free(bound, out);
                }
            }
        }
    }

    /// True if any node satisfies `pred`.
    pub fn any(&self, pred: &dyn Fn(&CostExpr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().iter().any(|c| c.any(pred))
    }

    pub fn children(&self) -> Vec<&CostExpr> {
        match self {
            CostExpr::Const(_) | CostExpr::Euler | CostExpr::Var(_) => vec![],
            CostExpr::Add(a, b)
            | CostExpr::Sub(a, b)
            | CostExpr::Mul(a, b)
            | CostExpr::Div(a, b)
            | CostExpr::Power(a, b)
            | CostExpr::Log(a, b) => vec![a, b],
            CostExpr::Summation { lo, hi, body, .. } | CostExpr::Product { lo, hi, body, .. } => vec![lo, hi, body],
            CostExpr::FallingPower(a, _) => vec![a],
            CostExpr::MinOf(xs) | CostExpr::MaxOf(xs) => xs.iter().collect(),
        }
    }

    /// Rebuilds the node with `f` applied to each direct child.
    pub fn map_children(&self, f: &mut dyn FnMut(&CostExpr) -> CostExpr) -> CostExpr {
        use CostExpr::*;
        let b = |e: CostExpr| Box::new(e);
        match self {
            Const(_) | Euler | Var(_) => self.clone(),
            Add(x, y) => Add(b(f(x)), b(f(y))),
            Sub(x, y) => Sub(b(f(x)), b(f(y))),
            Mul(x, y) => Mul(b(f(x)), b(f(y))),
            Div(x, y) => Div(b(f(x)), b(f(y))),
            Power(x, y) => Power(b(f(x)), b(f(y))),
            Log(x, y) => Log(b(f(x)), b(f(y))),
            Summation { index, lo, hi, body } => {
                Summation { index: index.clone(), lo: b(f(lo)), hi: b(f(hi)), body: b(f(body)) }
            }
            Product { index, lo, hi, body } => {
                Product { index: index.clone(), lo: b(f(lo)), hi: b(f(hi)), body: b(f(body)) }
            }
            FallingPower(x, k) => FallingPower(b(f(x)), *k),
            MinOf(xs) => MinOf(xs.iter().map(|x| f(x)).collect()),
            MaxOf(xs) => MaxOf(xs.iter().map(|x| f(x)).collect()),
        }
    }

    /// Capture-avoiding substitution of `var` by `by`.
    pub fn substitute(&self, var: &str, by: &CostExpr) -> CostExpr {
        match self {
            CostExpr::Var(v) if v == var => by.clone(),
            CostExpr::Summation { index, lo, hi, body } | CostExpr::Product { index, lo, hi, body } => {
                let lo = lo.substitute(var, by);
                let hi = hi.substitute(var, by);
                let (index, body) = if index == var {
                    (index.clone(), (**body).clone())
                } else if by.has_var(index) {
                    let mut avoid = by.free_vars();
                    avoid.extend(body.free_vars());
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(index, &avoid);
                    let renamed = body.substitute(index, &CostExpr::Var(fresh.clone()));
                    (fresh, renamed.substitute(var, by))
                } else {
                    (index.clone(), body.substitute(var, by))
                };
                let (lo, hi, body) = (Box::new(lo), Box::new(hi), Box::new(body));
                if matches!(self, CostExpr::Summation { .. }) {
                    CostExpr::Summation { index, lo, hi, body }
                } else {
                    CostExpr::Product { index, lo, hi, body }
                }
            }
            _ => self.map_children(&mut |c| c.substitute(var, by)),
        }
    }

    /// Renames binders so that no index shadows a free variable or an outer index.
    pub fn rename_apart(&self) -> CostExpr {
        let free = self.free_vars();
        self.rename_in(&mut free.iter().cloned().collect())
    }

    fn rename_in(&self, scope: &mut Vec<String>) -> CostExpr {
        match self {
            CostExpr::Summation { index, lo, hi, body } | CostExpr::Product { index, lo, hi, body } => {
                let lo = lo.rename_in(scope);
                let hi = hi.rename_in(scope);
                let (index, body) = if scope.contains(index) {
                    let mut avoid: BTreeSet<String> = scope.iter().cloned().collect();
                    avoid.extend(body.free_vars());
                    let fresh = fresh_name(index, &avoid);
                    (fresh.clone(), body.substitute(index, &CostExpr::Var(fresh)))
                } else {
                    (index.clone(), (**body).clone())
                };
                scope.push(index.clone());
                let body = body.rename_in(scope);
                scope.pop();
                let (lo, hi, body) = (Box::new(lo), Box::new(hi), Box::new(body));
                if matches!(self, CostExpr::Summation { .. }) {
                    CostExpr::Summation { index, lo, hi, body }
                } else {
                    CostExpr::Product { index, lo, hi, body }
                }
            }
            _ => self.map_children(&mut |c| c.rename_in(scope)),
        }
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{}_{}", base, i))
        .find(|n| !avoid.contains(n))
        .expect("unbounded name supply")
}

macro_rules! binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl std::ops::$tr for CostExpr {
            type Output = CostExpr;
            fn $m(self, rhs: CostExpr) -> CostExpr {
                CostExpr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::fmt::Display for CostExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render(self, Syntax::Ciao))
    }
}

impl std::str::FromStr for CostExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}
