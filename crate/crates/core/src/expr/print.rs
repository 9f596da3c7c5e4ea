use num_traits::{One, Signed};

use super::CostExpr;
use crate::rational;

/// Concrete syntax used when printing. The two differ only in how powers are spelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Syntax {
    /// `exp(B,E)`
    Ciao,
    /// `power(B,E)`
    Xc,
}

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const ATOM: u8 = 4;

pub fn render(e: &CostExpr, syn: Syntax) -> String {
    go(e, syn).0
}

fn wrap(child: (String, u8), min: u8, allow_minus: bool) -> String {
    let (text, prec) = child;
    if prec < min || (!allow_minus && text.starts_with('-')) {
        format!("({})", text)
    } else {
        text
    }
}

fn list(xs: &[&CostExpr], syn: Syntax) -> String {
    xs.iter().map(|x| go(x, syn).0).collect::<Vec<_>>().join(",")
}

fn go(e: &CostExpr, syn: Syntax) -> (String, u8) {
    use CostExpr::*;
    match e {
        Const(q) => {
            if rational::is_decimal_text(q) {
                (rational::format(q), ATOM)
            } else {
                (format!("({})", rational::format(q)), ATOM)
            }
        }
        Euler => ("euler".into(), ATOM),
        Var(v) => (v.clone(), ATOM),
        Add(a, b) => (format!("{}+{}", wrap(go(a, syn), SUM, true), wrap(go(b, syn), PRODUCT, false)), SUM),
        Sub(a, b) => (format!("{}-{}", wrap(go(a, syn), SUM, true), wrap(go(b, syn), PRODUCT, false)), SUM),
        Mul(a, b) => {
            if let Const(q) = &**a {
                if q.is_negative() && (-q).is_one() {
                    let inner = go(b, syn);
                    let inner = if matches!(&**b, Const(_)) { format!("({})", inner.0) } else { wrap(inner, ATOM, false) };
                    return (format!("-{}", inner), PRODUCT);
                }
            }
            (format!("{}*{}", wrap(go(a, syn), PRODUCT, true), wrap(go(b, syn), ATOM, false)), PRODUCT)
        }
        Div(a, b) => {
            let left = go(a, syn);
            let left = if matches!((&**a, &**b), (Const(_), Const(_))) && !left.0.starts_with('(') {
                format!("({})", left.0)
            } else {
                wrap(left, PRODUCT, true)
            };
            (format!("{}/{}", left, wrap(go(b, syn), ATOM, false)), PRODUCT)
        }
        Power(b, x) => match (&**b, syn) {
            (Euler, _) => (format!("exp({})", go(x, syn).0), ATOM),
            (_, Syntax::Ciao) => (format!("exp({})", list(&[b, x], syn)), ATOM),
            (_, Syntax::Xc) => (format!("power({})", list(&[b, x], syn)), ATOM),
        },
        Log(b, a) => match &**b {
            Euler => (format!("ln({})", go(a, syn).0), ATOM),
            _ => (format!("log({})", list(&[b, a], syn)), ATOM),
        },
        Summation { index, lo, hi, body } => {
            (format!("sum({},{})", index, list(&[lo, hi, body], syn)), ATOM)
        }
        Product { index, lo, hi, body } => {
            (format!("prod({},{})", index, list(&[lo, hi, body], syn)), ATOM)
        }
        FallingPower(a, k) => (format!("fall({},{})", go(a, syn).0, k), ATOM),
        MinOf(xs) => (format!("min({})", list(&xs.iter().collect::<Vec<_>>(), syn)), ATOM),
        MaxOf(xs) => (format!("max({})", list(&xs.iter().collect::<Vec<_>>(), syn)), ATOM),
    }
}
