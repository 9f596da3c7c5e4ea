use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::normal::{Monomial, NormalForm};
use super::{normalize, CostExpr};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
    #[error("not an exponential in `{0}`: {1}")]
    NotExponential(String, String),
}

const FACTORIAL_CACHE: usize = 64;

/// `n!`, cached for small `n`.
pub fn factorial(n: u32) -> BigInt {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![BigInt::one()];
        for i in 1..FACTORIAL_CACHE {
            let next = &t[i - 1] * BigInt::from(i);
            t.push(next);
        }
        t
    });
    match table.get(n as usize) {
        Some(f) => f.clone(),
        None => (FACTORIAL_CACHE as u32..=n).fold(table[FACTORIAL_CACHE - 1].clone(), |acc, i| acc * BigInt::from(i)),
    }
}

fn ln_of(b: &CostExpr) -> CostExpr {
    match b {
        CostExpr::Euler => CostExpr::int(1),
        _ => CostExpr::ln(b.clone()),
    }
}

fn d(e: &CostExpr, x: &str) -> Result<CostExpr, CalcError> {
    use CostExpr::*;
    if !e.has_var(x) {
        return Ok(CostExpr::zero());
    }
    Ok(match e {
        Const(_) | Euler => CostExpr::zero(),
        Var(_) => CostExpr::int(1),
        Add(a, b) => d(a, x)? + d(b, x)?,
        Sub(a, b) => d(a, x)? - d(b, x)?,
        Mul(a, b) => d(a, x)? * (**b).clone() + (**a).clone() * d(b, x)?,
        Div(a, b) => {
            let num = d(a, x)? * (**b).clone() - (**a).clone() * d(b, x)?;
            num / CostExpr::pow((**b).clone(), CostExpr::int(2))
        }
        Power(b, p) => {
            if !p.has_var(x) {
                (**p).clone() * CostExpr::pow((**b).clone(), (**p).clone() - CostExpr::int(1)) * d(b, x)?
            } else if !b.has_var(x) {
                ln_of(b) * e.clone() * d(p, x)?
            } else {
                e.clone() * (d(p, x)? * ln_of(b) + (**p).clone() * d(b, x)? / (**b).clone())
            }
        }
        Log(b, a) => {
            if b.has_var(x) {
                let q = ln_of(a) / ln_of(b);
                return d(&q, x);
            }
            d(a, x)? / ((**a).clone() * ln_of(b))
        }
        FallingPower(..) => d(&normalize(e), x)?,
        Summation { index, lo, hi, body } if !lo.has_var(x) && !hi.has_var(x) && index != x => {
            CostExpr::Summation { index: index.clone(), lo: lo.clone(), hi: hi.clone(), body: Box::new(d(body, x)?) }
        }
        _ => return Err(CalcError::UnsupportedForm(e.to_string())),
    })
}

/// Symbolic derivative with respect to `x`, normalized. Logarithms of constants stay symbolic.
pub fn differentiate(e: &CostExpr, x: &str) -> Result<CostExpr, CalcError> {
    Ok(normalize(&d(e, x)?))
}

fn shift(e: &CostExpr, x: &str) -> CostExpr {
    e.substitute(x, &(CostExpr::var(x) + CostExpr::int(1)))
}

/// Forward difference `e[x+1] - e[x]` using the finite-calculus rules when they apply.
pub fn discrete_derivative(e: &CostExpr, x: &str) -> CostExpr {
    use CostExpr::*;
    match e {
        FallingPower(a, m) if **a == Var(x.to_string()) => {
            if *m == 0 {
                CostExpr::zero()
            } else {
                CostExpr::int(*m as i64) * CostExpr::falling(Var(x.to_string()), m - 1)
            }
        }
        Add(a, b) => discrete_derivative(a, x) + discrete_derivative(b, x),
        Sub(a, b) => discrete_derivative(a, x) - discrete_derivative(b, x),
        Mul(c, u) if matches!(**c, Const(_)) => (**c).clone() * discrete_derivative(u, x),
        _ => normalize(&delta_nf(&NormalForm::from_expr(e), x).to_expr()),
    }
}

fn delta_nf(nf: &NormalForm, x: &str) -> NormalForm {
    let mut out = NormalForm::default();
    for (m, c) in &nf.terms {
        let term = NormalForm::monomial(m.clone(), c.clone());
        let k = m.powers.get(x).copied().unwrap_or(0);
        let opaque_dep = m.factors.keys().any(|f| f.has_var(x));
        if !m.mentions(x) {
            continue;
        }
        if opaque_dep || k < 0 {
            let e = term.to_expr();
            out = out.add(&NormalForm::from_expr(&(shift(&e, x) - e)));
            continue;
        }
        let mut rest = m.clone();
        rest.powers.remove(x);
        let base = rest.exps.remove(x);
        let u = NormalForm::var(x).pow_int(k as u32);
        let du = NormalForm::var(x).add(&NormalForm::constant(Rational::one())).pow_int(k as u32).sub(&u);
        let rest = NormalForm::monomial(rest, c.clone());
        let piece = match base {
            None => du,
            Some(b) => {
                let mut em = Monomial::default();
                em.exps.insert(x.to_string(), b.clone());
                let v = NormalForm::monomial(em, Rational::one());
                // product rule: v(x+1) du + u dv
                let v_next = v.scale(&b);
                let dv = v.scale(&(&b - Rational::one()));
                v_next.mul(&du).add(&u.mul(&dv))
            }
        };
        out = out.add(&rest.mul(&piece));
    }
    out
}

/// Ascending exact coefficients when `e` is a polynomial in `x` alone.
pub fn as_polynomial(e: &CostExpr, x: &str) -> Option<Vec<Rational>> {
    poly_of(&NormalForm::from_expr(e), x)
}

pub fn poly_of(nf: &NormalForm, x: &str) -> Option<Vec<Rational>> {
    let mut coeffs = vec![Rational::zero()];
    for (m, c) in &nf.terms {
        if !m.exps.is_empty() || !m.factors.is_empty() {
            return None;
        }
        let k = match m.powers.len() {
            0 => 0,
            1 => {
                let (v, k) = m.powers.iter().next().unwrap();
                if v != x || *k < 0 {
                    return None;
                }
                *k as usize
            }
            _ => return None,
        };
        if coeffs.len() <= k {
            coeffs.resize(k + 1, Rational::zero());
        }
        coeffs[k] = c.clone();
    }
    Some(coeffs)
}

/// Order-`order` Maclaurin polynomial of `a^g(x)` with `g` polynomial in `x`.
pub fn taylor_exponential(e: &CostExpr, x: &str, order: u32) -> Result<CostExpr, CalcError> {
    let not_exp = || CalcError::NotExponential(x.to_string(), e.to_string());
    let (base, g) = match e {
        CostExpr::Power(b, g) if !b.has_var(x) => (b, g),
        _ => return Err(not_exp()),
    };
    if as_polynomial(g, x).is_none() {
        return Err(not_exp());
    }
    let log_a = match &**base {
        CostExpr::Euler => None,
        CostExpr::Const(q) if *q > Rational::zero() => Some(CostExpr::ln(CostExpr::Const(q.clone()))),
        _ => return Err(not_exp()),
    };
    let mut acc = NormalForm::default();
    let gn = NormalForm::from_expr(g);
    let ln_nf = log_a.as_ref().map(NormalForm::from_expr);
    for n in 0..=order {
        let mut term = gn.pow_int(n).scale(&Rational::new(BigInt::one(), factorial(n)));
        if let Some(l) = &ln_nf {
            term = term.mul(&l.pow_int(n));
        }
        acc = acc.add(&term);
    }
    Ok(acc.to_expr())
}
