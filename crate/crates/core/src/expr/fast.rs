use std::cmp::Ordering;

use num_traits::Zero;

use super::normal::NormalForm;
use super::{eval_f64, evaluate, CostExpr, Env, ExtReal};
use crate::rational::{self, Rational};

/// `coeff * x^degree * base^x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    /// Exact coefficient when the term has no irrational constant factor.
    pub exact: Option<Rational>,
    pub degree: i32,
    pub base: Rational,
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        let b = rational::to_f64(&self.base);
        let mut v = self.coeff;
        if self.degree != 0 {
            v *= x.powi(self.degree);
        }
        if b != 1.0 {
            v *= if x.fract() == 0.0 && x.abs() < 2048.0 { b.powi(x as i32) } else { b.powf(x) };
        }
        v
    }
}

/// Univariate function prepared for repeated floating evaluation.
#[derive(Clone, Debug)]
pub struct Compiled {
    var: String,
    expr: CostExpr,
    terms: Option<Vec<Term>>,
}

const MARGIN: f64 = 1e-10;

impl Compiled {
    pub fn new(e: &CostExpr, var: &str) -> Compiled {
        let nf = NormalForm::from_expr(e);
        Compiled { var: var.to_string(), expr: nf.to_expr(), terms: exp_poly_terms(&nf, var) }
    }

    pub fn expr(&self) -> &CostExpr {
        &self.expr
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    /// Terms when the function is a sum of `c * x^k * a^x`.
    pub fn terms(&self) -> Option<&[Term]> {
        self.terms.as_deref()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.terms {
            Some(ts) => ts.iter().map(|t| t.eval(x)).sum(),
            None => eval_f64(&self.expr, &self.var, x),
        }
    }

    /// Value together with the sum of absolute term values.
    pub fn eval_mag(&self, x: f64) -> (f64, f64) {
        match &self.terms {
            Some(ts) => ts.iter().map(|t| t.eval(x)).fold((0.0, 0.0), |(v, m), t| (v + t, m + t.abs())),
            None => {
                let v = self.eval(x);
                (v, v.abs())
            }
        }
    }

    pub fn exact_at(&self, n: u64) -> Option<ExtReal> {
        let env: Env = [(self.var.clone(), rational::from_u64(n))].into_iter().collect();
        evaluate(&self.expr, &env).ok()
    }

    /// Sign at a natural, trusted only when floating error cannot flip it.
    pub fn sign_at(&self, n: u64) -> Option<Ordering> {
        if let Some(ts) = &self.terms {
            let (v, m) = ts.iter().map(|t| t.eval(n as f64)).fold((0.0, 0.0), |(v, m), t| (v + t, m + t.abs()));
            if v.is_finite() && m.is_finite() && v.abs() > MARGIN * m {
                return v.partial_cmp(&0.0);
            }
        }
        match self.exact_at(n)? {
            ExtReal::Exact(q) => Some(q.cmp(&Rational::zero())),
            ExtReal::Approx(x) => {
                let scale = if self.terms.is_some() { self.eval_mag(n as f64).1 } else { x.abs() };
                (x.abs() > MARGIN * scale.max(f64::MIN_POSITIVE) && x.abs() > 1e-300).then(|| x.partial_cmp(&0.0)).flatten()
            }
            ExtReal::PosInf => Some(Ordering::Greater),
            ExtReal::NegInf => Some(Ordering::Less),
        }
    }
}

pub(crate) fn exp_poly_terms(nf: &NormalForm, var: &str) -> Option<Vec<Term>> {
    let mut out = Vec::new();
    for (m, c) in &nf.terms {
        if m.powers.keys().any(|v| v != var) || m.exps.keys().any(|v| v != var) {
            return None;
        }
        let mut coeff = rational::to_f64(c);
        let mut exact = Some(c.clone());
        for (f, mult) in &m.factors {
            if !f.free_vars().is_empty() {
                return None;
            }
            let v = evaluate(f, &Env::new()).ok()?;
            match v {
                ExtReal::Exact(q) => {
                    let q = num_traits::pow(q, *mult as usize);
                    coeff *= rational::to_f64(&q);
                    exact = exact.map(|e| e * q);
                }
                other => {
                    coeff *= other.to_f64().powi(*mult as i32);
                    exact = None;
                }
            }
        }
        if !coeff.is_finite() {
            return None;
        }
        let base = m.exps.get(var).cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
        if base.is_zero() {
            return None;
        }
        out.push(Term { coeff, exact, degree: m.powers.get(var).copied().unwrap_or(0), base });
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn certified_sign_matches_exact() {
        let f = Compiled::new(&parse_expr("exp(2,x) - x**4").unwrap(), "x");
        assert!(f.terms().is_some());
        assert_eq!(f.sign_at(16), Some(Ordering::Equal));
        assert_eq!(f.sign_at(17), Some(Ordering::Greater));
        assert_eq!(f.sign_at(10), Some(Ordering::Less));
    }
}
