//! Finite calculus: discrete antiderivatives and closed forms of summations.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::expr::{normalize, CostExpr, Monomial, NormalForm};
use crate::rational::Rational;

/// Result of a symbolic integration or summation elimination.
#[derive(Clone, Debug, PartialEq)]
pub enum IntegrationOutcome {
    Closed(CostExpr),
    Unsupported { subterm: CostExpr, reason: String },
}

impl IntegrationOutcome {
    pub fn closed(self) -> Option<CostExpr> {
        match self {
            IntegrationOutcome::Closed(e) => Some(e),
            IntegrationOutcome::Unsupported { .. } => None,
        }
    }
}

/// Stirling numbers of the second kind via `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling2(m: u32, k: u32) -> BigInt {
    if k > m {
        return BigInt::zero();
    }
    let mut row = vec![BigInt::zero(); k as usize + 1];
    row[0] = BigInt::one();
    for n in 1..=m as usize {
        for j in (1..=(k as usize).min(n)).rev() {
            row[j] = BigInt::from(j) * &row[j] + &row[j - 1];
        }
        row[0] = BigInt::zero();
    }
    row[k as usize].clone()
}

/// `x^m` as a combination of falling powers.
pub fn power_to_falling(var: &str, m: u32) -> CostExpr {
    let x = CostExpr::var(var);
    (0..=m)
        .filter_map(|k| {
            let s = stirling2(m, k);
            (!s.is_zero()).then(|| CostExpr::Const(Rational::from_integer(s)) * CostExpr::falling(x.clone(), k))
        })
        .reduce(|a, b| a + b)
        .unwrap_or_else(CostExpr::zero)
}

/// Falling power `x^(m)` expanded into ordinary powers.
pub fn falling_to_power(var: &str, m: u32) -> CostExpr {
    normalize(&CostExpr::falling(CostExpr::var(var), m))
}

type Failure = (CostExpr, String);

fn falling_nf(x: &str, k: u32) -> NormalForm {
    NormalForm::from_expr(&CostExpr::falling(CostExpr::var(x), k))
}

fn exp_nf(x: &str, b: &Rational) -> NormalForm {
    let mut m = Monomial::default();
    m.exps.insert(x.to_string(), b.clone());
    NormalForm::monomial(m, Rational::one())
}

/// Antiderivative of `x^k` or `x^k b^x`.
fn integrate_core(x: &str, k: u32, base: Option<&Rational>) -> NormalForm {
    match base {
        None => (0..=k).fold(NormalForm::default(), |acc, j| {
            let s = Rational::new(stirling2(k, j), BigInt::from(j + 1));
            acc.add(&falling_nf(x, j + 1).scale(&s))
        }),
        Some(b) => {
            let inv = (b - Rational::one()).recip();
            let v = exp_nf(x, b).scale(&inv);
            if k == 0 {
                return v;
            }
            // by parts with u = x^k: u v - sum v(x+1) du
            let u = NormalForm::var(x).pow_int(k);
            let shift = b * &inv;
            let mut rest = NormalForm::default();
            for j in 0..k {
                let c = Rational::from_integer(binomial(BigInt::from(k), BigInt::from(j)));
                rest = rest.add(&integrate_core(x, j, Some(b)).scale(&c));
            }
            u.mul(&v).sub(&rest.scale(&shift))
        }
    }
}

fn integrate_nf(nf: &NormalForm, x: &str) -> Result<NormalForm, Failure> {
    let mut out = NormalForm::default();
    for (m, c) in &nf.terms {
        let term = NormalForm::monomial(m.clone(), c.clone());
        if !m.mentions(x) {
            out = out.add(&term.mul(&NormalForm::var(x)));
            continue;
        }
        if let Some(f) = m.factors.keys().find(|f| f.has_var(x)) {
            return Err((f.clone(), format!("no finite-calculus rule for a factor depending on `{}`", x)));
        }
        let k = m.powers.get(x).copied().unwrap_or(0);
        if k < 0 {
            return Err((term.to_expr(), "negative power of the summation variable".into()));
        }
        let base = m.exps.get(x);
        let mut rest = m.clone();
        rest.powers.remove(x);
        rest.exps.remove(x);
        let piece = integrate_core(x, k as u32, base);
        out = out.add(&NormalForm::monomial(rest, c.clone()).mul(&piece));
    }
    Ok(out)
}

/// Indefinite sum: `F` with `F(x+1) - F(x) = e`.
pub fn discrete_integral(e: &CostExpr, x: &str) -> IntegrationOutcome {
    match integrate_nf(&NormalForm::from_expr(e), x) {
        Ok(nf) => IntegrationOutcome::Closed(nf.to_expr()),
        Err((subterm, reason)) => IntegrationOutcome::Unsupported { subterm, reason },
    }
}

fn eliminate(e: &CostExpr) -> Result<CostExpr, Failure> {
    match e {
        CostExpr::Summation { index, lo, hi, body } => {
            let (lo, hi, body) = (eliminate(lo)?, eliminate(hi)?, eliminate(body)?);
            let f = integrate_nf(&NormalForm::from_expr(&body), index)?.to_expr();
            let upper = f.substitute(index, &(hi + CostExpr::int(1)));
            let lower = f.substitute(index, &lo);
            Ok(normalize(&(upper - lower)))
        }
        _ => {
            let mut failure = None;
            let out = e.map_children(&mut |c| match eliminate(c) {
                Ok(v) => v,
                Err(err) => {
                    failure.get_or_insert(err);
                    c.clone()
                }
            });
            match failure {
                Some(err) => Err(err),
                None => Ok(out),
            }
        }
    }
}

/// Replaces every summation, innermost first, by `F(hi+1) - F(lo)`.
pub fn eliminate_summations(e: &CostExpr) -> IntegrationOutcome {
    match eliminate(e) {
        Ok(v) => IntegrationOutcome::Closed(v),
        Err((subterm, reason)) => IntegrationOutcome::Unsupported { subterm, reason },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn p(s: &str) -> CostExpr {
        parse_expr(s).unwrap()
    }

    fn same(a: &CostExpr, b: &str) {
        assert_eq!(normalize(a), normalize(&p(b)), "{} vs {}", a, b);
    }

    #[test]
    fn stirling_table() {
        assert_eq!(stirling2(3, 2), BigInt::from(3));
        assert_eq!(stirling2(5, 3), BigInt::from(25));
        assert_eq!(stirling2(0, 0), BigInt::one());
        assert_eq!(stirling2(4, 0), BigInt::zero());
    }

    #[test]
    fn falling_conversions() {
        same(&power_to_falling("x", 3), "fall(x,3) + 3*fall(x,2) + fall(x,1)");
        same(&falling_to_power("x", 3), "x**3 - 3*x**2 + 2*x");
    }

    #[test]
    fn integral_examples() {
        same(&discrete_integral(&p("x"), "x").closed().unwrap(), "x*(x-1)/2");
        same(&discrete_integral(&p("exp(2,x)"), "x").closed().unwrap(), "exp(2,x)");
        same(&discrete_integral(&p("x*exp(2,a-x)"), "x").closed().unwrap(), "-exp(2,a+1-x)*(x+1)");
        assert!(matches!(discrete_integral(&p("log(2,x)"), "x"), IntegrationOutcome::Unsupported { .. }));
    }

    #[test]
    fn summation_examples() {
        same(&eliminate_summations(&p("sum(i,1,n,i)")).closed().unwrap(), "n*(n+1)/2");
        same(&eliminate_summations(&p("sum(j,1,x,j*exp(2,x-j))")).closed().unwrap(), "exp(2,x+1) - x - 2");
        same(
            &eliminate_summations(&p("sum(j,1,x,j*exp(2,x-j)) + x*exp(2,x-1) + 2*exp(2,x) - 1")).closed().unwrap(),
            "4*exp(2,x) + x*exp(2,x-1) - x - 3",
        );
    }
}
