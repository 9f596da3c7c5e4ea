use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::CostExpr;
use crate::rational::{self, Rational};

/// Extended real value. `Approx` marks a floating result of an irrational operation.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtReal {
    Exact(Rational),
    Approx(f64),
    PosInf,
    NegInf,
}

impl ExtReal {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Exact(q) => rational::to_f64(q),
            ExtReal::Approx(x) => *x,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            ExtReal::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ExtReal::Exact(_))
    }

    fn from_f64(x: f64) -> Result<ExtReal, EvalError> {
        if x.is_nan() {
            Err(EvalError::DomainError("undefined floating result".into()))
        } else if x == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Approx(x))
        }
    }

    /// Total order on values; exact pairs compare exactly.
    pub fn compare(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (ExtReal::Exact(a), ExtReal::Exact(b)) => a.cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("min/max over an empty or unordered argument list")]
    MinMaxUnsupported,
}

pub type Env = BTreeMap<String, Rational>;

const MAX_EXACT_EXPONENT: u64 = 1 << 14;
const MAX_EXACT_BITS: u64 = 1 << 20;
const MAX_LOOP: u64 = 10_000_000;

fn domain<T>(msg: &str) -> Result<T, EvalError> {
    Err(EvalError::DomainError(msg.to_string()))
}

fn float_op(a: &ExtReal, b: &ExtReal, op: fn(f64, f64) -> f64) -> Result<ExtReal, EvalError> {
    ExtReal::from_f64(op(a.to_f64(), b.to_f64()))
}

fn add(a: ExtReal, b: ExtReal) -> Result<ExtReal, EvalError> {
    match (&a, &b) {
        (ExtReal::Exact(x), ExtReal::Exact(y)) => Ok(ExtReal::Exact(x + y)),
        _ => float_op(&a, &b, |x, y| x + y),
    }
}

fn neg(a: ExtReal) -> ExtReal {
    match a {
        ExtReal::Exact(x) => ExtReal::Exact(-x),
        ExtReal::Approx(x) => ExtReal::Approx(-x),
        ExtReal::PosInf => ExtReal::NegInf,
        ExtReal::NegInf => ExtReal::PosInf,
    }
}

fn mul(a: ExtReal, b: ExtReal) -> Result<ExtReal, EvalError> {
    match (&a, &b) {
        (ExtReal::Exact(x), ExtReal::Exact(y)) => Ok(ExtReal::Exact(x * y)),
        (ExtReal::Exact(x), _) | (_, ExtReal::Exact(x)) if x.is_zero() => {
            if matches!(a, ExtReal::PosInf | ExtReal::NegInf) || matches!(b, ExtReal::PosInf | ExtReal::NegInf) {
                domain("zero times infinity")
            } else {
                Ok(ExtReal::Exact(Rational::zero()))
            }
        }
        _ => float_op(&a, &b, |x, y| x * y),
    }
}

fn div(a: ExtReal, b: ExtReal) -> Result<ExtReal, EvalError> {
    if b.to_f64() == 0.0 && b.exact().map_or(true, |q| q.is_zero()) {
        return domain("division by zero");
    }
    match (&a, &b) {
        (ExtReal::Exact(x), ExtReal::Exact(y)) => Ok(ExtReal::Exact(x / y)),
        _ => float_op(&a, &b, |x, y| x / y),
    }
}

fn exact_pow(base: &Rational, k: &BigInt) -> Option<Rational> {
    let mag = k.abs().to_u64()?;
    if mag > MAX_EXACT_EXPONENT {
        return None;
    }
    let bits = base.numer().bits().max(base.denom().bits()).max(1);
    if bits.saturating_mul(mag) > MAX_EXACT_BITS {
        return None;
    }
    // a reduced fraction stays reduced under powers
    let p = Rational::new_raw(base.numer().pow(mag as u32), base.denom().pow(mag as u32));
    if k.is_negative() {
        if p.is_zero() {
            None
        } else {
            Some(p.recip())
        }
    } else {
        Some(p)
    }
}

fn pow(b: ExtReal, e: ExtReal) -> Result<ExtReal, EvalError> {
    if let (ExtReal::Exact(base), ExtReal::Exact(exp)) = (&b, &e) {
        if exp.is_integer() {
            if base.is_zero() && exp.is_negative() {
                return domain("zero to a negative power");
            }
            if let Some(q) = exact_pow(base, &exp.to_integer()) {
                return Ok(ExtReal::Exact(q));
            }
        } else if base.is_negative() {
            return domain("negative base with fractional exponent");
        }
        if base.is_one() {
            return Ok(ExtReal::Exact(Rational::one()));
        }
    }
    let (x, y) = (b.to_f64(), e.to_f64());
    if x < 0.0 && y.fract() != 0.0 && y.is_finite() {
        return domain("negative base with fractional exponent");
    }
    ExtReal::from_f64(x.powf(y))
}

fn exact_log(base: &Rational, arg: &Rational) -> Option<Rational> {
    if arg.is_one() {
        return Some(Rational::zero());
    }
    let k = (rational::to_f64(arg).ln() / rational::to_f64(base).ln()).round();
    if !k.is_finite() || k.abs() > 4096.0 {
        return None;
    }
    let kq = BigInt::from(k as i64);
    (exact_pow(base, &kq).as_ref() == Some(arg)).then(|| Rational::from_integer(kq))
}

fn log(b: ExtReal, a: ExtReal) -> Result<ExtReal, EvalError> {
    let (bf, af) = (b.to_f64(), a.to_f64());
    if a.exact().map_or(af <= 0.0, |q| !q.is_positive()) {
        return domain("logarithm of a non-positive value");
    }
    if b.exact().map_or(bf <= 0.0, |q| !q.is_positive()) || b.exact().map_or(bf == 1.0, |q| q.is_one()) {
        return domain("invalid logarithm base");
    }
    if let (ExtReal::Exact(bq), ExtReal::Exact(aq)) = (&b, &a) {
        if let Some(k) = exact_log(bq, aq) {
            return Ok(ExtReal::Exact(k));
        }
    }
    if let ExtReal::Exact(aq) = &a {
        if aq.is_one() {
            return Ok(ExtReal::Exact(Rational::zero()));
        }
    }
    ExtReal::from_f64(af.ln() / bf.ln())
}

fn bound_int(v: &ExtReal, ceil: bool) -> Result<i64, EvalError> {
    let q = match v {
        ExtReal::Exact(q) => {
            if ceil {
                q.ceil()
            } else {
                q.floor()
            }
        }
        ExtReal::Approx(x) => {
            let r = if ceil { x.ceil() } else { x.floor() };
            rational::from_f64(r).ok_or(EvalError::DomainError("bad bound".into()))?
        }
        _ => return domain("infinite summation bound"),
    };
    q.to_integer().to_i64().ok_or(EvalError::DomainError("summation bound out of range".into()))
}

/// Evaluates `e` under `env`, exactly wherever every operation stays rational.
pub fn evaluate(e: &CostExpr, env: &Env) -> Result<ExtReal, EvalError> {
    use CostExpr::*;
    match e {
        Const(q) => Ok(ExtReal::Exact(q.clone())),
        Euler => Ok(ExtReal::Approx(std::f64::consts::E)),
        Var(v) => env.get(v).cloned().map(ExtReal::Exact).ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        Add(a, b) => add(evaluate(a, env)?, evaluate(b, env)?),
        Sub(a, b) => add(evaluate(a, env)?, neg(evaluate(b, env)?)),
        Mul(a, b) => mul(evaluate(a, env)?, evaluate(b, env)?),
        Div(a, b) => div(evaluate(a, env)?, evaluate(b, env)?),
        Power(b, x) => {
            if matches!(**b, Euler) {
                let y = evaluate(x, env)?;
                if y.exact().map_or(false, |q| q.is_zero()) {
                    return Ok(ExtReal::Exact(Rational::one()));
                }
                return ExtReal::from_f64(y.to_f64().exp());
            }
            pow(evaluate(b, env)?, evaluate(x, env)?)
        }
        Log(b, a) => {
            let arg = evaluate(a, env)?;
            if matches!(**b, Euler) {
                return log(ExtReal::Approx(std::f64::consts::E), arg);
            }
            log(evaluate(b, env)?, arg)
        }
        Summation { index, lo, hi, body } | Product { index, lo, hi, body } => {
            let is_sum = matches!(e, Summation { .. });
            let l = bound_int(&evaluate(lo, env)?, true)?;
            let h = bound_int(&evaluate(hi, env)?, false)?;
            if h >= l && (h - l) as u64 >= MAX_LOOP {
                return domain("iteration range too large");
            }
            let mut acc = ExtReal::Exact(if is_sum { Rational::zero() } else { Rational::one() });
            let mut inner = env.clone();
            for i in l..=h {
                inner.insert(index.clone(), rational::int(i));
                let v = evaluate(body, &inner)?;
                acc = if is_sum { add(acc, v)? } else { mul(acc, v)? };
            }
            Ok(acc)
        }
        FallingPower(a, k) => {
            let x = evaluate(a, env)?;
            let mut acc = ExtReal::Exact(Rational::one());
            for i in 0..*k {
                acc = mul(acc, add(x.clone(), ExtReal::Exact(rational::int(-(i as i64))))?)?;
            }
            Ok(acc)
        }
        MinOf(xs) | MaxOf(xs) => {
            let want = if matches!(e, MinOf(_)) { Ordering::Less } else { Ordering::Greater };
            let mut best: Option<ExtReal> = None;
            for x in xs {
                let v = evaluate(x, env)?;
                best = Some(match best {
                    Some(b) if v.compare(&b) != want => b,
                    _ => v,
                });
            }
            best.ok_or(EvalError::MinMaxUnsupported)
        }
    }
}

/// Floating evaluation with a single free variable; NaN outside the domain.
pub fn eval_f64(e: &CostExpr, var: &str, x: f64) -> f64 {
    let mut locals = vec![(var.to_string(), x)];
    go_f64(e, &mut locals)
}

fn go_f64(e: &CostExpr, locals: &mut Vec<(String, f64)>) -> f64 {
    use CostExpr::*;
    match e {
        Const(q) => rational::to_f64(q),
        Euler => std::f64::consts::E,
        Var(v) => locals.iter().rev().find(|(n, _)| n == v).map_or(f64::NAN, |(_, x)| *x),
        Add(a, b) => go_f64(a, locals) + go_f64(b, locals),
        Sub(a, b) => go_f64(a, locals) - go_f64(b, locals),
        Mul(a, b) => go_f64(a, locals) * go_f64(b, locals),
        Div(a, b) => {
            let d = go_f64(b, locals);
            if d == 0.0 {
                f64::NAN
            } else {
                go_f64(a, locals) / d
            }
        }
        Power(b, x) => {
            let (base, y) = (go_f64(b, locals), go_f64(x, locals));
            if base < 0.0 && y.fract() != 0.0 {
                f64::NAN
            } else if y.fract() == 0.0 && y.abs() < 2048.0 {
                base.powi(y as i32)
            } else {
                base.powf(y)
            }
        }
        Log(b, a) => {
            let (base, arg) = (go_f64(b, locals), go_f64(a, locals));
            if arg <= 0.0 || base <= 0.0 || base == 1.0 {
                f64::NAN
            } else {
                arg.ln() / base.ln()
            }
        }
        Summation { index, lo, hi, body } | Product { index, lo, hi, body } => {
            let is_sum = matches!(e, Summation { .. });
            let (l, h) = (go_f64(lo, locals).ceil(), go_f64(hi, locals).floor());
            if !(l.is_finite() && h.is_finite()) || h - l > MAX_LOOP as f64 {
                return f64::NAN;
            }
            let mut acc = if is_sum { 0.0 } else { 1.0 };
            let mut i = l;
            while i <= h {
                locals.push((index.clone(), i));
                let v = go_f64(body, locals);
                locals.pop();
                acc = if is_sum { acc + v } else { acc * v };
                i += 1.0;
            }
            acc
        }
        FallingPower(a, k) => {
            let x = go_f64(a, locals);
            (0..*k).fold(1.0, |acc, i| acc * (x - i as f64))
        }
        MinOf(xs) => xs.iter().map(|x| go_f64(x, locals)).fold(f64::INFINITY, f64::min),
        MaxOf(xs) => xs.iter().map(|x| go_f64(x, locals)).fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn at(src: &str, x: i64) -> Result<ExtReal, EvalError> {
        let env: Env = [("x".to_string(), rational::int(x))].into_iter().collect();
        evaluate(&parse_expr(src).unwrap(), &env)
    }

    #[test]
    fn exact_where_rational() {
        assert_eq!(at("exp(2,x)-1000", 10).unwrap(), ExtReal::Exact(rational::int(24)));
        assert_eq!(at("sum(i,1,x,i)", 4).unwrap(), ExtReal::Exact(rational::int(10)));
        assert_eq!(at("log(2,x/8)+4", 16).unwrap(), ExtReal::Exact(rational::int(5)));
        assert_eq!(at("exp(-0.62,x)", 2).unwrap(), ExtReal::Exact(rational::ratio(3844, 10000)));
        assert!(matches!(at("log(2,x)", 3).unwrap(), ExtReal::Approx(_)));
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(at("sum(i,1,x,i)", 0).unwrap(), ExtReal::Exact(rational::int(0)));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(at("log(2,x)", 0), Err(EvalError::DomainError(_))));
        assert!(matches!(at("1/x", 0), Err(EvalError::DomainError(_))));
        assert!(matches!(evaluate(&parse_expr("y").unwrap(), &Env::new()), Err(EvalError::UnboundVariable(_))));
    }

    #[test]
    fn float_path_agrees() {
        let e = parse_expr("1.45*exp(1.62,x)+0.55*exp(-0.62,x)-1").unwrap();
        for n in 0..20 {
            let exact = at("1.45*exp(1.62,x)+0.55*exp(-0.62,x)-1", n).unwrap().to_f64();
            let fast = eval_f64(&e, "x", n as f64);
            assert!((exact - fast).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }
}
