use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::CostExpr;
use crate::rational::{self, Rational};

/// Product of variable powers, exponentials `base^var` and opaque factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub powers: BTreeMap<String, i32>,
    pub exps: BTreeMap<String, Rational>,
    pub factors: BTreeMap<CostExpr, u32>,
}

impl Monomial {
    pub fn is_one(&self) -> bool {
        self.powers.is_empty() && self.exps.is_empty() && self.factors.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for (v, k) in &other.powers {
            let e = out.powers.entry(v.clone()).or_insert(0);
            *e += k;
            if *e == 0 {
                out.powers.remove(v);
            }
        }
        for (v, b) in &other.exps {
            let merged = out.exps.get(v).map_or_else(|| b.clone(), |a| a * b);
            if merged.is_one() {
                out.exps.remove(v);
            } else {
                out.exps.insert(v.clone(), merged);
            }
        }
        for (f, m) in &other.factors {
            *out.factors.entry(f.clone()).or_insert(0) += m;
        }
        out
    }

    fn inverse(&self) -> Option<Monomial> {
        if !self.factors.is_empty() {
            return None;
        }
        Some(Monomial {
            powers: self.powers.iter().map(|(v, k)| (v.clone(), -k)).collect(),
            exps: self.exps.iter().map(|(v, b)| (v.clone(), b.recip())).collect(),
            factors: BTreeMap::new(),
        })
    }

    /// True if `var` occurs anywhere in the monomial.
    pub fn mentions(&self, var: &str) -> bool {
        self.powers.contains_key(var) || self.exps.contains_key(var) || self.factors.keys().any(|f| f.has_var(var))
    }

    pub fn to_expr(&self) -> Option<CostExpr> {
        let mut parts = Vec::new();
        for (v, k) in &self.powers {
            let x = CostExpr::Var(v.clone());
            parts.push(match k {
                1 => x,
                k if *k > 1 => CostExpr::pow(x, CostExpr::int(*k as i64)),
                k => CostExpr::int(1) / CostExpr::pow(x, CostExpr::int(-*k as i64)).simplify_unit(),
            });
        }
        for (v, b) in &self.exps {
            parts.push(CostExpr::pow(CostExpr::Const(b.clone()), CostExpr::Var(v.clone())));
        }
        for (f, m) in &self.factors {
            parts.push(if *m == 1 { f.clone() } else { CostExpr::pow(f.clone(), CostExpr::int(*m as i64)) });
        }
        parts.into_iter().reduce(|a, b| a * b)
    }
}

impl CostExpr {
    fn simplify_unit(self) -> CostExpr {
        match &self {
            CostExpr::Power(b, e) if e.as_const().map_or(false, |q| q.is_one()) => (**b).clone(),
            _ => self,
        }
    }
}

/// Canonical sum of monomials with non-zero exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NormalForm {
    pub terms: BTreeMap<Monomial, Rational>,
}

const MAX_EXPAND: u32 = 64;

impl NormalForm {
    pub fn constant(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Monomial::default(), q);
        }
        NormalForm { terms }
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        NormalForm { terms }
    }

    pub fn var(v: &str) -> Self {
        let mut m = Monomial::default();
        m.powers.insert(v.to_string(), 1);
        Self::monomial(m, Rational::one())
    }

    fn opaque(e: CostExpr) -> Self {
        let mut m = Monomial::default();
        m.factors.insert(e, 1);
        Self::monomial(m, Rational::one())
    }

    fn exponential(var: &str, base: Rational) -> Self {
        if base.is_one() {
            return Self::constant(Rational::one());
        }
        let mut m = Monomial::default();
        m.exps.insert(var.to_string(), base);
        Self::monomial(m, Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::default()).cloned(),
            _ => None,
        }
    }

    /// Splits `c0 + sum k_v * v` when every term is constant or linear in one variable.
    pub fn as_affine(&self) -> Option<(Rational, BTreeMap<String, Rational>)> {
        let mut c0 = Rational::zero();
        let mut lin = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.is_one() {
                c0 = c.clone();
            } else if m.exps.is_empty() && m.factors.is_empty() && m.powers.len() == 1 {
                let (v, k) = m.powers.iter().next().unwrap();
                if *k != 1 {
                    return None;
                }
                lin.insert(v.clone(), c.clone());
            } else {
                return None;
            }
        }
        Some((c0, lin))
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let sum = out.terms.get(m).map_or_else(|| c.clone(), |a| a + c);
            if sum.is_zero() {
                out.terms.remove(m);
            } else {
                out.terms.insert(m.clone(), sum);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> NormalForm {
        if k.is_zero() {
            return NormalForm::default();
        }
        NormalForm { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn neg(&self) -> NormalForm {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        let mut out = NormalForm::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out = out.add(&NormalForm::monomial(m1.mul(m2), c1 * c2));
            }
        }
        out
    }

    pub fn pow_int(&self, k: u32) -> NormalForm {
        let mut out = NormalForm::constant(Rational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    fn inverse(&self) -> Option<NormalForm> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        Some(NormalForm::monomial(m.inverse()?, c.recip()))
    }

    pub fn to_expr(&self) -> CostExpr {
        let mut acc: Option<CostExpr> = None;
        for (m, c) in &self.terms {
            let body = m.to_expr();
            acc = Some(match acc {
                None => match body {
                    None => CostExpr::Const(c.clone()),
                    Some(b) if c.is_one() => b,
                    Some(b) => CostExpr::Const(c.clone()) * b,
                },
                Some(a) => {
                    let mag = c.abs();
                    let t = match body {
                        None => CostExpr::Const(mag),
                        Some(b) if mag.is_one() => b,
                        Some(b) => CostExpr::Const(mag) * b,
                    };
                    if c.is_negative() {
                        a - t
                    } else {
                        a + t
                    }
                }
            });
        }
        acc.unwrap_or_else(CostExpr::zero)
    }

    pub fn from_expr(e: &CostExpr) -> NormalForm {
        use CostExpr::*;
        match e {
            Const(q) => NormalForm::constant(q.clone()),
            Euler => NormalForm::opaque(Euler),
            Var(v) => NormalForm::var(v),
            Add(a, b) => Self::from_expr(a).add(&Self::from_expr(b)),
            Sub(a, b) => Self::from_expr(a).sub(&Self::from_expr(b)),
            Mul(a, b) => Self::from_expr(a).mul(&Self::from_expr(b)),
            Div(a, b) => {
                let nb = Self::from_expr(b);
                let na = Self::from_expr(a);
                match nb.inverse() {
                    Some(inv) => na.mul(&inv),
                    None => {
                        if na.is_zero() && !nb.is_zero() {
                            return na;
                        }
                        na.mul(&NormalForm::opaque(CostExpr::int(1) / nb.to_expr()))
                    }
                }
            }
            Power(b, x) => Self::power(b, x),
            Log(b, a) => {
                let nb = Self::from_expr(b);
                let na = Self::from_expr(a);
                if na.as_const().map_or(false, |q| q.is_one()) && !matches!(nb.as_const(), Some(q) if q.is_one() || !q.is_positive()) {
                    return NormalForm::default();
                }
                if let (Some(bq), Some(aq)) = (nb.as_const(), na.as_const()) {
                    if bq.is_positive() && !bq.is_one() && aq.is_positive() {
                        if let Some(k) = exact_log(&bq, &aq) {
                            return NormalForm::constant(k);
                        }
                    }
                }
                NormalForm::opaque(CostExpr::log(nb.to_expr(), na.to_expr()))
            }
            Summation { index, lo, hi, body } | Product { index, lo, hi, body } => {
                let (lo, hi, body) = (
                    Box::new(normalize(lo)),
                    Box::new(normalize(hi)),
                    Box::new(normalize(body)),
                );
                let index = index.clone();
                NormalForm::opaque(if matches!(e, Summation { .. }) {
                    Summation { index, lo, hi, body }
                } else {
                    Product { index, lo, hi, body }
                })
            }
            FallingPower(a, k) => {
                let na = Self::from_expr(a);
                (0..*k).fold(NormalForm::constant(Rational::one()), |acc, i| {
                    acc.mul(&na.sub(&NormalForm::constant(rational::int(i as i64))))
                })
            }
            MinOf(xs) | MaxOf(xs) => {
                let mut kids: Vec<CostExpr> = xs.iter().map(normalize).collect();
                kids.sort();
                kids.dedup();
                if kids.len() == 1 {
                    return Self::from_expr(&kids[0]);
                }
                if kids.iter().all(|k| k.as_const().is_some()) && !kids.is_empty() {
                    let vals = kids.iter().map(|k| k.as_const().unwrap().clone());
                    let pick = if matches!(e, MinOf(_)) { vals.min() } else { vals.max() };
                    return NormalForm::constant(pick.unwrap());
                }
                NormalForm::opaque(if matches!(e, MinOf(_)) { MinOf(kids) } else { MaxOf(kids) })
            }
        }
    }

    fn power(b: &CostExpr, x: &CostExpr) -> NormalForm {
        let nb = Self::from_expr(b);
        let nx = Self::from_expr(x);
        if let Some(q) = nx.as_const() {
            if q.is_integer() {
                let k = q.to_integer();
                if let Some(k) = k.to_i64() {
                    let mag = k.unsigned_abs() as u32;
                    let small = nb.terms.len() <= 1 || mag <= 12;
                    if k >= 0 && (k as u32) <= MAX_EXPAND && small {
                        if nb.as_const().map_or(true, |c| !c.is_zero() || k > 0) {
                            return nb.pow_int(k as u32);
                        }
                    }
                    if k < 0 && mag <= MAX_EXPAND {
                        if let Some(inv) = nb.inverse() {
                            return inv.pow_int(mag);
                        }
                    }
                }
            }
            return NormalForm::opaque(CostExpr::pow(nb.to_expr(), nx.to_expr()));
        }
        if let Some(r) = nb.as_const() {
            if r.is_one() {
                return NormalForm::constant(Rational::one());
            }
            if !r.is_zero() {
                if let Some((c0, lin)) = nx.as_affine() {
                    let mut out = if c0.is_integer() {
                        match small_pow(&r, &c0.to_integer()) {
                            Some(v) => NormalForm::constant(v),
                            None => NormalForm::opaque(CostExpr::pow(CostExpr::Const(r.clone()), CostExpr::Const(c0))),
                        }
                    } else {
                        NormalForm::opaque(CostExpr::pow(CostExpr::Const(r.clone()), CostExpr::Const(c0)))
                    };
                    for (v, k) in lin {
                        let factor = match k.is_integer().then(|| small_pow(&r, &k.to_integer())).flatten() {
                            Some(base) => NormalForm::exponential(&v, base),
                            None => NormalForm::opaque(CostExpr::pow(
                                CostExpr::Const(r.clone()),
                                NormalForm::var(&v).scale(&k).to_expr(),
                            )),
                        };
                        out = out.mul(&factor);
                    }
                    return out;
                }
            }
        }
        NormalForm::opaque(CostExpr::pow(nb.to_expr(), nx.to_expr()))
    }
}

fn small_pow(r: &Rational, k: &BigInt) -> Option<Rational> {
    let mag = k.abs().to_u32()?;
    if mag > MAX_EXPAND || (r.is_zero() && k.is_negative()) {
        return None;
    }
    let p = num_traits::pow(r.clone(), mag as usize);
    Some(if k.is_negative() { p.recip() } else { p })
}

fn exact_log(base: &Rational, arg: &Rational) -> Option<Rational> {
    let k = (rational::to_f64(arg).ln() / rational::to_f64(base).ln()).round();
    if !k.is_finite() || k.abs() > MAX_EXPAND as f64 {
        return None;
    }
    let kb = BigInt::from(k as i64);
    (small_pow(base, &kb).as_ref() == Some(arg)).then(|| Rational::from_integer(kb))
}

/// Canonical form: a sorted sum of monomials with merged like terms.
pub fn normalize(e: &CostExpr) -> CostExpr {
    NormalForm::from_expr(e).to_expr()
}
