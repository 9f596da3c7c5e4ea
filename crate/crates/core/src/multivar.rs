//! Affine comparison of multi-variable bounds over natural size variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::expr::{CostExpr, NormalForm};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    Lt,
    Leq,
}

/// `lhs < rhs` or `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SizeConstraint {
    pub kind: ConstraintKind,
    pub lhs: CostExpr,
    pub rhs: CostExpr,
}

impl SizeConstraint {
    pub fn new(kind: ConstraintKind, lhs: CostExpr, rhs: CostExpr) -> Self {
        SizeConstraint { kind, lhs, rhs }
    }

    pub fn is_affine(&self) -> bool {
        Lin::of(self).is_some()
    }

    pub fn holds_at(&self, env: &crate::expr::Env) -> Option<bool> {
        let l = crate::expr::evaluate(&self.lhs, env).ok()?;
        let r = crate::expr::evaluate(&self.rhs, env).ok()?;
        let o = l.compare(&r);
        Some(match self.kind {
            ConstraintKind::Lt => o.is_lt(),
            ConstraintKind::Leq => o.is_le(),
        })
    }
}

impl fmt::Display for SizeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            ConstraintKind::Lt => "lt",
            ConstraintKind::Leq => "leq",
        };
        write!(f, "{}({},{})", name, self.lhs, self.rhs)
    }
}

/// A conjunction of constraints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SizeConstraintSet {
    pub conjuncts: Vec<SizeConstraint>,
    pub satisfiable: bool,
}

impl SizeConstraintSet {
    pub fn new(conjuncts: Vec<SizeConstraint>) -> Self {
        let satisfiable = sat_of(&conjuncts);
        SizeConstraintSet { conjuncts, satisfiable }
    }

    /// The whole (non-negative) domain.
    pub fn top() -> Self {
        SizeConstraintSet { conjuncts: Vec::new(), satisfiable: true }
    }

    pub fn and(&self, other: &SizeConstraintSet) -> Self {
        let mut c = self.conjuncts.clone();
        c.extend(other.conjuncts.iter().cloned());
        SizeConstraintSet::new(c)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in &self.conjuncts {
            out.extend(c.lhs.free_vars());
            out.extend(c.rhs.free_vars());
        }
        out
    }

    pub fn holds_at(&self, env: &crate::expr::Env) -> Option<bool> {
        for c in &self.conjuncts {
            if !c.holds_at(env)? {
                return Some(false);
            }
        }
        Some(true)
    }

    /// Drops conjuncts implied by the others and integer-tightens the rest.
    pub fn simplify(&self) -> Self {
        let lins: Option<Vec<Lin>> = self.conjuncts.iter().map(Lin::of).collect();
        let mut lins = match lins {
            Some(l) => l,
            None => return self.clone(),
        };
        if !self.satisfiable {
            return self.clone();
        }
        let mut i = 0;
        while i < lins.len() {
            let mut probe: Vec<Lin> = lins.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.clone()).collect();
            probe.push(lins[i].negate());
            if !fm_sat(probe) {
                lins.remove(i);
            } else {
                i += 1;
            }
        }
        let mut seen = BTreeSet::new();
        let conjuncts = lins.iter().map(|l| l.tighten().to_constraint()).filter(|c| seen.insert(c.to_string())).collect();
        SizeConstraintSet { conjuncts, satisfiable: true }
    }

    /// Disjoint pieces covering the complement of this conjunction.
    pub fn negate(&self) -> Vec<SizeConstraintSet> {
        let mut out = Vec::new();
        let mut prefix: Vec<SizeConstraint> = Vec::new();
        for c in &self.conjuncts {
            let mut piece = prefix.clone();
            piece.push(negate_constraint(c));
            let s = SizeConstraintSet::new(piece);
            if s.satisfiable {
                out.push(s);
            }
            prefix.push(c.clone());
        }
        out
    }
}

impl fmt::Display for SizeConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// `[[a,b],[c]]` form of a disjunction of conjunctions.
pub fn render_dnf(sets: &[SizeConstraintSet]) -> String {
    let parts: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn negate_constraint(c: &SizeConstraint) -> SizeConstraint {
    match c.kind {
        ConstraintKind::Lt => SizeConstraint::new(ConstraintKind::Leq, c.rhs.clone(), c.lhs.clone()),
        ConstraintKind::Leq => SizeConstraint::new(ConstraintKind::Lt, c.rhs.clone(), c.lhs.clone()),
    }
}

/// Regions of `domain` outside every region of `cover`, as disjoint conjunctions.
pub fn complement_dnf(domain: &[SizeConstraintSet], cover: &[SizeConstraintSet]) -> Vec<SizeConstraintSet> {
    let mut rest: Vec<SizeConstraintSet> = domain.iter().filter(|d| d.satisfiable).cloned().collect();
    for c in cover {
        rest = rest
            .iter()
            .flat_map(|r| c.negate().into_iter().map(move |n| r.and(&n)))
            .filter(|s| s.satisfiable)
            .collect();
    }
    rest.iter().map(|s| s.simplify()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultivarError {
    #[error("non-affine difference: {0}")]
    NonlinearUnsupported(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOutcome {
    pub holds: SizeConstraintSet,
    pub fails: SizeConstraintSet,
}

/// Splits `domain` by `f <= g` (or `f < g` when `strict`).
pub fn compare_linear(
    f: &CostExpr,
    g: &CostExpr,
    domain: &SizeConstraintSet,
    strict: bool,
) -> Result<LinearOutcome, MultivarError> {
    let d = NormalForm::from_expr(&(g.clone() - f.clone()));
    let (c0, coeffs) = d.as_affine().ok_or_else(|| MultivarError::NonlinearUnsupported(d.to_expr().to_string()))?;
    let yes = Lin { c0, coeffs, strict };
    let no = yes.negate();
    let part = |l: &Lin| {
        let s = domain.and(&SizeConstraintSet::new(vec![l.tighten().to_constraint()]));
        if s.satisfiable {
            s.simplify()
        } else {
            s
        }
    };
    Ok(LinearOutcome { holds: part(&yes), fails: part(&no) })
}

/// Rational satisfiability with `v >= 0` for every variable.
pub fn constraint_sat(cs: &SizeConstraintSet) -> bool {
    sat_of(&cs.conjuncts)
}

fn sat_of(cs: &[SizeConstraint]) -> bool {
    match cs.iter().map(Lin::of).collect::<Option<Vec<_>>>() {
        Some(lins) => fm_sat(lins),
        None => true,
    }
}

/// `c0 + sum coeffs[v] v >= 0`, or `> 0` when strict.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Lin {
    c0: Rational,
    coeffs: BTreeMap<String, Rational>,
    strict: bool,
}

impl Lin {
    fn of(c: &SizeConstraint) -> Option<Lin> {
        let d = NormalForm::from_expr(&(c.rhs.clone() - c.lhs.clone()));
        let (c0, mut coeffs) = d.as_affine()?;
        coeffs.retain(|_, k| !k.is_zero());
        Some(Lin { c0, coeffs, strict: c.kind == ConstraintKind::Lt })
    }

    fn negate(&self) -> Lin {
        Lin { c0: -self.c0.clone(), coeffs: self.coeffs.iter().map(|(v, k)| (v.clone(), -k.clone())).collect(), strict: !self.strict }
    }

    fn scale(&self, k: &Rational) -> Lin {
        Lin { c0: &self.c0 * k, coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(), strict: self.strict }
    }

    /// Integer coefficients with unit gcd; the constant is rounded the sound way for integer points.
    fn tighten(&self) -> Lin {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let l = rational::lcm_denoms(self.coeffs.values());
        let scaled = self.scale(&Rational::from_integer(l));
        let g = scaled.coeffs.values().fold(num_bigint::BigInt::zero(), |g, c| g.gcd(c.numer()));
        let mut out = scaled.scale(&Rational::new(num_bigint::BigInt::one(), g));
        // L + c > 0 iff L + ceil(c) > 0, and L + c >= 0 iff L + floor(c) >= 0, for integer L
        out.c0 = if out.strict { out.c0.ceil() } else { out.c0.floor() };
        out
    }

    fn to_constraint(&self) -> SizeConstraint {
        let kind = if self.strict { ConstraintKind::Lt } else { ConstraintKind::Leq };
        let mut rhs: Option<CostExpr> = None;
        for (v, k) in &self.coeffs {
            let var = CostExpr::var(v);
            let mag = k.abs();
            let term = if mag.is_one() { var } else { CostExpr::Const(mag) * var };
            rhs = Some(match rhs {
                None if k.is_negative() => CostExpr::int(-1) * term,
                None => term,
                Some(acc) if k.is_negative() => acc - term,
                Some(acc) => acc + term,
            });
        }
        let rhs = rhs.unwrap_or_else(CostExpr::zero);
        let rhs = match &rhs {
            CostExpr::Mul(a, b) if **a == CostExpr::int(-1) => match &**b {
                CostExpr::Mul(c, v) => match (&**c, &**v) {
                    (CostExpr::Const(q), v) => CostExpr::Const(-q.clone()) * v.clone(),
                    _ => rhs.clone(),
                },
                _ => rhs.clone(),
            },
            _ => rhs.clone(),
        };
        SizeConstraint::new(kind, CostExpr::Const(-self.c0.clone()), rhs)
    }
}

fn fm_sat(mut lins: Vec<Lin>) -> bool {
    let vars: BTreeSet<String> = lins.iter().flat_map(|l| l.coeffs.keys().cloned()).collect();
    for v in &vars {
        lins.push(Lin { c0: Rational::zero(), coeffs: [(v.clone(), Rational::one())].into(), strict: false });
    }
    for v in &vars {
        let (with, mut rest): (Vec<Lin>, Vec<Lin>) = lins.into_iter().partition(|l| l.coeffs.contains_key(v));
        let (pos, neg): (Vec<Lin>, Vec<Lin>) = with.into_iter().partition(|l| l.coeffs[v].is_positive());
        for p in &pos {
            for n in &neg {
                let a = p.scale(&(-n.coeffs[v].clone()));
                let b = n.scale(&p.coeffs[v]);
                let mut coeffs = a.coeffs.clone();
                for (w, k) in b.coeffs {
                    *coeffs.entry(w).or_insert_with(Rational::zero) += k;
                }
                coeffs.retain(|_, k| !k.is_zero());
                let combined = Lin { c0: a.c0 + b.c0, coeffs, strict: p.strict || n.strict };
                if combined.coeffs.is_empty() {
                    if !const_ok(&combined) {
                        return false;
                    }
                } else if !rest.contains(&combined) {
                    rest.push(normalize_lin(combined));
                }
            }
        }
        lins = rest;
        lins.dedup();
    }
    lins.iter().all(const_ok)
}

fn normalize_lin(l: Lin) -> Lin {
    match l.coeffs.values().next() {
        Some(k) => {
            let k = k.abs();
            l.scale(&(Rational::one() / k))
        }
        None => l,
    }
}

fn const_ok(l: &Lin) -> bool {
    if l.strict {
        l.c0.is_positive()
    } else {
        !l.c0.is_negative()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn p(s: &str) -> CostExpr {
        parse_expr(s).unwrap()
    }

    fn c(kind: ConstraintKind, l: &str, r: &str) -> SizeConstraint {
        SizeConstraint::new(kind, p(l), p(r))
    }

    #[test]
    fn inc_append_regions() {
        let out = compare_linear(
            &p("length(B)+length(A)+3"),
            &p("2*length(A)-10"),
            &SizeConstraintSet::top(),
            false,
        )
        .unwrap();
        assert_eq!(out.holds.to_string(), "[leq(13,length(A)-length(B))]");
        assert_eq!(out.fails.to_string(), "[lt(-13,-length(A)+length(B))]");
    }

    #[test]
    fn satisfiability() {
        use ConstraintKind::*;
        assert!(!constraint_sat(&SizeConstraintSet::new(vec![c(Leq, "x", "2"), c(Leq, "5", "x")])));
        assert!(constraint_sat(&SizeConstraintSet::new(vec![c(Leq, "13", "a-b")])));
        assert!(!constraint_sat(&SizeConstraintSet::new(vec![c(Lt, "x", "0")])));
    }

    #[test]
    fn identical_affine() {
        let out = compare_linear(&p("x+y"), &p("x+y"), &SizeConstraintSet::top(), false).unwrap();
        assert!(out.holds.satisfiable && out.holds.conjuncts.is_empty());
        assert!(!out.fails.satisfiable);
    }

    #[test]
    fn nonlinear_rejected() {
        assert!(compare_linear(&p("x*y"), &p("x"), &SizeConstraintSet::top(), false).is_err());
    }
}
