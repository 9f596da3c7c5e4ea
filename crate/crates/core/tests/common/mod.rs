#![allow(dead_code)]

use std::cmp::Ordering;

use proptest::prelude::*;

use resbound::assertlang::{parse_assertion, Assertion, BoundStyle, Precondition, Scope, Status};
use resbound::expr::{eval_f64, evaluate, parse_expr, CostExpr, Env, ExtReal};
use resbound::job::{Job, JobFile};
use resbound::multivar::{ConstraintKind, SizeConstraint, SizeConstraintSet};
use resbound::rational::{self, Rational};
use resbound::verdict::{align, AnalysisResult, BoundPair, LowerDefault, Outcome, Region, SizeVar, VerdictPartition};
use resbound::{NatInterval, NatIntervalSet};

pub fn fixture(name: &str) -> Job {
    let path = format!("{}/tests/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    let text = std::fs::read_to_string(&path).unwrap();
    JobFile::from_json(&text).unwrap().validate().unwrap()
}

pub fn analysis_for<'a>(job: &'a Job, spec: &Assertion) -> &'a AnalysisResult {
    job.analysis
        .iter()
        .find(|a| a.predicate == spec.scope.name && a.arity == spec.scope.args.len())
        .unwrap()
}

pub fn env1(var: &str, n: u64) -> Env {
    let mut env = Env::new();
    env.insert(var.to_string(), rational::from_u64(n));
    env
}

/// A bound at a point: an expression or an infinite default.
#[derive(Clone, Copy)]
pub enum Val<'a> {
    Expr(&'a CostExpr),
    PosInf,
    NegInf,
}

fn exact_at(e: &CostExpr, var: &str, n: u64) -> Option<ExtReal> {
    evaluate(e, &env1(var, n)).ok()
}

/// Order of `a` and `b` at `var = n`. Floating evaluation decides clear cases,
/// exact evaluation the rest. `None` when undefined or too close to call.
pub fn cmp_at(a: Val, b: Val, var: &str, n: u64) -> Option<Ordering> {
    let (a, b) = match (a, b) {
        (Val::Expr(a), Val::Expr(b)) => (a, b),
        (Val::PosInf, Val::PosInf) | (Val::NegInf, Val::NegInf) => return Some(Ordering::Equal),
        (Val::PosInf, _) | (_, Val::NegInf) => return Some(Ordering::Greater),
        (Val::NegInf, _) | (_, Val::PosInf) => return Some(Ordering::Less),
    };
    let (x, y) = (eval_f64(a, var, n as f64), eval_f64(b, var, n as f64));
    if x.is_finite() && y.is_finite() && (x - y).abs() > 1e-9 * x.abs().max(y.abs()).max(1.0) {
        return x.partial_cmp(&y);
    }
    cmp_ext(&exact_at(a, var, n)?, &exact_at(b, var, n)?)
}

/// `a <= b` (or `a < b`), `None` when floating values are too close to call.
pub fn cmp_ext(a: &ExtReal, b: &ExtReal) -> Option<Ordering> {
    match (a, b) {
        (ExtReal::Exact(x), ExtReal::Exact(y)) => Some(x.cmp(y)),
        _ => {
            let (x, y) = (a.to_f64(), b.to_f64());
            if x.is_infinite() || y.is_infinite() {
                return x.partial_cmp(&y);
            }
            let tol = 1e-9 * x.abs().max(y.abs()).max(1.0);
            if (x - y).abs() <= tol {
                None
            } else {
                x.partial_cmp(&y)
            }
        }
    }
}

/// Pointwise label from the sufficient conditions: false when the spec band
/// and the analysis band are separated, true when the analysis band lies
/// inside the spec band. `None` when undecidable in floating point.
///
/// For a non-negative resource a spec lower bound of constant 0 constrains nothing.
fn or<'a>(e: Option<&'a CostExpr>, d: Val<'a>) -> Val<'a> {
    e.map_or(d, Val::Expr)
}

pub fn oracle_label(spec: &Assertion, an: &AnalysisResult, n: u64) -> Option<Outcome> {
    let (var, bounds) = align(spec, an).ok()?;
    let var = var?;
    let nonneg = bounds.lower_default == LowerDefault::Zero;
    let zero = CostExpr::zero();
    let su = or(spec.bounds.upper.as_ref(), Val::PosInf);
    let sl = or(spec.bounds.lower.as_ref(), Val::NegInf);
    let au = or(bounds.upper.as_ref(), Val::PosInf);
    let al = or(bounds.lower.as_ref(), if nonneg { Val::Expr(&zero) } else { Val::NegInf });
    let lt = |a, b| cmp_at(a, b, &var, n).map(|o| o == Ordering::Less);
    let le = |a, b| cmp_at(a, b, &var, n).map(|o| o != Ordering::Greater);
    let c2 = spec.bounds.upper.is_some() && lt(su, al)?;
    let c3 = bounds.upper.is_some() && spec.bounds.lower.is_some() && lt(au, sl)?;
    if c2 || c3 {
        return Some(Outcome::False);
    }
    let c1 = spec.bounds.upper.is_none() || bounds.upper.is_some() && le(au, su)?;
    let vacuous = match &spec.bounds.lower {
        None => true,
        Some(e) => nonneg && e.as_const().map_or(false, |q| *q == rational::int(0)),
    };
    let c4 = vacuous || le(sl, al)?;
    Some(if c1 && c4 { Outcome::True } else { Outcome::Unknown })
}

/// Points of `set`, each interval truncated to its first 1001 naturals.
pub fn sample(set: &NatIntervalSet) -> Vec<u64> {
    set.intervals()
        .iter()
        .flat_map(|iv| {
            let hi = iv.hi.unwrap_or(u64::MAX).min(iv.lo + 1000);
            iv.lo..=hi
        })
        .collect()
}

/// Points labelled True or False that the oracle contradicts.
pub fn violations(spec: &Assertion, an: &AnalysisResult, p: &VerdictPartition) -> Vec<(u64, Outcome)> {
    let mut out = Vec::new();
    for o in [Outcome::True, Outcome::False] {
        for n in sample(&p.nat(o)) {
            match oracle_label(spec, an, n) {
                Some(l) if l != o => out.push((n, o)),
                _ => {}
            }
        }
    }
    out
}

/// Regions are pairwise disjoint and their union is the domain.
pub fn partition_ok(p: &VerdictPartition) -> bool {
    let Region::Nat(domain) = &p.domain else { return true };
    let mut seen = NatIntervalSet::empty();
    for (r, _) in &p.entries {
        let Region::Nat(s) = r else { return false };
        if s.is_empty() || !seen.intersect(s).is_empty() {
            return false;
        }
        seen = seen.union(s);
    }
    seen == *domain
}

pub fn p(s: &str) -> CostExpr {
    parse_expr(s).unwrap()
}

pub fn q(n: i64) -> CostExpr {
    CostExpr::int(n)
}

pub fn x() -> CostExpr {
    CostExpr::var("x")
}

pub fn exact(e: &CostExpr, env: &Env) -> Option<Rational> {
    match evaluate(e, env) {
        Ok(ExtReal::Exact(v)) => Some(v),
        _ => None,
    }
}

/// Bases of the finite-calculus rule table.
pub fn rule_form() -> impl Strategy<Value = CostExpr> {
    prop_oneof![
        (1i64..6, 0u32..5).prop_map(|(c, m)| q(c) * CostExpr::falling(x(), m)),
        (1i64..6, 0i64..5).prop_map(|(c, m)| q(c) * CostExpr::pow(x(), q(m))),
        (2i64..5, 1i64..6).prop_map(|(a, c)| q(c) * CostExpr::pow(q(a), x())),
        (2i64..4, 1i64..3, 0i64..3).prop_map(|(a, m, n)| CostExpr::pow(q(a), q(m) * x() + q(n))),
        (0i64..4).prop_map(|k| CostExpr::pow(x(), q(k)) * CostExpr::pow(q(2), CostExpr::var("a") - x())),
        (1i64..4, 2i64..4).prop_map(|(k, b)| CostExpr::pow(x(), q(k)) * CostExpr::pow(q(b), x())),
    ]
}

pub fn fuzz_pair() -> impl Strategy<Value = (String, String)> {
    let term = prop_oneof![
        (-20i64..21, 0u32..4).prop_map(|(c, k)| format!("{c}*exp(V,{k})")),
        (-5i64..6, prop_oneof![Just("2"), Just("3"), Just("1.5")]).prop_map(|(c, b)| format!("{c}*exp({b},V)")),
        (-200i64..201).prop_map(|c| format!("{c}")),
    ];
    let side = prop::collection::vec(term, 1..4).prop_map(|ts| ts.join("+"));
    (side.clone(), side)
}

pub fn on_x(s: &str) -> CostExpr {
    p(&s.replace('V', "x"))
}

pub fn fuzz_case(spec: &str, an: &str) -> (Assertion, AnalysisResult) {
    let a = parse_assertion(&format!(":- check pred p(A) + cost(ub,steps,{}).", spec.replace('V', "length(A)"))).unwrap();
    let e = on_x(an);
    let r = AnalysisResult {
        predicate: "p".into(),
        arity: 1,
        size_vars: vec![SizeVar { name: "x".into(), metric: "length".into(), arg: 0 }],
        bounds: BoundPair::new(Some(e.clone()), Some(e)),
        domain: None,
    };
    (a, r)
}

pub fn set_strategy() -> impl Strategy<Value = NatIntervalSet> {
    prop::collection::vec((0u64..40, 0u64..30, any::<bool>()), 1..4).prop_map(|v| {
        NatIntervalSet::new(v.into_iter().map(|(lo, w, open)| NatInterval::new(lo, (!open).then_some(lo + w)).unwrap()).collect())
    })
}

pub fn pointwise_ok(a: &CostExpr, b: &CostExpr, set: &NatIntervalSet, strict: bool) -> Result<(), u64> {
    for n in sample(set) {
        if let Some(o) = cmp_at(Val::Expr(a), Val::Expr(b), "x", n) {
            if (strict && !o.is_lt()) || (!strict && o.is_gt()) {
                return Err(n);
            }
        }
    }
    Ok(())
}

pub fn ident() -> impl Strategy<Value = String> {
    "[A-Z][a-z0-9]{0,2}"
}

pub fn bound_expr(vars: Vec<String>) -> impl Strategy<Value = CostExpr> {
    let vs = vars.clone();
    let leaf = prop_oneof![
        (0i64..200).prop_map(q),
        (1i64..999, prop_oneof![Just(10i64), Just(100), Just(1000)]).prop_map(|(a, b)| CostExpr::rat(rational::ratio(a, b))),
        prop::sample::select(vs).prop_map(|v| CostExpr::var(&v)),
    ];
    leaf.prop_recursive(3, 16, 3, move |inner| {
        let vars = vars.clone();
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| CostExpr::pow(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| CostExpr::log(a, b)),
            inner.clone().prop_map(|a| CostExpr::int(-1) * a),
            prop::collection::vec(inner.clone(), 2..4).prop_map(CostExpr::MinOf),
            prop::collection::vec(inner.clone(), 2..4).prop_map(CostExpr::MaxOf),
            (inner.clone(), inner.clone(), prop::sample::select(vars)).prop_map(|(hi, body, v)| {
                CostExpr::sum("k", q(1), hi, body * CostExpr::var("k") + CostExpr::var(&v))
            }),
        ]
    })
}

pub fn status() -> impl Strategy<Value = Status> {
    prop::sample::select(vec![Status::Check, Status::Checked, Status::False, Status::Trust, Status::True])
}

pub fn intervals() -> impl Strategy<Value = NatIntervalSet> {
    prop::collection::vec((0u64..50, 0u64..50, any::<bool>()), 1..4).prop_map(|v| {
        NatIntervalSet::new(v.into_iter().map(|(lo, w, open)| NatInterval::new(lo, (!open).then_some(lo + w)).unwrap()).collect())
    })
}

pub fn ciao_assertion() -> impl Strategy<Value = Assertion> {
    (prop::collection::btree_set(ident(), 1..4), "[a-z][a-z_]{0,6}", status(), any::<bool>(), 0usize..3, any::<bool>(), any::<bool>())
        .prop_flat_map(|(args, name, status, length, pre, has_lb, style)| {
            let args: Vec<String> = args.into_iter().collect();
            let metric = if length { "length" } else { "nat" };
            let sizes: Vec<String> = args.iter().map(|a| format!("{metric}({a})")).collect();
            let types = prop::collection::vec(prop::sample::select(args.clone()).prop_map(|a| format!("list({a},gnd)")), 0..2);
            let pre = match pre {
                0 => Just(Precondition::Whole).boxed(),
                1 => (prop::sample::select(sizes.clone()), intervals())
                    .prop_map(|(var, set)| Precondition::Intervals { var, set })
                    .boxed(),
                _ => (prop::sample::select(sizes.clone()), prop::sample::select(sizes.clone()), -20i64..20, any::<bool>())
                    .prop_map(|(u, v, c, lt)| {
                        let kind = if lt { ConstraintKind::Lt } else { ConstraintKind::Leq };
                        Precondition::Constraints(vec![SizeConstraintSet::new(vec![SizeConstraint::new(
                            kind,
                            q(c),
                            CostExpr::var(&u) - CostExpr::var(&v),
                        )])])
                    })
                    .boxed(),
            };
            (Just((args, name, status, has_lb, style)), bound_expr(sizes.clone()), bound_expr(sizes), types, pre)
        })
        .prop_map(|((args, name, status, has_lb, style), lb, ub, types, precond)| Assertion {
            status,
            scope: Scope { name, args },
            types,
            precond,
            postcond: None,
            resource: "steps".into(),
            bounds: BoundPair::new(has_lb.then_some(lb), Some(ub)),
            style: if style || !has_lb { BoundStyle::Cost } else { BoundStyle::Costb },
            extra_props: vec![],
        })
}

pub fn xc_assertion() -> impl Strategy<Value = Assertion> {
    (prop::collection::btree_set("[a-z][a-z0-9]{0,3}", 1..4), "[a-z][A-Za-z]{0,6}", status(), any::<bool>(), any::<bool>(), 0u64..20, prop::option::of(20u64..60))
        .prop_flat_map(|(args, name, status, has_pre, has_lb, lo, hi)| {
            let args: Vec<String> = args.into_iter().collect();
            (Just((args.clone(), name, status, has_pre, has_lb, lo, hi)), prop::sample::select(args.clone()), bound_expr(args.clone()), bound_expr(args))
        })
        .prop_map(|((args, name, status, has_pre, has_lb, lo, hi), var, lb, ub)| Assertion {
            status,
            scope: Scope { name, args },
            types: vec![],
            precond: if has_pre {
                Precondition::Intervals { var, set: NatIntervalSet::single(NatInterval::new(lo, hi).unwrap()) }
            } else {
                Precondition::Whole
            },
            postcond: None,
            resource: "energy_nJ".into(),
            bounds: BoundPair::new(has_lb.then_some(lb), Some(ub)),
            style: if has_lb { BoundStyle::Costb } else { BoundStyle::Cost },
            extra_props: vec![],
        })
}
