//! Assertion checking: partition the precondition domain into proved,
//! disproved and undecided regions.
//!
//! With spec band `[sl, su]` and analysis band `[al, au]`:
//! - true where `au <= su` and `sl <= al`,
//! - false where `su < al` or `au < sl`,
//! - unknown elsewhere.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assertlang::{Assertion, Precondition, Status};
use crate::compare::{leq_f, less_f, CompareConfig, ComparisonResult};
use crate::expr::{evaluate, CostExpr, Env, ExtReal};
use crate::interval::NatIntervalSet;
use crate::multivar::{complement_dnf, compare_linear, ConstraintKind, SizeConstraint, SizeConstraintSet};
use crate::par;
use crate::rational;

/// Value a missing lower bound stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerDefault {
    #[default]
    Zero,
    NegInf,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BoundPair {
    pub lower: Option<CostExpr>,
    pub upper: Option<CostExpr>,
    pub lower_default: LowerDefault,
}

impl BoundPair {
    pub fn new(lower: Option<CostExpr>, upper: Option<CostExpr>) -> Self {
        BoundPair { lower, upper, lower_default: LowerDefault::Zero }
    }

    /// Lower bound with the default filled in; `None` means minus infinity.
    pub fn effective_lower(&self) -> Option<CostExpr> {
        match (&self.lower, self.lower_default) {
            (Some(l), _) => Some(l.clone()),
            (None, LowerDefault::Zero) => Some(CostExpr::zero()),
            (None, LowerDefault::NegInf) => None,
        }
    }

    fn map(&self, f: impl Fn(&CostExpr) -> CostExpr) -> BoundPair {
        BoundPair { lower: self.lower.as_ref().map(&f), upper: self.upper.as_ref().map(&f), lower_default: self.lower_default }
    }
}

/// An analysis size variable bound to argument `arg` under metric `metric` (`nat`, `length`, ...).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeVar {
    pub name: String,
    pub metric: String,
    pub arg: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Nat(NatIntervalSet),
    Constraints(Vec<SizeConstraintSet>),
}

impl Region {
    pub fn is_empty(&self) -> bool {
        match self {
            Region::Nat(s) => s.is_empty(),
            Region::Constraints(d) => d.iter().all(|c| !c.satisfiable),
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Nat(s) => write!(f, "{s}"),
            Region::Constraints(d) => f.write_str(&crate::multivar::render_dnf(d)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisResult {
    pub predicate: String,
    pub arity: usize,
    pub size_vars: Vec<SizeVar>,
    pub bounds: BoundPair,
    /// Sizes the analysis result is valid for; `None` is every size.
    pub domain: Option<Region>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    True,
    False,
    Unknown,
}

impl Outcome {
    pub fn status(self) -> Status {
        match self {
            Outcome::True => Status::Checked,
            Outcome::False => Status::False,
            Outcome::Unknown => Status::Check,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Outcome::True => 'T',
            Outcome::False => 'F',
            Outcome::Unknown => 'C',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerdictPartition {
    /// Non-empty regions, ordered false, true, unknown.
    pub entries: Vec<(Region, Outcome)>,
    /// Size variable of a univariate partition.
    pub var: Option<String>,
    pub domain: Region,
    pub approximation_used: bool,
}

impl VerdictPartition {
    /// The natural set labelled `o` (empty when absent or multivariate).
    pub fn nat(&self, o: Outcome) -> NatIntervalSet {
        self.entries
            .iter()
            .find_map(|(r, oc)| match r {
                Region::Nat(s) if *oc == o => Some(s.clone()),
                _ => None,
            })
            .unwrap_or_else(NatIntervalSet::empty)
    }

    pub fn region(&self, o: Outcome) -> Option<&Region> {
        self.entries.iter().find(|(_, oc)| *oc == o).map(|(r, _)| r)
    }

    /// `F[0,10] T[11,inf)` style summary.
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self.entries.iter().map(|(r, o)| format!("{}{}", o.letter(), r)).collect();
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerdictError {
    #[error("predicate mismatch: assertion on {spec}, analysis for {analysis}")]
    PredicateMismatch { spec: String, analysis: String },
    #[error("metric mismatch on argument {arg}: assertion uses {spec}, analysis measures {analysis}")]
    MetricMismatch { arg: String, spec: String, analysis: String },
    #[error("evaluation domain is unbounded")]
    DomainUnbounded,
}

#[derive(Clone, Debug, PartialEq)]
enum Cond {
    Always,
    Never,
    Leq(CostExpr, CostExpr),
    Less(CostExpr, CostExpr),
}

impl Cond {
    fn exprs(&self) -> Vec<&CostExpr> {
        match self {
            Cond::Leq(a, b) | Cond::Less(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    fn on_set(&self, s: &NatIntervalSet, cfg: &CompareConfig) -> ComparisonResult {
        let full = |sat: NatIntervalSet| ComparisonResult {
            satisfied: sat,
            residual_unknown: NatIntervalSet::empty(),
            approximation_used: false,
        };
        match self {
            Cond::Always => full(s.clone()),
            Cond::Never => full(NatIntervalSet::empty()),
            Cond::Leq(a, b) => leq_f(a, b, s, cfg),
            Cond::Less(a, b) => less_f(a, b, s, cfg),
        }
    }

    fn at(&self, env: &Env) -> Option<bool> {
        let cmp = |a: &CostExpr, b: &CostExpr| -> Option<std::cmp::Ordering> {
            let x = evaluate(a, env).ok()?;
            let y = evaluate(b, env).ok()?;
            Some(x.compare(&y))
        };
        match self {
            Cond::Always => Some(true),
            Cond::Never => Some(false),
            Cond::Leq(a, b) => cmp(a, b).map(|o| o.is_le()),
            Cond::Less(a, b) => cmp(a, b).map(|o| o.is_lt()),
        }
    }

    /// Region where the condition holds; `None` for non-affine conditions.
    fn on_constraints(&self) -> Option<SizeConstraintSet> {
        match self {
            Cond::Always => Some(SizeConstraintSet::top()),
            Cond::Never => Some(SizeConstraintSet::new(vec![SizeConstraint::new(
                ConstraintKind::Lt,
                CostExpr::zero(),
                CostExpr::zero(),
            )])),
            Cond::Leq(a, b) => compare_linear(a, b, &SizeConstraintSet::top(), false).ok().map(|o| o.holds),
            Cond::Less(a, b) => compare_linear(a, b, &SizeConstraintSet::top(), true).ok().map(|o| o.holds),
        }
    }
}

/// The four sufficient conditions, `c1 & c4` for true and `c2 | c3` for false.
#[derive(Clone, Debug)]
struct Conditions {
    c1: Cond,
    c4: Cond,
    c2: Cond,
    c3: Cond,
}

impl Conditions {
    fn new(spec: &BoundPair, an: &BoundPair) -> Self {
        let an_lower = an.effective_lower();
        let vacuous_lower = |l: &CostExpr| spec.lower_default == LowerDefault::Zero && l.as_const().map_or(false, |q| q.is_zero());
        let c1 = match (&spec.upper, &an.upper) {
            (None, _) => Cond::Always,
            (Some(_), None) => Cond::Never,
            (Some(su), Some(au)) => Cond::Leq(au.clone(), su.clone()),
        };
        let c4 = match (&spec.lower, &an_lower) {
            (None, _) => Cond::Always,
            (Some(sl), _) if vacuous_lower(sl) => Cond::Always,
            (Some(_), None) => Cond::Never,
            (Some(sl), Some(al)) => Cond::Leq(sl.clone(), al.clone()),
        };
        let c2 = match (&spec.upper, &an_lower) {
            (Some(su), Some(al)) => Cond::Less(su.clone(), al.clone()),
            _ => Cond::Never,
        };
        let c3 = match (&spec.lower, &an.upper) {
            (Some(sl), Some(au)) => Cond::Less(au.clone(), sl.clone()),
            _ => Cond::Never,
        };
        Conditions { c1, c4, c2, c3 }
    }

    fn all(&self) -> [&Cond; 4] {
        [&self.c1, &self.c4, &self.c2, &self.c3]
    }

    fn classify(&self, env: &Env) -> Outcome {
        let t = |c: &Cond| c.at(env) == Some(true);
        if t(&self.c2) || t(&self.c3) {
            Outcome::False
        } else if t(&self.c1) && t(&self.c4) {
            Outcome::True
        } else {
            Outcome::Unknown
        }
    }
}

/// Analysis and spec brought onto shared size-variable names.
struct Prepared {
    conds: Conditions,
    analysis_bounds: BoundPair,
    vars: BTreeSet<String>,
    univariate: Option<(String, NatIntervalSet)>,
    dnf: Vec<SizeConstraintSet>,
}

fn spec_mentions(spec: &Assertion) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in spec.bounds.lower.iter().chain(spec.bounds.upper.iter()) {
        out.extend(e.free_vars());
    }
    match &spec.precond {
        Precondition::Intervals { var, .. } => {
            out.insert(var.clone());
        }
        Precondition::Constraints(d) => d.iter().for_each(|c| out.extend(c.free_vars())),
        Precondition::Whole => {}
    }
    out
}

fn metric_of<'a>(name: &'a str, arg: &str) -> Option<&'a str> {
    let inner = name.strip_suffix(')')?;
    let open = inner.find('(')?;
    (&inner[open + 1..] == arg).then(|| &inner[..open])
}

fn rename_vars(e: &CostExpr, map: &[(String, String)]) -> CostExpr {
    map.iter().fold(e.clone(), |acc, (from, to)| if from == to { acc } else { acc.substitute(from, &CostExpr::var(to)) })
}

fn rename_constraints(d: &[SizeConstraintSet], map: &[(String, String)]) -> Vec<SizeConstraintSet> {
    d.iter()
        .map(|c| {
            SizeConstraintSet::new(
                c.conjuncts
                    .iter()
                    .map(|k| SizeConstraint::new(k.kind, rename_vars(&k.lhs, map), rename_vars(&k.rhs, map)))
                    .collect(),
            )
        })
        .collect()
}

fn interval_dnf(var: &str, set: &NatIntervalSet) -> Vec<SizeConstraintSet> {
    set.intervals()
        .iter()
        .map(|iv| {
            let v = CostExpr::var(var);
            let mut cs = vec![SizeConstraint::new(ConstraintKind::Leq, CostExpr::Const(rational::from_u64(iv.lo)), v.clone())];
            if let Some(h) = iv.hi {
                cs.push(SizeConstraint::new(ConstraintKind::Leq, v, CostExpr::Const(rational::from_u64(h))));
            }
            SizeConstraintSet::new(cs)
        })
        .collect()
}

fn prepare(spec: &Assertion, analysis: &AnalysisResult) -> Result<Prepared, VerdictError> {
    if spec.scope.name != analysis.predicate || spec.scope.args.len() != analysis.arity {
        return Err(VerdictError::PredicateMismatch {
            spec: format!("{}/{}", spec.scope.name, spec.scope.args.len()),
            analysis: format!("{}/{}", analysis.predicate, analysis.arity),
        });
    }
    let mentions = spec_mentions(spec);
    let mut map = Vec::new();
    for sv in &analysis.size_vars {
        let arg = spec.scope.args.get(sv.arg).ok_or_else(|| VerdictError::PredicateMismatch {
            spec: spec.scope.to_string(),
            analysis: format!("size variable {} on argument {}", sv.name, sv.arg + 1),
        })?;
        let measured = format!("{}({})", sv.metric, arg);
        let target = if mentions.contains(&measured) {
            measured
        } else if mentions.contains(arg) {
            arg.clone()
        } else if let Some(other) = mentions.iter().find_map(|m| metric_of(m, arg)) {
            return Err(VerdictError::MetricMismatch { arg: arg.clone(), spec: other.to_string(), analysis: sv.metric.clone() });
        } else {
            measured
        };
        map.push((sv.name.clone(), target));
    }
    let an = analysis.bounds.map(|e| rename_vars(e, &map));
    let conds = Conditions::new(&spec.bounds, &an);
    let mut vars: BTreeSet<String> = conds.all().iter().flat_map(|c| c.exprs()).flat_map(|e| e.free_vars()).collect();
    vars.extend(mentions.iter().cloned());

    let an_domain = analysis.domain.as_ref().map(|r| match r {
        Region::Constraints(d) => Region::Constraints(rename_constraints(d, &map)),
        other => other.clone(),
    });
    let univariate = match &spec.precond {
        Precondition::Constraints(_) => None,
        _ if vars.len() > 1 => None,
        Precondition::Intervals { var, set } => Some((var.clone(), set.clone())),
        Precondition::Whole => {
            let v = vars.iter().next().cloned().or_else(|| map.first().map(|m| m.1.clone())).unwrap_or_else(|| "x".into());
            Some((v, NatIntervalSet::all()))
        }
    };
    let univariate = univariate.map(|(v, s)| match &an_domain {
        Some(Region::Nat(d)) => (v, s.intersect(d)),
        _ => (v, s),
    });
    let mut dnf = match &spec.precond {
        Precondition::Whole => vec![SizeConstraintSet::top()],
        Precondition::Intervals { var, set } => interval_dnf(var, set),
        Precondition::Constraints(d) => d.clone(),
    };
    match &an_domain {
        Some(Region::Constraints(d)) => {
            dnf = dnf.iter().flat_map(|a| d.iter().map(move |b| a.and(b))).filter(|s| s.satisfiable).collect();
        }
        Some(Region::Nat(set)) if univariate.is_none() => {
            if let Some(v) = map.first().map(|m| m.1.clone()) {
                let extra = interval_dnf(&v, set);
                dnf = dnf.iter().flat_map(|a| extra.iter().map(move |b| a.and(b))).filter(|s| s.satisfiable).collect();
            }
        }
        _ => {}
    }
    Ok(Prepared { conds, analysis_bounds: an, vars, univariate, dnf })
}

/// Analysis bounds renamed onto the assertion's size variables, with the
/// variable of a univariate check.
pub fn align(spec: &Assertion, analysis: &AnalysisResult) -> Result<(Option<String>, BoundPair), VerdictError> {
    let p = prepare(spec, analysis)?;
    Ok((p.univariate.map(|u| u.0), p.analysis_bounds))
}

/// Domain of a univariate check after intersecting with the analysis domain.
pub fn univariate_domain(spec: &Assertion, analysis: &AnalysisResult) -> Result<Option<(String, NatIntervalSet)>, VerdictError> {
    Ok(prepare(spec, analysis)?.univariate)
}

fn env_at(var: &str, n: u64) -> Env {
    let mut env = Env::new();
    env.insert(var.to_string(), rational::from_u64(n));
    env
}

/// First sampled size (among the first 17 of the domain) where the analysis
/// lower bound exceeds its upper bound.
pub fn band_violation(spec: &Assertion, analysis: &AnalysisResult) -> Result<Option<u64>, VerdictError> {
    let prep = prepare(spec, analysis)?;
    match &prep.univariate {
        Some((var, s)) => Ok(check_band(&prep.analysis_bounds, var, s).err()),
        None => Ok(None),
    }
}

fn check_band(an: &BoundPair, var: &str, s: &NatIntervalSet) -> Result<(), u64> {
    let (Some(l), Some(u)) = (&an.lower, &an.upper) else { return Ok(()) };
    if l == u {
        return Ok(());
    }
    for n in s.points().take(17) {
        let env = env_at(var, n);
        if let (Ok(a), Ok(b)) = (evaluate(l, &env), evaluate(u, &env)) {
            let inverted = match (&a, &b) {
                (ExtReal::Exact(x), ExtReal::Exact(y)) => x > y,
                _ => a.to_f64() > b.to_f64() + 1e-9 * b.to_f64().abs().max(1.0),
            };
            if inverted {
                return Err(n);
            }
        }
    }
    Ok(())
}

fn nat_partition(var: &str, domain: &NatIntervalSet, f: NatIntervalSet, t: NatIntervalSet, approx: bool) -> VerdictPartition {
    let u = domain.difference(&f).difference(&t);
    let entries = [(f, Outcome::False), (t, Outcome::True), (u, Outcome::Unknown)]
        .into_iter()
        .filter(|(s, _)| !s.is_empty())
        .map(|(s, o)| (Region::Nat(s), o))
        .collect();
    VerdictPartition { entries, var: Some(var.to_string()), domain: Region::Nat(domain.clone()), approximation_used: approx }
}

/// Partitions the assertion's domain using the analysis bounds.
pub fn check_assertion(spec: &Assertion, analysis: &AnalysisResult, cfg: &CompareConfig) -> Result<VerdictPartition, VerdictError> {
    let prep = prepare(spec, analysis)?;
    match &prep.univariate {
        Some((var, s)) => Ok(check_univariate(&prep.conds, var, s, cfg)),
        None => Ok(check_multivariate(&prep)),
    }
}

fn check_univariate(c: &Conditions, var: &str, s: &NatIntervalSet, cfg: &CompareConfig) -> VerdictPartition {
    let [r1, r4, r2, r3] = [&c.c1, &c.c4, &c.c2, &c.c3].map(|k| k.on_set(s, cfg));
    let approx = [&r1, &r4, &r2, &r3].iter().any(|r| r.approximation_used);
    let f = r2.satisfied.union(&r3.satisfied);
    let t = r1.satisfied.intersect(&r4.satisfied).difference(&f);
    let mut f = f;
    let mut t = t;
    // on a small bounded domain, whatever the root pass left open is decided pointwise
    if let Some(count) = s.count() {
        if count <= cfg.enum_threshold {
            let open: Vec<u64> = s.difference(&f).difference(&t).points().collect();
            let labels = par::map(&open, |&n| c.classify(&env_at(var, n)));
            let pick = |o: Outcome| NatIntervalSet::from_points(open.iter().zip(&labels).filter(|(_, l)| **l == o).map(|(n, _)| *n));
            f = f.union(&pick(Outcome::False));
            t = t.union(&pick(Outcome::True));
        }
    }
    nat_partition(var, s, f, t, approx)
}

fn check_multivariate(p: &Prepared) -> VerdictPartition {
    let domain = Region::Constraints(p.dnf.clone());
    let unknown_all = || VerdictPartition {
        entries: vec![(domain.clone(), Outcome::Unknown)],
        var: None,
        domain: domain.clone(),
        approximation_used: false,
    };
    let c = &p.conds;
    let (Some(k1), Some(k4), Some(k2), Some(k3)) =
        (c.c1.on_constraints(), c.c4.on_constraints(), c.c2.on_constraints(), c.c3.on_constraints())
    else {
        return unknown_all();
    };
    let keep = |v: Vec<SizeConstraintSet>| -> Vec<SizeConstraintSet> { v.into_iter().filter(|s| s.satisfiable).map(|s| s.simplify()).collect() };
    let f = keep(
        p.dnf
            .iter()
            .flat_map(|d| {
                let mut out = vec![d.and(&k2)];
                out.extend(k2.negate().iter().map(|n| d.and(n).and(&k3)));
                out
            })
            .collect(),
    );
    let t_raw = keep(p.dnf.iter().map(|d| d.and(&k1).and(&k4)).collect());
    let t = complement_dnf(&t_raw, &f);
    let t = if t.len() <= t_raw.len() { t } else { t_raw };
    let mut cover = f.clone();
    cover.extend(t.iter().cloned());
    let u = complement_dnf(&p.dnf, &cover);
    let entries = [(f, Outcome::False), (t, Outcome::True), (u, Outcome::Unknown)]
        .into_iter()
        .filter(|(r, _)| !r.is_empty())
        .map(|(r, o)| (Region::Constraints(r), o))
        .collect();
    let _ = &p.vars;
    VerdictPartition { entries, var: None, domain, approximation_used: false }
}

/// Pointwise oracle over a bounded domain.
pub fn eval_check(spec: &Assertion, analysis: &AnalysisResult, s: &NatIntervalSet) -> Result<VerdictPartition, VerdictError> {
    if !s.is_bounded() {
        return Err(VerdictError::DomainUnbounded);
    }
    let prep = prepare(spec, analysis)?;
    let var = match &prep.univariate {
        Some((v, _)) => v.clone(),
        None => return Err(VerdictError::DomainUnbounded),
    };
    let points: Vec<u64> = s.points().collect();
    let labels = par::map(&points, |&n| prep.conds.classify(&env_at(&var, n)));
    let pick = |o: Outcome| NatIntervalSet::from_points(points.iter().zip(&labels).filter(|(_, l)| **l == o).map(|(n, _)| *n));
    Ok(nat_partition(&var, s, pick(Outcome::False), pick(Outcome::True), false))
}

/// One output assertion per outcome class: false, then checked, then check.
pub fn synthesize_output(spec: &Assertion, partition: &VerdictPartition) -> Vec<Assertion> {
    partition
        .entries
        .iter()
        .map(|(region, outcome)| {
            let precond = if *region == partition.domain && matches!(spec.precond, Precondition::Whole) {
                spec.precond.clone()
            } else {
                match region {
                    Region::Nat(set) => {
                        Precondition::Intervals { var: partition.var.clone().unwrap_or_else(|| "x".into()), set: set.clone() }
                    }
                    Region::Constraints(d) => Precondition::Constraints(d.clone()),
                }
            };
            let precond = if *region == partition.domain && matches!(spec.precond, Precondition::Intervals { .. }) {
                spec.precond.clone()
            } else {
                precond
            };
            spec.with_status(outcome.status()).with_precond(precond)
        })
        .collect()
}
