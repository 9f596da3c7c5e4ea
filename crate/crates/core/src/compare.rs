//! Univariate comparison of cost functions over sets of naturals.
//!
//! `less_f(a, b, S)` returns the points of `S` where `a < b` is proved. The
//! difference `b - a` is split at its (approximate) roots; root positions only
//! propose boundaries, and every proposed region is confirmed by exact
//! pointwise checks on bounded pieces and a dominance argument on the tail.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::expr::{differentiate, evaluate, Compiled, CostExpr, Env, ExtReal, Monomial, NormalForm};
use crate::fincalc::{eliminate_summations, IntegrationOutcome};
use crate::interval::{NatInterval, NatIntervalSet};
use crate::par;
use crate::rational::{self, Rational};
use crate::roots::{
    nat_snap, poly_roots_seeded, safe_root, Endpoint, RequiredSide, Root, RootError, RootMethod, RootSet, SafeRootConfig, DEFAULT_SEED,
};

pub const DEFAULT_TAYLOR_ORDER: u32 = 9;
pub const DEFAULT_ENUM_THRESHOLD: u64 = 1_000_000;
pub const DEFAULT_DOMINANCE_DEPTH: u32 = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub taylor_order: u32,
    pub safe: SafeRootConfig,
    pub enum_threshold: u64,
    pub dominance_depth: u32,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            taylor_order: DEFAULT_TAYLOR_ORDER,
            safe: SafeRootConfig::default(),
            enum_threshold: DEFAULT_ENUM_THRESHOLD,
            dominance_depth: DEFAULT_DOMINANCE_DEPTH,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonResult {
    pub satisfied: NatIntervalSet,
    pub residual_unknown: NatIntervalSet,
    pub approximation_used: bool,
}

impl ComparisonResult {
    fn unknown(s: &NatIntervalSet, approx: bool) -> Self {
        ComparisonResult { satisfied: NatIntervalSet::empty(), residual_unknown: s.clone(), approximation_used: approx }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Strict,
    NonStrict,
}

impl Mode {
    fn accepts(self, o: Ordering) -> bool {
        match self {
            Mode::Strict => o == Ordering::Greater,
            Mode::NonStrict => o != Ordering::Less,
        }
    }
}

/// Points of `s` where `psi1 < psi2` holds.
pub fn less_f(psi1: &CostExpr, psi2: &CostExpr, s: &NatIntervalSet, cfg: &CompareConfig) -> ComparisonResult {
    compare(psi1, psi2, s, Mode::Strict, cfg)
}

/// Points of `s` where `psi1 <= psi2` holds.
pub fn leq_f(psi1: &CostExpr, psi2: &CostExpr, s: &NatIntervalSet, cfg: &CompareConfig) -> ComparisonResult {
    compare(psi1, psi2, s, Mode::NonStrict, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumOutcome {
    Verified,
    TooLarge,
    CounterexampleAt(u64),
}

/// Checks the sign of `f` at every natural of a bounded interval.
pub fn enumerate_check(f: &CostExpr, var: &str, iv: &NatInterval, mode: Mode, threshold: u64) -> EnumOutcome {
    let comp = Compiled::new(f, var);
    match iv.len() {
        Some(n) if n <= threshold => {
            match par::first_failure(iv.lo, iv.hi.unwrap(), |n| comp.sign_at(n).map_or(false, |o| mode.accepts(o))) {
                Some(n) => EnumOutcome::CounterexampleAt(n),
                None => EnumOutcome::Verified,
            }
        }
        _ => EnumOutcome::TooLarge,
    }
}

/// Same as [`enumerate_check`] without the parallel path.
pub fn enumerate_check_seq(f: &CostExpr, var: &str, iv: &NatInterval, mode: Mode, threshold: u64) -> EnumOutcome {
    let comp = Compiled::new(f, var);
    match iv.len() {
        Some(n) if n <= threshold => {
            match (iv.lo..=iv.hi.unwrap()).find(|&n| !comp.sign_at(n).map_or(false, |o| mode.accepts(o))) {
                Some(n) => EnumOutcome::CounterexampleAt(n),
                None => EnumOutcome::Verified,
            }
        }
        _ => EnumOutcome::TooLarge,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// `f > 0` on the whole tail.
    Holds,
    /// The fastest-growing term is negative, so `f` is eventually negative.
    Falsified,
    Unknown,
}

/// Tries to prove `f(n) > 0` for every natural `n > c`.
pub fn eventual_dominance(f: &CostExpr, var: &str, c: u64, depth: u32) -> Dominance {
    dominates_from(&Compiled::new(f, var), (c + 1) as f64, depth)
}

fn growth_cmp(a: (&Rational, i32), b: (&Rational, i32)) -> Ordering {
    a.0.cmp(b.0).then(a.1.cmp(&b.1))
}

/// Whether `p_base^x x^p_deg / (n_base^x x^n_deg)` is non-decreasing on `[x0, inf)`.
fn outgrows(p: (&Rational, i32), n: (&Rational, i32), x0: f64) -> bool {
    match p.0.cmp(n.0) {
        Ordering::Less => false,
        Ordering::Equal => p.1 >= n.1,
        Ordering::Greater => {
            p.1 >= n.1 || (rational::to_f64(p.0) / rational::to_f64(n.0)).ln() * x0 >= (n.1 - p.1) as f64
        }
    }
}

/// Real-valued tail proof on `[x0, inf)` by term absorption, falling back to the derivative.
pub fn dominates_from(f: &Compiled, x0: f64, depth: u32) -> Dominance {
    let terms = match f.terms() {
        Some(t) => t,
        None => return Dominance::Unknown,
    };
    let live: Vec<_> = terms.iter().filter(|t| t.coeff != 0.0).collect();
    let lead = match live.iter().max_by(|a, b| growth_cmp((&a.base, a.degree), (&b.base, b.degree))) {
        Some(t) => t,
        None => return Dominance::Unknown,
    };
    if lead.coeff < 0.0 {
        return Dominance::Falsified;
    }
    if x0 < 1.0 && live.iter().any(|t| t.degree != 0) {
        return Dominance::Unknown;
    }
    let log_val = |t: &crate::expr::Term| {
        t.coeff.abs().ln() + t.degree as f64 * x0.ln() + x0 * rational::to_f64(&t.base).ln()
    };
    let mut pos: Vec<_> = live.iter().filter(|t| t.coeff > 0.0).map(|t| (*t, log_val(t), 1.0f64)).collect();
    pos.sort_by(|a, b| growth_cmp((&a.0.base, a.0.degree), (&b.0.base, b.0.degree)));
    let mut neg: Vec<_> = live.iter().filter(|t| t.coeff < 0.0).collect();
    neg.sort_by(|a, b| growth_cmp((&b.base, b.degree), (&a.base, a.degree)));
    let mut absorbed = true;
    for n in &neg {
        let ln_n = log_val(n);
        let mut need = 1.0 + 1e-9;
        for (p, ln_p, cap) in pos.iter_mut() {
            if need <= 0.0 || *cap <= 0.0 || !outgrows((&p.base, p.degree), (&n.base, n.degree), x0) {
                continue;
            }
            let ratio = (ln_n - *ln_p).exp();
            let take = cap.min(need * ratio);
            *cap -= take;
            need -= take / ratio;
        }
        if need > 1e-12 {
            absorbed = false;
            break;
        }
    }
    if absorbed && pos.iter().any(|(_, _, cap)| *cap > 1e-9) {
        return Dominance::Holds;
    }
    if depth == 0 {
        return Dominance::Unknown;
    }
    let (v, m) = f.eval_mag(x0);
    if !(v > 1e-9 * m) {
        return Dominance::Unknown;
    }
    match differentiate(f.expr(), f.var()) {
        Ok(d) => match dominates_from(&Compiled::new(&d, f.var()), x0, depth - 1) {
            Dominance::Holds => Dominance::Holds,
            _ => Dominance::Unknown,
        },
        Err(_) => Dominance::Unknown,
    }
}

/// The difference prepared for root analysis.
struct Prepared {
    nf: NormalForm,
    region: NatIntervalSet,
    approx: bool,
}

enum Shape {
    Constant(Rational),
    Univariate(String),
}

const LOG_SAFE_BASE: f64 = 1.444_667_861_009_766; // e^(1/e): log_b h <= h for every h > 0

fn const_sign(f: &CostExpr) -> Option<Ordering> {
    match evaluate(f, &Env::new()).ok()? {
        ExtReal::Exact(q) => Some(q.cmp(&Rational::zero())),
        other => other.to_f64().partial_cmp(&0.0),
    }
}

/// Replaces terms the root machinery cannot handle by lower bounds of the difference.
fn lower_bound(nf: &NormalForm, var: &str, s: &NatIntervalSet, cfg: &CompareConfig) -> Option<Prepared> {
    let mut out = NormalForm::default();
    let mut region = s.clone();
    let mut approx = false;
    for (m, c) in &nf.terms {
        let dep: Vec<&CostExpr> = m.factors.keys().filter(|f| f.has_var(var)).collect();
        let mut const_part = m.clone();
        const_part.factors.retain(|f, _| !f.has_var(var));
        let sign = {
            let k = NormalForm::monomial(
                Monomial { powers: Default::default(), exps: Default::default(), factors: const_part.factors.clone() },
                c.clone(),
            );
            const_sign(&k.to_expr())?
        };
        if dep.is_empty() {
            match m.exps.get(var) {
                Some(b) if b.is_negative() => {
                    // |c b^x| <= |c| |b|^x on the naturals
                    approx = true;
                    let mut mm = m.clone();
                    mm.exps.insert(var.to_string(), b.abs());
                    let mag = if sign == Ordering::Less { c.clone() } else { -c.clone() };
                    let mag = if c.is_negative() == (sign == Ordering::Less) { -mag.abs() } else { mag };
                    out = out.add(&NormalForm::monomial(mm, mag));
                }
                _ => out = out.add(&NormalForm::monomial(m.clone(), c.clone())),
            }
            continue;
        }
        // only c * log_b(h) with constant c and b is supported
        let single = dep.len() == 1 && m.factors[dep[0]] == 1 && !m.powers.contains_key(var) && !m.exps.contains_key(var);
        let (base, h) = match (single, dep[0]) {
            (true, CostExpr::Log(b, h)) if !b.has_var(var) => (b, h),
            _ => return None,
        };
        let mut rest = m.clone();
        rest.factors.remove(dep[0]);
        let rest = NormalForm::monomial(rest, c.clone());
        approx = true;
        if sign == Ordering::Less {
            let b = match const_sign(&(( **base).clone() - CostExpr::Const(rational::from_f64(LOG_SAFE_BASE).unwrap()))) {
                Some(Ordering::Greater) | Some(Ordering::Equal) => true,
                _ => false,
            };
            if !b {
                return None;
            }
            out = out.add(&rest.mul(&NormalForm::from_expr(h)));
        } else {
            // log_b(h) >= 0 wherever h >= 1
            let ok = leq_f(&CostExpr::int(1), h, &region, cfg);
            region = ok.satisfied;
        }
    }
    Some(Prepared { nf: out, region, approx })
}

fn shape(nf: &NormalForm) -> Option<Shape> {
    let mut vars = std::collections::BTreeSet::new();
    for m in nf.terms.keys() {
        vars.extend(m.powers.keys().cloned());
        vars.extend(m.exps.keys().cloned());
        for f in m.factors.keys() {
            if f.any(&|e| matches!(e, CostExpr::MinOf(_) | CostExpr::MaxOf(_) | CostExpr::Product { .. })) {
                return None;
            }
            vars.extend(f.free_vars());
        }
    }
    match vars.len() {
        0 => nf.as_const().map(Shape::Constant).or_else(|| {
            let e = nf.to_expr();
            match evaluate(&e, &Env::new()).ok()? {
                ExtReal::Exact(q) => Some(Shape::Constant(q)),
                ExtReal::Approx(x) => rational::from_f64(x).map(Shape::Constant),
                _ => None,
            }
        }),
        1 => vars.into_iter().next().map(Shape::Univariate),
        _ => None,
    }
}

fn compare(psi1: &CostExpr, psi2: &CostExpr, s: &NatIntervalSet, mode: Mode, cfg: &CompareConfig) -> ComparisonResult {
    if s.is_empty() {
        return ComparisonResult::unknown(s, false);
    }
    let diff = match eliminate_summations(&(psi2.clone() - psi1.clone())) {
        IntegrationOutcome::Closed(d) => d,
        IntegrationOutcome::Unsupported { .. } => return ComparisonResult::unknown(s, true),
    };
    let nf = NormalForm::from_expr(&diff);
    let var = match shape(&nf) {
        None => return ComparisonResult::unknown(s, false),
        Some(Shape::Constant(q)) => {
            let sat = if mode.accepts(q.cmp(&Rational::zero())) { s.clone() } else { NatIntervalSet::empty() };
            return ComparisonResult { satisfied: sat, residual_unknown: NatIntervalSet::empty(), approximation_used: false };
        }
        Some(Shape::Univariate(v)) => v,
    };
    let prep = match lower_bound(&nf, &var, s, cfg) {
        Some(p) => p,
        None => return ComparisonResult::unknown(s, true),
    };
    if prep.region.is_empty() {
        return ComparisonResult { satisfied: NatIntervalSet::empty(), residual_unknown: s.clone(), approximation_used: true };
    }
    let mut res = match crate::expr::poly_coeffs(&prep.nf, &var) {
        Some(coeffs) => polynomial_path(&coeffs, &prep.region, mode, cfg),
        None => {
            let comp = Compiled::new(&prep.nf.to_expr(), &var);
            if comp.terms().is_none() {
                return ComparisonResult::unknown(s, true);
            }
            let mut r = exponential_path(&comp, &prep.region, mode, cfg);
            r.approximation_used = true;
            r
        }
    };
    res.approximation_used |= prep.approx;
    let lost = prep.region.complement_in(s);
    res.residual_unknown = res.residual_unknown.union(&lost).difference(&res.satisfied);
    res
}

fn horner_exact(c: &[Rational], n: u64) -> Rational {
    let x = rational::from_u64(n);
    c.iter().rev().fold(Rational::zero(), |acc, a| acc * &x + a)
}

/// Exact decision for polynomials: signs are constant between root zones.
fn polynomial_path(coeffs: &[Rational], s: &NatIntervalSet, mode: Mode, cfg: &CompareConfig) -> ComparisonResult {
    if coeffs.iter().all(|c| c.is_zero()) {
        let sat = if mode == Mode::NonStrict { s.clone() } else { NatIntervalSet::empty() };
        return ComparisonResult { satisfied: sat, residual_unknown: NatIntervalSet::empty(), approximation_used: false };
    }
    let roots = match poly_roots_seeded(coeffs, cfg.seed) {
        Ok(r) => r.roots,
        Err(_) => return ComparisonResult::unknown(s, false),
    };
    let ok = |n: u64| mode.accepts(horner_exact(coeffs, n).cmp(&Rational::zero()));
    let zones = NatIntervalSet::new(roots.iter().filter_map(root_zone).collect());
    let mut sat = Vec::new();
    let mut unknown = Vec::new();
    for z in zones.intervals() {
        let hi = z.hi.unwrap();
        if hi - z.lo > cfg.enum_threshold {
            unknown.push(*z);
            continue;
        }
        sat.extend((z.lo..=hi).filter(|&n| ok(n)).map(NatInterval::point));
    }
    let lead_positive = coeffs.iter().rev().find(|c| !c.is_zero()).map_or(false, |c| c.is_positive());
    for gap in zones.complement_in(&NatIntervalSet::all()).intervals() {
        let first = ok(gap.lo);
        match gap.hi {
            Some(h) => {
                if first == ok(h) {
                    if first {
                        sat.push(*gap);
                    }
                } else if h - gap.lo <= cfg.enum_threshold {
                    sat.extend((gap.lo..=h).filter(|&n| ok(n)).map(NatInterval::point));
                } else {
                    unknown.push(*gap);
                }
            }
            None => {
                let tail_ok = if mode == Mode::Strict { lead_positive } else { lead_positive };
                if first == tail_ok {
                    if first {
                        sat.push(*gap);
                    }
                } else {
                    unknown.push(*gap);
                }
            }
        }
    }
    let satisfied = NatIntervalSet::new(sat).intersect(s);
    let residual = NatIntervalSet::new(unknown).intersect(s).difference(&satisfied);
    ComparisonResult { satisfied, residual_unknown: residual, approximation_used: false }
}

fn root_zone(r: &Root) -> Option<NatInterval> {
    let (lo, hi) = match &r.exactness {
        crate::roots::Exactness::Exact(q) => (q.floor(), q.ceil()),
        crate::roots::Exactness::Approx { radius } => {
            let slack = radius + 1e-9 * r.value.abs().max(1.0);
            (
                rational::from_f64((r.value - slack).floor()).unwrap_or_else(Rational::zero),
                rational::from_f64((r.value + slack).ceil())?,
            )
        }
    };
    let lo = if lo.is_negative() { 0 } else { rational::floor_u64(&lo)? };
    let hi = rational::floor_u64(&hi.max(Rational::zero()))?;
    NatInterval::new(lo, Some(hi))
}

/// Maclaurin surrogate of an exponential polynomial, ascending coefficients.
fn surrogate(comp: &Compiled, order: u32) -> Option<Vec<f64>> {
    let terms = comp.terms()?;
    let max_deg = terms.iter().map(|t| t.degree).max()?;
    if terms.iter().any(|t| t.degree < 0) {
        return None;
    }
    let mut c = vec![0.0; max_deg as usize + order as usize + 1];
    let fact: Vec<f64> = (0..=order).map(|n| rational::to_f64(&Rational::from_integer(crate::expr::factorial(n)))).collect();
    for t in terms {
        let b = rational::to_f64(&t.base);
        if b == 1.0 {
            c[t.degree as usize] += t.coeff;
            continue;
        }
        let lb = b.ln();
        for n in 0..=order {
            c[t.degree as usize + n as usize] += t.coeff * lb.powi(n as i32) / fact[n as usize];
        }
    }
    Some(c)
}

/// Roots of `f` (one variable): exact polynomial roots, or the roots of the
/// Maclaurin surrogate of an exponential polynomial.
pub fn roots_of(f: &CostExpr, var: &str, cfg: &CompareConfig) -> Result<RootSet, RootError> {
    let nf = NormalForm::from_expr(f);
    if let Some(c) = crate::expr::poly_coeffs(&nf, var) {
        return poly_roots_seeded(&c, cfg.seed);
    }
    let comp = Compiled::new(f, var);
    let coeffs: Option<Vec<Rational>> =
        surrogate(&comp, cfg.taylor_order).and_then(|p| p.iter().map(|&x| rational::from_f64(x)).collect());
    let mut set = poly_roots_seeded(&coeffs.ok_or(RootError::NoConvergence)?, cfg.seed)?;
    set.method = RootMethod::SurrogatePolynomial;
    Ok(set)
}

fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

struct Piece {
    lo: f64,
    lo_root: bool,
    hi: Option<f64>,
}

fn witness(p: &Piece) -> (f64, Option<u64>) {
    match p.hi {
        None => {
            let w = if p.lo_root { p.lo + 1.0 } else { 1.0 };
            (w, None)
        }
        Some(h) => {
            let mid = 0.5 * (p.lo + h);
            let first = if p.lo_root { (p.lo.floor() + 1.0).max(0.0) } else { p.lo.ceil() };
            let last = if h.fract() == 0.0 { h - 1.0 } else { h.floor() };
            if first <= last {
                let n = mid.round().clamp(first, last);
                (n, Some(n as u64))
            } else {
                (mid, None)
            }
        }
    }
}

/// Root-based partition for exponential polynomials.
fn exponential_path(comp: &Compiled, s: &NatIntervalSet, mode: Mode, cfg: &CompareConfig) -> ComparisonResult {
    let unknown = || ComparisonResult::unknown(s, true);
    let poly = match surrogate(comp, cfg.taylor_order) {
        Some(p) => p,
        None => return unknown(),
    };
    let coeffs: Option<Vec<Rational>> = poly.iter().map(|&x| rational::from_f64(x)).collect();
    let roots = match coeffs.map(|c| poly_roots_seeded(&c, cfg.seed)) {
        Some(Ok(r)) => r.roots,
        _ => return unknown(),
    };
    let mut pieces = Vec::new();
    let mut lo = (0.0, false);
    for r in &roots {
        if r.value > lo.0 || !lo.1 && r.value > 0.0 {
            pieces.push(Piece { lo: lo.0, lo_root: lo.1, hi: Some(r.value) });
        }
        lo = (r.value, true);
    }
    pieces.push(Piece { lo: lo.0, lo_root: lo.1, hi: None });

    let ok = |n: u64| comp.sign_at(n).map_or(false, |o| mode.accepts(o));
    let mut sat = NatIntervalSet::empty();
    let mut residual = NatIntervalSet::empty();
    for p in &pieces {
        let span = || {
            let a = nat_snap(p.lo, Endpoint::Lower).unwrap_or(0);
            match p.hi {
                Some(h) => nat_snap(h, Endpoint::Upper)
                    .and_then(|b| NatInterval::new(a, Some(b)))
                    .map_or_else(NatIntervalSet::empty, NatIntervalSet::single),
                None => NatIntervalSet::single(NatInterval::from(a)),
            }
        };
        let (w, wn) = witness(p);
        let truth = match wn {
            Some(n) => comp.sign_at(n),
            None => comp.eval(w).partial_cmp(&0.0),
        };
        let model = eval_poly(&poly, w).partial_cmp(&0.0);
        match truth {
            Some(Ordering::Greater) if model == Some(Ordering::Greater) => {}
            Some(Ordering::Less) if model == Some(Ordering::Less) => continue,
            _ => {
                residual = residual.union(&span().intersect(s));
                continue;
            }
        }
        let a = if p.lo_root { safe_root(comp, p.lo, RequiredSide::RootAtOrBelow, &cfg.safe) } else { Ok(0.0) };
        let b = match p.hi {
            Some(h) => safe_root(comp, h, RequiredSide::RootAtOrAbove, &cfg.safe).map(Some),
            None => Ok(None),
        };
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                residual = residual.union(&span().intersect(s));
                continue;
            }
        };
        let mut lo_n = nat_snap(a, Endpoint::Lower).unwrap();
        let mut hi_n = match b {
            Some(b) => match nat_snap(b, Endpoint::Upper) {
                Some(h) => Some(h),
                None => continue,
            },
            None => None,
        };
        for _ in 0..3 {
            if hi_n.map_or(true, |h| lo_n <= h) && !ok(lo_n) {
                lo_n += 1;
            }
            if let Some(h) = hi_n {
                if h >= lo_n && !ok(h) {
                    hi_n = h.checked_sub(1);
                }
            }
        }
        let hi_n = match hi_n {
            Some(h) if h < lo_n => continue,
            other => other,
        };
        let exact_zero = |n: u64| comp.sign_at(n) == Some(Ordering::Equal);
        let mut lo_n = lo_n;
        let mut hi_n = hi_n;
        if mode == Mode::NonStrict {
            if lo_n > 0 && exact_zero(lo_n - 1) {
                lo_n -= 1;
            }
            if let Some(h) = hi_n {
                if exact_zero(h + 1) {
                    hi_n = Some(h + 1);
                }
            }
        }
        let candidate = NatIntervalSet::single(NatInterval::new(lo_n, hi_n).unwrap()).intersect(s);
        for iv in candidate.intervals() {
            let (good, bad) = confirm(comp, iv, mode, cfg);
            sat = sat.union(&good);
            residual = residual.union(&bad);
        }
    }
    let residual = residual.difference(&sat);
    ComparisonResult { satisfied: sat, residual_unknown: residual, approximation_used: true }
}

/// Splits a candidate interval into confirmed points and unconfirmed points.
fn confirm(comp: &Compiled, iv: &NatInterval, mode: Mode, cfg: &CompareConfig) -> (NatIntervalSet, NatIntervalSet) {
    let ok = |n: u64| comp.sign_at(n).map_or(false, |o| mode.accepts(o));
    let whole = NatIntervalSet::single(*iv);
    let checked = |lo: u64, hi: u64| {
        let bad = NatIntervalSet::from_points(par::failures(lo, hi, ok));
        (NatIntervalSet::single(NatInterval::closed(lo, hi)).difference(&bad), bad)
    };
    if let Some(n) = iv.len() {
        if n <= cfg.enum_threshold {
            return checked(iv.lo, iv.hi.unwrap());
        }
    }
    // tail: find x0 from which dominance holds, enumerate the prefix
    let mut step = 0u64;
    loop {
        let x0 = iv.lo.max(1) + step;
        if iv.hi.map_or(false, |h| x0 > h) || x0 - iv.lo > cfg.enum_threshold {
            return (NatIntervalSet::empty(), whole);
        }
        match dominates_from(comp, x0 as f64, cfg.dominance_depth) {
            Dominance::Holds => {
                let (mut good, bad) = if x0 > iv.lo { checked(iv.lo, x0 - 1) } else { Default::default() };
                good = good.union(&NatIntervalSet::single(NatInterval::new(x0, iv.hi).unwrap()));
                return (good, bad);
            }
            Dominance::Falsified => return (NatIntervalSet::empty(), whole),
            Dominance::Unknown => {}
        }
        step = if step == 0 { 1 } else { step * 2 };
        if step > 1 << 20 {
            return (NatIntervalSet::empty(), whole);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn p(s: &str) -> CostExpr {
        parse_expr(s).unwrap()
    }

    fn iv(lo: u64, hi: Option<u64>) -> NatIntervalSet {
        NatIntervalSet::single(NatInterval::new(lo, hi).unwrap())
    }

    #[test]
    fn strict_polynomial() {
        let cfg = CompareConfig::default();
        let r = less_f(&p("x"), &p("x**2"), &NatIntervalSet::all(), &cfg);
        assert_eq!(r.satisfied, iv(2, None));
        assert!(!r.approximation_used);
        let r = leq_f(&p("x"), &p("x**2"), &NatIntervalSet::all(), &cfg);
        assert_eq!(r.satisfied, NatIntervalSet::all());
    }

    #[test]
    fn simple_log_region() {
        let cfg = CompareConfig::default();
        let r = leq_f(&p("log(2,x/8)+4"), &p("3000"), &NatIntervalSet::all(), &cfg);
        assert_eq!(r.satisfied, iv(0, Some(23968)));
        assert!(r.approximation_used);
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(eventual_dominance(&p("exp(2,x) - x**2"), "x", 4, 16), Dominance::Holds);
        assert_ne!(eventual_dominance(&p("x**2 - exp(2,x)"), "x", 4, 16), Dominance::Holds);
        assert_eq!(eventual_dominance(&p("x + 1"), "x", 0, 16), Dominance::Holds);
    }

    #[test]
    fn enumeration() {
        let f = p("x - 3");
        assert_eq!(enumerate_check(&f, "x", &NatInterval::closed(4, 100), Mode::Strict, 1000), EnumOutcome::Verified);
        assert_eq!(
            enumerate_check(&f, "x", &NatInterval::closed(0, 100), Mode::Strict, 1000),
            EnumOutcome::CounterexampleAt(0)
        );
        assert_eq!(enumerate_check(&f, "x", &NatInterval::closed(0, 100), Mode::Strict, 10), EnumOutcome::TooLarge);
    }
}
