//! Parsing and emission of resource assertions.
//!
//! Two surface syntaxes are supported: the Ciao `:- check pred ...` form with
//! `costb/3`, `cost/3` and `intervals/1,2` properties, and the XC `#pragma`
//! form with `lo <= N && N <= hi ==> (lb <= energy_nJ && energy_nJ <= ub)`.

use std::fmt;

use thiserror::Error;

use crate::expr::{evaluate, parse_expr, render, CostExpr, Env, ExtReal, Syntax};
use crate::interval::{NatInterval, NatIntervalSet};
use crate::multivar::{render_dnf, ConstraintKind, SizeConstraint, SizeConstraintSet};
use crate::rational::{self, Rational};
use crate::verdict::BoundPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Check,
    Checked,
    False,
    Trust,
    True,
}

impl Status {
    pub fn keyword(self) -> &'static str {
        match self {
            Status::Check => "check",
            Status::Checked => "checked",
            Status::False => "false",
            Status::Trust => "trust",
            Status::True => "true",
        }
    }

    fn parse(s: &str) -> Option<Status> {
        Some(match s {
            "check" => Status::Check,
            "checked" => Status::Checked,
            "false" => Status::False,
            "trust" => Status::Trust,
            "true" => Status::True,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scope {
    pub name: String,
    pub args: Vec<String>,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Precondition {
    Whole,
    /// Size expression (`nat(N)`, `length(A)`, or a bare XC argument) ranging over `set`.
    Intervals { var: String, set: NatIntervalSet },
    /// Disjunction of conjunctions over several size expressions.
    Constraints(Vec<SizeConstraintSet>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum BoundStyle {
    #[default]
    Costb,
    Cost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dialect {
    Ciao,
    Xc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub status: Status,
    pub scope: Scope,
    /// Opaque type conjuncts such as `list(A,gnd)`.
    pub types: Vec<String>,
    pub precond: Precondition,
    pub postcond: Option<String>,
    pub resource: String,
    pub bounds: BoundPair,
    pub style: BoundStyle,
    /// Computational properties other than cost bounds, kept as text.
    pub extra_props: Vec<String>,
}

impl Assertion {
    pub fn with_status(&self, status: Status) -> Assertion {
        Assertion { status, ..self.clone() }
    }

    pub fn with_precond(&self, precond: Precondition) -> Assertion {
        Assertion { precond, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}")]
pub struct AssertParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
}

/// Detects the syntax from the leading token.
pub fn parse_assertion(text: &str) -> Result<Assertion, AssertParseError> {
    let t = text.trim_start();
    if t.starts_with("#pragma") {
        parse_xc(text)
    } else if t.starts_with(":-") {
        parse_ciao(text)
    } else {
        Err(error_at(text, t, "`#pragma` or `:-`"))
    }
}

fn error_at(whole: &str, piece: &str, expected: &str) -> AssertParseError {
    let off = (piece.as_ptr() as usize).saturating_sub(whole.as_ptr() as usize).min(whole.len());
    let before = &whole[..off];
    let line = before.matches('\n').count() + 1;
    let col = off - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    AssertParseError { line, col, expected: expected.to_string() }
}

fn depth_scan(s: &str) -> impl Iterator<Item = (usize, i32)> + '_ {
    let mut depth = 0;
    s.char_indices().map(move |(i, c)| {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        (i, if matches!(c, '(' | '[') { depth - 1 } else { depth })
    })
}

fn find_top(s: &str, pat: &str) -> Option<usize> {
    depth_scan(s).find(|&(i, d)| d == 0 && s[i..].starts_with(pat)).map(|(i, _)| i)
}

fn split_top<'a>(s: &'a str, sep: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut skip_to = 0;
    for (i, d) in depth_scan(s) {
        if i < skip_to {
            continue;
        }
        if d == 0 && s[i..].starts_with(sep) {
            out.push(&s[start..i]);
            start = i + sep.len();
            skip_to = start;
        }
    }
    out.push(&s[start..]);
    out
}

fn strip_parens(s: &str) -> &str {
    let mut s = s.trim();
    loop {
        if !(s.starts_with('(') && s.ends_with(')')) {
            return s;
        }
        let closes_at_end = depth_scan(s).all(|(i, d)| d > 0 || i == 0 || i == s.len() - 1);
        if !closes_at_end {
            return s;
        }
        s = s[1..s.len() - 1].trim();
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

fn leading_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    let end = s.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(s.len());
    (&s[..end], &s[end..])
}

fn parse_scope<'a>(whole: &str, s: &'a str) -> Result<(Scope, &'a str), AssertParseError> {
    let (name, rest) = leading_word(s);
    if !is_ident(name) {
        return Err(error_at(whole, s.trim_start(), "predicate scope"));
    }
    let rest = rest.trim_start();
    if !rest.starts_with('(') {
        return Ok((Scope { name: name.into(), args: vec![] }, rest));
    }
    let close = depth_scan(rest).find(|&(i, d)| d == 0 && rest[i..].starts_with(')')).map(|(i, _)| i);
    let close = close.ok_or_else(|| error_at(whole, rest, "`)` closing the scope"))?;
    let inner = rest[1..close].trim();
    let mut args = Vec::new();
    if !inner.is_empty() {
        for a in split_top(inner, ",") {
            let a = a.trim();
            if !is_ident(a) {
                return Err(error_at(whole, a, "argument identifier"));
            }
            args.push(a.to_string());
        }
    }
    Ok((Scope { name: name.into(), args }, &rest[close + 1..]))
}

fn expr_at(whole: &str, s: &str) -> Result<CostExpr, AssertParseError> {
    let t = s.trim();
    parse_expr(t).map_err(|e| {
        let piece = &t[e.pos.min(t.len())..];
        error_at(whole, piece, &format!("expr ({})", e.msg))
    })
}

fn ground_at(whole: &str, s: &str) -> Result<Rational, AssertParseError> {
    let e = expr_at(whole, s)?;
    match evaluate(&e, &Env::new()) {
        Ok(ExtReal::Exact(q)) => Ok(q),
        _ => Err(error_at(whole, s.trim(), "ground_expr")),
    }
}

fn nat_at(whole: &str, s: &str) -> Result<u64, AssertParseError> {
    let t = s.trim();
    t.parse().map_err(|_| error_at(whole, t, "natural number"))
}

fn parse_interval_list(whole: &str, s: &str) -> Result<NatIntervalSet, AssertParseError> {
    let t = s.trim();
    if !(t.starts_with('[') && t.ends_with(']')) {
        return Err(error_at(whole, t, "interval list `[i(L,U),...]`"));
    }
    let inner = t[1..t.len() - 1].trim();
    let mut ivs = Vec::new();
    if inner.is_empty() {
        return Ok(NatIntervalSet::empty());
    }
    for item in split_top(inner, ",") {
        let it = item.trim();
        if !(it.starts_with("i(") && it.ends_with(')')) {
            return Err(error_at(whole, it, "`i(L,U)`"));
        }
        let parts = split_top(&it[2..it.len() - 1], ",");
        if parts.len() != 2 {
            return Err(error_at(whole, it, "`i(L,U)` with two endpoints"));
        }
        let lo = nat_at(whole, parts[0])?;
        let hi = match parts[1].trim() {
            "inf" | "+inf" => None,
            _ => Some(nat_at(whole, parts[1])?),
        };
        ivs.push(NatInterval::new(lo, hi).ok_or_else(|| error_at(whole, it, "L <= U"))?);
    }
    Ok(NatIntervalSet::new(ivs))
}

fn parse_constraint(whole: &str, s: &str) -> Result<SizeConstraint, AssertParseError> {
    let t = s.trim();
    let (kind, rest) = if let Some(r) = t.strip_prefix("leq(") {
        (ConstraintKind::Leq, r)
    } else if let Some(r) = t.strip_prefix("lt(") {
        (ConstraintKind::Lt, r)
    } else {
        return Err(error_at(whole, t, "`leq(E1,E2)` or `lt(E1,E2)`"));
    };
    let rest = rest.strip_suffix(')').ok_or_else(|| error_at(whole, t, "`)`"))?;
    let parts = split_top(rest, ",");
    if parts.len() != 2 {
        return Err(error_at(whole, t, "two constraint operands"));
    }
    Ok(SizeConstraint::new(kind, expr_at(whole, parts[0])?, expr_at(whole, parts[1])?))
}

fn parse_list<'a>(whole: &str, s: &'a str, what: &str) -> Result<Vec<&'a str>, AssertParseError> {
    let t = s.trim();
    match t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(inner) if inner.trim().is_empty() => Ok(vec![]),
        Some(inner) => Ok(split_top(inner, ",")),
        None => Err(error_at(whole, t, what)),
    }
}

fn parse_dnf(whole: &str, s: &str) -> Result<Vec<SizeConstraintSet>, AssertParseError> {
    parse_list(whole, s, "constraint list `[[...]]`")?
        .into_iter()
        .map(|conj| {
            let cs = parse_list(whole, conj, "constraint conjunction `[...]`")?
                .into_iter()
                .map(|c| parse_constraint(whole, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SizeConstraintSet::new(cs))
        })
        .collect()
}

/// Parses a standalone `[i(L,U),...]` list.
pub fn parse_interval_set(text: &str) -> Result<NatIntervalSet, AssertParseError> {
    parse_interval_list(text, text)
}

/// Parses a standalone `[[leq(..),lt(..)],[..]]` constraint list.
pub fn parse_constraint_dnf(text: &str) -> Result<Vec<SizeConstraintSet>, AssertParseError> {
    parse_dnf(text, text)
}

fn metric_var(whole: &str, s: &str) -> Result<String, AssertParseError> {
    match expr_at(whole, s)? {
        CostExpr::Var(v) => Ok(v),
        _ => Err(error_at(whole, s.trim(), "size metric such as `nat(N)`")),
    }
}

/// Parses `:- status pred Head : Pre => Post + Comp.`
pub fn parse_ciao(text: &str) -> Result<Assertion, AssertParseError> {
    let t = text.trim();
    let body = t.strip_prefix(":-").ok_or_else(|| error_at(text, t, "`:-`"))?;
    let body = body.trim_end();
    let body = body.strip_suffix('.').ok_or_else(|| error_at(text, &t[t.len()..], "`.` ending the assertion"))?;
    let (word, mut rest) = leading_word(body);
    let status = match Status::parse(word) {
        Some(s) => s,
        None if word == "pred" => {
            return Err(error_at(text, body.trim_start(), "status (check, checked, false, trust, true)"));
        }
        None => return Err(error_at(text, body.trim_start(), "status (check, checked, false, trust, true)")),
    };
    let (w2, r2) = leading_word(rest);
    if w2 == "pred" {
        rest = r2;
    }
    let (scope, rest) = parse_scope(text, rest)?;
    let rest = rest.trim();

    let plus = find_top(rest, "+");
    let arrow = find_top(rest, "=>");
    let head_end = [plus, arrow].iter().flatten().min().copied().unwrap_or(rest.len());
    let pre_text = match rest.strip_prefix(':') {
        Some(_) => Some(&rest[1..head_end]),
        None if head_end == 0 => None,
        None => return Err(error_at(text, rest, "`:`, `=>` or `+`")),
    };
    let postcond = arrow.map(|a| rest[a + 2..plus.filter(|&p| p > a).unwrap_or(rest.len())].trim().to_string());
    let comp_text = plus.map(|p| &rest[p + 1..]);

    let mut types = Vec::new();
    let mut precond = Precondition::Whole;
    if let Some(pre) = pre_text {
        for c in split_top(strip_parens(pre), ",") {
            let c = c.trim();
            if c.is_empty() {
                continue;
            }
            match c.strip_prefix("intervals(").and_then(|r| r.strip_suffix(')')) {
                Some(inner) => {
                    let args = split_top(inner, ",");
                    precond = match args.len() {
                        1 => Precondition::Constraints(parse_dnf(text, args[0])?),
                        2 => Precondition::Intervals { var: metric_var(text, args[0])?, set: parse_interval_list(text, args[1])? },
                        _ => return Err(error_at(text, c, "intervals/1 or intervals/2")),
                    };
                }
                None => types.push(c.to_string()),
            }
        }
    }

    let mut bounds = BoundPair::default();
    let mut resource: Option<String> = None;
    let mut style = BoundStyle::Cost;
    let mut extra_props = Vec::new();
    let mut set_resource = |r: &str, at: &str| -> Result<(), AssertParseError> {
        let r = r.trim();
        match &resource {
            Some(prev) if prev != r => Err(error_at(text, at, &format!("resource `{prev}`"))),
            _ => {
                resource = Some(r.to_string());
                Ok(())
            }
        }
    };
    if let Some(comp) = comp_text {
        for p in split_top(strip_parens(comp), ",") {
            let p = p.trim();
            if let Some(inner) = p.strip_prefix("costb(").and_then(|r| r.strip_suffix(')')) {
                let a = split_top(inner, ",");
                if a.len() != 3 {
                    return Err(error_at(text, p, "costb(Resource, Lower, Upper)"));
                }
                set_resource(a[0], a[0])?;
                bounds.lower = Some(expr_at(text, a[1])?);
                bounds.upper = Some(expr_at(text, a[2])?);
                style = BoundStyle::Costb;
            } else if let Some(inner) = p.strip_prefix("cost(").and_then(|r| r.strip_suffix(')')) {
                let a = split_top(inner, ",");
                if a.len() != 3 {
                    return Err(error_at(text, p, "cost(lb|ub, Resource, Expr)"));
                }
                set_resource(a[1], a[1])?;
                let e = expr_at(text, a[2])?;
                match a[0].trim() {
                    "lb" => bounds.lower = Some(e),
                    "ub" => bounds.upper = Some(e),
                    _ => return Err(error_at(text, a[0].trim(), "`lb` or `ub`")),
                }
            } else if !p.is_empty() {
                extra_props.push(p.to_string());
            }
        }
    }
    Ok(Assertion {
        status,
        scope,
        types,
        precond,
        postcond,
        resource: resource.unwrap_or_else(|| "steps".into()),
        bounds,
        style,
        extra_props,
    })
}

/// Parses `#pragma status scope : (precond) ==> (cost_bounds)`.
pub fn parse_xc(text: &str) -> Result<Assertion, AssertParseError> {
    let t = text.trim();
    let rest = t.strip_prefix("#pragma").ok_or_else(|| error_at(text, t, "`#pragma`"))?;
    let (word, rest) = leading_word(rest);
    let status = Status::parse(word).ok_or_else(|| error_at(text, rest.trim_start(), "status (check, trust, true, checked, false)"))?;
    let (scope, rest) = parse_scope(text, rest)?;
    let rest = rest.trim_start();
    let body = rest.strip_prefix(':').ok_or_else(|| error_at(text, rest, "`:`"))?;
    let (pre, bounds_text) = match find_top(body, "==>") {
        Some(i) => (Some(strip_parens(&body[..i])), strip_parens(&body[i + 3..])),
        None => (None, strip_parens(body)),
    };

    let mut precond = Precondition::Whole;
    if let Some(pre) = pre {
        let mut var: Option<&str> = None;
        let mut lo = 0u64;
        let mut hi: Option<u64> = None;
        let mut empty = false;
        for cond in split_top(pre, "&&") {
            let sides = split_top(cond, "<=");
            if sides.len() != 2 {
                return Err(error_at(text, cond.trim(), "lower_cond or upper_cond"));
            }
            let (l, r) = (sides[0].trim(), sides[1].trim());
            let (id, bound_is_lower) = if is_ident(r) && scope.args.iter().any(|a| a == r) {
                (r, true)
            } else if is_ident(l) {
                (l, false)
            } else {
                return Err(error_at(text, cond.trim(), "identifier in precond"));
            };
            if var.map_or(false, |v| v != id) {
                return Err(error_at(text, cond.trim(), "a single precondition variable"));
            }
            var = Some(id);
            if bound_is_lower {
                let q = ground_at(text, l)?;
                lo = lo.max(if q.is_integer() && q < Rational::from_integer(0.into()) { 0 } else { rational::ceil_nat(&q) });
            } else {
                let q = ground_at(text, r)?;
                match rational::floor_u64(&q) {
                    Some(h) => hi = Some(hi.map_or(h, |p: u64| p.min(h))),
                    None => empty = true,
                }
            }
        }
        let var = var.ok_or_else(|| error_at(text, pre, "precond"))?;
        let set = match NatInterval::new(lo, hi) {
            Some(iv) if !empty => NatIntervalSet::single(iv),
            _ => NatIntervalSet::empty(),
        };
        precond = Precondition::Intervals { var: var.to_string(), set };
    }

    let mut bounds = BoundPair::default();
    let mut resource: Option<String> = None;
    let is_resource = |s: &str| is_ident(s) && !scope.args.iter().any(|a| a == s);
    if !bounds_text.is_empty() {
        for b in split_top(bounds_text, "&&") {
            let sides: Vec<&str> = split_top(b, "<=").into_iter().map(str::trim).collect();
            let (res, lower, upper) = match sides.as_slice() {
                [l, m, r] if is_resource(m) => (*m, Some(*l), Some(*r)),
                [l, r] if is_resource(r) => (*r, Some(*l), None),
                [l, r] if is_resource(l) => (*l, None, Some(*r)),
                _ => return Err(error_at(text, b.trim(), "lower_bound or upper_bound on the resource")),
            };
            if resource.as_deref().map_or(false, |p| p != res) {
                return Err(error_at(text, b.trim(), "a single resource"));
            }
            resource = Some(res.to_string());
            if let Some(l) = lower {
                bounds.lower = Some(expr_at(text, l)?);
            }
            if let Some(u) = upper {
                bounds.upper = Some(expr_at(text, u)?);
            }
        }
    }
    Ok(Assertion {
        status,
        scope,
        types: vec![],
        precond,
        postcond: None,
        resource: resource.unwrap_or_else(|| "energy_nJ".into()),
        bounds,
        style: BoundStyle::Costb,
        extra_props: vec![],
    })
}

pub fn emit(a: &Assertion, dialect: Dialect) -> String {
    match (dialect, &a.precond) {
        (Dialect::Xc, Precondition::Constraints(_)) => emit_ciao(a),
        (Dialect::Xc, _) if !a.types.is_empty() || a.postcond.is_some() || !a.extra_props.is_empty() => emit_ciao(a),
        (Dialect::Xc, _) => emit_xc(a),
        (Dialect::Ciao, _) => emit_ciao(a),
    }
}

fn intervals_prop(p: &Precondition) -> Option<String> {
    match p {
        Precondition::Whole => None,
        Precondition::Intervals { var, set } => Some(format!("intervals({},{})", var, set.to_ciao())),
        Precondition::Constraints(dnf) => Some(format!("intervals({})", render_dnf(dnf))),
    }
}

pub fn emit_ciao(a: &Assertion) -> String {
    let mut out = format!(":- {} pred {}", a.status.keyword(), a.scope);
    let mut pre: Vec<String> = a.types.clone();
    pre.extend(intervals_prop(&a.precond));
    match pre.len() {
        0 => {}
        1 => out += &format!(" : {}", pre[0]),
        _ => out += &format!(" : ({})", pre.join(", ")),
    }
    if let Some(post) = &a.postcond {
        out += &format!(" => {post}");
    }
    let mut comp = Vec::new();
    let r = &a.resource;
    match (&a.bounds.lower, &a.bounds.upper, a.style) {
        (Some(l), Some(u), BoundStyle::Costb) => comp.push(format!("costb({r},{l},{u})")),
        (l, u, _) => {
            if let Some(l) = l {
                comp.push(format!("cost(lb,{r},{l})"));
            }
            if let Some(u) = u {
                comp.push(format!("cost(ub,{r},{u})"));
            }
        }
    }
    comp.extend(a.extra_props.iter().cloned());
    match comp.len() {
        0 => {}
        1 => out += &format!(" + {}", comp[0]),
        _ => out += &format!(" + ({})", comp.join(", ")),
    }
    out.push('.');
    out
}

fn xc_body(a: &Assertion) -> String {
    let r = &a.resource;
    let x = |e: &CostExpr| render(e, Syntax::Xc);
    match (&a.bounds.lower, &a.bounds.upper) {
        (Some(l), Some(u)) => format!("({} <= {r} && {r} <= {})", x(l), x(u)),
        (Some(l), None) => format!("({} <= {r})", x(l)),
        (None, Some(u)) => format!("({r} <= {})", x(u)),
        (None, None) => "()".into(),
    }
}

/// One `#pragma` line per precondition interval.
pub fn emit_xc(a: &Assertion) -> String {
    let head = format!("#pragma {} {} : ", a.status.keyword(), a.scope);
    let body = xc_body(a);
    match &a.precond {
        Precondition::Intervals { var, set } => {
            let lines: Vec<String> = set
                .intervals()
                .iter()
                .map(|iv| {
                    let pre = match (iv.lo, iv.hi) {
                        (lo, None) => format!("{lo} <= {var}"),
                        (0, Some(hi)) => format!("{var} <= {hi}"),
                        (lo, Some(hi)) => format!("{lo} <= {var} && {var} <= {hi}"),
                    };
                    format!("{head}({pre}) ==> {body}")
                })
                .collect();
            if lines.is_empty() {
                // an empty precondition interval set: N <= -1 has no natural solution
                format!("{head}({var} <= -1) ==> {body}")
            } else {
                lines.join("\n")
            }
        }
        _ => format!("{head}{body}"),
    }
}
