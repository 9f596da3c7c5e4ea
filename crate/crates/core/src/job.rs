//! Job files: a batch of assertions with the analysis results they are checked against.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::assertlang::{emit, parse_assertion, parse_constraint_dnf, parse_interval_set, Assertion, Dialect, Precondition};
use crate::compare::{CompareConfig, DEFAULT_ENUM_THRESHOLD, DEFAULT_TAYLOR_ORDER};
use crate::expr::{evaluate, parse_expr, CostExpr, Env, ExtReal};
use crate::interval::{NatInterval, NatIntervalSet};
use crate::par;
use crate::rational::{self, Rational};
use crate::roots::SafeRootConfig;
use crate::verdict::{
    align, band_violation, check_assertion, eval_check, synthesize_output, AnalysisResult, BoundPair, LowerDefault, Outcome, Region, SizeVar,
    VerdictError, VerdictPartition,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssertionEntry {
    Text(String),
    Named { id: String, text: String },
}

impl AssertionEntry {
    pub fn text(&self) -> &str {
        match self {
            AssertionEntry::Text(t) | AssertionEntry::Named { text: t, .. } => t,
        }
    }

    pub fn id(&self) -> Option<&str> {
        match self {
            AssertionEntry::Named { id, .. } => Some(id),
            AssertionEntry::Text(_) => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRecord {
    pub predicate: String,
    pub arity: usize,
    pub size_vars: Vec<SizeVar>,
    #[serde(default)]
    pub lb: Option<String>,
    #[serde(default)]
    pub ub: Option<String>,
    /// `[i(L,U),...]` or `[[leq(..),...],...]`.
    #[serde(default)]
    pub domain: Option<String>,
}

fn default_taylor() -> u32 {
    DEFAULT_TAYLOR_ORDER
}
fn default_delta() -> f64 {
    1.0 / 64.0
}
fn default_kappa() -> f64 {
    1e-3
}
fn default_threshold() -> u64 {
    DEFAULT_ENUM_THRESHOLD
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobOptions {
    #[serde(default = "default_taylor")]
    pub taylor_order: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_threshold")]
    pub enum_threshold: u64,
    #[serde(default)]
    pub oracle_crosscheck: bool,
    /// Missing-lower-bound default per resource; unlisted resources are non-negative.
    #[serde(default)]
    pub resources: BTreeMap<String, LowerDefault>,
}

impl Default for JobOptions {
    fn default() -> Self {
        JobOptions {
            taylor_order: default_taylor(),
            delta: default_delta(),
            kappa: default_kappa(),
            enum_threshold: default_threshold(),
            oracle_crosscheck: false,
            resources: BTreeMap::new(),
        }
    }
}

impl JobOptions {
    pub fn compare_config(&self, seed: u64) -> CompareConfig {
        CompareConfig {
            taylor_order: self.taylor_order,
            safe: SafeRootConfig { kappa: self.kappa, delta: self.delta, ..SafeRootConfig::default() },
            enum_threshold: self.enum_threshold,
            seed,
            ..CompareConfig::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub v: u32,
    #[serde(default)]
    pub assertions: Vec<AssertionEntry>,
    #[serde(default)]
    pub analysis: Vec<AnalysisRecord>,
    #[serde(default)]
    pub options: JobOptions,
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("job file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

fn invalid(path: impl Into<String>, msg: impl Into<String>) -> JobError {
    JobError::Invalid { path: path.into(), msg: msg.into() }
}

/// A validated job: parsed assertions and analysis results.
#[derive(Clone, Debug)]
pub struct Job {
    pub entries: Vec<(Option<String>, String, Assertion)>,
    pub analysis: Vec<AnalysisResult>,
    pub options: JobOptions,
}

impl JobFile {
    pub fn from_json(text: &str) -> Result<JobFile, JobError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<Job, JobError> {
        if self.v != 1 {
            return Err(invalid("v", format!("unsupported schema version {}", self.v)));
        }
        let o = &self.options;
        if !(o.kappa > 0.0) {
            return Err(invalid("options.kappa", "must be positive"));
        }
        if !(o.delta.abs() > 0.0 && o.delta.abs() < 1.0) {
            return Err(invalid("options.delta", "magnitude must lie in (0,1)"));
        }
        let mut analysis: Vec<AnalysisResult> = Vec::new();
        for (i, r) in self.analysis.iter().enumerate() {
            let path = |f: &str| format!("analysis[{i}].{f}");
            if analysis.iter().any(|a| a.predicate == r.predicate && a.arity == r.arity) {
                return Err(invalid(format!("analysis[{i}]"), format!("duplicate record for {}/{}", r.predicate, r.arity)));
            }
            if r.size_vars.is_empty() {
                return Err(invalid(path("size_vars"), "at least one size variable is required"));
            }
            let parse = |f: &str, s: &Option<String>| -> Result<Option<CostExpr>, JobError> {
                s.as_ref().map(|t| parse_expr(t).map_err(|e| invalid(path(f), e.to_string()))).transpose()
            };
            let lower = parse("lb", &r.lb)?;
            let upper = parse("ub", &r.ub)?;
            let names: Vec<&str> = r.size_vars.iter().map(|v| v.name.as_str()).collect();
            for (f, e) in [("lb", &lower), ("ub", &upper)] {
                if let Some(v) = e.iter().flat_map(|e| e.free_vars()).find(|v| !names.contains(&v.as_str())) {
                    return Err(invalid(path(f), format!("variable {v} is not a declared size variable")));
                }
            }
            if let Some(sv) = r.size_vars.iter().find(|v| v.arg >= r.arity) {
                return Err(invalid(path("size_vars"), format!("argument index {} out of range", sv.arg)));
            }
            let domain = match r.domain.as_deref().map(str::trim) {
                None => None,
                Some(t) if t.starts_with("[[") => {
                    Some(Region::Constraints(parse_constraint_dnf(t).map_err(|e| invalid(path("domain"), e.to_string()))?))
                }
                Some(t) => Some(Region::Nat(parse_interval_set(t).map_err(|e| invalid(path("domain"), e.to_string()))?)),
            };
            analysis.push(AnalysisResult {
                predicate: r.predicate.clone(),
                arity: r.arity,
                size_vars: r.size_vars.clone(),
                bounds: BoundPair { lower, upper, lower_default: LowerDefault::Zero },
                domain,
            });
        }
        let mut entries = Vec::new();
        for (i, e) in self.assertions.iter().enumerate() {
            let mut a = parse_assertion(e.text()).map_err(|err| invalid(format!("assertions[{i}]"), err.to_string()))?;
            a.bounds.lower_default = o.resources.get(&a.resource).copied().unwrap_or_default();
            entries.push((e.id().map(String::from), e.text().to_string(), a));
        }
        for a in analysis.iter_mut() {
            let res = entries.iter().find(|(_, _, s)| s.scope.name == a.predicate).map(|(_, _, s)| s.resource.clone());
            if let Some(res) = res {
                a.bounds.lower_default = o.resources.get(&res).copied().unwrap_or_default();
            }
        }
        Ok(Job { entries, analysis, options: self.options.clone() })
    }
}

#[derive(Clone, Debug)]
pub struct Checked {
    pub partition: VerdictPartition,
    pub ciao: Vec<String>,
    pub xc: Vec<String>,
    pub millis: f64,
    /// Agreement with the pointwise oracle on a truncated domain, when requested.
    pub crosscheck: Option<bool>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct AssertionReport {
    pub index: usize,
    pub id: Option<String>,
    pub input: String,
    pub result: Result<Checked, String>,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub entries: Vec<AssertionReport>,
}

impl Report {
    /// 0 all checked, 1 some region false, 2 some region unknown, 3 input error.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for e in &self.entries {
            match &e.result {
                Err(_) => return 3,
                Ok(c) => {
                    if c.partition.region(Outcome::False).is_some() {
                        code = 1;
                    } else if c.partition.region(Outcome::Unknown).is_some() && code == 0 {
                        code = 2;
                    }
                }
            }
        }
        code
    }

    pub fn to_text(&self, timings: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let name = e.id.clone().unwrap_or_else(|| format!("#{}", e.index + 1));
            match &e.result {
                Err(msg) => out += &format!("== {name}: error: {msg}\n"),
                Ok(c) => {
                    out += &format!("== {name}: {}", c.partition.summary());
                    if c.partition.approximation_used {
                        out += " (approximated)";
                    }
                    if let Some(ok) = c.crosscheck {
                        out += if ok { " [oracle agrees]" } else { " [ORACLE DISAGREES]" };
                    }
                    if timings {
                        out += &format!(" {:.1} ms", c.millis);
                    }
                    out.push('\n');
                    for w in &c.warnings {
                        out += &format!("warning: {w}\n");
                    }
                    for l in c.ciao.iter().chain(c.xc.iter()) {
                        out += l;
                        out.push('\n');
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self, timings: bool) -> serde_json::Value {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| match &e.result {
                Err(msg) => json!({"index": e.index, "id": e.id, "error": msg}),
                Ok(c) => {
                    let regions: Vec<_> = c
                        .partition
                        .entries
                        .iter()
                        .map(|(r, o)| json!({"outcome": o, "region": r.to_string()}))
                        .collect();
                    let mut v = json!({
                        "index": e.index,
                        "id": e.id,
                        "partition": regions,
                        "approximation_used": c.partition.approximation_used,
                        "ciao": c.ciao,
                        "xc": c.xc,
                        "crosscheck": c.crosscheck,
                        "warnings": c.warnings,
                    });
                    if timings {
                        v["millis"] = json!(c.millis);
                    }
                    v
                }
            })
            .collect();
        json!({"v": 1, "exit_code": self.exit_code(), "assertions": entries})
    }
}

fn finite_endpoints(p: &VerdictPartition) -> u64 {
    p.entries
        .iter()
        .filter_map(|(r, _)| match r {
            Region::Nat(s) => Some(s.intervals().iter().flat_map(|iv| [Some(iv.lo), iv.hi]).flatten().max().unwrap_or(0)),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

/// Re-checks on `S ∩ [0, max(2e, 64)]` (e the largest finite endpoint) and
/// compares with the pointwise oracle.
pub fn crosscheck(spec: &Assertion, an: &AnalysisResult, p: &VerdictPartition, cfg: &CompareConfig) -> Result<bool, VerdictError> {
    let (var, s) = match (&p.var, &p.domain) {
        (Some(v), Region::Nat(s)) => (v.clone(), s.clone()),
        _ => return Ok(true),
    };
    let cut = (2 * finite_endpoints(p)).max(64);
    let bounded = s.intersect(&NatIntervalSet::single(NatInterval::closed(0, cut)));
    let truncated = spec.with_precond(Precondition::Intervals { var, set: bounded.clone() });
    let root = check_assertion(&truncated, an, cfg)?;
    let eval = eval_check(&truncated, an, &bounded)?;
    Ok(root.entries == eval.entries)
}

pub fn run_one(spec: &Assertion, an: &AnalysisResult, cfg: &CompareConfig, oracle: bool) -> Result<Checked, VerdictError> {
    let start = Instant::now();
    let partition = check_assertion(spec, an, cfg)?;
    let millis = start.elapsed().as_secs_f64() * 1e3;
    let outs = synthesize_output(spec, &partition);
    let mut warnings = Vec::new();
    if let Some(n) = band_violation(spec, an)? {
        warnings.push(format!("analysis lower bound exceeds upper bound at size {n}"));
    }
    if !matches!(&spec.bounds.lower, Some(e) if e.any(&|x| matches!(x, CostExpr::MinOf(_) | CostExpr::MaxOf(_) | CostExpr::Product { .. })))
        && [&an.bounds.lower, &an.bounds.upper, &spec.bounds.upper].iter().any(|b| {
            matches!(b, Some(e) if e.any(&|x| matches!(x, CostExpr::MinOf(_) | CostExpr::MaxOf(_) | CostExpr::Product { .. })))
        })
    {
        warnings.push("bounds use min/max/product, which are not compared".into());
    }
    let crosscheck = if oracle { Some(crosscheck(spec, an, &partition, cfg)?) } else { None };
    Ok(Checked {
        ciao: outs.iter().map(|a| emit(a, Dialect::Ciao)).collect(),
        xc: outs.iter().map(|a| emit(a, Dialect::Xc)).collect(),
        partition,
        millis,
        crosscheck,
        warnings,
    })
}

/// Checks every assertion (in parallel); the report keeps input order.
pub fn run_check(job: &Job, seed: u64) -> Report {
    let cfg = job.options.compare_config(seed);
    let idx: Vec<usize> = (0..job.entries.len()).collect();
    let entries = par::map(&idx, |&i| {
        let (id, text, spec) = &job.entries[i];
        let result = match job.analysis.iter().find(|a| a.predicate == spec.scope.name && a.arity == spec.scope.args.len()) {
            None => Err(format!("no analysis result for {}/{}", spec.scope.name, spec.scope.args.len())),
            Some(an) => run_one(spec, an, &cfg, job.options.oracle_crosscheck).map_err(|e| e.to_string()),
        };
        AssertionReport { index: i, id: id.clone(), input: text.clone(), result }
    });
    Report { entries }
}

fn cell(e: Option<&CostExpr>, env: &Env) -> String {
    match e.map(|e| evaluate(e, env)) {
        None => String::new(),
        Some(Ok(ExtReal::Exact(q))) if rational::is_decimal_text(&q) => rational::format(&q),
        Some(Ok(v)) => format!("{}", v.to_f64()),
        Some(Err(_)) => "nan".into(),
    }
}

/// CSV with columns `n,analysis_lb,analysis_ub,spec_lb,spec_ub`.
pub fn emit_plot_data(an: &AnalysisResult, spec: &Assertion, range: &NatInterval, step: u64) -> Result<String, VerdictError> {
    let hi = range.hi.ok_or(VerdictError::DomainUnbounded)?;
    let (var, bounds) = align(spec, an)?;
    let var = var.ok_or(VerdictError::DomainUnbounded)?;
    let mut out = String::from("n,analysis_lb,analysis_ub,spec_lb,spec_ub\n");
    let mut n = range.lo;
    while n <= hi {
        let mut env = Env::new();
        env.insert(var.clone(), Rational::from_integer(n.into()));
        let row = [
            n.to_string(),
            cell(bounds.lower.as_ref(), &env),
            cell(bounds.upper.as_ref(), &env),
            cell(spec.bounds.lower.as_ref(), &env),
            cell(spec.bounds.upper.as_ref(), &env),
        ];
        out += &row.join(",");
        out.push('\n');
        n = match n.checked_add(step.max(1)) {
            Some(m) => m,
            None => break,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FACT: &str = r##"{
        "v": 1,
        "assertions": ["#pragma check fact(n) : (1 <= n) ==> (6.0 <= energy_nJ <= 2.3*n+9.0)"],
        "analysis": [{"predicate": "fact", "arity": 1, "size_vars": [{"name": "x", "metric": "nat", "arg": 0}],
                      "lb": "2.845*x+1.94", "ub": "2.845*x+1.94"}],
        "options": {"oracle_crosscheck": true}
    }"##;

    #[test]
    fn fact_job() {
        let job = JobFile::from_json(FACT).unwrap().validate().unwrap();
        let r = run_check(&job, 0);
        assert_eq!(r.exit_code(), 1);
        let c = r.entries[0].result.as_ref().unwrap();
        assert_eq!(c.partition.summary(), "F[1,1] U [13,inf) T[2,12]");
        assert_eq!(c.crosscheck, Some(true));
        assert_eq!(r.to_text(false), run_check(&job, 0).to_text(false));
    }

    #[test]
    fn plot_rows() {
        let job = JobFile::from_json(FACT).unwrap().validate().unwrap();
        let csv = emit_plot_data(&job.analysis[0], &job.entries[0].2, &NatInterval::closed(1, 20), 1).unwrap();
        assert!(csv.lines().any(|l| l == "10,30.39,30.39,6,32"));
        let one = emit_plot_data(&job.analysis[0], &job.entries[0].2, &NatInterval::closed(1, 3), 10).unwrap();
        assert_eq!(one.lines().count(), 2);
    }

    #[test]
    fn empty_job() {
        let job = JobFile::from_json(r#"{"v":1}"#).unwrap().validate().unwrap();
        assert_eq!(run_check(&job, 0).exit_code(), 0);
    }

    #[test]
    fn duplicate_analysis_rejected() {
        let text = r#"{"v":1,"analysis":[
            {"predicate":"p","arity":1,"size_vars":[{"name":"x","metric":"nat","arg":0}],"ub":"x"},
            {"predicate":"p","arity":1,"size_vars":[{"name":"x","metric":"nat","arg":0}],"ub":"x"}]}"#;
        assert!(JobFile::from_json(text).unwrap().validate().is_err());
    }
}
