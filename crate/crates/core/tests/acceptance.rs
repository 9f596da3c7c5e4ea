//! Acceptance suite. Prints one line per criterion and exits non-zero when any fails.

mod common;

use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use resbound::assertlang::{emit, parse_assertion, Assertion, Dialect, Precondition};
use resbound::compare::{leq_f, less_f, CompareConfig};
use resbound::expr::{discrete_derivative, evaluate, normalize, parse_expr, Compiled, CostExpr, Env, ExtReal};
use resbound::fincalc::{discrete_integral, eliminate_summations, falling_to_power, power_to_falling, stirling2};
use resbound::interval::{nat_round, RealInterval};
use resbound::job::Job;
use resbound::rational::{self, Rational};
use resbound::roots::{safe_root, RequiredSide, SafeRootConfig};
use resbound::verdict::{check_assertion, eval_check, synthesize_output, AnalysisResult, Outcome, VerdictPartition};
use resbound::{NatInterval, NatIntervalSet};

use common::*;

const TABLE2: &[(&str, &str)] = &[
    ("A1", "F[0,10] T[11,inf)"),
    ("A2", "F[0,10] U [15,inf) T[11,13] C[14,14]"),
    ("A3", "F[1,10] T[11,12]"),
    ("B1", "F[0,3] T[4,inf)"),
    ("B2", "F[0,0] U [17,inf) T[1,16]"),
    ("C1", "F[0,2] C[3,inf)"),
    ("D1", "T[0,0] U [8,inf) C[1,7]"),
    ("D2", "T[0,inf)"),
    ("D3", "T[1,10] U [100,inf)"),
    ("E1", "F[0,0] T[1,inf)"),
    ("F1", "F[0,inf)"),
    ("F2", "F[0,2] U [5,inf) T[3,4]"),
    ("G1", "T[2,16] C[0,1] U [17,inf)"),
    ("H1", "F[0,1] U [5,inf) T[2,4]"),
];

const PER_ASSERTION: Duration = Duration::from_secs(1);
const SUITE: Duration = Duration::from_secs(60);
const FUZZ_PAIRS: usize = 200;
const FUZZ_ROOTS: usize = 100;
const FUZZ_ASSERTIONS: usize = 500;

struct Suite {
    failed: usize,
    partitions: usize,
    bad_partitions: Vec<String>,
}

impl Suite {
    fn record(&mut self, name: &str, ok: bool, detail: impl AsRef<str>) {
        println!("[{}] {}: {}", if ok { "PASS" } else { "FAIL" }, name, detail.as_ref());
        if !ok {
            self.failed += 1;
        }
    }

    fn check(&mut self, label: &str, spec: &Assertion, an: &AnalysisResult, cfg: &CompareConfig) -> (VerdictPartition, Duration) {
        let t = Instant::now();
        let p = check_assertion(spec, an, cfg).unwrap();
        let took = t.elapsed();
        self.partitions += 1;
        if !partition_ok(&p) {
            self.bad_partitions.push(label.to_string());
        }
        (p, took)
    }
}

fn entry<'a>(job: &'a Job, id: &str) -> (&'a Assertion, &'a AnalysisResult) {
    let (_, _, a) = job.entries.iter().find(|e| e.0.as_deref() == Some(id)).unwrap();
    (a, analysis_for(job, a))
}

fn exact(e: &CostExpr, env: &Env) -> Rational {
    match evaluate(e, env) {
        Ok(ExtReal::Exact(v)) => v,
        other => panic!("{e} not exact: {other:?}"),
    }
}

fn sample<T: std::fmt::Debug>(s: impl Strategy<Value = T>, runner: &mut TestRunner) -> T {
    s.new_tree(runner).unwrap().current()
}

fn table2(s: &mut Suite) {
    let job = fixture("table2.json");
    let cfg = job.options.compare_config(0);
    let mut slowest = Duration::ZERO;
    for (id, want) in TABLE2 {
        let (a, an) = entry(&job, id);
        let (p, took) = s.check(id, a, an, &cfg);
        slowest = slowest.max(took);
        s.record(&format!("table2 {id}"), p.summary() == *want, format!("{} (expected {want}, {took:.1?})", p.summary()));
    }
    let (a, an) = entry(&job, "C2");
    let (p, took) = s.check("C2", a, an, &cfg);
    slowest = slowest.max(took);
    let paper = p.summary() == "C[0,inf)";
    let mut bad = Vec::new();
    for o in [Outcome::True, Outcome::False] {
        for n in p.nat(o).points().take_while(|n| *n <= 1000) {
            if oracle_label(a, an, n).map_or(false, |l| l != o) {
                bad.push(n);
            }
        }
    }
    let detail = if paper { "paper form".to_string() } else { format!("refined form, {} oracle violations up to 1000", bad.len()) };
    s.record("table2 C2", paper || bad.is_empty(), format!("{} ({detail})", p.summary()));
    s.record("table2 runtime", slowest < PER_ASSERTION, format!("slowest assertion {slowest:.1?}, limit {PER_ASSERTION:?}"));
}

fn worked(s: &mut Suite) {
    let job = fixture("worked.json");
    let cfg = job.options.compare_config(0);
    for (id, want) in [
        ("fact", "F[1,1] U [13,inf) T[2,12]"),
        ("hanoi", "F[1,1] U [5,inf) T[2,4]"),
        ("simple_log", "T[0,23968] C[23969,inf)"),
        ("fib", "F[0,10] T[11,inf)"),
        ("biquad", "F[8,inf) T[1,7]"),
    ] {
        let (a, an) = entry(&job, id);
        let (p, _) = s.check(id, a, an, &cfg);
        s.record(&format!("worked {id}"), p.summary() == want, format!("{} (expected {want})", p.summary()));
    }

    let r = nat_round(&RealInterval { lo: 1.09311, lo_closed: true, hi: Some(4.09311), hi_closed: true });
    s.record("worked hanoi rounding", r == Some(NatInterval::closed(2, 4)), format!("[1.09311,4.09311] -> {r:?}"));

    let f = parse_expr("(2**x - 1000) - (1.45*1.62**x - 1)").unwrap();
    let comp = Compiled::new(&f, "x");
    let x = safe_root(&comp, 10.89, RequiredSide::RootAtOrBelow, &SafeRootConfig::default()).unwrap();
    let crossing = comp.eval(10.0) < 0.0 && comp.eval(11.0) > 0.0;
    s.record("worked fib safe root", crossing && x.ceil() == 11.0 && comp.eval(x) > 0.0, format!("safe point {x:.4}, natural boundary {}", x.ceil() as u64 - 1));

    let (a, an) = entry(&job, "inc_append");
    let (p, _) = s.check("inc_append", a, an, &cfg);
    let out: Vec<String> = synthesize_output(a, &p).iter().map(|o| emit(o, Dialect::Ciao)).collect();
    let want = [
        ":- false pred inc_append(A,B,C) : intervals([[lt(-13,-length(A)+length(B))]]) + cost(ub,steps,2*length(A)-10).",
        ":- checked pred inc_append(A,B,C) : intervals([[leq(13,length(A)-length(B))]]) + cost(ub,steps,2*length(A)-10).",
    ];
    s.record("worked inc_append", out == want, out.join(" / "));
}

fn finite_calculus(s: &mut Suite) {
    for (sum, closed) in [("sum(x,1,a,2**x)", "2**(a+1) - 2"), ("sum(x,1,a,x*2**(a-x))", "2**(a+1) - a - 2")] {
        let e = parse_expr(sum).unwrap();
        let got = eliminate_summations(&e).closed();
        let symbolic = got.as_ref().map(normalize) == Some(normalize(&parse_expr(closed).unwrap()));
        let mut numeric = got.is_some();
        if let Some(g) = &got {
            let body = match &e {
                CostExpr::Summation { body, .. } => body.as_ref().clone(),
                _ => unreachable!(),
            };
            for a in 0..=15u64 {
                let mut acc = rational::int(0);
                for xv in 1..=a {
                    let mut env = env1("x", xv);
                    env.insert("a".into(), rational::from_u64(a));
                    acc += exact(&body, &env);
                }
                numeric &= exact(g, &env1("a", a)) == acc;
            }
        }
        let shown = got.map_or("unsupported".to_string(), |g| g.to_string());
        s.record(&format!("fincalc {sum}"), symbolic && numeric, format!("{shown}; symbolic {symbolic}, loop oracle a in [0,15] {numeric}"));
    }
}

fn soundness(s: &mut Suite) {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for name in ["table2.json", "worked.json"] {
        let job = fixture(name);
        let cfg = job.options.compare_config(0);
        for (id, _, a) in &job.entries {
            let an = analysis_for(&job, a);
            let (p, _) = s.check(id.as_deref().unwrap_or("?"), a, an, &cfg);
            if p.var.is_none() {
                continue;
            }
            checked += 1;
            bad.extend(violations(a, an, &p).into_iter().map(|v| format!("{}@{}", id.as_deref().unwrap_or("?"), v.0)));
        }
    }
    let mut runner = TestRunner::deterministic();
    let cfg = CompareConfig::default();
    for _ in 0..FUZZ_PAIRS {
        let (sa, sb) = sample(fuzz_pair(), &mut runner);
        let (a, an) = fuzz_case(&sa, &sb);
        let (p, _) = s.check(&format!("{sa} vs {sb}"), &a, &an, &cfg);
        checked += 1;
        bad.extend(violations(&a, &an, &p).into_iter().map(|v| format!("{sa} vs {sb}@{}", v.0)));
        let (ea, eb) = (on_x(&sa), on_x(&sb));
        let lt = less_f(&ea, &eb, &NatIntervalSet::all(), &cfg);
        let le = leq_f(&ea, &eb, &NatIntervalSet::all(), &cfg);
        for (r, strict) in [(&lt, true), (&le, false)] {
            if let Err(n) = pointwise_ok(&ea, &eb, &r.satisfied, strict) {
                bad.push(format!("{sa} {} {sb}@{n}", if strict { "<" } else { "<=" }));
            }
        }
    }
    s.record(
        "property oracle soundness",
        bad.is_empty(),
        format!("{checked} partitions and {FUZZ_PAIRS} fuzzed comparisons, {} violations {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>()),
    );
}

fn root_vs_eval(s: &mut Suite) {
    let job = fixture("table2.json");
    let cfg = job.options.compare_config(0);
    for (id, var) in [("A3", "nat(N)"), ("D3", "length(I)")] {
        let (a, an) = entry(&job, id);
        for hi in [12, 100, 1000] {
            let set = NatIntervalSet::single(NatInterval::closed(1, hi));
            let spec = a.with_precond(Precondition::Intervals { var: var.into(), set: set.clone() });
            let (root, _) = s.check(id, &spec, an, &cfg);
            let eval = eval_check(&spec, an, &set).unwrap();
            s.record(
                &format!("property root-vs-eval {id} [1,{hi}]"),
                root.entries == eval.entries,
                format!("root {} / eval {}", root.summary(), eval.summary()),
            );
        }
    }
}

fn safe_roots(s: &mut Suite) {
    let mut runner = TestRunner::deterministic();
    let gen = (1i64..20, 1i64..200, 1i64..2000, -0.5f64..0.5, proptest::bool::ANY);
    let (mut ok, mut refused, mut bad) = (0, 0, Vec::new());
    for _ in 0..FUZZ_ROOTS {
        let (a, c, d, delta, rising) = sample(gen.clone(), &mut runner);
        let g = CostExpr::int(a) * CostExpr::pow(CostExpr::int(2), CostExpr::var("x")) - (CostExpr::int(c) * CostExpr::var("x") + CostExpr::int(d));
        let (f, side) = if rising { (g, RequiredSide::RootAtOrBelow) } else { (CostExpr::zero() - g, RequiredSide::RootAtOrAbove) };
        let comp = Compiled::new(&f, "x");
        let sgn = |t: f64| if rising { comp.eval(t) } else { -comp.eval(t) };
        let (mut lo, mut hi) = (0.0f64, 64.0f64);
        lo = (0..=800).map(|i| i as f64 * 0.01).filter(|t| sgn(*t) < 0.0).last().unwrap_or(lo);
        if !(sgn(lo) < 0.0 && sgn(hi) > 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if sgn(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        match safe_root(&comp, hi + delta, side, &SafeRootConfig::default()) {
            Ok(xs) => {
                let side_ok = match side {
                    RequiredSide::RootAtOrBelow => xs >= hi - 1e-9,
                    RequiredSide::RootAtOrAbove => xs <= hi + 1e-9,
                };
                if xs < 0.0 || (comp.eval(xs) > 0.0 && side_ok) {
                    ok += 1;
                } else {
                    bad.push(format!("{f} from {:.3}", hi + delta));
                }
            }
            Err(_) => refused += 1,
        }
    }
    s.record("property safe_root postcondition", bad.is_empty() && ok > 0, format!("{ok} certified, {refused} refused, {} violations {bad:?}", bad.len()));
}

fn stirling(s: &mut Suite) {
    let mut ok = true;
    for m in 0..=8u32 {
        let x_m = normalize(&CostExpr::pow(CostExpr::var("x"), CostExpr::int(m as i64)));
        let falling = normalize(&power_to_falling("x", m));
        let expanded = (0..=m).fold(CostExpr::zero(), |acc, k| {
            acc + CostExpr::rat(Rational::from_integer(stirling2(m, k))) * falling_to_power("x", k)
        });
        ok &= falling == x_m && normalize(&expanded) == x_m;
    }
    s.record("property stirling round trip", ok, "m in [0,8]");
}

fn delta_integral(s: &mut Suite) {
    let forms = ["fall(x,3)", "5*fall(x,2)", "x**4", "7", "2**x", "3*5**x", "2**(3*x+1)", "x*2**(a-x)", "x**2*3**x"];
    let mut bad = Vec::new();
    for f in forms {
        let e = parse_expr(f).unwrap();
        let ok = discrete_integral(&e, "x").closed().map_or(false, |g| normalize(&discrete_derivative(&g, "x")) == normalize(&e));
        if !ok {
            bad.push(f);
        }
    }
    s.record("property delta of integral", bad.is_empty(), format!("{} rule forms, failing {bad:?}", forms.len()));
}

fn round_trip(s: &mut Suite) {
    let mut runner = TestRunner::deterministic();
    let mut bad = Vec::new();
    for i in 0..FUZZ_ASSERTIONS {
        let (a, dialect) = if i % 2 == 0 { (sample(ciao_assertion(), &mut runner), Dialect::Ciao) } else { (sample(xc_assertion(), &mut runner), Dialect::Xc) };
        let text = emit(&a, dialect);
        match parse_assertion(&text) {
            Ok(mut back) => {
                if dialect == Dialect::Xc {
                    back.style = a.style;
                }
                if back != a {
                    bad.push(text);
                }
            }
            Err(_) => bad.push(text),
        }
    }
    s.record("property assertlang round trip", bad.is_empty(), format!("{FUZZ_ASSERTIONS} assertions, {} mismatches {:?}", bad.len(), bad.first()));
}

fn main() {
    let start = Instant::now();
    let mut s = Suite { failed: 0, partitions: 0, bad_partitions: Vec::new() };
    table2(&mut s);
    worked(&mut s);
    finite_calculus(&mut s);
    soundness(&mut s);
    root_vs_eval(&mut s);
    safe_roots(&mut s);
    stirling(&mut s);
    delta_integral(&mut s);
    round_trip(&mut s);
    let bad = std::mem::take(&mut s.bad_partitions);
    s.record("property partition disjoint and covering", bad.is_empty(), format!("{} partitions, failing {bad:?}", s.partitions));
    let total = start.elapsed();
    s.record("suite runtime", total < SUITE, format!("{total:.1?}, limit {SUITE:?}"));
    println!("acceptance: {} failed", s.failed);
    if s.failed > 0 {
        std::process::exit(1);
    }
}
