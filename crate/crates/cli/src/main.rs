use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use resbound::assertlang::parse_interval_set;
use resbound::compare::{leq_f, less_f, roots_of, CompareConfig};
use resbound::expr::{parse_expr, CostExpr};
use resbound::fincalc::{eliminate_summations, IntegrationOutcome};
use resbound::job::{emit_plot_data, run_check, JobFile};
use resbound::roots::{Exactness, DEFAULT_SEED};
use resbound::{NatInterval, NatIntervalSet};

#[derive(Parser)]
#[command(name = "resbound", version, about = "Check resource-usage assertions against inferred cost bounds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every assertion of a job file.
    Check {
        job: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Include per-assertion wall times (makes output non-deterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Closed form of the summations in an expression.
    Sumclose {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Non-negative real roots of a univariate expression.
    Roots {
        #[arg(allow_hyphen_values = true)]
        expr: String,
        #[arg(long)]
        taylor_order: Option<u32>,
    },
    /// Sizes where `lhs < rhs` (or `<=`) is proved.
    Compare {
        #[arg(allow_hyphen_values = true)]
        lhs: String,
        #[arg(value_parser = ["<", "<="])]
        op: String,
        #[arg(allow_hyphen_values = true)]
        rhs: String,
        /// `L:H,L:H` (H may be `inf`) or `[i(L,U),...]`.
        #[arg(long, default_value = "0:inf")]
        on: String,
    },
    /// CSV samples of analysis and specification bounds.
    Plot {
        job: String,
        /// Zero-based assertion index.
        #[arg(long)]
        assertion: usize,
        /// `L:H`.
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = 1)]
        step: u64,
    },
}

fn seed() -> Result<u64> {
    match std::env::var("RESBOUND_SEED") {
        Err(_) => Ok(DEFAULT_SEED),
        Ok(s) => {
            let s = s.trim();
            let v = match s.strip_prefix("0x") {
                Some(h) => u64::from_str_radix(h, 16),
                None => s.parse(),
            };
            v.with_context(|| format!("RESBOUND_SEED={s} is not an integer"))
        }
    }
}

fn parse_range(s: &str) -> Result<NatInterval> {
    let (l, h) = s.split_once(':').ok_or_else(|| anyhow!("expected L:H, got {s}"))?;
    let lo: u64 = l.trim().parse().with_context(|| format!("bad lower end {l}"))?;
    let hi = match h.trim() {
        "inf" => None,
        t => Some(t.parse::<u64>().with_context(|| format!("bad upper end {t}"))?),
    };
    NatInterval::new(lo, hi).ok_or_else(|| anyhow!("empty range {s}"))
}

fn parse_on(s: &str) -> Result<NatIntervalSet> {
    if s.trim_start().starts_with('[') {
        return parse_interval_set(s).map_err(|e| anyhow!("{e}"));
    }
    Ok(NatIntervalSet::new(s.split(',').map(parse_range).collect::<Result<_>>()?))
}

fn single_var(e: &CostExpr) -> Result<String> {
    let vars = e.free_vars();
    match vars.len() {
        0 => Ok("x".into()),
        1 => Ok(vars.into_iter().next().unwrap()),
        _ => bail!("expression has several variables: {}", vars.into_iter().collect::<Vec<_>>().join(", ")),
    }
}

fn expr(s: &str) -> Result<CostExpr> {
    parse_expr(s).map_err(|e| anyhow!("{s}: {e}"))
}

fn run(cli: Cli) -> Result<u8> {
    let seed = seed()?;
    match cli.cmd {
        Cmd::Check { job, format, timings } => {
            let text = std::fs::read_to_string(&job).with_context(|| format!("reading {job}"))?;
            let job = JobFile::from_json(&text)?.validate()?;
            let report = run_check(&job, seed);
            match format {
                Format::Text => print!("{}", report.to_text(timings)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report.to_json(timings))?),
            }
            Ok(report.exit_code() as u8)
        }
        Cmd::Sumclose { expr: s } => match eliminate_summations(&expr(&s)?) {
            IntegrationOutcome::Closed(e) => {
                println!("{e}");
                Ok(0)
            }
            IntegrationOutcome::Unsupported { subterm, reason } => {
                println!("unsupported: {reason} in {subterm}");
                Ok(2)
            }
        },
        Cmd::Roots { expr: s, taylor_order } => {
            let e = expr(&s)?;
            let var = single_var(&e)?;
            let mut cfg = CompareConfig { seed, ..CompareConfig::default() };
            if let Some(k) = taylor_order {
                cfg.taylor_order = k;
            }
            let set = roots_of(&e, &var, &cfg).map_err(|err| anyhow!("{err}"))?;
            println!("method: {:?}", set.method);
            for r in &set.roots {
                match &r.exactness {
                    Exactness::Exact(q) => println!("{} exact", resbound::rational::format(q)),
                    Exactness::Approx { radius } => println!("{} +/- {:e}", r.value, radius),
                }
            }
            Ok(0)
        }
        Cmd::Compare { lhs, op, rhs, on } => {
            let (a, b) = (expr(&lhs)?, expr(&rhs)?);
            let s = parse_on(&on)?;
            let cfg = CompareConfig { seed, ..CompareConfig::default() };
            let r = if op == "<" { less_f(&a, &b, &s, &cfg) } else { leq_f(&a, &b, &s, &cfg) };
            println!("satisfied: {}", r.satisfied);
            println!("unknown: {}", r.residual_unknown);
            println!("approximated: {}", r.approximation_used);
            Ok(0)
        }
        Cmd::Plot { job, assertion, range, step } => {
            let text = std::fs::read_to_string(&job).with_context(|| format!("reading {job}"))?;
            let job = JobFile::from_json(&text)?.validate()?;
            let (_, _, spec) = job.entries.get(assertion).ok_or_else(|| anyhow!("no assertion at index {assertion}"))?;
            let an = job
                .analysis
                .iter()
                .find(|a| a.predicate == spec.scope.name && a.arity == spec.scope.args.len())
                .ok_or_else(|| anyhow!("no analysis result for {}", spec.scope))?;
            print!("{}", emit_plot_data(an, spec, &parse_range(&range)?, step)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
