//! `tmlab`: reproducible experiments on Thue–Morse along `⌊f(n)⌋`.
//!
//! Every run emits one artifact, JSON or CSV. JSON artifacts carry
//! `tool_version`, `config`, `results` and `timing`; CSV artifacts carry the
//! version and configuration as `#` comment lines. Only `timing` depends on
//! the machine or the thread count.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use tmlab_core::dissection::{self, DissectionCell};
use tmlab_core::expsum;
use tmlab_core::fourier::{self, CorrectionVector, PhaseKind, PhaseVector};
use tmlab_core::indexfn::{admissible_pairs, check_derivative_inequalities, check_hypotheses};
use tmlab_core::stats;
use tmlab_core::{Error, IndexFunction};

mod csv;

use csv::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "TMLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "tmlab", version, about = "Thue–Morse along index sequences ⌊f(n)⌋")]
pub struct Cli {
    /// Artifact format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (falls back to TMLAB_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Thue–Morse prefix and its subword complexity.
    Tm(TmArgs),
    /// Exact floors ⌊scale·f(n)⌋.
    Floor(FloorArgs),
    /// Sliding-window block frequencies of t(⌊f(n)⌋).
    Blockfreq(BlockfreqArgs),
    /// Running density of ones in t(⌊f(n)⌋).
    Density(DensityArgs),
    /// Digit-phase exponential sums over (A, 2A].
    Expsum(ExpsumArgs),
    /// Fourier coefficients and second-moment decay.
    Fourier(FourierArgs),
    /// Interval dissection of (A, 2A] with identity checks.
    Dissect(DissectArgs),
    /// Empirical checks of the analytic hypotheses on f.
    Lemmas(LemmasArgs),
    /// Parameter choices for a given A.
    Plan(PlanArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TmArgs {
    /// Prefix length.
    #[arg(long, default_value_t = 32)]
    pub upto: u64,
    /// Also count distinct factors of length 1..=K.
    #[arg(long)]
    pub complexity: Option<u32>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FloorArgs {
    /// Index function descriptor, e.g. `power:6/5`.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub n: u64,
    /// Number of consecutive indices.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, default_value_t = 1)]
    pub scale: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BlockfreqArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u64,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub f: String,
    /// Explicit checkpoints; overrides the dyadic range.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    /// Dyadic checkpoints 2^from ..= 2^to.
    #[arg(long, default_value_t = 10)]
    pub from_exp: u32,
    #[arg(long, default_value_t = 20)]
    pub to_exp: u32,
    /// Number of trailing checkpoints in the spread summary.
    #[arg(long, default_value_t = 8)]
    pub tail: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExpsumArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<u64>,
    /// Phase vector as a bitstring, leading 1.
    #[arg(long, default_value = "1")]
    pub alpha: String,
    /// Further values of A, increasing.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FourierArgs {
    /// One or more increasing values of lambda.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda: Vec<u32>,
    #[arg(long, default_value = "11")]
    pub beta: String,
    /// Correction vector, e.g. `0,1`; zeros by default.
    #[arg(long)]
    pub i: Option<String>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub h: i64,
    /// Evaluate the single coefficient at this d instead of the moment table.
    #[arg(long)]
    pub d: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DissectArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: u64,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: u64,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: u64,
    #[arg(long, default_value_t = 8)]
    pub lambda: u32,
    /// Beta vector for the Fourier majorant; `11` padded with zeros to length L by default.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub i: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LemmasArgs {
    #[arg(long)]
    pub f: String,
    /// Sample pairs for the derivative inequalities.
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 10.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1e9)]
    pub hi: f64,
    /// Largest k in the power bounds on f''.
    #[arg(long, default_value_t = 2)]
    pub k_max: u32,
    /// Also count carry exceptions on [A+1, 2A).
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub lambda: u32,
    #[arg(long, default_value_t = 1)]
    pub r: u64,
    #[arg(long = "T", default_value_t = 2)]
    #[serde(rename = "T")]
    pub t: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlanArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: u64,
    #[arg(long = "T", default_value_t = 1)]
    #[serde(rename = "T")]
    pub t: u64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
}

/// Parses argv without running anything.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Results of a subcommand: a JSON value plus the same data as a table.
struct Outcome {
    results: Value,
    tables: Vec<Table>,
}

enum Failure {
    Validation(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Runs the tool. Returns 0 on success, 1 on invalid input, 2 on internal errors.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(Failure::Validation(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(stderr, "internal error: {msg}");
            2
        }
    }
}

fn resolve_threads(cli: &Cli) -> Result<Option<usize>, Failure> {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(invalid("thread count must be positive"));
    }
    Ok(threads)
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let threads = resolve_threads(cli)?;
    let started = Instant::now();
    let outcome = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Internal(e.to_string()))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }?;
    let elapsed = started.elapsed();
    let config = serde_json::to_value(&cli.command).map_err(|e| Failure::Internal(e.to_string()))?;

    let artifact = match cli.format {
        Format::Json => {
            let doc = json!({
                "tool_version": VERSION,
                "config": config,
                "results": outcome.results,
                "timing": {
                    "elapsed_seconds": elapsed.as_secs_f64(),
                    "threads": threads.unwrap_or_else(rayon::current_num_threads),
                },
            });
            let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Internal(e.to_string()))?;
            text.push('\n');
            text
        }
        Format::Csv => csv::render(VERSION, &config, &outcome.tables),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, artifact)
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(artifact.as_bytes())
            .map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn index_function(descriptor: &str) -> Result<IndexFunction, Failure> {
    Ok(descriptor.parse::<IndexFunction>()?)
}

fn function_summary(f: &IndexFunction) -> Value {
    json!({
        "descriptor": f.to_string(),
        "x0": f.x0(),
        "A0": f.a0(),
        "regular": f.is_regular(),
        "theorem_compliant": f.theorem_compliant(),
    })
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Tm(a) => tm(a),
        Command::Floor(a) => floor(a),
        Command::Blockfreq(a) => blockfreq(a),
        Command::Density(a) => density(a),
        Command::Expsum(a) => expsum_cmd(a),
        Command::Fourier(a) => fourier_cmd(a),
        Command::Dissect(a) => dissect(a),
        Command::Lemmas(a) => lemmas(a),
        Command::Plan(a) => plan(a),
    }
}

/// Longest prefix `tm` will print.
const TM_MAX: u64 = 1 << 24;

fn tm(a: &TmArgs) -> Result<Outcome, Failure> {
    if a.upto == 0 || a.upto > TM_MAX {
        return Err(invalid(format!("--upto must lie in 1..={TM_MAX}")));
    }
    let bits: String = (0..a.upto).map(|n| char::from(b'0' + tmlab_core::digits::thue_morse(n))).collect();
    let mut prefix = Table::new("prefix", &["n", "t"]);
    for (n, b) in bits.chars().enumerate() {
        prefix.row(vec![n.to_string(), b.to_string()]);
    }
    let mut results = json!({ "length": a.upto, "bits": bits });
    let mut tables = vec![prefix];
    if let Some(k_max) = a.complexity {
        let rows = stats::subword_complexity(a.upto, k_max)?;
        let mut t = Table::new("complexity", &["k", "count"]);
        for r in &rows {
            t.row(vec![r.k.to_string(), r.count.to_string()]);
        }
        results["complexity"] = json!(rows);
        tables.push(t);
    }
    Ok(Outcome { results, tables })
}

/// Most indices `floor` will evaluate in one run.
const FLOOR_MAX_COUNT: u64 = 1 << 20;

fn floor(a: &FloorArgs) -> Result<Outcome, Failure> {
    use tmlab_core::digits::BinaryDigits;
    use tmlab_core::IndexMap;
    let f = index_function(&a.f)?;
    if a.count == 0 || a.count > FLOOR_MAX_COUNT {
        return Err(invalid(format!("--count must lie in 1..={FLOOR_MAX_COUNT}")));
    }
    if a.scale == 0 {
        return Err(invalid("--scale must be positive"));
    }
    let end = a.n.checked_add(a.count).ok_or_else(|| invalid("index range overflows"))?;
    let mut t = Table::new("floors", &["n", "floor", "t"]);
    let mut rows = Vec::new();
    for n in a.n..end {
        let v = f.scaled_floor(n, a.scale)?;
        let bit = v.thue_morse();
        t.row(vec![n.to_string(), v.to_string(), bit.to_string()]);
        rows.push(json!({ "n": n, "floor": v.to_string(), "t": bit }));
    }
    Ok(Outcome {
        results: json!({ "function": function_summary(&f), "scale": a.scale, "floors": rows }),
        tables: vec![t],
    })
}

fn blockfreq(a: &BlockfreqArgs) -> Result<Outcome, Failure> {
    let f = index_function(&a.f)?;
    let report = stats::block_frequencies(&f, a.n, a.t)?;
    let mut t = Table::new("blocks", &["block", "count", "frequency", "deviation"]);
    for (w, (&c, &d)) in report.counts.iter().zip(&report.deviations).enumerate() {
        t.row(vec![
            report.block_label(w),
            c.to_string(),
            (c as f64 / report.n as f64).to_string(),
            d.to_string(),
        ]);
    }
    let mut summary = Table::new("summary", &["T", "N", "max_abs_deviation"]);
    summary.row(vec![report.t.to_string(), report.n.to_string(), report.max_abs_deviation.to_string()]);
    Ok(Outcome {
        results: json!({ "function": function_summary(&f), "report": report }),
        tables: vec![t, summary],
    })
}

fn density(a: &DensityArgs) -> Result<Outcome, Failure> {
    let f = index_function(&a.f)?;
    let checkpoints: Vec<u64> = if a.checkpoints.is_empty() {
        if a.from_exp > a.to_exp || a.to_exp > 40 {
            return Err(invalid("need --from-exp <= --to-exp <= 40"));
        }
        (a.from_exp..=a.to_exp).map(|e| 1u64 << e).collect()
    } else {
        a.checkpoints.clone()
    };
    let trace = stats::letter_density_trace(&f, &checkpoints)?;
    let spread = stats::tail_spread(&trace, a.tail);
    let mut t = Table::new("density", &["N", "ones", "density"]);
    for p in &trace {
        t.row(vec![p.n.to_string(), p.ones.to_string(), p.density.to_string()]);
    }
    Ok(Outcome {
        results: json!({ "function": function_summary(&f), "trace": trace, "tail": a.tail, "tail_spread": spread }),
        tables: vec![t],
    })
}

fn expsum_cmd(a: &ExpsumArgs) -> Result<Outcome, Failure> {
    let f = index_function(&a.f)?;
    let alpha = PhaseVector::parse(&a.alpha, PhaseKind::Alpha)?;
    let list: Vec<u64> = a.a.into_iter().chain(a.sweep.iter().copied()).collect();
    if list.is_empty() {
        return Err(invalid("give --A or --sweep"));
    }
    let exp = expsum::decay_experiment(&f, &alpha, &list)?;
    let mut t = Table::new("sums", &["A", "value", "normalized"]);
    for r in &exp.rows {
        t.row(vec![r.range.0.to_string(), r.value.to_string(), r.normalized.to_string()]);
    }
    Ok(Outcome {
        results: json!({
            "function": function_summary(&f),
            "alpha": alpha,
            "rows": exp.rows,
            "decreasing_trend": exp.decreasing_trend,
        }),
        tables: vec![t],
    })
}

fn correction_or_zeros(text: Option<&str>, len: usize) -> Result<CorrectionVector, Failure> {
    match text {
        Some(s) => Ok(CorrectionVector::parse(s)?),
        None => Ok(CorrectionVector::zeros(len)),
    }
}

fn fourier_cmd(a: &FourierArgs) -> Result<Outcome, Failure> {
    let beta = PhaseVector::parse(&a.beta, PhaseKind::Beta)?;
    let i = correction_or_zeros(a.i.as_deref(), beta.len())?;
    if let Some(d) = a.d {
        let mut t = Table::new("coefficients", &["lambda", "h", "d", "re", "im", "abs"]);
        let mut rows = Vec::new();
        for &lambda in &a.lambda {
            let g = fourier::fourier_coefficient(lambda, &i, &beta, a.h, d)?;
            t.row(vec![
                lambda.to_string(),
                a.h.to_string(),
                d.to_string(),
                g.re.to_string(),
                g.im.to_string(),
                g.norm().to_string(),
            ]);
            rows.push(json!({ "lambda": lambda, "re": g.re, "im": g.im, "abs": g.norm() }));
        }
        return Ok(Outcome {
            results: json!({ "beta": beta, "i": i, "h": a.h, "d": d, "coefficients": rows }),
            tables: vec![t],
        });
    }
    let table = fourier::estimate_decay_exponent(&i, &beta, a.h, &a.lambda)?;
    let mut t = Table::new("moments", &["lambda", "lambda_prime", "moment"]);
    for r in &table.rows {
        t.row(vec![r.lambda.to_string(), r.lambda_prime.to_string(), r.moment.to_string()]);
    }
    let mut fit = Table::new("fit", &["fitted_eta", "fitted_c0", "degenerate"]);
    fit.row(vec![table.fitted_eta.to_string(), table.fitted_c0.to_string(), table.degenerate.to_string()]);
    Ok(Outcome {
        results: json!({ "beta": beta, "i": i, "h": a.h, "decay": table }),
        tables: vec![t, fit],
    })
}

/// Cells per run above which `dissect` refuses to enumerate.
const DISSECT_MAX_CELLS: u64 = 1 << 22;

fn dissect(a: &DissectArgs) -> Result<Outcome, Failure> {
    let f = index_function(&a.f)?;
    if a.l < 2 || a.m == 0 {
        return Err(invalid("need L >= 2 and M >= 1"));
    }
    let beta = match &a.beta {
        Some(s) => PhaseVector::parse(s, PhaseKind::Beta)?,
        None => {
            let mut bits = vec![0u8; a.l as usize];
            bits[0] = 1;
            bits[1] = 1;
            PhaseVector::beta(&bits)?
        }
    };
    let i = correction_or_zeros(a.i.as_deref(), beta.len())?;
    let anchors = dissection::range_anchors(&f, a.a)?;
    let cells_estimate = anchors
        .d1
        .saturating_sub(anchors.d0)
        .saturating_mul(a.l)
        .saturating_mul(a.m)
        .saturating_mul(a.m);
    if cells_estimate > DISSECT_MAX_CELLS {
        return Err(invalid(format!("{cells_estimate} cells exceed the limit {DISSECT_MAX_CELLS}")));
    }
    let (anchors, cells) = dissection::dissect(&f, a.a, a.l, a.m)?;

    let mut reports = Vec::new();
    let mut t = Table::new("cells", &["k", "J_start", "J_end", "J_len", "good_set_size", "violations"]);
    let mut total_violations = 0usize;
    for group in cells.chunks(a.m as usize) {
        let first: &DissectionCell = &group[0];
        let good: Vec<u64> = group.iter().filter(|c| c.good).map(|c| c.m).collect();
        let mut violations = 0usize;
        for cell in group.iter().filter(|c| c.good) {
            violations += dissection::verify_floor_decomposition(&f, cell)?.len();
        }
        total_violations += violations;
        t.row(vec![
            first.k.to_string(),
            first.interval.start.to_string(),
            first.interval.end.to_string(),
            first.interval.len().to_string(),
            good.len().to_string(),
            violations.to_string(),
        ]);
        reports.push(json!({
            "k": first.k,
            "interval": first.interval,
            "good_set": good,
            "corrections": group.iter().map(|c| &c.corrections).collect::<Vec<_>>(),
            "violations": violations,
        }));
    }
    let s3 = dissection::exp_sum_s3(&f, a.a, a.l, a.m, &i, &beta, a.lambda)?;
    let s1 = dissection::exp_sum_s1(&f, a.a, &beta, a.lambda)?;
    Ok(Outcome {
        results: json!({
            "function": function_summary(&f),
            "anchors": anchors,
            "cells": reports,
            "total_violations": total_violations,
            "beta": beta,
            "i": i,
            "S1": s1,
            "S3": { "value": s3.value, "majorant": s3.majorant },
        }),
        tables: vec![t],
    })
}

fn lemmas(a: &LemmasArgs) -> Result<Outcome, Failure> {
    let f = index_function(&a.f)?;
    if !(a.lo > 0.0 && a.lo < a.hi && a.hi.is_finite()) {
        return Err(invalid("need 0 < --lo < --hi"));
    }
    let lo = a.lo.max(f.x0() as f64);
    let hypotheses = check_hypotheses(&f, (lo, a.hi.max(2.0 * lo)), a.k_max)?;
    let pairs = admissible_pairs(&f, a.pairs, lo, a.hi);
    let inequalities = check_derivative_inequalities(&f, &pairs)?;
    let names = ["almost_monotone", "slope_bound", "log_growth", "doubling_quotient"];
    let mut t = Table::new("inequalities", &["inequality", "checked", "violations"]);
    for (idx, name) in names.iter().enumerate() {
        let v = inequalities
            .violations
            .iter()
            .filter(|v| serde_json::to_value(v.inequality).ok() == Some(json!(name)))
            .count();
        t.row(vec![name.to_string(), inequalities.checked[idx].to_string(), v.to_string()]);
    }
    let mut results = json!({
        "function": function_summary(&f),
        "hypotheses": hypotheses,
        "hypotheses_pass": hypotheses.all_pass(),
        "inequalities": inequalities,
    });
    let mut tables = vec![t];
    if let Some(big_a) = a.a {
        let b = big_a.checked_mul(2).ok_or_else(|| invalid("2A overflows"))?;
        let carry = expsum::carry_exception_count(&f, big_a + 1, b, a.lambda, a.r, a.t)?;
        let mut c = Table::new("carry", &["a", "b", "lambda", "r", "T", "count", "bound", "ratio"]);
        c.row(vec![
            (big_a + 1).to_string(),
            b.to_string(),
            a.lambda.to_string(),
            a.r.to_string(),
            a.t.to_string(),
            carry.count.to_string(),
            carry.bound.to_string(),
            carry.ratio.to_string(),
        ]);
        results["carry"] = json!(carry);
        tables.push(c);
    }
    Ok(Outcome { results, tables })
}

fn plan(a: &PlanArgs) -> Result<Outcome, Failure> {
    let f = index_function(&a.f)?;
    let p = dissection::parameter_plan(&f, a.a, a.t, a.eps)?;
    let mut t = Table::new("plan", &["epsilon", "R", "T", "L", "M", "lambda", "condition_met"]);
    t.row(vec![
        p.epsilon.to_string(),
        p.r.to_string(),
        p.t.to_string(),
        p.l.to_string(),
        p.m.to_string(),
        p.lambda.to_string(),
        p.condition_met.to_string(),
    ]);
    Ok(Outcome {
        results: json!({ "function": function_summary(&f), "plan": p }),
        tables: vec![t],
    })
}
