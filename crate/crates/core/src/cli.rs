//! Command-line front end.
//!
//! Exit codes: `0` success or agreement, `1` disagreement or a failed check,
//! `2` usage error.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cf_engine::{
    convergent_identities, half_distance_many, verify_best_approx, ConvergentTable,
    DEFAULT_DEPTH,
};
use crate::circle_arith::{parse_real, CirclePoint, RealValue, DEFAULT_DIGITS};
use crate::cocycle::{CocycleContext, DEFAULT_SEARCH_BOUND};
use crate::error::Error;
use crate::essential_values::{
    classify_with_table, decay_from_table, epsilon_theta_table, limsup_from_table,
    ClassificationReport, DecayReport, DetectorOptions, EpsilonTheta, LimsupReport,
    DEFAULT_MAX_Q, DEFAULT_WINDOW,
};
use crate::partition::{
    uniform_distribution_check, ConstancyPartition, PartitionOptions, Verification,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Shift used by `verify` when `--t` is not given.
pub const VERIFY_DEFAULT_T: &str = "1/3";

/// Exact analysis of the Z² skew product over an irrational rotation.
#[derive(Debug, Parser)]
#[command(name = "rotcocycle", version)]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Rotation number, e.g. "(-1+1*sqrt(5))/2", "7/3", "pi-3".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Shift t; "3a" means <3 alpha>, "1/2+2a" means <1/2 + 2 alpha>.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Number of distinct convergent denominators [default: 40].
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Measure threshold for detector hits [default: 1/128].
    #[arg(long, global = true)]
    pub delta: Option<String>,
    /// Consecutive denominators a value must be hit at [default: 10].
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Bound J for the exact searches t = <j alpha>, t = <1/2 + j alpha> [default: 10000].
    #[arg(long, global = true)]
    pub search_bound: Option<u64>,
    /// Output format [default: json].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Skip re-evaluation of partition intervals.
    #[arg(long, global = true)]
    pub no_verify: bool,
    /// Seed for sampled verification, scan offsets and verify samples [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also feed even denominators to the detector, as a separate sequence.
    #[arg(long, global = true)]
    pub include_even: bool,
    /// Largest denominator whose partition the detector builds [default: 2000000].
    #[arg(long, global = true)]
    pub max_q: Option<u64>,
    /// File of key=value lines with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continued-fraction table of alpha.
    Cf,
    /// a_n(x) and (a_n(x), a_n(x + t)).
    Cocycle {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        x: String,
    },
    /// Intervals of constancy of (a_q(x), a_q(x + t)).
    Partition {
        #[arg(long)]
        q: u64,
    },
    /// epsilon(q), theta(q) over D(alpha), with the limsup and decay diagnostics.
    EpsilonTheta,
    /// Detector, subgroup closure and comparison with the membership predicate.
    Classify,
    /// Classification over the grid t = k/N.
    Scan {
        /// Grid size N.
        #[arg(long)]
        grid: u64,
        /// Add a seeded offset <u alpha>/N, 1 ≤ u ≤ 1000, to every grid point.
        #[arg(long)]
        offsets: bool,
    },
    /// Runs the invariant suite.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub alpha_spec: Option<String>,
    pub t_spec: Option<String>,
    pub depth: usize,
    pub delta: String,
    pub window: usize,
    pub search_bound: u64,
    pub output: Format,
    pub verify: bool,
    pub seed: u64,
    pub threads: usize,
    pub include_even: bool,
    pub max_q: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha_spec: None,
            t_spec: None,
            depth: DEFAULT_DEPTH,
            delta: "1/128".into(),
            window: DEFAULT_WINDOW,
            search_bound: DEFAULT_SEARCH_BOUND,
            output: Format::Json,
            verify: true,
            seed: 0,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            include_even: false,
            max_q: DEFAULT_MAX_Q,
        }
    }
}

/// Why a command stopped early.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidAlpha
            | Error::InvalidDepth { .. }
            | Error::DivisionByZero
            | Error::IncomparableRepresentations(..)
            | Error::NotADenominator { .. }
            | Error::RationalExhausted { .. }
            | Error::PreconditionUnmet(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Failure>
where
    T::Err: Display,
{
    v.trim()
        .parse()
        .map_err(|e| Failure::Usage(format!("invalid value for {key}: {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, Failure> {
    match v.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Failure::Usage(format!("invalid value for {key}: `{other}`"))),
    }
}

impl RunConfig {
    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        self.apply_lines(text).map_err(|f| match f {
            Failure::Usage(m) | Failure::Check(m) => m,
        })
    }

    fn apply_lines(&mut self, text: &str) -> Result<(), Failure> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("config line {}: expected key=value", no + 1)))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"');
            match key.as_str() {
                "alpha" => self.alpha_spec = Some(value.into()),
                "t" => self.t_spec = Some(value.into()),
                "depth" => self.depth = parse_value("depth", value)?,
                "delta" => self.delta = value.into(),
                "window" => self.window = parse_value("window", value)?,
                "search_bound" | "j" => self.search_bound = parse_value("search_bound", value)?,
                "format" => {
                    self.output = Format::from_str(value, true)
                        .map_err(|e| Failure::Usage(format!("invalid value for format: {e}")))?
                }
                "verify" => self.verify = parse_bool("verify", value)?,
                "seed" => self.seed = parse_value("seed", value)?,
                "threads" => self.threads = parse_value("threads", value)?,
                "include_even" => self.include_even = parse_bool("include_even", value)?,
                "max_q" => self.max_q = parse_value("max_q", value)?,
                other => {
                    return Err(Failure::Usage(format!(
                        "config line {}: unknown key `{other}`",
                        no + 1
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, f: &Flags) {
        if let Some(v) = &f.alpha {
            self.alpha_spec = Some(v.clone());
        }
        if let Some(v) = &f.t {
            self.t_spec = Some(v.clone());
        }
        if let Some(v) = f.depth {
            self.depth = v;
        }
        if let Some(v) = &f.delta {
            self.delta = v.clone();
        }
        if let Some(v) = f.window {
            self.window = v;
        }
        if let Some(v) = f.search_bound {
            self.search_bound = v;
        }
        if let Some(v) = f.format {
            self.output = v;
        }
        if f.no_verify {
            self.verify = false;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.threads {
            self.threads = v;
        }
        if f.include_even {
            self.include_even = true;
        }
        if let Some(v) = f.max_q {
            self.max_q = v;
        }
    }

    fn partition_options(&self) -> PartitionOptions {
        PartitionOptions {
            shift_families: true,
            verification: if self.verify {
                Verification::Auto { seed: self.seed }
            } else {
                Verification::Off
            },
        }
    }

    fn detector_options(&self) -> Result<DetectorOptions, Failure> {
        let delta = parse_real(&self.delta, None)
            .map_err(|e| Failure::Usage(format!("invalid value for --delta: {e}")))?
            .value;
        if !delta.is_rational() || delta.signum() != std::cmp::Ordering::Greater {
            return Err(Failure::Usage("--delta must be a positive rational".into()));
        }
        if self.window < 2 {
            return Err(Failure::Usage("--window must be at least 2".into()));
        }
        Ok(DetectorOptions {
            delta,
            window: self.window,
            include_even: self.include_even,
            max_q: self.max_q,
            partition: self.partition_options(),
        })
    }

    fn depth(&self) -> Result<usize, Failure> {
        if self.depth == 0 {
            return Err(Failure::Usage("--depth must be at least 1".into()));
        }
        Ok(self.depth)
    }
}

/// Parsed `α`, with whether it is a truncation.
fn alpha(cfg: &RunConfig) -> Result<(RealValue, bool), Failure> {
    let spec = cfg
        .alpha_spec
        .as_deref()
        .ok_or_else(|| Failure::Usage("--alpha is required".into()))?;
    let parsed = parse_real(spec, None)
        .map_err(|e| Failure::Usage(format!("invalid value for --alpha: {e}")))?;
    Ok((parsed.value, parsed.approximate))
}

struct Setup {
    ctx: CocycleContext,
    table: ConvergentTable,
}

fn setup(cfg: &RunConfig, default_t: Option<&str>) -> Result<Setup, Failure> {
    let (raw, approximate) = alpha(cfg)?;
    let alpha = raw.reduce_mod_1().into_value();
    if alpha.is_zero() {
        return Err(Failure::Usage("invalid value for --alpha: alpha must not be an integer".into()));
    }
    let t_spec = cfg
        .t_spec
        .as_deref()
        .or(default_t)
        .ok_or_else(|| Failure::Usage("--t is required".into()))?;
    let t = parse_real(t_spec, Some(&alpha))
        .map_err(|e| Failure::Usage(format!("invalid value for --t: {e}")))?;
    let ctx = if approximate || t.approximate || alpha.is_rational() {
        CocycleContext::new_truncated(&alpha, &t.value, cfg.search_bound)
    } else {
        CocycleContext::new(&alpha, &t.value, cfg.search_bound)
    }
    .map_err(|e| Failure::Usage(format!("invalid --alpha/--t combination: {e}")))?;
    let table = ConvergentTable::expand_available(&alpha, cfg.depth()?)?;
    Ok(Setup { ctx, table })
}

const APPROX_WARNING: &str = "warning: alpha or t is a rational truncation; results are approximate";

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Check(format!("serialization failed: {e}")))?;
    writeln!(out, "{text}").map_err(|e| Failure::Check(format!("write failed: {e}")))
}

fn emit_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Check(format!("write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Check(format!("write failed: {e}")))
}

fn decimal(v: &RealValue) -> String {
    v.to_decimal(DEFAULT_DIGITS)
}

fn cmd_cf(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (alpha, approximate) = alpha(cfg)?;
    let table = ConvergentTable::expand_available(&alpha, cfg.depth()?)?;
    if approximate {
        let _ = writeln!(err, "{APPROX_WARNING}");
    }
    match cfg.output {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                table: &'a ConvergentTable,
                approximate: bool,
            }
            emit_json(out, &Doc { table: &table, approximate })?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = table
                .convergents()
                .iter()
                .map(|c| {
                    let a = if c.k == 0 {
                        table.a0().to_string()
                    } else {
                        table.quotients()[c.k - 1].to_string()
                    };
                    vec![c.k.to_string(), a, c.p.to_string(), c.q.to_string()]
                })
                .collect();
            emit_csv(out, &["k", "a_k", "p_k", "q_k"], &rows)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_cocycle(cfg: &RunConfig, n: i64, x: &str, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let s = setup(cfg, None)?;
    let x = parse_real(x, Some(s.ctx.alpha()))
        .map_err(|e| Failure::Usage(format!("invalid value for --x: {e}")))?;
    let x = x.value.reduce_mod_1();
    if s.ctx.is_approximate() {
        let _ = writeln!(err, "{APPROX_WARNING}");
    }
    let pair = s.ctx.pair(n, &x)?;
    let s_n = if n >= 0 {
        Some(s.ctx.count_s(n as u64, &x)?)
    } else {
        None
    };
    match cfg.output {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                alpha: &'a RealValue,
                t: &'a CirclePoint,
                n: i64,
                x: &'a CirclePoint,
                s_n: Option<u64>,
                a_n: i64,
                pair: crate::cocycle::PairValue,
                approximate: bool,
            }
            emit_json(
                out,
                &Doc {
                    alpha: s.ctx.alpha(),
                    t: s.ctx.t(),
                    n,
                    x: &x,
                    s_n,
                    a_n: pair.first,
                    pair,
                    approximate: s.ctx.is_approximate(),
                },
            )?;
        }
        Format::Csv => emit_csv(
            out,
            &["n", "x", "x_decimal", "a_n(x)", "a_n(x+t)"],
            &[vec![
                n.to_string(),
                x.to_string(),
                decimal(x.value()),
                pair.first.to_string(),
                pair.second.to_string(),
            ]],
        )?,
    }
    Ok(EXIT_OK)
}

fn cmd_partition(cfg: &RunConfig, q: u64, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if q == 0 {
        return Err(Failure::Usage("--q must be at least 1".into()));
    }
    let s = setup(cfg, None)?;
    if s.ctx.is_approximate() {
        let _ = writeln!(err, "{APPROX_WARNING}");
    }
    let p = ConstancyPartition::build_with(q, &s.ctx, &cfg.partition_options())?;
    match cfg.output {
        Format::Json => emit_json(out, &p)?,
        Format::Csv => p.write_csv(out)?,
    }
    Ok(EXIT_OK)
}

fn epsilon_theta_rows(table: &[EpsilonTheta]) -> Vec<Vec<String>> {
    table
        .iter()
        .map(|e| {
            vec![
                e.q.to_string(),
                e.epsilon.to_string(),
                decimal(&e.epsilon),
                e.theta.to_string(),
                decimal(&e.theta),
                e.i_q.to_string(),
                e.j_q.to_string(),
            ]
        })
        .collect()
}

fn cmd_epsilon_theta(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let s = setup(cfg, None)?;
    if s.ctx.is_approximate() {
        let _ = writeln!(err, "{APPROX_WARNING}");
    }
    let qs = s.table.denominator_set();
    let et = epsilon_theta_table(&qs, &s.ctx)?;
    match cfg.output {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                alpha: &'a RealValue,
                t: &'a CirclePoint,
                depth: usize,
                table: &'a [EpsilonTheta],
                limsup: Option<LimsupReport>,
                decay: Option<DecayReport>,
            }
            let badly = s.table.is_badly_approximable().is_badly_approximable();
            emit_json(
                out,
                &Doc {
                    alpha: s.ctx.alpha(),
                    t: s.ctx.t(),
                    depth: qs.len(),
                    table: &et,
                    limsup: (qs.len() >= 3).then(|| limsup_from_table(&et)),
                    decay: (badly && qs.len() >= 5).then(|| decay_from_table(&s.ctx, &et)),
                },
            )?;
        }
        Format::Csv => emit_csv(
            out,
            &["q", "epsilon", "epsilon_decimal", "theta", "theta_decimal", "i_q", "j_q"],
            &epsilon_theta_rows(&et),
        )?,
    }
    Ok(EXIT_OK)
}

fn basis_text(r: &ClassificationReport) -> String {
    r.subgroup
        .basis
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_classify(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let s = setup(cfg, None)?;
    if s.ctx.is_approximate() {
        let _ = writeln!(err, "{APPROX_WARNING}");
    }
    let report = classify_with_table(&s.ctx, &s.table, &cfg.detector_options()?)?;
    match cfg.output {
        Format::Json => emit_json(out, &report)?,
        Format::Csv => emit_csv(
            out,
            &["t", "t_decimal", "classification", "expected", "agreement", "basis"],
            &[vec![
                report.t.to_string(),
                decimal(report.t.value()),
                format!("{:?}", report.subgroup.classification),
                format!("{:?}", report.expected),
                report.agreement.to_string(),
                basis_text(&report),
            ]],
        )?,
    }
    Ok(if report.agreement { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Clone, Debug, Serialize)]
struct ScanRow {
    index: u64,
    t: CirclePoint,
    classification: crate::essential_values::SubgroupClass,
    expected: crate::essential_values::SubgroupClass,
    agreement: bool,
    /// Minima over the last third of `D(α)`.
    min_epsilon: RealValue,
    min_theta: RealValue,
}

fn tail_min(et: &[EpsilonTheta], pick: fn(&EpsilonTheta) -> &RealValue) -> RealValue {
    let start = et.len() - et.len().div_ceil(3);
    et[start..]
        .iter()
        .map(pick)
        .fold(None::<&RealValue>, |acc, v| match acc {
            Some(a) if a <= v => Some(a),
            _ => Some(v),
        })
        .cloned()
        .unwrap_or_else(RealValue::zero)
}

fn cmd_scan(cfg: &RunConfig, grid: u64, offsets: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if grid == 0 {
        return Err(Failure::Usage("--grid must be at least 1".into()));
    }
    let (raw, approximate) = alpha(cfg)?;
    let alpha = raw.reduce_mod_1().into_value();
    if alpha.is_zero() {
        return Err(Failure::Usage("invalid value for --alpha: alpha must not be an integer".into()));
    }
    if approximate || alpha.is_rational() {
        let _ = writeln!(err, "{APPROX_WARNING}");
    }
    let table = ConvergentTable::expand_available(&alpha, cfg.depth()?)?;
    let opts = cfg.detector_options()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ts = Vec::with_capacity(grid as usize);
    for k in 0..grid {
        let mut t = RealValue::rational(k, grid)?;
        if offsets {
            let u: i64 = rng.gen_range(1..=1000);
            let off = alpha.mul_int(u).reduce_mod_1().into_value().div_int(grid)?;
            t = &t + &off;
        }
        ts.push(t);
    }
    let rows: Vec<Result<ScanRow, Failure>> = ts
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let ctx = if approximate || alpha.is_rational() {
                CocycleContext::new_truncated(&alpha, t, cfg.search_bound)?
            } else {
                CocycleContext::new(&alpha, t, cfg.search_bound)?
            };
            let r = classify_with_table(&ctx, &table, &opts)?;
            Ok(ScanRow {
                index: k as u64,
                t: r.t.clone(),
                classification: r.subgroup.classification,
                expected: r.expected,
                agreement: r.agreement,
                min_epsilon: tail_min(&r.epsilon_theta_table, |e| &e.epsilon),
                min_theta: tail_min(&r.epsilon_theta_table, |e| &e.theta),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    match cfg.output {
        Format::Json => emit_json(out, &rows)?,
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.index.to_string(),
                        r.t.to_string(),
                        decimal(r.t.value()),
                        format!("{:?}", r.classification),
                        format!("{:?}", r.expected),
                        r.agreement.to_string(),
                        r.min_epsilon.to_string(),
                        decimal(&r.min_epsilon),
                        r.min_theta.to_string(),
                        decimal(&r.min_theta),
                    ]
                })
                .collect();
            emit_csv(
                out,
                &[
                    "index",
                    "t",
                    "t_decimal",
                    "classification",
                    "expected",
                    "agreement",
                    "min_epsilon",
                    "min_epsilon_decimal",
                    "min_theta",
                    "min_theta_decimal",
                ],
                &body,
            )?
        }
    }
    Ok(if rows.iter().all(|r| r.agreement) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

/// Denominators up to these sizes take part in the respective `verify` checks.
const DK_LIMIT: u64 = 100_000;
const HALF_LIMIT: u64 = 100_000;
const EQUI_LIMIT: u64 = 10_000;
const MEASURE_LIMIT: u64 = 1_000;
const BEST_APPROX_LIMIT: u64 = 1_000_000;
const SAMPLES: usize = 300;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub witness: String,
}

fn check<F>(name: &'static str, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(usize, String), String>,
{
    match f() {
        Ok((checked, witness)) => CheckResult {
            name,
            passed: true,
            checked,
            witness,
        },
        Err(witness) => CheckResult {
            name,
            passed: false,
            checked: 0,
            witness,
        },
    }
}

/// `⟨u/M + vα⟩`, with `M = 1009` unless `α` already has a large denominator.
fn random_point(rng: &mut ChaCha8Rng, alpha: &RealValue) -> CirclePoint {
    let m: i64 = if alpha.c() < &num_bigint::BigInt::from(1_000_000) {
        1009
    } else {
        2
    };
    let u: i64 = rng.gen_range(0..m);
    let v: i64 = rng.gen_range(-50..=50);
    let r = RealValue::rational(u, m).expect("nonzero denominator");
    (&r + &alpha.mul_int(v)).reduce_mod_1()
}

fn run_checks(s: &Setup, cfg: &RunConfig) -> Vec<CheckResult> {
    let ctx = &s.ctx;
    let table = &s.table;
    let qs = table.denominator_set();
    let upto = |limit: u64| -> Vec<u64> { qs.iter().copied().filter(|&q| q <= limit).collect() };
    let e = |e: Error| e.to_string();
    let mut out = Vec::new();

    out.push(check("convergent_identities", || {
        let r = convergent_identities(table).map_err(e)?;
        Ok((r.determinants + r.chains, format!("{} determinants, {} chains", r.determinants, r.chains)))
    }));
    out.push(check("best_approximation", || {
        let convs = table.convergents();
        let mut n = 0;
        for k in 0..convs.len().saturating_sub(1) {
            if convs[k + 1].q > BEST_APPROX_LIMIT as u128 {
                break;
            }
            verify_best_approx(table, k).map_err(e)?;
            n += 1;
        }
        Ok((n, format!("k < {n}")))
    }));
    out.push(check("denjoy_koksma", || {
        let qs = upto(DK_LIMIT);
        let mut worst = 0;
        for &q in &qs {
            worst = worst.max(ctx.denjoy_koksma_check(q, table).map_err(e)?.max_abs);
        }
        Ok((qs.len(), format!("max |a_q| = {worst}")))
    }));
    out.push(check("half_distance", || {
        let qs = upto(HALF_LIMIT);
        let recs = half_distance_many(table, &qs).map_err(e)?;
        let tightest = recs
            .iter()
            .map(|r| (r.minimum.mul_int(24 * r.q).to_f64(), r.q))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
        Ok((recs.len(), format!("min 24q·min = {:.6} at q = {}", tightest.0, tightest.1)))
    }));
    out.push(check("equidistribution", || {
        let qs = upto(EQUI_LIMIT);
        for &q in &qs {
            if !uniform_distribution_check(q, table).map_err(e)? {
                return Err(format!("q = {q}"));
            }
        }
        Ok((qs.len(), String::new()))
    }));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let alpha = ctx.alpha().clone();
    let half = RealValue::half();
    out.push(check("parity", || {
        for _ in 0..SAMPLES {
            let n: i64 = rng.gen_range(-200..=200);
            let x = random_point(&mut rng, &alpha);
            let a = ctx.birkhoff_a(n, &x).map_err(e)?;
            if (a - n).rem_euclid(2) != 0 {
                return Err(format!("n = {n}, x = {x}: a_n = {a}"));
            }
        }
        Ok((SAMPLES, String::new()))
    }));
    out.push(check("antisymmetry", || {
        for _ in 0..SAMPLES {
            let n: i64 = rng.gen_range(-200..=200);
            let x = random_point(&mut rng, &alpha);
            let a = ctx.birkhoff_a(n, &x).map_err(e)?;
            let b = ctx.birkhoff_a(n, &x.translate(&half).map_err(e)?).map_err(e)?;
            if a != -b {
                return Err(format!("n = {n}, x = {x}: {a} vs {b}"));
            }
        }
        Ok((SAMPLES, String::new()))
    }));
    out.push(check("cocycle_identity", || {
        for _ in 0..SAMPLES {
            let m: i64 = rng.gen_range(-200..=200);
            let n: i64 = rng.gen_range(-200..=200);
            let x = random_point(&mut rng, &alpha);
            if !ctx.check_cocycle_identity(m, n, &x).map_err(e)? {
                return Err(format!("m = {m}, n = {n}, x = {x}"));
            }
        }
        Ok((SAMPLES, String::new()))
    }));
    out.push(check("shift_bound", || {
        for _ in 0..SAMPLES {
            let m: u64 = rng.gen_range(0..=20);
            let n: u64 = rng.gen_range(m + 1..=500);
            let x = random_point(&mut rng, &alpha);
            if !ctx.check_shift_bound(m, n, &x).map_err(e)? {
                return Err(format!("m = {m}, n = {n}, x = {x}"));
            }
        }
        Ok((SAMPLES, String::new()))
    }));
    out.push(check("measure_sum", || {
        let qs = upto(MEASURE_LIMIT);
        let opts = PartitionOptions {
            shift_families: true,
            verification: if cfg.verify {
                Verification::Full
            } else {
                Verification::Off
            },
        };
        for &q in &qs {
            let p = ConstancyPartition::build_with(q, ctx, &opts).map_err(e)?;
            if p.total_length() != RealValue::one() {
                return Err(format!("q = {q}: lengths sum to {}", p.total_length()));
            }
            let bound = RealValue::rational(2, q).map_err(e)?;
            if p.max_length() >= bound {
                return Err(format!("q = {q}: interval of length {}", p.max_length()));
            }
        }
        Ok((qs.len(), String::new()))
    }));
    out
}

fn cmd_verify(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let s = setup(cfg, Some(VERIFY_DEFAULT_T))?;
    let warning = s.ctx.is_approximate().then_some(APPROX_WARNING);
    if let Some(w) = warning {
        let _ = writeln!(err, "{w}");
    }
    let checks = run_checks(&s, cfg);
    let all_passed = checks.iter().all(|c| c.passed);
    for c in checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(err, "check {} failed: {}", c.name, c.witness);
    }
    match cfg.output {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                alpha: &'a RealValue,
                t: &'a CirclePoint,
                depth: usize,
                approximate: bool,
                warning: Option<&'a str>,
                checks: &'a [CheckResult],
                all_passed: bool,
            }
            emit_json(
                out,
                &Doc {
                    alpha: s.ctx.alpha(),
                    t: s.ctx.t(),
                    depth: s.table.denominator_set().len(),
                    approximate: s.ctx.is_approximate(),
                    warning,
                    checks: &checks,
                    all_passed,
                },
            )?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.to_string(),
                        if c.passed { "pass" } else { "fail" }.to_string(),
                        c.checked.to_string(),
                        c.witness.clone(),
                    ]
                })
                .collect();
            emit_csv(out, &["check", "result", "checked", "witness"], &rows)?;
        }
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_FAILURE })
}

fn dispatch(cli: &Cli, cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Cf => cmd_cf(cfg, out, err),
        Command::Cocycle { n, x } => cmd_cocycle(cfg, *n, x, out, err),
        Command::Partition { q } => cmd_partition(cfg, *q, out, err),
        Command::EpsilonTheta => cmd_epsilon_theta(cfg, out, err),
        Command::Classify => cmd_classify(cfg, out, err),
        Command::Scan { grid, offsets } => cmd_scan(cfg, *grid, *offsets, out, err),
        Command::Verify => cmd_verify(cfg, out, err),
    }
}

/// Resolves the configuration: defaults, then the config file, then flags.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read --config {}: {e}", path.display()))?;
        cfg.apply_file(&text)?;
    }
    cfg.apply_flags(flags);
    if cfg.threads == 0 {
        return Err("--threads must be at least 1".into());
    }
    Ok(cfg)
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let cfg = match resolve_config(&cli.flags) {
        Ok(cfg) => cfg,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    let (result, buf_out, buf_err) = pool.install(|| {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let r = dispatch(&cli, &cfg, &mut o, &mut e);
        (r, o, e)
    });
    let _ = out.write_all(&buf_out);
    let _ = err.write_all(&buf_err);
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Check(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_FAILURE
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "(-1+1*sqrt(5))/2";

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["rotcocycle"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn cf_examples() {
        let (code, out, _) = call(&["cf", "--alpha", GOLDEN, "--depth", "6"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["denominators"], serde_json::json!([1, 2, 3, 5, 8, 13]));

        let (code, out, _) = call(&["cf", "--alpha", "7/3"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["finite"], serde_json::json!(true));

        let (code, _, err) = call(&["cf", "--alpha", "abc"]);
        assert_eq!(code, 2);
        assert!(err.contains("--alpha"));
    }

    #[test]
    fn cf_csv() {
        let (code, out, _) = call(&["cf", "--alpha", GOLDEN, "--depth", "4", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("k,a_k,p_k,q_k"));
        assert_eq!(out.lines().nth(1), Some("0,0,0,1"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["classify", "--alpha", GOLDEN]).0, 2);
        assert_eq!(call(&["classify", "--alpha", GOLDEN, "--t", "1/3", "--window", "1"]).0, 2);
        assert_eq!(call(&["partition", "--alpha", GOLDEN, "--t", "1/3", "--q", "0"]).0, 2);
        assert_eq!(call(&["scan", "--alpha", GOLDEN, "--grid", "0"]).0, 2);
        assert_eq!(call(&["bogus"]).0, 2);
        assert_eq!(call(&["cf", "--alpha", "sqrt(2)", "--t", "sqrt(3)"]).0, 0);
        assert_eq!(call(&["partition", "--alpha", "sqrt(2)", "--t", "sqrt(3)", "--q", "3"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn config_file_and_override() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# comment\nalpha = (-1+1*sqrt(5))/2\ndepth=12\nverify=false\n")
            .unwrap();
        assert_eq!(cfg.depth, 12);
        assert!(!cfg.verify);
        let flags = Flags {
            depth: Some(7),
            ..Default::default()
        };
        cfg.apply_flags(&flags);
        assert_eq!(cfg.depth, 7);
        assert_eq!(cfg.alpha_spec.as_deref(), Some(GOLDEN));
        assert!(cfg.apply_file("colour = red").is_err());
    }

    #[test]
    fn classify_shorthand() {
        for (t, class) in [("3a", "Diagonal"), ("1/2+2a", "AntiDiagonal"), ("1/3", "FullG")] {
            let (code, out, _) = call(&[
                "classify", "--alpha", GOLDEN, "--t", t, "--depth", "20", "--window", "4",
            ]);
            assert_eq!(code, 0, "t = {t}");
            let v: serde_json::Value = serde_json::from_str(&out).unwrap();
            assert_eq!(v["subgroup"]["classification"], class);
            assert_eq!(v["agreement"], true);
        }
    }

    #[test]
    fn partition_and_cocycle_output() {
        let (code, out, _) = call(&[
            "partition", "--alpha", GOLDEN, "--t", "1/3", "--q", "1", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
        let (code, out, _) = call(&["cocycle", "--alpha", GOLDEN, "--t", "1/2", "--n", "5", "--x", "1/7"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pair"][0], -v["pair"][1].clone().as_i64().unwrap());
    }

    #[test]
    fn verify_truncated_alpha_warns() {
        let (code, out, err) = call(&["verify", "--alpha", "pi-3", "--depth", "8"]);
        assert!(err.contains("approximate"), "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["approximate"], true);
        assert_eq!(code, 0, "{out}");
    }
}
