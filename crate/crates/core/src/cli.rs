//! Command-line surface: argument parsing, run configuration, and result
//! records.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frontier::{self, SweepConfig};
use crate::lemmas::{self, SupRatioMode, SupRatioValue, Verdict};
use crate::numerics::{rat_string, DEFAULT_PRECISION_CAP};
use crate::subsetsum::{
    concentration, fiber, profile, profile_dp, profile_mitm, profile_naive, unique_preimages, Caps,
    CubeSet, ReportRecord, SumProfile, Weights,
};
use crate::sumsets::{self, Injectivity, DEFAULT_ENUM_BUDGET};

pub const PRECISION_ENV: &str = "ANTICONC_PRECISION_BITS";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub precision_cap_bits: u32,
    pub caps: Caps,
    pub enum_budget: u128,
    pub output_format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            precision_cap_bits: DEFAULT_PRECISION_CAP,
            caps: Caps::default(),
            enum_budget: DEFAULT_ENUM_BUDGET,
            output_format: Format::Json,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| bad(format!("bad value {v:?} for {key}")))
}

impl RunConfig {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("config line {}: expected key=value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => self.seed = parse_num(key, value)?,
                "precision_cap_bits" => self.precision_cap_bits = parse_num(key, value)?,
                "naive_cap" => self.caps.naive = parse_num(key, value)?,
                "dp_cap" => self.caps.dp = parse_num(key, value)?,
                "mitm_cap" => self.caps.mitm = parse_num(key, value)?,
                "enum_budget" => self.enum_budget = parse_num(key, value)?,
                "output_format" => {
                    self.output_format = Format::from_str(value, true)
                        .map_err(|_| bad(format!("unknown output format {value:?}")))?
                }
                _ => return Err(bad(format!("unknown config key {key:?}"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_cap_bits == 0
            || self.caps.naive == 0
            || self.caps.dp == 0
            || self.caps.mitm == 0
            || self.enum_budget == 0
        {
            return Err(bad("caps and budgets must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "anticonc",
    version,
    about = "Exact subset-sum concentration and range toolkit"
)]
pub struct Cli {
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Precision cap in bits for transcendental comparisons.
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    /// key=value file with cap defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Adds wall-clock time to a metadata field.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subset-sum profile, ρ and |R| of a weight vector.
    Profile {
        /// Comma-separated integers or num/den rationals.
        #[arg(allow_hyphen_values = true)]
        weights: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
    },
    /// Checks one of the inequalities or identities.
    Verify(VerifyArgs),
    /// Exhaustive sweep of canonical weight vectors.
    Frontier(FrontierArgs),
    /// Builds an explicit construction and compares with theory.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Naive,
    Dp,
    Mitm,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    Injectivity,
    Density,
    Partition,
    Moment,
    SecondMoment,
    Tail,
    MaxRatio,
    Supratio,
    Theorem,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub lemma: Lemma,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
    /// First cube set, e.g. 100,010.
    #[arg(long, alias = "set")]
    pub a: Option<String>,
    /// Second cube set.
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long = "C", alias = "constant")]
    pub constant: Option<f64>,
    /// Monte Carlo samples; exact evaluation when absent.
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub max_weight: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub pareto_only: bool,
    /// gnuplot-ready `epsilon delta` file.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<u128>,
    #[arg(long = "C", alias = "constant")]
    pub constant: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Construct {
    Block {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub parameters: Value,
    pub outputs: Value,
    pub seed: u64,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Value>,
}

/// A record plus whether an asserted invariant failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub record: ResultRecord,
    pub failed: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BadParams(_) | Error::Domain(_) => 2,
        _ => 1,
    }
}

/// Builds the effective configuration: defaults, then the config file,
/// then flags, then the precision environment variable.
pub fn resolve_config(cli: &Cli, env_precision: Option<&str>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_config_text(&text)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(bits) = cli.precision_bits {
        cfg.precision_cap_bits = bits;
    }
    if let Some(f) = cli.format {
        cfg.output_format = f;
    }
    if let Some(v) = env_precision {
        cfg.precision_cap_bits = parse_num(PRECISION_ENV, v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn record(cfg: &RunConfig, command: &str, parameters: Value, outputs: Value) -> ResultRecord {
    ResultRecord {
        command: command.into(),
        parameters,
        outputs,
        seed: cfg.seed,
        version: VERSION.into(),
        metadata: None,
    }
}

fn weights_arg(w: &Option<String>) -> Result<Weights> {
    Weights::parse(w.as_deref().ok_or_else(|| bad("--weights is required"))?)
}

fn set_arg(s: &Option<String>, flag: &str) -> Result<CubeSet> {
    CubeSet::parse(
        s.as_deref()
            .ok_or_else(|| bad(format!("--{flag} is required")))?,
    )
}

fn k_arg(k: Option<u32>) -> Result<u32> {
    k.ok_or_else(|| bad("--k is required"))
}

fn profile_json(p: &SumProfile) -> Value {
    Value::Array(
        p.entries()
            .iter()
            .map(|(s, c)| json!([s.to_string(), c.to_string()]))
            .collect(),
    )
}

pub fn cmd_profile(cfg: &RunConfig, weights: &str, method: Method) -> Result<Outcome> {
    let w = Weights::parse(weights)?;
    let p = match method {
        Method::Naive => profile_naive(&w, &cfg.caps)?,
        Method::Dp => profile_dp(&w, &cfg.caps)?,
        Method::Mitm => profile_mitm(&w, &cfg.caps)?,
        Method::Auto => profile(&w, &cfg.caps)?,
    };
    let rep = concentration(&p);
    if !rep.satisfies_trivial_bound() {
        return Err(Error::InvariantViolated(format!("|R| * rho < 1 for {w}")));
    }
    let r = ReportRecord::from(&rep);
    let outputs = json!({
        "n": r.n,
        "rho": r.rho,
        "tau": r.tau,
        "range": r.range,
        "max_count": rep.max_count.to_string(),
        "epsilon": r.epsilon,
        "delta": r.delta,
        "profile": profile_json(&p),
    });
    let params = json!({
        "weights": w.join(","),
        "method": format!("{method:?}").to_lowercase(),
    });
    Ok(Outcome {
        record: record(cfg, "profile", params, outputs),
        failed: false,
    })
}

fn render_vec(v: &[u32]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// A = unique preimages, B = the ρ-witness fiber.
fn witness_sets(w: &Weights, caps: &Caps) -> Result<(CubeSet, CubeSet, BigInt)> {
    let rep = concentration(&profile(w, caps)?);
    let a = unique_preimages(w, caps)?;
    let b = fiber(w, &rep.tau, caps)?;
    Ok((a, b, rep.tau))
}

/// Sets from `--weights` (asserted) or explicit `--a`/`--b` (reported).
fn sets_for(
    args: &VerifyArgs,
    cfg: &RunConfig,
    params: &mut Value,
) -> Result<(CubeSet, CubeSet, bool)> {
    if args.weights.is_some() {
        let w = weights_arg(&args.weights)?;
        let (a, b, tau) = witness_sets(&w, &cfg.caps)?;
        params["weights"] = json!(w.join(","));
        params["tau"] = json!(tau.to_string());
        Ok((a, b, true))
    } else {
        let a = set_arg(&args.a, "a")?;
        let b = set_arg(&args.b, "b")?;
        params["a"] = json!(a.to_string());
        params["b"] = json!(b.to_string());
        Ok((a, b, false))
    }
}

pub fn cmd_verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<Outcome> {
    let cap = cfg.precision_cap_bits;
    let mut params = json!({ "precision_cap_bits": cap });
    let (name, outputs, verdict, asserted): (&str, Value, Verdict, bool) = match args.lemma {
        Lemma::Injectivity => {
            let k = args.k.unwrap_or(1);
            let (a, b, asserted) = sets_for(args, cfg, &mut params)?;
            params["k"] = json!(k);
            let res = sumsets::check_injectivity(&a, &b, k, cfg.enum_budget)?;
            let mut out = json!({ "a_size": a.len(), "b_size": b.len() });
            if let Injectivity::Violated(c) = &res {
                out["collision"] = json!({
                    "first": [render_vec(&c.first.0), render_vec(&c.first.1)],
                    "second": [render_vec(&c.second.0), render_vec(&c.second.1)],
                    "sum": render_vec(&c.sum),
                });
            }
            let v = if res.holds() {
                Verdict::Holds
            } else {
                Verdict::Fails
            };
            ("injectivity", out, v, asserted)
        }
        Lemma::Density => {
            let k = args.k.unwrap_or(1);
            params["k"] = json!(k);
            let sets: Vec<(String, CubeSet)> = if args.weights.is_some() {
                let w = weights_arg(&args.weights)?;
                params["weights"] = json!(w.join(","));
                let p = profile(&w, &cfg.caps)?;
                p.entries()
                    .iter()
                    .map(|(tau, _)| Ok((tau.to_string(), fiber(&w, tau, &cfg.caps)?)))
                    .collect::<Result<_>>()?
            } else {
                let b = set_arg(&args.b.clone().or(args.a.clone()), "b")?;
                params["b"] = json!(b.to_string());
                vec![("set".into(), b)]
            };
            let mut fibers = Vec::new();
            let mut ok = true;
            for (label, b) in &sets {
                let ratio = sumsets::density_ratio_max(b, k, cfg.enum_budget)?;
                let bound = sumsets::density_bound(b, k);
                ok &= ratio <= bound;
                fibers.push(json!({
                    "tau": label,
                    "size": b.len(),
                    "ratio": rat_string(&ratio),
                    "bound": rat_string(&bound),
                }));
            }
            let out = json!({ "checked": sets.len(), "fibers": fibers });
            (
                "density",
                out,
                if ok { Verdict::Holds } else { Verdict::Fails },
                true,
            )
        }
        Lemma::Partition => {
            let k = args.k.unwrap_or(1);
            let (a, b, _) = sets_for(args, cfg, &mut params)?;
            params["k"] = json!(k);
            let total = sumsets::partition_total(&a, &b, k, cfg.enum_budget)?;
            let ok = total == BigRational::one();
            (
                "partition",
                json!({ "total": rat_string(&total) }),
                if ok { Verdict::Holds } else { Verdict::Fails },
                true,
            )
        }
        Lemma::Moment => {
            let k = k_arg(args.k)?;
            let s = args.s.ok_or_else(|| bad("--s is required"))?;
            params["k"] = json!(k);
            params["s"] = json!(s);
            let r = lemmas::check_initial_bound(k, s, cap)?;
            let out = json!({
                "lhs": rat_string(&r.lhs),
                "lhs_approx": crate::numerics::BoundExpr::rat(r.lhs.clone()).approx(),
                "rhs": r.rhs.to_string(),
                "rhs_approx": r.rhs.approx(),
                "in_hypothesis": r.in_hypothesis,
            });
            let asserted = r.in_hypothesis || r.verdict == Verdict::Undecidable;
            ("moment", out, r.verdict, asserted)
        }
        Lemma::SecondMoment => {
            let k = k_arg(args.k)?;
            params["k"] = json!(k);
            let r = lemmas::second_moment_identity(k)?;
            let out = json!({
                "lhs": rat_string(&r.lhs),
                "sum_form": rat_string(&r.sum_form),
                "mid": rat_string(&r.mid),
                "identity": r.identity,
                "lower": r.lower,
                "at_least_one": r.at_least_one,
            });
            ("second-moment", out, r.verdict, true)
        }
        Lemma::Tail => {
            let k = k_arg(args.k)?;
            params["k"] = json!(k);
            let r = lemmas::tail_check(k, cap)?;
            let out = json!({
                "tail": rat_string(&r.tail),
                "rhs": r.rhs.to_string(),
                "rhs_approx": r.rhs.approx(),
            });
            ("tail", out, r.verdict, true)
        }
        Lemma::MaxRatio => {
            let k = k_arg(args.k)?;
            params["k"] = json!(k);
            let r = lemmas::max_ratio_bound(k)?;
            let out = json!({ "max": rat_string(&r.max), "argmax": r.argmax });
            ("max-ratio", out, r.verdict, true)
        }
        Lemma::Supratio => {
            let k = k_arg(args.k)?;
            let a = set_arg(&args.a, "a")?;
            let constant = args.constant.unwrap_or(lemmas::DEFAULT_CONSTANT);
            params["k"] = json!(k);
            params["a"] = json!(a.to_string());
            params["C"] = json!(constant);
            let mode = match args.samples {
                Some(samples) => {
                    params["samples"] = json!(samples);
                    SupRatioMode::MonteCarlo {
                        samples,
                        seed: cfg.seed,
                    }
                }
                None => SupRatioMode::Exact {
                    budget: cfg.enum_budget,
                },
            };
            let r = lemmas::check_sup_ratio_bound(&a, k, constant, mode, cap)?;
            let mut out = json!({
                "n": r.n,
                "delta": r.delta,
                "rhs": r.rhs.to_string(),
                "log_margin": r.log_margin,
            });
            match &r.value {
                SupRatioValue::Exact(v) => out["exact"] = json!(rat_string(v)),
                SupRatioValue::Sampled(e) => {
                    out["estimate"] = serde_json::to_value(e).expect("serializable")
                }
            }
            ("supratio", out, r.verdict, false)
        }
        Lemma::Theorem => {
            let w = weights_arg(&args.weights)?;
            let constant = args.constant.unwrap_or(lemmas::DEFAULT_CONSTANT);
            params["weights"] = json!(w.join(","));
            params["C"] = json!(constant);
            let rep = concentration(&profile(&w, &cfg.caps)?);
            let t = lemmas::theorem_check(&rep, constant);
            let mut out = serde_json::to_value(t).expect("serializable");
            out["rho"] = json!(rat_string(&rep.rho));
            out["range"] = json!(rep.range_size.to_string());
            (
                "theorem",
                out,
                if t.holds {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                },
                false,
            )
        }
    };
    let mut outputs = outputs;
    outputs["verdict"] = json!(verdict.to_string());
    outputs["asserted"] = json!(asserted);
    let failed = asserted && verdict != Verdict::Holds;
    Ok(Outcome {
        record: record(cfg, &format!("verify {name}"), params, outputs),
        failed,
    })
}

/// Runs the sweep, writes the CSV (and plot data), and returns the summary.
pub fn cmd_frontier(
    cfg: &RunConfig,
    args: &FrontierArgs,
    csv_out: &mut dyn Write,
) -> Result<Outcome> {
    let mut sweep_cfg = SweepConfig::new(args.n, args.max_weight).workers(args.workers);
    sweep_cfg.caps = cfg.caps;
    if let Some(b) = args.budget {
        sweep_cfg.budget = b;
    }
    let constant = args.constant.unwrap_or(lemmas::DEFAULT_CONSTANT);
    let all = frontier::sweep(&sweep_cfg)?;
    let audit = frontier::audit(&all, constant)?;
    let rows = if args.pareto_only {
        frontier::pareto(&all)
    } else {
        all.clone()
    };
    let io_err = |e: io::Error| Error::Domain(format!("write failed: {e}"));
    frontier::write_csv(&rows, &mut *csv_out).map_err(io_err)?;
    if let Some(path) = &args.plot_data {
        let mut buf = Vec::new();
        frontier::write_plot_data(&rows, &mut buf).map_err(io_err)?;
        write_file(path, &buf)?;
    }
    let params = json!({
        "n": args.n,
        "max_weight": args.max_weight,
        "pareto_only": args.pareto_only,
        "C": constant,
    });
    let outputs = json!({
        "points": audit.points,
        "rows": rows.len(),
        "pareto_size": frontier::pareto(&all).len(),
        "max_delta_over_eps": frontier::sig12(audit.max_delta_over_eps),
        "argmax_delta_over_eps": audit.argmax_delta_over_eps.join(","),
        "max_delta_over_sqrt_eps": frontier::sig12(audit.max_delta_over_sqrt_eps),
        "argmax_delta_over_sqrt_eps": audit.argmax_delta_over_sqrt_eps.join(","),
        "above_two_eps": audit.above_two_eps,
        "first_above_two_eps": audit.first_above_two_eps.as_ref().map(|w| w.join(",")),
        "within_constant": audit.within_constant,
        "trivial_bound_violations": 0,
        "note": "delta_over_eps is 1 where epsilon = 0",
    });
    Ok(Outcome {
        record: record(cfg, "frontier", params, outputs),
        failed: false,
    })
}

pub fn cmd_construct_block(cfg: &RunConfig, n: usize, k: usize) -> Result<Outcome> {
    let block = lemmas::block_construction(n, k)?;
    let theory = lemmas::block_theory(n, k)?;
    let rep = concentration(&profile(&block.weights, &cfg.caps)?);
    let measured_range = BigInt::from(rep.range_size.clone());
    let equal = rep.rho == theory.rho && measured_range == theory.range;
    let outputs = json!({
        "weights": block.weights.join(","),
        "predicted": { "rho": rat_string(&theory.rho), "range": theory.range.to_string() },
        "measured": { "rho": rat_string(&rep.rho), "range": measured_range.to_string() },
        "epsilon": rep.epsilon,
        "delta": rep.delta,
        "delta_over_eps": frontier::sig12(rep.delta / rep.epsilon),
        "predicted_delta_over_eps": frontier::sig12(lemmas::block_exponent_ratio(k)),
        "verdict": if equal { "holds" } else { "fails" },
    });
    Ok(Outcome {
        record: record(cfg, "construct block", json!({ "n": n, "k": k }), outputs),
        failed: !equal,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes)
        .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.into()
    }
}

/// Serializes a record in the requested format, newline-terminated.
pub fn render(rec: &ResultRecord, format: Format) -> String {
    let value = serde_json::to_value(rec).expect("serializable");
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(&value).expect("serializable")),
        Format::Text | Format::Csv => {
            let mut pairs = Vec::new();
            flatten("", &value, &mut pairs);
            let mut s = String::new();
            if format == Format::Csv {
                s.push_str("key,value\n");
            }
            for (k, v) in pairs {
                if format == Format::Csv {
                    let _ = writeln!(s, "{},{}", csv_field(&k), csv_field(&v));
                } else {
                    let _ = writeln!(s, "{k}: {v}");
                }
            }
            s
        }
    }
}

/// Runs a parsed command line, writing results to `stdout` and diagnostics
/// to `stderr`; returns the process exit code.
pub fn run(
    cli: &Cli,
    env_precision: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let start = Instant::now();
    let result = resolve_config(cli, env_precision).and_then(|cfg| {
        let outcome = match &cli.command {
            Command::Profile { weights, method } => cmd_profile(&cfg, weights, *method),
            Command::Verify(args) => cmd_verify(&cfg, args),
            Command::Frontier(args) => match &args.output {
                Some(path) => {
                    let mut buf = Vec::new();
                    let o = cmd_frontier(&cfg, args, &mut buf)?;
                    write_file(path, &buf)?;
                    Ok(o)
                }
                None => cmd_frontier(&cfg, args, stdout),
            },
            Command::Construct {
                what: Construct::Block { n, k },
            } => cmd_construct_block(&cfg, *n, *k),
        }?;
        Ok((cfg, outcome))
    });
    match result {
        Ok((cfg, mut outcome)) => {
            if cli.timing {
                outcome.record.metadata =
                    Some(json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 }));
            }
            let text = render(&outcome.record, cfg.output_format);
            // with the CSV on stdout the summary goes to stderr
            let sink: &mut dyn Write = match &cli.command {
                Command::Frontier(a) if a.output.is_none() => stderr,
                _ => stdout,
            };
            if sink.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            if outcome.failed {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
