//! Command-line front end: argument parsing and the five subcommands.
//!
//! Each `cmd_*` function returns its report as a JSON value so it can be
//! driven from tests without a process boundary.

pub mod disc;
pub mod report;
pub mod scan;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bounds::{admissible_range, b_quantity, compute_constants, threshold_t_main};
use crate::error::{Error, Result};
use crate::eval::{finite_log_product_all, EvalConfig};
use crate::lfunc::{builtin_dirichlet, builtin_zeta, fit_kappa, LFunctionDescriptor};
use crate::mollifier::{fourier_alpha, phi_q_value, truncated_reconstruction, truncation_bounds, MollifierSpec};
use crate::phases::{
    assemble_theta_star, derive_pipeline_params, Construction, ModeRequest, PracticalSizes, RigorousSettings,
};
use crate::sieve;

pub use disc::{run_disc, DiscReport, DiscRequest, DiscSampling};
pub use report::SCHEMA;
pub use scan::{run_scan, ScanReport, ScanRequest, TRange};

#[derive(Debug, Parser)]
#[command(name = "effuniv", version, about = "Effective universality toolkit for L-functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective constants, the main threshold and B(N, c, ε).
    Constants(ConstantsArgs),
    /// Build a phase vector whose finite Euler product hits the targets.
    Construct(ConstructArgs),
    /// Scan t for the best approximation of the targets by log L.
    Scan(ScanArgs),
    /// Search for a shift approximating a function on a disc.
    Disc(DiscArgs),
    /// Check the mollifier's Fourier coefficients and truncation bound.
    MollifierCheck(MollifierArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// `zeta`, `dirichlet:<q>:<v0,v1,...>` or a descriptor JSON file.
    #[arg(long, default_value = "zeta")]
    pub descriptor: String,
    #[arg(long, default_value_t = 0.75)]
    pub sigma0: f64,
    /// Number of derivatives N; defaults to the length of the target.
    #[arg(long)]
    pub order: Option<usize>,
    /// Comma-separated complex literals such as `0.1,-2+0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub common: TargetArgs,
    /// Leading constant of the threshold.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Branch of `log c_0`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub branch: i64,
}

#[derive(Debug, Clone, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub common: TargetArgs,
    /// JSON file with `{"mode": "practical", "X", "Y", "H", "Q"}` or
    /// `{"mode": "rigorous", "C1"}`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Use rigorous sizes with default settings.
    #[arg(long, conflicts_with = "params")]
    pub rigorous: bool,
    /// Where to write the phase assignment.
    #[arg(long)]
    pub phases_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: TargetArgs,
    /// `t0:t1:step`.
    #[arg(long)]
    pub trange: String,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Where to write the per-window minima.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiscArgs {
    #[arg(long, default_value = "zeta")]
    pub descriptor: String,
    #[arg(long, default_value_t = 0.8)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.05)]
    pub radius: f64,
    /// Taylor coefficients `g^{(k)}(s0)/k!`, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub taylor: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta0: f64,
    /// Shift range `τ0:τ1:step`.
    #[arg(long)]
    pub trange: String,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 720)]
    pub boundary_samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub interior_samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MollifierArgs {
    #[arg(long, default_value_t = 3.0)]
    pub q: f64,
    /// Fourier truncation order.
    #[arg(long, default_value_t = 200.0)]
    pub m: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::invalid(format!("cannot parse complex literal `{text}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(C64::new(body[..k].parse::<f64>().map_err(|_| bad())?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

pub fn parse_complex_list(text: &str) -> Result<Vec<C64>> {
    text.split(',').map(parse_complex).collect()
}

/// `zeta`, `dirichlet:<q>:<table>` or a path to a descriptor JSON file.
pub fn parse_descriptor(text: &str) -> Result<LFunctionDescriptor> {
    if text == "zeta" {
        return Ok(builtin_zeta());
    }
    if let Some(rest) = text.strip_prefix("dirichlet:") {
        let (q, table) = rest
            .split_once(':')
            .ok_or_else(|| Error::invalid("expected dirichlet:<q>:<table>"))?;
        let q: u64 = q
            .parse()
            .map_err(|_| Error::invalid(format!("bad modulus `{q}`")))?;
        return builtin_dirichlet(q, &parse_complex_list(table)?);
    }
    if text.ends_with(".json") {
        let body = std::fs::read_to_string(text)
            .map_err(|e| Error::invalid(format!("cannot read descriptor {text}: {e}")))?;
        return LFunctionDescriptor::from_json(&body);
    }
    Err(Error::invalid(format!("unknown descriptor `{text}`")))
}

/// Target vector of length `N`, zero-filled when absent.
fn targets(common: &TargetArgs) -> Result<Vec<C64>> {
    let c = match &common.target {
        Some(t) => parse_complex_list(t)?,
        None => vec![C64::new(0.0, 0.0); common.order.unwrap_or(1)],
    };
    if let Some(n) = common.order {
        if n != c.len() {
            return Err(Error::invalid(format!(
                "--order {n} does not match the {} target entries",
                c.len()
            )));
        }
    }
    if c.is_empty() || c.len() > 12 {
        return Err(Error::range(format!("order {} must lie in 1..=12", c.len())));
    }
    Ok(c)
}

pub fn cmd_constants(desc: &LFunctionDescriptor, sigma0: f64, c: &[C64], eps: f64, c1: f64, branch: i64) -> Result<Value> {
    let consts = compute_constants(desc, sigma0)?;
    let log_log_t = threshold_t_main(&consts, c, eps, c1)?;
    let b = if c[0].norm() > 0.0 {
        report::num(b_quantity(c.len(), c, eps, branch)?)
    } else {
        Value::Null
    };
    let (lo, hi) = admissible_range(desc);
    Ok(json!({
        "schema": SCHEMA,
        "descriptor": desc.name,
        "n": c.len(),
        "targets": report::complex_list(c),
        "eps": eps,
        "admissible_sigma0": [lo, hi],
        "constants": consts,
        "violations": consts.violations(),
        "threshold": {"c1": c1, "log_log_t": report::num(log_log_t)},
        "b_quantity": b,
        "fitted_kappa": fit_kappa(desc, 1e5),
    }))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum ParamsFile {
    Practical {
        #[serde(rename = "X")]
        x: f64,
        #[serde(rename = "Y")]
        y: f64,
        #[serde(rename = "H")]
        h: f64,
        #[serde(rename = "Q")]
        q: f64,
    },
    Rigorous {
        #[serde(rename = "C1", default = "one")]
        c1: f64,
        #[serde(default = "fit_default")]
        fit_limit: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn fit_default() -> f64 {
    RigorousSettings::default().fit_limit
}

pub fn read_mode(path: &Path) -> Result<ModeRequest> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ParamsFile =
        serde_json::from_str(&body).map_err(|e| Error::invalid(format!("bad params file: {e}")))?;
    Ok(match parsed {
        ParamsFile::Practical { x, y, h, q } => ModeRequest::Practical(PracticalSizes { x, y, h, q }),
        ParamsFile::Rigorous { c1, fit_limit } => ModeRequest::Rigorous(RigorousSettings { c1, fit_limit }),
    })
}

/// Outcome of a construction that reached the end of the pipeline.
pub struct ConstructOutcome {
    pub report: Value,
    pub construction: Construction,
    /// Residuals recomputed directly from the finite Euler product.
    pub recomputed: Vec<f64>,
    pub pass: bool,
}

pub fn cmd_construct(desc: &LFunctionDescriptor, sigma0: f64, c: &[C64], eps: f64, mode: ModeRequest) -> Result<ConstructOutcome> {
    let params = derive_pipeline_params(desc, sigma0, c.len(), eps, c, mode)?;
    let built = assemble_theta_star(desc, &params, c)?;
    let primes = sieve::table_for(params.q as u64).up_to(params.q).to_vec();
    let direct = finite_log_product_all(desc, &primes, sigma0, &built.theta_star, c.len());
    let recomputed: Vec<f64> = direct.iter().zip(c).map(|(a, b)| (a - b).norm()).collect();
    let agreement = recomputed
        .iter()
        .zip(&built.residuals)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let worst = built.residuals.iter().copied().fold(0.0, f64::max);
    let pass = worst < eps / 3.0;
    let mut report = json!({
        "schema": SCHEMA,
        "descriptor": desc.name,
        "targets": report::complex_list(c),
        "pass": pass,
        "threshold": eps / 3.0,
        "max_residual": worst,
        "recomputed_residuals": recomputed,
        "recomputation_gap": agreement,
        "theta_star": built.theta_star.iter().map(|(p, t)| json!([p, t])).collect::<Vec<_>>(),
    });
    let details = serde_json::to_value(&built).expect("construction serialises");
    if let (Value::Object(dst), Value::Object(src)) = (&mut report, details) {
        dst.extend(src);
    }
    Ok(ConstructOutcome {
        report,
        construction: built,
        recomputed,
        pass,
    })
}

pub fn cmd_scan(desc: &LFunctionDescriptor, req: &ScanRequest) -> Result<ScanReport> {
    run_scan(desc, req)
}

pub fn scan_json(r: &ScanReport) -> Value {
    let mut v = serde_json::to_value(r).expect("scan report serialises");
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), json!(SCHEMA));
    }
    v
}

pub fn cmd_disc(desc: &LFunctionDescriptor, req: &DiscRequest) -> Result<DiscReport> {
    run_disc(desc, req)
}

pub fn cmd_mollifier_check(q: f64, m: f64, samples: usize, seed: u64) -> Result<Value> {
    let spec = MollifierSpec::new(q, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha_gap = (0..20)
        .map(|_| (fourier_alpha(&spec, 0, rng.gen::<f64>()) - C64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let bounds = truncation_bounds(&spec);
    let k = bounds.prime_count;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let theta: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
        let star: Vec<f64> = (0..k).map(|_| rng.gen()).collect();
        let exact = phi_q_value(&spec, &theta, &star);
        worst = worst.max((exact - truncated_reconstruction(&spec, &theta, &star)).abs());
    }
    Ok(json!({
        "schema": SCHEMA,
        "spec": spec,
        "alpha0_max_gap": alpha_gap,
        "alpha0_ok": alpha_gap <= 1e-10,
        "bounds": bounds,
        "samples": samples,
        "reconstruction_max_error": worst,
        "within_bound": worst <= bounds.truncation,
    }))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Constants(a) => {
            let desc = parse_descriptor(&a.common.descriptor)?;
            let c = targets(&a.common)?;
            let v = cmd_constants(&desc, a.common.sigma0, &c, a.common.eps, a.c1, a.branch)?;
            emit(a.common.out.as_deref(), &report::render(v))?;
            Ok(0)
        }
        Command::Construct(a) => {
            let desc = parse_descriptor(&a.common.descriptor)?;
            let c = targets(&a.common)?;
            let mode = match (&a.params, a.rigorous) {
                (Some(p), _) => read_mode(p)?,
                (None, true) => ModeRequest::Rigorous(RigorousSettings::default()),
                (None, false) => return Err(Error::invalid("pass --params <file.json> or --rigorous")),
            };
            let outcome = cmd_construct(&desc, a.common.sigma0, &c, a.common.eps, mode)?;
            emit(a.common.out.as_deref(), &report::render(outcome.report))?;
            if let Some(p) = &a.phases_out {
                std::fs::write(p, outcome.construction.theta_star.to_json())
                    .map_err(|e| Error::invalid(format!("cannot write {}: {e}", p.display())))?;
            }
            if outcome.pass {
                Ok(0)
            } else {
                eprintln!("error: residuals do not meet ε/3");
                Ok(3)
            }
        }
        Command::Scan(a) => {
            let desc = parse_descriptor(&a.common.descriptor)?;
            let c = targets(&a.common)?;
            let req = ScanRequest {
                sigma0: a.common.sigma0,
                targets: c,
                eps: a.common.eps,
                range: TRange::parse(&a.trange)?,
                workers: a.workers,
                eval: EvalConfig::default(),
            };
            let r = cmd_scan(&desc, &req)?;
            eprintln!("wall_time: {:.3} s", r.wall_time);
            emit(a.common.out.as_deref(), &report::render(scan_json(&r)))?;
            if let Some(p) = &a.csv {
                std::fs::write(p, r.to_csv())
                    .map_err(|e| Error::invalid(format!("cannot write {}: {e}", p.display())))?;
            }
            Ok(0)
        }
        Command::Disc(a) => {
            let desc = parse_descriptor(&a.descriptor)?;
            let req = DiscRequest {
                sigma0: a.sigma0,
                t0: a.t0,
                radius: a.radius,
                taylor: parse_complex_list(&a.taylor)?,
                eps: a.eps,
                delta0: a.delta0,
                range: TRange::parse(&a.trange)?,
                workers: a.workers,
                sampling: DiscSampling {
                    boundary: a.boundary_samples.max(1),
                    interior: a.interior_samples,
                },
                eval: EvalConfig::default(),
            };
            let r = cmd_disc(&desc, &req)?;
            let mut v = serde_json::to_value(&r).expect("disc report serialises");
            if let Value::Object(m) = &mut v {
                m.insert("schema".into(), json!(SCHEMA));
            }
            emit(a.out.as_deref(), &report::render(v))?;
            Ok(0)
        }
        Command::MollifierCheck(a) => {
            let v = cmd_mollifier_check(a.q, a.m, a.samples, a.seed)?;
            let ok = v["alpha0_ok"].as_bool() == Some(true) && v["within_bound"].as_bool() == Some(true);
            emit(a.out.as_deref(), &report::render(v))?;
            Ok(if ok { 0 } else { 4 })
        }
    }
}
