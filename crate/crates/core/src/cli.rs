//! Command-line front end. Every command resolves a [`RunConfig`] from an
//! optional JSON file plus flag overrides, runs, and writes CSV or JSON.

use crate::attention::{self, Interval};
use crate::error::{LabError, Result};
use crate::hurst::{HurstSpec, ResponseSpec};
use crate::rfbm::{self, KernelConvention, SolveOptions};
use crate::specfun;
use crate::tvfbm::{self, TimeGrid};
use crate::verify::{self, Suite, SuiteConfig};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundsKind {
    /// Gaussian tail sandwich on a z-grid
    #[default]
    Tail,
    /// covariance bounds R(t, t+ε) against quadrature
    Covariance,
    /// conditional-variance lower bound over the ε-ladder
    Lnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub horizon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 512, horizon: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_paths: 1, seed: 0 }
    }
}

/// Command-specific parameters; each command reads only its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// evaluation time (attention); defaults to the horizon
    pub t: Option<f64>,
    pub u: f64,
    pub v: f64,
    pub eps: f64,
    pub x: f64,
    pub t0: f64,
    pub eps_ladder: usize,
    pub interval: Option<Interval>,
    pub phi0: f64,
    pub t_end: f64,
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub convention: KernelConvention,
    pub suite: Suite,
    pub bounds: BoundsKind,
    pub z_min: f64,
    pub z_max: f64,
    pub points: usize,
}

impl Default for Params {
    fn default() -> Self {
        let so = SolveOptions::default();
        Self {
            t: None,
            u: 0.5,
            v: 1.0,
            eps: 1e-3,
            x: 1.0,
            t0: 0.5,
            eps_ladder: 5,
            interval: None,
            phi0: 1.0,
            t_end: 1.0,
            step: 1e-3,
            tol: so.tol,
            max_iter: so.max_iter,
            convention: so.convention,
            suite: Suite::All,
            bounds: BoundsKind::Tail,
            z_min: 1.05,
            z_max: 12.0,
            points: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// inferred from the path extension when absent
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hurst: HurstSpec,
    pub response: ResponseSpec,
    pub grid: GridConfig,
    pub mc: McConfig,
    pub params: Params,
    pub suite: SuiteConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SuiteConfig::default();
        Self {
            hurst: s.hurst.clone(),
            response: s.response.clone(),
            grid: GridConfig::default(),
            mc: McConfig::default(),
            params: Params::default(),
            suite: s,
            output: OutputConfig::default(),
        }
    }
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Config(msg.into()))
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| LabError::Config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn format(&self, cmd: &str) -> Format {
        if let Some(f) = self.output.format {
            return f;
        }
        match self.output.path.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some(_) => Format::Csv,
            None if cmd == "verify" => Format::Json,
            None => Format::Csv,
        }
    }

    /// Checks the numeric preconditions of the selected command.
    pub fn validate(&self, cmd: &str) -> Result<()> {
        let p = &self.params;
        let (n, horizon) = (self.grid.n, self.grid.horizon);
        let grid_ok = || -> Result<()> {
            if n == 0 || !(horizon > 0.0 && horizon.is_finite()) {
                return cfg_err(format!("grid needs n >= 1 and horizon > 0, got n={n}, horizon={horizon}"));
            }
            Ok(())
        };
        let paths_ok = || -> Result<()> {
            if self.mc.n_paths == 0 {
                return cfg_err("mc.n_paths must be >= 1");
            }
            Ok(())
        };
        match cmd {
            "simulate" => {
                grid_ok()?;
                paths_ok()?;
                self.hurst.build(horizon)?;
            }
            "rfbm" | "attention" => {
                grid_ok()?;
                paths_ok()?;
                self.response.build(horizon)?;
                if !(p.tol > 0.0) || p.max_iter == 0 {
                    return cfg_err("need tol > 0 and max_iter >= 1");
                }
                if cmd == "attention" {
                    let t = p.t.unwrap_or(horizon);
                    if !(t > 0.0 && t <= horizon) {
                        return cfg_err(format!("attention time t={t} must lie in (0, {horizon}]"));
                    }
                    if let Some(Interval { lo: Some(lo), hi: Some(hi) }) = p.interval {
                        if !(lo < hi) {
                            return cfg_err("interval needs lo < hi");
                        }
                    }
                }
            }
            "covariance" => {
                if !(p.u >= 0.0 && p.v >= 0.0) {
                    return cfg_err("covariance needs u, v >= 0");
                }
                self.hurst.build(p.u.max(p.v).max(f64::MIN_POSITIVE))?;
            }
            "lamperti" => {
                if !(p.phi0 > 0.0 && p.t_end > 0.0 && p.step > 0.0) {
                    return cfg_err("lamperti needs phi0, t_end, step > 0");
                }
            }
            "ldp" => {
                if !(p.x > 0.0 && p.t0 > 0.0) || p.eps_ladder == 0 {
                    return cfg_err("ldp needs x > 0, t0 > 0, eps_ladder >= 1");
                }
                self.hurst.build(p.t0 + 0.1)?;
            }
            "bounds" => match p.bounds {
                BoundsKind::Tail => {
                    if !(p.z_min >= 1.0 && p.z_max > p.z_min) || p.points < 2 {
                        return cfg_err("tail bounds need 1 <= z_min < z_max and points >= 2");
                    }
                }
                BoundsKind::Covariance => {
                    if !(p.eps > 0.0 && p.eps < p.t0) {
                        return cfg_err("covariance bounds need 0 < eps < t0");
                    }
                    self.hurst.build(p.t0 + p.eps)?;
                }
                BoundsKind::Lnd => {
                    if !(p.t0 > 0.0) || p.eps_ladder == 0 {
                        return cfg_err("lnd bounds need t0 > 0 and eps_ladder >= 1");
                    }
                    self.hurst.build(p.t0 + 0.1)?;
                }
            },
            "verify" => self.suite.validate()?,
            _ => return cfg_err(format!("unknown command {cmd}")),
        }
        Ok(())
    }
}

/// Parses a Hurst preset: `sin`, `sin:BASE,AMP,FREQ`, `const:H`, `linear:H0,SLOPE`,
/// or a JSON object.
pub fn parse_hurst(s: &str) -> std::result::Result<HurstSpec, String> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    let (name, args) = split_preset(s)?;
    match (name, args.as_slice()) {
        ("sin" | "sinusoidal", []) => Ok(HurstSpec::Sinusoidal {
            base: 0.5,
            amp: 0.2,
            freq: 1.0,
        }),
        ("sin" | "sinusoidal", &[base, amp, freq]) => Ok(HurstSpec::Sinusoidal { base, amp, freq }),
        ("const" | "constant", &[h]) => Ok(HurstSpec::Constant { h }),
        ("linear", &[h0, slope]) => Ok(HurstSpec::Linear { h0, slope }),
        _ => Err(format!("unrecognized Hurst preset '{s}'")),
    }
}

/// Parses a response preset: `example61`, `example61:HMIN,HMAX,ALPHA,OMEGA`,
/// `const:H`, `tanh:HMIN,HMAX,ALPHA`, `sin-time:BASE,AMP,FREQ`, or a JSON object.
pub fn parse_response(s: &str) -> std::result::Result<ResponseSpec, String> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    let (name, args) = split_preset(s)?;
    match (name, args.as_slice()) {
        ("example61", []) => Ok(ResponseSpec::Example61 {
            h_min: 0.45,
            h_max: 0.55,
            alpha: 0.5,
            omega: 1.0,
        }),
        ("example61", &[h_min, h_max, alpha, omega]) => Ok(ResponseSpec::Example61 {
            h_min,
            h_max,
            alpha,
            omega,
        }),
        ("const" | "constant", &[h]) => Ok(ResponseSpec::Constant { h }),
        ("tanh", &[h_min, h_max, alpha]) => Ok(ResponseSpec::TanhSpatial { h_min, h_max, alpha }),
        ("sin-time", &[base, amp, freq]) => Ok(ResponseSpec::SinusoidalTime { base, amp, freq }),
        _ => Err(format!("unrecognized response preset '{s}'")),
    }
}

fn split_preset(s: &str) -> std::result::Result<(&str, Vec<f64>), String> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let args = rest
        .split(',')
        .filter(|a| !a.is_empty())
        .map(|a| a.trim().parse::<f64>().map_err(|e| format!("bad number '{a}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((name, args))
}

fn parse_interval(s: &str) -> std::result::Result<Interval, String> {
    let (lo, hi) = s.split_once(',').ok_or("interval must be LO,HI (either side may be empty)")?;
    let side = |v: &str| -> std::result::Result<Option<f64>, String> {
        let v = v.trim();
        if v.is_empty() || v == "-inf" || v == "inf" {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|e| format!("bad bound '{v}': {e}"))
        }
    };
    Ok(Interval::new(side(lo)?, side(hi)?))
}

const CSV_SCHEMAS: &str = "\
CSV schemas (header row always written):
  simulate    path,t,value
  rfbm        path,t,value,alpha
  covariance  u,v,value,method,est_error
  attention   s,rho,panel_mass,t,normalization,partition,output
  lamperti    t,phi,alpha
  ldp         eps,ratio,limit,abs_error
  bounds      tail:       z,lower,exact,upper
              covariance: t,eps,lower,value,upper
              lnd:        eps,cond_var,bound,threshold,within_threshold,holds
  verify      check_id,target,estimate,se,tolerance_rule,threshold,verdict,seed,n,note

JSON output wraps the resolved config and the result ({\"config\": .., \"result\": ..});
verify writes the bare report array.
Exit codes: 0 success, 1 verdict failure or solver non-convergence, 2 usage or config error.";

#[derive(Debug, Parser)]
#[command(name = "rfbm-lab", version, about = "Simulate and verify time-varying and responsive fBm", after_help = CSV_SCHEMAS)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON RunConfig; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// write the resolved RunConfig as JSON to this path
    #[arg(long, global = true)]
    emit_config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// grid panels
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// worker thread cap
    #[arg(long, global = true, env = "RFBM_LAB_THREADS")]
    threads: Option<usize>,
    /// sin | sin:B,A,F | const:H | linear:H0,S | JSON object
    #[arg(long, global = true, value_parser = parse_hurst)]
    hurst: Option<HurstSpec>,
    /// example61 | example61:HMIN,HMAX,A,W | const:H | tanh:HMIN,HMAX,A | sin-time:B,A,F | JSON
    #[arg(long, global = true, value_parser = parse_response)]
    response: Option<ResponseSpec>,
}

#[derive(Debug, Args, Default)]
struct SolveArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_parser = parse_convention)]
    convention: Option<KernelConvention>,
}

fn parse_convention(s: &str) -> std::result::Result<KernelConvention, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| "expected state-at-source or evaluation-time".to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample TV-fBm paths on a uniform grid
    #[command(after_help = "CSV: path,t,value")]
    Simulate,
    /// Solve the responsive fBm fixed point by Picard iteration
    #[command(after_help = "CSV: path,t,value,alpha")]
    Rfbm(SolveArgs),
    /// Covariance R(u, v) by quadrature
    #[command(after_help = "CSV: u,v,value,method,est_error")]
    Covariance {
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
    },
    /// Attention profile rho(t, .) of one responsive path
    #[command(after_help = "CSV: s,rho,panel_mass,t,normalization,partition,output\n\
        t is snapped to the nearest grid point.")]
    Attention {
        #[arg(long)]
        t: Option<f64>,
        /// state interval LO,HI for the residence measure (JSON output)
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: Option<Interval>,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Run verification suites
    #[command(after_help = "CSV: check_id,target,estimate,se,tolerance_rule,threshold,verdict,seed,n,note\n\
        Exit code 1 when any verdict fails.")]
    Verify {
        #[arg(long)]
        suite: Option<Suite>,
    },
    /// Lamperti time change phi(t) and alpha(t)
    #[command(after_help = "CSV: t,phi,alpha")]
    Lamperti {
        #[arg(long)]
        phi0: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Large-deviation ratio over the eps ladder
    #[command(after_help = "CSV: eps,ratio,limit,abs_error")]
    Ldp {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        t0: Option<f64>,
        /// number of decades 10^-1 .. 10^-k
        #[arg(long)]
        eps_ladder: Option<usize>,
    },
    /// Tail, covariance or LND bound tables
    #[command(after_help = "CSV:\n  tail:       z,lower,exact,upper\n  covariance: t,eps,lower,value,upper\n  \
        lnd:        eps,cond_var,bound,threshold,within_threshold,holds")]
    Bounds {
        #[arg(long, value_enum)]
        kind: Option<BoundsKind>,
        #[arg(long)]
        z_min: Option<f64>,
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        eps_ladder: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Rfbm(_) => "rfbm",
            Command::Covariance { .. } => "covariance",
            Command::Attention { .. } => "attention",
            Command::Verify { .. } => "verify",
            Command::Lamperti { .. } => "lamperti",
            Command::Ldp { .. } => "ldp",
            Command::Bounds { .. } => "bounds",
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_solve(p: &mut Params, s: &SolveArgs) {
    set(&mut p.tol, s.tol);
    set(&mut p.max_iter, s.max_iter);
    set(&mut p.convention, s.convention);
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let c = &cli.common;
    set(&mut cfg.mc.seed, c.seed);
    set(&mut cfg.grid.n, c.n);
    set(&mut cfg.grid.horizon, c.horizon);
    set(&mut cfg.mc.n_paths, c.paths);
    if c.out.is_some() {
        cfg.output.path = c.out.clone();
    }
    if c.format.is_some() {
        cfg.output.format = c.format;
    }
    if let Some(h) = &c.hurst {
        cfg.hurst = h.clone();
        cfg.suite.hurst = h.clone();
    }
    if let Some(r) = &c.response {
        cfg.response = r.clone();
        cfg.suite.response = r.clone();
    }
    let p = &mut cfg.params;
    match &cli.cmd {
        Command::Simulate => {}
        Command::Rfbm(s) => apply_solve(p, s),
        Command::Covariance { u, v } => {
            set(&mut p.u, *u);
            set(&mut p.v, *v);
        }
        Command::Attention { t, interval, solve } => {
            if t.is_some() {
                p.t = *t;
            }
            if interval.is_some() {
                p.interval = *interval;
            }
            apply_solve(p, solve);
        }
        Command::Verify { suite } => set(&mut p.suite, *suite),
        Command::Lamperti { phi0, t_end, step } => {
            set(&mut p.phi0, *phi0);
            set(&mut p.t_end, *t_end);
            set(&mut p.step, *step);
        }
        Command::Ldp { x, t0, eps_ladder } => {
            set(&mut p.x, *x);
            set(&mut p.t0, *t0);
            set(&mut p.eps_ladder, *eps_ladder);
        }
        Command::Bounds {
            kind,
            z_min,
            z_max,
            points,
            t0,
            eps,
            eps_ladder,
        } => {
            set(&mut p.bounds, *kind);
            set(&mut p.z_min, *z_min);
            set(&mut p.z_max, *z_max);
            set(&mut p.points, *points);
            set(&mut p.t0, *t0);
            set(&mut p.eps, *eps);
            set(&mut p.eps_ladder, *eps_ladder);
        }
    }
    Ok(cfg)
}

/// Rows plus a JSON result for one command.
struct Output {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    json: serde_json::Value,
    failed: bool,
}

fn num(x: f64) -> String {
    if x.is_finite() {
        // shortest round-trip representation
        serde_json::Number::from_f64(x).map(|n| n.to_string()).unwrap_or_default()
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("result serializes")
}

fn solve_opts(p: &Params) -> SolveOptions {
    SolveOptions {
        tol: p.tol,
        max_iter: p.max_iter,
        convention: p.convention,
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Result<Output> {
    let grid = TimeGrid::new(cfg.grid.horizon, cfg.grid.n)?;
    let h = cfg.hurst.build(cfg.grid.horizon)?;
    let paths: Vec<tvfbm::SamplePath> = (0..cfg.mc.n_paths as u64)
        .into_par_iter()
        .map(|p| tvfbm::simulate_tvfbm_stream(&grid, &h, cfg.mc.seed, p))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (p, path) in paths.iter().enumerate() {
        for (t, v) in grid.points.iter().zip(&path.values) {
            rows.push(vec![p.to_string(), num(*t), num(*v)]);
        }
    }
    let values: Vec<&Vec<f64>> = paths.iter().map(|p| &p.values).collect();
    Ok(Output {
        header: vec!["path", "t", "value"],
        rows,
        json: serde_json::json!({ "t": grid.points, "paths": values }),
        failed: false,
    })
}

fn solve_paths(cfg: &RunConfig) -> Result<(Vec<rfbm::RfbmSolution>, crate::hurst::ResponseFunction)> {
    let grid = TimeGrid::new(cfg.grid.horizon, cfg.grid.n)?;
    let f = cfg.response.build(cfg.grid.horizon)?;
    let opts = solve_opts(&cfg.params);
    let sols = (0..cfg.mc.n_paths as u64)
        .into_par_iter()
        .map(|p| rfbm::solve_rfbm_stream(&grid, &f, cfg.mc.seed, p, &opts))
        .collect::<Result<Vec<_>>>()?;
    Ok((sols, f))
}

fn cmd_rfbm(cfg: &RunConfig) -> Result<Output> {
    let (sols, _) = solve_paths(cfg)?;
    let mut rows = Vec::new();
    for (p, s) in sols.iter().enumerate() {
        for k in 0..s.path.len() {
            rows.push(vec![p.to_string(), num(s.grid.points[k]), num(s.path[k]), num(s.alpha[k])]);
        }
    }
    let summary: Vec<serde_json::Value> = sols
        .iter()
        .map(|s| {
            serde_json::json!({
                "path": s.path, "alpha": s.alpha, "iterations": s.iterations,
                "residual_history": s.residual_history, "converged": s.converged, "warning": s.warning,
            })
        })
        .collect();
    Ok(Output {
        header: vec!["path", "t", "value", "alpha"],
        rows,
        json: serde_json::json!({ "t": sols[0].grid.points, "solutions": summary }),
        failed: false,
    })
}

fn cmd_covariance(cfg: &RunConfig) -> Result<Output> {
    let p = &cfg.params;
    let h = cfg.hurst.build(p.u.max(p.v).max(f64::MIN_POSITIVE))?;
    let r = tvfbm::covariance_quadrature(p.u, p.v, &h, 1e-12)?;
    let method = to_json(&r.method).as_str().map(str::to_string).unwrap_or_else(|| format!("{:?}", r.method));
    Ok(Output {
        header: vec!["u", "v", "value", "method", "est_error"],
        rows: vec![vec![num(r.u), num(r.v), num(r.value), method, num(r.est_error)]],
        json: to_json(&r),
        failed: false,
    })
}

fn cmd_attention(cfg: &RunConfig) -> Result<Output> {
    let one = RunConfig {
        mc: McConfig {
            n_paths: 1,
            seed: cfg.mc.seed,
        },
        ..cfg.clone()
    };
    let (sols, f) = solve_paths(&one)?;
    let sol = &sols[0];
    let t_req = cfg.params.t.unwrap_or(cfg.grid.horizon);
    let j = sol.grid.index_of(t_req).max(1);
    let t = sol.grid.points[j];
    let prof = attention::attention_profile(sol, &f, t)?;
    let consts = attention::bound_constants(f.h_min, f.h_max)?;
    let bounds = attention::check_attention_bounds(&prof, &consts);
    let residence = match cfg.params.interval {
        Some(iv) => Some(attention::residence_measure(sol, iv, t)?),
        None => None,
    };
    let rows = (0..prof.s_grid.len())
        .map(|i| {
            vec![
                num(prof.s_grid[i]),
                num(prof.rho[i]),
                num(prof.panel_mass[i]),
                num(t),
                num(prof.normalization),
                num(prof.partition),
                num(prof.output),
            ]
        })
        .collect();
    Ok(Output {
        header: vec!["s", "rho", "panel_mass", "t", "normalization", "partition", "output"],
        rows,
        failed: !bounds.ok(),
        json: serde_json::json!({
            "profile": prof, "bound_violations": bounds.violations, "residence": residence,
        }),
    })
}

fn cmd_lamperti(cfg: &RunConfig) -> Result<Output> {
    let p = &cfg.params;
    // H is evaluated along φ; cover φ(t_end) for any H above 0.1
    let h = cfg.hurst.build((p.phi0 * (10.0 * p.t_end).exp()).max(1.0))?;
    let traj = tvfbm::lamperti_solve(&h, p.phi0, p.t_end, p.step)?;
    let rows = traj.iter().map(|q| vec![num(q.t), num(q.phi), num(q.alpha)]).collect();
    Ok(Output {
        header: vec!["t", "phi", "alpha"],
        rows,
        json: to_json(&traj),
        failed: false,
    })
}

fn cmd_ldp(cfg: &RunConfig) -> Result<Output> {
    let p = &cfg.params;
    let h = cfg.hurst.build(p.t0 + 0.1)?;
    let limit = -0.5 * p.x * p.x;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for eps in tvfbm::eps_ladder(p.eps_ladder) {
        let r = tvfbm::ldp_ratio(p.t0, p.x, eps, &h)?;
        rows.push(vec![num(eps), num(r), num(limit), num((r - limit).abs())]);
        items.push(serde_json::json!({ "eps": eps, "ratio": r, "limit": limit, "abs_error": (r - limit).abs() }));
    }
    Ok(Output {
        header: vec!["eps", "ratio", "limit", "abs_error"],
        rows,
        json: serde_json::Value::Array(items),
        failed: false,
    })
}

fn cmd_bounds(cfg: &RunConfig) -> Result<Output> {
    let p = &cfg.params;
    match p.bounds {
        BoundsKind::Tail => {
            let mut rows = Vec::new();
            let mut items = Vec::new();
            let mut failed = false;
            for k in 0..p.points {
                let z = p.z_min + (p.z_max - p.z_min) * k as f64 / (p.points - 1) as f64;
                let b = specfun::mills_bounds(z)?;
                failed |= !(b.lower < b.exact && b.exact < b.upper);
                rows.push(vec![num(z), num(b.lower), num(b.exact), num(b.upper)]);
                items.push(serde_json::json!({ "z": z, "lower": b.lower, "exact": b.exact, "upper": b.upper }));
            }
            Ok(Output {
                header: vec!["z", "lower", "exact", "upper"],
                rows,
                json: serde_json::Value::Array(items),
                failed,
            })
        }
        BoundsKind::Covariance => {
            let h = cfg.hurst.build(p.t0 + p.eps)?;
            let b = tvfbm::covariance_bounds(p.t0, p.eps, &h)?;
            let c = tvfbm::covariance_quadrature(p.t0, p.t0 + p.eps, &h, 1e-12)?.value;
            Ok(Output {
                header: vec!["t", "eps", "lower", "value", "upper"],
                rows: vec![vec![num(p.t0), num(p.eps), num(b.lower), num(c), num(b.upper)]],
                failed: !(b.lower <= c && c <= b.upper),
                json: serde_json::json!({ "bounds": b, "value": c }),
            })
        }
        BoundsKind::Lnd => {
            let h = cfg.hurst.build(p.t0 + 0.1)?;
            let res: Vec<tvfbm::LndResult> = tvfbm::eps_ladder(p.eps_ladder)
                .into_iter()
                .map(|e| tvfbm::lnd_lower_bound(p.t0, e, &h))
                .collect::<Result<_>>()?;
            let rows = res
                .iter()
                .map(|r| {
                    vec![
                        num(r.eps),
                        num(r.cond_var),
                        num(r.bound),
                        num(r.threshold),
                        r.within_threshold.to_string(),
                        r.holds.to_string(),
                    ]
                })
                .collect();
            Ok(Output {
                header: vec!["eps", "cond_var", "bound", "threshold", "within_threshold", "holds"],
                rows,
                failed: res.iter().any(|r| r.within_threshold && !r.holds),
                json: to_json(&res),
            })
        }
    }
}

fn cmd_verify(cfg: &RunConfig) -> Result<Output> {
    let reports = verify::run_suite(cfg.params.suite, &cfg.suite, cfg.mc.seed)?;
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.check_id.clone(),
                num(r.target),
                num(r.estimate),
                num(r.se),
                r.tolerance_rule.clone(),
                num(r.threshold),
                if r.passed() { "pass" } else { "fail" }.to_string(),
                r.seed.to_string(),
                r.n.to_string(),
                r.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Output {
        header: vec![
            "check_id",
            "target",
            "estimate",
            "se",
            "tolerance_rule",
            "threshold",
            "verdict",
            "seed",
            "n",
            "note",
        ],
        rows,
        failed: reports.iter().any(|r| !r.passed()),
        json: to_json(&reports),
    })
}

fn render(cfg: &RunConfig, cmd: &str, out: &Output) -> Result<Vec<u8>> {
    let io = |e: std::io::Error| LabError::Config(format!("output: {e}"));
    match cfg.format(cmd) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&out.header).map_err(|e| LabError::Config(e.to_string()))?;
            for r in &out.rows {
                w.write_record(r).map_err(|e| LabError::Config(e.to_string()))?;
            }
            w.into_inner().map_err(|e| io(e.into_error()))
        }
        Format::Json => {
            let v = if cmd == "verify" {
                out.json.clone()
            } else {
                serde_json::json!({ "config": cfg, "result": out.json })
            };
            let mut s = serde_json::to_string_pretty(&v).expect("json");
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}

fn dispatch(cfg: &RunConfig, cmd: &str) -> Result<Output> {
    match cmd {
        "simulate" => cmd_simulate(cfg),
        "rfbm" => cmd_rfbm(cfg),
        "covariance" => cmd_covariance(cfg),
        "attention" => cmd_attention(cfg),
        "verify" => cmd_verify(cfg),
        "lamperti" => cmd_lamperti(cfg),
        "ldp" => cmd_ldp(cfg),
        "bounds" => cmd_bounds(cfg),
        _ => cfg_err(format!("unknown command {cmd}")),
    }
}

fn subcommand_help(cmd: &str) -> String {
    let mut app = Cli::command();
    // propagates bin names into subcommand usage lines
    app.build();
    app.find_subcommand_mut(cmd)
        .map(|c| c.render_help().to_string())
        .unwrap_or_default()
}

/// Runs the CLI with explicit argv and streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let cmd = cli.cmd.name();
    let usage = |stderr: &mut dyn Write, e: &LabError| {
        let _ = writeln!(stderr, "error: {e}\n\n{}", subcommand_help(cmd));
        2
    };
    let cfg = match resolve(&cli).and_then(|c| c.validate(cmd).map(|_| c)) {
        Ok(c) => c,
        Err(e) => return usage(stderr, &e),
    };
    if let Some(path) = &cli.common.emit_config {
        if let Err(e) = fs::write(path, cfg.to_json()) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let threads = cli.common.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return 2;
        }
    };
    let result = pool.install(|| dispatch(&cfg, cmd));
    let out = match result {
        Ok(o) => o,
        Err(e @ LabError::NonConvergence { .. }) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
        Err(e @ LabError::Config(_)) | Err(e @ LabError::Domain(_)) => return usage(stderr, &e),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let bytes = match render(&cfg, cmd, &out) {
        Ok(b) => b,
        Err(e) => return usage(stderr, &e),
    };
    let written = match &cfg.output.path {
        Some(path) => fs::write(path, &bytes),
        None => stdout.write_all(&bytes),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return 2;
    }
    if out.failed {
        let _ = writeln!(stderr, "verdict: fail");
        1
    } else {
        0
    }
}

pub fn main() -> ExitCode {
    let code = run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("rfbm-lab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn presets_parse() {
        assert_eq!(parse_hurst("const:0.7").unwrap(), HurstSpec::Constant { h: 0.7 });
        assert_eq!(
            parse_hurst("sin").unwrap(),
            HurstSpec::Sinusoidal {
                base: 0.5,
                amp: 0.2,
                freq: 1.0
            }
        );
        assert!(parse_hurst("linear:0.4").is_err());
        assert_eq!(
            parse_response(r#"{"kind":"constant","h":0.6}"#).unwrap(),
            ResponseSpec::Constant { h: 0.6 }
        );
        assert_eq!(parse_interval(",1.5").unwrap(), Interval::new(None, Some(1.5)));
        assert_eq!(parse_interval("-1,").unwrap(), Interval::new(Some(-1.0), None));
    }

    #[test]
    fn default_config_round_trips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        assert!(RunConfig::from_json(r#"{"grid": {"n": 8, "bogus": 1}}"#).is_err());
    }

    #[test]
    fn ldp_csv_ends_near_limit() {
        let (code, out, _) = run_str(&["ldp", "--x", "1", "--t0", "0.5", "--hurst", "sin", "--eps-ladder", "5"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("eps,ratio,limit,abs_error"));
        let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert!((last[1] + 0.5).abs() < 0.075, "{last:?}");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        let (code, _, err) = run_str(&["simulate", "--n", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"), "{err}");
        assert_eq!(run_str(&["ldp", "--x", "-1"]).0, 2);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn help_lists_csv_schemas() {
        let (_, out, _) = run_str(&["--help"]);
        assert!(out.contains("path,t,value,alpha"));
        let (_, out, _) = run_str(&["bounds", "--help"]);
        assert!(out.contains("z,lower,exact,upper"));
    }
}
