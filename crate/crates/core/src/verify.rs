//! Verification suites: each check pairs an estimator with an oracle and
//! emits a machine-readable verdict.

use crate::attention::{self, Interval};
use crate::error::{LabError, Result};
use crate::hurst::{
    empirical_holder_quotient, example_response, frozen_path_holder_constant, sqrt_control_constant,
    validate_response, HurstFunction, HurstSpec, ResponseFunction, ResponseSpec,
};
use crate::quad;
use crate::rfbm::{self, SolveOptions};
use crate::rng;
use crate::specfun;
use crate::stats;
use crate::tvfbm::{self, TimeGrid};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Variance,
    Covariance,
    Tails,
    Ldp,
    Lnd,
    Rfbm,
    Attention,
    Memory,
    Lamperti,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 10] = [
        "variance",
        "covariance",
        "tails",
        "ldp",
        "lnd",
        "rfbm",
        "attention",
        "memory",
        "lamperti",
        "all",
    ];
}

impl FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| LabError::Config(format!("unknown suite '{s}', expected one of {:?}", Suite::NAMES)))
    }
}

/// Sizes and function specs shared by all checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub hurst: HurstSpec,
    pub response: ResponseSpec,
    pub variance_n: usize,
    pub variance_paths: usize,
    pub mc_paths: usize,
    pub rfbm_n: usize,
    pub attention_n: usize,
    pub seeds: usize,
    /// include wall-clock runtime in reports (breaks byte-identical output)
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            hurst: HurstSpec::Sinusoidal {
                base: 0.5,
                amp: 0.2,
                freq: 1.0,
            },
            response: ResponseSpec::Example61 {
                h_min: 0.45,
                h_max: 0.55,
                alpha: 0.5,
                omega: 1.0,
            },
            variance_n: 4096,
            variance_paths: 100_000,
            mc_paths: 1000,
            rfbm_n: 256,
            attention_n: 300,
            seeds: 20,
            timings: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.variance_n < 16 || self.rfbm_n < 16 || self.attention_n < 30 {
            return bad("grid sizes too small (variance_n, rfbm_n >= 16, attention_n >= 30)");
        }
        if self.variance_paths < 100 || self.mc_paths < 500 {
            return bad("need variance_paths >= 100 and mc_paths >= 500");
        }
        if self.seeds == 0 {
            return bad("seeds must be positive");
        }
        self.hurst.build(1.0).map_err(|e| LabError::Config(format!("hurst: {e}")))?;
        self.response.build(1.0).map_err(|e| LabError::Config(format!("response: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// How the pass threshold on |estimate − target| is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    ThreeSe,
    Abs(f64),
    Rel(f64),
    /// max(3·SE, rel·|target|)
    ThreeSeOrRel(f64),
    /// violation count must be zero
    Count,
    /// number of non-monotone ladder steps must be zero
    TrendMonotone,
    /// relative tolerance at the smallest ladder point
    RelAtSmallest(f64),
}

impl Rule {
    pub fn threshold(&self, target: f64, se: f64) -> f64 {
        match *self {
            Rule::ThreeSe => 3.0 * se,
            Rule::Abs(a) => a,
            Rule::Rel(r) | Rule::RelAtSmallest(r) => r * target.abs(),
            Rule::ThreeSeOrRel(r) => (3.0 * se).max(r * target.abs()),
            Rule::Count | Rule::TrendMonotone => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Rule::ThreeSe => "3·SE".into(),
            Rule::Abs(a) => format!("absolute {a:e}"),
            Rule::Rel(r) => format!("relative {r:e}"),
            Rule::ThreeSeOrRel(r) => format!("max(3·SE, {}%)", r * 100.0),
            Rule::Count => "count = 0".into(),
            Rule::TrendMonotone => "trend-monotone".into(),
            Rule::RelAtSmallest(r) => format!("{}% at smallest ε", r * 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub check_id: String,
    pub target: f64,
    pub estimate: f64,
    pub se: f64,
    pub tolerance_rule: String,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    pub seed: u64,
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl McReport {
    pub fn new(id: &str, target: f64, estimate: f64, se: f64, rule: Rule, seed: u64, n: usize) -> Self {
        let threshold = rule.threshold(target, se);
        // NaN compares false and fails
        let pass = (estimate - target).abs() <= threshold;
        Self {
            check_id: id.to_string(),
            target,
            estimate,
            se,
            tolerance_rule: rule.label(),
            threshold,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            runtime_ms: None,
            seed,
            n: n as u64,
            note: None,
        }
    }

    pub fn count(id: &str, violations: usize, seed: u64, n: usize) -> Self {
        Self::new(id, 0.0, violations as f64, 0.0, Rule::Count, seed, n)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn errored(id: &str, seed: u64, err: &LabError) -> Self {
        Self::new(id, 0.0, f64::NAN, 0.0, Rule::Count, seed, 0).with_note(format!("error: {err}"))
    }
}

/// What a registry entry is accountable for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covers {
    /// (module, 0-based index into that module's invariant list)
    Invariant(&'static str, usize),
    Acceptance(u8),
    Extra,
}

/// Number of listed invariants per module that the registry must cover.
pub const MODULE_INVARIANTS: [(&str, usize); 5] =
    [("specfun", 4), ("hurst", 3), ("tvfbm", 6), ("rfbm", 5), ("attention", 6)];

pub struct Ctx<'a> {
    pub cfg: &'a SuiteConfig,
    pub seed: u64,
}

type CheckFn = fn(&Ctx) -> Result<Vec<McReport>>;

pub struct CheckSpec {
    pub id: &'static str,
    pub suite: Suite,
    pub covers: Covers,
    run: CheckFn,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Per-check seed so checks draw from unrelated streams.
pub fn check_seed(seed: u64, id: &str) -> u64 {
    seed ^ fnv1a(id)
}

impl CheckSpec {
    pub fn run(&self, cfg: &SuiteConfig, seed: u64) -> Vec<McReport> {
        let ctx = Ctx {
            cfg,
            seed: check_seed(seed, self.id),
        };
        let start = Instant::now();
        let mut out = match (self.run)(&ctx) {
            Ok(r) => r,
            Err(e) => vec![McReport::errored(self.id, ctx.seed, &e)],
        };
        if cfg.timings {
            let ms = start.elapsed().as_millis() as u64;
            for r in &mut out {
                r.runtime_ms = Some(ms);
            }
        }
        out
    }
}

macro_rules! check {
    ($id:expr, $suite:ident, $covers:expr, $f:expr) => {
        CheckSpec {
            id: $id,
            suite: Suite::$suite,
            covers: $covers,
            run: $f,
        }
    };
}

use Covers::{Acceptance as Acc, Extra, Invariant as Inv};

pub fn registry() -> Vec<CheckSpec> {
    let mut r = vec![
        check!("specfun.mills_strict", Tails, Inv("specfun", 0), c_mills_strict),
        check!("specfun.log_control", Tails, Inv("specfun", 1), c_log_control),
        check!("specfun.hyp2f1_euler", Covariance, Inv("specfun", 2), c_hyp2f1_euler),
        check!("specfun.gamma_recurrence", Tails, Inv("specfun", 3), c_gamma_recurrence),
        check!("hurst.example_lipschitz", Rfbm, Inv("hurst", 0), c_example_lipschitz),
        check!("hurst.frozen_path_holder", Rfbm, Inv("hurst", 1), c_frozen_path),
        check!("hurst.sqrt_control", Variance, Inv("hurst", 2), c_sqrt_control),
        check!("tvfbm.isometry", Variance, Inv("tvfbm", 0), c_isometry),
        check!("tvfbm.cov_symmetry", Covariance, Inv("tvfbm", 1), c_cov_symmetry),
        check!("tvfbm.cov_psd", Covariance, Inv("tvfbm", 2), c_cov_psd),
        check!("tvfbm.eval_j", Covariance, Inv("tvfbm", 3), c_eval_j),
        check!("tvfbm.ldp_monotone", Ldp, Inv("tvfbm", 4), c_ldp_monotone),
        check!("tvfbm.lamperti_normalization", Lamperti, Inv("tvfbm", 5), c_lamperti_norm),
        check!("tvfbm.cov_bounds", Covariance, Extra, c_cov_bounds),
        check!("tvfbm.as_bound", Tails, Extra, c_as_bound),
        check!("rfbm.picard_geometric", Rfbm, Inv("rfbm", 0), c_picard_geometric),
        check!("rfbm.s2_contraction", Rfbm, Inv("rfbm", 1), c_s2_contraction),
        check!("rfbm.alpha_holder", Rfbm, Inv("rfbm", 2), c_alpha_holder),
        check!("rfbm.grid_refinement", Rfbm, Inv("rfbm", 3), c_grid_refinement),
        check!("rfbm.memory_monotone", Memory, Inv("rfbm", 4), c_memory_monotone),
        check!("rfbm.solution_norm", Rfbm, Extra, c_solution_norm),
        check!("attention.normalization", Attention, Inv("attention", 0), c_att_normalization),
        check!("attention.positivity", Attention, Inv("attention", 1), c_att_positivity),
        check!("attention.bounds", Attention, Inv("attention", 2), c_att_bounds),
        check!("attention.sensitivity", Attention, Inv("attention", 3), c_att_sensitivity),
        check!("attention.volatility", Attention, Inv("attention", 4), c_att_volatility),
        check!("attention.conservation", Attention, Inv("attention", 5), c_att_conservation),
        check!("acc01.variance_law", Variance, Acc(1), c_acc01),
        check!("acc02.classical_reduction", Variance, Acc(2), c_acc02),
        check!("acc03.covariance_consistency", Covariance, Acc(3), c_acc03),
        check!("acc04.hypergeometric", Covariance, Acc(4), c_acc04),
        check!("acc05.tail_bounds", Tails, Acc(5), c_acc05),
        check!("acc06.ldp", Ldp, Acc(6), c_acc06),
        check!("acc07.lnd", Lnd, Acc(7), c_acc07),
        check!("acc08.lamperti", Lamperti, Acc(8), c_acc08),
        check!("acc09.rfbm_wellposed", Rfbm, Acc(9), c_acc09),
        check!("acc10.scaling_exponents", Rfbm, Acc(10), c_acc10),
        check!("acc11.memory", Memory, Acc(11), c_acc11),
        check!("acc12.attention", Attention, Acc(12), c_acc12),
    ];
    r.sort_by_key(|c| c.id);
    r
}

/// Runs a suite; reports come back sorted by check_id.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig, seed: u64) -> Result<Vec<McReport>> {
    cfg.validate()?;
    let checks: Vec<CheckSpec> = registry()
        .into_iter()
        .filter(|c| suite == Suite::All || c.suite == suite)
        .collect();
    let mut out: Vec<McReport> = checks
        .par_iter()
        .map(|c| c.run(cfg, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    out.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(out)
}

/// Runs the checks for one acceptance criterion.
pub fn run_acceptance(criterion: u8, cfg: &SuiteConfig, seed: u64) -> Result<Vec<McReport>> {
    cfg.validate()?;
    let mut out: Vec<McReport> = registry()
        .iter()
        .filter(|c| c.covers == Covers::Acceptance(criterion))
        .flat_map(|c| c.run(cfg, seed))
        .collect();
    out.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(out)
}

fn rename(mut r: McReport, id: &str) -> McReport {
    r.check_id = id.to_string();
    r
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

// ---------------------------------------------------------------- specfun

fn c_mills_strict(ctx: &Ctx) -> Result<Vec<McReport>> {
    let n = 500;
    let (a, b) = (1.05f64.ln(), 12f64.ln());
    let mut bad = 0;
    for k in 0..n {
        let z = (a + (b - a) * k as f64 / (n - 1) as f64).exp();
        let t = specfun::mills_bounds(z)?;
        if !(t.lower < t.exact && t.exact < t.upper) {
            bad += 1;
        }
    }
    Ok(vec![McReport::count("specfun.mills_strict", bad, ctx.seed, n)])
}

fn c_log_control(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut r = rng::stream(ctx.seed, 0);
    let mut bad = 0;
    for (delta, alpha) in [(0.5, 1.0), (0.25, 0.5)] {
        let k = specfun::log_control_constant(delta, alpha)?;
        for _ in 0..1000 {
            let x: f64 = 1.0 - r.gen::<f64>();
            if x.ln().abs() > k * x.powf(-delta) * (1.0 + 1e-12) {
                bad += 1;
            }
            let y: f64 = r.gen_range(1.0..100.0);
            if y.ln().abs() > k * y.powf(alpha) * (1.0 + 1e-12) {
                bad += 1;
            }
        }
    }
    Ok(vec![McReport::count("specfun.log_control", bad, ctx.seed, 4000)])
}

/// ₂F₁ from the Euler integral split at 1/2, each half with an endpoint
/// substitution.
pub fn hyp2f1_euler_quadrature(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let g = |x: f64| (1.0 - z * x).powf(-a);
    let left = quad::integrate_endpoint_power(
        |s| (1.0 - (0.5 - s)).powf(c - b - 1.0) * g(0.5 - s),
        0.5,
        b - 1.0,
        b,
        1e-14,
        1e-13,
    )?;
    let right = quad::integrate_endpoint_power(
        |s| (0.5 + s).powf(b - 1.0) * g(0.5 + s),
        0.5,
        c - b - 1.0,
        c - b,
        1e-14,
        1e-13,
    )?;
    let pref = specfun::gamma_fn(c)? / (specfun::gamma_fn(b)? * specfun::gamma_fn(c - b)?);
    Ok(pref * (left.value + right.value))
}

fn c_hyp2f1_euler(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut r = rng::stream(ctx.seed, 0);
    let mut worst: f64 = 0.0;
    let n = 200;
    for _ in 0..n {
        let a: f64 = r.gen_range(-1.5..1.5);
        let b: f64 = r.gen_range(0.2..2.0);
        let c = b + r.gen_range(0.2..2.0);
        let z: f64 = -r.gen::<f64>();
        let series = specfun::hyp2f1(a, b, c, z)?;
        let euler = hyp2f1_euler_quadrature(a, b, c, z)?;
        worst = worst.max((series - euler).abs() / euler.abs().max(1.0));
    }
    Ok(vec![McReport::new("specfun.hyp2f1_euler", 0.0, worst, 0.0, Rule::Abs(1e-9), ctx.seed, n)])
}

fn c_gamma_recurrence(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut worst: f64 = 0.0;
    for x in [0.3, 0.75, 1.5, 3.2] {
        let lhs = specfun::gamma_fn(x + 1.0)?;
        let rhs = x * specfun::gamma_fn(x)?;
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok(vec![McReport::new("specfun.gamma_recurrence", 0.0, worst, 0.0, Rule::Abs(1e-11), ctx.seed, 4)])
}

// ---------------------------------------------------------------- hurst

fn c_example_lipschitz(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut out = Vec::new();
    let specs = [
        ctx.cfg.response.clone(),
        ResponseSpec::Example61 {
            h_min: 0.3,
            h_max: 0.7,
            alpha: 2.0,
            omega: 1.0,
        },
    ];
    let mut excess: f64 = 0.0;
    for spec in specs.iter() {
        let f = spec.build(1.0)?;
        let v = validate_response(&f, 100_000)?;
        excess = excess.max(v.spatial_max - f.l_h);
    }
    // estimate is the excess over the declared constant, clipped at zero
    out.push(McReport::new(
        "hurst.example_lipschitz",
        0.0,
        excess.max(0.0),
        0.0,
        Rule::Abs(1e-9),
        ctx.seed,
        100_000,
    ));
    Ok(out)
}

fn c_frozen_path(ctx: &Ctx) -> Result<Vec<McReport>> {
    let n = 400;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let fs = [
        ctx.cfg.response.build(1.0)?,
        example_response(0.3, 0.7, 2.0, 1.0, 1.0)?,
    ];
    let mut bad = 0;
    let mut cases = 0;
    for f in &fs {
        for g_star in [0.3, 0.5, 0.8] {
            for c in [0.5, 2.0] {
                // c·s^{γ*} has Hölder constant c at exponent γ*
                let hs: Vec<f64> = times.iter().map(|&s| f.eval(s, c * s.powf(g_star))).collect();
                let expo = f.gamma.min(g_star);
                let q = empirical_holder_quotient(&times, &hs, expo);
                cases += 1;
                if q > frozen_path_holder_constant(f.l_h, c, f.c_h) * (1.0 + 1e-12) {
                    bad += 1;
                }
            }
        }
    }
    Ok(vec![McReport::count("hurst.frozen_path_holder", bad, ctx.seed, cases)])
}

fn c_sqrt_control(ctx: &Ctx) -> Result<Vec<McReport>> {
    let horizon = 2.0;
    let h = ctx.cfg.hurst.build(horizon)?;
    let d = sqrt_control_constant(&h);
    let mut r = rng::stream(ctx.seed, 0);
    let mut bad = 0;
    let n = 10_000;
    for _ in 0..n {
        let eps = 10f64.powf(r.gen_range(-6.0..-0.5));
        let t = r.gen_range(0.0..(horizon - eps));
        let q = ((2.0 * h.eval(t + eps)).sqrt() - (2.0 * h.eval(t)).sqrt()).abs() / eps.powf(h.gamma);
        if q > d + 1e-12 {
            bad += 1;
        }
    }
    Ok(vec![McReport::count("hurst.sqrt_control", bad, ctx.seed, n)])
}

// ---------------------------------------------------------------- tvfbm

fn c_isometry(ctx: &Ctx) -> Result<Vec<McReport>> {
    let n = ctx.cfg.variance_n;
    let grid = TimeGrid::new(1.0, n)?;
    let mut hs: Vec<HurstFunction> = [0.3, 0.6, 0.9]
        .iter()
        .map(|&h| HurstFunction::constant(h, 1.0))
        .collect::<Result<_>>()?;
    hs.push(ctx.cfg.hurst.build(1.0)?);
    // the first panels carry an O(k^{-2H}) averaging deficit; start at T/16
    let k0 = (n / 16).max(1);
    let worst = hs
        .par_iter()
        .map(|h| {
            (k0..=n)
                .map(|k| {
                    let t = grid.points[k];
                    let target = tvfbm::variance_theoretical(t, h);
                    ((tvfbm::discrete_isometry(&grid, k, h) - target) / target).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect::<Vec<_>>();
    Ok(vec![McReport::new(
        "tvfbm.isometry",
        0.0,
        max_of(worst),
        0.0,
        Rule::Abs(5e-3),
        ctx.seed,
        n,
    )
    .with_note(format!("grid times t_k >= {}", grid.points[k0]))])
}

fn sin_hurst(ctx: &Ctx, horizon: f64) -> Result<HurstFunction> {
    ctx.cfg.hurst.build(horizon)
}

fn c_cov_symmetry(ctx: &Ctx) -> Result<Vec<McReport>> {
    let h = sin_hurst(ctx, 2.0)?;
    let mut r = rng::stream(ctx.seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (u, v) = (r.gen_range(0.01..2.0), r.gen_range(0.01..2.0));
        let a = tvfbm::covariance_quadrature(u, v, &h, 1e-12)?.value;
        let b = tvfbm::covariance_quadrature(v, u, &h, 1e-12)?.value;
        worst = worst.max((a - b).abs());
    }
    Ok(vec![McReport::new("tvfbm.cov_symmetry", 0.0, worst, 0.0, Rule::Abs(1e-10), ctx.seed, 50)])
}

fn c_cov_psd(ctx: &Ctx) -> Result<Vec<McReport>> {
    let h = sin_hurst(ctx, 1.0)?;
    let times: Vec<f64> = (1..=8).map(|k| k as f64 / 8.0).collect();
    let m = tvfbm::covariance_matrix(&times, &h, 1e-12)?;
    let mat = nalgebra::DMatrix::from_fn(8, 8, |i, j| m[i][j]);
    let eig = nalgebra::SymmetricEigen::new(mat).eigenvalues;
    let lambda_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    // estimate is how far the smallest eigenvalue dips below zero
    Ok(vec![McReport::new(
        "tvfbm.cov_psd",
        0.0,
        (-lambda_min).max(0.0),
        0.0,
        Rule::Abs(1e-9),
        ctx.seed,
        8,
    )
    .with_note(format!("smallest eigenvalue {lambda_min:e}"))])
}

/// ∫₀^u (u−s)^a (v−s)^b ds by direct quadrature.
pub fn brute_j(a: f64, b: f64, u: f64, v: f64) -> Result<f64> {
    Ok(quad::integrate_endpoint_power(|s| (v - s).powf(b), u, a, a + 1.0, 1e-14, 1e-13)?.value)
}

fn c_eval_j(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut r = rng::stream(ctx.seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = r.gen_range(-0.9..1.5);
        let b = r.gen_range(-0.9..1.5);
        let u = r.gen_range(0.05..1.5);
        let v = u * r.gen_range(2.0..5.0);
        let j = tvfbm::eval_j(a, b, u, v)?;
        let q = brute_j(a, b, u, v)?;
        worst = worst.max((j - q).abs() / q.abs().max(1.0));
    }
    Ok(vec![McReport::new("tvfbm.eval_j", 0.0, worst, 0.0, Rule::Abs(1e-8), ctx.seed, 100)])
}

fn ldp_errors(h0: f64, x: f64) -> Result<Vec<f64>> {
    let h = HurstFunction::constant(h0, 1.0)?;
    tvfbm::eps_ladder(5)
        .iter()
        .map(|&eps| Ok((tvfbm::ldp_ratio(0.5, x, eps, &h)? + 0.5 * x * x).abs()))
        .collect()
}

fn non_monotone_steps(errs: &[f64]) -> usize {
    errs.windows(2).filter(|w| !(w[1] < w[0])).count()
}

fn c_ldp_monotone(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut bad = 0;
    for h0 in [0.55, 0.6, 0.75] {
        for x in [0.5, 1.0, 2.0] {
            bad += non_monotone_steps(&ldp_errors(h0, x)?);
        }
    }
    Ok(vec![McReport::new("tvfbm.ldp_monotone", 0.0, bad as f64, 0.0, Rule::TrendMonotone, ctx.seed, 9)])
}

fn c_lamperti_norm(ctx: &Ctx) -> Result<Vec<McReport>> {
    let h = sin_hurst(ctx, 10.0)?;
    let worst = max_of((1..=1000).map(|k| (tvfbm::variance_normalization(&h, k as f64 * 0.01) - 1.0).abs()));
    Ok(vec![McReport::new(
        "tvfbm.lamperti_normalization",
        0.0,
        worst,
        0.0,
        Rule::Abs(1e-12),
        ctx.seed,
        1000,
    )])
}

fn c_cov_bounds(ctx: &Ctx) -> Result<Vec<McReport>> {
    let h = sin_hurst(ctx, 2.0)?;
    let mut r = rng::stream(ctx.seed, 0);
    let mut bad = 0;
    let n = 30;
    for _ in 0..n {
        let t = r.gen_range(0.2..1.0);
        let eps = t * 10f64.powf(r.gen_range(-3.0..-0.1));
        let b = tvfbm::covariance_bounds(t, eps, &h)?;
        let c = tvfbm::covariance_quadrature(t, t + eps, &h, 1e-12)?.value;
        if !(b.lower <= c * (1.0 + 1e-9) && c <= b.upper * (1.0 + 1e-9)) {
            bad += 1;
        }
    }
    Ok(vec![McReport::count("tvfbm.cov_bounds", bad, ctx.seed, n)])
}

fn c_as_bound(ctx: &Ctx) -> Result<Vec<McReport>> {
    let h = sin_hurst(ctx, 2.0)?;
    let n_max = 10_000;
    let rep = tvfbm::as_bound_check(0.5, &h, 1.5, n_max, ctx.seed)?;
    // only the tail of the sequence speaks to the eventual bound
    let late = rep.violations.iter().filter(|&&n| n > n_max / 2).count();
    Ok(vec![McReport::count("tvfbm.as_bound", late, ctx.seed, n_max).with_note(format!(
        "{} violations in total, last at n = {:?}",
        rep.violations.len(),
        rep.largest_violation
    ))])
}

// ---------------------------------------------------------------- rfbm

struct CertifiedSetup {
    f: ResponseFunction,
    cert: rfbm::ContractionCertificate,
    grid: TimeGrid,
}

fn certified(ctx: &Ctx) -> Result<CertifiedSetup> {
    let f = ctx.cfg.response.build(1.0)?;
    let c1 = if f.is_state_independent() {
        1.0
    } else {
        let probe = TimeGrid::new(1.0, 128)?;
        rfbm::kernel_lipschitz_check(&probe, &f, 50, ctx.seed)?.c_k
    };
    let cert = rfbm::contraction_certificate(&f, 1.0, c1.max(f64::MIN_POSITIVE))?;
    let grid = TimeGrid::new(cert.t0, ctx.cfg.rfbm_n)?;
    Ok(CertifiedSetup { f, cert, grid })
}

fn solve_seeds(grid: &TimeGrid, f: &ResponseFunction, seeds: usize, base: u64) -> Vec<Result<rfbm::RfbmSolution>> {
    let opts = SolveOptions::default();
    (0..seeds as u64)
        .into_par_iter()
        .map(|p| rfbm::solve_rfbm_stream(grid, f, base, p, &opts))
        .collect()
}

fn c_picard_geometric(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = certified(ctx)?;
    let sols: Vec<rfbm::RfbmSolution> = solve_seeds(&s.grid, &s.f, ctx.cfg.seeds, ctx.seed)
        .into_iter()
        .collect::<Result<_>>()?;
    let worst = max_of(sols.iter().flat_map(|sol| {
        let r = &sol.residual_history;
        (1..r.len().saturating_sub(1)).filter(|&k| r[k] > 0.0).map(move |k| r[k + 1] / r[k])
    }));
    let excess = (worst - s.cert.kappa - 0.1).max(0.0);
    Ok(vec![McReport::new("rfbm.picard_geometric", 0.0, excess, 0.0, Rule::Abs(0.0), ctx.seed, sols.len())
        .with_note(format!("max sup-norm ratio {worst:.4}, kappa {:.4}, T0 {:.4}", s.cert.kappa, s.cert.t0))])
}

fn s2_report(ctx: &Ctx, id: &str) -> Result<McReport> {
    let s = certified(ctx)?;
    let rep = rfbm::s2_contraction_check(&s.grid, &s.f, ctx.cfg.mc_paths, ctx.seed, 6, s.cert.kappa)?;
    if rep.ratios.is_empty() {
        return Ok(McReport::count(id, 1, ctx.seed, ctx.cfg.mc_paths).with_note("no usable sweep pairs"));
    }
    // the sweep with the largest excess over kappa decides
    let (k, _) = rep
        .ratios
        .iter()
        .zip(&rep.ses)
        .enumerate()
        .map(|(k, (r, se))| (k, (r - rep.kappa) / se.max(1e-300)))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let excess = (rep.ratios[k] - rep.kappa).max(0.0);
    Ok(McReport::new(id, 0.0, excess, rep.ses[k], Rule::ThreeSe, ctx.seed, ctx.cfg.mc_paths)
        .with_note(format!("ratios {:?}, kappa {:.4}", rep.ratios, rep.kappa)))
}

fn c_s2_contraction(ctx: &Ctx) -> Result<Vec<McReport>> {
    Ok(vec![s2_report(ctx, "rfbm.s2_contraction")?])
}

fn c_alpha_holder(ctx: &Ctx) -> Result<Vec<McReport>> {
    let grid = TimeGrid::new(1.0, ctx.cfg.rfbm_n)?;
    let fs = [ctx.cfg.response.build(1.0)?, example_response(0.3, 0.7, 2.0, 1.0, 1.0)?];
    let mut bad = 0;
    let mut n = 0;
    for f in &fs {
        for sol in solve_seeds(&grid, f, ctx.cfg.seeds, ctx.seed) {
            n += 1;
            if !rfbm::alpha_holder_check(&sol?, f).bounded {
                bad += 1;
            }
        }
    }
    Ok(vec![McReport::count("rfbm.alpha_holder", bad, ctx.seed, n)])
}

fn c_grid_refinement(ctx: &Ctx) -> Result<Vec<McReport>> {
    let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0)?;
    let rep = rfbm::grid_refinement_check(&f, 1.0, &[32, 64, 128, 256], ctx.cfg.seeds, ctx.seed)?;
    let bad = non_monotone_steps(&rep.mean_sup_diff);
    Ok(vec![McReport::new("rfbm.grid_refinement", 0.0, bad as f64, 0.0, Rule::TrendMonotone, ctx.seed, ctx.cfg.seeds)
        .with_note(format!("sup diffs {:?}, diff·n^h_min {:?}", rep.mean_sup_diff, rep.scaled))])
}

fn memory_violations(ctx: &Ctx, f: &ResponseFunction, grid: &TimeGrid) -> Result<(usize, usize)> {
    let mut bad = 0;
    let mut n = 0;
    for sol in solve_seeds(grid, f, ctx.cfg.seeds, ctx.seed) {
        let sol = sol?;
        let mut prev = 0.0;
        for k in 1..=grid.n {
            let m = rfbm::cumulative_memory(&sol, f, grid.points[k])?;
            n += 1;
            if !m.within || m.c_t < prev || m.avg < f.h_min - 1e-12 || m.avg > f.h_max + 1e-12 {
                bad += 1;
            }
            prev = m.c_t;
        }
    }
    Ok((bad, n))
}

fn c_memory_monotone(ctx: &Ctx) -> Result<Vec<McReport>> {
    let grid = TimeGrid::new(1.0, ctx.cfg.rfbm_n)?;
    let (bad, n) = memory_violations(ctx, &example_response(0.3, 0.7, 2.0, 1.0, 1.0)?, &grid)?;
    Ok(vec![McReport::count("rfbm.memory_monotone", bad, ctx.seed, n)])
}

fn c_solution_norm(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = certified(ctx)?;
    let sol = rfbm::solve_rfbm(&s.grid, &s.f, ctx.seed, 1e-9, 64)?;
    let rep = rfbm::solution_norm_bound(&sol, &s.f, ctx.cfg.mc_paths)?;
    let excess = (rep.sup_second_moment - rep.bound).max(0.0);
    Ok(vec![McReport::new("rfbm.solution_norm", 0.0, excess, rep.se, Rule::ThreeSe, ctx.seed, rep.n_paths)
        .with_note(format!("sup E[X²] = {:.4}, bound {:.4}", rep.sup_second_moment, rep.bound))])
}

// ---------------------------------------------------------------- attention

struct ProfileStats {
    n: usize,
    worst_norm: f64,
    nonpositive: usize,
    violations: usize,
}

fn attention_profiles(ctx: &Ctx) -> Result<ProfileStats> {
    let horizon = 3.0;
    let f = ctx.cfg.response.build(horizon)?;
    let grid = TimeGrid::new(horizon, ctx.cfg.attention_n)?;
    let consts = attention::bound_constants(f.h_min, f.h_max)?;
    let ts = [0.3, 0.8, 1.0, 1.5, 3.0];
    let per_seed: Vec<Result<(f64, usize, usize, usize)>> = solve_seeds(&grid, &f, ctx.cfg.seeds, ctx.seed)
        .into_par_iter()
        .map(|sol| {
            let sol = sol?;
            let mut acc = (0.0f64, 0, 0, 0);
            for &t in &ts {
                let p = attention::attention_profile(&sol, &f, t)?;
                acc.0 = acc.0.max((p.normalization - 1.0).abs());
                acc.1 += p.rho.iter().chain(&p.node_rho).any(|&r| !(r > 0.0)) as usize;
                acc.2 += attention::check_attention_bounds(&p, &consts).violations.len();
                acc.3 += 1;
            }
            Ok(acc)
        })
        .collect();
    let mut s = ProfileStats {
        n: 0,
        worst_norm: 0.0,
        nonpositive: 0,
        violations: 0,
    };
    for r in per_seed {
        let (w, np, v, n) = r?;
        s.worst_norm = s.worst_norm.max(w);
        s.nonpositive += np;
        s.violations += v;
        s.n += n;
    }
    Ok(s)
}

fn c_att_normalization(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = attention_profiles(ctx)?;
    Ok(vec![McReport::new("attention.normalization", 0.0, s.worst_norm, 0.0, Rule::Abs(1e-8), ctx.seed, s.n)])
}

fn c_att_positivity(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = attention_profiles(ctx)?;
    Ok(vec![McReport::count("attention.positivity", s.nonpositive, ctx.seed, s.n)])
}

fn c_att_bounds(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = attention_profiles(ctx)?;
    Ok(vec![McReport::count("attention.bounds", s.violations, ctx.seed, s.n)])
}

fn sensitivity_worst(ctx: &Ctx) -> Result<f64> {
    let horizon = 3.0;
    let f = ctx.cfg.response.build(horizon)?;
    let f2 = example_response(0.3, 0.7, 2.0, 1.0, horizon)?;
    let mut r = rng::stream(ctx.seed, 0);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let f = if k % 2 == 0 { &f } else { &f2 };
        let t: f64 = r.gen_range(0.05..horizon);
        let s = t * r.gen::<f64>();
        let x: f64 = r.gen_range(-3.0..3.0);
        let ln_k = |x: f64| {
            let h = f.eval(s, x);
            0.5 * (2.0 * h).ln() + (h - 0.5) * (t - s).ln()
        };
        let step = 1e-6;
        let fd = (ln_k(x + step) - ln_k(x - step)) / (2.0 * step);
        worst = worst.max((attention::sensitivity_at(f, t, s, x) - fd).abs());
    }
    Ok(worst)
}

fn c_att_sensitivity(ctx: &Ctx) -> Result<Vec<McReport>> {
    Ok(vec![McReport::new(
        "attention.sensitivity",
        0.0,
        sensitivity_worst(ctx)?,
        0.0,
        Rule::Abs(1e-5),
        ctx.seed,
        1000,
    )])
}

struct VolatilityStats {
    over_quarter: usize,
    disagree: usize,
    v_real_line: f64,
    max_v: f64,
}

fn volatility_stats(ctx: &Ctx) -> Result<VolatilityStats> {
    let f = ctx.cfg.response.build(1.0)?;
    let grid = TimeGrid::new(1.0, 64)?;
    let mut r = rng::stream(ctx.seed, 0);
    let intervals: Vec<Interval> = (0..50)
        .map(|_| {
            let lo: f64 = r.gen_range(-1.0..1.0);
            Interval::new(Some(lo), Some(lo + r.gen_range(0.01..2.0)))
        })
        .collect();
    let mut s = VolatilityStats {
        over_quarter: 0,
        disagree: 0,
        v_real_line: 0.0,
        max_v: 0.0,
    };
    for (k, iv) in intervals.iter().enumerate() {
        let v = attention::volatility_mc(&grid, &f, *iv, 1.0, ctx.cfg.mc_paths, ctx.seed ^ k as u64)?;
        s.over_quarter += !v.within_quarter as usize;
        s.disagree += !v.agree as usize;
        s.max_v = s.max_v.max(v.v);
    }
    let line = attention::volatility_mc(&grid, &f, Interval::real_line(), 1.0, ctx.cfg.mc_paths, ctx.seed)?;
    s.v_real_line = line.v;
    s.disagree += !line.agree as usize;
    Ok(s)
}

fn c_att_volatility(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = volatility_stats(ctx)?;
    let bad = s.over_quarter + (s.v_real_line != 0.0) as usize;
    Ok(vec![McReport::count("attention.volatility", bad, ctx.seed, 51)
        .with_note(format!("largest V_I {:.4}", s.max_v))])
}

fn conservation_failures(ctx: &Ctx) -> Result<(usize, usize)> {
    let f = ctx.cfg.response.build(1.0)?;
    let grid = TimeGrid::new(1.0, ctx.cfg.rfbm_n)?;
    let mut r = rng::stream(ctx.seed, 1);
    let mut bad = 0;
    let mut n = 0;
    for sol in solve_seeds(&grid, &f, ctx.cfg.seeds, ctx.seed) {
        let sol = sol?;
        let mut cuts: Vec<f64> = (0..3).map(|_| r.gen_range(-1.0..1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        let cells = [
            Interval::new(None, Some(cuts[0])),
            Interval::new(Some(cuts[0]), Some(cuts[1])),
            Interval::new(Some(cuts[1]), Some(cuts[2])),
            Interval::new(Some(cuts[2]), None),
        ];
        for t in [0.25, 0.5, 1.0] {
            let res: Vec<attention::Residence> = cells
                .iter()
                .map(|c| attention::residence_measure(&sol, *c, t))
                .collect::<Result<_>>()?;
            n += 1;
            let total: usize = res.iter().map(|x| x.count).sum();
            let mu: f64 = res.iter().map(|x| x.mu).sum();
            if total != res[0].panels || (mu - 1.0).abs() > 1e-15 {
                bad += 1;
            }
        }
    }
    Ok((bad, n))
}

fn c_att_conservation(ctx: &Ctx) -> Result<Vec<McReport>> {
    let (bad, n) = conservation_failures(ctx)?;
    Ok(vec![McReport::count("attention.conservation", bad, ctx.seed, n)])
}

// ---------------------------------------------------------------- acceptance

fn c_acc01(ctx: &Ctx) -> Result<Vec<McReport>> {
    let n = ctx.cfg.variance_n;
    let grid = TimeGrid::new(1.0, n)?;
    let h = sin_hurst(ctx, 1.0)?;
    let ts = [0.25, 0.5, 1.0];
    let targets: Vec<usize> = ts.iter().map(|&t| grid.index_of(t)).collect();
    let sampler = tvfbm::TargetSampler::new(&grid, &h, &targets)?;
    let paths = ctx.cfg.variance_paths;
    let draws: Vec<Vec<f64>> = (0..paths as u64).into_par_iter().map(|p| sampler.sample(ctx.seed, p)).collect();
    Ok(ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let col: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            let (v, se) = stats::variance_with_se(&col);
            McReport::new(
                &format!("acc01.variance_t{t}"),
                tvfbm::variance_theoretical(t, &h),
                v,
                se,
                Rule::ThreeSeOrRel(0.01),
                ctx.seed,
                paths,
            )
        })
        .collect())
}

fn c_acc02(ctx: &Ctx) -> Result<Vec<McReport>> {
    let n = ctx.cfg.variance_n;
    let grid = TimeGrid::new(1.0, n)?;
    let bm = HurstFunction::constant(0.5, 1.0)?;
    let mut mismatches = 0;
    for p in 0..4u64 {
        let path = tvfbm::simulate_tvfbm_stream(&grid, &bm, ctx.seed, p)?;
        let inc = rng::normals(ctx.seed, p, n, grid.dt());
        let mut acc = 0.0;
        for k in 1..=n {
            acc += inc[k - 1];
            mismatches += (path.values[k] != acc) as usize;
        }
    }
    let h75 = HurstFunction::constant(0.75, 1.0)?;
    let sampler = tvfbm::TargetSampler::new(&grid, &h75, &[n])?;
    let paths = ctx.cfg.variance_paths;
    let draws: Vec<f64> = (0..paths as u64).into_par_iter().map(|p| sampler.sample(ctx.seed, p)[0]).collect();
    let (v, se) = stats::variance_with_se(&draws);
    Ok(vec![
        McReport::count("acc02.brownian_bit_exact", mismatches, ctx.seed, 4 * n),
        McReport::new("acc02.h075_variance", 1.0, v, se, Rule::ThreeSe, ctx.seed, paths),
    ])
}

fn c_acc03(ctx: &Ctx) -> Result<Vec<McReport>> {
    let h = sin_hurst(ctx, 2.0)?;
    let bm = HurstFunction::constant(0.5, 2.0)?;
    let mut r = rng::stream(ctx.seed, 0);
    let mut diag: f64 = 0.0;
    let mut brown: f64 = 0.0;
    for _ in 0..20 {
        let t = r.gen_range(0.01..2.0);
        let c = tvfbm::covariance_quadrature(t, t, &h, 1e-12)?.value;
        diag = diag.max((c - tvfbm::variance_theoretical(t, &h)).abs());
        let (u, v) = (r.gen_range(0.0..2.0), r.gen_range(0.0..2.0));
        let c = tvfbm::covariance_quadrature(u, v, &bm, 1e-12)?.value;
        brown = brown.max((c - u.min(v)).abs());
    }
    Ok(vec![
        McReport::new("acc03.diagonal_variance", 0.0, diag, 0.0, Rule::Abs(1e-8), ctx.seed, 20),
        McReport::new("acc03.brownian_min", 0.0, brown, 0.0, Rule::Abs(1e-10), ctx.seed, 20),
    ])
}

fn c_acc04(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut r = rng::stream(ctx.seed, 0);
    let mut worst_i: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    let mut outside = 0;
    for k in 0..100 {
        let u = r.gen_range(0.05..1.0);
        let v = u * r.gen_range(2.0..4.0);
        let h = HurstFunction::sinusoidal(r.gen_range(0.65..0.8), r.gen_range(0.0..0.1), r.gen_range(0.2..2.0), v)?;
        let (hu, hv) = (h.eval(u), h.eval(v));
        let i_closed = tvfbm::cov_hyper_i(u, v, &h)?;
        let i_brute = brute_j(hu - 1.5, hv - 1.5, u, v)?;
        worst_i = worst_i.max((i_closed - i_brute).abs() / i_brute.abs().max(1.0));
        let j_closed = tvfbm::eval_j(hu - 0.5, hv - 0.5, u, v)?;
        let j_brute = brute_j(hu - 0.5, hv - 0.5, u, v)?;
        worst_j = worst_j.max((j_closed - j_brute).abs() / j_brute.abs().max(1.0));
        if k < 50 {
            let hh = h.clone();
            let dh = move |x: f64| hh.deriv(x).unwrap_or(0.0);
            if !tvfbm::mixed_derivative_terms(u, v, &h, &dh, h.c_h)?.within {
                outside += 1;
            }
        }
    }
    Ok(vec![
        McReport::new("acc04.cov_hyper_i", 0.0, worst_i, 0.0, Rule::Abs(1e-7), ctx.seed, 100),
        McReport::new("acc04.eval_j", 0.0, worst_j, 0.0, Rule::Abs(1e-7), ctx.seed, 100),
        McReport::count("acc04.mixed_majorant", outside, ctx.seed, 50),
    ])
}

fn c_acc05(ctx: &Ctx) -> Result<Vec<McReport>> {
    let n = 500;
    let mut bad = 0;
    for k in 0..n {
        let z = 1.05 + (12.0 - 1.05) * k as f64 / (n - 1) as f64;
        let t = specfun::mills_bounds(z)?;
        if !(t.lower < t.exact && t.exact < t.upper) {
            bad += 1;
        }
    }
    Ok(vec![McReport::count("acc05.tail_sandwich", bad, ctx.seed, n)])
}

fn c_acc06(ctx: &Ctx) -> Result<Vec<McReport>> {
    let mut out = Vec::new();
    let mut bad_trend = 0;
    for h0 in [0.55, 0.6, 0.75] {
        for x in [0.5, 1.0, 2.0] {
            let errs = ldp_errors(h0, x)?;
            bad_trend += non_monotone_steps(&errs);
            let limit = -0.5 * x * x;
            let h = HurstFunction::constant(h0, 1.0)?;
            let ratio = tvfbm::ldp_ratio(0.5, x, 1e-5, &h)?;
            out.push(McReport::new(
                &format!("acc06.ldp_h{h0}_x{x}"),
                limit,
                ratio,
                0.0,
                Rule::RelAtSmallest(0.15),
                ctx.seed,
                5,
            ));
        }
    }
    out.push(McReport::new("acc06.ldp_trend", 0.0, bad_trend as f64, 0.0, Rule::TrendMonotone, ctx.seed, 9));
    Ok(out)
}

fn c_acc07(ctx: &Ctx) -> Result<Vec<McReport>> {
    let hs = [
        ("sinusoidal", sin_hurst(ctx, 1.0)?),
        ("linear", HurstFunction::linear(0.4, 0.2, 1.0)?),
    ];
    let t0 = 0.5;
    let mut out = Vec::new();
    for (name, h) in &hs {
        let thr = tvfbm::lnd_threshold(t0, h);
        let ladder: Vec<f64> = tvfbm::eps_ladder(5).into_iter().filter(|&e| e <= thr).collect();
        if ladder.is_empty() {
            out.push(McReport::count(&format!("acc07.lnd_{name}"), 1, ctx.seed, 0)
                .with_note(format!("validity threshold {thr:e} below the ladder")));
            continue;
        }
        let mut bad = 0;
        let mut last_ratio = f64::NAN;
        for &eps in &ladder {
            let r = tvfbm::lnd_lower_bound(t0, eps, h)?;
            bad += !r.holds as usize;
            last_ratio = r.cond_var / (2.0 * r.bound);
        }
        out.push(McReport::count(&format!("acc07.lnd_{name}"), bad, ctx.seed, ladder.len()));
        if h.gamma == 1.0 {
            out.push(McReport::new(
                &format!("acc07.lnd_ratio_{name}"),
                1.0,
                last_ratio,
                0.0,
                Rule::Rel(0.05),
                ctx.seed,
                ladder.len(),
            ));
        }
    }
    Ok(out)
}

fn c_acc08(ctx: &Ctx) -> Result<Vec<McReport>> {
    let step = 1e-3;
    let mut worst_exp: f64 = 0.0;
    for h0 in [0.3, 0.5, 0.8] {
        let h = HurstFunction::constant(h0, 1.0)?;
        let phi0 = 1.3;
        for p in tvfbm::lamperti_solve(&h, phi0, 1.0, step)? {
            let want = phi0 * (p.t / h0).exp();
            worst_exp = worst_exp.max(((p.phi - want) / want).abs());
        }
    }
    let h = HurstFunction::sinusoidal(0.5, 0.2, 0.1, 10.0)?;
    let traj = tvfbm::lamperti_solve(&h, 1.5, 1.0, step)?;
    let mut fd_worst: f64 = 0.0;
    let mut norm_worst: f64 = 0.0;
    for w in traj.windows(3) {
        let d = (w[2].alpha - w[0].alpha) / (2.0 * step);
        fd_worst = fd_worst.max((d + w[1].alpha).abs() / w[1].alpha.abs().max(1.0));
    }
    for p in &traj {
        norm_worst = norm_worst.max((tvfbm::variance_normalization(&h, p.phi) - 1.0).abs());
    }
    Ok(vec![
        McReport::new("acc08.constant_exponential", 0.0, worst_exp, 0.0, Rule::Abs(1e-8), ctx.seed, 3),
        McReport::new("acc08.alpha_decay_fd", 0.0, fd_worst, 0.0, Rule::Abs(step * step), ctx.seed, traj.len())
            .with_note("tolerance step² against the O(step²) central difference"),
        McReport::new("acc08.normalization", 0.0, norm_worst, 0.0, Rule::Abs(1e-12), ctx.seed, traj.len()),
    ])
}

fn c_acc09(ctx: &Ctx) -> Result<Vec<McReport>> {
    let s = certified(ctx)?;
    let mut failed = 0;
    for sol in solve_seeds(&s.grid, &s.f, ctx.cfg.seeds, ctx.seed) {
        match sol {
            Ok(sol) if sol.converged && sol.iterations <= 64 => {}
            _ => failed += 1,
        }
    }
    let flat = ResponseFunction::constant(0.7, 1.0)?;
    let grid = TimeGrid::new(1.0, ctx.cfg.rfbm_n)?;
    let mut not_two = 0;
    for sol in solve_seeds(&grid, &flat, ctx.cfg.seeds, ctx.seed) {
        let sol = sol?;
        not_two += (sol.iterations != 2 || sol.residual_history[1] != 0.0) as usize;
    }
    Ok(vec![
        McReport::count("acc09.picard_converges", failed, ctx.seed, ctx.cfg.seeds)
            .with_note(format!("T0 = {:.4}, kappa = {:.4}, C1 = {:.4}", s.cert.t0, s.cert.kappa, s.cert.c1)),
        s2_report(ctx, "acc09.s2_contraction")?,
        McReport::count("acc09.constant_two_sweeps", not_two, ctx.seed, ctx.cfg.seeds),
    ])
}

fn c_acc10(ctx: &Ctx) -> Result<Vec<McReport>> {
    // fine grid so that ε = 1e-4 spans several panels
    let horizon = 0.05;
    let grid = TimeGrid::new(horizon, 2500)?;
    let ts = [0.01, 0.02, 0.03];
    let epss = [1e-4, 1e-3, 1e-2];
    let cases: Vec<(&str, ResponseFunction, f64)> = vec![
        ("constant0.3", ResponseFunction::constant(0.3, horizon)?, 0.02),
        ("constant0.5", ResponseFunction::constant(0.5, horizon)?, 0.02),
        ("constant0.7", ResponseFunction::constant(0.7, horizon)?, 0.02),
        ("example", example_response(0.3, 0.7, 2.0, 1.0, horizon)?, 0.1),
        ("config", ctx.cfg.response.build(horizon)?, 0.1),
    ];
    let mut out = Vec::new();
    let mut outside_range = 0;
    let mut sandwich_bad = 0;
    let mut tested = 0;
    let seeds = ctx.cfg.seeds.min(5);
    for (name, f, tol) in &cases {
        let mut worst_slope: f64 = 0.0;
        for sol in solve_seeds(&grid, f, seeds, ctx.seed) {
            let sol = sol?;
            outside_range += sol.alpha.iter().filter(|&&a| a < f.h_min - 1e-12 || a > f.h_max + 1e-12).count();
            for &t in &ts {
                for &eps in &epss {
                    let kn = rfbm::kernel_norm_scaling(&sol, f, t, eps)?;
                    tested += 1;
                    sandwich_bad += !kn.holds as usize;
                    if eps == 1e-4 {
                        let slope = kn.norm_sq.ln() / (2.0 * eps.ln());
                        let alpha_t = sol.alpha[grid.index_of(t)];
                        worst_slope = worst_slope.max((slope - alpha_t).abs());
                    }
                }
            }
        }
        out.push(McReport::new(&format!("acc10.slope_{name}"), 0.0, worst_slope, 0.0, Rule::Abs(*tol), ctx.seed, seeds));
    }
    out.push(McReport::count("acc10.alpha_in_range", outside_range, ctx.seed, cases.len() * seeds));
    out.push(McReport::count("acc10.kernel_norm_sandwich", sandwich_bad, ctx.seed, tested));
    Ok(out)
}

fn c_acc11(ctx: &Ctx) -> Result<Vec<McReport>> {
    let grid = TimeGrid::new(1.0, ctx.cfg.rfbm_n)?;
    let mut bad = 0;
    let mut n = 0;
    for f in [ctx.cfg.response.build(1.0)?, example_response(0.3, 0.7, 2.0, 1.0, 1.0)?] {
        let (b, m) = memory_violations(ctx, &f, &grid)?;
        bad += b;
        n += m;
    }
    let mut out = vec![McReport::count("acc11.pathwise_bounds", bad, ctx.seed, n)];
    let ladder: Vec<f64> = (0..=8).map(|k| 10f64.powf(2.0 + 0.5 * k as f64)).collect();
    for beta in [0.5, 1.0, 2.0] {
        let rep = rfbm::convergence_rate_check(0.5, 0.1, beta, 1.0, &ladder)?;
        out.push(McReport::new(
            &format!("acc11.rate_beta{beta}"),
            rep.expected_exponent,
            rep.fitted_exponent,
            0.0,
            Rule::Abs(0.05),
            ctx.seed,
            ladder.len(),
        ));
    }
    Ok(out)
}

fn c_acc12(ctx: &Ctx) -> Result<Vec<McReport>> {
    let p = attention_profiles(ctx)?;
    let vol = volatility_stats(ctx)?;
    let (cons_bad, cons_n) = conservation_failures(ctx)?;
    Ok(vec![
        McReport::new("acc12.normalization", 0.0, p.worst_norm, 0.0, Rule::Abs(1e-8), ctx.seed, p.n),
        McReport::count("acc12.bound_violations", p.violations + p.nonpositive, ctx.seed, p.n),
        McReport::count("acc12.partition_conservation", cons_bad, ctx.seed, cons_n),
        McReport::count("acc12.volatility_quarter", vol.over_quarter + (vol.v_real_line != 0.0) as usize, ctx.seed, 51),
        McReport::count("acc12.volatility_cov_integral", vol.disagree, ctx.seed, 51),
        rename(
            McReport::new("", 0.0, sensitivity_worst(ctx)?, 0.0, Rule::Abs(1e-5), ctx.seed, 1000),
            "acc12.sensitivity",
        ),
    ])
}
