//! Attention weights ρ(t,s;X) = K(t,s;X_s)/D(t,X) induced by an RfBm path,
//! their bounds and sensitivities, and residence-time functionals.

use crate::error::{domain, LabError, Result};
use crate::hurst::ResponseFunction;
use crate::rfbm::{solve_rfbm_stream, RfbmSolution, SolveOptions};
use crate::stats;
use crate::tvfbm::TimeGrid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionProfile {
    pub t: f64,
    /// panel midpoints in [0, t)
    pub s_grid: Vec<f64>,
    pub rho: Vec<f64>,
    /// exact frozen-exponent kernel mass of each panel
    pub panel_mass: Vec<f64>,
    pub partition: f64,
    /// Σ panel_mass / D
    pub normalization: f64,
    pub output: f64,
    pub regime: Regime,
    /// ρ at the grid nodes s_0, …, s_{j−1} with the node states
    pub node_s: Vec<f64>,
    pub node_rho: Vec<f64>,
}

fn kernel(t: f64, s: f64, h: f64) -> f64 {
    (2.0 * h).sqrt() * (t - s).powf(h - 0.5)
}

/// ∫_a^b √(2h)(t−u)^{h−1/2} du.
fn panel_mass(t: f64, a: f64, b: f64, h: f64) -> f64 {
    let p = h + 0.5;
    (2.0 * h).sqrt() * ((t - a).powf(p) - (t - b).powf(p)) / p
}

fn grid_index(grid: &TimeGrid, t: f64) -> Result<usize> {
    let j = grid.index_of(t);
    if (grid.points[j] - t).abs() > 1e-9 * grid.dt() || j == 0 {
        return domain(format!("attention time {t} must be a positive grid point"));
    }
    Ok(j)
}

pub fn attention_profile(sol: &RfbmSolution, f: &ResponseFunction, t: f64) -> Result<AttentionProfile> {
    let g = &sol.grid;
    let j = grid_index(g, t)?;
    let t = g.points[j];
    let x = &sol.path;
    let mut s_grid = Vec::with_capacity(j);
    let mut k = Vec::with_capacity(j);
    let mut mass = Vec::with_capacity(j);
    let mut x_mid = Vec::with_capacity(j);
    for i in 0..j {
        let (a, b) = (g.points[i], g.points[i + 1]);
        let s = 0.5 * (a + b);
        let xm = 0.5 * (x[i] + x[i + 1]);
        let h = f.eval(s, xm);
        s_grid.push(s);
        k.push(kernel(t, s, h));
        mass.push(panel_mass(t, a, b, h));
        x_mid.push(xm);
    }
    let d = stats::pairwise_sum(&mass);
    let rho: Vec<f64> = k.iter().map(|v| v / d).collect();
    let weighted: Vec<f64> = x_mid.iter().zip(&mass).map(|(xv, m)| xv * m / d).collect();
    let normalization = stats::pairwise_sum(&mass.iter().map(|m| m / d).collect::<Vec<_>>());
    let node_s = g.points[..j].to_vec();
    let node_rho = (0..j)
        .map(|i| kernel(t, g.points[i], f.eval(g.points[i], x[i])) / d)
        .collect();
    let h_t = f.eval(t, x[j]);
    let regime = if (h_t - 0.5).abs() <= 1e-12 {
        Regime::Critical
    } else if h_t < 0.5 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };
    Ok(AttentionProfile {
        t,
        s_grid,
        rho,
        panel_mass: mass,
        partition: d,
        normalization,
        output: stats::pairwise_sum(&weighted),
        regime,
        node_s,
        node_rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub h_min: f64,
    pub h_max: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
}

pub fn bound_constants(h_min: f64, h_max: f64) -> Result<BoundConstants> {
    if !(h_min > 0.0 && h_min <= h_max && h_max < 1.0) {
        return domain(format!("bound constants need 0 < h_min <= h_max < 1, got ({h_min}, {h_max})"));
    }
    let a1 = h_min.sqrt() * (h_min + 0.5) / h_max.sqrt();
    let b1 = h_max.sqrt() * (h_max + 0.5) / h_min.sqrt();
    Ok(BoundConstants {
        h_min,
        h_max,
        a1,
        a2: a1,
        a3: a1,
        a4: a1,
        a5: 0.5 * a1,
        b1,
        b2: b1,
        b3: b1,
        b4: b1,
        b5: 2.0 * b1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub s: f64,
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
    pub case: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Case label and (lower, upper) for ρ(t, s).
pub fn attention_bounds_at(t: f64, s: f64, c: &BoundConstants) -> (&'static str, f64, f64) {
    let (lo, hi) = (c.h_min, c.h_max);
    let u = t - s;
    let unit = (u - 1.0).abs() <= 1e-12;
    if t <= 1.0 {
        if unit {
            ("I(b)", c.a2, c.b2)
        } else {
            ("I(a)", c.a1 * u.powf(hi - 0.5), c.b1 * u.powf(lo - hi - 1.0))
        }
    } else if unit {
        ("II(c)", c.a5 / t.powf(hi + 0.5), c.b5 / t.powf(lo + 0.5))
    } else if u < 1.0 {
        ("II(a)", c.a3 * u.powf(hi - 0.5) / t.powf(hi + 0.5), c.b3 / u)
    } else {
        ("II(b)", c.a4 * u.powf(lo - 0.5) / t.powf(hi + 0.5), c.b4 * u.powf(hi - lo - 1.0))
    }
}

/// Checks every midpoint and grid-node weight against its case bounds.
pub fn check_attention_bounds(profile: &AttentionProfile, consts: &BoundConstants) -> BoundReport {
    let rel = 1e-9;
    let mut violations = Vec::new();
    let pairs = profile
        .s_grid
        .iter()
        .zip(&profile.rho)
        .chain(profile.node_s.iter().zip(&profile.node_rho));
    let mut checked = 0;
    for (&s, &rho) in pairs {
        checked += 1;
        let (case, lower, upper) = attention_bounds_at(profile.t, s, consts);
        if !(rho > 0.0) || rho < lower * (1.0 - rel) || rho > upper * (1.0 + rel) {
            violations.push(BoundViolation {
                s,
                rho,
                lower,
                upper,
                case: case.into(),
            });
        }
    }
    BoundReport { checked, violations }
}

/// Path value at time s by linear interpolation.
fn state_at(sol: &RfbmSolution, s: f64) -> f64 {
    let g = &sol.grid;
    let pos = (s / g.dt()).clamp(0.0, g.n as f64);
    let i = (pos.floor() as usize).min(g.n - 1);
    let w = pos - i as f64;
    sol.path[i] + w * (sol.path[i + 1] - sol.path[i])
}

/// S = ∂H/∂x(s, X_s)·[1/(2H(s, X_s)) + ln(t − s)].
pub fn sensitivity(sol: &RfbmSolution, f: &ResponseFunction, t: f64, s: f64) -> Result<f64> {
    if !(s < t) || s < 0.0 {
        return domain(format!("sensitivity needs 0 <= s < t, got s={s}, t={t}"));
    }
    Ok(sensitivity_at(f, t, s, state_at(sol, s)))
}

/// Sensitivity of ln K(t, s; x) at an explicit state x.
pub fn sensitivity_at(f: &ResponseFunction, t: f64, s: f64, x: f64) -> f64 {
    let h = f.eval(s, x);
    f.dh_dx(s, x) * (0.5 / h + (t - s).ln())
}

/// E(s₁, s₂) = S(s₁) − S(s₂).
pub fn relative_sensitivity(
    sol: &RfbmSolution,
    f: &ResponseFunction,
    t: f64,
    s1: f64,
    s2: f64,
) -> Result<f64> {
    if !(0.0 <= s1 && s1 < s2 && s2 < t) {
        return Err(LabError::Ordering(format!(
            "relative_sensitivity needs 0 <= s1 < s2 < t, got ({s1}, {s2}, {t})"
        )));
    }
    Ok(sensitivity(sol, f, t, s1)? - sensitivity(sol, f, t, s2)?)
}

/// Half-open state interval [lo, hi); `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Interval {
    pub fn new(lo: Option<f64>, hi: Option<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn real_line() -> Self {
        Self::default()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo.map_or(true, |l| x >= l) && self.hi.map_or(true, |h| x < h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residence {
    pub r: f64,
    pub mu: f64,
    pub count: usize,
    pub panels: usize,
}

/// Left-endpoint panel sum of 1{X_s ∈ I} over [0, t].
pub fn residence_measure(sol: &RfbmSolution, interval: Interval, t: f64) -> Result<Residence> {
    let g = &sol.grid;
    let j = grid_index(g, t)?;
    let count = sol.path[..j].iter().filter(|&&x| interval.contains(x)).count();
    Ok(Residence {
        r: count as f64 * g.dt(),
        mu: count as f64 / j as f64,
        count,
        panels: j,
    })
}

fn indicator_paths(
    grid: &TimeGrid,
    f: &ResponseFunction,
    interval: Interval,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<(usize, Vec<Vec<f64>>)> {
    if n_paths < 500 {
        return domain("residence Monte Carlo needs at least 500 paths");
    }
    let j = grid_index(grid, t)?;
    let opts = SolveOptions::default();
    let ind = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let sol = solve_rfbm_stream(grid, f, seed, p, &opts)?;
            Ok(sol.path[..j]
                .iter()
                .map(|&x| if interval.contains(x) { 1.0 } else { 0.0 })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((j, ind))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityReport {
    pub v: f64,
    pub se: f64,
    pub cov_integral: f64,
    pub within_quarter: bool,
    pub agree: bool,
}

/// V_I(t) = Var μ_I(t) across paths, and the double integral of empirical
/// indicator covariances.
pub fn volatility_mc(
    grid: &TimeGrid,
    f: &ResponseFunction,
    interval: Interval,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<VolatilityReport> {
    let (j, ind) = indicator_paths(grid, f, interval, t, n_paths, seed)?;
    let mus: Vec<f64> = ind.iter().map(|row| stats::pairwise_sum(row) / j as f64).collect();
    let (v, se) = stats::variance_with_se(&mus);
    let nf = n_paths as f64;
    let means: Vec<f64> = (0..j)
        .map(|u| stats::pairwise_sum(&ind.iter().map(|r| r[u]).collect::<Vec<_>>()) / nf)
        .collect();
    let rows: Vec<f64> = (0..j)
        .into_par_iter()
        .map(|u| {
            let cols: Vec<f64> = (0..j)
                .map(|w| {
                    let prods: Vec<f64> = ind
                        .iter()
                        .map(|r| (r[u] - means[u]) * (r[w] - means[w]))
                        .collect();
                    stats::pairwise_sum(&prods) / (nf - 1.0)
                })
                .collect();
            stats::pairwise_sum(&cols)
        })
        .collect();
    let cov_integral = stats::pairwise_sum(&rows) / (j as f64 * j as f64);
    Ok(VolatilityReport {
        v,
        se,
        cov_integral,
        within_quarter: v <= 0.25 + 3.0 * se,
        agree: (v - cov_integral).abs() <= 3.0 * se * std::f64::consts::SQRT_2 + 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidenceReport {
    /// MC mean of R_I(t)
    pub lhs: f64,
    pub lhs_se: f64,
    /// Σ P̂(X_s ∈ I)·Δ
    pub rhs: f64,
    pub mean_mu: f64,
    pub mu_se: f64,
    pub agree: bool,
}

pub fn expected_residence_check(
    grid: &TimeGrid,
    f: &ResponseFunction,
    interval: Interval,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<ResidenceReport> {
    let (j, ind) = indicator_paths(grid, f, interval, t, n_paths, seed)?;
    let dt = grid.dt();
    let rs: Vec<f64> = ind.iter().map(|row| stats::pairwise_sum(row) * dt).collect();
    let nf = n_paths as f64;
    let probs: Vec<f64> = (0..j)
        .map(|u| stats::pairwise_sum(&ind.iter().map(|r| r[u]).collect::<Vec<_>>()) / nf * dt)
        .collect();
    let lhs = stats::mean(&rs);
    let lhs_se = stats::se_mean(&rs);
    let rhs = stats::pairwise_sum(&probs);
    let tj = grid.points[j];
    Ok(ResidenceReport {
        lhs,
        lhs_se,
        rhs,
        mean_mu: lhs / tj,
        mu_se: lhs_se / tj,
        agree: (lhs - rhs).abs() <= 3.0 * lhs_se * std::f64::consts::SQRT_2 + 1e-12,
    })
}
