//! Responsive fBm: X_t = ∫₀ᵗ √(2H(s,X_s))(t−s)^{H(s,X_s)−1/2} dB_s, solved
//! pathwise by Picard iteration.

use crate::error::{domain, LabError, Result};
use crate::hurst::{empirical_holder_exponent, empirical_holder_quotient, ResponseFunction};
use crate::rng;
use crate::stats;
use crate::tvfbm::{panel_weight, TimeGrid};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Where the kernel exponent is read off the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelConvention {
    /// H(s, X_s) at the integration variable (left panel endpoint).
    #[default]
    StateAtSource,
    /// H(t, X_t) at the evaluation time, as in TV-fBm.
    EvaluationTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub convention: KernelConvention,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 64,
            convention: KernelConvention::StateAtSource,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfbmSolution {
    pub grid: TimeGrid,
    pub path: Vec<f64>,
    pub alpha: Vec<f64>,
    pub increments: Vec<f64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub seed: u64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    /// +∞ for a state-independent kernel (serialized as null)
    pub t1: f64,
    pub t0: f64,
    pub kappa: f64,
    pub c1: f64,
}

/// One Picard sweep: the map X ↦ Φ(X) on the grid.
fn sweep(
    grid: &TimeGrid,
    f: &ResponseFunction,
    increments: &[f64],
    prev: &[f64],
    convention: KernelConvention,
) -> Vec<f64> {
    let n = grid.n;
    let pts = &grid.points;
    let mut next = vec![0.0; n + 1];
    match convention {
        KernelConvention::StateAtSource => {
            for i in 0..n {
                let h = f.eval(pts[i], prev[i]);
                let (a, b, db) = (pts[i], pts[i + 1], increments[i]);
                for (j, x) in next.iter_mut().enumerate().skip(i + 1) {
                    *x += panel_weight(pts[j], a, b, h) * db;
                }
            }
        }
        KernelConvention::EvaluationTime => {
            for (j, x) in next.iter_mut().enumerate().skip(1) {
                let h = f.eval(pts[j], prev[j]);
                let mut acc = 0.0;
                for i in 0..j {
                    acc += panel_weight(pts[j], pts[i], pts[i + 1], h) * increments[i];
                }
                *x = acc;
            }
        }
    }
    next
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Picard iterates X⁰ = 0, X¹, …, X^sweeps for given increments.
pub fn picard_iterates(
    grid: &TimeGrid,
    f: &ResponseFunction,
    increments: &[f64],
    sweeps: usize,
    convention: KernelConvention,
) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; grid.n + 1]];
    for _ in 0..sweeps {
        let next = sweep(grid, f, increments, out.last().unwrap(), convention);
        out.push(next);
    }
    out
}

/// Solves with caller-supplied Brownian increments (variance Δ each).
pub fn solve_rfbm_with_increments(
    grid: &TimeGrid,
    f: &ResponseFunction,
    increments: Vec<f64>,
    seed: u64,
    opts: &SolveOptions,
) -> Result<RfbmSolution> {
    if increments.len() != grid.n {
        return domain("increment count must equal the number of panels");
    }
    if opts.max_iter == 0 || !(opts.tol > 0.0) {
        return domain("solver needs max_iter >= 1 and tol > 0");
    }
    let mut x = vec![0.0; grid.n + 1];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let next = sweep(grid, f, &increments, &x, opts.convention);
        let r = sup_diff(&next, &x);
        residuals.push(r);
        x = next;
        if r < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::NonConvergence {
            what: "Picard iteration".into(),
            iterations: residuals.len(),
            residuals,
        });
    }
    let alpha = grid
        .points
        .iter()
        .zip(&x)
        .map(|(&t, &v)| f.eval(t, v))
        .collect();
    Ok(RfbmSolution {
        grid: grid.clone(),
        path: x,
        alpha,
        increments,
        iterations: residuals.len(),
        residual_history: residuals,
        converged,
        seed,
        warning: None,
    })
}

/// Solve on stream (seed, path).
pub fn solve_rfbm_stream(
    grid: &TimeGrid,
    f: &ResponseFunction,
    seed: u64,
    path: u64,
    opts: &SolveOptions,
) -> Result<RfbmSolution> {
    let increments = rng::normals(seed, path, grid.n, grid.dt());
    solve_rfbm_with_increments(grid, f, increments, seed, opts)
}

pub fn solve_rfbm(
    grid: &TimeGrid,
    f: &ResponseFunction,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<RfbmSolution> {
    let opts = SolveOptions {
        tol,
        max_iter,
        ..SolveOptions::default()
    };
    solve_rfbm_stream(grid, f, seed, 0, &opts)
}

/// Attaches a warning when the grid runs past the certified interval.
pub fn check_against_certificate(sol: &mut RfbmSolution, cert: &ContractionCertificate) {
    if sol.grid.horizon > cert.t0 * (1.0 + 1e-12) {
        sol.warning = Some(format!(
            "horizon {} exceeds certified T0 = {}",
            sol.grid.horizon, cert.t0
        ));
    }
}

pub fn contraction_certificate(
    f: &ResponseFunction,
    horizon: f64,
    c1: f64,
) -> Result<ContractionCertificate> {
    if !(horizon > 0.0 && horizon <= 1.0) {
        return domain(format!("certificate needs 0 < horizon <= 1, got {horizon}"));
    }
    if !(c1 > 0.0) {
        return domain("certificate needs c1 > 0");
    }
    let t1 = if f.l_h == 0.0 {
        f64::INFINITY
    } else {
        (f.h_min / (c1 * f.l_h * f.l_h)).powf(1.0 / f.h_min)
    };
    Ok(ContractionCertificate {
        t1,
        t0: horizon.min(t1 / 2.0),
        kappa: 0.5f64.powf(f.h_min / 2.0),
        c1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub n_pairs: usize,
    /// max over pairs and t of LHS / ∫(t−s)^{h_min−1}|X−Y|²
    pub max_ratio: f64,
    /// max_ratio / L_H², 0 for state-independent kernels
    pub c_k: f64,
    pub lhs_max: f64,
    pub degenerate_pairs: usize,
}

/// Panel-sum estimate of both sides of the kernel Lipschitz inequality
/// for deterministic states x, y sampled at panel midpoints.
pub fn kernel_lipschitz_pair(grid: &TimeGrid, f: &ResponseFunction, x: &[f64], y: &[f64]) -> (f64, f64) {
    let mids = grid.midpoints();
    let dt = grid.dt();
    let mut best: f64 = 0.0;
    let mut lhs_max: f64 = 0.0;
    for j in 1..=grid.n {
        let t = grid.points[j];
        let mut lhs = Vec::with_capacity(j);
        let mut rhs = Vec::with_capacity(j);
        for i in 0..j {
            let s = mids[i];
            let (hx, hy) = (f.eval(s, x[i]), f.eval(s, y[i]));
            let kx = (2.0 * hx).sqrt() * (t - s).powf(hx - 0.5);
            let ky = (2.0 * hy).sqrt() * (t - s).powf(hy - 0.5);
            lhs.push((kx - ky).powi(2) * dt);
            rhs.push((t - s).powf(f.h_min - 1.0) * (x[i] - y[i]).powi(2) * dt);
        }
        let (l, r) = (stats::pairwise_sum(&lhs), stats::pairwise_sum(&rhs));
        lhs_max = lhs_max.max(l);
        if r > 0.0 {
            best = best.max(l / r);
        }
    }
    (best, lhs_max)
}

pub fn kernel_lipschitz_check(
    grid: &TimeGrid,
    f: &ResponseFunction,
    n_pairs: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    if n_pairs < 10 {
        return domain("kernel_lipschitz_check needs at least 10 pairs");
    }
    let mids = grid.midpoints();
    let results: Vec<(f64, f64, bool)> = (0..n_pairs)
        .into_par_iter()
        .map(|p| {
            let mut r = rng::stream(seed, p as u64);
            let (a, b, c) = (r.gen_range(-2.0..2.0), r.gen_range(0.5..8.0), r.gen_range(0.0..6.3));
            let slope = r.gen_range(-1.0..1.0);
            let (d, e, g) = (10f64.powf(r.gen_range(-2.0..0.0)), r.gen_range(0.5..8.0), r.gen_range(0.0..6.3));
            let x: Vec<f64> = mids.iter().map(|&s| a * (b * s + c).sin() + slope * s).collect();
            let y: Vec<f64> = mids
                .iter()
                .zip(&x)
                .map(|(&s, &xv)| xv + d * (e * s + g).cos())
                .collect();
            let (ratio, lhs) = kernel_lipschitz_pair(grid, f, &x, &y);
            (ratio, lhs, ratio == 0.0)
        })
        .collect();
    let max_ratio = results.iter().map(|r| r.0).fold(0.0, f64::max);
    Ok(LipschitzReport {
        n_pairs,
        max_ratio,
        c_k: if f.l_h > 0.0 { max_ratio / (f.l_h * f.l_h) } else { 0.0 },
        lhs_max: results.iter().map(|r| r.1).fold(0.0, f64::max),
        degenerate_pairs: results.iter().filter(|r| r.2).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub n_paths: usize,
    pub sup_second_moment: f64,
    pub se: f64,
    pub argmax_t: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Monte Carlo sup_t E[X_t²] over fresh paths on the solution's grid,
/// against T^{2h_max} + h_max/h_min.
pub fn solution_norm_bound(
    sol: &RfbmSolution,
    f: &ResponseFunction,
    n_paths: usize,
) -> Result<NormBoundReport> {
    if n_paths < 100 {
        return domain("solution_norm_bound needs at least 100 paths");
    }
    let grid = &sol.grid;
    let opts = SolveOptions::default();
    let paths: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| solve_rfbm_stream(grid, f, sol.seed, p, &opts).map(|s| s.path))
        .collect::<Result<_>>()?;
    let (k, m, se) = sup_second_moment(&paths);
    let t = grid.horizon;
    let bound = t.powf(2.0 * f.h_max) + f.h_max / f.h_min;
    Ok(NormBoundReport {
        n_paths,
        sup_second_moment: m,
        se,
        argmax_t: grid.points[k],
        bound,
        pass: m <= bound + 3.0 * se,
    })
}

/// (argmax index, max_t mean X_t², SE at the argmax).
pub fn sup_second_moment(paths: &[Vec<f64>]) -> (usize, f64, f64) {
    let len = paths[0].len();
    let mut best = (0, 0.0, 0.0);
    for k in 0..len {
        let sq: Vec<f64> = paths.iter().map(|p| p[k] * p[k]).collect();
        let m = stats::mean(&sq);
        if m > best.1 {
            best = (k, m, stats::se_mean(&sq));
        }
    }
    best
}

fn window(sol: &RfbmSolution, t: f64, eps: f64) -> Result<(usize, usize)> {
    let g = &sol.grid;
    let slack = 1e-9 * g.dt();
    if t < -slack || !(eps >= 0.0) || t + eps > g.horizon + slack {
        return domain(format!("window [{t}, {}] outside [0, T]", t + eps));
    }
    let lo = ((t - slack) / g.dt()).ceil().max(0.0) as usize;
    let hi = (((t + eps + slack) / g.dt()).floor() as usize).min(g.n);
    if lo > hi {
        return Err(LabError::EmptyWindow { lo: t, hi: t + eps });
    }
    Ok((lo, hi))
}

/// (H₋, H₊): inf and sup of α over grid points in [t, t+ε].
pub fn extremal_indices(sol: &RfbmSolution, t: f64, eps: f64) -> Result<(f64, f64)> {
    let (lo, hi) = window(sol, t, eps)?;
    let w = &sol.alpha[lo..=hi];
    Ok((
        w.iter().copied().fold(f64::INFINITY, f64::min),
        w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelNorm {
    pub norm_sq: f64,
    pub lower: f64,
    pub upper: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub holds: bool,
}

/// ∫_t^{t+ε} 2H(s,X_s)(t+ε−s)^{2H(s,X_s)−1} ds with the exponent frozen at
/// each panel's left state; t and t+ε are snapped to the grid.
pub fn kernel_norm_scaling(
    sol: &RfbmSolution,
    f: &ResponseFunction,
    t: f64,
    eps: f64,
) -> Result<KernelNorm> {
    if !(eps > 0.0 && eps <= 1.0) {
        return domain(format!("kernel_norm_scaling needs 0 < eps <= 1, got {eps}"));
    }
    let g = &sol.grid;
    let i0 = g.index_of(t);
    let i1 = g.index_of(t + eps);
    if i1 <= i0 || t + eps > g.horizon * (1.0 + 1e-12) {
        return domain("window must span at least one panel inside the horizon");
    }
    let tau = g.points[i1];
    let eps_g = tau - g.points[i0];
    let pieces: Vec<f64> = (i0..i1)
        .map(|i| {
            let h = f.eval(g.points[i], sol.path[i]);
            (tau - g.points[i]).powf(2.0 * h) - (tau - g.points[i + 1]).powf(2.0 * h)
        })
        .collect();
    let norm_sq = stats::pairwise_sum(&pieces);
    let (h_minus, h_plus) = extremal_indices(sol, g.points[i0], eps_g)?;
    let lower = f.h_min / f.h_max * eps_g.powf(2.0 * h_plus);
    let upper = f.h_max / f.h_min * eps_g.powf(2.0 * h_minus);
    let slack = 1e-12;
    Ok(KernelNorm {
        norm_sq,
        lower,
        upper,
        h_minus,
        h_plus,
        holds: lower <= norm_sq * (1.0 + slack) && norm_sq <= upper * (1.0 + slack),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativeMemory {
    pub c_t: f64,
    pub avg: f64,
    pub within: bool,
}

/// Trapezoidal ∫₀ᵗ α(s) ds along the solution.
pub fn cumulative_memory(sol: &RfbmSolution, f: &ResponseFunction, t: f64) -> Result<CumulativeMemory> {
    let g = &sol.grid;
    if !(t > 0.0) || t > g.horizon * (1.0 + 1e-12) {
        return domain(format!("cumulative_memory needs 0 < t <= T, got {t}"));
    }
    let dt = g.dt();
    let full = ((t / dt) * (1.0 + 1e-12)).floor() as usize;
    let full = full.min(g.n);
    let mut parts: Vec<f64> = (0..full)
        .map(|i| 0.5 * (sol.alpha[i] + sol.alpha[i + 1]) * dt)
        .collect();
    let rem = t - g.points[full];
    if rem > 1e-12 * dt && full < g.n {
        let frac = rem / dt;
        let a_end = sol.alpha[full] + frac * (sol.alpha[full + 1] - sol.alpha[full]);
        parts.push(0.5 * (sol.alpha[full] + a_end) * rem);
    }
    let c_t = stats::pairwise_sum(&parts);
    let slack = 1e-12 * t;
    Ok(CumulativeMemory {
        c_t,
        avg: c_t / t,
        within: f.h_min * t - slack <= c_t && c_t <= f.h_max * t + slack,
    })
}

/// E[C_t]/t across paths, with its standard error.
pub fn time_averaged_exponent_mc(
    grid: &TimeGrid,
    f: &ResponseFunction,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let opts = SolveOptions::default();
    let avgs: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let s = solve_rfbm_stream(grid, f, seed, p, &opts)?;
            Ok(cumulative_memory(&s, f, t)?.avg)
        })
        .collect::<Result<_>>()?;
    Ok((stats::mean(&avgs), stats::se_mean(&avgs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateRegime {
    /// t^{−β}, β < 1
    Slow,
    /// ln t / t
    Critical,
    /// t^{−1}, β > 1
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub regime: RateRegime,
    pub expected_exponent: f64,
    pub fitted_exponent: f64,
    pub deviations: Vec<f64>,
    pub clipped_fraction: f64,
}

const CLIP_LO: f64 = 1e-3;
const CLIP_HI: f64 = 1.0 - 1e-3;

/// Decay of |ᾱ(t) − H*| for m(s) = H* + C s^{−β} (s ≥ s₀, constant below),
/// clipped into (0,1). For β = 1 the fit is on deviation / ln t.
pub fn convergence_rate_check(
    h_star: f64,
    c: f64,
    beta: f64,
    s0: f64,
    t_ladder: &[f64],
) -> Result<RateReport> {
    if !(beta > 0.0 && s0 > 0.0) || t_ladder.len() < 2 {
        return domain("convergence_rate_check needs beta > 0, s0 > 0, two ladder points");
    }
    if t_ladder.iter().any(|&t| t <= s0) {
        return domain("ladder points must exceed s0");
    }
    if !(h_star > CLIP_LO && h_star < CLIP_HI) {
        return domain("H* must lie inside (0, 1)");
    }
    let t_max = t_ladder.iter().copied().fold(0.0, f64::max);
    let bound = if c >= 0.0 { CLIP_HI } else { CLIP_LO };
    // m(s) is clipped on s < s_c
    let s_c = if c == 0.0 {
        0.0
    } else {
        (c / (bound - h_star)).powf(1.0 / beta)
    };
    let clipped_fraction = ((s_c.min(t_max) - s0) / (t_max - s0)).max(0.0);
    if clipped_fraction > 0.01 {
        return Err(LabError::Domain(format!(
            "clipping active on {:.2}% of [s0, t_max]",
            100.0 * clipped_fraction
        )));
    }
    let clip = |m: f64| m.clamp(CLIP_LO, CLIP_HI);
    let m0 = clip(h_star + c * s0.powf(-beta));
    let s1 = s_c.max(s0);
    // ∫_{s1}^{t} C s^{−β} ds
    let power_part = |t: f64| {
        if beta == 1.0 {
            c * (t / s1).ln()
        } else {
            c * (t.powf(1.0 - beta) - s1.powf(1.0 - beta)) / (1.0 - beta)
        }
    };
    let deviations: Vec<f64> = t_ladder
        .iter()
        .map(|&t| {
            let integral = s0 * (m0 - h_star) + (s1 - s0) * (bound - h_star) * (s_c > s0) as i32 as f64 + power_part(t);
            (integral / t).abs()
        })
        .collect();
    let (regime, expected) = if beta < 1.0 {
        (RateRegime::Slow, beta)
    } else if beta == 1.0 {
        (RateRegime::Critical, 1.0)
    } else {
        (RateRegime::Fast, 1.0)
    };
    let lx: Vec<f64> = t_ladder.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = deviations
        .iter()
        .zip(t_ladder)
        .map(|(&d, &t)| if regime == RateRegime::Critical { (d / t.ln()).ln() } else { d.ln() })
        .collect();
    Ok(RateReport {
        regime,
        expected_exponent: expected,
        fitted_exponent: -stats::ols_slope(&lx, &ly),
        deviations,
        clipped_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2ContractionReport {
    pub n_paths: usize,
    pub sweeps: usize,
    /// sup_t E[(X^{k+1} − X^k)²] for k = 0, 1, …
    pub s2_changes: Vec<f64>,
    /// √(S_{k+1}/S_k) with delta-method standard errors
    pub ratios: Vec<f64>,
    pub ses: Vec<f64>,
    pub kappa: f64,
    pub pass: bool,
}

/// Changes between consecutive Picard iterates measured in S² across paths.
pub fn s2_contraction_check(
    grid: &TimeGrid,
    f: &ResponseFunction,
    n_paths: usize,
    seed: u64,
    sweeps: usize,
    kappa: f64,
) -> Result<S2ContractionReport> {
    if n_paths < 10 || sweeps < 3 {
        return domain("s2_contraction_check needs >= 10 paths and >= 3 sweeps");
    }
    // diffs[p][k][t]
    let diffs: Vec<Vec<Vec<f64>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let inc = rng::normals(seed, p, grid.n, grid.dt());
            let it = picard_iterates(grid, f, &inc, sweeps, KernelConvention::StateAtSource);
            it.windows(2)
                .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b) * (a - b)).collect())
                .collect()
        })
        .collect();
    let mut s2 = Vec::new();
    let mut argmax = Vec::new();
    for k in 0..sweeps {
        let mut best = (0usize, 0.0);
        for t in 0..=grid.n {
            let col: Vec<f64> = diffs.iter().map(|d| d[k][t]).collect();
            let m = stats::mean(&col);
            if m > best.1 {
                best = (t, m);
            }
        }
        s2.push(best.1);
        argmax.push(best.0);
    }
    let mut ratios = Vec::new();
    let mut ses = Vec::new();
    for k in 0..sweeps - 1 {
        // stop once the changes reach round-off
        if s2[k + 1] < 1e-26 {
            break;
        }
        let a: Vec<f64> = diffs.iter().map(|d| d[k + 1][argmax[k + 1]]).collect();
        let b: Vec<f64> = diffs.iter().map(|d| d[k][argmax[k]]).collect();
        let (ma, mb) = (stats::mean(&a), stats::mean(&b));
        let nf = n_paths as f64;
        let cov: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
        let cab = stats::pairwise_sum(&cov) / (nf - 1.0);
        let r2 = ma / mb;
        let rel_var = stats::variance(&a) / (nf * ma * ma) + stats::variance(&b) / (nf * mb * mb)
            - 2.0 * cab / (nf * ma * mb);
        let r = r2.sqrt();
        ratios.push(r);
        ses.push(0.5 * r * rel_var.max(0.0).sqrt());
    }
    let pass = ratios.iter().zip(&ses).all(|(r, se)| *r <= kappa + 3.0 * se);
    Ok(S2ContractionReport {
        n_paths,
        sweeps,
        s2_changes: s2,
        ratios,
        ses,
        kappa,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub n_values: Vec<usize>,
    /// mean over seeds of sup |X_n − X_{2n}| on the coarse points
    pub mean_sup_diff: Vec<f64>,
    /// diff · n^{h_min}
    pub scaled: Vec<f64>,
}

/// Self-convergence between grids n and 2n driven by the same Brownian path.
pub fn grid_refinement_check(
    f: &ResponseFunction,
    horizon: f64,
    n_values: &[usize],
    n_seeds: usize,
    seed: u64,
) -> Result<RefinementReport> {
    let opts = SolveOptions::default();
    let mut mean_sup_diff = Vec::new();
    for &n in n_values {
        let coarse = TimeGrid::new(horizon, n)?;
        let fine = TimeGrid::new(horizon, 2 * n)?;
        let diffs: Vec<f64> = (0..n_seeds as u64)
            .into_par_iter()
            .map(|p| {
                let inc_f = rng::normals(seed, p, 2 * n, fine.dt());
                let inc_c: Vec<f64> = inc_f.chunks(2).map(|c| c[0] + c[1]).collect();
                let xf = solve_rfbm_with_increments(&fine, f, inc_f, seed, &opts)?;
                let xc = solve_rfbm_with_increments(&coarse, f, inc_c, seed, &opts)?;
                Ok((0..=n)
                    .map(|k| (xc.path[k] - xf.path[2 * k]).abs())
                    .fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        mean_sup_diff.push(stats::mean(&diffs));
    }
    let scaled = n_values
        .iter()
        .zip(&mean_sup_diff)
        .map(|(&n, d)| d * (n as f64).powf(f.h_min))
        .collect();
    Ok(RefinementReport {
        n_values: n_values.to_vec(),
        mean_sup_diff,
        scaled,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaHolderReport {
    /// estimated path exponent γ̂*
    pub path_exponent: f64,
    pub exponent: f64,
    /// Hölder quotient of the path at `exponent`
    pub path_constant: f64,
    pub alpha_quotient: f64,
    pub bound: f64,
    pub bounded: bool,
}

/// Hölder quotient of α = H(t, X_t) at exponent min(γ, γ̂*) against
/// max(L_H·C + C_H, 1).
pub fn alpha_holder_check(sol: &RfbmSolution, f: &ResponseFunction) -> AlphaHolderReport {
    let g = &sol.grid;
    let gamma_hat = empirical_holder_exponent(&sol.path, g.dt());
    let expo = f.gamma.min(gamma_hat).max(1e-3);
    let c_path = empirical_holder_quotient(&g.points, &sol.path, expo);
    let q = empirical_holder_quotient(&g.points, &sol.alpha, expo);
    let bound = crate::hurst::frozen_path_holder_constant(f.l_h, c_path, f.c_h);
    AlphaHolderReport {
        path_exponent: gamma_hat,
        exponent: expo,
        path_constant: c_path,
        alpha_quotient: q,
        bound,
        bounded: q <= bound * (1.0 + 1e-9),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hurst::{example_response, HurstFunction};
    use crate::tvfbm::simulate_tvfbm;

    #[test]
    fn constant_h_two_sweeps() {
        let grid = TimeGrid::new(1.0, 128).unwrap();
        let f = ResponseFunction::constant(0.7, 1.0).unwrap();
        let sol = solve_rfbm(&grid, &f, 5, 1e-10, 64).unwrap();
        assert_eq!(sol.iterations, 2);
        assert_eq!(sol.residual_history[1], 0.0);
        let h = HurstFunction::constant(0.7, 1.0).unwrap();
        let p = simulate_tvfbm(&grid, &h, 5).unwrap();
        assert_eq!(sol.path, p.values);
    }

    #[test]
    fn evaluation_time_matches_tvfbm() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 1.0).unwrap();
        let f = ResponseFunction::from_hurst(&h);
        let opts = SolveOptions {
            convention: KernelConvention::EvaluationTime,
            ..SolveOptions::default()
        };
        let sol = solve_rfbm_stream(&grid, &f, 3, 0, &opts).unwrap();
        let p = simulate_tvfbm(&grid, &h, 3).unwrap();
        assert_eq!(sol.path, p.values);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn example_converges_geometrically() {
        let grid = TimeGrid::new(0.25, 128).unwrap();
        let f = example_response(0.45, 0.55, 0.5, 1.0, 1.0).unwrap();
        let sol = solve_rfbm(&grid, &f, 1, 1e-10, 64).unwrap();
        assert!(sol.converged);
        let r = &sol.residual_history;
        for k in 1..r.len() - 1 {
            assert!(r[k + 1] < r[k], "{r:?}");
        }
        assert!(sol.alpha.iter().all(|&a| (0.45..=0.55).contains(&a)));
    }

    #[test]
    fn non_convergence_carries_history() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        match solve_rfbm(&grid, &f, 1, 1e-14, 2) {
            Err(LabError::NonConvergence { residuals, .. }) => assert_eq!(residuals.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certificate_examples() {
        let f = example_response(0.5, 0.7, 1.0, 1.0, 1.0).unwrap();
        let c = contraction_certificate(&f, 1.0, 2.0).unwrap();
        assert!((c.kappa - 0.840_896_4).abs() < 1e-7);
        assert!(c.t0 <= c.t1 / 2.0 && c.kappa < 1.0);
        let near_one = example_response(0.999_999, 0.999_999_5, 1.0, 1.0, 1.0).unwrap();
        assert!((contraction_certificate(&near_one, 1.0, 1.0).unwrap().kappa - 0.5f64.sqrt()).abs() < 1e-6);
        let flat = ResponseFunction::constant(0.6, 1.0).unwrap();
        let c = contraction_certificate(&flat, 0.8, 5.0).unwrap();
        assert!(c.t1.is_infinite());
        assert_eq!(c.t0, 0.8);
        assert!(contraction_certificate(&flat, 1.5, 1.0).is_err());
    }

    #[test]
    fn lipschitz_trivial_cases() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let x: Vec<f64> = grid.midpoints().iter().map(|s| s.sin()).collect();
        assert_eq!(kernel_lipschitz_pair(&grid, &f, &x, &x), (0.0, 0.0));
        let flat = ResponseFunction::constant(0.6, 1.0).unwrap();
        let r = kernel_lipschitz_check(&grid, &flat, 10, 1).unwrap();
        assert_eq!(r.lhs_max, 0.0);
        assert_eq!(r.c_k, 0.0);
    }

    #[test]
    fn lipschitz_ratio_stable_under_refinement() {
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let a = kernel_lipschitz_check(&TimeGrid::new(1.0, 64).unwrap(), &f, 20, 2).unwrap();
        let b = kernel_lipschitz_check(&TimeGrid::new(1.0, 128).unwrap(), &f, 20, 2).unwrap();
        assert!(a.c_k.is_finite() && a.c_k > 0.0);
        assert!((a.c_k / b.c_k - 1.0).abs() < 0.25, "{} {}", a.c_k, b.c_k);
    }

    #[test]
    fn extremal_and_memory_constant() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let f = ResponseFunction::constant(0.6, 1.0).unwrap();
        let sol = solve_rfbm(&grid, &f, 2, 1e-9, 64).unwrap();
        assert_eq!(extremal_indices(&sol, 0.2, 0.3).unwrap(), (0.6, 0.6));
        let m = cumulative_memory(&sol, &f, 0.5).unwrap();
        assert!((m.c_t - 0.3).abs() < 1e-14 && m.within);
        let kn = kernel_norm_scaling(&sol, &f, 0.2, 0.05).unwrap();
        assert!((kn.norm_sq - 0.05f64.powf(1.2)).abs() < 1e-14);
        assert!((kn.lower - kn.norm_sq).abs() < 1e-14 && (kn.upper - kn.norm_sq).abs() < 1e-14);
        assert!(matches!(
            extremal_indices(&sol, 0.201, 0.005),
            Err(LabError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn extremal_single_point_and_ladder() {
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let sol = solve_rfbm(&grid, &f, 4, 1e-9, 64).unwrap();
        let k = 400;
        let (lo, hi) = extremal_indices(&sol, 0.4, 0.0005).unwrap();
        assert_eq!((lo, hi), (sol.alpha[k], sol.alpha[k]));
        let mut prev = f64::INFINITY;
        for eps in [0.2, 0.05, 0.01, 0.002] {
            let (lo, hi) = extremal_indices(&sol, 0.4, eps).unwrap();
            assert!(f.h_min <= lo && lo <= hi && hi <= f.h_max);
            assert!(hi - lo <= prev);
            prev = hi - lo;
        }
    }

    #[test]
    fn kernel_norm_sandwich_on_example() {
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let sol = solve_rfbm(&grid, &f, 8, 1e-9, 64).unwrap();
        let kn = kernel_norm_scaling(&sol, &f, 0.1, 0.05).unwrap();
        assert!(kn.holds, "{kn:?}");
    }

    #[test]
    fn tv_only_memory_is_integral_of_h() {
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 1.0).unwrap();
        let f = ResponseFunction::from_hurst(&h);
        let sol = solve_rfbm(&grid, &f, 2, 1e-9, 64).unwrap();
        let m = cumulative_memory(&sol, &f, 0.8).unwrap();
        let exact = 0.5 * 0.8 + 0.2 * (1.0 - 0.8f64.cos());
        assert!((m.c_t - exact).abs() < 1e-5);
    }

    #[test]
    fn memory_monotone_and_bounded() {
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let sol = solve_rfbm(&grid, &f, 6, 1e-9, 64).unwrap();
        let mut prev = 0.0;
        for k in 1..=256 {
            let m = cumulative_memory(&sol, &f, grid.points[k]).unwrap();
            assert!(m.c_t >= prev && m.within);
            assert!(m.avg >= f.h_min && m.avg <= f.h_max);
            prev = m.c_t;
        }
    }

    #[test]
    fn rate_regimes() {
        let ladder: Vec<f64> = (0..=8).map(|k| 10f64.powf(2.0 + 0.5 * k as f64)).collect();
        let slow = convergence_rate_check(0.5, 0.1, 0.5, 1.0, &ladder).unwrap();
        assert_eq!(slow.regime, RateRegime::Slow);
        assert!((slow.fitted_exponent - 0.5).abs() < 0.05);
        let crit = convergence_rate_check(0.5, 0.1, 1.0, 1.0, &ladder).unwrap();
        assert!((crit.fitted_exponent - 1.0).abs() < 0.05);
        let t = *ladder.last().unwrap();
        let scaled = crit.deviations.last().unwrap() * t / t.ln();
        assert!((scaled - 0.1).abs() < 0.02);
        let fast = convergence_rate_check(0.5, 0.1, 2.0, 1.0, &ladder).unwrap();
        assert_eq!(fast.regime, RateRegime::Fast);
        assert!((fast.fitted_exponent - 1.0).abs() < 0.05);
        // heavy clipping is rejected
        assert!(convergence_rate_check(0.5, 100.0, 0.5, 1.0, &ladder).is_err());
    }

    #[test]
    fn alpha_holder_bounded() {
        let grid = TimeGrid::new(1.0, 256).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        for seed in 0..5 {
            let sol = solve_rfbm(&grid, &f, seed, 1e-9, 64).unwrap();
            let r = alpha_holder_check(&sol, &f);
            assert!(r.bounded, "{r:?}");
            assert!(r.path_exponent > 0.1 && r.path_exponent < 1.0);
        }
    }
}
