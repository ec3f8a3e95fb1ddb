//! Time-varying fBm: kernel, simulation and closed-form laws.

mod covariance;
mod lamperti;

pub use covariance::{
    boundary_term, cov_hyper_i, covariance_bounds, covariance_hypergeometric, covariance_matrix,
    covariance_quadrature, eval_j, mixed_derivative_terms, CovMethod, CovarianceBounds,
    CovarianceResult, MixedTerms,
};
pub use lamperti::{lamperti_solve, lamperti_solve_tol, variance_normalization, LampertiPoint};

use crate::error::{domain, Result};
use crate::hurst::HurstFunction;
use crate::rng;
use crate::specfun;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub horizon: f64,
    pub n: usize,
    pub points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("grid needs n >= 2, got {n}"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("grid horizon must be positive, got {horizon}"));
        }
        let dt = horizon / n as f64;
        let mut points: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        points[n] = horizon;
        Ok(Self {
            t0: 0.0,
            horizon,
            n,
            points,
        })
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.horizon / self.n as f64
    }

    /// Index of the grid point closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.n)
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    pub seed: u64,
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return domain(format!("Hurst value {h} outside (0, 1)"));
    }
    Ok(())
}

/// √(2h)(t−s)^{h−1/2}.
pub fn kernel_tv(t: f64, s: f64, h: f64) -> Result<f64> {
    check_h(h)?;
    if !(s >= 0.0 && s < t) {
        return domain(format!("kernel needs 0 <= s < t, got s={s}, t={t}"));
    }
    Ok((2.0 * h).sqrt() * (t - s).powf(h - 0.5))
}

/// Average of √(2h)(t−s)^{h−1/2} over the panel [a, b] with b ≤ t.
#[inline]
pub fn panel_weight(t: f64, a: f64, b: f64, h: f64) -> f64 {
    if h == 0.5 {
        // kernel is identically one
        return 1.0;
    }
    let p = h + 0.5;
    (2.0 * h).sqrt() / p * ((t - a).powf(p) - (t - b).powf(p)) / (b - a)
}

/// Panel weights w_i(t_k), i < k, with exponent H(t_k).
pub fn panel_weights(grid: &TimeGrid, k: usize, h: f64) -> Vec<f64> {
    let t = grid.points[k];
    (0..k)
        .map(|i| panel_weight(t, grid.points[i], grid.points[i + 1], h))
        .collect()
}

/// Σ w_i(t_k)² Δ, the discrete counterpart of t_k^{2H(t_k)}.
pub fn discrete_isometry(grid: &TimeGrid, k: usize, h: &HurstFunction) -> f64 {
    let w = panel_weights(grid, k, h.eval(grid.points[k]));
    let sq: Vec<f64> = w.iter().map(|x| x * x * grid.dt()).collect();
    crate::stats::pairwise_sum(&sq)
}

#[inline]
fn dot_sequential(w: &[f64], db: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in w.iter().zip(db) {
        acc += a * b;
    }
    acc
}

fn path_from_increments(grid: &TimeGrid, h: &HurstFunction, increments: &[f64]) -> Vec<f64> {
    let mut values = vec![0.0; grid.n + 1];
    for (k, v) in values.iter_mut().enumerate().skip(1) {
        let w = panel_weights(grid, k, h.eval(grid.points[k]));
        *v = dot_sequential(&w, &increments[..k]);
    }
    values
}

/// One path on stream (seed, path).
pub fn simulate_tvfbm_stream(
    grid: &TimeGrid,
    h: &HurstFunction,
    seed: u64,
    path: u64,
) -> Result<SamplePath> {
    if !(h.gamma > h.h_max) {
        return domain("Hurst function violates the critical regularity condition");
    }
    let increments = rng::normals(seed, path, grid.n, grid.dt());
    let values = path_from_increments(grid, h, &increments);
    Ok(SamplePath {
        grid: grid.clone(),
        values,
        increments,
        seed,
    })
}

pub fn simulate_tvfbm(grid: &TimeGrid, h: &HurstFunction, seed: u64) -> Result<SamplePath> {
    simulate_tvfbm_stream(grid, h, seed, 0)
}

/// Draws path values only at selected grid indices, reusing one weight
/// table across paths. Agrees bit-for-bit with the full simulator.
#[derive(Debug, Clone)]
pub struct TargetSampler {
    pub grid: TimeGrid,
    pub targets: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl TargetSampler {
    pub fn new(grid: &TimeGrid, h: &HurstFunction, targets: &[usize]) -> Result<Self> {
        if targets.iter().any(|&k| k > grid.n) {
            return domain("target index beyond grid");
        }
        let weights = targets
            .iter()
            .map(|&k| panel_weights(grid, k, h.eval(grid.points[k])))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            targets: targets.to_vec(),
            weights,
        })
    }

    pub fn sample(&self, seed: u64, path: u64) -> Vec<f64> {
        let increments = rng::normals(seed, path, self.grid.n, self.grid.dt());
        self.weights
            .iter()
            .zip(&self.targets)
            .map(|(w, &k)| dot_sequential(w, &increments[..k]))
            .collect()
    }
}

/// t^{2H(t)}.
pub fn variance_theoretical(t: f64, h: &HurstFunction) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.powf(2.0 * h.eval(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalIncrement {
    pub exact: f64,
    pub leading: f64,
    pub lambda: f64,
}

/// Variance of the local increment over [t, t+ε] and its leading term.
pub fn local_increment_variance(t: f64, eps: f64, h: &HurstFunction) -> Result<LocalIncrement> {
    if !(eps > 0.0) || t < 0.0 || t + eps > h.horizon * (1.0 + 1e-12) {
        return domain(format!("need eps > 0 and t + eps <= T, got t={t}, eps={eps}"));
    }
    let ht = h.eval(t);
    Ok(LocalIncrement {
        exact: eps.powf(2.0 * h.eval(t + eps)),
        leading: eps.powf(2.0 * ht),
        lambda: (h.gamma - ht).min(0.5 * (h.gamma + ht)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LndResult {
    pub eps: f64,
    pub cond_var: f64,
    pub bound: f64,
    pub threshold: f64,
    pub within_threshold: bool,
    pub holds: bool,
    pub warning: Option<String>,
}

/// Validity threshold ε₂ below which cond_var ≥ ε^{2H(t₀)}/2 is guaranteed.
///
/// Built from |ln ε| ≤ ε^{−δ}/(δe) with δ = γ − λ, so the relative
/// remainder is at most c₁ε^λ on ε ≤ ε₁.
pub fn lnd_threshold(t0: f64, h: &HurstFunction) -> f64 {
    let ht = h.eval(t0);
    let lambda = (h.gamma - ht).min(0.5 * (h.gamma + ht));
    if h.c_h == 0.0 {
        return 1.0;
    }
    let delta = h.gamma - lambda;
    let k = 1.0 / (delta * std::f64::consts::E);
    let a = 2.0 * h.c_h * k;
    let c1 = std::f64::consts::E * a;
    let eps1 = 1f64.min(a.powf(-1.0 / lambda));
    eps1.min((2.0 * c1).powf(-1.0 / lambda))
}

pub fn lnd_lower_bound(t0: f64, eps: f64, h: &HurstFunction) -> Result<LndResult> {
    let li = local_increment_variance(t0, eps, h)?;
    let threshold = lnd_threshold(t0, h);
    let within = eps <= threshold;
    let bound = 0.5 * li.leading;
    Ok(LndResult {
        eps,
        cond_var: li.exact,
        bound,
        threshold,
        within_threshold: within,
        holds: li.exact >= bound,
        warning: (!within).then(|| format!("eps {eps} exceeds validity threshold {threshold}")),
    })
}

/// ε^{2H(t₀)} ln P(I ≥ x) for the exact Gaussian local increment.
pub fn ldp_ratio(t0: f64, x: f64, eps: f64, h: &HurstFunction) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("ldp_ratio needs x > 0, got {x}"));
    }
    let li = local_increment_variance(t0, eps, h)?;
    let z = x / li.exact.sqrt();
    Ok(li.leading * specfun::ln_normal_tail(z))
}

/// Decade ladder 10^{-1} … 10^{-k}.
pub fn eps_ladder(k: usize) -> Vec<f64> {
    (1..=k).map(|j| 10f64.powi(-(j as i32))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsBoundReport {
    pub n_max: usize,
    pub kappa: f64,
    pub violations: Vec<usize>,
    pub largest_violation: Option<usize>,
    /// |I_n| / √|ln ε_n| at n = n_max
    pub final_ratio: f64,
    /// e^{H(t₀)}√2
    pub limsup_bound: f64,
}

/// Finite-sample count of violations of e^{H(t₀)}√(2(1+ς)|ln ε_n|), ε_n = n^{−κ}.
pub fn as_bound_check(
    t0: f64,
    h: &HurstFunction,
    kappa: f64,
    n_max: usize,
    seed: u64,
) -> Result<AsBoundReport> {
    if !(kappa > 1.0) || n_max < 2 {
        return domain("as_bound_check needs kappa > 1 and n_max >= 2");
    }
    let varsigma = kappa - 1.0;
    let ht = h.eval(t0);
    let mut rng = rng::stream(seed, 0);
    let mut violations = Vec::new();
    let mut final_ratio = 0.0;
    for n in 1..=n_max {
        let eps = (n as f64).powf(-kappa);
        let z: f64 = StandardNormal.sample(&mut rng);
        let inc = eps.powf(h.eval(t0 + eps)) * z;
        let log_eps = eps.ln().abs();
        let bound = ht.exp() * (2.0 * (1.0 + varsigma) * log_eps).sqrt();
        if inc.abs() > bound {
            violations.push(n);
        }
        if n == n_max {
            final_ratio = inc.abs() / log_eps.sqrt();
        }
    }
    Ok(AsBoundReport {
        n_max,
        kappa,
        largest_violation: violations.last().copied(),
        violations,
        final_ratio,
        limsup_bound: ht.exp() * std::f64::consts::SQRT_2,
    })
}

#[cfg(test)]
#[path = "../../tests/common/oracle.rs"]
pub(crate) mod oracle;
