//! Deterministic Hurst functions H(t) and response functions H(t, x).

use crate::error::{domain, Result};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Serializable description of a deterministic Hurst function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HurstSpec {
    Constant { h: f64 },
    /// base + amp·sin(freq·t)
    Sinusoidal { base: f64, amp: f64, freq: f64 },
    /// h0 + slope·t
    Linear { h0: f64, slope: f64 },
}

impl HurstSpec {
    pub fn build(&self, horizon: f64) -> Result<HurstFunction> {
        match *self {
            HurstSpec::Constant { h } => HurstFunction::constant(h, horizon),
            HurstSpec::Sinusoidal { base, amp, freq } => {
                HurstFunction::sinusoidal(base, amp, freq, horizon)
            }
            HurstSpec::Linear { h0, slope } => HurstFunction::linear(h0, slope, horizon),
        }
    }
}

#[derive(Clone)]
pub struct HurstFunction {
    eval: Fn1,
    deriv: Option<Fn1>,
    second_deriv: Option<Fn1>,
    pub gamma: f64,
    pub c_h: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub horizon: f64,
}

impl fmt::Debug for HurstFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HurstFunction")
            .field("gamma", &self.gamma)
            .field("c_h", &self.c_h)
            .field("h_min", &self.h_min)
            .field("h_max", &self.h_max)
            .field("horizon", &self.horizon)
            .finish()
    }
}

fn check_range(h_min: f64, h_max: f64) -> Result<()> {
    if !(h_min > 0.0 && h_min <= h_max && h_max < 1.0) {
        return domain(format!("need 0 < h_min <= h_max < 1, got [{h_min}, {h_max}]"));
    }
    Ok(())
}

impl HurstFunction {
    /// Builds from closures and declared metadata.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eval: Fn1,
        deriv: Option<Fn1>,
        second_deriv: Option<Fn1>,
        gamma: f64,
        c_h: f64,
        h_min: f64,
        h_max: f64,
        horizon: f64,
    ) -> Result<Self> {
        check_range(h_min, h_max)?;
        if !(horizon > 0.0) {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if !(gamma > h_max) || gamma > 1.0 {
            return domain(format!(
                "Hölder exponent {gamma} must lie in (h_max, 1] with h_max = {h_max}"
            ));
        }
        Ok(Self {
            eval,
            deriv,
            second_deriv,
            gamma,
            c_h,
            h_min,
            h_max,
            horizon,
        })
    }

    pub fn constant(h: f64, horizon: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |_| h),
            Some(Arc::new(|_| 0.0)),
            Some(Arc::new(|_| 0.0)),
            1.0,
            0.0,
            h,
            h,
            horizon,
        )
    }

    pub fn sinusoidal(base: f64, amp: f64, freq: f64, horizon: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |t| base + amp * (freq * t).sin()),
            Some(Arc::new(move |t| amp * freq * (freq * t).cos())),
            Some(Arc::new(move |t| -amp * freq * freq * (freq * t).sin())),
            1.0,
            (amp * freq).abs(),
            base - amp.abs(),
            base + amp.abs(),
            horizon,
        )
    }

    /// Range bounds are taken over [0, horizon].
    pub fn linear(h0: f64, slope: f64, horizon: f64) -> Result<Self> {
        let end = h0 + slope * horizon;
        Self::new(
            Arc::new(move |t| h0 + slope * t),
            Some(Arc::new(move |_| slope)),
            Some(Arc::new(|_| 0.0)),
            1.0,
            slope.abs(),
            h0.min(end),
            h0.max(end),
            horizon,
        )
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn deriv(&self, t: f64) -> Option<f64> {
        self.deriv.as_ref().map(|d| d(t))
    }

    pub fn second_deriv(&self, t: f64) -> Option<f64> {
        self.second_deriv.as_ref().map(|d| d(t))
    }

    pub fn has_derivatives(&self) -> bool {
        self.deriv.is_some() && self.second_deriv.is_some()
    }

    pub fn is_constant(&self) -> bool {
        self.c_h == 0.0
    }

    /// Checks the declared range on a uniform grid of `n + 1` points.
    pub fn check_grid(&self, n: usize) -> Result<()> {
        for k in 0..=n {
            let t = self.horizon * k as f64 / n as f64;
            let h = self.eval(t);
            if !(h >= self.h_min - 1e-12 && h <= self.h_max + 1e-12) {
                return domain(format!("H({t}) = {h} outside [{}, {}]", self.h_min, self.h_max));
            }
        }
        Ok(())
    }
}

/// D = C_H / √(2 h_min), the Hölder constant of t ↦ √(2H(t)).
pub fn sqrt_control_constant(h: &HurstFunction) -> f64 {
    h.c_h / (2.0 * h.h_min).sqrt()
}

/// Serializable description of a response function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResponseSpec {
    Constant {
        h: f64,
    },
    SinusoidalTime {
        base: f64,
        amp: f64,
        freq: f64,
    },
    Example61 {
        h_min: f64,
        h_max: f64,
        alpha: f64,
        omega: f64,
    },
    /// (h_min + h_max)/2 + (h_max − h_min)/2 · tanh(αx)
    TanhSpatial {
        h_min: f64,
        h_max: f64,
        alpha: f64,
    },
}

impl ResponseSpec {
    pub fn build(&self, horizon: f64) -> Result<ResponseFunction> {
        match *self {
            ResponseSpec::Constant { h } => ResponseFunction::constant(h, horizon),
            ResponseSpec::SinusoidalTime { base, amp, freq } => Ok(ResponseFunction::from_hurst(
                &HurstFunction::sinusoidal(base, amp, freq, horizon)?,
            )),
            ResponseSpec::Example61 {
                h_min,
                h_max,
                alpha,
                omega,
            } => example_response(h_min, h_max, alpha, omega, horizon),
            ResponseSpec::TanhSpatial {
                h_min,
                h_max,
                alpha,
            } => tanh_spatial(h_min, h_max, alpha, horizon),
        }
    }
}

#[derive(Clone)]
pub struct ResponseFunction {
    eval: Fn2,
    dx: Option<Fn2>,
    pub l_h: f64,
    pub c_h: f64,
    pub gamma: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub l_dh: f64,
    pub horizon: f64,
}

impl fmt::Debug for ResponseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResponseFunction")
            .field("l_h", &self.l_h)
            .field("c_h", &self.c_h)
            .field("gamma", &self.gamma)
            .field("h_min", &self.h_min)
            .field("h_max", &self.h_max)
            .field("l_dh", &self.l_dh)
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl ResponseFunction {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eval: Fn2,
        dx: Option<Fn2>,
        l_h: f64,
        c_h: f64,
        gamma: f64,
        h_min: f64,
        h_max: f64,
        l_dh: f64,
        horizon: f64,
    ) -> Result<Self> {
        check_range(h_min, h_max)?;
        if l_h < 0.0 || c_h < 0.0 || l_dh < 0.0 || !(gamma > 0.0) || !(horizon > 0.0) {
            return domain("response constants must be non-negative, gamma and horizon positive");
        }
        Ok(Self {
            eval,
            dx,
            l_h,
            c_h,
            gamma,
            h_min,
            h_max,
            l_dh,
            horizon,
        })
    }

    pub fn constant(h: f64, horizon: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |_, _| h),
            Some(Arc::new(|_, _| 0.0)),
            0.0,
            0.0,
            1.0,
            h,
            h,
            0.0,
            horizon,
        )
    }

    /// State-independent response H(t, x) = H(t).
    pub fn from_hurst(h: &HurstFunction) -> Self {
        let inner = h.clone();
        Self {
            eval: Arc::new(move |t, _| inner.eval(t)),
            dx: Some(Arc::new(|_, _| 0.0)),
            l_h: 0.0,
            c_h: h.c_h,
            gamma: h.gamma,
            h_min: h.h_min,
            h_max: h.h_max,
            l_dh: 0.0,
            horizon: h.horizon,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        (self.eval)(t, x)
    }

    pub fn has_closed_form_dx(&self) -> bool {
        self.dx.is_some()
    }

    /// ∂H/∂x: closed form when supplied, otherwise Richardson-extrapolated
    /// central differences with base step 1e-6.
    pub fn dh_dx(&self, t: f64, x: f64) -> f64 {
        if let Some(d) = &self.dx {
            return d(t, x);
        }
        let cd = |h: f64| (self.eval(t, x + h) - self.eval(t, x - h)) / (2.0 * h);
        let h = 1e-6;
        (4.0 * cd(h / 2.0) - cd(h)) / 3.0
    }

    pub fn without_dx(mut self) -> Self {
        self.dx = None;
        self
    }

    pub fn with_declared_l_h(mut self, l_h: f64) -> Self {
        self.l_h = l_h;
        self
    }

    pub fn is_state_independent(&self) -> bool {
        self.l_h == 0.0
    }
}

/// H(t,x) = h_min + (h_max − h_min)(1 + tanh(αx)cos(ωt))/(2 + e^{−t}).
pub fn example_response(
    h_min: f64,
    h_max: f64,
    alpha: f64,
    omega: f64,
    horizon: f64,
) -> Result<ResponseFunction> {
    check_range(h_min, h_max)?;
    if !(alpha > 0.0 && omega > 0.0) {
        return domain("example response needs alpha > 0 and omega > 0");
    }
    let span = h_max - h_min;
    let l_h = alpha * span / 2.0;
    ResponseFunction::new(
        Arc::new(move |t, x| {
            h_min + span * (1.0 + (alpha * x).tanh() * (omega * t).cos()) / (2.0 + (-t).exp())
        }),
        Some(Arc::new(move |t, x| {
            let th = (alpha * x).tanh();
            span * alpha * (1.0 - th * th) * (omega * t).cos() / (2.0 + (-t).exp())
        })),
        l_h,
        span * (3.0 * omega + 2.0) / 4.0,
        1.0,
        h_min,
        h_max,
        l_h,
        horizon,
    )
}

/// Time-independent response centred in [h_min, h_max] with a tanh profile.
pub fn tanh_spatial(h_min: f64, h_max: f64, alpha: f64, horizon: f64) -> Result<ResponseFunction> {
    check_range(h_min, h_max)?;
    if !(alpha > 0.0) {
        return domain("tanh response needs alpha > 0");
    }
    let mid = 0.5 * (h_min + h_max);
    let r = 0.5 * (h_max - h_min);
    ResponseFunction::new(
        Arc::new(move |_, x| mid + r * (alpha * x).tanh()),
        Some(Arc::new(move |_, x| {
            let th = (alpha * x).tanh();
            r * alpha * (1.0 - th * th)
        })),
        alpha * r,
        0.0,
        1.0,
        h_min,
        h_max,
        alpha * r,
        horizon,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_samples: usize,
    pub spatial_max: f64,
    pub temporal_max: f64,
    pub dx_max: f64,
    pub range_min: f64,
    pub range_max: f64,
    pub spatial_violation: bool,
    pub temporal_violation: bool,
    pub dx_violation: bool,
    pub range_violation: bool,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        !(self.spatial_violation || self.temporal_violation || self.dx_violation || self.range_violation)
    }
}

const VALIDATION_SEED: u64 = 0x5eed_0051;

/// Audits declared constants on random pairs at separations 1e-6 … 1e-1.
pub fn validate_response(f: &ResponseFunction, n_samples: usize) -> Result<ValidationReport> {
    if n_samples < 100 {
        return domain("validate_response needs at least 100 samples");
    }
    let mut rng = rng::stream(VALIDATION_SEED, 0);
    let t_max = f.horizon;
    let mut spatial_max: f64 = 0.0;
    let mut temporal_max: f64 = 0.0;
    let mut dx_max: f64 = 0.0;
    let mut range_min = f64::INFINITY;
    let mut range_max = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let d = 10f64.powf(rng.gen_range(-6.0..-1.0));
        let t = rng.gen_range(0.0..t_max);
        let x = rng.gen_range(-5.0..5.0);
        let h0 = f.eval(t, x);
        range_min = range_min.min(h0);
        range_max = range_max.max(h0);
        spatial_max = spatial_max.max((f.eval(t, x + d) - h0).abs() / d);
        let ts = rng.gen_range(0.0..(t_max - d).max(0.0) + f64::MIN_POSITIVE);
        let dt = d.min(t_max - ts);
        if dt > 0.0 {
            let q = (f.eval(ts + dt, x) - f.eval(ts, x)).abs() / dt.powf(f.gamma);
            temporal_max = temporal_max.max(q);
        }
        dx_max = dx_max.max(f.dh_dx(t, x).abs());
    }
    let slack = 1e-9;
    Ok(ValidationReport {
        n_samples,
        spatial_max,
        temporal_max,
        dx_max,
        range_min,
        range_max,
        spatial_violation: spatial_max > f.l_h + slack,
        temporal_violation: temporal_max > f.c_h + slack,
        dx_violation: dx_max > f.l_dh + slack,
        range_violation: range_min < f.h_min - slack
            || range_max > f.h_max + slack
            || range_min <= 0.0
            || range_max >= 1.0,
    })
}

/// Hölder constant of s ↦ H(s, Y(s)) for a path Y with Hölder constant `c_path`.
pub fn frozen_path_holder_constant(l_h: f64, c_path: f64, c_h: f64) -> f64 {
    (l_h * c_path + c_h).max(1.0)
}

/// max |y_j − y_i| / |t_j − t_i|^exponent over pairs with separation ≤ 1.
pub fn empirical_holder_quotient(times: &[f64], values: &[f64], exponent: f64) -> f64 {
    let n = times.len().min(values.len());
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dt = times[j] - times[i];
            if dt > 1.0 {
                break;
            }
            if dt > 0.0 {
                best = best.max((values[j] - values[i]).abs() / dt.powf(exponent));
            }
        }
    }
    best
}

/// Path regularity estimate from the scaling of mean squared increments
/// over dyadic lags: E|ΔY_L|² ∝ L^{2γ}.
pub fn empirical_holder_exponent(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut lag = 1;
    while lag * 8 <= n {
        let sq: Vec<f64> = (0..n - lag)
            .map(|i| (values[i + lag] - values[i]).powi(2))
            .collect();
        let m = crate::stats::mean(&sq);
        if m > 0.0 {
            lx.push((lag as f64 * dt).ln());
            ly.push(m.ln());
        }
        lag *= 2;
    }
    if lx.len() < 2 {
        return f64::NAN;
    }
    0.5 * crate::stats::ols_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_at_origin() {
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.3, 0.9] {
            let want = 0.3 + 0.4 / (2.0 + (-t as f64).exp());
            assert!((f.eval(t, 0.0) - want).abs() < 1e-15);
        }
        assert!((f.l_h - 0.4).abs() < 1e-15);
    }

    #[test]
    fn example_range_is_open() {
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let mut rng = rng::stream(11, 0);
        for _ in 0..1_000_000 {
            let t = rng.gen_range(0.0..1.0);
            let x = rng.gen_range(-20.0..20.0);
            let h = f.eval(t, x);
            assert!(h > 0.3 && h < 0.7, "H({t},{x}) = {h}");
        }
    }

    #[test]
    fn example_validates() {
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let r = validate_response(&f, 100_000).unwrap();
        assert!(r.ok(), "{r:?}");
        assert!(r.spatial_max <= f.l_h + 1e-9);
    }

    #[test]
    fn closed_form_dx_matches_finite_difference() {
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let g = f.clone().without_dx();
        for &(t, x) in &[(0.1, 0.0), (0.5, 0.3), (0.9, -1.2)] {
            assert!((f.dh_dx(t, x) - g.dh_dx(t, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_validates() {
        let f = ResponseFunction::constant(0.5, 1.0).unwrap();
        assert!(validate_response(&f, 1000).unwrap().ok());
    }

    #[test]
    fn mislabeled_lipschitz_is_flagged() {
        let f = ResponseFunction::new(
            Arc::new(|_, x: f64| 0.5 + 0.1 * x.clamp(-1.0, 1.0)),
            None,
            0.05,
            0.0,
            1.0,
            0.4,
            0.6,
            0.1,
            1.0,
        )
        .unwrap();
        let r = validate_response(&f, 10_000).unwrap();
        assert!(r.spatial_violation);
        assert!(!r.range_violation);
    }

    #[test]
    fn validator_rejects_tiny_sample() {
        let f = ResponseFunction::constant(0.5, 1.0).unwrap();
        assert!(validate_response(&f, 10).is_err());
    }

    #[test]
    fn sqrt_control_examples() {
        let mk = |c_h: f64, h_min: f64| {
            HurstFunction::new(Arc::new(move |_| h_min), None, None, 1.0, c_h, h_min, h_min, 1.0)
                .unwrap()
        };
        assert!((sqrt_control_constant(&mk(0.4, 0.5)) - 0.4).abs() < 1e-15);
        assert_eq!(sqrt_control_constant(&HurstFunction::constant(0.6, 1.0).unwrap()), 0.0);
        assert!((sqrt_control_constant(&mk(1.0, 0.125)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_control_holds_on_samples() {
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 2.0).unwrap();
        let d = sqrt_control_constant(&h);
        let mut rng = rng::stream(3, 0);
        for _ in 0..10_000 {
            let eps = 10f64.powf(rng.gen_range(-6.0..-0.5));
            let t = rng.gen_range(0.0..(2.0 - eps));
            let q = ((2.0 * h.eval(t + eps)).sqrt() - (2.0 * h.eval(t)).sqrt()).abs()
                / eps.powf(h.gamma);
            assert!(q <= d + 1e-12);
        }
    }

    #[test]
    fn metadata_is_checked() {
        assert!(HurstFunction::constant(0.0, 1.0).is_err());
        assert!(HurstFunction::constant(1.0, 1.0).is_err());
        assert!(example_response(0.7, 0.3, 1.0, 1.0, 1.0).is_err());
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 10.0).unwrap();
        assert!(h.check_grid(1000).is_ok());
        assert!(h.gamma > h.h_max);
    }

    #[test]
    fn frozen_path_quotient_bounded() {
        // Y(s) = s^{0.4} has Hölder constant 1 with exponent 0.4 on [0,1]
        let f = example_response(0.3, 0.7, 2.0, 1.0, 1.0).unwrap();
        let n = 400;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let hs: Vec<f64> = times.iter().map(|&s| f.eval(s, s.powf(0.4))).collect();
        let expo = f.gamma.min(0.4);
        let q = empirical_holder_quotient(&times, &hs, expo);
        assert!(q <= frozen_path_holder_constant(f.l_h, 1.0, f.c_h));
    }

    #[test]
    fn holder_exponent_of_power_law_increments() {
        // Brownian path: exponent 1/2
        let z = rng::normals(5, 0, 1 << 14, 1.0 / (1 << 14) as f64);
        let mut y = vec![0.0];
        for dz in z {
            y.push(y.last().unwrap() + dz);
        }
        let g = empirical_holder_exponent(&y, 1.0 / (1 << 14) as f64);
        assert!((g - 0.5).abs() < 0.05, "{g}");
    }
}
