//! Covariance of TV-fBm: quadrature, bounds and hypergeometric forms.

use crate::error::{domain, Result};
use crate::hurst::HurstFunction;
use crate::quad;
use crate::specfun::hyp2f1;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovMethod {
    Quadrature,
    Hypergeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceResult {
    pub u: f64,
    pub v: f64,
    pub value: f64,
    pub method: CovMethod,
    pub est_error: f64,
}

/// R(u,v) = 2√(H(u)H(v)) ∫₀^{min(u,v)} (u−s)^{H(u)−1/2}(v−s)^{H(v)−1/2} ds.
pub fn covariance_quadrature(u: f64, v: f64, h: &HurstFunction, tol: f64) -> Result<CovarianceResult> {
    if u < 0.0 || v < 0.0 || u > h.horizon * (1.0 + 1e-12) || v > h.horizon * (1.0 + 1e-12) {
        return domain(format!("covariance needs 0 <= u, v <= T, got ({u}, {v})"));
    }
    let (hu, hv) = (h.eval(u), h.eval(v));
    let pref = 2.0 * (hu * hv).sqrt();
    let (lo, hi, a, b) = if u <= v {
        (u, v, hu - 0.5, hv - 0.5)
    } else {
        (v, u, hv - 0.5, hu - 0.5)
    };
    let mk = |value: f64, est_error: f64| CovarianceResult {
        u,
        v,
        value,
        method: CovMethod::Quadrature,
        est_error,
    };
    if lo == 0.0 {
        return Ok(mk(0.0, 0.0));
    }
    if lo == hi {
        // (u−s)^{2H−1}: the substitution integrates it exactly
        let r = quad::integrate_endpoint_power(|_| 1.0, lo, a + b, a + b + 1.0, tol / pref, 0.0)?;
        return Ok(mk(pref * r.value, pref * r.est_error));
    }
    // near-coincident u, v with b < 0 make (hi−s)^b nearly singular as well
    let p = if b < 0.0 { (a + 1.0).min(a + b + 1.0) } else { a + 1.0 };
    let r = quad::integrate_endpoint_power(|s| (hi - s).powf(b), lo, a, p, tol / pref, 0.0)?;
    Ok(mk(pref * r.value, pref * r.est_error))
}

/// Covariance from the J closed form; needs max ≥ 2·min.
pub fn covariance_hypergeometric(u: f64, v: f64, h: &HurstFunction) -> Result<CovarianceResult> {
    let (lo, hi) = (u.min(v), u.max(v));
    let (a, b) = (h.eval(lo) - 0.5, h.eval(hi) - 0.5);
    let value = 2.0 * (h.eval(u) * h.eval(v)).sqrt() * eval_j(a, b, lo, hi)?;
    Ok(CovarianceResult {
        u,
        v,
        value,
        method: CovMethod::Hypergeometric,
        est_error: value.abs() * 1e-10,
    })
}

/// Covariance matrix on the given times.
pub fn covariance_matrix(times: &[f64], h: &HurstFunction, tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = times.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let r = covariance_quadrature(times[i], times[j], h, tol)?.value;
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceBounds {
    pub lower: f64,
    pub upper: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub j_lower: f64,
    pub j_upper: f64,
}

// ∫₀¹ σ^c (1+σ)^d dσ
fn unit_piece(c: f64, d: f64) -> Result<f64> {
    // reflect so the σ = 0 singularity sits at the substitution endpoint
    Ok(quad::integrate_endpoint_power(|s| (2.0 - s).powf(d), 1.0, c, c + 1.0, 1e-14, 1e-13)?.value)
}

// ∫₁^L σ^c (1+σ)^d dσ
fn tail_piece(c: f64, d: f64, l: f64) -> Result<f64> {
    if l <= 1.0 {
        return Ok(0.0);
    }
    Ok(quad::integrate(|s: f64| s.powf(c) * (1.0 + s).powf(d), 1.0, l, 1e-14, 1e-13, 50_000)?.value)
}

/// Sandwich for R(t, t+ε) from the extremal exponents on [t, t+ε].
pub fn covariance_bounds(t: f64, eps: f64, h: &HurstFunction) -> Result<CovarianceBounds> {
    if !(eps > 0.0 && eps < t) {
        return domain(format!("covariance bounds need 0 < eps < t, got t={t}, eps={eps}"));
    }
    if t + eps > h.horizon * (1.0 + 1e-12) {
        return domain("t + eps exceeds the horizon");
    }
    let (ht, hte) = (h.eval(t), h.eval(t + eps));
    let (hm, hp) = (ht.min(hte), ht.max(hte));
    let l = t / eps;
    let j_lower = unit_piece(hp - 0.5, hm - 0.5)? + tail_piece(hm - 0.5, hm - 0.5, l)?;
    let j_upper = unit_piece(hm - 0.5, hp - 0.5)? + tail_piece(hp - 0.5, hp - 0.5, l)?;
    let pref = 2.0 * (ht * hte).sqrt() * eps.powf(ht + hte);
    Ok(CovarianceBounds {
        lower: pref * j_lower,
        upper: pref * j_upper,
        h_minus: hm,
        h_plus: hp,
        j_lower,
        j_upper,
    })
}

/// J(a,b) = ∫₀^u (u−s)^a (v−s)^b ds via ₂F₁, for v ≥ 2u.
pub fn eval_j(a: f64, b: f64, u: f64, v: f64) -> Result<f64> {
    if !(a > -1.0 && b > -1.0) {
        return domain(format!("J needs a, b > -1, got ({a}, {b})"));
    }
    if !(u > 0.0 && v >= 2.0 * u) {
        return domain(format!("J needs 0 < u and v >= 2u, got ({u}, {v})"));
    }
    let w = v - u;
    let z = -u / w;
    Ok(u.powf(a + 1.0) * w.powf(b) / (a + 1.0) * hyp2f1(-b, a + 1.0, a + 2.0, z)?)
}

/// Closed form of ∫₀^u (u−s)^{H(u)−3/2}(v−s)^{H(v)−3/2} ds.
pub fn cov_hyper_i(u: f64, v: f64, h: &HurstFunction) -> Result<f64> {
    let (hu, hv) = (h.eval(u), h.eval(v));
    if !(hu > 0.5 && hv > 0.5) {
        return domain("cov_hyper_i needs H(u), H(v) > 1/2");
    }
    eval_j(hu - 1.5, hv - 1.5, u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedTerms {
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub bound: f64,
    pub within: bool,
}

struct Coef {
    sqrt2h: f64,
    dh: f64,
}

impl Coef {
    fn new(h: &HurstFunction, dh: &dyn Fn(f64) -> f64, x: f64) -> Self {
        Self {
            sqrt2h: (2.0 * h.eval(x)).sqrt(),
            dh: dh(x),
        }
    }
    // √(2H)H′ ln(x−s) + H′/√(2H)
    fn log_coef(&self, gap: f64) -> f64 {
        self.sqrt2h * self.dh * gap.ln() + self.dh / self.sqrt2h
    }
}

/// K(u,s)·∂_vK(v,s) at a point s < u.
pub fn boundary_term(u: f64, v: f64, s: f64, h: &HurstFunction, dh: &dyn Fn(f64) -> f64) -> f64 {
    let (hu, hv) = (h.eval(u), h.eval(v));
    let cv = Coef::new(h, dh, v);
    let k_u = (2.0 * hu).sqrt() * (u - s).powf(hu - 0.5);
    let a_v = cv.sqrt2h * (hv - 0.5);
    let dk_v = (v - s).powf(hv - 1.5) * (a_v + cv.log_coef(v - s) * (v - s));
    k_u * dk_v
}

/// The three non-dominant terms of the mixed covariance derivative and the
/// majorant assembled from J with |ln x| ≤ x^{−1/2} + x.
pub fn mixed_derivative_terms(
    u: f64,
    v: f64,
    h: &HurstFunction,
    dh: &dyn Fn(f64) -> f64,
    l_h: f64,
) -> Result<MixedTerms> {
    let (hu, hv) = (h.eval(u), h.eval(v));
    if !(hu > 0.5 && hv > 0.5) {
        return domain("mixed_derivative_terms needs H(u), H(v) > 1/2");
    }
    if !(u > 0.0 && v >= 2.0 * u) {
        return domain("mixed_derivative_terms needs v >= 2u > 0");
    }
    let cu = Coef::new(h, dh, u);
    let cv = Coef::new(h, dh, v);
    let c_u = cu.sqrt2h * (hu - 0.5);
    let a_v = cv.sqrt2h * (hv - 0.5);
    let tol = 1e-13;

    let i2 = c_u
        * quad::integrate_endpoint_power(
            |s| cv.log_coef(v - s) * (v - s).powf(hv - 0.5),
            u,
            hu - 1.5,
            hu - 0.5,
            tol,
            1e-12,
        )?
        .value;
    let i3 = a_v
        * quad::integrate_endpoint_power(
            |s| cu.log_coef(u - s) * (v - s).powf(hv - 1.5),
            u,
            hu - 0.5,
            hu + 0.5,
            tol,
            1e-12,
        )?
        .value;
    let i4 = quad::integrate_endpoint_power(
        |s| cu.log_coef(u - s) * cv.log_coef(v - s) * (v - s).powf(hv - 0.5),
        u,
        hu - 0.5,
        hu + 0.5,
        tol,
        1e-12,
    )?
    .value;

    let j = |a: f64, b: f64| eval_j(a, b, u, v);
    let (au, bu) = (cu.sqrt2h * l_h, l_h / cu.sqrt2h);
    let (av, bv) = (cv.sqrt2h * l_h, l_h / cv.sqrt2h);
    let m2 = c_u.abs()
        * (av * (j(hu - 1.5, hv - 1.0)? + j(hu - 1.5, hv + 0.5)?) + bv * j(hu - 1.5, hv - 0.5)?);
    let m3 = a_v.abs()
        * (au * (j(hu - 1.0, hv - 1.5)? + j(hu + 0.5, hv - 1.5)?) + bu * j(hu - 0.5, hv - 1.5)?);
    let m4 = au * av
        * (j(hu - 1.0, hv - 1.0)? + j(hu - 1.0, hv + 0.5)? + j(hu + 0.5, hv - 1.0)? + j(hu + 0.5, hv + 0.5)?)
        + au * bv * (j(hu - 1.0, hv - 0.5)? + j(hu + 0.5, hv - 0.5)?)
        + bu * av * (j(hu - 0.5, hv - 1.0)? + j(hu - 0.5, hv + 0.5)?)
        + bu * bv * j(hu - 0.5, hv - 0.5)?;
    let bound = m2.max(m3).max(m4);
    let slack = 1.0 + 1e-9;
    Ok(MixedTerms {
        i2,
        i3,
        i4,
        bound,
        within: i2.abs() <= bound * slack && i3.abs() <= bound * slack && i4.abs() <= bound * slack,
    })
}

#[cfg(test)]
mod tests {
    use super::super::oracle;
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn sin_h(horizon: f64) -> HurstFunction {
        HurstFunction::sinusoidal(0.5, 0.2, 1.0, horizon).unwrap()
    }

    #[test]
    fn brownian_covariance_is_min() {
        let h = HurstFunction::constant(0.5, 3.0).unwrap();
        for &(u, v) in &[(0.3, 1.7), (2.0, 0.4), (1.0, 1.0), (0.0, 2.0)] {
            let r = covariance_quadrature(u, v, &h, 1e-12).unwrap();
            assert!((r.value - f64::min(u, v)).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_recovers_variance() {
        let h = sin_h(3.0);
        for t in [0.1, 0.7, 1.3, 2.9] {
            let r = covariance_quadrature(t, t, &h, 1e-12).unwrap();
            assert!((r.value - t.powf(2.0 * h.eval(t))).abs() < 1e-8);
        }
    }

    #[test]
    fn covariance_vs_midpoint_oracle() {
        let h = HurstFunction::constant(0.75, 2.0).unwrap();
        let r = covariance_quadrature(0.5, 1.5, &h, 1e-12).unwrap();
        let mid = 2.0 * 0.75 * oracle::midpoint(|s| (0.5 - s).powf(0.25) * (1.5 - s).powf(0.25), 0.0, 0.5, 10_000_000);
        assert!((r.value - mid).abs() < 1e-7);
    }

    #[test]
    fn symmetric_and_consistent_with_closed_form() {
        let h = sin_h(3.0);
        let a = covariance_quadrature(0.6, 2.1, &h, 1e-12).unwrap();
        let b = covariance_quadrature(2.1, 0.6, &h, 1e-12).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        let c = covariance_hypergeometric(0.6, 2.1, &h).unwrap();
        assert!((a.value - c.value).abs() < 1e-10);
    }

    #[test]
    fn near_coincident_times() {
        let h = HurstFunction::constant(0.3, 2.0).unwrap();
        let d = 1e-9;
        let r = covariance_quadrature(1.0, 1.0 + d, &h, 1e-12).unwrap();
        let want = 2.0 * 0.3 * oracle::tanh_sinh(|_, _, du| du.powf(-0.2) * (du + d).powf(-0.2), 0.0, 1.0);
        assert!((r.value - want).abs() < 1e-8, "{} {want}", r.value);
    }

    #[test]
    fn bounds_sandwich() {
        let h = sin_h(2.0);
        let b = covariance_bounds(1.0, 0.25, &h).unwrap();
        let r = covariance_quadrature(1.0, 1.25, &h, 1e-12).unwrap().value;
        assert!(b.lower <= r && r <= b.upper, "{b:?} {r}");
        assert_eq!(b.h_minus, h.eval(1.0).min(h.eval(1.25)));
        let c = HurstFunction::constant(0.7, 2.0).unwrap();
        let b = covariance_bounds(1.0, 0.25, &c).unwrap();
        let r = covariance_quadrature(1.0, 1.25, &c, 1e-12).unwrap().value;
        assert!((b.lower - r).abs() < 1e-10 && (b.upper - r).abs() < 1e-10);
        assert!(covariance_bounds(0.2, 0.25, &h).is_err());
    }

    #[test]
    fn j_examples() {
        assert!((eval_j(0.0, 0.0, 0.7, 2.0).unwrap() - 0.7).abs() < 1e-14);
        assert!((eval_j(0.0, 1.0, 1.0, 3.0).unwrap() - 2.5).abs() < 1e-14);
        let want = oracle::j_integral(-0.25, -0.25, 1.0, 2.5);
        assert!((eval_j(-0.25, -0.25, 1.0, 2.5).unwrap() - want).abs() < 1e-8);
        assert!(eval_j(0.0, 0.0, 1.0, 1.5).is_err());
        assert!(eval_j(-1.0, 0.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn j_random_against_oracle() {
        let mut rng = rng::stream(101, 0);
        for _ in 0..100 {
            let a = rng.gen_range(-0.9..1.5);
            let b = rng.gen_range(-0.9..1.5);
            let u = rng.gen_range(0.05..1.0);
            let v = u * rng.gen_range(2.0..6.0);
            let got = eval_j(a, b, u, v).unwrap();
            let want = oracle::j_integral(a, b, u, v);
            assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{a} {b} {u} {v}");
        }
    }

    #[test]
    fn hyper_i_examples() {
        let h = HurstFunction::constant(0.75, 2.0).unwrap();
        for &(u, v) in &[(0.4, 1.0), (0.5, 1.0)] {
            let got = cov_hyper_i(u, v, &h).unwrap();
            let want = oracle::j_integral(-0.75, -0.75, u, v);
            assert!((got - want).abs() < 1e-7 * want.abs().max(1.0));
        }
        let c: f64 = 1.7;
        let base = cov_hyper_i(0.3, 0.8, &h).unwrap();
        let scaled = cov_hyper_i(0.3 * c, 0.8 * c, &h).unwrap();
        assert!((scaled - c.powf(1.5 - 2.0) * base).abs() < 1e-12);
        let low = HurstFunction::constant(0.4, 2.0).unwrap();
        assert!(cov_hyper_i(0.4, 1.0, &low).is_err());
    }

    #[test]
    fn mixed_terms_vanish_for_constant_h() {
        let h = HurstFunction::constant(0.7, 2.0).unwrap();
        let m = mixed_derivative_terms(0.3, 0.9, &h, &|_| 0.0, 0.0).unwrap();
        assert_eq!((m.i2, m.i3, m.i4), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mixed_terms_bounded_linear_h() {
        let h = HurstFunction::linear(0.6, 0.1, 1.0).unwrap();
        let m = mixed_derivative_terms(0.3, 0.9, &h, &|_| 0.1, 0.1).unwrap();
        assert!(m.within, "{m:?}");
        assert!(m.i2 != 0.0 && m.i3 != 0.0 && m.i4 != 0.0);
        // I₂ against an oracle integration
        let (hu, hv) = (h.eval(0.3), h.eval(0.9));
        let s2v = (2.0 * hv).sqrt();
        let want = (2.0 * hu).sqrt() * (hu - 0.5)
            * oracle::tanh_sinh(
                |s, _, du| (s2v * 0.1 * (0.9 - s).ln() + 0.1 / s2v) * du.powf(hu - 1.5) * (0.9 - s).powf(hv - 0.5),
                0.0,
                0.3,
            );
        assert!((m.i2 - want).abs() < 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn boundary_term_vanishes() {
        let h = HurstFunction::linear(0.6, 0.1, 1.0).unwrap();
        let first = boundary_term(0.3, 0.9, 0.3 - 1e-2, &h, &|_| 0.1).abs();
        let mut prev = f64::INFINITY;
        for k in 2..16 {
            let s = 0.3 - 10f64.powi(-k);
            let b = boundary_term(0.3, 0.9, s, &h, &|_| 0.1).abs();
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < 0.05 * first);
    }
}
