//! Time change φ with φ' = φ/(H(φ) + φ ln φ H′(φ)), so that α = φ^{−H(φ)}
//! solves α' = −α.

use crate::error::{domain, LabError, Result};
use crate::hurst::HurstFunction;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LampertiPoint {
    pub t: f64,
    pub phi: f64,
    pub alpha: f64,
}

const DEGENERACY: f64 = 1e-6;

fn rhs(h: &HurstFunction, t: f64, phi: f64) -> Result<f64> {
    let dh = h.deriv(phi).unwrap_or(0.0);
    let den = h.eval(phi) + phi * phi.ln() * dh;
    if den.abs() < DEGENERACY || !den.is_finite() {
        return Err(LabError::Degeneracy { t, value: den });
    }
    Ok(phi / den)
}

fn rk4(h: &HurstFunction, t: f64, y: f64, dt: f64) -> Result<f64> {
    let k1 = rhs(h, t, y)?;
    let k2 = rhs(h, t + 0.5 * dt, y + 0.5 * dt * k1)?;
    let k3 = rhs(h, t + 0.5 * dt, y + 0.5 * dt * k2)?;
    let k4 = rhs(h, t + dt, y + dt * k3)?;
    Ok(y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Fixed-step RK4 with a step-doubling error monitor at relative `tol`.
pub fn lamperti_solve_tol(
    h: &HurstFunction,
    phi0: f64,
    t_end: f64,
    step: f64,
    tol: f64,
) -> Result<Vec<LampertiPoint>> {
    if !h.has_derivatives() {
        return domain("Lamperti solve needs H, H′ and H″");
    }
    if !(phi0 > 0.0) || !(step > 0.0) || !(t_end > 0.0) {
        return domain("Lamperti solve needs phi0, step, t_end > 0");
    }
    let n = (t_end / step).round().max(1.0) as usize;
    let dt = t_end / n as f64;
    let point = |t: f64, phi: f64| LampertiPoint {
        t,
        phi,
        alpha: phi.powf(-h.eval(phi)),
    };
    let mut out = Vec::with_capacity(n + 1);
    let mut phi = phi0;
    rhs(h, 0.0, phi)?;
    out.push(point(0.0, phi));
    for k in 0..n {
        let t = k as f64 * dt;
        let full = rk4(h, t, phi, dt)?;
        let half = rk4(h, t + 0.5 * dt, rk4(h, t, phi, 0.5 * dt)?, 0.5 * dt)?;
        let estimate = (half - full).abs() / 15.0;
        if estimate > tol * half.abs().max(1.0) {
            return Err(LabError::StepSize {
                t,
                estimate,
                tol: tol * half.abs().max(1.0),
            });
        }
        phi = half;
        out.push(point((k + 1) as f64 * dt, phi));
    }
    Ok(out)
}

pub fn lamperti_solve(h: &HurstFunction, phi0: f64, t_end: f64, step: f64) -> Result<Vec<LampertiPoint>> {
    lamperti_solve_tol(h, phi0, t_end, step, 1e-9)
}

/// φ^{−2H(φ)}·φ^{2H(φ)}, the two factors of Var(X_t) evaluated separately.
pub fn variance_normalization(h: &HurstFunction, phi: f64) -> f64 {
    let e = 2.0 * h.eval(phi);
    phi.powf(-e) * phi.powf(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn constant_h_is_exponential() {
        for h0 in [0.3, 0.5, 0.8] {
            let h = HurstFunction::constant(h0, 1.0).unwrap();
            let phi0 = 1.3;
            let traj = lamperti_solve(&h, phi0, 1.0, 1e-3).unwrap();
            for p in &traj {
                let phi = phi0 * (p.t / h0).exp();
                assert!(((p.phi - phi) / phi).abs() < 1e-8);
                let alpha = phi0.powf(-h0) * (-p.t).exp();
                assert!((p.alpha - alpha).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn alpha_decays_at_unit_rate() {
        let h = HurstFunction::sinusoidal(0.5, 0.2, 0.1, 10.0).unwrap();
        let step = 1e-3;
        let traj = lamperti_solve(&h, 1.0, 1.0, step).unwrap();
        let amax = traj.iter().map(|p| p.alpha.abs()).fold(0.0, f64::max);
        for w in traj.windows(3) {
            let fd = (w[2].alpha - w[0].alpha) / (2.0 * step);
            assert!((fd + w[1].alpha).abs() <= amax * step * step);
        }
    }

    #[test]
    fn normalization_product() {
        let h = HurstFunction::sinusoidal(0.5, 0.2, 0.1, 10.0).unwrap();
        for p in lamperti_solve(&h, 1.0, 1.0, 1e-2).unwrap() {
            assert!((variance_normalization(&h, p.phi) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degeneracy_is_detected() {
        // H(φ) = c₀ − cφ with the denominator vanishing exactly at φ = e
        let c = 0.5 / (2.0 * std::f64::consts::E - 1.0);
        let h = HurstFunction::linear(0.5 + c, -c, 3.0).unwrap();
        let r = lamperti_solve(&h, std::f64::consts::E, 1.0, 1e-3);
        assert!(matches!(r, Err(LabError::Degeneracy { .. })), "{r:?}");
        let near = lamperti_solve_tol(&h, 1.0, 5.0, 1e-3, 1.0);
        assert!(matches!(near, Err(LabError::Degeneracy { .. })), "{near:?}");
    }

    #[test]
    fn missing_derivatives_rejected() {
        let h = HurstFunction::new(Arc::new(|_| 0.6), None, None, 1.0, 0.0, 0.6, 0.6, 1.0).unwrap();
        assert!(lamperti_solve(&h, 1.0, 1.0, 1e-2).is_err());
    }

    #[test]
    fn coarse_step_trips_monitor() {
        let h = HurstFunction::constant(0.3, 1.0).unwrap();
        let r = lamperti_solve_tol(&h, 1.0, 1.0, 0.5, 1e-10);
        assert!(matches!(r, Err(LabError::StepSize { .. })));
    }
}
