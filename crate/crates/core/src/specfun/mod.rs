//! Special functions and Gaussian tail bounds.

mod erf;

pub use erf::{erf, erfc};

use crate::error::{domain, LabError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Mills-ratio sandwich for the standard normal tail at `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub z: f64,
    pub upper: f64,
    pub lower: f64,
    pub exact: f64,
}

// Lanczos g=7, n=9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * acc
}

/// Gamma function for positive arguments.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("gamma_fn requires x > 0, got {x}"));
    }
    Ok(gamma_unchecked(x))
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// 1 - Φ(z).
pub fn normal_tail(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// ln(1 - Φ(z)), accurate far into the tail.
pub fn ln_normal_tail(z: f64) -> f64 {
    if z <= 35.0 {
        return normal_tail(z).ln();
    }
    // asymptotic series; at z > 35 the first omitted term is below 1e-15
    let w = 1.0 / (z * z);
    let series = 1.0 - w * (1.0 - 3.0 * w * (1.0 - 5.0 * w * (1.0 - 7.0 * w)));
    -0.5 * z * z - z.ln() - LN_SQRT_2PI + series.ln()
}

/// Exact tail with the Mills upper bound and the refined lower bound.
pub fn mills_bounds(z: f64) -> Result<TailBound> {
    if !(z >= 1.0) || !z.is_finite() {
        return domain(format!("mills_bounds requires z >= 1, got {z}"));
    }
    let upper = normal_pdf(z) / z;
    Ok(TailBound {
        z,
        upper,
        lower: upper * (1.0 - 1.0 / (z * z)),
        exact: normal_tail(z),
    })
}

/// K such that |ln x| ≤ K x^{-δ} on (0,1] and |ln x| ≤ K x^α on (1,∞).
pub fn log_control_constant(delta: f64, alpha: f64) -> Result<f64> {
    if !(delta > 0.0) || !(alpha > 0.0) {
        return domain(format!(
            "log_control_constant requires positive arguments, got ({delta}, {alpha})"
        ));
    }
    Ok((1.0 / (delta * E)).max(1.0 / alpha))
}

const HYP_MAX_ITER: usize = 100_000;

fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..HYP_MAX_ITER {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0));
        term *= ratio * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // only trust the stopping test once the terms are shrinking
        if term.abs() < 1e-16 * sum.abs() && (ratio * z).abs() < 1.0 {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(LabError::NonConvergence {
        what: format!("2F1({a}, {b}; {c}; {z}) series"),
        iterations: HYP_MAX_ITER,
        residuals: vec![term.abs()],
    })
}

/// Gauss hypergeometric function on z ∈ [-1, 1).
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if c <= 0.0 && c == c.round() {
        return domain(format!("2F1 undefined for c = {c}"));
    }
    if !(z < 1.0) || z < -1.0 || !z.is_finite() {
        return domain(format!("2F1 evaluated only on [-1, 1), got z = {z}"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z < -0.5 {
        // Pfaff: maps [-1, -0.5) into [1/3, 1/2)
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * hyp2f1_series(a, c - b, c, w)?);
    }
    hyp2f1_series(a, b, c, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_examples() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-13);
        assert!(rel(gamma_fn(4.0).unwrap(), 6.0) < 1e-13);
        assert!(rel(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516) < 1e-13);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_against_statrs() {
        for i in 1..400 {
            let x = i as f64 * 0.05;
            let g = gamma_fn(x).unwrap();
            assert!(rel(g, statrs::function::gamma::gamma(x)) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn gamma_recurrence() {
        for x in [0.3, 0.75, 1.5, 3.2] {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-11);
        }
    }

    #[test]
    fn erfc_reference_values() {
        // 30-digit reference values
        let table = [
            (0.1, 0.887_537_083_981_715_1),
            (0.502_045_814_642_448_7, 0.477_704_136_179_973_5),
            (0.9, 0.203_091_787_577_167_86),
            (1.3, 0.065_992_055_059_347_554),
            (2.5, 0.000_406_952_017_444_958_94),
            (4.0, 1.541_725_790_028_002e-8),
            (6.0, 2.151_973_671_249_891_3e-17),
            (8.485, 3.570_086_992_907_264e-33),
            (15.0, 7.212_994_172_451_207e-100),
            (25.0, 8.300_172_571_196_523e-274),
        ];
        for (x, want) in table {
            assert!(rel(erfc(x), want) < 1e-14, "x={x}");
        }
    }

    #[test]
    fn erfc_against_statrs() {
        for i in 0..=1200 {
            let x = i as f64 * 0.01 / SQRT_2;
            let theirs = statrs::function::erf::erfc(x);
            assert!(rel(erfc(x), theirs) < 1e-8, "x={x}");
        }
    }

    #[test]
    fn mills_examples() {
        let b1 = mills_bounds(1.0).unwrap();
        assert!((b1.exact - 0.158_655_25).abs() < 1e-8);
        assert!((b1.upper - 0.241_970_72).abs() < 1e-8);
        assert_eq!(b1.lower, 0.0);
        let b2 = mills_bounds(2.0).unwrap();
        assert!((b2.exact - 0.022_750_13).abs() < 1e-8);
        assert!((b2.upper - 0.026_995_48).abs() < 1e-8);
        assert!((b2.lower - 0.020_246_61).abs() < 1e-8);
        let b10 = mills_bounds(10.0).unwrap();
        let r = b10.upper / b10.exact;
        assert!(r > 1.0 && r < 1.02);
        assert!(mills_bounds(0.99).is_err());
    }

    #[test]
    fn ln_tail_switch_is_continuous() {
        let below = normal_tail(35.0).ln();
        let w = 1.0 / (35.0f64 * 35.0);
        let series = 1.0 - w * (1.0 - 3.0 * w * (1.0 - 5.0 * w * (1.0 - 7.0 * w)));
        let above = -0.5 * 35.0 * 35.0 - 35.0f64.ln() - LN_SQRT_2PI + series.ln();
        assert!(rel(below, above) < 1e-13);
        assert!(ln_normal_tail(1e4).is_finite());
    }

    #[test]
    fn log_control_examples() {
        assert_eq!(log_control_constant(0.5, 1.0).unwrap(), 1.0);
        assert_eq!(log_control_constant(1.0, 1.0).unwrap(), 1.0);
        assert!((log_control_constant(0.1, 2.0).unwrap() - 3.678_794_411_714_423).abs() < 1e-12);
        assert!(log_control_constant(0.0, 1.0).is_err());
        assert!(log_control_constant(1.0, -1.0).is_err());
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1(0.7, 0.3, 1.1, 0.0).unwrap(), 1.0);
        assert!((hyp2f1(1.0, 1.0, 2.0, -1.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-14);
        for z in [-0.9, -0.6, -0.3, 0.2, 0.7] {
            let closed = -(1.0f64 - z).ln() / z;
            assert!(rel(hyp2f1(1.0, 1.0, 2.0, z).unwrap(), closed) < 1e-13, "z={z}");
        }
        // terminating polynomial: 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1)z²/(c(c+1))
        let (b, c, z) = (0.4, 1.3, -0.8);
        let poly = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert!(rel(hyp2f1(-2.0, b, c, z).unwrap(), poly) < 1e-14);
    }

    #[test]
    fn hyp2f1_domain() {
        assert!(hyp2f1(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(hyp2f1(1.0, 1.0, 2.0, -1.2).is_err());
        assert!(hyp2f1(1.0, 1.0, -2.0, 0.3).is_err());
    }
}
