//! Reference quadratures, independent of the library's own integrator.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature of f over [a, b].
///
/// `f(x, x - a, b - x)` receives the endpoint distances computed without
/// cancellation, so endpoint power singularities can be evaluated exactly.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 6.0;
    let node = |t: f64| -> Option<(f64, f64, f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let ch = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // 1 - tanh(u) and 1 + tanh(u) without cancellation
        let e = (-2.0 * u.abs()).exp();
        let small = 2.0 * e / (1.0 + e);
        let (da, db) = if u >= 0.0 {
            (half * (2.0 - small), half * small)
        } else {
            (half * small, half * (2.0 - small))
        };
        if w == 0.0 || da <= 0.0 || db <= 0.0 {
            return None;
        }
        Some((a + da, da, db, w))
    };
    let mut h = 0.5;
    let mut sum = 0.0;
    // level 0
    let mut k = 0i64;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        for tt in if k == 0 { vec![0.0] } else { vec![t, -t] } {
            if let Some((x, da, db, w)) = node(tt) {
                sum += w * f(x, da, db);
            }
        }
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1i64;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            for tt in [t, -t] {
                if let Some((x, da, db, w)) = node(tt) {
                    sum += w * f(x, da, db);
                }
            }
            k += 2;
        }
        let next = sum * h * half;
        let done = (next - estimate).abs() <= 1e-15 * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Composite midpoint rule with `panels` panels.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut block = 0.0;
    let mut total = 0.0;
    for i in 0..panels {
        block += f(a + (i as f64 + 0.5) * h);
        if i % 1024 == 1023 {
            total += block;
            block = 0.0;
        }
    }
    (total + block) * h
}

/// ₂F₁ from its Euler integral, valid for c > b > 0 and z < 1.
pub fn hyp2f1_euler(a: f64, b: f64, c: f64, z: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let pref = (ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b)).exp();
    pref * tanh_sinh(
        |x, dx0, dx1| dx0.powf(b - 1.0) * dx1.powf(c - b - 1.0) * (1.0 - z * x).powf(-a),
        0.0,
        1.0,
    )
}

/// ∫₀^u (u−s)^a (v−s)^b ds by tanh-sinh.
pub fn j_integral(a: f64, b: f64, u: f64, v: f64) -> f64 {
    tanh_sinh(|s, _, du| du.powf(a) * (v - s).powf(b), 0.0, u)
}
