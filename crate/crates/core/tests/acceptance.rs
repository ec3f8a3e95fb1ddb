//! Acceptance criteria 1 to 12 at default sizes. Prints one line per
//! criterion and exits nonzero if any fails.

mod common;

use common::oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfbm_lab::hurst::HurstFunction;
use rfbm_lab::specfun;
use rfbm_lab::tvfbm;
use rfbm_lab::verify::{run_acceptance, McReport, SuiteConfig, Verdict};
use std::process::ExitCode;
use std::time::Instant;

const SEED: u64 = 20_241_014;

const TITLES: [&str; 12] = [
    "variance law",
    "classical reduction",
    "covariance consistency",
    "hypergeometric closed form",
    "tail bounds",
    "large deviations",
    "local non-determinism",
    "Lamperti time change",
    "RfBm well-posedness",
    "scaling exponents",
    "memory processes",
    "attention suite",
];

fn oracle_report(id: &str, worst: f64, tol: f64) -> McReport {
    let pass = worst <= tol;
    McReport {
        check_id: id.to_string(),
        target: 0.0,
        estimate: worst,
        se: 0.0,
        tolerance_rule: format!("absolute {tol:e}"),
        threshold: tol,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        runtime_ms: None,
        seed: SEED,
        n: 0,
        note: None,
    }
}

// R(u, v) against tanh-sinh on the defining integral, well-separated pairs
fn covariance_oracle() -> McReport {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = r.gen_range(0.05..1.5);
        let v = u + r.gen_range(0.1..0.5);
        let (hu, hv) = (h.eval(u), h.eval(v));
        let want = 2.0 * (hu * hv).sqrt() * oracle::j_integral(hu - 0.5, hv - 0.5, u, v);
        let got = tvfbm::covariance_quadrature(u, v, &h, 1e-12).unwrap().value;
        worst = worst.max((got - want).abs());
        let got = tvfbm::covariance_quadrature(v, u, &h, 1e-12).unwrap().value;
        worst = worst.max((got - want).abs());
    }
    oracle_report("oracle.covariance_tanh_sinh", worst, 1e-8)
}

// closed forms against tanh-sinh and the Euler integral
fn hypergeometric_oracle() -> Vec<McReport> {
    let mut r = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst_i: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for _ in 0..100 {
        let u = r.gen_range(0.05..1.0);
        let v = u * r.gen_range(2.0..4.0);
        let h = HurstFunction::sinusoidal(r.gen_range(0.65..0.8), r.gen_range(0.0..0.1), r.gen_range(0.2..2.0), v)
            .unwrap();
        let (hu, hv) = (h.eval(u), h.eval(v));
        let want = oracle::j_integral(hu - 1.5, hv - 1.5, u, v);
        let got = tvfbm::cov_hyper_i(u, v, &h).unwrap();
        worst_i = worst_i.max((got - want).abs() / want.abs().max(1.0));
        // the ₂F₁ inside eval_J: F(−b, a+1; a+2; −u/(v−u))
        let (a, b) = (hu - 0.5, hv - 0.5);
        let z = -u / (v - u);
        let want = oracle::hyp2f1_euler(-b, a + 1.0, a + 2.0, z);
        let got = specfun::hyp2f1(-b, a + 1.0, a + 2.0, z).unwrap();
        worst_f = worst_f.max((got - want).abs() / want.abs().max(1.0));
    }
    vec![
        oracle_report("oracle.cov_hyper_i_tanh_sinh", worst_i, 1e-7),
        oracle_report("oracle.hyp2f1_euler", worst_f, 1e-7),
    ]
}

fn main() -> ExitCode {
    // `cargo test -- --list` style probes pass extra args; a listing run does nothing
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let cfg = SuiteConfig::default();
    let mut failed = 0;
    for k in 1..=12u8 {
        let start = Instant::now();
        let mut reps = match run_acceptance(k, &cfg, SEED) {
            Ok(r) => r,
            Err(e) => {
                println!("criterion {k:02} FAIL {}: {e}", TITLES[k as usize - 1]);
                failed += 1;
                continue;
            }
        };
        match k {
            3 => reps.push(covariance_oracle()),
            4 => reps.extend(hypergeometric_oracle()),
            _ => {}
        }
        let bad: Vec<&McReport> = reps.iter().filter(|r| !r.passed()).collect();
        let pass = !reps.is_empty() && bad.is_empty();
        println!(
            "criterion {k:02} {} {} ({}/{} checks, {:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            TITLES[k as usize - 1],
            reps.len() - bad.len(),
            reps.len(),
            start.elapsed().as_secs_f64()
        );
        for r in &bad {
            println!(
                "    {} estimate {:e} target {:e} threshold {:e} ({}) {}",
                r.check_id,
                r.estimate,
                r.target,
                r.threshold,
                r.tolerance_rule,
                r.note.as_deref().unwrap_or("")
            );
        }
        if !pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
