//! Property tests for the module invariants.

mod common;

use common::oracle;
use proptest::prelude::*;
use rfbm_lab::attention::{self, Interval};
use rfbm_lab::cli::RunConfig;
use rfbm_lab::hurst::{example_response, sqrt_control_constant, HurstFunction, HurstSpec, ResponseFunction};
use rfbm_lab::rfbm::{self, KernelConvention, SolveOptions};
use rfbm_lab::specfun;
use rfbm_lab::stats;
use rfbm_lab::tvfbm::{self, TimeGrid};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn panel_weight_lies_between_endpoint_kernels(
        h in 0.05f64..0.95, a in 0.0f64..0.9, w in 1e-4f64..0.05, gap in 0.0f64..0.5,
    ) {
        let b = a + w;
        let t = b + gap;
        let pw = tvfbm::panel_weight(t, a, b, h);
        let ka = tvfbm::kernel_tv(t, a, h).unwrap();
        prop_assert!(pw > 0.0);
        if gap > 0.0 {
            let kb = tvfbm::kernel_tv(t, b, h).unwrap();
            let (lo, hi) = if ka < kb { (ka, kb) } else { (kb, ka) };
            prop_assert!(pw >= lo * (1.0 - 1e-12) && pw <= hi * (1.0 + 1e-12));
        }
    }

    // beyond z ≈ 37.5 all three sides underflow to zero
    #[test]
    fn mills_sandwich(z in 1.0f64..37.0) {
        let b = specfun::mills_bounds(z).unwrap();
        prop_assert!(b.lower < b.exact && b.exact < b.upper, "{b:?}");
    }

    #[test]
    fn covariance_symmetric(u in 0.01f64..2.0, v in 0.01f64..2.0) {
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 2.0).unwrap();
        let a = tvfbm::covariance_quadrature(u, v, &h, 1e-12).unwrap().value;
        let b = tvfbm::covariance_quadrature(v, u, &h, 1e-12).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn eval_j_matches_tanh_sinh(a in -0.9f64..1.5, b in -0.9f64..1.5, u in 0.05f64..1.5, r in 2.0f64..5.0) {
        let v = u * r;
        let got = tvfbm::eval_j(a, b, u, v).unwrap();
        let want = oracle::j_integral(a, b, u, v);
        prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn sqrt_control_holds(base in 0.3f64..0.7, amp in 0.0f64..0.2, freq in 0.1f64..3.0, t in 0.0f64..1.0, e in 1e-6f64..0.5) {
        let h = HurstFunction::sinusoidal(base, amp, freq, 2.0).unwrap();
        let d = sqrt_control_constant(&h);
        let q = ((2.0 * h.eval(t + e)).sqrt() - (2.0 * h.eval(t)).sqrt()).abs() / e.powf(h.gamma);
        prop_assert!(q <= d + 1e-12);
    }

    #[test]
    fn lamperti_normalization_is_one(phi in 1e-3f64..100.0) {
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 200.0).unwrap();
        prop_assert!((tvfbm::variance_normalization(&h, phi) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pairwise_sum_close_to_exact(xs in prop::collection::vec(-1e3f64..1e3, 0..400)) {
        let exact: f64 = xs.iter().sum();
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((stats::pairwise_sum(&xs) - exact).abs() <= 1e-12 * scale);
    }

    #[test]
    fn interval_cells_partition_the_line(c in prop::collection::vec(-2.0f64..2.0, 3), x in -3.0f64..3.0) {
        let mut c = c;
        c.sort_by(f64::total_cmp);
        let cells = [
            Interval::new(None, Some(c[0])),
            Interval::new(Some(c[0]), Some(c[1])),
            Interval::new(Some(c[1]), Some(c[2])),
            Interval::new(Some(c[2]), None),
        ];
        prop_assert_eq!(cells.iter().filter(|i| i.contains(x)).count(), 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn target_sampler_matches_full_path(seed in any::<u64>(), path in 0u64..100, k in 1usize..64) {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let h = HurstFunction::sinusoidal(0.5, 0.2, 1.0, 1.0).unwrap();
        let full = tvfbm::simulate_tvfbm_stream(&grid, &h, seed, path).unwrap();
        let s = tvfbm::TargetSampler::new(&grid, &h, &[k, 64]).unwrap();
        let got = s.sample(seed, path);
        prop_assert_eq!(got[0].to_bits(), full.values[k].to_bits());
        prop_assert_eq!(got[1].to_bits(), full.values[64].to_bits());
    }

    #[test]
    fn constant_response_reduces_to_tvfbm(seed in any::<u64>(), h0 in 0.1f64..0.9) {
        let grid = TimeGrid::new(1.0, 48).unwrap();
        let f = ResponseFunction::constant(h0, 1.0).unwrap();
        let h = HurstFunction::constant(h0, 1.0).unwrap();
        let want = tvfbm::simulate_tvfbm_stream(&grid, &h, seed, 0).unwrap();
        for convention in [KernelConvention::StateAtSource, KernelConvention::EvaluationTime] {
            let opts = SolveOptions { convention, ..SolveOptions::default() };
            let sol = rfbm::solve_rfbm_stream(&grid, &f, seed, 0, &opts).unwrap();
            prop_assert_eq!(sol.iterations, 2);
            for (a, b) in sol.path.iter().zip(&want.values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn attention_is_a_density(seed in any::<u64>(), j in 1usize..=64) {
        let grid = TimeGrid::new(2.0, 64).unwrap();
        let f = example_response(0.3, 0.7, 2.0, 1.0, 2.0).unwrap();
        let sol = rfbm::solve_rfbm(&grid, &f, seed, 1e-9, 64).unwrap();
        prop_assert!(sol.alpha.iter().all(|&a| a >= f.h_min && a <= f.h_max));
        let p = attention::attention_profile(&sol, &f, grid.points[j]).unwrap();
        prop_assert!((p.normalization - 1.0).abs() <= 1e-8);
        prop_assert!(p.rho.iter().all(|&r| r > 0.0));
        let consts = attention::bound_constants(f.h_min, f.h_max).unwrap();
        prop_assert!(attention::check_attention_bounds(&p, &consts).ok());
        let res = attention::residence_measure(&sol, Interval::new(Some(-0.5), Some(0.5)), grid.points[j]).unwrap();
        prop_assert!((0.0..=1.0).contains(&res.mu));
    }

    #[test]
    fn run_config_round_trips(n in 1usize..10_000, horizon in 0.01f64..10.0, seed in any::<u64>(), h in 0.05f64..0.95, t in proptest::option::of(0.0f64..1.0)) {
        let mut c = RunConfig::default();
        c.grid.n = n;
        c.grid.horizon = horizon;
        c.mc.seed = seed;
        c.hurst = HurstSpec::Constant { h };
        c.params.t = t;
        prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
