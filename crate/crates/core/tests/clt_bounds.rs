use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rggclt_core::clt_bounds::{
    gamma_mc, gamma_quadrature, gamma_report, gamma_upper, regime_rate, theorem_rate, SigmaMode,
};
use rggclt_core::edge_count::kernel;
use rggclt_core::model::{canonical_delta, intensity_for_target_u, Regime};
use rggclt_core::moments::{variance_bounds, variance_exact};
use rggclt_core::point_process::{derive_stream, uniform_in_ball};
use rggclt_core::{Execution, LogValue, ModelParams};

fn params(d: u32, delta: f64, ln_u: f64) -> ModelParams {
    ModelParams::new(d, delta, intensity_for_target_u(d, delta, ln_u.exp()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn quadrature_below_upper(d in 1u32..=20, delta in 0.02f64..1.9, ln_u in -6.0f64..6.0) {
        let p = params(d, delta, ln_u);
        let s = variance_exact(&p, 1e-10).unwrap();
        let up = gamma_upper(&p, s).unwrap();
        let q = gamma_quadrature(&p, s, 1e-10).unwrap();
        prop_assert!(q.gamma2 <= up.gamma2 && q.gamma3 <= up.gamma3);
    }

    #[test]
    fn lower_variance_is_conservative(d in 1u32..=30, delta in 0.02f64..1.9, ln_u in -6.0f64..6.0) {
        let p = params(d, delta, ln_u);
        let exact = gamma_upper(&p, variance_exact(&p, 1e-10).unwrap()).unwrap();
        let lower = gamma_upper(&p, variance_bounds(&p).lower).unwrap();
        prop_assert!(lower.gamma1 >= exact.gamma1);
        prop_assert!(lower.gamma2 >= exact.gamma2);
        prop_assert!(lower.gamma3 >= exact.gamma3);
    }

    #[test]
    fn high_dimension_outputs_are_finite(d in 50u32..=500, ln_u in -7.0f64..7.0) {
        let delta = canonical_delta(d).unwrap().value;
        let p = params(d, delta, ln_u);
        let r = gamma_report(&p, SigmaMode::LowerBound, 1e-9, None, Execution::Sequential).unwrap();
        for v in [r.gamma_upper.gamma1, r.gamma_upper.gamma2, r.gamma_upper.gamma3, r.wasserstein_bound, r.theorem_rate] {
            prop_assert!(v.is_positive() && v.is_finite());
        }
    }
}

#[test]
fn bounds_decrease_in_sigma() {
    let p = ModelParams::with_lambda(3, 0.4, 5.0).unwrap();
    let mut prev = gamma_upper(&p, LogValue::from_f64(1.0)).unwrap();
    for s in [2.0, 10.0, 33.3, 100.0, 1e4] {
        let g = gamma_upper(&p, LogValue::from_f64(s)).unwrap();
        assert!(g.gamma1 < prev.gamma1 && g.gamma2 < prev.gamma2 && g.gamma3 < prev.gamma3);
        prev = g;
    }
}

#[test]
fn rate_nonincreasing_in_lambda() {
    let mut prev = LogValue::from_f64(f64::MAX);
    for k in -20..=20 {
        let p = ModelParams::with_lambda(4, 0.3, 10f64.powf(k as f64 / 4.0)).unwrap();
        let r = theorem_rate(&p).unwrap();
        assert!(r <= prev);
        prev = r;
    }
}

#[test]
fn theorem_rate_matches_regime_branch() {
    for ln_u in [-3.0, -0.5, 0.0, 0.5, 3.0] {
        let p = params(6, 0.3, ln_u);
        let branch = if ln_u >= 0.0 { Regime::Diverging } else { Regime::Vanishing };
        let r = regime_rate(&[p], &branch).unwrap()[0];
        assert!((r.ln() - theorem_rate(&p).unwrap().ln()).abs() < 1e-12);
    }
    let ps: Vec<ModelParams> = (1..=5).map(|k| params(3 * k, 0.2, k as f64)).collect();
    let c = regime_rate(&ps, &Regime::ConvergentPositive { c_squared: 4.0 }).unwrap();
    for (p, r) in ps.iter().zip(&c) {
        assert!((r.ln() + 0.5 * p.kappa_lambda().ln()).abs() < 1e-12);
    }
}

#[test]
fn mc_below_upper_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..50 {
        let p = params(rng.random_range(1..=8), rng.random_range(0.1..1.2), rng.random_range(-2.0..3.0));
        let s = variance_exact(&p, 1e-10).unwrap();
        let up = gamma_upper(&p, s).unwrap();
        let mc = gamma_mc(&p, s, &mut derive_stream(21, i), 10_000, Execution::default()).unwrap();
        for (est, bound) in [(mc.gamma1, up.gamma1), (mc.gamma2, up.gamma2), (mc.gamma3, up.gamma3)] {
            assert!(est.estimate <= bound + est.std_error * 4.0, "{p:?}");
        }
    }
}

#[test]
fn gamma2_mc_agrees_with_quadrature() {
    let p = ModelParams::with_lambda(4, 0.5, 3.0).unwrap();
    let s = variance_exact(&p, 1e-10).unwrap();
    let q = gamma_quadrature(&p, s, 1e-10).unwrap();
    let mc = gamma_mc(&p, s, &mut derive_stream(22, 0), 200_000, Execution::default()).unwrap();
    let z2 = (mc.gamma2.estimate.to_f64() - q.gamma2.to_f64()) / mc.gamma2.std_error.to_f64();
    let z3 = (mc.gamma3.estimate.to_f64() - q.gamma3.to_f64()) / mc.gamma3.std_error.to_f64();
    assert!(z2.abs() < 3.0 && z3.abs() < 3.0, "{z2} {z3}");
}

#[test]
fn kernel_support_lies_in_the_sampling_ball() {
    // Sampling on a ball 1.5 times larger never finds a linked pair with an
    // endpoint outside B_{1 + δ/2}, which is what makes the MC support exact.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (d, delta) in [(2usize, 0.8), (3, 0.4), (6, 1.5)] {
        let big = 1.5 * (1.0 + delta / 2.0);
        let mut x = vec![0.0; d];
        let mut y = vec![0.0; d];
        let mut linked = 0;
        for _ in 0..200_000 {
            uniform_in_ball(&mut rng, big, &mut x);
            uniform_in_ball(&mut rng, delta, &mut y);
            y.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
            if kernel(&x, &y, delta).unwrap() {
                linked += 1;
                for z in [&x, &y] {
                    assert!(z.iter().map(|c| c * c).sum::<f64>().sqrt() <= 1.0 + delta / 2.0 + 1e-12);
                }
            }
        }
        assert!(linked > 100);
    }
}

#[test]
fn report_modes() {
    let p = ModelParams::with_lambda(3, 0.4, 5.0).unwrap();
    let mut stream = derive_stream(24, 0);
    let exact = gamma_report(&p, SigmaMode::Exact, 1e-10, Some((&mut stream, 5000)), Execution::default()).unwrap();
    let cons = gamma_report(&p, SigmaMode::LowerBound, 1e-10, None, Execution::default()).unwrap();
    assert!(exact.gamma_mc.is_some() && cons.gamma_mc.is_none());
    assert!(cons.wasserstein_bound > exact.wasserstein_bound);
    assert!((cons.wasserstein_bound.to_f64() - 3.111).abs() < 2e-3);
}
