use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rggclt_core::model::intensity_for_target_u;
use rggclt_core::moments::{
    a_one, exact_mean, integrability_ratio_upper, moment_report, radial_moment, variance_bounds,
    variance_exact,
};
use rggclt_core::point_process::uniform_in_ball;
use rggclt_core::ModelParams;

fn params(d: u32, delta: f64, ln_u: f64) -> ModelParams {
    ModelParams::new(d, delta, intensity_for_target_u(d, delta, ln_u.exp()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn variance_is_sandwiched(d in 1u32..=30, delta in 0.02f64..2.5, ln_u in -8.0f64..8.0) {
        let p = params(d, delta, ln_u);
        let v = variance_exact(&p, 1e-10).unwrap();
        let b = variance_bounds(&p);
        prop_assert!(b.lower <= v && v <= b.upper, "{} {} {}", b.lower, v, b.upper);
        prop_assert!(exact_mean(&p) <= b.lower);
        prop_assert_eq!(b.lower_degenerate, delta >= 2.0);
    }

    #[test]
    fn radial_moments_are_ordered(d in 1u32..=40, delta in 0.02f64..1.9) {
        let p = params(d, delta, 0.0);
        let m: Vec<f64> = (1..=3).map(|k| radial_moment(&p, k, 1e-10).unwrap().to_f64()).collect();
        prop_assert!((m[0] - 1.0).abs() < 1e-8);
        prop_assert!(m[2] <= m[1] && m[1] <= m[0]);
        prop_assert!(m[2] >= p.shrink_factor().to_f64() * (1.0 - 1e-9));
    }

    #[test]
    fn a_one_is_sandwiched_and_monotone(d in 1u32..=25, delta in 0.02f64..1.9, r in 0.0f64..1.5, dr in 0.0f64..0.2) {
        let p = params(d, delta, 0.5);
        let u = p.u();
        let a = a_one(r, &p).unwrap();
        prop_assert!(a <= u * 1.000_000_001);
        if r <= 1.0 - delta / 2.0 {
            prop_assert!((a.ln() - u.ln()).abs() < 1e-9);
        }
        if r > 1.0 + delta / 2.0 {
            prop_assert!(a.is_zero());
        }
        prop_assert!(a_one(r + dr, &p).unwrap() <= a * 1.000_000_001);
    }

    #[test]
    fn integrability_ratio_in_range(d in 1u32..=50, delta in 0.02f64..2.5, ln_u in -10.0f64..10.0) {
        let r = integrability_ratio_upper(&params(d, delta, ln_u));
        prop_assert!(r > 1.0 - 1e-15 && r <= 2.0);
    }
}

#[test]
fn a_one_matches_monte_carlo_lens_volume() {
    // A_1(x) / λ is the volume of {y : |y - x| <= δ, |y + x| <= 2}.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (d, delta) = (5usize, 0.6);
    let p = ModelParams::with_lambda(d as u32, delta, 1.0).unwrap();
    let u = p.u().to_f64();
    for r in [0.7, 0.9, 1.0, 1.1, 1.25] {
        let mut x = vec![0.0; d];
        x[0] = r;
        let n = 200_000;
        let mut y = vec![0.0; d];
        let hits = (0..n)
            .filter(|_| {
                uniform_in_ball(&mut rng, delta, &mut y);
                // y is the offset from x
                let s: f64 = y.iter().zip(&x).map(|(a, b)| (a + 2.0 * b).powi(2)).sum();
                s <= 4.0
            })
            .count() as f64;
        let frac = hits / n as f64;
        let se = (frac * (1.0 - frac) / n as f64).sqrt().max(1e-6);
        let exact = a_one(r, &p).unwrap().to_f64() / u;
        assert!((frac - exact).abs() < 4.0 * se, "r={r}: {frac} vs {exact}");
    }
}

#[test]
fn report_is_consistent() {
    let p = ModelParams::with_lambda(3, 0.4, 5.0).unwrap();
    let r = moment_report(&p, 1e-10).unwrap();
    assert!(r.variance_lower <= r.variance_exact && r.variance_exact <= r.variance_upper);
    assert_eq!(r.mean, exact_mean(&p));
}
