//! Mean and variance of the edge count, the parameter integral `A_1`, and the
//! moment polynomials of the first difference operator.
//!
//! For the indicator kernel every `A_k` equals `A_1`, and `A_1(x)` depends
//! on `r = ‖x‖` only: it is `λ` times the volume of `B_δ(x) ∩ B_2(−x)`.
//! Writing `A_1(r) = u · ρ(r)` with `u = κ_d λ δ^d` and `ρ ∈ [0, 1]`, every
//! integral of a power of `A_1` against the intensity measure reduces to
//!
//! ```text
//! ∫ A_1^k dΛ = κ_d λ u^k M_k,   M_k = d ∫_0^∞ r^{d−1} ρ(r)^k dr,
//! ```
//!
//! where `ρ = 1` on `[0, 1 − δ/2]` and `ρ = 0` beyond `1 + δ/2`, so only the
//! shell in between needs quadrature and `(1 − δ/2)^d ≤ M_k ≤ (1 + δ/2)^d`.
//! `M_1 = 1` exactly (it carries the mean), which the tests use as a check
//! on the quadrature.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::ModelParams;
use crate::numerics::quadrature::integrate;
use crate::numerics::{ball_intersection_volume, ln_intersection_fraction, LogValue};

pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-9;

/// `E[E] = ½ κ_d² λ² δ^d`.
pub fn exact_mean(params: &ModelParams) -> LogValue {
    LogValue::from_f64(0.5) * params.kappa_lambda().powi(2) * params.delta_pow_d()
}

/// `A_1(x)` for `‖x‖ = r`.
pub fn a_one(r: f64, params: &ModelParams) -> Result<LogValue> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be nonnegative, got {r}")));
    }
    Ok(params.intensity() * ball_intersection_volume(params.delta(), 2.0, 2.0 * r, params.dimension())?)
}

/// `ρ(r) = A_1(r) / u`, in `[0, 1]`.
pub(crate) fn a_one_ratio(r: f64, d: u32, delta: f64) -> f64 {
    let ln_frac = ln_intersection_fraction(delta, 2.0, 2.0 * r, d);
    if ln_frac == f64::NEG_INFINITY {
        return 0.0;
    }
    // The fraction is of the smaller ball; rescale when that is B_2.
    let rescale = if delta > 2.0 { f64::from(d) * (2.0 / delta).ln() } else { 0.0 };
    (ln_frac + rescale).exp()
}

/// `M_k = d ∫ r^{d−1} ρ(r)^k dr`, dimensionless, as a [`LogValue`].
pub fn radial_moment(params: &ModelParams, k: i32, tol: f64) -> Result<LogValue> {
    if k < 1 {
        return Err(invalid(format!("moment order must be at least 1, got {k}")));
    }
    let d = params.dimension();
    let delta = params.delta();
    let lo = (1.0 - delta / 2.0).max(0.0);
    let hi = 1.0 + delta / 2.0;
    let inner = params.shrink_factor();

    // r^{d-1} is scaled by hi^{d-1} so the integrand stays within [0, 1]
    // whatever d and δ are.
    let ln_hi = hi.ln();
    let dm1 = f64::from(d - 1);
    let q = integrate(
        |r| {
            let rho = a_one_ratio(r, d, delta);
            if rho == 0.0 {
                return 0.0;
            }
            let radial = if d == 1 {
                1.0
            } else if r > 0.0 {
                (dm1 * (r.ln() - ln_hi)).exp()
            } else {
                0.0
            };
            radial * rho.powi(k)
        },
        lo,
        hi,
        tol,
    )?;
    let shell = LogValue::from_f64(q.value) * LogValue::from_ln(f64::from(d).ln() + dm1 * ln_hi);
    Ok(inner + shell)
}

/// `∫ A_1(x)^k Λ(dx) = κ_d λ u^k M_k`.
pub fn a_one_power_integral(params: &ModelParams, k: i32, tol: f64) -> Result<LogValue> {
    if params.intensity().is_zero() {
        return Ok(LogValue::ZERO);
    }
    Ok(params.kappa_lambda() * params.u().powi(k) * radial_moment(params, k, tol)?)
}

/// `Var[E] = E[E] + ∫ A_1² dΛ`, the second term by radial quadrature.
pub fn variance_exact(params: &ModelParams, quadrature_tol: f64) -> Result<LogValue> {
    Ok(exact_mean(params) + a_one_power_integral(params, 2, quadrature_tol)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBounds {
    pub lower: LogValue,
    pub upper: LogValue,
    /// Set when `δ >= 2`: `(1 − δ/2)^d` is clamped to zero and the lower
    /// bound reduces to the mean.
    pub lower_degenerate: bool,
}

/// `E[E] + (1 ∓ δ/2)^d κ_d³ λ³ δ^{2d}`.
pub fn variance_bounds(params: &ModelParams) -> VarianceBounds {
    let mean = exact_mean(params);
    let cubic = params.kappa_lambda().powi(3) * params.delta_pow_d().powi(2);
    VarianceBounds {
        lower: mean + params.shrink_factor() * cubic,
        upper: mean + params.grow_factor() * cubic,
        lower_degenerate: params.delta() >= 2.0,
    }
}

fn check_nonnegative(a1: LogValue) -> Result<()> {
    if a1.sign() < 0 {
        Err(invalid("parameter integral must be nonnegative"))
    } else {
        Ok(())
    }
}

/// `P = A_1⁴ + 6 A_2 A_1² + 3 A_2² + 4 A_3 A_1 + A_4` with all `A_k = a1`.
pub fn p_polynomial(a1: LogValue) -> Result<LogValue> {
    check_nonnegative(a1)?;
    Ok(a1.powi(4) + a1.powi(3) * 6.0 + a1.powi(2) * 7.0 + a1)
}

/// `E|D_x E|³ = A_1³ + 3 A_2 A_1 + A_3` with all `A_k = a1`.
pub fn third_abs_moment(a1: LogValue) -> Result<LogValue> {
    check_nonnegative(a1)?;
    Ok(a1.powi(3) + a1.powi(2) * 3.0 + a1)
}

/// `E(D_x E)⁴`.
pub fn fourth_moment(a1: LogValue) -> Result<LogValue> {
    p_polynomial(a1)
}

/// Upper bound `1 + 1 / (1 + 2 (1 − δ/2)^d u)` on
/// `σ^{-2} E ∫ (D_x E)² Λ(dx)`. Always in `(1, 2]`.
pub fn integrability_ratio_upper(params: &ModelParams) -> f64 {
    let x = (LogValue::from_f64(2.0) * params.shrink_factor() * params.u()).to_f64();
    1.0 + 1.0 / (1.0 + x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: LogValue,
    pub variance_exact: LogValue,
    pub variance_lower: LogValue,
    pub variance_upper: LogValue,
    pub integrability_ratio_upper: f64,
}

pub fn moment_report(params: &ModelParams, quadrature_tol: f64) -> Result<MomentReport> {
    let bounds = variance_bounds(params);
    Ok(MomentReport {
        mean: exact_mean(params),
        variance_exact: variance_exact(params, quadrature_tol)?,
        variance_lower: bounds.lower,
        variance_upper: bounds.upper,
        integrability_ratio_upper: integrability_ratio_upper(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ModelParams {
        ModelParams::with_lambda(3, 0.4, 5.0).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() < rel
    }

    // Frozen values below come from an mpmath evaluation with the
    // closed-form three-dimensional lens volume.

    #[test]
    fn mean_at_reference_point() {
        assert!(close(exact_mean(&reference()).to_f64(), 14.036_770_703_771_532, 1e-13));
        assert!(exact_mean(&ModelParams::zero_intensity(3, 0.4).unwrap()).is_zero());
    }

    #[test]
    fn a_one_examples() {
        let p = reference();
        assert!(close(a_one(0.0, &p).unwrap().to_f64(), 1.340_412_865_531_645, 1e-13));
        assert!(a_one(1.3, &p).unwrap().is_zero());
        let mid = a_one(1.0, &p).unwrap().to_f64();
        assert!(close(mid, 0.619_940_950_308_385_9, 1e-11));
        assert!(a_one(-0.1, &p).is_err());
    }

    #[test]
    fn radial_moments_at_reference_point() {
        let p = reference();
        let m1 = radial_moment(&p, 1, 1e-12).unwrap().to_f64();
        let m2 = radial_moment(&p, 2, 1e-12).unwrap().to_f64();
        let m3 = radial_moment(&p, 3, 1e-12).unwrap().to_f64();
        assert!((m1 - 1.0).abs() < 1e-10, "{m1}");
        assert!(close(m2, 0.846_476_190_476_190_5, 1e-10), "{m2}");
        assert!(close(m3, 0.776_705_636_352_721_2, 1e-10), "{m3}");
    }

    #[test]
    fn first_radial_moment_is_one_everywhere() {
        for (d, delta) in [(1, 0.3), (2, 0.5), (5, 0.2), (12, 1.0), (40, 0.025), (200, 0.005), (7, 1.9)] {
            let p = ModelParams::with_lambda(d, delta, 1.0).unwrap();
            let m1 = radial_moment(&p, 1, 1e-11).unwrap().to_f64();
            assert!((m1 - 1.0).abs() < 1e-8, "d={d} delta={delta}: {m1}");
        }
    }

    #[test]
    fn variance_at_reference_point() {
        let p = reference();
        let v = variance_exact(&p, 1e-11).unwrap().to_f64();
        assert!(close(v, 45.889_784_943_007_7, 1e-9), "{v}");
        let b = variance_bounds(&p);
        assert!(close(b.lower.to_f64(), 33.303_400_378_629_05, 1e-12));
        assert!(close(b.upper.to_f64(), 79.061_645_856_415_66, 1e-12));
        assert!(!b.lower_degenerate);
    }

    #[test]
    fn variance_is_poisson_dominated_at_small_intensity() {
        let p = ModelParams::with_lambda(3, 0.4, 0.01).unwrap();
        let ratio = variance_exact(&p, 1e-10).unwrap().to_f64() / exact_mean(&p).to_f64();
        assert!((ratio - 1.0).abs() < 0.01);
        assert!(close(ratio, 1.004_538_510_304_322, 1e-9));
    }

    #[test]
    fn zero_intensity_is_all_zero() {
        let p = ModelParams::zero_intensity(3, 0.4).unwrap();
        let b = variance_bounds(&p);
        assert!(b.lower.is_zero() && b.upper.is_zero());
        assert!(variance_exact(&p, 1e-9).unwrap().is_zero());
        assert_eq!(integrability_ratio_upper(&p), 2.0);
    }

    #[test]
    fn polynomials() {
        assert!(p_polynomial(LogValue::ZERO).unwrap().is_zero());
        assert!(close(p_polynomial(LogValue::ONE).unwrap().to_f64(), 15.0, 1e-14));
        assert!(close(p_polynomial(LogValue::from_f64(2.0)).unwrap().to_f64(), 94.0, 1e-14));
        assert!(third_abs_moment(LogValue::ZERO).unwrap().is_zero());
        assert!(close(third_abs_moment(LogValue::ONE).unwrap().to_f64(), 5.0, 1e-14));
        assert!(close(fourth_moment(LogValue::ONE).unwrap().to_f64(), 15.0, 1e-14));
        let u = a_one(0.0, &reference()).unwrap();
        assert!(close(third_abs_moment(u).unwrap().to_f64(), 9.138_861_525_137_103, 1e-12));
        assert!(close(fourth_moment(u).unwrap().to_f64(), 31.595_486_458_705_677, 1e-12));
        assert!(p_polynomial(LogValue::from_f64(-1.0)).is_err());
    }

    #[test]
    fn integrability_ratio() {
        assert!(close(integrability_ratio_upper(&reference()), 1.421_481_606_808_504_6, 1e-12));
        let tiny = ModelParams::with_lambda(3, 0.4, 1e-12).unwrap();
        assert!((integrability_ratio_upper(&tiny) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn intensity_scaling_is_exact_in_log_space() {
        let p = ModelParams::with_lambda(6, 0.3, 7.0).unwrap();
        let q = p.scale_intensity(3.0).unwrap();
        let ln3 = 3f64.ln();
        assert!((exact_mean(&q).ln() - exact_mean(&p).ln() - 2.0 * ln3).abs() < 1e-12);
        let cubic = |x: &ModelParams| variance_bounds(x).upper - exact_mean(x);
        assert!((cubic(&q).ln() - cubic(&p).ln() - 3.0 * ln3).abs() < 1e-11);
    }
}
