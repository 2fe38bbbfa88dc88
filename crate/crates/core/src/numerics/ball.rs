//! Volumes of d-balls and of the intersection of two d-balls.

use std::f64::consts::{LN_2, PI};

use super::special::{ln_beta_reg, ln_gamma, ln_one_minus_exp};
use super::LogValue;
use crate::error::{invalid, Error, Result};

/// `ln κ_d`, the log-volume of the d-dimensional unit ball `π^{d/2} / Γ(1 + d/2)`.
pub fn ln_unit_ball_volume(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(ln_kappa(d))
}

pub(crate) fn ln_kappa(d: u32) -> f64 {
    let half = f64::from(d) / 2.0;
    half * PI.ln() - ln_gamma(1.0 + half)
}

/// Unit ball volume as a [`LogValue`].
pub fn log_unit_ball_volume(d: u32) -> Result<LogValue> {
    ln_unit_ball_volume(d).map(LogValue::from_ln)
}

/// Lebesgue volume of `B_{r_a}(p) ∩ B_{r_b}(q)` with `|p - q| = center_distance`.
///
/// Disjoint balls give exact zero, nested balls the volume of the smaller
/// one, and overlapping balls the sum of the two caps cut off by the radical
/// hyperplane, each from the regularized incomplete beta function.
pub fn ball_intersection_volume(r_a: f64, r_b: f64, center_distance: f64, d: u32) -> Result<LogValue> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(r_a > 0.0 && r_a.is_finite() && r_b > 0.0 && r_b.is_finite()) {
        return Err(invalid(format!("radii must be positive and finite, got {r_a}, {r_b}")));
    }
    if !(center_distance >= 0.0 && center_distance.is_finite()) {
        return Err(invalid(format!("center distance must be nonnegative, got {center_distance}")));
    }
    let ln_frac = ln_intersection_fraction(r_a, r_b, center_distance, d);
    if ln_frac == f64::NEG_INFINITY {
        return Ok(LogValue::ZERO);
    }
    let r_small = r_a.min(r_b);
    Ok(LogValue::from_ln(ln_kappa(d) + f64::from(d) * r_small.ln() + ln_frac))
}

/// `ln(V(B_{r_a} ∩ B_{r_b}) / (κ_d min(r_a, r_b)^d))`: the log of the
/// fraction of the smaller ball covered by the larger one. `-inf` when the
/// balls are disjoint, `0` when nested. Radii are sorted first so the result
/// is exactly symmetric in `(r_a, r_b)`.
pub(crate) fn ln_intersection_fraction(r_a: f64, r_b: f64, c: f64, d: u32) -> f64 {
    let (rs, rl) = if r_a <= r_b { (r_a, r_b) } else { (r_b, r_a) };
    if c >= rs + rl {
        return f64::NEG_INFINITY;
    }
    if c <= rl - rs {
        return 0.0;
    }
    // Squared radius of the (d-1)-sphere where the two boundaries meet; the
    // factored form avoids cancellation close to tangency.
    let rho2 = (rs + rl - c) * (c - rs + rl) * (c + rs - rl) * (c + rs + rl) / (4.0 * c * c);
    let shape = (f64::from(d) + 1.0) / 2.0;

    // Cap of a ball of radius r whose base has radius rho: half the ball
    // times I_{rho^2/r^2}((d+1)/2, 1/2), when the base plane does not pass
    // the ball's center.
    let ln_half_cap = |r: f64| -LN_2 + ln_beta_reg((rho2 / (r * r)).min(1.0), shape, 0.5);

    // The radical hyperplane sits at signed distance (c^2 + rs^2 - rl^2)/(2c)
    // from the small center toward the large one; when negative the small
    // ball contributes "full ball minus the opposite cap".
    let small_beyond_center = c * c < (rl - rs) * (rl + rs);
    let small = if small_beyond_center {
        ln_one_minus_exp(ln_half_cap(rs))
    } else {
        ln_half_cap(rs)
    };
    let large = f64::from(d) * (rl / rs).ln() + ln_half_cap(rl);

    let (hi, lo) = if small >= large { (small, large) } else { (large, small) };
    let total = if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    };
    total.min(0.0)
}
