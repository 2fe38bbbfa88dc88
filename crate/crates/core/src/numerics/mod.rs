//! Log-domain special functions and ball geometry.

mod ball;
mod log_value;
pub mod quadrature;
pub mod special;

pub use ball::{ball_intersection_volume, ln_unit_ball_volume, log_unit_ball_volume};
pub(crate) use ball::{ln_intersection_fraction, ln_kappa};
pub use log_value::LogValue;

use std::f64::consts::{E, PI};

/// `κ_d · sqrt(π d) · (d / (2πe))^{d/2}`, which tends to 1 by Stirling's formula.
pub fn stirling_ratio(d: u32) -> f64 {
    let d = f64::from(d.max(1));
    let ln = ln_kappa(d as u32) + 0.5 * (PI * d).ln() + 0.5 * d * (d / (2.0 * PI * E)).ln();
    ln.exp()
}
