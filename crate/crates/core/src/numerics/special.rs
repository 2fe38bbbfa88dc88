//! Log-gamma, log-beta and the log of the regularized incomplete beta function.

use statrs::function::gamma;

/// Absolute accuracy the incomplete beta evaluation is documented to meet.
/// The continued fraction itself is iterated to a relative step of 1e-15.
pub const INCOMPLETE_BETA_ABS_TOL: f64 = 1e-12;

const CF_EPS: f64 = 1e-15;
const CF_TINY: f64 = 1e-300;
const CF_MAX_ITER: usize = 100_000;

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln I_x(a, b)`, the log of the regularized incomplete beta function.
///
/// Works on the log scale throughout so values far below the `f64` range
/// (caps of a large ball seen from a tiny one in high dimension) are still
/// resolved. Returns `-inf` at `x = 0`.
pub fn ln_beta_reg(x: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x >= 1.0 {
        return 0.0;
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_beta_reg_cf(x, a, b)
    } else {
        // I_x(a, b) = 1 - I_{1-x}(b, a)
        let ln_tail = ln_beta_reg_cf(1.0 - x, b, a);
        ln_one_minus_exp(ln_tail)
    }
}

/// `ln(1 - exp(l))` for `l <= 0`.
pub fn ln_one_minus_exp(l: f64) -> f64 {
    if l > -std::f64::consts::LN_2 {
        (-l.exp_m1()).ln()
    } else {
        (-l.exp()).ln_1p()
    }
}

fn ln_beta_reg_cf(x: f64, a: f64, b: f64) -> f64 {
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b) - a.ln();
    ln_front + betacf(x, a, b).ln()
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn betacf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return h;
        }
    }
    // Converges in O(sqrt(max(a, b))) steps on the branch chosen above.
    h
}
