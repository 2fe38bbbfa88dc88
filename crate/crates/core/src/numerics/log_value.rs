//! Signed log-magnitude scalars.
//!
//! Ball volumes, intensities and their products span thousands of orders of
//! magnitude once the dimension reaches a few hundred, so every analytic
//! quantity in this crate is carried as a `LogValue`: a sign in `{-1, 0, +1}`
//! plus the natural log of the magnitude. Zero is its own state rather than a
//! very negative logarithm, because the indicator kernel produces exact zeros
//! that must stay exact.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "LogValueRepr", into = "LogValueRepr")]
pub struct LogValue {
    sign: i8,
    log_abs: f64,
}

#[derive(Serialize, Deserialize)]
struct LogValueRepr {
    sign: i8,
    log_abs: f64,
}

impl From<LogValueRepr> for LogValue {
    fn from(r: LogValueRepr) -> Self {
        LogValue::from_parts(r.sign, r.log_abs)
    }
}

impl From<LogValue> for LogValueRepr {
    fn from(v: LogValue) -> Self {
        LogValueRepr {
            sign: v.sign,
            log_abs: v.log_abs,
        }
    }
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0,
        log_abs: 0.0,
    };
    pub const ONE: LogValue = LogValue {
        sign: 1,
        log_abs: 0.0,
    };

    /// Builds a value from a sign and a log-magnitude. Any nonzero sign is
    /// reduced to `±1`; a zero sign or a `-inf` magnitude gives exact zero.
    pub fn from_parts(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogValue {
            sign: sign.signum(),
            log_abs,
        }
    }

    /// Positive value `exp(log_abs)`.
    pub fn from_ln(log_abs: f64) -> Self {
        Self::from_parts(1, log_abs)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            LogValue {
                sign: 1,
                log_abs: x.ln(),
            }
        } else {
            LogValue {
                sign: -1,
                log_abs: (-x).ln(),
            }
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Log of the magnitude; `0.0` for exact zero (see [`LogValue::ln`]).
    pub fn log_abs(self) -> f64 {
        self.log_abs
    }

    /// Natural log of a nonnegative value, `-inf` for zero, NaN for negatives.
    pub fn ln(self) -> f64 {
        match self.sign {
            0 => f64::NEG_INFINITY,
            1 => self.log_abs,
            _ => f64::NAN,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    /// True when the value is exactly zero or its log-magnitude is finite.
    pub fn is_finite(self) -> bool {
        self.sign == 0 || self.log_abs.is_finite()
    }

    pub fn abs(self) -> Self {
        LogValue {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// Real power of a nonnegative value. Panics for negative bases and for
    /// zero raised to a negative power.
    pub fn powf(self, p: f64) -> Self {
        match self.sign {
            0 if p > 0.0 => Self::ZERO,
            0 if p == 0.0 => Self::ONE,
            0 => panic!("LogValue: zero raised to negative power {p}"),
            1 => Self::from_ln(self.log_abs * p),
            _ => panic!("LogValue: negative base raised to real power {p}"),
        }
    }

    pub fn powi(self, n: i32) -> Self {
        match self.sign {
            0 => self.powf(f64::from(n)),
            s => {
                let sign = if n % 2 == 0 { 1 } else { s };
                Self::from_parts(sign, self.log_abs * f64::from(n))
            }
        }
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

/// `ln(exp(a) + exp(b))` for finite `a`, `b`.
fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(exp(a) - exp(b))` for `a > b`.
fn ln_sub_exp(a: f64, b: f64) -> f64 {
    a + (-(b - a).exp_m1()).ln()
}

impl Add for LogValue {
    type Output = LogValue;

    fn add(self, rhs: LogValue) -> LogValue {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        if self.sign == rhs.sign {
            return LogValue {
                sign: self.sign,
                log_abs: ln_add_exp(self.log_abs, rhs.log_abs),
            };
        }
        match self.log_abs.partial_cmp(&rhs.log_abs) {
            Some(Ordering::Greater) => LogValue::from_parts(self.sign, ln_sub_exp(self.log_abs, rhs.log_abs)),
            Some(Ordering::Less) => LogValue::from_parts(rhs.sign, ln_sub_exp(rhs.log_abs, self.log_abs)),
            _ => LogValue::ZERO,
        }
    }
}

impl Neg for LogValue {
    type Output = LogValue;

    fn neg(self) -> LogValue {
        LogValue {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl Sub for LogValue {
    type Output = LogValue;

    fn sub(self, rhs: LogValue) -> LogValue {
        self + (-rhs)
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.sign == 0 || rhs.sign == 0 {
            return LogValue::ZERO;
        }
        LogValue {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs + rhs.log_abs,
        }
    }
}

impl Mul<f64> for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: f64) -> LogValue {
        self * LogValue::from_f64(rhs)
    }
}

impl Div for LogValue {
    type Output = LogValue;

    /// Panics on division by exact zero.
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(rhs.sign != 0, "LogValue: division by zero");
        if self.sign == 0 {
            return LogValue::ZERO;
        }
        LogValue {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs - rhs.log_abs,
        }
    }
}

impl Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        iter.fold(LogValue::ZERO, |acc, v| acc + v)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &LogValue) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_abs.partial_cmp(&other.log_abs),
                _ => other.log_abs.partial_cmp(&self.log_abs),
            },
            ord => Some(ord),
        }
    }
}

impl From<f64> for LogValue {
    fn from(x: f64) -> Self {
        LogValue::from_f64(x)
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "LogValue(0)"),
            1 => write!(f, "LogValue(+exp({}))", self.log_abs),
            _ => write!(f, "LogValue(-exp({}))", self.log_abs),
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if self.sign == 0 || (v.is_finite() && v != 0.0) {
            write!(f, "{v}")
        } else {
            let s = if self.sign < 0 { "-" } else { "" };
            write!(f, "{s}exp({})", self.log_abs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_is_canonical() {
        let z = LogValue::from_parts(0, 17.5);
        assert_eq!(z, LogValue::ZERO);
        assert_eq!(z.log_abs(), 0.0);
        assert_eq!(LogValue::from_ln(f64::NEG_INFINITY), LogValue::ZERO);
        assert_eq!(LogValue::from_f64(-0.0), LogValue::ZERO);
    }

    #[test]
    fn add_and_subtract_match_direct_arithmetic() {
        let cases = [(3.0, 4.0), (-3.0, 4.0), (3.0, -4.0), (1e-300, 1e300), (2.5, -2.5), (0.0, -7.0)];
        for (a, b) in cases {
            let la = LogValue::from_f64(a);
            let lb = LogValue::from_f64(b);
            let s = (la + lb).to_f64();
            let d = (la - lb).to_f64();
            if a + b == 0.0 {
                assert!((la + lb).is_zero());
            } else {
                assert!(rel(s, a + b) < 1e-12, "{a}+{b}: {s}");
            }
            if a - b != 0.0 {
                assert!(rel(d, a - b) < 1e-12, "{a}-{b}: {d}");
            }
        }
    }

    #[test]
    fn ordering_respects_sign() {
        let vals = [-5.0, -0.1, 0.0, 1e-9, 2.0, 7.0];
        for w in vals.windows(2) {
            assert!(LogValue::from_f64(w[0]) < LogValue::from_f64(w[1]));
        }
    }

    #[test]
    fn huge_magnitudes_stay_finite() {
        let big = LogValue::from_ln(5000.0);
        let prod = big * big / big;
        assert!((prod.ln() - 5000.0).abs() < 1e-9);
        assert!((big + big).is_finite());
        assert_eq!((big - big), LogValue::ZERO);
    }

    #[test]
    fn powers() {
        let v = LogValue::from_f64(-2.0);
        assert_eq!(v.powi(3).to_f64().round(), -8.0);
        assert_eq!(v.powi(2).to_f64().round(), 4.0);
        assert_eq!(LogValue::ZERO.powf(0.5), LogValue::ZERO);
        assert_eq!(LogValue::ZERO.powf(0.0), LogValue::ONE);
        assert!(rel(LogValue::from_f64(9.0).sqrt().to_f64(), 3.0) < 1e-15);
    }

    #[test]
    #[should_panic]
    fn divide_by_zero_panics() {
        let _ = LogValue::ONE / LogValue::ZERO;
    }

    #[test]
    fn mul_div_roundtrip_ten_thousand_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let a: f64 = rng.random_range(-1e6..1e6);
            let b: f64 = rng.random_range(1e-6..1e6) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let la = LogValue::from_f64(a);
            let lb = LogValue::from_f64(b);
            let back = ((la * lb) / lb).to_f64();
            assert!(rel(back, a) < 1e-12, "{a} {b} {back}");
        }
    }

    proptest! {
        #[test]
        fn roundtrip_to_f64(x in -1e300f64..1e300) {
            let back = LogValue::from_f64(x).to_f64();
            if x == 0.0 {
                prop_assert_eq!(back, 0.0);
            } else {
                prop_assert!(rel(back, x) < 1e-12);
            }
        }

        #[test]
        fn sum_is_commutative(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let la = LogValue::from_f64(a);
            let lb = LogValue::from_f64(b);
            prop_assert_eq!(la + lb, lb + la);
        }
    }
}
