//! Model parameters `(d, δ, λ)`, intensity schedules over the dimension, and
//! the finite-sample regime classifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{ln_kappa, LogValue};

/// Default slope tolerance of [`classify_regime`].
pub const DEFAULT_REGIME_TOLERANCE: f64 = 0.05;

/// Dimension, distance parameter and intensity of one edge-count model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    dimension: u32,
    delta: f64,
    intensity: LogValue,
}

impl ModelParams {
    /// Requires `d >= 1`, finite `δ > 0` and a strictly positive intensity.
    pub fn new(dimension: u32, delta: f64, intensity: LogValue) -> Result<Self> {
        Self::check_geometry(dimension, delta)?;
        if !intensity.is_positive() || !intensity.is_finite() {
            return Err(invalid(format!("intensity must be positive and finite, got {intensity:?}")));
        }
        Ok(ModelParams {
            dimension,
            delta,
            intensity,
        })
    }

    pub fn with_lambda(dimension: u32, delta: f64, lambda: f64) -> Result<Self> {
        Self::new(dimension, delta, LogValue::from_f64(lambda))
    }

    /// The `λ → 0` limit. Every moment and bound evaluates to exact zero and
    /// sampling yields empty configurations.
    pub fn zero_intensity(dimension: u32, delta: f64) -> Result<Self> {
        Self::check_geometry(dimension, delta)?;
        Ok(ModelParams {
            dimension,
            delta,
            intensity: LogValue::ZERO,
        })
    }

    fn check_geometry(dimension: u32, delta: f64) -> Result<()> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(dimension));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid(format!("delta must be positive and finite, got {delta}")));
        }
        Ok(())
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn intensity(&self) -> LogValue {
        self.intensity
    }

    /// Same geometry, different intensity.
    pub fn with_intensity(&self, intensity: LogValue) -> Result<Self> {
        if intensity.is_zero() {
            return Self::zero_intensity(self.dimension, self.delta);
        }
        Self::new(self.dimension, self.delta, intensity)
    }

    pub fn scale_intensity(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(invalid(format!("intensity multiplier must be positive, got {factor}")));
        }
        self.with_intensity(self.intensity * factor)
    }

    pub fn ln_kappa(&self) -> f64 {
        ln_kappa(self.dimension)
    }

    /// `κ_d`.
    pub fn kappa(&self) -> LogValue {
        LogValue::from_ln(self.ln_kappa())
    }

    /// `δ^d`.
    pub fn delta_pow_d(&self) -> LogValue {
        LogValue::from_ln(f64::from(self.dimension) * self.delta.ln())
    }

    /// `κ_d λ`: the expected number of points in a unit ball.
    pub fn kappa_lambda(&self) -> LogValue {
        self.kappa() * self.intensity
    }

    /// `u = κ_d λ δ^d`: the expected number of points in a δ-ball.
    pub fn u(&self) -> LogValue {
        self.kappa_lambda() * self.delta_pow_d()
    }

    /// `v = κ_d² λ² δ^{2d} = u²`, the quantity whose limit separates the regimes.
    pub fn v(&self) -> LogValue {
        self.u().powi(2)
    }

    /// `(1 - δ/2)^d`, clamped at zero for `δ >= 2`.
    pub fn shrink_factor(&self) -> LogValue {
        let base = 1.0 - self.delta / 2.0;
        if base <= 0.0 {
            LogValue::ZERO
        } else {
            LogValue::from_ln(f64::from(self.dimension) * base.ln())
        }
    }

    /// `(1 + δ/2)^d`.
    pub fn grow_factor(&self) -> LogValue {
        LogValue::from_ln(f64::from(self.dimension) * (self.delta / 2.0).ln_1p())
    }

    /// Radius outside of which no point can belong to a counted edge.
    pub fn support_radius(&self) -> f64 {
        1.0 + self.delta / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalDelta {
    pub value: f64,
    /// Set when the result is not in `(0, 1)`, i.e. for `d = 1`.
    pub outside_unit_interval: bool,
}

/// The dimension-dependent distance `δ_d = 1/d`.
pub fn canonical_delta(d: u32) -> Result<CanonicalDelta> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let value = 1.0 / f64::from(d);
    Ok(CanonicalDelta {
        value,
        outside_unit_interval: !(value > 0.0 && value < 1.0),
    })
}

/// Intensity `λ` solving `κ_d λ δ^d = u`.
pub fn intensity_for_target_u(d: u32, delta: f64, u: f64) -> Result<LogValue> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(invalid(format!("target u must be positive, got {u}")));
    }
    ModelParams::check_geometry(d, delta)?;
    Ok(LogValue::from_ln(u.ln() - ln_kappa(d) - f64::from(d) * delta.ln()))
}

/// Intensity `λ` solving `κ_d² λ² δ^{2d} = v`.
pub fn intensity_for_target_v(d: u32, delta: f64, v: f64) -> Result<LogValue> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(format!("target v must be positive, got {v}")));
    }
    intensity_for_target_u(d, delta, v.sqrt())
}

/// A positive function of the dimension, `coeff · d^exponent`. Deserializes
/// from a bare number (a constant) or `{ "coeff": .., "exponent": .. }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimensionRule {
    Constant(f64),
    Power {
        #[serde(default = "one")]
        coeff: f64,
        exponent: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DimensionRule {
    pub fn eval(&self, d: u32) -> f64 {
        match *self {
            DimensionRule::Constant(c) => c,
            DimensionRule::Power { coeff, exponent } => coeff * f64::from(d).powf(exponent),
        }
    }
}

/// How the intensity `λ_d` is chosen for each dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensitySchedule {
    Explicit(BTreeMap<u32, LogValue>),
    /// `λ_d` such that `κ_d λ_d δ_d^d = u_d`.
    TargetU(DimensionRule),
    /// `λ_d` such that `κ_d² λ_d² δ_d^{2d} = v_d`.
    TargetV(DimensionRule),
}

impl IntensitySchedule {
    pub fn intensity(&self, d: u32, delta: f64) -> Result<LogValue> {
        match self {
            IntensitySchedule::Explicit(table) => {
                let lambda = *table.get(&d).ok_or(Error::MissingScheduleEntry(d))?;
                if !lambda.is_positive() {
                    return Err(invalid(format!("schedule intensity for d={d} is not positive")));
                }
                Ok(lambda)
            }
            IntensitySchedule::TargetU(rule) => intensity_for_target_u(d, delta, rule.eval(d)),
            IntensitySchedule::TargetV(rule) => intensity_for_target_v(d, delta, rule.eval(d)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    Canonical,
    Explicit(f64),
}

impl DeltaRule {
    pub fn delta(&self, d: u32) -> Result<f64> {
        match *self {
            DeltaRule::Canonical => canonical_delta(d).map(|c| c.value),
            DeltaRule::Explicit(delta) => {
                ModelParams::check_geometry(d, delta)?;
                Ok(delta)
            }
        }
    }

    pub fn params(&self, d: u32, schedule: &IntensitySchedule) -> Result<ModelParams> {
        let delta = self.delta(d)?;
        ModelParams::new(d, delta, schedule.intensity(d, delta)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub d: u32,
    pub delta: f64,
    pub intensity: LogValue,
    pub log_v: f64,
    pub log_u: f64,
    pub log_kappa_lambda: f64,
}

/// Evaluates a schedule on each dimension of `d_list`, reporting `ln v_d`,
/// `ln u_d` and `ln(κ_d λ_d)`. A failing entry does not abort the others.
pub fn schedule_diagnostics(
    schedule: &IntensitySchedule,
    delta_rule: DeltaRule,
    d_list: &[u32],
) -> Result<Vec<Result<ScheduleEntry>>> {
    if d_list.is_empty() {
        return Err(invalid("dimension list is empty"));
    }
    if d_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("dimension list must be strictly ascending"));
    }
    Ok(d_list
        .iter()
        .map(|&d| {
            let p = delta_rule.params(d, schedule)?;
            Ok(ScheduleEntry {
                d,
                delta: p.delta(),
                intensity: p.intensity(),
                log_v: p.v().ln(),
                log_u: p.u().ln(),
                log_kappa_lambda: p.kappa_lambda().ln(),
            })
        })
        .collect())
}

/// Limit behaviour of `v_d = κ_d² λ_d² δ_d^{2d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `v_d → ∞`.
    Diverging,
    /// `v_d → c² ∈ (0, ∞)`.
    ConvergentPositive { c_squared: f64 },
    /// `v_d → 0`.
    Vanishing,
    Undetermined,
}

/// Output of [`classify_regime`]. This is a finite-sample trend heuristic
/// for an asymptotic property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub regime: Regime,
    /// Least-squares slope of `ln v_d` against `ln d` over the tail half.
    pub tail_slope: f64,
    pub tail_len: usize,
    pub heuristic: bool,
}

/// Classifies `(d, ln v_d)` pairs by the log-log slope over the tail half.
pub fn classify_regime(values: &[(u32, f64)], tolerance: f64) -> Result<RegimeClassification> {
    if values.len() < 4 {
        return Err(invalid(format!("need at least 4 entries to classify, got {}", values.len())));
    }
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if values.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(invalid("dimensions must be strictly ascending"));
    }
    if values.iter().any(|&(d, lv)| d == 0 || !lv.is_finite()) {
        return Err(invalid("entries must have d >= 1 and finite ln v"));
    }
    let tail = &values[values.len() / 2..];
    let n = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|&(d, _)| f64::from(d).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, lv)| lv).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;

    let regime = if slope > tolerance {
        Regime::Diverging
    } else if slope < -tolerance {
        Regime::Vanishing
    } else if ys.iter().all(|y| (y - my).abs() <= tolerance) {
        Regime::ConvergentPositive { c_squared: my.exp() }
    } else {
        Regime::Undetermined
    };
    Ok(RegimeClassification {
        regime,
        tail_slope: slope,
        tail_len: tail.len(),
        heuristic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_delta_values() {
        assert_eq!(canonical_delta(2).unwrap().value, 0.5);
        assert_eq!(canonical_delta(10).unwrap().value, 0.1);
        let one = canonical_delta(1).unwrap();
        assert_eq!(one.value, 1.0);
        assert!(one.outside_unit_interval);
        assert!(!canonical_delta(2).unwrap().outside_unit_interval);
        assert!(canonical_delta(0).is_err());
    }

    #[test]
    fn target_u_inversion() {
        // mpmath: 1 / (4π/3 · 0.064)
        let lambda = intensity_for_target_u(3, 0.4, 1.0).unwrap().to_f64();
        assert!((lambda - 3.730_193_978_716_297).abs() < 1e-9);

        let p = ModelParams::with_lambda(3, 0.4, 5.0).unwrap();
        let back = intensity_for_target_u(3, 0.4, p.u().to_f64()).unwrap().to_f64();
        assert!((back - 5.0).abs() < 1e-9);
    }

    #[test]
    fn derived_quantities_match_numerics() {
        let p = ModelParams::with_lambda(7, 0.3, 11.0).unwrap();
        let kappa = crate::numerics::ln_unit_ball_volume(7).unwrap();
        assert!((p.ln_kappa() - kappa).abs() < 1e-12);
        assert!((p.u().ln() - (kappa + 11f64.ln() + 7.0 * 0.3f64.ln())).abs() < 1e-12);
        assert!((p.kappa_lambda().ln() - (kappa + 11f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::with_lambda(0, 0.1, 1.0).is_err());
        assert!(ModelParams::with_lambda(3, 0.0, 1.0).is_err());
        assert!(ModelParams::with_lambda(3, 0.1, 0.0).is_err());
        assert!(ModelParams::with_lambda(3, 0.1, -1.0).is_err());
        assert!(ModelParams::zero_intensity(3, 0.1).unwrap().intensity().is_zero());
    }

    #[test]
    fn delta_factors_bounded_for_canonical_choice() {
        let mut prev_lo = 0.0;
        let mut prev_hi = 0.0;
        for d in 2..=10_000u32 {
            let delta = canonical_delta(d).unwrap().value;
            let p = ModelParams::with_lambda(d, delta, 1.0).unwrap();
            let lo = p.shrink_factor().to_f64();
            let hi = p.grow_factor().to_f64();
            // both increase in d, towards e^{-1/2} and e^{1/2}
            assert!(lo > prev_lo && hi > prev_hi, "d={d}");
            assert!((0.5..=1.7).contains(&lo) && (0.5..=1.7).contains(&hi));
            assert!(lo < (-0.5f64).exp() && hi < 0.5f64.exp());
            prev_lo = lo;
            prev_hi = hi;
        }
    }

    #[test]
    fn schedule_examples() {
        let ds = [5, 10, 20];
        let u_rule = IntensitySchedule::TargetU(DimensionRule::Power { coeff: 1.0, exponent: 1.0 });
        for (e, &d) in schedule_diagnostics(&u_rule, DeltaRule::Canonical, &ds).unwrap().iter().zip(&ds) {
            assert!((e.as_ref().unwrap().log_u - f64::from(d).ln()).abs() < 1e-12);
        }
        let v_rule = IntensitySchedule::TargetV(DimensionRule::Constant(4.0));
        for e in schedule_diagnostics(&v_rule, DeltaRule::Canonical, &ds).unwrap() {
            assert!((e.unwrap().log_v - 4f64.ln()).abs() < 1e-12);
        }
        let table = (2..=30).map(|d| (d, LogValue::ONE)).collect();
        let explicit = IntensitySchedule::Explicit(table);
        let dims: Vec<u32> = (2..=30).collect();
        let entries: Vec<_> = schedule_diagnostics(&explicit, DeltaRule::Canonical, &dims)
            .unwrap()
            .into_iter()
            .map(Result::unwrap)
            .collect();
        for w in entries.windows(2) {
            assert!(w[1].log_v < w[0].log_v);
        }
        // κ_d² d^{-2d}
        let e = &entries[3];
        let expected = 2.0 * ln_kappa(e.d) - 2.0 * f64::from(e.d) * f64::from(e.d).ln();
        assert!((e.log_v - expected).abs() < 1e-10);
    }

    #[test]
    fn schedule_entry_errors_are_per_entry() {
        let table = [(5, LogValue::ONE)].into_iter().collect();
        let out = schedule_diagnostics(&IntensitySchedule::Explicit(table), DeltaRule::Canonical, &[5, 6]).unwrap();
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(Error::MissingScheduleEntry(6))));
        assert!(schedule_diagnostics(&IntensitySchedule::TargetU(DimensionRule::Constant(1.0)), DeltaRule::Canonical, &[]).is_err());
        assert!(schedule_diagnostics(&IntensitySchedule::TargetU(DimensionRule::Constant(1.0)), DeltaRule::Canonical, &[6, 5]).is_err());
    }

    fn series(f: impl Fn(f64) -> f64) -> Vec<(u32, f64)> {
        (1..=10).map(|i| (10 * i, f(f64::from(10 * i)).ln())).collect()
    }

    #[test]
    fn classifier_on_constructed_series() {
        let tol = DEFAULT_REGIME_TOLERANCE;
        assert_eq!(classify_regime(&series(|d| d), tol).unwrap().regime, Regime::Diverging);
        assert_eq!(classify_regime(&series(|d| 1.0 / d), tol).unwrap().regime, Regime::Vanishing);
        match classify_regime(&series(|_| 4.0), tol).unwrap().regime {
            Regime::ConvergentPositive { c_squared } => assert!((c_squared - 4.0).abs() <= tol),
            other => panic!("{other:?}"),
        }
        assert!(classify_regime(&series(|d| d)[..3], tol).is_err());
    }

    #[test]
    fn classifier_invariant_under_scaling() {
        for c in [1e-30, 0.5, 7.0, 1e40] {
            let up = classify_regime(&series(|d| c * d * d), 0.05).unwrap();
            let down = classify_regime(&series(|d| c / d.sqrt()), 0.05).unwrap();
            assert_eq!(up.regime, Regime::Diverging);
            assert_eq!(down.regime, Regime::Vanishing);
            assert!((up.tail_slope - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_but_noisy_is_undetermined() {
        // Tail values orthogonal to the centred ln d, so the slope is zero
        // but the spread is far beyond the tolerance.
        let ds = [50u32, 60, 70, 80];
        let xs: Vec<f64> = ds.iter().map(|&d| f64::from(d).ln()).collect();
        let mx = xs.iter().sum::<f64>() / 4.0;
        let dev: Vec<f64> = xs.iter().map(|x| x - mx).collect();
        let w = [1.0, -1.0, -1.0, 1.0];
        let proj = w.iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / dev.iter().map(|b| b * b).sum::<f64>();
        let mut vals: Vec<(u32, f64)> = vec![(10, 0.0), (20, 0.0), (30, 0.0), (40, 0.0)];
        vals.extend(ds.iter().zip(w.iter().zip(&dev)).map(|(&d, (a, b))| (d, a - proj * b)));
        assert_eq!(classify_regime(&vals, 0.05).unwrap().regime, Regime::Undetermined);
    }
}
