//! Distance of a standardized sample to the standard normal law, and the
//! intensity ladder used to watch the normal approximation improve.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::model::ModelParams;
use crate::moments::{exact_mean, variance_exact};
use crate::point_process::Provenance;
use crate::simulate::{self, SimulationPlan};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `Φ(t)`.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * std::f64::consts::FRAC_1_SQRT_2)
}

/// `φ(t)`.
pub fn normal_pdf(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * t * t).exp()
}

/// `Ψ(t) = ∫_{-∞}^t Φ(s) ds = t Φ(t) + φ(t)`.
pub fn normal_cdf_antiderivative(t: f64) -> f64 {
    t * normal_cdf(t) + normal_pdf(t)
}

/// `Φ^{-1}(p)` for `p ∈ (0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// How the raw counts were centred and scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    /// Exact mean and exact variance of the statistic.
    ExactMeanExactVar,
    /// Sample mean and sample standard deviation.
    EmpiricalMoments,
}

/// A sorted, finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    standardization: Standardization,
    provenance: Option<(ModelParams, Provenance)>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>, standardization: Standardization) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sample must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample entries must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample {
            values,
            standardization,
            provenance: None,
        })
    }

    /// Records which model and seeds produced the sample. `stream_index` is
    /// the stream of the first replication.
    pub fn with_provenance(mut self, params: ModelParams, provenance: Provenance) -> Self {
        self.provenance = Some((params, provenance));
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn standardization(&self) -> Standardization {
        self.standardization
    }

    pub fn provenance(&self) -> Option<(ModelParams, Provenance)> {
        self.provenance
    }
}

/// Sorted `(x − center) / scale`, tagged [`Standardization::ExactMeanExactVar`].
pub fn standardize(raw: &[f64], center: f64, scale: f64) -> Result<EmpiricalSample> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("scale must be positive, got {scale}")));
    }
    EmpiricalSample::new(
        raw.iter().map(|x| (x - center) / scale).collect(),
        Standardization::ExactMeanExactVar,
    )
}

/// Standardizes with the sample mean and sample standard deviation.
pub fn standardize_empirical(raw: &[f64]) -> Result<EmpiricalSample> {
    let (mean, var) = mean_and_var(raw);
    let mut s = standardize(raw, mean, var.sqrt())?;
    s.standardization = Standardization::EmpiricalMoments;
    Ok(s)
}

fn mean_and_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// `∫_a^b Φ`, arranged so no large terms cancel.
fn cdf_integral(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        (b - a) - (normal_cdf_antiderivative(-a) - normal_cdf_antiderivative(-b))
    } else if b <= 0.0 {
        normal_cdf_antiderivative(b) - normal_cdf_antiderivative(a)
    } else {
        cdf_integral(a, 0.0) + cdf_integral(0.0, b)
    }
}

/// `∫_a^b |p − Φ(t)| dt`.
fn level_gap(a: f64, b: f64, p: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let cross = normal_quantile(p);
    let below = |lo: f64, hi: f64| (p * (hi - lo) - cdf_integral(lo, hi)).max(0.0);
    let above = |lo: f64, hi: f64| (cdf_integral(lo, hi) - p * (hi - lo)).max(0.0);
    if cross <= a {
        above(a, b)
    } else if cross >= b {
        below(a, b)
    } else {
        below(a, cross) + above(cross, b)
    }
}

/// `W₁(F_n, N(0,1)) = ∫ |F_n − Φ|`, exactly: `F_n` is constant between
/// order statistics and each piece integrates in closed form through `Ψ`.
pub fn wasserstein_to_standard_normal(sample: &EmpiricalSample) -> f64 {
    let x = &sample.values;
    let n = x.len() as f64;
    let mut total = normal_cdf_antiderivative(x[0]) + normal_cdf_antiderivative(-x[x.len() - 1]);
    for (k, w) in x.windows(2).enumerate() {
        total += level_gap(w[0], w[1], (k + 1) as f64 / n);
    }
    total
}

/// `sup_t |F_n(t) − Φ(t)|`.
pub fn kolmogorov_to_standard_normal(sample: &EmpiricalSample) -> f64 {
    let n = sample.values.len() as f64;
    sample
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            let i = i as f64;
            ((i + 1.0) / n - f).abs().max((i / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub wasserstein_1: f64,
    pub kolmogorov: f64,
    pub sample_mean: f64,
    /// `n − 1` denominator; 0 for a single value.
    pub sample_var: f64,
    /// `m₃ / m₂^{3/2}` with central moments over `n`; 0 for a constant sample.
    pub sample_skewness: f64,
    pub n: usize,
}

pub fn normality_report(sample: &EmpiricalSample) -> NormalityReport {
    let x = &sample.values;
    let n = x.len() as f64;
    let (mean, var) = mean_and_var(x);
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    NormalityReport {
        wasserstein_1: wasserstein_to_standard_normal(sample),
        kolmogorov: kolmogorov_to_standard_normal(sample),
        sample_mean: mean,
        sample_var: var,
        sample_skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 },
        n: x.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderRung {
    pub multiplier: f64,
    pub params: ModelParams,
    pub report: NormalityReport,
}

/// Options shared by all rungs of [`clt_ladder`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    pub replications: usize,
    pub master_seed: u64,
    pub max_expected: f64,
    pub quadrature_tol: f64,
}

/// For each multiplier `m`, simulates `replications` counts at intensity
/// `m λ`, standardizes them with the exact mean and variance and reports the
/// distance to normality. Rung `r`, replication `i` uses stream
/// `(r << 32) + i`, so rung 0 reproduces a plain simulation run.
pub fn clt_ladder(
    base: &ModelParams,
    multipliers: &[f64],
    options: &LadderOptions,
    exec: Execution,
) -> Result<Vec<LadderRung>> {
    if multipliers.is_empty() {
        return Err(invalid("need at least one multiplier"));
    }
    if multipliers.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(invalid("multipliers must be positive"));
    }
    if multipliers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("multipliers must be strictly ascending"));
    }
    if options.replications < 2 {
        return Err(invalid("need at least 2 replications per rung"));
    }
    multipliers
        .iter()
        .enumerate()
        .map(|(r, &m)| {
            let params = base.scale_intensity(m)?;
            let plan = SimulationPlan {
                params,
                replications: options.replications,
                master_seed: options.master_seed,
                stream_offset: (r as u64) << 32,
                max_expected: options.max_expected,
                record_timing: false,
            };
            let records = simulate::run(&plan, exec)?;
            let counts: Vec<f64> = records.iter().map(|r| r.edges as f64).collect();
            let scale = variance_exact(&params, options.quadrature_tol)?.sqrt().to_f64();
            let sample = standardize(&counts, exact_mean(&params).to_f64(), scale)?.with_provenance(
                params,
                Provenance {
                    master_seed: options.master_seed,
                    stream_index: plan.stream_offset,
                },
            );
            Ok(LadderRung {
                multiplier: m,
                params,
                report: normality_report(&sample),
            })
        })
        .collect()
}
