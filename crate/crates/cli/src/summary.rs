//! Empirical summary of a simulation run next to the analytic values.

use rggclt_core::moments::{exact_mean, variance_bounds, variance_exact};
use rggclt_core::simulate::ReplicationRecord;
use rggclt_core::ModelParams;
use serde::Serialize;

use crate::error::CliError;

/// Sample statistics of the edge counts. Variance fields are `None` for a
/// single record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub mean_se: Option<f64>,
    /// `n − 1` denominator.
    pub variance: Option<f64>,
    pub variance_se: Option<f64>,
}

pub fn summarize(records: &[ReplicationRecord]) -> Option<Summary> {
    if records.is_empty() {
        return None;
    }
    let n = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.edges as f64).collect();
    let mean = xs.iter().sum::<f64>() / n;
    if records.len() < 2 {
        return Some(Summary { n: 1, mean, mean_se: None, variance: None, variance_se: None });
    }
    let s2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    // Var(s²) ≈ (μ₄ − (n−3)/(n−1) σ⁴) / n
    let var_of_s2 = (m4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n;
    Some(Summary {
        n: records.len(),
        mean,
        mean_se: Some((s2 / n).sqrt()),
        variance: Some(s2),
        variance_se: Some(var_of_s2.max(0.0).sqrt()),
    })
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub d: u32,
    pub delta: f64,
    pub log_lambda: f64,
    pub reps: usize,
    pub emp_mean: f64,
    pub emp_var: Option<f64>,
    pub exact_mean: f64,
    pub var_exact: f64,
    pub var_lo: f64,
    pub var_hi: f64,
    pub config_hash: String,
}

pub fn summary_row(
    params: &ModelParams,
    summary: &Summary,
    quadrature_tol: f64,
    config_hash: String,
) -> Result<SummaryRow, CliError> {
    let bounds = variance_bounds(params);
    Ok(SummaryRow {
        d: params.dimension(),
        delta: params.delta(),
        log_lambda: params.intensity().ln(),
        reps: summary.n,
        emp_mean: summary.mean,
        emp_var: summary.variance,
        exact_mean: exact_mean(params).to_f64(),
        var_exact: variance_exact(params, quadrature_tol)?.to_f64(),
        var_lo: bounds.lower.to_f64(),
        var_hi: bounds.upper.to_f64(),
        config_hash,
    })
}
