//! The three terms `γ₁, γ₂, γ₃` of the second-order Poincaré inequality for
//! the standardized edge count, the resulting Wasserstein bound
//! `2√γ₁ + √γ₂ + γ₃`, and the convergence rate.
//!
//! Three evaluations are offered:
//!
//! * [`gamma_upper`]: closed-form upper bounds obtained from
//!   `A_1 ≤ u · 1{‖x‖ ≤ 1 + δ/2}`.
//! * [`gamma_quadrature`]: `γ₂` and `γ₃` exactly, by radial quadrature. For
//!   the indicator kernel `∫∫ B_{2,2} dΛ² = ∫ A_1² dΛ`.
//! * [`gamma_mc`]: Monte Carlo estimates of the integral expressions,
//!   including `γ₁` for which no reduced form is implemented.
//!
//! Rates are reported up to the unspecified absolute constants.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::edge_count::kernel_sq;
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::model::{ModelParams, Regime};
use crate::moments::{self, a_one_ratio, p_polynomial, radial_moment, third_abs_moment};
use crate::numerics::LogValue;
use crate::point_process::{derive_stream, squared_norm, uniform_in_ball, RngStream};

/// Samples per Monte Carlo block. Each block has its own derived stream, so
/// the estimate is independent of how blocks are scheduled.
pub const MC_BLOCK: usize = 4096;
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaTriple {
    pub gamma1: LogValue,
    pub gamma2: LogValue,
    pub gamma3: LogValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaQuadrature {
    pub gamma2: LogValue,
    pub gamma3: LogValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: LogValue,
    pub std_error: LogValue,
}

impl McEstimate {
    pub const ZERO: McEstimate = McEstimate {
        estimate: LogValue::ZERO,
        std_error: LogValue::ZERO,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaMc {
    pub gamma1: McEstimate,
    pub gamma2: McEstimate,
    pub gamma3: McEstimate,
    pub samples: usize,
}

/// Which variance is substituted for `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// The exact variance.
    #[default]
    Exact,
    /// The lower variance bound. Gives larger, conservative γ bounds.
    LowerBound,
}

fn check_sigma(sigma_sq: LogValue) -> Result<()> {
    if sigma_sq.is_positive() && sigma_sq.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("sigma^2 must be positive, got {sigma_sq}")))
    }
}

/// `σ²` for the given mode.
pub fn sigma_sq(params: &ModelParams, mode: SigmaMode, quadrature_tol: f64) -> Result<LogValue> {
    match mode {
        SigmaMode::Exact => moments::variance_exact(params, quadrature_tol),
        SigmaMode::LowerBound => Ok(moments::variance_bounds(params).lower),
    }
}

/// Closed-form upper bounds with `u = κλδ^d`, `K = κ³λ³δ^{2d}`,
/// `c₊ = (1 + δ/2)^d`:
///
/// ```text
/// γ₁ ≤ σ^{-4} K c₊ (u⁴ + 6u³ + 7u² + u)^{1/2}
/// γ₂ ≤ σ^{-4} K c₊
/// γ₃ ≤ σ^{-3} κλ c₊ (u³ + 3u² + u)
/// ```
pub fn gamma_upper(params: &ModelParams, sigma_sq: LogValue) -> Result<GammaTriple> {
    if params.intensity().is_zero() {
        return Ok(GammaTriple {
            gamma1: LogValue::ZERO,
            gamma2: LogValue::ZERO,
            gamma3: LogValue::ZERO,
        });
    }
    check_sigma(sigma_sq)?;
    let u = params.u();
    let c_plus = params.grow_factor();
    let cubic = params.kappa_lambda().powi(3) * params.delta_pow_d().powi(2);
    let s4 = sigma_sq.powi(2);
    let gamma2 = cubic * c_plus / s4;
    Ok(GammaTriple {
        gamma1: gamma2 * p_polynomial(u)?.sqrt(),
        gamma2,
        gamma3: params.kappa_lambda() * c_plus * third_abs_moment(u)? / sigma_sq.powf(1.5),
    })
}

/// `γ₂ = σ^{-4} ∫ A_1² dΛ` and `γ₃ = σ^{-3} ∫ (A_1³ + 3A_1² + A_1) dΛ`,
/// evaluated by radial quadrature to relative tolerance `tol`.
pub fn gamma_quadrature(params: &ModelParams, sigma_sq: LogValue, tol: f64) -> Result<GammaQuadrature> {
    if params.intensity().is_zero() {
        return Ok(GammaQuadrature {
            gamma2: LogValue::ZERO,
            gamma3: LogValue::ZERO,
        });
    }
    check_sigma(sigma_sq)?;
    let u = params.u();
    let kl = params.kappa_lambda();
    let m1 = radial_moment(params, 1, tol)?;
    let m2 = radial_moment(params, 2, tol)?;
    let m3 = radial_moment(params, 3, tol)?;
    let a_sq = kl * u.powi(2) * m2;
    let third = kl * (u.powi(3) * m3 + u.powi(2) * m2 * 3.0 + u * m1);
    Ok(GammaQuadrature {
        gamma2: a_sq / sigma_sq.powi(2),
        gamma3: third / sigma_sq.powf(1.5),
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

impl Moments {
    fn push(&mut self, values: [f64; 3]) {
        self.n += 1.0;
        for (k, v) in values.into_iter().enumerate() {
            self.sum[k] += v;
            self.sum_sq[k] += v * v;
        }
    }

    fn merge(mut self, other: &Moments) -> Moments {
        self.n += other.n;
        for k in 0..3 {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
        self
    }

    /// Mean and standard error of the mean of component `k`.
    fn mean_and_se(&self, k: usize) -> (f64, f64) {
        let mean = self.sum[k] / self.n;
        let var = ((self.sum_sq[k] - self.n * mean * mean) / (self.n - 1.0)).max(0.0);
        (mean, (var / self.n).sqrt())
    }
}

/// Monte Carlo estimates of
///
/// ```text
/// γ₁ = σ^{-4} ∫∫∫ h(x₁,x₃) h(x₂,x₃) (P(x₁) P(x₂))^{1/4} dΛ³
/// γ₂ = σ^{-4} ∫∫∫ h(x₁,x₃) h(x₂,x₃) dΛ³
/// γ₃ = σ^{-3} ∫ E|D_x E|³ dΛ
/// ```
///
/// with `P(x) = E(D_x E)⁴`. Points are drawn uniformly from `B_{1+δ/2}`
/// and weighted by `(λV)^k`, `V = vol(B_{1+δ/2})`. Restricting to that ball
/// is exact: `h(x, y) = 1` forces both points into it and `A_1` vanishes
/// outside it.
///
/// `P` and `E|D_x E|³` are polynomials in `A_1(x) ≤ u`; they are sampled
/// relative to their value at `u` so the samples stay in `[0, 1]`.
///
/// Blocks of [`MC_BLOCK`] samples use streams derived from one draw of
/// `stream`, and are combined in block order.
pub fn gamma_mc(
    params: &ModelParams,
    sigma_sq: LogValue,
    stream: &mut RngStream,
    n_samples: usize,
    exec: Execution,
) -> Result<GammaMc> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(invalid(format!(
            "need at least {MIN_MC_SAMPLES} Monte Carlo samples, got {n_samples}"
        )));
    }
    if params.intensity().is_zero() {
        return Ok(GammaMc {
            gamma1: McEstimate::ZERO,
            gamma2: McEstimate::ZERO,
            gamma3: McEstimate::ZERO,
            samples: n_samples,
        });
    }
    check_sigma(sigma_sq)?;

    let d = params.dimension();
    let delta = params.delta();
    let delta_sq = delta * delta;
    let radius = params.support_radius();
    let u = params.u();
    let p_top = p_polynomial(u)?;
    let t_top = third_abs_moment(u)?;
    let p_rel = |r: f64| -> Result<f64> {
        let a = u * LogValue::from_f64(a_one_ratio(r, d, delta));
        Ok((p_polynomial(a)? / p_top).to_f64())
    };
    let t_rel = |r: f64| -> Result<f64> {
        let a = u * LogValue::from_f64(a_one_ratio(r, d, delta));
        Ok((third_abs_moment(a)? / t_top).to_f64())
    };

    let block_seed = stream.next_u64();
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let dim = d as usize;
    let per_block = exec.map_indexed(blocks, |b| -> Result<Moments> {
        let len = MC_BLOCK.min(n_samples - b * MC_BLOCK);
        let mut rng = derive_stream(block_seed, b as u64);
        let mut x1 = vec![0.0; dim];
        let mut x2 = vec![0.0; dim];
        let mut x3 = vec![0.0; dim];
        let mut acc = Moments::default();
        for _ in 0..len {
            uniform_in_ball(&mut rng, radius, &mut x1);
            uniform_in_ball(&mut rng, radius, &mut x2);
            uniform_in_ball(&mut rng, radius, &mut x3);
            let linked = kernel_sq(&x1, &x3, delta_sq) && kernel_sq(&x2, &x3, delta_sq);
            let (g1, g2) = if linked {
                let p1 = p_rel(squared_norm(&x1).sqrt())?;
                let p2 = p_rel(squared_norm(&x2).sqrt())?;
                ((p1 * p2).powf(0.25), 1.0)
            } else {
                (0.0, 0.0)
            };
            let g3 = t_rel(squared_norm(&x1).sqrt())?;
            acc.push([g1, g2, g3]);
        }
        Ok(acc)
    });
    let mut total = Moments::default();
    for block in per_block {
        total = total.merge(&block?);
    }

    let lambda_v = params.intensity() * LogValue::from_ln(params.ln_kappa() + f64::from(d) * radius.ln());
    let scale = [
        lambda_v.powi(3) * p_top.sqrt() / sigma_sq.powi(2),
        lambda_v.powi(3) / sigma_sq.powi(2),
        lambda_v * t_top / sigma_sq.powf(1.5),
    ];
    let est = |k: usize| {
        let (m, se) = total.mean_and_se(k);
        McEstimate {
            estimate: scale[k] * LogValue::from_f64(m),
            std_error: scale[k] * LogValue::from_f64(se),
        }
    };
    Ok(GammaMc {
        gamma1: est(0),
        gamma2: est(1),
        gamma3: est(2),
        samples: n_samples,
    })
}

/// `2√γ₁ + √γ₂ + γ₃`.
pub fn wasserstein_upper(g: &GammaTriple) -> Result<LogValue> {
    if [g.gamma1, g.gamma2, g.gamma3].iter().any(|x| x.sign() < 0) {
        return Err(invalid("gamma terms must be nonnegative"));
    }
    Ok(g.gamma1.sqrt() * 2.0 + g.gamma2.sqrt() + g.gamma3)
}

/// `(κλ)^{-1/2} max{1, (κλδ^d)^{-1/2}}`, the rate shape without its
/// absolute constant.
pub fn theorem_rate(params: &ModelParams) -> Result<LogValue> {
    if params.intensity().is_zero() {
        return Err(invalid("rate is undefined at zero intensity"));
    }
    Ok(params.kappa_lambda().powf(-0.5) * LogValue::ONE.max(params.u().powf(-0.5)))
}

/// Leading rate term for a classified schedule: `(κλ)^{-1/2}` when `v_d`
/// diverges or converges to a positive limit, `(κλ)^{-1/2} u^{-1/2}` when
/// it vanishes, and [`theorem_rate`] when the regime is undetermined.
pub fn regime_rate(params: &[ModelParams], regime: &Regime) -> Result<Vec<LogValue>> {
    if params.is_empty() {
        return Err(invalid("need at least one parameter set"));
    }
    params
        .iter()
        .map(|p| {
            if p.intensity().is_zero() {
                return Err(invalid("rate is undefined at zero intensity"));
            }
            let base = p.kappa_lambda().powf(-0.5);
            Ok(match regime {
                Regime::Diverging | Regime::ConvergentPositive { .. } => base,
                Regime::Vanishing => base * p.u().powf(-0.5),
                Regime::Undetermined => theorem_rate(p)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaReport {
    pub gamma_upper: GammaTriple,
    pub gamma_quadrature: GammaQuadrature,
    pub gamma_mc: Option<GammaMc>,
    pub sigma_sq_used: LogValue,
    pub sigma_mode: SigmaMode,
    /// From the upper bounds.
    pub wasserstein_bound: LogValue,
    /// Up to an absolute constant.
    pub theorem_rate: LogValue,
}

/// All γ evaluations for one parameter set. Monte Carlo runs only when
/// `mc` supplies a stream and sample count.
pub fn gamma_report(
    params: &ModelParams,
    mode: SigmaMode,
    quadrature_tol: f64,
    mc: Option<(&mut RngStream, usize)>,
    exec: Execution,
) -> Result<GammaReport> {
    let s = sigma_sq(params, mode, quadrature_tol)?;
    let upper = gamma_upper(params, s)?;
    let gamma_mc = match mc {
        Some((stream, n)) => Some(gamma_mc(params, s, stream, n, exec)?),
        None => None,
    };
    Ok(GammaReport {
        gamma_upper: upper,
        gamma_quadrature: gamma_quadrature(params, s, quadrature_tol)?,
        gamma_mc,
        sigma_sq_used: s,
        sigma_mode: mode,
        wasserstein_bound: wasserstein_upper(&upper)?,
        theorem_rate: theorem_rate(params)?,
    })
}
