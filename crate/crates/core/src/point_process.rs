//! Reproducible samples of a stationary Poisson process restricted to a
//! centred ball.
//!
//! Randomness comes from [`RngStream`]s identified by `(master_seed,
//! stream_index)`: ChaCha8 keyed by the seed with the stream index in the
//! nonce, so distinct indices never overlap and a replication's output does
//! not depend on which thread ran it.

use std::io::{Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::numerics::special::ln_gamma;
use crate::numerics::{ln_kappa, LogValue};

/// Default cap on the expected number of points in one replication.
pub const DEFAULT_MAX_EXPECTED: f64 = 5e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// A deterministic random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    id: Provenance,
}

/// The stream for `(master_seed, stream_index)`. Same inputs give
/// bit-identical output.
pub fn derive_stream(master_seed: u64, stream_index: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_index);
    RngStream {
        rng,
        id: Provenance {
            master_seed,
            stream_index,
        },
    }
}

impl RngStream {
    pub fn identity(&self) -> Provenance {
        self.id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// An immutable point pattern in a centred ball of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    dimension: usize,
    radius: f64,
    coords: Vec<f64>,
    provenance: Option<Provenance>,
}

impl PointConfiguration {
    /// Wraps explicit coordinates (`len = N·d`), checking every point lies
    /// in the ball of the given radius.
    pub fn from_coords(dimension: usize, radius: f64, coords: Vec<f64>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if !(radius > 0.0) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        if !coords.len().is_multiple_of(dimension) {
            return Err(invalid(format!(
                "{} coordinates do not split into {dimension}-dimensional points",
                coords.len()
            )));
        }
        if let Some(bad) = coords.chunks_exact(dimension).find(|p| !inside(p, radius)) {
            return Err(invalid(format!("point {bad:?} lies outside the ball of radius {radius}")));
        }
        Ok(PointConfiguration {
            dimension,
            radius,
            coords,
            provenance: None,
        })
    }

    pub fn empty(dimension: usize, radius: f64) -> Result<Self> {
        Self::from_coords(dimension, radius, Vec::new())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dimension)
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    /// A new configuration with `x` appended. The radius grows if needed.
    pub fn with_point(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(x);
        let norm = squared_norm(x).sqrt();
        Ok(PointConfiguration {
            dimension: self.dimension,
            radius: self.radius.max(norm),
            coords,
            provenance: None,
        })
    }

    /// The points with norm at most `radius`, in their original order.
    pub fn restricted_to(&self, radius: f64) -> Self {
        let coords = self
            .points()
            .filter(|p| inside(p, radius))
            .flatten()
            .copied()
            .collect();
        PointConfiguration {
            dimension: self.dimension,
            radius: radius.min(self.radius),
            coords,
            provenance: self.provenance,
        }
    }

    /// Binary dump: a 40-byte little-endian header `d: u64, N: u64, R: f64,
    /// master_seed: u64, stream_index: u64` followed by `N·d` `f64`
    /// coordinates. Seed and index are `u64::MAX` when the configuration has
    /// no provenance.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let (seed, index) = self
            .provenance
            .map_or((u64::MAX, u64::MAX), |p| (p.master_seed, p.stream_index));
        w.write_all(&(self.dimension as u64).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.radius.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(&index.to_le_bytes())?;
        for c in &self.coords {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)
                .map_err(|e| Error::InvalidDump(format!("truncated input: {e}")))?;
            Ok(word)
        };
        let d = u64::from_le_bytes(next(&mut r)?) as usize;
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let radius = f64::from_le_bytes(next(&mut r)?);
        let seed = u64::from_le_bytes(next(&mut r)?);
        let index = u64::from_le_bytes(next(&mut r)?);
        let total = n
            .checked_mul(d)
            .ok_or_else(|| Error::InvalidDump("point count overflows".into()))?;
        let mut coords = Vec::with_capacity(total.min(1 << 24));
        for _ in 0..total {
            coords.push(f64::from_le_bytes(next(&mut r)?));
        }
        let mut config =
            Self::from_coords(d, radius, coords).map_err(|e| Error::InvalidDump(e.to_string()))?;
        if (seed, index) != (u64::MAX, u64::MAX) {
            config.provenance = Some(Provenance {
                master_seed: seed,
                stream_index: index,
            });
        }
        Ok(config)
    }
}

pub(crate) fn squared_norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum()
}

fn inside(p: &[f64], radius: f64) -> bool {
    let n2 = squared_norm(p);
    n2 <= radius * radius && n2.sqrt() <= radius
}

/// Expected number of points of an intensity-`λ` process in a ball of radius `radius`.
pub fn expected_count(intensity: LogValue, radius: f64, d: u32) -> Result<LogValue> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(radius > 0.0) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    Ok(intensity * LogValue::from_ln(ln_kappa(d) + f64::from(d) * radius.ln()))
}

/// Draws the process on the centred ball of radius `radius`: a Poisson
/// number of points, each uniform in the ball.
pub fn sample_configuration(
    params: &ModelParams,
    radius: f64,
    stream: &mut RngStream,
    max_expected: f64,
) -> Result<PointConfiguration> {
    let d = params.dimension();
    let mean = expected_count(params.intensity(), radius, d)?;
    if mean > LogValue::from_f64(max_expected) {
        return Err(Error::Feasibility {
            log_expected: mean.ln(),
            cap: max_expected,
        });
    }
    let n = poisson(stream, mean.to_f64());
    let dim = d as usize;
    let mut coords = Vec::with_capacity(n as usize * dim);
    let mut point = vec![0.0; dim];
    for _ in 0..n {
        uniform_in_ball(stream, radius, &mut point);
        coords.extend_from_slice(&point);
    }
    Ok(PointConfiguration {
        dimension: dim,
        radius,
        coords,
        provenance: Some(stream.identity()),
    })
}

/// Writes a uniform point of the centred `radius`-ball into `out`: a
/// normalised Gaussian direction scaled to `radius · U^{1/d}`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let d = out.len() as f64;
    let norm2 = loop {
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let n2 = squared_norm(out);
        if n2 > 0.0 && n2.is_finite() {
            break n2;
        }
    };
    let u: f64 = 1.0 - rng.random::<f64>();
    let r = radius * u.powf(1.0 / d);
    let scale = r / norm2.sqrt();
    for c in out.iter_mut() {
        *c *= scale;
    }
    // Rounding can push the norm a few ulps past the radius.
    while !inside(out, radius) {
        for c in out.iter_mut() {
            *c *= 1.0 - f64::EPSILON;
        }
    }
}

/// Poisson variate: sequential inversion below mean 30, Hörmann's PTRS
/// transformed rejection above.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p == 0.0 && cdf < u {
            // Lost the tail to rounding; only reachable for u within ~1e-16 of 1.
            break;
        }
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.024_83 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= -mean + k * loglam - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}
