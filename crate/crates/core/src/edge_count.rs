//! The edge-counting statistic: unordered pairs `{x, y}` of process points
//! with `‖x − y‖ ≤ δ` and midpoint in the closed unit ball.
//!
//! Two pair-search strategies give identical counts. `BruteForce` checks all
//! `N(N−1)/2` pairs. `SparseGrid` hashes points into cells of side ≈ δ and,
//! per point, walks the `3^d` neighbouring cell keys depth-first through a
//! prefix trie of the occupied keys, abandoning a branch as soon as the
//! prefix is unoccupied or the partial box distance already exceeds δ. Only
//! occupied cells are ever stored.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::point_process::PointConfiguration;

/// Cell side as a multiple of δ. Slightly above one so that two coordinates
/// at distance exactly δ never land two cells apart after rounding.
const CELL_SLACK: f64 = 1.0 + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    BruteForce,
    SparseGrid,
    /// `SparseGrid` when `3^d <= 4N`, otherwise `BruteForce`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeCountResult {
    pub count: u64,
    pub strategy_used: Strategy,
    /// Number of candidate pairs the kernel was evaluated on.
    pub pairs_examined: u64,
}

/// The indicator `h(x, y)`: `‖x − y‖ ≤ δ` and `‖x + y‖ ≤ 2`.
pub fn kernel(x: &[f64], y: &[f64], delta: f64) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    check_delta(delta)?;
    Ok(kernel_sq(x, y, delta * delta))
}

#[inline]
pub(crate) fn kernel_sq(x: &[f64], y: &[f64], delta_sq: f64) -> bool {
    let mut diff = 0.0;
    for (a, b) in x.iter().zip(y) {
        let t = a - b;
        diff += t * t;
        if diff > delta_sq {
            return false;
        }
    }
    let sum: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum();
    sum <= 4.0
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("delta must be positive and finite, got {delta}")))
    }
}

/// Exact edge count of `config`, single-threaded.
pub fn count_edges(config: &PointConfiguration, delta: f64, strategy: Strategy) -> Result<EdgeCountResult> {
    count_edges_with(config, delta, strategy, Execution::Sequential)
}

pub fn count_edges_with(
    config: &PointConfiguration,
    delta: f64,
    strategy: Strategy,
    exec: Execution,
) -> Result<EdgeCountResult> {
    check_delta(delta)?;
    let resolved = match strategy {
        Strategy::Auto => {
            let probes = 3f64.powi(config.dimension().min(i32::MAX as usize) as i32);
            if probes <= 4.0 * config.len() as f64 {
                Strategy::SparseGrid
            } else {
                Strategy::BruteForce
            }
        }
        s => s,
    };
    let (count, pairs_examined) = match resolved {
        Strategy::BruteForce => brute_force(config, delta, exec),
        _ => SparseGrid::build(config, delta).count(config, delta, exec),
    };
    Ok(EdgeCountResult {
        count,
        strategy_used: resolved,
        pairs_examined,
    })
}

fn brute_force(config: &PointConfiguration, delta: f64, exec: Execution) -> (u64, u64) {
    let n = config.len();
    let delta_sq = delta * delta;
    exec.sum_indexed(n, |i| {
        let x = config.point(i);
        let hits = (i + 1..n).filter(|&j| kernel_sq(x, config.point(j), delta_sq)).count() as u64;
        (hits, (n - i - 1) as u64)
    })
}

struct SparseGrid {
    side: f64,
    /// `(parent node, cell coordinate) -> child node`; node 0 is the root
    /// and nodes at depth `d` are occupied cells.
    children: FxHashMap<(u32, i64), u32>,
    /// Leaf node -> range of `order`.
    leaves: FxHashMap<u32, (u32, u32)>,
    /// Point indices grouped by cell, ascending within each cell.
    order: Vec<u32>,
}

impl SparseGrid {
    fn build(config: &PointConfiguration, delta: f64) -> Self {
        let side = delta * CELL_SLACK;
        let mut children = FxHashMap::default();
        let mut next_node = 1u32;
        let mut leaf_of = Vec::with_capacity(config.len());
        for p in config.points() {
            let mut node = 0u32;
            for &c in p {
                let key = (node, cell_coord(c, side));
                node = *children.entry(key).or_insert_with(|| {
                    next_node += 1;
                    next_node - 1
                });
            }
            leaf_of.push(node);
        }
        let mut order: Vec<u32> = (0..config.len() as u32).collect();
        order.sort_by_key(|&i| (leaf_of[i as usize], i));
        let mut leaves = FxHashMap::default();
        let mut start = 0usize;
        while start < order.len() {
            let leaf = leaf_of[order[start] as usize];
            let mut end = start + 1;
            while end < order.len() && leaf_of[order[end] as usize] == leaf {
                end += 1;
            }
            leaves.insert(leaf, (start as u32, end as u32));
            start = end;
        }
        SparseGrid {
            side,
            children,
            leaves,
            order,
        }
    }

    fn count(&self, config: &PointConfiguration, delta: f64, exec: Execution) -> (u64, u64) {
        let delta_sq = delta * delta;
        let prune = delta_sq * (1.0 + 1e-9);
        exec.sum_indexed(config.len(), |i| {
            let mut acc = (0u64, 0u64);
            let query = Query {
                grid: self,
                config,
                i,
                x: config.point(i),
                delta_sq,
                prune,
            };
            query.walk(0, 0, 0.0, &mut acc);
            acc
        })
    }
}

#[inline]
fn cell_coord(c: f64, side: f64) -> i64 {
    (c / side).floor() as i64
}

struct Query<'a> {
    grid: &'a SparseGrid,
    config: &'a PointConfiguration,
    i: usize,
    x: &'a [f64],
    delta_sq: f64,
    prune: f64,
}

impl Query<'_> {
    fn walk(&self, level: usize, node: u32, dist_sq: f64, acc: &mut (u64, u64)) {
        let side = self.grid.side;
        let coord = self.x[level];
        let home = cell_coord(coord, side);
        for offset in -1..=1i64 {
            let cell = home + offset;
            let Some(&child) = self.grid.children.get(&(node, cell)) else {
                continue;
            };
            let gap = match offset {
                -1 => (coord - (cell + 1) as f64 * side).max(0.0),
                1 => (cell as f64 * side - coord).max(0.0),
                _ => 0.0,
            };
            let d2 = dist_sq + gap * gap;
            if d2 > self.prune {
                continue;
            }
            if level + 1 == self.x.len() {
                let (start, end) = self.grid.leaves[&child];
                for &j in &self.grid.order[start as usize..end as usize] {
                    let j = j as usize;
                    if j <= self.i {
                        continue;
                    }
                    acc.1 += 1;
                    if kernel_sq(self.x, self.config.point(j), self.delta_sq) {
                        acc.0 += 1;
                    }
                }
            } else {
                self.walk(level + 1, child, d2, acc);
            }
        }
    }
}

/// `D_x F = F(η + δ_x) − F(η)`: the number of points `y` with `h(y, x) = 1`.
pub fn first_difference(config: &PointConfiguration, x: &[f64], delta: f64) -> Result<u64> {
    if x.len() != config.dimension() {
        return Err(Error::DimensionMismatch {
            expected: config.dimension(),
            found: x.len(),
        });
    }
    check_delta(delta)?;
    let delta_sq = delta * delta;
    Ok(config.points().filter(|y| kernel_sq(y, x, delta_sq)).count() as u64)
}

/// `D_{x1,x2} F = h(x1, x2)`, independent of the configuration.
pub fn second_difference(x1: &[f64], x2: &[f64], delta: f64) -> Result<bool> {
    kernel(x1, x2, delta)
}

/// Every counted pair `(i, j)`, `i < j`, by exhaustive search.
pub fn contributing_pairs(config: &PointConfiguration, delta: f64) -> Result<Vec<(usize, usize)>> {
    check_delta(delta)?;
    let delta_sq = delta * delta;
    let n = config.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if kernel_sq(config.point(i), config.point(j), delta_sq) {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}
