//! Independent replications of the edge count.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::edge_count::{count_edges_with, Strategy};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::ModelParams;
use crate::point_process::{derive_stream, expected_count, sample_configuration, DEFAULT_MAX_EXPECTED};
use crate::numerics::LogValue;

/// One replication's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub n_points: u64,
    pub edges: u64,
    /// Wall time in milliseconds, or 0 when timing is off.
    pub ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationPlan {
    pub params: ModelParams,
    pub replications: usize,
    pub master_seed: u64,
    /// Replication `i` uses stream `stream_offset + i`.
    pub stream_offset: u64,
    pub max_expected: f64,
    pub record_timing: bool,
}

impl SimulationPlan {
    pub fn new(params: ModelParams, replications: usize, master_seed: u64) -> Self {
        SimulationPlan {
            params,
            replications,
            master_seed,
            stream_offset: 0,
            max_expected: DEFAULT_MAX_EXPECTED,
            record_timing: false,
        }
    }

    /// Fails with [`Error::Feasibility`] if one replication is expected to
    /// hold more than `max_expected` points.
    pub fn check_feasible(&self) -> Result<()> {
        let p = &self.params;
        let mean = expected_count(p.intensity(), p.support_radius(), p.dimension())?;
        if mean > LogValue::from_f64(self.max_expected) {
            return Err(Error::Feasibility {
                log_expected: mean.ln(),
                cap: self.max_expected,
            });
        }
        Ok(())
    }
}

/// Samples the process on `B_{1+δ/2}` once per replication and counts edges.
/// Records come back in replication order and do not depend on `exec`
/// (apart from `ms`).
pub fn run(plan: &SimulationPlan, exec: Execution) -> Result<Vec<ReplicationRecord>> {
    plan.check_feasible()?;
    let p = plan.params;
    let radius = p.support_radius();
    exec.map_indexed(plan.replications, |i| {
        let start = plan.record_timing.then(Instant::now);
        let mut stream = derive_stream(plan.master_seed, plan.stream_offset + i as u64);
        let config = sample_configuration(&p, radius, &mut stream, plan.max_expected)?;
        let count = count_edges_with(&config, p.delta(), Strategy::Auto, Execution::Sequential)?;
        Ok(ReplicationRecord {
            replication: i as u64,
            n_points: config.len() as u64,
            edges: count.count,
            ms: start.map_or(0, |s| s.elapsed().as_millis() as u64),
        })
    })
    .into_iter()
    .collect()
}
