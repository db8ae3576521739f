//! Symmetric-level sweeps of the achievable rate per level.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelLevels;
use crate::error::{Error, Result};
use crate::outage::{mc_outage_det, OutageEstimate};
use crate::rates::{allocate_penalized, Model, OutageTarget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DofRow {
    pub n: u32,
    pub achieved_rate: u32,
    pub achieved_per_level: f64,
    pub limit: f64,
    /// `4/3 - (2 log2(128/delta) + 4) / n`.
    pub envelope: f64,
    pub outage: Option<OutageEstimate>,
}

pub const DOF_LIMIT: f64 = 4.0 / 3.0;

pub fn dof_envelope(n: u32, delta: OutageTarget) -> f64 {
    DOF_LIMIT - (2.0 * (128.0 / delta.delta()).log2() + 4.0) / f64::from(n)
}

/// One row per symmetric `n` in `range`, using the penalized deterministic
/// allocation. With `samples > 0` each row also carries a Monte Carlo
/// outage estimate seeded by `seed + n`. Levels too small for any
/// penalized allocation report a zero rate.
pub fn dof_table(
    range: std::ops::RangeInclusive<u32>,
    delta: OutageTarget,
    samples: u64,
    seed: u64,
) -> Result<Vec<DofRow>> {
    range
        .map(|n| {
            let levels = ChannelLevels::symmetric(n);
            let a = match allocate_penalized(&levels, delta, Model::Det) {
                Ok(a) => Some(a),
                Err(Error::Infeasible) => None,
                Err(e) => return Err(e),
            };
            let outage = match &a {
                Some(a) if samples > 0 => Some(mc_outage_det(&levels, a, samples, seed.wrapping_add(u64::from(n)))?),
                _ => None,
            };
            let achieved = a.map_or(0, |a| a.sum_rate());
            Ok(DofRow {
                n,
                achieved_rate: achieved,
                achieved_per_level: f64::from(achieved) / f64::from(n.max(1)),
                limit: DOF_LIMIT,
                envelope: dof_envelope(n, delta),
                outage,
            })
        })
        .collect()
}
