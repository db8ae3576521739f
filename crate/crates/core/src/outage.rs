//! Outage-set measurement: Monte Carlo estimates for both channel
//! models, the asymmetric Groshev bound, and the two-user MAC outage map.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{effective_gains, ChannelLevels, DetChannelGains, FineGains, Rx};
use crate::det_link::{roundtrip_ok, DetMessages};
use crate::error::{Error, Result};
use crate::gauss_link::{build_constellation, min_distance, ReceiverConstellation};
use crate::rates::RateAllocation;
use crate::seed::{sample_rng, uniform_left_open};

const Z95: f64 = 1.959_963_984_540_054;
/// Failure indices kept in an estimate for replay.
const KEPT_FAILURES: usize = 16;

/// Binomial proportion with a 95% Wilson score interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub samples: u64,
    pub failures: u64,
    pub estimate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
    /// Indices of the first few failing samples, ascending.
    #[serde(default)]
    pub first_failures: Vec<u64>,
}

pub fn wilson95(failures: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == samples { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

impl OutageEstimate {
    pub fn new(samples: u64, failures: u64, seed: u64) -> Self {
        let (wilson_lo, wilson_hi) = wilson95(failures, samples);
        let estimate = if samples == 0 { 0.0 } else { failures as f64 / samples as f64 };
        Self { samples, failures, estimate, wilson_lo, wilson_hi, seed, first_failures: Vec::new() }
    }

    /// Binomial standard error of the estimate.
    pub fn sigma(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        (self.estimate * (1.0 - self.estimate) / self.samples as f64).sqrt()
    }
}

/// Runs `fails(i)` for every sample index and counts the `true`s.
fn count_failures<F>(samples: u64, seed: u64, fails: F) -> Result<OutageEstimate>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let (failures, mut kept) = (0..samples)
        .into_par_iter()
        .map(|i| Ok(if fails(i)? { (1u64, vec![i]) } else { (0, Vec::new()) }))
        .try_reduce(
            || (0, Vec::new()),
            |mut a, b| {
                a.0 += b.0;
                a.1.extend(b.1);
                a.1.sort_unstable();
                a.1.truncate(KEPT_FAILURES);
                Ok(a)
            },
        )?;
    kept.sort_unstable();
    let mut est = OutageEstimate::new(samples, failures, seed);
    est.first_failures = kept;
    Ok(est)
}

/// Deterministic-model gains drawn for sample `index`.
pub fn det_sample_gains<R: Rng + ?Sized>(rng: &mut R) -> DetChannelGains {
    let mut g = [0.0; 6];
    for v in &mut g {
        *v = uniform_left_open(rng, 1.0, 2.0);
    }
    DetChannelGains::from_array(g).expect("samples lie in (1, 2]")
}

/// Whether deterministic sample `index` of run `seed` fails to decode.
pub fn replay_det_sample(n: &ChannelLevels, a: &RateAllocation, seed: u64, index: u64) -> Result<bool> {
    let mut rng = sample_rng(seed, index);
    let g = det_sample_gains(&mut rng);
    let msgs = DetMessages::random(a, &mut rng);
    Ok(!roundtrip_ok(&msgs, a, n, &g)?)
}

/// Fraction of gains in `(1, 2]^{2x3}` for which the deterministic scheme
/// fails at either receiver.
pub fn mc_outage_det(n: &ChannelLevels, a: &RateAllocation, samples: u64, seed: u64) -> Result<OutageEstimate> {
    count_failures(samples, seed, |i| replay_det_sample(n, a, seed, i))
}

pub fn gauss_sample_gains<R: Rng + ?Sized>(rng: &mut R) -> FineGains {
    let mut h = [0.0; 4];
    for v in &mut h {
        *v = uniform_left_open(rng, 1.0, 2.0);
    }
    FineGains::new(h[0], h[1], h[2], h[3]).expect("samples lie in (1, 2]")
}

/// Fraction of gains in `(1, 2]^{2x2}` for which the minimum distance at
/// either receiver falls below `threshold`.
pub fn mc_outage_gauss(
    n: &ChannelLevels,
    a: &RateAllocation,
    samples: u64,
    seed: u64,
    threshold: f64,
    budget: u128,
) -> Result<OutageEstimate> {
    let c = build_constellation(a, n)?;
    let rcs = [ReceiverConstellation::new(&c, Rx::One, budget)?, ReceiverConstellation::new(&c, Rx::Two, budget)?];
    count_failures(samples, seed, |i| {
        let h = gauss_sample_gains(&mut sample_rng(seed, i));
        let g = effective_gains(&h);
        for rc in &rcs {
            if min_distance(&g.receiver(rc.rx), rc, budget)?.d < threshold {
                return Ok(true);
            }
        }
        Ok(false)
    })
}

/// Parameters of the event `|g0 q0 + a1 g1 q1 + a2 g2 q2| < beta` over the
/// integer box `|q_k| <= Q_k`, `q != 0`, with `g` in `(1, 4]^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroshevParams {
    pub beta: f64,
    pub a1: u64,
    pub a2: u64,
    pub q0: u64,
    pub q1: u64,
    pub q2: u64,
}

impl GroshevParams {
    pub fn new(beta: f64, a1: u64, a2: u64, q0: u64, q1: u64, q2: u64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta} is outside (0, 1]")));
        }
        if a1 == 0 || a2 == 0 {
            return Err(Error::InvalidParameter("a1 and a2 must be positive".into()));
        }
        Ok(Self { beta, a1, a2, q0, q1, q2 })
    }

    pub fn q1_tilde(&self) -> f64 {
        let (q0, q2, a1, a2) = (self.q0 as f64, self.q2 as f64, self.a1 as f64, self.a2 as f64);
        (self.q1 as f64).min(8.0 * q0.max(a2 * q2) / a1)
    }

    pub fn q2_tilde(&self) -> f64 {
        let (q0, q1, a1, a2) = (self.q0 as f64, self.q1 as f64, self.a1 as f64, self.a2 as f64);
        (self.q2 as f64).min(8.0 * q0.max(a1 * q1) / a2)
    }

    pub fn box_size(&self) -> u128 {
        let side = |q: u64| 2 * q as u128 + 1;
        side(self.q0) * side(self.q1) * side(self.q2)
    }
}

/// Analytic bound on the Lebesgue measure of the event.
pub fn groshev_bound(p: &GroshevParams) -> f64 {
    let (q0, q1, q2) = (p.q0 as f64, p.q1 as f64, p.q2 as f64);
    let (a1, a2) = (p.a1 as f64, p.a2 as f64);
    let (t1, t2) = (p.q1_tilde(), p.q2_tilde());
    let inner = 2.0 * q2.min(q0 / a2)
        + (q1 * t2).min(q0 * t2 / a1).min(a2 * t2 * t2 / a1)
        + 2.0 * q1.min(q0 / a1)
        + (q2 * t1).min(q0 * t1 / a2).min(a1 * t1 * t1 / a2);
    504.0 * p.beta * inner
}

/// Volume of `(1, 4]^3`.
pub const GROSHEV_VOLUME: f64 = 27.0;
pub const GROSHEV_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroshevEstimate {
    pub fraction: OutageEstimate,
    /// Estimated measure, `27 * fraction`.
    pub measure: f64,
    /// Standard error of `measure`.
    pub sigma: f64,
    pub bound: f64,
}

/// Whether `g` lies in the event, by exact search over the integer box.
/// For each `(q1, q2)` only the nearest admissible `q0` values matter.
pub fn groshev_event(p: &GroshevParams, g: [f64; 3]) -> bool {
    let (q0max, q1max, q2max) = (p.q0 as i64, p.q1 as i64, p.q2 as i64);
    let (a1, a2) = (p.a1 as f64, p.a2 as f64);
    for q1 in -q1max..=q1max {
        for q2 in -q2max..=q2max {
            let t = a1 * g[1] * q1 as f64 + a2 * g[2] * q2 as f64;
            let root = -t / g[0];
            let candidates: [i64; 2] = if q1 == 0 && q2 == 0 {
                [1, -1]
            } else {
                [root.floor() as i64, root.ceil() as i64]
            };
            for q0 in candidates {
                let q0 = q0.clamp(-q0max, q0max);
                if q0 == 0 && q1 == 0 && q2 == 0 {
                    continue;
                }
                if (g[0] * q0 as f64 + t).abs() < p.beta {
                    return true;
                }
            }
        }
    }
    false
}

pub fn mc_groshev_measure(p: &GroshevParams, samples: u64, seed: u64) -> Result<GroshevEstimate> {
    let size = p.box_size();
    if size > GROSHEV_BUDGET {
        return Err(Error::BudgetExceeded { size, budget: GROSHEV_BUDGET });
    }
    let fraction = count_failures(samples, seed, |i| {
        let mut rng = sample_rng(seed, i);
        let g = [0; 3].map(|_| uniform_left_open(&mut rng, 1.0, 4.0));
        Ok(groshev_event(p, g))
    })?;
    Ok(GroshevEstimate {
        measure: GROSHEV_VOLUME * fraction.estimate,
        sigma: GROSHEV_VOLUME * fraction.sigma(),
        bound: groshev_bound(p),
        fraction,
    })
}

/// Outage map of the two-user MAC `y = 2^n (h1 u1 + h2 u2) + z` with
/// `u1` on `q1_levels` points of `[0, 1)` and `u2` on `q2_levels`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacMap {
    pub n: u32,
    pub grid: usize,
    pub q1_levels: u32,
    pub q2_levels: u32,
    /// Row-major, row 0 at the largest `h2`.
    pub black: Vec<bool>,
    /// Violating difference `(k1, k2)` per black cell: the inputs differ by
    /// `k1 / q1_levels` and `k2 / q2_levels`.
    pub witness: Vec<Option<(i32, i32)>>,
}

impl MacMap {
    /// Gain at the centre of cell index `i` along either axis.
    pub fn cell_center(&self, i: usize) -> f64 {
        1.0 + (i as f64 + 0.5) / self.grid as f64
    }

    /// `(h1, h2)` at `(row, col)`.
    pub fn gains_at(&self, row: usize, col: usize) -> (f64, f64) {
        (self.cell_center(col), self.cell_center(self.grid - 1 - row))
    }

    pub fn is_black(&self, row: usize, col: usize) -> bool {
        self.black[row * self.grid + col]
    }

    pub fn black_fraction(&self) -> f64 {
        self.black.iter().filter(|&&b| b).count() as f64 / self.black.len() as f64
    }

    /// Number of distinct violating directions, an empirical strip count.
    pub fn strip_count(&self) -> usize {
        let mut w: Vec<(i32, i32)> = self.witness.iter().flatten().copied().collect();
        w.sort_unstable();
        w.dedup();
        w.len()
    }

    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.grid, self.grid)?;
        let bytes: Vec<u8> = self.black.iter().map(|&b| if b { 0 } else { 255 }).collect();
        out.write_all(&bytes)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row,col,h1,h2,outage")?;
        for row in 0..self.grid {
            for col in 0..self.grid {
                let (h1, h2) = self.gains_at(row, col);
                writeln!(out, "{row},{col},{h1},{h2},{}", u8::from(self.is_black(row, col)))?;
            }
        }
        Ok(())
    }
}

/// Smallest `2^n |h1 d1 + h2 d2|` over nonzero differences, with the
/// minimizing `(k1, k2)`.
pub fn mac_min_distance(n: u32, h1: f64, h2: f64, q1_levels: u32, q2_levels: u32) -> (f64, (i32, i32)) {
    let (l1, l2) = (q1_levels as i32, q2_levels as i32);
    let scale = 2f64.powi(n as i32);
    let mut best = (f64::INFINITY, (0, 0));
    for k2 in 0..l2 {
        for k1 in -(l1 - 1)..l1 {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let d = scale * (h1 * k1 as f64 / l1 as f64 + h2 * k2 as f64 / l2 as f64).abs();
            if d < best.0 {
                best = (d, (k1, k2));
            }
        }
    }
    best
}

pub fn mac_outage_map(n: u32, grid: usize, q1_levels: u32, q2_levels: u32) -> Result<MacMap> {
    if grid < 2 {
        return Err(Error::InvalidParameter("grid must be at least 2".into()));
    }
    if q1_levels < 1 || q2_levels < 1 {
        return Err(Error::InvalidParameter("input alphabets must be nonempty".into()));
    }
    let mut map = MacMap { n, grid, q1_levels, q2_levels, black: Vec::new(), witness: Vec::new() };
    let cells: Vec<Option<(i32, i32)>> = (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let (h1, h2) = map.gains_at(idx / grid, idx % grid);
            let (d, w) = mac_min_distance(n, h1, h2, q1_levels, q2_levels);
            (d <= 2.0).then_some(w)
        })
        .collect();
    map.black = cells.iter().map(Option::is_some).collect();
    map.witness = cells;
    Ok(map)
}
