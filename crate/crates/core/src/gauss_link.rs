//! Gaussian modulation chain: constellation layout, minimum distance,
//! nearest-point demodulation and Monte Carlo error statistics.
//!
//! Symbol values are dyadic, so they are stored as `i128` fixed-point
//! integers with `F = max(n11, n22)` fractional bits; differences are
//! exact and only the final multiplication by a gain is rounded (in
//! double-double precision).

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    effective_gains, gauss_channel_apply, modulate_inputs, quantize_gains, ChannelLevels, FineGains, ReceiverGains, Rx,
};
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::outage::OutageEstimate;
use crate::rates::{RateAllocation, MSB_GUARD, PRIVATE_LSB_GUARD};
use crate::seed::sample_rng;

/// Default cap on enumeration sizes.
pub const DEFAULT_BUDGET: u128 = 1 << 24;
/// Largest gain exponent the fixed-point representation supports.
pub const MAX_LEVEL: u32 = 50;

/// Levels `start ..= start + width - 1` of a modulated symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: u32,
    pub width: u32,
}

impl Window {
    fn end(&self) -> u32 {
        self.start + self.width - 1
    }

    fn levels(&self) -> impl Iterator<Item = u32> {
        self.start..self.start + self.width
    }

    /// `sum_k [bits]_k 2^{-(start + k)}`, bit 0 at the top level.
    fn value(&self, bits: u64) -> f64 {
        (0..self.width)
            .filter(|k| (bits >> k) & 1 == 1)
            .map(|k| 2f64.powi(-((self.start + k) as i32)))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    U11c,
    U11p,
    U12,
    U21,
    U22c,
    U22p,
}

impl Slot {
    pub const ALL: [Slot; 6] = [Slot::U11c, Slot::U11p, Slot::U12, Slot::U21, Slot::U22c, Slot::U22p];

    fn index(self) -> usize {
        self as usize
    }
}

/// Bit windows of the six message slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModConstellation {
    pub levels: ChannelLevels,
    pub allocation: RateAllocation,
    pub windows: [Window; 6],
    /// Zero levels below each private window, `(u11p, u22p)`.
    pub private_guard: [u32; 2],
}

/// One message per slot, bit `k` of `bits[slot]` at window level `start + k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Point {
    pub bits: [u64; 6],
}

impl ModConstellation {
    pub fn window(&self, s: Slot) -> Window {
        self.windows[s.index()]
    }

    pub fn enumeration_size(&self) -> u128 {
        1u128 << self.allocation.sum_rate()
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut p = Point::default();
        for s in Slot::ALL {
            let w = self.window(s).width;
            p.bits[s.index()] = if w == 0 { 0 } else { rng.random::<u64>() & ((1u64 << w) - 1) };
        }
        p
    }

    /// `(u11, u12, u21, u22)` for a point.
    pub fn symbols(&self, p: &Point) -> (f64, f64, f64, f64) {
        let v = |s: Slot| self.window(s).value(p.bits[s.index()]);
        (v(Slot::U11c) + v(Slot::U11p), v(Slot::U12), v(Slot::U21), v(Slot::U22c) + v(Slot::U22p))
    }
}

fn private_window(n_own: u32, common_end: u32, width: u32) -> Option<(Window, u32)> {
    if width == 0 {
        return Some((Window { start: n_own + 1, width: 0 }, PRIVATE_LSB_GUARD));
    }
    let floor = common_end.max(MSB_GUARD);
    (0..=PRIVATE_LSB_GUARD).rev().find_map(|guard| {
        let end = n_own.checked_sub(guard)?;
        let start = (end + 1).checked_sub(width)?;
        (start > floor).then_some((Window { start, width }, guard))
    })
}

/// Gaussian layout: every common and cross window is the deterministic
/// one moved down by two levels, privates sit at the bottom with up to
/// five zero levels below them.
pub fn build_constellation(a: &RateAllocation, n: &ChannelLevels) -> Result<ModConstellation> {
    n.require_strong_direct()?;
    if n.n11.max(n.n22) > MAX_LEVEL {
        return Err(Error::InvalidParameter(format!("Gaussian layout supports levels up to {MAX_LEVEL}")));
    }
    let g = MSB_GUARD;
    let misfit = || Error::InvalidParameter(format!("allocation {:?} does not fit levels {n}", a.as_tuple()));
    let top = |width: u32, offset: u32, n_own: u32| -> Result<Window> {
        let w = Window { start: offset + g + 1, width };
        if width > 0 && w.end() > n_own {
            return Err(misfit());
        }
        Ok(w)
    };
    let u11c = top(a.r11c, 0, n.n11)?;
    let u22c = top(a.r22c, 0, n.n22)?;
    let u21 = top(a.r21, n.n11 - n.n12, n.n11)?;
    let u12 = top(a.r12, n.n22 - n.n21, n.n22)?;
    let end_of = |w: Window| if w.width == 0 { 0 } else { w.end() };
    let (u11p, guard1) = private_window(n.n11, end_of(u11c), a.r11p).ok_or_else(misfit)?;
    let (u22p, guard2) = private_window(n.n22, end_of(u22c), a.r22p).ok_or_else(misfit)?;
    Ok(ModConstellation {
        levels: *n,
        allocation: *a,
        windows: [u11c, u11p, u12, u21, u22c, u22p],
        private_guard: [guard1, guard2],
    })
}

/// A bit of `slot` at window offset `k` adds `weight` to a symbol.
#[derive(Clone, Copy, Debug)]
struct Contribution {
    slot: Slot,
    k: u32,
    weight: i128,
}

fn contributions(c: &ModConstellation, parts: &[(Slot, u32)], frac_bits: u32) -> Vec<Contribution> {
    let mut out = Vec::new();
    for &(slot, exp) in parts {
        let w = c.window(slot);
        for (k, level) in w.levels().enumerate() {
            let shift = frac_bits as i64 + exp as i64 - level as i64;
            debug_assert!((0..126).contains(&shift));
            out.push(Contribution { slot, k: k as u32, weight: 1i128 << shift });
        }
    }
    out
}

fn symbol_of(parts: &[Contribution], p: &Point) -> i128 {
    parts.iter().filter(|c| (p.bits[c.slot.index()] >> c.k) & 1 == 1).map(|c| c.weight).sum()
}

fn grow(set: Vec<i128>, weight: i128, signed: bool, budget: u128) -> Result<Vec<i128>> {
    let mut out = Vec::with_capacity(set.len() * if signed { 3 } else { 2 });
    out.extend_from_slice(&set);
    out.extend(set.iter().map(|v| v + weight));
    if signed {
        out.extend(set.iter().map(|v| v - weight));
    }
    out.sort_unstable();
    out.dedup();
    if out.len() as u128 > budget {
        return Err(Error::BudgetExceeded { size: out.len() as u128, budget });
    }
    Ok(out)
}

/// All values `sum_i e_i w_i` with `e_i` in `{0, 1}` (or `{-1, 0, 1}`).
fn sums(parts: &[Contribution], signed: bool, budget: u128) -> Result<Vec<i128>> {
    parts.iter().try_fold(vec![0i128], |set, c| grow(set, c.weight, signed, budget))
}

/// What one receiver sees: desired direct symbol `s1`, desired cross
/// symbol `s2`, aligned interference `s0`, and the private term it
/// treats as noise.
#[derive(Clone, Debug)]
pub struct ReceiverConstellation {
    pub rx: Rx,
    frac_bits: u32,
    direct: Vec<Contribution>,
    cross: Vec<Contribution>,
    interference: Vec<Contribution>,
    s1: Vec<i128>,
    s2: Vec<i128>,
    s0: Vec<i128>,
    s0_approx: Vec<f64>,
}

/// Estimated symbol triple, fixed-point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReceiverSymbols {
    pub s1: i128,
    pub s2: i128,
    pub s0: i128,
}

impl ReceiverConstellation {
    pub fn new(c: &ModConstellation, rx: Rx, budget: u128) -> Result<Self> {
        let n = c.levels;
        let frac_bits = n.n11.max(n.n22);
        let (direct, cross, interference) = match rx {
            Rx::One => (
                vec![(Slot::U11c, n.n11), (Slot::U11p, n.n11)],
                vec![(Slot::U12, n.n12)],
                vec![(Slot::U21, n.n11), (Slot::U22c, n.n12)],
            ),
            Rx::Two => (
                vec![(Slot::U22c, n.n22), (Slot::U22p, n.n22)],
                vec![(Slot::U21, n.n21)],
                vec![(Slot::U12, n.n22), (Slot::U11c, n.n21)],
            ),
        };
        let direct = contributions(c, &direct, frac_bits);
        let cross = contributions(c, &cross, frac_bits);
        let interference = contributions(c, &interference, frac_bits);
        let s1 = sums(&direct, false, budget)?;
        let s2 = sums(&cross, false, budget)?;
        let s0 = sums(&interference, false, budget)?;
        let total = s1.len() as u128 * s2.len() as u128 * s0.len() as u128;
        if total > budget {
            return Err(Error::BudgetExceeded { size: total, budget });
        }
        let s0_approx = s0.iter().map(|&v| to_real(v, frac_bits)).collect();
        Ok(Self { rx, frac_bits, direct, cross, interference, s1, s2, s0, s0_approx })
    }

    /// Sizes of the direct, cross and interference symbol sets.
    pub fn sizes(&self) -> [usize; 3] {
        [self.s1.len(), self.s2.len(), self.s0.len()]
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn symbol_sets(&self) -> (&[i128], &[i128], &[i128]) {
        (&self.s1, &self.s2, &self.s0)
    }

    /// The triple a point produces at this receiver.
    pub fn symbols_of(&self, p: &Point) -> ReceiverSymbols {
        ReceiverSymbols {
            s1: symbol_of(&self.direct, p),
            s2: symbol_of(&self.cross, p),
            s0: symbol_of(&self.interference, p),
        }
    }

    fn dd(&self, v: i128) -> DoubleDouble {
        DoubleDouble::from_i128(v).ldexp(-(self.frac_bits as i32))
    }

    /// Noiseless received value `g1 s1 + g2 s2 + g0 s0` with `(g1, g2)`
    /// the direct and cross gains of this receiver.
    fn value_dd(&self, g: &ReceiverGains, t: &ReceiverSymbols) -> DoubleDouble {
        let (gd, gc) = g.desired(self.rx);
        self.dd(t.s1).mul_f64(gd).add(self.dd(t.s2).mul_f64(gc)).add(self.dd(t.s0).mul_f64(g.g0))
    }

    pub fn value(&self, g: &ReceiverGains, t: &ReceiverSymbols) -> f64 {
        self.value_dd(g, t).to_f64()
    }
}

pub fn to_real(v: i128, frac_bits: u32) -> f64 {
    DoubleDouble::from_i128(v).ldexp(-(frac_bits as i32)).to_f64()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinDistanceReport {
    /// Infinite for a single-point constellation.
    pub d: f64,
    /// Minimizing difference `(ds1, ds2, ds0)`.
    pub argmin: Option<[f64; 3]>,
    /// Sizes of the direct, cross and interference symbol sets.
    pub sizes: [usize; 3],
    /// Sizes of the three difference sets.
    pub difference_sizes: [usize; 3],
}

fn nearest_candidates(sorted: &[f64], target: f64) -> std::ops::Range<usize> {
    let p = sorted.partition_point(|&v| v < target);
    p.saturating_sub(2)..(p + 2).min(sorted.len())
}

/// Exact minimum of `|g1 ds1 + g2 ds2 + g0 ds0|` over nonzero difference
/// triples, by difference-set enumeration.
pub fn min_distance(g: &ReceiverGains, rc: &ReceiverConstellation, budget: u128) -> Result<MinDistanceReport> {
    let d1 = sums(&rc.direct, true, budget)?;
    let d2 = sums(&rc.cross, true, budget)?;
    let d0 = sums(&rc.interference, true, budget)?;
    let size = d1.len() as u128 * d2.len() as u128 * d0.len() as u128;
    if size > budget {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let (gd, gc) = g.desired(rc.rx);
    let g0 = g.g0;
    let d0_approx: Vec<f64> = d0.iter().map(|&v| to_real(v, rc.frac_bits)).collect();
    let d0_dd: Vec<DoubleDouble> = d0.iter().map(|&v| rc.dd(v).mul_f64(g0)).collect();

    // A triple and its negation give the same distance, so only triples
    // whose first nonzero entry is positive are visited.
    let search = |a: i128| -> Option<(DoubleDouble, [i128; 3])> {
        let ta = rc.dd(a).mul_f64(gd);
        let mut best: Option<(DoubleDouble, [i128; 3])> = None;
        for &b in d2.iter().filter(|&&b| a > 0 || b >= 0) {
            let t = ta.add(rc.dd(b).mul_f64(gc));
            let range = if a == 0 && b == 0 {
                let p = d0.partition_point(|&v| v <= 0);
                p..(p + 1).min(d0.len())
            } else {
                nearest_candidates(&d0_approx, -t.to_f64() / g0)
            };
            for k in range {
                let dist = t.add(d0_dd[k]).abs();
                if best.is_none_or(|(bd, _)| dist.cmp(&bd).is_lt()) {
                    best = Some((dist, [a, b, d0[k]]));
                }
            }
        }
        best
    };
    let best = d1
        .par_iter()
        .filter(|&&a| a >= 0)
        .filter_map(|&a| search(a))
        .reduce_with(|x, y| if y.0.cmp(&x.0).is_lt() || (y.0 == x.0 && y.1 < x.1) { y } else { x });
    Ok(MinDistanceReport {
        d: best.map_or(f64::INFINITY, |(d, _)| d.to_f64()),
        argmin: best.map(|(_, t)| t.map(|v| to_real(v, rc.frac_bits))),
        sizes: rc.sizes(),
        difference_sizes: [d1.len(), d2.len(), d0.len()],
    })
}

/// Nearest triple to `y`; ties go to the lexicographically smallest.
pub fn demodulate(y: f64, g: &ReceiverGains, rc: &ReceiverConstellation) -> ReceiverSymbols {
    let (gd, gc) = g.desired(rc.rx);
    let y = DoubleDouble::from_f64(y);
    let mut best: Option<(DoubleDouble, ReceiverSymbols)> = None;
    for &s1 in &rc.s1 {
        let r1 = y.sub(rc.dd(s1).mul_f64(gd));
        for &s2 in &rc.s2 {
            let r = r1.sub(rc.dd(s2).mul_f64(gc));
            for k in nearest_candidates(&rc.s0_approx, r.to_f64() / g.g0) {
                let s0 = rc.s0[k];
                let dist = r.sub(rc.dd(s0).mul_f64(g.g0)).abs();
                if best.is_none_or(|(bd, _)| dist.cmp(&bd).is_lt()) {
                    best = Some((dist, ReceiverSymbols { s1, s2, s0 }));
                }
            }
        }
    }
    best.expect("symbol sets always contain 0").1
}

/// Demodulation with gains derived from the estimates `h_hat`.
pub fn demodulate_mismatched(y: f64, h_hat: &FineGains, rc: &ReceiverConstellation) -> ReceiverSymbols {
    demodulate(y, &effective_gains(h_hat).receiver(rc.rx), rc)
}

/// The point with the other receiver's private part removed.
fn without_noise_private(p: &Point, rx: Rx) -> Point {
    let mut q = *p;
    match rx {
        Rx::One => q.bits[Slot::U22p.index()] = 0,
        Rx::Two => q.bits[Slot::U11p.index()] = 0,
    }
    q
}

fn enumerate_points(c: &ModConstellation, skip: Slot, budget: u128) -> Result<Vec<Point>> {
    let widths: Vec<(Slot, u32)> =
        Slot::ALL.iter().map(|&s| (s, if s == skip { 0 } else { c.window(s).width })).collect();
    let total_bits: u32 = widths.iter().map(|w| w.1).sum();
    let size = 1u128 << total_bits;
    if size > budget {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let mut out = Vec::with_capacity(size as usize);
    for code in 0..size as u64 {
        let mut p = Point::default();
        let mut shift = 0;
        for &(s, w) in &widths {
            p.bits[s.index()] = (code >> shift) & ((1u64 << w) - 1);
            shift += w;
        }
        out.push(p);
    }
    Ok(out)
}

/// Mismatch offset: the largest gap, over all points, between the
/// noiseless output (minus the private term treated as noise) and the
/// value the mismatched demodulator expects.
pub fn mismatch_offset(
    h: &FineGains,
    h_hat: &FineGains,
    c: &ModConstellation,
    rc: &ReceiverConstellation,
    budget: u128,
) -> Result<f64> {
    let skip = match rc.rx {
        Rx::One => Slot::U22p,
        Rx::Two => Slot::U11p,
    };
    let g_hat = effective_gains(h_hat).receiver(rc.rx);
    let mut worst = 0f64;
    for p in enumerate_points(c, skip, budget)? {
        let (u11, u12, u21, u22) = c.symbols(&p);
        let (x1, x2) = modulate_inputs(h_hat, u11, u12, u21, u22)?;
        let (y1, y2) = gauss_channel_apply(h, &c.levels, x1, x2, 0.0, 0.0);
        let y = if rc.rx == Rx::One { y1 } else { y2 };
        let v = rc.value_dd(&g_hat, &rc.symbols_of(&p));
        worst = worst.max(DoubleDouble::from_f64(y).sub(v).abs().to_f64());
    }
    Ok(worst)
}

/// Options for the Gaussian Monte Carlo runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Quantize the gains to `max n_mk` bits at both ends.
    pub mismatched: bool,
    pub noise_std: f64,
    pub budget: u128,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { mismatched: false, noise_std: 1.0, budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolErrorReport {
    pub rx1: OutageEstimate,
    pub rx2: OutageEstimate,
    pub either: OutageEstimate,
    pub min_distance: [f64; 2],
}

struct GaussRun {
    constellation: ModConstellation,
    receivers: [ReceiverConstellation; 2],
    gains: [ReceiverGains; 2],
    h: FineGains,
    h_hat: FineGains,
    noise_std: f64,
}

impl GaussRun {
    fn new(h: &FineGains, n: &ChannelLevels, a: &RateAllocation, opts: &SimOptions) -> Result<Self> {
        let constellation = build_constellation(a, n)?;
        let receivers = [
            ReceiverConstellation::new(&constellation, Rx::One, opts.budget)?,
            ReceiverConstellation::new(&constellation, Rx::Two, opts.budget)?,
        ];
        let h_hat = if opts.mismatched { quantize_gains(h, n.max_level().max(1))? } else { *h };
        let g = effective_gains(&h_hat);
        Ok(Self {
            constellation,
            receivers,
            gains: [g.receiver(Rx::One), g.receiver(Rx::Two)],
            h: *h,
            h_hat,
            noise_std: opts.noise_std,
        })
    }

    /// True and demodulated triples at both receivers for one trial.
    fn trial(&self, seed: u64, index: u64) -> Result<[(ReceiverSymbols, ReceiverSymbols); 2]> {
        let mut rng = sample_rng(seed, index);
        let p = self.constellation.random_point(&mut rng);
        let (u11, u12, u21, u22) = self.constellation.symbols(&p);
        let (x1, x2) = modulate_inputs(&self.h_hat, u11, u12, u21, u22)?;
        let z1: f64 = rng.sample::<f64, _>(StandardNormal) * self.noise_std;
        let z2: f64 = rng.sample::<f64, _>(StandardNormal) * self.noise_std;
        let (y1, y2) = gauss_channel_apply(&self.h, &self.constellation.levels, x1, x2, z1, z2);
        let out = |k: usize, y: f64| {
            let rc = &self.receivers[k];
            (rc.symbols_of(&p), demodulate(y, &self.gains[k], rc))
        };
        Ok([out(0, y1), out(1, y2)])
    }
}

/// Symbol-error rate of the uncoded scheme at both receivers, with the
/// private part of the other stream present as interference.
pub fn mc_symbol_error(
    h: &FineGains,
    n: &ChannelLevels,
    a: &RateAllocation,
    trials: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<SymbolErrorReport> {
    let run = GaussRun::new(h, n, a, opts)?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let r = run.trial(seed, i)?;
            let e1 = r[0].0 != r[0].1;
            let e2 = r[1].0 != r[1].1;
            Ok([u64::from(e1), u64::from(e2), u64::from(e1 || e2)])
        })
        .try_reduce(|| [0; 3], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2]]))?;
    let mut dists = [0.0; 2];
    for k in 0..2 {
        dists[k] = min_distance(&run.gains[k], &run.receivers[k], opts.budget)?.d;
    }
    let est = |f| OutageEstimate::new(trials, f, seed);
    Ok(SymbolErrorReport { rx1: est(counts[0]), rx2: est(counts[1]), either: est(counts[2]), min_distance: dists })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondEntropyReport {
    /// Empirical `H(v | v_hat)` in bits at each receiver.
    pub bits: [f64; 2],
    pub min_distance: [f64; 2],
    /// Whether both distances reach 32, the regime the 1.5-bit bound covers.
    pub bound_applies: bool,
}

fn conditional_entropy(joint: &HashMap<(ReceiverSymbols, ReceiverSymbols), u64>, total: u64) -> f64 {
    let mut marginal: HashMap<ReceiverSymbols, u64> = HashMap::new();
    for (&(_, est), &c) in joint {
        *marginal.entry(est).or_default() += c;
    }
    let mut cells: Vec<_> = joint.iter().collect();
    cells.sort_unstable_by_key(|(k, _)| **k);
    let t = total as f64;
    cells
        .into_iter()
        .map(|(&(_, est), &c)| {
            let pj = c as f64 / t;
            let pm = marginal[&est] as f64 / t;
            pj * (pm / pj).log2()
        })
        .sum()
}

/// Plug-in estimate of `H(v | v_hat)` at both receivers.
pub fn empirical_cond_entropy(
    h: &FineGains,
    n: &ChannelLevels,
    a: &RateAllocation,
    trials: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<CondEntropyReport> {
    let run = GaussRun::new(h, n, a, opts)?;
    type Joint = [HashMap<(ReceiverSymbols, ReceiverSymbols), u64>; 2];
    let joint: Joint = (0..trials)
        .into_par_iter()
        .map(|i| run.trial(seed, i))
        .try_fold(Joint::default, |mut acc, r| {
            let r = r?;
            for k in 0..2 {
                *acc[k].entry(r[k]).or_default() += 1;
            }
            Ok::<_, Error>(acc)
        })
        .try_reduce(Joint::default, |mut a, b| {
            for k in 0..2 {
                for (key, c) in &b[k] {
                    *a[k].entry(*key).or_default() += c;
                }
            }
            Ok(a)
        })?;
    let mut dists = [0.0; 2];
    for k in 0..2 {
        dists[k] = min_distance(&run.gains[k], &run.receivers[k], opts.budget)?.d;
    }
    Ok(CondEntropyReport {
        bits: [conditional_entropy(&joint[0], trials), conditional_entropy(&joint[1], trials)],
        min_distance: dists,
        bound_applies: dists.iter().all(|&d| d >= 32.0),
    })
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Chernoff-type bound on the symbol error probability at minimum
/// distance `d` under mismatch: `sum_{l >= 1} exp(-((l (d - 8)/2 - 3)^+)^2 / 2)`.
pub fn chernoff_error_bound(d: f64) -> f64 {
    (1..=1000)
        .map(|l| {
            let t = (l as f64 * (d - 8.0) / 2.0 - 3.0).max(0.0);
            (-t * t / 2.0).exp()
        })
        .sum()
}

/// Pairwise union bound on the symbol error probability at one
/// receiver, averaged over uniformly drawn messages:
/// `E_t sum_{t' != t} Q(|v_t - v_t'| / (2 sigma))`.
///
/// Private interference is not modelled, so this is meant for
/// allocations without the other stream's private part.
pub fn pairwise_union_bound(
    g: &ReceiverGains,
    c: &ModConstellation,
    rc: &ReceiverConstellation,
    noise_std: f64,
    budget: u128,
) -> Result<f64> {
    let skip = match rc.rx {
        Rx::One => Slot::U22p,
        Rx::Two => Slot::U11p,
    };
    let points = enumerate_points(c, skip, budget)?;
    let mut weights: HashMap<ReceiverSymbols, u64> = HashMap::new();
    for p in &points {
        *weights.entry(rc.symbols_of(&without_noise_private(p, rc.rx))).or_default() += 1;
    }
    let mut triples: Vec<(ReceiverSymbols, u64)> = weights.into_iter().collect();
    triples.sort_unstable();
    let values: Vec<DoubleDouble> = triples.iter().map(|(t, _)| rc.value_dd(g, t)).collect();
    let total = points.len() as f64;
    let mut bound = 0.0;
    for (i, (_, w)) in triples.iter().enumerate() {
        let s: f64 = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| q_function(v.sub(values[i]).abs().to_f64() / (2.0 * noise_std)))
            .sum();
        bound += *w as f64 / total * s;
    }
    Ok(bound)
}
