//! Case I-V bit allocations, the capacity approximation `D(N)`, and the
//! decoding-condition checkers.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelLevels;
use crate::error::{Error, Result};
use crate::Rate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    I,
    II,
    III,
    IV,
    V,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::IV => "IV",
            Case::V => "V",
        };
        f.write_str(s)
    }
}

/// Per-message rates in bits per channel use. `r11c`/`r22c` are the
/// common parts of the direct messages (also visible at the other
/// receiver), `r11p`/`r22p` the private parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RateAllocation {
    pub r11c: u32,
    pub r11p: u32,
    pub r12: u32,
    pub r21: u32,
    pub r22c: u32,
    pub r22p: u32,
    pub case: Case,
}

impl RateAllocation {
    pub fn zero(case: Case) -> Self {
        Self { r11c: 0, r11p: 0, r12: 0, r21: 0, r22c: 0, r22p: 0, case }
    }

    pub fn sum_rate(&self) -> u32 {
        self.r11c + self.r11p + self.r12 + self.r21 + self.r22c + self.r22p
    }

    pub fn r11(&self) -> u32 {
        self.r11c + self.r11p
    }

    pub fn r22(&self) -> u32 {
        self.r22c + self.r22p
    }

    /// Rate 4-tuple `(R11, R12, R21, R22)`.
    pub fn message_rates(&self) -> [u32; 4] {
        [self.r11(), self.r12, self.r21, self.r22()]
    }

    /// Allocation for the relabeled channel, see [`ChannelLevels::relabeled`].
    pub fn relabeled(&self) -> Self {
        Self {
            r11c: self.r22c,
            r11p: self.r22p,
            r12: self.r21,
            r21: self.r12,
            r22c: self.r11c,
            r22p: self.r11p,
            case: self.case,
        }
    }

    /// Rates in the order `(r11p, r22p, r11c, r22c, r12, r21)`.
    pub fn as_tuple(&self) -> [u32; 6] {
        [self.r11p, self.r22p, self.r11c, self.r22c, self.r12, self.r21]
    }
}

/// Outage level `delta` in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageTarget {
    delta: f64,
}

impl OutageTarget {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(Self { delta })
        } else {
            Err(Error::InvalidParameter(format!("delta = {delta} is outside (0, 1]")))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// How the `log(c / delta)` terms of the decoding conditions are treated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Penalty {
    /// Drop the log terms.
    Ideal,
    Outage(OutageTarget),
}

impl Penalty {
    fn log_term(&self, c: f64) -> f64 {
        match self {
            Penalty::Ideal => 0.0,
            Penalty::Outage(t) => (c / t.delta()).log2(),
        }
    }
}

impl From<OutageTarget> for Penalty {
    fn from(t: OutageTarget) -> Self {
        Penalty::Outage(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    Det,
    Gauss,
}

/// `D(N) = min(D1, D2, D3, D4) + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityApprox {
    pub d1: Rate,
    pub d2: Rate,
    pub d3: Rate,
    pub d4: Rate,
    pub d: Rate,
    pub offset: i64,
    pub c1: u32,
    pub c2: u64,
}

fn pos(v: i64) -> i64 {
    v.max(0)
}

pub fn capacity_approx(n: &ChannelLevels) -> Result<CapacityApprox> {
    n.require_strong_direct()?;
    let (n11, n12, n21, n22) = (n.n11 as i64, n.n12 as i64, n.n21 as i64, n.n22 as i64);
    let s = n12 + n21;
    let d1 = Ratio::from_integer(pos(s - n11) + pos(s - n22));
    let d2 = Ratio::new(s + pos(s - n22), 2);
    let d3 = Ratio::new(s + pos(s - n11), 2);
    let d4 = Ratio::new(2 * s, 3);
    let offset = (n11 - n21) + (n22 - n12);
    let min = *[d1, d2, d3, d4].iter().min().expect("four terms");
    Ok(CapacityApprox { d1, d2, d3, d4, d: min + Ratio::from_integer(offset), offset, c1: 128, c2: 1 << 31 })
}

fn oriented(n: &ChannelLevels) -> Result<(ChannelLevels, bool)> {
    n.require_strong_direct()?;
    Ok(if n.n11 > n.n22 { (n.relabeled(), true) } else { (*n, false) })
}

fn classify_oriented(n: &ChannelLevels) -> Case {
    let (n11, n22) = (n.n11 as i64, n.n22 as i64);
    let s2 = 2 * (n.n12 as i64 + n.n21 as i64);
    if s2 <= 2 * n11 {
        Case::I
    } else if s2 <= 2 * n22 {
        Case::II
    } else if s2 <= 2 * n11 + n22 {
        Case::III
    } else if s2 <= 3 * n22 {
        Case::IV
    } else {
        Case::V
    }
}

pub fn classify_case(n: &ChannelLevels) -> Result<Case> {
    Ok(classify_oriented(&oriented(n)?.0))
}

fn to_rate(v: i64) -> u32 {
    debug_assert!(v >= 0, "negative rate {v}");
    v.max(0) as u32
}

/// Ideal allocation for the case of `n` (no outage penalty).
pub fn allocate(n: &ChannelLevels) -> Result<RateAllocation> {
    let (m, flipped) = oriented(n)?;
    let (n11, n12, n21, n22) = (m.n11 as i64, m.n12 as i64, m.n21 as i64, m.n22 as i64);
    let case = classify_oriented(&m);
    let r11p = n11 - n21;
    let r22p = n22 - n12;
    let (r11c, r12, r21, r22c) = match case {
        Case::I => (0, 0, 0, 0),
        Case::II => (0, 0, 0, n12 - r11p),
        Case::III => {
            let r12 = pos(n12 + 2 * n21 - n11 - n22);
            let r21 = pos(n21 + 2 * n12 - n11 - n22);
            (n21 - r22p - r21, r12, r21, n12 - r11p - r12)
        }
        Case::IV => {
            let r21 = (2 * n12 - n22).div_euclid(2);
            let r12 = (2 * n21 - n22).div_euclid(2);
            (r12, r12, r21, n22 - n21)
        }
        Case::V => {
            let r12 = (2 * n21 - n12).div_euclid(3);
            let r21 = (2 * n12 - n21).div_euclid(3);
            (r12, r12, r21, r21)
        }
    };
    let a = RateAllocation {
        r11c: to_rate(r11c),
        r11p: to_rate(r11p),
        r12: to_rate(r12),
        r21: to_rate(r21),
        r22c: to_rate(r22c),
        r22p: to_rate(r22p),
        case,
    };
    Ok(if flipped { a.relabeled() } else { a })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    Rx1A,
    Rx1B,
    Rx1C,
    Rx2A,
    Rx2B,
    Rx2C,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Rx1A => "decoding1a",
            Condition::Rx1B => "decoding1b",
            Condition::Rx1C => "decoding1c",
            Condition::Rx2A => "decoding2a",
            Condition::Rx2B => "decoding2b",
            Condition::Rx2C => "decoding2c",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub lhs: i64,
    pub rhs: f64,
    /// Removed by the zero-rate rules; never counts as violated.
    pub skipped: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub passed: bool,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn violated(&self) -> Vec<Condition> {
        self.checks.iter().filter(|c| !c.skipped && !c.holds).map(|c| c.condition).collect()
    }
}

const SLACK: f64 = 1e-9;

/// Right-hand sides `(a, b, c)` at each receiver.
#[derive(Clone, Copy, Debug)]
struct ConditionRhs {
    rx1: [f64; 3],
    rx2: [f64; 3],
}

fn condition_rhs(n: &ChannelLevels, penalty: Penalty, model: Model) -> ConditionRhs {
    let (n11, n12, n21, n22) = (n.n11 as f64, n.n12 as f64, n.n21 as f64, n.n22 as f64);
    let (ab, c) = match model {
        Model::Det => (penalty.log_term(32.0), 0.0),
        Model::Gauss => (6.0 + penalty.log_term(13104.0), 6.0),
    };
    ConditionRhs {
        rx1: [n11 - ab, n12 - ab, n12 + n21 - n22 - c],
        rx2: [n22 - ab, n21 - ab, n12 + n21 - n11 - c],
    }
}

/// Left-hand sides `(a, b, c)` and the skip flags for `b` and `c`.
fn condition_lhs(a: &RateAllocation, rx: usize) -> ([i64; 3], bool, bool) {
    let (own_c, own_p, cross, i1, i2) = if rx == 1 {
        (a.r11c, a.r11p, a.r12, a.r21, a.r22c)
    } else {
        (a.r22c, a.r22p, a.r21, a.r12, a.r11c)
    };
    let interf = i1.max(i2) as i64;
    let (own_c, own_p, cross) = (own_c as i64, own_p as i64, cross as i64);
    let lhs = [own_c + interf + cross + own_p, interf + cross + own_p, cross + own_p];
    (lhs, interf == 0, cross == 0)
}

fn check_conditions(a: &RateAllocation, n: &ChannelLevels, penalty: Penalty, model: Model) -> ConditionReport {
    let rhs = condition_rhs(n, penalty, model);
    let labels = [
        [Condition::Rx1A, Condition::Rx1B, Condition::Rx1C],
        [Condition::Rx2A, Condition::Rx2B, Condition::Rx2C],
    ];
    let mut checks = Vec::with_capacity(6);
    for (rx, (labels, rhs)) in [(1, (labels[0], rhs.rx1)), (2, (labels[1], rhs.rx2))] {
        let (lhs, skip_b, skip_c) = condition_lhs(a, rx);
        for k in 0..3 {
            let skipped = (k == 1 && skip_b) || (k == 2 && skip_c);
            checks.push(ConditionCheck {
                condition: labels[k],
                lhs: lhs[k],
                rhs: rhs[k],
                skipped,
                holds: lhs[k] as f64 <= rhs[k] + SLACK,
            });
        }
    }
    let passed = checks.iter().all(|c| c.skipped || c.holds);
    ConditionReport { passed, checks }
}

/// Decoding conditions of the deterministic scheme.
pub fn check_det_conditions(a: &RateAllocation, n: &ChannelLevels, penalty: impl Into<Penalty>) -> ConditionReport {
    check_conditions(a, n, penalty.into(), Model::Det)
}

/// Minimum-distance conditions of the Gaussian scheme.
pub fn check_gauss_conditions(a: &RateAllocation, n: &ChannelLevels, penalty: impl Into<Penalty>) -> ConditionReport {
    check_conditions(a, n, penalty.into(), Model::Gauss)
}

/// Zero levels kept below each private window in the Gaussian layout.
pub const PRIVATE_LSB_GUARD: u32 = 5;
/// Zero levels kept above every window in the Gaussian layout.
pub const MSB_GUARD: u32 = 2;

/// Upper bound on the bits the penalized allocation may remove.
pub fn penalty_budget(delta: OutageTarget, model: Model) -> u32 {
    let d = delta.delta();
    match model {
        Model::Det => 2 * ((32.0 / d).log2() - SLACK).ceil() as u32,
        Model::Gauss => {
            let per_stream = (3.0 + 0.5 * (13104.0 / d).log2() - SLACK).ceil() as u32;
            12 + 4 * per_stream + 2 * PRIVATE_LSB_GUARD
        }
    }
}

fn floor_rhs(v: f64) -> i64 {
    (v + SLACK).floor() as i64
}

/// Largest private rate at one receiver given everything else, or `None`
/// if even zero fails.
fn best_private(
    fixed: (i64, i64, i64),
    rhs: [f64; 3],
    cap: i64,
    guard: i64,
    fits: impl Fn(i64) -> bool,
) -> Option<i64> {
    let (own_c, interf, cross) = fixed;
    let mut slack = floor_rhs(rhs[0]) - own_c - interf - cross;
    if interf > 0 {
        slack = slack.min(floor_rhs(rhs[1]) - interf - cross);
    }
    if cross > 0 {
        slack = slack.min(floor_rhs(rhs[2]) - cross);
    }
    if slack < 0 {
        return None;
    }
    let mut p = cap.min(slack - guard).max(0);
    while p > 0 && !fits(p) {
        p -= 1;
    }
    Some(p)
}

/// Gaussian window layout check for one transmitter's direct message:
/// common at `[3, c + 2]`, private ending `PRIVATE_LSB_GUARD` levels above
/// the LSB and starting below the levels the other receiver sees.
pub(crate) fn gauss_direct_fits(n_own: i64, n_seen_elsewhere: i64, common: i64, private: i64) -> bool {
    let g = MSB_GUARD as i64;
    let common_end = if common > 0 { common + g } else { 0 };
    if common_end > n_own {
        return false;
    }
    if private == 0 {
        return true;
    }
    let p_end = n_own - PRIVATE_LSB_GUARD as i64;
    let p_start = p_end - private + 1;
    p_start > common_end && p_start > n_seen_elsewhere + g && p_start > g
}

/// Largest-sum allocation inside the ideal box that passes the decoding
/// conditions for `delta`.
///
/// Among equal sums, privates are kept first, then cross messages, so
/// the reduction lands on the common parts.
pub fn allocate_penalized(n: &ChannelLevels, delta: OutageTarget, model: Model) -> Result<RateAllocation> {
    let ideal = allocate(n)?;
    let rhs = condition_rhs(n, Penalty::Outage(delta), model);
    let (n11, n12, n21, n22) = (n.n11 as i64, n.n12 as i64, n.n21 as i64, n.n22 as i64);
    let guard = match model {
        Model::Det => 0,
        Model::Gauss => PRIVATE_LSB_GUARD as i64,
    };
    let fits1 = |c: i64| move |p: i64| model == Model::Det || gauss_direct_fits(n11, n21, c, p);
    let fits2 = |c: i64| move |p: i64| model == Model::Det || gauss_direct_fits(n22, n12, c, p);

    let mut best: Option<(u32, u32, u32, RateAllocation)> = None;
    for r11c in 0..=ideal.r11c as i64 {
        if model == Model::Gauss && !gauss_direct_fits(n11, n21, r11c, 0) {
            continue;
        }
        for r22c in 0..=ideal.r22c as i64 {
            if model == Model::Gauss && !gauss_direct_fits(n22, n12, r22c, 0) {
                continue;
            }
            for r12 in 0..=ideal.r12 as i64 {
                for r21 in 0..=ideal.r21 as i64 {
                    let Some(r11p) =
                        best_private((r11c, r21.max(r22c), r12), rhs.rx1, ideal.r11p as i64, guard, fits1(r11c))
                    else {
                        continue;
                    };
                    let Some(r22p) =
                        best_private((r22c, r12.max(r11c), r21), rhs.rx2, ideal.r22p as i64, guard, fits2(r22c))
                    else {
                        continue;
                    };
                    let a = RateAllocation {
                        r11c: r11c as u32,
                        r11p: r11p as u32,
                        r12: r12 as u32,
                        r21: r21 as u32,
                        r22c: r22c as u32,
                        r22p: r22p as u32,
                        case: ideal.case,
                    };
                    let key = (a.sum_rate(), a.r11p + a.r22p, a.r12 + a.r21, a);
                    let better = match &best {
                        None => true,
                        Some((s, p, x, _)) => (key.0, key.1, key.2) > (*s, *p, *x),
                    };
                    if better {
                        best = Some(key);
                    }
                }
            }
        }
    }
    let (_, _, _, a) = best.ok_or(Error::Infeasible)?;
    debug_assert!(match model {
        Model::Det => check_det_conditions(&a, n, delta).passed,
        Model::Gauss => check_gauss_conditions(&a, n, delta).passed,
    });
    Ok(a)
}

/// `D(N)` as an `f64`, for reporting.
pub fn rate_to_f64(r: &Rate) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        *r.numer() as f64 / *r.denom() as f64
    }
}
