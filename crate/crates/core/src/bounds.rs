//! Upper bounds on the rate region and the exact max-sum-rate LP.
//!
//! Each bound set holds ten linear constraints over `(R11, R12, R21, R22)`
//! labelled `a` to `j`. The coefficient rows are fixed; only the right-hand
//! sides depend on the channel.

use std::sync::OnceLock;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelLevels, FineGains};
use crate::error::{Error, Result};
use crate::rates::{allocate, capacity_approx, RateAllocation};
use crate::scalar::LpScalar;
use crate::Rate;

pub const LABELS: [char; 10] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j'];

/// Coefficients over `(R11, R12, R21, R22)`.
pub const COEFFS: [[i64; 4]; 10] = [
    [1, 1, 0, 1],
    [1, 0, 1, 1],
    [1, 1, 1, 0],
    [0, 1, 1, 1],
    [1, 1, 1, 1],
    [1, 1, 1, 1],
    [2, 1, 1, 1],
    [1, 2, 1, 1],
    [1, 1, 2, 1],
    [1, 1, 1, 2],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet<S> {
    pub rhs: [S; 10],
}

impl<S: LpScalar> BoundSet<S> {
    pub fn new(rhs: [S; 10]) -> Self {
        Self { rhs }
    }

    pub fn rhs_of(&self, label: char) -> Option<&S> {
        LABELS.iter().position(|&l| l == label).map(|k| &self.rhs[k])
    }

    pub fn lhs(k: usize, rates: &[S; 4]) -> S {
        COEFFS[k]
            .iter()
            .zip(rates)
            .fold(S::zero(), |acc, (&c, r)| acc + S::from_i64(c) * r.clone())
    }

    /// Labels of the constraints `rates` violates beyond the scalar tolerance.
    pub fn violations(&self, rates: &[S; 4]) -> Vec<char> {
        (0..10)
            .filter(|&k| Self::lhs(k, rates) > self.rhs[k].clone() + S::tolerance())
            .map(|k| LABELS[k])
            .collect()
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> BoundSet<T> {
        BoundSet { rhs: std::array::from_fn(|k| f(&self.rhs[k])) }
    }
}

fn pos(v: i64) -> i64 {
    v.max(0)
}

/// Deterministic-model bounds; valid for every `N`.
pub fn det_bounds(n: &ChannelLevels) -> BoundSet<Rate> {
    let [n11, n12, n21, n22] = n.as_array().map(i64::from);
    let rhs = [
        n11.max(n12) + pos(n22 - n12),
        n21.max(n22) + pos(n11 - n21),
        n11.max(n12) + pos(n21 - n11),
        n21.max(n22) + pos(n12 - n22),
        n12.max(n11 - n21) + n21.max(n22 - n12),
        n11.max(n12 - n22) + n22.max(n21 - n11),
        n11.max(n12) + n21.max(n22 - n12) + pos(n11 - n21),
        n11.max(n12) + n22.max(n21 - n11) + pos(n12 - n22),
        n22.max(n21) + n11.max(n12 - n22) + pos(n21 - n11),
        n22.max(n21) + n12.max(n11 - n21) + pos(n22 - n12),
    ];
    BoundSet::new(rhs.map(Rate::from_integer))
}

/// `log2` of a sum of powers of two given by their exponents.
fn log2_sum<F: Float>(exps: &[F]) -> F {
    let m = exps.iter().copied().fold(F::neg_infinity(), F::max);
    let s = exps.iter().fold(F::zero(), |acc, &e| acc + (e - m).exp2());
    m + s.log2()
}

/// Gaussian-model bounds with SNR terms `A_mk = 2^{2 n_mk} h_mk^2`.
pub fn gauss_bounds<F: Float>(n: &ChannelLevels, h: &FineGains<F>) -> BoundSet<F> {
    let two = F::one() + F::one();
    let half = F::one() / two;
    let zero = F::zero();
    let snr = |level: u32, g: F| two * F::from(level).expect("level fits") + two * g.log2();
    let [l11, l12, l21, l22] = [
        snr(n.n11, h.h11),
        snr(n.n12, h.h12),
        snr(n.n21, h.h21),
        snr(n.n22, h.h22),
    ];
    // 1/2 log(1 + A + B)
    let pair = |a: F, b: F| half * log2_sum(&[zero, a, b]);
    // 1/2 log(1 + A / (1 + B))
    let ratio = |a: F, b: F| half * (log2_sum(&[zero, a, b]) - log2_sum(&[zero, b]));
    // 1/2 log(1 + A + B / (1 + C))
    let nested = |a: F, b: F, c: F| half * (log2_sum(&[zero, a, c, a + c, b]) - log2_sum(&[zero, c]));
    let rhs = [
        pair(l11, l12) + ratio(l22, l12),
        pair(l22, l21) + ratio(l11, l21),
        pair(l11, l12) + ratio(l21, l11),
        pair(l22, l21) + ratio(l12, l22),
        nested(l12, l11, l21) + nested(l21, l22, l12),
        nested(l11, l12, l22) + nested(l22, l21, l11),
        pair(l11, l12) + nested(l21, l22, l12) + ratio(l11, l21),
        pair(l12, l11) + nested(l22, l21, l11) + ratio(l12, l22),
        pair(l21, l22) + nested(l11, l12, l22) + ratio(l21, l11),
        pair(l22, l21) + nested(l12, l11, l21) + ratio(l22, l12),
    ];
    BoundSet { rhs }
}

/// Number of `1/2 log` ratio terms in each Gaussian right-hand side.
pub const RATIO_TERMS: [u32; 10] = [1, 1, 1, 1, 2, 2, 2, 2, 2, 2];

/// The four combined Gaussian sum-rate bounds.
pub fn gauss_combined_sum_bounds<F: Float>(b: &BoundSet<F>) -> [F; 4] {
    let r = &b.rhs;
    let two = F::one() + F::one();
    let three = two + F::one();
    [
        (r[0] + r[1] + r[2] + r[3]) / three,
        r[4],
        (r[3] + r[6]) / two,
        (r[2] + r[9]) / two,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpResult<S> {
    pub optimum: S,
    pub vertex: [S; 4],
    pub active: Vec<char>,
}

/// One of the fourteen hyperplanes: a bound row or `R_i >= 0`.
fn plane_row(p: usize) -> [i64; 4] {
    if p < 10 {
        COEFFS[p]
    } else {
        let mut r = [0; 4];
        r[p - 10] = -1;
        r
    }
}

/// A nonsingular 4-subset of planes with its integer inverse `adj / det`.
struct Basis {
    planes: [usize; 4],
    adj: [[i128; 4]; 4],
    det: i128,
}

fn det3(m: &[[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn minor(m: &[[i128; 4]; 4], skip_r: usize, skip_c: usize) -> i128 {
    let mut sub = [[0i128; 3]; 3];
    for (ri, r) in (0..4).filter(|&r| r != skip_r).enumerate() {
        for (ci, c) in (0..4).filter(|&c| c != skip_c).enumerate() {
            sub[ri][ci] = m[r][c];
        }
    }
    det3(&sub)
}

fn bases() -> &'static [Basis] {
    static CELL: OnceLock<Vec<Basis>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for a in 0..14 {
            for b in a + 1..14 {
                for c in b + 1..14 {
                    for d in c + 1..14 {
                        let planes = [a, b, c, d];
                        let m: [[i128; 4]; 4] = planes.map(|p| plane_row(p).map(i128::from));
                        let mut adj = [[0i128; 4]; 4];
                        for (i, row) in adj.iter_mut().enumerate() {
                            for (j, v) in row.iter_mut().enumerate() {
                                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                                *v = sign * minor(&m, j, i);
                            }
                        }
                        let det: i128 = (0..4).map(|j| m[0][j] * adj[j][0]).sum();
                        if det != 0 {
                            out.push(Basis { planes, adj, det });
                        }
                    }
                }
            }
        }
        out
    })
}

fn plane_rhs<S: LpScalar>(b: &BoundSet<S>, p: usize) -> S {
    if p < 10 {
        b.rhs[p].clone()
    } else {
        S::zero()
    }
}

/// Exact maximum of `R11 + R12 + R21 + R22` over the nonnegative orthant
/// cut by the ten constraints, by enumeration of all vertices. Among
/// equally good vertices the first in subset order wins.
pub fn max_sum_rate<S: LpScalar>(b: &BoundSet<S>) -> Result<LpResult<S>> {
    match integer_rhs(b) {
        Some(rhs) => max_sum_rate_integer(&rhs),
        None => max_sum_rate_generic(b),
    }
}

fn integer_rhs<S: LpScalar>(b: &BoundSet<S>) -> Option<[i64; 10]> {
    let v: Option<Vec<i64>> = b.rhs.iter().map(LpScalar::to_integer).collect();
    v.map(|v| std::array::from_fn(|k| v[k]))
}

fn max_sum_rate_integer<S: LpScalar>(rhs: &[i64; 10]) -> Result<LpResult<S>> {
    let plane_b = |p: usize| if p < 10 { i128::from(rhs[p]) } else { 0 };
    // Best as (objective numerator, denominator, vertex numerators).
    let mut best: Option<(i128, i128, [i128; 4])> = None;
    for basis in bases() {
        let b: [i128; 4] = basis.planes.map(plane_b);
        let mut num: [i128; 4] = std::array::from_fn(|i| (0..4).map(|j| basis.adj[i][j] * b[j]).sum());
        let mut den = basis.det;
        if den < 0 {
            den = -den;
            num = num.map(|v| -v);
        }
        let feasible = (0..14).all(|p| {
            let row = plane_row(p);
            let lhs: i128 = (0..4).map(|i| i128::from(row[i]) * num[i]).sum();
            lhs <= plane_b(p) * den
        });
        if !feasible {
            continue;
        }
        let obj: i128 = num.iter().sum();
        if best.is_none_or(|(bo, bd, _)| obj * bd > bo * den) {
            best = Some((obj, den, num));
        }
    }
    let (obj, den, num) = best.ok_or(Error::Infeasible)?;
    let active = (0..10)
        .filter(|&k| {
            let lhs: i128 = (0..4).map(|i| i128::from(COEFFS[k][i]) * num[i]).sum();
            lhs == i128::from(rhs[k]) * den
        })
        .map(|k| LABELS[k])
        .collect();
    Ok(LpResult { optimum: S::from_ratio(obj, den), vertex: num.map(|v| S::from_ratio(v, den)), active })
}

fn max_sum_rate_generic<S: LpScalar>(b: &BoundSet<S>) -> Result<LpResult<S>> {
    let tol = S::tolerance();
    let mut best: Option<(S, [S; 4])> = None;
    for basis in bases() {
        let rhs: [S; 4] = basis.planes.map(|p| plane_rhs(b, p));
        let det = S::from_i64(basis.det as i64);
        let x: [S; 4] = std::array::from_fn(|i| {
            let s = (0..4).fold(S::zero(), |acc, j| acc + S::from_i64(basis.adj[i][j] as i64) * rhs[j].clone());
            s / det.clone()
        });
        let feasible = (0..14).all(|p| {
            let row = plane_row(p);
            let lhs = (0..4).fold(S::zero(), |acc, i| acc + S::from_i64(row[i]) * x[i].clone());
            lhs <= plane_rhs(b, p) + tol.clone()
        });
        if !feasible {
            continue;
        }
        let obj = x.iter().cloned().fold(S::zero(), |a, v| a + v);
        if best.as_ref().is_none_or(|(bo, _)| obj > bo.clone() + tol.clone()) {
            best = Some((obj, x));
        }
    }
    let (optimum, vertex) = best.ok_or(Error::Infeasible)?;
    let active = (0..10)
        .filter(|&k| (BoundSet::lhs(k, &vertex) - b.rhs[k].clone()).is_negligible())
        .map(|k| LABELS[k])
        .collect();
    Ok(LpResult { optimum, vertex, active })
}

/// Message rates `(R11, R12, R21, R22)` of an allocation.
pub fn allocation_rates(a: &RateAllocation) -> [Rate; 4] {
    a.message_rates().map(|r| Rate::from_integer(i64::from(r)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub levels: ChannelLevels,
    pub capacity: Rate,
    pub lp_optimum: Rate,
    pub allocation_sum: u32,
    /// Labels of bounds the ideal allocation violates.
    pub allocation_violations: Vec<char>,
    pub violations: Vec<String>,
}

impl SandwichReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn lp_tight(&self) -> bool {
        self.lp_optimum == self.capacity
    }
}

/// Checks `D - 4 <= allocation <= LP <= D` and that the bounds admit
/// the ideal allocation, for a strong-direct `N`.
pub fn sandwich_check(n: &ChannelLevels) -> Result<SandwichReport> {
    n.require_strong_direct()?;
    let capacity = capacity_approx(n)?.d;
    let a = allocate(n)?;
    let bounds = det_bounds(n);
    let lp = max_sum_rate(&bounds)?;
    let allocation_violations = bounds.violations(&allocation_rates(&a));
    let sum = Rate::from_integer(i64::from(a.sum_rate()));
    let mut violations = Vec::new();
    if lp.optimum > capacity {
        violations.push(format!("LP optimum {} exceeds D = {}", lp.optimum, capacity));
    }
    if sum > capacity {
        violations.push(format!("allocation sum {} exceeds D = {}", sum, capacity));
    }
    if sum < capacity - Rate::from_integer(4) {
        violations.push(format!("allocation sum {} below D - 4 = {}", sum, capacity - 4));
    }
    if sum > lp.optimum {
        violations.push(format!("allocation sum {} exceeds LP optimum {}", sum, lp.optimum));
    }
    if !allocation_violations.is_empty() {
        violations.push(format!("allocation violates bounds {allocation_violations:?}"));
    }
    Ok(SandwichReport {
        levels: *n,
        capacity,
        lp_optimum: lp.optimum,
        allocation_sum: a.sum_rate(),
        allocation_violations,
        violations,
    })
}

/// Smallest combined Gaussian sum bound minus `D(N)`; at most 4 in theory.
pub fn gauss_sum_gap(n: &ChannelLevels, h: &FineGains) -> Result<f64> {
    let d = crate::rates::rate_to_f64(&capacity_approx(n)?.d);
    let best = gauss_combined_sum_bounds(&gauss_bounds(n, h)).into_iter().fold(f64::INFINITY, f64::min);
    Ok(best - d)
}

/// Every strong-direct `N` with all levels at most `max`.
pub fn strong_direct_grid(max: u32) -> Vec<ChannelLevels> {
    let mut out = Vec::new();
    for n11 in 0..=max {
        for n22 in 0..=max {
            let m = n11.min(n22);
            for n12 in 0..=m {
                for n21 in 0..=m {
                    out.push(ChannelLevels::new(n11, n12, n21, n22));
                }
            }
        }
    }
    out
}
