//! Extremal times of influence functions.
//!
//! For a vertex `x` and a direction set `A`, `t ↦ INF(x,A,t)` restricted to the
//! times `t ∼ x` is a discrete curve with at most two extrema. The sign of its
//! forward difference is the sign of an explicit quartic in `t`, so the extrema are
//! located exactly by bracketing the quartic's roots.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::kernel::{h_prob, influence_factors};
use crate::lattice::{Direction, RotorSequence, Vertex};
use crate::poly::{QuarticPoly, SignRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtremumKind {
    Min,
    Max,
}

impl ExtremumKind {
    pub fn flipped(self) -> Self {
        match self {
            ExtremumKind::Min => ExtremumKind::Max,
            ExtremumKind::Max => ExtremumKind::Min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Extremum {
    pub time: i64,
    pub kind: ExtremumKind,
}

/// Extremum structure of one influence function `INF(x, dirs, ·)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionModes {
    pub dirs: Vec<Direction>,
    pub extrema: Vec<Extremum>,
    /// The function vanishes identically (pairs on an axis, or the origin).
    pub flat: bool,
}

impl FunctionModes {
    /// Modes of `-f`: the same extremal times with kinds swapped.
    pub fn negated(&self, dirs: Vec<Direction>) -> FunctionModes {
        FunctionModes {
            dirs,
            extrema: self
                .extrema
                .iter()
                .map(|e| Extremum { time: e.time, kind: e.kind.flipped() })
                .collect(),
            flat: self.flat,
        }
    }

    /// Monotonicity on the phase `[lo, hi]`, where no extremum lies strictly inside.
    ///
    /// `None` means the function is flat and matches either trend.
    pub fn trend_in_phase(&self, lo: i64, hi: i64) -> Option<Trend> {
        if self.flat {
            return None;
        }
        let kind_to_trend_after = |k: ExtremumKind| match k {
            ExtremumKind::Min => Trend::Increasing,
            ExtremumKind::Max => Trend::Decreasing,
        };
        if let Some(e) = self.extrema.iter().rev().find(|e| e.time <= lo) {
            return Some(kind_to_trend_after(e.kind));
        }
        self.extrema
            .iter()
            .find(|e| e.time >= hi)
            .map(|e| match e.kind {
                ExtremumKind::Max => Trend::Increasing,
                ExtremumKind::Min => Trend::Decreasing,
            })
    }

    pub fn matches(&self, lo: i64, hi: i64, want: Trend) -> bool {
        self.trend_in_phase(lo, hi).is_none_or(|t| t == want)
    }

    /// Extrema strictly after the arrival time `‖x‖∞`.
    pub fn interior_count(&self, x: Vertex) -> usize {
        self.extrema.iter().filter(|e| e.time > x.norm_inf()).count()
    }
}

/// How the sign of the forward difference is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMethod {
    /// Bracket the roots of the difference quartic. Cost is polylogarithmic in the horizon.
    Bracket,
    /// Evaluate the function exactly at every admissible time up to the horizon.
    Linear,
}

/// Extremum structure for every function a block decomposition needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeProfile {
    pub vertex: Vertex,
    pub sequence: RotorSequence,
    /// `τ(R_i)` in rotor order.
    pub singles: [FunctionModes; 4],
    /// `pair(R_i, R_{i+1})` in rotor order; the last two are negations of the first two.
    pub pairs: [FunctionModes; 4],
    /// Sorted union of all extremal times.
    pub extremal_times: Vec<i64>,
}

impl ModeProfile {
    pub fn single(&self, d: Direction) -> &FunctionModes {
        &self.singles[self.sequence.position(d)]
    }
}

/// Difference quartic of a single direction: its sign at `t` is the sign of
/// `INF(x,A,t+2) - INF(x,A,t)` for `t ≥ max(‖x‖∞-2, 1)`, `t ∼ x`.
pub fn p_poly(x: Vertex, a: Direction) -> QuarticPoly {
    let (a1, a2) = a.components();
    let (x1, x2) = (x.x1 as i128, x.x2 as i128);
    let (a1, a2) = (a1 as i128, a2 as i128);
    let a = a1 * x1;
    let b = a2 * x2;
    let (s1, s2) = (x1 * x1, x2 * x2);
    // A1 x1^3 and A2 x2^3
    let c1c = a * s1;
    let c2c = b * s2;
    let ab = a * b;
    let c4 = 4 * a + 4 * b;
    let c3 = -c1c - c2c - a * s2 - b * s1 - 6 * ab + 19 * a + 19 * b;
    let c2 = ab * s1 + ab * s2 - 4 * c1c - 4 * c2c - 4 * a * s2 - 4 * b * s1 - 23 * ab + 30 * a + 30 * b;
    let c1 = c1c * s2 + c2c * s1 + 4 * c1c * b + 4 * a * c2c - 4 * c1c - 4 * c2c - 4 * a * s2 - 4 * b * s1
        - 32 * ab
        + 16 * a
        + 16 * b;
    let c0 = -c1c * c2c + 4 * c1c * b + 4 * a * c2c - 16 * ab;
    QuarticPoly::new([c0, c1, c2, c3, c4].map(BigInt::from))
}

/// Difference quartic of a direction set: the sum of the single ones.
pub fn p_poly_set(x: Vertex, dirs: &[Direction]) -> QuarticPoly {
    dirs.iter()
        .fold(QuarticPoly::zero(), |acc, &a| &acc + &p_poly(x, a))
}

/// Closed-form test for two extrema after the arrival time.
pub fn strict_bimodality_criterion(x: Vertex, a: Direction) -> bool {
    let (a1, a2) = a.components();
    let (p, q) = (a1 * x.x1, a2 * x.x2);
    x.norm_inf() > 6 && ((-p > q && 2 * q > -p + 1) || (-q > p && 2 * p > -q + 1))
}

/// Admissible times `t_k = ‖x‖∞ - 2 + 2k`, and the index `K` beyond which the
/// difference sign can no longer change.
fn horizon(x: Vertex, poly: &QuarticPoly) -> (i64, i64) {
    let t0 = x.norm_inf() - 2;
    let bound: i64 = poly.root_bound().try_into().unwrap_or(i64::MAX / 4);
    let k = ((bound + 1 - t0) + 1).div_euclid(2).max(1);
    (t0, k)
}

/// Sign runs of `D_k = F(t_{k+1}) - F(t_k)` for `k = 0..=K`.
fn difference_runs(x: Vertex, dirs: &[Direction], method: ScanMethod) -> (i64, Vec<SignRun>) {
    let poly = p_poly_set(x, dirs);
    let (t0, kmax) = horizon(x, &poly);
    match method {
        ScanMethod::Bracket => {
            let (p, s) = influence_factors(x, dirs);
            let d0 = (p - s * x.norm_inf()).signum() as i8;
            let mut runs = vec![SignRun { start: 0, end: 0, sign: d0 }];
            for r in poly.compose_affine(t0, 2).sign_runs(1, kmax) {
                match runs.last_mut() {
                    Some(last) if last.sign == r.sign => last.end = r.end,
                    _ => runs.push(r),
                }
            }
            (t0, runs)
        }
        ScanMethod::Linear => {
            let mut series = InfluenceSeries::new(x, dirs, t0);
            let mut prev = series.next_value();
            let mut runs: Vec<SignRun> = Vec::new();
            for k in 0..=kmax {
                let cur = series.next_value();
                let d = &cur - &prev;
                let sign = if d.is_zero() { 0 } else if d.is_positive() { 1 } else { -1 };
                match runs.last_mut() {
                    Some(last) if last.sign == sign => last.end = k,
                    _ => runs.push(SignRun { start: k, end: k, sign }),
                }
                prev = cur;
            }
            (t0, runs)
        }
    }
}

/// Exact values of `INF(x,A,t)` along `t = t0, t0+2, ...`, with each `H` advanced
/// by its two-step ratio instead of fresh binomials.
struct InfluenceSeries {
    /// `(y, time, H(y,time), sign)`: sign +1 for the shifted terms, -1 for `H(x,·)`.
    terms: Vec<(Vertex, i64, BigRational, i8)>,
}

impl InfluenceSeries {
    fn new(x: Vertex, dirs: &[Direction], t0: i64) -> Self {
        let mut terms = vec![(x, t0, h_prob(x, t0), -(dirs.len() as i8))];
        for &a in dirs {
            let y = x.step(a);
            terms.push((y, t0 - 1, h_prob(y, t0 - 1), 1));
        }
        InfluenceSeries { terms }
    }

    fn next_value(&mut self) -> BigRational {
        let mut total = BigRational::zero();
        for (y, s, h, w) in self.terms.iter_mut() {
            total += &*h * BigRational::from_integer(BigInt::from(*w));
            let next = *s + 2;
            *h = if h.is_zero() {
                h_prob(*y, next)
            } else {
                // H(y,s+2) = H(y,s) (s+1)²(s+2)² / (((s+2)²-y1²)((s+2)²-y2²))
                let s1 = BigInt::from(*s + 1);
                let s2 = BigInt::from(next);
                let num = &s1 * &s1 * &s2 * &s2;
                let sq = &s2 * &s2;
                let den = (&sq - BigInt::from(y.x1 * y.x1)) * (&sq - BigInt::from(y.x2 * y.x2));
                &*h * BigRational::new(num, den)
            };
            *s = next;
        }
        total
    }
}

/// Extrema of `INF(x, dirs, ·)`, each at the first time it is attained.
pub fn function_modes(x: Vertex, dirs: &[Direction], method: ScanMethod) -> FunctionModes {
    let flat = x.is_origin() || {
        let (p, s) = influence_factors(x, dirs);
        p == 0 && s == 0
    };
    if flat {
        return FunctionModes { dirs: dirs.to_vec(), extrema: Vec::new(), flat: true };
    }
    let (t0, runs) = difference_runs(x, dirs, method);
    let mut extrema = Vec::new();
    let mut last: Option<SignRun> = None;
    for r in runs.into_iter().filter(|r| r.sign != 0) {
        if let Some(prev) = last {
            if prev.sign != r.sign {
                let kind = if prev.sign > 0 { ExtremumKind::Max } else { ExtremumKind::Min };
                extrema.push(Extremum { time: t0 + 2 * (prev.end + 1), kind });
            }
        }
        last = Some(r);
    }
    FunctionModes { dirs: dirs.to_vec(), extrema, flat: false }
}

pub fn mode_profile(x: Vertex, seq: &RotorSequence) -> ModeProfile {
    mode_profile_with(x, seq, ScanMethod::Bracket)
}

pub fn mode_profile_with(x: Vertex, seq: &RotorSequence, method: ScanMethod) -> ModeProfile {
    let r = seq.order();
    let singles = r.map(|d| function_modes(x, &[d], method));
    let p0 = function_modes(x, &[r[0], r[1]], method);
    let p1 = function_modes(x, &[r[1], r[2]], method);
    // pair(R3,R4) = -pair(R1,R2) and pair(R4,R1) = -pair(R2,R3)
    let p2 = p0.negated(vec![r[2], r[3]]);
    let p3 = p1.negated(vec![r[3], r[0]]);
    let pairs = [p0, p1, p2, p3];
    let times: BTreeSet<i64> = singles
        .iter()
        .chain(pairs.iter())
        .flat_map(|f| f.extrema.iter().map(|e| e.time))
        .collect();
    ModeProfile {
        vertex: x,
        sequence: *seq,
        singles,
        pairs,
        extremal_times: times.into_iter().collect(),
    }
}

/// The extremal-time set `EX(x)` for the given rotor sequence.
pub fn extremal_times(x: Vertex, seq: &RotorSequence) -> Vec<i64> {
    mode_profile(x, seq).extremal_times
}
