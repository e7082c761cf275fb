//! Blocks, block configurations and the maximal contribution of a single vertex.
//!
//! Between two consecutive extremal times every influence function is monotone.
//! On such a phase there is one rotation of the rotor sequence whose prefix sums
//! all increase; sending odd chips so that the blocks of neighbouring phases are
//! concatenated in rotor order realises the largest possible contribution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::inf_single;
use crate::lattice::{Direction, RotorSequence, SequenceClass, Vertex};
use crate::modes::{mode_profile, ModeProfile, Trend};

/// A rotation of the rotor sequence, tagged with the trend of each single influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// Index of `dirs[0]` within the rotor sequence.
    pub start: usize,
    pub dirs: [Direction; 4],
    pub signature: [Trend; 4],
}

impl Block {
    /// Signature as arrows, `→` for increasing.
    pub fn signature_arrows(&self) -> String {
        self.signature
            .iter()
            .map(|t| match t {
                Trend::Increasing => '→',
                Trend::Decreasing => '←',
            })
            .collect()
    }
}

/// A phase `[lo, hi]`; `hi` is `None` for the unbounded last phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub lo: i64,
    pub hi: Option<i64>,
    pub block: Block,
}

#[derive(Debug, Clone)]
pub struct BlockConfiguration {
    pub vertex: Vertex,
    pub sequence: RotorSequence,
    pub extremal_times: Vec<i64>,
    pub phases: Vec<Phase>,
    /// Odd chips per extremal time, in send order. Times with no chips are absent.
    pub schedule: BTreeMap<i64, Vec<Direction>>,
    pub contribution: BigRational,
}

impl BlockConfiguration {
    pub fn used_times(&self) -> BTreeSet<i64> {
        self.schedule.keys().copied().collect()
    }

    pub fn odd_chips(&self) -> usize {
        self.schedule.values().map(Vec::len).sum()
    }

    /// `"9:SW NW NE;27:SE SW"`.
    pub fn schedule_string(&self) -> String {
        let mut s = String::new();
        for (i, (t, dirs)) in self.schedule.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            write!(s, "{t}:").unwrap();
            let names: Vec<&str> = dirs.iter().map(|d| d.name()).collect();
            s.push_str(&names.join(" "));
        }
        s
    }
}

/// The block of the phase `[lo, hi]`.
///
/// Flat functions match either trend. When that leaves more than one candidate the
/// first in rotor order is taken; all candidates then yield the same contribution.
pub fn block_of_phase(profile: &ModeProfile, lo: i64, hi: Option<i64>) -> Result<Block> {
    let hi_t = hi.unwrap_or(i64::MAX);
    let seq = &profile.sequence;
    let start = (0..4)
        .find(|&i| {
            profile.singles[i].matches(lo, hi_t, Trend::Increasing)
                && profile.pairs[i].matches(lo, hi_t, Trend::Increasing)
                && profile.singles[(i + 3) % 4].matches(lo, hi_t, Trend::Decreasing)
        })
        .ok_or_else(|| Error::NoBlock { vertex: profile.vertex.to_string(), lo, hi: hi_t })?;
    let dirs = [0, 1, 2, 3].map(|k| seq.at(start + k));
    let signature = [0, 1, 2, 3].map(|k| {
        profile.singles[(start + k) % 4]
            .trend_in_phase(lo, hi_t)
            .unwrap_or(Trend::Increasing)
    });
    Ok(Block { start, dirs, signature })
}

pub fn block_configuration(x: Vertex, seq: &RotorSequence) -> Result<BlockConfiguration> {
    let profile = mode_profile(x, seq);
    block_configuration_from(&profile)
}

pub fn block_configuration_from(profile: &ModeProfile) -> Result<BlockConfiguration> {
    let x = profile.vertex;
    let seq = profile.sequence;
    let ex = profile.extremal_times.clone();
    let mut phases = Vec::with_capacity(ex.len() + 1);
    if !ex.is_empty() {
        let mut lo = 0;
        for hi in ex.iter().map(|&t| Some(t)).chain(std::iter::once(None)) {
            phases.push(Phase { lo, hi, block: block_of_phase(profile, lo, hi)? });
            lo = hi.unwrap_or(lo);
        }
    }
    let mut schedule = BTreeMap::new();
    for (j, &t) in ex.iter().enumerate() {
        // the block ending at t continues into the block starting at t
        let last = (phases[j].block.start + 3) % 4;
        let first = phases[j + 1].block.start;
        let k = (first + 4 - last - 1) % 4;
        if k > 0 {
            schedule.insert(t, (1..=k).map(|m| seq.at(last + m)).collect::<Vec<_>>());
        }
    }
    let contribution = schedule_contribution(x, &schedule);
    Ok(BlockConfiguration { vertex: x, sequence: seq, extremal_times: ex, phases, schedule, contribution })
}

/// Sum of single influences over a schedule.
pub fn schedule_contribution(x: Vertex, schedule: &BTreeMap<i64, Vec<Direction>>) -> BigRational {
    schedule
        .iter()
        .flat_map(|(&t, dirs)| dirs.iter().map(move |&d| inf_single(x, d, t)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// The largest contribution any configuration of `x` can make.
pub fn maxcon(x: Vertex, seq: &RotorSequence) -> BigRational {
    block_configuration(x, seq)
        .map(|c| c.contribution)
        .unwrap_or_else(|e| panic!("block structure violated at {x} for {seq}: {e}"))
}

/// Vertex whose maximal contribution is the negated minimal contribution of `x`.
pub fn mincon_mirror(x: Vertex, seq: &RotorSequence) -> Vertex {
    match seq.class() {
        SequenceClass::Circular | SequenceClass::XAlternating => Vertex { x1: -x.x1, x2: x.x2 },
        SequenceClass::YAlternating => Vertex { x1: x.x1, x2: -x.x2 },
    }
}

pub fn mincon(x: Vertex, seq: &RotorSequence) -> BigRational {
    -maxcon(mincon_mirror(x, seq), seq)
}

/// Exact contributions of every (initial rotor, chip counts) choice at the extremal
/// times, scaled to a common denominator.
struct ConfigurationSpace {
    /// `gain[j][r][k]`: numerator of sending `k` chips at time `j` with the rotor at `r`.
    gain: Vec<[[BigInt; 4]; 4]>,
    denom: BigInt,
}

impl ConfigurationSpace {
    fn new(x: Vertex, seq: &RotorSequence) -> Self {
        let times = mode_profile(x, seq).extremal_times;
        let raw: Vec<[BigRational; 4]> = times
            .iter()
            .map(|&t| [0, 1, 2, 3].map(|i| inf_single(x, seq.at(i), t)))
            .collect();
        let denom = raw
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled = |v: &BigRational| v.numer() * (&denom / v.denom());
        let gain = raw
            .iter()
            .map(|vals| {
                [0, 1, 2, 3].map(|r| {
                    let mut acc = BigInt::zero();
                    let mut out: [BigInt; 4] = Default::default();
                    for (k, slot) in out.iter_mut().enumerate().skip(1) {
                        acc += scaled(&vals[(r + k - 1) % 4]);
                        *slot = acc.clone();
                    }
                    out
                })
            })
            .collect();
        ConfigurationSpace { gain, denom }
    }

    /// Visits every configuration depth first, keeping the best value under `better`.
    fn search(&self, better: fn(&BigInt, &BigInt) -> bool) -> BigRational {
        fn dfs(
            space: &ConfigurationSpace,
            j: usize,
            rotor: usize,
            acc: &BigInt,
            best: &mut Option<BigInt>,
            better: fn(&BigInt, &BigInt) -> bool,
        ) {
            if j == space.gain.len() {
                if best.as_ref().is_none_or(|b| better(acc, b)) {
                    *best = Some(acc.clone());
                }
                return;
            }
            for k in 0..4 {
                let next = acc + &space.gain[j][rotor][k];
                dfs(space, j + 1, (rotor + k) % 4, &next, best, better);
            }
        }
        let mut best = None;
        for r in 0..4 {
            dfs(self, 0, r, &BigInt::zero(), &mut best, better);
        }
        BigRational::new(best.unwrap(), self.denom.clone())
    }
}

/// Exhaustive maximum over all `4 · 4^|EX|` odd-chip configurations.
pub fn brute_force_maxcon(x: Vertex, seq: &RotorSequence) -> BigRational {
    ConfigurationSpace::new(x, seq).search(|a, b| a > b)
}

/// Exhaustive minimum over the same configurations.
pub fn brute_force_mincon(x: Vertex, seq: &RotorSequence) -> BigRational {
    ConfigurationSpace::new(x, seq).search(|a, b| a < b)
}

/// Counts for one family of abstract extremum patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCounts {
    pub total: u64,
    pub valid: u64,
    pub max_used: usize,
    /// Valid patterns by number of used extremal times.
    pub used_histogram: BTreeMap<usize, u64>,
    /// Valid patterns where some phase has no unique block.
    pub without_block: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractModesReport {
    pub unimodal: PatternCounts,
    pub bimodal: PatternCounts,
}

/// Enumerates abstract extremum orders for the four singles and the two
/// independent pairs, keeps those consistent with the structural properties of
/// influence functions and counts the extremal times a block configuration uses.
pub fn enumerate_abstract_modes() -> AbstractModesReport {
    AbstractModesReport {
        unimodal: enumerate_patterns(false),
        bimodal: enumerate_patterns(true),
    }
}

// functions 0..3: singles R1..R4; 4: pair(R1,R2); 5: pair(R2,R3)
fn enumerate_patterns(bimodal: bool) -> PatternCounts {
    let mut events: Vec<usize> = (0..6).collect();
    if bimodal {
        events.insert(0, 0);
    }
    let mut counts = PatternCounts::default();
    loop {
        for init in 0u8..64 {
            counts.total += 1;
            let mut state = init;
            let mut phases = vec![state];
            for &f in &events {
                state ^= 1 << f;
                phases.push(state);
            }
            if !phases.iter().all(|&p| consistent_phase(p)) {
                continue;
            }
            counts.valid += 1;
            let blocks: Option<Vec<usize>> = phases.iter().map(|&p| abstract_block(p)).collect();
            let Some(blocks) = blocks else {
                counts.without_block += 1;
                continue;
            };
            let used = blocks
                .windows(2)
                .filter(|w| (w[1] + 4 - (w[0] + 3) % 4 - 1) % 4 > 0)
                .count();
            *counts.used_histogram.entry(used).or_default() += 1;
            counts.max_used = counts.max_used.max(used);
        }
        if !next_permutation(&mut events) {
            break;
        }
    }
    counts
}

fn abstract_trends(phase: u8) -> ([bool; 4], [bool; 4]) {
    let inc = |f: usize| phase >> f & 1 == 1;
    let singles = [inc(0), inc(1), inc(2), inc(3)];
    let pairs = [inc(4), inc(5), !inc(4), !inc(5)];
    (singles, pairs)
}

fn consistent_phase(phase: u8) -> bool {
    let (s, p) = abstract_trends(phase);
    // some single increases and some decreases, since all four sum to zero
    if s.iter().all(|&b| b) || s.iter().all(|&b| !b) {
        return false;
    }
    // two singles with a common trend force it on their sum
    (0..4).all(|i| s[i] != s[(i + 1) % 4] || p[i] == s[i])
}

fn abstract_block(phase: u8) -> Option<usize> {
    let (s, p) = abstract_trends(phase);
    let mut cands = (0..4).filter(|&i| s[i] && p[i] && !s[(i + 3) % 4]);
    let first = cands.next()?;
    cands.next().is_none().then_some(first)
}

/// Lexicographic successor; visits each distinct arrangement of a multiset once.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// One exported row per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub x1: i64,
    pub x2: i64,
    pub sequence: String,
    pub maxcon_numer: String,
    pub maxcon_denom: String,
    pub maxcon: f64,
    pub extremal_times: usize,
    pub used_times: usize,
    pub odd_chips: usize,
    pub schedule: String,
    /// No odd chips are scheduled.
    pub empty: bool,
}

impl From<&BlockConfiguration> for VertexRecord {
    fn from(c: &BlockConfiguration) -> Self {
        VertexRecord {
            x1: c.vertex.x1,
            x2: c.vertex.x2,
            sequence: c.sequence.to_string(),
            maxcon_numer: c.contribution.numer().to_string(),
            maxcon_denom: c.contribution.denom().to_string(),
            maxcon: c.contribution.to_f64().unwrap_or(f64::NAN),
            extremal_times: c.extremal_times.len(),
            used_times: c.schedule.len(),
            odd_chips: c.odd_chips(),
            schedule: c.schedule_string(),
            empty: c.schedule.is_empty(),
        }
    }
}

pub const CSV_HEADER: &str =
    "x1,x2,sequence,maxcon_numer,maxcon_denom,maxcon,extremal_times,used_times,odd_chips,schedule,empty";

impl VertexRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},\"{}\",{},{},{:e},{},{},{},\"{}\",{}",
            self.x1,
            self.x2,
            self.sequence,
            self.maxcon_numer,
            self.maxcon_denom,
            self.maxcon,
            self.extremal_times,
            self.used_times,
            self.odd_chips,
            self.schedule,
            self.empty
        )
    }
}

/// Block configurations for every vertex with `‖x‖∞ ≤ radius`.
pub fn configurations_in_ball(radius: i64, seq: &RotorSequence) -> Result<Vec<BlockConfiguration>> {
    use rayon::prelude::*;
    let vertices: Vec<Vertex> = Vertex::ball(radius).collect();
    vertices.par_iter().map(|&x| block_configuration(x, seq)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::Trend::{Decreasing as L, Increasing as R};
    use num_traits::Signed;
    use proptest::prelude::*;
    use Direction::*;

    fn v(x1: i64, x2: i64) -> Vertex {
        Vertex::new(x1, x2).unwrap()
    }

    fn q(n: i128, d: i128) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn seq(s: &str) -> RotorSequence {
        s.parse().unwrap()
    }

    #[test]
    fn worked_example_blocks() {
        let c = block_configuration(v(5, 9), &RotorSequence::CLOCKWISE).unwrap();
        let rows: Vec<(i64, Option<i64>, [Direction; 4], [Trend; 4])> =
            c.phases.iter().map(|p| (p.lo, p.hi, p.block.dirs, p.block.signature)).collect();
        assert_eq!(
            rows,
            vec![
                (0, Some(9), [SW, NW, NE, SE], [R, L, L, L]),
                (9, Some(23), [SE, SW, NW, NE], [R, R, L, L]),
                (23, Some(25), [SE, SW, NW, NE], [R, R, R, L]),
                (25, Some(27), [SE, SW, NW, NE], [R, L, R, L]),
                (27, Some(35), [NW, NE, SE, SW], [R, R, R, L]),
                (35, None, [NW, NE, SE, SW], [R, R, L, L]),
            ]
        );
        assert_eq!(c.phases[0].block.signature_arrows(), "→←←←");
    }

    #[test]
    fn worked_example_schedules() {
        let cases: [(&str, &str, (i128, i128)); 6] = [
            ("NE,SE,SW,NW", "9:SW NW NE;27:SE SW", (20506216364597, 9007199254740992)),
            ("NE,NW,SW,SE", "23:SW SE NE;27:NW SW;35:SE", (42586525668612585, 18446744073709551616)),
            ("NE,NW,SE,SW", "9:SW NE NW;23:SE SW NE;27:NW SE SW", (41469913829259, 18014398509481984)),
            ("NE,SW,SE,NW", "25:SW;35:SE", (42418400239030761, 18446744073709551616)),
            ("NE,SE,NW,SW", "17:SW NE;27:SE NW SW", (37531146977675, 18014398509481984)),
            ("NE,SW,NW,SE", "25:SW", (279297318663, 140737488355328)),
        ];
        for (s, sched, (n, d)) in cases {
            let c = block_configuration(v(5, 9), &seq(s)).unwrap();
            assert_eq!(c.schedule_string(), sched, "{s}");
            assert_eq!(c.contribution, q(n, d), "{s}");
        }
    }

    #[test]
    fn origin_is_empty() {
        for s in RotorSequence::all() {
            let c = block_configuration(Vertex::ORIGIN, &s).unwrap();
            assert!(c.schedule.is_empty());
            assert!(c.contribution.is_zero());
            assert!(mincon(Vertex::ORIGIN, &s).is_zero());
            assert!(brute_force_maxcon(Vertex::ORIGIN, &s).is_zero());
        }
    }

    #[test]
    fn brute_force_agrees_small() {
        for x in Vertex::ball(6) {
            for s in RotorSequence::all() {
                let c = block_configuration(x, &s).unwrap();
                assert_eq!(c.contribution, brute_force_maxcon(x, &s), "x={x} seq={s}");
                assert!(c.used_times().len() <= 3);
                assert!(!c.contribution.is_negative());
                assert!(c.used_times().is_subset(&c.extremal_times.iter().copied().collect()));
            }
        }
    }

    #[test]
    fn mincon_matches_exhaustive_minimum() {
        for x in Vertex::ball(5) {
            for s in RotorSequence::all() {
                assert_eq!(mincon(x, &s), brute_force_mincon(x, &s), "x={x} seq={s}");
            }
        }
        let cw = RotorSequence::CLOCKWISE;
        assert_eq!(mincon(v(-5, 9), &cw), -maxcon(v(5, 9), &cw));
        let y = seq("NE,SE,NW,SW");
        assert_eq!(mincon(v(5, -9), &y), -maxcon(v(5, 9), &y));
    }

    #[test]
    fn single_chip_lower_bound() {
        let x = v(1, 1);
        for s in RotorSequence::all() {
            let best = (1..=40)
                .flat_map(|t| Direction::ALL.map(|d| inf_single(x, d, t)))
                .max()
                .unwrap();
            assert!(maxcon(x, &s) >= best);
        }
    }

    #[test]
    fn abstract_enumeration_counts() {
        let r = enumerate_abstract_modes();
        assert_eq!((r.unimodal.total, r.unimodal.valid, r.unimodal.max_used), (46080, 384, 3));
        assert_eq!((r.bimodal.total, r.bimodal.valid, r.bimodal.max_used), (161280, 408, 4));
        assert_eq!(r.unimodal.used_histogram, BTreeMap::from([(1, 96), (2, 240), (3, 48)]));
        assert_eq!(r.bimodal.used_histogram, BTreeMap::from([(1, 80), (2, 188), (3, 112), (4, 28)]));
    }

    #[test]
    fn multiset_permutations() {
        let mut v = vec![0, 0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 12);
    }

    #[test]
    fn csv_row() {
        let c = block_configuration(v(5, 9), &RotorSequence::CLOCKWISE).unwrap();
        let row = VertexRecord::from(&c);
        assert_eq!((row.extremal_times, row.used_times, row.odd_chips), (5, 2, 5));
        assert!(row.csv_line().starts_with("5,9,\"NE,SE,SW,NW\",20506216364597,9007199254740992,"));
        assert_eq!(CSV_HEADER.split(',').count(), 11);
    }

    fn any_vertex(r: i64) -> impl Strategy<Value = Vertex> {
        (-r..=r, -r..=r).prop_map(move |(a, b)| {
            let b = if (a - b).rem_euclid(2) == 0 { b } else if b < r { b + 1 } else { b - 1 };
            Vertex { x1: a, x2: b }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn class_symmetries(x in any_vertex(30)) {
            let m = |y: Vertex, s: &RotorSequence| maxcon(y, s);
            for s in RotorSequence::all() {
                let base = m(x, &s);
                prop_assert!(!base.is_negative());
                match s.class() {
                    SequenceClass::Circular => prop_assert_eq!(&base, &m(Vertex { x1: -x.x1, x2: -x.x2 }, &s)),
                    SequenceClass::XAlternating => prop_assert_eq!(&base, &m(Vertex { x1: x.x1, x2: -x.x2 }, &s)),
                    SequenceClass::YAlternating => prop_assert_eq!(&base, &m(Vertex { x1: -x.x1, x2: x.x2 }, &s)),
                }
            }
        }

        #[test]
        fn brute_force_agrees_sampled(x in any_vertex(12), i in 0usize..6) {
            let s = RotorSequence::all()[i];
            prop_assert_eq!(maxcon(x, &s), brute_force_maxcon(x, &s));
        }
    }
}
