//! Propp machine and linear machine on the diagonal grid.
//!
//! Both machines move every chip once per step. The Propp machine serves the
//! neighbours of a vertex in rotor order; the linear machine splits each pile into
//! exact quarters and therefore tracks the expected occupancy of a random walk.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{binomial, inf_single};
use crate::lattice::{parity_match, Direction, RotorSequence, Vertex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProppState {
    pub time: u64,
    pub sequence: RotorSequence,
    /// Rotor of every vertex absent from `rotors`.
    pub default_rotor: Direction,
    pub chips: BTreeMap<Vertex, u64>,
    /// Direction the next chip leaving the vertex will take.
    pub rotors: BTreeMap<Vertex, Direction>,
}

impl ProppState {
    pub fn new(sequence: RotorSequence) -> Self {
        ProppState {
            time: 0,
            sequence,
            default_rotor: sequence.at(0),
            chips: BTreeMap::new(),
            rotors: BTreeMap::new(),
        }
    }

    pub fn rotor(&self, x: Vertex) -> Direction {
        self.rotors.get(&x).copied().unwrap_or(self.default_rotor)
    }

    pub fn chips_at(&self, x: Vertex) -> u64 {
        self.chips.get(&x).copied().unwrap_or(0)
    }

    pub fn add_chips(&mut self, x: Vertex, n: u64) {
        if n > 0 {
            *self.chips.entry(x).or_default() += n;
        }
    }

    pub fn total_chips(&self) -> u64 {
        self.chips.values().sum()
    }

    /// All chips sit on vertices `x ∼ time`.
    pub fn parity_consistent(&self) -> bool {
        self.chips.keys().all(|&x| parity_match(x, self.time as i64))
    }

    pub fn step(&self) -> ProppState {
        propp_step(self)
    }

    pub fn to_linear(&self) -> LinearState {
        LinearState {
            time: self.time,
            chips: self
                .chips
                .iter()
                .map(|(&x, &n)| (x, BigRational::from_integer(n.into())))
                .collect(),
        }
    }
}

/// One step: `k` chips at a vertex with rotor `a` go to `a, next(a), …, next^{k-1}(a)`
/// and the rotor becomes `next^k(a)`.
pub fn propp_step(state: &ProppState) -> ProppState {
    let seq = &state.sequence;
    let mut chips: BTreeMap<Vertex, u64> = BTreeMap::new();
    let mut rotors = state.rotors.clone();
    for (&x, &k) in &state.chips {
        if k == 0 {
            continue;
        }
        let a = state.rotor(x);
        let (full, rest) = (k / 4, k % 4);
        for j in 0..4u64 {
            let n = full + u64::from(j < rest);
            if n > 0 {
                *chips.entry(x.step(seq.next_direction(a, j))).or_default() += n;
            }
        }
        rotors.insert(x, seq.next_direction(a, k));
    }
    ProppState {
        time: state.time + 1,
        sequence: state.sequence,
        default_rotor: state.default_rotor,
        chips,
        rotors,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearState {
    pub time: u64,
    pub chips: BTreeMap<Vertex, BigRational>,
}

impl LinearState {
    pub fn at(&self, x: Vertex) -> BigRational {
        self.chips.get(&x).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.chips.values().fold(BigRational::zero(), |a, b| a + b)
    }
}

/// One step of the linear machine: every pile is split into four equal parts.
pub fn linear_step(state: &LinearState) -> LinearState {
    let quarter = BigRational::new(1.into(), 4.into());
    let mut chips: BTreeMap<Vertex, BigRational> = BTreeMap::new();
    for (&x, v) in &state.chips {
        if v.is_zero() {
            continue;
        }
        let part = v * &quarter;
        for d in Direction::ALL {
            *chips.entry(x.step(d)).or_insert_with(BigRational::zero) += &part;
        }
    }
    LinearState { time: state.time + 1, chips }
}

/// Chip counts `f(·, t)` for `t = 0..=T` together with the starting rotors.
#[derive(Debug, Clone)]
pub struct ProppTrace {
    pub initial: ProppState,
    pub counts: Vec<BTreeMap<Vertex, u64>>,
}

pub fn run_propp(initial: &ProppState, steps: u64) -> (ProppState, ProppTrace) {
    let mut state = initial.clone();
    let mut counts = vec![state.chips.clone()];
    for _ in 0..steps {
        state = propp_step(&state);
        counts.push(state.chips.clone());
    }
    (state, ProppTrace { initial: initial.clone(), counts })
}

pub fn run_linear(initial: &LinearState, steps: u64) -> LinearState {
    (0..steps).fold(initial.clone(), |s, _| linear_step(&s))
}

/// `f(0,T) - E(0,T)` with both machines started from `initial`.
pub fn discrepancy(initial: &ProppState, steps: u64) -> BigRational {
    let (propp, _) = run_propp(initial, steps);
    let linear = run_linear(&initial.to_linear(), steps);
    BigRational::from_integer(propp.chips_at(Vertex::ORIGIN).into()) - linear.at(Vertex::ORIGIN)
}

/// Per-vertex contribution to the origin's discrepancy at the end of the trace:
/// the `i`-th chip ever to leave `x`, sent at time `s`, adds
/// `INF(x, next^i(rotor₀(x)), T - s)`.
pub fn contribution_from_trace(trace: &ProppTrace) -> BTreeMap<Vertex, BigRational> {
    let horizon = trace.counts.len() as i64 - 1;
    let seq = &trace.initial.sequence;
    let mut sent: BTreeMap<Vertex, u64> = BTreeMap::new();
    let mut out: BTreeMap<Vertex, BigRational> = BTreeMap::new();
    for (s, counts) in trace.counts.iter().enumerate().take(horizon.max(0) as usize) {
        for (&x, &k) in counts {
            let before = sent.entry(x).or_default();
            let start = trace.initial.rotor(x);
            let acc = out.entry(x).or_insert_with(BigRational::zero);
            // complete rounds of four cancel
            for i in (*before + k / 4 * 4)..(*before + k) {
                *acc += inf_single(x, seq.next_direction(start, i), horizon - s as i64);
            }
            *before += k;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub fn contribution_sum(cons: &BTreeMap<Vertex, BigRational>) -> BigRational {
    cons.values().fold(BigRational::zero(), |a, b| a + b)
}

/// Prescribed chip counts modulo 4, keyed by `(vertex, time)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OddChipSchedule {
    entries: BTreeMap<(Vertex, u64), u8>,
}

impl OddChipSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `π(x,t)`; rejects residues above 3 and nonzero residues where `x ≁ t`.
    pub fn set(&mut self, x: Vertex, t: u64, residue: u8) -> Result<()> {
        if residue > 3 {
            return Err(Error::Precondition(format!("residue {residue} at {x}, t={t} exceeds 3")));
        }
        if residue != 0 && !parity_match(x, t as i64) {
            return Err(Error::Precondition(format!("nonzero residue at {x}, t={t} violates parity")));
        }
        if residue == 0 {
            self.entries.remove(&(x, t));
        } else {
            self.entries.insert((x, t), residue);
        }
        Ok(())
    }

    pub fn get(&self, x: Vertex, t: u64) -> u8 {
        self.entries.get(&(x, t)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vertex, u64, u8)> + '_ {
        self.entries.iter().map(|(&(x, t), &r)| (x, t, r))
    }
}

/// Largest horizon the forcing constructor accepts; piles reach `3·4^T` chips.
pub const MAX_FORCING_HORIZON: u64 = 6;

/// Builds an even initial configuration whose Propp run has `f(x,t) ≡ π(x,t) (mod 4)`
/// for every `t ≤ horizon` and every `x` with `‖x‖₁ ≤ window`.
///
/// Stage `T` adds `ε·4^T` chips at `y(x) = (x1 ± T, x2 ± T)`, the signs pointing
/// away from the origin in the quadrant of `x`. Such a pile is invisible modulo 4
/// before time `T` and reaches `x` with weight one at time `T`, while it cannot
/// reach any other vertex of the same or smaller `ℓ1` norm.
pub fn mod4_forcing_construct(
    schedule: &OddChipSchedule,
    horizon: u64,
    window: i64,
    rotors: &ProppState,
) -> Result<ProppState> {
    if horizon > MAX_FORCING_HORIZON {
        return Err(Error::Precondition(format!("horizon {horizon} exceeds {MAX_FORCING_HORIZON}")));
    }
    if window < 0 {
        return Err(Error::Precondition("window radius must be nonnegative".into()));
    }
    let mut state = rotors.clone();
    state.time = 0;
    state.chips.clear();
    for (x, t, r) in schedule.entries() {
        if t == 0 {
            state.add_chips(x, r as u64);
        }
    }
    for stage in 1..=horizon {
        let (at_stage, _) = run_propp(&state, stage);
        let mut counts: BTreeMap<Vertex, u64> = at_stage.chips;
        let ts = stage as i64;
        let pile = 4u64.pow(stage as u32);
        for theta in 0..=window {
            for x in l1_sphere(theta).filter(|&x| parity_match(x, ts)) {
                let want = schedule.get(x, stage) as u64;
                let have = counts.get(&x).copied().unwrap_or(0) % 4;
                let eps = (want + 4 - have) % 4;
                if eps == 0 {
                    continue;
                }
                let y = Vertex {
                    x1: x.x1 + if x.x1 >= 0 { ts } else { -ts },
                    x2: x.x2 + if x.x2 >= 0 { ts } else { -ts },
                };
                state.add_chips(y, eps * pile);
                spread_pile(&mut counts, y, eps, ts);
            }
        }
    }
    Ok(state)
}

/// Adds the time-`t` image of `eps · 4^t` chips started at `y`.
fn spread_pile(counts: &mut BTreeMap<Vertex, u64>, y: Vertex, eps: u64, t: i64) {
    for a in 0..=t {
        for b in 0..=t {
            let x = Vertex { x1: y.x1 - t + 2 * a, x2: y.x2 - t + 2 * b };
            let w = binomial(t as u64, a as u64) * binomial(t as u64, b as u64);
            let w: u64 = w.try_into().expect("pile weight fits in u64");
            *counts.entry(x).or_default() += eps * w;
        }
    }
}

fn l1_sphere(theta: i64) -> impl Iterator<Item = Vertex> {
    Vertex::ball(theta).filter(move |x| x.norm_l1() == theta)
}

/// Checks `f(x,t) ≡ π(x,t) (mod 4)` on the window for `t ≤ horizon`; returns the
/// first violation.
pub fn verify_forcing(
    initial: &ProppState,
    schedule: &OddChipSchedule,
    horizon: u64,
    window: i64,
) -> Option<(Vertex, u64, u64, u8)> {
    let (_, trace) = run_propp(initial, horizon);
    for (t, counts) in trace.counts.iter().enumerate() {
        for x in Vertex::ball(window).filter(|x| x.norm_l1() <= window) {
            let f = counts.get(&x).copied().unwrap_or(0);
            let want = schedule.get(x, t as u64);
            if f % 4 != want as u64 {
                return Some((x, t as u64, f, want));
            }
        }
    }
    None
}

/// JSON form `{time, chips: [[x1,x2,count]], rotors: [[x1,x2,dir]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: u64,
    pub chips: Vec<(i64, i64, u64)>,
    pub rotors: Vec<(i64, i64, Direction)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_rotor: Option<Direction>,
}

impl From<&ProppState> for Snapshot {
    fn from(s: &ProppState) -> Self {
        Snapshot {
            time: s.time,
            chips: s.chips.iter().filter(|(_, &n)| n > 0).map(|(x, &n)| (x.x1, x.x2, n)).collect(),
            rotors: s.rotors.iter().map(|(x, &d)| (x.x1, x.x2, d)).collect(),
            sequence: Some(s.sequence.to_string()),
            default_rotor: Some(s.default_rotor),
        }
    }
}

impl TryFrom<&Snapshot> for ProppState {
    type Error = Error;

    fn try_from(s: &Snapshot) -> Result<Self> {
        let seq = match &s.sequence {
            Some(text) => text.parse()?,
            None => RotorSequence::CLOCKWISE,
        };
        let mut state = ProppState::new(seq);
        state.time = s.time;
        if let Some(d) = s.default_rotor {
            state.default_rotor = d;
        }
        for &(x1, x2, n) in &s.chips {
            state.add_chips(Vertex::new(x1, x2)?, n);
        }
        for &(x1, x2, d) in &s.rotors {
            state.rotors.insert(Vertex::new(x1, x2)?, d);
        }
        if !state.parity_consistent() {
            return Err(Error::Precondition(format!("chips off the parity class of time {}", s.time)));
        }
        Ok(state)
    }
}

/// A recorded run: start state, step count and the state reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replay {
    pub initial: Snapshot,
    pub steps: u64,
    pub expected: Snapshot,
}

impl Replay {
    pub fn record(initial: &ProppState, steps: u64) -> Replay {
        let (end, _) = run_propp(initial, steps);
        Replay { initial: initial.into(), steps, expected: (&end).into() }
    }

    pub fn verify(&self) -> Result<bool> {
        let start = ProppState::try_from(&self.initial)?;
        let (end, _) = run_propp(&start, self.steps);
        Ok(Snapshot::from(&end) == self.expected)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::h_prob;
    use proptest::prelude::*;
    use Direction::*;

    fn v(x1: i64, x2: i64) -> Vertex {
        Vertex::new(x1, x2).unwrap()
    }

    fn single_pile(n: u64, rotor: Direction) -> ProppState {
        let mut s = ProppState::new(RotorSequence::CLOCKWISE);
        s.add_chips(Vertex::ORIGIN, n);
        s.rotors.insert(Vertex::ORIGIN, rotor);
        s
    }

    #[test]
    fn rotor_moves() {
        let s = single_pile(1, NE).step();
        assert_eq!(s.chips_at(v(1, 1)), 1);
        assert_eq!(s.rotor(Vertex::ORIGIN), SE);

        let s = single_pile(4, SW).step();
        for d in Direction::ALL {
            assert_eq!(s.chips_at(Vertex::ORIGIN.step(d)), 1);
        }
        assert_eq!(s.rotor(Vertex::ORIGIN), SW);

        let s = single_pile(6, NE).step();
        let got: Vec<u64> = [NE, SE, SW, NW].iter().map(|&d| s.chips_at(Vertex::ORIGIN.step(d))).collect();
        assert_eq!(got, vec![2, 2, 1, 1]);
        assert_eq!(s.rotor(Vertex::ORIGIN), SW);
    }

    #[test]
    fn linear_machine_is_the_kernel() {
        let mut s = LinearState { time: 0, chips: BTreeMap::new() };
        s.chips.insert(Vertex::ORIGIN, BigRational::from_integer(1.into()));
        let one = linear_step(&s);
        assert_eq!(one.at(v(1, -1)), BigRational::new(1.into(), 4.into()));
        let mut cur = s.clone();
        for t in 1..=8 {
            cur = linear_step(&cur);
            assert_eq!(cur.total(), BigRational::from_integer(1.into()));
            for x in Vertex::ball(t) {
                assert_eq!(cur.at(x), h_prob(x, t), "x={x} t={t}");
            }
        }
    }

    #[test]
    fn empty_and_quartet_instances_vanish() {
        let s = ProppState::new(RotorSequence::CLOCKWISE);
        assert!(discrepancy(&s, 5).is_zero());
        let mut s = ProppState::new(RotorSequence::all()[4]);
        // a pile of m·4^T splits evenly through T steps
        let quad = 4u64.pow(7);
        s.add_chips(v(2, 0), 2 * quad);
        s.add_chips(v(-1, 3), quad);
        s.add_chips(v(3, 1), 3 * quad);
        s.rotors.insert(v(2, 0), SW);
        for t in 0..8 {
            assert!(discrepancy(&s, t).is_zero());
        }
        let (_, trace) = run_propp(&s, 7);
        assert!(contribution_from_trace(&trace).is_empty());
    }

    #[test]
    fn forcing_base_cases() {
        let rotors = ProppState::new(RotorSequence::CLOCKWISE);
        let zero = OddChipSchedule::new();
        let s = mod4_forcing_construct(&zero, 3, 4, &rotors).unwrap();
        assert_eq!(s.total_chips(), 0);

        let mut pi = OddChipSchedule::new();
        pi.set(Vertex::ORIGIN, 0, 3).unwrap();
        let s = mod4_forcing_construct(&pi, 0, 4, &rotors).unwrap();
        assert_eq!(s.chips_at(Vertex::ORIGIN), 3);

        assert!(pi.set(v(1, 1), 0, 1).is_err());
        assert!(pi.set(v(1, 1), 1, 4).is_err());
        assert!(mod4_forcing_construct(&pi, 7, 2, &rotors).is_err());
    }

    #[test]
    fn forcing_one_stage() {
        let mut rotors = ProppState::new(RotorSequence::COUNTERCLOCKWISE);
        rotors.rotors.insert(v(1, 1), SW);
        let mut pi = OddChipSchedule::new();
        pi.set(v(1, 1), 1, 2).unwrap();
        pi.set(v(-1, 1), 1, 3).unwrap();
        pi.set(v(2, 0), 2, 1).unwrap();
        pi.set(Vertex::ORIGIN, 0, 1).unwrap();
        let s = mod4_forcing_construct(&pi, 2, 3, &rotors).unwrap();
        assert!(s.parity_consistent());
        assert_eq!(verify_forcing(&s, &pi, 2, 3), None);
    }

    #[test]
    fn snapshot_and_replay() {
        let mut s = single_pile(7, NW);
        s.add_chips(v(2, -2), 3);
        s.rotors.insert(v(2, -2), SE);
        let json = serde_json::to_string(&Snapshot::from(&s)).unwrap();
        assert!(json.starts_with("{\"time\":0,\"chips\":[[0,0,7],[2,-2,3]],\"rotors\":[[0,0,\"NW\"],[2,-2,\"SE\"]]"));
        let back = ProppState::try_from(&serde_json::from_str::<Snapshot>(&json).unwrap()).unwrap();
        assert_eq!(back, s);
        let replay = Replay::record(&s, 9);
        assert!(replay.verify().unwrap());
        let odd = Snapshot { time: 0, chips: vec![(1, 1, 1)], rotors: vec![], sequence: None, default_rotor: None };
        assert!(ProppState::try_from(&odd).is_err());
    }

    fn instance() -> impl Strategy<Value = (ProppState, u64)> {
        (
            0usize..6,
            proptest::collection::vec((-3i64..=3, -3i64..=3, 0u64..7, 0usize..4), 0..8),
            0u64..9,
        )
            .prop_map(|(si, piles, t)| {
                let mut s = ProppState::new(RotorSequence::all()[si]);
                for (a, b, n, r) in piles {
                    let x = Vertex { x1: 2 * a, x2: 2 * b };
                    s.add_chips(x, n);
                    s.rotors.insert(x, Direction::ALL[r]);
                }
                (s, t)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn decomposition_is_exact((s, t) in instance()) {
            let (end, trace) = run_propp(&s, t);
            prop_assert_eq!(end.total_chips(), s.total_chips());
            prop_assert!(end.parity_consistent());
            let total = contribution_from_trace(&trace)
                .values()
                .fold(BigRational::zero(), |a, b| a + b);
            prop_assert_eq!(total, discrepancy(&s, t));
        }

        #[test]
        fn forcing_meets_random_schedules(
            si in 0usize..6,
            horizon in 1u64..=4,
            window in 0i64..=4,
            residues in proptest::collection::vec(0u8..4, 400),
            rot in proptest::collection::vec(0usize..4, 25),
        ) {
            let mut rotors = ProppState::new(RotorSequence::all()[si]);
            for (i, &r) in rot.iter().enumerate() {
                rotors.rotors.insert(Vertex::from_standard(i as i64 % 5 - 2, i as i64 / 5 - 2), Direction::ALL[r]);
            }
            let mut pi = OddChipSchedule::new();
            let mut it = residues.iter().cycle();
            for t in 0..=horizon {
                for x in Vertex::ball(window).filter(|x| x.norm_l1() <= window && parity_match(*x, t as i64)) {
                    pi.set(x, t, *it.next().unwrap()).unwrap();
                }
            }
            let s = mod4_forcing_construct(&pi, horizon, window, &rotors).unwrap();
            prop_assert!(s.parity_consistent());
            prop_assert_eq!(verify_forcing(&s, &pi, horizon, window), None);
        }

        #[test]
        fn rotors_advance_by_pile_size((s, _) in instance()) {
            let next = s.step();
            for (&x, &k) in &s.chips {
                prop_assert_eq!(next.rotor(x), s.sequence.next_direction(s.rotor(x), k));
            }
        }
    }

    #[test]
    fn big_pile_weights() {
        let mut counts = BTreeMap::new();
        spread_pile(&mut counts, v(3, 3), 2, 2);
        assert_eq!(counts[&v(1, 1)], 2);
        assert_eq!(counts[&v(3, 3)], 8);
        assert_eq!(counts.values().sum::<u64>(), 2 * 16);
    }

    #[test]
    fn recorded_replay_reproduces() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/replay_ne_nw_se_sw.json")).unwrap();
        let replay: Replay = serde_json::from_str(&text).unwrap();
        assert!(replay.verify().unwrap());
        let start = ProppState::try_from(&replay.initial).unwrap();
        let (_, trace) = run_propp(&start, replay.steps);
        assert_eq!(contribution_sum(&contribution_from_trace(&trace)), discrepancy(&start, replay.steps));
    }
}
