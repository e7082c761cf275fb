//! Rotor-router aggregation on the standard grid.
//!
//! Each particle starts at the origin and follows rotors through occupied sites
//! until it reaches an empty one, which it occupies. A rotor shows the direction it
//! last sent a particle: on each visit it first advances, then the particle moves the
//! new way. With all rotors initially left this reproduces the ordering of the
//! published left-initialised tables; send-then-advance swaps two of their columns.
//!
//! Radii are Euclidean norms of lattice points (cell centres). The inscribed radius
//! is the largest lattice norm strictly below the smallest unoccupied norm, the
//! circumscribed radius is the largest occupied norm.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir4 {
    U,
    L,
    D,
    R,
}

impl Dir4 {
    pub const ALL: [Dir4; 4] = [Dir4::U, Dir4::L, Dir4::D, Dir4::R];

    pub fn offset(self) -> (i64, i64) {
        match self {
            Dir4::U => (0, 1),
            Dir4::L => (-1, 0),
            Dir4::D => (0, -1),
            Dir4::R => (1, 0),
        }
    }

    /// Rendering colour: up red, left yellow, down green, right blue.
    pub fn color(self) -> [u8; 3] {
        match self {
            Dir4::U => [255, 0, 0],
            Dir4::L => [255, 255, 0],
            Dir4::D => [0, 160, 0],
            Dir4::R => [0, 0, 255],
        }
    }
}

impl fmt::Display for Dir4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir4::U => "U",
            Dir4::L => "L",
            Dir4::D => "D",
            Dir4::R => "R",
        })
    }
}

impl FromStr for Dir4 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "U" | "UP" => Ok(Dir4::U),
            "L" | "LEFT" => Ok(Dir4::L),
            "D" | "DOWN" => Ok(Dir4::D),
            "R" | "RIGHT" => Ok(Dir4::R),
            other => Err(Error::Parse(format!("unknown direction {other:?}"))),
        }
    }
}

/// Cyclic rotor order over `{U,L,D,R}`, written `L,U,D,R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sequence4([Dir4; 4]);

impl Sequence4 {
    pub fn new(order: [Dir4; 4]) -> Result<Self> {
        for d in Dir4::ALL {
            if !order.contains(&d) {
                return Err(Error::NotPermutation(format!("{order:?}")));
            }
        }
        Ok(Sequence4(order))
    }

    pub fn order(&self) -> [Dir4; 4] {
        self.0
    }

    pub fn position(&self, d: Dir4) -> u8 {
        self.0.iter().position(|&e| e == d).expect("permutation") as u8
    }

    /// The three orders of the left-initialised runs, in table order.
    pub fn table_orders() -> [Sequence4; 3] {
        use Dir4::*;
        [Sequence4([L, U, R, D]), Sequence4([L, U, D, R]), Sequence4([L, R, U, D])]
    }
}

impl fmt::Display for Sequence4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "{a},{b},{c},{d}")
    }
}

impl FromStr for Sequence4 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let dirs: Vec<Dir4> = s.split(',').map(str::parse).collect::<Result<_>>()?;
        let order: [Dir4; 4] = dirs
            .try_into()
            .map_err(|_| Error::Parse(format!("expected four directions in {s:?}")))?;
        Sequence4::new(order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotorInit {
    AllLeft,
    Random(u64),
}

const OCCUPIED: u8 = 0x80;
const ASSIGNED: u8 = 0x40;
const POS_MASK: u8 = 0x03;

/// Upper bound on the walk of a single particle.
pub const DEFAULT_STEP_BUDGET: u64 = 1 << 40;

pub struct Aggregation {
    seq: Sequence4,
    init: RotorInit,
    rng: ChaCha8Rng,
    /// Grid covers `[-half, half]²`; one byte per cell: occupied, rotor assigned,
    /// rotor position in `seq`.
    half: i64,
    cells: Vec<u8>,
    n: u64,
    max_occupied_sq: i64,
    /// Lattice points and occupied points per squared norm, for `k ≤ half²`.
    points_at: Vec<u32>,
    occupied_at: Vec<u32>,
    /// Smallest squared norm with an empty point.
    frontier: usize,
    /// Largest squared norm of a lattice point below `frontier`.
    inner_sq: usize,
    steps: u64,
    step_budget: u64,
}

impl Aggregation {
    pub fn new(seq: Sequence4, init: RotorInit) -> Self {
        let seed = match init {
            RotorInit::AllLeft => 0,
            RotorInit::Random(s) => s,
        };
        let mut agg = Aggregation {
            seq,
            init,
            rng: ChaCha8Rng::seed_from_u64(seed),
            half: 0,
            cells: Vec::new(),
            n: 0,
            max_occupied_sq: 0,
            points_at: Vec::new(),
            occupied_at: Vec::new(),
            frontier: 0,
            inner_sq: 0,
            steps: 0,
            step_budget: DEFAULT_STEP_BUDGET,
        };
        agg.resize(16);
        agg
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn particles(&self) -> u64 {
        self.n
    }

    pub fn sequence(&self) -> Sequence4 {
        self.seq
    }

    /// Total rotor moves so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn side(&self) -> i64 {
        2 * self.half + 1
    }

    fn index(&self, u: i64, v: i64) -> usize {
        ((v + self.half) * self.side() + (u + self.half)) as usize
    }

    fn resize(&mut self, half: i64) {
        let old_half = self.half;
        let old = std::mem::take(&mut self.cells);
        self.half = half;
        let side = self.side();
        self.cells = vec![0; (side * side) as usize];
        if !old.is_empty() {
            let old_side = 2 * old_half + 1;
            for v in -old_half..=old_half {
                let src = ((v + old_half) * old_side) as usize;
                let dst = self.index(-old_half, v);
                self.cells[dst..dst + old_side as usize].copy_from_slice(&old[src..src + old_side as usize]);
            }
        }
        let kmax = (half * half) as usize;
        self.points_at = vec![0; kmax + 1];
        self.occupied_at = vec![0; kmax + 1];
        for v in -half..=half {
            for u in -half..=half {
                let k = (u * u + v * v) as usize;
                if k <= kmax {
                    self.points_at[k] += 1;
                    if self.cells[self.index(u, v)] & OCCUPIED != 0 {
                        self.occupied_at[k] += 1;
                    }
                }
            }
        }
    }

    fn rotor_pos(&mut self, i: usize) -> u8 {
        let c = self.cells[i];
        if c & ASSIGNED != 0 {
            return c & POS_MASK;
        }
        let p = match self.init {
            RotorInit::AllLeft => self.seq.position(Dir4::L),
            RotorInit::Random(_) => self.rng.gen_range(0..4u8),
        };
        self.cells[i] = (c & OCCUPIED) | ASSIGNED | p;
        p
    }

    pub fn is_occupied(&self, u: i64, v: i64) -> bool {
        u.abs() <= self.half && v.abs() <= self.half && self.cells[self.index(u, v)] & OCCUPIED != 0
    }

    /// Final rotor direction of a visited site.
    pub fn rotor(&self, u: i64, v: i64) -> Option<Dir4> {
        if u.abs() > self.half || v.abs() > self.half {
            return None;
        }
        let c = self.cells[self.index(u, v)];
        (c & ASSIGNED != 0).then(|| self.seq.0[(c & POS_MASK) as usize])
    }

    /// Adds one particle; returns the site it occupies.
    pub fn insert(&mut self) -> Result<(i64, i64)> {
        let (mut u, mut v) = (0i64, 0i64);
        let mut walked = 0u64;
        loop {
            let i = self.index(u, v);
            if self.cells[i] & OCCUPIED == 0 {
                break;
            }
            let p = (self.rotor_pos(i) + 1) & POS_MASK;
            self.cells[i] = (self.cells[i] & !POS_MASK) | p;
            let (du, dv) = self.seq.0[p as usize].offset();
            u += du;
            v += dv;
            walked += 1;
            if walked > self.step_budget {
                return Err(Error::StepBudget(self.step_budget));
            }
        }
        self.steps += walked;
        let i = self.index(u, v);
        self.rotor_pos(i);
        self.cells[i] |= OCCUPIED;
        self.n += 1;
        let k = u * u + v * v;
        self.max_occupied_sq = self.max_occupied_sq.max(k);
        self.occupied_at[k as usize] += 1;
        // keep one free ring around the aggregate so walks stay on the grid
        let reach = u.abs().max(v.abs()) + 2;
        if reach > self.half || self.max_occupied_sq + 1 >= (self.half * self.half) {
            self.resize(2 * self.half);
        }
        while self.occupied_at[self.frontier] == self.points_at[self.frontier] {
            if self.points_at[self.frontier] > 0 {
                self.inner_sq = self.frontier;
            }
            self.frontier += 1;
        }
        Ok((u, v))
    }

    pub fn inscribed_radius(&self) -> f64 {
        (self.inner_sq as f64).sqrt()
    }

    pub fn circumscribed_radius(&self) -> f64 {
        (self.max_occupied_sq as f64).sqrt()
    }

    pub fn delta(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.circumscribed_radius() - self.inscribed_radius()
    }

    /// Smallest box `[u0,u1] × [v0,v1]` holding every occupied site.
    pub fn bounding_box(&self) -> Option<(i64, i64, i64, i64)> {
        let mut b: Option<(i64, i64, i64, i64)> = None;
        for v in -self.half..=self.half {
            for u in -self.half..=self.half {
                if self.cells[self.index(u, v)] & OCCUPIED != 0 {
                    b = Some(match b {
                        None => (u, u, v, v),
                        Some((a, c, d, e)) => (a.min(u), c.max(u), d.min(v), e.max(v)),
                    });
                }
            }
        }
        b
    }

    /// Binary PPM of the bounding box, top row first; occupied sites coloured by
    /// their final rotor, everything else white.
    pub fn ppm_bytes(&self) -> Vec<u8> {
        let (u0, u1, v0, v1) = self.bounding_box().unwrap_or((0, 0, 0, 0));
        let (w, h) = (u1 - u0 + 1, v1 - v0 + 1);
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        out.reserve((w * h * 3) as usize);
        for v in (v0..=v1).rev() {
            for u in u0..=u1 {
                let px = match (self.is_occupied(u, v), self.rotor(u, v)) {
                    (true, Some(d)) => d.color(),
                    _ => [255, 255, 255],
                };
                out.extend_from_slice(&px);
            }
        }
        out
    }

    /// RGBA pixels and dimensions, same layout as [`Aggregation::ppm_bytes`].
    pub fn rgba(&self) -> (u32, u32, Vec<u8>) {
        let (u0, u1, v0, v1) = self.bounding_box().unwrap_or((0, 0, 0, 0));
        let mut px = Vec::with_capacity(((u1 - u0 + 1) * (v1 - v0 + 1) * 4) as usize);
        for v in (v0..=v1).rev() {
            for u in u0..=u1 {
                let [r, g, b] = match (self.is_occupied(u, v), self.rotor(u, v)) {
                    (true, Some(d)) => d.color(),
                    _ => [255, 255, 255],
                };
                px.extend_from_slice(&[r, g, b, 255]);
            }
        }
        ((u1 - u0 + 1) as u32, (v1 - v0 + 1) as u32, px)
    }
}

pub fn render_ppm(agg: &Aggregation, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&agg.ppm_bytes())?;
    f.flush()?;
    Ok(())
}

/// Which `n` get a trace entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sampling {
    /// Every insertion up to `10⁵`, every thousandth beyond.
    Standard,
    Points(Vec<u64>),
}

impl Sampling {
    fn wants(&self, n: u64) -> bool {
        match self {
            Sampling::Standard => n <= 100_000 || n.is_multiple_of(1000),
            Sampling::Points(p) => p.binary_search(&n).is_ok(),
        }
    }
}

/// Average of `Δ(n)` over `window.0 < n ≤ window.1` and maximum over all `n`,
/// both taken over every insertion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaStats {
    pub window: (u64, u64),
    pub average: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdlaRun {
    pub particles: u64,
    pub trace: Vec<(u64, f64)>,
    pub stats: DeltaStats,
}

impl IdlaRun {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("n;delta\n");
        for (n, d) in &self.trace {
            s.push_str(&format!("{n};{d:.17}\n"));
        }
        s
    }
}

/// Runs `n` insertions. The statistics window defaults to the last third,
/// `(2n/3, n]`, matching the table convention.
pub fn idla_run(
    n: u64,
    seq: Sequence4,
    init: RotorInit,
    sampling: &Sampling,
    window: Option<(u64, u64)>,
) -> Result<(Aggregation, IdlaRun)> {
    if n == 0 {
        return Err(Error::Precondition("at least one particle required".into()));
    }
    let window = window.unwrap_or((2 * n / 3, n));
    let mut agg = Aggregation::new(seq, init);
    let mut sampling = sampling.clone();
    if let Sampling::Points(p) = &mut sampling {
        p.sort_unstable();
    }
    let (mut trace, mut sum, mut count, mut max) = (Vec::new(), 0.0f64, 0u64, 0.0f64);
    for i in 1..=n {
        agg.insert()?;
        let d = agg.delta();
        max = max.max(d);
        if i > window.0 && i <= window.1 {
            sum += d;
            count += 1;
        }
        if sampling.wants(i) {
            trace.push((i, d));
        }
    }
    let average = if count > 0 { sum / count as f64 } else { f64::NAN };
    Ok((agg, IdlaRun { particles: n, trace, stats: DeltaStats { window, average, max } }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample mean and sample (n−1) standard deviation.
    pub fn of(xs: &[f64]) -> MeanStd {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        MeanStd { mean, std: var.sqrt() }
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}±{:.3}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub particles: u64,
    pub seeds: Vec<u64>,
    pub average: MeanStd,
    pub max: MeanStd,
}

/// Randomly initialised runs, one per seed, executed in parallel.
pub fn ensemble_stats(
    n: u64,
    seq: Sequence4,
    seeds: &[u64],
    window: Option<(u64, u64)>,
) -> Result<EnsembleStats> {
    if seeds.len() < 2 {
        return Err(Error::Precondition("ensemble needs at least two seeds".into()));
    }
    let runs: Vec<DeltaStats> = seeds
        .par_iter()
        .map(|&s| {
            idla_run(n, seq, RotorInit::Random(s), &Sampling::Points(vec![]), window).map(|(_, r)| r.stats)
        })
        .collect::<Result<_>>()?;
    let avgs: Vec<f64> = runs.iter().map(|r| r.average).collect();
    let maxs: Vec<f64> = runs.iter().map(|r| r.max).collect();
    Ok(EnsembleStats {
        particles: n,
        seeds: seeds.to_vec(),
        average: MeanStd::of(&avgs),
        max: MeanStd::of(&maxs),
    })
}
