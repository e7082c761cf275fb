//! Summation of maximal contributions over the grid and the bounds on what lies
//! outside the summed region.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::blockcfg::{block_configuration, maxcon};
use crate::error::{Error, Result};
use crate::interval::{self, Enclosure};
use crate::kernel::{self, h_prob};
use crate::lattice::{RotorSequence, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Circular,
    NonCircular,
    PerVertexBest,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Circular => "circular",
            Regime::NonCircular => "non-circular",
            Regime::PerVertexBest => "per-vertex-best",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(Regime::Circular),
            "non-circular" => Ok(Regime::NonCircular),
            "per-vertex-best" => Ok(Regime::PerVertexBest),
            _ => Err(Error::Parse(format!("unknown regime {s:?}"))),
        }
    }
}

/// What is summed: one fixed sequence everywhere, or the best one per vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumTarget {
    Sequence(RotorSequence),
    PerVertexBest,
}

impl SumTarget {
    pub fn regime(&self) -> Regime {
        match self {
            SumTarget::Sequence(s) if s.is_circular() => Regime::Circular,
            SumTarget::Sequence(_) => Regime::NonCircular,
            SumTarget::PerVertexBest => Regime::PerVertexBest,
        }
    }

    /// Canonical target for a regime: clockwise, `(NE,NW,SE,SW)`, or per-vertex best.
    /// Sequences within one class give identical sums.
    pub fn for_regime(regime: Regime) -> SumTarget {
        match regime {
            Regime::Circular => SumTarget::Sequence(RotorSequence::CLOCKWISE),
            Regime::NonCircular => SumTarget::Sequence(RotorSequence::all()[2]),
            Regime::PerVertexBest => SumTarget::PerVertexBest,
        }
    }

    pub fn vertex_value(&self, x: Vertex) -> BigRational {
        match self {
            SumTarget::Sequence(s) => maxcon(x, s),
            SumTarget::PerVertexBest => RotorSequence::all()
                .iter()
                .map(|s| maxcon(x, s))
                .max()
                .unwrap(),
        }
    }
}

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Exact {
        numer: String,
        denom: String,
        decimal: String,
    }
    Exact {
        numer: r.numer().to_string(),
        denom: r.denom().to_string(),
        decimal: decimal_floor(r, 12),
    }
    .serialize(s)
}

/// `r` rounded toward negative infinity to `digits` decimals.
pub fn decimal_floor(r: &BigRational, digits: u32) -> String {
    render_decimal(&(r * BigInt::from(10).pow(digits)).floor().to_integer(), digits)
}

/// `r` rounded toward positive infinity to `digits` decimals.
pub fn decimal_ceil(r: &BigRational, digits: u32) -> String {
    render_decimal(&(r * BigInt::from(10).pow(digits)).ceil().to_integer(), digits)
}

fn render_decimal(scaled: &BigInt, digits: u32) -> String {
    let sign = if scaled.is_negative() { "-" } else { "" };
    let (int, frac) = scaled.abs().div_rem(&BigInt::from(10).pow(digits));
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits as usize)
}

#[derive(Debug, Clone, Serialize)]
pub struct RingSubtotal {
    pub ring: i64,
    #[serde(serialize_with = "ser_rational")]
    pub subtotal: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub cumulative: BigRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct SumReport {
    pub radius: i64,
    pub regime: Regime,
    pub sequence: Option<String>,
    #[serde(serialize_with = "ser_rational")]
    pub partial_sum: BigRational,
    pub rings: Vec<RingSubtotal>,
}

impl SumReport {
    pub fn decimal(&self) -> String {
        decimal_floor(&self.partial_sum, 6)
    }

    /// `ring,subtotal_numer,subtotal_denom,subtotal,cumulative`.
    pub fn rings_csv(&self) -> String {
        let mut out = String::from("ring,subtotal_numer,subtotal_denom,subtotal,cumulative\n");
        for r in &self.rings {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.ring,
                r.subtotal.numer(),
                r.subtotal.denom(),
                decimal_floor(&r.subtotal, 12),
                decimal_floor(&r.cumulative, 12)
            ));
        }
        out
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))
}

fn ring_subtotal(ring: i64, target: &SumTarget) -> BigRational {
    let vertices: Vec<Vertex> = Vertex::ring(ring).collect();
    let values: Vec<BigRational> = vertices.par_iter().map(|&x| target.vertex_value(x)).collect();
    values.into_iter().fold(BigRational::zero(), |a, b| a + b)
}

/// Exact `Σ maxcon(x)` over `‖x‖∞ ≤ radius`.
pub fn grid_sum(radius: i64, target: SumTarget, threads: usize) -> Result<SumReport> {
    grid_sum_resuming(radius, target, threads, Vec::new(), |_| Ok(()))
}

fn grid_sum_resuming(
    radius: i64,
    target: SumTarget,
    threads: usize,
    done: Vec<BigRational>,
    mut on_ring: impl FnMut(&RingSubtotal) -> Result<()>,
) -> Result<SumReport> {
    if radius < 0 {
        return Err(Error::Precondition("radius must be nonnegative".into()));
    }
    let pool = pool(threads)?;
    let mut rings = Vec::with_capacity(radius as usize + 1);
    let mut cumulative = BigRational::zero();
    for ring in 0..=radius {
        let subtotal = match done.get(ring as usize) {
            Some(v) => v.clone(),
            None => {
                let v = pool.install(|| ring_subtotal(ring, &target));
                cumulative += &v;
                let entry = RingSubtotal { ring, subtotal: v.clone(), cumulative: cumulative.clone() };
                on_ring(&entry)?;
                rings.push(entry);
                continue;
            }
        };
        cumulative += &subtotal;
        rings.push(RingSubtotal { ring, subtotal, cumulative: cumulative.clone() });
    }
    Ok(SumReport {
        radius,
        regime: target.regime(),
        sequence: match target {
            SumTarget::Sequence(s) => Some(s.to_string()),
            SumTarget::PerVertexBest => None,
        },
        partial_sum: cumulative,
        rings,
    })
}

/// Like [`grid_sum`], resuming from and appending to a checkpoint file with one
/// line `ring;regime;numerator;denominator` per finished ring.
pub fn grid_sum_checkpointed(radius: i64, target: SumTarget, threads: usize, path: &Path) -> Result<SumReport> {
    let done = read_checkpoint(path, target.regime())?;
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    grid_sum_resuming(radius, target, threads, done, |r| {
        writeln!(file, "{}", checkpoint_line(r.ring, target.regime(), &r.subtotal))?;
        file.flush()?;
        Ok(())
    })
}

pub fn checkpoint_line(ring: i64, regime: Regime, subtotal: &BigRational) -> String {
    format!("{ring};{regime};{};{}", subtotal.numer(), subtotal.denom())
}

/// Ring subtotals stored so far, in ring order.
pub fn read_checkpoint(path: &Path, regime: Regime) -> Result<Vec<BigRational>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(';').collect();
        let bad = || Error::Parse(format!("checkpoint line {}: {line:?}", i + 1));
        if f.len() != 4 {
            return Err(bad());
        }
        let ring: usize = f[0].parse().map_err(|_| bad())?;
        if ring != out.len() {
            return Err(bad());
        }
        if f[1].parse::<Regime>()? != regime {
            return Err(Error::Parse(format!("checkpoint holds regime {} not {regime}", f[1])));
        }
        let n: BigInt = f[2].parse().map_err(|_| bad())?;
        let d: BigInt = f[3].parse().map_err(|_| bad())?;
        if !d.is_positive() {
            return Err(bad());
        }
        out.push(BigRational::new(n, d));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FloatSumReport {
    pub radius: i64,
    pub regime: Regime,
    pub value: f64,
    pub checked: usize,
    pub max_relative_error: f64,
}

/// Double-precision grid sum; schedules stay exact, influences are evaluated in
/// `f64`. Roughly one vertex in `sample_every` is recomputed exactly and must agree
/// to a relative `1e-9`.
pub fn grid_sum_float(radius: i64, target: SumTarget, threads: usize, sample_every: u64) -> Result<FloatSumReport> {
    let vertices: Vec<Vertex> = Vertex::ball(radius).collect();
    let sample = sample_every.max(1);
    let per_vertex = |x: Vertex| -> Result<(f64, Option<f64>)> {
        let seqs: Vec<RotorSequence> = match target {
            SumTarget::Sequence(s) => vec![s],
            SumTarget::PerVertexBest => RotorSequence::all().to_vec(),
        };
        let mut best = f64::NEG_INFINITY;
        for s in &seqs {
            let cfg = block_configuration(x, s)?;
            let v: f64 = cfg
                .schedule
                .iter()
                .flat_map(|(&t, dirs)| dirs.iter().map(move |&d| kernel::fast::inf_single(x, d, t)))
                .sum();
            best = best.max(v);
        }
        let h = (x.x1.wrapping_mul(7919) ^ x.x2.wrapping_mul(104729)).unsigned_abs();
        if !h.is_multiple_of(sample) {
            return Ok((best, None));
        }
        let exact = target.vertex_value(x).to_f64().unwrap_or(f64::NAN);
        let err = if exact == 0.0 { best.abs() } else { ((best - exact) / exact).abs() };
        if err > 1e-9 {
            return Err(Error::FloatMismatch(format!("{x}: {best} vs {exact}")));
        }
        Ok((best, Some(err)))
    };
    let results: Vec<(f64, Option<f64>)> =
        pool(threads)?.install(|| vertices.par_iter().map(|&x| per_vertex(x)).collect::<Result<_>>())?;
    let checked = results.iter().filter(|r| r.1.is_some()).count();
    let max_relative_error = results.iter().filter_map(|r| r.1).fold(0.0, f64::max);
    Ok(FloatSumReport {
        radius,
        regime: target.regime(),
        value: results.iter().map(|r| r.0).sum(),
        checked,
        max_relative_error,
    })
}

/// Enclosing intervals for the maximisers of `H(x,t)/t` and `H(x,t)/t²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaximizerBounds {
    pub t_max: (Rational64, Rational64),
    pub t2_max: (Rational64, Rational64),
}

pub fn t_max_bounds(x: Vertex) -> Result<MaximizerBounds> {
    if x.is_origin() {
        return Err(Error::Precondition("maximiser bounds need x != 0".into()));
    }
    let r2 = x.x1 * x.x1 + x.x2 * x.x2;
    let q = |n: i64, d: i64| Rational64::new(n, d);
    Ok(MaximizerBounds {
        t_max: (q(r2, 4) - 2, q(r2, 4) + 1),
        t2_max: (q(r2, 6) - 1, q(r2, 6) + 2),
    })
}

/// Maximisers of `H(x,t)/t^power` over admissible `t ≥ ‖x‖∞` below `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaximizerScan {
    /// First and last admissible time attaining the maximum; they differ only on exact ties.
    pub first: i64,
    pub last: i64,
    /// The sequence never rises again once it has started to fall.
    pub unimodal: bool,
}

impl MaximizerScan {
    /// Whether some maximiser lies in `[lo, hi]`.
    pub fn meets(&self, (lo, hi): (Rational64, Rational64)) -> bool {
        let mut t = self.first;
        while t <= self.last {
            let r = Rational64::from_integer(t);
            if lo <= r && r <= hi {
                return true;
            }
            t += 2;
        }
        false
    }
}

/// Locates the maximum by comparing neighbouring values exactly through the
/// two-step ratio of `H`.
pub fn scan_maximizer(x: Vertex, power: u32, limit: i64) -> MaximizerScan {
    assert!(power == 1 || power == 2, "power must be 1 or 2");
    let start = x.norm_inf().max(1);
    let start = if (start - x.x1).rem_euclid(2) == 0 { start } else { start + 1 };
    let (mut first, mut last) = (start, start);
    let mut falling = false;
    let mut unimodal = true;
    let mut t = start;
    while t + 2 <= limit {
        // H(t+2)/H(t) = (t+1)²(t+2)² / D; compare ρ t^p against (t+2)^p
        let (tt, s) = (t as i128, (t + 2) as i128);
        let d = (s * s - (x.x1 as i128).pow(2)) * (s * s - (x.x2 as i128).pow(2));
        let lhs = if power == 1 { (tt + 1).pow(2) * s * tt } else { (tt + 1).pow(2) * tt * tt };
        match lhs.cmp(&d) {
            std::cmp::Ordering::Greater => {
                if falling {
                    unimodal = false;
                } else {
                    first = t + 2;
                    last = t + 2;
                }
            }
            std::cmp::Ordering::Equal => {
                if !falling && last == t {
                    last = t + 2;
                }
            }
            std::cmp::Ordering::Less => falling = true,
        }
        t += 2;
    }
    MaximizerScan { first, last, unimodal }
}

/// Direct evaluation of `H(x,t)/t^power`, for cross-checking [`scan_maximizer`].
pub fn scaled_kernel(x: Vertex, t: i64, power: u32) -> BigRational {
    h_prob(x, t) / BigRational::from_integer(BigInt::from(t).pow(power))
}

/// Certified upper bounds on the tail of the grid sum beyond a cutoff.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub cutoff: u64,
    #[serde(serialize_with = "ser_rational")]
    pub e1a: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub e1b: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub e1c: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub e1: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub e2: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub e: BigRational,
}

pub const MIN_TAIL_CUTOFF: u64 = 88;

/// Bounds `Σ_{‖x‖∞ > c} maxcon(x) ≤ 4 E1 + 2 E2` for cutoff `c ≥ 88`.
pub fn tail_bound(cutoff: u64) -> Result<TailReport> {
    if cutoff < MIN_TAIL_CUTOFF {
        return Err(Error::Precondition(format!("tail cutoff must be at least {MIN_TAIL_CUTOFF}, got {cutoff}")));
    }
    let c = cutoff;
    let cb = BigInt::from(c);
    let c2 = &cb * &cb;

    // 17/2 Σ_{x=1}^{c} [2 (c²+x²) arctan(x/c) - 2cx] / ((x²+c²) x²)
    let mut e1a = Enclosure::exact_int(0);
    for x in 1..=c {
        let xb = BigInt::from(x);
        let s = &c2 + &xb * &xb;
        let num = &arctan_scaled(x, c, &(&s * 2u32)) - &Enclosure::ratio(&(&cb * &xb * 2u32), &BigInt::one());
        let term = num.scale(&BigInt::from(17), &(&s * &xb * &xb * 2u32));
        e1a = &e1a + &term;
    }

    // 17 Σ_{x=0}^{c} 1/(x²+c²), exact
    let e1b = (0..=c)
        .map(|x| BigRational::new(BigInt::one(), BigInt::from(x) * x + &c2))
        .fold(BigRational::zero(), |a, b| a + b)
        * BigRational::from_integer(17.into());

    // 17/2 (ln 2 / c + π/(2c) - ln(1 + c²/(c+1)²) / c)
    let c1 = BigInt::from(c + 1);
    let inner = &(&interval::ln2() + &interval::pi().scale_i64(1, 2)) - &interval::ln1p_ratio(&c2, &(&c1 * &c1));
    let e1c = inner.scale(&BigInt::from(17), &(&cb * 2u32));

    let e1 = e1a.upper() + &e1b + e1c.upper();
    // 434/(3c²) + 1519/(3c²)
    let e2 = BigRational::new(BigInt::from(434 + 1519), &c2 * 3u32);
    let e = &e1 * BigRational::from_integer(4.into()) + &e2 * BigRational::from_integer(2.into());
    Ok(TailReport { cutoff: c, e1a: e1a.upper(), e1b, e1c: e1c.upper(), e1, e2, e })
}

fn arctan_scaled(p: u64, q: u64, factor: &BigInt) -> Enclosure {
    interval::arctan(p, q).scale(factor, &BigInt::one())
}

#[derive(Debug, Clone, Serialize)]
pub struct C2Interval {
    pub regime: Regime,
    pub radius: i64,
    #[serde(serialize_with = "ser_rational")]
    pub lower: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub upper: BigRational,
}

impl C2Interval {
    /// `[lower, upper]` rounded outward to three decimals.
    pub fn display(&self) -> String {
        format!("[{}, {}]", decimal_floor(&self.lower, 3), decimal_ceil(&self.upper, 3))
    }
}

/// `[grid sum, grid sum + tail bound]` at the tail's cutoff.
pub fn c2_interval(sum: &SumReport, tail: &TailReport) -> Result<C2Interval> {
    if sum.radius as u64 != tail.cutoff {
        return Err(Error::Precondition(format!(
            "grid sum radius {} differs from tail cutoff {}",
            sum.radius, tail.cutoff
        )));
    }
    Ok(C2Interval {
        regime: sum.regime,
        radius: sum.radius,
        lower: sum.partial_sum.clone(),
        upper: &sum.partial_sum + &tail.e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_round_outward() {
        assert_eq!(decimal_floor(&q(2, 3), 3), "0.666");
        assert_eq!(decimal_ceil(&q(2, 3), 3), "0.667");
        assert_eq!(decimal_floor(&q(-1, 3), 2), "-0.34");
        assert_eq!(decimal_ceil(&q(7, 1), 0), "7");
        assert_eq!(decimal_floor(&q(1, 200), 3), "0.005");
    }

    #[test]
    fn origin_only() {
        let r = grid_sum(0, SumTarget::Sequence(RotorSequence::CLOCKWISE), 1).unwrap();
        assert!(r.partial_sum.is_zero());
        assert_eq!(r.rings.len(), 1);
    }

    #[test]
    fn small_sums_are_thread_invariant_and_monotone() {
        for target in [SumTarget::for_regime(Regime::Circular), SumTarget::PerVertexBest] {
            let a = grid_sum(6, target, 1).unwrap();
            let b = grid_sum(6, target, 3).unwrap();
            assert_eq!(a.partial_sum, b.partial_sum);
            for w in a.rings.windows(2) {
                assert!(!w[1].subtotal.is_negative());
                assert!(w[1].cumulative >= w[0].cumulative);
            }
        }
    }

    #[test]
    fn sequences_in_a_class_sum_alike() {
        let all = RotorSequence::all();
        let sum = |s: RotorSequence| grid_sum(8, SumTarget::Sequence(s), 2).unwrap().partial_sum;
        assert_eq!(sum(all[0]), sum(all[1]));
        let nc = sum(all[2]);
        for s in &all[3..] {
            assert_eq!(sum(*s), nc);
        }
    }

    #[test]
    fn checkpoint_resume() {
        let dir = std::env::temp_dir().join(format!("rotorwalk-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ring.ckpt");
        let _ = std::fs::remove_file(&path);
        let target = SumTarget::for_regime(Regime::NonCircular);
        let partial = grid_sum_checkpointed(3, target, 2, &path).unwrap();
        let resumed = grid_sum_checkpointed(5, target, 2, &path).unwrap();
        let direct = grid_sum(5, target, 2).unwrap();
        assert_eq!(resumed.partial_sum, direct.partial_sum);
        assert_eq!(read_checkpoint(&path, Regime::NonCircular).unwrap().len(), 6);
        assert!(partial.partial_sum <= resumed.partial_sum);
        assert!(read_checkpoint(&path, Regime::Circular).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn float_path_matches() {
        let target = SumTarget::for_regime(Regime::Circular);
        let f = grid_sum_float(8, target, 2, 1).unwrap();
        let exact = grid_sum(8, target, 2).unwrap().partial_sum.to_f64().unwrap();
        assert!(f.checked > 0);
        assert!((f.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn maximizer_bounds_hold() {
        for x in Vertex::ball(18).filter(|x| x.norm_inf() >= 6) {
            let b = t_max_bounds(x).unwrap();
            let r2 = x.x1 * x.x1 + x.x2 * x.x2;
            let s1 = scan_maximizer(x, 1, r2 + 20);
            let s2 = scan_maximizer(x, 2, r2 + 20);
            assert!(s1.unimodal && s2.unimodal, "{x}");
            assert!(s1.meets(b.t_max), "{x}: {s1:?}");
            assert!(s2.meets(b.t2_max), "{x}: {s2:?}");
        }
        assert!(t_max_bounds(Vertex::ORIGIN).is_err());
    }

    #[test]
    fn diagonal_ties() {
        // H/t² takes its maximum twice on the diagonal
        let s = scan_maximizer(Vertex { x1: -17, x2: -17 }, 2, 700);
        assert_eq!((s.first, s.last), (95, 97));
        let x = Vertex { x1: -17, x2: -17 };
        assert_eq!(scaled_kernel(x, 95, 2), scaled_kernel(x, 97, 2));
    }

    #[test]
    fn maximizer_scan_matches_direct_values() {
        for x in [Vertex { x1: 6, x2: 2 }, Vertex { x1: 9, x2: -7 }, Vertex { x1: 0, x2: 10 }, Vertex { x1: 11, x2: 11 }] {
            for power in [1, 2] {
                let scan = scan_maximizer(x, power, 200);
                let best = (x.norm_inf()..200)
                    .filter(|&s| (s - x.x1).rem_euclid(2) == 0)
                    .max_by(|&a, &b| scaled_kernel(x, a, power).cmp(&scaled_kernel(x, b, power)).then(b.cmp(&a)))
                    .unwrap();
                assert_eq!(scan.first, best, "{x} power {power}");
            }
        }
    }

    #[test]
    fn tail_at_reference_cutoff() {
        let r = tail_bound(800).unwrap();
        assert!(r.e2 <= q(11, 10000));
        assert!(r.e1 <= q(38, 1000));
        assert!(r.e <= q(16, 100));
        let e1a = r.e1a.to_f64().unwrap();
        let e1c = r.e1c.to_f64().unwrap();
        // reference values from an independent 40-digit evaluation
        assert!((e1a - 0.004564077431655087).abs() < 1e-15);
        assert!((r.e1b.to_f64().unwrap() - 0.016709631463732235).abs() < 1e-15);
        assert!((e1c - 0.016702975637910373).abs() < 1e-15);
        assert_eq!(r.e, &r.e1 * BigRational::from_integer(4.into()) + &r.e2 * BigRational::from_integer(2.into()));
        assert!(tail_bound(87).is_err());
        assert!(tail_bound(88).is_ok());
    }

    fn integral_helpers_hold(n: u64) -> Vec<String> {
        let mut bad = Vec::new();
        let pi = std::f64::consts::PI;
        let mut check = |ok: bool, what: String| {
            if !ok {
                bad.push(what);
            }
        };
        for y0 in [1u64, 2, 5, 20] {
            for k in [1.5f64, 2.0, 3.0] {
                let l: f64 = (y0 + 1..n).map(|x| (x as f64).powf(-k)).sum();
                check(l <= 1.0 / ((k - 1.0) * (y0 as f64).powf(k - 1.0)), format!("power sum {y0} {k}"));
            }
        }
        for x1 in [1u64, 2, 5, 50, 800] {
            let x1f = x1 as f64;
            let l: f64 = (0..n).map(|x2| 1.0 / (x1f * x1f + (x2 * x2) as f64).powi(2)).sum();
            check(l <= 7.0 / (3.0 * x1f.powi(3)), format!("row sum {x1}"));
        }
        for a in [1u64, 5, 30, 800] {
            for b in [1u64, 3, 50, 801] {
                let (af, bf) = (a as f64, b as f64);
                let partial: f64 = (b..n).map(|y| 1.0 / ((af * af + (y * y) as f64) * y as f64)).sum();
                // dropped terms are at least the integral from n
                let tail = (1.0 + af * af / (n * n) as f64).ln() / (2.0 * af * af);
                check(partial + tail >= ((af * af + bf * bf).ln() - 2.0 * bf.ln()) / (2.0 * af * af), format!("log lower {a} {b}"));
            }
        }
        // the parity sums are used with the lower limit at the cutoff and γ up to it
        for a in [88u64, 200, 800] {
            for g in [0u64, 1, 50, a] {
                for c in [0, 1] {
                    let (af, gf) = (a as f64, g as f64);
                    let ys = (a + 1..n).filter(|y| y % 2 == c).map(|y| y as f64);
                    let l1: f64 = ys.clone().map(|y| y / (y * y + gf * gf).powi(2)).sum();
                    check(l1 <= 1.0 / (4.0 * (af * af + gf * gf)), format!("odd moment {a} {g} {c}"));
                    let l2: f64 = ys.map(|y| 1.0 / (y * y + gf * gf).powi(2)).sum();
                    let r2 = ((pi - 2.0 * (af / gf).atan()) * (af * af + gf * gf) - 2.0 * af * gf)
                        / (8.0 * (af * af + gf * gf) * gf.powi(3));
                    check(g == 0 || l2 <= r2, format!("arctan sum {a} {g} {c}"));
                }
            }
        }
        for a in [1u64, 5, 800] {
            for b in [1u64, 10, 800] {
                let (af, bf) = (a as f64, b as f64);
                let l: f64 = (b + 1..n).map(|y| (pi - 2.0 * (af / y as f64).atan()) / (y * y) as f64).sum();
                let r = ((af * af + bf * bf).ln() - 2.0 * bf.ln()) / af + (pi - 2.0 * (af / bf).atan()) / bf;
                check(l <= r, format!("arctan over squares {a} {b}"));
            }
        }
        bad
    }

    #[test]
    fn integral_estimates() {
        assert_eq!(integral_helpers_hold(10_000), Vec::<String>::new());
    }
}
