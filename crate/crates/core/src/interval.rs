//! Fixed-point enclosures with outward rounding.
//!
//! A value is held as `[lo, hi] · 2^-PREC` with integer endpoints. Every operation
//! rounds `lo` down and `hi` up, so the true value stays enclosed.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const PREC: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
}

fn unit() -> BigInt {
    BigInt::one() << PREC
}

fn div_floor(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

fn div_ceil(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

impl Enclosure {
    pub fn exact_int(v: i64) -> Self {
        let s = BigInt::from(v) << PREC;
        Enclosure { lo: s.clone(), hi: s }
    }

    /// Encloses `num / den`, `den > 0`.
    pub fn ratio(num: &BigInt, den: &BigInt) -> Self {
        assert!(den.is_positive());
        let n = num << PREC;
        Enclosure { lo: div_floor(&n, den), hi: div_ceil(&n, den) }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Enclosure::ratio(r.numer(), r.denom())
    }

    /// Multiplies by `num / den`, `den > 0`.
    pub fn scale(&self, num: &BigInt, den: &BigInt) -> Self {
        assert!(den.is_positive());
        let (a, b) = (&self.lo * num, &self.hi * num);
        let (a, b) = if num.is_negative() { (b, a) } else { (a, b) };
        Enclosure { lo: div_floor(&a, den), hi: div_ceil(&b, den) }
    }

    pub fn scale_i64(&self, num: i64, den: i64) -> Self {
        self.scale(&BigInt::from(num), &BigInt::from(den))
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(self.hi.clone(), unit())
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(self.lo.clone(), unit())
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, unit())
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / 2u32).to_f64().unwrap_or(f64::NAN) / 2f64.powi(PREC as i32)
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lower() <= r && r <= &self.upper()
    }
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

/// `arctan(p/q)` for `0 ≤ p ≤ q`, by Euler's series
/// `Σ 2^{2n} n!² / (2n+1)! · z^{2n+1} / (1+z²)^{n+1}`.
pub fn arctan(p: u64, q: u64) -> Enclosure {
    assert!(q > 0 && p <= q, "arctan argument must lie in [0, 1]");
    if p == 0 {
        return Enclosure::exact_int(0);
    }
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    let s = &p * &p + &q * &q;
    // first term z/(1+z²) = pq/(p²+q²); ratio of terms r (2n+2)/(2n+3), r = p²/(p²+q²) ≤ 1/2
    let first = Enclosure::ratio(&(&p * &q), &s);
    let (mut t_lo, mut t_hi) = (first.lo, first.hi);
    let (mut sum_lo, mut sum_hi) = (BigInt::zero(), BigInt::zero());
    let p2 = &p * &p;
    let mut n: u64 = 0;
    while t_hi > BigInt::one() {
        sum_lo += &t_lo;
        sum_hi += &t_hi;
        let num = &p2 * BigInt::from(2 * n + 2);
        let den = &s * BigInt::from(2 * n + 3);
        t_lo = div_floor(&(&t_lo * &num), &den);
        t_hi = div_ceil(&(&t_hi * &num), &den);
        n += 1;
    }
    // remaining terms sum to at most t_N / (1 - r) = t_N (p²+q²)/q²
    sum_hi += div_ceil(&(&t_hi * &s), &(&q * &q));
    Enclosure { lo: sum_lo, hi: sum_hi }
}

/// `atanh(p/q)` for `0 ≤ p < q`.
pub fn atanh(p: u64, q: u64) -> Enclosure {
    atanh_big(&BigInt::from(p), &BigInt::from(q))
}

fn atanh_big(p: &BigInt, q: &BigInt) -> Enclosure {
    assert!(!p.is_negative() && p < q);
    if p.is_zero() {
        return Enclosure::exact_int(0);
    }
    let first = Enclosure::ratio(p, q);
    let (mut w_lo, mut w_hi) = (first.lo, first.hi);
    let (p2, q2) = (p * p, q * q);
    let (mut sum_lo, mut sum_hi) = (BigInt::zero(), BigInt::zero());
    let mut k: u64 = 0;
    loop {
        let d = BigInt::from(2 * k + 1);
        let term_hi = div_ceil(&w_hi, &d);
        if term_hi <= BigInt::one() {
            // Σ_{j≥k} w^{2j+1}/(2j+1) ≤ w^{2k+1}/(2k+1) · q²/(q²-p²)
            sum_hi += div_ceil(&(&term_hi * &q2), &(&q2 - &p2));
            break;
        }
        sum_lo += div_floor(&w_lo, &d);
        sum_hi += term_hi;
        w_lo = div_floor(&(&w_lo * &p2), &q2);
        w_hi = div_ceil(&(&w_hi * &p2), &q2);
        k += 1;
    }
    Enclosure { lo: sum_lo, hi: sum_hi }
}

/// `ln(1 + num/den)` for `num, den > 0`, as `2 atanh(num / (2 den + num))`.
pub fn ln1p_ratio(num: &BigInt, den: &BigInt) -> Enclosure {
    let e = atanh_big(num, &(den * 2u32 + num));
    Enclosure { lo: e.lo * 2, hi: e.hi * 2 }
}

pub fn ln2() -> Enclosure {
    ln1p_ratio(&BigInt::one(), &BigInt::one())
}

pub fn pi() -> Enclosure {
    let a = arctan(1, 1);
    Enclosure { lo: a.lo * 4, hi: a.hi * 4 }
}
