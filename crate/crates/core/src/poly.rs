//! Integer polynomials of degree at most four.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `c[0] + c[1] t + ... + c[4] t^4` with arbitrary-precision integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarticPoly {
    coeffs: [BigInt; 5],
}

/// A maximal run `start..=end` of integers on which the polynomial has constant sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignRun {
    pub start: i64,
    pub end: i64,
    pub sign: i8,
}

fn sign_of(v: &BigInt) -> i8 {
    match v.cmp(&BigInt::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

impl QuarticPoly {
    /// Coefficients ordered from the constant term upwards.
    pub fn new(low_to_high: [BigInt; 5]) -> Self {
        QuarticPoly { coeffs: low_to_high }
    }

    pub fn from_i64(low_to_high: [i64; 5]) -> Self {
        QuarticPoly::new(low_to_high.map(BigInt::from))
    }

    pub fn zero() -> Self {
        QuarticPoly::from_i64([0; 5])
    }

    pub fn coeff(&self, power: usize) -> &BigInt {
        &self.coeffs[power]
    }

    /// `[c4, c3, c2, c1, c0]`.
    pub fn high_to_low(&self) -> [BigInt; 5] {
        let c = &self.coeffs;
        [c[4].clone(), c[3].clone(), c[2].clone(), c[1].clone(), c[0].clone()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> Option<usize> {
        (0..5).rev().find(|&i| !self.coeffs[i].is_zero())
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    pub fn sign_at(&self, t: i64) -> i8 {
        sign_of(&self.eval(&BigInt::from(t)))
    }

    /// Number of sign changes between consecutive nonzero coefficients.
    pub fn descartes_variations(&self) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let signs: Vec<i8> = self
            .coeffs
            .iter()
            .rev()
            .map(sign_of)
            .filter(|&s| s != 0)
            .collect();
        Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
    }

    /// Cauchy's bound `1 + max |c_i| / |c_lead|` rounded up.
    pub fn cauchy_bound(&self) -> BigInt {
        let Some(d) = self.degree() else {
            return BigInt::zero();
        };
        let lead = self.coeffs[d].abs();
        let max = (0..d)
            .map(|i| self.coeffs[i].abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        BigInt::one() + (max + &lead - 1u32) / lead
    }

    /// Fujiwara's bound `2 max |c_{d-i}/c_d|^{1/i}`, each root taken upwards in integers.
    /// Every real root lies in `[-B, B]`.
    pub fn root_bound(&self) -> BigInt {
        let Some(d) = self.degree() else {
            return BigInt::zero();
        };
        let lead = self.coeffs[d].abs();
        let mut best = BigInt::zero();
        for i in 1..=d {
            let c = self.coeffs[d - i].abs();
            if c.is_zero() {
                continue;
            }
            // smallest m with m^i * lead >= c
            let mut m = (&c / &lead).nth_root(i as u32);
            while num_traits::pow(m.clone(), i) * &lead < c {
                m += 1;
            }
            best = best.max(m);
        }
        best * 2
    }

    /// `q(k) = p(offset + step * k)`.
    pub fn compose_affine(&self, offset: i64, step: i64) -> QuarticPoly {
        // Horner on polynomials: q = ((c4 u + c3) u + c2) u ... with u = offset + step k
        let u = [BigInt::from(offset), BigInt::from(step)];
        let mut acc: Vec<BigInt> = vec![BigInt::zero(); 5];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![BigInt::zero(); 5];
            for (i, a) in acc.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                next[i] += a * &u[0];
                if i + 1 < 5 {
                    next[i + 1] += a * &u[1];
                }
            }
            next[0] += c;
            acc = next;
        }
        QuarticPoly::new(acc.try_into().unwrap())
    }

    /// `q(k+1) - q(k)`, one degree lower.
    pub fn forward_difference(&self) -> QuarticPoly {
        let shifted = self.compose_affine(1, 1);
        let c: Vec<BigInt> = (0..5)
            .map(|i| &shifted.coeffs[i] - &self.coeffs[i])
            .collect();
        QuarticPoly::new(c.try_into().unwrap())
    }

    /// Maximal constant-sign runs of `k -> sign(q(k))` over the integers `lo..=hi`,
    /// found exactly by splitting the range into monotone pieces via forward
    /// differences and bisecting each piece.
    pub fn sign_runs(&self, lo: i64, hi: i64) -> Vec<SignRun> {
        let mut out: Vec<SignRun> = Vec::new();
        if lo > hi {
            return out;
        }
        match self.degree() {
            None => {
                push_run(&mut out, SignRun { start: lo, end: hi, sign: 0 });
                return out;
            }
            Some(0) => {
                push_run(&mut out, SignRun { start: lo, end: hi, sign: sign_of(&self.coeffs[0]) });
                return out;
            }
            _ => {}
        }
        if lo == hi {
            push_run(&mut out, SignRun { start: lo, end: hi, sign: self.sign_at(lo) });
            return out;
        }
        let diff = self.forward_difference();
        for piece in diff.sign_runs(lo, hi - 1) {
            // q is monotone on piece.start..=piece.end+1
            let (a, b) = (piece.start, piece.end + 1);
            if piece.sign == 0 {
                push_run(&mut out, SignRun { start: a, end: b, sign: self.sign_at(a) });
                continue;
            }
            let inc = piece.sign > 0;
            // in the orientation where q increases, find first k with q >= 0 and first with q > 0
            let key = |k: i64| {
                let s = self.sign_at(k);
                if inc { s } else { -s }
            };
            let first_at_least = |thr: i8| -> i64 {
                let (mut l, mut r) = (a, b + 1);
                while l < r {
                    let m = l + (r - l) / 2;
                    if key(m) >= thr {
                        r = m;
                    } else {
                        l = m + 1;
                    }
                }
                l
            };
            let z = first_at_least(0);
            let p = first_at_least(1);
            let (low_sign, high_sign) = if inc { (-1, 1) } else { (1, -1) };
            for run in [
                SignRun { start: a, end: z - 1, sign: low_sign },
                SignRun { start: z, end: p - 1, sign: 0 },
                SignRun { start: p, end: b, sign: high_sign },
            ] {
                if run.start <= run.end {
                    push_run(&mut out, run);
                }
            }
        }
        out
    }
}

/// Appends `run`, trimming overlap with what is already covered and merging equal signs.
fn push_run(out: &mut Vec<SignRun>, mut run: SignRun) {
    if let Some(last) = out.last_mut() {
        if run.end <= last.end {
            return;
        }
        run.start = run.start.max(last.end + 1);
        if last.sign == run.sign {
            last.end = run.end;
            return;
        }
    }
    out.push(run);
}

impl std::ops::Add for &QuarticPoly {
    type Output = QuarticPoly;

    fn add(self, rhs: &QuarticPoly) -> QuarticPoly {
        let c: Vec<BigInt> = (0..5).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect();
        QuarticPoly::new(c.try_into().unwrap())
    }
}

impl fmt::Display for QuarticPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in (0..5).rev() {
            let c = &self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{} t", c.abs())?,
                _ => write!(f, "{} t^{i}", c.abs())?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
