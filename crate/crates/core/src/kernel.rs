//! Random-walk kernel `H(x,t)` and the influence of single Propp moves.
//!
//! All values are exact rationals. `H(x,t)` is the probability that a simple random
//! walk started at `x` sits at the origin after `t` steps; the influence
//! `INF(x,A,t) = H(x+A,t-1) - H(x,t)` is the change a single rotor move from `x` in
//! direction `A` makes to the expected count at the origin `t` steps later.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{parity_match, Direction, RotorSequence, Vertex};

/// Binomial coefficient by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `H(x,t) = 4^{-t} C(t,(t+x1)/2) C(t,(t+x2)/2)` when `x ∼ t` and `‖x‖∞ ≤ t`, else 0.
/// Negative times give 0.
pub fn h_prob(x: Vertex, t: i64) -> BigRational {
    if t < 0 || !parity_match(x, t) || x.norm_inf() > t {
        return BigRational::zero();
    }
    let t = t as u64;
    let k1 = ((t as i64 + x.x1) / 2) as u64;
    let k2 = ((t as i64 + x.x2) / 2) as u64;
    let num = binomial(t, k1) * binomial(t, k2);
    let den = BigUint::one() << (2 * t);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `INF(x,A,t) = H(x+A,t-1) - H(x,t)`.
pub fn inf_single(x: Vertex, a: Direction, t: i64) -> BigRational {
    h_prob(x.step(a), t - 1) - h_prob(x, t)
}

/// Sum of single influences over `dirs`, which must be consecutive in `seq`.
pub fn inf_seq(x: Vertex, dirs: &[Direction], seq: &RotorSequence, t: i64) -> Result<BigRational> {
    for w in dirs.windows(2) {
        if seq.next(w[0]) != w[1] {
            return Err(Error::SequenceOrder(format!(
                "{} is not followed by {} in {seq}",
                w[0], w[1]
            )));
        }
    }
    Ok(dirs
        .iter()
        .fold(BigRational::zero(), |acc, &a| acc + inf_single(x, a, t)))
}

/// The integer pair `(P, S) = (A1 x1 · A2 x2, A1 x1 + A2 x2)` summed over `dirs`.
///
/// `INF(x,dirs,t) = (P/t² - S/t) · H(x,t)` for every `t ≥ 1`.
pub fn influence_factors(x: Vertex, dirs: &[Direction]) -> (i64, i64) {
    dirs.iter().fold((0, 0), |(p, s), &d| {
        let (a1, a2) = d.components();
        (p + a1 * x.x1 * a2 * x.x2, s + a1 * x.x1 + a2 * x.x2)
    })
}

/// Closed form `((A1x1·A2x2)/t² - (A1x1+A2x2)/t) · H(x,t)`.
///
/// Panics for `t < 1`.
pub fn inf_closed_form(x: Vertex, a: Direction, t: i64) -> BigRational {
    assert!(t >= 1, "closed form needs t >= 1");
    let (p, s) = influence_factors(x, &[a]);
    let factor = BigRational::new(BigInt::from(p - s * t), BigInt::from(t * t));
    factor * h_prob(x, t)
}

/// Double-precision kernel. Only used behind an explicit float flag; callers are
/// expected to cross-check a sample against the exact routines.
pub mod fast {
    use super::*;

    const LN_TABLE: usize = 256;

    fn ln_factorial(n: u64) -> f64 {
        if (n as usize) < LN_TABLE {
            (2..=n).map(|i| (i as f64).ln()).sum()
        } else {
            // Stirling series; relative error far below f64 epsilon for n >= 256
            let x = n as f64 + 1.0;
            (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
                - 1.0 / (360.0 * x.powi(3))
                + 1.0 / (1260.0 * x.powi(5))
        }
    }

    fn ln_binomial(n: u64, k: u64) -> f64 {
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
    }

    pub fn h_prob(x: Vertex, t: i64) -> f64 {
        if t < 0 || !parity_match(x, t) || x.norm_inf() > t {
            return 0.0;
        }
        let tu = t as u64;
        let k1 = ((t + x.x1) / 2) as u64;
        let k2 = ((t + x.x2) / 2) as u64;
        (ln_binomial(tu, k1) + ln_binomial(tu, k2) - 2.0 * t as f64 * std::f64::consts::LN_2).exp()
    }

    pub fn inf_single(x: Vertex, a: Direction, t: i64) -> f64 {
        if t < 1 {
            return h_prob(x.step(a), t - 1) - h_prob(x, t);
        }
        let (p, s) = influence_factors(x, &[a]);
        let t = t as f64;
        (p as f64 / (t * t) - s as f64 / t) * h_prob(x, t as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use Direction::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Counts walks of length `t` from `x` that end at the origin.
    fn count_paths(x: Vertex, t: i64) -> u64 {
        if t == 0 {
            return x.is_origin() as u64;
        }
        Direction::ALL.iter().map(|&d| count_paths(x.step(d), t - 1)).sum()
    }

    #[test]
    fn h_small_values() {
        assert_eq!(h_prob(Vertex::ORIGIN, 0), BigRational::one());
        assert_eq!(h_prob(Vertex { x1: 1, x2: 1 }, 1), q(1, 4));
        assert_eq!(h_prob(Vertex::ORIGIN, 2), q(1, 4));
        assert!(h_prob(Vertex::ORIGIN, -1).is_zero());
        assert!(h_prob(Vertex { x1: 4, x2: 0 }, 2).is_zero());
    }

    #[test]
    fn h_matches_path_enumeration() {
        for t in 0..=6 {
            for x in Vertex::ball(t) {
                let expected = q(count_paths(x, t) as i64, 4i64.pow(t as u32));
                assert_eq!(h_prob(x, t), expected, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn origin_influence_vanishes() {
        for t in 1..=50 {
            for a in Direction::ALL {
                assert!(inf_single(Vertex::ORIGIN, a, t).is_zero());
                assert!(inf_closed_form(Vertex::ORIGIN, a, t).is_zero());
            }
        }
    }

    #[test]
    fn influence_before_arrival_is_zero() {
        let x = Vertex { x1: 5, x2: 9 };
        for t in 0..9 {
            for a in Direction::ALL {
                assert!(inf_single(x, a, t).is_zero());
            }
        }
    }

    #[test]
    fn worked_example_influences() {
        let x = Vertex { x1: 5, x2: 9 };
        let v = inf_single(x, SW, 25).to_f64().unwrap();
        assert!((v - 0.001985).abs() < 5e-7, "{v}");
        let pair = inf_seq(x, &[SE, SW], &RotorSequence::CLOCKWISE, 27).unwrap();
        assert!((pair.to_f64().unwrap() - 0.002261).abs() < 5e-7);
        assert_eq!(inf_closed_form(x, SW, 25), inf_single(x, SW, 25));
    }

    #[test]
    fn inf_seq_rules() {
        let x = Vertex { x1: 3, x2: 1 };
        let cw = RotorSequence::CLOCKWISE;
        assert!(inf_seq(x, &[], &cw, 7).unwrap().is_zero());
        assert!(inf_seq(x, &[NE, SE, SW, NW], &cw, 7).unwrap().is_zero());
        assert!(inf_seq(x, &[NE, SW], &cw, 7).is_err());
        // length-3 prefix is the negated complement; long lists reduce mod 4
        for t in 1..30 {
            let three = inf_seq(x, &[SE, SW, NW], &cw, t).unwrap();
            assert_eq!(three, -inf_single(x, NE, t));
            let six = inf_seq(x, &[SE, SW, NW, NE, SE, SW], &cw, t).unwrap();
            assert_eq!(six, inf_seq(x, &[SE, SW], &cw, t).unwrap());
        }
    }

    #[test]
    fn normalisation() {
        for t in 0..=30 {
            let total = Vertex::ball(t).fold(BigRational::zero(), |acc, x| acc + h_prob(x, t));
            assert_eq!(total, BigRational::one(), "t={t}");
        }
    }

    #[test]
    fn float_path_tracks_exact() {
        for x in Vertex::ball(6) {
            for t in [7i64, 8, 20, 21, 300, 301] {
                let exact = h_prob(x, t).to_f64().unwrap();
                let fast = fast::h_prob(x, t);
                assert!((exact - fast).abs() <= 1e-11 * exact.abs().max(1e-300), "{x} {t}");
                let ie = inf_single(x, NW, t).to_f64().unwrap();
                let iff = fast::inf_single(x, NW, t);
                assert!((ie - iff).abs() <= 1e-10 * ie.abs() + 1e-300);
            }
        }
    }

    fn vertex_and_time() -> impl Strategy<Value = (Vertex, i64)> {
        (-12i64..=12, -6i64..=6, 0i64..40).prop_map(|(x1, h, t)| {
            let x2 = (x1 + 2 * h).clamp(-12, 12);
            let x2 = if (x1 - x2).rem_euclid(2) != 0 { x2 - 1 } else { x2 };
            (Vertex { x1, x2 }, t)
        })
    }

    proptest! {
        #[test]
        fn symmetries((x, t) in vertex_and_time()) {
            let h = h_prob(x, t);
            prop_assert_eq!(&h, &h_prob(Vertex { x1: -x.x1, x2: x.x2 }, t));
            prop_assert_eq!(&h, &h_prob(Vertex { x1: x.x2, x2: x.x1 }, t));
        }

        #[test]
        fn recurrence((x, t) in vertex_and_time()) {
            prop_assume!(t >= 1);
            let avg = Direction::ALL
                .iter()
                .fold(BigRational::zero(), |acc, &a| acc + h_prob(x.step(a), t - 1))
                / BigRational::from_integer(4.into());
            prop_assert_eq!(h_prob(x, t), avg);
        }

        #[test]
        fn influences_sum_to_zero((x, t) in vertex_and_time()) {
            prop_assume!(t >= 1);
            let total = Direction::ALL
                .iter()
                .fold(BigRational::zero(), |acc, &a| acc + inf_single(x, a, t));
            prop_assert!(total.is_zero());
        }

        #[test]
        fn closed_form_agrees((x, t) in vertex_and_time(), a in 0usize..4) {
            prop_assume!(t >= 1);
            let a = Direction::ALL[a];
            prop_assert_eq!(inf_closed_form(x, a, t), inf_single(x, a, t));
        }
    }
}
