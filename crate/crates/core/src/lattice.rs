//! Diagonal representation of the square grid.
//!
//! Vertices are pairs `(x1, x2)` with `x1 ≡ x2 (mod 2)`; the four neighbours of a
//! vertex are reached by the diagonal steps NE, SE, SW and NW. A rotor sequence is
//! a cyclic order on these four directions, always written starting at NE.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex of the diagonal grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x1: i64,
    pub x2: i64,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x1: 0, x2: 0 };

    /// Builds a vertex, rejecting coordinates of mixed parity.
    pub fn new(x1: i64, x2: i64) -> Result<Self> {
        if (x1 - x2).rem_euclid(2) != 0 {
            return Err(Error::Parity { x1, x2 });
        }
        Ok(Vertex { x1, x2 })
    }

    /// Infinity norm `max(|x1|, |x2|)`: the earliest time a chip from here can reach the origin.
    pub fn norm_inf(self) -> i64 {
        self.x1.abs().max(self.x2.abs())
    }

    pub fn norm_l1(self) -> i64 {
        self.x1.abs() + self.x2.abs()
    }

    pub fn is_origin(self) -> bool {
        self.x1 == 0 && self.x2 == 0
    }

    /// Even vertices are those with `x1 ≡ x2 ≡ 0 (mod 2)`.
    pub fn is_even(self) -> bool {
        self.x1.rem_euclid(2) == 0
    }

    pub fn step(self, d: Direction) -> Vertex {
        let (a1, a2) = d.components();
        Vertex {
            x1: self.x1 + a1,
            x2: self.x2 + a2,
        }
    }

    /// Maps to standard grid coordinates `((x1+x2)/2, (x1-x2)/2)`.
    pub fn to_standard(self) -> (i64, i64) {
        ((self.x1 + self.x2) / 2, (self.x1 - self.x2) / 2)
    }

    /// Inverse of [`Vertex::to_standard`].
    pub fn from_standard(u: i64, v: i64) -> Vertex {
        Vertex { x1: u + v, x2: u - v }
    }

    /// All vertices with `‖x‖∞ ≤ radius`, row by row.
    pub fn ball(radius: i64) -> impl Iterator<Item = Vertex> {
        (-radius..=radius).flat_map(move |x1| {
            (-radius..=radius)
                .filter(move |x2| (x1 - x2).rem_euclid(2) == 0)
                .map(move |x2| Vertex { x1, x2 })
        })
    }

    /// Vertices with `‖x‖∞ == radius` exactly.
    pub fn ring(radius: i64) -> impl Iterator<Item = Vertex> {
        Vertex::ball(radius).filter(move |v| v.norm_inf() == radius)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x1, self.x2)
    }
}

/// `x ∼ t`: both coordinates have the parity of `t`.
pub fn parity_match(x: Vertex, t: i64) -> bool {
    x.x1.rem_euclid(2) == t.rem_euclid(2) && x.x2.rem_euclid(2) == t.rem_euclid(2)
}

/// One of the four diagonal directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    NE,
    SE,
    SW,
    NW,
}

impl Direction {
    /// In clockwise order starting at NE.
    pub const ALL: [Direction; 4] = [Direction::NE, Direction::SE, Direction::SW, Direction::NW];

    /// `(a1, a2)` with each component in `{-1, +1}`.
    pub fn components(self) -> (i64, i64) {
        match self {
            Direction::NE => (1, 1),
            Direction::SE => (1, -1),
            Direction::SW => (-1, -1),
            Direction::NW => (-1, 1),
        }
    }

    pub fn from_components(a1: i64, a2: i64) -> Option<Direction> {
        match (a1, a2) {
            (1, 1) => Some(Direction::NE),
            (1, -1) => Some(Direction::SE),
            (-1, -1) => Some(Direction::SW),
            (-1, 1) => Some(Direction::NW),
            _ => None,
        }
    }

    /// Mirror image under `x1 -> -x1`.
    pub fn flip_x1(self) -> Direction {
        let (a1, a2) = self.components();
        Direction::from_components(-a1, a2).unwrap()
    }

    /// Mirror image under `x2 -> -x2`.
    pub fn flip_x2(self) -> Direction {
        let (a1, a2) = self.components();
        Direction::from_components(a1, -a2).unwrap()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::NE => "NE",
            Direction::SE => "SE",
            Direction::SW => "SW",
            Direction::NW => "NW",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NE" => Ok(Direction::NE),
            "SE" => Ok(Direction::SE),
            "SW" => Ok(Direction::SW),
            "NW" => Ok(Direction::NW),
            other => Err(Error::Parse(format!("unknown direction {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceClass {
    Circular,
    XAlternating,
    YAlternating,
}

/// A cyclic order on the four directions, normalised to start at NE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RotorSequence {
    order: [Direction; 4],
    class: SequenceClass,
}

impl RotorSequence {
    pub const CLOCKWISE: RotorSequence = RotorSequence {
        order: [Direction::NE, Direction::SE, Direction::SW, Direction::NW],
        class: SequenceClass::Circular,
    };
    pub const COUNTERCLOCKWISE: RotorSequence = RotorSequence {
        order: [Direction::NE, Direction::NW, Direction::SW, Direction::SE],
        class: SequenceClass::Circular,
    };

    /// Classifies a 4-tuple; any rotation of a cyclic order is accepted.
    pub fn classify(order: [Direction; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for d in order {
            if std::mem::replace(&mut seen[d.index()], true) {
                return Err(Error::NotPermutation(format!("{order:?}")));
            }
        }
        let start = order.iter().position(|&d| d == Direction::NE).unwrap();
        let mut norm = [Direction::NE; 4];
        for (i, slot) in norm.iter_mut().enumerate() {
            *slot = order[(start + i) % 4];
        }
        // Opposite of NE sits two steps away for circular orders, one or three otherwise.
        let class = match (norm[1], norm[2]) {
            (_, Direction::SW) => SequenceClass::Circular,
            (_, Direction::SE) => SequenceClass::XAlternating,
            (_, Direction::NW) => SequenceClass::YAlternating,
            _ => unreachable!(),
        };
        Ok(RotorSequence { order: norm, class })
    }

    /// The six cyclic orders, circular ones first.
    pub fn all() -> [RotorSequence; 6] {
        use Direction::*;
        [
            [NE, SE, SW, NW],
            [NE, NW, SW, SE],
            [NE, NW, SE, SW],
            [NE, SW, SE, NW],
            [NE, SE, NW, SW],
            [NE, SW, NW, SE],
        ]
        .map(|o| RotorSequence::classify(o).unwrap())
    }

    pub fn order(&self) -> [Direction; 4] {
        self.order
    }

    pub fn class(&self) -> SequenceClass {
        self.class
    }

    pub fn is_circular(&self) -> bool {
        self.class == SequenceClass::Circular
    }

    /// Position of `d` within the order.
    pub fn position(&self, d: Direction) -> usize {
        self.order.iter().position(|&o| o == d).unwrap()
    }

    pub fn at(&self, i: usize) -> Direction {
        self.order[i % 4]
    }

    /// `NEXT^k(a)`.
    pub fn next_direction(&self, a: Direction, k: u64) -> Direction {
        self.order[(self.position(a) + (k % 4) as usize) % 4]
    }

    pub fn next(&self, a: Direction) -> Direction {
        self.next_direction(a, 1)
    }

    /// The sequence with every direction mirrored in `x1`.
    pub fn mirror_x1(&self) -> RotorSequence {
        RotorSequence::classify(self.order.map(Direction::flip_x1)).unwrap()
    }

    pub fn mirror_x2(&self) -> RotorSequence {
        RotorSequence::classify(self.order.map(Direction::flip_x2)).unwrap()
    }

    /// The same cycle traversed backwards.
    pub fn reversed(&self) -> RotorSequence {
        let o = self.order;
        RotorSequence::classify([o[0], o[3], o[2], o[1]]).unwrap()
    }
}

impl fmt::Display for RotorSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.order;
        write!(f, "{},{},{},{}", o[0], o[1], o[2], o[3])
    }
}

impl FromStr for RotorSequence {
    type Err = Error;

    /// Parses `"NE,SE,SW,NW"` and the shorthands `cw`, `ccw`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cw" | "clockwise" => return Ok(RotorSequence::CLOCKWISE),
            "ccw" | "counterclockwise" => return Ok(RotorSequence::COUNTERCLOCKWISE),
            _ => {}
        }
        let dirs = s
            .split(',')
            .map(str::parse::<Direction>)
            .collect::<Result<Vec<_>>>()?;
        let order: [Direction; 4] = dirs
            .try_into()
            .map_err(|v: Vec<Direction>| Error::Parse(format!("expected 4 directions, got {}", v.len())))?;
        RotorSequence::classify(order)
    }
}
