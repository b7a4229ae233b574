//! Exact machinery for a single β-transformation: digits, cylinders,
//! fullness, and the counting bounds for admissible and full words.

mod counting;
mod cylinder;
mod expansion;

use std::fmt;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Module, Result};

pub use counting::{
    count_admissible, count_admissible_with, count_full, count_full_in_interval,
    count_full_in_interval_with, count_full_with, find_full_in_interval,
    find_full_in_interval_with, full_count_constant, lemma_length_window, FullSearchParams,
};
pub use cylinder::{
    cylinder_of, enumerate_cylinders, CylinderFilter, Cylinders, EnumOptions, DEFAULT_NODE_CAP,
};
pub use expansion::{digits, digits_with, transform};

/// A real base β > 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParam {
    value: f64,
    extended: TwoFloat,
}

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 1.0 {
            return Err(Error::domain(
                Module::BetaDynamics,
                format!("beta must be a finite real > 1, got {beta}"),
            ));
        }
        Ok(BetaParam {
            value: beta,
            extended: TwoFloat::from(beta),
        })
    }

    /// The golden ratio, carried to double-double accuracy in extended mode.
    pub fn golden_ratio() -> Self {
        let five = TwoFloat::from(5.0);
        let extended = (TwoFloat::from(1.0) + five.sqrt()) / TwoFloat::from(2.0);
        BetaParam {
            value: f64::from(extended),
            extended,
        }
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub(crate) fn extended(self) -> TwoFloat {
        self.extended
    }

    /// Largest digit of the alphabet, ⌈β − 1⌉.
    pub fn max_digit(self) -> u32 {
        (self.value - 1.0).ceil() as u32
    }

    pub fn is_integer(self) -> bool {
        self.value.fract() == 0.0
    }

    /// log_β(x).
    pub fn log(self, x: f64) -> f64 {
        x.ln() / self.value.ln()
    }
}

impl fmt::Display for BetaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A finite digit string ε_1 … ε_n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut d = self.0.clone();
        d.extend_from_slice(&other.0);
        Word(d)
    }
}

impl fmt::Display for Word {
    /// Digits are written back to back when they are all single-character,
    /// otherwise joined with '.'.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&d| d < 10) {
            for d in &self.0 {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
            f.write_str(&parts.join("."))
        }
    }
}

/// Half-open interval [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(Error::domain(
                Module::BetaDynamics,
                format!("invalid interval [{lo}, {hi})"),
            ));
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    /// Whether [lo, lo + len) lies inside this interval.
    pub fn contains_interval(&self, lo: f64, len: f64) -> bool {
        lo >= self.lo && lo + len <= self.hi
    }

    pub fn intersects(&self, lo: f64, len: f64) -> bool {
        lo < self.hi && lo + len > self.lo
    }
}

/// An nth level cylinder: the interval of points whose expansion starts with `word`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderNode {
    pub word: Word,
    pub left: f64,
    /// Length of T^n applied to the cylinder, t ∈ (0, 1]; exactly 1 for full nodes.
    pub image_length: f64,
    pub length: f64,
    pub level: usize,
}

impl CylinderNode {
    pub fn is_full(&self) -> bool {
        self.image_length == 1.0
    }

    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.left,
            hi: self.right(),
        }
    }
}
