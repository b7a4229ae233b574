//! Scalar abstraction for the cylinder recursion.
//!
//! The t-recursion multiplies rounding error by β at each non-full level, so
//! deep levels or β close to 1 can switch to double-double arithmetic.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE binary64.
    #[default]
    Double,
    /// Double-double (about 106 significant bits).
    Extended,
}

impl Precision {
    /// Relative tolerance under which an image length counts as 1 (a full node).
    pub fn fullness_tolerance(self) -> f64 {
        match self {
            Precision::Double => 1e-9,
            Precision::Extended => 1e-20,
        }
    }

    /// Image lengths at or below this are rounding residue, not a child.
    pub fn existence_tolerance(self) -> f64 {
        match self {
            Precision::Double => 1e-12,
            Precision::Extended => 1e-24,
        }
    }
}

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn floor(self) -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
}

impl Real for TwoFloat {
    fn from_f64(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
    fn floor(self) -> Self {
        TwoFloat::floor(self)
    }
}
