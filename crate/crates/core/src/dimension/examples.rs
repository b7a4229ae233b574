//! Closed-form dimensions of the two rotated-rectangle families, used as
//! test oracles.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Module, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// β = (2, 4), fixed angle θ ∈ [0, π/2].
    ConstantAngle(f64),
    /// β = (2, 4), θ_n = arccos 2^{-a·n}, a ≥ 0.
    ArccosAngle(f64),
}

/// Limiting dimension of the family.
pub fn closed_form_example(which: ClosedForm) -> Result<f64> {
    match which {
        ClosedForm::ConstantAngle(theta) => {
            if !(0.0..=FRAC_PI_2).contains(&theta) {
                return Err(Error::domain(
                    Module::DimensionEngine,
                    format!("theta must lie in [0, π/2], got {theta}"),
                ));
            }
            Ok(if theta < FRAC_PI_2 { 1.25 } else { 1.0 })
        }
        ClosedForm::ArccosAngle(a) => {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::domain(
                    Module::DimensionEngine,
                    format!("a must be ≥ 0, got {a}"),
                ));
            }
            Ok(if a <= 1.0 { 1.0 + (1.0 - a) / (4.0 - a) } else { 1.0 })
        }
    }
}
