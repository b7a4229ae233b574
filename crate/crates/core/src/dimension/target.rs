//! Target sequences P_n and their contracted images f^n P_n in factored
//! log form.

use crate::error::{Error, Module, Result};
use crate::geometry::{scale_by_f, BetaSystem, Parallelepiped, Rotation2};

const M: Module = Module::DimensionEngine;

/// Rotation angle rule for the planar family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaRule {
    Constant(f64),
    /// θ_n = arccos(2^{-a·n}).
    ArccosPow2(f64),
}

impl ThetaRule {
    pub fn rotation(&self, n: u32) -> Result<Rotation2> {
        match *self {
            ThetaRule::Constant(theta) => Ok(Rotation2::from_angle(theta)),
            ThetaRule::ArccosPow2(a) => Rotation2::from_cos((-a * n as f64).exp2()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// P_n is the n-th entry (1-based).
    Explicit(Vec<Parallelepiped>),
    /// Axis box with sides β_i^{-n·t_i}.
    Axis { exponents: Vec<f64>, translation: Vec<f64> },
    /// R_{θ_n} applied to the box with sides β_i^{-n·e_i}, then translated.
    Rotated2d {
        theta: ThetaRule,
        side_exponents: [f64; 2],
        translation: [f64; 2],
    },
    /// Per-level columns, row n holding the d² entries column-major.
    Table {
        rows: Vec<(u32, Vec<f64>)>,
        translation: Vec<f64>,
    },
}

/// A d×d matrix stored as diag(e^{row_log}) · core · diag(e^{col_log}).
/// `core` is column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LogMatrix {
    pub row_log: Vec<f64>,
    pub core: Vec<Vec<f64>>,
    pub col_log: Vec<f64>,
}

impl LogMatrix {
    /// Factors plain columns, pulling each column's largest magnitude out.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let mut core = Vec::with_capacity(d);
        let mut col_log = Vec::with_capacity(d);
        for col in columns {
            let m = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::degenerate(M, "zero or non-finite column"));
            }
            core.push(col.iter().map(|v| v / m).collect());
            col_log.push(m.ln());
        }
        Ok(LogMatrix {
            row_log: vec![0.0; d],
            core,
            col_log,
        })
    }

    pub fn dim(&self) -> usize {
        self.core.len()
    }

    /// diag(e^{shift}) applied from the left.
    pub fn scale_rows(mut self, shift: &[f64]) -> Self {
        for (r, s) in self.row_log.iter_mut().zip(shift) {
            *r += s;
        }
        self
    }

    /// Plain columns; entries that fall below double range flush to zero.
    pub fn to_columns(&self) -> Vec<Vec<f64>> {
        self.core
            .iter()
            .zip(&self.col_log)
            .map(|(col, c)| {
                col.iter()
                    .zip(&self.row_log)
                    .map(|(v, r)| v * (r + c).exp())
                    .collect()
            })
            .collect()
    }
}

/// A beta system with a rule producing P_n.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub system: BetaSystem,
    pub generator: Generator,
}

impl TargetSpec {
    pub fn new(system: BetaSystem, generator: Generator) -> Result<Self> {
        let d = system.dim();
        let bad = |what: &str| Err(Error::domain(M, format!("{what} must have length {d}")));
        match &generator {
            Generator::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::domain(M, "explicit target list is empty"));
                }
                if list.iter().any(|p| p.dim() != d) {
                    return bad("every parallelepiped");
                }
            }
            Generator::Axis {
                exponents,
                translation,
            } => {
                if exponents.len() != d {
                    return bad("exponents");
                }
                if translation.len() != d {
                    return bad("translation");
                }
                if exponents.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(Error::domain(M, "exponents must be finite and ≥ 0"));
                }
            }
            Generator::Rotated2d {
                theta,
                side_exponents,
                ..
            } => {
                if d != 2 {
                    return Err(Error::domain(M, "rotated2d needs exactly two betas"));
                }
                match *theta {
                    ThetaRule::Constant(t) if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&t) => {
                        return Err(Error::domain(M, format!("theta must lie in [0, π/2], got {t}")));
                    }
                    ThetaRule::ArccosPow2(a) if !(a.is_finite() && a >= 0.0) => {
                        return Err(Error::domain(M, format!("a must be ≥ 0, got {a}")));
                    }
                    _ => {}
                }
                if side_exponents.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(Error::domain(M, "side exponents must be finite and ≥ 0"));
                }
            }
            Generator::Table { rows, translation } => {
                if translation.len() != d {
                    return bad("translation");
                }
                if rows.iter().any(|(_, v)| v.len() != d * d) {
                    return Err(Error::domain(M, format!("table rows need {} entries", d * d)));
                }
            }
        }
        Ok(TargetSpec { system, generator })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Planar rotated family with the given angle rule, unit side exponents
    /// and translation (1/2, 1/2).
    pub fn rotated(betas: [f64; 2], theta: ThetaRule) -> Result<Self> {
        Self::new(
            BetaSystem::new(betas.to_vec())?,
            Generator::Rotated2d {
                theta,
                side_exponents: [1.0, 1.0],
                translation: [0.5, 0.5],
            },
        )
    }

    pub fn axis(betas: Vec<f64>, exponents: Vec<f64>) -> Result<Self> {
        let d = betas.len();
        Self::new(
            BetaSystem::new(betas)?,
            Generator::Axis {
                exponents,
                translation: vec![0.0; d],
            },
        )
    }

    fn table_row(&self, n: u32) -> Result<&[f64]> {
        let Generator::Table { rows, .. } = &self.generator else {
            unreachable!("table_row on a non-table generator")
        };
        rows.iter()
            .find(|(m, _)| *m == n)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::domain(M, format!("table has no row for n={n}")))
    }

    /// ln of the side lengths of the unrotated box, for the box families.
    fn log_sides(&self, n: u32, exponents: &[f64]) -> Vec<f64> {
        self.system
            .log_betas()
            .iter()
            .zip(exponents)
            .map(|(lb, t)| -(n as f64) * t * lb)
            .collect()
    }

    fn sides(&self, n: u32, exponents: &[f64]) -> Vec<f64> {
        self.system
            .betas()
            .iter()
            .zip(exponents)
            .map(|(b, t)| b.powf(-(n as f64) * t))
            .collect()
    }

    /// P_n itself. Errors when its entries are not representable.
    pub fn p_n(&self, n: u32) -> Result<Parallelepiped> {
        if n == 0 {
            return Err(Error::domain(M, "levels start at n=1"));
        }
        let d = self.dim();
        match &self.generator {
            Generator::Explicit(list) => list
                .get(n as usize - 1)
                .cloned()
                .ok_or_else(|| Error::domain(M, format!("explicit list has no entry for n={n}"))),
            Generator::Axis {
                exponents,
                translation,
            } => {
                let sides = self.sides(n, exponents);
                if sides.iter().any(|s| !s.is_normal()) {
                    return Err(underflow(n));
                }
                Parallelepiped::axis_box(translation.clone(), &sides)
            }
            Generator::Rotated2d {
                theta,
                side_exponents,
                translation,
            } => {
                let sides = self.sides(n, side_exponents);
                if sides.iter().any(|s| !s.is_normal()) {
                    return Err(underflow(n));
                }
                let h = Parallelepiped::axis_box(translation.to_vec(), &sides)?;
                theta.rotation(n)?.rotate(&h)
            }
            Generator::Table { translation, .. } => {
                let row = self.table_row(n)?;
                let columns = row.chunks(d).map(<[f64]>::to_vec).collect();
                Parallelepiped::new(translation.clone(), columns)
            }
        }
    }

    /// f^n P_n computed directly in doubles.
    pub fn contracted(&self, n: u32) -> Result<Parallelepiped> {
        scale_by_f(&self.system, &self.p_n(n)?, n)
    }

    /// Columns of f^n P_n in factored log form; never underflows for the
    /// built-in families.
    pub fn contracted_log(&self, n: u32) -> Result<LogMatrix> {
        if n == 0 {
            return Err(Error::domain(M, "levels start at n=1"));
        }
        let d = self.dim();
        let f_log: Vec<f64> = self.system.log_betas().iter().map(|lb| -(n as f64) * lb).collect();
        let base = match &self.generator {
            Generator::Explicit(_) => LogMatrix::from_columns(self.p_n(n)?.columns())?,
            Generator::Table { .. } => {
                let row = self.table_row(n)?;
                let columns: Vec<Vec<f64>> = row.chunks(d).map(<[f64]>::to_vec).collect();
                LogMatrix::from_columns(&columns)?
            }
            Generator::Axis { exponents, .. } => LogMatrix {
                row_log: vec![0.0; d],
                core: (0..d)
                    .map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
                col_log: self.log_sides(n, exponents),
            },
            Generator::Rotated2d {
                theta,
                side_exponents,
                ..
            } => {
                let rot = theta.rotation(n)?;
                LogMatrix {
                    row_log: vec![0.0; 2],
                    core: vec![rot.apply(&[1.0, 0.0]), rot.apply(&[0.0, 1.0])],
                    col_log: self.log_sides(n, side_exponents),
                }
            }
        };
        Ok(base.scale_rows(&f_log))
    }

    /// Whether P_n lies in the closed unit cube, checked on its vertices.
    pub fn contained_in_unit_cube(&self, n: u32) -> Result<bool> {
        let p = match self.p_n(n) {
            Ok(p) => p,
            Err(Error::Underflow { .. }) => return Ok(true),
            Err(e) => return Err(e),
        };
        Ok(p.vertices()
            .iter()
            .flatten()
            .all(|v| (0.0..=1.0).contains(v)))
    }
}

fn underflow(n: u32) -> Error {
    Error::Underflow {
        module: M,
        message: format!("side lengths of P_{n} are below double range"),
    }
}
