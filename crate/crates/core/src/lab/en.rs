//! The union E_n of contracted targets placed at cylinder corners.

use rayon::prelude::*;
use serde::Serialize;

use crate::beta::{enumerate_cylinders, BetaParam, CylinderFilter, CylinderNode, EnumOptions, Interval, Word};
use crate::dimension::TargetSpec;
use crate::error::{Error, Module, Result};
use crate::polygon::{ConvexPolygon, Point};

const M: Module = Module::NumericalLab;

pub const DEFAULT_COPY_CAP: u64 = 1_000_000;
pub const DEFAULT_ROW_CAP: u64 = 50_000_000;

#[derive(Debug, Clone, Copy)]
pub struct LabOptions {
    pub enumeration: EnumOptions,
    /// Largest number of copies E_n may have.
    pub copy_cap: u64,
    /// Largest number of grid rows scanned by one cover count, summed over copies.
    pub row_cap: u64,
}

impl Default for LabOptions {
    fn default() -> Self {
        LabOptions {
            enumeration: EnumOptions::default(),
            copy_cap: DEFAULT_COPY_CAP,
            row_cap: DEFAULT_ROW_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnMode {
    /// Every admissible word on each axis.
    All,
    /// Full words whose cylinders lie in the square `cube`; `epsilon` is the
    /// slack in the level condition n ≥ −(1 + ε/d)·log_{β_i}|D|.
    FullIn { cube: Vec<Interval>, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnCopy {
    pub words: [Word; 2],
    /// Left endpoints of the two cylinders.
    pub corner: Point,
    pub cylinder_lengths: [f64; 2],
    pub polygon: ConvexPolygon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnSet {
    pub n: u32,
    pub mode: EnMode,
    /// Number of words kept on each axis.
    pub axis_counts: [u64; 2],
    /// f^n P_n before translation.
    pub base: ConvexPolygon,
    pub copies: Vec<EnCopy>,
}

impl EnSet {
    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn polygons(&self) -> impl Iterator<Item = &ConvexPolygon> {
        self.copies.iter().map(|c| &c.polygon)
    }
}

/// Side length |D| of a square given as a product of intervals.
pub fn cube_side(cube: &[Interval]) -> Result<f64> {
    let first = cube.first().ok_or_else(|| Error::domain(M, "D needs at least one side"))?;
    let side = first.len();
    if !(side > 0.0) {
        return Err(Error::domain(M, "D must have positive side"));
    }
    for iv in cube {
        if (iv.len() - side).abs() > 1e-12 * side {
            return Err(Error::domain(M, "D must have equal sides"));
        }
        if iv.lo < 0.0 || iv.hi > 1.0 {
            return Err(Error::domain(M, format!("D side [{}, {}) leaves [0, 1)", iv.lo, iv.hi)));
        }
    }
    Ok(side)
}

/// Checks n ≥ −(1 + ε/d)·log_{β_i}|D| on every axis.
pub fn check_level_for_cube(betas: &[f64], n: u32, cube: &[Interval], epsilon: f64) -> Result<()> {
    let d = betas.len();
    if cube.len() != d {
        return Err(Error::domain(M, format!("D must have {d} sides, got {}", cube.len())));
    }
    if !(epsilon > 0.0) {
        return Err(Error::domain(M, format!("ε must be > 0, got {epsilon}")));
    }
    let side = cube_side(cube)?;
    for b in betas {
        let need = -(1.0 + epsilon / d as f64) * side.ln() / b.ln();
        if (n as f64) < need - 1e-9 {
            return Err(Error::domain(
                M,
                format!("level {n} is below {need:.6} required for |D| = {side} and β = {b}"),
            ));
        }
    }
    Ok(())
}

fn axis_nodes(beta: f64, n: u32, filter: CylinderFilter, opts: EnumOptions) -> Result<Vec<CylinderNode>> {
    enumerate_cylinders(BetaParam::new(beta)?, n as usize, filter, opts)?.collect()
}

/// Builds E_n for a planar target. In `FullIn` mode each copy is clipped to
/// its cylinder product.
pub fn build_e_n(spec: &TargetSpec, n: u32, mode: EnMode, opts: LabOptions) -> Result<EnSet> {
    let betas = spec.system.betas();
    if betas.len() != 2 {
        return Err(Error::domain(M, format!("the lab is planar, got dimension {}", betas.len())));
    }
    let filters: Vec<CylinderFilter> = match &mode {
        EnMode::All => vec![CylinderFilter::all(); 2],
        EnMode::FullIn { cube, epsilon } => {
            check_level_for_cube(betas, n, cube, *epsilon)?;
            cube.iter().map(|iv| CylinderFilter::full_within(*iv)).collect()
        }
    };
    let axes: Vec<Vec<CylinderNode>> = betas
        .iter()
        .zip(&filters)
        .map(|(b, f)| axis_nodes(*b, n, *f, opts.enumeration))
        .collect::<Result<_>>()?;
    let total = axes[0].len() as u64 * axes[1].len() as u64;
    if total > opts.copy_cap {
        return Err(Error::ResourceLimit {
            module: M,
            what: "copies of E_n",
            requested: total as f64,
            cap: opts.copy_cap as f64,
        });
    }
    let base = ConvexPolygon::from_parallelepiped(&spec.contracted(n)?)?;
    let clip = matches!(mode, EnMode::FullIn { .. });
    let cols = axes[1].len();
    let copies: Vec<EnCopy> = (0..total as usize)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (&axes[0][k / cols], &axes[1][k % cols]);
            let corner = [a.left, b.left];
            let shifted = base.map(|p| [p[0] + corner[0], p[1] + corner[1]]);
            let polygon = if clip {
                shifted.clip_box(corner, [a.right(), b.right()])
            } else {
                shifted
            };
            EnCopy {
                words: [a.word.clone(), b.word.clone()],
                corner,
                cylinder_lengths: [a.length, b.length],
                polygon,
            }
        })
        .collect();
    Ok(EnSet {
        n,
        mode,
        axis_counts: [axes[0].len() as u64, axes[1].len() as u64],
        base,
        copies,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;
    use crate::beta::{count_admissible, BetaParam};
    use crate::dimension::ThetaRule;
    use crate::geometry::{BetaSystem, Parallelepiped};
    use crate::dimension::Generator;

    #[test]
    fn rotated_example_copy_count() {
        let spec = TargetSpec::rotated([2.0, 4.0], ThetaRule::Constant(FRAC_PI_4)).unwrap();
        let e = build_e_n(&spec, 2, EnMode::All, LabOptions::default()).unwrap();
        assert_eq!(e.len(), 64);
        let a = count_admissible(BetaParam::new(2.0).unwrap(), 2).unwrap();
        let b = count_admissible(BetaParam::new(4.0).unwrap(), 2).unwrap();
        assert_eq!(e.len() as u64, a * b);
    }

    #[test]
    fn dyadic_corners() {
        let spec = TargetSpec::axis(vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let e = build_e_n(&spec, 1, EnMode::All, LabOptions::default()).unwrap();
        let mut corners: Vec<Point> = e.copies.iter().map(|c| c.corner).collect();
        corners.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(corners, vec![[0.0, 0.0], [0.0, 0.5], [0.5, 0.0], [0.5, 0.5]]);
    }

    #[test]
    fn full_mode_on_unit_square_matches_all_for_integer_betas() {
        let spec = TargetSpec::rotated([2.0, 4.0], ThetaRule::Constant(0.3)).unwrap();
        let all = build_e_n(&spec, 2, EnMode::All, LabOptions::default()).unwrap();
        let full = build_e_n(
            &spec,
            2,
            EnMode::FullIn {
                cube: vec![Interval::unit(); 2],
                epsilon: 0.1,
            },
            LabOptions::default(),
        )
        .unwrap();
        assert_eq!(all.len(), full.len());
        for (a, b) in all.copies.iter().zip(&full.copies) {
            assert_eq!(a.words, b.words);
            assert!((a.polygon.area() - b.polygon.area()).abs() < 1e-15);
        }
    }

    #[test]
    fn level_condition_on_small_cube() {
        let spec = TargetSpec::axis(vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let cube = vec![Interval::new(0.0, 0.25).unwrap(); 2];
        // needs n ≥ 2(1 + 0.05) = 2.1
        let mode = EnMode::FullIn { cube, epsilon: 0.1 };
        assert!(build_e_n(&spec, 2, mode.clone(), LabOptions::default()).is_err());
        let e = build_e_n(&spec, 3, mode, LabOptions::default()).unwrap();
        assert_eq!(e.axis_counts, [2, 2]);
    }

    #[test]
    fn copies_are_clipped_to_cylinders() {
        let big = Parallelepiped::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let spec = TargetSpec::new(BetaSystem::new(vec![2.0, 2.0]).unwrap(), Generator::Explicit(vec![big])).unwrap();
        let mode = EnMode::FullIn {
            cube: vec![Interval::unit(); 2],
            epsilon: 0.5,
        };
        let e = build_e_n(&spec, 1, mode, LabOptions::default()).unwrap();
        for c in &e.copies {
            assert!((c.polygon.area() - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn copy_cap() {
        let spec = TargetSpec::axis(vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let opts = LabOptions {
            copy_cap: 10,
            ..LabOptions::default()
        };
        assert!(matches!(
            build_e_n(&spec, 2, EnMode::All, opts),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
