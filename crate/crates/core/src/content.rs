//! Singular value function, the rectangle content sandwich, the mass
//! distribution bound and a planar brute-force content oracle.
//!
//! Balls are max-norm balls, i.e. axis-aligned squares of side 2r.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Module, Result};
use crate::polygon::{ConvexPolygon, Grid, Point};

const M: Module = Module::HausdorffContent;

/// Side lengths a_1 ≥ … ≥ a_d > 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortedRectangle {
    sides: Vec<f64>,
}

impl SortedRectangle {
    /// Sorts the sides; all must be positive and finite.
    pub fn new(mut sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::domain(M, "sides must be positive and finite"));
        }
        sides.sort_by(|a, b| b.total_cmp(a));
        Ok(SortedRectangle { sides })
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }
}

fn check_s(s: f64, d: usize) -> Result<()> {
    if !(s > 0.0 && s <= d as f64) {
        return Err(Error::domain(M, format!("s must lie in (0, {d}], got {s}")));
    }
    Ok(())
}

/// ln φ^s(R).
pub fn log_singular_value_function(r: &SortedRectangle, s: f64) -> Result<f64> {
    check_s(s, r.dim())?;
    let m = s.floor() as usize;
    let mut acc: f64 = r.sides[..m].iter().map(|a| a.ln()).sum();
    if m < r.dim() {
        acc += (s - m as f64) * r.sides[m].ln();
    }
    Ok(acc)
}

/// φ^s(R) = a_1⋯a_m · a_{m+1}^{s−m} with m = ⌊s⌋.
pub fn singular_value_function(r: &SortedRectangle, s: f64) -> Result<f64> {
    log_singular_value_function(r, s).map(f64::exp)
}

/// (c·2^{-d}·φ^s(R), φ^s(R)) for a set inside R filling a fraction ≥ c of it.
pub fn content_sandwich(r: &SortedRectangle, c: f64, s: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::domain(M, format!("volume ratio must lie in (0, 1], got {c}")));
    }
    let phi = singular_value_function(r, s)?;
    Ok((c * 2f64.powi(-(r.dim() as i32)) * phi, phi))
}

/// Content lower bound total_mass / c for a measure with µ(B(x, r)) ≤ c·r^s.
pub fn mdp_lower_bound(total_mass: f64, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain(M, format!("ball constant must be > 0, got {c}")));
    }
    Ok(total_mass / c)
}

/// Checks µ(B(x, r)) ≤ c·r^s on the probe balls before applying the bound.
pub fn mdp_lower_bound_checked(
    measure: impl Fn(Point, f64) -> f64,
    probes: &[(Point, f64)],
    total_mass: f64,
    c: f64,
    s: f64,
) -> Result<f64> {
    for &(x, r) in probes {
        let mass = measure(x, r);
        if mass > c * r.powf(s) * (1.0 + 1e-12) {
            return Err(Error::consistency(
                M,
                format!("ball at {x:?} of radius {r} has mass {mass} > c·r^s"),
            ));
        }
    }
    mdp_lower_bound(total_mass, c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContentEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Cell sizes of every grid that entered the upper bound.
    pub scale_grid: Vec<f64>,
}

/// Default dyadic depths for the oracle.
pub const DEFAULT_DEPTHS: std::ops::RangeInclusive<u32> = 4..=12;

/// Grids up to this many cells per side get the quadtree merge.
const MERGE_SIDE: usize = 256;
/// Shape-adapted meshes use sides W/k and H/k for k up to this.
const ADAPTED_DIVISIONS: usize = 48;

/// Minimal cost of covering the occupied cells by aligned squares from the
/// quadtree over the grid (cost of a square of side ℓ is ℓ^s).
fn quadtree_cost(bits: &[bool], side: usize, cell: f64, s: f64) -> f64 {
    let mut cost: Vec<f64> = bits.iter().map(|&b| if b { cell.powf(s) } else { 0.0 }).collect();
    let mut n = side;
    let mut len = cell;
    while n > 1 {
        let half = n / 2;
        len *= 2.0;
        let whole = len.powf(s);
        let mut next = vec![0.0; half * half];
        for i in 0..half {
            for j in 0..half {
                let sum = cost[2 * i * n + 2 * j]
                    + cost[2 * i * n + 2 * j + 1]
                    + cost[(2 * i + 1) * n + 2 * j]
                    + cost[(2 * i + 1) * n + 2 * j + 1];
                next[i * half + j] = if sum == 0.0 { 0.0 } else { sum.min(whole) };
            }
        }
        cost = next;
        n = half;
    }
    cost[0]
}

fn grid_cover_cost(poly: &ConvexPolygon, grid: Grid, s: f64) -> f64 {
    if grid.cols == grid.rows && grid.cols <= MERGE_SIDE && grid.cols.is_power_of_two() {
        let bits = grid.occupancy([poly]);
        quadtree_cost(&bits, grid.cols, grid.cell, s)
    } else {
        let count: u64 = grid.spans(poly).iter().map(|(_, a, b)| (b - a + 1) as u64).sum();
        count as f64 * grid.cell.powf(s)
    }
}

/// Every grid tried by the upper bound: dyadic grids of [0,1]² plus meshes
/// fitted to the shape's extent and anchored at its min corner, max corner
/// and centre.
fn candidate_grids(poly: &ConvexPolygon, depths: &[u32]) -> Vec<Grid> {
    let mut grids: Vec<Grid> = depths
        .iter()
        .map(|&k| {
            let n = 1usize << k;
            Grid {
                origin: [0.0, 0.0],
                cell: 1.0 / n as f64,
                cols: n,
                rows: n,
            }
        })
        .collect();
    let Some((lo, hi)) = poly.bbox() else {
        return grids;
    };
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let span = w.max(h);
    if span <= 0.0 {
        return grids;
    }
    for base in [w, h] {
        if base <= 0.0 {
            continue;
        }
        for k in 1..=ADAPTED_DIVISIONS {
            let cell = base / k as f64 * (1.0 + 1e-9);
            let need = (span / cell).ceil() as usize;
            let side = need.max(1).next_power_of_two();
            if side > MERGE_SIDE {
                break;
            }
            let extent = side as f64 * cell;
            let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
            for origin in [
                lo,
                [hi[0] - extent, hi[1] - extent],
                [centre[0] - extent / 2.0, centre[1] - extent / 2.0],
            ] {
                grids.push(Grid {
                    origin,
                    cell,
                    cols: side,
                    rows: side,
                });
            }
        }
    }
    grids
}

/// Upper bound on the content: the cheapest cover found over all candidate
/// grids, with the quadtree merge where the grid is small enough.
pub fn content_upper_2d(poly: &ConvexPolygon, s: f64, depths: &[u32]) -> Result<(f64, Vec<f64>)> {
    check_s(s, 2)?;
    if poly.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    let grids = candidate_grids(poly, depths);
    let costs: Vec<f64> = grids.par_iter().map(|g| grid_cover_cost(poly, *g, s)).collect();
    let upper = costs.into_iter().fold(f64::INFINITY, f64::min);
    let mut scales: Vec<f64> = grids.iter().map(|g| g.cell).collect();
    scales.sort_by(|a, b| b.total_cmp(a));
    scales.dedup();
    Ok((upper, scales))
}

/// Largest normalized-area mass of a max-norm ball, tabulated on geometric
/// radius brackets [r_k, r_{k+1}].
///
/// For any centre x there is a probe point x_g with |x − x_g|_∞ ≤ g/2, so
/// B(x, r) ⊂ B(x_g, r_{k+1} + g/2) for r ≤ r_{k+1}. The table is
/// independent of s.
#[derive(Debug, Clone)]
pub struct BallMassProfile {
    area: f64,
    radii: Vec<f64>,
    /// masses[k] bounds µ(B(x, r)) for r ∈ [radii[k], radii[k+1]].
    masses: Vec<f64>,
}

const RADIUS_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}
const PROBES_PER_SIDE: usize = 64;

impl BallMassProfile {
    pub fn new(poly: &ConvexPolygon) -> Self {
        let area = poly.area();
        let Some((lo, hi)) = poly.bbox() else {
            return BallMassProfile {
                area,
                radii: Vec::new(),
                masses: Vec::new(),
            };
        };
        if area <= 0.0 {
            return BallMassProfile {
                area,
                radii: Vec::new(),
                masses: Vec::new(),
            };
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let r_min = poly.min_width() / 8.0;
        let mut radii = vec![r_min];
        while *radii.last().expect("non-empty") < span {
            let r = radii.last().expect("non-empty") * RADIUS_RATIO;
            radii.push(r);
        }
        let masses = radii
            .par_windows(2)
            .map(|w| {
                let (r0, r1) = (w[0], w[1]);
                let box_lo = [lo[0] - r1, lo[1] - r1];
                let box_hi = [hi[0] + r1, hi[1] + r1];
                let per_side = |len: f64| (len / (r0 / 8.0)).ceil().clamp(1.0, PROBES_PER_SIDE as f64) as usize;
                let mx = per_side(box_hi[0] - box_lo[0]);
                let my = per_side(box_hi[1] - box_lo[1]);
                let gx = (box_hi[0] - box_lo[0]) / mx as f64;
                let gy = (box_hi[1] - box_lo[1]) / my as f64;
                let rho = r1 + gx.max(gy) / 2.0;
                let mut best: f64 = 0.0;
                for i in 0..my {
                    let y = box_lo[1] + (i as f64 + 0.5) * gy;
                    for j in 0..mx {
                        let x = box_lo[0] + (j as f64 + 0.5) * gx;
                        let a = poly.area_in_box([x - rho, y - rho], [x + rho, y + rho]);
                        best = best.max(a);
                    }
                }
                (best / area).min(1.0)
            })
            .collect();
        BallMassProfile {
            area,
            radii,
            masses,
        }
    }

    /// A constant c with µ(B(x, r)) ≤ c·r^s for every x and r > 0, where µ is
    /// normalized area on the shape. Requires 0 < s ≤ 2.
    pub fn ball_constant(&self, s: f64) -> Result<f64> {
        check_s(s, 2)?;
        if self.radii.is_empty() {
            return Err(Error::degenerate(M, "shape has no area"));
        }
        let a = self.area;
        let r_min = self.radii[0];
        let r_max = *self.radii.last().expect("non-empty");
        // below r_min: µ ≤ 4r²/A and r^{2−s} is increasing; above r_max: µ ≤ 1
        let mut c = (4.0 * r_min.powf(2.0 - s) / a).max(r_max.powf(-s));
        for (k, &mass) in self.masses.iter().enumerate() {
            let (r0, r1) = (self.radii[k], self.radii[k + 1]);
            let bracket = (4.0 * r1.powf(2.0 - s) / a).min(r0.powf(-s)).min(mass / r0.powf(s));
            c = c.max(bracket);
        }
        Ok(c)
    }

    pub fn lower_bound(&self, s: f64) -> Result<f64> {
        mdp_lower_bound(1.0, self.ball_constant(s)?)
    }
}

/// Brute-force bracket of ℋ^s_∞ for a convex planar shape.
pub fn brute_force_content_2d(poly: &ConvexPolygon, s: f64, depths: &[u32]) -> Result<ContentEstimate> {
    check_s(s, 2)?;
    if poly.area() <= 0.0 && poly.vertices().len() < 2 {
        return Ok(ContentEstimate {
            lower: 0.0,
            upper: 0.0,
            scale_grid: Vec::new(),
        });
    }
    let (upper, scale_grid) = content_upper_2d(poly, s, depths)?;
    let lower = if poly.area() > 0.0 {
        BallMassProfile::new(poly).lower_bound(s)?.min(upper)
    } else {
        0.0
    };
    Ok(ContentEstimate {
        lower,
        upper,
        scale_grid,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn depths() -> Vec<u32> {
        DEFAULT_DEPTHS.collect()
    }

    #[test]
    fn singular_values() {
        let r = SortedRectangle::new(vec![0.1, 0.5]).unwrap();
        assert_relative_eq!(singular_value_function(&r, 1.5).unwrap(), 0.158_113_883, max_relative = 1e-9);
        assert_relative_eq!(singular_value_function(&r, 2.0).unwrap(), 0.05, max_relative = 1e-12);
        assert_relative_eq!(singular_value_function(&r, 1.0).unwrap(), 0.5, max_relative = 1e-12);
        let cube = SortedRectangle::new(vec![0.3; 3]).unwrap();
        for s in [0.2, 1.0, 1.7, 2.5, 3.0] {
            assert_relative_eq!(singular_value_function(&cube, s).unwrap(), 0.3f64.powf(s), max_relative = 1e-12);
        }
        assert!(singular_value_function(&r, 0.0).is_err());
        assert!(singular_value_function(&r, 2.1).is_err());
        assert!(SortedRectangle::new(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn sandwich_constants() {
        let r = SortedRectangle::new(vec![0.5, 0.1]).unwrap();
        let (lo, hi) = content_sandwich(&r, 1.0, 1.5).unwrap();
        assert_relative_eq!(lo, hi / 4.0, max_relative = 1e-15);
        let c = 2f64.powi(-6);
        let (lo, hi) = content_sandwich(&r, c, 1.5).unwrap();
        assert_relative_eq!(lo, 2f64.powi(-8) * hi, max_relative = 1e-15);
        let (lo, hi) = content_sandwich(&r, 0.5, 2.0).unwrap();
        assert_relative_eq!(hi, 0.05, max_relative = 1e-12);
        assert_relative_eq!(lo, 0.5 * 0.25 * 0.05, max_relative = 1e-12);
        assert!(content_sandwich(&r, 0.0, 1.0).is_err());
    }

    #[test]
    fn mass_distribution() {
        assert_eq!(mdp_lower_bound(1.0, 4.0).unwrap(), 0.25);
        assert_eq!(mdp_lower_bound(1.0, 8.0).unwrap(), 0.125);
        assert!(mdp_lower_bound(1.0, 0.0).is_err());
        let unit = ConvexPolygon::rect(0.0, 0.0, 1.0, 1.0);
        let lebesgue = |x: Point, r: f64| unit.area_in_box([x[0] - r, x[1] - r], [x[0] + r, x[1] + r]);
        let probes = [([0.5, 0.5], 0.1), ([0.0, 0.0], 0.3), ([0.5, 0.5], 2.0)];
        assert_eq!(mdp_lower_bound_checked(lebesgue, &probes, 1.0, 4.0, 2.0).unwrap(), 0.25);
        assert!(mdp_lower_bound_checked(lebesgue, &probes, 1.0, 3.0, 2.0).is_err());
    }

    #[test]
    fn unit_square_area() {
        let unit = ConvexPolygon::rect(0.0, 0.0, 1.0, 1.0);
        let est = brute_force_content_2d(&unit, 2.0, &depths()).unwrap();
        assert!((1.0..=1.05).contains(&est.upper), "{est:?}");
        assert!(est.lower >= 0.25, "{est:?}");
    }

    #[test]
    fn tight_rectangle_sandwich_at_exact_exponents() {
        let rect = ConvexPolygon::rect(0.2, 0.3, 0.7, 0.4);
        let r = SortedRectangle::new(vec![0.5, 0.1]).unwrap();
        for s in [0.5, 1.0, 1.5, 2.0] {
            let est = brute_force_content_2d(&rect, s, &depths()).unwrap();
            let (lo, hi) = content_sandwich(&r, 1.0, s).unwrap();
            assert!(est.upper <= hi * 1.1, "s={s}: {est:?} vs {hi}");
            assert!(est.lower >= lo * 0.9, "s={s}: {est:?} vs {lo}");
            assert!(est.lower <= est.upper);
        }
    }

    #[test]
    fn thin_segment_behaves_like_length() {
        let eps = 1e-4;
        let thin = ConvexPolygon::new(vec![[0.1, 0.1], [0.9, 0.9], [0.9, 0.9 + eps], [0.1, 0.1 + eps]]).unwrap();
        for s in [0.3, 0.6, 1.0] {
            let est = brute_force_content_2d(&thin, s, &depths()).unwrap();
            let len = 0.8f64.powf(s);
            assert!(est.upper <= len * 1.01, "s={s}: {est:?}");
            assert!(est.upper >= len * 0.5);
        }
    }

    #[test]
    fn scaling_law() {
        let base = ConvexPolygon::new(vec![[0.0, 0.0], [0.3, 0.1], [0.4, 0.35], [0.1, 0.25]]).unwrap();
        let lam = 0.5;
        let small = base.map(|p| [p[0] * lam, p[1] * lam]);
        for s in [0.7, 1.3, 1.9] {
            let a = content_upper_2d(&base, s, &depths()).unwrap().0;
            let b = content_upper_2d(&small, s, &depths()).unwrap().0;
            assert_relative_eq!(b, lam.powf(s) * a, max_relative = 0.1);
        }
    }

    #[test]
    fn empty_shape_has_zero_content() {
        let est = brute_force_content_2d(&ConvexPolygon::default(), 1.0, &depths()).unwrap();
        assert_eq!((est.lower, est.upper), (0.0, 0.0));
    }

    #[test]
    fn quadtree_merges_full_block() {
        let bits = vec![true; 16];
        assert_relative_eq!(quadtree_cost(&bits, 4, 0.25, 1.0), 1.0);
        assert_relative_eq!(quadtree_cost(&bits, 4, 0.25, 2.0), 1.0);
        let mut one = vec![false; 16];
        one[5] = true;
        assert_relative_eq!(quadtree_cost(&one, 4, 0.25, 0.5), 0.5);
    }
}
