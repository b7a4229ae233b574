//! Convex polygons in the plane: clipping, areas and grid occupancy.

use crate::error::{Error, Module, Result};
use crate::geometry::Parallelepiped;

pub type Point = [f64; 2];

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise convex polygon. May be degenerate (a segment, a point,
/// or empty) after clipping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Accepts either orientation; rejects non-convex input.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain(Module::HausdorffContent, "polygon vertices must be finite"));
        }
        vertices.dedup();
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let n = vertices.len();
        if n >= 3 {
            let signed: f64 = (0..n).map(|i| cross([0.0, 0.0], vertices[i], vertices[(i + 1) % n])).sum();
            if signed < 0.0 {
                vertices.reverse();
            }
            for i in 0..n {
                if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) < -1e-12 {
                    return Err(Error::domain(Module::HausdorffContent, "polygon is not convex"));
                }
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        ConvexPolygon {
            vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        }
    }

    pub fn from_parallelepiped(p: &Parallelepiped) -> Result<Self> {
        if p.dim() != 2 {
            return Err(Error::domain(
                Module::HausdorffContent,
                format!("planar shapes only, got dimension {}", p.dim()),
            ));
        }
        let o = p.origin();
        let a = &p.columns()[0];
        let b = &p.columns()[1];
        Self::new(vec![
            [o[0], o[1]],
            [o[0] + a[0], o[1] + a[1]],
            [o[0] + a[0] + b[0], o[1] + a[1] + b[1]],
            [o[0] + b[0], o[1] + b[1]],
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let v = &self.vertices;
        let twice: f64 = (0..n).map(|i| cross(v[0], v[i], v[(i + 1) % n])).sum();
        0.5 * twice.abs()
    }

    /// (min corner, max corner), or `None` when empty.
    pub fn bbox(&self) -> Option<(Point, Point)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])])
        }))
    }

    /// Smallest width over the edge normal directions; for a polygon this is
    /// the minimal width.
    pub fn min_width(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let v = &self.vertices;
        (0..n)
            .map(|i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                if len == 0.0 {
                    return f64::INFINITY;
                }
                v.iter().map(|&p| cross(a, b, p).abs() / len).fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Keeps the part with coordinate `axis` ≥ c (if `upper` is false) or ≤ c.
    /// Boundary points are kept, so touching shapes clip to a segment or point.
    fn clip_axis(&self, axis: usize, c: f64, upper: bool) -> Self {
        let inside = |p: &Point| if upper { p[axis] <= c } else { p[axis] >= c };
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 2);
        for i in 0..n {
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let (ci, ni) = (inside(&cur), inside(&next));
            if ci {
                out.push(cur);
            }
            if ci != ni {
                let t = (c - cur[axis]) / (next[axis] - cur[axis]);
                let mut p = [cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])];
                p[axis] = c;
                out.push(p);
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        ConvexPolygon { vertices: out }
    }

    /// Intersection with the closed box [x0, x1] × [y0, y1].
    pub fn clip_box(&self, lo: Point, hi: Point) -> Self {
        self.clip_axis(0, lo[0], false)
            .clip_axis(0, hi[0], true)
            .clip_axis(1, lo[1], false)
            .clip_axis(1, hi[1], true)
    }

    /// Area of the intersection with the closed box.
    pub fn area_in_box(&self, lo: Point, hi: Point) -> f64 {
        if let Some((blo, bhi)) = self.bbox() {
            if blo[0] >= lo[0] && blo[1] >= lo[1] && bhi[0] <= hi[0] && bhi[1] <= hi[1] {
                return self.area();
            }
            if bhi[0] < lo[0] || blo[0] > hi[0] || bhi[1] < lo[1] || blo[1] > hi[1] {
                return 0.0;
            }
        }
        self.clip_box(lo, hi).area()
    }

    /// x-range of the polygon within the closed slab y0 ≤ y ≤ y1.
    pub fn x_extent_in_slab(&self, y0: f64, y1: f64) -> Option<(f64, f64)> {
        let clipped = self.clip_axis(1, y0, false).clip_axis(1, y1, true);
        let (lo, hi) = clipped.bbox()?;
        Some((lo[0], hi[0]))
    }
}

/// A uniform square grid: cell (i, j) is [ox + j·h, ox + (j+1)·h] × [oy + i·h, oy + (i+1)·h].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: Point,
    pub cell: f64,
    pub cols: usize,
    pub rows: usize,
}

impl Grid {
    pub fn cells(&self) -> u64 {
        self.cols as u64 * self.rows as u64
    }

    /// Inclusive column ranges (row, first, last) of the closed cells
    /// touching `poly`, clamped to the grid. Rows without contact are skipped.
    pub fn spans(&self, poly: &ConvexPolygon) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        let Some((lo, hi)) = poly.bbox() else {
            return out;
        };
        let h = self.cell;
        let first = (((lo[1] - self.origin[1]) / h).ceil() as i64 - 1).max(0);
        let last = (((hi[1] - self.origin[1]) / h).floor() as i64).min(self.rows as i64 - 1);
        for i in first..=last {
            let y0 = self.origin[1] + i as f64 * h;
            let Some((xa, xb)) = poly.x_extent_in_slab(y0, y0 + h) else {
                continue;
            };
            let ja = (((xa - self.origin[0]) / h).ceil() as i64 - 1).max(0);
            let jb = (((xb - self.origin[0]) / h).floor() as i64).min(self.cols as i64 - 1);
            if ja <= jb {
                out.push((i as usize, ja as usize, jb as usize));
            }
        }
        out
    }

    /// Number of grid rows the bounding box of `poly` touches.
    pub fn rows_touched(&self, poly: &ConvexPolygon) -> u64 {
        match poly.bbox() {
            Some((lo, hi)) => ((hi[1] - lo[1]) / self.cell).ceil() as u64 + 2,
            None => 0,
        }
    }

    /// Occupancy bitmap, row-major.
    pub fn occupancy<'a>(&self, polys: impl IntoIterator<Item = &'a ConvexPolygon>) -> Vec<bool> {
        let mut bits = vec![false; self.cols * self.rows];
        for poly in polys {
            for (i, a, b) in self.spans(poly) {
                bits[i * self.cols + a..=i * self.cols + b].fill(true);
            }
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_and_area() {
        let p = ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [2.0, 1.0], [2.0, 0.0]]).unwrap();
        assert_eq!(p.area(), 2.0);
        let v = p.vertices();
        assert!(cross(v[0], v[1], v[2]) > 0.0);
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.5, 0.5], [0.0, 2.0]]).is_err());
    }

    #[test]
    fn clipping() {
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((tri.area_in_box([0.0, 0.0], [0.5, 0.5]) - 0.25).abs() < 1e-15);
        assert!((tri.area_in_box([0.5, 0.5], [1.0, 1.0])).abs() < 1e-15);
        assert_eq!(tri.area_in_box([-1.0, -1.0], [2.0, 2.0]), 0.5);
        let touching = ConvexPolygon::rect(1.0, 0.0, 2.0, 1.0).clip_box([0.0, 0.0], [1.0, 1.0]);
        assert!(!touching.is_empty());
        assert_eq!(touching.area(), 0.0);
    }

    #[test]
    fn slab_extent() {
        let diamond = ConvexPolygon::new(vec![[1.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert_eq!(diamond.x_extent_in_slab(0.0, 0.5), Some((0.5, 1.5)));
        assert_eq!(diamond.x_extent_in_slab(3.0, 4.0), None);
    }

    #[test]
    fn unit_square_occupies_all_cells() {
        let g = Grid {
            origin: [0.0, 0.0],
            cell: 0.125,
            cols: 8,
            rows: 8,
        };
        let bits = g.occupancy([&ConvexPolygon::rect(0.0, 0.0, 1.0, 1.0)]);
        assert_eq!(bits.iter().filter(|b| **b).count(), 64);
        let small = ConvexPolygon::rect(0.1, 0.1, 0.2, 0.2);
        assert_eq!(g.occupancy([&small]).iter().filter(|b| **b).count(), 4);
    }

    #[test]
    fn min_width_of_rectangle() {
        assert!((ConvexPolygon::rect(0.0, 0.0, 0.5, 0.1).min_width() - 0.1).abs() < 1e-15);
    }
}
