//! Parallelepipeds, the diagonal contraction, and pivoted Gram–Schmidt with
//! the bounding box it induces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Module, Result};

const M: Module = Module::ParallelepipedGeometry;

/// Relative residual below which a column counts as linearly dependent.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Relative slack for pivot ties and the volume identity.
const PIVOT_TIE: f64 = 1e-12;
const VOLUME_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// {origin + x_1α_1 + … + x_dα_d : x ∈ [0,1]^d}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParallelepiped", into = "RawParallelepiped")]
pub struct Parallelepiped {
    origin: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParallelepiped {
    origin: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl TryFrom<RawParallelepiped> for Parallelepiped {
    type Error = Error;

    fn try_from(raw: RawParallelepiped) -> Result<Self> {
        Parallelepiped::new(raw.origin, raw.columns)
    }
}

impl From<Parallelepiped> for RawParallelepiped {
    fn from(p: Parallelepiped) -> Self {
        RawParallelepiped {
            origin: p.origin,
            columns: p.columns,
        }
    }
}

impl Parallelepiped {
    /// Validates shapes, finiteness and linear independence of the columns.
    pub fn new(origin: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self::unchecked(origin, columns)?;
        pivoted_orthogonalize(&p)?;
        Ok(p)
    }

    /// Shape checks only.
    pub(crate) fn unchecked(origin: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = origin.len();
        if d == 0 {
            return Err(Error::domain(M, "dimension must be ≥ 1"));
        }
        if columns.len() != d || columns.iter().any(|c| c.len() != d) {
            return Err(Error::domain(
                M,
                format!("expected {d} columns of length {d}"),
            ));
        }
        if origin.iter().chain(columns.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::domain(M, "coordinates must be finite"));
        }
        Ok(Parallelepiped { origin, columns })
    }

    pub fn unit_cube(d: usize) -> Self {
        let columns = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Parallelepiped {
            origin: vec![0.0; d],
            columns,
        }
    }

    /// Axis-aligned box with the given side lengths.
    pub fn axis_box(origin: Vec<f64>, sides: &[f64]) -> Result<Self> {
        let d = sides.len();
        let columns = (0..d)
            .map(|i| (0..d).map(|j| if i == j { sides[i] } else { 0.0 }).collect())
            .collect();
        Self::new(origin, columns)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn with_origin(mut self, origin: Vec<f64>) -> Result<Self> {
        if origin.len() != self.dim() {
            return Err(Error::domain(M, "origin has the wrong dimension"));
        }
        self.origin = origin;
        Ok(self)
    }

    /// All 2^d vertices, indexed by the bit pattern of the coefficient vector.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let mut v = self.origin.clone();
                for (j, col) in self.columns.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        for (vi, ci) in v.iter_mut().zip(col) {
                            *vi += ci;
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// Coordinate-wise bounding box as (min corner, max corner).
    pub fn aabb(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = self.origin.clone();
        let mut hi = self.origin.clone();
        for col in &self.columns {
            for i in 0..d {
                if col[i] < 0.0 {
                    lo[i] += col[i];
                } else {
                    hi[i] += col[i];
                }
            }
        }
        (lo, hi)
    }
}

/// Bases (β_1, …, β_d) of the product map and its contraction f = diag(β_i^{-1}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BetaSystem {
    betas: Vec<f64>,
}

impl TryFrom<Vec<f64>> for BetaSystem {
    type Error = Error;

    fn try_from(betas: Vec<f64>) -> Result<Self> {
        BetaSystem::new(betas)
    }
}

impl From<BetaSystem> for Vec<f64> {
    fn from(s: BetaSystem) -> Self {
        s.betas
    }
}

impl BetaSystem {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::domain(M, "need at least one beta"));
        }
        if let Some(b) = betas.iter().find(|b| !(b.is_finite() && **b > 1.0)) {
            return Err(Error::domain(M, format!("every beta must be > 1, got {b}")));
        }
        Ok(BetaSystem { betas })
    }

    pub fn dim(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// ln β_i.
    pub fn log_betas(&self) -> Vec<f64> {
        self.betas.iter().map(|b| b.ln()).collect()
    }

    /// Diagonal of f^n.
    pub fn contraction(&self, n: u32) -> Vec<f64> {
        self.betas.iter().map(|b| b.powf(-(n as f64))).collect()
    }
}

/// Output of pivoted Gram–Schmidt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthoFrame {
    /// Zero-based pivot order (i_1, …, i_d).
    pub permutation: Vec<usize>,
    pub gammas: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Row-major upper-triangular U with unit diagonal: α_{i_k} = Σ_j γ_j U[j][k].
    pub u: Vec<Vec<f64>>,
}

impl OrthoFrame {
    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |γ_i·γ_j| / (|γ_i||γ_j|) over i ≠ j.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                let c = dot(&self.gammas[i], &self.gammas[j]) / (self.norms[i] * self.norms[j]);
                worst = worst.max(c.abs());
            }
        }
        worst
    }

    /// Largest relative error of α_{i_k} − Σ_j γ_j U[j][k] over all k.
    pub fn reconstruction_error(&self, p: &Parallelepiped) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for k in 0..d {
            let alpha = &p.columns[self.permutation[k]];
            let scale = norm(alpha);
            for i in 0..d {
                let r: f64 = (0..=k).map(|j| self.gammas[j][i] * self.u[j][k]).sum();
                worst = worst.max((r - alpha[i]).abs() / scale);
            }
        }
        worst
    }
}

/// Classical Gram–Schmidt where step k takes the remaining column with the
/// largest residual (ties to the smallest index).
///
/// For d > 4 every residual gets a second projection pass; its coefficients
/// are folded into U so the factorization stays exact.
pub fn pivoted_orthogonalize(p: &Parallelepiped) -> Result<OrthoFrame> {
    let d = p.dim();
    let reorth = d > 4;
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut permutation = Vec::with_capacity(d);
    let mut gammas: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut norms: Vec<f64> = Vec::with_capacity(d);
    let mut u = vec![vec![0.0; d]; d];

    for k in 0..d {
        let mut best: Option<(usize, Vec<f64>, Vec<f64>, f64)> = None;
        for (pos, &l) in remaining.iter().enumerate() {
            let (res, coeffs) = residual(&p.columns[l], &gammas, reorth);
            let r = norm(&res);
            let better = match &best {
                None => true,
                Some((_, _, _, br)) => r > br * (1.0 + PIVOT_TIE),
            };
            if better {
                best = Some((pos, res, coeffs, r));
            }
        }
        let (pos, gamma, coeffs, r) = best.expect("remaining columns");
        let l = remaining.remove(pos);
        let alpha_norm = norm(&p.columns[l]);
        if !(r >= DEGENERACY_TOL * alpha_norm) || alpha_norm == 0.0 {
            return Err(Error::degenerate(
                M,
                format!("column {} is dependent on the others (residual {r:e})", l + 1),
            ));
        }
        for (j, c) in coeffs.into_iter().enumerate() {
            u[j][k] = c;
        }
        u[k][k] = 1.0;
        permutation.push(l);
        gammas.push(gamma);
        norms.push(r);
    }

    Ok(OrthoFrame {
        permutation,
        gammas,
        norms,
        u,
    })
}

/// α − Σ_j (α·γ_j)/(γ_j·γ_j) γ_j, with the projection coefficients.
fn residual(alpha: &[f64], gammas: &[Vec<f64>], reorth: bool) -> (Vec<f64>, Vec<f64>) {
    let mut coeffs: Vec<f64> = gammas.iter().map(|g| dot(alpha, g) / dot(g, g)).collect();
    let mut res = alpha.to_vec();
    for (g, c) in gammas.iter().zip(&coeffs) {
        for (ri, gi) in res.iter_mut().zip(g) {
            *ri -= c * gi;
        }
    }
    if reorth {
        let extra: Vec<f64> = gammas.iter().map(|g| dot(&res, g) / dot(g, g)).collect();
        for ((g, c), e) in gammas.iter().zip(coeffs.iter_mut()).zip(&extra) {
            for (ri, gi) in res.iter_mut().zip(g) {
                *ri -= e * gi;
            }
            *c += e;
        }
    }
    (res, coeffs)
}

/// A box given by centre, orthonormal axes and half-extents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperrectangle {
    pub center: Vec<f64>,
    pub axes: Vec<Vec<f64>>,
    pub half_extents: Vec<f64>,
}

impl Hyperrectangle {
    pub fn contains(&self, x: &[f64], rel_tol: f64) -> bool {
        let diff: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.axes
            .iter()
            .zip(&self.half_extents)
            .all(|(axis, h)| dot(&diff, axis).abs() <= h * (1.0 + rel_tol))
    }

    pub fn volume(&self) -> f64 {
        self.half_extents.iter().map(|h| 2.0 * h).product()
    }

    /// Side lengths sorted non-increasing.
    pub fn sorted_sides(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.half_extents.iter().map(|h| 2.0 * h).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// {origin + Σ x_iγ_i : x ∈ [−2^d, 2^d]^d}.
pub fn bounding_hyperrectangle(frame: &OrthoFrame, origin: &[f64]) -> Hyperrectangle {
    let scale = 2f64.powi(frame.dim() as i32);
    Hyperrectangle {
        center: origin.to_vec(),
        axes: frame
            .gammas
            .iter()
            .zip(&frame.norms)
            .map(|(g, n)| g.iter().map(|v| v / n).collect())
            .collect(),
        half_extents: frame.norms.iter().map(|n| scale * n).collect(),
    }
}

/// |det| by LU with partial pivoting.
pub fn abs_determinant(columns: &[Vec<f64>]) -> f64 {
    let d = columns.len();
    // rows of the transpose have the same determinant
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut det = 1.0;
    for k in 0..d {
        let piv = (k..d)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .expect("non-empty");
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        a.swap(k, piv);
        det *= a[k][k];
        for i in k + 1..d {
            let f = a[i][k] / a[k][k];
            for j in k..d {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det.abs()
}

/// |det(α_1, …, α_d)|, cross-checked against ∏|γ_i| and 2^{-d(d+1)}·vol(R).
pub fn volume(p: &Parallelepiped) -> Result<f64> {
    let frame = pivoted_orthogonalize(p)?;
    let det = abs_determinant(&p.columns);
    let prod: f64 = frame.norms.iter().product();
    let d = p.dim() as i32;
    let boxed = 2f64.powi(-d * (d + 1)) * bounding_hyperrectangle(&frame, &p.origin).volume();
    for (what, v) in [("product of residual norms", prod), ("scaled box volume", boxed)] {
        if (v - det).abs() > VOLUME_TOL * det {
            return Err(Error::consistency(
                M,
                format!("determinant {det} disagrees with {what} {v}"),
            ));
        }
    }
    Ok(det)
}

/// f^n applied to origin and columns.
pub fn scale_by_f(sys: &BetaSystem, p: &Parallelepiped, n: u32) -> Result<Parallelepiped> {
    if sys.dim() != p.dim() {
        return Err(Error::domain(
            M,
            format!("system has dimension {}, parallelepiped {}", sys.dim(), p.dim()),
        ));
    }
    let factors = sys.contraction(n);
    let underflow = |v: f64, f: f64| {
        let r = v * f;
        (v != 0.0 && (r == 0.0 || !r.is_normal()), r)
    };
    if factors.iter().any(|f| !f.is_normal()) {
        return Err(Error::Underflow {
            module: M,
            message: format!("β_i^-{n} is below double range"),
        });
    }
    let mut origin = Vec::with_capacity(p.dim());
    for (v, f) in p.origin.iter().zip(&factors) {
        let (bad, r) = underflow(*v, *f);
        if bad {
            return Err(Error::Underflow {
                module: M,
                message: format!("origin underflows at n={n}"),
            });
        }
        origin.push(r);
    }
    let mut columns = Vec::with_capacity(p.dim());
    for col in &p.columns {
        let mut c = Vec::with_capacity(p.dim());
        for (v, f) in col.iter().zip(&factors) {
            let (bad, r) = underflow(*v, *f);
            if bad {
                return Err(Error::Underflow {
                    module: M,
                    message: format!("column entries underflow at n={n}"),
                });
            }
            c.push(r);
        }
        columns.push(c);
    }
    Parallelepiped::new(origin, columns)
}

/// Counterclockwise rotation of the plane, stored as (cos θ, sin θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2 {
    pub cos: f64,
    pub sin: f64,
}

impl Rotation2 {
    /// Values within 1e-15 of zero are snapped to 0 so that θ = π/2 is exact.
    pub fn from_angle(theta: f64) -> Self {
        let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        Rotation2 {
            cos: snap(theta.cos()),
            sin: snap(theta.sin()),
        }
    }

    /// θ = arccos(c) for c ∈ [0, 1], keeping full relative accuracy in sin θ.
    pub fn from_cos(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::domain(M, format!("cosine must lie in [0, 1], got {c}")));
        }
        Ok(Rotation2 {
            cos: c,
            sin: ((1.0 - c) * (1.0 + c)).sqrt(),
        })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        vec![self.cos * v[0] - self.sin * v[1], self.sin * v[0] + self.cos * v[1]]
    }

    /// Rotates the columns; the origin is left for the caller to place.
    pub fn rotate(&self, p: &Parallelepiped) -> Result<Parallelepiped> {
        if p.dim() != 2 {
            return Err(Error::domain(
                M,
                format!("rotation needs dimension 2, got {}", p.dim()),
            ));
        }
        let columns = p.columns.iter().map(|c| self.apply(c)).collect();
        Parallelepiped::new(p.origin.clone(), columns)
    }
}

pub fn rotate2d(theta: f64, p: &Parallelepiped) -> Result<Parallelepiped> {
    Rotation2::from_angle(theta).rotate(p)
}
