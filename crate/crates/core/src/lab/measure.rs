//! The measure µ_n spread uniformly over the full copies inside D, and a
//! sampled check of its ball-mass bound.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::en::{build_e_n, cube_side, EnMode, EnSet, LabOptions};
use crate::beta::Interval;
use crate::dimension::{s_n, LevelData, TargetSpec};
use crate::error::{Error, Module, Result};
use crate::polygon::{ConvexPolygon, Point};

const M: Module = Module::NumericalLab;

/// ε = (s* − t)/2, the default slack for a target exponent t.
pub fn default_epsilon(s_star: f64, t: f64) -> f64 {
    (s_star - t) / 2.0
}

#[derive(Debug, Clone)]
pub struct MuMeasure {
    pub cube: Vec<Interval>,
    pub epsilon: f64,
    pub e: EnSet,
    pub level: LevelData,
    pub betas: Vec<f64>,
    /// Density of each copy: 1 / (area · copy count).
    weights: Vec<f64>,
}

impl MuMeasure {
    /// Each full copy inside D carries mass 1/#copies, uniform over its
    /// (clipped) area.
    pub fn new(spec: &TargetSpec, n: u32, cube: Vec<Interval>, epsilon: f64, opts: LabOptions) -> Result<Self> {
        let e = build_e_n(
            spec,
            n,
            EnMode::FullIn {
                cube: cube.clone(),
                epsilon,
            },
            opts,
        )?;
        if e.is_empty() {
            return Err(Error::NotFound {
                module: M,
                message: format!("no pair of full level-{n} cylinders inside D"),
            });
        }
        let count = e.len() as f64;
        let weights = e
            .copies
            .iter()
            .map(|c| {
                let a = c.polygon.area();
                if a > 0.0 {
                    Ok(1.0 / (a * count))
                } else {
                    Err(Error::degenerate(
                        M,
                        format!("copy at {:?} has no area inside its cylinders", c.corner),
                    ))
                }
            })
            .collect::<Result<_>>()?;
        Ok(MuMeasure {
            cube,
            epsilon,
            level: s_n(spec, n)?,
            betas: spec.system.betas().to_vec(),
            e,
            weights,
        })
    }

    pub fn side(&self) -> f64 {
        cube_side(&self.cube).expect("validated on construction")
    }

    pub fn copy_mass(&self) -> f64 {
        1.0 / self.e.len() as f64
    }
}

/// µ_n of the closed max-norm ball of radius r about `center`.
pub fn mu_ball_mass(m: &MuMeasure, center: Point, r: f64) -> f64 {
    let lo = [center[0] - r, center[1] - r];
    let hi = [center[0] + r, center[1] + r];
    let mass: f64 = m
        .e
        .copies
        .iter()
        .zip(&m.weights)
        .map(|(c, w)| c.polygon.area_in_box(lo, hi) * w)
        .sum();
    mass.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusRegime {
    /// r ≥ |D|.
    AboveCube,
    /// r ≤ |γ_d|.
    BelowShortSide,
    /// max_i β_i^{-n} < r ≤ |D|.
    AboveCylinders,
    /// τ_{k+1} ≤ r < τ_k for consecutive candidate scales.
    BetweenScales,
}

impl RadiusRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            RadiusRegime::AboveCube => "above_cube",
            RadiusRegime::BelowShortSide => "below_short_side",
            RadiusRegime::AboveCylinders => "above_cylinders",
            RadiusRegime::BetweenScales => "between_scales",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallSample {
    pub regime: RadiusRegime,
    pub center: Point,
    pub r: f64,
    pub mass: f64,
    /// µ(B)·|D|^d / r^t.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureCheck {
    pub t: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub worst: BallSample,
    /// Largest ratio within each regime that was sampled.
    pub per_regime: Vec<(RadiusRegime, f64)>,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Uniform point in a convex polygon by fan triangulation.
fn point_in(rng: &mut ChaCha8Rng, poly: &ConvexPolygon) -> Point {
    let v = poly.vertices();
    if v.len() < 3 {
        return v[0];
    }
    let areas: Vec<f64> = (1..v.len() - 1)
        .map(|i| {
            let (a, b, c) = (v[0], v[i], v[i + 1]);
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
        })
        .collect();
    let total: f64 = areas.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut k = areas.len() - 1;
    for (i, a) in areas.iter().enumerate() {
        if pick < *a {
            k = i;
            break;
        }
        pick -= a;
    }
    let (a, b, c) = (v[0], v[k + 1], v[k + 2]);
    let (mut u, mut w) = (rng.random::<f64>(), rng.random::<f64>());
    if u + w > 1.0 {
        u = 1.0 - u;
        w = 1.0 - w;
    }
    [
        a[0] + u * (b[0] - a[0]) + w * (c[0] - a[0]),
        a[1] + u * (b[1] - a[1]) + w * (c[1] - a[1]),
    ]
}

/// Radius brackets for each regime that is non-empty at this level.
fn regimes(m: &MuMeasure) -> Vec<(RadiusRegime, Vec<(f64, f64)>)> {
    let side = m.side();
    let n = m.level.n as f64;
    let short = m.level.gamma_log2.last().copied().unwrap_or(0.0).exp2();
    let cyl = m.betas.iter().map(|b| b.powf(-n)).fold(0.0, f64::max);
    let mut out = vec![
        (RadiusRegime::AboveCube, vec![(side, 4.0 * side)]),
        (RadiusRegime::BelowShortSide, vec![(short / 16.0, short)]),
    ];
    if cyl < side {
        out.push((RadiusRegime::AboveCylinders, vec![(cyl, side)]));
    }
    let taus: Vec<f64> = m.level.candidates_log2.iter().map(|l| l.exp2()).collect();
    let gaps: Vec<(f64, f64)> = taus
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b > a)
        .collect();
    if !gaps.is_empty() {
        out.push((RadiusRegime::BetweenScales, gaps));
    }
    out
}

/// Samples `samples` balls centred in E_n ∩ D with log-uniform radii drawn
/// round-robin from the regimes and returns the largest µ(B)·|D|^d / r^t.
pub fn verify_measure_bound(m: &MuMeasure, t: f64, samples: usize, seed: u64) -> Result<MeasureCheck> {
    if !(t >= 0.0) {
        return Err(Error::domain(M, format!("t must be ≥ 0, got {t}")));
    }
    if t >= m.level.s_n - m.epsilon {
        return Err(Error::domain(
            M,
            format!("t = {t} must be below s_n − ε = {}", m.level.s_n - m.epsilon),
        ));
    }
    if samples == 0 {
        return Err(Error::domain(M, "need at least one sample"));
    }
    let regs = regimes(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balls: Vec<(RadiusRegime, Point, f64)> = (0..samples)
        .map(|i| {
            let (regime, brackets) = &regs[i % regs.len()];
            let (lo, hi) = brackets[rng.random_range(0..brackets.len())];
            let r = log_uniform(&mut rng, lo, hi);
            let copy = &m.e.copies[rng.random_range(0..m.e.len())];
            (*regime, point_in(&mut rng, &copy.polygon), r)
        })
        .collect();
    let scale = m.side().powi(m.cube.len() as i32);
    let results: Vec<BallSample> = balls
        .par_iter()
        .map(|&(regime, center, r)| {
            let mass = mu_ball_mass(m, center, r);
            BallSample {
                regime,
                center,
                r,
                mass,
                ratio: mass * scale / r.powf(t),
            }
        })
        .collect();
    let worst = *results
        .iter()
        .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        .expect("at least one sample");
    let per_regime = regs
        .iter()
        .map(|(reg, _)| {
            let best = results
                .iter()
                .filter(|s| s.regime == *reg)
                .map(|s| s.ratio)
                .fold(0.0, f64::max);
            (*reg, best)
        })
        .collect();
    Ok(MeasureCheck {
        t,
        samples,
        max_ratio: worst.ratio,
        worst,
        per_regime,
    })
}
