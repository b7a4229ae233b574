use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Module, Result};
use crate::geometry::pivoted_orthogonalize;

use super::logortho::log_pivoted_norms;
use super::target::TargetSpec;

const M: Module = Module::DimensionEngine;
/// Relative tolerance for merging candidate scales (absolute in ln τ).
const DEDUP_TOL: f64 = 1e-12;

pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Everything computed at one level. Scales are reported as base-2 logs
/// because they leave double range long before the formula does.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelData {
    pub n: u32,
    /// log2|γ_i|, non-increasing.
    pub gamma_log2: Vec<f64>,
    /// log2 τ for the deduplicated candidates, ascending.
    pub candidates_log2: Vec<f64>,
    pub s_n: f64,
    pub argmin_tau_log2: f64,
}

impl LevelData {
    pub fn gamma_norms(&self) -> Vec<f64> {
        self.gamma_log2.iter().map(|l| l.exp2()).collect()
    }
}

/// Value of the s_n objective at scale τ = e^{-big_l}.
///
/// `contraction_logs[i]` is n·ln β_i and `gamma_neg_logs[i]` is −ln|γ_i|.
pub fn objective(contraction_logs: &[f64], gamma_neg_logs: &[f64], big_l: f64) -> f64 {
    let tol = DEDUP_TOL * big_l.max(1.0);
    let mut v = 0.0;
    for &c in contraction_logs {
        // β_i^{-n} ≤ τ  ⇔  n ln β_i ≥ L
        v += if c >= big_l - tol { 1.0 } else { c / big_l };
    }
    for &g in gamma_neg_logs {
        // |γ_i| ≥ τ  ⇔  −ln|γ_i| ≤ L
        if g <= big_l + tol {
            v += 1.0 - g / big_l;
        }
    }
    v
}

/// Minimizes the objective over the candidate set; returns (s_n, argmin L,
/// sorted deduplicated L values). Ties go to the smaller τ, i.e. larger L.
pub fn minimize_over_candidates(contraction_logs: &[f64], gamma_neg_logs: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let d = contraction_logs.len();
    let mut ls: Vec<f64> = contraction_logs.iter().chain(gamma_neg_logs).copied().collect();
    if let Some(bad) = ls.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(Error::domain(
            M,
            format!("candidate scale e^{} is not below 1; P_n is too large", -bad),
        ));
    }
    // descending L is ascending τ
    ls.sort_by(|a, b| b.total_cmp(a));
    ls.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL * b.max(1.0));
    let mut best: Option<(f64, f64)> = None;
    for &l in &ls {
        let v = objective(contraction_logs, gamma_neg_logs, l);
        if best.is_none_or(|(bv, _)| v < bv - DEDUP_TOL) {
            best = Some((v, l));
        }
    }
    let (s, l) = best.expect("non-empty candidates");
    if s > d as f64 + 1e-9 {
        return Err(Error::consistency(M, format!("s_n = {s} exceeds the dimension {d}")));
    }
    Ok((s, l, ls))
}

fn level_from_logs(n: u32, contraction_logs: &[f64], gamma_logs: &[f64]) -> Result<LevelData> {
    let neg: Vec<f64> = gamma_logs.iter().map(|g| -g).collect();
    let (s_n, l, ls) = minimize_over_candidates(contraction_logs, &neg)?;
    let to_log2 = std::f64::consts::LOG2_E;
    Ok(LevelData {
        n,
        gamma_log2: gamma_logs.iter().map(|g| g * to_log2).collect(),
        candidates_log2: ls.iter().map(|l| -l * to_log2).collect(),
        s_n,
        argmin_tau_log2: -l * to_log2,
    })
}

/// ln|γ_i^{(n)}|, non-increasing, from the factored log form of f^n P_n.
pub fn log_gamma_magnitudes(spec: &TargetSpec, n: u32) -> Result<Vec<f64>> {
    Ok(log_pivoted_norms(&spec.contracted_log(n)?)?.log_norms)
}

/// |γ_i^{(n)}|; errors if any of them is below double range.
pub fn gamma_magnitudes(spec: &TargetSpec, n: u32) -> Result<Vec<f64>> {
    let logs = log_gamma_magnitudes(spec, n)?;
    let norms: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    if norms.iter().any(|g| !g.is_normal()) {
        return Err(Error::Underflow {
            module: M,
            message: format!("|γ| at n={n} is below double range; use log_gamma_magnitudes"),
        });
    }
    Ok(norms)
}

fn contraction_logs(spec: &TargetSpec, n: u32) -> Vec<f64> {
    spec.system.log_betas().iter().map(|lb| n as f64 * lb).collect()
}

/// s_n via the log-domain frame.
pub fn s_n(spec: &TargetSpec, n: u32) -> Result<LevelData> {
    level_from_logs(n, &contraction_logs(spec, n), &log_gamma_magnitudes(spec, n)?)
}

/// s_n via f^n P_n in doubles and direct pivoted Gram–Schmidt. Only valid
/// while everything stays in double range; used as a cross-check.
pub fn s_n_direct(spec: &TargetSpec, n: u32) -> Result<LevelData> {
    let frame = pivoted_orthogonalize(&spec.contracted(n)?)?;
    let logs: Vec<f64> = frame.norms.iter().map(|g| g.ln()).collect();
    level_from_logs(n, &contraction_logs(spec, n), &logs)
}

/// s_n over a range of levels with the tail-window maximum as the
/// estimate of the limsup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub levels: Vec<LevelData>,
    /// max of s_n over the last `window` levels.
    pub s_star: f64,
    pub window: usize,
    pub window_min: f64,
    pub window_max: f64,
    pub tolerance: f64,
    /// window_max − window_min < tolerance. A windowed max is not a limsup;
    /// the full series is in `levels`.
    pub converged: bool,
    /// The target set also belongs to the large intersection class of
    /// dimension s_star; this is a consequence of the main theorem and is not
    /// computed here.
    pub large_intersection_by_theorem: bool,
    /// Levels whose P_n sticks out of the unit cube.
    pub warnings: Vec<String>,
}

pub fn s_star(spec: &TargetSpec, n_min: u32, n_max: u32, window: usize, tolerance: f64) -> Result<DimensionReport> {
    if n_min < 1 || n_min > n_max {
        return Err(Error::domain(M, format!("need 1 ≤ n_min ≤ n_max, got {n_min}..{n_max}")));
    }
    let count = (n_max - n_min + 1) as usize;
    if window < 1 || window > count {
        return Err(Error::domain(M, format!("window must lie in [1, {count}], got {window}")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::domain(M, "tolerance must be > 0"));
    }
    let levels: Vec<LevelData> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| s_n(spec, n))
        .collect::<Result<_>>()?;
    let warnings: Vec<String> = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            spec.contained_in_unit_cube(n)
                .map(|ok| (!ok).then(|| format!("P_{n} is not contained in the unit cube")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let tail = &levels[count - window..];
    let window_max = tail.iter().map(|l| l.s_n).fold(f64::NEG_INFINITY, f64::max);
    let window_min = tail.iter().map(|l| l.s_n).fold(f64::INFINITY, f64::min);
    Ok(DimensionReport {
        s_star: window_max,
        window,
        window_min,
        window_max,
        tolerance,
        converged: window_max - window_min < tolerance,
        large_intersection_by_theorem: true,
        warnings,
        levels,
    })
}
