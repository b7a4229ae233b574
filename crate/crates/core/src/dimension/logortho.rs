//! Pivoted Gram–Schmidt norms computed entirely from logarithms.
//!
//! For a column set C, the residual of column l after projecting out span(C)
//! has norm vol(C ∪ {l}) / vol(C), where vol is the |C|-dimensional volume of
//! the spanned parallelotope. By Cauchy–Binet,
//!
//!   vol(C)² = Σ_S det(M[S, C])²
//!
//! over row subsets S with |S| = |C|. With M = diag(e^r)·B·diag(e^c) each
//! minor factors as e^{Σr_S + Σc_C}·det B[S, C], so volumes are summed in
//! log space and the scales never meet the cancellation-prone core.

use crate::error::{Error, Module, Result};
use crate::geometry::abs_determinant;

use super::target::LogMatrix;

const M: Module = Module::DimensionEngine;
const PIVOT_TIE: f64 = 1e-12;

/// ln|γ_1| ≥ … ≥ ln|γ_d| with the zero-based pivot order.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFrame {
    pub permutation: Vec<usize>,
    pub log_norms: Vec<f64>,
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// All k-subsets of 0..d in lexicographic order.
fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < d - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// ln of the |cols|-dimensional volume spanned by the chosen columns.
fn log_volume(m: &LogMatrix, cols: &[usize], row_sets: &[Vec<usize>]) -> f64 {
    let col_part: f64 = cols.iter().map(|&j| m.col_log[j]).sum();
    let terms: Vec<f64> = row_sets
        .iter()
        .map(|rows| {
            let minor: Vec<Vec<f64>> = cols
                .iter()
                .map(|&j| rows.iter().map(|&i| m.core[j][i]).collect())
                .collect();
            let det = abs_determinant(&minor);
            let row_part: f64 = rows.iter().map(|&i| m.row_log[i]).sum();
            2.0 * (row_part + det.ln())
        })
        .collect();
    col_part + 0.5 * log_sum_exp(&terms)
}

/// Pivoted Gram–Schmidt norms of the columns of `m`, in logs. Pivot ties go
/// to the smallest column index.
pub fn log_pivoted_norms(m: &LogMatrix) -> Result<LogFrame> {
    let d = m.dim();
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    let mut log_norms = Vec::with_capacity(d);
    let mut prev = 0.0;
    for k in 1..=d {
        let row_sets = subsets(d, k);
        let mut best: Option<(usize, f64)> = None;
        for l in (0..d).filter(|l| !chosen.contains(l)) {
            let mut cols = chosen.clone();
            cols.push(l);
            let v = log_volume(m, &cols, &row_sets);
            if best.is_none_or(|(_, b)| v > b + PIVOT_TIE * b.abs().max(1.0)) {
                best = Some((l, v));
            }
        }
        let (l, v) = best.expect("a remaining column");
        if !v.is_finite() {
            return Err(Error::degenerate(
                M,
                format!("column {} is dependent on the others", l + 1),
            ));
        }
        chosen.push(l);
        log_norms.push(v - prev);
        prev = v;
    }
    Ok(LogFrame {
        permutation: chosen,
        log_norms,
    })
}
