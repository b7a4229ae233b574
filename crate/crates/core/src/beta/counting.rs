use super::{enumerate_cylinders, BetaParam, CylinderFilter, CylinderNode, EnumOptions, Interval};
use crate::error::{Error, Module, Result};

const REL_SLACK: f64 = 1e-9;

/// δ and n0 for the short-interval full cylinder search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSearchParams {
    pub delta: f64,
    pub n0: u32,
}

impl FullSearchParams {
    pub fn new(delta: f64, n0: u32) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::domain(
                Module::BetaDynamics,
                format!("delta must be > 0, got {delta}"),
            ));
        }
        if n0 < 3 {
            return Err(Error::domain(
                Module::BetaDynamics,
                format!("n0 must be ≥ 3, got {n0}"),
            ));
        }
        Ok(FullSearchParams { delta, n0 })
    }

    /// Whether (β n0)^{1+δ} < β^{n0 δ}.
    pub fn satisfies(&self, beta: BetaParam) -> bool {
        let lb = beta.value().ln();
        (1.0 + self.delta) * (beta.value() * self.n0 as f64).ln() < self.n0 as f64 * self.delta * lb
    }

    /// n0 · β^{-n0}, the length below which a full cylinder is guaranteed.
    pub fn length_bound(&self, beta: BetaParam) -> f64 {
        self.n0 as f64 * beta.value().powf(-(self.n0 as f64))
    }
}

/// Scans n0 = 3..=max_n0 and returns the valid n0 with the largest length
/// bound n0·β^{-n0}, together with that bound.
pub fn lemma_length_window(beta: BetaParam, delta: f64, max_n0: u32) -> Option<(u32, f64)> {
    let mut best: Option<(u32, f64)> = None;
    for n0 in 3..=max_n0 {
        let p = FullSearchParams { delta, n0 };
        if p.satisfies(beta) {
            let len = p.length_bound(beta);
            if best.is_none_or(|(_, b)| len > b) {
                best = Some((n0, len));
            }
        }
    }
    best
}

/// Constant c with #full words of length n ≥ c·β^n for the range β falls in.
///
/// 1 for integer β, (β−2)/(β−1) for β > 2, and ∏(1−β^{-i}) for 1 < β < 2.
/// The product stops once a factor exceeds 1 − 1e−12.
pub fn full_count_constant(beta: BetaParam) -> f64 {
    let b = beta.value();
    if beta.is_integer() {
        1.0
    } else if b > 2.0 {
        (b - 2.0) / (b - 1.0)
    } else {
        let mut prod = 1.0;
        let mut p = 1.0 / b;
        loop {
            let factor = 1.0 - p;
            prod *= factor;
            if factor > 1.0 - 1e-12 {
                break;
            }
            p /= b;
        }
        prod
    }
}

fn count(beta: BetaParam, n: usize, filter: CylinderFilter, opts: EnumOptions) -> Result<u64> {
    let mut total = 0u64;
    for node in enumerate_cylinders(beta, n, filter, opts)? {
        node?;
        total += 1;
    }
    Ok(total)
}

pub fn count_admissible(beta: BetaParam, n: usize) -> Result<u64> {
    count_admissible_with(beta, n, EnumOptions::default())
}

/// Exact #Σ_β^n, checked against β^n ≤ # ≤ β^{n+1}/(β−1).
pub fn count_admissible_with(beta: BetaParam, n: usize, opts: EnumOptions) -> Result<u64> {
    let c = count(beta, n, CylinderFilter::all(), opts)?;
    let b = beta.value();
    let lo = b.powi(n as i32);
    let hi = b.powi(n as i32 + 1) / (b - 1.0);
    let cf = c as f64;
    if cf < lo * (1.0 - REL_SLACK) || cf > hi * (1.0 + REL_SLACK) {
        return Err(Error::consistency(
            Module::BetaDynamics,
            format!("admissible count {c} outside [{lo}, {hi}] for beta={b}, n={n}"),
        ));
    }
    Ok(c)
}

pub fn count_full(beta: BetaParam, n: usize) -> Result<u64> {
    count_full_with(beta, n, EnumOptions::default())
}

/// Exact number of full words of length n, checked against the lower bound
/// for β's range (equality for integer β).
pub fn count_full_with(beta: BetaParam, n: usize, opts: EnumOptions) -> Result<u64> {
    let c = count(beta, n, CylinderFilter::full(), opts)?;
    let b = beta.value();
    let pow = b.powi(n as i32);
    let ok = if beta.is_integer() {
        c as f64 == pow
    } else {
        c as f64 > full_count_constant(beta) * pow
    };
    if !ok {
        return Err(Error::consistency(
            Module::BetaDynamics,
            format!("full count {c} violates the lower bound for beta={b}, n={n}"),
        ));
    }
    Ok(c)
}

fn check_interval(interval: Interval) -> Result<()> {
    if interval.lo < 0.0 || interval.hi > 1.0 || interval.is_empty() {
        return Err(Error::domain(
            Module::BetaDynamics,
            format!(
                "interval must be a non-empty subset of [0, 1), got [{}, {})",
                interval.lo, interval.hi
            ),
        ));
    }
    Ok(())
}

pub fn find_full_in_interval(
    beta: BetaParam,
    interval: Interval,
    params: FullSearchParams,
) -> Result<CylinderNode> {
    find_full_in_interval_with(beta, interval, params, EnumOptions::default())
}

/// First full cylinder inside `interval` with |I|^{1+δ} < β^{-m} ≤ |I|, by
/// increasing level m and then lexicographic order.
///
/// When the parameters satisfy the existence condition and |I| < n0·β^{-n0},
/// a miss is reported as a consistency error; otherwise it is `NotFound`.
pub fn find_full_in_interval_with(
    beta: BetaParam,
    interval: Interval,
    params: FullSearchParams,
    opts: EnumOptions,
) -> Result<CylinderNode> {
    check_interval(interval)?;
    let b = beta.value();
    let len = interval.len();
    let floor_len = len.powf(1.0 + params.delta);

    let mut m = ((-beta.log(len)).floor() as i64 - 1).max(1) as usize;
    while b.powi(-(m as i32)) > len * (1.0 + 1e-12) {
        m += 1;
    }
    while b.powi(-(m as i32)) > floor_len {
        let filter = CylinderFilter::full_within(interval);
        if let Some(node) = enumerate_cylinders(beta, m, filter, opts)?.next() {
            return node;
        }
        m += 1;
    }

    let certified = params.satisfies(beta) && len < params.length_bound(beta);
    let message = format!(
        "no full cylinder inside [{}, {}) with length in ({floor_len}, {len}] for beta={b}",
        interval.lo, interval.hi
    );
    if certified {
        Err(Error::consistency(Module::BetaDynamics, message))
    } else {
        Err(Error::NotFound {
            module: Module::BetaDynamics,
            message,
        })
    }
}

pub fn count_full_in_interval(beta: BetaParam, interval: Interval, n: usize, delta: f64) -> Result<u64> {
    count_full_in_interval_with(beta, interval, n, delta, EnumOptions::default())
}

/// Exact number of full level-n words whose cylinder lies in `interval`.
///
/// Requires n ≥ −(1+δ)·log_β|I|. If some n0 makes the interval short enough
/// for the full-cylinder search to be guaranteed, the count is also checked
/// against c_β·|I|^{1+δ}·β^n.
pub fn count_full_in_interval_with(
    beta: BetaParam,
    interval: Interval,
    n: usize,
    delta: f64,
    opts: EnumOptions,
) -> Result<u64> {
    check_interval(interval)?;
    FullSearchParams::new(delta, 3)?;
    let len = interval.len();
    let min_level = -(1.0 + delta) * beta.log(len);
    if (n as f64) < min_level - 1e-9 {
        return Err(Error::domain(
            Module::BetaDynamics,
            format!("level {n} is below -(1+delta)·log_beta|I| = {min_level}"),
        ));
    }
    let c = count(beta, n, CylinderFilter::full_within(interval), opts)?;
    let certified = lemma_length_window(beta, delta, 4096).is_some_and(|(_, bound)| len < bound);
    if certified {
        let lower = full_count_constant(beta) * len.powf(1.0 + delta) * beta.value().powi(n as i32);
        if (c as f64) < lower * (1.0 - REL_SLACK) {
            return Err(Error::consistency(
                Module::BetaDynamics,
                format!("full count {c} in interval is below the lower bound {lower}"),
            ));
        }
    }
    Ok(c)
}
