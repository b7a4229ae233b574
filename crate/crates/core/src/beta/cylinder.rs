//! Cylinder enumeration by the interval recursion.
//!
//! A node whose image T^n(I) has length t has a child for each digit k with
//! k/β < t; the child's image length is min(βt − k, 1). Words are emitted in
//! lexicographic order by a depth-first walk.

use twofloat::TwoFloat;

use super::{BetaParam, CylinderNode, Interval, Word};
use crate::error::{Error, Module, Result};
use crate::precision::{Precision, Real};

/// Default cap on enumerated nodes.
pub const DEFAULT_NODE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub precision: Precision,
    pub node_cap: u64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            precision: Precision::Double,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CylinderFilter {
    pub full_only: bool,
    /// Keep only nodes whose interval lies inside this one; subtrees that miss it are pruned.
    pub within: Option<Interval>,
}

impl CylinderFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        CylinderFilter {
            full_only: true,
            within: None,
        }
    }

    pub fn full_within(interval: Interval) -> Self {
        CylinderFilter {
            full_only: true,
            within: Some(interval),
        }
    }
}

struct Frame<R> {
    left: R,
    t: R,
    next_digit: u32,
}

pub struct CylinderIter<R: Real> {
    beta: R,
    inv_pow: Vec<R>,
    level: usize,
    max_digit: u32,
    filter: CylinderFilter,
    full_tol: R,
    exist_tol: R,
    stack: Vec<Frame<R>>,
    path: Vec<u32>,
    visited: u64,
    cap: u64,
    done: bool,
}

impl<R: Real> CylinderIter<R> {
    fn new(beta_value: R, max_digit: u32, level: usize, filter: CylinderFilter, opts: EnumOptions) -> Self {
        let one = R::from_f64(1.0);
        let mut inv_pow = Vec::with_capacity(level + 1);
        inv_pow.push(one);
        for j in 1..=level {
            inv_pow.push(inv_pow[j - 1] / beta_value);
        }
        CylinderIter {
            beta: beta_value,
            inv_pow,
            level,
            max_digit,
            filter,
            full_tol: R::from_f64(opts.precision.fullness_tolerance()),
            exist_tol: R::from_f64(opts.precision.existence_tolerance()),
            stack: vec![Frame {
                left: R::from_f64(0.0),
                t: one,
                next_digit: 0,
            }],
            path: Vec::with_capacity(level),
            visited: 0,
            cap: opts.node_cap,
            done: false,
        }
    }
}

impl<R: Real> Iterator for CylinderIter<R> {
    type Item = Result<CylinderNode>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let one = R::from_f64(1.0);
        loop {
            let depth = match self.stack.len() {
                0 => {
                    self.done = true;
                    return None;
                }
                len => len - 1,
            };
            let top = self.stack.last_mut().expect("non-empty stack");
            if top.next_digit > self.max_digit {
                self.stack.pop();
                self.path.pop();
                continue;
            }
            let k = top.next_digit;
            top.next_digit += 1;

            let image = self.beta * top.t - R::from_f64(k as f64);
            if image <= self.exist_tol {
                // larger digits only shrink the image
                top.next_digit = self.max_digit + 1;
                continue;
            }
            let child_t = if image >= one - self.full_tol { one } else { image };
            let scale = self.inv_pow[depth + 1];
            let child_left = top.left + R::from_f64(k as f64) * scale;
            let child_len = child_t * scale;

            if let Some(iv) = self.filter.within {
                if !iv.intersects(child_left.to_f64(), child_len.to_f64()) {
                    continue;
                }
            }

            self.visited += 1;
            if self.visited > self.cap {
                self.done = true;
                return Some(Err(Error::ResourceLimit {
                    module: Module::BetaDynamics,
                    what: "cylinder nodes",
                    requested: self.visited as f64,
                    cap: self.cap as f64,
                }));
            }

            if depth + 1 == self.level {
                let node = CylinderNode {
                    word: Word(self.path.iter().copied().chain(std::iter::once(k)).collect()),
                    left: child_left.to_f64(),
                    image_length: child_t.to_f64(),
                    length: child_len.to_f64(),
                    level: self.level,
                };
                if self.filter.full_only && !node.is_full() {
                    continue;
                }
                if let Some(iv) = self.filter.within {
                    if !iv.contains_interval(node.left, node.length) {
                        continue;
                    }
                }
                return Some(Ok(node));
            }
            self.stack.push(Frame {
                left: child_left,
                t: child_t,
                next_digit: 0,
            });
            self.path.push(k);
        }
    }
}

/// Stream of level-n cylinders in lexicographic word order.
pub enum Cylinders {
    Double(CylinderIter<f64>),
    Extended(CylinderIter<TwoFloat>),
}

impl Iterator for Cylinders {
    type Item = Result<CylinderNode>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            Cylinders::Double(it) => it.next(),
            Cylinders::Extended(it) => it.next(),
        }
    }
}

/// Enumerates every admissible word of length `n` that passes `filter`.
///
/// Without an interval filter the worst-case node count ⌈β⌉^n is checked
/// against the cap before any work. With one, the cap bounds visited nodes.
pub fn enumerate_cylinders(
    beta: BetaParam,
    n: usize,
    filter: CylinderFilter,
    opts: EnumOptions,
) -> Result<Cylinders> {
    if n == 0 {
        return Err(Error::domain(Module::BetaDynamics, "level must be ≥ 1"));
    }
    if filter.within.is_none() {
        let projected = (beta.value().ceil()).powi(n as i32);
        if projected > opts.node_cap as f64 {
            return Err(Error::ResourceLimit {
                module: Module::BetaDynamics,
                what: "cylinder nodes (⌈β⌉^n)",
                requested: projected,
                cap: opts.node_cap as f64,
            });
        }
    }
    let max_digit = beta.max_digit();
    Ok(match opts.precision {
        Precision::Double => {
            Cylinders::Double(CylinderIter::new(beta.value(), max_digit, n, filter, opts))
        }
        Precision::Extended => {
            Cylinders::Extended(CylinderIter::new(beta.extended(), max_digit, n, filter, opts))
        }
    })
}

/// The cylinder of a given word, or `None` if the word is not admissible.
pub fn cylinder_of(beta: BetaParam, word: &Word, precision: Precision) -> Option<CylinderNode> {
    match precision {
        Precision::Double => walk(beta.value(), word, precision),
        Precision::Extended => walk(beta.extended(), word, precision),
    }
}

fn walk<R: Real>(beta: R, word: &Word, precision: Precision) -> Option<CylinderNode> {
    if word.level() == 0 {
        return None;
    }
    let one = R::from_f64(1.0);
    let full_tol = R::from_f64(precision.fullness_tolerance());
    let exist_tol = R::from_f64(precision.existence_tolerance());
    let mut t = one;
    let mut left = R::from_f64(0.0);
    let mut scale = one;
    for &k in word.digits() {
        let image = beta * t - R::from_f64(k as f64);
        if image <= exist_tol {
            return None;
        }
        scale = scale / beta;
        left = left + R::from_f64(k as f64) * scale;
        t = if image >= one - full_tol { one } else { image };
    }
    Some(CylinderNode {
        word: word.clone(),
        left: left.to_f64(),
        image_length: t.to_f64(),
        length: (t * scale).to_f64(),
        level: word.level(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(beta: BetaParam, n: usize, filter: CylinderFilter) -> Vec<CylinderNode> {
        enumerate_cylinders(beta, n, filter, EnumOptions::default())
            .unwrap()
            .collect::<Result<Vec<_>>>()
            .unwrap()
    }

    #[test]
    fn full_shift_level_two() {
        let nodes = collect(BetaParam::new(2.0).unwrap(), 2, CylinderFilter::all());
        let words: Vec<String> = nodes.iter().map(|c| c.word.to_string()).collect();
        assert_eq!(words, ["00", "01", "10", "11"]);
        assert!(nodes.iter().all(|c| c.is_full() && c.length == 0.25));
    }

    #[test]
    fn golden_level_two() {
        let phi = BetaParam::golden_ratio();
        let nodes = collect(phi, 2, CylinderFilter::all());
        let words: Vec<String> = nodes.iter().map(|c| c.word.to_string()).collect();
        assert_eq!(words, ["00", "01", "10"]);
        let fullness: Vec<bool> = nodes.iter().map(CylinderNode::is_full).collect();
        assert_eq!(fullness, [true, false, true]);
        let p = phi.value();
        assert!((nodes[1].length - p.powi(-3)).abs() < 1e-15);
    }

    #[test]
    fn golden_level_three_full() {
        let nodes = collect(BetaParam::golden_ratio(), 3, CylinderFilter::full());
        let words: Vec<String> = nodes.iter().map(|c| c.word.to_string()).collect();
        assert_eq!(words, ["000", "010", "100"]);
    }

    #[test]
    fn extended_matches_double_for_golden() {
        let phi = BetaParam::golden_ratio();
        for n in 1..=14 {
            let d = collect(phi, n, CylinderFilter::all());
            let e: Vec<CylinderNode> =
                enumerate_cylinders(phi, n, CylinderFilter::all(), EnumOptions {
                    precision: Precision::Extended,
                    ..Default::default()
                })
                .unwrap()
                .collect::<Result<Vec<_>>>()
                .unwrap();
            assert_eq!(d.len(), e.len());
            for (a, b) in d.iter().zip(&e) {
                assert_eq!(a.word, b.word);
                assert_eq!(a.is_full(), b.is_full());
            }
        }
    }

    #[test]
    fn cap_refuses_large_enumeration() {
        let err = enumerate_cylinders(
            BetaParam::new(2.0).unwrap(),
            30,
            CylinderFilter::all(),
            EnumOptions::default(),
        );
        assert!(matches!(err, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn visited_cap_applies_with_interval_filter() {
        let it = enumerate_cylinders(
            BetaParam::new(2.0).unwrap(),
            12,
            CylinderFilter::full_within(Interval::unit()),
            EnumOptions {
                node_cap: 100,
                ..Default::default()
            },
        )
        .unwrap();
        let res: Result<Vec<_>> = it.collect();
        assert!(matches!(res, Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn children_partition_parent() {
        for &b in &[1.3, 1.8, 2.5, std::f64::consts::E] {
            let beta = BetaParam::new(b).unwrap();
            let parents = collect(beta, 4, CylinderFilter::all());
            let children = collect(beta, 5, CylinderFilter::all());
            for p in &parents {
                let kids: Vec<&CylinderNode> =
                    children.iter().filter(|c| c.word.digits()[..4] == p.word.digits()[..]).collect();
                assert!(!kids.is_empty());
                let total: f64 = kids.iter().map(|c| c.length).sum();
                assert!((total - p.length).abs() < 1e-12);
                assert!((kids[0].left - p.left).abs() < 1e-15);
                for w in kids.windows(2) {
                    assert!((w[0].right() - w[1].left).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cylinder_of_rejects_inadmissible() {
        let phi = BetaParam::golden_ratio();
        assert!(cylinder_of(phi, &Word(vec![1, 1]), Precision::Double).is_none());
        let c = cylinder_of(phi, &Word(vec![1, 0]), Precision::Double).unwrap();
        assert!(c.is_full());
        assert!(cylinder_of(phi, &Word(vec![]), Precision::Double).is_none());
    }
}
