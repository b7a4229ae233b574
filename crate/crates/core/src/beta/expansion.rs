use twofloat::TwoFloat;

use super::{BetaParam, Word};
use crate::error::{Error, Module, Result};
use crate::precision::{Precision, Real};

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::domain(
            Module::BetaDynamics,
            format!("x must lie in [0, 1), got {x}"),
        ));
    }
    Ok(())
}

/// T_β x = βx − ⌊βx⌋.
pub fn transform(beta: BetaParam, x: f64) -> Result<f64> {
    check_unit(x)?;
    let y = beta.value() * x;
    Ok(y - y.floor())
}

/// First `n` digits ε_k = ⌊β T_β^{k−1} x⌋ of the β-expansion of x.
pub fn digits(beta: BetaParam, x: f64, n: usize) -> Result<Word> {
    digits_with(beta, x, n, Precision::Double)
}

pub fn digits_with(beta: BetaParam, x: f64, n: usize, precision: Precision) -> Result<Word> {
    check_unit(x)?;
    if n == 0 {
        return Err(Error::domain(Module::BetaDynamics, "digit count must be ≥ 1"));
    }
    let word = match precision {
        Precision::Double => orbit_digits(beta.value(), x, n),
        Precision::Extended => orbit_digits(beta.extended(), TwoFloat::from(x), n),
    };
    Ok(Word(word))
}

fn orbit_digits<R: Real>(beta: R, x: R, n: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(n);
    let mut x = x;
    for _ in 0..n {
        let y = beta * x;
        let d = y.floor();
        out.push(d.to_f64() as u32);
        x = y - d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> BetaParam {
        BetaParam::golden_ratio()
    }

    #[test]
    fn doubling_map() {
        let b = BetaParam::new(2.0).unwrap();
        assert_eq!(transform(b, 0.625).unwrap(), 0.25);
        assert_eq!(transform(b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn golden_transform_of_half() {
        let v = transform(phi(), 0.5).unwrap();
        assert!((v - 0.809_016_994_4).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        let b = BetaParam::new(2.0).unwrap();
        assert!(transform(b, 1.0).is_err());
        assert!(transform(b, -0.1).is_err());
        assert!(digits(b, 1.5, 3).is_err());
        assert!(digits(b, 0.5, 0).is_err());
    }

    #[test]
    fn binary_digits() {
        let b = BetaParam::new(2.0).unwrap();
        assert_eq!(digits(b, 0.625, 3).unwrap(), Word(vec![1, 0, 1]));
        assert_eq!(digits(b, 0.0, 4).unwrap(), Word(vec![0, 0, 0, 0]));
    }

    #[test]
    fn golden_half_is_periodic() {
        let expected = Word(vec![0, 1, 0, 0, 1, 0]);
        assert_eq!(digits(phi(), 0.5, 6).unwrap(), expected);
        assert_eq!(
            digits_with(phi(), 0.5, 6, Precision::Extended).unwrap(),
            expected
        );
    }

    #[test]
    fn reconstruction_within_beta_pow() {
        for &beta in &[1.3, 1.618, 2.0, 2.5, std::f64::consts::E, 3.0, 7.2] {
            let b = BetaParam::new(beta).unwrap();
            for i in 0..50 {
                let x = (i as f64 * 0.618_033_988_7).fract();
                let n = 20;
                let w = digits(b, x, n).unwrap();
                let recon: f64 = w
                    .digits()
                    .iter()
                    .enumerate()
                    .map(|(k, &e)| e as f64 * beta.powi(-(k as i32 + 1)))
                    .sum();
                assert!(x - recon >= -1e-12 && x - recon < beta.powi(-(n as i32)) + 1e-12);
                assert!(w.digits().iter().all(|&e| e <= b.max_digit()));
            }
        }
    }
}
