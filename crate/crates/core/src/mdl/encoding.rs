//! Code lengths, in bits, for the pieces of a model and its residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalizing constant of the universal integer code.
pub const UNIVERSAL_CONSTANT: f64 = 2.865064;

/// Cost of an explicit "zero" flag (empty parent set, zero-valued parameter).
pub const ZERO_FLAG_BITS: f64 = 1.0;

/// Eigenvalues below this fraction of the largest are encoded as zeros.
pub const EIGEN_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precisions {
    /// Bits per stored initial sample.
    pub r_d: u32,
    /// Bits per rotation angle of the Gram eigenbasis.
    pub r_lambda: u32,
    /// Significant decimal digits kept per real parameter.
    pub p: u32,
}

impl Default for Precisions {
    fn default() -> Self {
        Self { r_d: 32, r_lambda: 32, p: 2 }
    }
}

impl Precisions {
    pub fn validate(&self) -> Result<()> {
        if self.r_d == 0 || self.r_lambda == 0 || self.p == 0 {
            return Err(Error::InvalidArgument(format!("precisions must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Universal code length of a positive integer: `log2*(z) + log2(c0)`, where the
/// iterated logarithm keeps only positive terms.
pub fn ln_universal(z: u64) -> Result<f64> {
    if z == 0 {
        return Err(Error::NonPositiveInteger(z));
    }
    let mut bits = UNIVERSAL_CONSTANT.log2();
    let mut x = (z as f64).log2();
    while x > 0.0 {
        bits += x;
        x = x.log2();
    }
    Ok(bits)
}

/// Universal code length with a flag bit for zero.
pub(crate) fn ln_universal_or_flag(z: u64) -> f64 {
    if z == 0 {
        ZERO_FLAG_BITS
    } else {
        ln_universal(z).expect("positive")
    }
}

/// Cost of the sample count and the first `s` samples of every variable.
pub fn l_global(n: usize, d: usize, s: usize, prec: &Precisions) -> f64 {
    (n.max(1) as f64).log2() + f64::from(prec.r_d) * (d * s) as f64
}

/// Cost of a parent set of size `k` among `d` candidates.
pub fn l_structure(k: usize, d: usize) -> f64 {
    if k == 0 {
        ZERO_FLAG_BITS
    } else {
        ln_universal(k as u64).expect("positive") + k as f64 * (d as f64).log2()
    }
}

/// Smallest integer `rho` with `|theta| * 10^rho >= 10^p`, for `theta != 0`.
pub fn decimal_exponent(theta: f64, p: u32) -> i32 {
    let a = theta.abs();
    let target = 10f64.powi(p as i32);
    let mut rho = (f64::from(p) - a.log10()).ceil() as i32;
    while a * 10f64.powi(rho - 1) >= target {
        rho -= 1;
    }
    while a * 10f64.powi(rho) < target {
        rho += 1;
    }
    rho
}

/// Cost of one real parameter at `p` significant digits.
pub fn l_param(theta: f64, p: u32) -> f64 {
    if theta == 0.0 {
        return ZERO_FLAG_BITS;
    }
    let rho = decimal_exponent(theta, p);
    let mantissa = (theta.abs() * 10f64.powi(rho)).ceil() as u64;
    2.0 + ln_universal_or_flag(rho.unsigned_abs() as u64) + ln_universal_or_flag(mantissa)
}

/// Sum of [`l_param`] over a parameter vector.
pub fn l_params(theta: &[f64], prec: &Precisions) -> Result<f64> {
    if let Some(index) = theta.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteParameter { index });
    }
    Ok(theta.iter().map(|&t| l_param(t, prec.p)).sum())
}

/// Cost of the eigenbasis of an `m x m` Gram matrix: one angle per rotation.
pub fn rotation_bits(m: usize, prec: &Precisions) -> f64 {
    f64::from(prec.r_lambda) * (m * m.saturating_sub(1) / 2) as f64
}

/// Eigenvalues with negligible ones set to exactly zero.
pub fn truncate_eigenvalues(eigenvalues: &[f64]) -> Vec<f64> {
    let top = eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
    eigenvalues.iter().map(|&v| if v > EIGEN_CUTOFF * top { v } else { 0.0 }).collect()
}

/// Gaussian code length of `n_eff` residuals with variance `sigma_sq`. Negative
/// when `sigma_sq < 1 / (2 pi e)`.
pub fn l_residual(sigma_sq: f64, n_eff: usize) -> f64 {
    0.5 * n_eff as f64 * (std::f64::consts::LOG2_E + (2.0 * std::f64::consts::PI * sigma_sq).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_code_small_values() {
        assert!((ln_universal(1).unwrap() - 1.5186).abs() < 1e-4);
        assert!((ln_universal(2).unwrap() - 2.5186).abs() < 1e-4);
        // log2 16 = 4, log2 4 = 2, log2 2 = 1
        assert!((ln_universal(16).unwrap() - (7.0 + UNIVERSAL_CONSTANT.log2())).abs() < 1e-12);
        assert!(matches!(ln_universal(0), Err(Error::NonPositiveInteger(0))));
    }

    #[test]
    fn global_and_structure() {
        let prec = Precisions::default();
        assert!((l_global(100, 4, 1, &prec) - 134.643_856).abs() < 1e-5);
        assert_eq!(l_global(1, 4, 1, &prec), 128.0);
        assert!((l_structure(2, 4) - (ln_universal(2).unwrap() + 4.0)).abs() < 1e-12);
        assert!((l_structure(2, 4) - 6.5186).abs() < 1e-4);
        assert_eq!(l_structure(0, 4), 1.0);
        assert_eq!(l_structure(1, 1), ln_universal(1).unwrap());
    }

    #[test]
    fn param_exponents() {
        assert_eq!(decimal_exponent(0.5, 2), 3);
        assert_eq!(decimal_exponent(100.0, 2), 0);
        assert_eq!(decimal_exponent(99.9, 2), 1);
        assert_eq!(decimal_exponent(12345.0, 2), -2);
        let expected = 2.0 + ln_universal(3).unwrap() + ln_universal(500).unwrap();
        assert!((l_params(&[0.5], &Precisions::default()).unwrap() - expected).abs() < 1e-12);
        assert_eq!(l_params(&[0.0], &Precisions::default()).unwrap(), 1.0);
        assert!(matches!(l_params(&[1.0, f64::NAN], &Precisions::default()), Err(Error::NonFiniteParameter { index: 1 })));
    }

    #[test]
    fn exact_exponent_zero_uses_flag() {
        let expected = 2.0 + 1.0 + ln_universal(100).unwrap();
        assert!((l_param(100.0, 2) - expected).abs() < 1e-12);
    }

    #[test]
    fn rotation_and_residual() {
        let prec = Precisions::default();
        assert_eq!(rotation_bits(1, &prec), 0.0);
        assert_eq!(rotation_bits(10, &prec), 1440.0);
        assert!((l_residual(1.0, 2) - 4.0942).abs() < 1e-4);
        let zero = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);
        assert!(l_residual(zero, 7).abs() < 1e-12);
        assert!((l_residual(0.3, 10) - l_residual(0.15, 10) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_eigenvalues(&[2.0, 1e-11, 0.0, 1e-9]), vec![2.0, 0.0, 0.0, 1e-9]);
    }
}
