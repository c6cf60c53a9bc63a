use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::IntegratorScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Rbf,
    Polynomial { degree: u32 },
}

impl KernelKind {
    pub const DEFAULT_POLY_DEGREE: u32 = 2;
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Rbf => f.write_str("rbf"),
            KernelKind::Polynomial { degree } => write!(f, "poly{degree}"),
        }
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    /// Accepts `rbf`, `poly` (degree 2) or `polyN`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "rbf" {
            return Ok(KernelKind::Rbf);
        }
        if let Some(rest) = s.strip_prefix("poly") {
            let rest = rest.trim_start_matches("nomial");
            if rest.is_empty() {
                return Ok(KernelKind::Polynomial { degree: Self::DEFAULT_POLY_DEGREE });
            }
            if let Ok(degree) = rest.parse::<u32>() {
                if degree >= 1 {
                    return Ok(KernelKind::Polynomial { degree });
                }
            }
        }
        Err(Error::InvalidArgument(format!("unknown kernel '{s}' (expected rbf, poly or polyN)")))
    }
}

/// Base covariance function plus observation-noise variance.
///
/// RBF: `sv * exp(-1/2 * sum_d (x_d - y_d)^2 / l_d^2)`.
/// Polynomial: `sv * (x . y + offset)^degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// One per input dimension for RBF; empty for the polynomial kernel.
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub offset: f64,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn rbf(lengthscales: Vec<f64>, signal_variance: f64, noise_variance: f64) -> Result<Self> {
        let spec = Self { kind: KernelKind::Rbf, lengthscales, signal_variance, offset: 0.0, noise_variance };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(degree: u32, signal_variance: f64, offset: f64, noise_variance: f64) -> Result<Self> {
        let spec = Self {
            kind: KernelKind::Polynomial { degree },
            lengthscales: Vec::new(),
            signal_variance,
            offset,
            noise_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} must be positive and finite, got {v}")));
        for &l in &self.lengthscales {
            if !(l > 0.0) || !l.is_finite() {
                return bad("lengthscale", l);
            }
        }
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return bad("signal variance", self.signal_variance);
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be >= 0, got {}",
                self.noise_variance
            )));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidArgument("offset must be finite".into()));
        }
        match self.kind {
            KernelKind::Rbf if self.lengthscales.is_empty() => {
                Err(Error::InvalidArgument("RBF kernel needs at least one lengthscale".into()))
            }
            KernelKind::Polynomial { degree: 0 } => {
                Err(Error::InvalidArgument("polynomial degree must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Input dimension fixed by the kernel, if any.
    pub fn input_dim(&self) -> Option<usize> {
        match self.kind {
            KernelKind::Rbf => Some(self.lengthscales.len()),
            KernelKind::Polynomial { .. } => None,
        }
    }

    /// Values encoded as the function's hyperparameters.
    pub fn hyperparameters(&self) -> Vec<f64> {
        let mut v = self.lengthscales.clone();
        v.push(self.signal_variance);
        if let KernelKind::Polynomial { .. } = self.kind {
            v.push(self.offset);
        }
        v.push(self.noise_variance);
        v
    }

    #[inline]
    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let mut r = 0.0;
                for ((a, b), l) in x.iter().zip(y).zip(&self.lengthscales) {
                    let z = (a - b) / l;
                    r += z * z;
                }
                self.signal_variance * (-0.5 * r).exp()
            }
            KernelKind::Polynomial { degree } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                self.signal_variance * (dot + self.offset).powi(degree as i32)
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        match self.input_dim() {
            Some(d) if d != x.len() => Err(Error::DimensionMismatch { expected: d, found: x.len() }),
            _ => Ok(()),
        }
    }
}

/// Base covariance `k(x, y)`.
pub fn base_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    spec.check_input(x)?;
    Ok(spec.eval(x, y))
}

/// One training input for the multistep kernel: the `s` parent vectors at the
/// window's nodes, oldest first.
pub type ParentWindow = Vec<Vec<f64>>;

/// Multistep Gram matrix: entry `(n, m) = b_n^T k(window_n, window_m) b_m`.
///
/// `windows[n]` pairs with `scheme.windows()[n]`. This is the direct definition;
/// fitted models build the same matrix from shared points.
pub fn multistep_gram(spec: &KernelSpec, scheme: &IntegratorScheme, windows: &[ParentWindow]) -> Result<Vec<Vec<f64>>> {
    let s = scheme.order();
    if windows.len() > scheme.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} windows but the scheme has {}",
            windows.len(),
            scheme.len()
        )));
    }
    for w in windows {
        if w.len() != s {
            return Err(Error::WindowLengthMismatch { expected: s, found: w.len() });
        }
        for x in w {
            spec.check_input(x)?;
        }
    }
    let b: Vec<&[f64]> = scheme.windows().iter().map(|w| w.b.as_slice()).collect();
    let m = windows.len();
    let mut gram = vec![vec![0.0; m]; m];
    for n in 0..m {
        for k in n..m {
            let mut acc = 0.0;
            for p in 0..s {
                for q in 0..s {
                    acc += b[n][p] * b[k][q] * spec.eval(&windows[n][p], &windows[k][q]);
                }
            }
            gram[n][k] = acc;
            gram[k][n] = acc;
        }
    }
    Ok(gram)
}
