//! Variable-step Adams–Bashforth coefficients.
//!
//! Window `n` advances the state from `t[n+s-1]` to `t[n+s]` using the dynamics
//! evaluated at the `s` nodes `t[n], ..., t[n+s-1]`. Its weights are the exact
//! integrals of the Lagrange basis polynomials through those nodes, so the
//! scheme is valid on any strictly increasing grid.

use crate::error::{Error, Result};
use crate::types::Timeline;

/// Weights for one integration window.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorWindow {
    /// Index of the oldest node `n`.
    pub start: usize,
    /// `b[p]` multiplies the dynamics at node `t[n + p]`.
    pub b: Vec<f64>,
    /// Step length `t[n+s] - t[n+s-1]`.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorScheme {
    order: usize,
    windows: Vec<IntegratorWindow>,
}

impl IntegratorScheme {
    pub(crate) fn without_windows(order: usize) -> Self {
        Self { order, windows: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn windows(&self) -> &[IntegratorWindow] {
        &self.windows
    }

    /// Number of windows, `N - s`.
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Left-hand stencil `[0, ..., 0, -1, 1]` of length `s + 1`.
    pub fn a_row(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.order + 1];
        a[self.order - 1] = -1.0;
        a[self.order] = 1.0;
        a
    }
}

pub const SUPPORTED_ORDERS: [usize; 3] = [1, 2, 3];

/// Adams–Bashforth weights of order `s` for every window of `timeline`.
pub fn ab_coefficients(timeline: &Timeline, s: usize) -> Result<IntegratorScheme> {
    if !SUPPORTED_ORDERS.contains(&s) {
        return Err(Error::OrderUnsupported(s));
    }
    let t = timeline.times();
    if t.len() < s + 1 {
        return Err(Error::TimelineTooShort { len: t.len(), required: s + 1 });
    }
    let windows = (0..t.len() - s)
        .map(|n| IntegratorWindow {
            start: n,
            b: window_weights(&t[n..n + s], t[n + s]),
            step: t[n + s] - t[n + s - 1],
        })
        .collect();
    Ok(IntegratorScheme { order: s, windows })
}

/// Integrals over `[nodes.last(), t_next]` of the Lagrange basis through `nodes`.
///
/// Computed in closed form after shifting time so the integration starts at 0,
/// which keeps the polynomial coefficients well scaled.
pub fn window_weights(nodes: &[f64], t_next: f64) -> Vec<f64> {
    let s = nodes.len();
    let origin = nodes[s - 1];
    let h = t_next - origin;
    let tau: Vec<f64> = nodes.iter().map(|t| t - origin).collect();
    (0..s)
        .map(|k| {
            // numerator polynomial prod_{m != k} (u - tau_m), ascending coefficients
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (m, &tm) in tau.iter().enumerate() {
                if m == k {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (p, c) in poly.iter().enumerate() {
                    next[p + 1] += c;
                    next[p] -= c * tm;
                }
                poly = next;
                denom *= tau[k] - tm;
            }
            let integral: f64 = poly
                .iter()
                .enumerate()
                .map(|(p, c)| c * h.powi(p as i32 + 1) / (p as f64 + 1.0))
                .sum();
            integral / denom
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Timeline {
        Timeline::regular(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn classical_weights_on_unit_grid() {
        let cases: [(usize, Vec<f64>); 3] = [
            (1, vec![1.0]),
            (2, vec![-0.5, 1.5]),
            (3, vec![5.0 / 12.0, -16.0 / 12.0, 23.0 / 12.0]),
        ];
        for (s, expected) in cases {
            let scheme = ab_coefficients(&uniform(6), s).unwrap();
            assert_eq!(scheme.len(), 6 - s);
            for w in scheme.windows() {
                for (a, b) in w.b.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-12, "s={s}: {:?}", w.b);
                }
            }
        }
    }

    #[test]
    fn a_row_is_difference_stencil() {
        let scheme = ab_coefficients(&uniform(5), 3).unwrap();
        assert_eq!(scheme.a_row(), vec![0.0, 0.0, -1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_order_and_short_timeline() {
        assert!(matches!(ab_coefficients(&uniform(5), 4), Err(Error::OrderUnsupported(4))));
        assert!(matches!(ab_coefficients(&uniform(5), 0), Err(Error::OrderUnsupported(0))));
        assert!(matches!(
            ab_coefficients(&uniform(3), 3),
            Err(Error::TimelineTooShort { len: 3, required: 4 })
        ));
    }

    #[test]
    fn scaled_grid_scales_weights() {
        let tl = Timeline::regular(2.0, 0.05, 8).unwrap();
        let scheme = ab_coefficients(&tl, 2).unwrap();
        let w = &scheme.windows()[3];
        assert!((w.b[0] + 0.025).abs() < 1e-14);
        assert!((w.b[1] - 0.075).abs() < 1e-14);
        assert_eq!(w.start, 3);
    }
}
