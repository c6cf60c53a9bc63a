//! Projected L-BFGS for small box-constrained problems.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOptions {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop once the relative objective decrease stays below this.
    pub ftol: f64,
    /// Stop once the projected gradient's largest component drops below this.
    pub gtol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iter: 200, memory: 7, ftol: 1e-10, gtol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient with components that push against an active bound zeroed.
fn projected_gradient(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(lo.iter().zip(hi))
        .map(|((&xi, &gi), (&l, &h))| {
            if (xi <= l && gi > 0.0) || (xi >= h && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

/// Minimizes `f` over the box `[lo, hi]` starting from `x0`.
///
/// `f` returns the value and gradient, or `None` where the objective is undefined
/// (treated as +inf by the line search). Returns `None` only if `f(x0)` fails.
pub(crate) fn minimize<F>(f: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: LbfgsOptions) -> Option<Minimum>
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let mut x = x0.to_vec();
    project(&mut x, lo, hi);
    let (mut fx, mut g) = f(&x)?;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut small_steps = 0;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let pg = projected_gradient(&x, &g, lo, hi);
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < opts.gtol {
            break;
        }

        // two-loop recursion on the projected gradient
        let mut q = pg.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = hist.back().map(|(s, y, _)| dot(s, y) / dot(y, y)).unwrap_or_else(|| {
            let n = pg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            1.0 / n.max(1.0)
        });
        for v in q.iter_mut() {
            *v *= gamma;
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let pg_free = projected_gradient(&x, &dir.iter().map(|v| -v).collect::<Vec<_>>(), lo, hi);
        for (d, keep) in dir.iter_mut().zip(&pg_free) {
            if *keep == 0.0 {
                *d = 0.0;
            }
        }
        if dot(&dir, &pg) >= 0.0 {
            hist.clear();
            let n = pg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            dir = pg.iter().map(|v| -v / n.max(1.0)).collect();
        }

        // backtracking Armijo search along the projected path
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let mut xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            project(&mut xn, lo, hi);
            let step: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &step);
            if decrease >= 0.0 && step.iter().all(|v| *v == 0.0) {
                break;
            }
            if let Some((fn_, gn)) = f(&xn) {
                if fn_.is_finite() && gn.iter().all(|v| v.is_finite()) && fn_ <= fx + 1e-4 * decrease.min(0.0) {
                    accepted = Some((xn, fn_, gn, step));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, fn_, gn, step)) = accepted else {
            break;
        };

        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&step, &yv);
        if sy > 1e-12 * dot(&yv, &yv).max(1e-300) && sy > 0.0 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((step, yv, 1.0 / sy));
        }

        let rel = (fx - fn_) / fx.abs().max(fn_.abs()).max(1.0);
        x = xn;
        fx = fn_;
        g = gn;
        if rel < opts.ftol {
            small_steps += 1;
            if small_steps >= 3 {
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    Some(Minimum { x, value: fx, iterations })
}
