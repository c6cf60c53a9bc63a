//! Exact Gaussian-process models of one variable's dynamics, observed through a
//! multistep integrator.
//!
//! The training observable for window `n` is the increment
//! `y_n = x[n+s] - x[n+s-1]`, whose prior covariance is the multistep kernel
//! `b_n^T k(window_n, window_m) b_m`. Windows overlap, so the Gram matrix is
//! assembled as `B G B^T` from the point Gram `G` over all `N` samples.

mod kernel;
mod optimize;

pub use kernel::{base_kernel, multistep_gram, KernelKind, KernelSpec, ParentWindow};

use std::cell::Cell;

use faer::linalg::solvers::{DenseSolveCore, Llt, Solve};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrator::{ab_coefficients, IntegratorScheme};
use crate::types::Timeline;
use optimize::{minimize, LbfgsOptions};

/// Jitter added to the diagonal, relative to the target variance.
pub const JITTER_RELATIVE: f64 = 1e-8;
const JITTER_ESCALATIONS: usize = 6;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 5, max_iter: 200, seed: 0 }
    }
}

/// A GP conditioned on one target's increments.
#[derive(Debug, Clone)]
pub struct DynamicsGP {
    kernel: KernelSpec,
    scheme: IntegratorScheme,
    points: Vec<Vec<f64>>,
    targets: Vec<f64>,
    jitter: f64,
    gram: Mat<f64>,
    llt: Option<Llt<f64>>,
    alpha: Vec<f64>,
    /// `B^T alpha`: weight of each sample point in the posterior mean.
    point_weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    log_marginal_likelihood: f64,
    restart_starts: Vec<f64>,
}

impl DynamicsGP {
    /// An unconditioned model: posterior equals the prior.
    pub fn prior(kernel: KernelSpec, order: usize) -> Result<Self> {
        kernel.validate()?;
        if !crate::integrator::SUPPORTED_ORDERS.contains(&order) {
            return Err(Error::OrderUnsupported(order));
        }
        Ok(Self {
            kernel,
            scheme: IntegratorScheme::without_windows(order),
            points: Vec::new(),
            targets: Vec::new(),
            jitter: 0.0,
            gram: Mat::zeros(0, 0),
            llt: None,
            alpha: Vec::new(),
            point_weights: Vec::new(),
            eigenvalues: Vec::new(),
            log_marginal_likelihood: 0.0,
            restart_starts: Vec::new(),
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn scheme(&self) -> &IntegratorScheme {
        &self.scheme
    }

    pub fn order(&self) -> usize {
        self.scheme.order()
    }

    /// Number of training windows `M`.
    pub fn n_windows(&self) -> usize {
        self.targets.len()
    }

    pub fn input_dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Training input windows, oldest point first.
    pub fn input_windows(&self) -> Vec<ParentWindow> {
        let s = self.order();
        (0..self.n_windows()).map(|n| self.points[n..n + s].to_vec()).collect()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Multistep Gram matrix over the training windows, without noise.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let m = self.gram.nrows();
        (0..m).map(|i| (0..m).map(|j| self.gram[(i, j)]).collect()).collect()
    }

    /// Eigenvalues of the Gram matrix, nonincreasing and clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Log marginal likelihood at each restart's initial hyperparameters.
    pub fn restart_start_likelihoods(&self) -> &[f64] {
        &self.restart_starts
    }

    /// Posterior mean at every training window.
    pub fn training_mean(&self) -> Vec<f64> {
        let m = self.n_windows();
        (0..m).map(|i| (0..m).map(|j| self.gram[(i, j)] * self.alpha[j]).sum()).collect()
    }

    fn check_window(&self, window: &[Vec<f64>], weights: &[f64]) -> Result<()> {
        let s = self.order();
        if window.len() != s {
            return Err(Error::WindowLengthMismatch { expected: s, found: window.len() });
        }
        if weights.len() != s {
            return Err(Error::WindowLengthMismatch { expected: s, found: weights.len() });
        }
        let dim = if self.points.is_empty() { self.kernel.input_dim() } else { Some(self.input_dim()) };
        if let Some(d) = dim {
            if let Some(x) = window.iter().find(|x| x.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: x.len() });
            }
        }
        Ok(())
    }

    /// Predictive mean and variance of the increment `weights . F(window)`.
    ///
    /// `weights` are the integrator weights of the test window (for example
    /// `scheme.windows()[n].b`).
    pub fn posterior(&self, window: &[Vec<f64>], weights: &[f64]) -> Result<(f64, f64)> {
        self.check_window(window, weights)?;
        let s = self.order();
        let mut prior = 0.0;
        for p in 0..s {
            for q in 0..s {
                prior += weights[p] * weights[q] * self.kernel.eval(&window[p], &window[q]);
            }
        }
        let Some(llt) = &self.llt else {
            return Ok((0.0, prior.max(0.0)));
        };
        // kernel row against every sample point, then fold with the training weights
        let kx: Vec<f64> = self
            .points
            .iter()
            .map(|xi| (0..s).map(|p| weights[p] * self.kernel.eval(&window[p], xi)).sum())
            .collect();
        let kstar: Vec<f64> = self
            .scheme
            .windows()
            .iter()
            .enumerate()
            .map(|(m, w)| w.b.iter().enumerate().map(|(q, b)| b * kx[m + q]).sum())
            .collect();
        let mean: f64 = kstar.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let rhs = Mat::from_fn(kstar.len(), 1, |i, _| kstar[i]);
        let sol = llt.solve(&rhs);
        let quad: f64 = (0..kstar.len()).map(|i| kstar[i] * sol[(i, 0)]).sum();
        Ok((mean, (prior - quad).max(0.0)))
    }

    /// `sum_j k(z, x_j) (B^T alpha)_j`: the posterior mean of `F` at `z`.
    fn dynamics_mean(&self, z: &[f64]) -> f64 {
        self.points.iter().zip(&self.point_weights).map(|(x, w)| w * self.kernel.eval(z, x)).sum()
    }

    /// Teacher-forced rollout over `timeline`.
    ///
    /// `parents` holds the observed parent columns in training order. If the target
    /// is itself a parent, `self_position` gives its index in `parents`; its window
    /// entries then use the predicted values. The first `s` outputs are `init`.
    pub fn rollout(
        &self,
        timeline: &Timeline,
        parents: &[&[f64]],
        init: &[f64],
        self_position: Option<usize>,
    ) -> Result<Vec<f64>> {
        let s = self.order();
        let n = timeline.len();
        if init.len() != s {
            return Err(Error::WindowLengthMismatch { expected: s, found: init.len() });
        }
        if n < s {
            return Err(Error::TimelineTooShort { len: n, required: s });
        }
        if !self.points.is_empty() && parents.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: parents.len() });
        }
        if let Some(pos) = self_position {
            if pos >= parents.len() {
                return Err(Error::InvalidArgument(format!("self position {pos} out of range")));
            }
        }
        for c in parents {
            if c.len() != n {
                return Err(Error::ShapeMismatch(format!("parent column has {} samples, timeline {}", c.len(), n)));
            }
        }
        let mut out = init.to_vec();
        out.reserve(n - s);
        if n == s {
            return Ok(out);
        }
        let scheme = ab_coefficients(timeline, s)?;
        let mut f_at = Vec::with_capacity(n);
        let mut z = vec![0.0; parents.len()];
        for (k, w) in scheme.windows().iter().enumerate() {
            // dynamics at every node of this window; each node is evaluated once
            while f_at.len() < k + s {
                let i = f_at.len();
                for (zi, c) in z.iter_mut().zip(parents) {
                    *zi = c[i];
                }
                if let Some(pos) = self_position {
                    z[pos] = out[i];
                }
                f_at.push(if self.llt.is_some() { self.dynamics_mean(&z) } else { 0.0 });
            }
            let inc: f64 = w.b.iter().zip(&f_at[k..k + s]).map(|(b, f)| b * f).sum();
            let prev = out[k + s - 1];
            out.push(prev + inc);
        }
        Ok(out)
    }

    /// Conditions on the data with fixed hyperparameters (no optimization).
    pub fn condition(
        parents: &[&[f64]],
        target: &[f64],
        timeline: &Timeline,
        scheme: &IntegratorScheme,
        kernel: KernelSpec,
    ) -> Result<Self> {
        kernel.validate()?;
        let data = Training::new(parents, target, timeline, scheme, kernel.kind)?;
        if let Some(d) = kernel.input_dim() {
            if d != data.dim {
                return Err(Error::DimensionMismatch { expected: d, found: data.dim });
            }
        }
        let theta = data.encode(&kernel);
        let base = JITTER_RELATIVE * data.y_scale;
        for k in 0..=JITTER_ESCALATIONS {
            let jitter = base * 10f64.powi(k as i32);
            if let Ok(model) = data.build(&theta, jitter, Vec::new()) {
                return Ok(model);
            }
        }
        Err(Error::SingularGram)
    }
}

/// Fits a dynamics GP for `target` given its `parents` (column slices over `timeline`).
///
/// Hyperparameters maximize the exact log marginal likelihood over
/// `opts.restarts` log-uniform random starts.
pub fn fit(
    parents: &[&[f64]],
    target: &[f64],
    timeline: &Timeline,
    scheme: &IntegratorScheme,
    kind: KernelKind,
    opts: FitOptions,
) -> Result<DynamicsGP> {
    let data = Training::new(parents, target, timeline, scheme, kind)?;
    let (lo, hi) = data.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.restarts.max(1)).map(|_| data.sample_start(&mut rng)).collect();
    let lbfgs = LbfgsOptions { max_iter: opts.max_iter, ..LbfgsOptions::default() };

    let base = JITTER_RELATIVE * data.y_scale;
    let factorized = Cell::new(false);
    for k in 0..=JITTER_ESCALATIONS {
        let jitter = base * 10f64.powi(k as i32);
        let objective = |theta: &[f64]| {
            let r = data.objective(theta, jitter, true);
            if r.is_some() {
                factorized.set(true);
            }
            r.filter(|(v, g)| v.is_finite() && g.iter().all(|x| x.is_finite()))
        };
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut start_values = Vec::new();
        for x0 in &starts {
            let Some(start) = objective(x0) else { continue };
            start_values.push(-start.0);
            let Some(m) = minimize(&objective, x0, &lo, &hi, lbfgs) else { continue };
            log::trace!("restart converged to nll {} after {} iterations", m.value, m.iterations);
            if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
                best = Some((m.x, m.value));
            }
        }
        if let Some((theta, _)) = best {
            if let Ok(model) = data.build(&theta, jitter, start_values) {
                return Ok(model);
            }
        }
    }
    if factorized.get() {
        Err(Error::OptimizationFailure("every restart produced a non-finite likelihood".into()))
    } else {
        Err(Error::SingularGram)
    }
}

/// Log marginal likelihood of `kernel` on the increments of `target`, with its
/// gradient with respect to the logarithms of [`KernelSpec::hyperparameters`].
///
/// The base jitter is added to the noise variance, as during fitting.
pub fn log_marginal_likelihood(
    parents: &[&[f64]],
    target: &[f64],
    timeline: &Timeline,
    scheme: &IntegratorScheme,
    kernel: &KernelSpec,
) -> Result<(f64, Vec<f64>)> {
    kernel.validate()?;
    let data = Training::new(parents, target, timeline, scheme, kernel.kind)?;
    if let Some(d) = kernel.input_dim() {
        if d != data.dim {
            return Err(Error::DimensionMismatch { expected: d, found: data.dim });
        }
    }
    let theta = data.encode(kernel);
    let (nll, grad) = data.objective(&theta, JITTER_RELATIVE * data.y_scale, true).ok_or(Error::SingularGram)?;
    Ok((-nll, grad.into_iter().map(|g| -g).collect()))
}

/// Training data shared by every likelihood evaluation of one fit.
struct Training<'a> {
    kind: KernelKind,
    scheme: &'a IntegratorScheme,
    points: Vec<Vec<f64>>,
    /// The same samples, one vector per input dimension.
    columns: Vec<Vec<f64>>,
    /// Integrator weights of every window, flattened `M x s`.
    weights: Vec<f64>,
    y: Vec<f64>,
    dim: usize,
    y_scale: f64,
    input_std: Vec<f64>,
    mean_sq_norm: f64,
    mean_step: f64,
}

impl<'a> Training<'a> {
    fn new(
        parents: &[&[f64]],
        target: &[f64],
        timeline: &Timeline,
        scheme: &'a IntegratorScheme,
        kind: KernelKind,
    ) -> Result<Self> {
        let n = timeline.len();
        let s = scheme.order();
        if parents.is_empty() {
            return Err(Error::InvalidArgument("a dynamics GP needs at least one parent".into()));
        }
        if n < s + 2 {
            return Err(Error::TimelineTooShort { len: n, required: s + 2 });
        }
        if target.len() != n || parents.iter().any(|c| c.len() != n) {
            return Err(Error::ShapeMismatch(format!("columns must have {n} samples")));
        }
        if scheme.len() != n - s {
            return Err(Error::ShapeMismatch(format!(
                "scheme has {} windows, timeline needs {}",
                scheme.len(),
                n - s
            )));
        }
        if let KernelKind::Polynomial { degree: 0 } = kind {
            return Err(Error::InvalidArgument("polynomial degree must be >= 1".into()));
        }
        let dim = parents.len();
        let points: Vec<Vec<f64>> = (0..n).map(|i| parents.iter().map(|c| c[i]).collect()).collect();
        let y: Vec<f64> = (s..n).map(|i| target[i] - target[i - 1]).collect();
        let y_var = variance(&y);
        let y_scale = if y_var > 0.0 {
            y_var
        } else {
            let ms = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
            if ms > 0.0 { ms } else { 1.0 }
        };
        let input_std = parents
            .iter()
            .map(|c| {
                let sd = variance(c).sqrt();
                if sd > 0.0 { sd } else { c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0) }
            })
            .collect();
        let mean_sq_norm = (points.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / n as f64).max(1e-6);
        Ok(Self {
            kind,
            scheme,
            points,
            columns: parents.iter().map(|c| c.to_vec()).collect(),
            weights: scheme.windows().iter().flat_map(|w| w.b.iter().copied()).collect(),
            y,
            dim,
            y_scale,
            input_std,
            mean_sq_norm,
            mean_step: timeline.mean_step(),
        })
    }

    fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Typical signal variance of `F` implied by the increments' spread.
    fn signal_scale(&self) -> f64 {
        let per_step = self.y_scale / (self.mean_step * self.mean_step);
        match self.kind {
            KernelKind::Rbf => per_step,
            KernelKind::Polynomial { degree } => per_step / (2.0 * self.mean_sq_norm).powi(degree as i32),
        }
    }

    /// Log-space parameter layout: RBF `[ln l_1.., ln sv, ln noise]`,
    /// polynomial `[ln sv, ln offset, ln noise]`.
    fn decode(&self, theta: &[f64]) -> KernelSpec {
        match self.kind {
            KernelKind::Rbf => KernelSpec {
                kind: self.kind,
                lengthscales: theta[..self.dim].iter().map(|v| v.exp()).collect(),
                signal_variance: theta[self.dim].exp(),
                offset: 0.0,
                noise_variance: theta[self.dim + 1].exp(),
            },
            KernelKind::Polynomial { .. } => KernelSpec {
                kind: self.kind,
                lengthscales: Vec::new(),
                signal_variance: theta[0].exp(),
                offset: theta[1].exp(),
                noise_variance: theta[2].exp(),
            },
        }
    }

    /// Inverse of [`Self::decode`]; zero noise or offset maps to a tiny positive value.
    fn encode(&self, k: &KernelSpec) -> Vec<f64> {
        let ln = |v: f64| v.max(1e-300).ln();
        let mut t: Vec<f64> = k.lengthscales.iter().map(|v| ln(*v)).collect();
        t.push(ln(k.signal_variance));
        if let KernelKind::Polynomial { .. } = self.kind {
            t.push(ln(k.offset));
        }
        t.push(ln(k.noise_variance));
        t
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        let mut push = |center: f64, down: f64, up: f64| {
            lo.push((center * down).ln());
            hi.push((center * up).ln());
        };
        if let KernelKind::Rbf = self.kind {
            for &sd in &self.input_std {
                push(sd, 1e-3, 1e3);
            }
        }
        push(self.signal_scale(), 1e-8, 1e6);
        if let KernelKind::Polynomial { .. } = self.kind {
            push(self.mean_sq_norm, 1e-6, 1e6);
        }
        push(self.y_scale, 1e-10, 10.0);
        (lo, hi)
    }

    fn sample_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut log_uniform = |center: f64, lo: f64, hi: f64| center.ln() + rng.random_range(lo.ln()..hi.ln());
        let mut t = Vec::new();
        if let KernelKind::Rbf = self.kind {
            for &sd in &self.input_std {
                t.push(log_uniform(sd, 0.1, 10.0));
            }
        }
        t.push(log_uniform(self.signal_scale(), 0.1, 10.0));
        if let KernelKind::Polynomial { .. } = self.kind {
            t.push(log_uniform(self.mean_sq_norm, 0.1, 10.0));
        }
        t.push(log_uniform(self.y_scale, 1e-6, 1e-1));
        t
    }

    /// Point Gram `G_ij = k(x_i, x_j)`, row-major.
    fn point_gram(&self, k: &KernelSpec) -> Vec<f64> {
        let n = self.n_points();
        let mut g = vec![0.0; n * n];
        match k.kind {
            KernelKind::Rbf => {
                let scaled: Vec<Vec<f64>> = self
                    .columns
                    .iter()
                    .zip(&k.lengthscales)
                    .map(|(c, l)| c.iter().map(|v| v / l).collect())
                    .collect();
                for i in 0..n {
                    let row = &mut g[i * n..(i + 1) * n];
                    for col in &scaled {
                        let xi = col[i];
                        for (r, xj) in row.iter_mut().zip(col) {
                            *r += (xi - xj) * (xi - xj);
                        }
                    }
                    for r in row.iter_mut() {
                        *r = k.signal_variance * (-0.5 * *r).exp();
                    }
                }
            }
            KernelKind::Polynomial { .. } => {
                for i in 0..n {
                    for j in i..n {
                        let v = k.eval(&self.points[i], &self.points[j]);
                        g[i * n + j] = v;
                        g[j * n + i] = v;
                    }
                }
            }
        }
        g
    }

    /// `B G B^T`.
    fn window_gram(&self, g: &[f64]) -> Mat<f64> {
        let n = self.n_points();
        let windows = self.scheme.windows();
        let m = windows.len();
        // column c of G B^T, using the symmetry of G
        let mut h = vec![0.0; m * n];
        for (c, w) in windows.iter().enumerate() {
            let dst = &mut h[c * n..(c + 1) * n];
            for (q, b) in w.b.iter().enumerate() {
                let src = &g[(w.start + q) * n..(w.start + q + 1) * n];
                for (d, v) in dst.iter_mut().zip(src) {
                    *d += b * v;
                }
            }
        }
        let s = self.scheme.order();
        let mut k = Mat::zeros(m, m);
        for c in 0..m {
            let hc = &h[c * n..(c + 1) * n];
            let kc = k.col_as_slice_mut(c);
            for (r, (kr, b)) in kc.iter_mut().zip(self.weights.chunks_exact(s)).enumerate() {
                *kr = b.iter().zip(&hc[r..r + s]).map(|(b, v)| b * v).sum();
            }
        }
        k
    }

    /// `B^T W B` for a symmetric M x M matrix `W`, as a flat N x N buffer.
    fn back_project(&self, w: &Mat<f64>) -> Vec<f64> {
        let n = self.n_points();
        let windows = self.scheme.windows();
        let m = windows.len();
        // t = W B, column-major M x N
        let mut t = vec![0.0; m * n];
        for (c, wc) in windows.iter().enumerate() {
            let src = w.col_as_slice(c);
            for (q, b) in wc.b.iter().enumerate() {
                let j = wc.start + q;
                for (d, v) in t[j * m..(j + 1) * m].iter_mut().zip(src) {
                    *d += b * v;
                }
            }
        }
        let s = self.scheme.order();
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            let tj = &t[j * m..(j + 1) * m];
            let oj = &mut out[j * n..(j + 1) * n];
            for (r, (v, b)) in tj.iter().zip(self.weights.chunks_exact(s)).enumerate() {
                for (o, bp) in oj[r..r + s].iter_mut().zip(b) {
                    *o += bp * v;
                }
            }
        }
        out
    }

    fn factor(&self, gram: &Mat<f64>, noise: f64) -> Option<Llt<f64>> {
        let m = gram.nrows();
        let mut k = gram.clone();
        for i in 0..m {
            k[(i, i)] += noise;
        }
        k.llt(Side::Lower).ok()
    }

    /// Negative log marginal likelihood and its gradient in log-parameter space.
    fn objective(&self, theta: &[f64], jitter: f64, with_grad: bool) -> Option<(f64, Vec<f64>)> {
        let spec = self.decode(theta);
        let g = self.point_gram(&spec);
        let gram = self.window_gram(&g);
        let llt = self.factor(&gram, spec.noise_variance + jitter)?;
        let m = self.y.len();
        let ycol = Mat::from_fn(m, 1, |i, _| self.y[i]);
        let alpha = llt.solve(&ycol);
        let l = llt.L();
        let logdet: f64 = (0..m).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
        let fit: f64 = (0..m).map(|i| self.y[i] * alpha[(i, 0)]).sum();
        let nll = 0.5 * fit + 0.5 * logdet + 0.5 * m as f64 * LN_2PI;
        if !with_grad {
            return Some((nll, Vec::new()));
        }

        // W = K^-1 - alpha alpha^T; d nll = 1/2 tr(W dK)
        let mut w = llt.inverse();
        let av: Vec<f64> = (0..m).map(|i| alpha[(i, 0)]).collect();
        let mut trace_w = 0.0;
        for c in 0..m {
            let col = w.col_as_slice_mut(c);
            let ac = av[c];
            for (v, ar) in col.iter_mut().zip(&av) {
                *v -= ar * ac;
            }
            trace_w += col[c];
        }
        let wt = self.back_project(&w);
        let n = self.n_points();
        let mut grad = vec![0.0; theta.len()];
        let mut weighted = vec![0.0; n];
        match self.kind {
            KernelKind::Rbf => {
                let mut sv_acc = 0.0;
                let mut len_acc = vec![0.0; self.dim];
                for i in 0..n {
                    let row = i * n..(i + 1) * n;
                    for ((c, wv), gv) in weighted.iter_mut().zip(&wt[row.clone()]).zip(&g[row]) {
                        *c = wv * gv;
                    }
                    sv_acc += weighted.iter().sum::<f64>();
                    for (d, acc) in len_acc.iter_mut().enumerate() {
                        let xs = &self.columns[d];
                        let xi = xs[i];
                        *acc += weighted.iter().zip(xs).map(|(c, xj)| c * (xi - xj) * (xi - xj)).sum::<f64>();
                    }
                }
                for (d, l) in spec.lengthscales.iter().enumerate() {
                    grad[d] = 0.5 * len_acc[d] / (l * l);
                }
                grad[self.dim] = 0.5 * sv_acc;
                grad[self.dim + 1] = 0.5 * spec.noise_variance * trace_w;
            }
            KernelKind::Polynomial { degree } => {
                let mut sv_acc = 0.0;
                let mut off_acc = 0.0;
                for i in 0..n {
                    let row = i * n..(i + 1) * n;
                    sv_acc += wt[row.clone()].iter().zip(&g[row.clone()]).map(|(a, b)| a * b).sum::<f64>();
                    for (j, wij) in wt[row].iter().enumerate() {
                        let dot: f64 = self.points[i].iter().zip(&self.points[j]).map(|(a, b)| a * b).sum();
                        off_acc += wij * (dot + spec.offset).powi(degree as i32 - 1);
                    }
                }
                grad[0] = 0.5 * sv_acc;
                grad[1] = 0.5 * off_acc * spec.signal_variance * degree as f64 * spec.offset;
                grad[2] = 0.5 * spec.noise_variance * trace_w;
            }
        }
        Some((nll, grad))
    }

    fn build(&self, theta: &[f64], jitter: f64, restart_starts: Vec<f64>) -> Result<DynamicsGP> {
        let kernel = self.decode(theta);
        let g = self.point_gram(&kernel);
        let gram = self.window_gram(&g);
        let llt = self.factor(&gram, kernel.noise_variance + jitter).ok_or(Error::SingularGram)?;
        let m = self.y.len();
        let ycol = Mat::from_fn(m, 1, |i, _| self.y[i]);
        let a = llt.solve(&ycol);
        let alpha: Vec<f64> = (0..m).map(|i| a[(i, 0)]).collect();
        let l = llt.L();
        let logdet: f64 = (0..m).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
        let fit: f64 = self.y.iter().zip(&alpha).map(|(y, a)| y * a).sum();
        let lml = -(0.5 * fit + 0.5 * logdet + 0.5 * m as f64 * LN_2PI);

        let mut point_weights = vec![0.0; self.n_points()];
        for (w, a) in self.scheme.windows().iter().zip(&alpha) {
            for (q, b) in w.b.iter().enumerate() {
                point_weights[w.start + q] += b * a;
            }
        }
        let mut eigenvalues = gram
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::OptimizationFailure(format!("eigendecomposition failed: {e:?}")))?;
        eigenvalues.reverse();
        for v in eigenvalues.iter_mut() {
            *v = v.max(0.0);
        }

        Ok(DynamicsGP {
            kernel,
            scheme: self.scheme.clone(),
            points: self.points.clone(),
            targets: self.y.clone(),
            jitter,
            gram,
            llt: Some(llt),
            alpha,
            point_weights,
            eigenvalues,
            log_marginal_likelihood: lml,
            restart_starts,
        })
    }
}

fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
}
