//! Description-length scoring of per-variable dynamics models and whole graphs.

mod encoding;

pub use encoding::{
    decimal_exponent, l_global, l_param, l_params, l_residual, l_structure, ln_universal, rotation_bits,
    truncate_eigenvalues, Precisions, EIGEN_CUTOFF, UNIVERSAL_CONSTANT, ZERO_FLAG_BITS,
};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gp::{self, DynamicsGP, FitOptions, KernelKind};
use crate::integrator::{ab_coefficients, IntegratorScheme};
use crate::types::{CausalGraph, ScoreBreakdown, Trajectory};

pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-12;

/// Everything that determines a score besides the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    pub kernel: KernelKind,
    pub order: usize,
    pub precisions: Precisions,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub sigma_floor: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Rbf,
            order: 3,
            precisions: Precisions::default(),
            restarts: 5,
            max_iter: 200,
            seed: 0,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        self.precisions.validate()?;
        if !crate::integrator::SUPPORTED_ORDERS.contains(&self.order) {
            return Err(Error::OrderUnsupported(self.order));
        }
        if !(self.sigma_floor > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma floor must be positive, got {}", self.sigma_floor)));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("at least one restart is required".into()));
        }
        Ok(())
    }

    /// Fit seed for one local model; independent of evaluation order.
    fn fit_seed(&self, target: usize, parents: &[usize]) -> u64 {
        let mut h = splitmix(self.seed ^ 0x5851_f42d_4c95_7f2d);
        h = splitmix(h ^ target as u64);
        for &p in parents {
            h = splitmix(h ^ (p as u64).wrapping_add(0x100));
        }
        h
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The dynamics model of one local model.
#[derive(Debug, Clone)]
pub enum LocalFit {
    Gp(Box<DynamicsGP>),
    /// Parentless variable: only its mean is stored.
    MeanFallback { mean: f64 },
}

#[derive(Debug, Clone)]
pub struct LocalModel {
    pub target: usize,
    /// Sorted parent indices; may contain `target` itself.
    pub parents: Vec<usize>,
    pub fit: LocalFit,
    pub residual_variance: f64,
    pub breakdown: ScoreBreakdown,
}

impl LocalModel {
    pub fn total_bits(&self) -> f64 {
        self.breakdown.total_bits
    }
}

/// Per-variable constant shared by every local model on the same data: the rotation
/// term, one flag bit per eigenvalue sign, and the variance-free part of the
/// residual code. Subtracting it leaves the reduced score.
pub fn reduction_constant(n: usize, s: usize, prec: &Precisions) -> f64 {
    let m = n.saturating_sub(s);
    rotation_bits(m, prec) + 2.0 * m as f64 + l_residual(1.0, m)
}

/// Function cost `(rotation bits, parameter bits)` of a fitted GP.
pub fn function_cost(gp: &DynamicsGP, prec: &Precisions) -> Result<(f64, f64)> {
    let mut theta = gp.kernel().hyperparameters();
    theta.extend(truncate_eigenvalues(gp.eigenvalues()));
    Ok((rotation_bits(gp.n_windows(), prec), l_params(&theta, prec)?))
}

/// Total bits of a fitted GP's function: rotation term plus encoded parameters.
pub fn l_function(gp: &DynamicsGP, prec: &Precisions) -> Result<f64> {
    function_cost(gp, prec).map(|(r, p)| r + p)
}

fn normalize_parents(traj: &Trajectory, target: usize, parents: &[usize]) -> Result<Vec<usize>> {
    let d = traj.dim();
    if target >= d {
        return Err(Error::InvalidArgument(format!("target {target} out of range for dimension {d}")));
    }
    if let Some(p) = parents.iter().find(|&&p| p >= d) {
        return Err(Error::InvalidArgument(format!("parent {p} out of range for dimension {d}")));
    }
    let mut ps = parents.to_vec();
    ps.sort_unstable();
    ps.dedup();
    Ok(ps)
}

/// Fits and encodes the model of `target` given `parents`.
pub fn score_local(traj: &Trajectory, target: usize, parents: &[usize], config: &ScoreConfig) -> Result<LocalModel> {
    let scheme = ab_coefficients(traj.timeline(), config.order)?;
    score_local_with(traj, &scheme, target, parents, config)
}

fn score_local_with(
    traj: &Trajectory,
    scheme: &IntegratorScheme,
    target: usize,
    parents: &[usize],
    config: &ScoreConfig,
) -> Result<LocalModel> {
    let parents = normalize_parents(traj, target, parents)?;
    let n = traj.n_samples();
    let s = config.order;
    if n < s + 2 {
        return Err(Error::TimelineTooShort { len: n, required: s + 2 });
    }
    let d = traj.dim();
    let prec = &config.precisions;
    let m = n - s;
    let x = traj.column(target);
    let constant = reduction_constant(n, s, prec);

    if parents.is_empty() {
        let mean = x.iter().sum::<f64>() / n as f64;
        let sigma_sq = (x[s..].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64).max(config.sigma_floor);
        let breakdown = ScoreBreakdown::new(
            0.0,
            l_structure(0, d),
            rotation_bits(m, prec),
            l_params(&[mean], prec)? + m as f64 * ZERO_FLAG_BITS,
            l_residual(sigma_sq, m),
            constant,
        );
        return Ok(LocalModel {
            target,
            parents,
            fit: LocalFit::MeanFallback { mean },
            residual_variance: sigma_sq,
            breakdown,
        });
    }

    let cols: Vec<&[f64]> = parents.iter().map(|&p| traj.column(p)).collect();
    let opts = FitOptions { restarts: config.restarts, max_iter: config.max_iter, seed: config.fit_seed(target, &parents) };
    let model = gp::fit(&cols, x, traj.timeline(), scheme, config.kernel, opts)?;
    let self_position = parents.iter().position(|&p| p == target);
    let pred = model.rollout(traj.timeline(), &cols, &x[..s], self_position)?;
    let sigma_sq =
        (pred[s..].iter().zip(&x[s..]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m as f64).max(config.sigma_floor);
    let (rotation, params) = function_cost(&model, prec)?;
    let breakdown = ScoreBreakdown::new(
        0.0,
        l_structure(parents.len(), d),
        rotation,
        params,
        l_residual(sigma_sq, m),
        constant,
    );
    Ok(LocalModel { target, parents, fit: LocalFit::Gp(Box::new(model)), residual_variance: sigma_sq, breakdown })
}

/// Graph score: global cost plus every variable's local model.
pub fn score_total(traj: &Trajectory, graph: &CausalGraph, config: &ScoreConfig) -> Result<(ScoreBreakdown, Vec<LocalModel>)> {
    LocalScorer::new(traj, *config)?.score_graph(graph)
}

/// Bits saved by adding `edge = (i, j)` to the current models (positive is better).
pub fn gain(traj: &Trajectory, current: &[LocalModel], edge: (usize, usize), config: &ScoreConfig) -> Result<f64> {
    let (i, j) = edge;
    let local = current
        .iter()
        .find(|m| m.target == j)
        .ok_or_else(|| Error::InvalidArgument(format!("no current model for variable {j}")))?;
    let mut parents = local.parents.clone();
    parents.push(i);
    let with = score_local(traj, j, &parents, config)?;
    Ok(local.total_bits() - with.total_bits())
}

type CacheKey = (usize, Vec<usize>);

/// Memoizing scorer over one trajectory; safe to share between threads.
pub struct LocalScorer<'a> {
    traj: &'a Trajectory,
    scheme: IntegratorScheme,
    config: ScoreConfig,
    cache: Mutex<HashMap<CacheKey, Arc<LocalModel>>>,
}

impl<'a> LocalScorer<'a> {
    pub fn new(traj: &'a Trajectory, config: ScoreConfig) -> Result<Self> {
        config.validate()?;
        let n = traj.n_samples();
        if n < config.order + 2 {
            return Err(Error::TimelineTooShort { len: n, required: config.order + 2 });
        }
        let scheme = ab_coefficients(traj.timeline(), config.order)?;
        Ok(Self { traj, scheme, config, cache: Mutex::new(HashMap::new()) })
    }

    pub fn trajectory(&self) -> &Trajectory {
        self.traj
    }

    pub fn config(&self) -> &ScoreConfig {
        &self.config
    }

    /// Number of distinct local models fitted so far.
    pub fn fitted(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }

    pub fn global_bits(&self) -> f64 {
        l_global(self.traj.n_samples(), self.traj.dim(), self.config.order, &self.config.precisions)
    }

    /// Constant subtracted from a whole-graph total to get its reduced score.
    pub fn graph_constant(&self) -> f64 {
        self.traj.dim() as f64 * reduction_constant(self.traj.n_samples(), self.config.order, &self.config.precisions)
    }

    pub fn local(&self, target: usize, parents: &[usize]) -> Result<Arc<LocalModel>> {
        let parents = normalize_parents(self.traj, target, parents)?;
        let key = (target, parents);
        if let Some(hit) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let model = Arc::new(score_local_with(self.traj, &self.scheme, target, &key.1, &self.config)?);
        let mut cache = self.cache.lock().expect("cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(model)))
    }

    /// Local bits of `target` under `parents`.
    pub fn local_bits(&self, target: usize, parents: &[usize]) -> Result<f64> {
        Ok(self.local(target, parents)?.total_bits())
    }

    /// Bits saved by adding `i -> j` to `graph`.
    pub fn gain(&self, graph: &CausalGraph, i: usize, j: usize) -> Result<f64> {
        let current = graph.parents(j);
        let mut with = current.clone();
        with.push(i);
        Ok(self.local_bits(j, &current)? - self.local_bits(j, &with)?)
    }

    pub fn score_graph(&self, graph: &CausalGraph) -> Result<(ScoreBreakdown, Vec<LocalModel>)> {
        let d = self.traj.dim();
        if graph.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: graph.dim() });
        }
        let locals: Vec<Arc<LocalModel>> =
            (0..d).into_par_iter().map(|j| self.local(j, &graph.parents(j))).collect::<Result<_>>()?;
        let global = ScoreBreakdown::new(self.global_bits(), 0.0, 0.0, 0.0, 0.0, 0.0);
        let total = locals.iter().fold(global, |acc, m| acc.combine(&m.breakdown));
        Ok((total, locals.iter().map(|m| (**m).clone()).collect()))
    }

    pub fn total_bits(&self, graph: &CausalGraph) -> Result<f64> {
        if graph.dim() != self.traj.dim() {
            return Err(Error::DimensionMismatch { expected: self.traj.dim(), found: graph.dim() });
        }
        let mut total = self.global_bits();
        for j in 0..graph.dim() {
            total += self.local_bits(j, &graph.parents(j))?;
        }
        Ok(total)
    }
}
