//! Shared data model: timelines, trajectories, directed graphs and score breakdowns.
//!
//! Every type validates its invariants on construction, so a value that exists is
//! a valid value. All of them are immutable once built (graphs expose explicit
//! edit methods that keep the adjacency square).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing sample times in abstract time units.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    times: Vec<f64>,
}

impl Timeline {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        Ok(Self { times })
    }

    /// Regular grid `start, start + dt, ...` with `n` points.
    pub fn regular(start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Self::new((0..n).map(|i| start + dt * i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Successive step lengths `t[i+1] - t[i]`.
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    pub fn mean_step(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        (self.end() - self.start()) / (self.times.len() - 1) as f64
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::ShapeMismatch("timeline is empty".into()));
    }
    for (i, t) in times.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::NonFiniteValue { row: i, col: 0 });
        }
        if i > 0 && *t <= times[i - 1] {
            return Err(Error::NonMonotoneTimeline { index: i });
        }
    }
    Ok(())
}

/// Checks raw trajectory parts against every [`Trajectory`] invariant.
///
/// `rows` is row-major: one entry per timestamp, each of length `names.len()`.
/// Errors are reported in the order timeline, shape, values.
pub fn validate_trajectory(times: &[f64], rows: &[Vec<f64>], names: &[String]) -> Result<()> {
    check_times(times)?;
    if rows.len() != times.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} timestamps but {} rows",
            times.len(),
            rows.len()
        )));
    }
    if names.is_empty() {
        return Err(Error::ShapeMismatch("trajectory has no components".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != names.len() {
            return Err(Error::ShapeMismatch(format!(
                "row {i} has {} values, expected {}",
                row.len(),
                names.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: i, col: j });
        }
    }
    Ok(())
}

/// Timestamped multivariate observations, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    timeline: Timeline,
    columns: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl Trajectory {
    /// Builds a trajectory from row-major samples.
    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        validate_trajectory(&times, rows, &names)?;
        let d = names.len();
        let columns = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Ok(Self { timeline: Timeline { times }, columns, names })
    }

    /// Builds a trajectory from one vector per component.
    pub fn from_columns(timeline: Timeline, columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.len() != names.len() || columns.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns but {} names",
                columns.len(),
                names.len()
            )));
        }
        for (j, c) in columns.iter().enumerate() {
            if c.len() != timeline.len() {
                return Err(Error::ShapeMismatch(format!(
                    "column {j} has {} values, timeline has {}",
                    c.len(),
                    timeline.len()
                )));
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { row: i, col: j });
            }
        }
        Ok(Self { timeline, columns, names })
    }

    /// Column names `x0, x1, ...`.
    pub fn default_names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("x{j}")).collect()
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    pub fn n_samples(&self) -> usize {
        self.timeline.len()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

/// Directed graph over `D` components; entry `(i, j)` is the edge `X_i -> X_j`.
///
/// Cycles and self-loops are ordinary states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CausalGraph {
    dim: usize,
    adj: Vec<bool>,
}

impl CausalGraph {
    pub fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("graph dimension must be positive".into()));
        }
        Ok(Self { dim, adj: vec![false; dim * dim] })
    }

    pub fn from_edges(dim: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(dim)?;
        for &(i, j) in edges {
            if i >= dim || j >= dim {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) out of range for dimension {dim}"
                )));
            }
            g.adj[i * dim + j] = true;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.dim + j]
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        self.adj[i * self.dim + j] = true;
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[i * self.dim + j] = false;
    }

    pub fn with_edge(&self, i: usize, j: usize) -> Self {
        let mut g = self.clone();
        g.add_edge(i, j);
        g
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Self {
        let mut g = self.clone();
        g.remove_edge(i, j);
        g
    }

    /// Sorted parent indices of `j` (includes `j` itself for a self-loop).
    pub fn parents(&self, j: usize) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.has_edge(i, j)).collect()
    }

    /// All edges in lexicographic `(source, target)` order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let d = self.dim;
        (0..d * d).filter(|&k| self.adj[k]).map(|k| (k / d, k % d)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    /// Kahn's algorithm; a self-loop counts as a cycle.
    pub fn is_acyclic(&self) -> bool {
        let d = self.dim;
        let mut indeg: Vec<usize> = (0..d).map(|j| self.parents(j).len()).collect();
        let mut ready: Vec<usize> = (0..d).filter(|&j| indeg[j] == 0).collect();
        let mut seen = 0;
        while let Some(i) = ready.pop() {
            seen += 1;
            for j in 0..d {
                if self.has_edge(i, j) {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        seen == d
    }

    /// Nodes from which `j` is reachable, excluding `j` unless it lies on a cycle.
    pub fn ancestors(&self, j: usize) -> Vec<usize> {
        let d = self.dim;
        let mut seen = vec![false; d];
        let mut stack = self.parents(j);
        while let Some(i) = stack.pop() {
            if !seen[i] {
                seen[i] = true;
                stack.extend(self.parents(i));
            }
        }
        (0..d).filter(|&i| seen[i]).collect()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            dimension: self.dim,
            edges: self.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }

    pub fn from_json(g: &GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_edges(g.dimension, &edges)
    }
}

/// On-disk graph format: `{"dimension": D, "edges": [[i, j], ...]}` with 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub dimension: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Itemized description length in bits.
///
/// `total_bits` is always the sum of the five parts; `reduced_bits` is the total
/// minus the model-independent constant (see [`crate::mdl::reduction_constant`]).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub global_bits: f64,
    pub structure_bits: f64,
    pub function_bits: f64,
    pub param_bits: f64,
    pub residual_bits: f64,
    pub total_bits: f64,
    pub reduced_bits: f64,
}

impl ScoreBreakdown {
    pub fn new(
        global_bits: f64,
        structure_bits: f64,
        function_bits: f64,
        param_bits: f64,
        residual_bits: f64,
        constant: f64,
    ) -> Self {
        let total_bits = global_bits + structure_bits + function_bits + param_bits + residual_bits;
        Self {
            global_bits,
            structure_bits,
            function_bits,
            param_bits,
            residual_bits,
            total_bits,
            reduced_bits: total_bits - constant,
        }
    }

    /// Sum of two breakdowns, part by part.
    pub fn combine(&self, other: &Self) -> Self {
        Self {
            global_bits: self.global_bits + other.global_bits,
            structure_bits: self.structure_bits + other.structure_bits,
            function_bits: self.function_bits + other.function_bits,
            param_bits: self.param_bits + other.param_bits,
            residual_bits: self.residual_bits + other.residual_bits,
            total_bits: self.total_bits + other.total_bits,
            reduced_bits: self.reduced_bits + other.reduced_bits,
        }
    }

    pub fn recomposed_total(&self) -> f64 {
        self.global_bits + self.structure_bits + self.function_bits + self.param_bits + self.residual_bits
    }
}
