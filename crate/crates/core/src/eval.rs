//! Structure-recovery metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::Edge;
use crate::types::CausalGraph;

fn same_dim(a: &CausalGraph, b: &CausalGraph) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: b.dim(), found: a.dim() });
    }
    Ok(())
}

/// Number of adjacency cells (diagonal included) where the graphs differ.
pub fn shd(pred: &CausalGraph, truth: &CausalGraph) -> Result<usize> {
    same_dim(pred, truth)?;
    let d = truth.dim();
    Ok((0..d).flat_map(|i| (0..d).map(move |j| (i, j))).filter(|&(i, j)| pred.has_edge(i, j) != truth.has_edge(i, j)).count())
}

/// SHD divided by `D^2`.
pub fn nshd(pred: &CausalGraph, truth: &CausalGraph) -> Result<f64> {
    let d = truth.dim() as f64;
    Ok(shd(pred, truth)? as f64 / (d * d))
}

/// `(precision, recall, f1)` over directed edges; an empty side scores 0.
pub fn f1(pred: &CausalGraph, truth: &CausalGraph) -> Result<(f64, f64, f64)> {
    same_dim(pred, truth)?;
    let tp = pred.edges().iter().filter(|&&(i, j)| truth.has_edge(i, j)).count() as f64;
    let np = pred.edge_count() as f64;
    let nt = truth.edge_count() as f64;
    let precision = if np > 0.0 { tp / np } else { 0.0 };
    let recall = if nt > 0.0 { tp / nt } else { 0.0 };
    let f = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok((precision, recall, f))
}

/// Area under the precision-recall step curve.
///
/// Edges are ranked by decreasing confidence; every cell of the `D x D` grid that
/// is not listed sits at `-inf`. Edges sharing a confidence enter the curve
/// together as one threshold, and the area is `sum_k (R_k - R_{k-1}) P_k`.
pub fn auprc(scored: &[(Edge, f64)], truth: &CausalGraph) -> Result<f64> {
    let n_true = truth.edge_count();
    if n_true == 0 {
        return Err(Error::NoTrueEdges);
    }
    let d = truth.dim();
    let mut conf = vec![f64::NEG_INFINITY; d * d];
    for &((i, j), c) in scored {
        if i >= d || j >= d {
            return Err(Error::InvalidArgument(format!("edge ({i}, {j}) out of range for dimension {d}")));
        }
        if c.is_nan() {
            return Err(Error::InvalidArgument(format!("confidence of ({i}, {j}) is NaN")));
        }
        conf[i * d + j] = conf[i * d + j].max(c);
    }
    let mut cells: Vec<(f64, bool)> =
        (0..d * d).map(|k| (conf[k], truth.has_edge(k / d, k % d))).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut area = 0.0;
    let (mut tp, mut seen, mut prev_recall) = (0usize, 0usize, 0.0);
    let mut k = 0;
    while k < cells.len() {
        let level = cells[k].0;
        while k < cells.len() && cells[k].0 == level {
            seen += 1;
            tp += usize::from(cells[k].1);
            k += 1;
        }
        let recall = tp as f64 / n_true as f64;
        area += (recall - prev_recall) * (tp as f64 / seen as f64);
        prev_recall = recall;
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub shd: usize,
    pub nshd: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Undefined when the true graph has no edges.
    pub auprc: Option<f64>,
}

pub fn evaluate(pred: &CausalGraph, truth: &CausalGraph, scored: &[(Edge, f64)]) -> Result<MetricReport> {
    let (precision, recall, f) = f1(pred, truth)?;
    let auprc = match auprc(scored, truth) {
        Ok(v) => Some(v),
        Err(Error::NoTrueEdges) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport { shd: shd(pred, truth)?, nshd: nshd(pred, truth)?, precision, recall, f1: f, auprc })
}
