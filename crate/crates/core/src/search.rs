//! Greedy structure search: pairwise edge scoring, significance-gated forward
//! additions, then backward pruning.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdl::{LocalScorer, ScoreConfig};
use crate::types::{CausalGraph, Trajectory};

pub type Edge = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Significance level of the compression test; an edge must save more than
    /// `-log2(alpha)` bits.
    pub significance_alpha: f64,
    pub allow_self_loops: bool,
    /// Cap on parents per variable; `None` means `D`.
    pub max_parents: Option<usize>,
    /// Only edges that individually beat the threshold against an empty model
    /// are forward candidates.
    pub prefilter: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { significance_alpha: 0.001, allow_self_loops: true, max_parents: None, prefilter: true }
    }
}

impl SearchConfig {
    pub fn threshold_bits(&self) -> f64 {
        -self.significance_alpha.log2()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.significance_alpha > 0.0 && self.significance_alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "significance level must lie in (0, 1), got {}",
                self.significance_alpha
            )));
        }
        if self.max_parents == Some(0) {
            return Err(Error::InvalidArgument("max_parents must be positive".into()));
        }
        Ok(())
    }

    fn parent_cap(&self, d: usize) -> usize {
        self.max_parents.unwrap_or(d)
    }
}

/// Decreasing gain, then lexicographic edge.
fn rank(a: &(f64, Edge), b: &(f64, Edge)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Candidate edges ordered by decreasing gain.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EdgeQueue {
    entries: Vec<(f64, Edge)>,
    /// Pairs whose evaluation failed, with the error; their gain is `-inf`.
    failures: Vec<(Edge, String)>,
}

impl EdgeQueue {
    pub fn new(mut entries: Vec<(f64, Edge)>) -> Self {
        entries.sort_by(rank);
        Self { entries, failures: Vec::new() }
    }

    pub fn entries(&self) -> &[(f64, Edge)] {
        &self.entries
    }

    pub fn failures(&self) -> &[(Edge, String)] {
        &self.failures
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Option<(f64, Edge)> {
        self.entries.first().copied()
    }

    pub fn gain(&self, edge: Edge) -> Option<f64> {
        self.entries.iter().find(|(_, e)| *e == edge).map(|(g, _)| *g)
    }

    /// Sets the gain of `edge`, inserting it if absent, and restores the order.
    pub fn update(&mut self, edge: Edge, gain: f64) {
        match self.entries.iter_mut().find(|(_, e)| *e == edge) {
            Some(entry) => entry.0 = gain,
            None => self.entries.push((gain, edge)),
        }
        self.entries.sort_by(rank);
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, Edge)> {
        self.entries.iter()
    }
}

fn candidate_pairs(d: usize, cfg: &SearchConfig) -> Vec<Edge> {
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|(i, j)| cfg.allow_self_loops || i != j)
        .collect()
}

/// Gain of every ordered pair against the parentless model of its child.
pub fn edge_scoring(scorer: &LocalScorer<'_>, cfg: &SearchConfig) -> Result<EdgeQueue> {
    cfg.validate()?;
    let d = scorer.trajectory().dim();
    let empty = CausalGraph::empty(d)?;
    // baselines first so that candidate fits do not race to create them
    (0..d).into_par_iter().try_for_each(|j| scorer.local(j, &[]).map(|_| ()))?;
    let results: Vec<(Edge, Result<f64>)> =
        candidate_pairs(d, cfg).into_par_iter().map(|(i, j)| ((i, j), scorer.gain(&empty, i, j))).collect();
    let mut entries = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (edge, r) in results {
        match r {
            Ok(g) => {
                log::debug!("pair {} -> {} gains {g:.3} bits", edge.0, edge.1);
                entries.push((g, edge));
            }
            Err(e) => {
                log::warn!("scoring {edge:?} failed: {e}");
                entries.push((f64::NEG_INFINITY, edge));
                failures.push((edge, e.to_string()));
            }
        }
    }
    let mut q = EdgeQueue::new(entries);
    q.failures = failures;
    Ok(q)
}

/// One accepted forward addition or backward deletion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchStep {
    pub edge: Edge,
    /// Bits saved by the step.
    pub gain: f64,
    pub total_bits_after: f64,
}

/// Adds the best significant edge until none remains.
pub fn forward_search(scorer: &LocalScorer<'_>, queue: &EdgeQueue, cfg: &SearchConfig) -> Result<(CausalGraph, Vec<SearchStep>)> {
    cfg.validate()?;
    let d = scorer.trajectory().dim();
    let threshold = cfg.threshold_bits();
    let cap = cfg.parent_cap(d);
    let mut graph = CausalGraph::empty(d)?;
    let mut current: HashMap<Edge, f64> = queue
        .iter()
        .filter(|(g, (i, j))| (cfg.allow_self_loops || i != j) && (!cfg.prefilter || *g > threshold))
        .map(|(g, e)| (*e, *g))
        .collect();
    let mut total = scorer.total_bits(&graph)?;
    let mut steps = Vec::new();

    loop {
        let best = current
            .iter()
            .filter(|((_, j), _)| graph.parents(*j).len() < cap)
            .map(|(e, g)| (*g, *e))
            .min_by(rank);
        let Some((g, (i, j))) = best else { break };
        if !(g > threshold) {
            break;
        }
        graph.add_edge(i, j);
        current.remove(&(i, j));
        total -= g;
        steps.push(SearchStep { edge: (i, j), gain: g, total_bits_after: total });
        log::debug!("added {i} -> {j} saving {g:.3} bits");

        // only the child's parent set changed, so only its incoming gains move
        let affected: Vec<Edge> = current.keys().filter(|(_, c)| *c == j).copied().collect();
        let regained: Vec<(Edge, f64)> = affected
            .into_par_iter()
            .map(|(k, c)| (k, c, scorer.gain(&graph, k, c)))
            .map(|(k, c, r)| ((k, c), r.unwrap_or(f64::NEG_INFINITY)))
            .collect();
        for (e, g) in regained {
            current.insert(e, g);
        }
    }
    Ok((graph, steps))
}

/// Bits saved by deleting each edge of `graph`.
pub fn deletion_gains(scorer: &LocalScorer<'_>, graph: &CausalGraph) -> Result<Vec<(Edge, f64)>> {
    graph
        .edges()
        .into_par_iter()
        .map(|(i, j)| {
            let parents = graph.parents(j);
            let without: Vec<usize> = parents.iter().copied().filter(|&p| p != i).collect();
            Ok(((i, j), scorer.local_bits(j, &parents)? - scorer.local_bits(j, &without)?))
        })
        .collect()
}

/// Deletes the most beneficial edge while any deletion lowers the score.
pub fn backward_search(scorer: &LocalScorer<'_>, graph: &CausalGraph) -> Result<(CausalGraph, Vec<SearchStep>)> {
    let mut graph = graph.clone();
    let mut total = scorer.total_bits(&graph)?;
    let mut steps = Vec::new();
    loop {
        let best = deletion_gains(scorer, &graph)?
            .into_iter()
            .map(|(e, g)| (g, e))
            .min_by(rank);
        match best {
            Some((g, (i, j))) if g > 0.0 => {
                graph.remove_edge(i, j);
                total -= g;
                steps.push(SearchStep { edge: (i, j), gain: g, total_bits_after: total });
                log::debug!("removed {i} -> {j} saving {g:.3} bits");
            }
            _ => break,
        }
    }
    Ok((graph, steps))
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub graph: CausalGraph,
    pub queue: EdgeQueue,
    /// For every edge of the final graph, the bits its removal would cost;
    /// the confidence ordering used for ranking metrics.
    pub final_gains: Vec<(Edge, f64)>,
    pub forward_steps: Vec<SearchStep>,
    pub backward_steps: Vec<SearchStep>,
    pub total_bits: f64,
    pub reduced_bits: f64,
    pub models_fitted: usize,
}

/// Pairwise scoring, forward search and backward pruning.
pub fn discover(traj: &Trajectory, score: &ScoreConfig, search: &SearchConfig) -> Result<Discovery> {
    let scorer = LocalScorer::new(traj, *score)?;
    discover_with(&scorer, search)
}

pub fn discover_with(scorer: &LocalScorer<'_>, search: &SearchConfig) -> Result<Discovery> {
    let queue = edge_scoring(scorer, search)?;
    let (forward, forward_steps) = forward_search(scorer, &queue, search)?;
    let (graph, backward_steps) = backward_search(scorer, &forward)?;
    let mut final_gains: Vec<(Edge, f64)> = deletion_gains(scorer, &graph)?.into_iter().map(|(e, g)| (e, -g)).collect();
    final_gains.sort_by(|a, b| rank(&(a.1, a.0), &(b.1, b.0)));
    let total_bits = scorer.total_bits(&graph)?;
    Ok(Discovery {
        reduced_bits: total_bits - scorer.graph_constant(),
        graph,
        queue,
        final_gains,
        forward_steps,
        backward_steps,
        total_bits,
        models_fitted: scorer.fitted(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_bits() {
        let cfg = SearchConfig::default();
        assert!((cfg.threshold_bits() - 9.965_784_284_662_087).abs() < 1e-9);
        assert!(SearchConfig { significance_alpha: 1.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn queue_ordering() {
        let mut q = EdgeQueue::new(vec![(1.0, (1, 0)), (5.0, (0, 1)), (1.0, (0, 2)), (f64::NEG_INFINITY, (2, 2))]);
        let order: Vec<Edge> = q.iter().map(|(_, e)| *e).collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (1, 0), (2, 2)]);
        q.update((2, 2), 10.0);
        assert_eq!(q.head(), Some((10.0, (2, 2))));
        q.update((3, 0), 1.0);
        assert_eq!(q.len(), 5);
        assert_eq!(q.gain((3, 0)), Some(1.0));
    }

    #[test]
    fn candidate_pairs_respect_self_loop_flag() {
        let on = SearchConfig::default();
        let off = SearchConfig { allow_self_loops: false, ..on };
        assert_eq!(candidate_pairs(3, &on).len(), 9);
        assert_eq!(candidate_pairs(3, &off).len(), 6);
        assert!(candidate_pairs(1, &off).is_empty());
    }
}
