//! Benchmark ODE families with known local-dependency graphs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::CausalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Empty,
    Diamond,
    ErdosRenyi,
    ErdosRenyiCyclic,
    DoubleMass,
    Rossler,
}

impl SystemKind {
    pub const ALL: [SystemKind; 6] = [
        SystemKind::Empty,
        SystemKind::Diamond,
        SystemKind::ErdosRenyi,
        SystemKind::ErdosRenyiCyclic,
        SystemKind::DoubleMass,
        SystemKind::Rossler,
    ];

    /// Dimension the family is defined for; `None` means caller-chosen.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            SystemKind::Diamond | SystemKind::DoubleMass => Some(4),
            SystemKind::Rossler => Some(10),
            SystemKind::Empty | SystemKind::ErdosRenyi | SystemKind::ErdosRenyiCyclic => None,
        }
    }

    /// Default simulation protocol for the family.
    pub fn protocol(self) -> Protocol {
        match self {
            SystemKind::Empty => Protocol { dim: 4, t_end: 40.0, dt: 0.1, noise_sigma: 0.05 },
            SystemKind::Diamond => Protocol { dim: 4, t_end: 10.0, dt: 0.05, noise_sigma: 0.005 },
            SystemKind::ErdosRenyi | SystemKind::ErdosRenyiCyclic => {
                Protocol { dim: 5, t_end: 10.0, dt: 0.05, noise_sigma: 0.005 }
            }
            SystemKind::DoubleMass => Protocol { dim: 4, t_end: 15.0, dt: 0.1, noise_sigma: 0.005 },
            SystemKind::Rossler => Protocol { dim: 10, t_end: 40.0, dt: 0.1, noise_sigma: 0.001 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Empty => "empty",
            SystemKind::Diamond => "diamond",
            SystemKind::ErdosRenyi => "erdos_renyi",
            SystemKind::ErdosRenyiCyclic => "erdos_renyi_cyclic",
            SystemKind::DoubleMass => "double_mass",
            SystemKind::Rossler => "rossler",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "empty" => Ok(SystemKind::Empty),
            "diamond" => Ok(SystemKind::Diamond),
            "er" | "erdos_renyi" => Ok(SystemKind::ErdosRenyi),
            "er_cyclic" | "erdos_renyi_cyclic" => Ok(SystemKind::ErdosRenyiCyclic),
            "double_mass" | "doublemass" => Ok(SystemKind::DoubleMass),
            "rossler" => Ok(SystemKind::Rossler),
            _ => Err(Error::InvalidArgument(format!("unknown system '{s}'"))),
        }
    }
}

/// Dimension, horizon, mean step and observation noise used for a family by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub dim: usize,
    pub t_end: f64,
    pub dt: f64,
    pub noise_sigma: f64,
}

/// Standard deviation of additive Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma: f64,
}

impl NoiseSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("noise sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Dynamics {
    /// `dx_i/dt = exp(rate_i * t)`
    Empty { rates: Vec<f64> },
    Diamond,
    DoubleMass,
    Rossler { a: f64, eps: f64, b: f64, q: f64 },
    /// `dx_i/dt = sin(sum_k w_ik * x_k)` over parents, `sin(root_freq_i * t)` for roots.
    Random { inputs: Vec<Vec<(usize, f64)>>, root_freq: Vec<f64> },
}

/// A benchmark system: right-hand side plus its ground-truth graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    kind: SystemKind,
    dim: usize,
    params: BTreeMap<String, f64>,
    ground_truth: CausalGraph,
    names: Vec<String>,
    dynamics: Dynamics,
}

impl SystemSpec {
    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn ground_truth(&self) -> &CausalGraph {
        &self.ground_truth
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Evaluates the vector field at `(t, x)` into `dx`.
    pub fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        match &self.dynamics {
            Dynamics::Empty { rates } => {
                for (d, a) in dx.iter_mut().zip(rates) {
                    *d = (a * t).exp();
                }
            }
            Dynamics::Diamond => {
                dx[0] = 0.5 * t.sin();
                dx[1] = 0.5 * x[0].sin();
                dx[2] = -2.0 * x[0].cos();
                dx[3] = x[1] + x[2];
            }
            Dynamics::DoubleMass => {
                // state order (v1, v2, y1, y2)
                dx[0] = x[2];
                dx[1] = x[3];
                dx[2] = -2.0 * x[0] + x[1];
                dx[3] = x[0] - x[1];
            }
            Dynamics::Rossler { a, eps, b, q } => {
                let d = x.len();
                dx[0] = a * x[0] - x[1];
                for i in 1..d - 1 {
                    dx[i] = x[i - 1].sin() - x[(i + 2) % d].sin();
                }
                dx[d - 1] = eps + b * x[d - 1] * (x[d - 2] - q);
            }
            Dynamics::Random { inputs, root_freq } => {
                for (i, d) in dx.iter_mut().enumerate() {
                    *d = if inputs[i].is_empty() {
                        (root_freq[i] * t).sin()
                    } else {
                        inputs[i].iter().map(|&(k, w)| w * x[k]).sum::<f64>().sin()
                    };
                }
            }
        }
    }

    pub fn rhs_vec(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; x.len()];
        self.rhs(t, x, &mut dx);
        dx
    }
}

fn letters(d: usize) -> Vec<String> {
    ["A", "B", "C", "D"].iter().take(d).map(|s| s.to_string()).collect()
}

fn one_based(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("x{i}")).collect()
}

/// Builds a benchmark system; ER families use edge density `2 / D`.
pub fn make_system(kind: SystemKind, dim: usize, seed: u64) -> Result<SystemSpec> {
    match kind {
        SystemKind::ErdosRenyi | SystemKind::ErdosRenyiCyclic => {
            let p = if dim > 0 { (2.0 / dim as f64).min(1.0) } else { 0.0 };
            make_random_system(dim, p, kind == SystemKind::ErdosRenyiCyclic, seed)
        }
        _ => make_fixed_system(kind, dim, seed),
    }
}

fn make_fixed_system(kind: SystemKind, dim: usize, seed: u64) -> Result<SystemSpec> {
    if let Some(expected) = kind.fixed_dim() {
        if dim != expected {
            return Err(Error::DimensionMismatch { expected, found: dim });
        }
    }
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = BTreeMap::new();
    let (edges, names, dynamics) = match kind {
        SystemKind::Empty => {
            let rates: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.5..2.5)).collect();
            for (i, a) in rates.iter().enumerate() {
                params.insert(format!("a{i}"), *a);
            }
            (vec![], one_based(dim), Dynamics::Empty { rates })
        }
        SystemKind::Diamond => (vec![(0, 1), (0, 2), (1, 3), (2, 3)], letters(4), Dynamics::Diamond),
        SystemKind::DoubleMass => {
            for k in ["k1", "k2", "m1", "m2"] {
                params.insert(k.to_string(), 1.0);
            }
            let names = ["v1", "v2", "y1", "y2"].iter().map(|s| s.to_string()).collect();
            (
                vec![(2, 0), (3, 1), (0, 2), (1, 2), (0, 3), (1, 3)],
                names,
                Dynamics::DoubleMass,
            )
        }
        SystemKind::Rossler => {
            let (a, eps, b, q) = (0.0, 0.1, 4.0, 2.0);
            params.insert("a".into(), a);
            params.insert("epsilon".into(), eps);
            params.insert("b".into(), b);
            params.insert("q".into(), q);
            (rossler_edges(dim, a), one_based(dim), Dynamics::Rossler { a, eps, b, q })
        }
        SystemKind::ErdosRenyi | SystemKind::ErdosRenyiCyclic => unreachable!(),
    };
    Ok(SystemSpec {
        kind,
        dim,
        params,
        ground_truth: CausalGraph::from_edges(dim, &edges)?,
        names,
        dynamics,
    })
}

/// Local dependencies of the Rössler chain; the `x[i+2]` reference wraps modulo `D`.
fn rossler_edges(d: usize, a: f64) -> Vec<(usize, usize)> {
    let mut edges = vec![(1, 0)];
    if a != 0.0 {
        edges.push((0, 0));
    }
    for i in 1..d - 1 {
        edges.push((i - 1, i));
        edges.push(((i + 2) % d, i));
    }
    edges.push((d - 2, d - 1));
    edges.push((d - 1, d - 1));
    edges
}

/// Random-graph system with edge probability `p`.
///
/// The acyclic variant draws a random topological order and keeps each forward
/// pair with probability `p`. The cyclic variant then adds exactly two edges, each
/// from a non-root node to one of its ancestors chosen uniformly.
pub fn make_random_system(dim: usize, p: f64, cyclic: bool, seed: u64) -> Result<SystemSpec> {
    if dim < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: dim });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability must lie in [0, 1], got {p}")));
    }
    if cyclic && p == 0.0 {
        return Err(Error::InvalidArgument("cyclic graphs need a positive edge probability".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = loop {
        let mut order: Vec<usize> = (0..dim).collect();
        order.shuffle(&mut rng);
        let mut g = CausalGraph::empty(dim)?;
        for a in 0..dim {
            for b in a + 1..dim {
                if rng.random::<f64>() < p {
                    g.add_edge(order[a], order[b]);
                }
            }
        }
        if !cyclic {
            break g;
        }
        if g.edge_count() == 0 {
            continue;
        }
        let mut complete = true;
        for _ in 0..2 {
            let options: Vec<(usize, Vec<usize>)> = (0..dim)
                .filter(|&j| !g.parents(j).is_empty())
                .map(|j| {
                    let anc: Vec<usize> =
                        g.ancestors(j).into_iter().filter(|&a| a != j && !g.has_edge(j, a)).collect();
                    (j, anc)
                })
                .filter(|(_, anc)| !anc.is_empty())
                .collect();
            if options.is_empty() {
                complete = false;
                break;
            }
            let (node, anc) = &options[rng.random_range(0..options.len())];
            let target = anc[rng.random_range(0..anc.len())];
            g.add_edge(*node, target);
        }
        if !complete {
            continue;
        }
        break g;
    };

    let mut params = BTreeMap::new();
    params.insert("p".into(), p);
    let mut inputs = vec![Vec::new(); dim];
    let mut root_freq = vec![0.0; dim];
    for j in 0..dim {
        let parents = graph.parents(j);
        if parents.is_empty() {
            root_freq[j] = rng.random_range(1.0..2.0);
            params.insert(format!("alpha_{j}"), root_freq[j]);
        } else {
            for k in parents {
                let w = rng.random_range(1.0..2.0);
                params.insert(format!("alpha_{j}_{k}"), w);
                inputs[j].push((k, w));
            }
        }
    }
    Ok(SystemSpec {
        kind: if cyclic { SystemKind::ErdosRenyiCyclic } else { SystemKind::ErdosRenyi },
        dim,
        params,
        ground_truth: graph,
        names: one_based(dim),
        dynamics: Dynamics::Random { inputs, root_freq },
    })
}
