//! Causal structure discovery for continuous-time dynamical systems.
//!
//! Each variable's dynamics are modeled by a Gaussian process observed through an
//! Adams–Bashforth multistep kernel, which handles irregular sampling directly.
//! Parent sets are chosen by a greedy search that minimizes a lossless
//! description length of the trajectory, accepting an edge only when it
//! compresses the data by more than a significance threshold.
//!
//! ```no_run
//! use dyncausal::bench::{generate, make_timeline, NoiseSpec, SystemKind};
//! use dyncausal::mdl::ScoreConfig;
//! use dyncausal::search::{discover, SearchConfig};
//!
//! let tl = make_timeline(0.0, 10.0, 0.05, 0.0, 1)?;
//! let run = generate(SystemKind::Diamond, 4, &tl, NoiseSpec::new(0.005)?, 1)?;
//! let found = discover(&run.trajectory, &ScoreConfig::default(), &SearchConfig::default())?;
//! println!("{:?}", found.graph.edges());
//! # Ok::<(), dyncausal::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod gp;
pub mod integrator;
pub mod io;
pub mod mdl;
pub mod search;
pub mod types;

pub use error::{Error, Result};
pub use types::{CausalGraph, ScoreBreakdown, Timeline, Trajectory};
