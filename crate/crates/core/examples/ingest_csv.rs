//! Discovers the graph of an external trajectory CSV (`t,<var>,...` header).
//!
//! Usage: `ingest_csv <file.csv> [kernel]`. Without a file, a three-variable chain
//! is written to a temporary file first.

use std::path::PathBuf;

use dyncausal::gp::KernelKind;
use dyncausal::mdl::ScoreConfig;
use dyncausal::search::{discover, SearchConfig};
use dyncausal::{io, Timeline, Trajectory};

fn demo_file() -> dyncausal::Result<PathBuf> {
    // a drives b, b drives c
    let tl = Timeline::regular(0.0, 0.05, 161)?;
    let a: Vec<f64> = tl.times().iter().map(|t| (0.7 * t).sin()).collect();
    let b: Vec<f64> = tl.times().iter().map(|t| 1.0 - (0.7 * t).cos() / 0.7).collect();
    let c: Vec<f64> = tl.times().iter().map(|t| t - (0.7 * t).sin() / 0.49).collect();
    let traj = Trajectory::from_columns(tl, vec![a, b, c], vec!["a".into(), "b".into(), "c".into()])?;
    let path = std::env::temp_dir().join("dyncausal_chain.csv");
    io::write_trajectory_csv(&traj, &path)?;
    Ok(path)
}

fn main() -> dyncausal::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = match args.next() {
        Some(p) => PathBuf::from(p),
        None => demo_file()?,
    };
    let kernel = args.next().map(|k| k.parse()).transpose()?.unwrap_or(KernelKind::Rbf);
    let traj = io::ingest_csv(&path)?;
    println!("{}: {} samples, variables {:?}", path.display(), traj.n_samples(), traj.names());

    let found = discover(&traj, &ScoreConfig { kernel, ..ScoreConfig::default() }, &SearchConfig::default())?;
    for ((i, j), g) in &found.final_gains {
        println!("  {} -> {}  ({g:.1} bits)", traj.names()[*i], traj.names()[*j]);
    }
    Ok(())
}
