//! Discover the four-node diamond graph from one noisy simulation.
//!
//! `cargo run --release --example discover_diamond -- [seed] [irregularity] [order]`

use std::time::Instant;

use dyncausal::bench::{generate, make_timeline, NoiseSpec, SystemKind};
use dyncausal::eval::evaluate;
use dyncausal::mdl::ScoreConfig;
use dyncausal::search::{discover, SearchConfig};

fn main() -> dyncausal::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let irregularity: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let order: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);

    let proto = SystemKind::Diamond.protocol();
    let tl = make_timeline(0.0, proto.t_end, proto.dt, irregularity, seed)?;
    let run = generate(SystemKind::Diamond, 4, &tl, NoiseSpec::new(proto.noise_sigma)?, seed)?;

    let start = Instant::now();
    let score = ScoreConfig { order, seed, ..ScoreConfig::default() };
    let found = discover(&run.trajectory, &score, &SearchConfig::default())?;
    let elapsed = start.elapsed();

    println!("pairwise gains (bits):");
    for (g, (i, j)) in found.queue.iter() {
        println!("  {} -> {}: {g:9.2}", run.trajectory.names()[*i], run.trajectory.names()[*j]);
    }
    for step in &found.forward_steps {
        println!("added   {:?} saving {:.2} bits", step.edge, step.gain);
    }
    for step in &found.backward_steps {
        println!("removed {:?} saving {:.2} bits", step.edge, step.gain);
    }
    let m = evaluate(&found.graph, &run.truth, &found.final_gains)?;
    println!("found {:?}", found.graph.edges());
    println!("truth {:?}", run.truth.edges());
    println!("nshd {:.3}  f1 {:.3}  auprc {:?}", m.nshd, m.f1, m.auprc);
    println!("{} models fitted in {:.1?}", found.models_fitted, elapsed);
    Ok(())
}
