//! Runs a seed batch from a TOML config and prints the aggregate table.
//!
//! Usage: `run_experiment [config.toml]`; without an argument a small Diamond
//! batch is used.

use dyncausal::experiment::{run_experiment, ExperimentConfig};

const DEFAULT: &str = r#"
system = "diamond"
irregularity = 0.2
integrator_order = 3
kernel = "rbf"
seeds = [0, 1, 2]
"#;

fn main() -> dyncausal::Result<()> {
    env_logger::init();
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_toml(DEFAULT)?,
    };
    let report = run_experiment(&cfg)?;
    for row in &report.rows {
        match &row.error {
            Some(e) => println!("seed {:>3}: failed ({e})", row.seed),
            None => println!("seed {:>3}: {:?}", row.seed, row.edges),
        }
    }
    println!("\n{:<22}{:>10}{:>10}", "metric", "mean", "std");
    for (name, a) in &report.aggregates {
        println!("{name:<22}{:>10.3}{:>10.3}", a.mean, a.std);
    }
    Ok(())
}
