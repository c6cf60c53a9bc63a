use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use dyncausal::mdl::{LocalScorer, Precisions, ScoreConfig};
use dyncausal::search::{backward_search, discover_with, edge_scoring, forward_search, SearchConfig};
use dyncausal::{CausalGraph, Timeline, Trajectory};

fn config() -> ScoreConfig {
    ScoreConfig { restarts: 3, ..ScoreConfig::default() }
}

/// A random smooth exogenous driver and its exact integral.
fn driver(rng: &mut ChaCha8Rng, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let comps: Vec<(f64, f64, f64)> =
        (0..3).map(|_| (rng.random_range(0.3..1.0), rng.random_range(0.4..2.5), rng.random_range(0.0..std::f64::consts::TAU))).collect();
    let x = times.iter().map(|&t| comps.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum()).collect();
    let y = times.iter().map(|&t| comps.iter().map(|(a, w, p)| -a / w * (w * t + p).cos()).sum()).collect();
    (x, y)
}

fn noisy(v: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    v.iter().map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn trajectory(tl: &Timeline, cols: Vec<Vec<f64>>) -> Trajectory {
    let d = cols.len();
    Trajectory::from_columns(tl.clone(), cols, Trajectory::default_names(d)).unwrap()
}

#[test]
fn true_parent_beats_noise_parent() {
    let tl = Timeline::regular(0.0, 0.1, 101).unwrap();
    let mut wins = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = driver(&mut rng, tl.times());
        let z: Vec<f64> = (0..tl.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let traj = trajectory(&tl, vec![noisy(&x, 0.005, &mut rng), noisy(&y, 0.005, &mut rng), z]);
        let scorer = LocalScorer::new(&traj, ScoreConfig { seed, ..config() }).unwrap();
        if scorer.local_bits(1, &[0]).unwrap() < scorer.local_bits(1, &[2]).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 18, "true parent won {wins}/20");
}

#[test]
fn white_noise_is_not_compressible() {
    let tl = Timeline::regular(0.0, 0.1, 101).unwrap();
    let search = SearchConfig::default();
    let mut clean = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let cols = (0..2).map(|_| (0..tl.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let traj = trajectory(&tl, cols);
        let scorer = LocalScorer::new(&traj, ScoreConfig { seed, ..config() }).unwrap();
        let queue = edge_scoring(&scorer, &search).unwrap();
        let cross = [(0, 1), (1, 0)].iter().all(|&e| queue.gain(e).unwrap() < search.threshold_bits());
        if cross {
            clean += 1;
        }
    }
    assert!(clean >= 19, "noise pairs stayed below the threshold in {clean}/20 seeds");
}

#[test]
fn integrated_driver_heads_the_queue() {
    let tl = Timeline::regular(0.0, 0.1, 101).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, y) = driver(&mut rng, tl.times());
    let traj = trajectory(&tl, vec![x, y]);
    let scorer = LocalScorer::new(&traj, config()).unwrap();
    let queue = edge_scoring(&scorer, &SearchConfig::default()).unwrap();
    let (g, edge) = queue.head().unwrap();
    assert_eq!(edge, (0, 1), "queue {:?}", queue.entries());
    assert!(g > 0.0);
}

#[test]
fn backward_removes_a_duplicated_parent() {
    let tl = Timeline::regular(0.0, 0.1, 101).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (x, y) = driver(&mut rng, tl.times());
    let copy: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
    let traj = trajectory(&tl, vec![x, copy, y]);
    let scorer = LocalScorer::new(&traj, config()).unwrap();
    let both = CausalGraph::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
    let (pruned, steps) = backward_search(&scorer, &both).unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(pruned.parents(2).len(), 1);
    assert!(scorer.total_bits(&pruned).unwrap() < scorer.total_bits(&both).unwrap());
}

#[test]
fn gains_respect_locality_and_constants() {
    let tl = Timeline::regular(0.0, 0.1, 61).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x, y) = driver(&mut rng, tl.times());
    let traj = trajectory(&tl, vec![noisy(&x, 0.01, &mut rng), noisy(&y, 0.01, &mut rng)]);
    let scorer = LocalScorer::new(&traj, config()).unwrap();

    let empty = CausalGraph::empty(2).unwrap();
    let one = empty.with_edge(0, 1);
    let (_, before) = scorer.score_graph(&empty).unwrap();
    let (_, after) = scorer.score_graph(&one).unwrap();
    assert_eq!(before[0].breakdown, after[0].breakdown);
    assert_ne!(before[1].breakdown, after[1].breakdown);

    // an edge that is already present refits to the same model
    assert_eq!(scorer.gain(&one, 0, 1).unwrap(), 0.0);

    let wide = LocalScorer::new(&traj, ScoreConfig { precisions: Precisions { r_d: 64, ..Precisions::default() }, ..config() }).unwrap();
    let g32 = scorer.gain(&empty, 0, 1).unwrap();
    let g64 = wide.gain(&empty, 0, 1).unwrap();
    assert!((g32 - g64).abs() < 1e-6, "{g32} vs {g64}");
}

#[test]
fn no_candidates_means_no_refits() {
    let tl = Timeline::regular(0.0, 0.1, 41).unwrap();
    let traj = trajectory(&tl, vec![tl.times().iter().map(|t| t.sin()).collect()]);
    let scorer = LocalScorer::new(&traj, config()).unwrap();
    let search = SearchConfig { allow_self_loops: false, ..SearchConfig::default() };
    let queue = edge_scoring(&scorer, &search).unwrap();
    assert!(queue.is_empty());
    let (graph, steps) = forward_search(&scorer, &queue, &search).unwrap();
    assert_eq!(graph.edge_count(), 0);
    assert!(steps.is_empty());
    assert_eq!(scorer.fitted(), 1);
}

#[test]
fn discovery_is_deterministic() {
    let tl = Timeline::regular(0.0, 0.1, 61).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (x, y) = driver(&mut rng, tl.times());
    let traj = trajectory(&tl, vec![noisy(&x, 0.01, &mut rng), noisy(&y, 0.01, &mut rng)]);
    let run = || {
        let scorer = LocalScorer::new(&traj, config()).unwrap();
        discover_with(&scorer, &SearchConfig::default()).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.final_gains, b.final_gains);
    assert_eq!(a.total_bits.to_bits(), b.total_bits.to_bits());
    assert!(a.graph.has_edge(0, 1));
}
