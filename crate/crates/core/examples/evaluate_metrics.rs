//! Structure metrics for a few hand-made predictions against the Diamond graph.

use dyncausal::eval::evaluate;
use dyncausal::CausalGraph;

fn main() -> dyncausal::Result<()> {
    let truth = CausalGraph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)])?;
    let cases = [
        ("exact", vec![((0, 1), 30.0), ((0, 2), 25.0), ((1, 3), 20.0), ((2, 3), 15.0)]),
        ("one reversed", vec![((0, 1), 30.0), ((0, 2), 25.0), ((3, 1), 20.0), ((2, 3), 15.0)]),
        ("extra self-loop", vec![((3, 3), 50.0), ((0, 1), 30.0), ((0, 2), 25.0), ((1, 3), 20.0), ((2, 3), 15.0)]),
        ("empty", vec![]),
    ];
    println!("{:<16}{:>5}{:>8}{:>8}{:>8}{:>8}", "prediction", "SHD", "NSHD", "F1", "AUPRC", "");
    for (name, scored) in cases {
        let edges: Vec<(usize, usize)> = scored.iter().map(|(e, _)| *e).collect();
        let pred = CausalGraph::from_edges(4, &edges)?;
        let r = evaluate(&pred, &truth, &scored)?;
        println!("{name:<16}{:>5}{:>8.3}{:>8.3}{:>8.3}", r.shd, r.nshd, r.f1, r.auprc.unwrap_or(f64::NAN));
    }
    Ok(())
}
