//! Adams–Bashforth weights on a regular and a jittered grid.

use dyncausal::bench::make_timeline;
use dyncausal::integrator::ab_coefficients;
use dyncausal::Timeline;

fn show(label: &str, tl: &Timeline) -> dyncausal::Result<()> {
    println!("{label}: t = {:?}", &tl.times()[..5]);
    for s in 1..=3 {
        let scheme = ab_coefficients(tl, s)?;
        let w = &scheme.windows()[0];
        let scaled: Vec<f64> = w.b.iter().map(|b| b / w.step).collect();
        println!("  AB{s}: b = {:?}  (b / h = {scaled:.4?})", w.b);
    }
    Ok(())
}

fn main() -> dyncausal::Result<()> {
    show("regular", &Timeline::regular(0.0, 0.1, 20)?)?;
    show("irregular (b = 0.5)", &make_timeline(0.0, 2.0, 0.1, 0.5, 7)?)?;
    Ok(())
}
