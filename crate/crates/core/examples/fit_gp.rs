//! Fits the multistep GP of a driven oscillator and compares its rollout to the data.

use dyncausal::gp::{fit, FitOptions, KernelKind};
use dyncausal::integrator::ab_coefficients;
use dyncausal::Timeline;

fn main() -> dyncausal::Result<()> {
    // dx/dt = cos(u) with u = t, so x = sin(t)
    let tl = Timeline::regular(0.0, 0.05, 201)?;
    let u: Vec<f64> = tl.times().to_vec();
    let x: Vec<f64> = u.iter().map(|t| t.sin()).collect();
    let scheme = ab_coefficients(&tl, 3)?;

    for kind in [KernelKind::Rbf, KernelKind::Polynomial { degree: 2 }] {
        let gp = fit(&[&u], &x, &tl, &scheme, kind, FitOptions::default())?;
        let pred = gp.rollout(&tl, &[&u], &x[..3], None)?;
        let rmse = (pred.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
        let k = gp.kernel();
        println!("{kind}: log marginal likelihood {:.1}", gp.log_marginal_likelihood());
        println!("  lengthscales {:?}, signal variance {:.3e}, noise {:.3e}", k.lengthscales, k.signal_variance, k.noise_variance);
        println!("  rollout RMSE {rmse:.2e}; f(u=0) = {:.4} (true 1)", gp.posterior(&[vec![0.0]], &[1.0])?.0);
    }
    Ok(())
}
