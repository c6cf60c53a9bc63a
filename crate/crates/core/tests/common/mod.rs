//! Oracles shared by the integration test targets.
#![allow(dead_code)]

const C0: f64 = 2.865064;

/// log2(c0) plus every positive term of the iterated base-2 logarithm series.
pub fn universal_series(z: u64) -> f64 {
    let mut bits = C0.log2();
    let mut t = (z as f64).ln() / std::f64::consts::LN_2;
    while t > 0.0 {
        bits += t;
        t = t.ln() / std::f64::consts::LN_2;
    }
    bits
}

fn universal_or_flag(z: u64) -> f64 {
    if z == 0 {
        1.0
    } else {
        universal_series(z)
    }
}

/// Two sign bits, the shift and the shifted value, with the shift found by scanning upward.
pub fn brute_force_params(theta: &[f64], p: u32) -> f64 {
    theta
        .iter()
        .map(|&v| {
            if v == 0.0 {
                return 1.0;
            }
            let a = v.abs();
            let target = 10f64.powi(p as i32);
            let rho = (-400..400).find(|&r| a * 10f64.powi(r) >= target).expect("shift in range");
            let shifted = (a * 10f64.powi(rho)).ceil() as u64;
            2.0 + universal_or_flag(rho.unsigned_abs() as u64) + universal_or_flag(shifted)
        })
        .sum()
}

/// Integral over `[nodes.last(), t_next]` of each Lagrange basis polynomial, by
/// three-point Gauss-Legendre quadrature of the product form (exact up to degree 5).
pub fn lagrange_oracle(nodes: &[f64], t_next: f64) -> Vec<f64> {
    let lo = nodes[nodes.len() - 1];
    let (mid, half) = ((lo + t_next) / 2.0, (t_next - lo) / 2.0);
    let r = (0.6f64).sqrt();
    let rule = [(-r, 5.0 / 9.0), (0.0, 8.0 / 9.0), (r, 5.0 / 9.0)];
    let basis = |k: usize, t: f64| {
        nodes.iter().enumerate().filter(|(m, _)| *m != k).map(|(_, &tm)| (t - tm) / (nodes[k] - tm)).product::<f64>()
    };
    (0..nodes.len()).map(|k| half * rule.iter().map(|(x, w)| w * basis(k, mid + half * x)).sum::<f64>()).collect()
}

/// Average precision of a strict ranking given the 1-based ranks of the positives.
pub fn average_precision(positive_ranks: &[usize]) -> f64 {
    positive_ranks.iter().enumerate().map(|(k, &r)| (k + 1) as f64 / r as f64).sum::<f64>() / positive_ranks.len() as f64
}

pub fn combinations(n: usize, k: usize, start: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if acc.len() == k {
        out.push(acc.clone());
        return;
    }
    for i in start..n {
        acc.push(i + 1);
        combinations(n, k, i + 1, acc, out);
        acc.pop();
    }
}
