//! Dormand–Prince 5(4) with embedded error control and a fourth-order
//! continuous extension, used to sample benchmark systems exactly at the
//! requested timestamps.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Abort once any state component exceeds this magnitude.
    pub max_abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { atol: 1e-8, rtol: 1e-8, max_abs: f64::INFINITY, max_steps: 5_000_000 }
    }
}

/// Integrates `dx/dt = f(t, x)` from `(outputs[0], x0)` and returns the state at every
/// time in `outputs` (which must be nondecreasing and start at the initial time).
pub fn integrate<F>(f: F, x0: &[f64], outputs: &[f64], tol: Tolerances) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = x0.len();
    let mut out = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok(out);
    }
    let t_end = outputs[outputs.len() - 1];
    let mut t = outputs[0];
    let mut x = x0.to_vec();
    out.push(x.clone());
    let mut next_out = 1;
    if next_out == outputs.len() {
        return Ok(out);
    }

    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    f(t, &x, &mut k[0]);
    let mut h = initial_step(&f, t, &x, &k[0], tol, t_end - t);
    let mut steps = 0usize;

    while next_out < outputs.len() {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::IntegrationFailure { time: t, reason: "too many steps".into() });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure { time: t, reason: "step size underflow".into() });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        stage(&mut tmp, &x, h, &[(A21, &k[0])]);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&mut tmp, &x, h, &[(A31, &k[0]), (A32, &k[1])]);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&mut tmp, &x, h, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&mut tmp, &x, h, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])]);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(
            &mut tmp,
            &x,
            h,
            &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
        );
        f(t + h, &tmp, &mut k[5]);
        stage(
            &mut x_new,
            &x,
            h,
            &[(A71, &k[0]), (A73, &k[2]), (A74, &k[3]), (A75, &k[4]), (A76, &k[5])],
        );
        f(t + h, &x_new, &mut k[6]);

        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = tol.atol + tol.rtol * x[i].abs().max(x_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }

        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            if x_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationFailure { time: t_new, reason: "non-finite state".into() });
            }
            if x_new.iter().any(|v| v.abs() > tol.max_abs) {
                return Err(Error::IntegrationFailure {
                    time: t_new,
                    reason: format!("state magnitude exceeded {:e}", tol.max_abs),
                });
            }
            // emit every requested time inside (t, t_new]
            while next_out < outputs.len() && outputs[next_out] <= t_new {
                let theta = (outputs[next_out] - t) / h;
                out.push(dense(&x, &x_new, &k, h, theta));
                next_out += 1;
            }
            t = t_new;
            x.copy_from_slice(&x_new);
            k.swap(0, 6);
        }
        let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
        h *= fac;
    }
    Ok(out)
}

fn stage(dst: &mut [f64], x: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) {
    for i in 0..x.len() {
        let mut acc = 0.0;
        for (a, ki) in terms {
            acc += a * ki[i];
        }
        dst[i] = x[i] + h * acc;
    }
}

fn dense(x: &[f64], x_new: &[f64], k: &[Vec<f64>], h: f64, theta: f64) -> Vec<f64> {
    let t1 = 1.0 - theta;
    (0..x.len())
        .map(|i| {
            let ydiff = x_new[i] - x[i];
            let bspl = h * k[0][i] - ydiff;
            let r4 = ydiff - h * k[6][i] - bspl;
            let r5 = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                    + D7 * k[6][i]);
            x[i] + theta * (ydiff + t1 * (bspl + theta * (r4 + t1 * r5)))
        })
        .collect()
}

fn initial_step<F>(f: &F, t: f64, x: &[f64], f0: &[f64], tol: Tolerances, span: f64) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = x.len() as f64;
    let sc: Vec<f64> = x.iter().map(|v| tol.atol + tol.rtol * v.abs()).collect();
    let d0 = (x.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let x1: Vec<f64> = x.iter().zip(f0).map(|(v, d)| v + h0 * d).collect();
    let mut f1 = vec![0.0; x.len()];
    f(t + h0, &x1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
