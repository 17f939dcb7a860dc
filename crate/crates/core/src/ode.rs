//! Dormand–Prince 5(4) integration with step history.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// One step of size h; returns (y(x + h), local error estimate).
pub(crate) fn step<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    x: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, y);
    for s in 1..7 {
        let mut ys = *y;
        for (i, v) in ys.iter_mut().enumerate() {
            for (j, kj) in k.iter().enumerate().take(s) {
                *v += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(x + C[s] * h, &ys);
    }
    let mut ynew = *y;
    let mut err = [0.0; N];
    for i in 0..N {
        for s in 0..6 {
            ynew[i] += h * A[6][s] * k[s][i];
        }
        for s in 0..7 {
            err[i] += h * E[s] * k[s][i];
        }
    }
    (ynew, err)
}

/// Accepted steps (x, y) from x0 to x_end inclusive.
pub(crate) fn integrate<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<Vec<(f64, [f64; N])>> {
    let mut out = vec![(x0, y0)];
    let (mut x, mut y) = (x0, y0);
    let mut h = (1e-3 * (x_end - x0)).max(1e-6 * x0.max(1e-12)).min(x_end - x0);
    let h_min = 1e-14 * x_end.abs().max(1.0);
    let mut rejected = 0usize;
    while x < x_end {
        if x + h > x_end {
            h = x_end - x;
        }
        let (ynew, err) = step(f, x, &y, h);
        let mut norm = 0.0;
        for i in 0..N {
            let sc = atol + rtol * y[i].abs().max(ynew[i].abs());
            norm += (err[i] / sc).powi(2);
        }
        let norm = (norm / N as f64).sqrt();
        if !norm.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            rejected += 1;
        } else if norm <= 1.0 {
            x = if x_end - (x + h) < h_min { x_end } else { x + h };
            y = ynew;
            out.push((x, y));
            h *= (0.9 * norm.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            continue;
        } else {
            h *= (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
            rejected += 1;
        }
        if h < h_min || rejected > 100_000 {
            return Err(Error::Integration { x, reason: "step size underflow".into() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let out = integrate(&f, 0.0, [0.0, 1.0], 10.0, 1e-12, 1e-12).unwrap();
        let (x, y) = *out.last().unwrap();
        assert_eq!(x, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-10);
        let (y5, _) = step(&f, out[3].0, &out[3].1, 0.5 * (out[4].0 - out[3].0));
        let xm = 0.5 * (out[3].0 + out[4].0);
        assert!((y5[0] - xm.sin()).abs() < 1e-11);
    }
}
