//! Gauss–Legendre and Gauss–Jacobi rules for Nyström discretization.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes and weights of an m-point rule on an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Gauss–Legendre rule on [lo, hi] with nodes in increasing order.
    pub fn gauss_legendre(m: usize, lo: T, hi: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("quadrature order must be positive".into()));
        }
        if !(hi > lo) {
            return Err(Error::InvalidParams(format!("empty interval [{lo}, {hi}]")));
        }
        let (x, w) = legendre_nodes(m);
        let half = (hi - lo) * T::c(0.5);
        let mid = (hi + lo) * T::c(0.5);
        Ok(Self {
            nodes: x.iter().map(|&t| mid + half * T::c(t)).collect(),
            weights: w.iter().map(|&v| half * T::c(v)).collect(),
        })
    }

    /// Rule for ∫_lo^hi (x − lo)^e f(x) dx, e > −1, by Golub–Welsch.
    pub fn gauss_jacobi_left(m: usize, e: T, lo: T, hi: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParams("quadrature order must be positive".into()));
        }
        if !(hi > lo) {
            return Err(Error::InvalidParams(format!("empty interval [{lo}, {hi}]")));
        }
        if !(e > -T::one()) {
            return Err(Error::Domain(format!("endpoint exponent must exceed -1, got {e}")));
        }
        let (x, w) = jacobi_nodes(m, e.f64());
        let half = (hi - lo) * T::c(0.5);
        let scale = half.powf(e + T::one());
        Ok(Self {
            nodes: x.iter().map(|&t| lo + half * (T::one() + T::c(t))).collect(),
            weights: w.iter().map(|&v| scale * T::c(v)).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).fold(T::zero(), |a, b| a + b)
    }
}

/// Nodes (ascending) and weights on [−1, 1] by Newton iteration on P_m.
fn legendre_nodes(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 * z.abs().max(1e-3) {
                dp = legendre_eval(m, z).1;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// Nodes (ascending) and weights on [−1, 1] for the weight (1 + t)^b.
fn jacobi_nodes(m: usize, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m];
    for n in 0..m {
        let nf = n as f64;
        let s = 2.0 * nf + b;
        diag[n] = if n == 0 { b / (b + 2.0) } else { b * b / (s * (s + 2.0)) };
        if n + 1 < m {
            let k = nf + 1.0;
            let s = 2.0 * k + b;
            let v = if n == 0 {
                4.0 * (1.0 + b) / ((2.0 + b) * (2.0 + b) * (3.0 + b))
            } else {
                4.0 * k * k * (k + b) * (k + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off[n] = v.sqrt();
        }
    }
    let mu0 = (b + 1.0).exp2() / (b + 1.0);
    let mut z = vec![0.0; m];
    z[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut z);
    let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(z).map(|(x, v)| (x, mu0 * v * v)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; `z` carries the first
/// row of the eigenvector matrix. Eigenvalues overwrite `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let t = z[i + 1];
                z[i + 1] = s * z[i] + c * t;
                z[i] = c * z[i] - s * t;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// (P_m(z), P′_m(z)).
fn legendre_eval(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length_and_nodes_increase() {
        for &m in &[1usize, 2, 7, 64, 256] {
            let q = QuadratureRule::gauss_legendre(m, 0.0, 3.5).unwrap();
            let sw: f64 = q.weights.iter().sum();
            assert!((sw - 3.5).abs() < 1e-12, "m={m}");
            assert!(q.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(q.nodes.iter().all(|&x| x > 0.0 && x < 3.5));
        }
    }

    #[test]
    fn exact_for_degree_2m_minus_1() {
        let m = 9;
        let q = QuadratureRule::gauss_legendre(m, 0.0, 2.0).unwrap();
        for d in 0..(2 * m) as i32 {
            let got = q.integrate(|x: f64| x.powi(d));
            let want = 2f64.powi(d + 1) / (d + 1) as f64;
            assert!((got - want).abs() < 1e-12 * want, "degree {d}");
        }
    }

    #[test]
    fn jacobi_rule_integrates_weighted_monomials() {
        for &e in &[0.0f64, 0.5, -0.5, 1.5, 3.7] {
            let m = 12;
            let q = QuadratureRule::gauss_jacobi_left(m, e, 0.0, 2.0).unwrap();
            assert!(q.nodes.windows(2).all(|p| p[0] < p[1]));
            for d in 0..(2 * m) as i32 {
                let got = q.integrate(|x: f64| x.powi(d));
                let want = 2f64.powf(d as f64 + e + 1.0) / (d as f64 + e + 1.0);
                assert!((got - want).abs() < 1e-12 * want, "e={e} degree {d}: {got} {want}");
            }
        }
        let big = QuadratureRule::gauss_jacobi_left(256, 0.5, 0.0, 1.0).unwrap();
        let got = big.integrate(|x: f64| x.cos());
        // ∫₀¹ √x cos x dx
        assert!((got - 0.5312026830845154).abs() < 1e-13, "{got}");
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(QuadratureRule::<f64>::gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(QuadratureRule::<f64>::gauss_legendre(4, 1.0, 1.0).is_err());
    }
}
