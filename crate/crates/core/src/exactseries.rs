//! Closed forms, torus integrals and equal-argument Jack series for the
//! Laguerre β ensemble at the hard edge (ξ = 1).
//!
//! The torus integrals are evaluated by the product trapezoidal rule. The
//! integrand is periodic and analytic only when 2/β is an integer, so the
//! torus routes reject other β. For those β, `hard_gap_series` and
//! `finite_n_gap_series` sum the generalized hypergeometric series over
//! partitions with every argument equal, which needs only the principal
//! specialization of the Jack polynomials.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

/// Largest admissible number of torus grid points.
pub const GRID_BUDGET: f64 = 1e8;
const IMAG_TOL: f64 = 1e-9;

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be non-negative, got {s}")));
    }
    Ok(())
}

fn lg(x: f64) -> f64 {
    ln_gamma(x).expect("positive gamma argument")
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// ₀F₁(; b; z) = Σ z^p / (p! (b)_p).
pub fn f01_scalar(b: f64, z: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("f01 needs b > 0, got {b}")));
    }
    let mut sum = Sum::default();
    let mut term = 1.0;
    for p in 0..10_000usize {
        sum.add(term);
        let pf = p as f64;
        term *= z / ((pf + 1.0) * (b + pf));
        if term.abs() <= 1e-17 * sum.value().abs() && pf > z.abs().sqrt() {
            return Ok(sum.value());
        }
    }
    Err(Error::Tolerance(format!("f01 series did not converge at z = {z}")))
}

/// (V, c2) for a = 1: the hard-edge gap and its 1/N² coefficient under the
/// optimal scaling s/(4(N + 1/β)).
pub fn gap_a1_exact(beta: f64, s: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    check_s(s)?;
    let b = 2.0 / beta;
    let e = (-beta * s / 8.0).exp();
    let f0 = f01_scalar(b, s / 4.0)?;
    let f1 = f01_scalar(b + 1.0, s / 4.0)?;
    let v = e * f0;
    let c2 = s / 48.0 * e * ((-1.0 + 1.0 / beta) * f0 + ((1.0 - 1.0 / beta) + s * beta / 8.0) * f1);
    Ok((v, c2))
}

/// E_N(0; (0, t)) for a = 1 at the actual interval end t.
///
/// Every term of the terminating series is positive, so the sum is taken in
/// log space without cancellation.
pub fn gap_a1_finite_n(beta: f64, n: usize, t: f64) -> Result<f64> {
    check_beta(beta)?;
    check_s(t)?;
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let b = 2.0 / beta;
    let nf = n as f64;
    let mut logs = Vec::with_capacity(n + 1);
    let mut l = 0.0;
    logs.push(l);
    for p in 0..n {
        let pf = p as f64;
        l += ((nf - pf) * t / ((pf + 1.0) * (b + pf))).ln();
        logs.push(l);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Sum::default();
    for v in &logs {
        sum.add((v - top).exp());
    }
    Ok((top + sum.value().ln() - beta * nf * t / 2.0).exp())
}

/// Trapezoidal product grid on [−π, π)^dims.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    pub dims: usize,
    pub points_per_dim: usize,
}

impl TorusGrid {
    pub fn new(dims: usize, points_per_dim: usize) -> Result<Self> {
        if points_per_dim < 4 || points_per_dim % 2 == 1 {
            return Err(Error::InvalidParams(format!(
                "points per dimension must be even and at least 4, got {points_per_dim}"
            )));
        }
        let total = (points_per_dim as f64).powi(dims as i32);
        if total > GRID_BUDGET {
            return Err(Error::Budget { points: total, limit: GRID_BUDGET });
        }
        Ok(Self { dims, points_per_dim })
    }

    /// Default resolution for a given dimension.
    pub fn default_for(dims: usize) -> Result<Self> {
        Self::new(dims, if dims <= 2 { 64 } else { 48 })
    }

    pub fn total_points(&self) -> usize {
        self.points_per_dim.pow(self.dims as u32)
    }
}

type Insert<'a> = &'a (dyn Fn(&[C64]) -> C64 + Sync);

/// Means over the full grid and over its even-index subgrid of
/// w(θ) · ins_q(z) for q = 0 (the constant 1) and each supplied insertion,
/// where w is the product of per-variable factors times the Vandermonde
/// power and z_l = r e^{iθ_l}. Per-variable factors are given in log form
/// and rescaled by their maximum modulus, which is returned.
struct Torus<'a> {
    grid: TorusGrid,
    z: Vec<C64>,
    single: Vec<C64>,
    log_scale: f64,
    vand: Vec<f64>,
    inserts: &'a [Insert<'a>],
}

impl<'a> Torus<'a> {
    fn new(
        grid: TorusGrid,
        radius: f64,
        vand_power: f64,
        log_factor: impl Fn(C64) -> C64,
        inserts: &'a [Insert<'a>],
    ) -> Self {
        let m = grid.points_per_dim;
        let z: Vec<C64> =
            (0..m).map(|k| C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64)).collect();
        let logs: Vec<C64> = z.iter().map(|&v| log_factor(v)).collect();
        let top = logs.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
        let single = logs.iter().map(|v| (v - top).exp()).collect();
        let vand = (0..m)
            .map(|d| {
                let h = (std::f64::consts::PI * d as f64 / m as f64).sin().abs();
                if d == 0 {
                    0.0
                } else {
                    (2.0 * h).powf(vand_power)
                }
            })
            .collect();
        Self { grid, z, single, log_scale: top * grid.dims as f64, vand, inserts }
    }

    fn run(&self) -> (Vec<C64>, Vec<C64>) {
        let m = self.grid.points_per_dim;
        let d = self.grid.dims;
        let nq = self.inserts.len() + 1;
        let chunks: Vec<(Vec<C64>, Vec<C64>)> = (0..m)
            .into_par_iter()
            .map(|i0| {
                let mut full = vec![C64::new(0.0, 0.0); nq];
                let mut half = vec![C64::new(0.0, 0.0); nq];
                let mut idx = vec![0usize; d];
                let mut zs = vec![C64::new(0.0, 0.0); d];
                idx[0] = i0;
                let inner = m.pow(d as u32 - 1);
                for _ in 0..inner {
                    let mut w = C64::new(1.0, 0.0);
                    for (l, &i) in idx.iter().enumerate() {
                        w *= self.single[i];
                        zs[l] = self.z[i];
                    }
                    for j in 0..d {
                        for k in j + 1..d {
                            w *= self.vand[(idx[k] + m - idx[j]) % m];
                        }
                    }
                    if w != C64::new(0.0, 0.0) {
                        let even = idx.iter().all(|i| i % 2 == 0);
                        full[0] += w;
                        if even {
                            half[0] += w;
                        }
                        for (q, f) in self.inserts.iter().enumerate() {
                            let v = w * f(&zs);
                            full[q + 1] += v;
                            if even {
                                half[q + 1] += v;
                            }
                        }
                    }
                    for l in (1..d).rev() {
                        idx[l] += 1;
                        if idx[l] < m {
                            break;
                        }
                        idx[l] = 0;
                    }
                }
                (full, half)
            })
            .collect();
        let n_full = self.grid.total_points() as f64;
        let n_half = (m / 2).pow(d as u32) as f64;
        let full = pairwise(&chunks.iter().map(|c| c.0.clone()).collect::<Vec<_>>());
        let half = pairwise(&chunks.iter().map(|c| c.1.clone()).collect::<Vec<_>>());
        (full.into_iter().map(|v| v / n_full).collect(), half.into_iter().map(|v| v / n_half).collect())
    }
}

fn pairwise(parts: &[Vec<C64>]) -> Vec<C64> {
    match parts.len() {
        0 => Vec::new(),
        1 => parts[0].clone(),
        n => {
            let (l, r) = parts.split_at(n / 2);
            pairwise(l).into_iter().zip(pairwise(r)).map(|(a, b)| a + b).collect()
        }
    }
}

fn check_imag(v: C64) -> Result<()> {
    if v.im.abs() > IMAG_TOL * v.norm().max(1e-300) {
        return Err(Error::ImaginaryResidual(v.im.abs() / v.norm()));
    }
    Ok(())
}

/// 2/β as an integer, or an error for β where the torus integrand is not
/// periodic-analytic.
fn torus_exponent(beta: f64) -> Result<i32> {
    let c = 2.0 / beta;
    if (c - c.round()).abs() > 1e-12 {
        return Err(Error::Unsupported(format!("torus integrals need 2/beta to be an integer, got beta = {beta}")));
    }
    Ok(c.round() as i32)
}

fn grid_for(dims: usize, m: Option<usize>) -> Result<TorusGrid> {
    match m {
        Some(m) => TorusGrid::new(dims, m),
        None => TorusGrid::default_for(dims),
    }
}

/// Radius balancing the growth of e^{u z} against e^{v/z}.
fn balanced_radius(u: f64, v: f64) -> f64 {
    if u > 0.0 {
        (v / u).sqrt()
    } else {
        1.0
    }
}

/// Hard-edge gap from the torus integral, with the coefficient of 1/N under
/// the naive s/4N scaling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardGapResult {
    pub value: f64,
    /// (a/β) s dE/ds.
    pub c1: f64,
    pub m_used: usize,
    /// Largest change of value or c1 between M and M/2.
    pub est_error: f64,
}

/// Averages ⟨1⟩, ⟨Σz/4⟩, ⟨Σ1/z⟩, ⟨Σ1/z²⟩ with the hard-edge weight,
/// normalized so ⟨1⟩ = ₀F₁^{(β/2)}(2a/β; (s/4)^a). Full and half grids.
fn hard_averages(beta: f64, a: usize, s: f64, m: Option<usize>) -> Result<([C64; 4], [C64; 4], usize)> {
    let c = torus_exponent(beta)? as f64;
    let grid = grid_for(a, m)?;
    let r = balanced_radius(s / 4.0, 1.0);
    let ins_d: Insert = &|z: &[C64]| z.iter().sum::<C64>() / 4.0;
    let ins_1: Insert = &|z: &[C64]| z.iter().map(|v| v.inv()).sum();
    let ins_2: Insert = &|z: &[C64]| z.iter().map(|v| v.inv().powi(2)).sum();
    let inserts = [ins_d, ins_1, ins_2];
    let torus = Torus::new(grid, r, 2.0 * c, |z| (c - 1.0) * z.ln() + s * z / 4.0 + z.inv(), &inserts);
    let (full, half) = torus.run();
    let norm = (a as f64 * lg(c) - lg(1.0 + a as f64) + torus.log_scale).exp();
    let f = |v: &[C64]| [v[0] * norm, v[1] * norm, v[2] * norm, v[3] * norm];
    Ok((f(&full), f(&half), grid.points_per_dim))
}

/// Unnormalized hard-edge torus integrand at the angles θ on the unit circle.
pub fn hard_integrand(beta: f64, s: f64, theta: &[f64]) -> C64 {
    let c = 2.0 / beta;
    let mut w = C64::new(1.0, 0.0);
    for &t in theta {
        let z = C64::from_polar(1.0, t);
        w *= (C64::new(0.0, t * (c - 1.0)) + s * z / 4.0 + z.inv()).exp();
    }
    for j in 0..theta.len() {
        for k in j + 1..theta.len() {
            w *= (2.0 * ((theta[k] - theta[j]) / 2.0).sin().abs()).powf(4.0 / beta);
        }
    }
    w
}

/// E_β^hard(s; a) = e^{−βs/8} ₀F₁^{(β/2)}(2a/β; (s/4)^a) by the a-dimensional
/// torus integral. `m = None` uses the default resolution.
pub fn hard_gap_torus(beta: f64, a: usize, s: f64, m: Option<usize>) -> Result<HardGapResult> {
    check_beta(beta)?;
    check_s(s)?;
    if a == 0 || s == 0.0 {
        let e = (-beta * s / 8.0).exp();
        return Ok(HardGapResult { value: e, c1: 0.0, m_used: 0, est_error: 0.0 });
    }
    if a > 4 {
        return Err(Error::Unsupported(format!("torus gap needs a <= 4, got {a}")));
    }
    let (full, half, m_used) = hard_averages(beta, a, s, m)?;
    check_imag(full[0])?;
    let e = (-beta * s / 8.0).exp();
    let assemble = |v: &[C64; 4]| {
        let val = e * v[0].re;
        let de = e * (v[1].re - beta / 8.0 * v[0].re);
        (val, a as f64 / beta * s * de)
    };
    let (value, c1) = assemble(&full);
    let (v2, c2) = assemble(&half);
    Ok(HardGapResult { value, c1, m_used, est_error: (value - v2).abs().max((c1 - c2).abs()) })
}

/// Finite-N value with the M vs M/2 disagreement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusValue {
    pub value: f64,
    pub est_error: f64,
}

/// ln(1/M_a(2/β − 1, N, 2/β)).
fn ln_inv_selberg_norm(beta: f64, a: usize, n: usize) -> f64 {
    let c = 2.0 / beta;
    let nf = n as f64;
    (1..=a)
        .map(|j| {
            let jf = j as f64;
            lg(jf * c) + lg(1.0 + nf + (jf - 1.0) * c) + lg(1.0 + c) - lg(nf + jf * c) - lg(1.0 + jf * c)
        })
        .sum()
}

/// E_N(0; (0, t); x^a e^{−βx/2}) at the actual interval end t, by the
/// a-dimensional torus integral.
pub fn finite_n_gap_torus(beta: f64, a: usize, n: usize, t: f64, m: Option<usize>) -> Result<TorusValue> {
    check_beta(beta)?;
    check_s(t)?;
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    let nf = n as f64;
    let base = -beta * nf * t / 2.0;
    if a == 0 || t == 0.0 {
        return Ok(TorusValue { value: base.exp(), est_error: 0.0 });
    }
    if a > 4 {
        return Err(Error::Unsupported(format!("torus gap needs a <= 4, got {a}")));
    }
    let c = torus_exponent(beta)? as f64;
    let grid = grid_for(a, m)?;
    let r = balanced_radius(t, nf);
    let torus =
        Torus::new(grid, r, 2.0 * c, |z| (c - 1.0) * z.ln() + (nf + c - 1.0) * (1.0 + z.inv()).ln() + t * z, &[]);
    let (full, half) = torus.run();
    check_imag(full[0])?;
    let ln_pref = base + ln_inv_selberg_norm(beta, a, n) + torus.log_scale;
    let value = (ln_pref + full[0].re.ln()).exp();
    let coarse = (ln_pref + half[0].re.max(1e-300).ln()).exp();
    Ok(TorusValue { value, est_error: (value - coarse).abs() })
}

/// Both sides of the 1/N-coefficient identity for the hard-edge average A_a.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaCorrection {
    /// Weighted sum of ⟨1⟩, ⟨Σe^{−iθ}⟩, ⟨Σe^{−2iθ}⟩.
    pub direct: f64,
    /// −(a/8) s A + (a/β) s A′ with A′ from the inserted derivative factor.
    pub identity: f64,
    /// The identity side with A′ from centered differences.
    pub identity_fd: f64,
}

/// C_a(s), the coefficient of 1/N in ₁F₁^{(β/2)}(−N; 2a/β; (−s/4N)^a).
pub fn c_a_correction(beta: f64, a: usize, s: f64, m: Option<usize>) -> Result<CaCorrection> {
    check_beta(beta)?;
    check_s(s)?;
    if a == 0 {
        return Ok(CaCorrection { direct: 0.0, identity: 0.0, identity_fd: 0.0 });
    }
    let (v, _, _) = hard_averages(beta, a, s, m)?;
    let (af, bf) = (a as f64, 2.0 / beta);
    let direct = af * af / beta * (1.0 - bf) * v[0].re - (1.0 - bf) * v[2].re - 0.5 * v[3].re;
    let identity = -af / 8.0 * s * v[0].re + af / beta * s * v[1].re;
    let h = 1e-3 * s.max(1.0);
    let a_at = |x: f64| hard_averages(beta, a, x, m).map(|r| r.0[0].re);
    let a_prime = if s >= 2.0 * h {
        let d = |h: f64| -> Result<f64> { Ok((a_at(s + h)? - a_at(s - h)?) / (2.0 * h)) };
        let (d1, d2) = (d(h)?, d(h / 2.0)?);
        d2 + (d2 - d1) / 3.0
    } else {
        v[1].re
    };
    let identity_fd = -af / 8.0 * s * v[0].re + af / beta * s * a_prime;
    Ok(CaCorrection { direct, identity, identity_fd })
}

/// Hard-edge density and its 1/N coefficient under the naive scaling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityResult {
    /// ρ_β^hard(s; a) = s^a Ã_β(s).
    pub rho0: f64,
    /// (a/β) d/ds (s^{1+a} Ã_β(s)).
    pub c1: f64,
    /// The same coefficient assembled from the weighted torus averages.
    pub c1_direct: f64,
    pub m_used: usize,
    pub est_error: f64,
}

/// ln of the prefactor turning ₀F₁^{(β/2)}(2a/β + 2; (−s/4)^β) into Ã_β(s).
fn ln_density_prefactor(beta: f64, a: f64) -> f64 {
    -(1.0 + a) * 4f64.ln() + (1.0 + 2.0 * a) * (beta / 2.0).ln() + lg(1.0 + beta / 2.0)
        - lg(1.0 + a)
        - lg(1.0 + a + beta / 2.0)
}

/// Hard-edge spectral density for even β by the β-dimensional torus integral.
///
/// The integrand is analytic when the angular exponent 2a/β + 2/β − 1 is an
/// integer. At β = 2 the contour is deformed to balance the exponentials; at
/// β = 4 the Vandermonde factor |·|¹ has a cusp on the diagonal, the unit
/// circle is kept and convergence is only algebraic, which `est_error` shows.
pub fn density_hard_torus(beta: u32, a: f64, s: f64, m: Option<usize>) -> Result<DensityResult> {
    if beta != 2 && beta != 4 {
        return Err(Error::Unsupported(format!("density torus needs beta in {{2, 4}}, got {beta}")));
    }
    if !(a > -1.0) {
        return Err(Error::Domain(format!("a must exceed -1, got {a}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("density needs s > 0, got {s}")));
    }
    let bf = beta as f64;
    let c = 2.0 * a / bf + 2.0 / bf - 1.0;
    if (c - c.round()).abs() > 1e-12 {
        return Err(Error::Unsupported(format!("density torus needs 2a/beta + 2/beta - 1 integer, got {c}")));
    }
    let c = c.round();
    let grid = grid_for(beta as usize, m)?;
    let r = if beta == 2 { balanced_radius(s / 4.0, 1.0) } else { 1.0 };
    let ins_d: Insert = &|z: &[C64]| -z.iter().sum::<C64>() / 4.0;
    let ins_1: Insert = &|z: &[C64]| z.iter().map(|v| v.inv()).sum();
    let ins_2: Insert = &|z: &[C64]| z.iter().map(|v| v.inv().powi(2)).sum();
    let inserts = [ins_d, ins_1, ins_2];
    let torus = Torus::new(grid, r, 4.0 / bf, |z| c * z.ln() - s * z / 4.0 + z.inv(), &inserts);
    let (full, half) = torus.run();
    check_imag(full[0])?;
    let ln_f01_norm: f64 = (1..=beta)
        .map(|j| {
            let jf = j as f64;
            lg(1.0 + 2.0 / bf) + lg(2.0 * a / bf + 2.0 * jf / bf) - lg(1.0 + 2.0 * jf / bf)
        })
        .sum();
    let norm = (ln_density_prefactor(bf, a) + ln_f01_norm + torus.log_scale).exp();
    let sa = s.powf(a);
    let assemble = |v: &[C64]| {
        let (a0, da, e1, e2) = (v[0].re * norm, v[1].re * norm, v[2].re * norm, v[3].re * norm);
        let c1 = sa * a / bf * (s * da + (1.0 + a) * a0);
        let direct =
            sa * ((a - a / bf - a * a / bf - bf * s / 8.0) * a0 + (2.0 * a / bf + 2.0 / bf - 2.0) * e1 - 0.5 * e2);
        (sa * a0, c1, direct)
    };
    let (rho0, c1, c1_direct) = assemble(&full);
    let (r2, c12, _) = assemble(&half);
    Ok(DensityResult {
        rho0,
        c1,
        c1_direct,
        m_used: grid.points_per_dim,
        est_error: (rho0 - r2).abs().max((c1 - c12).abs()),
    })
}

/// Generalized hypergeometric series ₚF_q^{(α)}(upper; lower; x, …, x) with
/// m equal arguments: Σ_κ [upper]_κ/[lower]_κ C_κ^{(α)}(1^m) x^{|κ|}/|κ|!
/// over partitions with at most m parts.
///
/// Each partition's term is a product over its boxes, which keeps the
/// intermediate magnitudes moderate. Summation stops once a full degree
/// shell drops below 1e−17 of the running total.
pub fn hypergeometric_equal_args(alpha: f64, upper: &[f64], lower: &[f64], m: usize, x: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if m == 0 || x == 0.0 {
        return Ok(1.0);
    }
    for &b in lower {
        for i in 0..m {
            let v = b - i as f64 / alpha;
            if v <= 0.0 && v.fract() == 0.0 {
                return Err(Error::Domain(format!("lower parameter {b} hits a pole")));
            }
        }
    }
    // Degree cap for terminating series: a vanishing rising factorial in the
    // first row bounds κ₁.
    let max_part =
        upper.iter().filter(|&&p| p <= 0.0 && p.fract() == 0.0).map(|&p| (-p) as usize).min().unwrap_or(usize::MAX);
    let max_degree = if max_part == usize::MAX { 4000 } else { max_part.saturating_mul(m) };
    let mut total = Sum::default();
    total.add(1.0);
    let mut prev_shell = f64::INFINITY;
    let mut parts = vec![0usize; m];
    for k in 1..=max_degree {
        let mut shell = Sum::default();
        let mut shell_abs = 0.0;
        for_each_partition(k, m, max_part, &mut parts, &mut |kap| {
            let t = partition_term(alpha, upper, lower, m, x, kap);
            shell.add(t);
            shell_abs += t.abs();
        });
        total.add(shell.value());
        let small = shell_abs <= 1e-17 * total.value().abs();
        if small && shell_abs <= prev_shell && k > 4 {
            return Ok(total.value());
        }
        prev_shell = shell_abs;
        if k == 4000 {
            return Err(Error::Tolerance(format!("Jack series did not converge at x = {x}")));
        }
    }
    Ok(total.value())
}

/// Visits partitions of k into at most m parts, each at most max_part.
fn for_each_partition(k: usize, m: usize, max_part: usize, buf: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    fn rec(rest: usize, pos: usize, cap: usize, m: usize, buf: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if rest == 0 {
            f(&buf[..pos]);
            return;
        }
        if pos == m {
            return;
        }
        let slots = m - pos;
        let hi = cap.min(rest);
        let lo = rest.div_ceil(slots);
        for p in (lo..=hi).rev() {
            buf[pos] = p;
            rec(rest - p, pos + 1, p, m, buf, f);
        }
    }
    rec(k, 0, max_part, m, buf, f);
}

fn partition_term(alpha: f64, upper: &[f64], lower: &[f64], m: usize, x: f64, kap: &[usize]) -> f64 {
    let conj = |j: usize| kap.iter().take_while(|&&ki| ki > j).count();
    let mut t = 1.0;
    for (i, &ki) in kap.iter().enumerate() {
        let fi = i as f64;
        for j in 0..ki {
            let fj = j as f64;
            let arm = (ki - j - 1) as f64;
            let leg = (conj(j) - i - 1) as f64;
            let mut box_factor =
                alpha * x * (m as f64 - fi + alpha * fj) / ((alpha * arm + leg + 1.0) * (alpha * (arm + 1.0) + leg));
            for &p in upper {
                box_factor *= p - fi / alpha + fj;
            }
            for &q in lower {
                box_factor /= q - fi / alpha + fj;
            }
            t *= box_factor;
        }
    }
    t
}

fn check_gap_args(beta: f64, a: usize, s: f64) -> Result<()> {
    check_beta(beta)?;
    check_s(s)?;
    if a > 8 {
        return Err(Error::Unsupported(format!("series gap supports a <= 8, got {a}")));
    }
    Ok(())
}

/// E_β^hard(s; a) for any β > 0 by the equal-argument Jack series.
pub fn hard_gap_series(beta: f64, a: usize, s: f64) -> Result<f64> {
    check_gap_args(beta, a, s)?;
    let e = (-beta * s / 8.0).exp();
    if a == 0 {
        return Ok(e);
    }
    let f = hypergeometric_equal_args(beta / 2.0, &[], &[2.0 * a as f64 / beta], a, s / 4.0)?;
    Ok(e * f)
}

/// E_N(0; (0, t); x^a e^{−βx/2}) at the actual interval end t for any β > 0.
///
/// All terms of the terminating series are positive.
pub fn finite_n_gap_series(beta: f64, a: usize, n: usize, t: f64) -> Result<f64> {
    check_gap_args(beta, a, t)?;
    if n == 0 {
        return Err(Error::InvalidParams("N must be at least 1".into()));
    }
    let base = (-beta * n as f64 * t / 2.0).exp();
    if a == 0 {
        return Ok(base);
    }
    let f = hypergeometric_equal_args(beta / 2.0, &[-(n as f64)], &[2.0 * a as f64 / beta], a, -t)?;
    Ok(base * f)
}

/// ρ_β^hard(s; a) for even β by the equal-argument Jack series.
pub fn density_hard_series(beta: u32, a: f64, s: f64) -> Result<f64> {
    if beta == 0 || beta % 2 == 1 {
        return Err(Error::Unsupported(format!("density series needs even beta, got {beta}")));
    }
    if !(a > -1.0) {
        return Err(Error::Domain(format!("a must exceed -1, got {a}")));
    }
    check_s(s)?;
    let bf = beta as f64;
    let f = hypergeometric_equal_args(bf / 2.0, &[], &[2.0 * a / bf + 2.0], beta as usize, -s / 4.0)?;
    Ok(s.powf(a) * ln_density_prefactor(bf, a).exp() * f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_enumerated_once() {
        let mut buf = vec![0; 3];
        let mut n = 0;
        for_each_partition(6, 3, usize::MAX, &mut buf, &mut |p| {
            assert!(p.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(p.iter().sum::<usize>(), 6);
            n += 1;
        });
        // 6, 51, 42, 411, 33, 321, 222
        assert_eq!(n, 7);
    }

    #[test]
    fn one_variable_series_is_scalar() {
        let v = hypergeometric_equal_args(1.7, &[], &[0.8], 1, 2.3).unwrap();
        assert!((v - f01_scalar(0.8, 2.3).unwrap()).abs() < 1e-14 * v);
        // ₀F₀ with m arguments is e^{m x}
        let e = hypergeometric_equal_args(0.6, &[], &[], 3, 0.7).unwrap();
        assert!((e - (2.1f64).exp()).abs() < 1e-13 * e);
    }

    #[test]
    fn vandermonde_table_is_symmetric() {
        let g = TorusGrid::new(2, 8).unwrap();
        let t = Torus::new(g, 1.0, 2.0, |_| C64::new(0.0, 0.0), &[]);
        for d in 1..8 {
            assert!((t.vand[d] - t.vand[8 - d]).abs() < 1e-14);
        }
        assert_eq!(t.vand[0], 0.0);
    }
}
