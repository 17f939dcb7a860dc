//! σ-form Painlevé III route to the hard-edge gap: the nonlinear σ₀, the linear
//! correction equations for σ₁ and σ̂₂, and the τ-function integrals.
//!
//! Small-x data come from a double series
//! σ(x) = Σ_{i≥1} Σ_{k≥0} c[i][k] x^{iμ+k}, μ = 1 + a,
//! where level i collects the ξ^i part. Level one is the exact boundary
//! behaviour, higher levels follow from the ODE order by order. The ODEs are
//! integrated from a handoff point x₀ with Dormand–Prince at 1e−12.
//!
//! Both σ₀ and the corrections are integrated in differentiated (third-order)
//! form. The second-order equations divide by σ₀″, which changes sign for
//! ξ < 1; their left-hand sides are first integrals of the third-order forms
//! and serve as residual checks.
//!
//! This module works in f64 only.

use crate::error::{Error, Result};
use crate::ode;
use crate::specfun::bessel_series_coeffs;

/// Formal series Σ_i Σ_k c[i][k] x^{(i+1)μ + k + off} (level index i from 0).
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSeries {
    pub mu: f64,
    pub off: i32,
    pub coeffs: Vec<Vec<f64>>,
}

impl LevelSeries {
    pub fn zeros(mu: f64, off: i32, levels: usize, terms: usize) -> Self {
        Self { mu, off, coeffs: vec![vec![0.0; terms]; levels] }
    }

    pub fn levels(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// Exponent of coefficient (i, k).
    pub fn exponent(&self, i: usize, k: usize) -> f64 {
        (i + 1) as f64 * self.mu + k as f64 + self.off as f64
    }

    fn shifted(&self, off: i32) -> Self {
        debug_assert!(off <= self.off);
        let pad = (self.off - off) as usize;
        let k = self.terms();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut v = vec![0.0; k];
                for (j, &x) in c.iter().enumerate().take(k.saturating_sub(pad)) {
                    v[j + pad] = x;
                }
                v
            })
            .collect();
        Self { mu: self.mu, off, coeffs }
    }

    pub fn add(&self, o: &Self) -> Self {
        let off = self.off.min(o.off);
        let (a, b) = (self.shifted(off), o.shifted(off));
        let mut out = a.clone();
        for (ci, bi) in out.coeffs.iter_mut().zip(&b.coeffs) {
            for (x, y) in ci.iter_mut().zip(bi) {
                *x += y;
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    /// Product truncated to the same number of levels and terms.
    pub fn mul(&self, o: &Self) -> Self {
        let (l, k) = (self.levels(), self.terms());
        let mut out = Self::zeros(self.mu, self.off + o.off, l, k);
        for i in 0..l {
            for j in 0..l.saturating_sub(i + 1) {
                let dst = &mut out.coeffs[i + j + 1];
                for (k1, &x) in self.coeffs[i].iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    for (k2, &y) in o.coeffs[j].iter().enumerate().take(k - k1) {
                        dst[k1 + k2] += x * y;
                    }
                }
            }
        }
        out
    }

    pub fn mul_x(&self) -> Self {
        Self { off: self.off + 1, ..self.clone() }
    }

    pub fn deriv(&self) -> Self {
        let mut out = Self { off: self.off - 1, ..self.clone() };
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            for (k, v) in c.iter_mut().enumerate() {
                *v *= (i + 1) as f64 * self.mu + k as f64 + self.off as f64;
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        let lx = x.ln();
        let mut total = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut acc = 0.0;
            for &v in c.iter().rev() {
                acc = acc * x + v;
            }
            total += acc * (self.exponent(i, 0) * lx).exp();
        }
        total
    }

    /// ∫₀^x f(t) dt / t, requiring positive exponents.
    pub fn integral_over_x(&self, x: f64) -> f64 {
        let lx = x.ln();
        let mut total = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            for (k, &v) in c.iter().enumerate() {
                if v != 0.0 {
                    let e = self.exponent(i, k);
                    total += v * (e * lx).exp() / e;
                }
            }
        }
        total
    }

    /// Size of the last two terms of each level plus the whole last level at x.
    pub fn tail(&self, x: f64) -> f64 {
        let lx = x.ln();
        let term = |i: usize, k: usize| (self.coeffs[i][k] * (self.exponent(i, k) * lx).exp()).abs();
        let (l, k) = (self.levels(), self.terms());
        let mut t: f64 = (0..l).map(|i| term(i, k - 1) + term(i, k - 2)).sum();
        t += (0..k).map(|j| term(l - 1, j)).sum::<f64>();
        t
    }
}

/// Series of J_a(√x) and √x J_a′(√x) on x^{a/2 + j}.
fn bessel_pq(a: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let g = bessel_series_coeffs(a, n);
    let q = g.iter().enumerate().map(|(j, v)| v * (a + 2.0 * j as f64)).collect();
    (g, q)
}

fn cauchy(p: &[f64], q: &[f64]) -> Vec<f64> {
    let n = p.len().min(q.len());
    (0..n).map(|k| (0..=k).map(|j| p[j] * q[k - j]).sum()).collect()
}

fn check_params(a: f64, xi: f64) -> Result<()> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Domain(format!("a must exceed -1, got {a}")));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::Domain(format!("xi must lie in (0, 1], got {xi}")));
    }
    Ok(())
}

/// Small-x series of σ₀ with `levels` ξ-levels of `terms` coefficients each.
///
/// Level one is −ξ x K_∞(x, x); higher levels are fixed by the σ-PIII equation.
pub fn sigma0_series(a: f64, xi: f64, levels: usize, terms: usize) -> Result<LevelSeries> {
    check_params(a, xi)?;
    if terms < 8 || levels == 0 {
        return Err(Error::InvalidParams(format!("need terms >= 8 and levels >= 1, got {terms}, {levels}")));
    }
    let mu = 1.0 + a;
    let (p, q) = bessel_pq(a, terms + 2);
    let (pp, qq) = (cauchy(&p, &p), cauchy(&q, &q));
    let mut s = LevelSeries::zeros(mu, 0, levels, terms);
    // −xρ = −¼[(x − a²)P² + Q²]; the x^a coefficient cancels identically.
    for k in 0..terms {
        let n = k + 1;
        s.coeffs[0][k] = -0.25 * xi * (pp[n - 1] - a * a * pp[n] + qq[n]);
    }
    for i in 1..levels {
        let s1 = s.deriv();
        let nl = s1.mul(&s1).mul_x().scale(12.0).add(&s.mul(&s1).scale(-8.0));
        debug_assert_eq!(nl.off, -1);
        for k in 0..terms {
            let e = s.exponent(i, k);
            let div = 2.0 * e * ((e - 1.0).powi(2) - a * a);
            if div.abs() < 1e-12 * (1.0 + e.powi(3)) {
                return Err(Error::MatchingFailure { level: i + 1, order: k });
            }
            let prev = if k > 0 { (2.0 * e - 3.0) * s.coeffs[i][k - 1] } else { 0.0 };
            s.coeffs[i][k] = -(prev + nl.coeffs[i][k]) / div;
        }
    }
    Ok(s)
}

/// Which linear correction equation to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correction {
    /// Inhomogeneity −aσ₀′(xσ₀′ − σ₀), boundary −ξ x L₁(x, x).
    Sigma1,
    /// Inhomogeneity (xσ₀′ − σ₀)²/8, boundary −ξ x L̂₂(x, x).
    Sigma2Hat,
}

fn boundary_series(a: f64, xi: f64, which: Correction, levels: usize, terms: usize) -> LevelSeries {
    let (p, q) = bessel_pq(a, terms + 1);
    let (pp, qq, pq) = (cauchy(&p, &p), cauchy(&q, &q), cauchy(&p, &q));
    let mut t = LevelSeries::zeros(1.0 + a, 0, levels, terms);
    for k in 0..terms {
        t.coeffs[0][k] = match which {
            Correction::Sigma1 => -xi * a / 8.0 * pp[k],
            Correction::Sigma2Hat => {
                let prev = if k > 0 { pp[k - 1] } else { 0.0 };
                xi / 192.0 * (a * a * pp[k] + 2.0 * prev + qq[k] + 4.0 * pq[k])
            }
        };
    }
    t
}

/// Coefficients A, B, C, D of A τ″ + B τ′ + C τ = D as series at offsets 0, −1, −2, −2.
fn linear_coeff_series(s: &LevelSeries, a: f64, which: Correction) -> [LevelSeries; 4] {
    let s1 = s.deriv();
    let s2 = s1.deriv();
    let a_ser = s2.mul_x().mul_x().scale(4.0);
    let b_ser = s1
        .mul(&s1)
        .mul_x()
        .scale(24.0)
        .add(&s.mul(&s1).scale(-16.0))
        .add(&s1.mul_x().scale(4.0))
        .add(&s1.scale(-4.0 * a * a))
        .add(&s.scale(-2.0));
    let c_ser = s1.scale(-2.0).add(&s1.mul(&s1).scale(-8.0));
    let u = s1.mul_x().add(&s.scale(-1.0));
    let d_ser = match which {
        Correction::Sigma1 => s1.mul(&u).scale(-a),
        Correction::Sigma2Hat => u.mul(&u).scale(0.125),
    }
    .shifted(-2);
    [a_ser, b_ser, c_ser, d_ser]
}

/// Σ over level pairs (i, j) with i + j + 1 = lvl of coef[i][k1]·t(j, k2), k1 + k2 = k.
fn conv_entry(c: &LevelSeries, t: &dyn Fn(usize, usize) -> f64, lvl: usize, k: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..lvl {
        let j = lvl - 1 - i;
        for k1 in 0..=k {
            let v = c.coeffs[i][k1];
            if v != 0.0 {
                acc += v * t(j, k - k1);
            }
        }
    }
    acc
}

/// Small-x series of a correction τ solving the linear equation with σ₀ series `s`.
pub fn correction_series(s: &LevelSeries, a: f64, xi: f64, which: Correction) -> Result<LevelSeries> {
    let (levels, terms, mu) = (s.levels(), s.terms(), s.mu);
    let [ac, bc, cc, dc] = linear_coeff_series(s, a, which);
    let mut t = boundary_series(a, xi, which, levels, terms);
    let op = |q: usize, e: f64| ac.coeffs[0][q] * e * (e - 1.0) + bc.coeffs[0][q] * e + cc.coeffs[0][q];
    let p = (0..terms)
        .find(|&q| ac.coeffs[0][q] != 0.0 || bc.coeffs[0][q] != 0.0 || cc.coeffs[0][q] != 0.0)
        .ok_or_else(|| Error::SeedMatching("linear operator vanishes at small x".into()))?;
    for li in 1..levels.saturating_sub(1) {
        for n in 0..terms {
            if n + p >= terms {
                break;
            }
            let lvl = li + 1;
            let tt = &t;
            let e_of = |j: usize, k: usize| (j + 1) as f64 * mu + k as f64;
            let t0 = |j: usize, k: usize| tt.coeffs[j][k];
            let t1 = |j: usize, k: usize| e_of(j, k) * tt.coeffs[j][k];
            let t2 = |j: usize, k: usize| {
                let e = e_of(j, k);
                e * (e - 1.0) * tt.coeffs[j][k]
            };
            let lhs =
                conv_entry(&ac, &t2, lvl, n + p) + conv_entry(&bc, &t1, lvl, n + p) + conv_entry(&cc, &t0, lvl, n + p);
            let r = dc.coeffs[lvl][n + p] - lhs;
            let e = e_of(li, n);
            let d = op(p, e);
            let scale = ac.coeffs[0][p].abs() * e * e + bc.coeffs[0][p].abs() * e + cc.coeffs[0][p].abs();
            if d.abs() <= 1e-13 * scale {
                return Err(Error::SeedMatching(format!("resonant exponent {e} at level {}", li + 1)));
            }
            t.coeffs[li][n] = r / d;
        }
    }
    Ok(t)
}

/// Integration and series settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PainleveConfig {
    pub levels: usize,
    pub terms: usize,
    /// Fixed handoff point; `None` picks the largest power of two with series tail < 1e−15.
    pub x0: Option<f64>,
    pub tol: f64,
}

impl Default for PainleveConfig {
    fn default() -> Self {
        Self { levels: 16, terms: 40, x0: None, tol: 1e-12 }
    }
}

pub const MAX_S: f64 = 60.0;

#[derive(Clone, Debug)]
enum Tau {
    None,
    Zero(Correction),
    Series(Correction, [LevelSeries; 3]),
}

/// σ₀ (and optionally a correction τ) from 0 to s_max.
///
/// State layout: [σ, σ′, σ″, τ, τ′, τ″, ∫σ/x, ∫τ/x].
#[derive(Clone, Debug)]
pub struct SigmaTrajectory {
    pub a: f64,
    pub xi: f64,
    /// Series/ODE handoff point.
    pub x0: f64,
    /// Small-x coefficients of σ₀.
    pub series: LevelSeries,
    d1: LevelSeries,
    d2: LevelSeries,
    tau: Tau,
    config: PainleveConfig,
    steps: Vec<(f64, [f64; 8])>,
}

fn pick_x0(tails: &[&LevelSeries], cfg: &PainleveConfig) -> f64 {
    if let Some(x0) = cfg.x0 {
        return x0;
    }
    let mut x = 4.0;
    while x > 1e-5 {
        if tails.iter().all(|s| s.tail(x) < 1e-15) {
            return x;
        }
        x *= 0.5;
    }
    x
}

impl SigmaTrajectory {
    fn build(a: f64, xi: f64, s_max: f64, cfg: PainleveConfig, which: Option<Correction>) -> Result<Self> {
        check_params(a, xi)?;
        if !(s_max > 0.0 && s_max <= MAX_S) {
            return Err(Error::Domain(format!("s_max must lie in (0, {MAX_S}], got {s_max}")));
        }
        let series = sigma0_series(a, xi, cfg.levels, cfg.terms)?;
        let degenerate = a == 0.0 && xi == 1.0;
        let tau = match which {
            None => Tau::None,
            Some(w) if degenerate || (w == Correction::Sigma1 && a == 0.0) => Tau::Zero(w),
            Some(w) => {
                let t = correction_series(&series, a, xi, w)?;
                let t1 = t.deriv();
                let t2 = t1.deriv();
                Tau::Series(w, [t, t1, t2])
            }
        };
        let x0 = match &tau {
            Tau::Series(_, [t, ..]) => pick_x0(&[&series, t], &cfg),
            _ => pick_x0(&[&series], &cfg),
        };
        if x0 >= s_max {
            return Err(Error::Domain(format!("s_max {s_max} below handoff point {x0}")));
        }
        let d1 = series.deriv();
        let d2 = d1.deriv();
        let mut traj = Self { a, xi, x0, series, d1, d2, tau, config: cfg, steps: Vec::new() };
        let y0 = traj.series_state(x0);
        let rhs = traj.rhs();
        traj.steps = ode::integrate(&rhs, x0, y0, s_max, cfg.tol, cfg.tol)?;
        Ok(traj)
    }

    fn series_state(&self, x: f64) -> [f64; 8] {
        let (t, t1, t2, it) = match &self.tau {
            Tau::Series(_, [t, t1, t2]) => (t.eval(x), t1.eval(x), t2.eval(x), t.integral_over_x(x)),
            _ => (0.0, 0.0, 0.0, 0.0),
        };
        [self.series.eval(x), self.d1.eval(x), self.d2.eval(x), t, t1, t2, self.series.integral_over_x(x), it]
    }

    fn rhs(&self) -> impl Fn(f64, &[f64; 8]) -> [f64; 8] {
        let a = self.a;
        let which = match self.tau {
            Tau::Series(w, ..) => Some(w),
            _ => None,
        };
        move |x: f64, y: &[f64; 8]| {
            let (s, s1, s2, t, t1, t2) = (y[0], y[1], y[2], y[3], y[4], y[5]);
            let u = x * s1 - s;
            let s3 =
                -(2.0 * x * s2 + (1.0 + 8.0 * s1) * u + x * s1 * (1.0 + 4.0 * s1) - 2.0 * a * a * s1) / (2.0 * x * x);
            let t3 = match which {
                None => 0.0,
                Some(w) => {
                    let r = match w {
                        Correction::Sigma1 => -0.5 * a * (2.0 * x * s1 - s),
                        Correction::Sigma2Hat => 0.125 * x * u,
                    };
                    (r - 2.0 * x * t2 - (24.0 * x * s1 - 8.0 * s + 2.0 * x - 2.0 * a * a) * t1 + (1.0 + 8.0 * s1) * t)
                        / (2.0 * x * x)
                }
            };
            [s1, s2, s3, t1, t2, t3, s / x, t / x]
        }
    }

    pub fn s_max(&self) -> f64 {
        self.steps.last().map_or(self.x0, |s| s.0)
    }

    pub fn config(&self) -> PainleveConfig {
        self.config
    }

    pub fn grid(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.0).collect()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.1[0]).collect()
    }

    pub fn sigma_prime(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.1[1]).collect()
    }

    /// Which correction, if any, is carried.
    pub fn correction(&self) -> Option<Correction> {
        match self.tau {
            Tau::None => None,
            Tau::Zero(w) | Tau::Series(w, ..) => Some(w),
        }
    }

    /// Full state at x ∈ (0, s_max].
    pub fn state_at(&self, x: f64) -> Result<[f64; 8]> {
        if !(x > 0.0) || x > self.s_max() * (1.0 + 1e-14) {
            return Err(Error::Domain(format!("x = {x} outside (0, {}]", self.s_max())));
        }
        if x <= self.x0 {
            return Ok(self.series_state(x));
        }
        let i = self.steps.partition_point(|s| s.0 <= x) - 1;
        let (xi, yi) = self.steps[i];
        if xi == x {
            return Ok(yi);
        }
        Ok(ode::step(&self.rhs(), xi, &yi, x - xi).0)
    }

    /// (σ₀, σ₀′, σ₀″) at x.
    pub fn sigma_at(&self, x: f64) -> Result<(f64, f64, f64)> {
        let y = self.state_at(x)?;
        Ok((y[0], y[1], y[2]))
    }

    /// (τ, τ′) at x; zero when no correction is carried.
    pub fn tau_at(&self, x: f64) -> Result<(f64, f64)> {
        let y = self.state_at(x)?;
        Ok((y[3], y[4]))
    }

    /// (xσ″)² + σ′(1 + 4σ′)(xσ′ − σ) − (aσ′)² at x.
    pub fn residual(&self, x: f64) -> Result<f64> {
        let (s, s1, s2) = self.sigma_at(x)?;
        Ok((x * s2).powi(2) + s1 * (1.0 + 4.0 * s1) * (x * s1 - s) - (self.a * s1).powi(2))
    }

    /// Residual A τ″ + B τ′ + C τ − D of the second-order correction equation at x.
    pub fn correction_residual(&self, x: f64) -> Result<f64> {
        let y = self.state_at(x)?;
        let (s, s1, s2, t, t1, t2) = (y[0], y[1], y[2], y[3], y[4], y[5]);
        let a = self.a;
        let u = x * s1 - s;
        let lhs = 4.0 * x * x * s2 * t2 + (24.0 * x * s1 * s1 - 16.0 * s * s1 + 4.0 * (x - a * a) * s1 - 2.0 * s) * t1
            - 2.0 * s1 * (4.0 * s1 + 1.0) * t;
        let d = match self.correction() {
            Some(Correction::Sigma1) => -a * s1 * u,
            Some(Correction::Sigma2Hat) => 0.125 * u * u,
            None => 0.0,
        };
        Ok(lhs - d)
    }

    /// exp(∫₀^s σ₀ dx/x) and (∫₀^s τ dx/x)·exp(…).
    pub fn gap(&self, s: f64) -> Result<(f64, f64)> {
        if s == 0.0 {
            return Ok((1.0, 0.0));
        }
        let y = self.state_at(s)?;
        let e = y[6].exp();
        Ok((e, y[7] * e))
    }
}

/// σ₀ trajectory on (0, s_max] with default settings.
pub fn solve_sigma0(a: f64, xi: f64, s_max: f64) -> Result<SigmaTrajectory> {
    SigmaTrajectory::build(a, xi, s_max, PainleveConfig::default(), None)
}

pub fn solve_sigma0_with(a: f64, xi: f64, s_max: f64, cfg: PainleveConfig) -> Result<SigmaTrajectory> {
    SigmaTrajectory::build(a, xi, s_max, cfg, None)
}

/// Re-integrates σ₀ jointly with the chosen linear correction.
pub fn solve_linear_correction(traj: &SigmaTrajectory, which: Correction) -> Result<SigmaTrajectory> {
    let mut cfg = traj.config;
    if cfg.x0.is_none() {
        cfg.x0 = None;
    }
    SigmaTrajectory::build(traj.a, traj.xi, traj.s_max(), cfg, Some(which))
}

/// Gap evaluator built on a σ₀ + σ̂₂ trajectory.
#[derive(Clone, Debug)]
pub struct TauGap {
    traj: SigmaTrajectory,
}

impl TauGap {
    pub fn new(a: f64, xi: f64, s_max: f64) -> Result<Self> {
        Self::with_config(a, xi, s_max, PainleveConfig::default())
    }

    pub fn with_config(a: f64, xi: f64, s_max: f64, cfg: PainleveConfig) -> Result<Self> {
        Ok(Self { traj: SigmaTrajectory::build(a, xi, s_max, cfg, Some(Correction::Sigma2Hat))? })
    }

    /// (E, c2) at s.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        self.traj.gap(s)
    }

    pub fn trajectory(&self) -> &SigmaTrajectory {
        &self.traj
    }
}

/// (E, c2) at a single s by the τ-function route.
pub fn gap_tau(a: f64, xi: f64, s: f64) -> Result<(f64, f64)> {
    if s == 0.0 {
        check_params(a, xi)?;
        return Ok((1.0, 0.0));
    }
    TauGap::new(a, xi, s.max(1.0))?.eval(s)
}
