//! Differential-difference recurrence for characteristic-polynomial moments
//! ⟨∏(x − x_l)^n⟩ of the Laguerre β ensemble, in big-float arithmetic.
//!
//! Gap probabilities (integer a, any β) and spectral densities (even β) follow
//! from one sweep per (N, β, a); the resulting polynomial is then evaluated at
//! as many points as needed.

use crate::bigfloat::BigReal;
use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

pub const DEFAULT_PRECISION_BITS: usize = 256;
/// Extra bits of the shadow sweep used to detect cancellation.
pub const SHADOW_BITS: usize = 64;
/// Coefficients are rescaled by a power of two once the largest leaves
/// [2^−RENORM_BITS, 2^RENORM_BITS] (about [1e−8, 1e8]).
const RENORM_BITS: i32 = 27;

fn lg(x: f64) -> f64 {
    ln_gamma(x).expect("positive gamma argument")
}

/// ln W: the integral of ∏ x_l^a e^{−βx_l/2} ∏|x_k − x_j|^β over (0, ∞)^N.
pub fn ln_selberg_laguerre(a: f64, beta: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut v = nf * (a + 1.0 + beta * (nf - 1.0) / 2.0) * (2.0 / beta).ln();
    for j in 1..=n {
        let jf = j as f64;
        v += lg(1.0 + jf * beta / 2.0) + lg(1.0 + a + (jf - 1.0) * beta / 2.0) - lg(1.0 + beta / 2.0);
    }
    v
}

/// Polynomial with big-float coefficients (ascending powers) and a common
/// factor e^{log_scale}.
#[derive(Clone, Debug)]
pub struct ScaledPolynomial {
    pub coeffs: Vec<BigReal>,
    pub log_scale: f64,
    pub precision_bits: usize,
}

impl ScaledPolynomial {
    pub fn constant(log_scale: f64, precision_bits: usize) -> Self {
        Self { coeffs: vec![BigReal::from_f64(1.0, precision_bits)], log_scale, precision_bits }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// (sign, ln|P(x)|) including the log scale.
    pub fn eval_log(&self, x: f64) -> (f64, f64) {
        let v = self.eval_big(x, 0);
        let sign = if v.is_zero() { 0.0 } else { v.to_f64().signum() };
        (sign, v.ln_abs() + self.log_scale)
    }

    /// The k-th derivative at x without the log scale, in big-float.
    fn eval_big(&self, x: f64, k: usize) -> BigReal {
        let p = self.precision_bits;
        let xb = BigReal::from_f64(x, p);
        let mut acc = BigReal::zero(p);
        for (i, c) in self.coeffs.iter().enumerate().skip(k).rev() {
            let fall: f64 = (0..k).map(|j| (i - j) as f64).product();
            acc = &(&acc * &xb) + &c.mul_f64(fall);
        }
        acc
    }

    /// P^{(k)}(x)/P(x) for k = 1, 2, 3.
    pub fn log_derivative_ratios(&self, x: f64) -> [f64; 3] {
        let p0 = self.eval_big(x, 0);
        [1, 2, 3].map(|k| (&self.eval_big(x, k) / &p0).to_f64())
    }

    /// Largest relative coefficient difference against a reference carrying
    /// the same log scale up to rounding.
    fn discrepancy(&self, other: &ScaledPolynomial) -> f64 {
        // Both scales are the same initial value plus whole powers of two.
        let k = ((self.log_scale - other.log_scale) / std::f64::consts::LN_2).round() as i32;
        let p = other.precision_bits;
        let mut worst: f64 = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            if b.is_zero() {
                continue;
            }
            let a = BigReal::zero(p) + a.ldexp(k);
            let d = (&(&a - b) / b).to_f64().abs();
            worst = worst.max(d);
        }
        if self.coeffs.len() != other.coeffs.len() {
            return f64::INFINITY;
        }
        worst
    }

    /// Multiplies every coefficient by 2^−e and adds e ln 2 to the scale.
    fn renormalize(polys: &mut [&mut Vec<BigReal>], log_scale: &mut f64) {
        let top = polys.iter().flat_map(|v| v.iter()).filter_map(|c| c.exponent()).max();
        if let Some(e) = top {
            if e.abs() > RENORM_BITS {
                for v in polys.iter_mut() {
                    for c in v.iter_mut() {
                        *c = c.ldexp(-e);
                    }
                }
                *log_scale += e as f64 * std::f64::consts::LN_2;
            }
        }
    }
}

/// Parameters of one p-sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceParams {
    pub n: usize,
    pub lambda: f64,
    pub lambda1: f64,
    pub alpha: u32,
}

impl RecurrenceParams {
    pub fn b(&self, p: usize) -> f64 {
        let (pf, nf) = (p as f64, self.n as f64);
        (pf - nf) * (self.lambda1 + self.alpha as f64 + self.lambda * (nf - pf - 1.0))
    }

    pub fn d(&self, p: usize) -> f64 {
        let (pf, nf) = (p as f64, self.n as f64);
        pf * (self.lambda * (nf - pf) + self.alpha as f64)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !(self.lambda1 > -1.0) || self.alpha == 0 {
            return Err(Error::InvalidParams(format!("invalid recurrence parameters {self:?}")));
        }
        Ok(())
    }
}

/// L_N from L_0 by λ(N−p)L_{p+1} = (λ(N−p)x + B_p)L_p + xL_p′ − D_p x L_{p−1}.
pub fn lp_sweep(l0: &ScaledPolynomial, params: &RecurrenceParams) -> Result<ScaledPolynomial> {
    params.validate()?;
    let prec = l0.precision_bits;
    let big = |x: f64| BigReal::from_f64(x, prec);
    let mut log_scale = l0.log_scale;
    let mut prev: Vec<BigReal> = Vec::new();
    let mut cur = l0.coeffs.clone();
    for p in 0..params.n {
        let lam = params.lambda * (params.n - p) as f64;
        let (bp, dp) = (params.b(p), params.d(p));
        let inv = big(lam).recip();
        let lam_b = big(lam);
        let dp_b = big(dp);
        let mut next = Vec::with_capacity(cur.len() + 1);
        for k in 0..=cur.len() {
            let mut v = BigReal::zero(prec);
            if k >= 1 {
                v = &v + &(&lam_b * &cur[k - 1]);
                if k - 1 < prev.len() && dp != 0.0 {
                    v = &v - &(&dp_b * &prev[k - 1]);
                }
            }
            if k < cur.len() {
                v = &v + &cur[k].mul_f64(bp + k as f64);
            }
            next.push(&v * &inv);
        }
        prev = cur;
        cur = next;
        ScaledPolynomial::renormalize(&mut [&mut prev, &mut cur], &mut log_scale);
    }
    Ok(ScaledPolynomial { coeffs: cur, log_scale, precision_bits: prec })
}

fn lifts(n: usize, beta: f64, n_target: u32, lambda1: f64, l0: ScaledPolynomial) -> Result<ScaledPolynomial> {
    let mut poly = l0;
    for alpha in 1..=n_target {
        let params = RecurrenceParams { n, lambda: beta / 2.0, lambda1, alpha };
        poly = lp_sweep(&poly, &params)?;
    }
    Ok(poly)
}

/// Sweeps from L_0 = e^{log_scale0} at `bits` and `bits + 64` and compares.
fn checked_lifts(
    n: usize,
    beta: f64,
    n_target: u32,
    lambda1: f64,
    log_scale0: f64,
    bits: usize,
) -> Result<ScaledPolynomial> {
    if n_target == 0 || n_target > 8 {
        return Err(Error::InvalidParams(format!("n_target must be in 1..=8, got {n_target}")));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    if bits < 64 {
        return Err(Error::InvalidParams(format!("precision below 64 bits: {bits}")));
    }
    let main = lifts(n, beta, n_target, lambda1, ScaledPolynomial::constant(log_scale0, bits))?;
    let shadow = lifts(n, beta, n_target, lambda1, ScaledPolynomial::constant(log_scale0, bits + SHADOW_BITS))?;
    let disc = main.discrepancy(&shadow);
    if !(disc <= 10f64.powf(-(bits as f64) / 4.0)) {
        return Err(Error::PrecisionExhausted { bits, discrepancy: disc });
    }
    Ok(main)
}

/// W · ⟨∏(x − x_l)^{n_target}⟩ over N variables with weight x^{λ₁} e^{−βx/2},
/// where W is the normalization integral carried in the log scale.
///
/// The sweep is repeated with 64 more bits; a relative coefficient
/// disagreement above 10^{−bits/4} is reported as precision exhaustion.
pub fn char_moment(n: usize, beta: f64, n_target: u32, lambda1: f64, bits: usize) -> Result<ScaledPolynomial> {
    if !(beta > 0.0) || !(lambda1 >= 0.0) || n == 0 {
        return Err(Error::Domain(format!("need N >= 1, beta > 0, lambda1 >= 0; got {n}, {beta}, {lambda1}")));
    }
    checked_lifts(n, beta, n_target, lambda1, ln_selberg_laguerre(lambda1, beta, n), bits)
}

/// P(x)/P(y) in big-float; the log scales cancel exactly.
fn ratio(p: &ScaledPolynomial, x: f64, y: f64) -> f64 {
    (&p.eval_big(x, 0) / &p.eval_big(y, 0)).to_f64()
}

/// Finite-N gap probability E_N(0; (0, t); x^a e^{−βx/2}) for integer a, as a
/// reusable polynomial.
///
/// E = e^{−Nβt/2} P(−t)/P(0) with P = ⟨∏(x − x_l)^a⟩ under the weight
/// e^{−βx/2}; P(0) equals the normalization ratio W_a/W_0 up to sign, which
/// `normalization_defect` exposes.
#[derive(Clone, Debug)]
pub struct GapRecurrence {
    pub n: usize,
    pub beta: f64,
    pub a: u32,
    poly: Option<ScaledPolynomial>,
}

impl GapRecurrence {
    pub fn new(n: usize, beta: f64, a: u32, bits: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if a > 6 {
            return Err(Error::Unsupported(format!("recurrence gap supports a <= 6, got {a}")));
        }
        let poly = if a == 0 { None } else { Some(checked_lifts(n, beta, a, 0.0, 0.0, bits)?) };
        Ok(Self { n, beta, a, poly })
    }

    /// E at the actual interval end t.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("t must be non-negative, got {t}")));
        }
        let base = (-self.beta * self.n as f64 * t / 2.0).exp();
        match &self.poly {
            None => Ok(base),
            Some(p) => Ok(base * ratio(p, -t, 0.0)),
        }
    }

    /// E at the optimal hard-edge scaling t = s/(4(N + a/β)).
    pub fn eval_scaled(&self, s: f64) -> Result<f64> {
        self.eval(optimal_scale(self.n, self.beta, self.a as f64) * s)
    }

    /// ln|P(0)| − ln(W_a/W_0) from the closed-form normalization integrals.
    pub fn normalization_defect(&self) -> f64 {
        let Some(p) = &self.poly else { return 0.0 };
        let w = ln_selberg_laguerre(self.a as f64, self.beta, self.n) - ln_selberg_laguerre(0.0, self.beta, self.n);
        p.eval_log(0.0).1 - w
    }

    /// x d/dx ln E at t, with its first two derivatives (β = 2 σ-form data).
    pub fn log_derivative(&self, t: f64) -> (f64, f64, f64) {
        let nb = self.beta * self.n as f64 / 2.0;
        let Some(poly) = &self.poly else {
            return (-nb * t, -nb, 0.0);
        };
        // Q(t) = P(−t): Q^{(k)}/Q = (−1)^k P^{(k)}/P
        let [r1, r2, r3] = poly.log_derivative_ratios(-t);
        let (g, q2, q3) = (-r1, r2, -r3);
        let g1 = q2 - g * g;
        let g2 = q3 - 3.0 * g * q2 + 2.0 * g * g * g;
        (t * (g - nb), g - nb + t * g1, 2.0 * g1 + t * g2)
    }
}

/// 1/(4(N + a/β)).
pub fn optimal_scale(n: usize, beta: f64, a: f64) -> f64 {
    1.0 / (4.0 * (n as f64 + a / beta))
}

/// One-shot finite-N gap at the actual interval end t.
pub fn gap_recurrence(n: usize, beta: f64, a: u32, t: f64) -> Result<f64> {
    GapRecurrence::new(n, beta, a, DEFAULT_PRECISION_BITS)?.eval(t)
}

/// Residual of the finite-N σ-PV equation for U = x d/dx ln E_N at β = 2,
/// relative to the largest term.
pub fn sigma_pv_residual(gap: &GapRecurrence, x: f64) -> Result<f64> {
    if gap.beta != 2.0 {
        return Err(Error::Unsupported("the sigma-PV check needs beta = 2".into()));
    }
    let (s, s1, s2) = gap.log_derivative(x);
    let (n, a) = (gap.n as f64, gap.a as f64);
    let t1 = (x * s2).powi(2);
    let inner = s - x * s1 + 2.0 * s1 * s1 + (a + 2.0 * n) * s1;
    let t2 = inner * inner;
    let t3 = 4.0 * s1 * s1 * (s1 + n) * (s1 + a + n);
    let scale = t1.abs().max(t2.abs()).max(t3.abs()).max(1e-300);
    Ok((t1 - t2 + t3).abs() / scale)
}

/// ln(N W(a+β, N−1)/W(a, N)) in closed form.
fn ln_density_prefactor(n: usize, beta: f64, a: f64) -> f64 {
    let nb = n as f64 * beta / 2.0;
    (n as f64).ln() - (a + 1.0) * (2.0 / beta).ln() - lg(1.0 + nb) + lg(1.0 + a + nb)
        - lg(1.0 + a)
        - lg(1.0 + a + beta / 2.0)
        + lg(1.0 + beta / 2.0)
}

/// Finite-N spectral density ρ_N(s) for even β and real a > −1.
///
/// ρ_N(s) = N (W(a+β, N−1)/W(a, N)) s^a e^{−βs/2} P(s)/P(0), with
/// P = ⟨∏(x − x_l)^β⟩ over N − 1 variables with weight x^a e^{−βx/2}.
#[derive(Clone, Debug)]
pub struct DensityRecurrence {
    pub n: usize,
    pub beta: u32,
    pub a: f64,
    poly: ScaledPolynomial,
    ln_prefactor: f64,
}

impl DensityRecurrence {
    pub fn new(n: usize, beta: u32, a: f64, bits: usize) -> Result<Self> {
        if !matches!(beta, 2 | 4 | 6) {
            return Err(Error::Unsupported(format!("density recurrence needs beta in {{2, 4, 6}}, got {beta}")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(a > -1.0) {
            return Err(Error::Domain(format!("a must exceed -1, got {a}")));
        }
        let bf = beta as f64;
        let poly =
            if n == 1 { ScaledPolynomial::constant(0.0, bits) } else { checked_lifts(n - 1, bf, beta, a, 0.0, bits)? };
        Ok(Self { n, beta, a, poly, ln_prefactor: ln_density_prefactor(n, bf, a) })
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("density needs s > 0, got {s}")));
        }
        let bf = self.beta as f64;
        let r = ratio(&self.poly, s, 0.0);
        Ok(r * (self.ln_prefactor + self.a * s.ln() - bf * s / 2.0).exp())
    }

    /// ∂s_N/∂s · ρ_N(s_N) with s_N = s/(4(N + a/β)).
    pub fn eval_scaled(&self, s: f64) -> Result<f64> {
        let c = optimal_scale(self.n, self.beta as f64, self.a);
        Ok(c * self.eval(c * s)?)
    }

    /// ln P(0) − ln(W(a+β, N−1)/W(a, N−1)); zero when the moment identity holds.
    pub fn duality_defect(&self) -> f64 {
        let bf = self.beta as f64;
        self.poly.eval_log(0.0).1 - ln_selberg_laguerre(self.a + bf, bf, self.n - 1)
            + ln_selberg_laguerre(self.a, bf, self.n - 1)
    }
}

/// One-shot finite-N density.
pub fn density_recurrence(n: usize, beta: u32, a: f64, s: f64) -> Result<f64> {
    DensityRecurrence::new(n, beta, a, DEFAULT_PRECISION_BITS)?.eval(s)
}

/// Which quantity a limit-difference curve tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitQuantity {
    Gap,
    Density,
}

/// N²(f_N(s) − f_{N0}(s)) on the grid, where f_N is the gap at the optimal
/// scaling or the scaled density ∂s_N/∂s ρ_N(s_N).
pub fn limit_difference_curve(
    n: usize,
    n0: usize,
    beta: f64,
    a: u32,
    s_grid: &[f64],
    quantity: LimitQuantity,
    bits: usize,
) -> Result<Vec<f64>> {
    if n0 < 20 * n {
        return Err(Error::InvalidParams(format!("N0 = {n0} must be at least 20 N = {}", 20 * n)));
    }
    let nn = (n as f64).powi(2);
    match quantity {
        LimitQuantity::Gap => {
            let (g, g0) = (GapRecurrence::new(n, beta, a, bits)?, GapRecurrence::new(n0, beta, a, bits)?);
            gap_limit_difference(&g, &g0, s_grid)
        }
        LimitQuantity::Density => {
            let b = beta as u32;
            if b as f64 != beta {
                return Err(Error::Unsupported("density curves need even integer beta".into()));
            }
            let d = DensityRecurrence::new(n, b, a as f64, bits)?;
            let d0 = DensityRecurrence::new(n0, b, a as f64, bits)?;
            s_grid.iter().map(|&s| Ok(nn * (d.eval_scaled(s)? - d0.eval_scaled(s)?))).collect()
        }
    }
}

/// Gap limit-difference curve from prebuilt recurrences, so one large-N0
/// polynomial can serve several N.
pub fn gap_limit_difference(g: &GapRecurrence, g0: &GapRecurrence, s_grid: &[f64]) -> Result<Vec<f64>> {
    if g.beta != g0.beta || g.a != g0.a {
        return Err(Error::InvalidParams("recurrences differ in beta or a".into()));
    }
    let nn = (g.n as f64).powi(2);
    s_grid.iter().map(|&s| Ok(nn * (g.eval_scaled(s)? - g0.eval_scaled(s)?))).collect()
}

/// Upper end of the s-range where density limit-difference curves track the
/// limit.
pub const DENSITY_CURVE_VALID_S: f64 = 10.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_prefactor_matches_integrals() {
        for &(n, beta, a) in &[(5usize, 2.0f64, 1.0f64), (9, 4.0, 0.5), (3, 6.0, 2.0)] {
            let direct = (n as f64).ln() + ln_selberg_laguerre(a + beta, beta, n - 1) - ln_selberg_laguerre(a, beta, n);
            assert!((ln_density_prefactor(n, beta, a) - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn selberg_one_variable() {
        // ∫ x^a e^{−βx/2} dx = Γ(a+1)(2/β)^{a+1}
        let v = ln_selberg_laguerre(1.5, 3.0, 1);
        assert!((v - (lg(2.5) + 2.5 * (2.0f64 / 3.0).ln())).abs() < 1e-14);
    }

    #[test]
    fn coefficient_formulas() {
        let p = RecurrenceParams { n: 7, lambda: 1.5, lambda1: 0.5, alpha: 2 };
        assert_eq!(p.b(3), (3.0 - 7.0) * (0.5 + 2.0 + 1.5 * 3.0));
        assert_eq!(p.d(3), 3.0 * (1.5 * 4.0 + 2.0));
        assert_eq!(p.d(0), 0.0);
    }

    #[test]
    fn degree_grows_by_n_per_lift() {
        let l0 = ScaledPolynomial::constant(0.0, 128);
        let p = RecurrenceParams { n: 5, lambda: 1.0, lambda1: 0.0, alpha: 1 };
        let l = lp_sweep(&l0, &p).unwrap();
        assert_eq!(l.degree(), 5);
        let p2 = RecurrenceParams { alpha: 2, ..p };
        assert_eq!(lp_sweep(&l, &p2).unwrap().degree(), 10);
    }
}
