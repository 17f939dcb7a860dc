//! Nyström Fredholm determinants, the Ω-trace correction, gap probabilities and
//! smallest-eigenvalue densities for β = 2.

use crate::error::{Error, Result};
use crate::kernels::{BesselFamilyKernel, KernelFn};
use crate::linalg::{norm1, Lu};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;

pub const DEFAULT_ORDER: usize = 64;
pub const MAX_ORDER: usize = 256;
const MIN_ORDER: usize = 8;
const AUTO_TOL: f64 = 1e-10;
const FAIL_TOL: f64 = 1e-8;
const MAX_CONDITION: f64 = 1e6;

/// Determinant with quadrature diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetResult<T> {
    pub value: T,
    /// Coefficient of 1/N² when computed alongside the determinant.
    pub correction: Option<T>,
    pub quadrature_order: usize,
    /// |value(m) − value(m/2)|.
    pub est_error: T,
}

fn check_args<T: Real>(s: T, xi: T, m: usize) -> Result<()> {
    if !(s >= T::zero()) || !s.is_finite() {
        return Err(Error::Domain(format!("interval end must be non-negative, got {s}")));
    }
    if !(xi >= T::zero() && xi <= T::one()) {
        return Err(Error::Domain(format!("xi must lie in [0, 1], got {xi}")));
    }
    if m < MIN_ORDER {
        return Err(Error::InvalidParams(format!("quadrature order {m} < {MIN_ORDER}")));
    }
    Ok(())
}

/// Rule on (0, s) plus the per-node factor f_i with f_i f_j K(x_i, x_j) the
/// Nyström entry. A non-integer edge exponent e moves x^e into a Gauss–Jacobi
/// weight so the remaining integrand stays analytic.
struct Discretization<T> {
    rule: QuadratureRule<T>,
    factor: Vec<T>,
}

impl<T: Real> Discretization<T> {
    fn new(s: T, m: usize, e: T) -> Result<Self> {
        if e.fract() == T::zero() {
            let rule = QuadratureRule::gauss_legendre(m, T::zero(), s)?;
            let factor = rule.weights.iter().map(|w| w.sqrt()).collect();
            return Ok(Self { rule, factor });
        }
        let rule = QuadratureRule::gauss_jacobi_left(m, e, T::zero(), s)?;
        let half = T::c(-0.5) * e;
        let factor = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w.sqrt() * x.powf(half)).collect();
        Ok(Self { rule, factor })
    }

    fn matrix<K: KernelFn<T> + ?Sized>(&self, k: &K) -> Vec<T> {
        symmetrized(k, &self.rule.nodes, &self.factor)
    }
}

fn symmetrized<T: Real, K: KernelFn<T> + ?Sized>(k: &K, nodes: &[T], sw: &[T]) -> Vec<T> {
    let m = nodes.len();
    let mut a = k.matrix(nodes);
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] *= sw[i] * sw[j];
        }
    }
    a
}

fn det_at<T: Real, K: KernelFn<T> + ?Sized>(k: &K, s: T, xi: T, m: usize) -> Result<T> {
    if s == T::zero() || xi == T::zero() {
        return Ok(T::one());
    }
    let disc = Discretization::new(s, m, k.edge_exponent())?;
    let mut a = disc.matrix(k);
    for (idx, v) in a.iter_mut().enumerate() {
        *v = if idx % (m + 1) == 0 { T::one() - xi * *v } else { -xi * *v };
    }
    Ok(Lu::factor(a, m).map(|lu| lu.det()).unwrap_or(T::zero()))
}

/// det(I − ξ K) on (0, s) with an m-point Gauss–Legendre Nyström discretization.
pub fn fredholm_det<T: Real, K: KernelFn<T> + ?Sized>(k: &K, s: T, xi: T, m: usize) -> Result<DetResult<T>> {
    check_args(s, xi, m)?;
    let value = det_at(k, s, xi, m)?;
    let coarse = det_at(k, s, xi, (m / 2).max(MIN_ORDER / 2))?;
    let est_error = (value - coarse).abs();
    if m >= MAX_ORDER && est_error.f64() > FAIL_TOL {
        return Err(Error::NonConvergence { est_error: est_error.f64(), m });
    }
    Ok(DetResult { value, correction: None, quadrature_order: m, est_error })
}

/// [`fredholm_det`] doubling m from 64 until the estimate drops below 1e−10 or m = 256.
pub fn fredholm_det_auto<T: Real, K: KernelFn<T> + ?Sized>(k: &K, s: T, xi: T) -> Result<DetResult<T>> {
    let mut m = DEFAULT_ORDER;
    loop {
        let r = fredholm_det(k, s, xi, m)?;
        if r.est_error.f64() < AUTO_TOL || m >= MAX_ORDER {
            return Ok(r);
        }
        m *= 2;
    }
}

/// (det, Ω-trace) at a single order.
fn det_and_omega_at<T: Real, K: KernelFn<T> + ?Sized, L: KernelFn<T> + ?Sized>(
    k: &K,
    l: &L,
    s: T,
    xi: T,
    m: usize,
) -> Result<(T, T)> {
    if s == T::zero() || xi == T::zero() {
        return Ok((T::one(), T::zero()));
    }
    let disc = Discretization::new(s, m, k.edge_exponent())?;
    let mut a = disc.matrix(k);
    for (idx, v) in a.iter_mut().enumerate() {
        *v = if idx % (m + 1) == 0 { T::one() - xi * *v } else { -xi * *v };
    }
    let b = disc.matrix(l);
    let lu = Lu::factor(a.clone(), m)?;
    let inv = lu.inverse();
    let cond = norm1(&a, m) * norm1(&inv, m);
    if !(cond.f64() < MAX_CONDITION) {
        return Err(Error::IllConditioned(cond.f64()));
    }
    let mut tr = T::zero();
    for i in 0..m {
        for j in 0..m {
            tr += inv[i * m + j] * b[j * m + i];
        }
    }
    let det = lu.det();
    Ok((det, -det * xi * tr))
}

/// Ω(ξK) : ξL = −det(I − ξK) Tr((I − ξK)⁻¹ ξL) on (0, s).
pub fn omega_trace<T: Real, K: KernelFn<T> + ?Sized, L: KernelFn<T> + ?Sized>(
    k: &K,
    l: &L,
    s: T,
    xi: T,
    m: usize,
) -> Result<T> {
    check_args(s, xi, m)?;
    Ok(det_and_omega_at(k, l, s, xi, m)?.1)
}

/// Hard-edge gap and its 1/N² coefficient under the 4N + 2a scaling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapCorrection<T> {
    pub e_hard: T,
    pub c2: T,
    pub quadrature_order: usize,
    pub est_error: T,
}

fn gap_pair_at<T: Real>(a: T, s: T, xi: T, m: usize, l2: &BesselFamilyKernel<T>) -> Result<(T, T)> {
    det_and_omega_at(&BesselFamilyKernel::limit(a), l2, s, xi, m)
}

/// (E_hard, c2) with E_{N,2}(0; (0, s/(4N+2a)); ξ) ≈ E_hard + c2/N².
///
/// `m = None` selects the auto-doubling order.
pub fn gap_with_correction<T: Real>(a: T, s: T, xi: T, m: Option<usize>) -> Result<GapCorrection<T>> {
    gap_with_correction_kernel(a, s, xi, m, &BesselFamilyKernel::l2hat(a))
}

/// As [`gap_with_correction`] with a caller-supplied correction kernel.
pub fn gap_with_correction_kernel<T: Real>(
    a: T,
    s: T,
    xi: T,
    m: Option<usize>,
    l2: &BesselFamilyKernel<T>,
) -> Result<GapCorrection<T>> {
    if !(a > -T::one()) {
        return Err(Error::Domain(format!("a must exceed -1, got {a}")));
    }
    let mut order = m.unwrap_or(DEFAULT_ORDER);
    check_args(s, xi, order)?;
    loop {
        let (e, c) = gap_pair_at(a, s, xi, order, l2)?;
        let (e2, c2) = gap_pair_at(a, s, xi, order / 2, l2)?;
        let est = (e - e2).abs().max((c - c2).abs());
        if m.is_some() || est.f64() < AUTO_TOL || order >= MAX_ORDER {
            if order >= MAX_ORDER && est.f64() > FAIL_TOL {
                return Err(Error::NonConvergence { est_error: est.f64(), m: order });
            }
            return Ok(GapCorrection { e_hard: e, c2: c, quadrature_order: order, est_error: est });
        }
        order *= 2;
    }
}

/// Derivative by 5-point stencils at steps h and h/2 plus one Richardson level.
///
/// Returns (derivative, disagreement between the two levels).
pub(crate) fn richardson_derivative<T: Real>(f: &dyn Fn(T) -> Result<T>, s: T, h: T) -> Result<(T, T)> {
    let c = T::c;
    let stencil = |h: T| -> Result<T> {
        if s >= c(2.0) * h {
            Ok((-f(s + c(2.0) * h)? + c(8.0) * f(s + h)? - c(8.0) * f(s - h)? + f(s - c(2.0) * h)?) / (c(12.0) * h))
        } else {
            Ok((c(-25.0) * f(s)? + c(48.0) * f(s + h)? - c(36.0) * f(s + c(2.0) * h)? + c(16.0) * f(s + c(3.0) * h)?
                - c(3.0) * f(s + c(4.0) * h)?)
                / (c(12.0) * h))
        }
    };
    let d1 = stencil(h)?;
    let d2 = stencil(h * c(0.5))?;
    Ok((d2 + (d2 - d1) / c(15.0), (d2 - d1).abs()))
}

/// (p0, p2) = −d/ds of (E_hard, c2).
pub fn smallest_pdf<T: Real>(a: T, s: T, xi: T, m: Option<usize>) -> Result<(T, T)> {
    if !(s > T::zero()) {
        return Err(Error::Domain(format!("smallest_pdf needs s > 0, got {s}")));
    }
    let order = match m {
        Some(m) => m,
        None => gap_with_correction(a, s, xi, None)?.quadrature_order,
    };
    let h = T::c(1e-3).max(T::c(1e-4) * s);
    let e = |t: T| gap_with_correction(a, t, xi, Some(order)).map(|g| g.e_hard);
    let c = |t: T| gap_with_correction(a, t, xi, Some(order)).map(|g| g.c2);
    let (d0, err0) = richardson_derivative(&e, s, h)?;
    let (d2, err2) = richardson_derivative(&c, s, h)?;
    let worst = err0.max(err2);
    if worst.f64() > 1e-6 {
        return Err(Error::StepCollapse(worst.f64()));
    }
    Ok((-d0, -d2))
}
