//! Two-point kernels at the hard edge: finite-N Laguerre, limiting Bessel and
//! its 1/N, 1/N² corrections, plus the matching density terms.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{bessel_pair, laguerre_raw};

/// (N, β, a, ξ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleParams<T> {
    pub n: usize,
    pub beta: T,
    pub a: T,
    pub xi: T,
}

impl<T: Real> EnsembleParams<T> {
    pub fn new(n: usize, beta: T, a: T, xi: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if !(a > -T::one()) || !a.is_finite() {
            return Err(Error::InvalidParams(format!("a must exceed -1, got {a}")));
        }
        if !(xi > T::zero() && xi <= T::one()) {
            return Err(Error::InvalidParams(format!("xi must lie in (0, 1], got {xi}")));
        }
        Ok(Self { n, beta, a, xi })
    }

    /// β = 2, ξ = 1.
    pub fn unitary(n: usize, a: T) -> Result<Self> {
        Self::new(n, T::c(2.0), a, T::one())
    }

    /// Optimal hard-edge scale 4(N + a/β).
    pub fn optimal_scale(&self) -> T {
        T::c(4.0) * (T::from_usize_(self.n) + self.a / self.beta)
    }

    fn require_unitary(&self) -> Result<()> {
        if self.beta != T::c(2.0) {
            return Err(Error::Unsupported(format!("kernel needs beta = 2, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Symmetric kernel with an analytic diagonal.
pub trait KernelFn<T: Real>: Sync {
    fn eval(&self, x: T, y: T) -> T;
    fn diag(&self, x: T) -> T;

    /// e such that K(x, y) = (xy)^{e/2} G(x, y) with G analytic near 0.
    fn edge_exponent(&self) -> T {
        T::zero()
    }

    /// Row-major matrix K(x_i, x_j), diagonal from `diag`.
    fn matrix(&self, nodes: &[T]) -> Vec<T> {
        let m = nodes.len();
        let mut k = vec![T::zero(); m * m];
        for i in 0..m {
            k[i * m + i] = self.diag(nodes[i]);
            for j in 0..i {
                let v = self.eval(nodes[i], nodes[j]);
                k[i * m + j] = v;
                k[j * m + i] = v;
            }
        }
        k
    }
}

/// Bessel data at one point: u = √x, J_a(u), J′_a(u), J_{a+1}(u), J_{a−1}(u).
#[derive(Clone, Copy, Debug)]
struct BesselPoint<T> {
    x: T,
    u: T,
    j: T,
    jp: T,
    jnext: T,
    jprev: T,
}

impl<T: Real> BesselPoint<T> {
    fn new(a: T, x: T) -> Self {
        let xf = x.f64().max(1e-300);
        let u = xf.sqrt();
        let af = a.f64();
        let (j, jp) = bessel_pair(af, u);
        let jnext = bessel_pair(af + 1.0, u).0;
        let jprev = 2.0 * jp + jnext;
        Self { x, u: T::c(u), j: T::c(j), jp: T::c(jp), jnext: T::c(jnext), jprev: T::c(jprev) }
    }
}

/// Which member of the Bessel family a kernel is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Limit,
    L1,
    L2Hat,
    L2,
}

fn family_eval<T: Real>(f: Family, a: T, p: &BesselPoint<T>, q: &BesselPoint<T>) -> T {
    let c = T::c;
    match f {
        Family::Limit => (q.u * p.j * q.jp - p.u * p.jp * q.j) / (c(2.0) * (p.x - q.x)),
        Family::L1 => a / c(8.0) * p.j * q.j,
        Family::L2Hat => {
            -(((a * a + p.x + q.x) * p.j * q.j)
                + p.u * q.u * p.jp * q.jp
                + c(2.0) * q.u * p.j * q.jp
                + c(2.0) * p.u * p.jp * q.j)
                / c(192.0)
        }
        Family::L2 => {
            -(((a * a + p.x + q.x) * p.j * q.j) + p.u * q.u * p.jp * q.jp
                - (c(3.0) * a * a - c(2.0)) * (q.u * p.j * q.jp + p.u * p.jp * q.j))
                / c(192.0)
        }
    }
}

fn family_diag<T: Real>(f: Family, a: T, p: &BesselPoint<T>) -> T {
    match f {
        Family::Limit => (p.j * p.j - p.jnext * p.jprev) / T::c(4.0),
        _ => family_eval(f, a, p, p),
    }
}

/// Bessel-family kernel; `matrix` evaluates Bessel functions once per node.
#[derive(Clone, Copy, Debug)]
pub struct BesselFamilyKernel<T> {
    a: T,
    family: Family,
    factor: T,
}

impl<T: Real> BesselFamilyKernel<T> {
    /// Limiting hard-edge kernel K_∞.
    pub fn limit(a: T) -> Self {
        Self { a, family: Family::Limit, factor: T::one() }
    }

    /// 1/N correction under the 4N scaling.
    pub fn l1(a: T) -> Self {
        Self { a, family: Family::L1, factor: T::one() }
    }

    /// 1/N² correction under the 4N + 2a scaling.
    pub fn l2hat(a: T) -> Self {
        Self { a, family: Family::L2Hat, factor: T::one() }
    }

    pub(crate) fn l2(a: T) -> Self {
        Self { a, family: Family::L2, factor: T::one() }
    }

    /// Same kernel multiplied by a constant.
    pub fn scaled(self, factor: T) -> Self {
        Self { factor: self.factor * factor, ..self }
    }

    pub fn order(&self) -> T {
        self.a
    }
}

impl<T: Real> KernelFn<T> for BesselFamilyKernel<T> {
    fn eval(&self, x: T, y: T) -> T {
        if x == y {
            return self.diag(x);
        }
        let p = BesselPoint::new(self.a, x);
        let q = BesselPoint::new(self.a, y);
        self.factor * family_eval(self.family, self.a, &p, &q)
    }

    fn diag(&self, x: T) -> T {
        self.factor * family_diag(self.family, self.a, &BesselPoint::new(self.a, x))
    }

    fn edge_exponent(&self) -> T {
        self.a
    }

    fn matrix(&self, nodes: &[T]) -> Vec<T> {
        let pts: Vec<_> = nodes.iter().map(|&x| BesselPoint::new(self.a, x)).collect();
        let m = nodes.len();
        let mut k = vec![T::zero(); m * m];
        for i in 0..m {
            k[i * m + i] = self.factor * family_diag(self.family, self.a, &pts[i]);
            for j in 0..i {
                let v = if nodes[i] == nodes[j] {
                    family_diag(self.family, self.a, &pts[i])
                } else {
                    family_eval(self.family, self.a, &pts[i], &pts[j])
                };
                k[i * m + j] = self.factor * v;
                k[j * m + i] = self.factor * v;
            }
        }
        k
    }
}

/// Identically zero kernel.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroKernel;

impl<T: Real> KernelFn<T> for ZeroKernel {
    fn eval(&self, _: T, _: T) -> T {
        T::zero()
    }
    fn diag(&self, _: T) -> T {
        T::zero()
    }
}

/// Finite-N Laguerre unitary-ensemble kernel with weight x^a e^{−x}.
#[derive(Clone, Copy, Debug)]
pub struct FiniteLaguerreKernel<T> {
    n: usize,
    a: T,
    ln_pref: T,
}

impl<T: Real> FiniteLaguerreKernel<T> {
    pub fn new(p: &EnsembleParams<T>) -> Result<Self> {
        p.require_unitary()?;
        let nf = T::from_usize_(p.n);
        let ln_pref = (nf + T::one()).ln_gamma_abs() - (p.a + nf).ln_gamma_abs();
        Ok(Self { n: p.n, a: p.a, ln_pref })
    }

    fn weight_half(&self, x: T) -> T {
        (self.ln_pref * T::c(0.5) - x * T::c(0.5) + self.a * T::c(0.5) * x.ln()).exp()
    }
}

impl<T: Real> KernelFn<T> for FiniteLaguerreKernel<T> {
    fn eval(&self, x: T, y: T) -> T {
        if x == y {
            return self.diag(x);
        }
        let (n, a, one) = (self.n, self.a, T::one());
        let num =
            laguerre_raw(n, a, x) * laguerre_raw(n, a - one, y) - laguerre_raw(n, a - one, x) * laguerre_raw(n, a, y);
        self.weight_half(x) * self.weight_half(y) * num / (x - y)
    }

    fn diag(&self, x: T) -> T {
        let (n, a, one) = (self.n, self.a, T::one());
        let bracket = laguerre_raw(n - 1, a, x) * laguerre_raw(n, a, x)
            - laguerre_raw(n - 1, a + one, x) * laguerre_raw(n, a - one, x);
        let w = self.weight_half(x);
        w * w * bracket
    }

    fn edge_exponent(&self) -> T {
        self.a
    }
}

/// K_N(x, y) for β = 2.
pub fn kn_finite<T: Real>(p: &EnsembleParams<T>, x: T, y: T) -> Result<T> {
    Ok(FiniteLaguerreKernel::new(p)?.eval(x, y))
}

/// Limiting hard-edge (Bessel) kernel.
pub fn k_bessel<T: Real>(a: T, x: T, y: T) -> T {
    BesselFamilyKernel::limit(a).eval(x, y)
}

/// (a/8) J_a(√x) J_a(√y).
pub fn l1_kernel<T: Real>(a: T, x: T, y: T) -> T {
    BesselFamilyKernel::l1(a).eval(x, y)
}

/// 1/N² correction kernel for the 4N + 2a scaling.
pub fn l2hat_kernel<T: Real>(a: T, x: T, y: T) -> T {
    BesselFamilyKernel::l2hat(a).eval(x, y)
}

/// Limiting hard-edge density (1/4)(J_a² − J_{a+1} J_{a−1}) at √x.
pub fn rho_inf0<T: Real>(a: T, x: T) -> T {
    BesselFamilyKernel::limit(a).diag(x)
}

/// 1/N² density correction under the 4N + 2a scaling.
pub fn rho_hat2<T: Real>(a: T, x: T) -> T {
    let p = BesselPoint::new(a, x);
    -((T::c(2.0) * x + a * a) * p.j * p.j + T::c(4.0) * p.u * p.j * p.jp + x * p.jp * p.jp) / T::c(192.0)
}

/// Hard-edge rescaling used in the kernel expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelScaling {
    /// x/(4N): K_∞ + L₁/N + L₂/N².
    Naive,
    /// x/(4N + 2a): K_∞ + L̂₂/N².
    Shifted,
}

/// (1/c) K_N(x/c, y/c) minus the expansion truncated at `order`, c = 4N + 2a.
pub fn scaled_kernel_expansion_residual<T: Real>(p: &EnsembleParams<T>, x: T, y: T, order: usize) -> Result<T> {
    kernel_expansion_residual(p, x, y, order, KernelScaling::Shifted)
}

/// As [`scaled_kernel_expansion_residual`] with an explicit choice of scaling.
pub fn kernel_expansion_residual<T: Real>(
    p: &EnsembleParams<T>,
    x: T,
    y: T,
    order: usize,
    scaling: KernelScaling,
) -> Result<T> {
    if order > 2 {
        return Err(Error::InvalidParams(format!("expansion order {order} > 2")));
    }
    let nf = T::from_usize_(p.n);
    let c = match scaling {
        KernelScaling::Naive => T::c(4.0) * nf,
        KernelScaling::Shifted => T::c(4.0) * nf + T::c(2.0) * p.a,
    };
    let kn = FiniteLaguerreKernel::new(p)?;
    let lhs = kn.eval(x / c, y / c) / c;
    let mut approx = BesselFamilyKernel::limit(p.a).eval(x, y);
    match scaling {
        KernelScaling::Naive => {
            if order >= 1 {
                approx += BesselFamilyKernel::l1(p.a).eval(x, y) / nf;
            }
            if order >= 2 {
                approx += BesselFamilyKernel::l2(p.a).eval(x, y) / (nf * nf);
            }
        }
        KernelScaling::Shifted => {
            if order >= 2 {
                approx += BesselFamilyKernel::l2hat(p.a).eval(x, y) / (nf * nf);
            }
        }
    }
    Ok(lhs - approx)
}
