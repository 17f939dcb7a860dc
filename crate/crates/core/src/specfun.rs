//! Bessel functions of real order, gamma functions, Laguerre polynomials.

use crate::bigfloat::BigReal;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Validated Bessel/Laguerre order, ν > −5.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealOrder<T>(T);

impl<T: Real> RealOrder<T> {
    pub fn new(nu: T) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::Domain(format!("order {nu} is not finite")));
        }
        if nu <= T::c(-5.0) {
            return Err(Error::Domain(format!("order {nu} must exceed -5")));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    Ok(x.ln_gamma_abs())
}

/// Γ(x) for real x away from the poles.
pub fn gamma<T: Real>(x: T) -> T {
    T::c(libm::tgamma(x.f64()))
}

/// 1/Γ(x), entire; zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        let (lg, _) = libm::lgamma_r(x);
        return (-lg).exp();
    }
    1.0 / libm::tgamma(x)
}

/// Rising factorial (x)_n.
pub fn pochhammer<T: Real>(x: T, n: usize) -> T {
    (0..n).fold(T::one(), |acc, k| acc * (x + T::from_usize_(k)))
}

/// Generalized Laguerre polynomial L_n^{(a)}(x) by the three-term recurrence.
///
/// Orthogonality needs a > −1, but the polynomial itself is defined for every
/// order, and contiguous relations reach down to a − 1.
pub fn laguerre<T: Real>(n: usize, a: RealOrder<T>, x: T) -> T {
    laguerre_raw(n, a.value(), x)
}

pub(crate) fn laguerre_raw<T: Real>(n: usize, a: T, x: T) -> T {
    let one = T::one();
    if n == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one + a - x;
    for k in 1..n {
        let kf = T::from_usize_(k);
        let next = ((kf + kf + one + a - x) * cur - (kf + a) * prev) / (kf + one);
        prev = cur;
        cur = next;
    }
    cur
}

/// J_ν(x) for x ≥ 0.
pub fn bessel_j<T: Real>(nu: RealOrder<T>, x: T) -> Result<T> {
    let nu = nu.value().f64();
    let x = x.f64();
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        if nu == 0.0 {
            return Ok(T::one());
        }
        if nu > 0.0 || nu == nu.floor() {
            return Ok(T::zero());
        }
        return Err(Error::Divergent(format!("J_{nu}(0) for non-integer negative order")));
    }
    Ok(T::c(bessel_pair(nu, x).0))
}

/// J′_ν(x) for x > 0.
pub fn bessel_j_prime<T: Real>(nu: RealOrder<T>, x: T) -> Result<T> {
    let nu = nu.value().f64();
    let x = x.f64();
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_j_prime needs x > 0, got {x}")));
    }
    Ok(T::c(bessel_pair(nu, x).1))
}

/// (J_ν(x), J′_ν(x)) for x > 0 and any real ν; the caller guarantees x > 0.
pub(crate) fn bessel_pair(nu: f64, x: f64) -> (f64, f64) {
    if nu < 0.0 && nu == nu.floor() {
        let n = -nu;
        let (j, jp) = bessel_pair(n, x);
        return if (n as i64) % 2 == 0 { (j, jp) } else { (-j, -jp) };
    }
    let half = 0.5 * x;
    let t0 = half.powf(nu) * rgamma(nu + 1.0);
    let (s1, s2) = if x <= 30.0 { series_dd(nu, x) } else { series_big(nu, x, 256) };
    (t0 * s1, t0 * s2 / x)
}

/// Σ r_k and Σ r_k (ν+2k) with r_k = (−x²/4)^k Γ(ν+1)/(k! Γ(ν+k+1)).
fn series_dd(nu: f64, x: f64) -> (f64, f64) {
    let h = Dd::from(0.5 * x);
    let q = -(h * h);
    let mut r = Dd::from(1.0);
    let mut s1 = Dd::from(1.0);
    let mut s2 = Dd::from(nu);
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let den = Dd::two_sum(nu, kf + 1.0).mul_f64(kf + 1.0);
        r = (r * q) / den;
        let w = Dd::two_sum(nu, 2.0 * (kf + 1.0));
        s1 = s1 + r;
        s2 = s2 + r * w;
        k += 1;
        let mag = r.hi.abs() * (1.0 + w.hi.abs());
        if (k as f64 > 0.5 * x && mag < 1e-24) || k > 400 {
            break;
        }
    }
    (s1.hi + s1.lo, s2.hi + s2.lo)
}

fn series_big(nu: f64, x: f64, p: usize) -> (f64, f64) {
    let big = |v: f64| BigReal::from_f64(v, p);
    let h = big(0.5 * x);
    let q = -(&h * &h);
    let nub = big(nu);
    let mut r = big(1.0);
    let mut s1 = big(1.0);
    let mut s2 = nub.clone();
    for k in 0..600usize {
        let kp1 = big((k + 1) as f64);
        let den = &kp1 * &(&nub + &kp1);
        r = &(&r * &q) / &den;
        let w = &nub + &big(2.0 * (k + 1) as f64);
        s1 = &s1 + &r;
        s2 = &s2 + &(&r * &w);
        if k as f64 > 0.5 * x && r.ln_abs() < -55.0 {
            break;
        }
    }
    (s1.to_f64(), s2.to_f64())
}

/// Coefficients g_j with J_ν(u) = u^ν Σ_j g_j u^{2j}.
pub(crate) fn bessel_series_coeffs(nu: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let jf = j as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * 2f64.powf(-nu - 2.0 * jf) * rgamma(jf + 1.0) * rgamma(nu + jf + 1.0)
        })
        .collect()
}

/// Double-double arithmetic for the compensated Bessel series.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Dd {
    #[inline]
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: e }
    }

    #[inline]
    fn quick(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let p = Dd::two_prod(self.hi, b);
        Dd::quick(p.hi, p.lo + self.lo * b)
    }
}

impl core::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let v = Dd::quick(s.hi, s.lo + t.hi);
        Dd::quick(v.hi, v.lo + t.lo)
    }
}

impl core::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl core::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::quick(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl core::ops::Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self + -(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let r = r + -(o.mul_f64(q2));
        let q3 = r.hi / o.hi;
        let q = Dd::quick(q1, q2);
        q + Dd::from(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(v: f64) -> RealOrder<f64> {
        RealOrder::new(v).unwrap()
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(RealOrder::new(f64::NAN).is_err());
        assert!(RealOrder::new(-5.0).is_err());
        assert!(RealOrder::new(-4.99).is_ok());
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(ord(0.0), 0.0).unwrap(), 1.0);
        assert!(bessel_j(ord(0.5), std::f64::consts::PI).unwrap().abs() < 1e-15);
        assert!(bessel_j(ord(-0.5), 0.0).is_err());
        assert!(bessel_j(ord(1.0), -1.0).is_err());
        assert!(bessel_j_prime(ord(1.0), 0.0).is_err());
        let x = 1e-4;
        assert!((bessel_j_prime(ord(0.0), x).unwrap() + x / 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.3, 1.0, 7.5, 20.0, 35.0, 49.0] {
            let s = (2.0 / (std::f64::consts::PI * x)).sqrt();
            let j12 = s * x.sin();
            let jm12 = s * x.cos();
            let j32 = s * (x.sin() / x - x.cos());
            assert!((bessel_j(ord(0.5), x).unwrap() - j12).abs() < 1e-13, "x={x}");
            assert!((bessel_j(ord(-0.5), x).unwrap() - jm12).abs() < 1e-13, "x={x}");
            assert!((bessel_j(ord(1.5), x).unwrap() - j32).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn negative_integer_order_reflection() {
        let a = bessel_j(ord(-3.0), 2.5).unwrap();
        let b = bessel_j(ord(3.0), 2.5).unwrap();
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn laguerre_values() {
        let a = ord(1.0);
        assert_eq!(laguerre(0, a, 3.0), 1.0);
        assert_eq!(laguerre(1, ord(0.7), 0.2), 1.0 + 0.7 - 0.2);
        assert!((laguerre(5, a, 0.0) - 6.0).abs() < 1e-13);
        // L_2^{(-1)}(x) = x²/2 - x
        assert!((laguerre(2, ord(-1.0), 3.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_values() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        let half = ln_gamma(0.5f64).unwrap();
        assert!((half - std::f64::consts::PI.sqrt().ln()).abs() < 1e-15);
        assert!(ln_gamma(0.0f64).is_err());
        assert!(ln_gamma(-1.0f64).is_err());
    }

    #[test]
    fn series_coeffs_reproduce_bessel() {
        for &nu in &[0.0, 0.5, 1.0, 2.0, -0.5, -1.0, -1.5] {
            let g = bessel_series_coeffs(nu, 40);
            let u: f64 = 1.7;
            let s: f64 = g.iter().enumerate().map(|(j, c)| c * u.powi(2 * j as i32)).sum();
            let want = bessel_pair(nu, u).0;
            assert!((u.powf(nu) * s - want).abs() < 1e-13, "nu={nu}");
        }
    }

    #[test]
    fn works_for_f32() {
        let v: f32 = bessel_j(RealOrder::new(1.0f32).unwrap(), 2.0f32).unwrap();
        assert!((v - 0.576_724_8).abs() < 1e-6);
    }
}
