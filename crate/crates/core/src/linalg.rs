//! Small dense LU factorization, row-major.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factors with partial pivoting of an n×n matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(mut a: Vec<T>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let (piv, pmax) =
                (k..n)
                    .map(|i| (i, a[i * n + k].abs()))
                    .fold((k, -T::one()), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == T::zero() {
                return Err(Error::IllConditioned(f64::INFINITY));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let v = a[k * n + j];
                        a[i * n + j] -= f * v;
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm, sign })
    }

    pub fn det(&self) -> T {
        (0..self.n).fold(self.sign, |acc, i| acc * self.lu[i * self.n + i])
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] = row.iter().zip(&x[..i]).fold(x[i], |s, (&l, &v)| s - l * v);
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = row.iter().zip(&x[i + 1..]).fold(x[i], |s, (&u, &v)| s - u * v);
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Full inverse, row-major.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}

/// Maximum absolute column sum.
pub fn norm1<T: Real>(a: &[T], n: usize) -> T {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].abs()).fold(T::zero(), |s, v| s + v)).fold(T::zero(), T::max)
}

pub fn determinant<T: Real>(a: Vec<T>, n: usize) -> T {
    match Lu::factor(a, n) {
        Ok(lu) => lu.det(),
        Err(_) => T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_solve() {
        let a = vec![4.0, 3.0, 0.0, 6.0, 3.0, 1.0, 0.0, 2.0, 5.0];
        let lu = Lu::factor(a.clone(), 3).unwrap();
        // 4(15-2) - 3(30-0) + 0 = -38
        assert!((lu.det() + 38.0f64).abs() < 1e-12);
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let inv = lu.inverse();
        assert!((norm1(&inv, 3) * norm1(&a, 3)) >= 1.0);
    }

    #[test]
    fn singular_reports() {
        assert!(Lu::factor(vec![1.0f64, 2.0, 2.0, 4.0], 2).is_err());
        assert_eq!(determinant(vec![1.0f64, 2.0, 2.0, 4.0], 2), 0.0);
    }
}
