//! Thin arbitrary-precision real wrapper over `astro_float::BigFloat`.

use astro_float::{BigFloat, RoundingMode, Sign};
use core::ops::{Add, Div, Mul, Neg, Sub};

const RM: RoundingMode = RoundingMode::ToEven;

/// Arbitrary-precision real with its working precision carried alongside.
#[derive(Debug)]
pub struct BigReal {
    v: BigFloat,
    p: usize,
}

impl Clone for BigReal {
    fn clone(&self) -> Self {
        Self { v: self.v.clone(), p: self.p }
    }
}

impl BigReal {
    pub fn zero(p: usize) -> Self {
        Self { v: BigFloat::from_word(0, p), p }
    }

    pub fn from_f64(x: f64, p: usize) -> Self {
        Self { v: BigFloat::from_f64(x, p), p }
    }

    pub fn from_i64(x: i64, p: usize) -> Self {
        Self { v: BigFloat::from_i64(x, p), p }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self { v: self.v.abs(), p: self.p }
    }

    pub fn recip(&self) -> Self {
        Self { v: self.v.reciprocal(self.p, RM), p: self.p }
    }

    /// Binary exponent e with |x| = 0.m × 2^e; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        if self.v.is_zero() {
            None
        } else {
            self.v.exponent()
        }
    }

    /// Multiplies by 2^k exactly.
    pub fn ldexp(&self, k: i32) -> Self {
        if self.v.is_zero() {
            return self.clone();
        }
        let mut v = self.v.clone();
        let e = v.exponent().unwrap_or(0);
        v.set_exponent(e + k);
        Self { v, p: self.p }
    }

    /// Nearest-ish `f64` (within an ulp or two); saturates to ±inf/0 outside range.
    pub fn to_f64(&self) -> f64 {
        let Some((words, _, sign, exp, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        if self.v.is_zero() {
            return 0.0;
        }
        let n = words.len();
        let hi = words[n - 1] as f64;
        let lo = if n >= 2 { words[n - 2] as f64 / 18446744073709551616.0 } else { 0.0 };
        let m = (hi + lo) / 18446744073709551616.0;
        let val = m * 2f64.powi(exp.clamp(-1100, 1100));
        if sign == Sign::Neg {
            -val
        } else {
            val
        }
    }

    /// ln|x| computed in f64 from mantissa and exponent, safe for huge exponents.
    pub fn ln_abs(&self) -> f64 {
        match self.exponent() {
            None => f64::NEG_INFINITY,
            Some(e) => {
                let m = self.ldexp(-e).to_f64().abs();
                m.ln() + e as f64 * core::f64::consts::LN_2
            }
        }
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        self * &BigReal::from_f64(x, self.p)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<'a> $tr<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $m(self, rhs: &'a BigReal) -> BigReal {
                let p = self.p.max(rhs.p);
                BigReal { v: self.v.$f(&rhs.v, p, RM), p }
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $m(self, rhs: BigReal) -> BigReal {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal { v: BigFloat::neg(&self.v), p: self.p }
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -&self
    }
}
