//! Truncated Taylor series arithmetic.
//!
//! A `Jet<N>` stores the normalized Taylor coefficients `c[k] = f^(k)(x0) / k!`
//! of a function around a base point. Arithmetic on jets propagates exact
//! derivatives through closed-form expressions, which is how every derivative
//! stack in the crate is produced.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    c: [f64; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = v;
        }
        Self { c }
    }

    /// The identity function expanded around `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut c = [0.0; N];
        if N > 0 {
            c[0] = x0;
        }
        if N > 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn from_coeffs(c: [f64; N]) -> Self {
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64; N] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative at the base point.
    pub fn derivative_at_base(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    /// Series of the derivative. The top coefficient is lost and set to zero.
    pub fn derivative(&self) -> Self {
        let mut c = [0.0; N];
        for k in 0..N.saturating_sub(1) {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Self { c }
    }

    /// Series of `t -> f(s * t)` when `self` is the series of `f`.
    pub fn scale_variable(&self, s: f64) -> Self {
        let mut c = self.c;
        let mut p = 1.0;
        for ck in c.iter_mut() {
            *ck *= p;
            p *= s;
        }
        Self { c }
    }

    pub fn truncate<const M: usize>(&self) -> Jet<M> {
        let mut c = [0.0; M];
        for (k, ck) in c.iter_mut().enumerate().take(N) {
            *ck = self.c[k];
        }
        Jet { c }
    }

    /// Evaluates the truncated polynomial at offset `t` from the base point.
    pub fn eval_offset(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0) / *self
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut out = Self::constant(1.0);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out * base;
            }
            base = base * base;
            e >>= 1;
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        let mut s = [0.0; N];
        s[0] = self.c[0].sqrt();
        for k in 1..N {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
            }
            s[k] = acc / (2.0 * s[0]);
        }
        Self { c: s }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        Self { c }
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        Self { c }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Self { c }
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [0.0; N];
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        Self { c }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let mut q = [0.0; N];
        for k in 0..N {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= rhs.c[j] * q[k - j];
            }
            q[k] = acc / rhs.c[0];
        }
        Self { c: q }
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.c[0] += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.c[0] -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.c.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> Div<f64> for Jet<N> {
    type Output = Self;
    fn div(mut self, rhs: f64) -> Self {
        for a in self.c.iter_mut() {
            *a /= rhs;
        }
        self
    }
}

impl<const N: usize> Add<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn add(self, rhs: Jet<N>) -> Jet<N> {
        rhs + self
    }
}

impl<const N: usize> Sub<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn sub(self, rhs: Jet<N>) -> Jet<N> {
        -rhs + self
    }
}

impl<const N: usize> Mul<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn mul(self, rhs: Jet<N>) -> Jet<N> {
        rhs * self
    }
}

impl<const N: usize> Div<Jet<N>> for f64 {
    type Output = Jet<N>;
    fn div(self, rhs: Jet<N>) -> Jet<N> {
        Jet::constant(self) / rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_square_derivatives() {
        let x = Jet::<5>::variable(0.5);
        let f = x.powi(-2);
        let d: Vec<f64> = (0..5).map(|k| f.derivative_at_base(k)).collect();
        let expected = [4.0, -16.0, 96.0, -768.0, 7680.0];
        for (a, b) in d.iter().zip(expected) {
            assert_relative_eq!(*a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn sqrt_matches_power_rule() {
        let x = Jet::<4>::variable(4.0);
        let s = x.sqrt();
        assert_relative_eq!(s.derivative_at_base(0), 2.0);
        assert_relative_eq!(s.derivative_at_base(1), 0.25);
        assert_relative_eq!(s.derivative_at_base(2), -1.0 / 32.0);
        assert_relative_eq!(s.derivative_at_base(3), 3.0 / 256.0);
    }

    #[test]
    fn scaled_variable_chain_rule() {
        let f = Jet::<4>::variable(0.3).powi(3);
        let g = f.scale_variable(-2.0);
        assert_relative_eq!(g.derivative_at_base(1), -2.0 * 3.0 * 0.09);
    }

    #[test]
    fn division_roundtrip() {
        let x = Jet::<6>::variable(1.3);
        let a = x * x + 2.0;
        let b = x.sqrt() + 1.0;
        let back = (a / b) * b;
        for (p, q) in back.coeffs().iter().zip(a.coeffs()) {
            assert_relative_eq!(*p, *q, epsilon = 1e-13);
        }
    }
}
