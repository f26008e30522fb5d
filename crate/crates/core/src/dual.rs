//! First-order forward-mode dual numbers in the two plane coordinates.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::phasecore::DerivStack;

/// A value together with its partial derivatives in `x` and `y`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Dual2 {
    pub const ZERO: Dual2 = Dual2 { v: 0.0, dx: 0.0, dy: 0.0 };

    pub fn constant(v: f64) -> Self {
        Self { v, dx: 0.0, dy: 0.0 }
    }

    pub fn var_x(x: f64) -> Self {
        Self { v: x, dx: 1.0, dy: 0.0 }
    }

    pub fn var_y(y: f64) -> Self {
        Self { v: y, dx: 0.0, dy: 1.0 }
    }

    /// Lifts a function of `x` alone, given its derivative stack.
    pub fn of_x(stack: &DerivStack) -> Self {
        Self { v: stack.value(), dx: stack.d(1), dy: 0.0 }
    }

    /// Lifts a function of `y` alone, given its derivative stack.
    pub fn of_y(stack: &DerivStack) -> Self {
        Self { v: stack.value(), dx: 0.0, dy: stack.d(1) }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        let r2 = -r * r;
        Self { v: r, dx: r2 * self.dx, dy: r2 * self.dy }
    }

    pub fn powi(self, n: i32) -> Self {
        let p = self.v.powi(n);
        let dp = if n == 0 { 0.0 } else { n as f64 * self.v.powi(n - 1) };
        Self { v: p, dx: dp * self.dx, dy: dp * self.dy }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let k = 0.5 / s;
        Self { v: s, dx: k * self.dx, dy: k * self.dy }
    }

    pub fn scale(self, k: f64) -> Self {
        Self { v: k * self.v, dx: k * self.dx, dy: k * self.dy }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self { v: self.v + r.v, dx: self.dx + r.dx, dy: self.dy + r.dy }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self { v: self.v - r.v, dx: self.dx - r.dx, dy: self.dy - r.dy }
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, dx: -self.dx, dy: -self.dy }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Self {
            v: self.v * r.v,
            dx: self.dx * r.v + self.v * r.dx,
            dy: self.dy * r.v + self.v * r.dy,
        }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, r: Self) -> Self {
        self * r.recip()
    }
}

impl Add<f64> for Dual2 {
    type Output = Self;
    fn add(self, r: f64) -> Self {
        Self { v: self.v + r, ..self }
    }
}

impl Sub<f64> for Dual2 {
    type Output = Self;
    fn sub(self, r: f64) -> Self {
        Self { v: self.v - r, ..self }
    }
}

impl Mul<f64> for Dual2 {
    type Output = Self;
    fn mul(self, r: f64) -> Self {
        self.scale(r)
    }
}

impl Div<f64> for Dual2 {
    type Output = Self;
    fn div(self, r: f64) -> Self {
        self.scale(1.0 / r)
    }
}

impl Add<Dual2> for f64 {
    type Output = Dual2;
    fn add(self, r: Dual2) -> Dual2 {
        r + self
    }
}

impl Sub<Dual2> for f64 {
    type Output = Dual2;
    fn sub(self, r: Dual2) -> Dual2 {
        -r + self
    }
}

impl Mul<Dual2> for f64 {
    type Output = Dual2;
    fn mul(self, r: Dual2) -> Dual2 {
        r.scale(self)
    }
}

impl Div<Dual2> for f64 {
    type Output = Dual2;
    fn div(self, r: Dual2) -> Dual2 {
        r.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual2::var_x(2.0);
        let y = Dual2::var_y(3.0);
        let f = x * x * y / (y + 1.0);
        // f = x^2 y / (y + 1)
        assert!((f.v - 3.0).abs() < 1e-15);
        assert!((f.dx - 2.0 * 2.0 * 3.0 / 4.0).abs() < 1e-15);
        assert!((f.dy - 4.0 / 16.0).abs() < 1e-15);
    }
}
