//! Forward-mode automatic differentiation.
//!
//! Problem functions are written once against the [`Scalar`] trait and then
//! evaluated with plain `f64` (values), [`Dual`] (one directional first
//! derivative per pass) or [`HyperDual`] (one mixed second derivative per
//! pass). All functions in this crate are polynomials, so only the ring
//! operations are required.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Numeric type a differentiable function can be evaluated with.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + Sum
{
    fn constant(value: f64) -> Self;

    /// Real part.
    fn value(self) -> f64;

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn constant(value: f64) -> Self {
        value
    }

    fn value(self) -> f64 {
        self
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }

    /// Independent variable seeded with unit derivative.
    pub fn variable(re: f64) -> Self {
        Dual { re, eps: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual::new(self.re + rhs, self.eps)
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual::new(self.re - rhs, self.eps)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual::new(self.re * rhs, self.eps * rhs)
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, rhs: Dual) {
        self.re += rhs.re;
        self.eps += rhs.eps;
    }
}

impl Sum for Dual {
    fn sum<I: Iterator<Item = Dual>>(iter: I) -> Dual {
        iter.fold(Dual::default(), |acc, x| acc + x)
    }
}

impl Scalar for Dual {
    fn constant(value: f64) -> Self {
        Dual::new(value, 0.0)
    }

    fn value(self) -> f64 {
        self.re
    }
}

/// Hyper-dual number `re + e1·ε₁ + e2·ε₂ + e12·ε₁ε₂` with `ε₁² = ε₂² = 0`.
///
/// Seeding variable `a` in `ε₁` and variable `b` in `ε₂` yields `∂f/∂a` in
/// `e1`, `∂f/∂b` in `e2` and the exact mixed partial `∂²f/∂a∂b` in `e12`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperDual {
    pub re: f64,
    pub e1: f64,
    pub e2: f64,
    pub e12: f64,
}

impl HyperDual {
    pub fn new(re: f64, e1: f64, e2: f64, e12: f64) -> Self {
        HyperDual { re, e1, e2, e12 }
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, rhs: HyperDual) -> HyperDual {
        HyperDual::new(
            self.re + rhs.re,
            self.e1 + rhs.e1,
            self.e2 + rhs.e2,
            self.e12 + rhs.e12,
        )
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    fn sub(self, rhs: HyperDual) -> HyperDual {
        HyperDual::new(
            self.re - rhs.re,
            self.e1 - rhs.e1,
            self.e2 - rhs.e2,
            self.e12 - rhs.e12,
        )
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, rhs: HyperDual) -> HyperDual {
        HyperDual::new(
            self.re * rhs.re,
            self.re * rhs.e1 + self.e1 * rhs.re,
            self.re * rhs.e2 + self.e2 * rhs.re,
            self.re * rhs.e12 + self.e1 * rhs.e2 + self.e2 * rhs.e1 + self.e12 * rhs.re,
        )
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(self) -> HyperDual {
        HyperDual::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl Add<f64> for HyperDual {
    type Output = HyperDual;
    fn add(self, rhs: f64) -> HyperDual {
        HyperDual { re: self.re + rhs, ..self }
    }
}

impl Sub<f64> for HyperDual {
    type Output = HyperDual;
    fn sub(self, rhs: f64) -> HyperDual {
        HyperDual { re: self.re - rhs, ..self }
    }
}

impl Mul<f64> for HyperDual {
    type Output = HyperDual;
    fn mul(self, rhs: f64) -> HyperDual {
        HyperDual::new(self.re * rhs, self.e1 * rhs, self.e2 * rhs, self.e12 * rhs)
    }
}

impl AddAssign for HyperDual {
    fn add_assign(&mut self, rhs: HyperDual) {
        *self = *self + rhs;
    }
}

impl Sum for HyperDual {
    fn sum<I: Iterator<Item = HyperDual>>(iter: I) -> HyperDual {
        iter.fold(HyperDual::default(), |acc, x| acc + x)
    }
}

impl Scalar for HyperDual {
    fn constant(value: f64) -> Self {
        HyperDual::new(value, 0.0, 0.0, 0.0)
    }

    fn value(self) -> f64 {
        self.re
    }
}

/// Derivative of a univariate function at `x`.
pub fn derivative<F>(f: F, x: f64) -> f64
where
    F: Fn(Dual) -> Dual,
{
    f(Dual::variable(x)).eps
}

/// Gradient of `f` at `x`, one forward pass per coordinate.
pub fn gradient<F>(f: F, x: &[f64]) -> Vec<f64>
where
    F: Fn(&[Dual]) -> Dual,
{
    let mut point: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
    (0..x.len())
        .map(|j| {
            point[j].eps = 1.0;
            let d = f(&point).eps;
            point[j].eps = 0.0;
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_derivative_six_at_three() {
        assert_eq!(derivative(|x| x * x, 3.0), 6.0);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let g = gradient(|_x| Dual::constant(4.2), &[1.0, -2.0, 3.0]);
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_of_bilinear_form() {
        // f = x0 * x1 + 2 x1 - x2^2
        let f = |x: &[Dual]| x[0] * x[1] + x[1] * 2.0 - x[2].square();
        let g = gradient(f, &[1.5, -2.0, 0.5]);
        assert_eq!(g, vec![-2.0, 3.5, -1.0]);
    }

    #[test]
    fn hyper_dual_mixed_partial() {
        // f = x^2 y^3 -> f_xy = 6 x y^2
        let x = HyperDual::new(2.0, 1.0, 0.0, 0.0);
        let y = HyperDual::new(3.0, 0.0, 1.0, 0.0);
        let f = x * x * y * y * y;
        assert_eq!(f.re, 108.0);
        assert_eq!(f.e1, 2.0 * 2.0 * 27.0);
        assert_eq!(f.e2, 4.0 * 3.0 * 9.0);
        assert_eq!(f.e12, 6.0 * 2.0 * 9.0);
    }

    #[test]
    fn hyper_dual_pure_second_derivative() {
        // f = x^4 -> f'' = 12 x^2
        let x = HyperDual::new(1.5, 1.0, 1.0, 0.0);
        let f = x.square().square();
        assert!((f.e12 - 12.0 * 2.25).abs() < 1e-12);
    }
}
