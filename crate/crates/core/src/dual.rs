//! Forward-mode dual numbers, nestable for exact second derivatives.
//!
//! `Dual<f64>` carries one derivative direction; `Dual<Dual<f64>>` carries two
//! independent directions plus their mixed second derivative in `eps.eps`.
//! All smooth inputs to the engine are written against the [`Real`] trait so a
//! single definition serves plain evaluation, gradients, and Hessians.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar interface shared by `f64` and dual numbers.
pub trait Real:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Leading real part, used for branching (abs, pivots, domain checks).
    fn value(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, k: i32) -> Self;
    /// General power; only valid for a positive base unless the exponent is
    /// an exact integer (the expression layer routes those through `powi`).
    fn pow(self, other: Self) -> Self {
        (other * self.ln()).exp()
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn pow(self, other: Self) -> Self {
        f64::powf(self, other)
    }
}

/// A dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }
    /// Lift a constant (zero derivative).
    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }
    /// Seed a variable with unit derivative.
    pub fn variable(re: T) -> Self {
        Dual { re, eps: T::one() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Dual::new(
            self.re / o.re,
            (self.eps * o.re - self.re * o.eps) / (o.re * o.re),
        )
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Real> Real for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }
    fn value(self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    fn tan(self) -> Self {
        let c = self.re.cos();
        Dual::new(self.re.tan(), self.eps / (c * c))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s + s))
    }
    fn abs(self) -> Self {
        if self.re.value() < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::one(),
            1 => self,
            _ => {
                let d = self.re.powi(k - 1);
                Dual::new(self.re * d, self.eps * T::from_f64(f64::from(k)) * d)
            }
        }
    }
}

/// First-order dual over `f64`.
pub type D1 = Dual<f64>;
/// Two independent derivative directions; `eps.eps` is the mixed second derivative.
pub type D2 = Dual<Dual<f64>>;

impl D2 {
    /// Real number lifted to the second-order level.
    pub fn lift(v: f64) -> D2 {
        Dual::constant(Dual::constant(v))
    }
    /// Seed with outer direction `a` and inner direction `b`: evaluating a
    /// function of such inputs yields value, the two directional derivatives,
    /// and the mixed second derivative along `(a, b)`.
    pub fn seeded(v: f64, outer: f64, inner: f64) -> D2 {
        Dual::new(Dual::new(v, inner), Dual::new(outer, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f<T: Real>(x: T, y: T) -> T {
        x * x * y.sin() + (x / y).exp() - y.powi(3).sqrt()
    }

    fn fd2(g: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h)) / (4.0 * h * h)
    }

    #[test]
    fn first_derivatives_match_central_differences() {
        let (x, y) = (0.7, 1.3);
        let d = f(D1::variable(x), D1::constant(y));
        let h = 1e-6;
        let fd = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        assert_relative_eq!(d.eps, fd, epsilon = 1e-7);
    }

    #[test]
    fn mixed_second_derivative_matches_fd() {
        let (x, y) = (0.7, 1.3);
        let v = f(D2::seeded(x, 1.0, 0.0), D2::seeded(y, 0.0, 1.0));
        assert_relative_eq!(v.re.re, f(x, y), epsilon = 1e-14);
        let fd = fd2(f, x, y, 1e-4);
        assert_relative_eq!(v.eps.eps, fd, epsilon = 1e-5);
    }

    #[test]
    fn pure_second_derivative_matches_fd() {
        let x = 0.4_f64;
        let g = |t: f64| (t * t * t).sin();
        let v = (D2::seeded(x, 1.0, 1.0).powi(3)).sin();
        let h = 1e-4;
        let fd = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
        assert_relative_eq!(v.eps.eps, fd, epsilon = 1e-5);
    }

    #[test]
    fn abs_and_tan_propagate() {
        let x = -0.8;
        let d = D1::variable(x).abs();
        assert_eq!(d.re, 0.8);
        assert_eq!(d.eps, -1.0);
        let t = D1::variable(0.3).tan();
        assert_relative_eq!(t.eps, 1.0 / (0.3f64.cos().powi(2)), epsilon = 1e-14);
    }
}
