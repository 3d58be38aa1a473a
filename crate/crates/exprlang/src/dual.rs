//! First-order forward-mode dual numbers over the plane.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value together with its partial derivatives with respect to `x` and `y`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual2 {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Dual2 {
    pub const fn new(value: f64, dx: f64, dy: f64) -> Self {
        Self { value, dx, dy }
    }

    /// A constant: both partials vanish.
    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    /// The coordinate function `x` evaluated at `x`.
    pub const fn var_x(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    /// The coordinate function `y` evaluated at `y`.
    pub const fn var_y(y: f64) -> Self {
        Self::new(y, 0.0, 1.0)
    }

    /// Applies a scalar function with known value `f` and derivative `df`
    /// through the chain rule.
    #[inline]
    pub fn chain(self, f: f64, df: f64) -> Self {
        Self::new(f, df * self.dx, df * self.dy)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.dx.is_finite() && self.dy.is_finite()
    }

    /// Gradient as an `(dx, dy)` pair.
    pub fn gradient(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s)
    }

    pub fn tan(self) -> Self {
        let t = self.value.tan();
        self.chain(t, 1.0 + t * t)
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    /// Natural logarithm; the caller is responsible for `value > 0`.
    pub fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }

    /// Square root; the caller is responsible for `value > 0`.
    pub fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }

    /// Absolute value with the subgradient convention `d|a|(0) = 0`.
    pub fn abs(self) -> Self {
        let sign = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.value.abs(), sign)
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i64) -> Self {
        if n < 0 {
            return Self::constant(1.0) / self.powi_unsigned(n.unsigned_abs());
        }
        self.powi_unsigned(n as u64)
    }

    fn powi_unsigned(self, mut n: u64) -> Self {
        let mut base = self;
        let mut acc = Self::constant(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// `self ^ exponent` through `exp(exponent * ln(self))`; requires a
    /// positive base.
    pub fn powf(self, exponent: Dual2) -> Self {
        (exponent * self.ln()).exp()
    }

    /// Two-argument arctangent `atan2(self, x)`; undefined at the origin.
    pub fn atan2(self, x: Dual2) -> Self {
        let y = self;
        let r2 = x.value * x.value + y.value * y.value;
        Self::new(
            y.value.atan2(x.value),
            (x.value * y.dx - y.value * x.dx) / r2,
            (x.value * y.dy - y.value * x.dy) / r2,
        )
    }

    /// Minimum; ties select `self`.
    pub fn min(self, other: Dual2) -> Self {
        if other.value < self.value {
            other
        } else {
            self
        }
    }

    /// Maximum; ties select `self`.
    pub fn max(self, other: Dual2) -> Self {
        if other.value > self.value {
            other
        } else {
            self
        }
    }
}

impl From<f64> for Dual2 {
    fn from(value: f64) -> Self {
        Self::constant(value)
    }
}

impl Add for Dual2 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl Sub for Dual2 {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

impl Mul for Dual2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.dx * rhs.value + self.value * rhs.dx,
            self.dy * rhs.value + self.value * rhs.dy,
        )
    }
}

impl Div for Dual2 {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.value;
        let q = self.value * inv;
        Self::new(q, (self.dx - q * rhs.dx) * inv, (self.dy - q * rhs.dy) * inv)
    }
}

impl Neg for Dual2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.dx, -self.dy)
    }
}

impl Mul<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.value * rhs, self.dx * rhs, self.dy * rhs)
    }
}

impl Add<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        Self::new(self.value + rhs, self.dx, self.dy)
    }
}
