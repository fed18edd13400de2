//! Forward-mode dual numbers carrying `N` tangent directions at once.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::real::{step_ulps, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub const fn constant(re: f64) -> Self {
        Dual { re, eps: [0.0; N] }
    }

    /// A variable seeded along tangent direction `dir` (no seed if `dir >= N`).
    pub fn variable(re: f64, dir: usize) -> Self {
        let mut eps = [0.0; N];
        if dir < N {
            eps[dir] = 1.0;
        }
        Dual { re, eps }
    }

    #[inline]
    fn chain(self, re: f64, slope: f64) -> Self {
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e *= slope;
        }
        Dual { re, eps }
    }

    fn has_tangent(&self) -> bool {
        self.eps.iter().any(|&e| e != 0.0)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Dual { re: self.re * rhs.re, eps }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let re = self.re / rhs.re;
        let mut eps = [0.0; N];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (self.eps[i] - re * rhs.eps[i]) / rhs.re;
        }
        Dual { re, eps }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.re, -1.0)
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> SubAssign for Dual<N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const N: usize> MulAssign for Dual<N> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.re
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, 1.0 + t * t)
    }
    fn atan(self) -> Self {
        self.chain(self.re.atan(), 1.0 / (1.0 + self.re * self.re))
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        if !self.has_tangent() {
            return Dual::constant(s);
        }
        self.chain(s, 0.5 / s)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, 1.0 - t * t)
    }
    fn abs(self) -> Self {
        // one-sided choice at the kink: derivative +1 at zero
        if self.re < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Dual::constant(1.0),
            1 => self,
            _ => self.chain(self.re.powi(k), k as f64 * self.re.powi(k - 1)),
        }
    }
    fn nudge(mut self, ulps: i32) -> Self {
        self.re = step_ulps(self.re, ulps);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let x = 0.37;
        let d = Dual::<1>::variable(x, 0);
        let cases: Vec<(Dual<1>, f64)> = vec![
            (d.sin(), fd(f64::sin, x)),
            (d.cos(), fd(f64::cos, x)),
            (d.tan(), fd(f64::tan, x)),
            (d.atan(), fd(f64::atan, x)),
            (d.sqrt(), fd(f64::sqrt, x)),
            (d.exp(), fd(f64::exp, x)),
            (d.tanh(), fd(f64::tanh, x)),
            (d.powi(3), fd(|v| v.powi(3), x)),
            (d.powi(-2), fd(|v| v.powi(-2), x)),
            (d * d / (d + Dual::constant(1.0)), fd(|v| v * v / (v + 1.0), x)),
        ];
        for (got, want) in cases {
            assert!((got.eps[0] - want).abs() < 1e-7, "{got:?} vs {want}");
        }
    }

    #[test]
    fn directions_are_independent() {
        let a = Dual::<2>::variable(2.0, 0);
        let b = Dual::<2>::variable(3.0, 1);
        let p = a * b;
        assert_eq!(p.re, 6.0);
        assert_eq!(p.eps, [3.0, 2.0]);
    }

    #[test]
    fn sqrt_of_constant_zero_has_no_nan() {
        let z = Dual::<3>::constant(0.0).sqrt();
        assert!(z.eps.iter().all(|e| *e == 0.0));
    }
}
