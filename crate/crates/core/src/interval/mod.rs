//! Scalar intervals and their minimal inclusion functions.
//!
//! Every primitive returns the tightest enclosure of the image of its real
//! counterpart, computed with round-to-nearest endpoint arithmetic. Callers
//! who want enclosures robust to floating-point rounding can widen results
//! with [`Interval::inflate`].

mod tensor;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

pub use tensor::{IntervalTensor, Perturbation};

/// Default number of ulps used by outward inflation.
pub const INFLATE_ULPS: i32 = 4;

/// Closed interval `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T = f64> {
    pub lower: T,
    pub upper: T,
}

/// Binary primitives with minimal interval counterparts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Unary primitives with minimal interval counterparts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Atan,
    Sqrt,
    Exp,
    Tanh,
    Abs,
    /// Integer power with a static exponent.
    PowI(i32),
}

impl BinaryOp {
    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
        }
    }

    pub fn apply_real<T: Real>(self, a: T, b: T) -> Result<T> {
        Ok(match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b.value() == 0.0 {
                    return Err(Error::Domain { op: "div", lower: 0.0, upper: 0.0 });
                }
                a / b
            }
        })
    }
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Atan => "atan",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Abs => "abs",
            UnaryOp::PowI(_) => "pow",
        }
    }

    /// Looks up a named unary primitive (`pow` needs its exponent separately).
    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "neg" => UnaryOp::Neg,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "atan" | "arctan" => UnaryOp::Atan,
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "tanh" => UnaryOp::Tanh,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    pub fn apply_real<T: Real>(self, a: T) -> Result<T> {
        let v = a.value();
        Ok(match self {
            UnaryOp::Neg => -a,
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Tan => {
                if (v - FRAC_PI_2).rem_euclid(PI) == 0.0 {
                    return Err(Error::Domain { op: "tan", lower: v, upper: v });
                }
                a.tan()
            }
            UnaryOp::Atan => a.atan(),
            UnaryOp::Sqrt => {
                if v < 0.0 {
                    return Err(Error::Domain { op: "sqrt", lower: v, upper: v });
                }
                a.sqrt()
            }
            UnaryOp::Exp => a.exp(),
            UnaryOp::Tanh => a.tanh(),
            UnaryOp::Abs => a.abs(),
            UnaryOp::PowI(k) => {
                if k < 0 && v == 0.0 {
                    return Err(Error::Domain { op: "pow", lower: v, upper: v });
                }
                a.powi(k)
            }
        })
    }
}

/// True when some `offset + k * period` (integer k) lies in `[a, b]`.
fn hits_lattice(a: f64, b: f64, offset: f64, period: f64) -> bool {
    let k = ((a - offset) / period).ceil();
    offset + k * period <= b
}

impl<T: Real> Interval<T> {
    /// Checked constructor: endpoints must be ordered and not NaN.
    pub fn new(lower: T, upper: T) -> Result<Self> {
        let (l, u) = (lower.value(), upper.value());
        if l.is_nan() || u.is_nan() {
            return Err(Error::NonFinite(0));
        }
        if l > u {
            return Err(Error::OrderViolation { index: 0, lower: l, upper: u });
        }
        Ok(Interval { lower, upper })
    }

    #[inline]
    pub const fn new_unchecked(lower: T, upper: T) -> Self {
        Interval { lower, upper }
    }

    /// Degenerate interval `[x, x]`.
    #[inline]
    pub fn point(x: T) -> Self {
        Interval { lower: x, upper: x }
    }

    /// `[center - pert, center + pert]`.
    pub fn centered(center: T, pert: T) -> Self {
        Interval { lower: center - pert, upper: center + pert }
    }

    #[inline]
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    #[inline]
    pub fn midpoint(&self) -> T {
        (self.lower + self.upper) * T::from_f64(0.5)
    }

    #[inline]
    pub fn is_thin(&self) -> bool {
        self.lower.value() == self.upper.value()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lower.value() <= x && x <= self.upper.value()
    }

    #[inline]
    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    #[inline]
    pub fn subseteq<S: Real>(&self, other: &Interval<S>) -> bool {
        other.lower.value() <= self.lower.value() && self.upper.value() <= other.upper.value()
    }

    /// Intersection, `None` when disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lower = self.lower.max_v(other.lower);
        let upper = self.upper.min_v(other.upper);
        (lower.value() <= upper.value()).then_some(Interval { lower, upper })
    }

    pub fn hull(&self, other: &Self) -> Self {
        Interval { lower: self.lower.min_v(other.lower), upper: self.upper.max_v(other.upper) }
    }

    /// Widen outward by `ulps` units in the last place on each side.
    pub fn inflate(&self, ulps: i32) -> Self {
        Interval { lower: self.lower.nudge(-ulps), upper: self.upper.nudge(ulps) }
    }

    /// Product with a real scalar.
    #[inline]
    pub fn scale(self, s: T) -> Self {
        if s.value() >= 0.0 {
            Interval { lower: self.lower * s, upper: self.upper * s }
        } else {
            Interval { lower: self.upper * s, upper: self.lower * s }
        }
    }

    /// Interval shifted by a real value.
    #[inline]
    pub fn shift(self, s: T) -> Self {
        Interval { lower: self.lower + s, upper: self.upper + s }
    }

    pub fn recip(self) -> Result<Self> {
        if self.contains_zero() {
            return self.zero_division();
        }
        Ok(Interval { lower: self.upper.recip(), upper: self.lower.recip() })
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.contains_zero() {
            return rhs.zero_division();
        }
        let q = [
            self.lower / rhs.lower,
            self.lower / rhs.upper,
            self.upper / rhs.lower,
            self.upper / rhs.upper,
        ];
        Ok(Interval {
            lower: q[0].min_v(q[1]).min_v(q[2]).min_v(q[3]),
            upper: q[0].max_v(q[1]).max_v(q[2]).max_v(q[3]),
        })
    }

    #[cfg(not(feature = "extended-div"))]
    fn zero_division(&self) -> Result<Self> {
        Err(Error::DivisionByIntervalContainingZero {
            lower: self.lower.value(),
            upper: self.upper.value(),
        })
    }

    #[cfg(feature = "extended-div")]
    fn zero_division(&self) -> Result<Self> {
        Ok(Interval::new_unchecked(T::from_f64(f64::NEG_INFINITY), T::from_f64(f64::INFINITY)))
    }

    /// Minimal enclosure of `x²`.
    pub fn sq(self) -> Self {
        let (l, u) = (self.lower.value(), self.upper.value());
        if l >= 0.0 {
            Interval { lower: self.lower * self.lower, upper: self.upper * self.upper }
        } else if u <= 0.0 {
            Interval { lower: self.upper * self.upper, upper: self.lower * self.lower }
        } else {
            let hi = if -l > u { self.lower * self.lower } else { self.upper * self.upper };
            Interval { lower: T::zero(), upper: hi }
        }
    }

    pub fn sin(self) -> Self {
        let (a, b) = (self.lower.value(), self.upper.value());
        if b - a >= TAU {
            return Interval { lower: T::from_f64(-1.0), upper: T::one() };
        }
        let (sa, sb) = (self.lower.sin(), self.upper.sin());
        let mut lower = sa.min_v(sb);
        let mut upper = sa.max_v(sb);
        if hits_lattice(a, b, FRAC_PI_2, TAU) {
            upper = T::one();
        }
        if hits_lattice(a, b, -FRAC_PI_2, TAU) {
            lower = T::from_f64(-1.0);
        }
        Interval { lower, upper }
    }

    pub fn cos(self) -> Self {
        let (a, b) = (self.lower.value(), self.upper.value());
        if b - a >= TAU {
            return Interval { lower: T::from_f64(-1.0), upper: T::one() };
        }
        let (ca, cb) = (self.lower.cos(), self.upper.cos());
        let mut lower = ca.min_v(cb);
        let mut upper = ca.max_v(cb);
        if hits_lattice(a, b, 0.0, TAU) {
            upper = T::one();
        }
        if hits_lattice(a, b, PI, TAU) {
            lower = T::from_f64(-1.0);
        }
        Interval { lower, upper }
    }

    /// Monotone on each branch; an interval touching a pole is a domain error.
    pub fn tan(self) -> Result<Self> {
        let (a, b) = (self.lower.value(), self.upper.value());
        if b - a >= PI || hits_lattice(a, b, FRAC_PI_2, PI) {
            return Err(Error::Domain { op: "tan", lower: a, upper: b });
        }
        Ok(Interval { lower: self.lower.tan(), upper: self.upper.tan() })
    }

    pub fn atan(self) -> Self {
        Interval { lower: self.lower.atan(), upper: self.upper.atan() }
    }

    pub fn sqrt(self) -> Result<Self> {
        if self.lower.value() < 0.0 {
            return Err(Error::Domain {
                op: "sqrt",
                lower: self.lower.value(),
                upper: self.upper.value(),
            });
        }
        Ok(Interval { lower: self.lower.sqrt(), upper: self.upper.sqrt() })
    }

    pub fn exp(self) -> Self {
        Interval { lower: self.lower.exp(), upper: self.upper.exp() }
    }

    pub fn tanh(self) -> Self {
        Interval { lower: self.lower.tanh(), upper: self.upper.tanh() }
    }

    pub fn abs(self) -> Self {
        let (l, u) = (self.lower.value(), self.upper.value());
        if l >= 0.0 {
            self
        } else if u <= 0.0 {
            -self
        } else {
            let hi = if -l > u { -self.lower } else { self.upper };
            Interval { lower: T::zero(), upper: hi }
        }
    }

    pub fn powi(self, k: i32) -> Result<Self> {
        if k == 0 {
            return Ok(Interval::point(T::one()));
        }
        if k < 0 {
            if self.contains_zero() {
                return Err(Error::Domain {
                    op: "pow",
                    lower: self.lower.value(),
                    upper: self.upper.value(),
                });
            }
            return self.powi(-k)?.recip();
        }
        if k == 1 {
            return Ok(self);
        }
        if k % 2 == 1 {
            return Ok(Interval { lower: self.lower.powi(k), upper: self.upper.powi(k) });
        }
        let (l, u) = (self.lower.value(), self.upper.value());
        Ok(if l >= 0.0 {
            Interval { lower: self.lower.powi(k), upper: self.upper.powi(k) }
        } else if u <= 0.0 {
            Interval { lower: self.upper.powi(k), upper: self.lower.powi(k) }
        } else {
            let hi = if -l > u { self.lower.powi(k) } else { self.upper.powi(k) };
            Interval { lower: T::zero(), upper: hi }
        })
    }

    pub fn unary(self, op: UnaryOp) -> Result<Self> {
        Ok(match op {
            UnaryOp::Neg => -self,
            UnaryOp::Sin => self.sin(),
            UnaryOp::Cos => self.cos(),
            UnaryOp::Tan => self.tan()?,
            UnaryOp::Atan => self.atan(),
            UnaryOp::Sqrt => self.sqrt()?,
            UnaryOp::Exp => self.exp(),
            UnaryOp::Tanh => self.tanh(),
            UnaryOp::Abs => self.abs(),
            UnaryOp::PowI(k) => self.powi(k)?,
        })
    }

    pub fn binary(self, op: BinaryOp, rhs: Self) -> Result<Self> {
        Ok(match op {
            BinaryOp::Add => self + rhs,
            BinaryOp::Sub => self - rhs,
            BinaryOp::Mul => self * rhs,
            BinaryOp::Div => self.checked_div(rhs)?,
        })
    }

    /// Drops the tangent part, keeping primal endpoints.
    pub fn to_f64(&self) -> Interval<f64> {
        Interval { lower: self.lower.value(), upper: self.upper.value() }
    }
}

impl<T: Real> Add for Interval<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Interval { lower: self.lower + rhs.lower, upper: self.upper + rhs.upper }
    }
}

impl<T: Real> Sub for Interval<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Interval { lower: self.lower - rhs.upper, upper: self.upper - rhs.lower }
    }
}

impl<T: Real> Mul for Interval<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if rhs.is_thin() {
            return self.scale(rhs.lower);
        }
        if self.is_thin() {
            return rhs.scale(self.lower);
        }
        let p1 = self.lower * rhs.lower;
        let p2 = self.lower * rhs.upper;
        let p3 = self.upper * rhs.lower;
        let p4 = self.upper * rhs.upper;
        Interval {
            lower: p1.min_v(p2).min_v(p3).min_v(p4),
            upper: p1.max_v(p2).max_v(p3).max_v(p4),
        }
    }
}

impl<T: Real> Neg for Interval<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Interval { lower: -self.upper, upper: -self.lower }
    }
}

impl<T: Real> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower.value(), self.upper.value())
    }
}
