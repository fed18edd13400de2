//! Scalar abstraction shared by plain floats and forward-mode dual numbers.
//!
//! Every numeric routine in the crate (interval arithmetic, graph
//! interpreters, embedding dynamics, integrators) is generic over [`Real`], so
//! the same code path evaluates a rollout in `f64` or differentiates it with
//! [`crate::Dual`]. Ordering decisions (min/max, branch selection) always look
//! at the primal value only.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(v: f64) -> Self;
    /// Primal value.
    fn value(self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn atan(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, k: i32) -> Self;

    /// Move the primal value by `ulps` units in the last place (negative moves down).
    fn nudge(self, ulps: i32) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    #[inline]
    fn recip(self) -> Self {
        Self::one() / self
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.value().is_finite()
    }

    /// Smaller of two values; ties go to `self`.
    #[inline]
    fn min_v(self, other: Self) -> Self {
        if other.value() < self.value() {
            other
        } else {
            self
        }
    }

    /// Larger of two values; ties go to `self`.
    #[inline]
    fn max_v(self, other: Self) -> Self {
        if other.value() > self.value() {
            other
        } else {
            self
        }
    }

    /// `max(self, 0)` with the derivative of the active branch.
    #[inline]
    fn pos_part(self) -> Self {
        if self.value() > 0.0 {
            self
        } else {
            Self::zero()
        }
    }

    /// `min(self, 0)`.
    #[inline]
    fn neg_part(self) -> Self {
        if self.value() < 0.0 {
            self
        } else {
            Self::zero()
        }
    }
}

pub(crate) fn step_ulps(v: f64, ulps: i32) -> f64 {
    let mut out = v;
    if ulps >= 0 {
        for _ in 0..ulps {
            out = out.next_up();
        }
    } else {
        for _ in 0..(-ulps) {
            out = out.next_down();
        }
    }
    out
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn tan(self) -> Self {
        f64::tan(self)
    }
    #[inline]
    fn atan(self) -> Self {
        f64::atan(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    #[inline]
    fn nudge(self, ulps: i32) -> Self {
        step_ulps(self, ulps)
    }
}
