//! Log-space arithmetic helpers.
//!
//! Quantities like `K_m(z,z)` or `e^{x^{2m}}` exceed the scalar range long
//! before the regimes of interest are reached, so sums and ratios of
//! nonnegative quantities are formed on their natural logarithms.

use crate::scalar::{real, Real};

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Streaming `ln Σ e^{x_i}` accumulator with max-shift rescaling.
#[derive(Debug, Clone)]
pub struct LogSum<T> {
    max: T,
    sum: T,
}

impl<T: Real> LogSum<T> {
    pub fn new() -> Self {
        LogSum {
            max: T::neg_infinity(),
            sum: T::zero(),
        }
    }

    /// Adds a term given as `ln x` (with `x ≥ 0`; `-∞` is a valid no-op).
    pub fn add_log(&mut self, lx: T) {
        if lx == T::neg_infinity() {
            return;
        }
        if lx <= self.max {
            self.sum += (lx - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - lx).exp() + T::one();
            self.max = lx;
        }
    }

    /// Adds a term `w · e^{lx}` with a plain nonnegative weight `w`.
    pub fn add_scaled_log(&mut self, w: T, lx: T) {
        if w <= T::zero() {
            return;
        }
        self.add_log(lx + w.ln());
    }

    /// `ln Σ e^{x_i}`; `-∞` if the sum is empty.
    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl<T: Real> Default for LogSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Exponentiates a log-scaled magnitude, saturating at the largest finite
/// scalar instead of returning infinity.
#[inline]
pub fn exp_saturating<T: Real>(lx: T) -> T {
    if lx >= T::max_value().ln() {
        T::max_value()
    } else {
        lx.exp()
    }
}

/// Largest log-magnitude that still exponentiates to a finite scalar, minus a
/// small guard band.
#[inline]
pub fn safe_log_range<T: Real>() -> T {
    T::max_value().ln() - real::<T>(8.0)
}
