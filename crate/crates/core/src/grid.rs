//! Geometric threshold grid `τ_i = (1+ε)^i`.
//!
//! Thresholds are always identified by their integer exponent and recomputed
//! from it, so a bucket never changes identity when the float bounds move.

use std::ops::RangeInclusive;

use crate::params::{check_epsilon, ParamError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdGrid<T> {
    epsilon: T,
    base: T,
}

impl<T: Scalar> ThresholdGrid<T> {
    pub fn new(epsilon: T) -> Result<Self, ParamError> {
        check_epsilon(epsilon)?;
        Ok(ThresholdGrid {
            epsilon,
            base: T::one() + epsilon,
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// `1 + ε`.
    pub fn base(&self) -> T {
        self.base
    }

    pub fn tau(&self, exponent: i32) -> T {
        self.base.powi(exponent)
    }

    /// Smallest `i` with `(1+ε)^i ≥ x`, for `x > 0`.
    pub fn ceil_log(&self, x: T) -> i32 {
        let mut i = (x.ln() / self.base.ln()).ceil().to_i32().unwrap_or(i32::MAX);
        while self.tau(i - 1) >= x {
            i -= 1;
        }
        while self.tau(i) < x {
            i += 1;
        }
        i
    }

    /// Largest `i` with `(1+ε)^i ≤ x`, for `x > 0`.
    pub fn floor_log(&self, x: T) -> i32 {
        let mut i = (x.ln() / self.base.ln()).floor().to_i32().unwrap_or(i32::MIN);
        while self.tau(i + 1) <= x {
            i += 1;
        }
        while self.tau(i) > x {
            i -= 1;
        }
        i
    }

    /// Every exponent with `lo ≤ (1+ε)^i ≤ hi`. Empty unless `0 < lo ≤ hi`.
    pub fn exponents(&self, lo: T, hi: T) -> RangeInclusive<i32> {
        if !(lo > T::zero()) || !(hi >= lo) || !hi.is_finite() {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        self.ceil_log(lo)..=self.floor_log(hi)
    }
}
