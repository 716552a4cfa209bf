//! Scalar abstraction for the embedding evaluators.
//!
//! The same monomial parametrization code runs over exact integers and
//! rationals (rank and kernel decisions), over `f64` (floating cross-check
//! mode) and over `Complex<f64>` (the decomposition search).

use num::complex::Complex64;
use num::{BigInt, BigRational, ToPrimitive};
use std::ops::{Add, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + PartialEq
    + num::Zero
    + num::One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Exact scalars compare against zero directly; floating scalars use a
    /// relative tolerance when deciding whether a dot product vanishes.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    /// Best-effort absolute value as `f64`; only consulted to build
    /// tolerances for inexact scalars.
    fn magnitude(&self) -> f64;

    /// Whether `dot`, obtained from operands of the given combined scale,
    /// counts as zero.
    fn dot_vanishes(dot: &Self, scale: f64) -> bool {
        if Self::EXACT {
            dot.is_zero()
        } else {
            dot.magnitude() <= 1e-9 * scale
        }
    }
}

impl Scalar for BigInt {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}
