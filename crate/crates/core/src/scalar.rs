//! The scalar abstraction shared by the linear-algebra layer.
//!
//! Everything downstream of the field arithmetic (elimination, kernels,
//! representation matrices) is written against this trait rather than a
//! concrete type, so the same code runs over plain rationals and over
//! cyclotomic numbers. Both instantiations are exact; the trait deliberately
//! has no notion of approximation or tolerance.

use std::fmt::{Debug, Display};
use std::ops::{Div, Neg, Sub};

use num_traits::{One, Zero};

use crate::cyclotomic::CycNumber;
use crate::rational::Rational;

/// An exact field element: ring operations from `num_traits` plus exact
/// division. `Div` may panic on a zero divisor; callers that cannot rule out
/// zero must check `is_zero` or use `try_inv` first.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
{
    /// Multiplicative inverse, or `None` for zero.
    fn try_inv(&self) -> Option<Self>;
}

impl Scalar for Rational {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }
}

impl Scalar for CycNumber {
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rational_inverse() {
        assert_eq!(rat(2, 3).try_inv(), Some(rat(3, 2)));
        assert_eq!(rat(0, 1).try_inv(), None);
    }

    #[test]
    fn cyclotomic_inverse() {
        let z = CycNumber::root_of_unity(5, 1);
        let inv = z.try_inv().unwrap();
        assert_eq!(z * inv, CycNumber::one());
        assert_eq!(CycNumber::zero().try_inv(), None);
    }
}
