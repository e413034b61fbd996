//! Scalar abstraction over hardware doubles and wide binary floats.
//!
//! The embedded-chain solvers and the kernel closed forms are generic over
//! [`Real`] so the same code runs in `f64` and in [`Wide`] precision. The
//! forward recursion for the infinite invariant measure divides by `a_0` at
//! every step; its rounding error grows geometrically in the index, so
//! long prefixes need far more than 16 digits.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

/// Arithmetic needed by the solvers.
pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Significant decimal digits carried by the type.
    const DIGITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn exp(&self) -> Self;
    fn powi(&self, n: u32) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const DIGITS: u32 = 15;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }

    #[inline]
    fn exp(&self) -> Self {
        libm::exp(*self)
    }

    #[inline]
    fn powi(&self, n: u32) -> Self {
        let mut acc = 1.0;
        let mut base = *self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        acc
    }

    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    #[inline]
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
}

type Big = FBig<HalfEven, 2>;

/// Binary floating point with `BITS` bits of mantissa.
///
/// `Wide<192>` carries about 57 significant decimal digits.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Wide<const BITS: usize>(Big);

/// The default high-precision type (≥ 50 decimal digits).
pub type HighPrecision = Wide<192>;

impl<const BITS: usize> Wide<BITS> {
    fn wrap(v: Big) -> Self {
        Wide(v.with_precision(BITS).value())
    }
}

impl<const BITS: usize> fmt::Debug for Wide<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wide<{BITS}>({:e})", self.to_f64())
    }
}

macro_rules! wide_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<const BITS: usize> $tr for Wide<BITS> {
            type Output = Self;
            #[inline]
            fn $method(self, rhs: Self) -> Self {
                Wide(self.0 $op rhs.0)
            }
        }
    };
}

wide_binop!(Add, add, +);
wide_binop!(Sub, sub, -);
wide_binop!(Mul, mul, *);
wide_binop!(Div, div, /);

impl<const BITS: usize> Neg for Wide<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        Wide(-self.0)
    }
}

impl<const BITS: usize> Real for Wide<BITS> {
    // log10(2) * BITS, rounded down.
    const DIGITS: u32 = (BITS as u64 * 30103 / 100_000) as u32;

    fn from_f64(x: f64) -> Self {
        let v = Big::try_from(x).expect("finite f64");
        Self::wrap(v)
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn exp(&self) -> Self {
        Self::wrap(self.0.exp())
    }

    fn powi(&self, n: u32) -> Self {
        Self::wrap(self.0.powi(n.into()))
    }

    fn is_zero(&self) -> bool {
        self.0 == Big::ZERO
    }
}

const _: () = assert!(HighPrecision::DIGITS >= 50);
