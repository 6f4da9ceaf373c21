//! Float math portability shim.
//!
//! Under `std` the inherent `f64` methods are used directly (inherent
//! methods win over trait methods, so importing the trait is harmless).
//! Under `no_std` the same names are provided through `libm`.

#[cfg(not(feature = "std"))]
pub(crate) trait FloatExt {
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, e: i32) -> Self;
    fn floor(self) -> Self;
    fn round(self) -> Self;
}

#[cfg(not(feature = "std"))]
impl FloatExt for f64 {
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn ln(self) -> Self {
        libm::log(self)
    }
    fn sin(self) -> Self {
        libm::sin(self)
    }
    fn cos(self) -> Self {
        libm::cos(self)
    }
    fn sinh(self) -> Self {
        libm::sinh(self)
    }
    fn cosh(self) -> Self {
        libm::cosh(self)
    }
    fn atan2(self, other: Self) -> Self {
        libm::atan2(self, other)
    }
    fn powf(self, e: Self) -> Self {
        libm::pow(self, e)
    }
    fn powi(self, e: i32) -> Self {
        libm::pow(self, e as f64)
    }
    fn floor(self) -> Self {
        libm::floor(self)
    }
    fn round(self) -> Self {
        libm::round(self)
    }
}

/// Import in modules that do float math so the `no_std` build resolves.
macro_rules! use_float_shim {
    () => {
        #[cfg(not(feature = "std"))]
        #[allow(unused_imports)]
        use crate::math::FloatExt;
    };
}
pub(crate) use use_float_shim;
