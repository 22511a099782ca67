//! Scalar `f64` math routed through `std` or `libm` depending on features.
//!
//! Everything numerical in this crate calls these shims instead of the
//! `f64` inherent methods so that `no_std` builds only differ in which
//! libm implementation they link, not in code paths.

#[cfg(feature = "std")]
macro_rules! shim {
    ($name:ident, $libm:ident, 1) => {
        #[inline(always)]
        pub fn $name(x: f64) -> f64 {
            x.$name()
        }
    };
    ($name:ident, $libm:ident, 2) => {
        #[inline(always)]
        pub fn $name(x: f64, y: f64) -> f64 {
            x.$name(y)
        }
    };
}

#[cfg(not(feature = "std"))]
macro_rules! shim {
    ($name:ident, $libm:ident, 1) => {
        #[inline(always)]
        pub fn $name(x: f64) -> f64 {
            libm::$libm(x)
        }
    };
    ($name:ident, $libm:ident, 2) => {
        #[inline(always)]
        pub fn $name(x: f64, y: f64) -> f64 {
            libm::$libm(x, y)
        }
    };
}

shim!(sqrt, sqrt, 1);
shim!(exp, exp, 1);
shim!(ln, log, 1);
shim!(sin, sin, 1);
shim!(cos, cos, 1);
shim!(tan, tan, 1);
shim!(atan, atan, 1);
shim!(powf, pow, 2);

/// |x| via sign-bit masking; avoids depending on std for the trivial case.
#[inline(always)]
pub fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !(1u64 << 63))
}

/// x^k for small integer exponents, by repeated multiplication.
#[inline]
pub fn powi(x: f64, k: i32) -> f64 {
    let mut acc = 1.0;
    let mut base = if k < 0 { 1.0 / x } else { x };
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[inline(always)]
pub fn hypot(x: f64, y: f64) -> f64 {
    sqrt(x * x + y * y)
}
