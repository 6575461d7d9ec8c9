//! Phase arithmetic on the circle R/Z.
//!
//! Every exponential in the crate goes through [`e`] after the phase has been
//! reduced to [0, 1). Products `t * m` with a large integer `m` are reduced with
//! [`frac_mul`], which is exact for any finite `t`.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// e(x) = exp(2 pi i x).
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// e(num / den) with the numerator reduced exactly modulo den first.
#[inline]
pub fn e_ratio(num: i128, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i128) as f64;
    e(r / den as f64)
}

/// Fractional part in [0, 1).
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Fractional part of `t * m`, computed from the exact binary expansion of `t`.
///
/// A double is `M * 2^-E` with `M < 2^53`, so `M * m < 2^117` and
/// `(M * m) mod 2^E` is computed exactly in `u128`.
pub fn frac_mul(t: f64, m: u64) -> f64 {
    if t < 0.0 {
        // keeps frac_mul(-t, m) = 1 - frac_mul(t, m) free of the rounding in frac(t)
        return frac(-frac_mul(-t, m));
    }
    let f = frac(t);
    if f == 0.0 || m == 0 {
        return 0.0;
    }
    let bits = f.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let (mant, e2) = if exp == 0 {
        (bits & ((1u64 << 52) - 1), -1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), exp - 1075)
    };
    // f = mant * 2^e2 with e2 < 0
    let shift = (-e2) as u32;
    let prod = mant as u128 * m as u128;
    let r = if shift >= 127 {
        prod
    } else {
        prod & ((1u128 << shift) - 1)
    };
    frac(r as f64 * 2f64.powi(-(shift as i32)))
}

/// e(t * m) with exact phase reduction.
#[inline]
pub fn e_mul(t: f64, m: u64) -> Complex64 {
    e(frac_mul(t, m))
}

/// e(t * m) for signed m.
#[inline]
pub fn e_mul_signed(t: f64, m: i64) -> Complex64 {
    if m >= 0 {
        e_mul(t, m as u64)
    } else {
        e_mul(t, m.unsigned_abs()).conj()
    }
}
