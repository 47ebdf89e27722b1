//! Small numeric helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

/// Convert a ratio of (possibly huge) integers to `f64` without going through
/// `inf/inf`. Handles magnitudes far outside the `f64` exponent range by
/// underflowing to 0 or overflowing to infinity, which is the correct limit.
pub fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    assert!(!den.is_zero(), "ratio denominator must be nonzero");
    if num.is_zero() {
        return 0.0;
    }
    let sign = if num.is_negative() != den.is_negative() {
        -1.0
    } else {
        1.0
    };
    let num = num.abs().to_biguint().expect("abs is nonnegative");
    let den = den.abs().to_biguint().expect("abs is nonnegative");
    sign * big_uratio_to_f64(&num, &den)
}

/// Unsigned version of [`big_ratio_to_f64`].
pub fn big_uratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Bring both operands to <= 64 significant bits and track the shifts.
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let nh = (num >> (ns as u64)).to_f64().expect("fits in 64 bits");
    let dh = (den >> (ds as u64)).to_f64().expect("fits in 64 bits");
    let exp = ns - ds;
    if exp > 1100 {
        return f64::INFINITY;
    }
    if exp < -1100 {
        return 0.0;
    }
    // Split the power of two to avoid intermediate over/underflow.
    let half = exp / 2;
    (nh / dh) * 2f64.powi(half as i32) * 2f64.powi((exp - half) as i32)
}

/// `x` reduced into `[0, m)` for `BigUint` arguments, returned as `BigUint`.
pub fn umod(x: &BigUint, m: &BigUint) -> BigUint {
    x % m
}
