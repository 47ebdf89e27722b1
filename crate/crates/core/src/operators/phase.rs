//! Exact unimodular phase arithmetic.
//!
//! A `PhaseAngle` is a point of the unit circle, written multiplicatively as
//! `e^{2 pi i * angle}` with the angle measured in turns. The exact variant
//! stores the angle as a reduced rational with arbitrary-precision parts, so
//! powers `lambda^n` reduce to a residue computation `n mod q` and stay exact
//! for exponents far beyond iteration reach.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::util::big_uratio_to_f64;

/// `sin(pi * s)` with symmetric range reduction; well conditioned near the
/// zeros at integer `s`.
pub fn sin_pi(s: f64) -> f64 {
    let mut t = s.rem_euclid(2.0);
    let mut sign = 1.0;
    if t > 1.0 {
        t -= 1.0;
        sign = -1.0;
    }
    // Fold to [0, 1/2]; the reflection 1 - t is exact in floating point here.
    if t > 0.5 {
        t = 1.0 - t;
    }
    sign * (std::f64::consts::PI * t).sin()
}

/// `e^{2 pi i s}` for an angle in turns.
pub fn unit_from_turns(s: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * s.rem_euclid(1.0))
}

/// A unimodular scalar, exact (rational turns) or approximate (real turns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PhaseAngle {
    /// Reduced fraction `p/q` of a full turn, `0 <= p < q`, `q >= 1`.
    Exact { p: BigUint, q: BigUint },
    /// Real angle in turns, normalized to `[0, 1)`.
    Approx { turns: f64 },
}

impl PhaseAngle {
    /// Exact phase `p/q` of a turn from machine integers.
    pub fn exact(p: u64, q: u64) -> Self {
        Self::exact_big(BigUint::from(p), BigUint::from(q))
            .expect("q >= 1 is guaranteed by caller in the u64 constructor")
    }

    /// Exact phase from arbitrary-precision parts; reduces and normalizes.
    pub fn exact_big(p: BigUint, q: BigUint) -> Result<Self> {
        if q.is_zero() {
            return Err(RecurError::Config("phase denominator must be >= 1".into()));
        }
        let p = p % &q;
        let g = p.gcd(&q);
        Ok(Self::Exact { p: &p / &g, q: &q / &g })
    }

    /// Approximate phase from an angle in turns.
    pub fn approx(turns: f64) -> Self {
        Self::Approx {
            turns: turns.rem_euclid(1.0),
        }
    }

    /// Identity scalar (angle zero).
    pub fn zero() -> Self {
        Self::Exact {
            p: BigUint::zero(),
            q: BigUint::one(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact { .. })
    }

    /// True for the angle-zero phase (scalar 1).
    pub fn is_trivial(&self) -> bool {
        match self {
            Self::Exact { p, .. } => p.is_zero(),
            Self::Approx { turns } => *turns == 0.0,
        }
    }

    /// The exact order of the scalar in the circle group, if known:
    /// `q` for a reduced `p/q` with `p != 0`, 1 for the identity.
    pub fn order(&self) -> Option<BigUint> {
        match self {
            Self::Exact { p, q } => {
                if p.is_zero() {
                    Some(BigUint::one())
                } else {
                    Some(q.clone())
                }
            }
            Self::Approx { .. } => None,
        }
    }

    /// Angle in turns as `f64` (lossy for exact phases with huge parts).
    pub fn turns_f64(&self) -> f64 {
        match self {
            Self::Exact { p, q } => big_uratio_to_f64(p, q),
            Self::Approx { turns } => *turns,
        }
    }

    /// The scalar itself.
    pub fn as_complex(&self) -> Complex64 {
        unit_from_turns(self.turns_f64())
    }

    /// `lambda^n`. Exact phases reduce `n` modulo the order first, so the
    /// result for `n` and `n mod q` is bit-identical.
    pub fn pow(&self, n: &BigUint) -> Complex64 {
        match self {
            Self::Exact { p, q } => {
                let r = (n * p) % q;
                unit_from_turns(big_uratio_to_f64(&r, q))
            }
            Self::Approx { turns } => {
                // Beyond 2^53 the product n * turns has no fractional
                // precision left; callers guard with `pow_supports`.
                let nf = n.to_f64().unwrap_or(f64::INFINITY);
                unit_from_turns((nf * turns).rem_euclid(1.0))
            }
        }
    }

    /// Whether `pow` is meaningful for this exponent (always for exact
    /// phases; approximate angles lose all precision beyond 2^53).
    pub fn pow_supports(&self, n: &BigUint) -> bool {
        match self {
            Self::Exact { .. } => true,
            Self::Approx { turns } => *turns == 0.0 || n.bits() <= 53,
        }
    }

    /// `|lambda^n - 1| = 2 |sin(pi * n * angle)|`.
    pub fn pow_minus_one_abs(&self, n: &BigUint) -> f64 {
        match self {
            Self::Exact { p, q } => {
                let r = (n * p) % q;
                2.0 * sin_pi(big_uratio_to_f64(&r, q)).abs()
            }
            Self::Approx { turns } => {
                let nf = n.to_f64().unwrap_or(f64::INFINITY);
                2.0 * sin_pi((nf * *turns).rem_euclid(1.0)).abs()
            }
        }
    }

    /// The geometric-sum factor `sum_{j=0}^{n-1} lambda^j`, which equals
    /// `(lambda^n - 1)/(lambda - 1)` when `lambda != 1` and `n` when
    /// `lambda = 1`. Evaluated in a form that stays stable when the base
    /// angle is far below floating-point resolution.
    pub fn geometric_factor(&self, n: &BigUint) -> Complex64 {
        if self.is_trivial() {
            let nf = n.to_f64().unwrap_or(f64::INFINITY);
            return Complex64::new(nf, 0.0);
        }
        match self {
            Self::Exact { p, q } => {
                // (e^{2 pi i n a} - 1)/(e^{2 pi i a} - 1)
                //   = e^{i pi (n-1) a} * sin(pi n a) / sin(pi a),  a = p/q.
                let two_q = q << 1;
                let rn = (n * p) % &two_q; // n*a mod 2, as rn/q
                let rphase = ((n - 1u32) * p) % &two_q;
                let phase = unit_from_turns(big_uratio_to_f64(&rphase, q) / 2.0);
                let sn = big_uratio_to_f64(&rn, q); // in [0, 2)
                let a = big_uratio_to_f64(p, q); // in (0, 1)
                let mag = if a > 1e-8 {
                    sin_pi(sn) / sin_pi(a)
                } else {
                    // sin(pi a) = pi a to 1e-16 relative; cancel pi a against
                    // the numerator to dodge underflow when both are tiny.
                    let folded = if sn <= 1.0 { sn } else { sn - 2.0 };
                    if folded.abs() < 1e-8 {
                        // sin(pi sn)/ (pi a) = folded/a = (signed rn)/p
                        let signed = if sn <= 1.0 {
                            big_uratio_to_f64(&rn, p)
                        } else {
                            -big_uratio_to_f64(&(&two_q - &rn), p)
                        };
                        signed
                    } else {
                        sin_pi(sn) / (std::f64::consts::PI * a)
                    }
                };
                phase * mag
            }
            Self::Approx { turns } => {
                let nf = n.to_f64().unwrap_or(f64::INFINITY);
                let s = sin_pi(*turns);
                if s.abs() < 1e-300 {
                    return Complex64::new(nf, 0.0);
                }
                let phase = unit_from_turns(((nf - 1.0) * turns).rem_euclid(2.0) / 2.0);
                phase * (sin_pi((nf * turns).rem_euclid(2.0)) / s)
            }
        }
    }
}
