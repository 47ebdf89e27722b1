//! Diagonal unitary operators: `e_i -> lambda_i e_i` with unimodular
//! `lambda_i` given exactly or approximately per basis index.

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::PhaseAngle;
use crate::space::{CoeffVec, MetricSpec, NormSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalUnitary {
    offset: i64,
    phases: Vec<PhaseAngle>,
}

impl DiagonalUnitary {
    pub fn new(offset: i64, phases: Vec<PhaseAngle>) -> Result<Self> {
        if phases.is_empty() {
            return Err(RecurError::Config("need at least one phase".into()));
        }
        Ok(Self { offset, phases })
    }

    pub fn window(&self) -> (i64, usize) {
        (self.offset, self.phases.len())
    }

    pub fn phases(&self) -> &[PhaseAngle] {
        &self.phases
    }

    pub fn phase_at(&self, index: i64) -> Option<&PhaseAngle> {
        if index < self.offset {
            return None;
        }
        self.phases.get((index - self.offset) as usize)
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::Norm(NormSpec::L2)
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for (j, ph) in self.phases.iter().enumerate() {
            let i = off + j as i64;
            out.set(i, out.get(i) * ph.as_complex());
        }
        Ok(out)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for (j, ph) in self.phases.iter().enumerate() {
            if !ph.pow_supports(n) {
                return Err(RecurError::HorizonExceeded(format!(
                    "approximate phase at index {} cannot take exponent with {} bits",
                    off + j as i64,
                    n.bits()
                )));
            }
            let i = off + j as i64;
            out.set(i, out.get(i) * ph.pow(n));
        }
        Ok(out)
    }

    /// Least common multiple of the exact phase orders, if every phase is
    /// exact: the operator's exact period.
    pub fn common_order(&self) -> Option<BigUint> {
        let mut acc = BigUint::from(1u32);
        for ph in &self.phases {
            let q = ph.order()?;
            acc = num_integer::lcm(acc, q);
        }
        Some(acc)
    }

    /// Squared orbit-error `|T^n x - x|_2^2` as a fast scan closure.
    pub fn orbit_error_fn(&self, x: &CoeffVec) -> Result<impl Fn(u64) -> f64 + Send + Sync> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        // (turns, |x_i|^2, optional exact residue step (p, q))
        let mut items: Vec<(f64, f64, Option<(u128, u128)>)> = Vec::new();
        for (j, ph) in self.phases.iter().enumerate() {
            let w = x.get(off + j as i64).norm_sqr();
            if w == 0.0 {
                continue;
            }
            let exact = match ph {
                PhaseAngle::Exact { p, q } => {
                    if q.bits() <= 64 {
                        let qq: u128 = q.try_into().expect("fits");
                        let pp: u128 = p.try_into().expect("p < q");
                        Some((pp, qq))
                    } else {
                        None
                    }
                }
                PhaseAngle::Approx { .. } => None,
            };
            items.push((ph.turns_f64(), w, exact));
        }
        Ok(move |n: u64| -> f64 {
            let mut acc = 0.0;
            for &(turns, w, exact) in &items {
                let frac = match exact {
                    Some((p, q)) => ((n as u128 * p) % q) as f64 / q as f64,
                    None => (n as f64 * turns).rem_euclid(1.0),
                };
                let s = 2.0 * crate::operators::phase::sin_pi(frac);
                acc += s * s * w;
            }
            acc.sqrt()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_phases_give_identity() {
        let op = DiagonalUnitary::new(0, vec![PhaseAngle::zero(); 3]).unwrap();
        let x = CoeffVec::new(
            0,
            vec![
                Complex64::new(1.0, 2.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(0.0, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(op.apply(&x).unwrap(), x);
    }

    #[test]
    fn half_turn_flips_sign() {
        let op = DiagonalUnitary::new(
            1,
            vec![PhaseAngle::exact(1, 2), PhaseAngle::zero()],
        )
        .unwrap();
        let x = CoeffVec::basis(1, 2, 1);
        let y = op.apply(&x).unwrap();
        assert!((y.get(1) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn power_matches_iterated_apply() {
        let op = DiagonalUnitary::new(
            0,
            vec![
                PhaseAngle::exact(1, 3),
                PhaseAngle::exact(2, 5),
                PhaseAngle::approx(0.7137),
            ],
        )
        .unwrap();
        let x = CoeffVec::new(
            0,
            vec![
                Complex64::new(0.3, -0.2),
                Complex64::new(1.0, 0.4),
                Complex64::new(-0.9, 0.1),
            ],
        )
        .unwrap();
        let mut it = x.clone();
        for n in 1u64..=40 {
            it = op.apply(&it).unwrap();
            let pw = op.power(&BigUint::from(n), &x).unwrap();
            assert!(pw.sub(&it).norm_l2() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn orbit_error_fn_matches_power_route() {
        let op = DiagonalUnitary::new(
            0,
            vec![PhaseAngle::exact(1, 7), PhaseAngle::approx(0.2231)],
        )
        .unwrap();
        let x = CoeffVec::new(0, vec![Complex64::new(0.5, 0.5), Complex64::new(1.0, 0.0)])
            .unwrap();
        let f = op.orbit_error_fn(&x).unwrap();
        for n in 0u64..50 {
            let direct = op
                .power(&BigUint::from(n), &x)
                .unwrap()
                .sub(&x)
                .norm_l2();
            assert!((f(n) - direct).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn common_order_is_lcm_of_denominators() {
        let op = DiagonalUnitary::new(
            0,
            vec![PhaseAngle::exact(1, 2), PhaseAngle::exact(1, 3)],
        )
        .unwrap();
        assert_eq!(op.common_order().unwrap(), BigUint::from(6u32));
        let op2 = DiagonalUnitary::new(0, vec![PhaseAngle::approx(0.1)]).unwrap();
        assert!(op2.common_order().is_none());
    }
}
