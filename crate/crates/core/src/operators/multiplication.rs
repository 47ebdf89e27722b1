//! Multiplication operator on an atomic measure-space model: finitely many
//! atoms with positive weights, acting on `L^p` coefficients by pointwise
//! multiplication with the symbol values. The sigma-finite case is
//! represented by letting atom weights spread over orders of magnitude.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::{sin_pi, PhaseAngle};
use crate::space::{CoeffVec, MetricSpec, NormSpec};

const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicationAtomic {
    weights: Vec<f64>,
    values: Vec<Complex64>,
    p: f64,
}

/// Outcome of the phase-analysis classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AtomicClassification {
    /// All symbol values unimodular: the operator is an isometry and the
    /// finite torus rotation of its phases admits simultaneous returns.
    Recurrent,
    /// Some atom has non-unimodular value; its coordinate drifts and never
    /// returns.
    NonRecurrent { atom: usize, modulus: f64 },
}

impl MultiplicationAtomic {
    pub fn new(weights: Vec<f64>, values: Vec<Complex64>, p: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != values.len() {
            return Err(RecurError::Config(
                "need equally many positive weights and values".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(RecurError::Config("atom weights must be positive".into()));
        }
        if !(p >= 1.0) {
            return Err(RecurError::Config(format!("p must be >= 1, got {p}")));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(RecurError::Config("symbol values must be finite".into()));
        }
        Ok(Self { weights, values, p })
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn window(&self) -> (i64, usize) {
        (0, self.values.len())
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::Norm(NormSpec::WeightedLp {
            p: self.p,
            weight_offset: 0,
            weights: self.weights.iter().map(|w| w.powf(1.0 / self.p)).collect(),
        })
    }

    pub fn is_power_bounded(&self) -> bool {
        self.values.iter().all(|v| v.norm() <= 1.0 + UNIMODULAR_TOL)
    }

    pub fn classify(&self) -> AtomicClassification {
        for (j, v) in self.values.iter().enumerate() {
            let r = v.norm();
            if (r - 1.0).abs() > UNIMODULAR_TOL {
                return AtomicClassification::NonRecurrent { atom: j, modulus: r };
            }
        }
        AtomicClassification::Recurrent
    }

    /// Phases of the symbol values (approximate angles), for the return-time
    /// search. Only meaningful when all values are unimodular.
    pub fn phases(&self) -> Vec<PhaseAngle> {
        self.values
            .iter()
            .map(|v| PhaseAngle::approx(v.arg() / std::f64::consts::TAU))
            .collect()
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for (j, v) in self.values.iter().enumerate() {
            out.set(j as i64, out.get(j as i64) * v);
        }
        Ok(out)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for (j, v) in self.values.iter().enumerate() {
            let r = v.norm();
            let vn = if (r - 1.0).abs() <= 1e-15 {
                // Unimodular fast path: angle arithmetic only.
                if n.bits() > 53 && v.arg() != 0.0 {
                    return Err(RecurError::HorizonExceeded(format!(
                        "atom {j} has an approximate phase; exponents beyond 2^53 lose all precision"
                    )));
                }
                let nf = n.to_f64().unwrap_or(f64::INFINITY);
                Complex64::from_polar(1.0, (nf * v.arg()).rem_euclid(std::f64::consts::TAU))
            } else {
                let nf = n.to_f64().unwrap_or(f64::INFINITY);
                let log_mag = nf * r.ln();
                if log_mag > 700.0 {
                    return Err(RecurError::Overflow(format!(
                        "atom {j}: |value|^n overflows at exponent {n}"
                    )));
                }
                Complex64::from_polar(
                    log_mag.exp(),
                    (nf * v.arg()).rem_euclid(std::f64::consts::TAU),
                )
            };
            out.set(j as i64, out.get(j as i64) * vn);
        }
        Ok(out)
    }

    /// Fast scan closure for the weighted-`L^p` orbit error
    /// `|T^n x - x|_p`. Never overflows: drifting atoms are clamped at a
    /// huge-but-finite error, which is all a threshold scan needs.
    pub fn orbit_error_fn(&self, x: &CoeffVec) -> Result<impl Fn(u64) -> f64 + Send + Sync> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        let p = self.p;
        // (turns, ln|v|, weight * |x_j|^p)
        let items: Vec<(f64, f64, f64)> = self
            .values
            .iter()
            .enumerate()
            .filter_map(|(j, v)| {
                let m = self.weights[j] * x.get(j as i64).norm().powf(p);
                (m > 0.0).then(|| (v.arg() / std::f64::consts::TAU, v.norm().ln(), m))
            })
            .collect();
        Ok(move |n: u64| -> f64 {
            let mut acc = 0.0f64;
            for &(turns, ln_r, m) in &items {
                let dev = if ln_r == 0.0 {
                    2.0 * sin_pi((n as f64 * turns).rem_euclid(1.0)).abs()
                } else {
                    let log_mag = (n as f64) * ln_r;
                    if log_mag.abs() > 60.0 {
                        // |v^n - 1| is within a hair of max(|v|^n, 1).
                        log_mag.exp().max(1.0).min(1e12)
                    } else {
                        let vn = Complex64::from_polar(
                            log_mag.exp(),
                            (n as f64 * turns).rem_euclid(1.0) * std::f64::consts::TAU,
                        );
                        (vn - Complex64::new(1.0, 0.0)).norm()
                    }
                };
                acc += dev.powf(p) * m;
            }
            acc.powf(1.0 / p)
        })
    }
}
