//! Composition operators on coefficient models of holomorphic function
//! spaces, and the Dirichlet-series vertical translation.
//!
//! The affine symbol `phi(z) = a z + b` acts on truncated (Laurent)
//! coefficient windows; its iterates close up as
//! `phi^n(z) = a^n z + (1 - a^n)/(1 - a) b`, so powers never iterate.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::PhaseAngle;
use crate::space::{CoeffVec, FrechetMetricSpec, MetricSpec, NormSpec};

/// Which coefficient model the affine composition acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CompositionModel {
    /// Entire functions under uniform convergence on compacts:
    /// polynomial window `0..=degree`, seminorms `sup |z| <= k`.
    EntireFrechet { degree: usize, radii_count: usize },
    /// Holomorphic on the punctured plane: Laurent window
    /// `-laurent_order..=laurent_order`, seminorms on annuli `(1/k, k)`.
    /// The annulus exhaustion radii are a desk-model choice.
    PuncturedFrechet {
        laurent_order: usize,
        radii_count: usize,
    },
    /// Holomorphic on the unit disk: window `0..=degree`, seminorms on
    /// `|z| = 1 - 2^{-k}`.
    DiskFrechet { degree: usize, radii_count: usize },
    /// Hardy space of the disk: window `0..=degree`, coefficient l2 norm.
    HardyDisk { degree: usize },
    /// Weighted Hardy space of entire functions: window `0..=degree`,
    /// norm `(sum |a_n|^p beta_n^p)^{1/p}` with `beta_n = (n!)^gamma`.
    EntireWeighted { degree: usize, p: f64, gamma: f64 },
}

impl CompositionModel {
    pub fn window(&self) -> (i64, usize) {
        match self {
            CompositionModel::EntireFrechet { degree, .. }
            | CompositionModel::DiskFrechet { degree, .. }
            | CompositionModel::HardyDisk { degree }
            | CompositionModel::EntireWeighted { degree, .. } => (0, degree + 1),
            CompositionModel::PuncturedFrechet { laurent_order, .. } => {
                (-(*laurent_order as i64), 2 * laurent_order + 1)
            }
        }
    }

    pub fn allows_translation(&self) -> bool {
        matches!(
            self,
            CompositionModel::EntireFrechet { .. } | CompositionModel::EntireWeighted { .. }
        )
    }

    pub fn metric(&self) -> MetricSpec {
        match self {
            CompositionModel::EntireFrechet { radii_count, .. } => MetricSpec::Frechet(
                FrechetMetricSpec::new(
                    (1..=*radii_count)
                        .map(|k| NormSpec::SupOnCompacts {
                            radii: vec![k as f64],
                        })
                        .collect(),
                )
                .expect("radii_count >= 1"),
            ),
            CompositionModel::PuncturedFrechet { radii_count, .. } => MetricSpec::Frechet(
                FrechetMetricSpec::new(
                    (1..=*radii_count)
                        .map(|k| NormSpec::SupOnCompacts {
                            radii: if k == 1 {
                                vec![1.0]
                            } else {
                                vec![1.0 / k as f64, k as f64]
                            },
                        })
                        .collect(),
                )
                .expect("radii_count >= 1"),
            ),
            CompositionModel::DiskFrechet { radii_count, .. } => MetricSpec::Frechet(
                FrechetMetricSpec::new(
                    (1..=*radii_count)
                        .map(|k| NormSpec::SupOnCompacts {
                            radii: vec![1.0 - 0.5f64.powi(k as i32)],
                        })
                        .collect(),
                )
                .expect("radii_count >= 1"),
            ),
            CompositionModel::HardyDisk { .. } => MetricSpec::Norm(NormSpec::L2),
            CompositionModel::EntireWeighted { degree, p, gamma } => {
                MetricSpec::Norm(NormSpec::WeightedLp {
                    p: *p,
                    weight_offset: 0,
                    weights: factorial_weights(*degree, *gamma),
                })
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CompositionModel::EntireFrechet { radii_count, .. }
            | CompositionModel::PuncturedFrechet { radii_count, .. }
            | CompositionModel::DiskFrechet { radii_count, .. } => {
                if *radii_count < 1 {
                    return Err(RecurError::Config("need at least one radius".into()));
                }
            }
            CompositionModel::HardyDisk { .. } => {}
            CompositionModel::EntireWeighted { degree, p, gamma } => {
                if !(*p > 1.0) {
                    return Err(RecurError::Config(format!("p must be > 1, got {p}")));
                }
                if !(*gamma >= 1.0) {
                    return Err(RecurError::Config(
                        "gamma must be >= 1 so (n+1) beta_n / beta_{n+1} stays bounded".into(),
                    ));
                }
                if *degree as f64 * gamma > 170.0 {
                    return Err(RecurError::Config(
                        "degree * gamma too large: factorial weights overflow f64".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn factorial_weights(degree: usize, gamma: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut ln_fact = 0.0f64;
    for n in 0..=degree {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        out.push((gamma * ln_fact).exp());
    }
    out
}

/// Composition with the affine symbol `phi(z) = a z + b`,
/// `a = modulus * e^{2 pi i * phase}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineComposition {
    a_phase: PhaseAngle,
    a_modulus: f64,
    b: Complex64,
    model: CompositionModel,
}

impl AffineComposition {
    /// Unimodular multiplier given by an exact or approximate phase.
    pub fn rotation(a_phase: PhaseAngle, b: Complex64, model: CompositionModel) -> Result<Self> {
        Self::new(a_phase, 1.0, b, model)
    }

    pub fn new(
        a_phase: PhaseAngle,
        a_modulus: f64,
        b: Complex64,
        model: CompositionModel,
    ) -> Result<Self> {
        model.validate()?;
        if !(a_modulus > 0.0 && a_modulus <= 1.0) {
            return Err(RecurError::Config(
                "|a| must lie in (0, 1]; larger multipliers do not give bounded composition".into(),
            ));
        }
        let translation = b.norm() > 0.0;
        if translation && !model.allows_translation() {
            return Err(RecurError::Config(
                "this model only supports rotations (b = 0)".into(),
            ));
        }
        Ok(Self {
            a_phase,
            a_modulus,
            b,
            model,
        })
    }

    pub fn model(&self) -> &CompositionModel {
        &self.model
    }

    pub fn a_phase(&self) -> &PhaseAngle {
        &self.a_phase
    }

    pub fn multiplier(&self) -> Complex64 {
        self.a_phase.as_complex() * self.a_modulus
    }

    pub fn offset_term(&self) -> Complex64 {
        self.b
    }

    pub fn window(&self) -> (i64, usize) {
        self.model.window()
    }

    pub fn metric(&self) -> MetricSpec {
        self.model.metric()
    }

    /// Orbits stay bounded unless the symbol is a pure translation.
    pub fn is_power_bounded(&self) -> bool {
        !(self.a_modulus == 1.0 && self.a_phase.is_trivial() && self.b.norm() > 0.0)
    }

    /// The symbol of the n-th iterate: `(a^n, (1 - a^n)/(1 - a) b)`
    /// (and `(1, n b)` when `a = 1`).
    pub fn iterate_symbol(&self, n: &BigUint) -> Result<(Complex64, Complex64)> {
        if !self.a_phase.pow_supports(n) {
            return Err(RecurError::HorizonExceeded(
                "approximate multiplier cannot take exponents beyond 2^53".into(),
            ));
        }
        let a_n = if self.a_modulus == 1.0 {
            self.a_phase.pow(n)
        } else {
            let nf = n.to_f64().unwrap_or(f64::INFINITY);
            let log_mag = nf * self.a_modulus.ln();
            if log_mag < -700.0 {
                Complex64::new(0.0, 0.0)
            } else {
                self.a_phase.pow(n) * log_mag.exp()
            }
        };
        let b_n = if self.b.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else if self.a_modulus == 1.0 && self.a_phase.is_trivial() {
            let nf = n.to_f64().unwrap_or(f64::INFINITY);
            self.b * nf
        } else {
            // b * sum_{j<n} a^j
            let geom = if self.a_modulus == 1.0 {
                self.a_phase.geometric_factor(n)
            } else {
                (a_n - Complex64::one()) / (self.multiplier() - Complex64::one())
            };
            self.b * geom
        };
        Ok((a_n, b_n))
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        self.apply_symbol(self.multiplier(), self.b, x)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (a_n, b_n) = self.iterate_symbol(n)?;
        self.apply_symbol(a_n, b_n, x)
    }

    fn apply_symbol(&self, a: Complex64, b: Complex64, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        if b.norm() == 0.0 {
            // Diagonal action c_i -> a^i c_i, valid for Laurent windows too.
            let mut out = CoeffVec::zero(off, len);
            for (i, c) in x.iter() {
                let ai = powi_complex(a, i)?;
                out.set(i, c * ai);
            }
            Ok(out)
        } else {
            if off != 0 {
                return Err(RecurError::Config(
                    "translation terms need a polynomial window starting at 0".into(),
                ));
            }
            compose_affine_poly(a, b, &x)
        }
    }
}

fn powi_complex(a: Complex64, i: i64) -> Result<Complex64> {
    if i == 0 {
        return Ok(Complex64::one());
    }
    let r = a.norm();
    if i < 0 && (r - 1.0).abs() > 1e-12 {
        return Err(RecurError::Config(
            "negative Laurent indices need a unimodular multiplier".into(),
        ));
    }
    let mag = r.powi(i as i32);
    if !mag.is_finite() {
        return Err(RecurError::Overflow(format!("a^{i} overflows")));
    }
    Ok(Complex64::from_polar(mag, a.arg() * i as f64))
}

/// Coefficients of `p(a z + b)` for a polynomial coefficient window indexed
/// from 0, by incremental binomial expansion. Degree is preserved; overflow
/// of the expansion terms is reported rather than propagated.
pub fn compose_affine_poly(a: Complex64, b: Complex64, coeffs: &CoeffVec) -> Result<CoeffVec> {
    if coeffs.offset() != 0 {
        return Err(RecurError::Config(
            "polynomial composition expects a window indexed from 0".into(),
        ));
    }
    let len = coeffs.len();
    if len > 4096 {
        return Err(RecurError::Config(
            "degree cap exceeded for binomial expansion".into(),
        ));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    // pow holds the coefficients of (a z + b)^i.
    let mut pow = vec![Complex64::one()];
    for i in 0..len {
        let ci = coeffs.get(i as i64);
        if ci.norm() > 0.0 {
            for (j, pj) in pow.iter().enumerate() {
                out[j] += ci * pj;
            }
        }
        // (a z + b)^{i+1} = (a z + b) * (a z + b)^i
        if i + 1 < len {
            let mut next = vec![Complex64::new(0.0, 0.0); pow.len() + 1];
            for (j, pj) in pow.iter().enumerate() {
                next[j] += b * pj;
                next[j + 1] += a * pj;
            }
            pow = next;
        }
    }
    if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(RecurError::Overflow(
            "binomial expansion overflowed the coefficient range".into(),
        ));
    }
    CoeffVec::new(0, out)
}

/// Vertical translation `s -> s + it` on a Dirichlet-series coefficient
/// window: the n-th coefficient picks up the unimodular factor `n^{-it}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletComposition {
    t: f64,
    n_coeffs: usize,
}

impl DirichletComposition {
    pub fn new(t: f64, n_coeffs: usize) -> Result<Self> {
        if n_coeffs < 1 {
            return Err(RecurError::Config("need at least one coefficient".into()));
        }
        if !t.is_finite() {
            return Err(RecurError::Config("t must be finite".into()));
        }
        Ok(Self { t, n_coeffs })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Window `[1, n_coeffs]`: Dirichlet coefficients are indexed from 1.
    pub fn window(&self) -> (i64, usize) {
        (1, self.n_coeffs)
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::Norm(NormSpec::L2)
    }

    /// Angle (in turns) of the factor on the index-`n` coefficient.
    pub fn coefficient_turns(&self, n: usize) -> f64 {
        (-self.t * (n as f64).ln() / std::f64::consts::TAU).rem_euclid(1.0)
    }

    /// The factor phases as a list, for the return-time search.
    pub fn phases(&self) -> Vec<PhaseAngle> {
        (1..=self.n_coeffs)
            .map(|n| PhaseAngle::approx(self.coefficient_turns(n)))
            .collect()
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        self.power(&BigUint::one(), x)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        if self.t != 0.0 && n.bits() > 53 {
            return Err(RecurError::HorizonExceeded(
                "Dirichlet phases are approximate; exponents beyond 2^53 lose all precision"
                    .into(),
            ));
        }
        let nf = n.to_f64().unwrap_or(f64::INFINITY);
        for k in 1..=self.n_coeffs {
            let turns = (nf * self.coefficient_turns(k)).rem_euclid(1.0);
            let factor = Complex64::from_polar(1.0, std::f64::consts::TAU * turns);
            out.set(k as i64, out.get(k as i64) * factor);
        }
        Ok(out)
    }

    pub fn orbit_error_fn(&self, x: &CoeffVec) -> Result<impl Fn(u64) -> f64 + Send + Sync> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        let items: Vec<(f64, f64)> = (1..=self.n_coeffs)
            .filter_map(|k| {
                let w = x.get(k as i64).norm_sqr();
                (w > 0.0).then(|| (self.coefficient_turns(k), w))
            })
            .collect();
        Ok(move |n: u64| -> f64 {
            let mut acc = 0.0;
            for &(turns, w) in &items {
                let s = 2.0 * crate::operators::phase::sin_pi((n as f64 * turns).rem_euclid(1.0));
                acc += s * s * w;
            }
            acc.sqrt()
        })
    }
}
