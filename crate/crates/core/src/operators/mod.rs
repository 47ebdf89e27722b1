//! The operator zoo: every construction as a truncated coefficient-space
//! operator with exact closed-form powers where available.
//!
//! All specs are immutable after construction; `apply` and `power` are pure,
//! so operators are safe to share across workers.

pub mod auge_tapia;
pub mod cascade;
pub mod composition;
pub mod diagonal;
pub mod multiplication;
pub mod phase;
pub mod qrnh;
pub mod sequences;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use auge_tapia::AugeTapia;
pub use cascade::{block_gaps, BlockGaps, PeriodicCascade};
pub use composition::{
    compose_affine_poly, AffineComposition, CompositionModel, DirichletComposition,
};
pub use diagonal::DiagonalUnitary;
pub use multiplication::{AtomicClassification, MultiplicationAtomic};
pub use phase::{sin_pi, unit_from_turns, PhaseAngle};
pub use qrnh::{LimitFormulaSample, OmegaDir, Qrnh};
pub use sequences::{build_g_sequence, build_m_sequence, GSequence, MSchedule, MSequence, ScaleLaw};

use crate::error::{RecurError, Result};
use crate::space::{CoeffVec, MetricSpec};

/// Hard cap for the iterated-apply fallback of `power`.
pub const ITERATION_CAP: u64 = 10_000_000;

/// Declarative description of one operator family plus truncation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OperatorSpec {
    DiagonalUnitary(DiagonalUnitary),
    AugeTapia(AugeTapia),
    Qrnh(Qrnh),
    MultiplicationAtomic(MultiplicationAtomic),
    AffineComposition(AffineComposition),
    DirichletComposition(DirichletComposition),
    PeriodicCascade(PeriodicCascade),
}

impl OperatorSpec {
    pub fn diagonal_unitary(offset: i64, phases: Vec<PhaseAngle>) -> Result<Self> {
        Ok(Self::DiagonalUnitary(DiagonalUnitary::new(offset, phases)?))
    }

    pub fn auge_tapia(d: usize, m: MSequence, g: GSequence, trunc_k: usize) -> Result<Self> {
        Ok(Self::AugeTapia(AugeTapia::new(d, m, g, trunc_k)?))
    }

    pub fn qrnh(block_dim: usize, trunc_k: usize, m: MSequence, anchors: Vec<usize>) -> Result<Self> {
        Ok(Self::Qrnh(Qrnh::new(block_dim, trunc_k, m, anchors)?))
    }

    pub fn multiplication_atomic(
        weights: Vec<f64>,
        values: Vec<num_complex::Complex64>,
        p: f64,
    ) -> Result<Self> {
        Ok(Self::MultiplicationAtomic(MultiplicationAtomic::new(
            weights, values, p,
        )?))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::DiagonalUnitary(_) => "diagonal-unitary",
            Self::AugeTapia(_) => "auge-tapia",
            Self::Qrnh(_) => "qrnh",
            Self::MultiplicationAtomic(_) => "multiplication-atomic",
            Self::AffineComposition(_) => "affine-composition",
            Self::DirichletComposition(_) => "dirichlet-composition",
            Self::PeriodicCascade(_) => "periodic-cascade",
        }
    }

    /// Basis window `(offset, length)` of the truncation.
    pub fn window(&self) -> (i64, usize) {
        match self {
            Self::DiagonalUnitary(op) => op.window(),
            Self::AugeTapia(op) => op.window(),
            Self::Qrnh(op) => op.window(),
            Self::MultiplicationAtomic(op) => op.window(),
            Self::AffineComposition(op) => op.window(),
            Self::DirichletComposition(op) => op.window(),
            Self::PeriodicCascade(op) => op.window(),
        }
    }

    /// The model's own metric, used by every probe unless overridden.
    pub fn metric(&self) -> MetricSpec {
        match self {
            Self::DiagonalUnitary(op) => op.metric(),
            Self::AugeTapia(op) => op.metric(),
            Self::Qrnh(op) => op.metric(),
            Self::MultiplicationAtomic(op) => op.metric(),
            Self::AffineComposition(op) => op.metric(),
            Self::DirichletComposition(op) => op.metric(),
            Self::PeriodicCascade(op) => op.metric(),
        }
    }

    /// Whether the family declares bounded orbits.
    pub fn is_power_bounded(&self) -> bool {
        match self {
            Self::DiagonalUnitary(_) => true,
            // The perturbed-rotation families have coordinates that blow up
            // along generic block data.
            Self::AugeTapia(_) | Self::Qrnh(_) => false,
            Self::MultiplicationAtomic(op) => op.is_power_bounded(),
            Self::AffineComposition(op) => op.is_power_bounded(),
            Self::DirichletComposition(_) => true,
            Self::PeriodicCascade(_) => true,
        }
    }

    /// All zoo members are invertible on their truncations (diagonal parts
    /// are unimodular and the perturbations are strictly triangular over the
    /// fixed block).
    pub fn is_invertible_on_truncation(&self) -> bool {
        true
    }

    /// One step `T x`, truncated to the operator's window.
    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        match self {
            Self::DiagonalUnitary(op) => op.apply(x),
            Self::AugeTapia(op) => op.apply(x),
            Self::Qrnh(op) => op.apply(x),
            Self::MultiplicationAtomic(op) => op.apply(x),
            Self::AffineComposition(op) => op.apply(x),
            Self::DirichletComposition(op) => op.apply(x),
            Self::PeriodicCascade(op) => op.apply(x),
        }
    }

    /// `T^n x` by closed form; exact phase families take arbitrary-precision
    /// exponents via residue arithmetic.
    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        if n.is_zero() {
            let (off, len) = self.window();
            return x.restricted_to(off, len);
        }
        match self {
            Self::DiagonalUnitary(op) => op.power(n, x),
            Self::AugeTapia(op) => op.power(n, x),
            Self::Qrnh(op) => op.power(n, x),
            Self::MultiplicationAtomic(op) => op.power(n, x),
            Self::AffineComposition(op) => op.power(n, x),
            Self::DirichletComposition(op) => op.power(n, x),
            Self::PeriodicCascade(op) => op.power(n, x),
        }
    }

    /// `T^n x` by repeated application, capped; the independent oracle for
    /// the closed forms.
    pub fn power_by_iteration(&self, n: u64, x: &CoeffVec) -> Result<CoeffVec> {
        if n > ITERATION_CAP {
            return Err(RecurError::HorizonExceeded(format!(
                "iterated apply capped at {ITERATION_CAP}, asked for {n}"
            )));
        }
        let (off, len) = self.window();
        let mut y = x.restricted_to(off, len)?;
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    /// Orbit error `d(T^n x, x)` in the model metric at a single time.
    pub fn orbit_error_at(&self, x: &CoeffVec, n: &BigUint) -> Result<f64> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        let y = self.power(n, &x)?;
        self.metric().distance(&y, &x)
    }

    /// A fast, precomputed closure for scanning `n -> d(T^n x, x)` over
    /// machine-size exponents. Falls back to the closed-form power for
    /// families without a dedicated scan path.
    pub fn orbit_error_scanner(
        &self,
        x: &CoeffVec,
    ) -> Result<Box<dyn Fn(u64) -> f64 + Send + Sync>> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        match self {
            Self::DiagonalUnitary(op) => Ok(Box::new(op.orbit_error_fn(&x)?)),
            Self::AugeTapia(op) => Ok(Box::new(op.orbit_error_fn(&x)?)),
            Self::Qrnh(op) => Ok(Box::new(op.orbit_error_fn(&x)?)),
            Self::MultiplicationAtomic(op) => Ok(Box::new(op.orbit_error_fn(&x)?)),
            Self::DirichletComposition(op) => Ok(Box::new(op.orbit_error_fn(&x)?)),
            Self::PeriodicCascade(op) => Ok(Box::new(op.orbit_error_fn(&x)?)),
            Self::AffineComposition(_) => {
                let op = self.clone();
                let metric = op.metric();
                Ok(Box::new(move |n: u64| {
                    let y = op
                        .power(&BigUint::from(n), &x)
                        .expect("windowed input stays valid");
                    metric.distance(&y, &x).expect("metric valid")
                }))
            }
        }
    }

    /// Upper bound on the contribution of discarded basis coordinates to
    /// `|T^n x - x|`; zero for families whose truncation is exact.
    pub fn truncation_tail_bound(&self, n: &BigUint, x: &CoeffVec) -> f64 {
        match self {
            Self::AugeTapia(op) => op.truncation_tail_bound(n, x),
            Self::Qrnh(op) => op.truncation_tail_bound(n, x),
            // Diagonal-type truncations act coordinatewise: nothing leaks
            // outside the window.
            _ => 0.0,
        }
    }
}
