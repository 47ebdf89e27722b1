//! A numerical laboratory for recurrence phenomena of linear operators.
//!
//! The crate instantiates a zoo of explicitly constructed operators as finite
//! coefficient-space truncations and provides exact and approximate machinery
//! to detect recurrence, quasi-rigidity, hyper-recurrence, stationarity of
//! return sequences, and return-set statistics.
//!
//! The main pieces:
//!
//! * [`space`] — coefficient vectors, norms, seminorm families and the two
//!   metrics (Fréchet combiner and the orbit-sup metric) every probe measures.
//! * [`operators`] — the operator zoo with exact closed-form powers where the
//!   constructions provide them, driven by exact rational phase arithmetic.
//! * [`diophantine`] — the return-time search engine: simultaneous
//!   approximation of unimodular phases, exact lcm shortcuts, integer
//!   relation detection.
//! * [`recurrence`] — the probes: return sets, membership in the limit set of
//!   a return sequence, quasi-rigidity, hyper-recurrence, stationarity,
//!   eta-ratio sampling.
//! * [`scenarios`] — named, seeded, reproducible desk-scale experiments
//!   binding operators and probes together.
//! * [`report`] — canonical (byte-reproducible) report serialization.

pub mod diophantine;
pub mod error;
pub mod operators;
pub mod recurrence;
pub mod report;
pub mod scenarios;
pub mod space;
mod util;

pub use error::{RecurError, Result};
pub use space::{CoeffVec, FrechetMetricSpec, MetricSpec, NormSpec};
