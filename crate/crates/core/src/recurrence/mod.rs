//! Recurrence probes: return sets, membership in the limit set of a return
//! sequence, quasi-rigidity search, hyper-recurrence evidence, stationarity,
//! and eta-ratio sampling.
//!
//! Every verdict is horizon- and tolerance-qualified; probes attach the
//! operator's truncation-tail bound so a pass can be promoted to
//! "pass up to tail delta". "Dense set" always means a finite spanning
//! sample plus a rank check; verdicts read "consistent-with" or
//! "witness-against", never a density claim.

mod hyper;
mod lift;
mod rigidity;
mod stationary;

pub use hyper::{
    candidate_sequences, eta_ratio_samples, hyper_recurrence_probe, EtaRatioReport,
    HyperRecurrenceReport, HyperVerdict, SequenceSource,
};
pub use lift::{factor_lift, FactorLiftReport, PullbackSample};
pub use rigidity::{
    product_recurrence_test, quasi_rigidity_probe, NearMissAt, ScheduleSearch, TupleVerdict,
};
pub use stationary::{
    n_omega_count, stationarity_probe, NOmegaReport, StationarityReport, SubsequenceStrategy,
};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::diophantine::ReturnSequence;
use crate::error::{RecurError, Result};
use crate::operators::OperatorSpec;
use crate::space::CoeffVec;

/// Shrinking tolerance schedule `eps_at(k)`, strictly decreasing over
/// `k = 1 ..= max_k`. The default is the shrinking-ball schedule `1/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSchedule {
    kind: ScheduleKind,
    max_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ScheduleKind {
    Reciprocal,
    /// `base * factor^k` with `factor < 1`.
    Geometric { base: f64, factor: f64 },
    Explicit { eps: Vec<f64> },
}

impl ToleranceSchedule {
    pub fn reciprocal(max_k: usize) -> Self {
        Self {
            kind: ScheduleKind::Reciprocal,
            max_k: max_k.max(1),
        }
    }

    pub fn geometric(base: f64, factor: f64, max_k: usize) -> Result<Self> {
        if !(base > 0.0 && factor > 0.0 && factor < 1.0) {
            return Err(RecurError::Config(
                "geometric schedule needs base > 0 and factor in (0, 1)".into(),
            ));
        }
        Ok(Self {
            kind: ScheduleKind::Geometric { base, factor },
            max_k: max_k.max(1),
        })
    }

    pub fn explicit(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(RecurError::Config("schedule must be nonempty".into()));
        }
        for w in eps.windows(2) {
            if !(w[1] < w[0]) {
                return Err(RecurError::Config(
                    "schedule must be strictly decreasing".into(),
                ));
            }
        }
        if !(eps[eps.len() - 1] > 0.0) {
            return Err(RecurError::Config("schedule must stay positive".into()));
        }
        let max_k = eps.len();
        Ok(Self {
            kind: ScheduleKind::Explicit { eps },
            max_k,
        })
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// Tolerance at 1-based depth `k`.
    pub fn eps_at(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match &self.kind {
            ScheduleKind::Reciprocal => 1.0 / k as f64,
            ScheduleKind::Geometric { base, factor } => base * factor.powi(k as i32),
            ScheduleKind::Explicit { eps } => eps[(k - 1).min(eps.len() - 1)],
        }
    }

    /// A copy with a different depth.
    pub fn with_depth(&self, max_k: usize) -> Self {
        Self {
            kind: self.kind.clone(),
            max_k: max_k.max(1),
        }
    }
}

impl Default for ToleranceSchedule {
    fn default() -> Self {
        Self::reciprocal(20)
    }
}

/// Probe verdicts. `Fail` means the tested property was refuted at the given
/// horizon/tolerance; `Inconclusive` means the horizon was exhausted without
/// a decision and always carries near-miss data in the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// One sampled point of an error trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time: BigUint,
    pub error: f64,
    pub tail_bound: f64,
}

/// Structured result of a recurrence probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub verdict: Verdict,
    pub times: Option<ReturnSequence>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub horizon: Option<u64>,
    pub tested_depth: usize,
    pub near_miss: Option<(BigUint, f64)>,
}

/// The return set `{ n <= horizon : |T^n x - x| < eps }` in the operator's
/// metric, with the errors achieved. An empty set is a valid result.
pub fn return_set(
    op: &OperatorSpec,
    x: &CoeffVec,
    eps: f64,
    horizon: u64,
) -> Result<Vec<(u64, f64)>> {
    if !(eps > 0.0) {
        return Err(RecurError::Config("eps must be positive".into()));
    }
    let err = op.orbit_error_scanner(x)?;
    let (hits, _) = crate::diophantine::scan_threshold(&*err, eps, horizon, usize::MAX);
    Ok(hits)
}

/// Finite-horizon membership proxy for the limit set of `omega`: pass iff
/// `|T^{omega_k} x - x| <= eps_at(k)` for every tested depth `k`. The full
/// trajectory is always reported, with truncation-tail bounds attached.
pub fn in_l_omega(
    op: &OperatorSpec,
    x: &CoeffVec,
    omega: &ReturnSequence,
    schedule: &ToleranceSchedule,
) -> Result<RecurrenceReport> {
    let metric = op.metric();
    let (off, len) = op.window();
    let x = x.restricted_to(off, len)?;
    let depth = schedule.max_k().min(omega.len());
    let mut trajectory = Vec::with_capacity(depth);
    let mut verdict = Verdict::Pass;
    let mut near_miss: Option<(BigUint, f64)> = None;
    for (k, t) in omega.times().iter().take(depth).enumerate() {
        let y = op.power(t, &x)?;
        let error = metric.distance(&y, &x)?;
        let tail = op.truncation_tail_bound(t, &x);
        trajectory.push(TrajectoryPoint {
            time: t.clone(),
            error,
            tail_bound: tail,
        });
        if error > schedule.eps_at(k + 1) {
            verdict = Verdict::Fail;
            if near_miss.as_ref().map_or(true, |(_, e)| error < *e) {
                near_miss = Some((t.clone(), error));
            }
        }
    }
    Ok(RecurrenceReport {
        verdict,
        times: Some(omega.clone()),
        trajectory,
        horizon: None,
        tested_depth: depth,
        near_miss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::Provenance;
    use crate::operators::PhaseAngle;

    fn identity_op(len: usize) -> OperatorSpec {
        OperatorSpec::diagonal_unitary(0, vec![PhaseAngle::zero(); len]).unwrap()
    }

    #[test]
    fn identity_returns_at_every_time() {
        let op = identity_op(3);
        let x = CoeffVec::basis(0, 3, 1);
        let hits = return_set(&op, &x, 0.5, 25).unwrap();
        assert_eq!(hits.len(), 25);
        assert!(hits.iter().all(|&(_, e)| e == 0.0));
    }

    #[test]
    fn half_phase_returns_at_even_times_only() {
        let op = OperatorSpec::diagonal_unitary(
            1,
            vec![PhaseAngle::exact(1, 2), PhaseAngle::zero()],
        )
        .unwrap();
        let x = CoeffVec::basis(1, 2, 1);
        let hits = return_set(&op, &x, 0.5, 10).unwrap();
        let times: Vec<u64> = hits.iter().map(|&(n, _)| n).collect();
        assert_eq!(times, vec![2, 4, 6, 8, 10]);
    }

    #[test]
    fn in_l_omega_identity_passes_any_sequence() {
        let op = identity_op(2);
        let x = CoeffVec::basis(0, 2, 0);
        let omega = ReturnSequence::from_u64(vec![1, 5, 100, 1_000_000], Provenance::User).unwrap();
        let r = in_l_omega(&op, &x, &omega, &ToleranceSchedule::reciprocal(4)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.trajectory.iter().all(|p| p.error == 0.0));
    }

    #[test]
    fn in_l_omega_odd_times_fail_for_half_phase() {
        let op = OperatorSpec::diagonal_unitary(1, vec![PhaseAngle::exact(1, 2)]).unwrap();
        let x = CoeffVec::basis(1, 1, 1);
        let omega = ReturnSequence::from_u64(vec![1, 3, 5, 7], Provenance::User).unwrap();
        let r = in_l_omega(&op, &x, &omega, &ToleranceSchedule::reciprocal(4)).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        // The error is the constant 2 at every odd time.
        assert!(r.trajectory.iter().all(|p| (p.error - 2.0).abs() < 1e-12));
    }

    #[test]
    fn schedule_validation() {
        assert!(ToleranceSchedule::explicit(vec![0.5, 0.5]).is_err());
        assert!(ToleranceSchedule::explicit(vec![0.5, 0.1]).is_ok());
        let s = ToleranceSchedule::reciprocal(5);
        assert_eq!(s.eps_at(4), 0.25);
    }
}
