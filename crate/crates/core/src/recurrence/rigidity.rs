//! Common-return search: the shrinking-ball schedule over growing (or fixed)
//! samples, which is the constructive content of quasi-rigidity.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::diophantine::{Provenance, ReturnSequence};
use crate::error::{RecurError, Result};
use crate::operators::OperatorSpec;
use crate::recurrence::{ToleranceSchedule, Verdict};
use crate::space::CoeffVec;

/// Best miss of a failed schedule step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearMissAt {
    pub depth: usize,
    pub time: u64,
    pub error: f64,
}

/// Result of searching a strictly increasing schedule of common
/// eps-returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSearch {
    pub verdict: Verdict,
    /// The times `theta_k` found, one per completed depth.
    pub times: Vec<u64>,
    /// Max component error at each found time.
    pub errors: Vec<f64>,
    /// First depth whose window `(theta_{k-1}, horizon]` contained no
    /// common return, if any.
    pub failed_depth: Option<usize>,
    pub near_miss: Option<NearMissAt>,
    pub horizon: u64,
}

impl ScheduleSearch {
    pub fn sequence(&self) -> Option<ReturnSequence> {
        if self.verdict == Verdict::Pass && !self.times.is_empty() {
            ReturnSequence::from_u64(self.times.clone(), Provenance::BruteForce).ok()
        } else {
            None
        }
    }
}

/// Scan for `theta_1 < theta_2 < ... <= horizon` where at depth `k` the
/// first `prefix(k)` scanners are all below `eps_at(k)`.
fn schedule_scan(
    scanners: &[Box<dyn Fn(u64) -> f64 + Send + Sync>],
    prefix: impl Fn(usize) -> usize,
    schedule: &ToleranceSchedule,
    horizon: u64,
) -> ScheduleSearch {
    let mut times = Vec::new();
    let mut errors = Vec::new();
    let mut last = 0u64;
    for k in 1..=schedule.max_k() {
        let eps = schedule.eps_at(k);
        let active = prefix(k).min(scanners.len());
        let mut found = None;
        let mut best: Option<(u64, f64)> = None;
        for n in last + 1..=horizon {
            let mut worst = 0.0f64;
            for s in &scanners[..active] {
                let e = s(n);
                worst = worst.max(e);
                if worst >= eps {
                    break;
                }
            }
            if worst < eps {
                found = Some((n, worst));
                break;
            }
            if best.map_or(true, |(_, b)| worst < b) {
                best = Some((n, worst));
            }
        }
        match found {
            Some((n, e)) => {
                times.push(n);
                errors.push(e);
                last = n;
            }
            None => {
                return ScheduleSearch {
                    verdict: Verdict::Inconclusive,
                    times,
                    errors,
                    failed_depth: Some(k),
                    near_miss: best.map(|(time, error)| NearMissAt {
                        depth: k,
                        time,
                        error,
                    }),
                    horizon,
                };
            }
        }
    }
    ScheduleSearch {
        verdict: Verdict::Pass,
        times,
        errors,
        failed_depth: None,
        near_miss: None,
        horizon,
    }
}

/// Quasi-rigidity probe over a finite sample standing in for the dense
/// countable set: at depth `k` the time must return the first `k` sample
/// vectors simultaneously within `eps_at(k)`, strictly after the previous
/// time. Success certifies that the sample lies in the limit set of the
/// found sequence at the schedule; failure reports the first depth whose
/// window is empty, with the best near-miss.
pub fn quasi_rigidity_probe(
    op: &OperatorSpec,
    sample: &[CoeffVec],
    schedule: &ToleranceSchedule,
    horizon: u64,
) -> Result<ScheduleSearch> {
    if sample.is_empty() {
        return Err(RecurError::Config("sample must be nonempty".into()));
    }
    let scanners = sample
        .iter()
        .map(|x| op.orbit_error_scanner(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(schedule_scan(&scanners, |k| k, schedule, horizon))
}

/// Per-tuple verdict of the product-recurrence test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleVerdict {
    pub verdict: Verdict,
    pub search: ScheduleSearch,
}

/// Product recurrence at sample level: for each m-tuple, seek one schedule of
/// times returning all components simultaneously. Consistent with the
/// quasi-rigidity probe: a sample that passes there passes here for every
/// tuple drawn from it.
pub fn product_recurrence_test(
    op: &OperatorSpec,
    tuples: &[Vec<CoeffVec>],
    schedule: &ToleranceSchedule,
    horizon: u64,
) -> Result<Vec<TupleVerdict>> {
    let mut out = Vec::with_capacity(tuples.len());
    for tuple in tuples {
        if tuple.is_empty() {
            return Err(RecurError::Config("tuples must be nonempty".into()));
        }
        let scanners = tuple
            .iter()
            .map(|x| op.orbit_error_scanner(x))
            .collect::<Result<Vec<_>>>()?;
        let search = schedule_scan(&scanners, |_| scanners.len(), schedule, horizon);
        out.push(TupleVerdict {
            verdict: search.verdict,
            search,
        });
    }
    Ok(out)
}

/// Convenience: single-vector recurrence along a schedule (the `m = 1`
/// product test).
pub fn single_recurrence(
    op: &OperatorSpec,
    x: &CoeffVec,
    schedule: &ToleranceSchedule,
    horizon: u64,
) -> Result<ScheduleSearch> {
    quasi_rigidity_probe(op, std::slice::from_ref(x), schedule, horizon)
}

/// Re-evaluate a found schedule with exact powers (the scan uses fast
/// floating paths); every advertised time must satisfy its bound.
pub fn verify_schedule_times(
    op: &OperatorSpec,
    sample: &[CoeffVec],
    search: &ScheduleSearch,
    schedule: &ToleranceSchedule,
    prefix_growth: bool,
) -> Result<bool> {
    let metric = op.metric();
    for (i, &t) in search.times.iter().enumerate() {
        let k = i + 1;
        let active = if prefix_growth {
            k.min(sample.len())
        } else {
            sample.len()
        };
        let n = BigUint::from(t);
        for x in &sample[..active] {
            let y = op.power(&n, x)?;
            let e = metric.distance(&y, x)?;
            if e > schedule.eps_at(k) * (1.0 + 1e-6) + 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::PhaseAngle;

    #[test]
    fn identity_operator_emits_consecutive_times() {
        let op = OperatorSpec::diagonal_unitary(0, vec![PhaseAngle::zero(); 2]).unwrap();
        let sample = vec![CoeffVec::basis(0, 2, 0), CoeffVec::basis(0, 2, 1)];
        let s = quasi_rigidity_probe(&op, &sample, &ToleranceSchedule::reciprocal(5), 100).unwrap();
        assert_eq!(s.verdict, Verdict::Pass);
        assert_eq!(s.times, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn rational_diagonal_emits_lcm_multiples() {
        let op = OperatorSpec::diagonal_unitary(
            0,
            vec![PhaseAngle::exact(1, 2), PhaseAngle::exact(1, 3)],
        )
        .unwrap();
        let sample = vec![CoeffVec::basis(0, 2, 0), CoeffVec::basis(0, 2, 1)];
        let s = quasi_rigidity_probe(&op, &sample, &ToleranceSchedule::reciprocal(4), 1000)
            .unwrap();
        assert_eq!(s.verdict, Verdict::Pass);
        // Common returns of 1/2 and 1/3 phases happen exactly at multiples of 6.
        assert_eq!(s.times, vec![6, 12, 18, 24]);
        assert!(verify_schedule_times(&op, &sample, &s, &ToleranceSchedule::reciprocal(4), true)
            .unwrap());
    }

    #[test]
    fn single_tuple_product_matches_single_recurrence() {
        let op = OperatorSpec::diagonal_unitary(0, vec![PhaseAngle::exact(1, 4)]).unwrap();
        let x = CoeffVec::basis(0, 1, 0);
        let tuples = vec![vec![x.clone()]];
        let tv = product_recurrence_test(&op, &tuples, &ToleranceSchedule::reciprocal(3), 100)
            .unwrap();
        let single = single_recurrence(&op, &x, &ToleranceSchedule::reciprocal(3), 100).unwrap();
        assert_eq!(tv[0].search.times, single.times);
    }

    #[test]
    fn inconclusive_reports_first_failed_depth_and_near_miss() {
        // Phase 1/2 can never return within 0.5 at odd-only horizon 1.
        let op = OperatorSpec::diagonal_unitary(0, vec![PhaseAngle::exact(1, 2)]).unwrap();
        let x = CoeffVec::basis(0, 1, 0);
        let s = single_recurrence(&op, &x, &ToleranceSchedule::reciprocal(2), 1).unwrap();
        assert_eq!(s.verdict, Verdict::Inconclusive);
        assert_eq!(s.failed_depth, Some(1));
        let nm = s.near_miss.unwrap();
        assert_eq!(nm.time, 1);
        assert!((nm.error - 2.0).abs() < 1e-12);
    }
}
