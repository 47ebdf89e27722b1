//! Hyper-recurrence evidence: enumerate distinct return sequences of a
//! vector and test whether a spanning sample follows along each of them.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::diophantine::{find_return_times, structured_mk_times, Provenance, ReturnSequence};
use crate::error::{RecurError, Result};
use crate::operators::{OperatorSpec, PhaseAngle};
use crate::recurrence::{in_l_omega, ToleranceSchedule, Verdict};
use crate::space::CoeffVec;

/// Where a candidate sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceSource {
    StructuredChain,
    AnchorChain,
    LcmExact,
    Scanned,
    Thinned,
}

/// Enumerate up to `limit` distinct return sequences along which `x`
/// passes the schedule: structured chain times where the family has them,
/// exact common periods for rational diagonal data, and scanned times with
/// seeded thinnings. Deterministic for fixed inputs.
pub fn candidate_sequences(
    op: &OperatorSpec,
    x: &CoeffVec,
    schedule: &ToleranceSchedule,
    horizon: u64,
    limit: usize,
) -> Result<Vec<(ReturnSequence, SequenceSource)>> {
    let mut candidates: Vec<(ReturnSequence, SequenceSource)> = Vec::new();
    let depth = schedule.max_k();

    let mut push_if_returns =
        |list: &mut Vec<(ReturnSequence, SequenceSource)>, seq: ReturnSequence, src| -> Result<()> {
            if list.iter().any(|(s, _)| s.times() == seq.times()) {
                return Ok(());
            }
            let rep = in_l_omega(op, x, &seq, schedule)?;
            if rep.verdict == Verdict::Pass {
                list.push((seq, src));
            }
            Ok(())
        };

    match op {
        OperatorSpec::AugeTapia(at) => {
            // Times 2 m_l, tail-started so the early coarse steps are skipped.
            let all = structured_mk_times(at.m(), 2)?;
            for start in 0..all.len().saturating_sub(depth).min(8) {
                let seq = ReturnSequence::new(
                    all.times()[start..start + depth].to_vec(),
                    Provenance::StructuredMk,
                )?;
                push_if_returns(&mut candidates, seq, SequenceSource::StructuredChain)?;
            }
        }
        OperatorSpec::Qrnh(q) => {
            // The basis-sweep rigidity subsequence.
            if let Ok(pos) = q.rigidity_positions(depth) {
                let seq = ReturnSequence::new(
                    pos.iter().map(|&k| q.m().at(k).clone()).collect(),
                    Provenance::StructuredMk,
                )?;
                push_if_returns(&mut candidates, seq, SequenceSource::StructuredChain)?;
            }
            // One sequence per anchor direction.
            for a in 0..q.anchors().len() {
                let pos = q.anchor_positions(a);
                if pos.len() >= 2 {
                    let seq = ReturnSequence::new(
                        pos.iter().map(|&k| q.m().at(k).clone()).collect(),
                        Provenance::StructuredMk,
                    )?;
                    push_if_returns(&mut candidates, seq, SequenceSource::AnchorChain)?;
                }
            }
        }
        OperatorSpec::DiagonalUnitary(d) => {
            if let Some(order) = d.common_order() {
                let times: Vec<BigUint> =
                    (1..=depth as u64).map(|j| &order * BigUint::from(j)).collect();
                let seq = ReturnSequence::new(times, Provenance::LcmExact)?;
                push_if_returns(&mut candidates, seq, SequenceSource::LcmExact)?;
            }
        }
        OperatorSpec::PeriodicCascade(c) => {
            let mut order = 1u64;
            for &p in c.periods() {
                order = num_integer::lcm(order, p);
            }
            let times: Vec<BigUint> =
                (1..=depth as u64).map(|j| BigUint::from(order) * BigUint::from(j)).collect();
            let seq = ReturnSequence::new(times, Provenance::LcmExact)?;
            push_if_returns(&mut candidates, seq, SequenceSource::LcmExact)?;
        }
        OperatorSpec::MultiplicationAtomic(_)
        | OperatorSpec::AffineComposition(_)
        | OperatorSpec::DirichletComposition(_) => {}
    }

    // Scanned hits at the tightest tolerance qualify for every depth.
    if candidates.len() < limit {
        let tight = schedule.eps_at(depth);
        let scanner = op.orbit_error_scanner(x)?;
        let (hits, _) =
            crate::diophantine::scan_threshold(&*scanner, tight, horizon, 4 * depth);
        if hits.len() >= depth {
            let times: Vec<u64> = hits.iter().take(depth).map(|&(n, _)| n).collect();
            let seq = ReturnSequence::from_u64(times, Provenance::BruteForce)?;
            push_if_returns(&mut candidates, seq, SequenceSource::Scanned)?;
            // Thinned variants (every second, every third hit).
            for step in [2usize, 3] {
                let thinned: Vec<u64> = hits
                    .iter()
                    .step_by(step)
                    .take(depth)
                    .map(|&(n, _)| n)
                    .collect();
                if thinned.len() >= 2 {
                    let seq = ReturnSequence::from_u64(thinned, Provenance::BruteForce)?;
                    push_if_returns(&mut candidates, seq, SequenceSource::Thinned)?;
                }
            }
        }
    }
    candidates.truncate(limit);
    Ok(candidates)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HyperVerdict {
    /// Every enumerated sequence returning `x` also returns the whole
    /// spanning sample.
    ConsistentWithHyperRecurrent,
    /// Some enumerated sequence returns `x` but leaves a witness behind.
    WitnessAgainst {
        sequence: ReturnSequence,
        source: SequenceSource,
        witness_index: usize,
        witness_error: f64,
    },
    /// No return sequence for `x` was found at all below the horizon.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRecurrenceReport {
    pub verdict: HyperVerdict,
    pub sequences_tested: usize,
    pub spanning_rank: usize,
    pub window_dim: usize,
}

/// Numerical rank of the spanning set over the operator window, by modified
/// Gram-Schmidt with a fixed tolerance.
fn spanning_rank(op: &OperatorSpec, set: &[CoeffVec]) -> Result<usize> {
    let (off, len) = op.window();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in set {
        let v = v.restricted_to(off, len)?;
        let mut w: Vec<Complex64> = v.coeffs().to_vec();
        for b in &basis {
            let proj: Complex64 = b.iter().zip(&w).map(|(bi, wi)| bi.conj() * wi).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
        let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    Ok(basis.len())
}

/// Hyper-recurrence probe: enumerate return sequences of `x` and test the
/// spanning sample along each. "Consistent-with" is evidence at the stated
/// horizon and schedule, never a density decision.
pub fn hyper_recurrence_probe(
    op: &OperatorSpec,
    x: &CoeffVec,
    spanning_set: &[CoeffVec],
    schedule: &ToleranceSchedule,
    horizon: u64,
    n_sequences: usize,
) -> Result<HyperRecurrenceReport> {
    if spanning_set.is_empty() {
        return Err(RecurError::Config("spanning set must be nonempty".into()));
    }
    let (_, window_dim) = op.window();
    let rank = spanning_rank(op, spanning_set)?;
    if rank < window_dim {
        return Err(RecurError::Config(format!(
            "spanning set has rank {rank} < window dimension {window_dim}"
        )));
    }
    let candidates = candidate_sequences(op, x, schedule, horizon, n_sequences)?;
    if candidates.is_empty() {
        return Ok(HyperRecurrenceReport {
            verdict: HyperVerdict::Inconclusive,
            sequences_tested: 0,
            spanning_rank: rank,
            window_dim,
        });
    }
    let tested = candidates.len();
    for (seq, source) in candidates {
        // The witness schedule follows the sequence's own length.
        let depth = schedule.max_k().min(seq.len());
        let sched = schedule.with_depth(depth);
        for (i, v) in spanning_set.iter().enumerate() {
            let rep = in_l_omega(op, v, &seq, &sched)?;
            if rep.verdict == Verdict::Fail {
                let witness_error = rep.near_miss.map(|(_, e)| e).unwrap_or(f64::NAN);
                return Ok(HyperRecurrenceReport {
                    verdict: HyperVerdict::WitnessAgainst {
                        sequence: seq,
                        source,
                        witness_index: i,
                        witness_error,
                    },
                    sequences_tested: tested,
                    spanning_rank: rank,
                    window_dim,
                });
            }
        }
    }
    Ok(HyperRecurrenceReport {
        verdict: HyperVerdict::ConsistentWithHyperRecurrent,
        sequences_tested: tested,
        spanning_rank: rank,
        window_dim,
    })
}

/// Ratio trajectory `|T^n p - p| / |T^n q - q|` along times where the
/// denominator clears the floor, with accumulation values estimated by
/// 1-dimensional gap clustering. Exact returns of `q` are excluded by the
/// floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaRatioReport {
    pub samples: Vec<(u64, f64)>,
    /// `(cluster center, population)` sorted by center.
    pub clusters: Vec<(f64, usize)>,
    pub denominator_floor: f64,
}

pub fn eta_ratio_samples(
    op: &OperatorSpec,
    p: &CoeffVec,
    q: &CoeffVec,
    horizon: u64,
) -> Result<EtaRatioReport> {
    eta_ratio_samples_with_floor(op, p, q, horizon, 1e-12)
}

pub fn eta_ratio_samples_with_floor(
    op: &OperatorSpec,
    p: &CoeffVec,
    q: &CoeffVec,
    horizon: u64,
    floor: f64,
) -> Result<EtaRatioReport> {
    let num = op.orbit_error_scanner(p)?;
    let den = op.orbit_error_scanner(q)?;
    let mut samples = Vec::new();
    let mut any_denominator = false;
    for n in 1..=horizon {
        let d = den(n);
        if d > floor {
            any_denominator = true;
            samples.push((n, num(n) / d));
        }
    }
    if !any_denominator {
        return Err(RecurError::Degenerate(
            "denominator vector is a fixed point over the whole horizon".into(),
        ));
    }
    // Gap clustering on the sorted ratio values.
    let mut values: Vec<f64> = samples.iter().map(|&(_, r)| r).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let spread = values[values.len() - 1] - values[0];
    let gap = (0.05 * spread).max(1e-9);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut start = 0usize;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            let chunk = &values[start..i];
            let center = chunk.iter().sum::<f64>() / chunk.len() as f64;
            clusters.push((center, chunk.len()));
            start = i;
        }
    }
    Ok(EtaRatioReport {
        samples,
        clusters,
        denominator_floor: floor,
    })
}

/// Phases of the diagonal data of an operator when it has one, used by
/// scenario code to drive return-time searches.
pub fn diagonal_phases(op: &OperatorSpec) -> Option<Vec<PhaseAngle>> {
    match op {
        OperatorSpec::DiagonalUnitary(d) => Some(d.phases().to_vec()),
        OperatorSpec::MultiplicationAtomic(m) => Some(m.phases()),
        OperatorSpec::DirichletComposition(d) => Some(d.phases()),
        _ => None,
    }
}

/// First time under the horizon at which the orbit error is below eps.
pub fn first_return(
    op: &OperatorSpec,
    x: &CoeffVec,
    eps: f64,
    horizon: u64,
) -> Result<Option<(u64, f64)>> {
    let scanner = op.orbit_error_scanner(x)?;
    let (hits, _) = crate::diophantine::scan_threshold(&*scanner, eps, horizon, 1);
    Ok(hits.first().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::PhaseAngle;

    #[test]
    fn single_irrational_phase_is_consistent() {
        // All basis vectors share the same phase, so any sequence returning
        // one returns all.
        let alpha = PhaseAngle::approx(0.36787944117144233);
        let op = OperatorSpec::diagonal_unitary(0, vec![alpha.clone(), alpha]).unwrap();
        let x = CoeffVec::basis(0, 2, 0);
        let spanning = vec![CoeffVec::basis(0, 2, 0), CoeffVec::basis(0, 2, 1)];
        let rep = hyper_recurrence_probe(
            &op,
            &x,
            &spanning,
            &ToleranceSchedule::explicit(vec![0.5, 0.4, 0.3]).unwrap(),
            200_000,
            4,
        )
        .unwrap();
        assert!(matches!(
            rep.verdict,
            HyperVerdict::ConsistentWithHyperRecurrent
        ));
        assert!(rep.sequences_tested >= 1);
    }

    #[test]
    fn rank_check_rejects_thin_spanning_sets() {
        let op = OperatorSpec::diagonal_unitary(0, vec![PhaseAngle::zero(); 3]).unwrap();
        let x = CoeffVec::basis(0, 3, 0);
        let spanning = vec![CoeffVec::basis(0, 3, 0)];
        let err = hyper_recurrence_probe(
            &op,
            &x,
            &spanning,
            &ToleranceSchedule::reciprocal(3),
            100,
            2,
        );
        assert!(matches!(err, Err(RecurError::Config(_))));
    }

    #[test]
    fn equal_phases_give_ratio_one() {
        let alpha = PhaseAngle::exact(1, 5);
        let op = OperatorSpec::diagonal_unitary(0, vec![alpha.clone(), alpha]).unwrap();
        let p = CoeffVec::basis(0, 2, 0);
        let q = CoeffVec::basis(0, 2, 1);
        let rep = eta_ratio_samples(&op, &p, &q, 100).unwrap();
        assert_eq!(rep.clusters.len(), 1);
        assert!((rep.clusters[0].0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn third_over_half_ratio_values() {
        // p on phase 1/3, q on phase 1/2: over n mod 6 the ratio takes the
        // values 0 (n = 3 mod 6) and sqrt(3)/2 (n = 1, 5 mod 6); even n are
        // excluded by the denominator floor.
        let op = OperatorSpec::diagonal_unitary(
            0,
            vec![PhaseAngle::exact(1, 3), PhaseAngle::exact(1, 2)],
        )
        .unwrap();
        let p = CoeffVec::basis(0, 2, 0);
        let q = CoeffVec::basis(0, 2, 1);
        let rep = eta_ratio_samples(&op, &p, &q, 600).unwrap();
        assert_eq!(rep.clusters.len(), 2, "{:?}", rep.clusters);
        assert!(rep.clusters[0].0.abs() < 1e-12);
        assert!((rep.clusters[1].0 - 3.0f64.sqrt() / 2.0).abs() < 1e-12);
        // Only odd times sampled.
        assert!(rep.samples.iter().all(|&(n, _)| n % 2 == 1));
    }

    #[test]
    fn fixed_denominator_is_degenerate() {
        let op = OperatorSpec::diagonal_unitary(
            0,
            vec![PhaseAngle::exact(1, 3), PhaseAngle::zero()],
        )
        .unwrap();
        let p = CoeffVec::basis(0, 2, 0);
        let q = CoeffVec::basis(0, 2, 1); // fixed by the zero phase
        assert!(matches!(
            eta_ratio_samples(&op, &p, &q, 50),
            Err(RecurError::Degenerate(_))
        ));
    }
}
