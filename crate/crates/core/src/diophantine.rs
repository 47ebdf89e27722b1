//! Return-time search engine: simultaneous approximation of unimodular
//! phases to 1 (or to targets), exact lcm shortcuts for rational phases, and
//! integer-relation detection among rational angles.
//!
//! Scans partition `[1, horizon]` into fixed chunks processed in parallel and
//! merged in ascending order, so results are identical for any worker count.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::{sin_pi, PhaseAngle};
use crate::operators::sequences::MSequence;

/// Where a return sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    BruteForce,
    LcmExact,
    StructuredMk,
    User,
}

/// Strictly increasing sequence of arbitrary-precision return times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSequence {
    times: Vec<BigUint>,
    provenance: Provenance,
}

impl ReturnSequence {
    pub fn new(times: Vec<BigUint>, provenance: Provenance) -> Result<Self> {
        if times.is_empty() {
            return Err(RecurError::Config("return sequence must be nonempty".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(RecurError::Config(
                    "return times must be strictly increasing".into(),
                ));
            }
        }
        if times[0].is_zero() {
            return Err(RecurError::Config("return times must be positive".into()));
        }
        Ok(Self { times, provenance })
    }

    pub fn from_u64(times: Vec<u64>, provenance: Provenance) -> Result<Self> {
        Self::new(times.into_iter().map(BigUint::from).collect(), provenance)
    }

    pub fn times(&self) -> &[BigUint] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Tail shift: drop the first `s` entries.
    pub fn shifted(&self, s: usize) -> Result<Self> {
        Self::new(self.times[s.min(self.times.len() - 1)..].to_vec(), self.provenance)
    }

    /// Subsequence by index selection (indices strictly increasing).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.times[i].clone()).collect(),
            self.provenance,
        )
    }
}

/// The best miss seen by a search that found nothing below its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearMiss {
    pub time: u64,
    pub error: f64,
}

/// Result of a return-time search: the times found (possibly none — an empty
/// result is a verdict, not an error) plus the best near-miss among the
/// rejected times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSearch {
    pub sequence: Option<ReturnSequence>,
    /// Per found time, the achieved error.
    pub errors: Vec<f64>,
    pub near_miss: Option<NearMiss>,
    /// How the times were produced.
    pub provenance: Provenance,
}

/// Maximum phase error at time `n`: `max_i |lambda_i^n - 1|`.
pub fn max_phase_error(phases: &[PhaseAngle], n: u64) -> f64 {
    let nb = BigUint::from(n);
    phases
        .iter()
        .map(|ph| ph.pow_minus_one_abs(&nb))
        .fold(0.0f64, f64::max)
}

fn all_exact_denominators(phases: &[PhaseAngle]) -> Option<Vec<(BigUint, BigUint)>> {
    phases
        .iter()
        .map(|ph| match ph {
            PhaseAngle::Exact { p, q } => Some((p.clone(), q.clone())),
            PhaseAngle::Approx { .. } => None,
        })
        .collect()
}

/// Smallest nonzero error any single exact phase can show:
/// `2 sin(pi / q_max)`. Any time that is not a common period of all phases
/// errs by at least this much, so below it the lcm shortcut is exhaustive.
fn exact_error_floor(parts: &[(BigUint, BigUint)]) -> f64 {
    let mut floor = f64::INFINITY;
    for (p, q) in parts {
        if p.is_zero() {
            continue;
        }
        let qf = q.to_f64().unwrap_or(f64::INFINITY);
        floor = floor.min(2.0 * sin_pi(1.0 / qf));
    }
    floor
}

const CHUNK: u64 = 1 << 14;

/// Deterministic parallel threshold scan of `err` over `[1, horizon]`.
/// Returns the first `count` hits (err < eps) in ascending order and the
/// best near-miss. Identical output for any worker count.
pub fn scan_threshold(
    err: &(dyn Fn(u64) -> f64 + Sync),
    eps: f64,
    horizon: u64,
    count: usize,
) -> (Vec<(u64, f64)>, Option<NearMiss>) {
    let chunks: Vec<(u64, u64)> = (0..)
        .map(|i| (1 + i * CHUNK, (1 + (i + 1) * CHUNK - 1).min(horizon)))
        .take_while(|(lo, _)| *lo <= horizon)
        .collect();
    let per_chunk: Vec<(Vec<(u64, f64)>, Option<NearMiss>)> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut hits = Vec::new();
            let mut best: Option<NearMiss> = None;
            for n in lo..=hi {
                let e = err(n);
                if e < eps {
                    if hits.len() < count {
                        hits.push((n, e));
                    }
                } else if best.as_ref().map_or(true, |b| e < b.error) {
                    best = Some(NearMiss { time: n, error: e });
                }
            }
            (hits, best)
        })
        .collect();
    let mut hits = Vec::new();
    let mut near: Option<NearMiss> = None;
    for (h, b) in per_chunk {
        for item in h {
            if hits.len() < count {
                hits.push(item);
            }
        }
        if let Some(b) = b {
            // Tie-break toward the earliest time for determinism.
            if near.as_ref().map_or(true, |n| {
                b.error < n.error || (b.error == n.error && b.time < n.time)
            }) {
                near = Some(b);
            }
        }
    }
    (hits, near)
}

/// Times `n <= horizon` with `max_i |lambda_i^n - 1| < eps`, at most `count`
/// of them, ascending.
///
/// When every phase is exact and `eps` is below the minimal nonzero error
/// floor, the returns are exactly the multiples of the common order, emitted
/// without search. Otherwise the range is scanned.
pub fn find_return_times(
    phases: &[PhaseAngle],
    eps: f64,
    horizon: u64,
    count: usize,
) -> Result<ReturnSearch> {
    if !(eps > 0.0) {
        return Err(RecurError::Config("eps must be positive".into()));
    }
    if horizon < 1 {
        return Err(RecurError::Config("horizon must be >= 1".into()));
    }
    if phases.is_empty() {
        return Err(RecurError::Config("need at least one phase".into()));
    }
    if let Some(parts) = all_exact_denominators(phases) {
        let floor = exact_error_floor(&parts);
        if eps <= floor {
            // lcm of the reduced denominators (phases with p = 0 contribute 1).
            let mut l = BigUint::one();
            for (p, q) in &parts {
                if !p.is_zero() {
                    l = l.lcm(q);
                }
            }
            let mut times = Vec::new();
            let mut errors = Vec::new();
            if let Some(l64) = l.to_u64() {
                let mut t = l64;
                while t <= horizon && times.len() < count {
                    times.push(t);
                    errors.push(0.0);
                    match t.checked_add(l64) {
                        Some(next) => t = next,
                        None => break,
                    }
                }
            }
            if times.is_empty() {
                // No multiple below the horizon; report the least error seen
                // at the horizon itself as the near-miss.
                let err = |n: u64| max_phase_error(phases, n);
                let (_, near) = scan_threshold(&err, 0.0, horizon.min(100_000), 1);
                return Ok(ReturnSearch {
                    sequence: None,
                    errors: vec![],
                    near_miss: near,
                    provenance: Provenance::LcmExact,
                });
            }
            return Ok(ReturnSearch {
                sequence: Some(ReturnSequence::from_u64(times, Provenance::LcmExact)?),
                errors,
                near_miss: None,
                provenance: Provenance::LcmExact,
            });
        }
    }
    let err = |n: u64| max_phase_error(phases, n);
    let (hits, near) = scan_threshold(&err, eps, horizon, count);
    if hits.is_empty() {
        return Ok(ReturnSearch {
            sequence: None,
            errors: vec![],
            near_miss: near,
            provenance: Provenance::BruteForce,
        });
    }
    let (times, errors): (Vec<u64>, Vec<f64>) = hits.into_iter().unzip();
    Ok(ReturnSearch {
        sequence: Some(ReturnSequence::from_u64(times, Provenance::BruteForce)?),
        errors,
        near_miss: near,
        provenance: Provenance::BruteForce,
    })
}

/// Verdict of a targeting search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetOutcome {
    Hit { time: u64, error: f64 },
    NearMiss(NearMiss),
    /// For exact phases, the target provably lies outside the cyclic group
    /// generated by the phase (or the congruences conflict).
    CertifiedInfeasible { reason: String },
}

/// Find `n <= horizon` with `max_i |lambda_i^n - target_i| < eps`.
///
/// For all-exact phases the targets are snapped to the corresponding roots
/// of unity; membership in the cyclic subgroup and the joint congruence
/// system are then decided exactly, certifying infeasibility when no
/// exponent can work.
pub fn simultaneous_target(
    phases: &[PhaseAngle],
    targets: &[num_complex::Complex64],
    eps: f64,
    horizon: u64,
) -> Result<TargetOutcome> {
    if phases.len() != targets.len() || phases.is_empty() {
        return Err(RecurError::Config("phases and targets must match".into()));
    }
    if targets.iter().any(|t| (t.norm() - 1.0).abs() > 1e-9) {
        return Err(RecurError::Config("targets must be unimodular".into()));
    }
    if let Some(parts) = all_exact_denominators(phases) {
        // Solve n * p_i = k_i (mod q_i) where target_i = e^{2 pi i k_i / q_i}.
        // Powers of a reduced p/q run through all q-th roots of unity, so the
        // target must itself be a q_i-th root.
        let mut residue = BigUint::zero();
        let mut modulus = BigUint::one();
        for (i, ((p, q), t)) in parts.iter().zip(targets).enumerate() {
            let qf = q.to_f64().ok_or_else(|| {
                RecurError::Config("denominator too large for target snapping".into())
            })?;
            let angle = (t.arg() / std::f64::consts::TAU).rem_euclid(1.0);
            let k_est = angle * qf;
            let k = k_est.round();
            if (k_est - k).abs() > 1e-6 * qf.max(1.0) {
                return Ok(TargetOutcome::CertifiedInfeasible {
                    reason: format!(
                        "target {i} is not a {q}-th root of unity (nearest exponent {k})"
                    ),
                });
            }
            let k = BigUint::from(k as u64) % q;
            if p.is_zero() {
                if !k.is_zero() {
                    return Ok(TargetOutcome::CertifiedInfeasible {
                        reason: format!("phase {i} is trivial but its target is not 1"),
                    });
                }
                continue;
            }
            // n = k * p^{-1} (mod q); p is invertible since gcd(p, q) = 1.
            let inv = mod_inverse(p, q).expect("reduced fraction");
            let r = (k * inv) % q;
            match merge_congruence(&residue, &modulus, &r, q) {
                Some((nr, nm)) => {
                    residue = nr;
                    modulus = nm;
                }
                None => {
                    return Ok(TargetOutcome::CertifiedInfeasible {
                        reason: format!(
                            "congruences conflict at phase {i}: n = {r} (mod {q}) is incompatible"
                        ),
                    });
                }
            }
        }
        let mut n = if residue.is_zero() {
            modulus.clone()
        } else {
            residue.clone()
        };
        // Find the smallest positive solution under the horizon whose actual
        // error beats eps (snapping tolerance could still leave a tiny error).
        while let Some(n64) = n.to_u64() {
            if n64 > horizon {
                break;
            }
            let e = (0..phases.len())
                .map(|i| (phases[i].pow(&BigUint::from(n64)) - targets[i]).norm())
                .fold(0.0f64, f64::max);
            if e < eps {
                return Ok(TargetOutcome::Hit { time: n64, error: e });
            }
            n += &modulus;
        }
        // No exact solution below the horizon: fall back to a scan for an
        // honest near-miss report.
    }
    // Mixed or approximate phases: scan.
    let err = |n: u64| -> f64 {
        let nb = BigUint::from(n);
        phases
            .iter()
            .zip(targets)
            .map(|(ph, t)| (ph.pow(&nb) - t).norm())
            .fold(0.0f64, f64::max)
    };
    let (hits, near) = scan_threshold(&err, eps, horizon, 1);
    match hits.first() {
        Some(&(time, error)) => Ok(TargetOutcome::Hit { time, error }),
        None => Ok(TargetOutcome::NearMiss(near.unwrap_or(NearMiss {
            time: horizon,
            error: f64::INFINITY,
        }))),
    }
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let e = num_bigint::BigInt::from(a.clone()).extended_gcd(&num_bigint::BigInt::from(m.clone()));
    if !e.gcd.is_one() {
        return None;
    }
    let m_i = num_bigint::BigInt::from(m.clone());
    let x = ((e.x % &m_i) + &m_i) % &m_i;
    x.to_biguint()
}

/// Merge `n = r1 (mod m1)` with `n = r2 (mod m2)`; None when incompatible.
fn merge_congruence(
    r1: &BigUint,
    m1: &BigUint,
    r2: &BigUint,
    m2: &BigUint,
) -> Option<(BigUint, BigUint)> {
    use num_bigint::BigInt;
    let (r1, m1, r2, m2) = (
        BigInt::from(r1.clone()),
        BigInt::from(m1.clone()),
        BigInt::from(r2.clone()),
        BigInt::from(m2.clone()),
    );
    let e = m1.extended_gcd(&m2);
    let g = &e.gcd;
    if (&r2 - &r1) % g != BigInt::zero() {
        return None;
    }
    let lcm = &m1 / g * &m2;
    let diff = (&r2 - &r1) / g;
    let x = (&r1 + &m1 * &e.x * diff) % &lcm;
    let x = ((x % &lcm) + &lcm) % &lcm;
    Some((x.to_biguint()?, lcm.to_biguint()?))
}

/// Certificate of an integer relation among exact rational angles:
/// integers `n_i`, not all zero, with `sum n_i p_i/q_i` an integer
/// (multiplicatively: `prod lambda_i^{n_i} = 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCertificate {
    pub coefficients: Vec<i64>,
}

/// All integer relations among exact rational angles with coefficients
/// bounded by `coeff_bound` in absolute value, complete up to the bound,
/// found by clearing denominators to the lcm and enumerating the congruence
/// box exactly. Only a canonical representative of each `{v, -v}` pair is
/// emitted.
pub fn log_rational_relations(
    phases: &[PhaseAngle],
    coeff_bound: i64,
) -> Result<Vec<RelationCertificate>> {
    if phases.is_empty() {
        return Err(RecurError::Config("need at least one phase".into()));
    }
    if coeff_bound < 1 {
        return Err(RecurError::Config("coefficient bound must be >= 1".into()));
    }
    let parts = all_exact_denominators(phases).ok_or_else(|| {
        RecurError::Unsupported(
            "relation certificates need exact phases; heuristic residual search is separate"
                .into(),
        )
    })?;
    let k = parts.len();
    let box_size = (2 * coeff_bound as u128 + 1).checked_pow(k as u32);
    match box_size {
        Some(s) if s <= 200_000_000 => {}
        _ => {
            return Err(RecurError::Config(
                "coefficient box too large for exhaustive enumeration".into(),
            ))
        }
    }
    // Clear denominators: with L = lcm(q_i) and c_i = L p_i / q_i, a vector
    // (n_i) is a relation iff sum n_i c_i = 0 (mod L).
    let mut l = BigUint::one();
    for (_, q) in &parts {
        l = l.lcm(q);
    }
    let c: Vec<BigUint> = parts.iter().map(|(p, q)| (&l / q) * p).collect();
    let l_i64 = l.to_i64();
    let c_i64: Option<Vec<i64>> = c.iter().map(|x| x.to_i64()).collect();
    let (l_small, c_small) = match (l_i64, c_i64) {
        (Some(l), Some(c)) => (l, c),
        _ => {
            return Err(RecurError::Config(
                "denominator lcm too large for the exhaustive box".into(),
            ))
        }
    };
    let mut out = Vec::new();
    let mut coeffs = vec![-coeff_bound; k];
    'outer: loop {
        let mut acc: i128 = 0;
        for (n, cc) in coeffs.iter().zip(&c_small) {
            acc += *n as i128 * *cc as i128;
        }
        let is_relation = acc.rem_euclid(l_small as i128) == 0;
        if is_relation && coeffs.iter().any(|&n| n != 0) {
            // Canonical representative: first nonzero coefficient positive.
            let first = coeffs.iter().find(|&&n| n != 0).copied().unwrap_or(0);
            if first > 0 {
                out.push(RelationCertificate {
                    coefficients: coeffs.clone(),
                });
            }
        }
        // Advance the odometer.
        for i in (0..k).rev() {
            if coeffs[i] < coeff_bound {
                coeffs[i] += 1;
                continue 'outer;
            }
            coeffs[i] = -coeff_bound;
        }
        break;
    }
    Ok(out)
}

/// Substitute a relation back into the exact angles; the result is the
/// numerator of `sum n_i p_i/q_i` over the lcm and must divide exactly.
pub fn relation_residual_is_integral(
    phases: &[PhaseAngle],
    cert: &RelationCertificate,
) -> Result<bool> {
    let parts = all_exact_denominators(phases)
        .ok_or_else(|| RecurError::Unsupported("exact phases required".into()))?;
    let mut l = BigUint::one();
    for (_, q) in &parts {
        l = l.lcm(q);
    }
    let mut acc = num_bigint::BigInt::zero();
    for ((p, q), n) in parts.iter().zip(&cert.coefficients) {
        let c = num_bigint::BigInt::from((&l / q) * p);
        acc += c * num_bigint::BigInt::from(*n);
    }
    Ok((acc % num_bigint::BigInt::from(l)).is_zero())
}

/// Bounded-box heuristic relation search for approximate angles: returns the
/// best few candidate vectors with their residuals; never a certificate.
pub fn heuristic_relation_residuals(
    turns: &[f64],
    coeff_bound: i64,
    top: usize,
) -> Result<Vec<(Vec<i64>, f64)>> {
    if turns.is_empty() || coeff_bound < 1 {
        return Err(RecurError::Config("bad heuristic search input".into()));
    }
    let k = turns.len();
    let box_size = (2 * coeff_bound as u128 + 1).checked_pow(k as u32);
    match box_size {
        Some(s) if s <= 50_000_000 => {}
        _ => return Err(RecurError::Config("coefficient box too large".into())),
    }
    let mut results: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut coeffs = vec![-coeff_bound; k];
    'outer: loop {
        if coeffs.iter().any(|&n| n != 0) {
            let s: f64 = coeffs
                .iter()
                .zip(turns)
                .map(|(&n, &t)| n as f64 * t)
                .sum();
            let residual = (s - s.round()).abs();
            let first = coeffs.iter().find(|&&n| n != 0).copied().unwrap_or(0);
            if first > 0 {
                results.push((coeffs.clone(), residual));
            }
        }
        for i in (0..k).rev() {
            if coeffs[i] < coeff_bound {
                coeffs[i] += 1;
                continue 'outer;
            }
            coeffs[i] = -coeff_bound;
        }
        break;
    }
    results.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    results.truncate(top);
    Ok(results)
}

/// Structured times `multiplier * m_l` from a divisibility chain.
pub fn structured_mk_times(m: &MSequence, multiplier: u64) -> Result<ReturnSequence> {
    if multiplier < 1 {
        return Err(RecurError::Config("multiplier must be >= 1".into()));
    }
    ReturnSequence::new(
        m.values()
            .iter()
            .map(|v| v * BigUint::from(multiplier))
            .collect(),
        Provenance::StructuredMk,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::sequences::{build_m_sequence, MSchedule};
    use num_complex::Complex64;

    #[test]
    fn half_turn_minimal_return_is_two() {
        let r = find_return_times(&[PhaseAngle::exact(1, 2)], 1e-9, 100, 3).unwrap();
        let seq = r.sequence.unwrap();
        let times: Vec<u64> = seq.times().iter().map(|t| t.to_u64().unwrap()).collect();
        assert_eq!(times, vec![2, 4, 6]);
        assert!(r.errors.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn lcm_shortcut_for_two_rational_phases() {
        let r = find_return_times(
            &[PhaseAngle::exact(1, 2), PhaseAngle::exact(1, 3)],
            1e-9,
            100,
            4,
        )
        .unwrap();
        assert_eq!(r.provenance, Provenance::LcmExact);
        let times: Vec<u64> = r
            .sequence
            .unwrap()
            .times()
            .iter()
            .map(|t| t.to_u64().unwrap())
            .collect();
        assert_eq!(times, vec![6, 12, 18, 24]);
    }

    #[test]
    fn golden_ratio_phase_matches_exhaustive_scan() {
        let golden = (5.0f64.sqrt() - 1.0) / 2.0;
        let phases = [PhaseAngle::approx(golden)];
        let r = find_return_times(&phases, 0.1, 100_000, 1).unwrap();
        let found = r.sequence.unwrap().times()[0].to_u64().unwrap();
        // Independent oracle: first n with |e^{2 pi i n golden} - 1| < 0.1.
        let mut expect = None;
        for n in 1u64..=100_000 {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * ((n as f64 * golden) % 1.0));
            if (z - Complex64::new(1.0, 0.0)).norm() < 0.1 {
                expect = Some(n);
                break;
            }
        }
        assert_eq!(found, expect.unwrap());
    }

    #[test]
    fn empty_result_carries_near_miss() {
        // 1/2 phase with eps below everything and horizon 1: no return.
        let r = find_return_times(&[PhaseAngle::exact(1, 2)], 1e-9, 1, 3).unwrap();
        assert!(r.sequence.is_none());
        let nm = r.near_miss.unwrap();
        assert_eq!(nm.time, 1);
        assert!((nm.error - 2.0).abs() < 1e-12);
    }

    #[test]
    fn targets_all_one_reduces_to_return_times() {
        let phases = [PhaseAngle::exact(1, 4)];
        let out = simultaneous_target(&phases, &[Complex64::new(1.0, 0.0)], 1e-9, 100).unwrap();
        match out {
            TargetOutcome::Hit { time, .. } => assert_eq!(time, 4),
            other => panic!("expected hit, got {other:?}"),
        }
    }

    #[test]
    fn quarter_phase_hits_i_at_one_mod_four() {
        let phases = [PhaseAngle::exact(1, 4)];
        let out = simultaneous_target(&phases, &[Complex64::new(0.0, 1.0)], 1e-9, 100).unwrap();
        match out {
            TargetOutcome::Hit { time, error } => {
                assert_eq!(time % 4, 1);
                assert!(error < 1e-12);
            }
            other => panic!("expected hit, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_target_certified() {
        // e^{2 pi i/3} is not in the 4-element subgroup generated by i.
        let phases = [PhaseAngle::exact(1, 4)];
        let t = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let out = simultaneous_target(&phases, &[t], 1e-9, 1000).unwrap();
        assert!(matches!(out, TargetOutcome::CertifiedInfeasible { .. }), "{out:?}");
    }

    #[test]
    fn mixed_targets_solved_by_crt() {
        // lambda_1 = 1/4 turn to target i (n = 1 mod 4), lambda_2 = 1/3 turn
        // to target 1 (n = 0 mod 3): n = 9 mod 12.
        let phases = [PhaseAngle::exact(1, 4), PhaseAngle::exact(1, 3)];
        let targets = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)];
        let out = simultaneous_target(&phases, &targets, 1e-9, 100).unwrap();
        match out {
            TargetOutcome::Hit { time, .. } => assert_eq!(time, 9),
            other => panic!("expected hit, got {other:?}"),
        }
    }

    #[test]
    fn relation_for_single_half_turn() {
        let rels = log_rational_relations(&[PhaseAngle::exact(1, 2)], 3).unwrap();
        // Canonical relations: (2), plus anything 2 | n: exactly n in {2}
        // after canonicalization... enumerate: n*1/2 integral iff n even.
        let coeffs: Vec<Vec<i64>> = rels.iter().map(|r| r.coefficients.clone()).collect();
        assert!(coeffs.contains(&vec![2]));
        assert!(!coeffs.contains(&vec![1]));
    }

    #[test]
    fn relation_between_third_and_sixth() {
        let rels =
            log_rational_relations(&[PhaseAngle::exact(1, 3), PhaseAngle::exact(1, 6)], 2).unwrap();
        let coeffs: Vec<Vec<i64>> = rels.iter().map(|r| r.coefficients.clone()).collect();
        assert!(coeffs.contains(&vec![1, -2]), "{coeffs:?}");
        for r in &rels {
            assert!(relation_residual_is_integral(
                &[PhaseAngle::exact(1, 3), PhaseAngle::exact(1, 6)],
                r
            )
            .unwrap());
        }
    }

    #[test]
    fn coprime_phases_have_no_small_cross_relation() {
        let phases = [PhaseAngle::exact(1, 7), PhaseAngle::exact(1, 11)];
        let rels = log_rational_relations(&phases, 6).unwrap();
        // No relation with both coefficients nonzero and |n_i| < 7.
        assert!(
            rels.iter()
                .all(|r| r.coefficients.iter().any(|&n| n == 0)),
            "{rels:?}"
        );
        // At bound 7 the pure (7, 0) relation appears.
        let rels7 = log_rational_relations(&phases, 7).unwrap();
        assert!(rels7.iter().any(|r| r.coefficients == vec![7, 0]));
    }

    #[test]
    fn approx_phase_refused_for_certificates() {
        let err = log_rational_relations(&[PhaseAngle::approx(0.5)], 2);
        assert!(matches!(err, Err(RecurError::Unsupported(_))));
    }

    #[test]
    fn structured_times_scale_the_chain() {
        let (m, _) = build_m_sequence(3, &MSchedule::Triangular { base: 2 }).unwrap();
        let seq = structured_mk_times(&m, 2).unwrap();
        let times: Vec<u64> = seq.times().iter().map(|t| t.to_u64().unwrap()).collect();
        assert_eq!(times, vec![4, 16, 128]);
        assert_eq!(seq.provenance(), Provenance::StructuredMk);
    }

    #[test]
    fn scan_is_deterministic_across_worker_counts() {
        let golden = (5.0f64.sqrt() - 1.0) / 2.0;
        let err = move |n: u64| 2.0 * sin_pi((n as f64 * golden).rem_euclid(1.0)).abs();
        let run = |workers: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            pool.install(|| scan_threshold(&err, 0.08, 200_000, 5))
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
