//! Bilateral rigid operator whose limit sets are kernels of coordinate
//! functionals: identity on the negative-index block `E`, rotation by
//! `lambda_k = e^{2 pi i / m_k}` plus a projection-driven perturbation on the
//! nonnegative indices.
//!
//! ```text
//! T x = sum_{k<0} x_k e_k + sum_{k>=0} lambda_k x_k e_k
//!       + sum_{k>=0} (1/m_{k-1}) <w_k, P x> e_k,        m_{-1} := 1,
//! ```
//!
//! with `P` the projection onto `E` and `(w_k)` an enumeration of unit
//! vectors of `E`. Along the chain times the difference collapses to a single
//! surviving coordinate,
//!
//! ```text
//! |T^{m_l} x - x|  ->  |<w_{l+1}, P x>|,
//! ```
//!
//! so rigidity and the non-dense limit-set witnesses are both driven by which
//! directions the enumeration revisits. The desk-scale enumeration interleaves
//! a full sweep of the basis of `E`, periodic revisits of a few deep "anchor"
//! directions (these power the witness construction), and two-coordinate
//! mixtures for variety.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::{sin_pi, PhaseAngle};
use crate::operators::sequences::MSequence;
use crate::space::{CoeffVec, MetricSpec, NormSpec};
use crate::util::big_uratio_to_f64;

/// Direction of one enumeration slot, as depths into the negative block
/// (depth `j` means basis vector `e_{-j}`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaDir {
    Basis(usize),
    /// `(e_{-a} + e_{-b})/sqrt(2)`.
    Pair(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qrnh {
    block_dim: usize,
    trunc_k: usize,
    m: MSequence,
    anchors: Vec<usize>,
}

impl Qrnh {
    /// `block_dim = D` (negative indices `-D..=-1`), `trunc_k = K`
    /// (nonnegative indices `0..K`), `m` with at least `K` entries
    /// (`m.at(k)` is `m_k`), and anchor depths in `1..=D`.
    pub fn new(block_dim: usize, trunc_k: usize, m: MSequence, anchors: Vec<usize>) -> Result<Self> {
        if block_dim < 1 || trunc_k < 1 {
            return Err(RecurError::Config("D and K must be >= 1".into()));
        }
        if trunc_k > 4096 {
            return Err(RecurError::Config("truncation must be <= 4096".into()));
        }
        if m.len() < trunc_k {
            return Err(RecurError::Config(format!(
                "chain has {} entries, need {trunc_k}",
                m.len()
            )));
        }
        if anchors.is_empty() || anchors.iter().any(|&a| a < 1 || a > block_dim) {
            return Err(RecurError::Config(format!(
                "anchors must be nonempty depths in 1..={block_dim}"
            )));
        }
        Ok(Self {
            block_dim,
            trunc_k,
            m,
            anchors,
        })
    }

    /// Default anchor depths: a handful of directions spread over the deep
    /// half of the block, so decaying vectors are nearly orthogonal to all
    /// of them.
    pub fn default_anchors(block_dim: usize) -> Vec<usize> {
        let step = (block_dim / 8).max(1);
        let mut out: Vec<usize> = (0..)
            .map(|i| block_dim / 2 + i * step)
            .take_while(|&a| a <= block_dim)
            .collect();
        if out.is_empty() {
            out.push(block_dim);
        }
        out
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn trunc_k(&self) -> usize {
        self.trunc_k
    }

    pub fn m(&self) -> &MSequence {
        &self.m
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// Window `[-D, K)`.
    pub fn window(&self) -> (i64, usize) {
        (-(self.block_dim as i64), self.block_dim + self.trunc_k)
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::Norm(NormSpec::L2)
    }

    /// `m_k`, with the convention `m_{-1} = 1` for the `k = 0` denominator.
    pub fn m_at(&self, k: isize) -> BigUint {
        if k < 0 {
            BigUint::one()
        } else {
            self.m.at(k as usize).clone()
        }
    }

    /// `lambda_k = e^{2 pi i / m_k}` for `0 <= k < K`.
    pub fn phase_at(&self, k: usize) -> PhaseAngle {
        PhaseAngle::exact_big(BigUint::one(), self.m.at(k).clone()).expect("m >= 1")
    }

    /// Enumeration law for the perturbation directions.
    pub fn omega_dir(&self, k: usize) -> OmegaDir {
        if k % 2 == 0 {
            OmegaDir::Basis((k / 2) % self.block_dim + 1)
        } else if k % 4 == 1 {
            OmegaDir::Basis(self.anchors[(k / 4) % self.anchors.len()])
        } else {
            let a = (k / 4) % self.block_dim + 1;
            let b = a % self.block_dim + 1;
            OmegaDir::Pair(a, b)
        }
    }

    /// `<w_k, P x>` (Hermitian pairing; the directions have real coefficients).
    pub fn omega_inner(&self, k: usize, x: &CoeffVec) -> Complex64 {
        match self.omega_dir(k) {
            OmegaDir::Basis(j) => x.get(-(j as i64)),
            OmegaDir::Pair(a, b) => {
                (x.get(-(a as i64)) + x.get(-(b as i64))) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    /// The direction vector itself, as a window over `E`.
    pub fn omega_vector(&self, k: usize) -> CoeffVec {
        let mut v = CoeffVec::zero(-(self.block_dim as i64), self.block_dim);
        match self.omega_dir(k) {
            OmegaDir::Basis(j) => v.set(-(j as i64), Complex64::new(1.0, 0.0)),
            OmegaDir::Pair(a, b) => {
                v.set(-(a as i64), Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
                v.set(-(b as i64), Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
            }
        }
        v
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for k in 0..self.trunc_k {
            let lambda = self.phase_at(k).as_complex();
            let inv_m = big_uratio_to_f64(&BigUint::one(), &self.m_at(k as isize - 1));
            let val = lambda * out.get(k as i64) + self.omega_inner(k, x) * inv_m;
            out.set(k as i64, val);
        }
        Ok(out)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for k in 0..self.trunc_k {
            let ph = self.phase_at(k);
            let inv_m = big_uratio_to_f64(&BigUint::one(), &self.m_at(k as isize - 1));
            let val =
                ph.pow(n) * out.get(k as i64) + ph.geometric_factor(n) * inv_m * self.omega_inner(k, x);
            out.set(k as i64, val);
        }
        Ok(out)
    }

    /// `beta_k = x_k + <w_k, Px> / ((lambda_k - 1) m_{k-1})`, the coefficient
    /// so that `T^n x - x` has coordinate `(lambda_k^n - 1) beta_k` at `k >= 0`.
    pub fn obstruction_coefficient(&self, x: &CoeffVec, k: usize) -> Complex64 {
        let inner = self.omega_inner(k, x);
        // lambda - 1 = 2 i sin(pi/m_k) e^{i pi/m_k} for lambda = e^{2 pi i/m_k}.
        let m_k = self.m.at(k);
        let m_prev = self.m_at(k as isize - 1);
        let half_turns = big_uratio_to_f64(&BigUint::one(), &(m_k << 1));
        let magnitude = if half_turns > 1e-9 {
            1.0 / (2.0 * sin_pi(half_turns) * big_uratio_to_f64(&m_prev, &BigUint::one()))
        } else {
            big_uratio_to_f64(m_k, &m_prev) / std::f64::consts::TAU
        };
        let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * half_turns)
            * Complex64::new(0.0, -1.0);
        x.get(k as i64) + inner * phase * magnitude
    }

    /// One sample of the limit identity at chain position `l`: the measured
    /// `|T^{m_l} x - x|`, the predicted value `|<w_{l+1}, P x>|`, and a bound
    /// on their gap from the two tail sums and the factor deviation.
    pub fn limit_formula(&self, x: &CoeffVec, l: usize) -> Result<LimitFormulaSample> {
        if l + 1 >= self.trunc_k {
            return Err(RecurError::Config(format!(
                "position {l} needs index {} inside the truncation {}",
                l + 1,
                self.trunc_k
            )));
        }
        let n = self.m.at(l).clone();
        let error_norm = self.power(&n, x)?.sub(x).norm_l2();
        let predicted = self.omega_inner(l + 1, x).norm();
        // Gap sources: diagonal tail (k > l), perturbation tail (k > l+1),
        // and the deviation of the surviving factor from 1.
        let mut gap = 0.0;
        for k in l + 1..self.trunc_k {
            let ph = self.phase_at(k);
            let diag = ph.pow_minus_one_abs(&n) * x.get(k as i64).norm();
            gap += diag;
            if k > l + 1 {
                let inv_m = big_uratio_to_f64(&BigUint::one(), &self.m_at(k as isize - 1));
                gap += ph.geometric_factor(&n).norm() * inv_m * self.omega_inner(k, x).norm();
            }
        }
        let surviving = self.phase_at(l + 1).geometric_factor(&n).norm()
            * big_uratio_to_f64(&BigUint::one(), &self.m_at(l as isize));
        gap += (surviving - 1.0).abs() * predicted;
        gap += self.truncation_tail_bound(&n, x);
        Ok(LimitFormulaSample {
            position: l,
            error_norm,
            predicted,
            gap_bound: gap,
        })
    }

    /// Chain positions whose times drive every vector back: along odd slots
    /// `k_l = 2l - 1` the next slot is the basis sweep, so the surviving
    /// coordinate is `x_{-(l mod D)-1}`, which vanishes as `l` grows for any
    /// square-summable profile.
    pub fn rigidity_positions(&self, depth: usize) -> Result<Vec<usize>> {
        let out: Vec<usize> = (1..=depth).map(|l| 2 * l - 1).collect();
        match out.last() {
            Some(&last) if last + 1 < self.trunc_k => Ok(out),
            _ => Err(RecurError::Config(format!(
                "depth {depth} needs truncation > {}",
                2 * depth
            ))),
        }
    }

    /// Basis depth predicted to survive at rigidity position `k_l = 2l - 1`.
    pub fn rigidity_predicted_depth(&self, l: usize) -> usize {
        l % self.block_dim + 1
    }

    /// Chain positions whose following slot revisits the given anchor
    /// (by position in the anchor list).
    pub fn anchor_positions(&self, anchor_idx: usize) -> Vec<usize> {
        assert!(anchor_idx < self.anchors.len());
        // Slot k+1 = 4t+1 carries anchor (t mod A); so k = 4t with t = anchor_idx + s*A.
        (0..)
            .map(|s| 4 * (anchor_idx + s * self.anchors.len()))
            .take_while(|&k| k + 1 < self.trunc_k)
            .collect()
    }

    /// For a tuple of vectors, pick the anchor with the smallest worst-case
    /// pairing against the block data and return the associated chain times
    /// together with the excluded witness direction. Every tuple member
    /// returns along these times (up to its pairing with the anchor), while
    /// the witness keeps error about 1.
    pub fn orthogonal_witness(
        &self,
        tuple: &[CoeffVec],
    ) -> Result<(Vec<BigUint>, CoeffVec, usize)> {
        if tuple.is_empty() {
            return Err(RecurError::Config("tuple must be nonempty".into()));
        }
        let mut best: Option<(usize, f64)> = None;
        for (idx, &depth) in self.anchors.iter().enumerate() {
            let worst = tuple
                .iter()
                .map(|q| q.get(-(depth as i64)).norm())
                .fold(0.0f64, f64::max);
            if best.map_or(true, |(_, b)| worst < b) {
                best = Some((idx, worst));
            }
        }
        let (anchor_idx, _) = best.expect("anchors nonempty");
        let positions = self.anchor_positions(anchor_idx);
        if positions.is_empty() {
            return Err(RecurError::Config(
                "truncation too small to revisit any anchor".into(),
            ));
        }
        let times: Vec<BigUint> = positions.iter().map(|&k| self.m.at(k).clone()).collect();
        let depth = self.anchors[anchor_idx];
        let (off, len) = self.window();
        let witness = CoeffVec::basis(off, len, -(depth as i64));
        Ok((times, witness, depth))
    }

    /// Fast scan closure for `|T^n x - x|_2`.
    pub fn orbit_error_fn(&self, x: &CoeffVec) -> Result<impl Fn(u64) -> f64 + Send + Sync> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        let mut items: Vec<(f64, f64)> = Vec::with_capacity(self.trunc_k);
        for k in 0..self.trunc_k {
            let beta = self.obstruction_coefficient(&x, k);
            let w = beta.norm_sqr();
            if w == 0.0 || !w.is_finite() {
                continue;
            }
            items.push((self.phase_at(k).turns_f64(), w));
        }
        Ok(move |n: u64| -> f64 {
            let mut acc = 0.0;
            for &(turns, w) in &items {
                let s = 2.0 * sin_pi((n as f64 * turns).rem_euclid(1.0));
                acc += s * s * w;
            }
            acc.sqrt()
        })
    }

    /// Bound on the discarded-tail contribution to `|T^n x - x|`: the first
    /// discarded index `K` contributes at most `n |Px| / m_{K-1}` and the
    /// certified ratio decay dominates the rest geometrically.
    pub fn truncation_tail_bound(&self, n: &BigUint, x: &CoeffVec) -> f64 {
        let mut p_norm = 0.0f64;
        for j in 1..=self.block_dim as i64 {
            p_norm += x.get(-j).norm_sqr();
        }
        let p_norm = p_norm.sqrt();
        2.0 * big_uratio_to_f64(n, &self.m_at(self.trunc_k as isize - 1)) * p_norm
    }
}

/// One sample of the rigidity limit identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitFormulaSample {
    pub position: usize,
    pub error_norm: f64,
    pub predicted: f64,
    pub gap_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::sequences::{build_m_sequence, MSchedule};

    fn small_op(d: usize, k: usize) -> Qrnh {
        let (m, _) = build_m_sequence(k + 1, &MSchedule::Triangular { base: 2 }).unwrap();
        Qrnh::new(d, k, m, Qrnh::default_anchors(d)).unwrap()
    }

    #[test]
    fn negative_block_is_fixed() {
        let op = small_op(4, 16);
        let x = CoeffVec::basis(-4, 20, -2);
        let y = op.apply(&x).unwrap();
        assert_eq!(y.get(-2), Complex64::new(1.0, 0.0));
        // The perturbation feeds the nonnegative coordinates wherever the
        // enumeration looks at depth 2.
        let fed: f64 = (0..16).map(|k| y.get(k as i64).norm()).sum();
        assert!(fed > 0.0);
    }

    #[test]
    fn power_matches_iterated_apply() {
        let op = small_op(3, 12);
        let x = CoeffVec::new(
            -3,
            (0..15)
                .map(|j| Complex64::new((0.3 * j as f64).sin(), (0.17 * j as f64).cos()))
                .collect(),
        )
        .unwrap();
        let mut it = x.clone();
        for _ in 0..23 {
            it = op.apply(&it).unwrap();
        }
        let pw = op.power(&BigUint::from(23u32), &x).unwrap();
        assert!(pw.sub(&it).norm_l2() < 1e-9, "gap {}", pw.sub(&it).norm_l2());
    }

    #[test]
    fn limit_formula_unit_anchor_vector() {
        let op = small_op(4, 16);
        // The slot after position l must be a basis sweep slot for odd l.
        let l = 3usize; // slot 4 is even: basis depth (4/2) mod 4 + 1 = 3
        let (off, len) = op.window();
        let x = CoeffVec::basis(off, len, -3);
        let s = op.limit_formula(&x, l).unwrap();
        assert!((s.predicted - 1.0).abs() < 1e-12, "{s:?}");
        assert!((s.error_norm - 1.0).abs() < 0.2, "{s:?}");
    }

    #[test]
    fn limit_formula_zero_projection_predicts_zero() {
        let op = small_op(4, 16);
        let (off, len) = op.window();
        // Supported only on nonnegative indices: P x = 0.
        let mut x = CoeffVec::zero(off, len);
        x.set(2, Complex64::new(0.8, 0.1));
        x.set(5, Complex64::new(-0.3, 0.4));
        for l in [2usize, 5, 9] {
            let s = op.limit_formula(&x, l).unwrap();
            assert_eq!(s.predicted, 0.0);
            assert!(
                s.error_norm <= s.gap_bound + 1e-12,
                "error {} exceeds gap bound {}",
                s.error_norm,
                s.gap_bound
            );
        }
        // The error shrinks with depth along the chain.
        let early = op.limit_formula(&x, 2).unwrap().error_norm;
        let late = op.limit_formula(&x, 9).unwrap().error_norm;
        assert!(late < early || late < 1e-12);
    }

    #[test]
    fn orthogonal_witness_excludes_direction() {
        let op = small_op(8, 64);
        let (off, len) = op.window();
        // A decaying tuple: negligible mass at the anchor depths.
        let tuple: Vec<CoeffVec> = (0..3)
            .map(|t| {
                let mut v = CoeffVec::zero(off, len);
                for j in 1..=8i64 {
                    v.set(-j, Complex64::new(0.5f64.powi(j as i32 + t), 0.0));
                }
                v
            })
            .collect();
        let (times, witness, depth) = op.orthogonal_witness(&tuple).unwrap();
        assert!(!times.is_empty());
        assert!(depth >= 4, "anchor should sit in the deep half");
        // Witness keeps error ~ 1 at every returned time.
        for t in &times {
            let err = op.power(t, &witness).unwrap().sub(&witness).norm_l2();
            assert!(err > 0.5, "witness returned unexpectedly: err={err}");
        }
        // Tuple members return to within their anchor pairing.
        for q in &tuple {
            for t in &times {
                let err = op.power(t, q).unwrap().sub(q).norm_l2();
                assert!(err < 0.1, "tuple member failed to return: err={err}");
            }
        }
    }

    #[test]
    fn orbit_error_fn_matches_power_route() {
        let op = small_op(3, 10);
        let x = CoeffVec::new(
            -3,
            (0..13)
                .map(|j| Complex64::new((0.21 * j as f64).cos(), -0.1))
                .collect(),
        )
        .unwrap();
        let f = op.orbit_error_fn(&x).unwrap();
        for n in [1u64, 2, 7, 32, 500, 99991] {
            let direct = op.power(&BigUint::from(n), &x).unwrap().sub(&x).norm_l2();
            assert!(
                (f(n) - direct).abs() < 1e-8 * (1.0 + direct),
                "n={n}: {} vs {direct}",
                f(n)
            );
        }
    }
}
