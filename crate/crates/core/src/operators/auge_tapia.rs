//! Diagonal rotation plus a rank-`d`-driven perturbation.
//!
//! On the basis `e_1, e_2, ...` with projection block `V = span(e_1..e_d)`,
//! the operator acts as
//!
//! ```text
//! T x = S x + sum_{k > d} (1/m_{k-1}) g_k(P x) e_k,
//! ```
//!
//! where `S` is diagonal with `lambda_k = 1` for `k <= d` and
//! `lambda_k = exp(i pi / m_k)` beyond, `P` is the coordinate projection onto
//! `V`, and the `g_k` are scaled unit functionals on `V`. The iterate has the
//! closed form
//!
//! ```text
//! T^n x = S^n x + sum_{k > d} (lambda_k^n - 1) / ((lambda_k - 1) m_{k-1}) g_k(P x) e_k,
//! ```
//!
//! which exact phase arithmetic evaluates for arbitrary-precision `n`.
//! Truncation keeps `K` basis vectors beyond the block; the discarded tail's
//! contribution is bounded and attached to reports.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::{sin_pi, PhaseAngle};
use crate::operators::sequences::{GSequence, MSequence, ScaleLaw};
use crate::space::{CoeffVec, MetricSpec, NormSpec};
use crate::util::big_uratio_to_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugeTapia {
    d: usize,
    trunc_k: usize,
    m: MSequence,
    g: GSequence,
}

impl AugeTapia {
    /// `d >= 1` block dimension, `m` with at least `d + trunc_k` entries
    /// (`m.at(i)` is the chain value `m_{i+1}`), `g` an enumeration on `C^d`
    /// with at least `trunc_k` functionals.
    pub fn new(d: usize, m: MSequence, g: GSequence, trunc_k: usize) -> Result<Self> {
        if d < 1 {
            return Err(RecurError::Config("d must be >= 1".into()));
        }
        if trunc_k < 1 || trunc_k > 4096 {
            return Err(RecurError::Config("truncation must be in 1..=4096".into()));
        }
        if m.len() < d + trunc_k {
            return Err(RecurError::Config(format!(
                "chain has {} entries, need {}",
                m.len(),
                d + trunc_k
            )));
        }
        if g.dim() != d {
            return Err(RecurError::Config(format!(
                "functional dimension {} != block dimension {d}",
                g.dim()
            )));
        }
        if g.len() < trunc_k {
            return Err(RecurError::Config(format!(
                "enumeration has {} functionals, need {trunc_k}",
                g.len()
            )));
        }
        if let ScaleLaw::Geometric { growth } = g.scale_law() {
            if !(*growth > 0.0 && *growth < 2.0) {
                return Err(RecurError::Config(
                    "scale growth must lie in (0, 2) so the truncation tail stays summable".into(),
                ));
            }
        }
        Ok(Self { d, trunc_k, m, g })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn trunc_k(&self) -> usize {
        self.trunc_k
    }

    pub fn m(&self) -> &MSequence {
        &self.m
    }

    pub fn g(&self) -> &GSequence {
        &self.g
    }

    /// Basis window `[1, d + K]`.
    pub fn window(&self) -> (i64, usize) {
        (1, self.d + self.trunc_k)
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::Norm(NormSpec::L2)
    }

    /// `lambda_k = e^{i pi / m_k} = e^{2 pi i / (2 m_k)}` for a perturbed
    /// index `k` in `d+1 ..= d+K`.
    pub fn phase_at(&self, k: usize) -> PhaseAngle {
        let two_m = self.m_at(k) << 1;
        PhaseAngle::exact_big(BigUint::from(1u32), two_m).expect("2m >= 2")
    }

    /// Chain value `m_j` (math index, 1-based).
    pub fn m_at(&self, j: usize) -> &BigUint {
        self.m.at(j - 1)
    }

    /// Coordinates of the projection `P x` onto the block.
    pub fn project(&self, x: &CoeffVec) -> Vec<Complex64> {
        (1..=self.d as i64).map(|i| x.get(i)).collect()
    }

    /// `g_k(v)` for `k` in `d+1 ..= d+K`.
    pub fn g_eval(&self, k: usize, v: &[Complex64]) -> Complex64 {
        self.g.eval(k - self.d - 1, v)
    }

    /// `1 / ((lambda_k - 1) m_{k-1})` evaluated without underflow.
    fn inv_lambda_minus_one_over_m(&self, k: usize) -> Complex64 {
        // lambda - 1 = 2 i sin(pi/(2m_k)) e^{i pi/(2m_k)}, so
        // 1/(lambda - 1) = -i e^{-i pi/(2m_k)} / (2 sin(pi/(2m_k))).
        let m_k = self.m_at(k);
        let m_prev = self.m_at(k - 1);
        let half_turns = big_uratio_to_f64(&BigUint::from(1u32), &(m_k << 1));
        let magnitude = if half_turns > 1e-9 {
            1.0 / (2.0 * sin_pi(half_turns) * big_uratio_to_f64(m_prev, &BigUint::from(1u32)))
        } else {
            // 2 sin(pi/(2m)) = pi/m to 1e-17 relative; fold the two big
            // integers into one ratio to dodge intermediate overflow.
            big_uratio_to_f64(m_k, m_prev) / std::f64::consts::PI
        };
        let phase = Complex64::from_polar(1.0, -std::f64::consts::PI * half_turns)
            * Complex64::new(0.0, -1.0);
        phase * magnitude
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        let v = self.project(x);
        for k in self.d + 1..=self.d + self.trunc_k {
            let lambda = self.phase_at(k).as_complex();
            let inv_m = big_uratio_to_f64(&BigUint::from(1u32), self.m_at(k - 1));
            let val = lambda * out.get(k as i64) + self.g_eval(k, &v) * inv_m;
            out.set(k as i64, val);
        }
        Ok(out)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        let v = self.project(x);
        for k in self.d + 1..=self.d + self.trunc_k {
            let ph = self.phase_at(k);
            let inv_m = big_uratio_to_f64(&BigUint::from(1u32), self.m_at(k - 1));
            // sum_{j<n} lambda^j; equals (lambda^n - 1)/(lambda - 1) here.
            let geom = ph.geometric_factor(n);
            let val = ph.pow(n) * out.get(k as i64) + geom * inv_m * self.g_eval(k, &v);
            out.set(k as i64, val);
        }
        Ok(out)
    }

    /// Both sides of the coordinate identity
    /// `e_k*(T^n y - y) = (lambda_k^n - 1)(e_k*(y) + g_k(P y)/((lambda_k - 1) m_{k-1}))`,
    /// an algebraic identity valid for every `n` and perturbed `k`.
    pub fn obstruction_sides(
        &self,
        y: &CoeffVec,
        n: &BigUint,
        k: usize,
    ) -> Result<(Complex64, Complex64)> {
        if k <= self.d || k > self.d + self.trunc_k {
            return Err(RecurError::Config(format!(
                "index {k} outside the perturbed range {}..={}",
                self.d + 1,
                self.d + self.trunc_k
            )));
        }
        let pow = self.power(n, y)?;
        let lhs = pow.get(k as i64) - y.get(k as i64);
        let ph = self.phase_at(k);
        let v = self.project(y);
        // (lambda^n - 1) e_k*(y) + [(lambda^n - 1)/(lambda - 1)] g_k(P y)/m_{k-1}
        let pow_minus_one = ph.pow(n) - Complex64::new(1.0, 0.0);
        let inv_m = big_uratio_to_f64(&BigUint::from(1u32), self.m_at(k - 1));
        let rhs = pow_minus_one * y.get(k as i64)
            + ph.geometric_factor(n) * inv_m * self.g_eval(k, &v);
        Ok((lhs, rhs))
    }

    /// The obstruction coefficient `beta_k = e_k*(x) + g_k(Px)/((lambda_k-1) m_{k-1})`;
    /// `T^n x - x` has coordinate `(lambda_k^n - 1) beta_k` at every perturbed `k`.
    pub fn obstruction_coefficient(&self, x: &CoeffVec, k: usize) -> Complex64 {
        let v = self.project(x);
        x.get(k as i64) + self.g_eval(k, &v) * self.inv_lambda_minus_one_over_m(k)
    }

    /// Fast scan closure for `|T^n x - x|_2`.
    pub fn orbit_error_fn(&self, x: &CoeffVec) -> Result<impl Fn(u64) -> f64 + Send + Sync> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        // Per perturbed index: (turns of lambda_k, |beta_k|^2).
        let mut items: Vec<(f64, f64)> = Vec::with_capacity(self.trunc_k);
        for k in self.d + 1..=self.d + self.trunc_k {
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

    /// Upper bound on the discarded-tail contribution to `|T^n x - x|`:
    /// each index `k > d + K` contributes at most
    /// `min(2, n |lambda_k - 1|) |g_k(Px)| / (|lambda_k - 1| m_{k-1})
    ///   <= n |g_k| |Px| / m_{k-1}`,
    /// and the certified ratio decay dominates the series by a geometric one.
    pub fn truncation_tail_bound(&self, n: &BigUint, x: &CoeffVec) -> f64 {
        let v = self.project(x);
        let v_norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        // First discarded index k = d + K + 1 has denominator m_{d+K} (known).
        let first = big_uratio_to_f64(n, self.m_at(self.d + self.trunc_k))
            * self.g.scale_law().scale(self.trunc_k)
            * v_norm;
        // Term ratio <= (scale growth)/2 < 1, so the tail is <= first/(1-r) <= 4*first.
        4.0 * first
    }

    /// Prefix partial sums of `(m_{k-2}/m_{k-1}) |g_k|`, the summability
    /// quantity that keeps the perturbation bounded.
    pub fn perturbation_summability(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for k in self.d + 1..=self.d + self.trunc_k {
            // m_{k-2} needs k >= 3; for d = 1 the first term has no ratio.
            if k >= 3 {
                let ratio = big_uratio_to_f64(self.m_at(k - 2), self.m_at(k - 1));
                acc += ratio * self.g.functional_norm(k - self.d - 1);
            }
            out.push(acc);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::sequences::{build_g_sequence, build_m_sequence, MSchedule};

    fn small_op(d: usize, k: usize) -> AugeTapia {
        let (m, _) = build_m_sequence(d + k + 1, &MSchedule::Triangular { base: 2 }).unwrap();
        let g = build_g_sequence(d, k, 0)
            .unwrap()
            .with_scale_law(ScaleLaw::Geometric {
                growth: std::f64::consts::SQRT_2,
            });
        AugeTapia::new(d, m, g, k).unwrap()
    }

    /// Literal transcription of the one-step map, kept independent of the
    /// implementation path it checks.
    fn apply_by_hand(op: &AugeTapia, x: &CoeffVec) -> CoeffVec {
        let (off, len) = op.window();
        let mut out = CoeffVec::zero(off, len);
        for i in 1..=op.d() as i64 {
            out.set(i, x.get(i));
        }
        let v: Vec<Complex64> = (1..=op.d() as i64).map(|i| x.get(i)).collect();
        for k in op.d() + 1..=op.d() + op.trunc_k() {
            let m_k = big_uratio_to_f64(op.m_at(k), &BigUint::from(1u32));
            let lambda = Complex64::from_polar(1.0, std::f64::consts::PI / m_k);
            let m_prev = big_uratio_to_f64(op.m_at(k - 1), &BigUint::from(1u32));
            let val = lambda * x.get(k as i64) + op.g_eval(k, &v) / m_prev;
            out.set(k as i64, val);
        }
        out
    }

    #[test]
    fn apply_matches_hand_evaluation_coefficientwise() {
        let op = small_op(2, 8);
        let x = CoeffVec::basis(1, 10, 1);
        let got = op.apply(&x).unwrap();
        let want = apply_by_hand(&op, &x);
        for (i, c) in want.iter() {
            assert!(
                (got.get(i) - c).norm() < 1e-12,
                "coefficient {i}: got {} want {c}",
                got.get(i)
            );
        }
        // e_1 itself is fixed on the block and feeds every perturbed index.
        assert_eq!(got.get(1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn power_zero_is_identity() {
        let op = small_op(2, 6);
        let x = CoeffVec::basis(1, 8, 3);
        let y = op.power(&BigUint::from(0u32), &x).unwrap();
        assert!(y.sub(&x).norm_l2() < 1e-15);
    }

    #[test]
    fn power_at_twice_chain_value_kills_low_phases() {
        let op = small_op(2, 6);
        // n = 2 m_4: every lambda_k with k <= 4 satisfies lambda_k^n = 1.
        let n = op.m_at(4) << 1;
        for k in 3..=4usize {
            let z = op.phase_at(k).pow(&n);
            assert_eq!(z, Complex64::new(1.0, 0.0), "k={k}");
        }
        // Strictly beyond, the phase does not close up.
        let z = op.phase_at(5).pow(&n);
        assert!((z - Complex64::new(1.0, 0.0)).norm() > 1e-6);
    }

    #[test]
    fn power_matches_iterated_apply() {
        let op = small_op(2, 32);
        let x = CoeffVec::new(
            1,
            (0..34)
                .map(|j| Complex64::new(0.1 * j as f64 - 1.0, 0.05 * j as f64))
                .collect(),
        )
        .unwrap();
        let mut it = x.clone();
        for _ in 0..17 {
            it = op.apply(&it).unwrap();
        }
        let pw = op.power(&BigUint::from(17u32), &x).unwrap();
        assert!(pw.sub(&it).norm_l2() < 1e-9, "gap {}", pw.sub(&it).norm_l2());
    }

    #[test]
    fn obstruction_identity_holds() {
        let op = small_op(2, 8);
        let y = CoeffVec::new(
            1,
            (0..10)
                .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.91).cos()))
                .collect(),
        )
        .unwrap();
        // n = 0: both sides vanish.
        let (l0, r0) = op.obstruction_sides(&y, &BigUint::from(0u32), 3).unwrap();
        assert!(l0.norm() < 1e-15 && r0.norm() < 1e-15);
        // n = 2 m_k: lambda_k^n = 1, both sides vanish.
        let k = 4usize;
        let n = op.m_at(k) << 1;
        let (l1, r1) = op.obstruction_sides(&y, &n, k).unwrap();
        assert!(l1.norm() < 1e-12 && r1.norm() < 1e-12, "l={l1} r={r1}");
        // Generic n: both sides agree to 1e-10 relative.
        for n in [1u64, 5, 17, 12345] {
            for k in 3..=10usize {
                let (l, r) = op.obstruction_sides(&y, &BigUint::from(n), k).unwrap();
                let scale = l.norm().max(r.norm()).max(1e-30);
                assert!(
                    (l - r).norm() / scale < 1e-10,
                    "n={n} k={k} lhs={l} rhs={r}"
                );
            }
        }
    }

    #[test]
    fn orbit_error_fn_matches_power_route() {
        let op = small_op(2, 12);
        let x = CoeffVec::new(
            1,
            (0..14)
                .map(|j| Complex64::new((j as f64 * 0.11).cos(), 0.2))
                .collect(),
        )
        .unwrap();
        let f = op.orbit_error_fn(&x).unwrap();
        for n in [1u64, 2, 3, 10, 64, 1000, 65537] {
            let direct = op.power(&BigUint::from(n), &x).unwrap().sub(&x).norm_l2();
            assert!(
                (f(n) - direct).abs() < 1e-8 * (1.0 + direct),
                "n={n}: scan {} vs direct {direct}",
                f(n)
            );
        }
    }
}
