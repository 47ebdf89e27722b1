//! Cascade of periodic blocks: a diagonal operator whose l-th coordinate
//! rotates with exact period `m_l`, scaled so that consecutive blocks
//! separate sharply (`4 b(p_{l+1}) < a(p_l)` for the per-block orbit
//! diameters). The scaled sum of the block vectors is then recurrent along
//! factorial-type times while any returning sequence is forced into the
//! divisibility structure.

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::{sin_pi, PhaseAngle};
use crate::space::{CoeffVec, MetricSpec, NormSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCascade {
    periods: Vec<u64>,
    scales: Vec<f64>,
}

/// Min/max orbit gaps of one scaled periodic block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockGaps {
    /// `a(p) = min_{0 <= i < j < period} d(T^i p, T^j p)`.
    pub min_gap: f64,
    /// `b(p) = max_{0 <= i < j < period} d(T^i p, T^j p)`.
    pub max_gap: f64,
}

/// Exhaustive pairwise iteration over one period of a single scaled block.
pub fn block_gaps(period: u64, scale: f64) -> Result<BlockGaps> {
    if period < 2 {
        return Err(RecurError::Config("block period must be >= 2".into()));
    }
    if period > 4096 {
        return Err(RecurError::Config(
            "block period too large for exhaustive pairwise iteration".into(),
        ));
    }
    let mut min_gap = f64::INFINITY;
    let mut max_gap = 0.0f64;
    for i in 0..period {
        for j in i + 1..period {
            // d(T^i p, T^j p) = scale * |lambda^i - lambda^j|, lambda = e^{2 pi i/period}
            let gap = scale * 2.0 * sin_pi((j - i) as f64 / period as f64).abs();
            min_gap = min_gap.min(gap);
            max_gap = max_gap.max(gap);
        }
    }
    Ok(BlockGaps { min_gap, max_gap })
}

impl PeriodicCascade {
    /// Build from explicit periods and scales, verifying the separation
    /// condition `4 b(p_{l+1}) < a(p_l)` for all consecutive blocks.
    pub fn new(periods: Vec<u64>, scales: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.len() != scales.len() {
            return Err(RecurError::Config(
                "need equally many periods and scales".into(),
            ));
        }
        if scales.iter().any(|s| !(*s > 0.0)) {
            return Err(RecurError::Config("scales must be positive".into()));
        }
        for w in periods.windows(2) {
            if w[1] <= w[0] {
                return Err(RecurError::Config(
                    "periods must be strictly increasing".into(),
                ));
            }
        }
        for l in 0..periods.len() - 1 {
            let cur = block_gaps(periods[l], scales[l])?;
            let next = block_gaps(periods[l + 1], scales[l + 1])?;
            if !(4.0 * next.max_gap < cur.min_gap) {
                return Err(RecurError::Config(format!(
                    "separation violated between blocks {l} and {}: 4*{} >= {}",
                    l + 1,
                    next.max_gap,
                    cur.min_gap
                )));
            }
        }
        Ok(Self { periods, scales })
    }

    /// Choose scales automatically so the separation condition holds with a
    /// 10% margin, starting from scale 1 on the first block.
    pub fn with_auto_scales(periods: Vec<u64>) -> Result<Self> {
        if periods.is_empty() {
            return Err(RecurError::Config("need at least one period".into()));
        }
        let mut scales = vec![1.0f64];
        for l in 0..periods.len() - 1 {
            let cur = block_gaps(periods[l], scales[l])?;
            let next_unit = block_gaps(periods[l + 1], 1.0)?;
            scales.push(cur.min_gap / (4.0 * next_unit.max_gap) * 0.9);
        }
        Self::new(periods, scales)
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn blocks(&self) -> usize {
        self.periods.len()
    }

    pub fn window(&self) -> (i64, usize) {
        (0, self.periods.len())
    }

    pub fn metric(&self) -> MetricSpec {
        MetricSpec::Norm(NormSpec::L2)
    }

    pub fn phase_at(&self, l: usize) -> PhaseAngle {
        PhaseAngle::exact(1, self.periods[l])
    }

    /// The scaled sum of the block vectors, the natural recurrent probe.
    pub fn cascade_vector(&self) -> CoeffVec {
        CoeffVec::new(
            0,
            self.scales.iter().map(|&s| Complex64::new(s, 0.0)).collect(),
        )
        .expect("scales nonempty and finite")
    }

    pub fn apply(&self, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for l in 0..self.blocks() {
            out.set(l as i64, out.get(l as i64) * self.phase_at(l).as_complex());
        }
        Ok(out)
    }

    pub fn power(&self, n: &BigUint, x: &CoeffVec) -> Result<CoeffVec> {
        let (off, len) = self.window();
        let mut out = x.restricted_to(off, len)?;
        for l in 0..self.blocks() {
            // n mod period in exact integer arithmetic.
            out.set(l as i64, out.get(l as i64) * self.phase_at(l).pow(n));
        }
        Ok(out)
    }

    pub fn orbit_error_fn(&self, x: &CoeffVec) -> Result<impl Fn(u64) -> f64 + Send + Sync> {
        let (off, len) = self.window();
        let x = x.restricted_to(off, len)?;
        let items: Vec<(u64, f64)> = (0..self.blocks())
            .filter_map(|l| {
                let w = x.get(l as i64).norm_sqr();
                (w > 0.0).then_some((self.periods[l], w))
            })
            .collect();
        Ok(move |n: u64| -> f64 {
            let mut acc = 0.0;
            for &(period, w) in &items {
                let s = 2.0 * sin_pi((n % period) as f64 / period as f64);
                acc += s * s * w;
            }
            acc.sqrt()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_of_small_block_match_hand_values() {
        // period 4, scale 1: gaps are |i-j| in {1,2,3}: 2 sin(pi/4) = sqrt 2
        // and 2 sin(pi/2) = 2.
        let g = block_gaps(4, 1.0).unwrap();
        assert!((g.min_gap - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((g.max_gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn auto_scales_satisfy_separation() {
        let op = PeriodicCascade::with_auto_scales(vec![2, 6, 24, 120]).unwrap();
        for l in 0..op.blocks() - 1 {
            let cur = block_gaps(op.periods()[l], op.scales()[l]).unwrap();
            let next = block_gaps(op.periods()[l + 1], op.scales()[l + 1]).unwrap();
            assert!(4.0 * next.max_gap < cur.min_gap);
        }
    }

    #[test]
    fn bad_scales_rejected() {
        let err = PeriodicCascade::new(vec![2, 4], vec![1.0, 1.0]);
        assert!(matches!(err, Err(RecurError::Config(_))));
    }

    #[test]
    fn power_uses_residues() {
        let op = PeriodicCascade::with_auto_scales(vec![2, 6]).unwrap();
        let q = op.cascade_vector();
        // n = 6 returns both blocks exactly.
        let y = op.power(&BigUint::from(6u32), &q).unwrap();
        assert!(y.sub(&q).norm_l2() < 1e-15);
        // Astronomically large multiples of 6 land exactly as well.
        let big = BigUint::from(6u32) * BigUint::parse_bytes(b"1000000000000000000000000", 10).unwrap();
        let y = op.power(&big, &q).unwrap();
        assert!(y.sub(&q).norm_l2() < 1e-15);
    }
}
