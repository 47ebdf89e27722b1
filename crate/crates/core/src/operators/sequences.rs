//! Divisibility schedules and functional direction enumerations.
//!
//! The perturbed-rotation constructions are driven by two sequences: a
//! strictly increasing divisibility chain `m_1 | m_2 | ...` whose ratios decay
//! fast enough for two summability conditions, and an enumeration of unit
//! directions whose closure is the full unit sphere.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::phase::unit_from_turns;
use crate::util::big_uratio_to_f64;

/// Growth schedule for [`MSequence`] construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MSchedule {
    /// `m_k = base^(k (k+1) / 2)` — ratios `m_{k-1}/m_k = base^{-k}` decay
    /// geometrically; the default and smallest standard passing schedule.
    Triangular { base: u64 },
    /// `m_k = base^k` — constant ratios; fails certification.
    Geometric { base: u64 },
    /// Explicit values, checked as given.
    Explicit { values: Vec<BigUint> },
}

impl Default for MSchedule {
    fn default() -> Self {
        MSchedule::Triangular { base: 2 }
    }
}

/// Strictly increasing divisibility chain of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSequence {
    values: Vec<BigUint>,
}

/// Prefix-certificate for the two decay conditions an `MSequence` must meet:
/// summable consecutive ratios, and tail sums `m_j * sum_{k>j} 1/m_k` that
/// vanish. Both can only be checked on the produced prefix; the certificate
/// requires the observed trend to decay geometrically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSequenceCertificate {
    /// Consecutive ratios `m_k / m_{k+1}`.
    pub ratios: Vec<f64>,
    /// Partial sums of the ratios.
    pub ratio_partial_sums: Vec<f64>,
    /// `t_j = m_j * sum over produced k > j of 1/m_k`.
    pub tail_products: Vec<f64>,
}

impl MSequence {
    /// Wrap explicit values, enforcing only the hard invariants
    /// (strict increase and divisibility).
    pub fn from_values(values: Vec<BigUint>) -> Result<Self> {
        if values.len() < 2 {
            return Err(RecurError::Config(
                "divisibility chain needs at least 2 entries".into(),
            ));
        }
        if values[0].is_zero() {
            return Err(RecurError::Config("chain entries must be positive".into()));
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(RecurError::Config(format!(
                    "chain must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
            if !(&w[1] % &w[0]).is_zero() {
                return Err(RecurError::Config(format!(
                    "divisibility violated: {} does not divide {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry by 0-based position.
    pub fn at(&self, i: usize) -> &BigUint {
        &self.values[i]
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// The decay certificate over the produced prefix.
    pub fn certificate(&self) -> MSequenceCertificate {
        let n = self.values.len();
        let ratios: Vec<f64> = (0..n - 1)
            .map(|i| big_uratio_to_f64(&self.values[i], &self.values[i + 1]))
            .collect();
        let mut ratio_partial_sums = Vec::with_capacity(ratios.len());
        let mut acc = 0.0;
        for r in &ratios {
            acc += r;
            ratio_partial_sums.push(acc);
        }
        // t_j = m_j * sum_{k > j} 1/m_k, summed within the prefix from the
        // far end so the tiny terms accumulate first.
        let mut tail_products = vec![0.0; n - 1];
        for j in 0..n - 1 {
            let mut s = 0.0;
            for k in (j + 1..n).rev() {
                s += big_uratio_to_f64(&self.values[j], &self.values[k]);
            }
            tail_products[j] = s;
        }
        MSequenceCertificate {
            ratios,
            ratio_partial_sums,
            tail_products,
        }
    }
}

/// Build a divisibility chain of `count` entries from a growth schedule and
/// certify the two decay conditions on the produced prefix.
///
/// Rejection carries the failing partial quantity, so a schedule that grows
/// too slowly (e.g. plain geometric) is refused rather than silently used.
pub fn build_m_sequence(count: usize, schedule: &MSchedule) -> Result<(MSequence, MSequenceCertificate)> {
    if count < 2 {
        return Err(RecurError::Config("count must be >= 2".into()));
    }
    let values: Vec<BigUint> = match schedule {
        MSchedule::Triangular { base } => {
            if *base < 2 {
                return Err(RecurError::Config("base must be >= 2".into()));
            }
            (1..=count as u64)
                .map(|k| BigUint::from(*base).pow((k * (k + 1) / 2) as u32))
                .collect()
        }
        MSchedule::Geometric { base } => {
            if *base < 2 {
                return Err(RecurError::Config("base must be >= 2".into()));
            }
            (1..=count as u64)
                .map(|k| BigUint::from(*base).pow(k as u32))
                .collect()
        }
        MSchedule::Explicit { values } => {
            if values.len() < count {
                return Err(RecurError::Config(format!(
                    "explicit schedule has {} entries, need {count}",
                    values.len()
                )));
            }
            values[..count].to_vec()
        }
    };
    let seq = MSequence::from_values(values)?;
    let cert = seq.certificate();

    // Certify geometric decay of the consecutive ratios (dominates the ratio
    // series by a geometric one, so its full sum is finite if the trend holds).
    for i in 0..cert.ratios.len().saturating_sub(1) {
        if !(cert.ratios[i + 1] <= cert.ratios[i] / 2.0) {
            return Err(RecurError::Certification(format!(
                "ratio decay too slow at position {}: {} then {} (partial sum {})",
                i,
                cert.ratios[i],
                cert.ratios[i + 1],
                cert.ratio_partial_sums[i + 1]
            )));
        }
    }
    // Certify that t_j = m_j sum_{k>j} 1/m_k decays toward zero.
    for j in 0..cert.tail_products.len().saturating_sub(1) {
        if !(cert.tail_products[j + 1] <= 0.75 * cert.tail_products[j]) {
            return Err(RecurError::Certification(format!(
                "tail products not vanishing at position {}: {} then {}",
                j,
                cert.tail_products[j],
                cert.tail_products[j + 1]
            )));
        }
    }
    Ok((seq, cert))
}

/// Scale law attached to a direction enumeration: the k-th functional is
/// `scale(k) * u_k` with `u_k` a unit direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScaleLaw {
    Unit,
    /// `scale(k) = growth^k`, `k` 0-based along the enumeration.
    Geometric { growth: f64 },
}

impl ScaleLaw {
    pub fn scale(&self, k: usize) -> f64 {
        match self {
            ScaleLaw::Unit => 1.0,
            ScaleLaw::Geometric { growth } => growth.powi(k as i32),
        }
    }
}

/// A deterministic enumeration of linear functionals on `C^d`, each a scale
/// times a unit coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GSequence {
    dim: usize,
    directions: Vec<Vec<Complex64>>,
    scale_law: ScaleLaw,
}

impl GSequence {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn scale_law(&self) -> &ScaleLaw {
        &self.scale_law
    }

    /// Unit direction of the k-th functional (0-based).
    pub fn direction(&self, k: usize) -> &[Complex64] {
        &self.directions[k]
    }

    /// `|g_k|` as a functional on Euclidean `C^d`.
    pub fn functional_norm(&self, k: usize) -> f64 {
        self.scale_law.scale(k)
    }

    /// Apply the k-th functional to a coefficient vector `v` in `C^d`
    /// (plain, non-conjugated pairing).
    pub fn eval(&self, k: usize, v: &[Complex64]) -> Complex64 {
        debug_assert_eq!(v.len(), self.dim);
        let dot: Complex64 = self.directions[k]
            .iter()
            .zip(v)
            .map(|(a, b)| a * b)
            .sum();
        dot * self.scale_law.scale(k)
    }

    pub fn with_scale_law(mut self, law: ScaleLaw) -> Self {
        self.scale_law = law;
        self
    }
}

/// Reduced fractions in `[0, 1)` ordered by denominator then numerator:
/// 0/1, 1/2, 1/3, 2/3, 1/4, 3/4, ...
fn rational_angles() -> impl Iterator<Item = (u64, u64)> {
    (1u64..).flat_map(|q| (0..q).filter(move |p| p.gcd(&q) == 1).map(move |p| (p, q)))
}

/// Nonzero Gaussian-integer grid points of `C^d` enumerated by sup-norm
/// shells; normalized they are dense in the unit sphere.
fn grid_points(d: usize) -> impl Iterator<Item = Vec<Complex64>> {
    (1i64..).flat_map(move |shell| {
        // All tuples of Gaussian integers with sup-norm exactly `shell`.
        let side = 2 * shell + 1;
        let total = (side as u128).pow(2 * d as u32);
        (0..total).filter_map(move |code| {
            let mut c = code;
            let mut parts = Vec::with_capacity(d);
            let mut maxabs = 0i64;
            for _ in 0..d {
                let re = (c % side as u128) as i64 - shell;
                c /= side as u128;
                let im = (c % side as u128) as i64 - shell;
                c /= side as u128;
                maxabs = maxabs.max(re.abs()).max(im.abs());
                parts.push(Complex64::new(re as f64, im as f64));
            }
            (maxabs == shell).then_some(parts)
        })
    })
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut v {
        *c /= n;
    }
    v
}

fn approx_same(a: &[Complex64], b: &[Complex64]) -> bool {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
        < 1e-12
}

/// Deterministic enumeration of unit directions in `C^d`, dense in the unit
/// sphere as `count` grows.
///
/// For `d = 1` the directions are the unimodular scalars at rational angles.
/// For `d >= 2` the slots cycle through the `d` coordinate axes (rational
/// angles on the axis, all other components exactly zero) followed by a
/// generic normalized Gaussian-integer grid point; the axis streams make the
/// kernel structure of the functionals explicit while the grid stream carries
/// the density. `seed` offsets every rational angle by `seed/2^16` turns, so
/// distinct seeds give distinct but equally structured enumerations.
pub fn build_g_sequence(d: usize, count: usize, seed: u64) -> Result<GSequence> {
    if d < 1 {
        return Err(RecurError::Config("d must be >= 1".into()));
    }
    if count < 1 {
        return Err(RecurError::Config("count must be >= 1".into()));
    }
    let angle_offset = (seed % (1 << 16)) as f64 / (1u64 << 16) as f64;
    let mut angles = rational_angles();
    let mut next_angle = move || {
        let (p, q) = angles.next().expect("infinite iterator");
        unit_from_turns(p as f64 / q as f64 + angle_offset)
    };

    let mut directions: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    if d == 1 {
        while directions.len() < count {
            let cand = vec![next_angle()];
            if !directions.iter().any(|x| approx_same(x, &cand)) {
                directions.push(cand);
            }
        }
    } else {
        let mut grid = grid_points(d);
        let mut slot = 0usize;
        while directions.len() < count {
            let axis = slot % (d + 1);
            let cand = if axis < d {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[axis] = next_angle();
                v
            } else {
                // Generic stream: skip grid points that duplicate an earlier
                // direction after normalization.
                loop {
                    let g = normalize(grid.next().expect("infinite iterator"));
                    let rotated: Vec<Complex64> = g
                        .iter()
                        .map(|c| c * unit_from_turns(angle_offset))
                        .collect();
                    if !directions.iter().any(|x| approx_same(x, &rotated)) {
                        break rotated;
                    }
                }
            };
            slot += 1;
            if directions.iter().any(|x| approx_same(x, &cand)) {
                continue;
            }
            directions.push(cand);
        }
    }
    Ok(GSequence {
        dim: d,
        directions,
        scale_law: ScaleLaw::Unit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_base_two_prefix() {
        let (m, cert) = build_m_sequence(5, &MSchedule::Triangular { base: 2 }).unwrap();
        let want: Vec<BigUint> = [2u64, 8, 64, 1024, 32768]
            .iter()
            .map(|&v| BigUint::from(v))
            .collect();
        assert_eq!(m.values(), &want[..]);
        // m_{k-1}/m_k = 2^{-k}
        for (i, r) in cert.ratios.iter().enumerate() {
            assert!((r - 0.5f64.powi(i as i32 + 2)).abs() < 1e-15);
        }
        assert!(cert.ratio_partial_sums.last().unwrap() < &0.5);
    }

    #[test]
    fn base_case_two_entries() {
        let (m, _) = build_m_sequence(2, &MSchedule::Triangular { base: 3 }).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.at(1) % m.at(0)).is_zero());
    }

    #[test]
    fn constant_schedule_rejected() {
        let vals = vec![BigUint::from(4u32); 3];
        assert!(matches!(
            MSequence::from_values(vals),
            Err(RecurError::Config(_))
        ));
    }

    #[test]
    fn geometric_schedule_fails_certification() {
        let err = build_m_sequence(6, &MSchedule::Geometric { base: 2 }).unwrap_err();
        assert!(matches!(err, RecurError::Certification(_)), "{err}");
    }

    #[test]
    fn direction_enumeration_is_unit_norm_and_distinct() {
        for d in [1usize, 2, 3] {
            let g = build_g_sequence(d, 24, 0).unwrap();
            for k in 0..g.len() {
                let n: f64 = g.direction(k).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12, "d={d} k={k} norm={n}");
                for j in 0..k {
                    assert!(
                        !approx_same(g.direction(j), g.direction(k)),
                        "duplicate directions at {j} and {k} for d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn axis_streams_have_exact_zero_components() {
        let g = build_g_sequence(2, 12, 0).unwrap();
        // Slots 0, 3, 6, ... are axis 0; slots 1, 4, 7, ... are axis 1.
        let d0 = g.direction(0);
        assert_eq!(d0[1], Complex64::new(0.0, 0.0));
        let d1 = g.direction(1);
        assert_eq!(d1[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn enumeration_reproducible_from_seed() {
        let a = build_g_sequence(2, 16, 7).unwrap();
        let b = build_g_sequence(2, 16, 7).unwrap();
        assert_eq!(a, b);
        let c = build_g_sequence(2, 16, 8).unwrap();
        assert_ne!(a, c);
    }
}
