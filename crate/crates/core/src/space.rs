//! Coefficient vectors, norms, seminorm families and metrics.
//!
//! Every state in the laboratory is a finite complex coefficient window over
//! an integer-indexed basis (`CoeffVec`). Windows are explicit and fixed per
//! experiment; operations never grow them silently, and mixing two windows
//! aligns by basis index and zero-fills.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RecurError, Result};
use crate::operators::OperatorSpec;

/// A finite complex coefficient vector over an integer-indexed basis window.
///
/// `offset` is the lowest basis index of the window (negative for models
/// indexed by the full integer lattice). Coefficients outside the window are
/// identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVec {
    offset: i64,
    coeffs: Vec<Complex64>,
}

impl CoeffVec {
    /// Build a vector from its window, checking the invariants.
    pub fn new(offset: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(RecurError::Config("window length must be >= 1".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(RecurError::Config(
                "coefficients must be finite (no NaN/Inf)".into(),
            ));
        }
        Ok(Self { offset, coeffs })
    }

    /// The zero vector on the window `[offset, offset + len)`.
    pub fn zero(offset: i64, len: usize) -> Self {
        assert!(len >= 1, "window length must be >= 1");
        Self {
            offset,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Unit coordinate vector `e_index` on the window `[offset, offset + len)`.
    pub fn basis(offset: i64, len: usize, index: i64) -> Self {
        let mut v = Self::zero(offset, len);
        v.set(index, Complex64::new(1.0, 0.0));
        v
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest basis index of the window, inclusive.
    pub fn max_index(&self) -> i64 {
        self.offset + self.coeffs.len() as i64 - 1
    }

    /// Coefficient at basis index `i` (zero outside the window).
    pub fn get(&self, i: i64) -> Complex64 {
        if i < self.offset || i > self.max_index() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(i - self.offset) as usize]
        }
    }

    /// Set the coefficient at basis index `i`; panics outside the window.
    pub fn set(&mut self, i: i64, value: Complex64) {
        assert!(
            i >= self.offset && i <= self.max_index(),
            "index {i} outside window [{}, {}]",
            self.offset,
            self.max_index()
        );
        self.coeffs[(i - self.offset) as usize] = value;
    }

    /// Raw coefficient slice, lowest index first.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Iterate `(basis_index, coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &c)| (self.offset + j as i64, c))
    }

    /// True if every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `self + other`, window = union of the two windows, zero-filled.
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    /// `self - other`, window = union of the two windows, zero-filled.
    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let lo = self.offset.min(other.offset);
        let hi = self.max_index().max(other.max_index());
        let mut out = Self::zero(lo, (hi - lo + 1) as usize);
        for i in lo..=hi {
            out.set(i, f(self.get(i), other.get(i)));
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            offset: self.offset,
            coeffs: self.coeffs.iter().map(|&c| a * c).collect(),
        }
    }

    /// Hermitian inner product `<self, other> = sum conj(self_i) * other_i`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let lo = self.offset.max(other.offset);
        let hi = self.max_index().min(other.max_index());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..=hi {
            acc += self.get(i).conj() * other.get(i);
        }
        acc
    }

    /// Euclidean norm of the window.
    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Restrict to a window, erroring if support would be lost.
    pub fn restricted_to(&self, offset: i64, len: usize) -> Result<Self> {
        let hi = offset + len as i64 - 1;
        for (i, c) in self.iter() {
            if (i < offset || i > hi) && (c.re != 0.0 || c.im != 0.0) {
                return Err(RecurError::Config(format!(
                    "vector has support at index {i} outside window [{offset}, {hi}]"
                )));
            }
        }
        let mut out = Self::zero(offset, len);
        for i in offset.max(self.offset)..=hi.min(self.max_index()) {
            out.set(i, self.get(i));
        }
        Ok(out)
    }
}

/// Norms on coefficient windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormSpec {
    /// `(sum_n |a_n|^p w_n^p)^(1/p)` with strictly positive weights, aligned
    /// to the window by basis index starting at `weight_offset`.
    WeightedLp {
        p: f64,
        weight_offset: i64,
        weights: Vec<f64>,
    },
    /// Sup of `|f(z)|` on the circles `|z| = r` for the given strictly
    /// increasing radii, with `f` the (Laurent) series of the window.
    /// Evaluated on a deterministic angular grid.
    SupOnCompacts { radii: Vec<f64> },
    /// Plain Euclidean norm.
    L2,
    /// Max coefficient modulus.
    LInf,
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::WeightedLp { p, weights, .. } => {
                if *p < 1.0 {
                    return Err(RecurError::Config(format!("p must be >= 1, got {p}")));
                }
                if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0)) {
                    return Err(RecurError::Config(
                        "weights must be nonempty and strictly positive".into(),
                    ));
                }
                Ok(())
            }
            NormSpec::SupOnCompacts { radii } => {
                if radii.is_empty() {
                    return Err(RecurError::Config("radii list must be nonempty".into()));
                }
                let mut prev = 0.0;
                for &r in radii {
                    if !(r > prev) {
                        return Err(RecurError::Config(
                            "radii must be strictly increasing and positive".into(),
                        ));
                    }
                    prev = r;
                }
                Ok(())
            }
            NormSpec::L2 | NormSpec::LInf => Ok(()),
        }
    }
}

/// Number of angular grid points used to evaluate circle sups. The grid is
/// sized from the window so that a nonzero window never evaluates to zero
/// (a Laurent polynomial with `w` terms cannot vanish at `2w` distinct
/// points of a circle).
fn circle_grid_points(window_len: usize) -> usize {
    (2 * window_len).max(64)
}

fn sup_on_circle(v: &CoeffVec, r: f64) -> f64 {
    let g = circle_grid_points(v.len());
    let mut best = 0.0f64;
    for j in 0..g {
        let theta = std::f64::consts::TAU * (j as f64) / (g as f64);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in v.iter() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            // z^i for z = r * e^(i theta); i may be negative (Laurent).
            let modulus = r.powi(i as i32);
            let angle = theta * (i as f64);
            acc += c * Complex64::from_polar(modulus, angle);
        }
        best = best.max(acc.norm());
    }
    best
}

/// Evaluate `spec` on `v`. Zero exactly when `v = 0`.
pub fn norm(v: &CoeffVec, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    match spec {
        NormSpec::WeightedLp {
            p,
            weight_offset,
            weights,
        } => {
            let hi = weight_offset + weights.len() as i64 - 1;
            if v.offset() < *weight_offset || v.max_index() > hi {
                return Err(RecurError::Config(format!(
                    "window [{}, {}] not covered by weights [{}, {}]",
                    v.offset(),
                    v.max_index(),
                    weight_offset,
                    hi
                )));
            }
            let mut acc = 0.0;
            for (i, c) in v.iter() {
                let w = weights[(i - weight_offset) as usize];
                acc += c.norm().powf(*p) * w.powf(*p);
            }
            Ok(acc.powf(1.0 / p))
        }
        NormSpec::SupOnCompacts { radii } => {
            let mut best = 0.0f64;
            for &r in radii {
                best = best.max(sup_on_circle(v, r));
            }
            Ok(best)
        }
        NormSpec::L2 => Ok(v.norm_l2()),
        NormSpec::LInf => Ok(v
            .coeffs()
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)),
    }
}

/// A Fréchet metric built from an ordered family of seminorms `p_k` with the
/// implied weights `2^{-k}`:
/// `d(x, y) = sum_k 2^{-k} p_k(x - y) / (1 + p_k(x - y))`, `k` starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetMetricSpec {
    pub seminorms: Vec<NormSpec>,
}

impl FrechetMetricSpec {
    pub fn new(seminorms: Vec<NormSpec>) -> Result<Self> {
        if seminorms.is_empty() {
            return Err(RecurError::Config(
                "at least one seminorm is required".into(),
            ));
        }
        for s in &seminorms {
            s.validate()?;
        }
        Ok(Self { seminorms })
    }

    /// Upper bound of the metric: `sum_k 2^{-k}` over the family.
    pub fn diameter_bound(&self) -> f64 {
        (1..=self.seminorms.len())
            .map(|k| 0.5f64.powi(k as i32))
            .sum()
    }
}

/// Translation-invariant Fréchet metric value.
pub fn frechet_dist(x: &CoeffVec, y: &CoeffVec, spec: &FrechetMetricSpec) -> Result<f64> {
    let diff = x.sub(y);
    let mut acc = 0.0;
    for (k, s) in spec.seminorms.iter().enumerate() {
        let p = norm(&diff, s)?;
        acc += 0.5f64.powi(k as i32 + 1) * p / (1.0 + p);
    }
    Ok(acc)
}

/// How distances are measured for a given model: either the norm of the
/// difference or a Fréchet seminorm combiner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricSpec {
    Norm(NormSpec),
    Frechet(FrechetMetricSpec),
}

impl MetricSpec {
    pub fn distance(&self, x: &CoeffVec, y: &CoeffVec) -> Result<f64> {
        match self {
            MetricSpec::Norm(s) => norm(&x.sub(y), s),
            MetricSpec::Frechet(s) => frechet_dist(x, y, s),
        }
    }

    pub fn norm_of(&self, v: &CoeffVec) -> Result<f64> {
        match self {
            MetricSpec::Norm(s) => norm(v, s),
            MetricSpec::Frechet(s) => {
                let zero = CoeffVec::zero(v.offset(), v.len());
                frechet_dist(v, &zero, s)
            }
        }
    }
}

/// Horizon-truncated orbit-sup metric
/// `sup over l = 0..=horizon of d(T^l x, T^l y)`
/// in the operator's own base metric. Refuses operator families whose orbits
/// are not bounded, since the sup may diverge.
pub fn dstar_dist(x: &CoeffVec, y: &CoeffVec, op: &OperatorSpec, horizon: u64) -> Result<f64> {
    if !op.is_power_bounded() {
        return Err(RecurError::Unsupported(format!(
            "orbit-sup metric needs a power-bounded family; {} declares unbounded orbits",
            op.family_name()
        )));
    }
    let metric = op.metric();
    let mut cx = x.clone();
    let mut cy = y.clone();
    let mut best = metric.distance(&cx, &cy)?;
    for _ in 0..horizon {
        cx = op.apply(&cx)?;
        cy = op.apply(&cy)?;
        best = best.max(metric.distance(&cx, &cy)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{OperatorSpec, PhaseAngle};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_vector_has_zero_norm_in_every_spec() {
        let v = CoeffVec::zero(0, 4);
        for spec in [
            NormSpec::L2,
            NormSpec::LInf,
            NormSpec::WeightedLp {
                p: 2.0,
                weight_offset: 0,
                weights: vec![1.0, 2.0, 3.0, 4.0],
            },
            NormSpec::SupOnCompacts {
                radii: vec![0.5, 1.0],
            },
        ] {
            assert_eq!(norm(&v, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_coordinate_l2_norm_is_one() {
        let v = CoeffVec::basis(0, 4, 1);
        assert_eq!(norm(&v, &NormSpec::L2).unwrap(), 1.0);
    }

    #[test]
    fn weighted_lp_direct_evaluation() {
        // coeffs (1, 1), p = 2, weights (1, 2): sqrt(1*1 + 1*4) = sqrt 5.
        let v = CoeffVec::new(0, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let spec = NormSpec::WeightedLp {
            p: 2.0,
            weight_offset: 0,
            weights: vec![1.0, 2.0],
        };
        let got = norm(&v, &spec).unwrap();
        assert!((got - 5.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weighted_lp_window_mismatch_is_config_error() {
        let v = CoeffVec::new(0, vec![c(1.0, 0.0); 3]).unwrap();
        let spec = NormSpec::WeightedLp {
            p: 2.0,
            weight_offset: 0,
            weights: vec![1.0, 2.0],
        };
        assert!(matches!(norm(&v, &spec), Err(RecurError::Config(_))));
    }

    #[test]
    fn frechet_metric_axioms_on_simple_case() {
        let spec = FrechetMetricSpec::new(vec![NormSpec::L2]).unwrap();
        let x = CoeffVec::basis(0, 3, 1);
        let y = CoeffVec::zero(0, 3);
        // Single seminorm, p(e_1) = 1: d = 2^{-1} * 1/(1+1) = 0.25.
        assert!((frechet_dist(&x, &y, &spec).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(frechet_dist(&x, &x, &spec).unwrap(), 0.0);
    }

    #[test]
    fn frechet_scaling_bound_for_unimodular_factors() {
        // d((lambda - 1) x, 0) <= d(2x, 0) for |lambda| = 1, since
        // |lambda - 1| <= 2 and t -> t/(1+t) is monotone.
        let spec = FrechetMetricSpec::new(vec![
            NormSpec::L2,
            NormSpec::SupOnCompacts { radii: vec![1.0] },
        ])
        .unwrap();
        let x = CoeffVec::new(0, vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.0, -0.4)]).unwrap();
        let zero = CoeffVec::zero(0, 3);
        for k in 0..16 {
            let lambda = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 16.0);
            let lhs = frechet_dist(&x.scale(lambda - c(1.0, 0.0)), &zero, &spec).unwrap();
            let rhs = frechet_dist(&x.scale(c(2.0, 0.0)), &zero, &spec).unwrap();
            assert!(lhs <= rhs + 1e-15, "lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn sup_on_compacts_sees_laurent_part() {
        // f(z) = 1/z has sup 2 on |z| = 1/2 and sup 1/2 on |z| = 2.
        let v = CoeffVec::basis(-1, 3, -1);
        let small = norm(&v, &NormSpec::SupOnCompacts { radii: vec![0.5] }).unwrap();
        let large = norm(&v, &NormSpec::SupOnCompacts { radii: vec![2.0] }).unwrap();
        assert!((small - 2.0).abs() < 1e-12);
        assert!((large - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dstar_identity_operator_is_base_distance() {
        let op = OperatorSpec::diagonal_unitary(0, vec![PhaseAngle::exact(0, 1); 3]).unwrap();
        let x = CoeffVec::basis(0, 3, 0);
        let y = CoeffVec::basis(0, 3, 2);
        let base = op.metric().distance(&x, &y).unwrap();
        for h in [0, 1, 5, 25] {
            assert_eq!(dstar_dist(&x, &y, &op, h).unwrap(), base);
        }
    }

    #[test]
    fn dstar_unitary_diagonal_preserves_l2_distance() {
        let op = OperatorSpec::diagonal_unitary(
            0,
            vec![
                PhaseAngle::exact(1, 3),
                PhaseAngle::exact(1, 7),
                PhaseAngle::approx(0.123456),
            ],
        )
        .unwrap();
        let x = CoeffVec::basis(0, 3, 1);
        let y = CoeffVec::zero(0, 3);
        for h in [0, 1, 13] {
            let d = dstar_dist(&x, &y, &op, h).unwrap();
            assert!((d - 1.0).abs() < 1e-12, "isometry should keep distance 1");
        }
    }

    #[test]
    fn dstar_refuses_unbounded_family() {
        // An atomic multiplication with |value| > 1 has unbounded orbits.
        let op = OperatorSpec::multiplication_atomic(vec![1.0], vec![c(1.5, 0.0)], 2.0).unwrap();
        let x = CoeffVec::basis(0, 1, 0);
        let y = CoeffVec::zero(0, 1);
        assert!(matches!(
            dstar_dist(&x, &y, &op, 3),
            Err(RecurError::Unsupported(_))
        ));
    }

    #[test]
    fn window_mixing_aligns_by_index() {
        let a = CoeffVec::basis(0, 2, 1);
        let b = CoeffVec::basis(-2, 2, -1);
        let s = a.add(&b);
        assert_eq!(s.offset(), -2);
        assert_eq!(s.max_index(), 1);
        assert_eq!(s.get(1), c(1.0, 0.0));
        assert_eq!(s.get(-1), c(1.0, 0.0));
        assert_eq!(s.get(0), c(0.0, 0.0));
    }
}
