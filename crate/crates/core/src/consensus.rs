//! Weighted consensus points and the smooth local-best switch.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Above this sharpness the min-cost shift is always applied.
pub const FORCE_STABILIZED_ALPHA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusParams {
    pub alpha: f64,
    pub stabilized: bool,
}

impl ConsensusParams {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            stabilized: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || self.alpha.is_infinite() {
            return Err(Error::invalid("alpha", "must be finite and nonnegative"));
        }
        Ok(())
    }

    fn shifted(&self) -> bool {
        self.stabilized || self.alpha > FORCE_STABILIZED_ALPHA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemorySwitchParams {
    pub beta: f64,
    pub nu: f64,
}

impl MemorySwitchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be positive and finite"));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::invalid("nu", "must be positive and finite"));
        }
        Ok(())
    }
}

/// `1 + tanh(β (cost_y − cost_x))`, in `[0, 2]`.
///
/// Negative arguments are evaluated as `2 − S(|z|)` so that swapping the two
/// costs gives values that sum to exactly 2.
#[inline]
pub fn memory_switch(cost_x: f64, cost_y: f64, params: &MemorySwitchParams) -> f64 {
    let z = params.beta * (cost_y - cost_x);
    if z >= 0.0 {
        1.0 + z.tanh()
    } else {
        2.0 - (1.0 + (-z).tanh())
    }
}

/// Exponentially weighted average of `points` with weights `exp(−α cost)`.
pub fn weighted_consensus(
    points: &[Vec<f64>],
    costs: &[f64],
    params: &ConsensusParams,
) -> Result<Vec<f64>> {
    let dim = points.first().map_or(0, Vec::len);
    consensus_with(points.len(), dim, |i| &points[i], costs, params)
}

/// Same as [`weighted_consensus`] but reads point `i` through `point(i)`.
///
/// The sums run sequentially in index order so the result does not depend on
/// how the caller parallelizes elsewhere. The output is clamped to the
/// bounding box of the points, which it lies in exactly in real arithmetic.
pub fn consensus_with<'a, P>(
    n: usize,
    dim: usize,
    point: P,
    costs: &[f64],
    params: &ConsensusParams,
) -> Result<Vec<f64>>
where
    P: Fn(usize) -> &'a [f64],
{
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if costs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: costs.len(),
        });
    }
    if let Some(index) = costs.iter().position(|c| c.is_nan()) {
        return Err(Error::NanCost { index });
    }
    let shift = if params.shifted() {
        costs.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };

    let mut num = vec![0.0; dim];
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let mut den = 0.0;
    for (i, &c) in costs.iter().enumerate() {
        let p = point(i);
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        let w = if params.alpha == 0.0 {
            1.0
        } else {
            (-params.alpha * (c - shift)).exp()
        };
        den += w;
        for k in 0..dim {
            num[k] += w * p[k];
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if !(den > 0.0) || !den.is_finite() {
        // Only reachable on the unshifted path when every weight underflows.
        return Err(Error::invalid(
            "alpha",
            "all consensus weights underflowed; enable stabilization",
        ));
    }
    Ok(num
        .iter()
        .zip(lo.iter().zip(&hi))
        .map(|(s, (l, h))| (s / den).clamp(*l, *h))
        .collect())
}

/// Index of the smallest cost; ties go to the lowest index.
pub fn argmin_index(costs: &[f64]) -> Result<usize> {
    if costs.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c.is_nan() {
            return Err(Error::NanCost { index: i });
        }
        if c < costs[best] {
            best = i;
        }
    }
    Ok(best)
}

/// The point with the smallest cost; ties go to the lowest index.
pub fn argmin_point(points: &[Vec<f64>], costs: &[f64]) -> Result<Vec<f64>> {
    if points.len() != costs.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: costs.len(),
        });
    }
    Ok(points[argmin_index(costs)?].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts1(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    /// `a + b` as an unevaluated pair `(s, e)` with `s + e` exact.
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    /// Extended-precision oracle: the shift `c − c_min`, its product with α,
    /// and the exponent are carried as double-double pairs, and the sums are
    /// compensated.
    fn oracle(points: &[Vec<f64>], costs: &[f64], alpha: f64) -> Vec<f64> {
        let cmin = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let dim = points[0].len();
        let mut num = vec![(0.0, 0.0); dim];
        let mut den = (0.0, 0.0);
        let add = |acc: (f64, f64), v: f64| {
            let (s, e) = two_sum(acc.0, v);
            (s, acc.1 + e)
        };
        for (p, &c) in points.iter().zip(costs) {
            let (dh, dl) = two_sum(c, -cmin);
            let ph = alpha * dh;
            let pl = alpha.mul_add(dh, -ph) + alpha * dl;
            // exp(−(ph + pl)) ≈ exp(−ph)·(1 − pl)
            let w = (-ph).exp() * (1.0 - pl);
            den = add(den, w);
            for k in 0..dim {
                let prod = w * p[k];
                let err = w.mul_add(p[k], -prod);
                let (s, e) = two_sum(num[k].0, prod);
                num[k] = (s, num[k].1 + e + err);
            }
        }
        let d = den.0 + den.1;
        num.iter().map(|(s, e)| (s + e) / d).collect()
    }

    #[test]
    fn zero_alpha_gives_arithmetic_mean() {
        let p = ConsensusParams::new(0.0);
        let c = weighted_consensus(&pts1(&[0.0, 2.0]), &[7.0, -3.0], &p).unwrap();
        assert_eq!(c, vec![1.0]);
    }

    #[test]
    fn huge_alpha_selects_argmin() {
        let p = ConsensusParams::new(1e8);
        let c = weighted_consensus(&pts1(&[0.0, 1.0, 2.0]), &[3.0, 1.0, 2.0], &p).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn large_alpha_matches_extended_precision_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(42);
        for _ in 0..200 {
            let n = 50;
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect())
                .collect();
            // Costs clustered near the minimum so many weights matter.
            let costs: Vec<f64> = (0..n)
                .map(|_| rng.random_range(0.0..40.0) * rng.random_range(0.0f64..1.0).powi(6))
                .collect();
            let alpha = 5e4;
            let got = weighted_consensus(&pts, &costs, &ConsensusParams::new(alpha)).unwrap();
            let want = oracle(&pts, &costs, alpha);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-10 * w.abs().max(1.0), "{g} vs {w}");
            }
        }
    }

    #[test]
    fn errors_on_empty_and_nan() {
        let p = ConsensusParams::new(1.0);
        assert!(matches!(
            weighted_consensus(&[], &[], &p),
            Err(Error::EmptyEnsemble)
        ));
        assert!(matches!(
            weighted_consensus(&pts1(&[0.0, 1.0]), &[0.0, f64::NAN], &p),
            Err(Error::NanCost { index: 1 })
        ));
        assert!(matches!(argmin_index(&[]), Err(Error::EmptyEnsemble)));
    }

    #[test]
    fn naive_path_reports_underflow() {
        let p = ConsensusParams {
            alpha: 50.0,
            stabilized: false,
        };
        assert!(weighted_consensus(&pts1(&[0.0, 1.0]), &[100.0, 100.0], &p).is_err());
    }

    #[test]
    fn switch_examples() {
        let p = MemorySwitchParams {
            beta: 3e3,
            nu: 50.0,
        };
        assert_eq!(memory_switch(1.5, 1.5, &p), 1.0);
        assert_eq!(memory_switch(0.0, 0.1, &p), 2.0);
        assert_eq!(memory_switch(0.1, 0.0, &p), 0.0);
    }

    #[test]
    fn argmin_examples() {
        let pts = pts1(&[10.0, 11.0, 12.0]);
        assert_eq!(argmin_point(&pts, &[5.0, 3.0, 4.0]).unwrap(), vec![11.0]);
        assert_eq!(argmin_index(&[2.0, 2.0]).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn argmin_matches_scan(costs in proptest::collection::vec(-5i32..5, 100)) {
            let costs: Vec<f64> = costs.into_iter().map(f64::from).collect();
            let mut best = 0;
            for i in 1..costs.len() {
                if costs[i] < costs[best] {
                    best = i;
                }
            }
            prop_assert_eq!(argmin_index(&costs).unwrap(), best);
        }

        #[test]
        fn shift_invariance(
            xs in proptest::collection::vec(-3.0f64..3.0, 1..40),
            seed_costs in proptest::collection::vec(0.0f64..10.0, 40),
            alpha in 0.0f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            let costs = &seed_costs[..xs.len()];
            let moved: Vec<f64> = costs.iter().map(|c| c + shift).collect();
            let p = ConsensusParams::new(alpha);
            let a = weighted_consensus(&pts1(&xs), costs, &p).unwrap();
            let b = weighted_consensus(&pts1(&xs), &moved, &p).unwrap();
            prop_assert!((a[0] - b[0]).abs() <= 1e-12 * a[0].abs().max(1.0));
        }

        #[test]
        fn switch_is_antisymmetric_and_bounded(a in -1e3f64..1e3, b in -1e3f64..1e3, beta in 1e-3f64..1e4) {
            let p = MemorySwitchParams { beta, nu: 1.0 };
            let s = memory_switch(a, b, &p);
            let t = memory_switch(b, a, &p);
            prop_assert_eq!(s + t, 2.0);
            prop_assert!((0.0..=2.0).contains(&s));
        }

        #[test]
        fn switch_is_monotone(a in -10.0f64..10.0, d1 in -1.0f64..1.0, d2 in -1.0f64..1.0) {
            let p = MemorySwitchParams { beta: 3.0, nu: 1.0 };
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(memory_switch(a, a + lo, &p) <= memory_switch(a, a + hi, &p));
        }
    }
}
