//! Finite-support laws with exact convolution.

use crate::channel::SUM_TOL;
use crate::error::{Error, Result};

/// Atoms closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Default cap on the number of atoms produced by a convolution.
pub const DEFAULT_SUPPORT_CAP: usize = 10_000_000;

/// Scalar law on finitely many reals plus an optional mass at −∞.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    neg_inf: f64,
}

/// Moments of an exponentially tilted law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedMoments {
    /// log E[e^{λZ}], including the −∞ mass in the normalization.
    pub cgf: f64,
    pub mean: f64,
    pub var: f64,
    /// E|Z − mean|³ under the tilted law.
    pub abs3: f64,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::with_neg_inf(atoms, probs, 0.0)
    }

    /// Atoms equal to −∞ are folded into the −∞ mass.
    pub fn with_neg_inf(atoms: Vec<f64>, probs: Vec<f64>, neg_inf: f64) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::DimensionMismatch { expected: atoms.len(), got: probs.len() });
        }
        if !(neg_inf.is_finite() && neg_inf >= 0.0) {
            return Err(Error::InvalidDistribution(format!("-inf mass {neg_inf}")));
        }
        let mut total = neg_inf;
        let mut neg = neg_inf;
        let mut pairs = Vec::with_capacity(atoms.len());
        for (&a, &p) in atoms.iter().zip(&probs) {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidDistribution(format!("probability {p}")));
            }
            total += p;
            if a == f64::NEG_INFINITY {
                neg += p;
            } else if a.is_finite() {
                if p > 0.0 {
                    pairs.push((a, p));
                }
            } else {
                return Err(Error::InvalidDistribution(format!("atom {a}")));
            }
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        if pairs.is_empty() && neg == 0.0 {
            return Err(Error::EmptySupport);
        }
        Ok(Self::from_pairs(pairs, neg))
    }

    /// Point mass at zero.
    pub fn delta_zero() -> Self {
        Self { atoms: vec![0.0], probs: vec![1.0], neg_inf: 0.0 }
    }

    pub(crate) fn from_pairs(mut pairs: Vec<(f64, f64)>, neg_inf: f64) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut anchor = f64::NAN;
        for (a, p) in pairs {
            if !atoms.is_empty() && a - anchor <= MERGE_TOL {
                *probs.last_mut().unwrap() += p;
            } else {
                anchor = a;
                atoms.push(a);
                probs.push(p);
            }
        }
        Self { atoms, probs, neg_inf }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn neg_inf_mass(&self) -> f64 {
        self.neg_inf
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn finite_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn max_atom(&self) -> Option<f64> {
        self.atoms.last().copied()
    }

    /// Mean and variance of the law conditioned on being finite.
    pub fn finite_mean_var(&self) -> Option<(f64, f64)> {
        let m = self.finite_mass();
        if m == 0.0 {
            return None;
        }
        let mean = self.atoms.iter().zip(&self.probs).map(|(a, p)| a * p).sum::<f64>() / m;
        let var = self.atoms.iter().zip(&self.probs).map(|(a, p)| p * (a - mean).powi(2)).sum::<f64>() / m;
        Some((mean, var))
    }

    /// Law of X + Y for independent X ~ self, Y ~ other.
    pub fn convolve(&self, other: &Self, cap: usize) -> Result<Self> {
        let size = self.atoms.len().saturating_mul(other.atoms.len());
        if size > cap {
            return Err(Error::SupportExplosion { size, cap });
        }
        let mut pairs = Vec::with_capacity(size);
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            for (&b, &r) in other.atoms.iter().zip(&other.probs) {
                pairs.push((a + b, p * r));
            }
        }
        let neg = self.neg_inf + other.neg_inf - self.neg_inf * other.neg_inf;
        Ok(Self::from_pairs(pairs, neg))
    }

    /// Law of the sum of `n` independent copies (n = 0 gives the point mass at zero).
    pub fn power(&self, n: usize, cap: usize) -> Result<Self> {
        let mut acc = Self::delta_zero();
        for _ in 0..n {
            acc = acc.convolve(self, cap)?;
        }
        Ok(acc)
    }

    /// Pr{Z ≥ t − tol}; the −∞ mass never counts.
    pub fn tail_ge(&self, t: f64, tol: f64) -> f64 {
        let start = self.atoms.partition_point(|&a| a < t - tol);
        self.probs[start..].iter().sum()
    }

    /// Pr{X + Y ≥ t − tol} for independent X ~ self, Y ~ other, without forming the sum.
    pub fn sum_tail_ge(&self, other: &Self, t: f64, tol: f64) -> f64 {
        let mut suffix = vec![0.0; other.probs.len() + 1];
        for i in (0..other.probs.len()).rev() {
            suffix[i] = suffix[i + 1] + other.probs[i];
        }
        let mut total = 0.0;
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            let start = other.atoms.partition_point(|&b| b < t - tol - a);
            total += p * suffix[start];
        }
        total
    }

    /// Cumulant and moments of the law tilted by e^{λz}. The −∞ mass has
    /// zero weight under the tilt for λ > 0 but stays in the normalization.
    pub fn tilted(&self, lambda: f64) -> TiltedMoments {
        let shift = self.atoms.iter().map(|&a| lambda * a).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> =
            self.atoms.iter().zip(&self.probs).map(|(&a, &p)| p * (lambda * a - shift).exp()).collect();
        let z: f64 = weights.iter().sum();
        let mean = weights.iter().zip(&self.atoms).map(|(w, a)| w * a).sum::<f64>() / z;
        let mut var = 0.0;
        let mut abs3 = 0.0;
        for (w, a) in weights.iter().zip(&self.atoms) {
            let d = a - mean;
            var += w * d * d;
            abs3 += w * (d * d * d).abs();
        }
        TiltedMoments { cgf: z.ln() + shift, mean, var: var / z, abs3: abs3 / z }
    }
}

/// Law on finitely many points of ℝ².
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw2 {
    atoms: Vec<[f64; 2]>,
    probs: Vec<f64>,
}

impl DiscreteLaw2 {
    pub fn new(atoms: Vec<[f64; 2]>, probs: Vec<f64>) -> Result<Self> {
        if atoms.len() != probs.len() {
            return Err(Error::DimensionMismatch { expected: atoms.len(), got: probs.len() });
        }
        let mut total = 0.0;
        let mut pairs = Vec::with_capacity(atoms.len());
        for (&a, &p) in atoms.iter().zip(&probs) {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidDistribution(format!("probability {p}")));
            }
            if !(a[0].is_finite() && a[1].is_finite()) {
                return Err(Error::InvalidDistribution(format!("atom {a:?}")));
            }
            total += p;
            if p > 0.0 {
                pairs.push((a, p));
            }
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        if pairs.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn delta_zero() -> Self {
        Self { atoms: vec![[0.0, 0.0]], probs: vec![1.0] }
    }

    pub(crate) fn from_pairs(mut pairs: Vec<([f64; 2], f64)>) -> Self {
        // Cluster on the first coordinate, then merge within each cluster on the second.
        pairs.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
        let mut atoms = Vec::with_capacity(pairs.len());
        let mut probs = Vec::with_capacity(pairs.len());
        let mut i = 0;
        while i < pairs.len() {
            let anchor = pairs[i].0[0];
            let mut j = i + 1;
            while j < pairs.len() && pairs[j].0[0] - anchor <= MERGE_TOL {
                j += 1;
            }
            let group = &mut pairs[i..j];
            group.sort_by(|a, b| a.0[1].total_cmp(&b.0[1]));
            let mut second = f64::NAN;
            let mut started = false;
            for &(a, p) in group.iter() {
                if started && a[1] - second <= MERGE_TOL {
                    *probs.last_mut().unwrap() += p;
                } else {
                    second = a[1];
                    started = true;
                    atoms.push([anchor, a[1]]);
                    probs.push(p);
                }
            }
            i = j;
        }
        Self { atoms, probs }
    }

    pub fn atoms(&self) -> &[[f64; 2]] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (a, p) in self.atoms.iter().zip(&self.probs) {
            m[0] += p * a[0];
            m[1] += p * a[1];
        }
        m
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let m = self.mean();
        let mut c = [[0.0; 2]; 2];
        for (a, p) in self.atoms.iter().zip(&self.probs) {
            let d = [a[0] - m[0], a[1] - m[1]];
            c[0][0] += p * d[0] * d[0];
            c[0][1] += p * d[0] * d[1];
            c[1][1] += p * d[1] * d[1];
        }
        c[1][0] = c[0][1];
        c
    }

    /// Largest Euclidean distance between two atoms: a bound on the norm
    /// of the symmetrized variable A − A'.
    pub fn max_pairwise_distance(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        best
    }

    pub fn convolve(&self, other: &Self, cap: usize) -> Result<Self> {
        let size = self.atoms.len().saturating_mul(other.atoms.len());
        if size > cap {
            return Err(Error::SupportExplosion { size, cap });
        }
        let mut pairs = Vec::with_capacity(size);
        for (a, &p) in self.atoms.iter().zip(&self.probs) {
            for (b, &r) in other.atoms.iter().zip(&other.probs) {
                pairs.push(([a[0] + b[0], a[1] + b[1]], p * r));
            }
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn power(&self, n: usize, cap: usize) -> Result<Self> {
        let mut acc = Self::delta_zero();
        for _ in 0..n {
            acc = acc.convolve(self, cap)?;
        }
        Ok(acc)
    }

    /// Pr{A ∈ [t₁ − tol, ∞) × [t₂ − tol, ∞)}.
    pub fn orthant_ge(&self, t: [f64; 2], tol: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.probs)
            .filter(|(a, _)| a[0] >= t[0] - tol && a[1] >= t[1] - tol)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn min_eigenvalue(c: &[[f64; 2]; 2]) -> f64 {
    let tr = c[0][0] + c[1][1];
    let half_gap = (0.25 * (c[0][0] - c[1][1]).powi(2) + c[0][1] * c[0][1]).sqrt();
    0.5 * tr - half_gap
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fair() -> DiscreteLaw {
        DiscreteLaw::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DiscreteLaw::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteLaw::new(vec![f64::INFINITY], vec![1.0]).is_err());
        let l = DiscreteLaw::new(vec![f64::NEG_INFINITY, 2.0], vec![0.25, 0.75]).unwrap();
        assert_eq!(l.neg_inf_mass(), 0.25);
        assert_eq!(l.atoms(), &[2.0]);
    }

    #[test]
    fn merges_near_duplicates() {
        let l = DiscreteLaw::new(vec![1.0, 1.0 + 5e-13, 2.0], vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn convolution_of_fair_coins() {
        let s = fair().power(3, DEFAULT_SUPPORT_CAP).unwrap();
        assert_eq!(s.atoms(), &[-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(s.probs(), &[0.125, 0.375, 0.375, 0.125]);
        assert_eq!(s.tail_ge(1.0, 1e-9), 0.5);
    }

    #[test]
    fn neg_inf_absorbs() {
        let l = DiscreteLaw::with_neg_inf(vec![0.0], vec![0.7], 0.3).unwrap();
        let s = l.power(2, DEFAULT_SUPPORT_CAP).unwrap();
        assert!((s.neg_inf_mass() - 0.51).abs() < 1e-15);
        assert!((s.finite_mass() - 0.49).abs() < 1e-15);
    }

    #[test]
    fn sum_tail_matches_materialized() {
        let a = DiscreteLaw::new(vec![-1.0, 0.5, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        let b = DiscreteLaw::with_neg_inf(vec![-0.5, 1.0], vec![0.4, 0.4], 0.2).unwrap();
        let s = a.convolve(&b, DEFAULT_SUPPORT_CAP).unwrap();
        for t in [-2.0, -0.5, 0.0, 1.5, 3.0] {
            assert!((s.tail_ge(t, 1e-9) - a.sum_tail_ge(&b, t, 1e-9)).abs() < 1e-15);
        }
    }

    #[test]
    fn tilted_moments_fair() {
        let m = fair().tilted(0.0);
        assert!(m.cgf.abs() < 1e-15 && m.mean.abs() < 1e-15 && (m.var - 1.0).abs() < 1e-15);
        let lam: f64 = 0.3;
        let m = fair().tilted(lam);
        assert!((m.cgf - lam.cosh().ln()).abs() < 1e-14);
        assert!((m.mean - lam.tanh()).abs() < 1e-14);
    }

    #[test]
    fn product_orthant() {
        let atoms = vec![[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
        let l = DiscreteLaw2::new(atoms, vec![0.25; 4]).unwrap();
        let s = l.power(2, DEFAULT_SUPPORT_CAP).unwrap();
        assert!((s.orthant_ge([0.0, 0.0], 1e-9) - 9.0 / 16.0).abs() < 1e-15);
        assert!((l.max_pairwise_distance() - 8f64.sqrt()).abs() < 1e-15);
        let c = l.covariance();
        assert_eq!(c, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(min_eigenvalue(&c), 1.0);
    }

    #[test]
    fn eigenvalue_of_correlated_matrix() {
        let c = [[2.0, 1.0], [1.0, 2.0]];
        assert!((min_eigenvalue(&c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cap_enforced() {
        let l = DiscreteLaw::new((0..10).map(|i| i as f64 * 0.1).collect(), vec![0.1; 10]).unwrap();
        assert!(matches!(l.convolve(&l, 50), Err(Error::SupportExplosion { .. })));
    }
}
