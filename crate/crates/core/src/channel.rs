//! Channels, input distributions, support sets and singularity classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance used when ingesting probability vectors.
pub const SUM_TOL: f64 = 1e-12;
/// Positive entries below this are rejected at ingestion.
pub const MIN_POSITIVE: f64 = 1e-12;
/// Relative tolerance for the equality W(y|x) = W(y|z) in singularity tests.
pub const EQ_REL_TOL: f64 = 1e-12;

/// A discrete memoryless channel, stored row-major: `w[x * num_outputs + y] = W(y|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Channel {
    num_inputs: usize,
    num_outputs: usize,
    w: Vec<f64>,
}

impl Channel {
    /// Validates a raw matrix and builds a channel. Rows within 1e-12 of
    /// summing to one are renormalized; anything else is rejected.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let num_outputs = rows[0].len();
        let num_inputs = rows.len();
        let mut w = Vec::with_capacity(num_inputs * num_outputs);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != num_outputs {
                return Err(Error::RaggedMatrix { row: x, got: row.len(), expected: num_outputs });
            }
            let normalized = normalize_row(row, x)?;
            w.extend(normalized);
        }
        Ok(Self { num_inputs, num_outputs, w })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// W(y|x).
    #[inline]
    pub fn w(&self, x: usize, y: usize) -> f64 {
        self.w[x * self.num_outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.w[x * self.num_outputs..(x + 1) * self.num_outputs]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_inputs).map(|x| self.row(x).to_vec()).collect()
    }

    /// True when every entry is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.w.iter().all(|&v| v > 0.0)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel with erasure probability `eps`; output 2 is the erasure.
    pub fn bec(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    /// Noiseless channel on `k` symbols.
    pub fn identity(k: usize) -> Result<Self> {
        Self::new((0..k).map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect())
    }

    /// Noisy typewriter on `k` symbols: x goes to x or x+1 (mod k) with probability 1/2 each.
    pub fn typewriter(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument("typewriter needs k >= 2".into()));
        }
        Self::new(
            (0..k)
                .map(|x| {
                    let mut row = vec![0.0; k];
                    row[x] = 0.5;
                    row[(x + 1) % k] = 0.5;
                    row
                })
                .collect(),
        )
    }

    /// Output marginal Σ_x Q(x) W(y|x).
    pub fn output_distribution(&self, q: &InputDistribution) -> Vec<f64> {
        let mut out = vec![0.0; self.num_outputs];
        for x in 0..self.num_inputs {
            let qx = q.p(x);
            if qx > 0.0 {
                for (y, o) in out.iter_mut().enumerate() {
                    *o += qx * self.w(x, y);
                }
            }
        }
        out
    }

    pub fn check_input(&self, q: &InputDistribution) -> Result<()> {
        if q.len() != self.num_inputs {
            return Err(Error::DimensionMismatch { expected: self.num_inputs, got: q.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for Channel {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Channel::new(rows)
    }
}

impl From<Channel> for Vec<Vec<f64>> {
    fn from(c: Channel) -> Self {
        c.rows()
    }
}

fn normalize_row(row: &[f64], index: usize) -> Result<Vec<f64>> {
    let mut sum = 0.0;
    for (col, &v) in row.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: index, col });
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry { row: index, col, value: v });
        }
        if v > 0.0 && v < MIN_POSITIVE {
            return Err(Error::TinyEntry { row: index, col, value: v });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::RowSumOutOfTolerance { row: index, sum });
    }
    Ok(row.iter().map(|v| v / sum).collect())
}

/// A probability vector over the channel inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution {
    q: Vec<f64>,
}

impl InputDistribution {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut sum = 0.0;
        for (i, &v) in q.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!("entry {i} = {v}")));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(Self { q: q.iter().map(|v| v / sum).collect() })
    }

    /// Builds from a point of the simplex produced by internal arithmetic,
    /// clamping round-off negatives and renormalizing.
    pub(crate) fn from_simplex(q: &[f64]) -> Self {
        let clamped: Vec<f64> = q.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        let s: f64 = clamped.iter().sum();
        Self { q: clamped.iter().map(|v| v / s).collect() }
    }

    pub fn uniform(k: usize) -> Self {
        Self { q: vec![1.0 / k as f64; k] }
    }

    #[inline]
    pub fn p(&self, x: usize) -> f64 {
        self.q[x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.q.iter().zip(&other.q).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;
    fn try_from(q: Vec<f64>) -> Result<Self> {
        InputDistribution::new(q)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(q: InputDistribution) -> Self {
        q.q
    }
}

/// Joint supports of Q × W and Q × W × Q.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSets {
    /// Pairs (x, y) with Q(x) W(y|x) > 0.
    pub s_q: Vec<(usize, usize)>,
    /// Triples (x, y, z) with Q(x) W(y|x) Q(z) W(y|z) > 0.
    pub s_q_tilde: Vec<(usize, usize, usize)>,
    /// For each output y, the inputs x with W(y|x) > 0.
    pub x_of_y: Vec<Vec<usize>>,
}

pub fn support_sets(w: &Channel, q: &InputDistribution) -> Result<SupportSets> {
    w.check_input(q)?;
    let x_of_y: Vec<Vec<usize>> = (0..w.num_outputs())
        .map(|y| (0..w.num_inputs()).filter(|&x| w.w(x, y) > 0.0).collect())
        .collect();
    let mut s_q = Vec::new();
    for x in 0..w.num_inputs() {
        if q.p(x) == 0.0 {
            continue;
        }
        for y in 0..w.num_outputs() {
            if w.w(x, y) > 0.0 {
                s_q.push((x, y));
            }
        }
    }
    let mut s_q_tilde = Vec::new();
    for &(x, y) in &s_q {
        for &z in &x_of_y[y] {
            if q.p(z) > 0.0 {
                s_q_tilde.push((x, y, z));
            }
        }
    }
    Ok(SupportSets { s_q, s_q_tilde, x_of_y })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    Singular,
    Nonsingular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityVerdict {
    pub kind: SingularityKind,
    /// A triple (x, y, z) in the joint support with W(y|x) != W(y|z); present iff nonsingular.
    pub witness: Option<(usize, usize, usize)>,
    /// Set by the rate-level classification: the verdict only covers the supplied maximizers.
    pub list_relative: bool,
}

impl SingularityVerdict {
    pub fn is_singular(&self) -> bool {
        self.kind == SingularityKind::Singular
    }
}

pub(crate) fn approx_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_REL_TOL * a.abs().max(b.abs())
}

pub fn classify_pair(w: &Channel, q: &InputDistribution) -> Result<SingularityVerdict> {
    let sets = support_sets(w, q)?;
    let witness = sets
        .s_q_tilde
        .iter()
        .copied()
        .find(|&(x, y, z)| !approx_equal(w.w(x, y), w.w(z, y)));
    Ok(SingularityVerdict {
        kind: if witness.is_some() { SingularityKind::Nonsingular } else { SingularityKind::Singular },
        witness,
        list_relative: false,
    })
}

/// Rate-level verdict: nonsingular if any supplied maximizer forms a nonsingular pair.
/// The rate itself only identifies which list the caller produced.
pub fn classify_channel_at_rate(
    w: &Channel,
    _rate: f64,
    maximizers: &[InputDistribution],
) -> Result<SingularityVerdict> {
    if maximizers.is_empty() {
        return Err(Error::EmptyMaximizerList);
    }
    for q in maximizers {
        let v = classify_pair(w, q)?;
        if !v.is_singular() {
            return Ok(SingularityVerdict { list_relative: true, ..v });
        }
    }
    Ok(SingularityVerdict { kind: SingularityKind::Singular, witness: None, list_relative: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_examples() {
        assert!(Channel::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).is_ok());
        assert!(matches!(
            Channel::new(vec![vec![0.5, 0.6], vec![0.4, 0.4]]),
            Err(Error::RowSumOutOfTolerance { row: 0, .. })
        ));
        let c = Channel::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.5, 0.5]]).unwrap();
        assert_eq!((c.num_inputs(), c.num_outputs()), (2, 3));
        assert!(matches!(Channel::new(vec![vec![-0.1, 1.1]]), Err(Error::NegativeEntry { .. })));
        assert_eq!(Channel::new(vec![]), Err(Error::EmptyAlphabet));
        assert!(matches!(Channel::new(vec![vec![1.0 - 1e-13, 1e-13]]), Err(Error::TinyEntry { .. })));
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let c = Channel::new(vec![vec![0.5 + 4e-13, 0.5]]).unwrap();
        let s: f64 = c.row(0).iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_sizes() {
        let s = support_sets(&Channel::bsc(0.1).unwrap(), &InputDistribution::uniform(2)).unwrap();
        assert_eq!(s.s_q.len(), 4);
        assert_eq!(s.s_q_tilde.len(), 8);
        let s = support_sets(&Channel::identity(2).unwrap(), &InputDistribution::uniform(2)).unwrap();
        assert_eq!(s.s_q, vec![(0, 0), (1, 1)]);
        assert_eq!(s.s_q_tilde, vec![(0, 0, 0), (1, 1, 1)]);
        let q = InputDistribution::new(vec![1.0, 0.0]).unwrap();
        let s = support_sets(&Channel::bsc(0.2).unwrap(), &q).unwrap();
        assert!(s.s_q_tilde.iter().all(|&(x, _, z)| x == 0 && z == 0));
    }

    #[test]
    fn support_symmetry() {
        let w = Channel::new(vec![vec![0.2, 0.8, 0.0], vec![0.0, 0.3, 0.7], vec![0.5, 0.0, 0.5]]).unwrap();
        let q = InputDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let s = support_sets(&w, &q).unwrap();
        for &(x, y, z) in &s.s_q_tilde {
            assert!(s.s_q_tilde.contains(&(z, y, x)));
        }
    }

    #[test]
    fn classification_examples() {
        let u = InputDistribution::uniform(2);
        assert!(classify_pair(&Channel::bec(0.5).unwrap(), &u).unwrap().is_singular());
        let v = classify_pair(&Channel::bsc(0.1).unwrap(), &u).unwrap();
        assert_eq!(v.kind, SingularityKind::Nonsingular);
        assert_eq!(v.witness, Some((0, 0, 1)));
        assert!(classify_pair(&Channel::identity(2).unwrap(), &u).unwrap().is_singular());
    }

    #[test]
    fn dimension_mismatch() {
        let r = classify_pair(&Channel::bsc(0.1).unwrap(), &InputDistribution::uniform(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rate_classification() {
        let w = Channel::bsc(0.1).unwrap();
        assert_eq!(classify_channel_at_rate(&w, 0.2, &[]), Err(Error::EmptyMaximizerList));
        let v = classify_channel_at_rate(&w, 0.2, &[InputDistribution::uniform(2)]).unwrap();
        assert!(!v.is_singular() && v.list_relative);
    }

    #[test]
    fn typewriter_rows() {
        let w = Channel::typewriter(3).unwrap();
        assert_eq!(w.row(2), &[0.5, 0.0, 0.5]);
    }
}
