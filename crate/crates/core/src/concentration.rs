//! Tilted Berry–Esseen tail bounds for i.i.d. sums and exact convolution tails.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::law::{min_eigenvalue, DiscreteLaw, DiscreteLaw2, DEFAULT_SUPPORT_CAP};

/// Sums within this distance below a threshold count as reaching it.
pub const TIE_TOL: f64 = 1e-9;
/// Berry–Esseen constant used unless configured otherwise.
pub const DEFAULT_BERRY_ESSEEN_C: f64 = 0.5;

/// Solves Λ′(η) = q for a tilted-moment function whose mean increases in λ.
pub(crate) fn solve_tilt<F>(mean_at: F, q: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut hi = 1.0;
    while mean_at(hi) < q {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::OptimizerDidNotConverge(format!("no tilt reaches mean {q}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = mean_at(mid);
        if (m - q).abs() <= 1e-13 * (1.0 + q.abs()) {
            return Ok(mid);
        }
        if m < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pre-factor constant 2·c·m₃/σ³ + 1/(η√(2πσ²)).
pub(crate) fn prefactor_constant(berry_esseen_c: f64, m3: f64, var: f64, eta: f64) -> f64 {
    2.0 * berry_esseen_c * m3 / var.powf(1.5) + 1.0 / (eta * (2.0 * PI * var).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarTailBound {
    pub threshold: f64,
    pub eta: f64,
    /// Λ*(q) = qη − Λ(η).
    pub rate: f64,
    pub m3: f64,
    pub var: f64,
    pub tilted_mean: f64,
    pub berry_esseen_c: f64,
}

impl ScalarTailBound {
    pub fn constant(&self) -> f64 {
        prefactor_constant(self.berry_esseen_c, self.m3, self.var, self.eta)
    }

    /// e^{−N·rate} N^{−1/2} (2c·m₃/σ³ + 1/(η√(2πσ²))).
    pub fn bound(&self, n: usize) -> f64 {
        let n = n as f64;
        (-n * self.rate - 0.5 * n.ln()).exp() * self.constant()
    }
}

pub fn scalar_tail_bound(law: &DiscreteLaw, q: f64, berry_esseen_c: f64) -> Result<ScalarTailBound> {
    let (mean, var) = law.finite_mean_var().ok_or(Error::EmptySupport)?;
    if law.len() < 2 || var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let top = law.max_atom().expect("non-empty law");
    if !(q > mean && q < top) {
        return Err(Error::ThresholdOutOfRange { q, lo: mean, hi: top });
    }
    if !(berry_esseen_c > 0.0) {
        return Err(Error::InvalidArgument(format!("Berry-Esseen constant {berry_esseen_c}")));
    }
    let eta = solve_tilt(|l| law.tilted(l).mean, q)?;
    let m = law.tilted(eta);
    Ok(ScalarTailBound {
        threshold: q,
        eta,
        rate: q * eta - m.cgf,
        m3: m.abs3,
        var: m.var,
        tilted_mean: m.mean,
        berry_esseen_c,
    })
}

/// Pr{(1/N) Σ Zᵢ ≥ q}; −∞ summands never exceed.
pub fn exact_tail(law: &DiscreteLaw, n: usize, q: f64) -> Result<f64> {
    exact_tail_with_cap(law, n, q, DEFAULT_SUPPORT_CAP)
}

pub fn exact_tail_with_cap(law: &DiscreteLaw, n: usize, q: f64, cap: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    Ok(law.power(n, cap)?.tail_ge(n as f64 * q, TIE_TOL))
}

/// Exact tails for every N in 1..=n_max, sharing the convolution chain.
pub fn exact_tails(law: &DiscreteLaw, n_max: usize, q: f64) -> Result<Vec<f64>> {
    let mut acc = DiscreteLaw::delta_zero();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        acc = acc.convolve(law, DEFAULT_SUPPORT_CAP)?;
        out.push(acc.tail_ge(n as f64 * q, TIE_TOL));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorTailBound {
    pub lambda_min: f64,
    /// Support radius of the symmetrized law.
    pub k: f64,
    pub v_star: [f64; 2],
    pub c: f64,
}

impl VectorTailBound {
    /// (c / (2 λ_min N)) (k² + 2/v₁² + 2/v₂²).
    pub fn value(&self, n: usize) -> f64 {
        let [v1, v2] = self.v_star;
        self.c / (2.0 * self.lambda_min * n as f64) * (self.k * self.k + 2.0 / (v1 * v1) + 2.0 / (v2 * v2))
    }
}

pub fn vector_tail_bound(law: &DiscreteLaw2, v_star: [f64; 2], c: f64) -> Result<VectorTailBound> {
    if !(c > 0.0) {
        return Err(Error::EsseenConstantNonpositive(c));
    }
    if !(v_star[0] > 0.0 && v_star[1] > 0.0) {
        return Err(Error::InvalidArgument(format!("v* must be positive, got {v_star:?}")));
    }
    let m = law.mean();
    if m[0].abs() > 1e-10 || m[1].abs() > 1e-10 {
        return Err(Error::NotCentered(m[0], m[1]));
    }
    let lambda_min = min_eigenvalue(&law.covariance());
    if !(lambda_min > 1e-12) {
        return Err(Error::SingularCovariance(lambda_min));
    }
    Ok(VectorTailBound { lambda_min, k: law.max_pairwise_distance(), v_star, c })
}

/// Pr{(1/N) Σ Aᵢ ∈ [b₁, ∞) × [b₂, ∞)}.
pub fn exact_orthant_tail(law: &DiscreteLaw2, n: usize, b: [f64; 2]) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(law.power(n, DEFAULT_SUPPORT_CAP)?.orthant_ge([nf * b[0], nf * b[1]], TIE_TOL))
}
