//! Tilted measures, cumulant-generating functions and numerical identity checks.

use crate::channel::{approx_equal, classify_pair, support_sets, Channel, InputDistribution};
use crate::error::{Error, Result};
use crate::exponents::{eo, er_q, rho_star};
use crate::law::{min_eigenvalue, DiscreteLaw, DiscreteLaw2, TiltedMoments};

/// Per-output Gallager sums for one (Q, W, ρ).
#[derive(Debug, Clone)]
pub(crate) struct GallagerTerms {
    /// g_y = Σ_x Q(x) W(y|x)^{1/(1+ρ)}.
    pub g: Vec<f64>,
    /// S = Σ_y g_y^{1+ρ}; E_o = −log S.
    pub sum: f64,
}

pub(crate) fn gallager_terms(w: &Channel, q: &InputDistribution, rho: f64) -> GallagerTerms {
    let s = 1.0 / (1.0 + rho);
    let mut g = vec![0.0; w.num_outputs()];
    for x in 0..w.num_inputs() {
        let qx = q.p(x);
        if qx == 0.0 {
            continue;
        }
        for (y, gy) in g.iter_mut().enumerate() {
            let v = w.w(x, y);
            if v > 0.0 {
                *gy += qx * v.powf(s);
            }
        }
    }
    let sum = g.iter().filter(|&&v| v > 0.0).map(|v| v.powf(1.0 + rho)).sum();
    GallagerTerms { g, sum }
}

/// Σ P^ρ_{X,Y} log(P^ρ_{X|Y}/Q): the closed-form ρ-derivative of E_o.
pub(crate) fn eo_derivative_closed_form(w: &Channel, q: &InputDistribution, rho: f64) -> f64 {
    let t = gallager_terms(w, q, rho);
    let s = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for x in 0..w.num_inputs() {
        let qx = q.p(x);
        if qx == 0.0 {
            continue;
        }
        for y in 0..w.num_outputs() {
            let v = w.w(x, y);
            if v == 0.0 {
                continue;
            }
            let gy = t.g[y];
            let cond = qx * v.powf(s) / gy;
            let f = gy.powf(1.0 + rho) / t.sum;
            total += cond * f * (s * v.ln() - gy.ln());
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub x: usize,
    pub y: usize,
    /// Q(x) W(y|x).
    pub prob: f64,
    /// log f_ρ(y)/W(y|x).
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleTerm {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    /// P̃(x, y, z) = Q(x) W(y|x) Q(z) / P{S̃_Q}.
    pub prob: f64,
    /// [log W(y|x)/f_ρ(y), log W(y|z)/W(y|x)].
    pub value: [f64; 2],
}

/// Moments of the triple law tilted by e^{⟨v, A⟩}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorMoments {
    pub cgf: f64,
    pub grad: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// All tilted measures for one (Q, W, ρ).
#[derive(Debug, Clone)]
pub struct TiltedFamily {
    rho: f64,
    num_inputs: usize,
    num_outputs: usize,
    f_rho: Vec<f64>,
    p_x_given_y: Vec<f64>,
    p_xy: Vec<f64>,
    log_gallager_sum: f64,
    pairs: Vec<PairTerm>,
    triples: Vec<TripleTerm>,
    mass_s_tilde: f64,
}

impl TiltedFamily {
    pub fn new(w: &Channel, q: &InputDistribution, rho: f64) -> Result<Self> {
        w.check_input(q)?;
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho = {rho}")));
        }
        let sets = support_sets(w, q)?;
        if sets.s_q.is_empty() {
            return Err(Error::EmptySupport);
        }
        let (nx, ny) = (w.num_inputs(), w.num_outputs());
        let t = gallager_terms(w, q, rho);
        let s = 1.0 / (1.0 + rho);
        let f_rho: Vec<f64> =
            t.g.iter().map(|&gy| if gy > 0.0 { gy.powf(1.0 + rho) / t.sum } else { 0.0 }).collect();
        let mut p_x_given_y = vec![0.0; nx * ny];
        let mut p_xy = vec![0.0; nx * ny];
        for &(x, y) in &sets.s_q {
            let c = q.p(x) * w.w(x, y).powf(s) / t.g[y];
            p_x_given_y[x * ny + y] = c;
            p_xy[x * ny + y] = c * f_rho[y];
        }
        let pairs: Vec<PairTerm> = sets
            .s_q
            .iter()
            .map(|&(x, y)| PairTerm { x, y, prob: q.p(x) * w.w(x, y), value: (f_rho[y] / w.w(x, y)).ln() })
            .collect();
        let mass_s_tilde: f64 =
            sets.s_q_tilde.iter().map(|&(x, y, z)| q.p(x) * w.w(x, y) * q.p(z)).sum();
        let triples = sets
            .s_q_tilde
            .iter()
            .map(|&(x, y, z)| {
                let wx = w.w(x, y);
                let wz = w.w(z, y);
                // Equal entries give an exact zero second coordinate.
                let second = if approx_equal(wx, wz) { 0.0 } else { (wz / wx).ln() };
                TripleTerm {
                    x,
                    y,
                    z,
                    prob: q.p(x) * wx * q.p(z) / mass_s_tilde,
                    value: [(wx / f_rho[y]).ln(), second],
                }
            })
            .collect();
        Ok(Self {
            rho,
            num_inputs: nx,
            num_outputs: ny,
            f_rho,
            p_x_given_y,
            p_xy,
            log_gallager_sum: t.sum.ln(),
            pairs,
            triples,
            mass_s_tilde,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// ρ/(1+ρ).
    pub fn eta(&self) -> f64 {
        self.rho / (1.0 + self.rho)
    }

    /// [(1−ρ)/(1+ρ), 1/(1+ρ)].
    pub fn v_tilde(&self) -> [f64; 2] {
        [(1.0 - self.rho) / (1.0 + self.rho), 1.0 / (1.0 + self.rho)]
    }

    pub fn f_rho(&self) -> &[f64] {
        &self.f_rho
    }

    /// P_Y^ρ, which coincides with f_ρ.
    pub fn p_y_rho(&self) -> &[f64] {
        &self.f_rho
    }

    pub fn p_x_given_y(&self, x: usize, y: usize) -> f64 {
        self.p_x_given_y[x * self.num_outputs + y]
    }

    pub fn p_xy(&self, x: usize, y: usize) -> f64 {
        self.p_xy[x * self.num_outputs + y]
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn pairs(&self) -> &[PairTerm] {
        &self.pairs
    }

    pub fn triples(&self) -> &[TripleTerm] {
        &self.triples
    }

    pub fn mass_s_tilde(&self) -> f64 {
        self.mass_s_tilde
    }

    /// log Σ_y g_y^{1+ρ} = −E_o(ρ, Q).
    pub fn log_gallager_sum(&self) -> f64 {
        self.log_gallager_sum
    }

    /// Λ_ρ(λ) with mean, variance and third absolute central moment under P̃^{λ,ρ}.
    pub fn scalar_moments(&self, lambda: f64) -> TiltedMoments {
        let shift = self.pairs.iter().map(|p| lambda * p.value).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self.pairs.iter().map(|p| p.prob * (lambda * p.value - shift).exp()).collect();
        let z: f64 = weights.iter().sum();
        let mean = weights.iter().zip(&self.pairs).map(|(w, p)| w * p.value).sum::<f64>() / z;
        let mut var = 0.0;
        let mut abs3 = 0.0;
        for (w, p) in weights.iter().zip(&self.pairs) {
            let d = p.value - mean;
            var += w * d * d;
            abs3 += w * (d * d * d).abs();
        }
        TiltedMoments { cgf: z.ln() + shift, mean, var: var / z, abs3: abs3 / z }
    }

    pub fn lambda(&self, lambda: f64) -> f64 {
        self.scalar_moments(lambda).cgf
    }

    pub fn lambda_d1(&self, lambda: f64) -> f64 {
        self.scalar_moments(lambda).mean
    }

    pub fn lambda_d2(&self, lambda: f64) -> f64 {
        self.scalar_moments(lambda).var
    }

    /// Λ′_ρ(ρ/(1+ρ)).
    pub fn d_o(&self) -> f64 {
        self.lambda_d1(self.eta())
    }

    /// Law of log f_ρ(Y)/W(Y|X) under Q × W.
    pub fn pair_law(&self) -> DiscreteLaw {
        DiscreteLaw::from_pairs(self.pairs.iter().map(|p| (p.value, p.prob)).collect(), 0.0)
    }

    fn tilted_weights(&self, v: [f64; 2]) -> (Vec<f64>, f64, f64) {
        let expo = |t: &TripleTerm| v[0] * t.value[0] + v[1] * t.value[1];
        let shift = self.triples.iter().map(expo).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self.triples.iter().map(|t| t.prob * (expo(t) - shift).exp()).collect();
        let z = weights.iter().sum();
        (weights, z, shift)
    }

    /// Λ_{1,ρ}(v), its gradient, and the covariance of A under Q̃^{v,ρ}.
    pub fn vector_moments(&self, v: [f64; 2]) -> VectorMoments {
        let (weights, z, shift) = self.tilted_weights(v);
        let mut m = [0.0; 2];
        for (w, t) in weights.iter().zip(&self.triples) {
            m[0] += w * t.value[0];
            m[1] += w * t.value[1];
        }
        m[0] /= z;
        m[1] /= z;
        let mut c = [[0.0; 2]; 2];
        for (w, t) in weights.iter().zip(&self.triples) {
            let d = [t.value[0] - m[0], t.value[1] - m[1]];
            c[0][0] += w * d[0] * d[0];
            c[0][1] += w * d[0] * d[1];
            c[1][1] += w * d[1] * d[1];
        }
        for row in c.iter_mut() {
            for e in row.iter_mut() {
                *e /= z;
            }
        }
        c[1][0] = c[0][1];
        VectorMoments { cgf: z.ln() + shift, grad: m, cov: c }
    }

    pub fn lambda1(&self, v: [f64; 2]) -> f64 {
        self.vector_moments(v).cgf
    }

    pub fn lambda1_grad(&self, v: [f64; 2]) -> [f64; 2] {
        self.vector_moments(v).grad
    }

    pub fn cov_at(&self, v: [f64; 2]) -> [[f64; 2]; 2] {
        self.vector_moments(v).cov
    }

    /// Q̃^{v,ρ} as a law of A = [log W(Y|X)/f_ρ(Y), log W(Y|Z)/W(Y|X)].
    pub fn tilted_triple(&self, v: [f64; 2]) -> DiscreteLaw2 {
        let (weights, z, _) = self.tilted_weights(v);
        DiscreteLaw2::from_pairs(self.triples.iter().zip(&weights).map(|(t, w)| (t.value, w / z)).collect())
    }

    /// Λ_o(λ) = Λ_{1,ρ}([λ, 0]) with moments of the first coordinate under Q̃^{(λ,0),ρ}.
    pub fn lambda_o_moments(&self, lambda: f64) -> TiltedMoments {
        let (weights, z, shift) = self.tilted_weights([lambda, 0.0]);
        let mean = weights.iter().zip(&self.triples).map(|(w, t)| w * t.value[0]).sum::<f64>() / z;
        let mut var = 0.0;
        let mut abs3 = 0.0;
        for (w, t) in weights.iter().zip(&self.triples) {
            let d = t.value[0] - mean;
            var += w * d * d;
            abs3 += w * (d * d * d).abs();
        }
        TiltedMoments { cgf: z.ln() + shift, mean, var: var / z, abs3: abs3 / z }
    }

    pub fn lambda_o(&self, lambda: f64) -> f64 {
        self.lambda_o_moments(lambda).cgf
    }

    /// D(P^ρ_{X,Y} ‖ Q × W).
    pub fn divergence_from_product(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| {
                let joint = self.p_xy(p.x, p.y);
                if joint > 0.0 {
                    joint * (joint / p.prob).ln()
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Smallest eigenvalue of the covariance at v.
    pub fn min_cov_eigenvalue(&self, v: [f64; 2]) -> f64 {
        min_eigenvalue(&self.cov_at(v))
    }
}

/// E_F(r, Q) = D(P^{ρ*}_{X,Y} ‖ Q × W).
pub fn e_f(w: &Channel, q: &InputDistribution, r: f64) -> Result<f64> {
    let rho = rho_star(w, q, r)?;
    Ok(TiltedFamily::new(w, q, rho)?.divergence_from_product())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityResidual {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub rate: f64,
    pub rho_star: f64,
    pub singular: bool,
    pub rows: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(IdentityResidual::residual).fold(0.0, f64::max)
    }
}

/// Evaluates both sides of the tilting identities at ρ*(r).
pub fn verify_identities(w: &Channel, q: &InputDistribution, r: f64) -> Result<IdentityReport> {
    let rho = rho_star(w, q, r)?;
    let fam = TiltedFamily::new(w, q, rho)?;
    let eta = fam.eta();
    let scalar = fam.scalar_moments(eta);
    let (lam, d_o) = (scalar.cgf, scalar.mean);
    let e_f = fam.divergence_from_product();
    let d_o_direct: f64 = fam.pairs.iter().map(|p| fam.p_xy(p.x, p.y) * p.value).sum();
    let vt = fam.v_tilde();
    let vm = fam.vector_moments(vt);
    let singular = classify_pair(w, q)?.is_singular();
    let mut rows = vec![
        IdentityResidual { name: "cgf_at_eta", lhs: lam, rhs: fam.log_gallager_sum / (1.0 + rho) },
        IdentityResidual { name: "cgf_slope_at_eta", lhs: d_o, rhs: d_o_direct },
        IdentityResidual { name: "divergence_legendre", lhs: e_f, rhs: eta * d_o - lam },
        IdentityResidual { name: "rate_from_cgf", lhs: r, rhs: -d_o / (1.0 + rho) - lam },
        IdentityResidual { name: "divergence_equals_exponent", lhs: e_f, rhs: er_q(w, q, r)?.e_r_q },
        IdentityResidual { name: "vector_grad_first", lhs: vm.grad[0], rhs: -d_o },
        IdentityResidual { name: "vector_grad_second", lhs: vm.grad[1], rhs: 0.0 },
        IdentityResidual {
            name: "vector_cgf_at_v_tilde",
            lhs: vm.cgf,
            rhs: -fam.mass_s_tilde.ln() + 2.0 * lam,
        },
    ];
    if singular {
        rows.push(IdentityResidual { name: "singular_mass", lhs: fam.mass_s_tilde.ln(), rhs: -eo(w, q, 1.0)? });
    }
    Ok(IdentityReport { rate: r, rho_star: rho, singular, rows })
}
