//! Gallager functions, random-coding and sphere-packing exponents, critical rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::channel::{classify_pair, Channel, InputDistribution};
use crate::error::{Error, Result};
use crate::simplex::{minimize_newton, PgdConfig};
use crate::tilted::{eo_derivative_closed_form, gallager_terms};

/// Margin used for strict open-interval checks on rates.
pub const RATE_MARGIN: f64 = 1e-10;

/// E_o(ρ, Q) = −log Σ_y [Σ_x Q(x) W(y|x)^{1/(1+ρ)}]^{1+ρ}.
pub fn eo(w: &Channel, q: &InputDistribution, rho: f64) -> Result<f64> {
    w.check_input(q)?;
    Ok(-gallager_terms(w, q, rho).sum.ln())
}

/// ∂E_o/∂ρ via the tilted-measure closed form.
pub fn eo_rho_derivative(w: &Channel, q: &InputDistribution, rho: f64) -> Result<f64> {
    w.check_input(q)?;
    Ok(eo_derivative_closed_form(w, q, rho))
}

/// Central finite difference of the closed-form first derivative; diagnostics only.
pub fn eo_rho_second_derivative(w: &Channel, q: &InputDistribution, rho: f64) -> Result<f64> {
    w.check_input(q)?;
    let h = 1e-5 * (1.0 + rho.abs());
    let lo = (rho - h).max(0.0);
    let hi = rho + h;
    Ok((eo_derivative_closed_form(w, q, hi) - eo_derivative_closed_form(w, q, lo)) / (hi - lo))
}

/// True when E_o(·, Q) is linear in ρ (derivative constant across probes).
pub fn is_degenerate(w: &Channel, q: &InputDistribution) -> Result<bool> {
    w.check_input(q)?;
    let probes: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&r| eo_derivative_closed_form(w, q, r)).collect();
    let lo = probes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = probes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo <= 1e-10)
}

/// Root of E_o′(ρ) = r on [lo, hi], assuming E_o′ is decreasing with a sign change.
fn solve_slope(w: &Channel, q: &InputDistribution, r: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eo_derivative_closed_form(w, q, mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (dl, dh) = (eo_derivative_closed_form(w, q, lo) - r, eo_derivative_closed_form(w, q, hi) - r);
    if dl.abs() <= dh.abs() {
        lo
    } else {
        hi
    }
}

/// The unique ρ ∈ (0,1) with E_o′(ρ, Q) = r, for R_cr(Q) < r < I(Q;W).
pub fn rho_star(w: &Channel, q: &InputDistribution, r: f64) -> Result<f64> {
    w.check_input(q)?;
    if is_degenerate(w, q)? {
        return Err(Error::DegenerateChannel);
    }
    let i = eo_derivative_closed_form(w, q, 0.0);
    let r_cr = eo_derivative_closed_form(w, q, 1.0);
    if !(r > r_cr + RATE_MARGIN && r < i - RATE_MARGIN) {
        return Err(Error::RateOutOfOpenInterval { rate: r, lo: r_cr, hi: i });
    }
    let rho = solve_slope(w, q, r, 0.0, 1.0);
    let residual = (eo_derivative_closed_form(w, q, rho) - r).abs();
    if residual > 1e-11 {
        return Err(Error::OptimizerDidNotConverge(format!("rho* residual {residual:e}")));
    }
    Ok(rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentPoint {
    pub rate: f64,
    pub e_r_q: f64,
    /// Maximizing ρ in [0, 1].
    pub rho_star: f64,
    pub q: InputDistribution,
}

/// E_r(R, Q) = max_{ρ∈[0,1]} −ρR + E_o(ρ, Q).
pub fn er_q(w: &Channel, q: &InputDistribution, r: f64) -> Result<ExponentPoint> {
    w.check_input(q)?;
    let i = eo_derivative_closed_form(w, q, 0.0);
    let r_cr = eo_derivative_closed_form(w, q, 1.0);
    let rho = if r >= i {
        0.0
    } else if r <= r_cr {
        1.0
    } else {
        solve_slope(w, q, r, 0.0, 1.0)
    };
    let value = if rho == 0.0 { 0.0 } else { (-rho * r + eo(w, q, rho)?).max(0.0) };
    Ok(ExponentPoint { rate: r, e_r_q: value, rho_star: rho, q: q.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePacking {
    /// f64::INFINITY when flagged infinite.
    pub value: f64,
    /// Maximizing ρ (ρ_max when infinite).
    pub rho: f64,
    pub infinite: bool,
}

/// E_SP(R, Q) = sup_{0≤ρ≤ρ_max} −ρR + E_o(ρ, Q).
pub fn esp_q(w: &Channel, q: &InputDistribution, r: f64, rho_max: f64) -> Result<SpherePacking> {
    w.check_input(q)?;
    if eo_derivative_closed_form(w, q, rho_max) > r {
        return Ok(SpherePacking { value: f64::INFINITY, rho: rho_max, infinite: true });
    }
    if eo_derivative_closed_form(w, q, 0.0) <= r {
        return Ok(SpherePacking { value: 0.0, rho: 0.0, infinite: false });
    }
    let rho = solve_slope(w, q, r, 0.0, rho_max);
    Ok(SpherePacking { value: -rho * r + eo(w, q, rho)?, rho, infinite: false })
}

#[derive(Debug, Clone)]
pub struct OptConfig {
    /// Number of starts, including the uniform distribution.
    pub starts: usize,
    pub seed: u64,
    /// Outer grid points over ρ ∈ [0, 1].
    pub rho_grid: usize,
    pub rho_max: f64,
    pub pgd: PgdConfig,
    /// L1 radius for merging maximizers.
    pub cluster_tol: f64,
    /// Exponent tolerance within which a distribution counts as a maximizer.
    pub value_tol: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0x5eed_cafe,
            rho_grid: 33,
            rho_max: 64.0,
            pgd: PgdConfig::default(),
            cluster_tol: 1e-6,
            value_tol: 1e-9,
        }
    }
}

fn maximize_eo_from(w: &Channel, rho: f64, start: &[f64], pgd: &PgdConfig) -> Result<(InputDistribution, f64)> {
    let s = 1.0 / (1.0 + rho);
    let (nx, ny) = (w.num_inputs(), w.num_outputs());
    let a: Vec<f64> = (0..nx * ny).map(|i| w.w(i / ny, i % ny).powf(s)).collect();
    // Σ g^{1+ρ} spans many decades in ρ, so the minimizer works relative to |f|.
    let objective = |q: &[f64]| {
        let mut g = vec![0.0; ny];
        for x in 0..nx {
            if q[x] != 0.0 {
                for y in 0..ny {
                    g[y] += q[x] * a[x * ny + y];
                }
            }
        }
        let value: f64 = g.iter().filter(|&&v| v > 0.0).map(|v| v.powf(1.0 + rho)).sum();
        let gp: Vec<f64> = g.iter().map(|&v| if v > 0.0 { (1.0 + rho) * v.powf(rho) } else { 0.0 }).collect();
        let grad = (0..nx).map(|x| (0..ny).map(|y| gp[y] * a[x * ny + y]).sum()).collect();
        (value, grad)
    };
    // ∂²/∂q_x∂q_z Σ g^{1+ρ} = (1+ρ)ρ Σ_y g_y^{ρ−1} a_xy a_zy.
    let hessian = |q: &[f64]| {
        let mut g = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                g[y] += q[x] * a[x * ny + y];
            }
        }
        let c: Vec<f64> =
            g.iter().map(|&v| if v > 0.0 { (1.0 + rho) * rho * v.powf(rho - 1.0) } else { 0.0 }).collect();
        (0..nx)
            .map(|x| (0..nx).map(|z| (0..ny).map(|y| c[y] * a[x * ny + y] * a[z * ny + y]).sum()).collect())
            .collect::<Vec<Vec<f64>>>()
    };
    let cfg = PgdConfig { relative: true, ..*pgd };
    let (q, f) = minimize_newton(objective, hessian, start, &cfg)?;
    Ok((InputDistribution::from_simplex(&q), -f.ln()))
}

pub(crate) fn random_starts(k: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![vec![1.0 / k as f64; k]];
    while out.len() < count {
        let e: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = e.iter().sum();
        out.push(e.iter().map(|v| v / s).collect());
    }
    out
}

/// Greedy clustering in input order, so earlier candidates (the uniform start first) represent their cluster.
fn cluster(items: Vec<(InputDistribution, f64)>, tol: f64) -> Vec<(InputDistribution, f64)> {
    let mut reps: Vec<(InputDistribution, f64)> = Vec::new();
    for (q, v) in items {
        if !reps.iter().any(|(r, _)| r.l1_distance(&q) <= tol) {
            reps.push((q, v));
        }
    }
    reps
}

/// Multi-start maximization of E_o(ρ, ·); returns distinct maximizers with their values.
pub fn maximize_eo(w: &Channel, rho: f64, cfg: &OptConfig) -> Result<Vec<(InputDistribution, f64)>> {
    let starts = random_starts(w.num_inputs(), cfg.starts.max(1), cfg.seed);
    let found: Result<Vec<_>> = starts.par_iter().map(|s| maximize_eo_from(w, rho, s, &cfg.pgd)).collect();
    let found = found?;
    let best = found.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
    let keep = found.into_iter().filter(|f| f.1 >= best - 1e-12 * (1.0 + best.abs())).collect();
    Ok(cluster(keep, cfg.cluster_tol))
}

#[derive(Debug, Clone)]
pub struct ErResult {
    pub value: f64,
    pub maximizers: Vec<InputDistribution>,
}

/// Envelope g(ρ) = max_Q E_o(ρ, Q) − ρR tracked along a warm-started path.
struct Envelope<'a> {
    w: &'a Channel,
    r: f64,
    pgd: PgdConfig,
}

impl Envelope<'_> {
    fn eval(&self, rho: f64, warm: &[f64]) -> Result<(f64, InputDistribution)> {
        let (q, v) = maximize_eo_from(self.w, rho, warm, &self.pgd)?;
        Ok((v - rho * self.r, q))
    }

    /// Golden-section search for the maximum of g on [a, b].
    fn refine(&self, mut a: f64, mut b: f64, warm: &InputDistribution) -> Result<(f64, f64, InputDistribution)> {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut qc) = self.eval(c, warm.as_slice())?;
        let (mut fd, mut qd) = self.eval(d, warm.as_slice())?;
        while b - a > 1e-10 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                qd = qc.clone();
                c = b - phi * (b - a);
                (fc, qc) = self.eval(c, qd.as_slice())?;
            } else {
                a = c;
                c = d;
                fc = fd;
                qc = qd.clone();
                d = a + phi * (b - a);
                (fd, qd) = self.eval(d, qc.as_slice())?;
            }
        }
        Ok(if fc >= fd { (c, fc, qc) } else { (d, fd, qd) })
    }

    /// Grid over `rhos`, then golden-section refinement around every grid
    /// local maximum close to the best. Returns (ρ, g, Q) per refined peak.
    fn peaks(&self, rhos: &[f64]) -> Result<(Vec<(f64, f64, InputDistribution)>, Vec<InputDistribution>)> {
        let mut vals = Vec::with_capacity(rhos.len());
        let mut qs: Vec<InputDistribution> = Vec::with_capacity(rhos.len());
        let mut warm = InputDistribution::uniform(self.w.num_inputs());
        for &rho in rhos {
            let (v, q) = self.eval(rho, warm.as_slice())?;
            vals.push(v);
            warm = q.clone();
            qs.push(q);
        }
        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let n = rhos.len();
        let mut peaks = Vec::new();
        for i in 0..n {
            let left = i == 0 || vals[i] >= vals[i - 1];
            let right = i + 1 == n || vals[i] >= vals[i + 1];
            if !(left && right) || vals[i] < best - 1e-3 {
                continue;
            }
            let a = rhos[i.saturating_sub(1)];
            let b = rhos[(i + 1).min(n - 1)];
            let refined = self.refine(a, b, &qs[i])?;
            let candidate = if refined.1 >= vals[i] { refined } else { (rhos[i], vals[i], qs[i].clone()) };
            peaks.push(candidate);
        }
        Ok((peaks, qs))
    }
}

/// Coordinate ascent on −ρR + E_o(ρ, Q): alternate ρ*(R, Q) and argmax_Q E_o(ρ, ·).
fn polish(w: &Channel, q: &InputDistribution, r: f64, pgd: &PgdConfig) -> Result<(InputDistribution, f64)> {
    let mut cur = er_q(w, q, r)?;
    for _ in 0..100 {
        if cur.rho_star == 0.0 {
            break;
        }
        let (next, _) = maximize_eo_from(w, cur.rho_star, cur.q.as_slice(), pgd)?;
        let moved = next.l1_distance(&cur.q);
        let p = er_q(w, &next, r)?;
        if p.e_r_q < cur.e_r_q {
            break;
        }
        cur = p;
        if moved < 1e-12 {
            break;
        }
    }
    Ok((cur.q.clone(), cur.e_r_q))
}

/// E_r(R) = max_Q E_r(R, Q) with the list of maximizers found.
pub fn er(w: &Channel, r: f64, cfg: &OptConfig) -> Result<ErResult> {
    let env = Envelope { w, r, pgd: cfg.pgd };
    let m = cfg.rho_grid.max(3);
    let rhos: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
    let (peaks, grid_qs) = env.peaks(&rhos)?;
    let best_peak = peaks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut candidates: Vec<InputDistribution> = grid_qs;
    for (rho, g, q) in &peaks {
        candidates.push(q.clone());
        if *g >= best_peak - 1e-8 {
            for (qm, _) in maximize_eo(w, *rho, cfg)? {
                candidates.push(qm);
            }
        }
    }
    let scored: Result<Vec<(InputDistribution, f64)>> =
        candidates.into_iter().map(|q| er_q(w, &q, r).map(|p| (q, p.e_r_q))).collect();
    let scored = scored?;
    let value = scored.iter().map(|s| s.1).fold(0.0, f64::max);
    let near: Vec<InputDistribution> =
        scored.into_iter().filter(|s| s.1 >= value - cfg.value_tol).map(|s| s.0).collect();
    // Grid candidates sit off the optimum by O(grid step); pull each one in
    // before clustering so copies of one maximizer merge.
    let polished: Result<Vec<(InputDistribution, f64)>> = near.iter().map(|q| polish(w, q, r, &cfg.pgd)).collect();
    let polished = polished?;
    let value = polished.iter().map(|s| s.1).fold(value, f64::max);
    let keep = polished.into_iter().filter(|s| s.1 >= value - cfg.value_tol).collect();
    let maximizers = cluster(keep, cfg.cluster_tol).into_iter().map(|c| c.0).collect();
    Ok(ErResult { value, maximizers })
}

/// E_SP(R) = sup_{0≤ρ≤ρ_max} max_Q E_o(ρ, Q) − ρR.
pub fn esp(w: &Channel, r: f64, cfg: &OptConfig) -> Result<SpherePacking> {
    let env = Envelope { w, r, pgd: cfg.pgd };
    let (q_top, _) = maximize_eo_from(w, cfg.rho_max, &vec![1.0 / w.num_inputs() as f64; w.num_inputs()], &cfg.pgd)?;
    let slope_top = eo_derivative_closed_form(w, &q_top, cfg.rho_max)
        .max(eo_derivative_closed_form(w, &InputDistribution::uniform(w.num_inputs()), cfg.rho_max));
    if slope_top > r {
        return Ok(SpherePacking { value: f64::INFINITY, rho: cfg.rho_max, infinite: true });
    }
    let mut rhos: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
    let mut t = 1.0;
    while t < cfg.rho_max {
        t = (t * 1.25).min(cfg.rho_max);
        rhos.push(t);
    }
    let (peaks, _) = env.peaks(&rhos)?;
    let (rho, value) = peaks.iter().fold((0.0, 0.0), |acc, p| if p.1 > acc.1 { (p.0, p.1) } else { acc });
    Ok(SpherePacking { value, rho, infinite: false })
}

/// Capacity and a capacity-achieving input via Blahut–Arimoto.
pub fn capacity(w: &Channel) -> Result<(f64, InputDistribution)> {
    let (nx, ny) = (w.num_inputs(), w.num_outputs());
    let mut q = vec![1.0 / nx as f64; nx];
    let mut last_gap = f64::INFINITY;
    for _ in 0..1_000_000 {
        let mut py = vec![0.0; ny];
        for x in 0..nx {
            for (y, p) in py.iter_mut().enumerate() {
                *p += q[x] * w.w(x, y);
            }
        }
        let d: Vec<f64> = (0..nx)
            .map(|x| {
                (0..ny).filter(|&y| w.w(x, y) > 0.0).map(|y| w.w(x, y) * (w.w(x, y) / py[y]).ln()).sum()
            })
            .collect();
        let lower: f64 = q.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        last_gap = upper - lower;
        if last_gap <= 1e-12 {
            return Ok((lower.max(0.0), InputDistribution::from_simplex(&q)));
        }
        let shift = upper;
        let mut z = 0.0;
        for x in 0..nx {
            q[x] *= (d[x] - shift).exp();
            z += q[x];
        }
        for v in q.iter_mut() {
            *v /= z;
        }
    }
    Err(Error::OptimizerDidNotConverge(format!("capacity gap {last_gap:e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRates {
    pub capacity: f64,
    pub capacity_q: InputDistribution,
    pub r_cr_q: f64,
    pub i_q_w: f64,
    pub r_infinity_estimate: f64,
    /// Always true: R_∞ is probed over finitely many inputs.
    pub r_infinity_is_estimate: bool,
    pub degenerate: bool,
}

fn probe_inputs(w: &Channel, extra: &[&InputDistribution]) -> Vec<InputDistribution> {
    let k = w.num_inputs();
    let mut out: Vec<InputDistribution> = extra.iter().map(|q| (*q).clone()).collect();
    out.push(InputDistribution::uniform(k));
    if k <= 8 {
        for mask in 1u32..(1 << k) {
            let n = mask.count_ones() as f64;
            let q: Vec<f64> = (0..k).map(|x| if mask >> x & 1 == 1 { 1.0 / n } else { 0.0 }).collect();
            out.push(InputDistribution::from_simplex(&q));
        }
    }
    out
}

pub fn r_infinity_estimate(w: &Channel, extra: &[&InputDistribution], rho_max: f64) -> f64 {
    probe_inputs(w, extra)
        .iter()
        .map(|q| eo_derivative_closed_form(w, q, rho_max))
        .fold(0.0, f64::max)
}

pub fn channel_rates(w: &Channel, q: &InputDistribution, cfg: &OptConfig) -> Result<ChannelRates> {
    w.check_input(q)?;
    let (cap, cap_q) = capacity(w)?;
    Ok(ChannelRates {
        capacity: cap,
        r_cr_q: eo_derivative_closed_form(w, q, 1.0),
        i_q_w: eo_derivative_closed_form(w, q, 0.0),
        r_infinity_estimate: r_infinity_estimate(w, &[q, &cap_q], cfg.rho_max),
        r_infinity_is_estimate: true,
        degenerate: is_degenerate(w, q)?,
        capacity_q: cap_q,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerSlope {
    pub q: InputDistribution,
    /// −ρ*(R, Q).
    pub slope: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdifferentialReport {
    pub rate: f64,
    pub value: f64,
    pub maximizers: Vec<MaximizerSlope>,
    /// [lo, hi] of the listed subgradients.
    pub hull: (f64, f64),
    pub rho_star_r: f64,
    /// Largest |slope| among nonsingular maximizers; None when all are singular.
    pub rho_bar_star_r: Option<f64>,
    /// The overall maximum |slope| is attained by a nonsingular maximizer.
    pub attained: bool,
}

impl SubdifferentialReport {
    /// Maximizer attaining `rho_star_r` (preferring nonsingular ones).
    pub fn best(&self) -> &MaximizerSlope {
        let top = self.maximizers.iter().map(|m| -m.slope).fold(f64::NEG_INFINITY, f64::max);
        self.maximizers
            .iter()
            .filter(|m| -m.slope >= top - 1e-9)
            .min_by_key(|m| m.singular)
            .expect("non-empty maximizer list")
    }

    /// Nonsingular maximizer attaining `rho_bar_star_r`.
    pub fn best_nonsingular(&self) -> Option<&MaximizerSlope> {
        self.maximizers.iter().filter(|m| !m.singular).max_by(|a, b| (-a.slope).total_cmp(&-b.slope))
    }
}

pub fn subdifferential_report(w: &Channel, r: f64, cfg: &OptConfig) -> Result<SubdifferentialReport> {
    let res = er(w, r, cfg)?;
    if res.maximizers.is_empty() {
        return Err(Error::NoMaximizerFound);
    }
    let mut maximizers = Vec::with_capacity(res.maximizers.len());
    for q in res.maximizers {
        let p = er_q(w, &q, r)?;
        let singular = classify_pair(w, &q)?.is_singular();
        maximizers.push(MaximizerSlope { q, slope: -p.rho_star, singular });
    }
    let lo = maximizers.iter().map(|m| m.slope).fold(f64::INFINITY, f64::min);
    let hi = maximizers.iter().map(|m| m.slope).fold(f64::NEG_INFINITY, f64::max);
    let rho_star_r = lo.abs().max(hi.abs());
    let rho_bar_star_r =
        maximizers.iter().filter(|m| !m.singular).map(|m| m.slope.abs()).fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
    let attained = rho_bar_star_r.is_some_and(|v| v >= rho_star_r - 1e-9);
    Ok(SubdifferentialReport { rate: r, value: res.value, maximizers, hull: (lo, hi), rho_star_r, rho_bar_star_r, attained })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc() -> Channel {
        Channel::bsc(0.1).unwrap()
    }
    fn bec() -> Channel {
        Channel::bec(0.5).unwrap()
    }
    fn u() -> InputDistribution {
        InputDistribution::uniform(2)
    }
    fn h2(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }
    fn bec_eo(eps: f64, rho: f64) -> f64 {
        -(eps + (1.0 - eps) * 2f64.powf(-rho)).ln()
    }
    fn bec_slope(eps: f64, rho: f64) -> f64 {
        let t = (1.0 - eps) * 2f64.powf(-rho);
        2f64.ln() * t / (eps + t)
    }

    #[test]
    fn eo_closed_forms() {
        assert_eq!(eo(&bsc(), &u(), 0.0).unwrap().abs(), 0.0);
        assert!((eo(&bsc(), &u(), 1.0).unwrap() + 0.8f64.ln()).abs() < 1e-15);
        for rho in [0.0, 0.3, 1.0, 2.5, 10.0] {
            assert!((eo(&bec(), &u(), rho).unwrap() - bec_eo(0.5, rho)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_values() {
        let i = 2f64.ln() - h2(0.1);
        assert!((eo_rho_derivative(&bsc(), &u(), 0.0).unwrap() - i).abs() < 1e-14);
        assert!((eo_rho_derivative(&bec(), &u(), 1.0).unwrap() - 2f64.ln() / 3.0).abs() < 1e-14);
        let flat = Channel::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        for rho in [0.0, 0.5, 1.0] {
            assert!(eo_rho_derivative(&flat, &u(), rho).unwrap().abs() < 1e-15);
        }
        // R_cr for BSC(p) with uniform input: log 2 − H(√p/(√p+√(1−p))).
        let s = 0.1f64.sqrt() / (0.1f64.sqrt() + 0.9f64.sqrt());
        assert!((eo_rho_derivative(&bsc(), &u(), 1.0).unwrap() - (2f64.ln() - h2(s))).abs() < 1e-14);
    }

    #[test]
    fn rho_star_against_bec_bisection() {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if bec_slope(0.5, m) > 0.3 {
                lo = m
            } else {
                hi = m
            }
        }
        let rho = rho_star(&bec(), &u(), 0.3).unwrap();
        assert!((rho - lo).abs() < 1e-12);
        assert!((eo_rho_derivative(&bec(), &u(), rho).unwrap() - 0.3).abs() <= 1e-11);
        let p = er_q(&bec(), &u(), 0.3).unwrap();
        assert!((p.e_r_q - (-rho * 0.3 + bec_eo(0.5, rho))).abs() < 1e-14);
    }

    #[test]
    fn rho_star_errors() {
        assert!(matches!(rho_star(&bec(), &u(), 0.1), Err(Error::RateOutOfOpenInterval { .. })));
        assert!(matches!(rho_star(&bec(), &u(), 0.4), Err(Error::RateOutOfOpenInterval { .. })));
        let id = Channel::identity(2).unwrap();
        assert_eq!(rho_star(&id, &u(), 0.3), Err(Error::DegenerateChannel));
    }

    #[test]
    fn rho_star_boundaries() {
        let i = eo_rho_derivative(&bsc(), &u(), 0.0).unwrap();
        let r_cr = eo_rho_derivative(&bsc(), &u(), 1.0).unwrap();
        assert!(rho_star(&bsc(), &u(), i - 1e-8).unwrap() < 1e-6);
        assert!(rho_star(&bsc(), &u(), r_cr + 1e-8).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn er_q_regimes() {
        let i = eo_rho_derivative(&bsc(), &u(), 0.0).unwrap();
        assert_eq!(er_q(&bsc(), &u(), i).unwrap().e_r_q, 0.0);
        let p = er_q(&bsc(), &u(), 0.0).unwrap();
        assert!((p.e_r_q - 0.223_143_551_314_209_7).abs() < 1e-12);
        assert_eq!(p.rho_star, 1.0);
    }

    #[test]
    fn er_q_matches_grid() {
        for r in [0.05, 0.15, 0.25, 0.3, 0.34] {
            let grid = (0..=10_000)
                .map(|i| {
                    let rho = i as f64 / 10_000.0;
                    -rho * r + bec_eo(0.5, rho)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let v = er_q(&bec(), &u(), r).unwrap().e_r_q;
            assert!(v >= grid - 1e-12 && v - grid < 1e-8, "r={r}");
        }
    }

    #[test]
    fn capacities() {
        let (c, q) = capacity(&bsc()).unwrap();
        assert!((c - (2f64.ln() - h2(0.1))).abs() < 1e-12);
        assert!((q.p(0) - 0.5).abs() < 1e-9);
        let (c, _) = capacity(&bec()).unwrap();
        assert!((c - 0.5 * 2f64.ln()).abs() < 1e-12);
        let z = Channel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let (c, q) = capacity(&z).unwrap();
        // Z-channel with crossover 1/2: capacity log(5/4), P(input 1) = 2/5.
        assert!((c - (1.25f64).ln()).abs() < 1e-10);
        assert!((q.p(1) - 0.4).abs() < 1e-6);
    }

    #[test]
    fn channel_rates_identity_is_degenerate() {
        let id = Channel::identity(2).unwrap();
        let rates = channel_rates(&id, &u(), &OptConfig::default()).unwrap();
        assert!(rates.degenerate);
        assert!((rates.r_cr_q - 2f64.ln()).abs() < 1e-14);
        assert!((rates.capacity - 2f64.ln()).abs() < 1e-12);
        let rates = channel_rates(&bec(), &u(), &OptConfig::default()).unwrap();
        assert!(!rates.degenerate && rates.r_infinity_estimate < 1e-12);
    }

    #[test]
    fn er_over_simplex() {
        let cfg = OptConfig::default();
        let res = er(&bec(), 0.3, &cfg).unwrap();
        assert!((res.value - er_q(&bec(), &u(), 0.3).unwrap().e_r_q).abs() < 1e-8);
        assert_eq!(res.maximizers.len(), 1);
        assert!(res.maximizers[0].l1_distance(&u()) < 1e-6);
        let res = er(&bsc(), 0.2, &cfg).unwrap();
        assert!((res.value - er_q(&bsc(), &u(), 0.2).unwrap().e_r_q).abs() < 1e-9);
        assert_eq!(er(&bsc(), 0.4, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn sphere_packing() {
        let cfg = OptConfig::default();
        let e = esp(&bsc(), 0.3, &cfg).unwrap();
        let r = er(&bsc(), 0.3, &cfg).unwrap();
        assert!(!e.infinite && (e.value - r.value).abs() < 1e-7);
        assert_eq!(esp(&bsc(), 0.4, &cfg).unwrap().value, 0.0);
        let id = Channel::identity(2).unwrap();
        assert!(esp(&id, 0.3, &cfg).unwrap().infinite);
        assert!(esp_q(&id, &u(), 0.3, 64.0).unwrap().infinite);
        // Erasure channel: R_∞ = 0, so small rates stay finite.
        let e = esp(&bec(), 0.05, &cfg).unwrap();
        let oracle = (0..=640_000)
            .map(|i| {
                let rho = i as f64 / 10_000.0;
                -rho * 0.05 + bec_eo(0.5, rho)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(!e.infinite && (e.value - oracle).abs() < 1e-7, "{e:?} vs {oracle}");
    }

    #[test]
    fn subdifferential_bsc() {
        let cfg = OptConfig::default();
        let rep = subdifferential_report(&bsc(), 0.25, &cfg).unwrap();
        assert_eq!(rep.maximizers.len(), 1);
        let rho = rho_star(&bsc(), &u(), 0.25).unwrap();
        assert!((rep.rho_star_r - rho).abs() < 1e-7);
        assert_eq!(rep.rho_bar_star_r, Some(rep.rho_star_r));
        assert!(rep.attained);
        let rep = subdifferential_report(&bec(), 0.3, &cfg).unwrap();
        assert!(rep.rho_bar_star_r.is_none() && !rep.attained);
    }
}
