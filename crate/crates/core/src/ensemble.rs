//! Ensemble-average ML error probability of i.i.d. random codes: exact over
//! joint types, brute force over codebooks, and Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{approx_equal, Channel, InputDistribution};
use crate::concentration::TIE_TOL;
use crate::error::{Error, Result};
use crate::law::{DiscreteLaw, DEFAULT_SUPPORT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ExactTypes,
    BruteForce,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactTypes => "exact",
            Method::BruteForce => "brute",
            Method::MonteCarlo => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeContribution {
    /// Counts per (x, y), row-major over the full alphabet.
    pub counts: Vec<u32>,
    pub weight: f64,
    pub tail: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n: usize,
    pub m: u64,
    pub p_e_avg: f64,
    pub method: Method,
    pub ci_halfwidth: f64,
    pub per_type_breakdown: Option<Vec<TypeContribution>>,
    /// Σ_τ of the type probabilities (exact method only; 1 up to round-off).
    pub type_weight_total: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub support_cap: usize,
    pub type_cap: f64,
    /// Elementary-operation cap for brute force.
    pub brute_cap: f64,
    /// Symbol-draw budget for Monte Carlo.
    pub mc_budget: f64,
    pub confidence: f64,
    pub breakdown: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            support_cap: DEFAULT_SUPPORT_CAP,
            type_cap: 5e7,
            brute_cap: 1e8,
            mc_budget: 2e11,
            confidence: 0.99,
            breakdown: false,
        }
    }
}

/// M = ⌈e^{NR}⌉.
pub fn message_count(n: usize, r: f64) -> Result<u64> {
    let m = (n as f64 * r).exp().ceil();
    if !(m.is_finite() && m <= 9.007_199_254_740_992e15) {
        return Err(Error::InvalidArgument(format!("message count e^(NR) = {m:e} too large")));
    }
    Ok(m as u64)
}

/// Per-cell laws of log W(b|Z) − log W(b|a), Z ~ Q, for every (a, b) with Q(a)W(b|a) > 0.
#[derive(Debug, Clone)]
struct CellLaws {
    cells: Vec<(usize, usize)>,
    laws: Vec<DiscreteLaw>,
    log_weight: Vec<f64>,
}

impl CellLaws {
    fn new(w: &Channel, q: &InputDistribution) -> Result<Self> {
        w.check_input(q)?;
        let mut cells = Vec::new();
        let mut laws = Vec::new();
        let mut log_weight = Vec::new();
        for a in 0..w.num_inputs() {
            if q.p(a) == 0.0 {
                continue;
            }
            for b in 0..w.num_outputs() {
                let wab = w.w(a, b);
                if wab == 0.0 {
                    continue;
                }
                let mut pairs = Vec::new();
                let mut neg = 0.0;
                for z in 0..w.num_inputs() {
                    let qz = q.p(z);
                    if qz == 0.0 {
                        continue;
                    }
                    let wzb = w.w(z, b);
                    if wzb == 0.0 {
                        neg += qz;
                        continue;
                    }
                    let d = if approx_equal(wzb, wab) { 0.0 } else { (wzb / wab).ln() };
                    if d != 0.0 && d.abs() <= TIE_TOL {
                        return Err(Error::NearTieAtom(d));
                    }
                    pairs.push((d, qz));
                }
                cells.push((a, b));
                laws.push(DiscreteLaw::from_pairs(pairs, neg));
                log_weight.push((q.p(a) * wab).ln());
            }
        }
        Ok(Self { cells, laws, log_weight })
    }
}

/// Pr{Σ_n log W(y_n|Z_n) − log W(y_n|x_n) ≥ 0} for a joint type, with ties counted as errors.
pub fn pairwise_tail(w: &Channel, q: &InputDistribution, counts: &[u32]) -> Result<f64> {
    let ny = w.num_outputs();
    if counts.len() != w.num_inputs() * ny {
        return Err(Error::DimensionMismatch { expected: w.num_inputs() * ny, got: counts.len() });
    }
    let cl = CellLaws::new(w, q)?;
    let mut acc = DiscreteLaw::delta_zero();
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (a, b) = (i / ny, i % ny);
        let k = cl
            .cells
            .iter()
            .position(|&cell| cell == (a, b))
            .ok_or_else(|| Error::InvalidArgument(format!("type uses ({a},{b}) outside the support")))?;
        acc = acc.convolve(&cl.laws[k].power(c as usize, DEFAULT_SUPPORT_CAP)?, DEFAULT_SUPPORT_CAP)?;
    }
    Ok(acc.tail_ge(0.0, TIE_TOL))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v *= (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// 1 − (1 − p)^{M−1}.
fn union_of_competitors(p: f64, m: u64) -> f64 {
    if p >= 1.0 {
        1.0
    } else {
        -((m - 1) as f64 * (-p).ln_1p()).exp_m1()
    }
}

struct TypeWalk<'a> {
    powers: Vec<Vec<DiscreteLaw>>,
    log_weight: &'a [f64],
    cells: &'a [(usize, usize)],
    ln_fact: Vec<f64>,
    n: usize,
    m: u64,
    ny: usize,
    nx: usize,
    cap: usize,
    breakdown: bool,
}

#[derive(Default)]
struct Partial {
    p_e: f64,
    weight: f64,
    rows: Vec<TypeContribution>,
}

impl TypeWalk<'_> {
    fn visit(&self, k: usize, remaining: usize, law: &DiscreteLaw, counts: &mut Vec<usize>, out: &mut Partial) -> Result<()> {
        let last = self.powers.len() - 1;
        if k == last {
            counts.push(remaining);
            let p = law.sum_tail_ge(&self.powers[k][remaining], 0.0, TIE_TOL);
            let mut lw = self.ln_fact[self.n];
            for (j, &c) in counts.iter().enumerate() {
                lw += c as f64 * self.log_weight[j] - self.ln_fact[c];
            }
            let weight = lw.exp();
            let contribution = weight * union_of_competitors(p, self.m);
            out.p_e += contribution;
            out.weight += weight;
            if self.breakdown {
                let mut full = vec![0u32; self.nx * self.ny];
                for (j, &c) in counts.iter().enumerate() {
                    let (a, b) = self.cells[j];
                    full[a * self.ny + b] = c as u32;
                }
                out.rows.push(TypeContribution { counts: full, weight, tail: p, contribution });
            }
            counts.pop();
            return Ok(());
        }
        for c in 0..=remaining {
            counts.push(c);
            if c == 0 {
                self.visit(k + 1, remaining, law, counts, out)?;
            } else {
                let next = law.convolve(&self.powers[k][c], self.cap)?;
                self.visit(k + 1, remaining - c, &next, counts, out)?;
            }
            counts.pop();
        }
        Ok(())
    }
}

/// Exact P̄_e with M = ⌈e^{NR}⌉ messages.
pub fn exact_ensemble_error(
    w: &Channel,
    q: &InputDistribution,
    n: usize,
    r: f64,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    exact_ensemble_error_m(w, q, n, message_count(n, r)?, cfg)
}

/// Exact P̄_e for an explicit message count M ≥ 2.
pub fn exact_ensemble_error_m(
    w: &Channel,
    q: &InputDistribution,
    n: usize,
    m: u64,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    if n == 0 || m < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 1 and M >= 2, got N = {n}, M = {m}")));
    }
    let cl = CellLaws::new(w, q)?;
    let cells = cl.cells.len();
    let count = binomial_f64(n + cells - 1, cells - 1);
    if count > cfg.type_cap {
        return Err(Error::TooManyTypes { count, cap: cfg.type_cap });
    }
    let powers: Result<Vec<Vec<DiscreteLaw>>> = cl
        .laws
        .par_iter()
        .map(|l| {
            let mut v = vec![DiscreteLaw::delta_zero()];
            for c in 1..=n {
                v.push(v[c - 1].convolve(l, cfg.support_cap)?);
            }
            Ok(v)
        })
        .collect();
    let walk = TypeWalk {
        powers: powers?,
        log_weight: &cl.log_weight,
        cells: &cl.cells,
        ln_fact: ln_factorials(n),
        n,
        m,
        ny: w.num_outputs(),
        nx: w.num_inputs(),
        cap: cfg.support_cap,
        breakdown: cfg.breakdown,
    };
    let start = DiscreteLaw::delta_zero();
    let parts: Result<Vec<Partial>> = if cells == 1 {
        let mut p = Partial::default();
        walk.visit(0, n, &start, &mut Vec::new(), &mut p).map(|_| vec![p])
    } else {
        (0..=n)
            .into_par_iter()
            .map(|c| {
                let mut p = Partial::default();
                let mut counts = vec![c];
                let law = if c == 0 { start.clone() } else { walk.powers[0][c].clone() };
                walk.visit(1, n - c, &law, &mut counts, &mut p)?;
                Ok(p)
            })
            .collect()
    };
    let mut p_e = 0.0;
    let mut total = 0.0;
    let mut rows = Vec::new();
    for p in parts? {
        p_e += p.p_e;
        total += p.weight;
        rows.extend(p.rows);
    }
    Ok(EnsembleResult {
        n,
        m,
        p_e_avg: p_e.clamp(0.0, 1.0),
        method: Method::ExactTypes,
        ci_halfwidth: 0.0,
        per_type_breakdown: cfg.breakdown.then_some(rows),
        type_weight_total: total,
    })
}

/// Averages ML error (ties are errors) over every codebook, message and output sequence.
pub fn brute_force(w: &Channel, q: &InputDistribution, n: usize, m: u64, cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    w.check_input(q)?;
    if n == 0 || m < 2 {
        return Err(Error::InvalidArgument(format!("need N >= 1 and M >= 2, got N = {n}, M = {m}")));
    }
    let (nx, ny) = (w.num_inputs(), w.num_outputs());
    let mf = m as f64;
    let ops = (nx as f64).powf(n as f64 * mf) * mf * mf * (ny as f64).powi(n as i32);
    if ops > cfg.brute_cap {
        return Err(Error::CapExceeded { ops, cap: cfg.brute_cap });
    }
    let m = m as usize;
    let words = nx.pow(n as u32);
    let outs = ny.pow(n as u32);
    let digits = |mut v: usize, base: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let d = v % base;
                v /= base;
                d
            })
            .collect()
    };
    let word_prob: Vec<f64> = (0..words).map(|c| digits(c, nx).iter().map(|&x| q.p(x)).product()).collect();
    // loglik[c * outs + y] and the matching probability.
    let mut loglik = vec![f64::NEG_INFINITY; words * outs];
    let mut lik = vec![0.0; words * outs];
    for c in 0..words {
        let xs = digits(c, nx);
        for yi in 0..outs {
            let ys = digits(yi, ny);
            let mut ll = 0.0;
            let mut p = 1.0;
            for (x, y) in xs.iter().zip(&ys) {
                let v = w.w(*x, *y);
                p *= v;
                ll += v.ln();
            }
            loglik[c * outs + yi] = ll;
            lik[c * outs + yi] = p;
        }
    }
    let books = words.pow(m as u32);
    let total: f64 = (0..books)
        .into_par_iter()
        .map(|book| {
            let book_words = {
                let mut v = book;
                (0..m)
                    .map(|_| {
                        let d = v % words;
                        v /= words;
                        d
                    })
                    .collect::<Vec<_>>()
            };
            let weight: f64 = book_words.iter().map(|&c| word_prob[c]).product();
            if weight == 0.0 {
                return 0.0;
            }
            let mut err = 0.0;
            for (i, &ci) in book_words.iter().enumerate() {
                for yi in 0..outs {
                    let p = lik[ci * outs + yi];
                    if p == 0.0 {
                        continue;
                    }
                    let l0 = loglik[ci * outs + yi];
                    let confused = book_words
                        .iter()
                        .enumerate()
                        .any(|(j, &cj)| j != i && loglik[cj * outs + yi] >= l0 - TIE_TOL);
                    if confused {
                        err += p;
                    }
                }
            }
            weight * err / m as f64
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(EnsembleResult {
        n,
        m: m as u64,
        p_e_avg: total.clamp(0.0, 1.0),
        method: Method::BruteForce,
        ci_halfwidth: 0.0,
        per_type_breakdown: None,
        type_weight_total: 1.0,
    })
}

struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(p: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = p
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Self { cdf }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1)
    }
}

const MC_BLOCK: usize = 256;

/// Monte-Carlo estimate with a normal-approximation confidence interval.
/// One message is transmitted per sampled codebook; by symmetry of the ensemble its index is irrelevant.
pub fn monte_carlo(
    w: &Channel,
    q: &InputDistribution,
    n: usize,
    r: f64,
    trials: usize,
    seed: u64,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    w.check_input(q)?;
    if trials < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 trials, got {trials}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let m = message_count(n, r)?;
    if m < 2 {
        return Err(Error::InvalidArgument("need M >= 2".into()));
    }
    let work = trials as f64 * (m as f64) * n as f64;
    if work > cfg.mc_budget {
        return Err(Error::BudgetExceeded { work, budget: cfg.mc_budget });
    }
    let (nx, ny) = (w.num_inputs(), w.num_outputs());
    let qs = Sampler::new(q.as_slice());
    let rows: Vec<Sampler> = (0..nx).map(|x| Sampler::new(w.row(x))).collect();
    let logw: Vec<f64> = (0..nx * ny).map(|i| w.w(i / ny, i % ny).ln()).collect();
    let blocks = trials.div_ceil(MC_BLOCK);
    let errors: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BLOCK.min(trials - b * MC_BLOCK);
            let mut y = vec![0usize; n];
            let mut errs = 0u64;
            for _ in 0..count {
                let mut l0 = 0.0;
                for yv in y.iter_mut() {
                    let x = qs.draw(&mut rng);
                    *yv = rows[x].draw(&mut rng);
                    l0 += logw[x * ny + *yv];
                }
                'competitors: for _ in 1..m {
                    let mut l = 0.0;
                    for &yv in &y {
                        let z = qs.draw(&mut rng);
                        l += logw[z * ny + yv];
                        if l == f64::NEG_INFINITY {
                            continue 'competitors;
                        }
                    }
                    if l >= l0 - TIE_TOL {
                        errs += 1;
                        break;
                    }
                }
            }
            errs
        })
        .sum();
    let t = trials as f64;
    let p = errors as f64 / t;
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - cfg.confidence) / 2.0);
    Ok(EnsembleResult {
        n,
        m,
        p_e_avg: p,
        method: Method::MonteCarlo,
        ci_halfwidth: z * (p * (1.0 - p) / t).sqrt(),
        per_type_breakdown: None,
        type_weight_total: 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    /// (N, log P̄_e + N·exponent).
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

/// OLS fit of log P̄_e + N·exponent against log N.
pub fn slope_fit_points(ns: &[f64], p_e: &[f64], exponent: f64) -> Result<SlopeFit> {
    let points: Vec<(f64, f64)> = ns
        .iter()
        .zip(p_e)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&n, &p)| (n, p.ln() + n * exponent))
        .collect();
    if points.len() < 4 {
        return Err(Error::InsufficientPoints { need: 4, got: points.len() });
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&points).map(|(x, p)| (p.1 - intercept - slope * x).powi(2)).sum();
    let stderr = (sse / (k - 2.0) / sxx).sqrt();
    Ok(SlopeFit { points, slope, intercept, stderr })
}

pub fn slope_fit(results: &[EnsembleResult], exponent: f64) -> Result<SlopeFit> {
    for r in results {
        if r.method == Method::MonteCarlo && r.ci_halfwidth > 0.1 * r.p_e_avg {
            return Err(Error::InvalidArgument(format!("N = {}: confidence interval above 10% of the estimate", r.n)));
        }
    }
    let ns: Vec<f64> = results.iter().map(|r| r.n as f64).collect();
    let ps: Vec<f64> = results.iter().map(|r| r.p_e_avg).collect();
    slope_fit_points(&ns, &ps, exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> InputDistribution {
        InputDistribution::uniform(2)
    }
    fn cfg() -> EnsembleConfig {
        EnsembleConfig::default()
    }

    #[test]
    fn pairwise_examples() {
        let id = Channel::identity(2).unwrap();
        for n in 1..5u32 {
            let p = pairwise_tail(&id, &u(), &[n, 0, 0, 0]).unwrap();
            assert!((p - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        let bsc = Channel::bsc(0.1).unwrap();
        assert!((pairwise_tail(&bsc, &u(), &[1, 0, 0, 0]).unwrap() - 0.5).abs() < 1e-15);
        let point = InputDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(pairwise_tail(&bsc, &point, &[2, 1, 0, 0]).unwrap(), 1.0);
        assert!(pairwise_tail(&bsc, &point, &[0, 0, 1, 0]).is_err());
    }

    #[test]
    fn noiseless_collisions() {
        let id = Channel::identity(2).unwrap();
        for n in 1..6 {
            let r = exact_ensemble_error_m(&id, &u(), n, 2, &cfg()).unwrap();
            assert!((r.p_e_avg - 0.5f64.powi(n as i32)).abs() < 1e-15);
            assert!((r.type_weight_total - 1.0).abs() < 1e-12);
        }
        let b = brute_force(&id, &u(), 1, 2, &cfg()).unwrap();
        assert!((b.p_e_avg - 0.5).abs() < 1e-15);
        let b = brute_force(&id, &u(), 2, 2, &cfg()).unwrap();
        assert!((b.p_e_avg - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_matches_brute_small() {
        let bsc = Channel::bsc(0.1).unwrap();
        let e = exact_ensemble_error_m(&bsc, &u(), 1, 2, &cfg()).unwrap();
        let b = brute_force(&bsc, &u(), 1, 2, &cfg()).unwrap();
        assert!((e.p_e_avg - b.p_e_avg).abs() <= 1e-12 * b.p_e_avg);
        let bec = Channel::bec(0.5).unwrap();
        let e = exact_ensemble_error_m(&bec, &u(), 2, 2, &cfg()).unwrap();
        let b = brute_force(&bec, &u(), 2, 2, &cfg()).unwrap();
        assert!((e.p_e_avg - b.p_e_avg).abs() <= 1e-12 * b.p_e_avg);
    }

    #[test]
    fn breakdown_sums() {
        let bsc = Channel::bsc(0.2).unwrap();
        let c = EnsembleConfig { breakdown: true, ..cfg() };
        let r = exact_ensemble_error_m(&bsc, &u(), 4, 3, &c).unwrap();
        let rows = r.per_type_breakdown.as_ref().unwrap();
        assert_eq!(rows.len(), 35);
        let s: f64 = rows.iter().map(|t| t.contribution).sum();
        assert!((s - r.p_e_avg).abs() < 1e-15);
        for t in rows {
            assert!(t.contribution <= t.weight * (2.0 * t.tail).min(1.0) + 1e-18);
        }
    }

    #[test]
    fn caps() {
        let bsc = Channel::bsc(0.1).unwrap();
        assert!(matches!(brute_force(&bsc, &u(), 6, 4, &cfg()), Err(Error::CapExceeded { .. })));
        let small = EnsembleConfig { type_cap: 10.0, ..cfg() };
        assert!(matches!(exact_ensemble_error_m(&bsc, &u(), 8, 2, &small), Err(Error::TooManyTypes { .. })));
        assert!(monte_carlo(&bsc, &u(), 4, 0.2, 10, 1, &cfg()).is_err());
        let tight = EnsembleConfig { mc_budget: 10.0, ..cfg() };
        assert!(matches!(monte_carlo(&bsc, &u(), 4, 0.2, 1000, 1, &tight), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let bsc = Channel::bsc(0.1).unwrap();
        let a = monte_carlo(&bsc, &u(), 8, 0.2, 5000, 7, &cfg()).unwrap();
        let b = monte_carlo(&bsc, &u(), 8, 0.2, 5000, 7, &cfg()).unwrap();
        assert_eq!(a, b);
        let e = exact_ensemble_error(&bsc, &u(), 8, 0.2, &cfg()).unwrap();
        assert!((a.p_e_avg - e.p_e_avg).abs() <= 3.0 * a.ci_halfwidth);
    }

    #[test]
    fn near_tie_rejected() {
        let w = Channel::new(vec![vec![0.5, 0.5], vec![0.5 + 2e-10, 0.5 - 2e-10]]).unwrap();
        assert!(matches!(exact_ensemble_error_m(&w, &u(), 2, 2, &cfg()), Err(Error::NearTieAtom(_))));
    }

    #[test]
    fn slope_of_power_law() {
        let ns: Vec<f64> = (1..=8).map(|i| (4 * i) as f64).collect();
        let p: Vec<f64> = ns.iter().map(|&n| 3.0 * n.powf(-0.5) * (-0.1 * n).exp()).collect();
        let fit = slope_fit_points(&ns, &p, 0.1).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && fit.stderr < 1e-10);
        assert!(matches!(slope_fit_points(&ns[..3], &p[..3], 0.1), Err(Error::InsufficientPoints { .. })));
    }
}
