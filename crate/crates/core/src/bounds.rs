//! Explicit pre-factor bounds on the random-coding error probability as functions of N.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{classify_pair, Channel, InputDistribution};
use crate::concentration::{prefactor_constant, DEFAULT_BERRY_ESSEEN_C};
use crate::error::{Error, Result};
use crate::exponents::{
    eo, eo_rho_derivative, er_q, is_degenerate, maximize_eo, rho_star, subdifferential_report, OptConfig,
    SubdifferentialReport, RATE_MARGIN,
};
use crate::law::min_eigenvalue;
use crate::tilted::TiltedFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundBranch {
    SingularAvg,
    SingularMaximal,
    NonsingularAvg,
    NonsingularMaximal,
    BelowCriticalSingular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorCriterion {
    Average,
    Maximal,
}

#[derive(Debug, Clone)]
pub struct BoundConfig {
    /// Esseen concentration constant; the default 1.0 is a placeholder.
    pub esseen_c: f64,
    pub berry_esseen_c: f64,
    /// Largest N at which the large-N hypotheses are checked directly.
    pub n_check: usize,
    pub opt: OptConfig,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { esseen_c: 1.0, berry_esseen_c: DEFAULT_BERRY_ESSEEN_C, n_check: 4096, opt: OptConfig::default() }
    }
}

/// An upper bound of the form N^p e^{−N E} (K + K′ e^{−N R}), clipped at 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub branch: BoundBranch,
    pub rate: f64,
    pub exponent: f64,
    pub prefactor_power: f64,
    /// K.
    pub leading_constant: f64,
    /// K′, nonzero only for maximal-error branches.
    pub rate_correction: f64,
    pub constants: BTreeMap<String, f64>,
    pub valid_from_n: usize,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// The bound expression without clipping or the validity cut-off.
    pub fn evaluate_unclipped(&self, n: usize) -> f64 {
        let nf = n as f64;
        let k = self.leading_constant + self.rate_correction * (-nf * self.rate).exp();
        (self.prefactor_power * nf.ln() - nf * self.exponent + k.ln()).exp()
    }

    pub fn evaluate(&self, n: usize) -> f64 {
        if n < self.valid_from_n {
            return 1.0;
        }
        self.evaluate_unclipped(n).min(1.0)
    }
}

struct ScalarConstants {
    eta: f64,
    m3: f64,
    var: f64,
    c1: f64,
}

fn first_term(fam: &TiltedFamily, berry_esseen_c: f64) -> Result<ScalarConstants> {
    let eta = fam.eta();
    let m = fam.scalar_moments(eta);
    if !(m.var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(ScalarConstants { eta, m3: m.abs3, var: m.var, c1: prefactor_constant(berry_esseen_c, m.abs3, m.var, eta) })
}

fn check_interval(w: &Channel, q: &InputDistribution, r: f64) -> Result<f64> {
    if is_degenerate(w, q)? {
        return Err(Error::DegenerateChannel);
    }
    rho_star(w, q, r)
}

/// Pre-factor N^{−1/2} bound for a singular pair above the critical rate.
pub fn singular_bound(
    w: &Channel,
    q: &InputDistribution,
    r: f64,
    criterion: ErrorCriterion,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    if !classify_pair(w, q)?.is_singular() {
        return Err(Error::NotSingular);
    }
    let rho = check_interval(w, q, r)?;
    let fam = TiltedFamily::new(w, q, rho)?;
    let first = first_term(&fam, cfg.berry_esseen_c)?;
    let eta_t = (1.0 - rho) / (1.0 + rho);
    let mo = fam.lambda_o_moments(eta_t);
    if !(mo.var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let c2 = prefactor_constant(cfg.berry_esseen_c, mo.abs3, mo.var, eta_t);
    let exponent = er_q(w, q, r)?.e_r_q;
    let (branch, k, k2) = match criterion {
        ErrorCriterion::Average => (BoundBranch::SingularAvg, first.c1 + c2, 0.0),
        ErrorCriterion::Maximal => (BoundBranch::SingularMaximal, 2.0 * first.c1 + 4.0 * c2, 2.0 * c2),
    };
    let constants = BTreeMap::from([
        ("rho_star".to_string(), rho),
        ("eta".to_string(), first.eta),
        ("eta_tilde".to_string(), eta_t),
        ("m3".to_string(), first.m3),
        ("m3_tilde".to_string(), mo.abs3),
        ("lambda_dd_eta".to_string(), first.var),
        ("lambda_o_dd_eta_tilde".to_string(), mo.var),
        ("mass_s_tilde".to_string(), fam.mass_s_tilde()),
        ("berry_esseen_c".to_string(), cfg.berry_esseen_c),
        ("C1".to_string(), first.c1),
        ("C2".to_string(), c2),
        ("K".to_string(), k),
        ("K_rate_correction".to_string(), k2),
    ]);
    Ok(BoundReport {
        branch,
        rate: r,
        exponent,
        prefactor_power: -0.5,
        leading_constant: k,
        rate_correction: k2,
        constants,
        valid_from_n: 1,
        notes: Vec::new(),
    })
}

/// Quantities of the nonsingular construction at one tilt ρ.
struct NonsingularPoint {
    c1: f64,
    lambda_min: f64,
    v: [f64; 2],
    k: f64,
}

fn nonsingular_point(w: &Channel, q: &InputDistribution, rho: f64, berry_esseen_c: f64) -> Result<NonsingularPoint> {
    let fam = TiltedFamily::new(w, q, rho)?;
    let first = first_term(&fam, berry_esseen_c)?;
    let v = fam.v_tilde();
    let lambda_min = min_eigenvalue(&fam.cov_at(v));
    let mut k: f64 = 0.0;
    let t = fam.triples();
    for (i, a) in t.iter().enumerate() {
        for b in &t[i + 1..] {
            k = k.max((a.value[0] - b.value[0]).hypot(a.value[1] - b.value[1]));
        }
    }
    Ok(NonsingularPoint { c1: first.c1, lambda_min, v, k })
}

fn inv_sq_sum(v: [f64; 2]) -> f64 {
    1.0 / (v[0] * v[0]) + 1.0 / (v[1] * v[1])
}

/// Pre-factor N^{−(1+ρ*)/2} bound for a nonsingular pair above the critical rate.
pub fn nonsingular_bound(
    w: &Channel,
    q: &InputDistribution,
    r: f64,
    criterion: ErrorCriterion,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    if classify_pair(w, q)?.is_singular() {
        return Err(Error::NotNonsingular);
    }
    if !(cfg.esseen_c > 0.0) {
        return Err(Error::EsseenConstantNonpositive(cfg.esseen_c));
    }
    let rho = check_interval(w, q, r)?;
    let limit = nonsingular_point(w, q, rho, cfg.berry_esseen_c)?;
    if !(limit.lambda_min > 0.0) {
        return Err(Error::SingularCovariance(limit.lambda_min));
    }
    let r_cr = eo_rho_derivative(w, q, 1.0)?;
    let n_check = cfg.n_check.max(2);
    // Scan N downward; valid_from_n is one past the largest failing N.
    let mut valid_from_n = 1;
    let mut k = limit.k;
    let mut last_rho = rho;
    for n in (2..=n_check).rev() {
        let nf = n as f64;
        let r_n = r - nf.ln() / (2.0 * nf);
        if r_n <= r_cr + RATE_MARGIN {
            valid_from_n = n + 1;
            break;
        }
        let rho_n = rho_star(w, q, r_n)?;
        let p = nonsingular_point(w, q, rho_n, cfg.berry_esseen_c)?;
        let ok = p.c1 <= 2.0 * limit.c1
            && p.lambda_min >= limit.lambda_min / (2.0 * 2f64.sqrt())
            && inv_sq_sum(p.v) <= 2.0 * inv_sq_sum(limit.v);
        if !ok {
            valid_from_n = n + 1;
            break;
        }
        k = k.max(p.k);
        if n == n_check {
            last_rho = rho_n;
        }
    }
    // N beyond the checked range has ρ*_N between ρ* and ρ*_{n_check}.
    for i in 1..16 {
        let t = rho + (last_rho - rho) * i as f64 / 16.0;
        k = k.max(nonsingular_point(w, q, t, cfg.berry_esseen_c)?.k);
    }
    let v = limit.v;
    let bracket = k * k / 4.0 + inv_sq_sum(v);
    let t2 = 4.0 * 2f64.sqrt() * cfg.esseen_c / limit.lambda_min * bracket;
    let exponent = er_q(w, q, r)?.e_r_q;
    let (branch, kk, k2) = match criterion {
        ErrorCriterion::Average => (BoundBranch::NonsingularAvg, 2.0 * limit.c1 + t2, 0.0),
        ErrorCriterion::Maximal => (BoundBranch::NonsingularMaximal, 4.0 * limit.c1 + 4.0 * t2, 2.0 * t2),
    };
    let fam = TiltedFamily::new(w, q, rho)?;
    let first = first_term(&fam, cfg.berry_esseen_c)?;
    let constants = BTreeMap::from([
        ("rho_star".to_string(), rho),
        ("eta".to_string(), first.eta),
        ("m3".to_string(), first.m3),
        ("lambda_dd_eta".to_string(), first.var),
        ("lambda_min_sigma".to_string(), limit.lambda_min),
        ("k".to_string(), k),
        ("v_star_1".to_string(), v[0]),
        ("v_star_2".to_string(), v[1]),
        ("c".to_string(), cfg.esseen_c),
        ("berry_esseen_c".to_string(), cfg.berry_esseen_c),
        ("C1".to_string(), limit.c1),
        ("T2".to_string(), t2),
        ("T2_per_unit_c".to_string(), t2 / cfg.esseen_c),
        ("K".to_string(), kk),
        ("K_rate_correction".to_string(), k2),
        ("n_check".to_string(), n_check as f64),
    ]);
    Ok(BoundReport {
        branch,
        rate: r,
        exponent,
        prefactor_power: -(1.0 + rho) / 2.0,
        leading_constant: kk,
        rate_correction: k2,
        constants,
        valid_from_n,
        notes: vec![format!(
            "Esseen constant c = {} is a placeholder; large-N hypotheses checked for N <= {n_check}",
            cfg.esseen_c
        )],
    })
}

/// e^{−N E_r(R)} with E_r(R) = E_o(1, Q) − R, for a singular E_o(1,·)-optimal Q below the critical rate.
pub fn below_critical_singular_bound(
    w: &Channel,
    q: &InputDistribution,
    r: f64,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    if !classify_pair(w, q)?.is_singular() {
        return Err(Error::NotSingular);
    }
    let r_cr = eo_rho_derivative(w, q, 1.0)?;
    if r > r_cr {
        return Err(Error::RateAboveCritical { rate: r, r_cr });
    }
    let got = eo(w, q, 1.0)?;
    let max = maximize_eo(w, 1.0, &cfg.opt)?.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    if got < max - 1e-8 {
        return Err(Error::QNotEoOptimal { got, max });
    }
    let exponent = got - r;
    Ok(BoundReport {
        branch: BoundBranch::BelowCriticalSingular,
        rate: r,
        exponent,
        prefactor_power: 0.0,
        leading_constant: 1.0,
        rate_correction: 0.0,
        constants: BTreeMap::from([("eo_1".to_string(), got), ("r_cr_q".to_string(), r_cr)]),
        valid_from_n: 1,
        notes: vec!["constant of the matching lower bound: not computed".to_string()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CorollaryRegime {
    /// All found maximizers singular: power −1/2.
    SingularAtRate,
    /// ρ*_R attained by a nonsingular maximizer: power −(1+ρ*_R)/2.
    NonsingularAttained,
    /// Nonsingular maximizers exist but do not attain ρ*_R: power −(1+ρ̄*_R−ε)/2.
    NonsingularUnattained,
}

#[derive(Debug, Clone)]
pub struct CorollaryReport {
    pub regime: CorollaryRegime,
    pub q: InputDistribution,
    pub bound: BoundReport,
    pub subdifferential: SubdifferentialReport,
}

/// Channel-level bound at rate R using the best maximizer of E_r(R, ·).
pub fn corollary_report(
    w: &Channel,
    r: f64,
    eps: f64,
    criterion: ErrorCriterion,
    cfg: &BoundConfig,
) -> Result<CorollaryReport> {
    let sub = subdifferential_report(w, r, &cfg.opt)?;
    let (regime, q) = match sub.best_nonsingular() {
        None => (CorollaryRegime::SingularAtRate, sub.best().q.clone()),
        Some(m) if sub.attained => (CorollaryRegime::NonsingularAttained, m.q.clone()),
        Some(m) => (CorollaryRegime::NonsingularUnattained, m.q.clone()),
    };
    let mut bound = match regime {
        CorollaryRegime::SingularAtRate => singular_bound(w, &q, r, criterion, cfg)?,
        _ => nonsingular_bound(w, &q, r, criterion, cfg)?,
    };
    if regime == CorollaryRegime::NonsingularUnattained {
        let rho_bar = sub.rho_bar_star_r.expect("nonsingular maximizer present");
        bound.prefactor_power = -(1.0 + rho_bar - eps) / 2.0;
        bound.notes.push(format!("supremum over nonsingular maximizers not attained; eps = {eps}"));
    }
    Ok(CorollaryReport { regime, q, bound, subdifferential: sub })
}
