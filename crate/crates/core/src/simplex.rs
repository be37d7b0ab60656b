//! Projected-gradient minimization of smooth convex functions over the probability simplex.

use std::cell::Cell;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PgdConfig {
    pub max_iter: usize,
    /// Converged when ‖x − P(x − ∇f(x))‖∞ falls below this.
    pub tol: f64,
    /// [`minimize_newton`] only: rescale a positive objective as it decreases,
    /// making `tol` relative to |f|. Leave off when the minimum can be 0.
    pub relative: bool,
}

impl Default for PgdConfig {
    fn default() -> Self {
        Self { max_iter: 200_000, tol: 1e-12, relative: false }
    }
}

/// Euclidean projection onto {x ≥ 0, Σx = 1}.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

fn stationarity(x: &[f64], g: &[f64]) -> f64 {
    let step: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    let p = project_simplex(&step);
    x.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

struct Iterate {
    x: Vec<f64>,
    fx: f64,
    g: Vec<f64>,
}

/// One backtracking projected-gradient step from `it` with trial step `t`.
/// Returns false when the step size collapses. With `strict`, only a decrease
/// beyond round-off is accepted and a failed search leaves `t` unchanged.
fn pgd_step<F>(f: &F, it: &mut Iterate, t: &mut f64, strict: bool) -> bool
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let t0 = *t;
    let slack = 4.0 * f64::EPSILON * it.fx.abs();
    // Projection ignores constant shifts, so center the gradient; and keep
    // |t·g| moderate, since projecting huge vectors loses absolute precision.
    let mean = it.g.iter().sum::<f64>() / it.g.len() as f64;
    let gc: Vec<f64> = it.g.iter().map(|v| v - mean).collect();
    let spread = gc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if spread > 0.0 {
        *t = t.min(1e3 / spread);
    }
    for _ in 0..if strict { 40 } else { usize::MAX } {
        let mut cand = project_simplex(&it.x.iter().zip(&gc).map(|(a, b)| a - *t * b).collect::<Vec<_>>());
        let s: f64 = cand.iter().sum();
        cand.iter_mut().for_each(|v| *v /= s);
        let d: Vec<f64> = cand.iter().zip(&it.x).map(|(a, b)| a - b).collect();
        let lin: f64 = d.iter().zip(&gc).map(|(a, b)| a * b).sum();
        let sq: f64 = d.iter().map(|a| a * a).sum();
        let (fc, g_new) = f(&cand);
        // Armijo along the projection arc; the quadratic bound is too strict
        // when the gradient jumps at the boundary.
        let ok = if strict {
            fc < it.fx - slack && fc <= it.fx + 1e-4 * lin
        } else {
            fc <= it.fx + lin + sq / (2.0 * *t) + slack
        };
        if ok {
            *it = Iterate { x: cand, fx: fc, g: g_new };
            *t = (*t * 1.5).min(1e8);
            return true;
        }
        *t *= 0.5;
        if *t < 1e-30 {
            break;
        }
    }
    if strict {
        *t = t0;
    }
    false
}

/// Solves the dense system `a·x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let m = a[r][c] / a[c][c];
            if m != 0.0 {
                for k in c..n {
                    a[r][k] -= m * a[c][k];
                }
                b[r] -= m * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Newton step on the face of the simplex spanned by the support of `it.x`,
/// with feasible backtracking. Several ridges are tried, since a singular
/// face Hessian sends the unregularized step far along a flat direction.
fn newton_step<F, H>(f: &F, hess: &H, it: &mut Iterate) -> bool
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
    H: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    // Round-off can leave ~1e-17 of mass on a coordinate the gradient wants
    // empty; it would block every step, so clear it first.
    let mu: f64 = it.x.iter().zip(&it.g).map(|(x, g)| x * g).sum();
    let stray = |x: f64, g: f64| x > 0.0 && x < 1e-12 && g > mu;
    if it.x.iter().zip(&it.g).any(|(&x, &g)| stray(x, g)) {
        let mut cleared: Vec<f64> = it.x.iter().zip(&it.g).map(|(&x, &g)| if stray(x, g) { 0.0 } else { x }).collect();
        let s: f64 = cleared.iter().sum();
        cleared.iter_mut().for_each(|v| *v /= s);
        let (fc, gc) = f(&cleared);
        *it = Iterate { x: cleared, fx: fc, g: gc };
    }
    let active: Vec<usize> = (0..it.x.len()).filter(|&i| it.x[i] > 0.0).collect();
    if active.len() < 2 {
        return false;
    }
    let h = hess(&it.x);
    let scale = active.iter().map(|&i| h[i][i].abs()).fold(0.0, f64::max).max(1e-300);
    // Take the lightest ridge whose step realizes a fair share of the decrease
    // its model predicts; otherwise the lowest value found.
    let mut fallback: Option<Iterate> = None;
    for ridge in [1e-12, 1e-8, 1e-4, 1.0] {
        let Some((next, good)) = newton_try(f, &h, it, &active, ridge * scale) else { continue };
        if good {
            *it = next;
            return true;
        }
        if fallback.as_ref().is_none_or(|b| next.fx < b.fx) {
            fallback = Some(next);
        }
    }
    match fallback {
        Some(next) => {
            *it = next;
            true
        }
        None => false,
    }
}

fn newton_try<F>(f: &F, h: &[Vec<f64>], it: &Iterate, active: &[usize], ridge: f64) -> Option<(Iterate, bool)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let k = active.len();
    // KKT system [H 1; 1ᵀ 0][d; ν] = [−g; 0] with a ridge for flat directions.
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            a[r][c] = h[i][j];
        }
        a[r][r] += ridge;
        a[r][k] = 1.0;
        a[k][r] = 1.0;
        b[r] = -it.g[i];
    }
    let sol = solve_dense(a, b)?;
    // The solve is ill-conditioned when H is close to c·11ᵀ; restoring Σd = 0
    // exactly and pairing d with centered gradients keeps dᵀg accurate.
    let shift = active.iter().enumerate().map(|(r, _)| sol[r]).sum::<f64>() / k as f64;
    let mut d = vec![0.0; it.x.len()];
    for (r, &i) in active.iter().enumerate() {
        d[i] = sol[r] - shift;
    }
    let directional = |g: &[f64]| {
        let mean = active.iter().map(|&i| g[i]).sum::<f64>() / k as f64;
        active.iter().map(|&i| d[i] * (g[i] - mean)).sum::<f64>()
    };
    let lin = directional(&it.g);
    if !(lin < 0.0) {
        return None;
    }
    let mut alpha: f64 = 1.0;
    let mut blocking = None;
    for &i in active {
        if d[i] < 0.0 && -it.x[i] / d[i] < alpha {
            alpha = -it.x[i] / d[i];
            blocking = Some(i);
        }
    }
    let slack = 4.0 * f64::EPSILON * it.fx.abs();
    for _ in 0..60 {
        let mut cand: Vec<f64> = it.x.iter().zip(&d).map(|(x, d)| (x + alpha * d).max(0.0)).collect();
        if let Some(i) = blocking {
            cand[i] = 0.0;
        }
        let s: f64 = cand.iter().sum();
        cand.iter_mut().for_each(|v| *v /= s);
        let (fc, gc) = f(&cand);
        let armijo = fc <= it.fx + 1e-4 * alpha * lin + slack;
        // Near the optimum value differences drown in round-off; for convex f
        // a shrinking directional derivative still certifies progress.
        let slope = directional(&gc);
        let flat = (fc - it.fx).abs() <= 1e3 * slack && slope.abs() <= 0.5 * lin.abs();
        if armijo || flat {
            let good = flat || it.fx - fc >= -0.05 * lin;
            return Some((Iterate { x: cand, fx: fc, g: gc }, good));
        }
        alpha *= 0.5;
        blocking = None;
    }
    None
}

/// Minimizes `f` (returning value and gradient) from `x0`. Returns the point and value.
pub fn minimize<F>(f: F, x0: &[f64], cfg: &PgdConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let x = project_simplex(x0);
    let (fx, g) = f(&x);
    let mut it = Iterate { x, fx, g };
    let mut t = 1.0;
    for _ in 0..cfg.max_iter {
        if stationarity(&it.x, &it.g) <= cfg.tol {
            return Ok((it.x, it.fx));
        }
        if !pgd_step(&f, &mut it, &mut t, false) {
            let r = stationarity(&it.x, &it.g);
            if r <= cfg.tol.max(1e-9) {
                return Ok((it.x, it.fx));
            }
            return Err(Error::OptimizerDidNotConverge(format!("step collapsed, residual {r:e}")));
        }
    }
    let r = stationarity(&it.x, &it.g);
    Err(Error::OptimizerDidNotConverge(format!("iteration limit, residual {r:e}")))
}

/// Like [`minimize`], with a Hessian: each iteration takes a projected-gradient
/// step (which moves the support) and then a Newton step on the current face.
pub fn minimize_newton<F, H>(f: F, hess: H, x0: &[f64], cfg: &PgdConfig) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
    H: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let scale = Cell::new(1.0f64);
    let fs = |x: &[f64]| {
        let (v, g) = f(x);
        let s = scale.get();
        (v * s, g.into_iter().map(|a| a * s).collect::<Vec<_>>())
    };
    let hs = |x: &[f64]| {
        let s = scale.get();
        let mut h = hess(x);
        h.iter_mut().flatten().for_each(|a| *a *= s);
        h
    };
    let mut x = project_simplex(x0);
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= sum);
    let (fx, g) = f(&x);
    if cfg.relative && fx.is_finite() && fx != 0.0 {
        scale.set(1.0 / fx.abs());
    }
    let s = scale.get();
    let mut it = Iterate { x, fx: fx * s, g: g.into_iter().map(|a| a * s).collect() };
    let mut t = 1.0;
    let mut r = stationarity(&it.x, &it.g);
    let mut best = (r, it.x.clone(), it.fx);
    let mut progress_fx = it.fx;
    let mut stalled = 0;
    let unscaled = |v: f64| v / scale.get();
    for _ in 0..cfg.max_iter {
        if r <= cfg.tol {
            return Ok((it.x, unscaled(it.fx)));
        }
        let moved = pgd_step(&fs, &mut it, &mut t, true);
        let newton = newton_step(&fs, &hs, &mut it);
        if !moved && !newton {
            break;
        }
        if cfg.relative && it.fx != 0.0 && it.fx.abs() < 1e-2 {
            let k = 1.0 / it.fx.abs();
            scale.set(scale.get() * k);
            it.fx *= k;
            it.g.iter_mut().for_each(|a| *a *= k);
            let spread = it.g.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
                - it.g.iter().fold(f64::INFINITY, |m, &v| m.min(v));
            t = if spread > 0.0 { 1.0 / spread } else { t / k };
            r = stationarity(&it.x, &it.g);
            best = (r, it.x.clone(), it.fx);
            progress_fx = it.fx;
            stalled = 0;
            continue;
        }
        r = stationarity(&it.x, &it.g);
        if r < 0.9 * best.0 {
            best = (r, it.x.clone(), it.fx);
            stalled = 0;
        } else if it.fx < progress_fx - 1e-10 * progress_fx.abs() {
            progress_fx = it.fx;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 20 {
                break;
            }
        }
    }
    let (r, x, fx) = best;
    if r <= cfg.tol.max(1e-9) {
        return Ok((x, unscaled(fx)));
    }
    // Descent is monotone, so the last iterate has the lowest value.
    if it.fx <= fx && stalled_at_optimum(&fs, &it.x, it.fx) {
        return Ok((it.x, unscaled(it.fx)));
    }
    if stalled_at_optimum(&fs, &x, fx) {
        return Ok((x, unscaled(fx)));
    }
    Err(Error::OptimizerDidNotConverge(format!("residual {r:e}")))
}

/// Optimality certificate for a point where the iteration stalled: the
/// gradient is level on the support, and no move of mass onto a zero
/// coordinate decreases f beyond round-off. Covers objectives whose gradient
/// jumps at the boundary, where the optimum can sit at x_i ≈ 1e-40.
fn stalled_at_optimum<F>(f: &F, x: &[f64], fx: f64) -> bool
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, g) = f(x);
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    let mu = support.iter().map(|&i| x[i] * g[i]).sum::<f64>();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if support.iter().any(|&i| (g[i] - mu).abs() > 1e-9 * scale) {
        return false;
    }
    let slack = 16.0 * f64::EPSILON * fx.abs();
    for i in (0..x.len()).filter(|&i| x[i] == 0.0 && g[i] < mu) {
        for k in 1..=16 {
            let step = 10f64.powi(-k);
            let cand: Vec<f64> =
                x.iter().enumerate().map(|(j, &v)| (1.0 - step) * v + if j == i { step } else { 0.0 }).collect();
            if f(&cand).0 < fx - slack {
                return false;
            }
        }
    }
    true
}
