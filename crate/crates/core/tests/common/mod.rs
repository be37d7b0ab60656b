#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rcbound::exponents::is_degenerate;
use rcbound::{eo_rho_derivative, Channel, InputDistribution};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

fn normalized_row(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    let mut row: Vec<f64> = v.iter().map(|x| x / s).collect();
    // Push round-off into the largest entry so the row sums to 1 exactly enough.
    let err = 1.0 - row.iter().sum::<f64>();
    let i = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    row[i] += err;
    row
}

/// Random channel with at most 6 symbols per side; `sparse` zeroes some entries.
pub fn random_channel(rng: &mut ChaCha8Rng, sparse: bool) -> Channel {
    let nx = rng.random_range(2..=6);
    let ny = rng.random_range(2..=6);
    let rows = (0..nx)
        .map(|_| {
            let mut v: Vec<f64> = (0..ny).map(|_| rng.sample::<f64, _>(Exp1) + 0.01).collect();
            if sparse {
                for e in v.iter_mut() {
                    if rng.random::<f64>() < 0.25 {
                        *e = 0.0;
                    }
                }
                if v.iter().all(|&e| e == 0.0) {
                    v[0] = 1.0;
                }
            }
            normalized_row(v)
        })
        .collect();
    Channel::new(rows).unwrap()
}

/// Random strictly positive channel.
pub fn random_positive_channel(rng: &mut ChaCha8Rng) -> Channel {
    random_channel(rng, false)
}

/// Multi-erasure channel: each input owns private outputs, and a set of
/// shared outputs is hit with the same probability from every input. Every
/// pair of inputs agrees on the outputs they share, so any Q gives a singular pair.
pub fn random_singular_channel(rng: &mut ChaCha8Rng) -> Channel {
    let k = rng.random_range(2..=4);
    let private = if k == 2 { rng.random_range(1..=2) } else { 1 };
    let shared = rng.random_range(1..=(6 - k * private).min(2));
    let erase: Vec<f64> = (0..shared).map(|_| 0.05 + 0.6 * rng.random::<f64>() / shared as f64).collect();
    let keep = 1.0 - erase.iter().sum::<f64>();
    let ny = k * private + shared;
    let rows = (0..k)
        .map(|x| {
            let mut row = vec![0.0; ny];
            let split: Vec<f64> = dirichlet(rng, private);
            for (j, s) in split.iter().enumerate() {
                row[x * private + j] = keep * s;
            }
            for (j, e) in erase.iter().enumerate() {
                row[k * private + j] = *e;
            }
            normalized_row(row)
        })
        .collect();
    Channel::new(rows).unwrap()
}

/// (R_cr(Q), I(Q;W)) when the pair is nondegenerate and the interval is not tiny.
pub fn open_interval(w: &Channel, q: &InputDistribution) -> Option<(f64, f64)> {
    if is_degenerate(w, q).unwrap() {
        return None;
    }
    let lo = eo_rho_derivative(w, q, 1.0).unwrap();
    let hi = eo_rho_derivative(w, q, 0.0).unwrap();
    (hi - lo > 1e-3).then_some((lo, hi))
}
