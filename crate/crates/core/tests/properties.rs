mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rcbound::concentration::DEFAULT_BERRY_ESSEEN_C;
use rcbound::exponents::{is_degenerate, maximize_eo};
use rcbound::*;

fn pair(seed: u64, sparse: bool) -> (Channel, InputDistribution) {
    let mut rng = common::rng(seed);
    let w = common::random_channel(&mut rng, sparse);
    let q = InputDistribution::new(common::dirichlet(&mut rng, w.num_inputs())).unwrap();
    (w, q)
}

fn singular_pair(seed: u64) -> (Channel, InputDistribution) {
    let mut rng = common::rng(seed);
    let w = common::random_singular_channel(&mut rng);
    let q = InputDistribution::new(common::dirichlet(&mut rng, w.num_inputs())).unwrap();
    (w, q)
}

fn any_pair(seed: u64) -> (Channel, InputDistribution) {
    match seed % 3 {
        0 => pair(seed, false),
        1 => pair(seed, true),
        _ => singular_pair(seed),
    }
}

fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5 * (1.0 + x.abs());
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_survives_relabeling(seed in any::<u64>()) {
        let (w, q) = any_pair(seed);
        let mut rng = common::rng(seed ^ 0xabcd);
        let mut px: Vec<usize> = (0..w.num_inputs()).collect();
        let mut py: Vec<usize> = (0..w.num_outputs()).collect();
        px.shuffle(&mut rng);
        py.shuffle(&mut rng);
        let rows = px.iter().map(|&x| py.iter().map(|&y| w.w(x, y)).collect()).collect();
        let w2 = Channel::new(rows).unwrap();
        let q2 = InputDistribution::new(px.iter().map(|&x| q.p(x)).collect()).unwrap();
        prop_assert_eq!(classify_pair(&w, &q).unwrap().kind, classify_pair(&w2, &q2).unwrap().kind);
    }

    #[test]
    fn positive_channels_are_nonsingular(seed in any::<u64>()) {
        let (w, q) = pair(seed, false);
        let v = classify_pair(&w, &q).unwrap();
        prop_assert_eq!(v.kind, SingularityKind::Nonsingular);
        let (x, y, z) = v.witness.unwrap();
        let sets = support_sets(&w, &q).unwrap();
        prop_assert!(sets.s_q_tilde.contains(&(x, y, z)));
    }

    #[test]
    fn support_triples_symmetric(seed in any::<u64>()) {
        let (w, q) = any_pair(seed);
        let sets = support_sets(&w, &q).unwrap();
        for &(x, y, z) in &sets.s_q_tilde {
            prop_assert!(sets.s_q_tilde.contains(&(z, y, x)));
        }
        let v = classify_pair(&w, &q).unwrap();
        prop_assert_eq!(v.witness.is_some(), !v.is_singular());
    }

    #[test]
    fn multi_erasure_channels_are_singular(seed in any::<u64>()) {
        let (w, q) = singular_pair(seed);
        prop_assert!(classify_pair(&w, &q).unwrap().is_singular());
    }

    #[test]
    fn eo_concave_in_rho(seed in any::<u64>()) {
        let (w, q) = any_pair(seed);
        let grid: Vec<f64> = (0..=256).map(|i| 64.0 * (i as f64 / 256.0).powi(2)).collect();
        let vals: Vec<f64> = grid.iter().map(|&r| eo(&w, &q, r).unwrap()).collect();
        for i in 1..grid.len() - 1 {
            // Second divided difference on a nonuniform grid.
            let (a, b, c) = (grid[i - 1], grid[i], grid[i + 1]);
            let s1 = (vals[i] - vals[i - 1]) / (b - a);
            let s2 = (vals[i + 1] - vals[i]) / (c - b);
            prop_assert!(s2 - s1 <= 1e-9, "rho {b}: {s1} -> {s2}");
        }
    }

    #[test]
    fn er_q_convex_nonincreasing(seed in any::<u64>()) {
        let (w, q) = any_pair(seed);
        let i = eo_rho_derivative(&w, &q, 0.0).unwrap();
        let rs: Vec<f64> = (0..=60).map(|k| 1.2 * i * k as f64 / 60.0).collect();
        let v: Vec<f64> = rs.iter().map(|&r| er_q(&w, &q, r).unwrap().e_r_q).collect();
        for k in 1..v.len() {
            prop_assert!(v[k] <= v[k - 1] + 1e-12);
            prop_assert!(v[k] >= 0.0);
        }
        for k in 1..v.len() - 1 {
            prop_assert!(v[k - 1] - 2.0 * v[k] + v[k + 1] >= -1e-12);
        }
    }

    #[test]
    fn rho_star_residual(seed in any::<u64>(), t in 0.05f64..0.95) {
        let (w, q) = any_pair(seed);
        prop_assume!(!is_degenerate(&w, &q).unwrap());
        let lo = eo_rho_derivative(&w, &q, 1.0).unwrap();
        let hi = eo_rho_derivative(&w, &q, 0.0).unwrap();
        let r = lo + t * (hi - lo);
        let rho = rho_star(&w, &q, r).unwrap();
        prop_assert!(rho > 0.0 && rho < 1.0);
        prop_assert!((eo_rho_derivative(&w, &q, rho).unwrap() - r).abs() <= 1e-11);
    }

    #[test]
    fn tilted_cgf_properties(seed in any::<u64>()) {
        let (w, q) = any_pair(seed);
        prop_assume!(common::open_interval(&w, &q).is_some());
        let (lo, hi) = common::open_interval(&w, &q).unwrap();
        let rho = rho_star(&w, &q, 0.5 * (lo + hi)).unwrap();
        let fam = TiltedFamily::new(&w, &q, rho).unwrap();
        prop_assert!(fam.lambda(0.0).abs() <= 1e-12);
        prop_assert!(fam.lambda1([0.0, 0.0]).abs() <= 1e-12);
        prop_assert!((fam.f_rho().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for k in 0..50 {
            let l = -2.0 + 4.0 * k as f64 / 49.0;
            prop_assert!(fam.lambda_d2(l) > 1e-12);
            let d1 = fd(|t| fam.lambda(t), l);
            prop_assert!((d1 - fam.lambda_d1(l)).abs() <= 1e-7 * (1.0 + d1.abs()));
        }
        let v = fam.v_tilde();
        let c = fam.cov_at(v);
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let g = fam.lambda1_grad(v);
        let g0 = fd(|t| fam.lambda1([t, v[1]]), v[0]);
        let g1 = fd(|t| fam.lambda1([v[0], t]), v[1]);
        prop_assert!((g0 - g[0]).abs() <= 1e-7 * (1.0 + g0.abs()));
        prop_assert!((g1 - g[1]).abs() <= 1e-7 * (1.0 + g1.abs()));
        if classify_pair(&w, &q).unwrap().is_singular() {
            prop_assert!(c[1][1] <= 1e-18);
            for l in [-1.0, 0.3, 2.0] {
                let base = fam.lambda_o(l);
                for v2 in [-3.0, 0.5, 4.0] {
                    prop_assert!((fam.lambda1([l, v2]) - base).abs() <= 1e-12);
                }
            }
        } else {
            prop_assert!(det > 1e-12, "det {det}");
        }
    }

    #[test]
    fn tilted_law_moments_match_cgf(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let k = rng.random_range(2..=5);
        let atoms: Vec<f64> = (0..k).map(|_| -3.0 + 6.0 * rng.random::<f64>()).collect();
        let neg = if seed % 3 == 0 { 0.2 } else { 0.0 };
        let probs: Vec<f64> = common::dirichlet(&mut rng, k).iter().map(|p| p * (1.0 - neg)).collect();
        let law = DiscreteLaw::with_neg_inf(atoms, probs, neg).unwrap();
        let (mean, _) = law.finite_mean_var().unwrap();
        let q = mean + 0.5 * (law.max_atom().unwrap() - mean);
        let b = scalar_tail_bound(&law, q, DEFAULT_BERRY_ESSEEN_C).unwrap();
        let cgf = |l: f64| law.tilted(l).cgf;
        prop_assert!(b.eta > 0.0 && b.var > 0.0);
        prop_assert!((fd(cgf, b.eta) - b.tilted_mean).abs() <= 1e-8);
        prop_assert!((b.tilted_mean - q).abs() <= 1e-10);
        let d2 = fd(|l| law.tilted(l).mean, b.eta);
        prop_assert!((d2 - b.var).abs() <= 1e-7 * (1.0 + b.var));
        // Legendre transform by grid then golden section.
        let obj = |l: f64| q * l - cgf(l);
        let top = 4.0 * b.eta + 1.0;
        let mut best = (0.0, obj(0.0));
        for i in 0..=4000 {
            let l = top * i as f64 / 4000.0;
            if obj(l) > best.1 {
                best = (l, obj(l));
            }
        }
        let (mut a, mut c) = ((best.0 - top / 4000.0).max(0.0), best.0 + top / 4000.0);
        while c - a > 1e-12 {
            let m1 = a + (c - a) / 3.0;
            let m2 = c - (c - a) / 3.0;
            if obj(m1) < obj(m2) { a = m1 } else { c = m2 }
        }
        prop_assert!((obj(0.5 * (a + c)) - b.rate).abs() <= 1e-9);
    }

    #[test]
    fn exact_tail_matches_enumeration(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = common::rng(seed);
        let k = rng.random_range(2..=5);
        let atoms: Vec<f64> = (0..k).map(|_| rng.random_range(-8..=8) as f64 / 4.0 + 1e-3 * rng.random::<f64>()).collect();
        let probs = common::dirichlet(&mut rng, k);
        let law = DiscreteLaw::new(atoms.clone(), probs.clone()).unwrap();
        let q = -1.0 + 2.0 * rng.random::<f64>();
        let mut total = 0.0;
        let mut idx = vec![0usize; n];
        loop {
            let s: f64 = idx.iter().map(|&i| atoms[i]).sum();
            if s >= n as f64 * q - 1e-9 {
                total += idx.iter().map(|&i| probs[i]).product::<f64>();
            }
            let mut j = 0;
            while j < n {
                idx[j] += 1;
                if idx[j] < k { break; }
                idx[j] = 0;
                j += 1;
            }
            if j == n { break; }
        }
        prop_assert!((exact_tail(&law, n, q).unwrap() - total).abs() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn er_dominates_random_inputs(seed in any::<u64>()) {
        let (w, _) = pair(seed, seed % 2 == 0);
        let (c, _) = capacity(&w).unwrap();
        let r = 0.4 * c;
        let best = er(&w, r, &OptConfig::default()).unwrap();
        let mut rng = common::rng(seed ^ 7);
        for _ in 0..100 {
            let q = InputDistribution::new(common::dirichlet(&mut rng, w.num_inputs())).unwrap();
            prop_assert!(best.value >= er_q(&w, &q, r).unwrap().e_r_q - 1e-10);
        }
        for m in &best.maximizers {
            prop_assert!((er_q(&w, m, r).unwrap().e_r_q - best.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn sphere_packing_meets_er_above_critical(seed in any::<u64>()) {
        let (w, _) = pair(seed, false);
        let cfg = OptConfig::default();
        let (c, _) = capacity(&w).unwrap();
        let q1 = maximize_eo(&w, 1.0, &cfg).unwrap();
        let r_cr = q1.iter().map(|m| eo_rho_derivative(&w, &m.0, 1.0).unwrap()).fold(0.0, f64::max);
        prop_assume!(c - r_cr > 1e-3);
        let r = r_cr + 0.5 * (c - r_cr);
        let e = er(&w, r, &cfg).unwrap().value;
        let s = esp(&w, r, &cfg).unwrap();
        prop_assert!(!s.infinite);
        prop_assert!((s.value - e).abs() <= 1e-7, "esp {} er {}", s.value, e);
    }

    #[test]
    fn exact_matches_brute_on_small_alphabets(seed in any::<u64>(), n in 1usize..=2, m in 2u64..=3) {
        let mut rng = common::rng(seed);
        let nx = rng.random_range(2..=3);
        let ny = rng.random_range(2..=3);
        let rows = (0..nx)
            .map(|_| {
                let v = common::dirichlet(&mut rng, ny);
                let s: f64 = v.iter().sum();
                v.iter().map(|x| x / s).collect()
            })
            .collect();
        let w = Channel::new(rows).unwrap();
        let q = InputDistribution::new(common::dirichlet(&mut rng, nx)).unwrap();
        let cfg = EnsembleConfig::default();
        let a = exact_ensemble_error_m(&w, &q, n, m, &cfg).unwrap();
        let b = brute_force(&w, &q, n, m, &cfg).unwrap();
        prop_assert!((a.p_e_avg - b.p_e_avg).abs() <= 1e-12 * b.p_e_avg.max(1e-300));
        prop_assert!((a.type_weight_total - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn ensemble_monotone_in_messages(seed in any::<u64>(), n in 2usize..=6) {
        let (w, q) = any_pair(seed);
        prop_assume!(w.num_inputs() * w.num_outputs() <= 16);
        let cfg = EnsembleConfig { breakdown: true, ..EnsembleConfig::default() };
        let mut prev = 0.0;
        for m in 2..=8u64 {
            let res = exact_ensemble_error_m(&w, &q, n, m, &cfg).unwrap();
            prop_assert!(res.p_e_avg >= prev - 1e-15);
            prop_assert!((0.0..=1.0).contains(&res.p_e_avg));
            prop_assert!((res.type_weight_total - 1.0).abs() <= 1e-10);
            for t in res.per_type_breakdown.unwrap() {
                let union = (1.0f64).min((m - 1) as f64 * t.tail);
                prop_assert!(t.contribution <= t.weight * union * (1.0 + 1e-12) + 1e-300);
            }
            prev = res.p_e_avg;
        }
    }
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let cfg = EnsembleConfig::default();
    let cases = [
        (Channel::bsc(0.1).unwrap(), 6, 0.3),
        (Channel::bsc(0.2).unwrap(), 8, 0.2),
        (Channel::bec(0.5).unwrap(), 10, 0.25),
        (Channel::typewriter(3).unwrap(), 6, 0.4),
    ];
    for (i, (w, n, r)) in cases.iter().enumerate() {
        let q = InputDistribution::uniform(w.num_inputs());
        let exact = exact_ensemble_error(w, &q, *n, *r, &cfg).unwrap().p_e_avg;
        let mc = monte_carlo(w, &q, *n, *r, 40_000, 11 + i as u64, &cfg).unwrap();
        assert!((mc.p_e_avg - exact).abs() <= 3.0 * mc.ci_halfwidth, "case {i}: mc {mc:?} exact {exact}");
        let again = monte_carlo(w, &q, *n, *r, 40_000, 11 + i as u64, &cfg).unwrap();
        assert_eq!(mc, again);
    }
}
