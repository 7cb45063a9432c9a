use lrdfield::error::Error;
use lrdfield::rates::*;
use lrdfield::rng::{derive_seed, rng_from};
use lrdfield::special::norm_cdf;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn normals(seed: u64, n: usize, shift: f64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) + shift).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn kolmogorov_examples() {
    let x = normals(1, 500, 0.0);
    assert_eq!(kolmogorov_distance(&x, &x).unwrap(), 0.0);
    assert_eq!(kolmogorov_distance(&[0.0; 3], &[1.0; 3]).unwrap(), 1.0);
    assert!(matches!(kolmogorov_distance(&[], &[1.0]), Err(Error::EmptySample)));
    assert!(matches!(kolmogorov_distance(&[1.0], &[]), Err(Error::EmptySample)));
    // ties across samples: {0,1} vs {1,1} differ by 1/2 just below 1
    assert_eq!(kolmogorov_distance(&[0.0, 1.0], &[1.0, 1.0]).unwrap(), 0.5);
    let n = 40_000;
    let a = normals(2, n, 0.0);
    let b = normals(3, n, 1.0);
    let want = norm_cdf(0.5) - norm_cdf(-0.5);
    assert!((want - 0.3829).abs() < 1e-4);
    let got = kolmogorov_distance(&a, &b).unwrap();
    assert!((got - want).abs() < dkw_two_sample(n, n, 0.01), "{got}");
}

#[test]
fn dkw_values() {
    assert!(close(dkw_eps(100, 0.05), ((2.0f64 / 0.05).ln() / 200.0).sqrt()));
    assert!(close(dkw_two_sample(100, 100, 0.05), ((2.0f64 / 0.05).ln() / 100.0).sqrt()));
}

#[test]
fn exponents() {
    assert_eq!(hermite_a(1), 1.0);
    assert_eq!(hermite_a(2), 1.0);
    assert!(close(hermite_a(3), 1.0 / 3.0));
    assert!(close(dst_exponent(2), 2.0 / 3.0));
    assert!(close(dst_exponent(4), 2.0 / 9.0));
    for k in 1..=8 {
        let a = hermite_a(k);
        assert!(close(dst_exponent(k), 2.0 * a / (2.0 + a)));
        if k >= 3 {
            assert!(close(dst_exponent(k), 1.0 / (k as f64 + 0.5)));
        }
    }
}

#[test]
fn kappa1_values() {
    for d in 2..6 {
        for (alpha, tau) in [(0.3f64, -0.1f64), (0.5, -5.0), (0.9, -0.45)] {
            let want = (-2.0 * tau).min(d as f64 - 1.0 - alpha);
            assert!(close(kappa1(d, alpha, 1, tau).unwrap(), want));
        }
    }
    assert!(close(kappa1(4, 4.0 / 3.0, 2, -10.0).unwrap(), 4.0 / 15.0));
    assert!(kappa1(4, 4.0 / 3.0, 2, -1e-9).unwrap() < 1e-8);
    assert!(kappa1(4, 1.5, 2, -1.0).is_err());
    assert!(kappa1(4, 1.0, 2, 0.1).is_err());
}

#[test]
fn rate_bound_examples() {
    let r = rate_bound(4, 4.0 / 3.0, 2, -1.0).unwrap();
    assert!(close(r.bound, 4.0 / 45.0));
    assert_eq!(r.case, RateCase::Case1);
    assert!(close(r.alpha_star.unwrap(), 4.0 / 3.0));
    assert!(!r.tau_in_window);
    let t0 = rate_bound(3, 0.5, 3, 0.0).unwrap();
    assert_eq!(t0.case, RateCase::Tau0);
    assert!(close(t0.g_exponent.unwrap(), 2.0 / 7.0));
    let mut prev = f64::INFINITY;
    for alpha in [1e-2, 1e-4, 1e-6] {
        let b = rate_bound(3, alpha, 2, -1.0).unwrap().bound;
        assert!(b > 0.0 && b < prev);
        prev = b;
    }
    assert!(prev < 1e-5);
    assert!(rate_bound(3, 1.0, 2, -1.0).is_err());
}

#[test]
fn condition_and_alpha_star() {
    assert!(condition_bb(4, 2));
    for k in 1..=8 {
        assert!(!condition_bb(2, k), "d=2 k={k}");
        assert!(matches!(alpha_star(2, k), Err(Error::NoRoot { .. })));
    }
    for d in 2..=10 {
        assert!(!condition_bb(d, 1));
    }
    assert!((alpha_star(4, 2).unwrap() - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn best_bound_examples() {
    let b = best_bound(4, 2, -1.0).unwrap();
    assert!(close(b.bound, 4.0 / 45.0));
    let c = best_bound(2, 3, -0.01).unwrap();
    assert_eq!(c.case, RateCase::Case2);
    assert!(close(c.bound, 0.02 / 7.0));
    assert!(best_bound(4, 2, 0.0).is_err());
}

#[test]
fn best_bound_dominates_where_tau_binds() {
    for (d, k) in [(4, 2), (2, 3), (5, 3), (3, 1)] {
        let tau = -0.005;
        let best = best_bound(d, k, tau).unwrap().bound;
        let (_, scanned) = scan_alpha(d, k, tau, 400).unwrap();
        assert!(scanned <= best + 1e-12, "d={d} k={k}");
    }
}

#[test]
fn closed_form_is_not_the_supremum_for_large_tau() {
    // tail exponent 1/(1/α + 1/(d-1-κα)) peaks at (d-1)/(κ+√κ), not at α*
    let r = rate_bound(4, 1.0, 2, -10.0).unwrap();
    assert!(close(r.bound, 1.0 / 6.0));
    let (a, b) = scan_alpha(4, 2, -10.0, 3000).unwrap();
    assert!(b > 4.0 / 45.0 + 0.05);
    assert!((a - 3.0 / (2.0 + 2f64.sqrt())).abs() < 2e-3);
}

#[test]
fn kappa_one_maximized_at_case2_alpha() {
    for d in 2..6 {
        let (a, b) = scan_alpha(d, 1, -10.0, 2000).unwrap();
        assert!((a - (d as f64 - 1.0) / 2.0).abs() < 2e-3 * d as f64);
        assert!((b - best_bound(d, 1, -10.0).unwrap().bound).abs() < 1e-6);
    }
}

#[test]
fn allocation_examples() {
    let a = maximize_min_allocation(&[1.0, 1.0], 1.0).unwrap();
    assert!(close(a.gaps[0], 0.5) && close(a.value, 0.5));
    let a = maximize_min_allocation(&[2.0, 1.0], 1.0).unwrap();
    assert!(close(a.gaps[0], 1.0 / 3.0) && close(a.gaps[1], 2.0 / 3.0) && close(a.value, 2.0 / 3.0));
    assert!(maximize_min_allocation(&[1.0, 0.0], 1.0).is_err());
    assert!(maximize_min_allocation(&[1.0], -1.0).is_err());
}

#[test]
fn convergence_experiment_smoke() {
    let cfg: ConvergenceConfig = serde_json::from_str(
        r#"{"field":{"d":2,"alpha":0.4,"L":"constant"},
            "surface":{"shape":"sphere","d":2,"resolution":48},
            "integrand":{"kind":"hermite","k":1},
            "r_grid":[2.0,4.0],"n_rep":60,"n_limit":80,
            "limit_grid":{"Lambda":4.0,"cells_per_axis":16},"seed":5}"#,
    )
    .unwrap();
    let rows = convergence_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.kolmogorov_distance));
        assert!(close(r.dkw_tol, dkw_two_sample(60, 80, 0.01)));
        assert_eq!(r.case, RateCase::Tau0);
    }
    assert_eq!(convergence_experiment(&cfg).unwrap(), rows);
    let mut buf = Vec::new();
    write_convergence_csv(&mut buf, &rows).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    assert!(convergence_svg(&rows).contains("<polyline"));
    let empty = ConvergenceConfig { n_rep: 0, r_grid: vec![4.0], ..cfg };
    assert!(matches!(convergence_experiment(&empty), Err(Error::EmptySample)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kolmogorov_is_a_metric(s in any::<u64>(), na in 1usize..60, nb in 1usize..60, nc in 1usize..60) {
        let a = normals(derive_seed(s, 0), na, 0.0);
        let b = normals(derive_seed(s, 1), nb, 0.3);
        let c = normals(derive_seed(s, 2), nc, -0.2);
        let ab = kolmogorov_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, kolmogorov_distance(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        let ac = kolmogorov_distance(&a, &c).unwrap();
        let cb = kolmogorov_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-15);
    }

    #[test]
    fn bound_monotone_in_tau(d in 2usize..6, k in 1usize..4, frac in 0.05f64..0.95, t1 in 0.001f64..5.0, t2 in 0.001f64..5.0) {
        let alpha = frac * (d - 1) as f64 / k as f64;
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let a = rate_bound(d, alpha, k, -lo).unwrap().bound;
        let b = rate_bound(d, alpha, k, -hi).unwrap().bound;
        prop_assert!(a <= b + 1e-15);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn alpha_star_solves_its_equation(d in 3usize..12, k in 2usize..7) {
        prop_assume!(condition_bb(d, k));
        let s = alpha_star(d, k).unwrap();
        let rhs: f64 = (2..=k).map(|j| 1.0 / (d as f64 - j as f64 * s)).sum();
        prop_assert!((1.0 / s - rhs).abs() <= 1e-10);
        prop_assert!(s > 0.0 && s < (d - 1) as f64 / k as f64);
    }

    #[test]
    fn allocation_perturbation_lowers_min(x in prop::collection::vec(0.1f64..10.0, 2..6), b in 0.1f64..5.0, i in 0usize..6, j in 0usize..6, eps in 1e-6f64..1e-2) {
        let n = x.len();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let a = maximize_min_allocation(&x, b).unwrap();
        let mut g = a.gaps.clone();
        g[i] += eps;
        g[j] -= eps;
        let m = g.iter().zip(&x).map(|(g, x)| g * x).fold(f64::INFINITY, f64::min);
        prop_assert!(m < a.value);
    }

    #[test]
    fn smoothing_inequality_on_gaussian_triples(s in any::<u64>(), sy in 0.01f64..0.5, eps in 0.02f64..0.5) {
        // ρ(X+Y, Z) ≤ ρ(X, Z) + ρ(Z+ε, Z) + P(|Y| ≥ ε), up to sampling slack
        let n = 4000;
        let x = normals(derive_seed(s, 0), n, 0.0);
        let y: Vec<f64> = normals(derive_seed(s, 1), n, 0.0).into_iter().map(|v| sy * v).collect();
        let z = normals(derive_seed(s, 2), n, 0.0);
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let ze: Vec<f64> = z.iter().map(|v| v + eps).collect();
        let lhs = kolmogorov_distance(&xy, &z).unwrap();
        let tail = y.iter().filter(|v| v.abs() >= eps).count() as f64 / n as f64;
        let rhs = kolmogorov_distance(&x, &z).unwrap() + kolmogorov_distance(&ze, &z).unwrap() + tail;
        prop_assert!(lhs <= rhs + 2.0 * dkw_two_sample(n, n, 0.01));
    }
}
