use lrdfield::covmodel::FieldSpec;
use lrdfield::fieldsim::{ensemble_values, Method};
use lrdfield::functionals::*;
use lrdfield::geometry::{build_surface, Shape};
use lrdfield::hermite::{hermite_poly, HermiteExpansion, Integrand};
use lrdfield::special::{factorial, norm_sf};
use proptest::prelude::*;

/// G = H_κ, so C_κ = κ!.
fn pure(kappa: usize) -> HermiteExpansion {
    Integrand::Hermite { k: kappa, scale: 1.0 }.expansion(8).unwrap()
}

#[test]
fn trivial_functionals() {
    let s = build_surface(Shape::Sphere, 3, 2.0, 16).unwrap();
    let v = vec![0.7; s.len()];
    assert!((functional_k(&v, &s, |_| 1.0) - s.area()).abs() < 1e-10);
    assert!((functional_k(&v, &s, |w| w) - 0.7 * s.area()).abs() < 1e-10);
    assert!((functional_k_kappa(&v, &s, 1, 1.0) - 0.7 * s.area()).abs() < 1e-10);
    let h2 = functional_k_kappa(&v, &s, 2, 3.0);
    assert!((h2 - 1.5 * hermite_poly(2, 0.7) * s.area()).abs() < 1e-10);
}

#[test]
fn normalization_factor() {
    let v = normalize_thm5(1.0, 16.0, 2, 0.5, 1, 1.0).unwrap();
    assert!((v - 16f64.powf(-0.75)).abs() < 1e-15);
    assert_eq!(normalize_thm5(3.5, 1.0, 2, 0.5, 1, 1.0).unwrap(), 3.5);
    assert!(normalize_thm5(1.0, 0.0, 2, 0.5, 1, 1.0).is_err());
    // L(r) enters as L^{-κ/2}
    let w = normalize_thm5(1.0, 1.0, 3, 0.4, 2, 4.0).unwrap();
    assert!((w - 0.25).abs() < 1e-15);
}

#[test]
fn pure_hermite_variance() {
    let spec = FieldSpec::constant(3, 0.5).unwrap();
    let s = build_surface(Shape::Sphere, 3, 4.0, 16).unwrap();
    for k in 1..=3 {
        let v = variance_exact(&s, &pure(k), &spec, 8).unwrap();
        let b = double_integral_bj(&s, &spec, k).unwrap();
        assert!((v / (factorial(k) * b) - 1.0).abs() < 1e-12);
        let rows = reduction_diagnostic(&s.rescaled(1.0).unwrap(), &pure(k), &spec, &[2.0, 8.0], 8);
        if k as f64 * 0.5 < 2.0 {
            for r in rows.unwrap() {
                assert!(r.v_over_k.abs() < 1e-12 && (r.k_over_kkappa - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn breakdown_sums() {
    let spec = FieldSpec::constant(3, 0.4).unwrap();
    let s = build_surface(Shape::Sphere, 3, 8.0, 16).unwrap();
    let e = Integrand::Power { l: 1, threshold: 0.3 }.expansion(20).unwrap();
    let b = variance_terms(&s, &e, &spec, 20).unwrap();
    let sum: f64 = b.terms.iter().sum();
    assert!((sum / b.total - 1.0).abs() < 1e-13);
    assert!(b.tail_bound >= 0.0);
    assert!((variance_exact(&s, &e, &spec, 20).unwrap() / b.total - 1.0).abs() < 1e-13);
    // the j-th term is C_j²/j! times ∬B^j
    for j in 1..5 {
        let want = e.coefficients[j].powi(2) / factorial(j) * double_integral_bj(&s, &spec, j).unwrap();
        assert!((b.term(j) - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }
}

#[test]
fn asymptotic_variance_ratio() {
    // sphere d=3, κ=1, α=0.5
    let spec = FieldSpec::constant(3, 0.5).unwrap();
    let unit = build_surface(Shape::Sphere, 3, 1.0, 16).unwrap();
    let s = unit.rescaled(64.0).unwrap();
    let e = pure(1);
    let exact = variance_exact(&s, &e, &spec, 4).unwrap();
    let asym = variance_asymptotic(1, 0.5, 3, 64.0, 1.0, unit.area(), 1.0, Shape::Sphere).unwrap();
    assert!((exact / asym - 1.0).abs() < 0.10, "{}", exact / asym);
    assert!(variance_asymptotic(2, 1.0, 3, 64.0, 1.0, unit.area(), 1.0, Shape::Sphere).is_err());
}

#[test]
fn reduction_ratios() {
    let spec = FieldSpec::constant(3, 0.4).unwrap();
    let unit = build_surface(Shape::Sphere, 3, 1.0, 16).unwrap();
    let e = Integrand::Power { l: 1, threshold: 0.0 }.expansion(20).unwrap();
    let rows = reduction_diagnostic(&unit, &e, &spec, &[4.0, 8.0, 16.0, 32.0], 20).unwrap();
    assert!(v_ratio_decreasing(&rows));
    assert!((rows[3].k_over_kkappa - 1.0).abs() < 0.05);
    let mut bad = spec.clone();
    bad.alpha = 2.5;
    assert!(reduction_diagnostic(&unit, &e, &bad, &[4.0], 20).is_err());
}

#[test]
fn indicator_mean_and_kappa_variance() {
    let spec = FieldSpec::constant(2, 0.4).unwrap();
    let s = build_surface(Shape::Sphere, 2, 4.0, 96).unwrap();
    let n = 2000;
    let vals = ensemble_values(&spec, &s, Method::CholeskyExact, n, 3).unwrap();
    let t = 0.5;
    let k: Vec<f64> = vals.iter().map(|v| functional_k(v, &s, |w| (w > t) as u8 as f64) / s.area()).collect();
    let (m, se) = mean_with_se(&k);
    assert!((m - norm_sf(t)).abs() < 4.0 * se, "{m} vs {}", norm_sf(t));
    // zero-mean κ = 2 projection, and its variance equals the κ term
    let e = Integrand::Power { l: 2, threshold: 1.0 }.expansion(20).unwrap();
    let kk: Vec<f64> = vals.iter().map(|v| functional_k_kappa(v, &s, 2, e.coefficients[2])).collect();
    let (m2, se2) = mean_with_se(&kk);
    assert!(m2.abs() < 4.0 * se2);
    let (var, vse) = variance_with_se(&kk);
    let term = variance_terms(&s, &e, &spec, 20).unwrap().term(2);
    assert!((var - term).abs() < 4.0 * vse, "{var} vs {term}");
}

#[test]
fn ensemble_csv_round_trip() {
    let e = SampleEnsemble { r: 4.0, values: vec![0.1, -2.5, 1.0 / 3.0], normalization: Normalization::ThmNormalized, kappa: 2, seed: 0 };
    let mut buf = Vec::new();
    e.write_csv(&mut buf).unwrap();
    let back = SampleEnsemble::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.values, e.values);
    assert_eq!(back.normalization, Normalization::ThmNormalized);
    assert_eq!(back.kappa, 2);
    let mixed = "r,replication,value,normalization,kappa\n1,0,0.5,raw,1\n1,1,0.7,thm_normalized,1\n";
    assert!(SampleEnsemble::read_csv(mixed.as_bytes()).is_err());
    assert!(Normalization::parse("other").is_err());
}

#[test]
fn normalized_values() {
    let spec = FieldSpec::constant(2, 0.4).unwrap();
    let s = build_surface(Shape::Sphere, 2, 8.0, 32).unwrap();
    let e = Integrand::Power { l: 1, threshold: 0.0 }.expansion(10).unwrap();
    let raw = vec![0.5 * s.area(), 0.5 * s.area() + 1.0];
    let (k, norm) = normalized_from_raw(&raw, &s, &e, &spec).unwrap();
    assert_eq!(k, 1);
    assert!(norm[0].abs() < 1e-12);
    let want = 1.0 / e.coefficients[1] * 8f64.powf(0.2 - 1.0);
    assert!((norm[1] - want).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functional_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let s = build_surface(Shape::Cube, 2, 1.5, 8).unwrap();
        let mut x = seed;
        let v: Vec<f64> = (0..s.len()).map(|_| { x = x.wrapping_mul(6364136223846793005).wrapping_add(1); (x >> 40) as f64 / 8388608.0 - 1.0 }).collect();
        let g1 = |w: f64| w.sin();
        let g2 = |w: f64| (w > 0.1) as u8 as f64;
        let lhs = functional_k(&v, &s, |w| a * g1(w) + b * g2(w));
        let rhs = a * functional_k(&v, &s, g1) + b * functional_k(&v, &s, g2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}
