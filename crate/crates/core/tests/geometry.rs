use lrdfield::geometry::*;
use lrdfield::special::gamma;
use proptest::prelude::*;
use std::f64::consts::PI;

/// ψ for d = 2 and d = 3 written out by hand.
fn psi_d2(r: f64, rho: f64) -> f64 {
    2.0 / (PI * (4.0 * r * r - rho * rho).sqrt())
}

fn psi_d3(r: f64, rho: f64) -> f64 {
    rho / (2.0 * r * r)
}

/// ∬ ρ^{-β} over the unit circle.
fn circle_power_integral(beta: f64) -> f64 {
    (2.0 * PI).powi(2) * 2f64.powf(-beta) * (2.0 / PI) * PI.sqrt() * gamma(0.5 * (1.0 - beta)) / (2.0 * gamma(1.0 - 0.5 * beta))
}

/// ∬ ρ^{-β} over the unit 2-sphere.
fn sphere3_power_integral(beta: f64) -> f64 {
    (4.0 * PI).powi(2) * 2f64.powf(2.0 - beta) / (2.0 * (2.0 - beta))
}

#[test]
fn areas_and_nodes() {
    let s = build_surface(Shape::Sphere, 2, 1.0, 64).unwrap();
    assert!((s.area() - 2.0 * PI).abs() < 1e-8);
    let s = build_surface(Shape::Sphere, 3, 2.0, 32).unwrap();
    assert!((s.area() / (16.0 * PI) - 1.0).abs() < 1e-8);
    for n in &s.nodes {
        assert!((n.iter().map(|x| x * x).sum::<f64>().sqrt() - 2.0).abs() < 1e-10);
    }
    let c = build_surface(Shape::Cube, 2, 1.0, 16).unwrap();
    assert!((c.area() - 8.0).abs() < 1e-12);
    let c3 = build_surface(Shape::Cube, 3, 1.5, 8).unwrap();
    assert!((c3.area() / (6.0 * 9.0) - 1.0).abs() < 1e-12);
    for n in &c3.nodes {
        assert!((n.iter().fold(0.0f64, |m, x| m.max(x.abs())) - 1.5).abs() < 1e-10);
    }
    for d in 2..=5 {
        let a = surface_area(Shape::Sphere, d, 1.3);
        assert!((a / (2.0 * PI.powf(0.5 * d as f64) * 1.3f64.powi(d as i32 - 1) / gamma(0.5 * d as f64)) - 1.0).abs() < 1e-13);
    }
}

#[test]
fn psi_closed_forms() {
    assert!((distance_pdf_sphere(2, 1.0, 2f64.sqrt()) - 2f64.sqrt() / PI).abs() < 1e-14);
    for rho in [0.1, 0.7, 1.3, 1.9] {
        assert!((distance_pdf_sphere(2, 1.0, rho) - psi_d2(1.0, rho)).abs() < 1e-13);
        assert!((distance_pdf_sphere(3, 1.0, rho) - psi_d3(1.0, rho)).abs() < 1e-13);
        assert!((distance_pdf_sphere(3, 2.5, 2.5 * rho) - psi_d3(2.5, 2.5 * rho)).abs() < 1e-13);
    }
    assert_eq!(distance_pdf_sphere(3, 1.0, 2.5), 0.0);
    assert!((distance_cdf_sphere(3, 1.0, 1.0) - 0.25).abs() < 1e-15);
    assert!((distance_cdf_sphere(2, 1.0, 2f64.sqrt()) - 0.5).abs() < 1e-15);
}

#[test]
fn psi_expectation_moments() {
    // E ρ² = 2r² on every sphere
    for d in 2..=6 {
        let m = psi_expectation(d, 1.5, |x| x * x, 1e-12);
        assert!((m - 2.0 * 2.25).abs() < 1e-9, "d={d}");
        assert!((psi_expectation(d, 1.0, |_| 1.0, 1e-12) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn fourier_closed_forms() {
    for d in [2, 3] {
        let s = build_surface(Shape::Sphere, d, 1.0, 64).unwrap();
        let z = s.fourier(&vec![0.0; d]);
        assert!((z.re - s.area()).abs() < 1e-12 && z.im == 0.0);
    }
    let s3 = build_surface(Shape::Sphere, 3, 1.0, 64).unwrap();
    assert!(s3.fourier(&[0.0, 0.0, PI]).norm() < 1e-12);
    // J₀ closed form against the node sum
    let s2 = build_surface(Shape::Sphere, 2, 1.0, 256).unwrap();
    for x in [[0.3, -1.2], [2.0, 2.0], [-4.0, 0.5]] {
        let a = s2.fourier(&x);
        let q = s2.fourier_quadrature(&x);
        assert!((a - q).norm() < 1e-10, "{x:?}");
    }
    let c = build_surface(Shape::Cube, 2, 1.0, 512).unwrap();
    for x in [[0.3, -1.2], [2.0, 0.0], [-3.0, 0.5]] {
        let a = c.fourier(&x);
        let q = c.fourier_quadrature(&x);
        assert!((a - q).norm() < 1e-4 * a.norm().max(1.0), "{x:?}");
        assert!(a.im.abs() < 1e-12);
    }
}

#[test]
fn double_integral_routes() {
    for beta in [0.0, 0.3, 0.7] {
        let s2 = build_surface(Shape::Sphere, 2, 1.0, 256).unwrap();
        let v = double_surface_integral(&s2, |r| r.powf(-beta), beta).unwrap();
        let truth = circle_power_integral(beta);
        assert!((v.direct / truth - 1.0).abs() < 1e-3, "circle direct beta={beta}");
        assert!((v.psi.unwrap() / truth - 1.0).abs() < 1e-8, "circle psi beta={beta}");
        assert!(v.discrepancy.unwrap() < 1e-3);
        let s3 = build_surface(Shape::Sphere, 3, 1.0, 24).unwrap();
        let v = double_surface_integral(&s3, |r| r.powf(-beta), beta).unwrap();
        let truth = sphere3_power_integral(beta);
        assert!((v.direct / truth - 1.0).abs() < 1e-3, "sphere direct beta={beta}");
        assert!((v.psi.unwrap() / truth - 1.0).abs() < 1e-9, "sphere psi beta={beta}");
    }
    let s3 = build_surface(Shape::Sphere, 3, 1.0, 16).unwrap();
    let ones = double_surface_integral(&s3, |_| 1.0, 0.0).unwrap();
    assert!((ones.value() / (4.0 * PI).powi(2) - 1.0).abs() < 1e-10);
}

#[test]
fn cube_double_integral_refines() {
    let g = |r: f64| r.powf(-0.5);
    let a = double_surface_integral(&build_surface(Shape::Cube, 2, 1.0, 128).unwrap(), g, 0.5).unwrap().direct;
    let b = double_surface_integral(&build_surface(Shape::Cube, 2, 1.0, 256).unwrap(), g, 0.5).unwrap().direct;
    assert!((a / b - 1.0).abs() < 1e-3);
}

#[test]
fn c1_values() {
    let v = c1_constant(1, 0.5, Shape::Sphere, 3).unwrap();
    assert!((v - 2f64.powf(1.5) / 3.0).abs() < 1e-12);
    assert!(c1_constant(2, 0.9, Shape::Sphere, 3).unwrap().is_finite());
    assert!(c1_constant(2, 1.0, Shape::Sphere, 3).is_err());
    assert!((c1_constant(1, 1e-9, Shape::Sphere, 2).unwrap() - 1.0).abs() < 1e-7);
    let c = c1_constant(1, 0.4, Shape::Cube, 2).unwrap();
    assert!(c > 0.0 && c.is_finite());
}

#[test]
fn empirical_pair_distances() {
    let s = build_surface(Shape::Sphere, 3, 1.0, 16).unwrap();
    let h = empirical_distance_pdf(&s, 20_000, 5).unwrap();
    let ks = h.ks_against(|x| distance_cdf_sphere(3, 1.0, x));
    assert!(ks < (2f64 / 0.01).ln().sqrt() / (2.0 * 20_000f64).sqrt());
    let one = empirical_distance_pdf(&s, 1, 5).unwrap();
    assert_eq!(one.density.len(), 1);
    assert!(empirical_distance_pdf(&s, 0, 5).is_err());
    let a = empirical_distance_pdf(&s, 500, 9).unwrap();
    let b = empirical_distance_pdf(&s, 500, 9).unwrap();
    assert_eq!(a.samples, b.samples);
}

#[test]
fn decay_and_adr() {
    let grid: Vec<f64> = (0..=99).map(|k| 1.0 + k as f64).collect();
    let s = build_surface(Shape::Sphere, 2, 1.0, 64).unwrap();
    let rep = decay_check(&s, &grid, 64, 3).unwrap();
    assert!(rep.finite && rep.sup < 2.0 * rep.scaled_near(10.0));
    // isotropic: the average is (2π)² J₀(r)²
    let j = lrdfield::special::bessel_j0(10.0);
    assert!((rep.scaled_near(10.0) - (2.0 * PI).powi(2) * j * j * 10.0).abs() < 1e-9);
    assert!(adr_check(&s, 16, &[0.05, 0.5], 1).is_err());
    let fine = build_surface(Shape::Sphere, 2, 1.0, 2048).unwrap();
    let adr = adr_check(&fine, 16, &[0.05, 0.5], 1).unwrap();
    assert!((adr.min_ratio[0] - 2.0).abs() < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_is_real_and_even(x0 in -6.0f64..6.0, x1 in -6.0f64..6.0, x2 in -6.0f64..6.0, cube in any::<bool>()) {
        let shape = if cube { Shape::Cube } else { Shape::Sphere };
        let s = build_surface(shape, 3, 1.0, 8).unwrap();
        let a = s.fourier(&[x0, x1, x2]);
        let b = s.fourier(&[-x0, -x1, -x2]);
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        prop_assert!(a.im.abs() <= 1e-12 * a.norm().max(1.0));
        prop_assert!(a.norm() <= s.area() * (1.0 + 1e-12));
    }

    #[test]
    fn psi_pdf_scales(r in 0.2f64..5.0, u in 0.01f64..0.99, d in 2usize..7) {
        // ψ_r(ρ) = ψ_1(ρ/r)/r
        let rho = 2.0 * r * u;
        let lhs = distance_pdf_sphere(d, r, rho);
        let rhs = distance_pdf_sphere(d, 1.0, 2.0 * u) / r;
        prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.max(1.0));
    }
}
