//! Hypersurfaces ∂Δ(r): quadrature, the pair-distance law ψ, the surface
//! Fourier transform 𝒦 and empirical regularity checks.

use crate::error::{domain, Error, Result};
use crate::quad::{gauss_legendre, gl_integrate, tanh_sinh};
use crate::rng::rng_from;
use crate::special::{gamma, unit_sphere_area, zeta};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sphere,
    /// Boundary of the cube [-r, r]^d.
    #[serde(alias = "cube_boundary")]
    Cube,
}

fn default_resolution() -> usize {
    64
}

/// JSON: `{"shape":"sphere","d":3,"r":2.0,"resolution":64}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub shape: Shape,
    pub d: usize,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn one() -> f64 {
    1.0
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<Hypersurface> {
        build_surface(self.shape, self.d, self.r, self.resolution)
    }
}

/// A surface with a positive-weight quadrature rule.
#[derive(Clone, Debug)]
pub struct Hypersurface {
    pub shape: Shape,
    pub d: usize,
    pub r: f64,
    pub resolution: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Closed-form area of ∂Δ(r).
pub fn surface_area(shape: Shape, d: usize, r: f64) -> f64 {
    match shape {
        Shape::Sphere => unit_sphere_area(d) * r.powi(d as i32 - 1),
        Shape::Cube => 2.0 * d as f64 * (2.0 * r).powi(d as i32 - 1),
    }
}

pub fn build_surface(shape: Shape, d: usize, r: f64, resolution: usize) -> Result<Hypersurface> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(r > 0.0 && r.is_finite()) {
        return domain("r must be positive");
    }
    if resolution < 8 {
        return domain("resolution must be at least 8");
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match (shape, d) {
        (Shape::Sphere, 2) => {
            let h = 2.0 * PI * r / resolution as f64;
            for k in 0..resolution {
                let t = 2.0 * PI * (k as f64 + 0.5) / resolution as f64;
                nodes.push(vec![r * t.cos(), r * t.sin()]);
                weights.push(h);
            }
        }
        (Shape::Sphere, _) => {
            let n_polar = resolution / 2;
            let (z, wz) = gauss_legendre(n_polar);
            let dphi = 2.0 * PI / resolution as f64;
            for (zi, wi) in z.iter().zip(&wz) {
                let s = (1.0 - zi * zi).sqrt();
                for k in 0..resolution {
                    let p = dphi * (k as f64 + 0.5);
                    nodes.push(vec![r * s * p.cos(), r * s * p.sin(), r * zi]);
                    weights.push(r * r * wi * dphi);
                }
            }
        }
        (Shape::Cube, _) => {
            let a = 2.0 * r / resolution as f64;
            let w = a.powi(d as i32 - 1);
            let mid = |i: usize| -r + (i as f64 + 0.5) * a;
            for k in 0..d {
                for sign in [-1.0, 1.0] {
                    let cells = resolution.pow(d as u32 - 1);
                    for c in 0..cells {
                        let mut p = vec![0.0; d];
                        let mut rem = c;
                        for (j, pj) in p.iter_mut().enumerate() {
                            if j == k {
                                *pj = sign * r;
                            } else {
                                *pj = mid(rem % resolution);
                                rem /= resolution;
                            }
                        }
                        nodes.push(p);
                        weights.push(w);
                    }
                }
            }
        }
    }
    Ok(Hypersurface { shape, d, r, resolution, nodes, weights })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// 𝒦(x) in closed form: spheres in d = 2, 3 and cube boundaries in any d.
pub fn surface_fourier_closed(shape: Shape, d: usize, r: f64, x: &[f64]) -> Option<Complex64> {
    match (shape, d) {
        (Shape::Sphere, 2) => Some(Complex64::new(2.0 * PI * r * crate::special::bessel_j0(r * norm(x)), 0.0)),
        (Shape::Sphere, 3) => {
            let u = r * norm(x);
            let sinc = if u < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
            Some(Complex64::new(4.0 * PI * r * r * sinc, 0.0))
        }
        (Shape::Cube, _) => {
            // face pair k contributes 2cos(x_k r) Π_{j≠k} ∫_{-r}^{r} e^{i x_j u} du
            let seg = |y: f64| {
                let u = y * r;
                if u.abs() < 1e-8 {
                    2.0 * r * (1.0 - u * u / 6.0)
                } else {
                    2.0 * (u).sin() / y
                }
            };
            let segs: Vec<f64> = x.iter().map(|&y| seg(y)).collect();
            let mut total = 0.0;
            for k in 0..d {
                let mut term = 2.0 * (x[k] * r).cos();
                for (j, s) in segs.iter().enumerate() {
                    if j != k {
                        term *= s;
                    }
                }
                total += term;
            }
            Some(Complex64::new(total, 0.0))
        }
        _ => None,
    }
}

impl Hypersurface {
    pub fn spec(&self) -> SurfaceSpec {
        SurfaceSpec { shape: self.shape, d: self.d, r: self.r, resolution: self.resolution }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Closed-form |∂Δ(r)|.
    pub fn area(&self) -> f64 {
        surface_area(self.shape, self.d, self.r)
    }

    /// |∂Δ| at unit scale.
    pub fn unit_area(&self) -> f64 {
        surface_area(self.shape, self.d, 1.0)
    }

    pub fn diameter(&self) -> f64 {
        match self.shape {
            Shape::Sphere => 2.0 * self.r,
            Shape::Cube => 2.0 * self.r * (self.d as f64).sqrt(),
        }
    }

    /// Same shape and resolution at another scale.
    pub fn rescaled(&self, r: f64) -> Result<Hypersurface> {
        build_surface(self.shape, self.d, r, self.resolution)
    }

    /// 𝒦(x) = ∫ e^{i⟨x,u⟩} dσ(u), closed form.
    pub fn fourier(&self, x: &[f64]) -> Complex64 {
        surface_fourier_closed(self.shape, self.d, self.r, x).expect("built surfaces have closed forms")
    }

    /// 𝒦(x) by the quadrature rule.
    pub fn fourier_quadrature(&self, x: &[f64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            let ph: f64 = p.iter().zip(x).map(|(a, b)| a * b).sum();
            s += Complex64::new(ph.cos(), ph.sin()) * w;
        }
        s
    }

    /// A point uniform with respect to surface measure.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self.shape {
            Shape::Sphere => loop {
                let g: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
                let n = norm(&g);
                if n > 1e-300 {
                    return g.into_iter().map(|v| self.r * v / n).collect();
                }
            },
            Shape::Cube => {
                // all 2d faces have equal area
                let face = rng.random_range(0..2 * self.d);
                let k = face / 2;
                let sign = if face % 2 == 0 { -1.0 } else { 1.0 };
                (0..self.d)
                    .map(|j| if j == k { sign * self.r } else { rng.random_range(-self.r..self.r) })
                    .collect()
            }
        }
    }
}

/// Γ(d/2) / (√π Γ((d-1)/2)).
fn psi_constant(d: usize) -> f64 {
    let df = d as f64;
    gamma(0.5 * df) / (PI.sqrt() * gamma(0.5 * (df - 1.0)))
}

/// Density of ‖U - V‖ for independent uniform points on S_{d-1}(r).
/// Zero outside (0, 2r).
pub fn distance_pdf_sphere(d: usize, r: f64, rho: f64) -> f64 {
    distance_pdf_sphere_gap(d, r, rho, 2.0 * r - rho)
}

/// Same density, with the gap 2r - ρ supplied separately so values next to
/// the antipodal end stay accurate.
pub fn distance_pdf_sphere_gap(d: usize, r: f64, rho: f64, gap: f64) -> f64 {
    if d < 2 || !(rho > 0.0) || !(gap > 0.0) {
        return 0.0;
    }
    let one_minus = gap * (rho + 2.0 * r) / (4.0 * r * r);
    let df = d as f64;
    psi_constant(d) * r.powf(1.0 - df) * rho.powf(df - 2.0) * one_minus.powf(0.5 * (df - 3.0))
}

/// CDF of the sphere pair distance.
pub fn distance_cdf_sphere(d: usize, r: f64, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    if rho >= 2.0 * r {
        return 1.0;
    }
    let s = rho / (2.0 * r);
    match d {
        2 => 2.0 / PI * s.asin(),
        3 => s * s,
        _ => {
            let rule = gauss_legendre(64);
            let p = (d - 2) as i32;
            let v = gl_integrate(|t| (t.sin() * t.cos()).powi(p), 0.0, s.asin(), &rule);
            psi_constant(d) * 2f64.powi(d as i32 - 1) * v
        }
    }
}

/// ∫ g(ρ) ψ(ρ) dρ over (0, 2r) through ρ = 2r sin θ.
pub fn psi_expectation<G: Fn(f64) -> f64>(d: usize, r: f64, g: G, rel_tol: f64) -> f64 {
    let p = (d - 2) as i32;
    let v = tanh_sinh(
        |_t, ga, gb| {
            let (s, c) = (ga.sin(), gb.sin());
            g(2.0 * r * s) * (s * c).powi(p)
        },
        0.0,
        0.5 * PI,
        rel_tol,
    );
    psi_constant(d) * 2f64.powi(d as i32 - 1) * v
}

/// Sorted pair distances plus a normalized histogram.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub samples: Vec<f64>,
}

impl DistanceHistogram {
    /// sup |F_n - F| against a reference CDF.
    pub fn ks_against<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.samples.len() as f64;
        let mut sup = 0.0f64;
        for (i, &x) in self.samples.iter().enumerate() {
            let f = cdf(x);
            sup = sup.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
        }
        sup
    }
}

pub fn empirical_distance_pdf(surface: &Hypersurface, n_pairs: usize, seed: u64) -> Result<DistanceHistogram> {
    if n_pairs == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = rng_from(seed);
    let mut samples: Vec<f64> = (0..n_pairs)
        .map(|_| {
            let u = surface.sample_uniform(&mut rng);
            let v = surface.sample_uniform(&mut rng);
            dist(&u, &v)
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bins = if n_pairs == 1 { 1 } else { ((n_pairs as f64).sqrt().ceil() as usize).min(200) };
    let top = samples.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let width = top / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &x in &samples {
        let b = ((x / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let density = counts.iter().map(|&c| c as f64 / (n_pairs as f64 * width)).collect();
    Ok(DistanceHistogram { edges, density, samples })
}

/// Directional averages of |𝒦(ωρ)|² over a grid of ρ.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub r_grid: Vec<f64>,
    pub average: Vec<f64>,
    /// average · ρ^{d-1}
    pub scaled: Vec<f64>,
    pub sup: f64,
    pub sup_at: f64,
    pub finite: bool,
}

impl DecayReport {
    /// Scaled value at the grid point closest to `r`.
    pub fn scaled_near(&self, r: f64) -> f64 {
        let i = (0..self.r_grid.len())
            .min_by(|&a, &b| (self.r_grid[a] - r).abs().partial_cmp(&(self.r_grid[b] - r).abs()).unwrap())
            .unwrap();
        self.scaled[i]
    }
}

/// Stratified random unit directions, one per stratum.
fn stratified_directions(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from(seed);
    if d == 2 {
        return (0..n)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + rng.random::<f64>()) / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let nz = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let np = 2 * nz;
    let mut out = Vec::with_capacity(nz * np);
    for i in 0..nz {
        for j in 0..np {
            let z = -1.0 + 2.0 * (i as f64 + rng.random::<f64>()) / nz as f64;
            let p = 2.0 * PI * (j as f64 + rng.random::<f64>()) / np as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            out.push(vec![s * p.cos(), s * p.sin(), z]);
        }
    }
    out
}

pub fn decay_check(surface: &Hypersurface, r_grid: &[f64], n_directions: usize, seed: u64) -> Result<DecayReport> {
    if r_grid.is_empty() || n_directions == 0 {
        return Err(Error::EmptySample);
    }
    if r_grid.iter().any(|&r| !(r > 0.0)) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("r_grid must be positive and increasing");
    }
    let dirs = stratified_directions(surface.d, n_directions, seed);
    let mut average = Vec::with_capacity(r_grid.len());
    let mut scaled = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut acc = 0.0;
        for w in &dirs {
            let x: Vec<f64> = w.iter().map(|v| v * r).collect();
            acc += surface.fourier(&x).norm_sqr();
        }
        let avg = acc / dirs.len() as f64;
        average.push(avg);
        scaled.push(avg * r.powi(surface.d as i32 - 1));
    }
    let (mut sup, mut sup_at) = (f64::NEG_INFINITY, r_grid[0]);
    for (s, &r) in scaled.iter().zip(r_grid) {
        if *s > sup {
            sup = *s;
            sup_at = r;
        }
    }
    Ok(DecayReport { r_grid: r_grid.to_vec(), average, scaled, finite: sup.is_finite(), sup, sup_at })
}

/// Ratios σ(∂Δ ∩ B(y, s)) / s^{d-1} over random node centers.
#[derive(Clone, Debug, Serialize)]
pub struct AdrReport {
    pub s_grid: Vec<f64>,
    pub min_ratio: Vec<f64>,
    pub max_ratio: Vec<f64>,
    pub overall_min: f64,
    pub overall_max: f64,
}

pub fn adr_check(surface: &Hypersurface, n_centers: usize, s_grid: &[f64], seed: u64) -> Result<AdrReport> {
    if n_centers == 0 || s_grid.is_empty() {
        return Err(Error::EmptySample);
    }
    if s_grid.iter().any(|&s| !(s > 0.0) || s > surface.diameter()) {
        return domain("s must lie in (0, diameter]");
    }
    let mut rng = rng_from(seed);
    let centers: Vec<usize> = (0..n_centers).map(|_| rng.random_range(0..surface.len())).collect();
    let mut min_ratio = vec![f64::INFINITY; s_grid.len()];
    let mut max_ratio = vec![0.0f64; s_grid.len()];
    for &c in &centers {
        let y = &surface.nodes[c];
        let dists: Vec<f64> = surface.nodes.iter().map(|p| dist(p, y)).collect();
        for (k, &s) in s_grid.iter().enumerate() {
            let mut count = 0;
            let mut mass = 0.0;
            for (dd, w) in dists.iter().zip(&surface.weights) {
                if *dd < s {
                    count += 1;
                    mass += w;
                }
            }
            if count < 8 {
                return Err(Error::ResolutionTooCoarse { radius: s, nodes: count });
            }
            let ratio = mass / s.powi(surface.d as i32 - 1);
            min_ratio[k] = min_ratio[k].min(ratio);
            max_ratio[k] = max_ratio[k].max(ratio);
        }
    }
    let overall_min = min_ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let overall_max = max_ratio.iter().copied().fold(0.0, f64::max);
    Ok(AdrReport { s_grid: s_grid.to_vec(), min_ratio, max_ratio, overall_min, overall_max })
}

/// ∬ G(‖x-y‖) dσ dσ by two routes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DoubleIntegral {
    /// Node-based double quadrature.
    pub direct: f64,
    /// |∂Δ|² r^{2d-2} ∫ G ψ, spheres only.
    pub psi: Option<f64>,
    pub discrepancy: Option<f64>,
}

impl DoubleIntegral {
    /// The more accurate of the two routes.
    pub fn value(&self) -> f64 {
        self.psi.unwrap_or(self.direct)
    }
}

/// Relative tolerance of the adaptive one-dimensional rules used here.
const DINT_TOL: f64 = 1e-11;

/// ψ route only (spheres).
pub fn double_integral_psi<G: Fn(f64) -> f64>(d: usize, r: f64, g: G) -> f64 {
    let area = surface_area(Shape::Sphere, d, r);
    area * area * psi_expectation(d, r, g, DINT_TOL)
}

/// `beta` is the order of the singularity of G at 0 (G = O(ρ^{-β})); use 0
/// for bounded G, in which case coincident nodes are kept.
pub fn double_surface_integral<G: Fn(f64) -> f64 + Sync>(surface: &Hypersurface, g: G, beta: f64) -> Result<DoubleIntegral> {
    let d = surface.d;
    if beta >= (d - 1) as f64 {
        return Err(Error::SingularIntegrand { exponent: beta, d });
    }
    let direct = match (surface.shape, d) {
        (Shape::Sphere, 2) => direct_circle(surface, &g, beta),
        (Shape::Sphere, _) => direct_sphere_polar(surface, &g),
        (Shape::Cube, _) => direct_cube(surface, &g),
    };
    let psi = match surface.shape {
        Shape::Sphere => Some(double_integral_psi(d, surface.r, &g)),
        Shape::Cube => None,
    };
    let discrepancy = psi.map(|p| ((direct - p) / p).abs());
    Ok(DoubleIntegral { direct, psi, discrepancy })
}

/// Leading coefficient c of G(ρ) ≈ c ρ^{-β} at 0.
fn singular_coefficient<G: Fn(f64) -> f64>(g: &G, beta: f64, scale: f64) -> f64 {
    let eps = 1e-9 * scale;
    g(eps) * eps.powf(beta)
}

/// Punctured periodic trapezoid on the equispaced circle nodes, corrected
/// for an algebraic singularity by the zeta term of the generalized
/// Euler-Maclaurin expansion.
fn direct_circle<G: Fn(f64) -> f64>(s: &Hypersurface, g: &G, beta: f64) -> f64 {
    let n = s.len();
    let h = s.weights[0];
    let self_term = if beta == 0.0 {
        h * g(0.0)
    } else {
        -2.0 * zeta(beta) * h.powf(1.0 - beta) * singular_coefficient(g, beta, s.r)
    };
    let mut total = 0.0;
    for i in 0..n {
        let mut row = self_term;
        for j in 0..n {
            if j != i {
                row += s.weights[j] * g(dist(&s.nodes[i], &s.nodes[j]));
            }
        }
        total += s.weights[i] * row;
    }
    total
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `e`.
fn tangent_frame(e: &[f64]) -> ([f64; 3], [f64; 3]) {
    let k = (0..3).min_by(|&a, &b| e[a].abs().partial_cmp(&e[b].abs()).unwrap()).unwrap();
    let mut a = [0.0; 3];
    a[k] = 1.0;
    let dot: f64 = (0..3).map(|i| a[i] * e[i]).sum();
    for i in 0..3 {
        a[i] -= dot * e[i];
    }
    let na = norm(&a);
    for v in a.iter_mut() {
        *v /= na;
    }
    let b = [e[1] * a[2] - e[2] * a[1], e[2] * a[0] - e[0] * a[2], e[0] * a[1] - e[1] * a[0]];
    (a, b)
}

/// Outer sum over quadrature nodes of row integrals ∫ G(‖x - y‖) dσ(y),
/// each computed in geodesic polar coordinates centred at the node.
fn direct_sphere_polar<G: Fn(f64) -> f64 + Sync>(s: &Hypersurface, g: &G) -> f64 {
    use rayon::prelude::*;
    let r = s.r;
    let n_az = 16;
    let rows: Vec<f64> = s
        .nodes
        .par_iter()
        .map(|x| {
            let e: Vec<f64> = x.iter().map(|v| v / r).collect();
            let (a, b) = tangent_frame(&e);
            tanh_sinh(
                |_t, ga, gb| {
                    let sin_t = if ga < gb { ga.sin() } else { gb.sin() };
                    let cos_m1 = -2.0 * (0.5 * ga).sin().powi(2);
                    let mut acc = 0.0;
                    for k in 0..n_az {
                        let p = 2.0 * PI * (k as f64 + 0.5) / n_az as f64;
                        let (cp, sp) = (p.cos(), p.sin());
                        let mut dd = 0.0;
                        for i in 0..3 {
                            let v = r * (cos_m1 * e[i] + sin_t * (cp * a[i] + sp * b[i]));
                            dd += v * v;
                        }
                        acc += g(dd.sqrt());
                    }
                    acc * 2.0 * PI / n_az as f64 * r * r * sin_t
                },
                0.0,
                PI,
                DINT_TOL,
            )
        })
        .collect();
    rows.iter().zip(&s.weights).map(|(row, w)| row * w).sum()
}

/// Punctured product rule plus the exact integral of G over the flat cell
/// around each node.
fn direct_cube<G: Fn(f64) -> f64 + Sync>(s: &Hypersurface, g: &G) -> f64 {
    use rayon::prelude::*;
    let a = 2.0 * s.r / s.resolution as f64;
    let half = 0.5 * a;
    let self_cell = if s.d == 2 {
        2.0 * tanh_sinh(|x, _, _| g(x), 0.0, half, DINT_TOL)
    } else {
        // square cell in polar coordinates, eight congruent triangles
        8.0 * tanh_sinh(
            |phi, _, _| {
                let rmax = half / phi.cos();
                tanh_sinh(|rho, _, _| g(rho) * rho, 0.0, rmax, DINT_TOL)
            },
            0.0,
            0.25 * PI,
            DINT_TOL,
        )
    };
    let rows: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|i| {
            let mut row = self_cell;
            for j in 0..s.len() {
                if j != i {
                    row += s.weights[j] * g(dist(&s.nodes[i], &s.nodes[j]));
                }
            }
            row * s.weights[i]
        })
        .collect();
    rows.iter().sum()
}

/// c₁(κ, α, Δ) = ∫ z^{-κα} ψ_Δ(z) dz at unit scale.
pub fn c1_constant(kappa: usize, alpha: f64, shape: Shape, d: usize) -> Result<f64> {
    let ka = kappa as f64 * alpha;
    let limit = (d - 1) as f64;
    if ka >= limit {
        return Err(Error::DivergentIntegral { kappa_alpha: ka, limit });
    }
    if !(alpha > 0.0) {
        return domain("alpha must be positive");
    }
    match shape {
        Shape::Sphere => Ok(psi_expectation(d, 1.0, |z| z.powf(-ka), DINT_TOL)),
        Shape::Cube => {
            let s = build_surface(Shape::Cube, d, 1.0, 64)?;
            let v = double_surface_integral(&s, |z| z.powf(-ka), ka)?;
            Ok(v.direct / (s.area() * s.area()))
        }
    }
}
