//! Sampling the Hermite-type limit X_κ(Δ) by discretizing the multiple
//! Wiener-Itô integral on a spectral grid, and its variance oracle.
//!
//! Noise convention: E|W(A)|² = |A| and W(-A) = conj W(A). Each cell a
//! carries Z_a = c₂^{1/2} ∫_a ‖λ‖^{-(d-α)/2} W(dλ), approximated by a
//! complex Gaussian with E|Z_a|² = m_a = ∫_a c₂‖λ‖^{α-d} dλ, evaluated at the
//! mass centroid of the cell. Tuples never use a cell together with itself
//! or its mirror.

use crate::covmodel::c2;
use crate::error::{domain, Error, Result};
use crate::geometry::{double_integral_psi, double_surface_integral, Hypersurface, Shape};
use crate::io::{csv_writer, fmt_f64};
use crate::quad::gauss_legendre;
use crate::rng::{derive_seed, rng_from};
use crate::special::factorial;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Default cap on the number of ordered tuples in exact enumeration.
pub const DEFAULT_TUPLE_CAP: f64 = 5e7;
/// Dyadic levels used to resolve the excluded block around the origin.
pub const ORIGIN_LEVELS: usize = 12;
const CELL_RULE: usize = 8;

/// Axis-aligned cube cell given by its lower corner and side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCell {
    pub lower: Vec<f64>,
    pub side: f64,
    /// Has the origin as a vertex.
    pub corner: bool,
}

impl GridCell {
    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().map(|l| l + 0.5 * self.side).collect()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.lower.len() as i32)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralGrid {
    pub d: usize,
    pub lambda: f64,
    pub cells_per_axis: usize,
    /// Uniform cells of one half-space, the 2^d cells touching the origin
    /// left out.
    pub half_cells: Vec<GridCell>,
    /// Half-space representatives of a dyadic refinement of the left-out
    /// block, down to 2^d corner cells at the finest level.
    pub origin_refinement: Vec<GridCell>,
}

fn in_half_space(center: &[f64]) -> bool {
    for &c in center {
        if c > 0.0 {
            return true;
        }
        if c < 0.0 {
            return false;
        }
    }
    false
}

fn multi_indices(d: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(d as u32)).map(move |mut k| {
        let mut idx = vec![0; d];
        for v in idx.iter_mut() {
            *v = k % n;
            k /= n;
        }
        idx
    })
}

pub fn build_grid(d: usize, lambda: f64, cells_per_axis: usize) -> Result<SpectralGrid> {
    build_grid_with_levels(d, lambda, cells_per_axis, ORIGIN_LEVELS)
}

/// `levels = 0` leaves the origin block empty.
pub fn build_grid_with_levels(d: usize, lambda: f64, cells_per_axis: usize, levels: usize) -> Result<SpectralGrid> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if cells_per_axis < 8 || cells_per_axis % 2 != 0 {
        return domain("cells_per_axis must be even and at least 8");
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return domain("Lambda must be positive");
    }
    let n = cells_per_axis;
    let h = 2.0 * lambda / n as f64;
    let mut half_cells = Vec::new();
    for idx in multi_indices(d, n) {
        if idx.iter().all(|&i| i == n / 2 - 1 || i == n / 2) {
            continue;
        }
        let lower: Vec<f64> = idx.iter().map(|&i| -lambda + i as f64 * h).collect();
        let cell = GridCell { lower, side: h, corner: false };
        if in_half_space(&cell.center()) {
            half_cells.push(cell);
        }
    }
    let mut origin_refinement = Vec::new();
    let mut block = h; // current block is [-block, block]^d
    for _ in 0..levels {
        let s = 0.5 * block;
        for idx in multi_indices(d, 4) {
            if idx.iter().all(|&i| i == 1 || i == 2) {
                continue;
            }
            let lower: Vec<f64> = idx.iter().map(|&i| -block + i as f64 * s).collect();
            let cell = GridCell { lower, side: s, corner: false };
            if in_half_space(&cell.center()) {
                origin_refinement.push(cell);
            }
        }
        block = s;
    }
    for idx in multi_indices(d, if levels == 0 { 0 } else { 2 }) {
        let lower: Vec<f64> = idx.iter().map(|&i| if i == 0 { -block } else { 0.0 }).collect();
        let cell = GridCell { lower, side: block, corner: true };
        if in_half_space(&cell.center()) {
            origin_refinement.push(cell);
        }
    }
    Ok(SpectralGrid { d, lambda, cells_per_axis, half_cells, origin_refinement })
}

/// Mass ∫ c₂‖λ‖^{α-d} and mass centroid of a cell.
fn cell_mass(cell: &GridCell, alpha: f64, c: f64, rule: &(Vec<f64>, Vec<f64>)) -> (f64, Vec<f64>) {
    let d = cell.lower.len();
    let p = alpha - d as f64;
    let q = rule.0.len();
    if !cell.corner {
        let h = 0.5 * cell.side;
        let mut mass = 0.0;
        let mut moment = vec![0.0; d];
        let mut pt = vec![0.0; d];
        for k in 0..q.pow(d as u32) {
            let mut rem = k;
            let mut w = 1.0;
            for (i, v) in pt.iter_mut().enumerate() {
                let j = rem % q;
                rem /= q;
                *v = cell.lower[i] + h * (1.0 + rule.0[j]);
                w *= rule.1[j] * h;
            }
            let f = w * pt.iter().map(|x| x * x).sum::<f64>().powf(0.5 * p);
            mass += f;
            for i in 0..d {
                moment[i] += f * pt[i];
            }
        }
        let centroid = moment.iter().map(|m| m / mass).collect();
        return (c * mass, centroid);
    }
    // corner cell [0,s]^d up to signs: pyramids over the far faces with apex
    // at the origin; the radial factor integrates to 1/α (mass) and
    // 1/(α+1) (first moment)
    let s = cell.side;
    let h = 0.5 * s;
    let (mut i0, mut i1) = (0.0, 0.0);
    for k in 0..q.pow(d as u32 - 1) {
        let mut rem = k;
        let mut w = 1.0;
        let mut z2 = 0.0;
        let mut z_first = 0.0;
        for t in 0..d - 1 {
            let j = rem % q;
            rem /= q;
            let z = h * (1.0 + rule.0[j]);
            w *= rule.1[j] * h;
            z2 += z * z;
            if t == 0 {
                z_first = z;
            }
        }
        let f = w * (s * s + z2).powf(0.5 * p);
        i0 += f;
        i1 += f * z_first;
    }
    let mass = d as f64 * s / alpha * i0;
    let coord = s / (alpha + 1.0) * (s * i0 + (d - 1) as f64 * i1) / mass;
    let centroid = cell.lower.iter().map(|&l| if l < 0.0 { -coord } else { coord }).collect();
    (c * mass, centroid)
}

/// One realization and its imaginary residual |Im|/|value|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Draw {
    pub value: f64,
    pub imag_residual: f64,
}

/// Precomputed cell data for repeated draws of X_κ.
pub struct LimitSampler {
    pub kappa: usize,
    pub alpha: f64,
    pub d: usize,
    pub lambda: f64,
    pub cells_per_axis: usize,
    /// Full cell list: half representatives 0..M, mirrors M..2M.
    points: Vec<Vec<f64>>,
    masses: Vec<f64>,
    m_half: usize,
    surface: Hypersurface,
    kernel_vec: Vec<Complex64>,
    kernel_re: Vec<f64>,
    kernel_im: Option<Vec<f64>>,
    tuple_cap: f64,
}

/// Number of ordered κ-tuples of distinct ± pairs out of `pairs` pairs.
pub fn tuple_count(pairs: usize, kappa: usize) -> f64 {
    (0..kappa).map(|i| 2.0 * (pairs as f64 - i as f64)).product()
}

impl LimitSampler {
    pub fn new(grid: &SpectralGrid, surface_unit: &Hypersurface, kappa: usize, alpha: f64) -> Result<Self> {
        Self::with_cap(grid, surface_unit, kappa, alpha, DEFAULT_TUPLE_CAP)
    }

    pub fn with_cap(grid: &SpectralGrid, surface_unit: &Hypersurface, kappa: usize, alpha: f64, tuple_cap: f64) -> Result<Self> {
        if kappa < 1 {
            return domain("kappa must be at least 1");
        }
        if surface_unit.d != grid.d {
            return domain("surface and grid dimensions differ");
        }
        let d = grid.d;
        let ka = kappa as f64 * alpha;
        let limit = (d - 1) as f64;
        if !(alpha > 0.0) || ka >= limit {
            return Err(Error::Domain(format!("kappa*alpha = {ka} must lie in (0, d-1 = {limit})")));
        }
        let c = c2(d, alpha)?;
        let rule = gauss_legendre(CELL_RULE);
        let cells: Vec<&GridCell> = grid.half_cells.iter().chain(&grid.origin_refinement).collect();
        let mc: Vec<(f64, Vec<f64>)> = cells.par_iter().map(|cell| cell_mass(cell, alpha, c, &rule)).collect();
        let m_half = mc.len();
        let mut points = Vec::with_capacity(2 * m_half);
        let mut masses = Vec::with_capacity(2 * m_half);
        for (m, p) in &mc {
            points.push(p.clone());
            masses.push(*m);
        }
        for (m, p) in &mc {
            points.push(p.iter().map(|v| -v).collect());
            masses.push(*m);
        }
        let mut s = Self {
            kappa,
            alpha,
            d,
            lambda: grid.lambda,
            cells_per_axis: grid.cells_per_axis,
            points,
            masses,
            m_half,
            surface: surface_unit.clone(),
            kernel_vec: Vec::new(),
            kernel_re: Vec::new(),
            kernel_im: None,
            tuple_cap,
        };
        if kappa == 1 {
            s.kernel_vec = s.points.iter().map(|p| s.surface.fourier(p)).collect();
        } else if kappa == 2 && tuple_count(m_half, 2) <= tuple_cap {
            let n = 2 * m_half;
            let rows: Vec<Vec<Complex64>> = (0..n)
                .into_par_iter()
                .map(|a| (0..n).map(|b| s.surface.fourier(&add(&s.points[a], &s.points[b]))).collect())
                .collect();
            s.kernel_re = rows.iter().flat_map(|r| r.iter().map(|z| z.re)).collect();
            if rows.iter().flatten().any(|z| z.im != 0.0) {
                s.kernel_im = Some(rows.iter().flat_map(|r| r.iter().map(|z| z.im)).collect());
            }
        }
        Ok(s)
    }

    /// Number of half-space cells, including the origin refinement.
    pub fn pairs(&self) -> usize {
        self.m_half
    }

    pub fn total_tuples(&self) -> f64 {
        tuple_count(self.m_half, self.kappa)
    }

    /// Σ_a m_a over the full grid.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    fn mirror(&self, a: usize) -> usize {
        if a < self.m_half {
            a + self.m_half
        } else {
            a - self.m_half
        }
    }

    fn noise(&self, seed: u64) -> Vec<Complex64> {
        let mut rng = rng_from(seed);
        let mut z = vec![Complex64::new(0.0, 0.0); 2 * self.m_half];
        for a in 0..self.m_half {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let v = Complex64::new(x, y) * (0.5 * self.masses[a]).sqrt();
            z[a] = v;
            z[a + self.m_half] = v.conj();
        }
        z
    }

    fn kernel(&self, x: &[f64]) -> Complex64 {
        self.surface.fourier(x)
    }

    fn finish(&self, v: Complex64) -> Draw {
        let residual = if v.im == 0.0 { 0.0 } else { v.im.abs() / v.norm() };
        Draw { value: v.re, imag_residual: residual }
    }

    /// Full off-diagonal sum. Noise comes from derive_seed(seed, 0).
    pub fn draw(&self, seed: u64) -> Result<Draw> {
        let z = self.noise(derive_seed(seed, 0));
        let total = self.total_tuples();
        match self.kappa {
            1 => {
                let v: Complex64 = self.kernel_vec.iter().zip(&z).map(|(k, w)| k * w).sum();
                Ok(self.finish(v))
            }
            2 if total <= self.tuple_cap => Ok(self.finish(self.quadratic_form(&z))),
            _ if total <= self.tuple_cap => Ok(self.finish(self.enumerate(&z))),
            _ => Err(Error::BudgetExceeded { tuples: total, cap: self.tuple_cap }),
        }
    }

    fn quadratic_form(&self, z: &[Complex64]) -> Complex64 {
        let n = 2 * self.m_half;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            let row = &self.kernel_re[a * n..(a + 1) * n];
            let (mut sr, mut si) = (0.0, 0.0);
            for (k, w) in row.iter().zip(z) {
                sr += k * w.re;
                si += k * w.im;
            }
            let mut y = Complex64::new(sr, si);
            if let Some(im) = &self.kernel_im {
                let rowi = &im[a * n..(a + 1) * n];
                let (mut tr, mut ti) = (0.0, 0.0);
                for (k, w) in rowi.iter().zip(z) {
                    tr -= k * w.im;
                    ti += k * w.re;
                }
                y += Complex64::new(tr, ti);
            }
            // drop b = a and b = mirror(a)
            let abar = self.mirror(a);
            y -= self.k_entry(a, a) * z[a] + self.k_entry(a, abar) * z[abar];
            acc += z[a] * y;
        }
        acc
    }

    fn k_entry(&self, a: usize, b: usize) -> Complex64 {
        let n = 2 * self.m_half;
        let im = self.kernel_im.as_ref().map(|v| v[a * n + b]).unwrap_or(0.0);
        Complex64::new(self.kernel_re[a * n + b], im)
    }

    fn enumerate(&self, z: &[Complex64]) -> Complex64 {
        let mut used = vec![false; self.m_half];
        let mut sum_point = vec![0.0; self.d];
        self.recurse(z, &mut used, &mut sum_point, Complex64::new(1.0, 0.0), self.kappa)
    }

    fn recurse(&self, z: &[Complex64], used: &mut [bool], sum_point: &mut [f64], prod: Complex64, left: usize) -> Complex64 {
        if left == 0 {
            return self.kernel(sum_point) * prod;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..2 * self.m_half {
            let pair = a % self.m_half;
            if used[pair] {
                continue;
            }
            used[pair] = true;
            for (s, p) in sum_point.iter_mut().zip(&self.points[a]) {
                *s += p;
            }
            acc += self.recurse(z, used, sum_point, prod * z[a], left - 1);
            for (s, p) in sum_point.iter_mut().zip(&self.points[a]) {
                *s -= p;
            }
            used[pair] = false;
        }
        acc
    }

    /// Unbiased subsampled estimate from `n_tuples` uniform ordered tuples,
    /// each averaged with its mirror tuple. Noise from derive_seed(seed, 0)
    /// as in [`LimitSampler::draw`], tuples from derive_seed(seed, 1). Falls
    /// back to the exact sum when `n_tuples` covers every tuple.
    pub fn draw_mc(&self, n_tuples: usize, seed: u64) -> Result<Draw> {
        if n_tuples == 0 {
            return Err(Error::EmptySample);
        }
        let total = self.total_tuples();
        if n_tuples as f64 >= total && total <= self.tuple_cap {
            return self.draw(seed);
        }
        let z = self.noise(derive_seed(seed, 0));
        let mut rng = rng_from(derive_seed(seed, 1));
        let mut chosen: Vec<usize> = Vec::with_capacity(self.kappa);
        let mut acc = 0.0;
        let mut sum_point = vec![0.0; self.d];
        for _ in 0..n_tuples {
            chosen.clear();
            let mut prod = Complex64::new(1.0, 0.0);
            sum_point.iter_mut().for_each(|v| *v = 0.0);
            while chosen.len() < self.kappa {
                let pair = rng.random_range(0..self.m_half);
                if chosen.iter().any(|&c| c % self.m_half == pair) {
                    continue;
                }
                let a = if rng.random::<bool>() { pair } else { pair + self.m_half };
                chosen.push(a);
                prod *= z[a];
                for (s, p) in sum_point.iter_mut().zip(&self.points[a]) {
                    *s += p;
                }
            }
            acc += (self.kernel(&sum_point) * prod).re;
        }
        Ok(Draw { value: total * acc / n_tuples as f64, imag_residual: 0.0 })
    }

    /// Draw i uses seed derive_seed(base_seed, i).
    pub fn draws(&self, n: usize, base_seed: u64) -> Result<Vec<Draw>> {
        (0..n as u64).into_par_iter().map(|i| self.draw(derive_seed(base_seed, i))).collect()
    }

    pub fn draws_mc(&self, n: usize, n_tuples: usize, base_seed: u64) -> Result<Vec<Draw>> {
        (0..n as u64).into_par_iter().map(|i| self.draw_mc(n_tuples, derive_seed(base_seed, i))).collect()
    }

    /// Exact variance of the discretized integral, κ ∈ {1, 2}.
    pub fn grid_variance(&self) -> Option<f64> {
        match self.kappa {
            1 => Some(self.kernel_vec.iter().zip(&self.masses).map(|(k, m)| k.norm_sqr() * m).sum()),
            2 => {
                let n = 2 * self.m_half;
                let rows: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|a| {
                        let abar = self.mirror(a);
                        (0..n)
                            .filter(|&b| b != a && b != abar)
                            .map(|b| self.kernel(&add(&self.points[a], &self.points[b])).norm_sqr() * self.masses[b])
                            .sum::<f64>()
                            * self.masses[a]
                    })
                    .collect();
                Some(2.0 * rows.iter().sum::<f64>())
            }
            _ => None,
        }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sample_x_kappa(grid: &SpectralGrid, surface_unit: &Hypersurface, kappa: usize, alpha: f64, seed: u64) -> Result<Draw> {
    LimitSampler::new(grid, surface_unit, kappa, alpha)?.draw(seed)
}

pub fn sample_x_kappa_mc(
    grid: &SpectralGrid,
    surface_unit: &Hypersurface,
    kappa: usize,
    alpha: f64,
    n_tuples: usize,
    seed: u64,
) -> Result<Draw> {
    LimitSampler::new(grid, surface_unit, kappa, alpha)?.draw_mc(n_tuples, seed)
}

/// κ! ∬ ‖x - y‖^{-κα} dσ dσ over the given surface.
pub fn variance_oracle(kappa: usize, alpha: f64, surface_unit: &Hypersurface) -> Result<f64> {
    let ka = kappa as f64 * alpha;
    let limit = (surface_unit.d - 1) as f64;
    if ka >= limit {
        return Err(Error::DivergentIntegral { kappa_alpha: ka, limit });
    }
    let g = |rho: f64| rho.powf(-ka);
    let v = match surface_unit.shape {
        Shape::Sphere => double_integral_psi(surface_unit.d, surface_unit.r, g),
        Shape::Cube => double_surface_integral(surface_unit, g, ka)?.direct,
    };
    Ok(factorial(kappa) * v)
}

/// CSV with columns draw_index, value, kappa, alpha, Lambda, cells_per_axis.
pub fn write_draws_csv<W: Write>(out: W, draws: &[Draw], kappa: usize, alpha: f64, lambda: f64, cells_per_axis: usize) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["draw_index", "value", "kappa", "alpha", "Lambda", "cells_per_axis"])?;
    for (i, d) in draws.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(d.value), kappa.to_string(), fmt_f64(alpha), fmt_f64(lambda), cells_per_axis.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
