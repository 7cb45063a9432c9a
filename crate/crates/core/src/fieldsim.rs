//! Sampling the isotropic Gaussian field on finite point sets.

use crate::covmodel::{FieldSpec, SlowKind};
use crate::error::{domain, Error, Result};
use crate::geometry::Hypersurface;
use crate::rng::{derive_seed, rng_from};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Largest point set accepted by the Cholesky sampler.
pub const CHOLESKY_MAX_POINTS: usize = 4096;
/// Diagonal jitter used on a failed first factorization.
pub const JITTER: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    CholeskyExact,
    RandomSpectral { n_features: usize },
}

impl Default for Method {
    fn default() -> Self {
        Method::CholeskyExact
    }
}

#[derive(Clone, Debug)]
pub struct FieldSample {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub method: Method,
    pub seed: u64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Covariance matrix of the model at `points`.
pub fn covariance_matrix(spec: &FieldSpec, points: &[Vec<f64>]) -> DMatrix<f64> {
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = spec.covariance(0.0);
        for j in 0..i {
            let v = spec.covariance(dist(&points[i], &points[j]));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Lower Cholesky factor of the covariance matrix, reusable across draws.
#[derive(Clone, Debug)]
pub struct CholeskySampler {
    factor: DMatrix<f64>,
}

impl CholeskySampler {
    pub fn new(spec: &FieldSpec, points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if points.len() > CHOLESKY_MAX_POINTS {
            return domain(format!("{} points exceed the Cholesky limit {CHOLESKY_MAX_POINTS}", points.len()));
        }
        let sigma = covariance_matrix(spec, points);
        Self::from_covariance(sigma)
    }

    pub fn from_covariance(sigma: DMatrix<f64>) -> Result<Self> {
        if let Some(c) = sigma.clone().cholesky() {
            return Ok(Self { factor: c.l() });
        }
        let n = sigma.nrows();
        let jittered = sigma + DMatrix::identity(n, n) * JITTER;
        match jittered.cholesky() {
            Some(c) => Ok(Self { factor: c.l() }),
            None => Err(Error::NotPositiveDefinite),
        }
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let n = self.factor.nrows();
        let mut rng = rng_from(seed);
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.factor * z).iter().copied().collect()
    }
}

pub fn sample_cholesky(spec: &FieldSpec, points: &[Vec<f64>], seed: u64) -> Result<FieldSample> {
    let s = CholeskySampler::new(spec, points)?;
    Ok(FieldSample { points: points.to_vec(), values: s.sample(seed), method: Method::CholeskyExact, seed })
}

/// Radial frequency from the law ∝ u^{d-1} f(u) on (0, u_max].
fn radial_frequency<R: Rng>(spec: &FieldSpec, rng: &mut R, envelope: f64) -> f64 {
    let a = spec.alpha;
    match spec.slowly_varying {
        SlowKind::Constant => spec.u_max * rng.random::<f64>().powf(1.0 / a),
        SlowKind::LogShifted => loop {
            // proposal ∝ u^{α/2-1}, target ∝ u^{α-1} ln(e + 1/u)
            let u = spec.u_max * rng.random::<f64>().powf(2.0 / a);
            let accept = u.powf(0.5 * a) * (std::f64::consts::E + 1.0 / u).ln() / envelope;
            if rng.random::<f64>() < accept {
                return u;
            }
        },
    }
}

fn log_envelope(spec: &FieldSpec) -> f64 {
    let a = spec.alpha;
    let mut m: f64 = 0.0;
    for k in 0..=2000 {
        let u = spec.u_max * (10f64).powf(-12.0 * (k as f64) / 2000.0);
        m = m.max(u.powf(0.5 * a) * (std::f64::consts::E + 1.0 / u).ln());
    }
    1.05 * m
}

fn unit_direction<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-300 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Random-cosine approximation η(x) = √(2/N) Σ cos(⟨λ_k, x⟩ + φ_k).
pub fn sample_spectral(spec: &FieldSpec, points: &[Vec<f64>], n_features: usize, seed: u64) -> Result<FieldSample> {
    if n_features < 64 {
        return domain("n_features must be at least 64");
    }
    spec.validate()?;
    let d = spec.d;
    if points.iter().any(|p| p.len() != d) {
        return domain("point dimension differs from spec.d");
    }
    let mut rng = rng_from(seed);
    let envelope = if spec.slowly_varying == SlowKind::LogShifted { log_envelope(spec) } else { 1.0 };
    let mut freqs = Vec::with_capacity(n_features);
    let mut phases = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        let u = radial_frequency(spec, &mut rng, envelope);
        let w = unit_direction(d, &mut rng);
        freqs.push(w.into_iter().map(|v| v * u).collect::<Vec<f64>>());
        phases.push(2.0 * PI * rng.random::<f64>());
    }
    let amp = (2.0 / n_features as f64).sqrt();
    let values = points
        .iter()
        .map(|x| {
            let s: f64 = freqs
                .iter()
                .zip(&phases)
                .map(|(l, p)| (l.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p).cos())
                .sum();
            amp * s
        })
        .collect();
    Ok(FieldSample { points: points.to_vec(), values, method: Method::RandomSpectral { n_features }, seed })
}

/// Replication i is drawn with seed derive_seed(base_seed, i).
pub fn ensemble(
    spec: &FieldSpec,
    surface: &Hypersurface,
    method: Method,
    n_replications: usize,
    base_seed: u64,
) -> Result<Vec<FieldSample>> {
    let seeds: Vec<u64> = (0..n_replications as u64).map(|i| derive_seed(base_seed, i)).collect();
    ensemble_with_seeds(spec, surface, method, &seeds)
}

pub fn ensemble_with_seeds(spec: &FieldSpec, surface: &Hypersurface, method: Method, seeds: &[u64]) -> Result<Vec<FieldSample>> {
    let points = &surface.nodes;
    match method {
        Method::CholeskyExact => {
            let sampler = CholeskySampler::new(spec, points)?;
            Ok(seeds
                .par_iter()
                .map(|&s| FieldSample { points: Vec::new(), values: sampler.sample(s), method, seed: s })
                .collect::<Vec<_>>()
                .into_iter()
                .map(|mut f| {
                    f.points = points.clone();
                    f
                })
                .collect())
        }
        Method::RandomSpectral { n_features } => seeds.par_iter().map(|&s| sample_spectral(spec, points, n_features, s)).collect(),
    }
}

/// Values only, without copying the points into every replication.
pub fn ensemble_values(spec: &FieldSpec, surface: &Hypersurface, method: Method, n: usize, base_seed: u64) -> Result<Vec<Vec<f64>>> {
    let seeds: Vec<u64> = (0..n as u64).map(|i| derive_seed(base_seed, i)).collect();
    match method {
        Method::CholeskyExact => {
            let sampler = CholeskySampler::new(spec, &surface.nodes)?;
            Ok(seeds.par_iter().map(|&s| sampler.sample(s)).collect())
        }
        Method::RandomSpectral { n_features } => seeds
            .par_iter()
            .map(|&s| sample_spectral(spec, &surface.nodes, n_features, s).map(|f| f.values))
            .collect(),
    }
}

/// CSV with columns replication, node_index, x1..xd, value.
pub fn write_ensemble_csv<W: Write>(out: W, samples: &[FieldSample]) -> Result<()> {
    let d = samples.first().and_then(|s| s.points.first()).map(|p| p.len()).unwrap_or(0);
    let mut w = crate::io::csv_writer(out);
    let mut header = vec!["replication".to_string(), "node_index".to_string()];
    header.extend((1..=d).map(|k| format!("x{k}")));
    header.push("value".into());
    w.write_record(&header)?;
    for (rep, s) in samples.iter().enumerate() {
        for (i, (p, v)) in s.points.iter().zip(&s.values).enumerate() {
            let mut rec = vec![rep.to_string(), i.to_string()];
            rec.extend(p.iter().map(|x| crate::io::fmt_f64(*x)));
            rec.push(crate::io::fmt_f64(*v));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_points_agree() {
        let spec = FieldSpec::constant(2, 0.4).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let s = sample_cholesky(&spec, &pts, 3).unwrap();
        assert!((s.values[0] - s.values[1]).abs() < 1e-4);
    }

    #[test]
    fn inverse_cdf_extremes() {
        let u_max: f64 = 50.0;
        assert_eq!(u_max * 1f64.powf(1.0 / 0.4), u_max);
        assert!(u_max * (1e-300f64).powf(1.0 / 0.4) < 1e-100);
    }
}
