//! Surface functionals K_r, K_{r,κ}, their normalization, exact variances
//! and reduction diagnostics.

use crate::covmodel::FieldSpec;
use crate::error::{domain, Error, Result};
use crate::geometry::{c1_constant, double_integral_psi, double_surface_integral, Hypersurface, Shape};
use crate::hermite::{hermite_poly, HermiteExpansion};
use crate::io::{csv_writer, fmt_f64};
use crate::special::factorial;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// K_r = Σ w_i G(η(x_i)).
pub fn functional_k<G: Fn(f64) -> f64>(values: &[f64], surface: &Hypersurface, g: G) -> f64 {
    values.iter().zip(&surface.weights).map(|(v, w)| w * g(*v)).sum()
}

/// K_{r,κ} = (C_κ/κ!) Σ w_i H_κ(η(x_i)).
pub fn functional_k_kappa(values: &[f64], surface: &Hypersurface, kappa: usize, c_kappa: f64) -> f64 {
    c_kappa / factorial(kappa) * functional_k(values, surface, |v| hermite_poly(kappa, v))
}

/// Multiplies by r^{κα/2 - d + 1} L(r)^{-κ/2}.
pub fn normalize_thm5(value: f64, r: f64, d: usize, alpha: f64, kappa: usize, l_at_r: f64) -> Result<f64> {
    if !(r > 0.0) || !(l_at_r > 0.0) {
        return domain("r and L(r) must be positive");
    }
    let k = kappa as f64;
    Ok(value * r.powf(0.5 * k * alpha - d as f64 + 1.0) * l_at_r.powf(-0.5 * k))
}

/// ∬ B^j(‖x - y‖) over the surface: ψ route on spheres, node route on
/// cubes.
pub fn double_integral_bj(surface: &Hypersurface, spec: &FieldSpec, j: usize) -> Result<f64> {
    let g = |rho: f64| spec.covariance(rho).powi(j as i32);
    match surface.shape {
        Shape::Sphere => Ok(double_integral_psi(surface.d, surface.r, g)),
        Shape::Cube => Ok(double_surface_integral(surface, g, 0.0)?.direct),
    }
}

/// Per-order terms (C_j²/j!) ∬ B^j for j = 1..J.
#[derive(Clone, Debug, Serialize)]
pub struct VarianceBreakdown {
    pub terms: Vec<f64>,
    pub total: f64,
    /// Σ_{j>J} C_j²/j! · ∬B^{κ+1}, an upper bound on the omitted terms.
    pub tail_bound: f64,
}

impl VarianceBreakdown {
    /// Term of order j (1-based).
    pub fn term(&self, j: usize) -> f64 {
        self.terms.get(j - 1).copied().unwrap_or(0.0)
    }

    /// Σ_{j>κ} terms.
    pub fn above(&self, kappa: usize) -> f64 {
        self.terms.iter().skip(kappa).sum()
    }
}

pub fn variance_terms(surface: &Hypersurface, expansion: &HermiteExpansion, spec: &FieldSpec, j_max: usize) -> Result<VarianceBreakdown> {
    if j_max < 1 {
        return domain("J must be at least 1");
    }
    let jt = j_max.min(expansion.truncation_order);
    let mut terms = Vec::with_capacity(jt);
    for j in 1..=jt {
        let c = expansion.coefficients[j];
        if c == 0.0 {
            terms.push(0.0);
        } else {
            terms.push(c * c / factorial(j) * double_integral_bj(surface, spec, j)?);
        }
    }
    let total = terms.iter().sum();
    let tail_mass: f64 = {
        let partial: f64 = (0..=jt).map(|j| expansion.coefficients[j].powi(2) / factorial(j)).sum();
        (expansion.l2_norm_sq - partial).max(0.0)
    };
    let kappa = expansion.rank.unwrap_or(1);
    let tail_bound = if tail_mass > 0.0 { tail_mass * double_integral_bj(surface, spec, kappa + 1)? } else { 0.0 };
    Ok(VarianceBreakdown { terms, total, tail_bound })
}

/// Var K_r = Σ_{j=1}^{J} (C_j²/j!) ∬ B^j.
pub fn variance_exact(surface: &Hypersurface, expansion: &HermiteExpansion, spec: &FieldSpec, j_max: usize) -> Result<f64> {
    Ok(variance_terms(surface, expansion, spec, j_max)?.total)
}

/// Leading term c₁|∂Δ|²(C_κ²/κ!) r^{2d-2-κα} L₀^κ(r).
#[allow(clippy::too_many_arguments)]
pub fn variance_asymptotic(
    kappa: usize,
    alpha: f64,
    d: usize,
    r: f64,
    c_kappa: f64,
    surface_area_unit: f64,
    l0_at_r: f64,
    shape: Shape,
) -> Result<f64> {
    let c1 = c1_constant(kappa, alpha, shape, d)?;
    let k = kappa as f64;
    Ok(c1 * surface_area_unit.powi(2) * c_kappa * c_kappa / factorial(kappa)
        * r.powf(2.0 * d as f64 - 2.0 - k * alpha)
        * l0_at_r.powf(k))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReductionRow {
    pub r: f64,
    /// Var V_r / Var K_r
    pub v_over_k: f64,
    /// Var K_r / Var K_{r,κ}
    pub k_over_kkappa: f64,
    pub tail_bound: f64,
}

/// Variance ratios Var V_r/Var K_r and Var K_r/Var K_{r,κ} across radii.
pub fn reduction_diagnostic(
    surface: &Hypersurface,
    expansion: &HermiteExpansion,
    spec: &FieldSpec,
    r_grid: &[f64],
    j_max: usize,
) -> Result<Vec<ReductionRow>> {
    let kappa = expansion.rank.ok_or(Error::RankNotFound(expansion.truncation_order))?;
    let ka = kappa as f64 * spec.alpha;
    let limit = (surface.d - 1) as f64;
    if ka >= limit {
        return Err(Error::DivergentIntegral { kappa_alpha: ka, limit });
    }
    r_grid
        .iter()
        .map(|&r| {
            let s = surface.rescaled(r)?;
            let b = variance_terms(&s, expansion, spec, j_max)?;
            let vk = b.term(kappa);
            Ok(ReductionRow { r, v_over_k: b.above(kappa) / b.total, k_over_kkappa: b.total / vk, tail_bound: b.tail_bound })
        })
        .collect()
}

/// True when the first ratio strictly decreases along the grid.
pub fn v_ratio_decreasing(rows: &[ReductionRow]) -> bool {
    rows.windows(2).all(|w| w[1].v_over_k < w[0].v_over_k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    ThmNormalized,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::ThmNormalized => "thm_normalized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "thm_normalized" => Ok(Normalization::ThmNormalized),
            other => Err(Error::Config(format!("unknown normalization {other:?}"))),
        }
    }
}

/// Replicated values of one functional at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleEnsemble {
    pub r: f64,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    pub kappa: usize,
    pub seed: u64,
}

impl SampleEnsemble {
    /// CSV with columns r, replication, value, normalization, kappa.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["r", "replication", "value", "normalization", "kappa"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([fmt_f64(self.r), i.to_string(), fmt_f64(*v), self.normalization.as_str().into(), self.kappa.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let mut values = Vec::new();
        let mut meta: Option<(f64, Normalization, usize)> = None;
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| rec.get(i).ok_or_else(|| Error::Config("short CSV row".into()));
            let r: f64 = parse(0)?.parse().map_err(|_| Error::Config("bad r".into()))?;
            let v: f64 = parse(2)?.parse().map_err(|_| Error::Config("bad value".into()))?;
            let n = Normalization::parse(parse(3)?)?;
            let k: usize = parse(4)?.parse().map_err(|_| Error::Config("bad kappa".into()))?;
            match meta {
                None => meta = Some((r, n, k)),
                Some((_, n0, _)) if n0 != n => return Err(Error::Config("mixed normalizations in one ensemble".into())),
                _ => {}
            }
            values.push(v);
        }
        let (r, normalization, kappa) = meta.unwrap_or((f64::NAN, Normalization::Raw, 1));
        Ok(Self { r, values, normalization, kappa, seed: 0 })
    }
}

/// Sample variance and its standard error from the fourth central moment.
pub fn variance_with_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let se = ((m4 - m2 * m2) / n).max(0.0).sqrt();
    (var, se)
}

/// Mean and its standard error.
pub fn mean_with_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Raw K_r per replication and the matching values of
/// (κ!/C_κ)·normalize_thm5(K_r - C_0 |∂Δ(r)|).
pub fn normalized_from_raw(
    raw: &[f64],
    surface: &Hypersurface,
    expansion: &HermiteExpansion,
    spec: &FieldSpec,
) -> Result<(usize, Vec<f64>)> {
    let kappa = expansion.rank.ok_or(Error::RankNotFound(expansion.truncation_order))?;
    let ck = expansion.coefficients[kappa];
    let mean = expansion.coefficients[0] * surface.weights.iter().sum::<f64>();
    let scale = factorial(kappa) / ck;
    let l = spec.l_at(surface.r);
    let out = raw
        .iter()
        .map(|v| normalize_thm5(scale * (v - mean), surface.r, surface.d, spec.alpha, kappa, l))
        .collect::<Result<Vec<f64>>>()?;
    Ok((kappa, out))
}
