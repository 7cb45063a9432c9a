//! Empirical Kolmogorov distances and closed-form rate exponents.
//!
//! Exponents are suprema of provable rates (any ϰ strictly below the value
//! is admissible), not measured rates.

use crate::covmodel::FieldSpec;
use crate::error::{domain, Error, Result};
use crate::fieldsim::{ensemble_values, Method};
use crate::functionals::{functional_k, normalized_from_raw};
use crate::geometry::SurfaceSpec;
use crate::hermite::Integrand;
use crate::io::{csv_writer, fmt_f64};
use crate::limitlaw::{build_grid_with_levels, LimitSampler, ORIGIN_LEVELS};
use crate::rng::derive_seed;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// sup_z |F_a(z) - F_b(z)| between two empirical CDFs.
pub fn kolmogorov_distance(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    if a.iter().chain(&b).any(|v| v.is_nan()) {
        return domain("samples contain NaN");
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let z = a[i].min(b[j]);
        while i < a.len() && a[i] <= z {
            i += 1;
        }
        while j < b.len() && b[j] <= z {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// One-sample DKW half-width: P(sup|F_n - F| > ε) ≤ level.
pub fn dkw_eps(n: usize, level: f64) -> f64 {
    ((2.0 / level).ln() / (2.0 * n as f64)).sqrt()
}

/// Two-sample critical distance at the given level (asymptotic Smirnov
/// bound √(ln(2/level)/2 · (n+m)/(nm))).
pub fn dkw_two_sample(n: usize, m: usize, level: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ((2.0 / level).ln() / 2.0 * (n + m) / (n * m)).sqrt()
}

/// a = 1 for κ < 3, 1/κ otherwise.
pub fn hermite_a(kappa: usize) -> f64 {
    if kappa < 3 {
        1.0
    } else {
        1.0 / kappa as f64
    }
}

/// Hölder exponent 2a/(2+a) of the distance between two integrals of order κ.
pub fn dst_exponent(kappa: usize) -> f64 {
    let a = hermite_a(kappa);
    2.0 * a / (2.0 + a)
}

fn check_alpha(d: usize, alpha: f64, kappa: usize) -> Result<()> {
    if kappa < 1 || d < 2 {
        return domain("need kappa >= 1 and d >= 2");
    }
    let hi = (d - 1) as f64 / kappa as f64;
    if !(alpha > 0.0 && alpha < hi) {
        return domain(format!("alpha must lie in (0, (d-1)/kappa = {hi}), got {alpha}"));
    }
    Ok(())
}

/// 1/(Σ_{j=2}^{κ} 1/(d - jα) + 1/(d - 1 - κα)).
fn kappa1_harmonic(d: usize, alpha: f64, kappa: usize) -> f64 {
    let df = d as f64;
    let s: f64 = (2..=kappa).map(|j| 1.0 / (df - j as f64 * alpha)).sum();
    1.0 / (s + 1.0 / (df - 1.0 - kappa as f64 * alpha))
}

/// ϰ₁ = min(-2τ, 1/(Σ_{j=2}^{κ} 1/(d - jα) + 1/(d - 1 - κα))).
pub fn kappa1(d: usize, alpha: f64, kappa: usize, tau: f64) -> Result<f64> {
    check_alpha(d, alpha, kappa)?;
    if !(tau <= 0.0) {
        return domain("tau must be <= 0");
    }
    Ok((-2.0 * tau).min(kappa1_harmonic(d, alpha, kappa)))
}

/// α(d-1-κα)/(d-1-(κ-1)α).
pub fn tail_exponent(d: usize, alpha: f64, kappa: usize) -> f64 {
    let dm = (d - 1) as f64;
    let k = kappa as f64;
    alpha * (dm - k * alpha) / (dm - (k - 1.0) * alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateCase {
    Case1,
    Case2,
    Tau0,
}

impl RateCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateCase::Case1 => "case1",
            RateCase::Case2 => "case2",
            RateCase::Tau0 => "tau0",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBoundReport {
    pub d: usize,
    pub kappa: usize,
    pub alpha: f64,
    pub tau: f64,
    pub a: f64,
    pub kappa1: f64,
    pub tail_exponent: f64,
    /// Supremum of provable power exponents; 0 when τ = 0.
    pub bound: f64,
    pub case: RateCase,
    pub alpha_star: Option<f64>,
    /// Closed-form best exponent over α for this (d, κ, τ); 0 when τ = 0.
    pub best_bound: f64,
    /// τ = 0: the distance is O(g^{e}(r)) with this exponent e.
    pub g_exponent: Option<f64>,
    /// τ ∈ (-(d-κα)/2, 0], the window where the bound holds.
    pub tau_in_window: bool,
}

fn closed_form_best(d: usize, kappa: usize, tau: f64) -> (RateCase, Option<f64>, f64) {
    let a = hermite_a(kappa);
    let f = a / (2.0 + a);
    if condition_bb(d, kappa) {
        let s = alpha_star(d, kappa).ok();
        let v = s.map(|s| 1.0 / (1.0 / s + 1.0 / ((d - 1) as f64 - kappa as f64 * s))).unwrap_or(f64::NAN);
        (RateCase::Case1, s, f * v.min(-2.0 * tau))
    } else {
        let v = (d - 1) as f64 / (2.0 + 2.0 * kappa as f64);
        (RateCase::Case2, None, f * v.min(-2.0 * tau))
    }
}

pub fn rate_bound(d: usize, alpha: f64, kappa: usize, tau: f64) -> Result<RateBoundReport> {
    let k1 = kappa1(d, alpha, kappa, tau)?;
    let a = hermite_a(kappa);
    let tail = tail_exponent(d, alpha, kappa);
    let window = tau > -((d as f64) - kappa as f64 * alpha) / 2.0;
    if tau == 0.0 {
        let (_, s, _) = closed_form_best(d, kappa, -1.0);
        return Ok(RateBoundReport {
            d,
            kappa,
            alpha,
            tau,
            a,
            kappa1: k1,
            tail_exponent: tail,
            bound: 0.0,
            case: RateCase::Tau0,
            alpha_star: s,
            best_bound: 0.0,
            g_exponent: Some(dst_exponent(kappa)),
            tau_in_window: true,
        });
    }
    let (case, s, best) = closed_form_best(d, kappa, tau);
    Ok(RateBoundReport {
        d,
        kappa,
        alpha,
        tau,
        a,
        kappa1: k1,
        tail_exponent: tail,
        bound: a / (2.0 + a) * tail.min(k1),
        case,
        alpha_star: s,
        best_bound: best,
        g_exponent: None,
        tau_in_window: window,
    })
}

/// κ/(d-1) < Σ_{j=2}^{κ} 1/((d-1)(1 - j/κ) + 1).
pub fn condition_bb(d: usize, kappa: usize) -> bool {
    if kappa < 2 || d < 2 {
        return false;
    }
    let dm = (d - 1) as f64;
    let k = kappa as f64;
    let s: f64 = (2..=kappa).map(|j| 1.0 / (dm * (1.0 - j as f64 / k) + 1.0)).sum();
    k / dm < s
}

/// Root of 1/α = Σ_{j=2}^{κ} 1/(d - jα) on (0, (d-1)/κ).
pub fn alpha_star(d: usize, kappa: usize) -> Result<f64> {
    if !condition_bb(d, kappa) {
        return Err(Error::NoRoot { d, kappa });
    }
    let df = d as f64;
    let f = |a: f64| 1.0 / a - (2..=kappa).map(|j| 1.0 / (df - j as f64 * a)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, (d - 1) as f64 / kappa as f64);
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form best exponent: Case 1 at α*, Case 2 at α = (d-1)/(κ+1).
pub fn best_bound(d: usize, kappa: usize, tau: f64) -> Result<RateBoundReport> {
    if !(tau < 0.0) {
        return domain("best_bound needs tau < 0");
    }
    let alpha = match alpha_star(d, kappa) {
        Ok(s) => s,
        Err(_) => (d - 1) as f64 / (kappa as f64 + 1.0),
    };
    let mut r = rate_bound(d, alpha, kappa, tau)?;
    r.bound = r.best_bound;
    Ok(r)
}

/// Grid maximum of rate_bound over α ∈ (0, (d-1)/κ): (α, exponent).
pub fn scan_alpha(d: usize, kappa: usize, tau: f64, n: usize) -> Result<(f64, f64)> {
    let hi = (d - 1) as f64 / kappa as f64;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for i in 1..n {
        let a = hi * i as f64 / n as f64;
        let b = rate_bound(d, a, kappa, tau)?.bound;
        if b > best.1 {
            best = (a, b);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Allocation {
    pub gaps: Vec<f64>,
    pub value: f64,
}

/// Gaps g_i ≥ 0 with Σg_i = b maximizing min_i g_i x_i.
pub fn maximize_min_allocation(x: &[f64], b: f64) -> Result<Allocation> {
    if x.is_empty() || x.iter().any(|v| !(*v > 0.0)) {
        return domain("weights must be positive");
    }
    if !(b > 0.0) {
        return domain("b must be positive");
    }
    let s: f64 = x.iter().map(|v| 1.0 / v).sum();
    Ok(Allocation { gaps: x.iter().map(|v| b / v / s).collect(), value: b / s })
}

/// Limit-sampler grid of a convergence run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitGridSpec {
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub cells_per_axis: usize,
    #[serde(default = "default_levels")]
    pub origin_levels: usize,
}

fn default_levels() -> usize {
    ORIGIN_LEVELS
}

fn default_j() -> usize {
    20
}

fn default_level() -> f64 {
    0.01
}

/// JSON config of [`convergence_experiment`]. The surface radius is
/// replaced by each entry of `r_grid`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub field: FieldSpec,
    pub surface: SurfaceSpec,
    pub integrand: Integrand,
    pub r_grid: Vec<f64>,
    pub n_rep: usize,
    pub n_limit: usize,
    pub limit_grid: LimitGridSpec,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_j")]
    pub j_max: usize,
    /// Significance level of the two-sample tolerance.
    #[serde(default = "default_level")]
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r: f64,
    pub n_rep: usize,
    pub kolmogorov_distance: f64,
    pub dkw_tol: f64,
    pub bound_exponent: f64,
    pub case: RateCase,
}

/// Distance between normalized K_r ensembles and X_κ draws per radius.
/// Field replications at radius index k use base seed derive_seed(seed, k);
/// limit draws use derive_seed(seed, u64::MAX).
pub fn convergence_experiment(cfg: &ConvergenceConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.field.validate()?;
    if cfg.n_rep == 0 || cfg.n_limit == 0 || cfg.r_grid.is_empty() {
        return Err(Error::EmptySample);
    }
    if cfg.surface.d != cfg.field.d {
        return Err(Error::Config("surface and field dimensions differ".into()));
    }
    let expansion = cfg.integrand.expansion(cfg.j_max)?;
    let kappa = expansion.rank.ok_or(Error::RankNotFound(cfg.j_max))?;
    let unit = SurfaceSpec { r: 1.0, ..cfg.surface.clone() }.build()?;
    let grid = build_grid_with_levels(cfg.field.d, cfg.limit_grid.lambda, cfg.limit_grid.cells_per_axis, cfg.limit_grid.origin_levels)?;
    let sampler = LimitSampler::new(&grid, &unit, kappa, cfg.field.alpha)?;
    let limit: Vec<f64> = sampler.draws(cfg.n_limit, derive_seed(cfg.seed, u64::MAX))?.into_iter().map(|d| d.value).collect();
    let bound = rate_bound(cfg.field.d, cfg.field.alpha, kappa, cfg.field.tau())?;
    let exponent = bound.g_exponent.unwrap_or(bound.bound);
    let tol = dkw_two_sample(cfg.n_rep, cfg.n_limit, cfg.level);
    let g = cfg.integrand.evaluator()?;
    cfg.r_grid
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let surface = unit.rescaled(r)?;
            let values = ensemble_values(&cfg.field, &surface, cfg.method, cfg.n_rep, derive_seed(cfg.seed, k as u64))?;
            let raw: Vec<f64> = values.iter().map(|v| functional_k(v, &surface, &g)).collect();
            let (_, normalized) = normalized_from_raw(&raw, &surface, &expansion, &cfg.field)?;
            Ok(ConvergenceRow {
                r,
                n_rep: cfg.n_rep,
                kolmogorov_distance: kolmogorov_distance(&normalized, &limit)?,
                dkw_tol: tol,
                bound_exponent: exponent,
                case: bound.case,
            })
        })
        .collect()
}

/// CSV with columns r, n_rep, kolmogorov_distance, dkw_tol, bound_exponent, case.
pub fn write_convergence_csv<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["r", "n_rep", "kolmogorov_distance", "dkw_tol", "bound_exponent", "case"])?;
    for row in rows {
        w.write_record([
            fmt_f64(row.r),
            row.n_rep.to_string(),
            fmt_f64(row.kolmogorov_distance),
            fmt_f64(row.dkw_tol),
            fmt_f64(row.bound_exponent),
            row.case.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Log-log SVG of distance against r with a reference line of slope
/// -bound_exponent through the first point.
pub fn convergence_svg(rows: &[ConvergenceRow]) -> String {
    let (w, h, m) = (480.0, 320.0, 40.0);
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.r > 0.0 && r.kolmogorov_distance > 0.0).map(|r| (r.r.ln(), r.kolmogorov_distance.ln())).collect();
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    if pts.len() >= 2 {
        let slope = -rows[0].bound_exponent;
        let ref_line: Vec<(f64, f64)> = pts.iter().map(|&(x, _)| (x, pts[0].1 + slope * (x - pts[0].0))).collect();
        let all = pts.iter().chain(&ref_line);
        let (x0, x1) = all.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
        let (y0, y1) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
        let sx = |x: f64| m + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * m);
        let poly = |p: &[(f64, f64)]| p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect::<Vec<_>>().join(" ");
        out += &format!("<polyline fill=\"none\" stroke=\"black\" points=\"{}\"/>\n", poly(&pts));
        out += &format!("<polyline fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4\" points=\"{}\"/>\n", poly(&ref_line));
    }
    out += "<text x=\"40\" y=\"20\" font-size=\"12\">log distance vs log r</text>\n</svg>\n";
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basics() {
        assert_eq!(kolmogorov_distance(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert_eq!(kolmogorov_distance(&[0.0; 3], &[1.0; 3]).unwrap(), 1.0);
        assert!(kolmogorov_distance(&[], &[1.0]).is_err());
    }

    #[test]
    fn allocation_closed_form() {
        let a = maximize_min_allocation(&[2.0, 1.0], 1.0).unwrap();
        assert!((a.gaps[0] - 1.0 / 3.0).abs() < 1e-15 && (a.value - 2.0 / 3.0).abs() < 1e-15);
    }
}
