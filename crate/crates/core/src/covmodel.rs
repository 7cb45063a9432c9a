//! Covariance and spectral models, slowly varying factors, c₂ and h_τ.

use crate::error::{domain, Result};
use crate::special::gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

/// Slowly varying factor L.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowKind {
    /// L ≡ 1, zero remainder.
    Constant,
    /// L(x) = ln(e + x), g(x) = 1/ln(e + x), τ = 0.
    LogShifted,
}

fn default_u_max() -> f64 {
    50.0
}

/// Field parameters. JSON: `{"d":2,"alpha":0.4,"L":"constant","u_max":50.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub d: usize,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub slowly_varying: SlowKind,
    #[serde(default = "default_u_max")]
    pub u_max: f64,
    /// Remainder exponent used by rate formulas. Ignored for LogShifted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl FieldSpec {
    pub fn new(d: usize, alpha: f64, slowly_varying: SlowKind) -> Result<Self> {
        let s = Self { d, alpha, slowly_varying, u_max: default_u_max(), tau: None };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(d: usize, alpha: f64) -> Result<Self> {
        Self::new(d, alpha, SlowKind::Constant)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return domain(format!("d must be at least 2, got {}", self.d));
        }
        if !(self.alpha > 0.0 && self.alpha < (self.d - 1) as f64) {
            return domain(format!("alpha must lie in (0, d-1), got {}", self.alpha));
        }
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return domain("u_max must be positive");
        }
        match (self.slowly_varying, self.tau) {
            (_, Some(t)) if !(t <= 0.0) => domain("tau must be <= 0"),
            (SlowKind::LogShifted, Some(t)) if t != 0.0 => domain("LogShifted has tau = 0"),
            _ => Ok(()),
        }
    }

    /// τ of the slowly varying factor: 0 for LogShifted, the configured value
    /// (default 0) for Constant.
    pub fn tau(&self) -> f64 {
        match self.slowly_varying {
            SlowKind::LogShifted => 0.0,
            SlowKind::Constant => self.tau.unwrap_or(0.0),
        }
    }

    pub fn slow(&self) -> SlowVarySpec {
        SlowVarySpec { kind: self.slowly_varying, tau: self.tau() }
    }

    /// L(x).
    pub fn l_at(&self, x: f64) -> f64 {
        self.slow().l(x)
    }

    /// B(ρ), with B(0) = 1.
    pub fn covariance(&self, rho: f64) -> f64 {
        let base = (1.0 + rho * rho).powf(-0.5 * self.alpha);
        match self.slowly_varying {
            SlowKind::Constant => base,
            SlowKind::LogShifted => base * log_mixture_factor(self.alpha, rho),
        }
    }

    /// f(u) = c₂ u^{α-d} L(1/u) on (0, u_max], zero above.
    pub fn spectral_density(&self, u: f64) -> f64 {
        if u <= 0.0 || u > self.u_max {
            return 0.0;
        }
        let c = c2(self.d, self.alpha).unwrap_or(f64::NAN);
        c * u.powf(self.alpha - self.d as f64) * self.l_at(1.0 / u)
    }
}

/// Normalized log factor of the LogShifted covariance.
///
/// B(ρ) = (1+ρ²)^{-α/2} E[w(V/(1+ρ²))] / E[w(V)] with V ~ Gamma(α/2, 1) and
/// w(t) = ln(e + t^{-1/2}). This is a Gaussian scale mixture with a
/// positive weight, hence positive definite in every dimension, and it
/// behaves like ρ^{-α} ln ρ at infinity.
fn log_mixture_factor(alpha: f64, rho: f64) -> f64 {
    let c = 1.0 + rho * rho;
    gamma_log_moment(alpha, c) / gamma_log_moment(alpha, 1.0)
}

/// Γ(a)·E[ln(e + (c/V)^{1/2})], V ~ Gamma(a, 1), a = α/2, via the
/// trapezoid rule in log V (spectrally accurate for this analytic
/// integrand).
fn gamma_log_moment(alpha: f64, c: f64) -> f64 {
    let a = 0.5 * alpha;
    let h = 0.2;
    let lo = -45.0 / a;
    let hi = 4.5;
    let n = ((hi - lo) / h).ceil() as usize;
    let mut s = 0.0;
    for k in 0..=n {
        let x = lo + k as f64 * h;
        let v = x.exp();
        let w = (E + (c / v).sqrt()).ln();
        s += (a * x - v).exp() * w;
    }
    s * h
}

/// Slowly varying factor together with its remainder exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlowVarySpec {
    pub kind: SlowKind,
    pub tau: f64,
}

impl SlowVarySpec {
    pub fn l(&self, x: f64) -> f64 {
        match self.kind {
            SlowKind::Constant => 1.0,
            SlowKind::LogShifted => (E + x).ln(),
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        match self.kind {
            SlowKind::Constant => 1.0,
            SlowKind::LogShifted => 1.0 / (E + x).ln(),
        }
    }
}

pub fn c2(d: usize, alpha: f64) -> Result<f64> {
    let df = d as f64;
    if !(alpha > 0.0 && alpha < df) {
        return domain(format!("c2 needs 0 < alpha < d, got alpha = {alpha}, d = {d}"));
    }
    Ok(gamma(0.5 * (df - alpha)) / (2f64.powf(alpha) * PI.powf(0.5 * df) * gamma(0.5 * alpha)))
}

/// h_τ(λ): ln λ at τ = 0, (λ^τ - 1)/τ otherwise.
pub fn h_tau(tau: f64, lambda: f64) -> f64 {
    if tau == 0.0 {
        lambda.ln()
    } else {
        (tau * lambda.ln()).exp_m1() / tau
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RemainderReport {
    pub supremum: f64,
    pub at_r: f64,
    pub at_t: f64,
    pub finite: bool,
}

/// sup over the grids of |1 - L(tr)/L(r)| / (g(r) h_τ(t)). Points where
/// numerator and denominator both vanish (t = 1) count as 0.
pub fn remainder_bound_check(spec: &SlowVarySpec, r_grid: &[f64], t_grid: &[f64]) -> RemainderReport {
    let mut best = RemainderReport { supremum: 0.0, at_r: f64::NAN, at_t: f64::NAN, finite: true };
    for &r in r_grid {
        for &t in t_grid {
            let num = (1.0 - spec.l(t * r) / spec.l(r)).abs();
            let den = spec.g(r) * h_tau(spec.tau, t);
            let ratio = if num == 0.0 { 0.0 } else { num / den };
            if !ratio.is_finite() {
                best.finite = false;
            }
            if ratio > best.supremum || best.at_r.is_nan() {
                best.supremum = ratio.max(best.supremum);
                best.at_r = r;
                best.at_t = t;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let s: FieldSpec = serde_json::from_str(r#"{"d":2,"alpha":0.4,"L":"constant","u_max":50.0}"#).unwrap();
        assert_eq!(s.slowly_varying, SlowKind::Constant);
        assert!(serde_json::from_str::<FieldSpec>(r#"{"d":2,"alpha":0.4,"L":"constant","bogus":1}"#).is_err());
        let t: FieldSpec = serde_json::from_str(r#"{"d":3,"alpha":0.5,"L":"log_shifted"}"#).unwrap();
        assert_eq!(t.u_max, 50.0);
    }

    #[test]
    fn log_shifted_is_normalized_and_decreasing() {
        let s = FieldSpec::new(3, 0.6, SlowKind::LogShifted).unwrap();
        assert!((s.covariance(0.0) - 1.0).abs() < 1e-13);
        let mut prev = 1.0;
        for k in 1..200 {
            let v = s.covariance(k as f64 * 0.5);
            assert!(v <= prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn validation() {
        assert!(FieldSpec::constant(2, 1.0).is_err());
        assert!(FieldSpec::constant(3, 1.9).is_ok());
        assert!(c2(2, 2.0).is_err());
    }
}
