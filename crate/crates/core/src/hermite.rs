//! Probabilists' Hermite polynomials and the coefficient calculus of
//! indicator functionals.
//!
//! Convention: H_0 = 1, H_1 = t, H_{k+1}(t) = t H_k(t) - k H_{k-1}(t), so
//! H_2(t) = t² - 1 and ∫ H_j H_k φ = δ_jk k!. Coefficients are
//! C_j = ∫ G H_j φ with no 1/j! folded in.

use crate::error::{domain, Error, Result};
use crate::quad::{gauss_hermite_prob, gauss_legendre, gl_piecewise};
use crate::rng::rng_from;
use crate::special::{factorial, norm_pdf, norm_sf};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Zero tolerance for coefficients known in closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Zero tolerance for quadrature coefficients, before scaling by max(1, ‖G‖).
pub const QUADRATURE_TOL: f64 = 1e-7;
/// Half-width of the integration window for piecewise rules.
const WINDOW: f64 = 12.0;

pub fn hermite_poly(k: usize, t: f64) -> f64 {
    let mut h0 = 1.0;
    if k == 0 {
        return h0;
    }
    let mut h1 = t;
    for j in 1..k {
        let h2 = t * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// H_0(t)..H_k(t) written into `out` (resized to k + 1).
pub fn hermite_all(k: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if k == 0 {
        return;
    }
    out.push(t);
    for j in 1..k {
        let next = t * out[j] - j as f64 * out[j - 1];
        out.push(next);
    }
}

/// Closed-form coefficient C_j of χ(ω > t); t may be ±∞.
pub fn indicator_coefficient(t: f64, j: usize) -> f64 {
    if j == 0 {
        if t == f64::NEG_INFINITY {
            return 1.0;
        }
        if t == f64::INFINITY {
            return 0.0;
        }
        return norm_sf(t);
    }
    if t.is_infinite() {
        return 0.0;
    }
    norm_pdf(t) * hermite_poly(j - 1, t)
}

/// Sorted union of disjoint open intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let n = intervals.len();
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return domain(format!("bad interval ({lo}, {hi})"));
            }
            if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return domain("interval endpoint on the wrong side of infinity");
            }
            if lo == f64::NEG_INFINITY && i != 0 {
                return domain("only the first interval may start at -inf");
            }
            if hi == f64::INFINITY && i + 1 != n {
                return domain("only the last interval may end at +inf");
            }
            if i > 0 && intervals[i - 1].1 > lo {
                return domain("intervals overlap or are unsorted");
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| x > lo && x < hi)
    }

    /// Finite endpoints, sorted.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|t| t.is_finite())
            .collect()
    }

    /// Gaussian measure of the union.
    pub fn gaussian_measure(&self) -> f64 {
        sojourn_coefficient(self, 0)
    }
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn trim(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    v
}

/// Real roots where p changes sign, sorted. Critical points from the
/// derivative split the line into monotone pieces, each bracketing at most
/// one root.
fn sign_change_roots(p: &[f64]) -> Result<Vec<f64>> {
    let p = trim(p);
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    if deg == 1 {
        return Ok(vec![-p[0] / p[1]]);
    }
    let lead = p[deg];
    let bound = 1.0 + p[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let crit = sign_change_roots(&derivative(&p))?;
    let mut knots = vec![-bound];
    knots.extend(crit.into_iter().filter(|c| c.abs() < bound));
    knots.push(bound);
    let dp = derivative(&p);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (horner(&p, a), horner(&p, b));
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        roots.push(refine_root(&p, &dp, a, b, fa)?);
    }
    Ok(roots)
}

fn refine_root(p: &[f64], dp: &[f64], mut lo: f64, mut hi: f64, flo: f64) -> Result<f64> {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * mid.abs().max(1.0) {
            break;
        }
        let fm = horner(p, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    if hi - lo > 1e-12 * x.abs().max(1.0) {
        return Err(Error::RootIsolationFailure(x));
    }
    // Newton polish inside the bracket
    let mut fx = horner(p, x);
    for _ in 0..8 {
        let d = horner(dp, x);
        if d == 0.0 || fx == 0.0 {
            break;
        }
        let xn = x - fx / d;
        let fxn = horner(p, xn);
        if !(xn >= lo - 1e-12 && xn <= hi + 1e-12) || fxn.abs() >= fx.abs() {
            break;
        }
        x = xn;
        fx = fxn;
    }
    Ok(x)
}

/// Maximal open intervals where S(t) > b. `poly` holds ascending
/// coefficients.
pub fn superlevel_intervals(poly: &[f64], b: f64) -> Result<IntervalUnion> {
    if poly.iter().all(|&c| c == 0.0) || poly.is_empty() {
        return domain("S must be a nonzero polynomial");
    }
    if !b.is_finite() || poly.iter().any(|c| !c.is_finite()) {
        return domain("non-finite polynomial input");
    }
    let mut q = trim(poly);
    q[0] -= b;
    let roots = sign_change_roots(&q)?;
    let above = |x: f64| horner(&q, x) > 0.0;
    if roots.is_empty() {
        return if above(0.0) {
            IntervalUnion::new(vec![(f64::NEG_INFINITY, f64::INFINITY)])
        } else {
            Err(Error::DegenerateSet)
        };
    }
    let mut ends = vec![f64::NEG_INFINITY];
    ends.extend(roots.iter().copied());
    ends.push(f64::INFINITY);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in ends.windows(2) {
        let probe = match (w[0].is_finite(), w[1].is_finite()) {
            (false, _) => w[1] - 1.0,
            (_, false) => w[0] + 1.0,
            _ => 0.5 * (w[0] + w[1]),
        };
        if above(probe) {
            match out.last_mut() {
                Some(last) if last.1 == w[0] => last.1 = w[1],
                _ => out.push((w[0], w[1])),
            }
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateSet);
    }
    IntervalUnion::new(out)
}

/// C_{j} of the indicator of the union. j = 0 gives its Gaussian measure.
pub fn sojourn_coefficient(set: &IntervalUnion, j: usize) -> f64 {
    set.intervals
        .iter()
        .map(|&(lo, hi)| indicator_coefficient(lo, j) - indicator_coefficient(hi, j))
        .sum()
}

pub fn sojourn_rank(set: &IntervalUnion, j_max: usize) -> Result<usize> {
    (1..=j_max)
        .find(|&j| sojourn_coefficient(set, j).abs() > CLOSED_FORM_TOL)
        .ok_or(Error::RankNotFound(j_max))
}

/// Solves ln y - y = c for y > 1, with c < -1. Bisection.
fn upper_branch(c: f64) -> f64 {
    let g = |y: f64| y.ln() - y - c;
    let mut lo = 1.0f64;
    let mut hi = (-2.0 * c).max(2.0);
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lower real branch W_{-1}(x) for x in [-1/e, 0).
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    let e_inv = (-1.0f64).exp();
    if !(x >= -e_inv && x < 0.0) {
        return domain(format!("W_-1 needs x in [-1/e, 0), got {x}"));
    }
    if x + e_inv <= 0.0 {
        return Ok(-1.0);
    }
    // -W solves y e^{-y} = -x with y >= 1
    Ok(-upper_branch((-x).ln()))
}

/// The partner q > 1 of p in (0, 1) with pφ(p) = qφ(q).
pub fn lambert_pair(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p must lie in (0, 1), got {p}"));
    }
    let y = upper_branch(2.0 * p.ln() - p * p);
    Ok(y.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub estimate: f64,
    pub std_error: f64,
    pub theory: f64,
}

impl MomentCheck {
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimate - self.theory).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Monte Carlo estimate of E H_k(ξ) H_m(ξ') for a standard Gaussian pair
/// with correlation `corr`, next to the value δ_km k! corr^k.
pub fn joint_hermite_moment_check(k: usize, m: usize, corr: f64, n_samples: usize, seed: u64) -> Result<MomentCheck> {
    if !(-1.0..=1.0).contains(&corr) {
        return domain("correlation must lie in [-1, 1]");
    }
    if n_samples == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = rng_from(seed);
    let s = (1.0 - corr * corr).sqrt();
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..n_samples {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let v = hermite_poly(k, z1) * hermite_poly(m, corr * z1 + s * z2);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = if n_samples > 1 { m2 / (n_samples - 1) as f64 } else { 0.0 };
    let theory = if k == m { factorial(k) * corr.powi(k as i32) } else { 0.0 };
    Ok(MomentCheck { estimate: mean, std_error: (var / n_samples as f64).sqrt(), theory })
}

/// Truncated Hermite expansion of an integrand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermiteExpansion {
    pub coefficients: Vec<f64>,
    pub truncation_order: usize,
    pub rank: Option<usize>,
    pub l2_norm_sq: f64,
    pub zero_tol: f64,
}

impl HermiteExpansion {
    pub fn from_coefficients(coefficients: Vec<f64>, l2_norm_sq: f64, zero_tol: f64) -> Self {
        let rank = (1..coefficients.len()).find(|&j| coefficients[j].abs() > zero_tol);
        Self { truncation_order: coefficients.len() - 1, coefficients, rank, l2_norm_sq, zero_tol }
    }

    /// Σ_{i ≤ j} C_i²/i! for j = 0..J.
    pub fn parseval_partial(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| {
                acc += c * c / factorial(j);
                acc
            })
            .collect()
    }

    /// Σ_{j > J} C_j²/j!, from the norm.
    pub fn tail_mass(&self) -> f64 {
        (self.l2_norm_sq - self.parseval_partial().last().copied().unwrap_or(0.0)).max(0.0)
    }
}

fn quadrature_coefficients(nodes: &[f64], weights: &[f64], vals: &[f64], j_max: usize) -> (Vec<f64>, f64) {
    let mut c = vec![0.0; j_max + 1];
    let mut l2 = 0.0;
    let mut h = Vec::with_capacity(j_max + 1);
    for ((x, w), g) in nodes.iter().zip(weights).zip(vals) {
        if *g == 0.0 {
            continue;
        }
        hermite_all(j_max, *x, &mut h);
        for j in 0..=j_max {
            c[j] += w * g * h[j];
        }
        l2 += w * g * g;
    }
    (c, l2)
}

fn check_doubling(a: &[f64], b: &[f64], norm: f64) -> Result<()> {
    for (j, (x, y)) in a.iter().zip(b).enumerate() {
        let tol = QUADRATURE_TOL * norm.max(1.0) * factorial(j).sqrt();
        let change = (x - y).abs();
        if change > tol {
            return Err(Error::NonConvergence { index: j, change });
        }
    }
    Ok(())
}

/// C_0..C_J by Gauss-Hermite quadrature with `nodes` points, checked
/// against a rule with twice as many.
pub fn expansion_coefficients<G: Fn(f64) -> f64>(g: G, j_max: usize, nodes: usize) -> Result<HermiteExpansion> {
    if j_max < 1 {
        return domain("J must be at least 1");
    }
    if nodes < 2 * j_max + 2 {
        return domain(format!("need at least {} nodes for J = {j_max}", 2 * j_max + 2));
    }
    let run = |n: usize| {
        let (x, w) = gauss_hermite_prob(n);
        let vals: Vec<f64> = x.iter().map(|&t| g(t)).collect();
        quadrature_coefficients(&x, &w, &vals, j_max)
    };
    let (c1, _) = run(nodes);
    let (c2, l2) = run(2 * nodes);
    if c2.iter().any(|c| !c.is_finite()) || !l2.is_finite() {
        return domain("integrand is not square integrable on the quadrature range");
    }
    check_doubling(&c1, &c2, l2.sqrt())?;
    Ok(HermiteExpansion::from_coefficients(c2, l2, QUADRATURE_TOL * l2.sqrt().max(1.0)))
}

/// C_0..C_J for an integrand with jumps at `breaks`: composite
/// Gauss-Legendre against φ on [-12, 12], split at every jump.
pub fn expansion_coefficients_piecewise<G: Fn(f64) -> f64>(g: G, j_max: usize, breaks: &[f64]) -> Result<HermiteExpansion> {
    if j_max < 1 {
        return domain("J must be at least 1");
    }
    let rule = gauss_legendre(32);
    let run = |max_len: f64| {
        let mut c = vec![0.0; j_max + 1];
        let mut h = Vec::with_capacity(j_max + 1);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj = gl_piecewise(
                |t| {
                    hermite_all(j, t, &mut h);
                    g(t) * h[j] * norm_pdf(t)
                },
                -WINDOW,
                WINDOW,
                breaks,
                max_len,
                &rule,
            );
        }
        let l2 = gl_piecewise(|t| g(t) * g(t) * norm_pdf(t), -WINDOW, WINDOW, breaks, max_len, &rule);
        (c, l2)
    };
    let (c1, _) = run(1.0);
    let (c2, l2) = run(0.5);
    check_doubling(&c1, &c2, l2.sqrt())?;
    Ok(HermiteExpansion::from_coefficients(c2, l2, QUADRATURE_TOL * l2.sqrt().max(1.0)))
}

fn one() -> f64 {
    1.0
}

/// Built-in integrands G.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Integrand {
    /// χ(S(ω) > threshold) for a polynomial S with ascending coefficients.
    IndicatorPoly { poly: Vec<f64>, threshold: f64 },
    /// scale · H_k(ω).
    Hermite {
        k: usize,
        #[serde(default = "one")]
        scale: f64,
    },
    /// χ(ω^l > threshold).
    Power { l: u32, threshold: f64 },
    /// χ(-(ω²-p²)(ω²-q²) > 0) with q the partner of p.
    PairedQuartic { p: f64 },
}

impl Integrand {
    pub fn eval(&self, w: f64) -> f64 {
        match self {
            Integrand::IndicatorPoly { poly, threshold } => (horner(poly, w) > *threshold) as u8 as f64,
            Integrand::Hermite { k, scale } => scale * hermite_poly(*k, w),
            Integrand::Power { l, threshold } => (w.powi(*l as i32) > *threshold) as u8 as f64,
            Integrand::PairedQuartic { .. } => match self.superlevel() {
                Ok(Some(set)) => set.contains(w) as u8 as f64,
                _ => 0.0,
            },
        }
    }

    /// Polynomial of the quartic variant.
    pub fn paired_quartic_poly(p: f64) -> Result<Vec<f64>> {
        let q = lambert_pair(p)?;
        let (p2, q2) = (p * p, q * q);
        Ok(vec![-p2 * q2, 0.0, p2 + q2, 0.0, -1.0])
    }

    /// Superlevel set for indicator kinds, None for Hermite.
    pub fn superlevel(&self) -> Result<Option<IntervalUnion>> {
        let set = match self {
            Integrand::Hermite { .. } => return Ok(None),
            Integrand::IndicatorPoly { poly, threshold } => superlevel_intervals(poly, *threshold)?,
            Integrand::PairedQuartic { p } => superlevel_intervals(&Self::paired_quartic_poly(*p)?, 0.0)?,
            Integrand::Power { l, threshold } => power_set(*l, *threshold)?,
        };
        Ok(Some(set))
    }

    /// G as a closure with the superlevel set resolved once.
    pub fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync + '_>> {
        match self {
            Integrand::PairedQuartic { .. } => {
                let set = self.superlevel()?.expect("indicator kinds have a set");
                Ok(Box::new(move |w| set.contains(w) as u8 as f64))
            }
            _ => Ok(Box::new(move |w| self.eval(w))),
        }
    }

    /// Exact coefficients: closed form for indicators, k!·scale for H_k.
    pub fn expansion(&self, j_max: usize) -> Result<HermiteExpansion> {
        if j_max < 1 {
            return domain("J must be at least 1");
        }
        match self {
            Integrand::Hermite { k, scale } => {
                let mut c = vec![0.0; j_max + 1];
                let norm = scale * scale * factorial(*k);
                if *k <= j_max {
                    c[*k] = scale * factorial(*k);
                }
                Ok(HermiteExpansion::from_coefficients(c, norm, CLOSED_FORM_TOL))
            }
            _ => {
                let set = self.superlevel()?.expect("indicator kinds have a set");
                let c: Vec<f64> = (0..=j_max).map(|j| sojourn_coefficient(&set, j)).collect();
                let l2 = c[0];
                Ok(HermiteExpansion::from_coefficients(c, l2, CLOSED_FORM_TOL))
            }
        }
    }

    /// Coefficients by quadrature (piecewise for indicators).
    pub fn expansion_quadrature(&self, j_max: usize) -> Result<HermiteExpansion> {
        match self.superlevel()? {
            None => expansion_coefficients(|w| self.eval(w), j_max, 128.max(2 * j_max + 2)),
            Some(set) => {
                let breaks = set.endpoints();
                expansion_coefficients_piecewise(|w| set.contains(w) as u8 as f64, j_max, &breaks)
            }
        }
    }
}

fn power_set(l: u32, b: f64) -> Result<IntervalUnion> {
    let (ninf, inf) = (f64::NEG_INFINITY, f64::INFINITY);
    if l == 0 {
        return if 1.0 > b { IntervalUnion::new(vec![(ninf, inf)]) } else { Err(Error::DegenerateSet) };
    }
    if l % 2 == 1 {
        let root = b.signum() * b.abs().powf(1.0 / l as f64);
        return IntervalUnion::new(vec![(root, inf)]);
    }
    if b < 0.0 {
        return IntervalUnion::new(vec![(ninf, inf)]);
    }
    let root = b.powf(1.0 / l as f64);
    IntervalUnion::new(vec![(ninf, -root), (root, inf)])
}
