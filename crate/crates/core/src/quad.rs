//! One-dimensional quadrature rules.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Hermite rule for the standard normal weight φ: Σ w_i f(x_i) ≈ ∫ f φ.
/// Weights sum to 1. Nodes start from the Jacobi-matrix eigenvalues and are
/// polished by Newton steps on the orthonormal recurrence.
pub fn gauss_hermite_prob(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let pim4 = PI.powf(-0.25);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let mut guesses: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    guesses.sort_by(f64::total_cmp);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // physicists' variable z = x/√2, largest roots first
        let mut z = guesses[n - 1 - i] / std::f64::consts::SQRT_2;
        if n % 2 == 1 && i == n / 2 {
            z = 0.0;
        } else {
            for _ in 0..8 {
                let (p, d, _) = hermite_orthonormal(n, z, pim4);
                let dz = p / d;
                if !dz.is_finite() {
                    break;
                }
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
        }
        let (_, pp, scale) = hermite_orthonormal(n, z, pim4);
        // physicists' weight for e^{-x^2}, rescaled to φ
        let wi = 2.0 / (pp * pp) / PI.sqrt() * (-2.0 * scale * RESCALE.ln()).exp();
        let xi = z * std::f64::consts::SQRT_2;
        x[n - 1 - i] = xi;
        x[i] = -xi;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    (x, w)
}

const RESCALE: f64 = 1e150;

/// Orthonormal physicists' Hermite recurrence; returns (p_n(z), p_n'(z), k)
/// with both values divided by RESCALE^k to avoid overflow at large n.
fn hermite_orthonormal(n: usize, z: f64, pim4: f64) -> (f64, f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    let mut k = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            k += 1.0;
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, k)
}

/// Fixed-order Gauss-Legendre integral of f over [a, b].
pub fn gl_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Composite Gauss-Legendre over [a, b] split at `breaks`, with every piece
/// further cut into chunks of length at most `max_len`.
pub fn gl_piecewise<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    max_len: f64,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let mut pts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.extend(inner);
    pts.push(b);
    let mut total = 0.0;
    for win in pts.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi <= lo {
            continue;
        }
        let pieces = ((hi - lo) / max_len).ceil().max(1.0) as usize;
        let step = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let s = lo + k as f64 * step;
            let e = if k + 1 == pieces { hi } else { s + step };
            total += gl_integrate(&mut f, s, e, rule);
        }
    }
    total
}

/// Tanh-sinh integral of f over [a, b]. The integrand receives
/// `(x, x - a, b - x)` with both gaps computed without cancellation, so
/// endpoint singularities can be evaluated accurately.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 6.0f64;
    let mut eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let ch = u.cosh();
        let wt = 0.5 * PI * t.cosh() / (ch * ch);
        // gap to the nearer endpoint: half * (1 - tanh|u|)
        let gap = half * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let (x, ga, gb) = if u >= 0.0 {
            (b - gap, 2.0 * half - gap, gap)
        } else {
            (a + gap, gap, 2.0 * half - gap)
        };
        if gap <= 0.0 {
            return 0.0;
        }
        let v = f(x, ga, gb);
        if v.is_finite() {
            v * wt
        } else {
            0.0
        }
    };
    let mut h = 0.5f64;
    let n0 = (t_max / h) as i64;
    let mut sum = eval(0.0);
    for k in 1..=n0 {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
    }
    let mut estimate = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let n = (t_max / h) as i64;
        let mut k = 1;
        while k <= n {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h * half;
        let done = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if done && h < 0.1 {
            break;
        }
    }
    estimate
}
